use emergence_core::detector::{evaluate_topic, CriteriaOutcome, EmergenceParams};
use emergence_core::metrics::{attributes_at, TopicSeries, YearlyCounts};
use emergence_core::Year;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Topic {
    raw: Vec<u64>,
    coherence: f64,
    /// Citations landing in each year; a window sums its years.
    yearly_citations: Vec<u64>,
}

impl Topic {
    fn series(&self, cluster: u32) -> TopicSeries {
        TopicSeries::new(cluster, YearlyCounts::new(2003, self.raw.clone()), self.coherence)
    }

    fn citations(&self) -> impl Fn(Year, Year) -> u64 + '_ {
        move |s, e| (s..=e).map(|y| self.yearly_citations[(y - 2003) as usize]).sum()
    }
}

fn topic() -> impl Strategy<Value = Topic> {
    (
        prop::collection::vec(0u64..400, 10),
        0.0f64..4.0,
        prop::collection::vec(0u64..800, 10),
    )
        .prop_map(|(raw, coherence, yearly_citations)| Topic {
            raw,
            coherence,
            yearly_citations,
        })
}

fn params() -> impl Strategy<Value = EmergenceParams> {
    (1u32..=5, 0.5f64..6.0, 1.0f64..300.0, 0u64..3000, 0.0f64..3.0).prop_map(|(dt, r_min, p_max, c_min, h_min)| {
        EmergenceParams {
            dt,
            r_min,
            p_max,
            c_min,
            h_min,
        }
    })
}

/// Parameters at least as strict as `p` in every threshold.
fn stricter(p: &EmergenceParams) -> impl Strategy<Value = EmergenceParams> {
    let p = p.clone();
    (0.0f64..3.0, 0.0f64..1.0, 0u64..1000, 0.0f64..1.0).prop_map(move |(dr, fp, dc, dh)| EmergenceParams {
        dt: p.dt,
        r_min: p.r_min + dr,
        p_max: p.p_max * (1.0 - fp).max(0.01),
        c_min: p.c_min + dc,
        h_min: p.h_min + dh,
    })
}

proptest! {
    #[test]
    fn stricter_thresholds_never_add_emergence(t in topic(), (p, q) in params().prop_flat_map(|p| (Just(p.clone()), stricter(&p)))) {
        let loose = evaluate_topic(&t.series(0), &t.citations(), &p);
        let strict = evaluate_topic(&t.series(0), &t.citations(), &q);
        if strict.emerging {
            prop_assert!(loose.emerging);
            prop_assert!(loose.begin_year <= strict.begin_year);
        }
        for y in &strict.emergent_periods {
            prop_assert!(loose.emergent_periods.contains(y));
        }
    }

    #[test]
    fn reported_period_is_the_first_qualifying_one(t in topic(), p in params()) {
        let series = t.series(0);
        let cit = t.citations();
        let v = evaluate_topic(&series, &cit, &p);
        let qualifying: Vec<Year> = series
            .window_starts(p.dt)
            .filter(|&y| CriteriaOutcome::check(&attributes_at(&series, &cit, y, p.dt).unwrap(), &p).all())
            .collect();
        prop_assert_eq!(&v.emergent_periods, &qualifying);
        prop_assert_eq!(v.emerging, !qualifying.is_empty());
        prop_assert_eq!(v.begin_year, qualifying.first().copied());
        if let Some(b) = v.begin_year {
            prop_assert_eq!(v.end_year, Some(b + p.dt as Year));
            let row = v.attributes.unwrap();
            prop_assert_eq!(row.begin_year, b);
            prop_assert!(row.growth.unwrap() >= p.r_min);
            prop_assert!(row.novelty <= p.p_max);
            prop_assert!(row.impact >= p.c_min);
            prop_assert!(row.coherence >= p.h_min);
        }
    }

    #[test]
    fn no_emergence_below_growth_threshold(t in topic(), p in params()) {
        let v = evaluate_topic(&t.series(0), &t.citations(), &p);
        let max_growth = v.max_growth.as_ref().and_then(|r| r.growth);
        if max_growth.is_none_or(|g| g < p.r_min) {
            prop_assert!(!v.emerging);
        }
    }

    #[test]
    fn verdicts_do_not_depend_on_topic_order(topics in prop::collection::vec(topic(), 1..8), p in params(), rot in 0usize..8) {
        let forward: Vec<_> = topics
            .iter()
            .enumerate()
            .map(|(i, t)| evaluate_topic(&t.series(i as u32), &t.citations(), &p))
            .collect();
        let n = topics.len();
        for k in 0..n {
            let i = (k + rot) % n;
            let v = evaluate_topic(&topics[i].series(i as u32), &topics[i].citations(), &p);
            prop_assert_eq!(&v, &forward[i]);
        }
    }
}
