//! Pipeline orchestration, topic labels and report writers behind the
//! `emergence` command.

pub mod labels;
pub mod pipeline;
pub mod report;

pub use labels::{label_topics, TopicLabel};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineSummary};
