//! Journal usage networks from server logs, compared against citation
//! networks through rank-correlated impact metrics.

pub mod graph;
pub mod identify;
pub mod metrics;
pub mod metricstats;
pub mod ingest;
pub mod netbuild;
pub mod pipeline;
pub mod scimap;
pub mod sessionize;
pub mod synth;
