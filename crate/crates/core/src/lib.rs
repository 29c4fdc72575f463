pub mod centrality;
pub mod ces;
pub mod community;
pub mod cooccur;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod layout;
pub mod pipeline;
pub mod synth;
