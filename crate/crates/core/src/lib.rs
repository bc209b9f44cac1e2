//! Regional clustering of geographic units by the profile of activities
//! their inhabitants take part in.
//!
//! The pipeline ingests a region × activity count matrix, keeps activities
//! whose players are regionally concentrated, normalizes each region by its
//! total player count, clusters regions with average linkage over the
//! phi-square contingency distance, and scores the result against province
//! boundaries and geographic neighbourhoods.
//!
//! ```no_run
//! use regiocluster::config::PipelineConfig;
//! use regiocluster::pipeline;
//!
//! let cfg = PipelineConfig::from_file("pipeline.conf".as_ref()).unwrap();
//! let (corpus, _warnings) = pipeline::load(&cfg).unwrap();
//! let outcome = pipeline::run(&corpus, &cfg, None).unwrap();
//! println!("{}", outcome.newick);
//! ```

pub mod clustering;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod output;
pub mod pipeline;
pub mod selection;

pub mod cli;

pub use error::{Error, Result};
