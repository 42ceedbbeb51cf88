//! Pedestrian-vehicle conflict detection and reaction-choice modelling for
//! shared-space trajectory data.
//!
//! The stages are: predict every user's path ([`conflict`]), flag
//! conflict instants, describe them by explanatory variables
//! ([`predictors`]), label each user's evasive action from the change of
//! their arrival time at the crossing point ([`labeling`]), fit a
//! three-alternative logit ([`mnl`]) and score it ([`evaluation`]).
//! [`pipeline`] chains them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod conflict;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod labeling;
pub mod mnl;
pub mod pipeline;
pub mod predictors;
pub mod report;
pub mod synth;
pub mod trajectory;

pub use config::PipelineConfig;
pub use error::{Error, Result};
