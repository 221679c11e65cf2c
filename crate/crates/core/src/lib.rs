//! Exact realization of finite metrics by weighted trees and unicyclic graphs.

mod kernel;

pub mod cli;
pub mod compaction;
pub mod cycle;
pub mod gen;
pub mod graph;
pub mod metric;
pub mod rational;
pub mod realize;
pub mod tropical;

pub use metric::{DistanceMatrix, Label, LabeledMatrix};
pub use rational::Rational;
