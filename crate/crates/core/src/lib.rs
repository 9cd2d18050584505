//! Workbench for rate–distortion trade-offs with conditional perception
//! constraints on finite discrete sources: exact trade-off solvers, a
//! one-shot channel-simulation codec, a three-step conditional coding
//! pipeline with bit-exact entropy coding, posterior-sampling perceptual
//! decoding, and brute-force verification of the common-randomness lower
//! bound.

pub mod cli;
pub mod codec;
pub mod corpus;
pub mod entropy;
pub mod info;
pub mod oneshot;
pub mod randomness;
pub mod solver;
