//! The three-step conditional coding framework on discrete sources:
//! lossless side information, a conditional MSE codec designed by
//! partition search, a posterior-sampling perceptual decoder sharing the
//! same bitstream, an overhead audit of the conditional entropy model,
//! and distortion–perception traversal by linear interpolation.

mod audit;
mod design;
mod instance;
mod serial;
mod traversal;

pub use audit::{overhead_audit, OverheadAudit};
pub use design::{attach_posterior_decoder, design_mse_codec};
pub use instance::{
    decode_instance, encode_instance, roundtrip_instance, DecodedInstance, EncodedInstance,
};
pub use serial::{pipeline_from_toml, pipeline_to_toml, PIPELINE_FORMAT_VERSION};
pub use traversal::{dp_traversal, traversal_csv, TraversalPoint};

use crate::entropy::{CoderError, FrequencyModel, PrefixCode};
use crate::info::InfoError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Coder(#[from] CoderError),
    #[error("|M| budget must be at least 1")]
    BadBudget,
    #[error("g1 is not the posterior-mean decoder at (m={m}, y={y}): stored {got}, posterior mean {want}")]
    NotPosteriorMean { m: usize, y: usize, got: f64, want: f64 },
    #[error("posterior decoder not attached")]
    NoPosteriorDecoder,
    #[error("interpolation weight {0} outside [0, 1]")]
    BadAlpha(f64),
    #[error("side information is not deterministic of the source")]
    YNotDeterministic,
    #[error("pipeline does not match the source: {0}")]
    Mismatch(String),
    #[error("pipeline file: {0}")]
    Serial(String),
}

/// Exact posterior decoder: rows p(x | m, y) and the base seed for
/// reproducible sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDecoder {
    /// `rows[m][y]`; empty for (m, y) pairs that cannot occur.
    pub(crate) rows: Vec<Vec<Vec<f64>>>,
    pub(crate) seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRates {
    /// Expected prefix-code length of Y.
    pub r_y_bits: f64,
    /// Expected conditional model cost of M (model cross-entropy).
    pub r_m_bits: f64,
    pub h_y_bits: f64,
    pub h_m_bits: f64,
    pub h_m_given_y_bits: f64,
}

/// A designed codec: deterministic encoder partition, posterior-mean
/// decoder, per-context entropy models for M, a prefix code for Y, and
/// optionally the posterior-sampling decoder.
#[derive(Debug, Clone)]
pub struct CodecPipeline {
    pub(crate) conditional: bool,
    pub(crate) x_values: Vec<f64>,
    pub(crate) y_labels: Vec<String>,
    pub(crate) p_y: Vec<f64>,
    /// m = encoder[x][y], global cell ids.
    pub(crate) encoder: Vec<Vec<usize>>,
    pub(crate) m_count: usize,
    /// Posterior means E[X | m, y]; NaN where p(m, y) = 0.
    pub(crate) g1: Vec<Vec<f64>>,
    /// Per context y: the m values with p(m | y) > 0, ascending.
    pub(crate) m_symbols_per_y: Vec<Vec<usize>>,
    /// p(m | y) aligned with `m_symbols_per_y`.
    pub(crate) m_probs_per_y: Vec<Vec<f64>>,
    pub(crate) m_models: Vec<FrequencyModel>,
    pub(crate) y_code: PrefixCode,
    pub(crate) g2: Option<PosteriorDecoder>,
    pub(crate) rates: PipelineRates,
    /// Overall E[(X − X̂)²] under the design source.
    pub(crate) mse_g1: f64,
    pub(crate) design_notes: Vec<String>,
}

impl CodecPipeline {
    pub fn m_count(&self) -> usize {
        self.m_count
    }

    pub fn conditional(&self) -> bool {
        self.conditional
    }

    pub fn encode_map(&self, x: usize, y: usize) -> usize {
        self.encoder[x][y]
    }

    pub fn posterior_mean(&self, m: usize, y: usize) -> f64 {
        self.g1[m][y]
    }

    pub fn rates(&self) -> &PipelineRates {
        &self.rates
    }

    pub fn design_notes(&self) -> &[String] {
        &self.design_notes
    }

    pub fn has_posterior_decoder(&self) -> bool {
        self.g2.is_some()
    }

    pub fn posterior_row(&self, m: usize, y: usize) -> Option<&[f64]> {
        self.g2.as_ref().map(|g| g.rows[m][y].as_slice())
    }

    pub fn y_code(&self) -> &PrefixCode {
        &self.y_code
    }

    /// p(m | y) over the context's symbol list.
    pub fn context(&self, y: usize) -> (&[usize], &[f64], &FrequencyModel) {
        (&self.m_symbols_per_y[y], &self.m_probs_per_y[y], &self.m_models[y])
    }

    /// Overall E[(X − X̂)²] of the posterior-mean decoder under the source
    /// that designed the pipeline.
    pub fn g1_mse(&self) -> f64 {
        self.mse_g1
    }
}
