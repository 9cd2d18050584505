//! Versioned pipeline serialization: partition, means, posterior tables
//! and code tables as structured text.

use super::{CodecError, CodecPipeline, PipelineRates, PosteriorDecoder};
use crate::entropy::{FrequencyModel, PrefixCode};
use serde::{Deserialize, Serialize};

pub const PIPELINE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineFile {
    version: u32,
    conditional: bool,
    x_values: Vec<f64>,
    y_labels: Vec<String>,
    p_y: Vec<f64>,
    m_count: usize,
    /// encoder[x][y]
    encoder: Vec<Vec<usize>>,
    /// g1[m][y]; NaN marks impossible pairs (TOML supports nan).
    g1: Vec<Vec<f64>>,
    m_symbols_per_y: Vec<Vec<usize>>,
    m_probs_per_y: Vec<Vec<f64>>,
    /// Frequency-model counts per context.
    m_model_counts: Vec<Vec<u32>>,
    y_code_lengths: Vec<u32>,
    rates: RatesFile,
    mse_g1: f64,
    design_notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g2: Option<G2File>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatesFile {
    r_y_bits: f64,
    r_m_bits: f64,
    h_y_bits: f64,
    h_m_bits: f64,
    h_m_given_y_bits: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct G2File {
    seed: u64,
    /// rows[m][y][x]; empty vectors mark impossible pairs.
    rows: Vec<Vec<Vec<f64>>>,
}

pub fn pipeline_to_toml(pipeline: &CodecPipeline) -> Result<String, CodecError> {
    let file = PipelineFile {
        version: PIPELINE_FORMAT_VERSION,
        conditional: pipeline.conditional,
        x_values: pipeline.x_values.clone(),
        y_labels: pipeline.y_labels.clone(),
        p_y: pipeline.p_y.clone(),
        m_count: pipeline.m_count,
        encoder: pipeline.encoder.clone(),
        g1: pipeline.g1.clone(),
        m_symbols_per_y: pipeline.m_symbols_per_y.clone(),
        m_probs_per_y: pipeline.m_probs_per_y.clone(),
        m_model_counts: pipeline.m_models.iter().map(|m| m.counts()).collect(),
        y_code_lengths: pipeline.y_code.lengths().to_vec(),
        rates: RatesFile {
            r_y_bits: pipeline.rates.r_y_bits,
            r_m_bits: pipeline.rates.r_m_bits,
            h_y_bits: pipeline.rates.h_y_bits,
            h_m_bits: pipeline.rates.h_m_bits,
            h_m_given_y_bits: pipeline.rates.h_m_given_y_bits,
        },
        mse_g1: pipeline.mse_g1,
        design_notes: pipeline.design_notes.clone(),
        g2: pipeline
            .g2
            .as_ref()
            .map(|g| G2File { seed: g.seed, rows: g.rows.clone() }),
    };
    toml::to_string(&file).map_err(|e| CodecError::Serial(e.to_string()))
}

pub fn pipeline_from_toml(text: &str) -> Result<CodecPipeline, CodecError> {
    let file: PipelineFile =
        toml::from_str(text).map_err(|e| CodecError::Serial(e.to_string()))?;
    if file.version != PIPELINE_FORMAT_VERSION {
        return Err(CodecError::Serial(format!(
            "pipeline format v{} not supported (expected v{PIPELINE_FORMAT_VERSION})",
            file.version
        )));
    }
    let ny = file.y_labels.len();
    if file.encoder.iter().any(|row| row.len() != ny)
        || file.g1.len() != file.m_count
        || file.m_symbols_per_y.len() != ny
        || file.m_probs_per_y.len() != ny
        || file.m_model_counts.len() != ny
        || file.y_code_lengths.len() != ny
    {
        return Err(CodecError::Serial("inconsistent table shapes".into()));
    }
    let m_models = file
        .m_model_counts
        .iter()
        .map(|counts| FrequencyModel::from_counts(counts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CodecPipeline {
        conditional: file.conditional,
        x_values: file.x_values,
        y_labels: file.y_labels,
        p_y: file.p_y,
        encoder: file.encoder,
        m_count: file.m_count,
        g1: file.g1,
        m_symbols_per_y: file.m_symbols_per_y,
        m_probs_per_y: file.m_probs_per_y,
        m_models,
        y_code: PrefixCode::from_lengths(file.y_code_lengths),
        g2: file.g2.map(|g| PosteriorDecoder { seed: g.seed, rows: g.rows }),
        rates: PipelineRates {
            r_y_bits: file.rates.r_y_bits,
            r_m_bits: file.rates.r_m_bits,
            h_y_bits: file.rates.h_y_bits,
            h_m_bits: file.rates.h_m_bits,
            h_m_given_y_bits: file.rates.h_m_given_y_bits,
        },
        mse_g1: file.mse_g1,
        design_notes: file.design_notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{attach_posterior_decoder, design_mse_codec, roundtrip_instance};
    use crate::info::JointSource;

    #[test]
    fn pipeline_roundtrips_through_toml() {
        let src = JointSource::new(
            vec!["0".into(), "1".into(), "2".into(), "3".into()],
            vec!["even".into(), "odd".into()],
            vec![
                vec![0.2, 0.0],
                vec![0.0, 0.3],
                vec![0.3, 0.0],
                vec![0.0, 0.2],
            ],
            Some(vec![0.0, 1.0, 2.0, 3.0]),
        )
        .unwrap();
        let mut pipe = design_mse_codec(&src, 2, true).unwrap();
        attach_posterior_decoder(&mut pipe, &src, 5).unwrap();
        let text = pipeline_to_toml(&pipe).unwrap();
        let back = pipeline_from_toml(&text).unwrap();
        assert_eq!(back.encoder, pipe.encoder);
        assert_eq!(back.m_count, pipe.m_count);
        assert_eq!(back.m_models, pipe.m_models);
        assert_eq!(back.y_code, pipe.y_code);
        // NaN-bearing g1 entries survive (NaN != NaN, so compare bits).
        for (a, b) in back.g1.iter().flatten().zip(pipe.g1.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // The deserialized pipeline still encodes and decodes.
        let rec = roundtrip_instance(&back, 2, 0, 0.5, 11).unwrap();
        assert_eq!(rec.y, 0);
    }

    #[test]
    fn version_and_shape_are_enforced() {
        let src = JointSource::from_x_marginal(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            Some(vec![0.0, 1.0]),
        )
        .unwrap();
        let pipe = design_mse_codec(&src, 2, true).unwrap();
        let text = pipeline_to_toml(&pipe).unwrap();
        let bad = text.replace("version = 1", "version = 99");
        assert!(matches!(pipeline_from_toml(&bad), Err(CodecError::Serial(_))));
        assert!(matches!(pipeline_from_toml("version = 1"), Err(CodecError::Serial(_))));
    }
}
