//! Reproducible experiment corpora: seeded generators for random
//! sources, deterministic-Y sources, enumerable randomness instances and
//! the fixed golden-file inputs. The CLI harness and the acceptance
//! suite share these so reported numbers are regenerable.

use crate::entropy::FrequencyModel;
use crate::info::{JointSource, RationalJoint};
use crate::randomness::RandomnessInstance;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random joint source with every conditional supported, optionally
/// carrying sorted real embeddings.
pub fn random_source(
    rng: &mut ChaCha12Rng,
    nx: usize,
    ny: usize,
    embedded: bool,
) -> JointSource {
    loop {
        let mut pmf = vec![vec![0.0f64; ny]; nx];
        let mut total = 0.0;
        for row in pmf.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.random_range(0.02..1.0);
                total += *v;
            }
        }
        for row in pmf.iter_mut() {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        let values = embedded.then(|| {
            let mut vals: Vec<f64> = (0..nx).map(|_| rng.random_range(-2.0..2.0)).collect();
            vals.sort_by(|a, b| a.total_cmp(b));
            // Distinct embeddings keep MSE cells unambiguous.
            for i in 1..vals.len() {
                if vals[i] - vals[i - 1] < 1e-3 {
                    vals[i] = vals[i - 1] + 1e-3;
                }
            }
            vals
        });
        let labels = (0..nx).map(|i| i.to_string()).collect();
        let y_labels = (0..ny).map(|i| format!("y{i}")).collect();
        if let Ok(src) = JointSource::new(labels, y_labels, pmf, values) {
            return src;
        }
    }
}

/// Random source whose side information is a deterministic function of
/// the symbol (labels partitioned round-robin after a shuffle).
pub fn random_det_y_source(rng: &mut ChaCha12Rng, nx: usize, ny: usize) -> JointSource {
    loop {
        let mut assignment: Vec<usize> = (0..nx).map(|x| x % ny).collect();
        assignment.shuffle(rng);
        let mut pmf = vec![vec![0.0f64; ny]; nx];
        let mut total = 0.0;
        for (x, row) in pmf.iter_mut().enumerate() {
            let p = rng.random_range(0.05..1.0);
            row[assignment[x]] = p;
            total += p;
        }
        for row in pmf.iter_mut() {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        let values: Vec<f64> = (0..nx).map(|x| x as f64 + rng.random_range(-0.3..0.3)).collect();
        let labels = (0..nx).map(|i| i.to_string()).collect();
        let y_labels = (0..ny).map(|i| format!("y{i}")).collect();
        if let Ok(src) = JointSource::new(labels, y_labels, pmf, Some(values)) {
            if src.num_y() == ny && src.p_y().iter().all(|&p| p > 0.0) {
                return src;
            }
        }
    }
}

/// Random binary-X binary-Y instance for the oracle-equivalence tests.
pub fn random_2x2_source(rng: &mut ChaCha12Rng) -> JointSource {
    random_source(rng, 2, 2, true)
}

/// Enumerable randomness instances: rational sources with small
/// denominators, deterministic encoders and Kraft-valid fixed-length
/// codes, filtered so the feasibility search succeeds within the bound.
pub fn randomness_corpus(seed: u64, count: usize) -> Vec<RandomnessInstance> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    // Smooth denominators keep the divisibility structure searchable.
    const DENOMS: [u64; 6] = [2, 3, 4, 6, 8, 12];
    while out.len() < count {
        let conditional = rng.random_bool(0.4);
        let ny = if conditional { 2 } else { 1 };
        let nx = rng.random_range(2..=4usize);
        let base = DENOMS[rng.random_range(0..DENOMS.len())];
        // Build per-cell numerators over denominator base * ny.
        let den = base * ny as u64;
        let mut nums = vec![vec![0u64; ny]; nx];
        let mut ok = true;
        for y in 0..ny {
            // Compose `base` into nx parts, allowing zeros off the
            // diagonal but keeping each column occupied.
            let mut remaining = base;
            for x in 0..nx {
                let v = if x == nx - 1 {
                    remaining
                } else {
                    rng.random_range(0..=remaining)
                };
                nums[x][y] = v;
                remaining -= v;
            }
            if nums.iter().map(|r| r[y]).sum::<u64>() == 0 {
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let joint = match RationalJoint::new(nums, den) {
            Ok(j) => j,
            Err(_) => continue,
        };
        let m_count = rng.random_range(1..=3usize.min(nx));
        let encoder: Vec<Vec<usize>> = (0..nx)
            .map(|x| (0..ny).map(|_| x % m_count).collect())
            .collect();
        // Fixed-length code: ceil(log2 |M|) bits per codeword.
        let len = (m_count as f64).log2().ceil() as u32;
        let code_lengths = vec![vec![len; m_count]];
        let inst = RandomnessInstance {
            source: joint,
            encoder,
            code_lengths,
            conditional,
            max_w: 24,
        };
        if inst.validate().is_ok() && crate::randomness::min_common_randomness(&inst).is_ok() {
            out.push(inst);
        }
    }
    out
}

/// The three worked 4-ary instances: lossless, constant code, 1-bit code.
pub fn bundled_randomness_instances() -> Vec<(String, RandomnessInstance)> {
    let uniform4 = || RationalJoint::marginal(vec![1, 1, 1, 1], 4).unwrap();
    vec![
        (
            "uniform4-lossless".to_string(),
            RandomnessInstance {
                source: uniform4(),
                encoder: vec![vec![0], vec![1], vec![2], vec![3]],
                code_lengths: vec![vec![2, 2, 2, 2]],
                conditional: false,
                max_w: 24,
            },
        ),
        (
            "uniform4-constant".to_string(),
            RandomnessInstance {
                source: uniform4(),
                encoder: vec![vec![0]; 4],
                code_lengths: vec![vec![0]],
                conditional: false,
                max_w: 24,
            },
        ),
        (
            "uniform4-onebit".to_string(),
            RandomnessInstance {
                source: uniform4(),
                encoder: vec![vec![0], vec![0], vec![1], vec![1]],
                code_lengths: vec![vec![1, 1]],
                conditional: false,
                max_w: 24,
            },
        ),
    ]
}

/// Fixed input for the `.bits` goldens: two models and a deterministic
/// symbol sequence drawn from them.
pub struct GoldenAcInput {
    pub name: &'static str,
    pub models: Vec<FrequencyModel>,
    pub model_ids: Vec<usize>,
    pub symbols: Vec<usize>,
}

pub fn golden_ac_inputs() -> Vec<GoldenAcInput> {
    let skewed = FrequencyModel::from_pmf(&[0.82, 0.12, 0.06], 1 << 12).unwrap();
    let uniform = FrequencyModel::from_counts(&[1, 1, 1, 1]).unwrap();
    let mut rng = rng(0x9bd1_f00d);
    let mut symbols = Vec::new();
    let mut model_ids = Vec::new();
    for i in 0..160 {
        let id = i % 2;
        model_ids.push(id);
        let m = if id == 0 { &skewed } else { &uniform };
        let t = rng.random_range(0..m.total());
        symbols.push(m.locate(t));
    }
    vec![
        GoldenAcInput {
            name: "mixed-contexts",
            models: vec![skewed.clone(), uniform.clone()],
            model_ids,
            symbols,
        },
        GoldenAcInput {
            name: "skewed-run",
            models: vec![skewed],
            model_ids: vec![0; 48],
            symbols: vec![
                0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 1, 1, 0, 0, 0, 0, 2, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0,
                0, 0, 2, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 2, 0, 0, 0,
            ],
        },
    ]
}

/// The 4-point pipeline used for the golden instance record.
pub fn golden_pipeline_source() -> JointSource {
    JointSource::from_x_marginal(
        (0..4).map(|i| i.to_string()).collect(),
        vec![0.25; 4],
        Some(vec![0.0, 1.0, 2.0, 3.0]),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_are_deterministic_per_seed() {
        let a = randomness_corpus(3, 5);
        let b = randomness_corpus(3, 5);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.encoder, y.encoder);
            assert_eq!(x.source, y.source);
        }
        let mut r1 = rng(9);
        let mut r2 = rng(9);
        assert_eq!(random_source(&mut r1, 3, 2, true), random_source(&mut r2, 3, 2, true));
    }

    #[test]
    fn det_y_sources_are_deterministic_of_x() {
        let mut r = rng(5);
        for _ in 0..20 {
            let src = random_det_y_source(&mut r, 5, 2);
            assert!(src.y_is_deterministic_of_x());
        }
    }

    #[test]
    fn bundled_instances_validate() {
        for (name, inst) in bundled_randomness_instances() {
            assert!(inst.validate().is_ok(), "{name}");
        }
    }
}
