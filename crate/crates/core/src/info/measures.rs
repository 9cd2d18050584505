//! Exact Shannon measures in bits via direct summation.

use super::InfoError;

/// Entropy of a pmf in bits; `0 log 0 = 0`. Does not renormalize.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// I(X; Y) of a joint `p[x][y]` in bits.
pub fn mutual_information_bits(pxy: &[Vec<f64>]) -> f64 {
    let nx = pxy.len();
    let ny = pxy.first().map_or(0, |r| r.len());
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for (i, row) in pxy.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            px[i] += p;
            py[j] += p;
        }
    }
    let mut total = 0.0;
    for (i, row) in pxy.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                total += p * (p / (px[i] * py[j])).log2();
            }
        }
    }
    total
}

/// Joint pmf over up to three named variables, stored row-major.
#[derive(Debug, Clone)]
pub struct JointPmf {
    vars: Vec<String>,
    dims: Vec<usize>,
    p: Vec<f64>,
}

impl JointPmf {
    pub fn new(vars: Vec<String>, dims: Vec<usize>, p: Vec<f64>) -> Result<Self, InfoError> {
        if vars.len() != dims.len() {
            return Err(InfoError::ShapeMismatch {
                context: format!("{} variable names for {} dims", vars.len(), dims.len()),
            });
        }
        let expect: usize = dims.iter().product();
        if p.len() != expect {
            return Err(InfoError::ShapeMismatch {
                context: format!("{} entries for dims {:?}", p.len(), dims),
            });
        }
        let mut sum = 0.0;
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(InfoError::BadProbability { value: v, row: i, col: 0 });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > super::NORMALIZATION_TOL {
            return Err(InfoError::Unnormalized { sum, tol: super::NORMALIZATION_TOL });
        }
        Ok(Self { vars, dims, p })
    }

    pub fn from_matrix(
        var_a: &str,
        var_b: &str,
        pab: &[Vec<f64>],
    ) -> Result<Self, InfoError> {
        let na = pab.len();
        let nb = pab.first().map_or(0, |r| r.len());
        let flat: Vec<f64> = pab.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(vec![var_a.to_string(), var_b.to_string()], vec![na, nb], flat)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    fn axis_of(&self, var: &str) -> Result<usize, InfoError> {
        self.vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| InfoError::UnknownVariable(var.to_string()))
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            idx[axis] = flat % self.dims[axis];
            flat /= self.dims[axis];
        }
        idx
    }

    /// Entropy in bits of the marginal over the given axes.
    fn entropy_of_axes(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let size: usize = dims.iter().product();
        let mut marg = vec![0.0; size];
        for (flat, &v) in self.p.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let idx = self.unravel(flat);
            let mut m = 0;
            for (k, &a) in axes.iter().enumerate() {
                m = m * dims[k] + idx[a];
            }
            marg[m] += v;
        }
        entropy_bits(&marg)
    }

    fn entropy_of(&self, vars: &[String]) -> Result<f64, InfoError> {
        let axes: Vec<usize> = vars
            .iter()
            .map(|v| self.axis_of(v))
            .collect::<Result<_, _>>()?;
        Ok(self.entropy_of_axes(&axes))
    }
}

/// Measure queries over a [`JointPmf`].
#[derive(Debug, Clone)]
pub enum InfoQuery {
    /// H(vars)
    Entropy(Vec<String>),
    /// H(of | given)
    ConditionalEntropy { of: Vec<String>, given: Vec<String> },
    /// I(a; b)
    MutualInformation(String, String),
    /// I(a; b | given)
    ConditionalMutualInformation { a: String, b: String, given: String },
}

/// Exact value of the queried measure, in bits.
pub fn info_measures(joint: &JointPmf, query: &InfoQuery) -> Result<f64, InfoError> {
    match query {
        InfoQuery::Entropy(vars) => joint.entropy_of(vars),
        InfoQuery::ConditionalEntropy { of, given } => {
            let mut both = of.clone();
            both.extend(given.iter().cloned());
            Ok(joint.entropy_of(&both)? - joint.entropy_of(given)?)
        }
        InfoQuery::MutualInformation(a, b) => {
            let hab = joint.entropy_of(&[a.clone(), b.clone()])?;
            Ok(joint.entropy_of(std::slice::from_ref(a))?
                + joint.entropy_of(std::slice::from_ref(b))?
                - hab)
        }
        InfoQuery::ConditionalMutualInformation { a, b, given } => {
            let hac = joint.entropy_of(&[a.clone(), given.clone()])?;
            let hbc = joint.entropy_of(&[b.clone(), given.clone()])?;
            let habc = joint.entropy_of(&[a.clone(), b.clone(), given.clone()])?;
            let hc = joint.entropy_of(std::slice::from_ref(given))?;
            Ok(hac + hbc - habc - hc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_four_ary_entropy_is_two_bits() {
        let j = JointPmf::new(vec!["x".into()], vec![4], vec![0.25; 4]).unwrap();
        let h = info_measures(&j, &InfoQuery::Entropy(vec!["x".into()])).unwrap();
        assert!((h - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_channel_cmi_is_one_bit() {
        // X uniform binary, Xhat = X, Y constant.
        let mut p = vec![0.0; 2 * 2 * 1];
        p[0] = 0.5; // (x=0, xhat=0, y=0)
        p[3] = 0.5; // (x=1, xhat=1, y=0)
        let j = JointPmf::new(
            vec!["x".into(), "xhat".into(), "y".into()],
            vec![2, 2, 1],
            p,
        )
        .unwrap();
        let v = info_measures(
            &j,
            &InfoQuery::ConditionalMutualInformation {
                a: "x".into(),
                b: "xhat".into(),
                given: "y".into(),
            },
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_matches_direct_summation() {
        // Direct-summation oracle at extended precision: sum p log2(p/(px py))
        // computed term by term below.
        let pxy = vec![vec![0.4, 0.1], vec![0.1, 0.4]];
        let oracle = {
            let mut acc: f64 = 0.0;
            acc += 0.4 * (0.4f64 / 0.25).log2() * 2.0;
            acc += 0.1 * (0.1f64 / 0.25).log2() * 2.0;
            acc
        };
        let j = JointPmf::from_matrix("x", "y", &pxy).unwrap();
        let v = info_measures(&j, &InfoQuery::MutualInformation("x".into(), "y".into())).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 0.2781).abs() < 1e-4);
        assert!((mutual_information_bits(&pxy) - oracle).abs() < 1e-12);
    }

    #[test]
    fn unknown_variable_is_an_error() {
        let j = JointPmf::new(vec!["x".into()], vec![2], vec![0.5, 0.5]).unwrap();
        let err = info_measures(&j, &InfoQuery::Entropy(vec!["z".into()])).unwrap_err();
        assert!(matches!(err, InfoError::UnknownVariable(_)));
    }

    #[test]
    fn unnormalized_joint_is_rejected() {
        let err = JointPmf::new(vec!["x".into()], vec![2], vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, InfoError::Unnormalized { .. }));
    }
}
