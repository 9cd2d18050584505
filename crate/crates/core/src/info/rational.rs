//! Exact-rational probability tables: integer numerators over a single
//! common denominator, so marginal-matching constraints reduce to integer
//! equalities.

use super::{InfoError, JointSource};

/// Joint pmf over (x, y) as `nums[x][y] / den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalJoint {
    nums: Vec<Vec<u64>>,
    den: u64,
}

impl RationalJoint {
    pub fn new(nums: Vec<Vec<u64>>, den: u64) -> Result<Self, InfoError> {
        if den == 0 {
            return Err(InfoError::Rational("denominator must be positive".into()));
        }
        let ny = nums.first().map_or(0, |r| r.len());
        if nums.is_empty() || ny == 0 {
            return Err(InfoError::Rational("empty table".into()));
        }
        let mut sum: u64 = 0;
        for row in &nums {
            if row.len() != ny {
                return Err(InfoError::Rational("ragged rows".into()));
            }
            for &n in row {
                sum = sum
                    .checked_add(n)
                    .ok_or_else(|| InfoError::Rational("numerator overflow".into()))?;
            }
        }
        if sum != den {
            return Err(InfoError::Rational(format!(
                "numerators sum to {sum}, expected denominator {den}"
            )));
        }
        for y in 0..ny {
            if nums.iter().map(|r| r[y]).sum::<u64>() == 0 {
                return Err(InfoError::Rational(format!("column {y} has zero mass")));
            }
        }
        Ok(Self { nums, den })
    }

    pub fn marginal(nums: Vec<u64>, den: u64) -> Result<Self, InfoError> {
        Self::new(nums.into_iter().map(|n| vec![n]).collect(), den)
    }

    pub fn num_x(&self) -> usize {
        self.nums.len()
    }

    pub fn num_y(&self) -> usize {
        self.nums[0].len()
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn num(&self, x: usize, y: usize) -> u64 {
        self.nums[x][y]
    }

    pub fn x_marginal_nums(&self) -> Vec<u64> {
        self.nums.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn y_marginal_nums(&self) -> Vec<u64> {
        (0..self.num_y())
            .map(|y| self.nums.iter().map(|r| r[y]).sum())
            .collect()
    }

    pub fn p_xy(&self, x: usize, y: usize) -> f64 {
        self.nums[x][y] as f64 / self.den as f64
    }

    /// H(X) in bits.
    pub fn entropy_x_bits(&self) -> f64 {
        let d = self.den as f64;
        super::entropy_bits(
            &self
                .x_marginal_nums()
                .iter()
                .map(|&n| n as f64 / d)
                .collect::<Vec<_>>(),
        )
    }

    /// H(X | Y) in bits.
    pub fn entropy_x_given_y_bits(&self) -> f64 {
        let d = self.den as f64;
        let flat: Vec<f64> = self
            .nums
            .iter()
            .flat_map(|r| r.iter().map(|&n| n as f64 / d))
            .collect();
        let hy = super::entropy_bits(
            &self
                .y_marginal_nums()
                .iter()
                .map(|&n| n as f64 / d)
                .collect::<Vec<_>>(),
        );
        super::entropy_bits(&flat) - hy
    }

    /// Float view, for reuse of the double-precision machinery.
    pub fn to_joint_source(&self, x_labels: Vec<String>, y_labels: Vec<String>) -> Result<JointSource, InfoError> {
        let d = self.den as f64;
        let pmf = self
            .nums
            .iter()
            .map(|r| r.iter().map(|&n| n as f64 / d).collect())
            .collect();
        JointSource::new(x_labels, y_labels, pmf, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_total() {
        assert!(RationalJoint::marginal(vec![1, 1, 1], 4).is_err());
        let r = RationalJoint::marginal(vec![1, 1, 2], 4).unwrap();
        assert_eq!(r.x_marginal_nums(), vec![1, 1, 2]);
        assert!((r.entropy_x_bits() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_matches_chain_rule() {
        let r = RationalJoint::new(vec![vec![1, 1], vec![1, 1]], 4).unwrap();
        assert!((r.entropy_x_given_y_bits() - 1.0).abs() < 1e-12);
    }
}
