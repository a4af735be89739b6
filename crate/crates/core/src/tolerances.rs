use crate::error::{Error, Result};

/// Numerical thresholds shared by every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value threshold used for numerical rank.
    pub rank: f64,
    /// Projective equality of two representatives.
    pub equal: f64,
    /// Bound on normalized compatibility residuals.
    pub compat: f64,
    /// Coincidence and collinearity threshold for case classification.
    pub classify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-9,
            equal: 1e-8,
            compat: 1e-8,
            classify: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn with_compat(mut self, tol: f64) -> Self {
        self.compat = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rank, self.equal, self.compat, self.classify];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.classify < self.equal {
            return Err(Error::InvalidArgument(
                "classification tolerance must not be below the equality tolerance".into(),
            ));
        }
        Ok(())
    }
}
