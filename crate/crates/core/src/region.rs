//! Polyhedral rate regions: finite lists of linear upper bounds on
//! stream rates, valid for one power allocation.

use crate::channel::RateVector;
use crate::error::{Error, Result};

/// A single linear constraint `sum coeffs[(u,v)] * R_uv <= bound`.
///
/// Coefficients are small integers (0, 1, or 2 in every region this
/// crate builds) stored row-major over the `ell^2` stream indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Row-major coefficient per stream index; entries in `{0, 1, 2}`.
    pub coeffs: Vec<u8>,
    /// Upper bound in bits per channel use; always `>= 0`.
    pub bound: f64,
    /// Which construction produced the bound (human-readable).
    pub tag: String,
}

impl Constraint {
    /// Left-hand side evaluated at `rv`.
    pub fn evaluate(&self, rv: &RateVector) -> f64 {
        self.coeffs
            .iter()
            .zip(rv.entries())
            .map(|(&c, &r)| c as f64 * r)
            .sum()
    }

    /// Whether `rv` satisfies the constraint within `tol`.
    pub fn satisfied(&self, rv: &RateVector, tol: f64) -> bool {
        self.evaluate(rv) <= self.bound + tol
    }

    /// Human-readable form like `R[1,2] + 2*R[2,1]`.
    pub fn label(&self, ell: usize) -> String {
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (u, v) = (i / ell + 1, i % ell + 1);
            if c == 1 {
                parts.push(format!("R[{u},{v}]"));
            } else {
                parts.push(format!("{c}*R[{u},{v}]"));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// A rate region: the set of nonnegative rate vectors satisfying every
/// constraint. The origin is always feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    ell: usize,
    constraints: Vec<Constraint>,
}

impl RateRegion {
    pub fn new(ell: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            if c.coeffs.len() != ell * ell {
                return Err(Error::DimensionMismatch(format!(
                    "constraint has {} coefficients, expected {}",
                    c.coeffs.len(),
                    ell * ell
                )));
            }
            if c.coeffs.iter().any(|&k| k > 2) {
                return Err(Error::Domain(format!(
                    "constraint coefficient above 2 in '{}'",
                    c.label(ell)
                )));
            }
            if !c.bound.is_finite() || c.bound < 0.0 {
                return Err(Error::Domain(format!(
                    "constraint bound {} must be finite and >= 0",
                    c.bound
                )));
            }
        }
        Ok(RateRegion { ell, constraints })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Whether `rv` lies in the region within `tol` per constraint.
    pub fn contains(&self, rv: &RateVector, tol: f64) -> Result<bool> {
        self.check_shape(rv)?;
        Ok(self.constraints.iter().all(|c| c.satisfied(rv, tol)))
    }

    /// The constraints violated by `rv` beyond `tol`.
    pub fn violations(&self, rv: &RateVector, tol: f64) -> Result<Vec<&Constraint>> {
        self.check_shape(rv)?;
        Ok(self
            .constraints
            .iter()
            .filter(|c| !c.satisfied(rv, tol))
            .collect())
    }

    /// Bound of the unique constraint with exactly this coefficient
    /// pattern, if present. Lets tests compare regions structurally
    /// without depending on constraint order.
    pub fn bound_for(&self, coeffs: &[u8]) -> Option<f64> {
        self.constraints
            .iter()
            .find(|c| c.coeffs == coeffs)
            .map(|c| c.bound)
    }

    fn check_shape(&self, rv: &RateVector) -> Result<()> {
        if rv.ell() != self.ell {
            return Err(Error::DimensionMismatch(format!(
                "rate vector has ell = {}, region has ell = {}",
                rv.ell(),
                self.ell
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_region() -> RateRegion {
        RateRegion::new(
            2,
            vec![
                Constraint {
                    coeffs: vec![1, 0, 0, 0],
                    bound: 0.5,
                    tag: "t".into(),
                },
                Constraint {
                    coeffs: vec![0, 1, 1, 0],
                    bound: 0.8,
                    tag: "t".into(),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn origin_is_always_feasible() {
        let r = toy_region();
        assert!(r.contains(&RateVector::zero(2), 0.0).unwrap());
    }

    #[test]
    fn violations_are_reported() {
        let r = toy_region();
        let rv = RateVector::two_state(0.6, 0.5, 0.4, 0.0).unwrap();
        let v = r.violations(&rv, 1e-12).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].label(2), "R[1,1]");
        assert_eq!(v[1].label(2), "R[1,2] + R[2,1]");
    }

    #[test]
    fn rejects_negative_bound_and_bad_shape() {
        let bad = RateRegion::new(
            2,
            vec![Constraint {
                coeffs: vec![1, 0, 0, 0],
                bound: -0.1,
                tag: "t".into(),
            }],
        );
        assert!(bad.is_err());
        let bad = RateRegion::new(
            2,
            vec![Constraint {
                coeffs: vec![1, 0, 0],
                bound: 0.1,
                tag: "t".into(),
            }],
        );
        assert!(bad.is_err());
        let r = toy_region();
        assert!(r.contains(&RateVector::zero(3), 0.0).is_err());
    }

    #[test]
    fn label_formats_coefficients() {
        let c = Constraint {
            coeffs: vec![0, 2, 1, 0],
            bound: 1.0,
            tag: "t".into(),
        };
        assert_eq!(c.label(2), "2*R[1,2] + R[2,1]");
    }
}
