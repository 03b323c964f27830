//! Tolerance-aware order predicates on positive definite matrices.
//!
//! Two partial orders appear throughout the crate: the Loewner order
//! (`A >= B` iff `A - B` is positive semidefinite) and the chaotic order
//! (`A >> B` iff `log A >= log B`). Verdicts carry a signed margin — the
//! smallest eigenvalue of the defining difference — so callers can
//! distinguish a robust pass from a borderline one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::spectra::{eigh, HermitianMatrix};

/// Default relative tolerance component; multiplied by the larger spectral
/// norm of the two operands of the outermost difference.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Default absolute floor, so comparisons of near-zero operands still have a
/// nonempty acceptance band.
pub const DEFAULT_TOL_FLOOR: f64 = 1e-12;

/// Two-component tolerance: an order relation "holds" when its margin is at
/// least `-(rel * scale + floor)`, with `scale` the larger spectral norm of
/// the operands actually being subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy<F: Real> {
    pub rel: F,
    pub floor: F,
}

impl<F: Real> Default for TolerancePolicy<F> {
    fn default() -> Self {
        Self {
            rel: real(DEFAULT_REL_TOL),
            floor: real(DEFAULT_TOL_FLOOR),
        }
    }
}

impl<F: Real> TolerancePolicy<F> {
    pub fn new(rel: F, floor: F) -> Self {
        Self { rel, floor }
    }

    /// Acceptance band half-width at a given operand scale.
    pub fn threshold(&self, scale: F) -> F {
        self.rel * scale + self.floor
    }
}

/// Which order a verdict talks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    Loewner,
    Chaotic,
}

/// Outcome of an order comparison.
///
/// Invariant: `holds == (margin >= -tolerance)` where `tolerance` is the
/// threshold the policy produced for this comparison's operand scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderVerdict<F: Real> {
    pub holds: bool,
    /// Smallest eigenvalue of the defining difference; positive means the
    /// relation holds strictly.
    pub margin: F,
    /// The threshold actually used, already scaled.
    pub tolerance: F,
    pub kind: OrderKind,
}

fn verdict_from_difference<F: Real>(
    lhs: &HermitianMatrix<F>,
    rhs: &HermitianMatrix<F>,
    tol: &TolerancePolicy<F>,
    kind: OrderKind,
) -> Result<OrderVerdict<F>> {
    let margin = eigh(&lhs.sub(rhs)?)?.lambda_min();
    let scale = eigh(lhs)?.spectral_norm().max(eigh(rhs)?.spectral_norm());
    let tolerance = tol.threshold(scale);
    Ok(OrderVerdict {
        holds: margin >= -tolerance,
        margin,
        tolerance,
        kind,
    })
}

/// Loewner order check `A >= B`: margin is `lambda_min(A - B)`, the tolerance
/// scale is `max(||A||_2, ||B||_2)`.
pub fn loewner_geq<F: Real>(
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    tol: &TolerancePolicy<F>,
) -> Result<OrderVerdict<F>> {
    verdict_from_difference(a, b, tol, OrderKind::Loewner)
}

/// Chaotic order check `A >> B`, i.e. `log A >= log B`.
///
/// Both logarithms are taken through independent eigendecompositions; inputs
/// must be positive definite.
pub fn chaotic_geq<F: Real>(
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    tol: &TolerancePolicy<F>,
) -> Result<OrderVerdict<F>> {
    let da = eigh(a)?;
    da.require_positive_definite()?;
    let db = eigh(b)?;
    db.require_positive_definite()?;
    verdict_from_difference(&da.log()?, &db.log()?, tol, OrderKind::Chaotic)
}

/// Power monotonicity check: verdict for `A^alpha >= B^alpha`.
///
/// The underlying theorem guarantees this for `0 <= alpha <= 1` whenever
/// `A >= B >= 0`; the function happily evaluates larger exponents so callers
/// can watch the guarantee fail.
pub fn lowner_heinz<F: Real>(
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    alpha: F,
    tol: &TolerancePolicy<F>,
) -> Result<OrderVerdict<F>> {
    if alpha < F::zero() {
        return Err(Error::InvalidParams(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    let pa = eigh(a)?.power(alpha)?;
    let pb = eigh(b)?.power(alpha)?;
    loewner_geq(&pa, &pb, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = HermitianMatrix<f64>;

    fn tol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    #[test]
    fn default_policy_thresholds() {
        let t = tol();
        assert_eq!(t.rel, 1e-8);
        assert_eq!(t.floor, 1e-12);
        assert_eq!(t.threshold(2.0), 2.0 * 1e-8 + 1e-12);
    }

    #[test]
    fn reflexive_comparison_has_zero_margin() {
        let a = M::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let v = loewner_geq(&a, &a, &tol()).unwrap();
        assert!(v.holds);
        assert_eq!(v.margin, 0.0);
        assert_eq!(v.kind, OrderKind::Loewner);
    }

    #[test]
    fn diagonal_order_margin() {
        let v = loewner_geq(&M::diagonal(&[2.0, 3.0]), &M::identity(2), &tol()).unwrap();
        assert!(v.holds);
        assert_eq!(v.margin, 1.0);
    }

    #[test]
    fn small_perturbation_sits_on_the_tolerance_knife_edge() {
        // A = [[2,1],[1,1]], B = [[1,1],[1,1]] + 1e-6 I: the difference has
        // lambda_min = -1e-6 exactly. At the default policy the threshold is
        // ~2.6e-8 (scale ||A||_2 ~ 2.618), so the relation fails; a policy
        // with rel = 1e-5 widens the band past 1e-6 and accepts it.
        let a = M::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let b = M::from_rows(&[vec![1.0 + 1e-6, 1.0], vec![1.0, 1.0 + 1e-6]]).unwrap();

        let strict = loewner_geq(&a, &b, &tol()).unwrap();
        assert!((strict.margin + 1e-6).abs() < 1e-12);
        assert!(!strict.holds);

        let loose = loewner_geq(&a, &b, &TolerancePolicy::new(1e-5, 1e-12)).unwrap();
        assert!(loose.holds);
        assert_eq!(loose.margin, strict.margin);
    }

    #[test]
    fn chaotic_order_of_scaled_exponentials() {
        // A = e^2 I, B = e I: log A - log B = I, margin exactly 1.
        let e = std::f64::consts::E;
        let a = M::diagonal(&[e * e, e * e]);
        let b = M::diagonal(&[e, e]);
        let v = chaotic_geq(&a, &b, &tol()).unwrap();
        assert!(v.holds);
        assert!((v.margin - 1.0).abs() < 1e-14);
        assert_eq!(v.kind, OrderKind::Chaotic);
    }

    #[test]
    fn chaotic_rejects_non_positive_input() {
        let a = M::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            chaotic_geq(&a, &M::identity(2), &tol()),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            chaotic_geq(&M::identity(2), &a, &tol()),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn half_power_respects_order() {
        let v = lowner_heinz(
            &M::diagonal(&[4.0, 9.0]),
            &M::diagonal(&[1.0, 4.0]),
            0.5,
            &tol(),
        )
        .unwrap();
        assert!(v.holds);
        assert!((v.margin - 1.0).abs() < 1e-14);
    }

    #[test]
    fn squaring_breaks_order_on_classic_pair() {
        // A >= B here, yet A^2 - B^2 = [[3.002, 1], [1, 0]] is indefinite with
        // lambda_min = (3.002 - sqrt(3.002^2 + 4))/2 ~ -0.30261.
        let eps = 1e-3;
        let a = M::from_rows(&[vec![2.0 + eps, 1.0], vec![1.0, 1.0 + eps]]).unwrap();
        let b = M::from_rows(&[vec![1.0 + eps, 1.0], vec![1.0, 1.0 + eps]]).unwrap();

        assert!(loewner_geq(&a, &b, &tol()).unwrap().holds);
        let v = lowner_heinz(&a, &b, 2.0, &tol()).unwrap();
        assert!(!v.holds);
        let expected = (3.002 - (3.002_f64 * 3.002 + 4.0).sqrt()) / 2.0;
        assert!((v.margin - expected).abs() < 1e-12);
    }

    #[test]
    fn negative_alpha_is_rejected() {
        assert!(matches!(
            lowner_heinz(&M::identity(2), &M::identity(2), -0.5, &tol()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn dimension_mismatch_propagates() {
        assert!(matches!(
            loewner_geq(&M::identity(2), &M::identity(3), &tol()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
