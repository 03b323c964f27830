//! Constructive solvers for the operator equations whose contraction
//! solutions characterize the Loewner and chaotic orders.
//!
//! Every solver follows the same factorization pattern: build a positive
//! definite target `H` and frame `G` from the input pair, form the unique
//! positive definite solution `S = G⁻¹·H·G⁻¹` of the sandwich identity
//! `G·S·G = H`, then verify the family's defining n-fold product identity by
//! explicit reconstruction. `‖S‖ ≤ 1` holds exactly when the order relation
//! the family characterizes holds, which is what [`SolutionReport`] records.

use std::fmt;

use crate::error::{Error, Result};
use crate::furuta::{ParamSet, Validation};
use crate::orders::{chaotic_geq, loewner_geq, OrderKind, OrderVerdict, TolerancePolicy};
use crate::scalar::{as_f64, real, Real};
use crate::spectra::{eigh, HermitianMatrix, SpectralDecomposition};

/// Largest acceptable relative Frobenius residual of the defining identity.
/// The identity is algebraic in the construction, so anything above this is
/// numerical breakdown (extreme conditioning), reported as an error rather
/// than a quietly wrong report. Calibrated for `f64`.
pub const EQ_RESIDUAL_MAX: f64 = 1e-8;

/// Slack for the linear exponent constraint each family imposes, relative to
/// the constraint's own scale. Parameter sets produced by [`complete_params`]
/// satisfy it to a few ulps; hand-entered sets must match to this precision.
pub const CONSTRAINT_REL_TOL: f64 = 1e-12;

/// When [`complete_params`] solves for the multiplicity `n`, the real
/// solution must sit within this distance of an integer.
pub const INTEGER_SOLVE_TOL: f64 = 1e-9;

/// Operator-equation families. Tags are the exact strings used by the CLI
/// and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationFamily {
    /// Loewner-order equation on `(A, B)`; solution appears directly.
    OrderC4,
    /// Loewner-order equation with roles swapped; solution appears inverted.
    OrderC5,
    /// Chaotic-order equation on `(A, B)`.
    ChaoticD4,
    /// Chaotic-order equation with roles swapped.
    ChaoticD5,
    /// Complete-form sandwich equation, `r ≤ 1` branch (frame is the
    /// sandwich itself).
    Complete33,
    /// [`Complete33`](Self::Complete33) applied to `(B⁻¹, A⁻¹)`.
    Complete35,
    /// Complete-form sandwich equation, `r ≥ 1` branch (frame is a
    /// fractional power of the sandwich).
    Complete37,
    /// [`Complete37`](Self::Complete37) applied to `(B⁻¹, A⁻¹)`.
    Complete39,
    /// Ratio-constraint equation verified through an n-fold product
    /// identity.
    Complete311,
    /// [`Complete311`](Self::Complete311) applied to `(B⁻¹, A⁻¹)`.
    Complete313,
}

pub const ALL_EQUATION_FAMILIES: [EquationFamily; 10] = [
    EquationFamily::OrderC4,
    EquationFamily::OrderC5,
    EquationFamily::ChaoticD4,
    EquationFamily::ChaoticD5,
    EquationFamily::Complete33,
    EquationFamily::Complete35,
    EquationFamily::Complete37,
    EquationFamily::Complete39,
    EquationFamily::Complete311,
    EquationFamily::Complete313,
];

impl EquationFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            EquationFamily::OrderC4 => "order_C4",
            EquationFamily::OrderC5 => "order_C5",
            EquationFamily::ChaoticD4 => "chaotic_D4",
            EquationFamily::ChaoticD5 => "chaotic_D5",
            EquationFamily::Complete33 => "complete_3_3",
            EquationFamily::Complete35 => "complete_3_5",
            EquationFamily::Complete37 => "complete_3_7",
            EquationFamily::Complete39 => "complete_3_9",
            EquationFamily::Complete311 => "complete_3_11",
            EquationFamily::Complete313 => "complete_3_13",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        ALL_EQUATION_FAMILIES
            .iter()
            .copied()
            .find(|f| f.tag() == tag)
    }

    /// The order relation whose truth the contraction property tracks.
    pub fn characterized_order(&self) -> OrderKind {
        match self {
            EquationFamily::ChaoticD4 | EquationFamily::ChaoticD5 => OrderKind::Chaotic,
            _ => OrderKind::Loewner,
        }
    }

    /// Corollary families that run their base solver on `(B⁻¹, A⁻¹)`.
    fn substituted_base(&self) -> Option<EquationFamily> {
        match self {
            EquationFamily::Complete35 => Some(EquationFamily::Complete33),
            EquationFamily::Complete39 => Some(EquationFamily::Complete37),
            EquationFamily::Complete313 => Some(EquationFamily::Complete311),
            _ => None,
        }
    }
}

impl fmt::Display for EquationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Output of a solver run: the constructed solution, its spectral norm, how
/// well it satisfies the defining identity, whether it is a contraction, and
/// the order verdict on the original `(A, B)` that contractivity is supposed
/// to mirror.
#[derive(Debug, Clone)]
pub struct SolutionReport<F: Real> {
    pub family: EquationFamily,
    pub solution: HermitianMatrix<F>,
    pub norm: F,
    pub equation_residual: F,
    pub contraction: bool,
    pub order_verdict: OrderVerdict<F>,
}

fn pow_of<F: Real>(h: &HermitianMatrix<F>, e: F) -> Result<HermitianMatrix<F>> {
    eigh(h)?.power(e)
}

/// `‖got − want‖_F / ‖want‖_F`.
fn relative_residual<F: Real>(got: &HermitianMatrix<F>, want: &HermitianMatrix<F>) -> Result<F> {
    Ok(got.sub(want)?.frobenius_norm() / want.frobenius_norm())
}

/// Unique positive definite `S` with `G·S·G = H`, plus its spectral norm.
/// For invertible positive definite frames the factorization criterion
/// reduces to this closed form, and `‖S‖ ≤ 1` exactly when `G² ≥ H`.
pub fn douglas_contraction<F: Real>(
    h: &HermitianMatrix<F>,
    g: &HermitianMatrix<F>,
) -> Result<(HermitianMatrix<F>, F)> {
    if h.dim() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, G is {}x{}",
            h.dim(),
            h.dim(),
            g.dim(),
            g.dim()
        )));
    }
    eigh(h)?.require_positive_definite()?;
    let dg = eigh(g)?;
    dg.require_positive_definite()?;
    let gi = dg.power(-F::one())?;
    let s = HermitianMatrix::mul_chain(&[&gi, h, &gi])?;
    let norm = eigh(&s)?.spectral_norm();
    Ok((s, norm))
}

fn near<F: Real>(lhs: F, rhs: F) -> bool {
    let scale = F::one().max(lhs.abs()).max(rhs.abs());
    (lhs - rhs).abs() <= real::<F>(CONSTRAINT_REL_TOL) * scale
}

/// Checks a family's parameter ranges and its linear exponent constraint.
/// As with the inequality validator, missing fields are an error and named
/// violations are data — but the solvers reject invalid sets outright.
pub fn validate_equation<F: Real>(
    family: EquationFamily,
    params: &ParamSet<F>,
) -> Result<Validation<F>> {
    let mut violations: Vec<String> = Vec::new();
    let mut require = |ok: bool, what: &str| {
        if !ok {
            violations.push(what.to_string());
        }
    };
    let one = F::one();
    match family {
        EquationFamily::OrderC4 | EquationFamily::OrderC5 => {
            let (p, t, r, s) = (
                params.req_p()?,
                params.req_t()?,
                params.req_r()?,
                params.req_s()?,
            );
            let n = real::<F>(params.req_n()? as f64);
            require(p >= one, "p >= 1");
            require(t >= F::zero(), "t >= 0");
            require(r >= F::zero(), "r >= 0");
            require(
                near((p + t) * s + r, (n + one) * (one + t + r)),
                "(p+t)*s+r == (n+1)*(1+t+r)",
            );
        }
        EquationFamily::ChaoticD4 | EquationFamily::ChaoticD5 => {
            let (p, t, r, s) = (
                params.req_p()?,
                params.req_t()?,
                params.req_r()?,
                params.req_s()?,
            );
            let n_int = params.req_n()?;
            let n = real::<F>(n_int as f64);
            require(p > F::zero(), "p > 0");
            require(r > F::zero(), "r > 0");
            require(t >= F::zero(), "t >= 0");
            require(n_int >= 1, "n >= 1");
            require(
                near((p + t) * s + r, (n + one) * (t + r)),
                "(p+t)*s+r == (n+1)*(t+r)",
            );
        }
        EquationFamily::Complete33 | EquationFamily::Complete35 => {
            let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
            let n = real::<F>(params.req_n()? as f64);
            require(r >= F::zero() && r <= one, "0 <= r <= 1");
            require(p0 >= F::zero(), "p0 >= 0");
            require(p > p0, "p > p0");
            require(
                near(p + r, (n + one) * (p0 + p0 + r + r)),
                "p+r == (n+1)*(2*p0+2*r)",
            );
        }
        EquationFamily::Complete37 | EquationFamily::Complete39 => {
            let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
            let n = real::<F>(params.req_n()? as f64);
            require(r >= one, "r >= 1");
            require(p0 >= F::zero(), "p0 >= 0");
            require(p > p0, "p > p0");
            require(
                near(p + r, (n + one) * (p0 + p0 + one + r)),
                "p+r == (n+1)*(2*p0+1+r)",
            );
        }
        EquationFamily::Complete311 | EquationFamily::Complete313 => {
            let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
            let n_int = params.req_n()?;
            let n = real::<F>(n_int as f64);
            require(r >= F::zero(), "r >= 0");
            require(p0 >= F::zero(), "p0 >= 0");
            require(p > p0, "p > p0");
            require(p <= p0 + p0 + one.min(r), "p <= 2*p0 + min{1, r}");
            require(n_int >= 1, "n >= 1");
            require(
                near(n * (p + r), (n + one) * (p0 + r)),
                "n*(p+r) == (n+1)*(p0+r)",
            );
        }
    }
    Ok(Validation {
        valid: violations.is_empty(),
        violations,
        derived_s: None,
    })
}

struct SolverCore<F: Real> {
    solution: HermitianMatrix<F>,
    norm: F,
    residual: F,
}

/// Shared engine for the order/chaotic families on operands `(X, Y)`:
/// `W = X^{r/2}(X^{t/2}·Y^p·X^{t/2})^s·X^{r/2}`, `H = W^{1/(n+1)}`,
/// `G = X^{u/2}` with `u = 1+t+r` (order) or `t+r` (chaotic), `S̃ = G⁻¹HG⁻¹`,
/// and the n-fold reconstruction of `Y^p` from `S̃`. Swapped families report
/// `S̃⁻¹`, whose inverse is exactly the factor in their written identity.
fn order_chaotic_core<F: Real>(
    dx: &SpectralDecomposition<F>,
    dy: &SpectralDecomposition<F>,
    params: &ParamSet<F>,
    with_unit: bool,
    inverted: bool,
) -> Result<SolverCore<F>> {
    let (p, t, r, s) = (
        params.req_p()?,
        params.req_t()?,
        params.req_r()?,
        params.req_s()?,
    );
    let n = params.req_n()?;
    let one = F::one();
    let half = real::<F>(0.5);
    let u = if with_unit { one + t + r } else { t + r };

    let xt = dx.power(t * half)?;
    let yp = dy.power(p)?;
    let inner = HermitianMatrix::mul_chain(&[&xt, &yp, &xt])?;
    let mid = pow_of(&inner, s)?;
    let xr = dx.power(r * half)?;
    let w = HermitianMatrix::mul_chain(&[&xr, &mid, &xr])?;
    let h = pow_of(&w, one / real::<F>((n + 1) as f64))?;
    let g = dx.power(u * half)?;
    let (s_tilde, _) = douglas_contraction(&h, &g)?;

    // Reconstruction: Y^p = X^{-t/2}(X^{(u-r)/2}(S̃X^u)^n S̃ X^{(u-r)/2})^{1/s} X^{-t/2}.
    let outer = dx.power((u - r) * half)?;
    let xu = dx.power(u)?;
    let mut chain: Vec<&HermitianMatrix<F>> = vec![&outer];
    for _ in 0..n {
        chain.push(&s_tilde);
        chain.push(&xu);
    }
    chain.push(&s_tilde);
    chain.push(&outer);
    let core = HermitianMatrix::mul_chain(&chain)?;
    let unrolled = pow_of(&core, one / s)?;
    let xmt = dx.power(-t * half)?;
    let recon = HermitianMatrix::mul_chain(&[&xmt, &unrolled, &xmt])?;
    let residual = relative_residual(&recon, &yp)?;

    let solution = if inverted {
        eigh(&s_tilde)?.power(-one)?
    } else {
        s_tilde
    };
    let norm = eigh(&solution)?.spectral_norm();
    Ok(SolverCore {
        solution,
        norm,
        residual,
    })
}

/// Shared engine for the two sandwich-framed complete-form families on
/// operands `(X, Y)`: `K = X^{r/2}·Y^{p0}·X^{r/2}`, frame `G = K` (`r ≤ 1`
/// branch) or `G = K^{(2p0+1+r)/(2(p0+r))}` (`r ≥ 1` branch),
/// `H = (X^{r/2}·Y^p·X^{r/2})^{1/(n+1)}`, `S = G⁻¹HG⁻¹`, and reconstruction
/// `Y^p = X^{-r/2}·G·S·(G²S)^n·G·X^{-r/2}`.
fn complete_sandwich_core<F: Real>(
    dx: &SpectralDecomposition<F>,
    dy: &SpectralDecomposition<F>,
    params: &ParamSet<F>,
    fractional_frame: bool,
) -> Result<SolverCore<F>> {
    let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
    let n = params.req_n()?;
    let one = F::one();
    let two = real::<F>(2.0);
    let half = real::<F>(0.5);

    let xr = dx.power(r * half)?;
    let yp0 = dy.power(p0)?;
    let k = HermitianMatrix::mul_chain(&[&xr, &yp0, &xr])?;
    let g = if fractional_frame {
        let e = (p0 + p0 + one + r) / (two * (p0 + r));
        pow_of(&k, e)?
    } else {
        k
    };
    let yp = dy.power(p)?;
    let w = HermitianMatrix::mul_chain(&[&xr, &yp, &xr])?;
    let h = pow_of(&w, one / real::<F>((n + 1) as f64))?;
    let (s_mat, norm) = douglas_contraction(&h, &g)?;

    let g2 = pow_of(&g, two)?;
    let xmr = dx.power(-r * half)?;
    let mut chain: Vec<&HermitianMatrix<F>> = vec![&xmr, &g, &s_mat];
    for _ in 0..n {
        chain.push(&g2);
        chain.push(&s_mat);
    }
    chain.push(&g);
    chain.push(&xmr);
    let recon = HermitianMatrix::mul_chain(&chain)?;
    let residual = relative_residual(&recon, &yp)?;
    Ok(SolverCore {
        solution: s_mat,
        norm,
        residual,
    })
}

/// Engine for the ratio-constraint family on operands `(X, Y)`: Douglas
/// factorization on the inverse sandwiches
/// `H = (X^{-r/2}·Y^{-p0}·X^{-r/2})^{(n+1)/n}`, `G = M^{1/2}` with
/// `M = X^{-r/2}·Y^{-p}·X^{-r/2}`, then verification of the n-fold identity
/// `(X^{r/2}·Y^{p0}·X^{r/2})^{n+1} = (W^{1/2}·S⁻¹·W^{1/2})^n` with
/// `W = X^{r/2}·Y^p·X^{r/2}`.
fn complete_ratio_core<F: Real>(
    dx: &SpectralDecomposition<F>,
    dy: &SpectralDecomposition<F>,
    params: &ParamSet<F>,
) -> Result<SolverCore<F>> {
    let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
    let n = params.req_n()?;
    let one = F::one();
    let half = real::<F>(0.5);
    let nf = real::<F>(n as f64);

    let xmr = dx.power(-r * half)?;
    let ymp = dy.power(-p)?;
    let m = HermitianMatrix::mul_chain(&[&xmr, &ymp, &xmr])?;
    let ymp0 = dy.power(-p0)?;
    let kneg = HermitianMatrix::mul_chain(&[&xmr, &ymp0, &xmr])?;
    let h = pow_of(&kneg, (nf + one) / nf)?;
    let g = pow_of(&m, half)?;
    let (s_mat, norm) = douglas_contraction(&h, &g)?;

    let xr = dx.power(r * half)?;
    let yp0 = dy.power(p0)?;
    let kpos = HermitianMatrix::mul_chain(&[&xr, &yp0, &xr])?;
    let lhs_id = pow_of(&kpos, nf + one)?;
    let yp = dy.power(p)?;
    let wpos = HermitianMatrix::mul_chain(&[&xr, &yp, &xr])?;
    let w_half = pow_of(&wpos, half)?;
    let s_inv = eigh(&s_mat)?.power(-one)?;
    let inner = HermitianMatrix::mul_chain(&[&w_half, &s_inv, &w_half])?;
    let rhs_id = pow_of(&inner, nf)?;
    let residual = relative_residual(&rhs_id, &lhs_id)?;
    Ok(SolverCore {
        solution: s_mat,
        norm,
        residual,
    })
}

/// Solves the family's operator equation on `(A, B)` and verifies it.
///
/// Parameters must pass [`validate_equation`]; the defining identity must
/// reproduce to relative residual ≤ [`EQ_RESIDUAL_MAX`] or the run is
/// reported as a numeric failure.
pub fn solve<F: Real>(
    family: EquationFamily,
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    params: &ParamSet<F>,
    tol: &TolerancePolicy<F>,
) -> Result<SolutionReport<F>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let check = validate_equation(family, params)?;
    if !check.valid {
        return Err(Error::Constraint(format!(
            "{family}: {}",
            check.violations.join("; ")
        )));
    }
    let da = eigh(a)?;
    da.require_positive_definite()?;
    let db = eigh(b)?;
    db.require_positive_definite()?;

    let core = match family {
        EquationFamily::OrderC4 => order_chaotic_core(&da, &db, params, true, false)?,
        EquationFamily::OrderC5 => order_chaotic_core(&db, &da, params, true, true)?,
        EquationFamily::ChaoticD4 => order_chaotic_core(&da, &db, params, false, false)?,
        EquationFamily::ChaoticD5 => order_chaotic_core(&db, &da, params, false, true)?,
        EquationFamily::Complete33 => complete_sandwich_core(&da, &db, params, false)?,
        EquationFamily::Complete37 => complete_sandwich_core(&da, &db, params, true)?,
        EquationFamily::Complete311 => complete_ratio_core(&da, &db, params)?,
        EquationFamily::Complete35 | EquationFamily::Complete39 | EquationFamily::Complete313 => {
            let binv = db.power(-F::one())?;
            let ainv = da.power(-F::one())?;
            let dbi = eigh(&binv)?;
            let dai = eigh(&ainv)?;
            match family.substituted_base() {
                Some(EquationFamily::Complete33) => {
                    complete_sandwich_core(&dbi, &dai, params, false)?
                }
                Some(EquationFamily::Complete37) => {
                    complete_sandwich_core(&dbi, &dai, params, true)?
                }
                _ => complete_ratio_core(&dbi, &dai, params)?,
            }
        }
    };

    if as_f64(core.residual) > EQ_RESIDUAL_MAX || !core.residual.is_finite() {
        return Err(Error::Numeric(format!(
            "{family}: equation residual {:.3e} exceeds {EQ_RESIDUAL_MAX:.0e}",
            as_f64(core.residual)
        )));
    }
    let order_verdict = match family.characterized_order() {
        OrderKind::Loewner => loewner_geq(a, b, tol)?,
        OrderKind::Chaotic => chaotic_geq(a, b, tol)?,
    };
    let contraction = core.norm <= F::one() + tol.threshold(F::one());
    Ok(SolutionReport {
        family,
        solution: core.solution,
        norm: core.norm,
        equation_residual: core.residual,
        contraction,
        order_verdict,
    })
}

/// [`solve`] restricted to the Loewner-order equation families.
pub fn solve_order<F: Real>(
    family: EquationFamily,
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    params: &ParamSet<F>,
    tol: &TolerancePolicy<F>,
) -> Result<SolutionReport<F>> {
    match family {
        EquationFamily::OrderC4 | EquationFamily::OrderC5 => solve(family, a, b, params, tol),
        _ => Err(Error::InvalidSpec(format!(
            "{family} is not an order-equation family"
        ))),
    }
}

/// [`solve`] restricted to the chaotic-order equation families.
pub fn solve_chaotic<F: Real>(
    family: EquationFamily,
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    params: &ParamSet<F>,
    tol: &TolerancePolicy<F>,
) -> Result<SolutionReport<F>> {
    match family {
        EquationFamily::ChaoticD4 | EquationFamily::ChaoticD5 => solve(family, a, b, params, tol),
        _ => Err(Error::InvalidSpec(format!(
            "{family} is not a chaotic-equation family"
        ))),
    }
}

/// [`solve`] restricted to the complete-form equation families.
pub fn solve_complete<F: Real>(
    family: EquationFamily,
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    params: &ParamSet<F>,
    tol: &TolerancePolicy<F>,
) -> Result<SolutionReport<F>> {
    match family {
        EquationFamily::OrderC4
        | EquationFamily::OrderC5
        | EquationFamily::ChaoticD4
        | EquationFamily::ChaoticD5 => Err(Error::InvalidSpec(format!(
            "{family} is not a complete-form equation family"
        ))),
        _ => solve(family, a, b, params, tol),
    }
}

fn solved_n<F: Real>(value: F) -> Result<u32> {
    let v = as_f64(value);
    let rounded = v.round();
    if !v.is_finite() || (v - rounded).abs() > INTEGER_SOLVE_TOL || rounded < 0.0 {
        return Err(Error::Constraint(format!(
            "constraint solves to non-integral multiplicity n = {v}"
        )));
    }
    Ok(rounded as u32)
}

/// Fills the one missing constraint parameter (among `p`, `s`, `n` for the
/// order/chaotic families; `p`, `n` for the complete-form families) from the
/// family's linear constraint. The completed set must pass
/// [`validate_equation`].
pub fn complete_params<F: Real>(
    family: EquationFamily,
    known: &ParamSet<F>,
) -> Result<ParamSet<F>> {
    let one = F::one();
    let mut params = *known;
    match family {
        EquationFamily::OrderC4
        | EquationFamily::OrderC5
        | EquationFamily::ChaoticD4
        | EquationFamily::ChaoticD5 => {
            let t = known.req_t()?;
            let r = known.req_r()?;
            // u is the right-hand block of the constraint (p+t)s + r = (n+1)u.
            let u = match family {
                EquationFamily::OrderC4 | EquationFamily::OrderC5 => one + t + r,
                _ => t + r,
            };
            match (known.p, known.s, known.n) {
                (Some(p), Some(s), None) => {
                    let n = ((p + t) * s + r) / u - one;
                    params.n = Some(solved_n(n)?);
                }
                (Some(p), None, Some(n)) => {
                    let nf = real::<F>(n as f64);
                    params.s = Some(((nf + one) * u - r) / (p + t));
                }
                (None, Some(s), Some(n)) => {
                    let nf = real::<F>(n as f64);
                    params.p = Some(((nf + one) * u - r) / s - t);
                }
                _ => {
                    return Err(Error::InvalidParams(
                        "exactly one of p, s, n must be left free".into(),
                    ))
                }
            }
        }
        EquationFamily::Complete33
        | EquationFamily::Complete35
        | EquationFamily::Complete37
        | EquationFamily::Complete39 => {
            let p0 = known.req_p0()?;
            let r = known.req_r()?;
            let block = match family {
                EquationFamily::Complete33 | EquationFamily::Complete35 => p0 + p0 + r + r,
                _ => p0 + p0 + one + r,
            };
            match (known.p, known.n) {
                (Some(p), None) => {
                    let n = (p + r) / block - one;
                    params.n = Some(solved_n(n)?);
                }
                (None, Some(n)) => {
                    let nf = real::<F>(n as f64);
                    params.p = Some((nf + one) * block - r);
                }
                _ => {
                    return Err(Error::InvalidParams(
                        "exactly one of p, n must be left free".into(),
                    ))
                }
            }
        }
        EquationFamily::Complete311 | EquationFamily::Complete313 => {
            let p0 = known.req_p0()?;
            let r = known.req_r()?;
            match (known.p, known.n) {
                (Some(p), None) => {
                    let n = (p0 + r) / (p - p0);
                    params.n = Some(solved_n(n)?);
                }
                (None, Some(n)) => {
                    let nf = real::<F>(n as f64);
                    params.p = Some((nf + one) * (p0 + r) / nf - r);
                }
                _ => {
                    return Err(Error::InvalidParams(
                        "exactly one of p, n must be left free".into(),
                    ))
                }
            }
        }
    }
    let check = validate_equation(family, &params)?;
    if !check.valid {
        return Err(Error::Constraint(format!(
            "completed parameters remain invalid: {}",
            check.violations.join("; ")
        )));
    }
    Ok(params)
}

/// Chaotic-order check of `scale^{n+1}·A ≫ B` through the equation solver,
/// using the two-integer parameterization `p = 1`, `r = 1/n`, `t = 1/m`,
/// `s = (m+n+1)/(m+1)`. The report's contraction flag mirrors the scaled
/// chaotic comparison.
pub fn scaled_chaotic_check<F: Real>(
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    scale: F,
    m: u32,
    n: u32,
    tol: &TolerancePolicy<F>,
) -> Result<SolutionReport<F>> {
    if scale <= F::zero() || !scale.is_finite() {
        return Err(Error::InvalidParams(format!(
            "scale must be a positive real, got {scale}"
        )));
    }
    if m < 1 || n < 1 {
        return Err(Error::InvalidParams(format!(
            "m and n must be positive integers, got m={m}, n={n}"
        )));
    }
    let one = F::one();
    let mf = real::<F>(m as f64);
    let nf = real::<F>(n as f64);
    let params = ParamSet::new()
        .with_p(one)
        .with_r(one / nf)
        .with_t(one / mf)
        .with_s((mf + nf + one) / (mf + one))
        .with_n(n);
    let factor = scale.powi(n as i32 + 1);
    if !factor.is_finite() {
        return Err(Error::Numeric(format!(
            "scale^{} overflows the scalar type",
            n + 1
        )));
    }
    let scaled_a = a.scale(factor);
    solve(EquationFamily::ChaoticD4, &scaled_a, b, &params, tol)
}
