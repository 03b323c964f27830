//! The family of order-preserving power inequalities and their tolerance-aware
//! evaluation.
//!
//! Every family compares two explicitly constructed sides `LHS >= RHS` built
//! from a pair `(A, B)` of positive definite matrices and a parameter set.
//! Evaluation is deliberately decoupled from hypothesis checking: invalid
//! parameters still evaluate (that is how boundary searches watch a guarantee
//! break), `validate` just reports which side conditions a parameter set
//! violates.

use std::fmt;

use crate::error::{Error, Result};
use crate::orders::{OrderKind, OrderVerdict, TolerancePolicy};
use crate::scalar::{real, Real};
use crate::spectra::{eigh, HermitianMatrix, SpectralDecomposition};

/// Relative slack when checking a derived parameter value against a supplied
/// one (and linear constraints elsewhere): generous against f64 arithmetic on
/// desk-scale parameters, far below any meaningful parameter difference.
pub const PARAM_MATCH_REL: f64 = 1e-12;

/// Inequality families the evaluator knows.
///
/// Tags (used by the CLI, config files and reports) are the snake_case
/// strings returned by [`InequalityFamily::tag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityFamily {
    /// `(B^{r/2} A^p B^{r/2})^{1/q} >= (B^{r/2} B^p B^{r/2})^{1/q}`.
    FurutaB,
    /// `(A^{r/2} A^p A^{r/2})^{1/q} >= (A^{r/2} B^p A^{r/2})^{1/q}`.
    FurutaA,
    /// `A^{1-t+r} >= (A^{r/2} (A^{-t/2} B^p A^{-t/2})^s A^{r/2})^{(1-t+r)/((p-t)s+r)}`.
    GrandFuruta,
    /// `(A^{r/2} B^{p0} A^{r/2})^{(s+r)/(p0+r)} >= (A^{r/2} B^p A^{r/2})^{(s+r)/(p+r)}`
    /// with `s = min{p, 2 p0 + min{1, r}}`.
    CompleteForm,
    /// `A^{1+t+r} >= (A^{r/2} (A^{t/2} B^p A^{t/2})^s A^{r/2})^{(1+t+r)/((p+t)s+r)}`,
    /// which characterizes the Loewner order over its parameter range.
    Thm19,
    /// `A^{t+r} >= (A^{r/2} (A^{t/2} B^p A^{t/2})^s A^{r/2})^{(t+r)/((p+t)s+r)}`,
    /// which characterizes the chaotic order over its parameter range.
    Thm110,
    /// `A^alpha >= B^alpha` for `alpha` in `[0, 1]`.
    LownerHeinz,
}

pub const ALL_FAMILIES: [InequalityFamily; 7] = [
    InequalityFamily::FurutaB,
    InequalityFamily::FurutaA,
    InequalityFamily::GrandFuruta,
    InequalityFamily::CompleteForm,
    InequalityFamily::Thm19,
    InequalityFamily::Thm110,
    InequalityFamily::LownerHeinz,
];

impl InequalityFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            InequalityFamily::FurutaB => "furuta_B",
            InequalityFamily::FurutaA => "furuta_A",
            InequalityFamily::GrandFuruta => "grand_furuta",
            InequalityFamily::CompleteForm => "complete_form",
            InequalityFamily::Thm19 => "thm_1_9",
            InequalityFamily::Thm110 => "thm_1_10",
            InequalityFamily::LownerHeinz => "lowner_heinz",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        ALL_FAMILIES.iter().copied().find(|f| f.tag() == tag)
    }

    /// Whether the family's hypothesis is about the chaotic order (`A >> B`)
    /// rather than the Loewner order (`A >= B`).
    pub fn hypothesis_is_chaotic(&self) -> bool {
        matches!(self, InequalityFamily::Thm110)
    }
}

impl fmt::Display for InequalityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A (possibly partial) parameter assignment.
///
/// Families read the fields they need and error with the missing name when a
/// required one is absent, so a single type serves every family plus the
/// constraint-completion helpers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet<F: Real> {
    pub p: Option<F>,
    pub q: Option<F>,
    pub r: Option<F>,
    pub s: Option<F>,
    pub t: Option<F>,
    pub p0: Option<F>,
    pub n: Option<u32>,
    pub alpha: Option<F>,
}

impl<F: Real> Default for ParamSet<F> {
    fn default() -> Self {
        Self {
            p: None,
            q: None,
            r: None,
            s: None,
            t: None,
            p0: None,
            n: None,
            alpha: None,
        }
    }
}

impl<F: Real> ParamSet<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_p(mut self, v: F) -> Self {
        self.p = Some(v);
        self
    }
    pub fn with_q(mut self, v: F) -> Self {
        self.q = Some(v);
        self
    }
    pub fn with_r(mut self, v: F) -> Self {
        self.r = Some(v);
        self
    }
    pub fn with_s(mut self, v: F) -> Self {
        self.s = Some(v);
        self
    }
    pub fn with_t(mut self, v: F) -> Self {
        self.t = Some(v);
        self
    }
    pub fn with_p0(mut self, v: F) -> Self {
        self.p0 = Some(v);
        self
    }
    pub fn with_n(mut self, v: u32) -> Self {
        self.n = Some(v);
        self
    }
    pub fn with_alpha(mut self, v: F) -> Self {
        self.alpha = Some(v);
        self
    }

    pub fn req_p(&self) -> Result<F> {
        self.p.ok_or(Error::MissingParam("p"))
    }
    pub fn req_q(&self) -> Result<F> {
        self.q.ok_or(Error::MissingParam("q"))
    }
    pub fn req_r(&self) -> Result<F> {
        self.r.ok_or(Error::MissingParam("r"))
    }
    pub fn req_s(&self) -> Result<F> {
        self.s.ok_or(Error::MissingParam("s"))
    }
    pub fn req_t(&self) -> Result<F> {
        self.t.ok_or(Error::MissingParam("t"))
    }
    pub fn req_p0(&self) -> Result<F> {
        self.p0.ok_or(Error::MissingParam("p0"))
    }
    pub fn req_n(&self) -> Result<u32> {
        self.n.ok_or(Error::MissingParam("n"))
    }
    pub fn req_alpha(&self) -> Result<F> {
        self.alpha.ok_or(Error::MissingParam("alpha"))
    }

    /// Parses the compact `key=value,key=value` form used on the command
    /// line, e.g. `p=2,q=2,r=0`. Keys: p, q, r, s, t, p0, n, alpha.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::new();
        for item in text.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, got `{item}`")))?;
            let v: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidParams(format!("bad number `{}` for `{}`", value.trim(), key))
            })?;
            let fv = F::from(v).ok_or_else(|| {
                Error::InvalidParams(format!("value {v} not representable in scalar type"))
            })?;
            match key.trim() {
                "p" => out.p = Some(fv),
                "q" => out.q = Some(fv),
                "r" => out.r = Some(fv),
                "s" => out.s = Some(fv),
                "t" => out.t = Some(fv),
                "p0" => out.p0 = Some(fv),
                "alpha" => out.alpha = Some(fv),
                "n" => {
                    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                        return Err(Error::InvalidParams(format!(
                            "n must be a nonnegative integer, got {v}"
                        )));
                    }
                    out.n = Some(v as u32);
                }
                other => return Err(Error::InvalidParams(format!("unknown parameter `{other}`"))),
            }
        }
        Ok(out)
    }
}

impl<F: Real> fmt::Display for ParamSet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some(v) = self.p {
            parts.push(format!("p={v}"));
        }
        if let Some(v) = self.q {
            parts.push(format!("q={v}"));
        }
        if let Some(v) = self.r {
            parts.push(format!("r={v}"));
        }
        if let Some(v) = self.s {
            parts.push(format!("s={v}"));
        }
        if let Some(v) = self.t {
            parts.push(format!("t={v}"));
        }
        if let Some(v) = self.p0 {
            parts.push(format!("p0={v}"));
        }
        if let Some(v) = self.n {
            parts.push(format!("n={v}"));
        }
        if let Some(v) = self.alpha {
            parts.push(format!("alpha={v}"));
        }
        f.write_str(&parts.join(","))
    }
}

/// Result of hypothesis checking: which named side conditions fail, plus any
/// value the family derives from the others (`s` for the complete form).
#[derive(Debug, Clone, PartialEq)]
pub struct Validation<F: Real> {
    pub valid: bool,
    pub violations: Vec<String>,
    pub derived_s: Option<F>,
}

struct Checker<F: Real> {
    violations: Vec<String>,
    _marker: std::marker::PhantomData<F>,
}

impl<F: Real> Checker<F> {
    fn new() -> Self {
        Self {
            violations: Vec::new(),
            _marker: std::marker::PhantomData,
        }
    }

    fn finite(&mut self, name: &str, v: F) -> bool {
        if v.is_finite() {
            true
        } else {
            self.violations.push(format!("{name} finite"));
            false
        }
    }

    fn require(&mut self, ok: bool, condition: &str) {
        if !ok {
            self.violations.push(condition.to_string());
        }
    }

    fn done(self, derived_s: Option<F>) -> Validation<F> {
        Validation {
            valid: self.violations.is_empty(),
            violations: self.violations,
            derived_s,
        }
    }
}

/// `min{p, 2 p0 + min{1, r}}`: the exponent the complete form fixes for `s`.
pub fn complete_form_s<F: Real>(p: F, p0: F, r: F) -> F {
    p.min(p0 + p0 + F::one().min(r))
}

/// Checks a family's side conditions. Missing required fields are an error;
/// violated conditions are listed by name and make the set invalid. The
/// evaluator accepts invalid sets on purpose.
pub fn validate<F: Real>(family: InequalityFamily, params: &ParamSet<F>) -> Result<Validation<F>> {
    let mut c = Checker::new();
    match family {
        InequalityFamily::FurutaB | InequalityFamily::FurutaA => {
            let (p, q, r) = (params.req_p()?, params.req_q()?, params.req_r()?);
            if c.finite("p", p) & c.finite("q", q) & c.finite("r", r) {
                c.require(p >= F::zero(), "p >= 0");
                c.require(q >= F::one(), "q >= 1");
                c.require(r >= F::zero(), "r >= 0");
                c.require((F::one() + r) * q >= p + r, "(1+r)*q >= p+r");
            }
            Ok(c.done(None))
        }
        InequalityFamily::GrandFuruta => {
            let (p, s, t, r) = (
                params.req_p()?,
                params.req_s()?,
                params.req_t()?,
                params.req_r()?,
            );
            if c.finite("p", p) & c.finite("s", s) & c.finite("t", t) & c.finite("r", r) {
                c.require(p >= F::one(), "p >= 1");
                c.require(s >= F::one(), "s >= 1");
                c.require(t >= F::zero() && t <= F::one(), "0 <= t <= 1");
                c.require(r >= t, "r >= t");
            }
            Ok(c.done(None))
        }
        InequalityFamily::CompleteForm => {
            let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
            if c.finite("p", p) & c.finite("p0", p0) & c.finite("r", r) {
                c.require(r >= F::zero(), "r >= 0");
                c.require(p0 >= F::zero(), "p0 >= 0");
                c.require(p > p0, "p > p0");
                let derived = complete_form_s(p, p0, r);
                if let Some(s) = params.s {
                    let slack = real::<F>(PARAM_MATCH_REL) * (F::one() + derived.abs());
                    c.require(
                        (s - derived).abs() <= slack,
                        "s == min{p, 2*p0 + min{1, r}}",
                    );
                }
                return Ok(c.done(Some(derived)));
            }
            Ok(c.done(None))
        }
        InequalityFamily::Thm19 => {
            let (p, t, r, s) = (
                params.req_p()?,
                params.req_t()?,
                params.req_r()?,
                params.req_s()?,
            );
            if c.finite("p", p) & c.finite("t", t) & c.finite("r", r) & c.finite("s", s) {
                c.require(p >= F::one(), "p >= 1");
                c.require(t >= F::zero(), "t >= 0");
                c.require(r >= F::zero(), "r >= 0");
                c.require(
                    p + t > F::zero() && s >= (F::one() + t) / (p + t),
                    "s >= (1+t)/(p+t)",
                );
            }
            Ok(c.done(None))
        }
        InequalityFamily::Thm110 => {
            let (p, t, r, s) = (
                params.req_p()?,
                params.req_t()?,
                params.req_r()?,
                params.req_s()?,
            );
            if c.finite("p", p) & c.finite("t", t) & c.finite("r", r) & c.finite("s", s) {
                c.require(p > F::zero(), "p > 0");
                c.require(t >= F::zero(), "t >= 0");
                c.require(r >= F::zero(), "r >= 0");
                c.require(p + t > F::zero() && s >= t / (p + t), "s >= t/(p+t)");
            }
            Ok(c.done(None))
        }
        InequalityFamily::LownerHeinz => {
            let alpha = params.req_alpha()?;
            if c.finite("alpha", alpha) {
                c.require(alpha >= F::zero() && alpha <= F::one(), "0 <= alpha <= 1");
            }
            Ok(c.done(None))
        }
    }
}

/// Both constructed sides plus the order verdict comparing them.
#[derive(Debug, Clone)]
pub struct Evaluation<F: Real> {
    pub lhs: HermitianMatrix<F>,
    pub rhs: HermitianMatrix<F>,
    pub verdict: OrderVerdict<F>,
}

fn finite_exponent<F: Real>(value: F, what: &str) -> Result<F> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numeric(format!("non-finite exponent in {what}")))
    }
}

fn pow_of<F: Real>(h: &HermitianMatrix<F>, e: F) -> Result<HermitianMatrix<F>> {
    eigh(h)?.power(e)
}

/// `x^{outer_half} (x^{inner_half} y_pow x^{inner_half})^s x^{outer_half}`:
/// the sandwich every characterization family is built from.
fn sandwich<F: Real>(
    x: &SpectralDecomposition<F>,
    y_pow: &HermitianMatrix<F>,
    inner_half: F,
    s: F,
    outer_half: F,
) -> Result<HermitianMatrix<F>> {
    let xi = x.power(inner_half)?;
    let inner = HermitianMatrix::mul_chain(&[&xi, y_pow, &xi])?;
    let mid = pow_of(&inner, s)?;
    let xo = x.power(outer_half)?;
    HermitianMatrix::mul_chain(&[&xo, &mid, &xo])
}

fn eval_sides<F: Real>(
    family: InequalityFamily,
    da: &SpectralDecomposition<F>,
    db: &SpectralDecomposition<F>,
    params: &ParamSet<F>,
) -> Result<(HermitianMatrix<F>, HermitianMatrix<F>)> {
    let half = real::<F>(0.5);
    let one = F::one();
    match family {
        InequalityFamily::FurutaB | InequalityFamily::FurutaA => {
            let (p, q, r) = (params.req_p()?, params.req_q()?, params.req_r()?);
            let e = finite_exponent(one / q, "1/q")?;
            let (outer, lhs_core, rhs_core) = match family {
                InequalityFamily::FurutaB => (db, da.power(p)?, db.power(p)?),
                _ => (da, da.power(p)?, db.power(p)?),
            };
            let o = outer.power(r * half)?;
            let lhs_in = HermitianMatrix::mul_chain(&[&o, &lhs_core, &o])?;
            let rhs_in = HermitianMatrix::mul_chain(&[&o, &rhs_core, &o])?;
            Ok((pow_of(&lhs_in, e)?, pow_of(&rhs_in, e)?))
        }
        InequalityFamily::GrandFuruta => {
            let (p, s, t, r) = (
                params.req_p()?,
                params.req_s()?,
                params.req_t()?,
                params.req_r()?,
            );
            let lhs = da.power(one - t + r)?;
            let body = sandwich(da, &db.power(p)?, -t * half, s, r * half)?;
            let e = finite_exponent((one - t + r) / ((p - t) * s + r), "(1-t+r)/((p-t)s+r)")?;
            Ok((lhs, pow_of(&body, e)?))
        }
        InequalityFamily::CompleteForm => {
            let (p, p0, r) = (params.req_p()?, params.req_p0()?, params.req_r()?);
            let s = params.s.unwrap_or_else(|| complete_form_s(p, p0, r));
            let ar = da.power(r * half)?;
            let lhs_in = HermitianMatrix::mul_chain(&[&ar, &db.power(p0)?, &ar])?;
            let rhs_in = HermitianMatrix::mul_chain(&[&ar, &db.power(p)?, &ar])?;
            let e_lhs = finite_exponent((s + r) / (p0 + r), "(s+r)/(p0+r)")?;
            let e_rhs = finite_exponent((s + r) / (p + r), "(s+r)/(p+r)")?;
            Ok((pow_of(&lhs_in, e_lhs)?, pow_of(&rhs_in, e_rhs)?))
        }
        InequalityFamily::Thm19 => {
            let (p, t, r, s) = (
                params.req_p()?,
                params.req_t()?,
                params.req_r()?,
                params.req_s()?,
            );
            let lhs = da.power(one + t + r)?;
            let body = sandwich(da, &db.power(p)?, t * half, s, r * half)?;
            let e = finite_exponent((one + t + r) / ((p + t) * s + r), "(1+t+r)/((p+t)s+r)")?;
            Ok((lhs, pow_of(&body, e)?))
        }
        InequalityFamily::Thm110 => {
            let (p, t, r, s) = (
                params.req_p()?,
                params.req_t()?,
                params.req_r()?,
                params.req_s()?,
            );
            let lhs = da.power(t + r)?;
            let body = sandwich(da, &db.power(p)?, t * half, s, r * half)?;
            let e = finite_exponent((t + r) / ((p + t) * s + r), "(t+r)/((p+t)s+r)")?;
            Ok((lhs, pow_of(&body, e)?))
        }
        InequalityFamily::LownerHeinz => {
            let alpha = params.req_alpha()?;
            Ok((da.power(alpha)?, db.power(alpha)?))
        }
    }
}

fn verdict_of_sides<F: Real>(
    lhs: &HermitianMatrix<F>,
    rhs: &HermitianMatrix<F>,
    tol: &TolerancePolicy<F>,
) -> Result<OrderVerdict<F>> {
    let margin = eigh(&lhs.sub(rhs)?)?.lambda_min();
    let scale = eigh(lhs)?.spectral_norm().max(eigh(rhs)?.spectral_norm());
    let tolerance = tol.threshold(scale);
    Ok(OrderVerdict {
        holds: margin >= -tolerance,
        margin,
        tolerance,
        kind: OrderKind::Loewner,
    })
}

/// Builds both sides of the family inequality and compares them.
///
/// `A` and `B` must be positive definite and of equal dimension; parameter
/// hypothesis violations do *not* stop evaluation.
pub fn evaluate<F: Real>(
    family: InequalityFamily,
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    params: &ParamSet<F>,
    tol: &TolerancePolicy<F>,
) -> Result<Evaluation<F>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let da = eigh(a)?;
    da.require_positive_definite()?;
    let db = eigh(b)?;
    db.require_positive_definite()?;
    let (lhs, rhs) = eval_sides(family, &da, &db, params)?;
    let verdict = verdict_of_sides(&lhs, &rhs, tol)?;
    Ok(Evaluation { lhs, rhs, verdict })
}

/// A parameter field a margin surface can sweep. `n` is excluded: it is an
/// integer multiplicity, not a continuous knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamField {
    P,
    Q,
    R,
    S,
    T,
    P0,
    Alpha,
}

impl ParamField {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "p" => Some(Self::P),
            "q" => Some(Self::Q),
            "r" => Some(Self::R),
            "s" => Some(Self::S),
            "t" => Some(Self::T),
            "p0" => Some(Self::P0),
            "alpha" => Some(Self::Alpha),
            _ => None,
        }
    }

    fn assign<F: Real>(&self, params: &mut ParamSet<F>, value: F) {
        match self {
            Self::P => params.p = Some(value),
            Self::Q => params.q = Some(value),
            Self::R => params.r = Some(value),
            Self::S => params.s = Some(value),
            Self::T => params.t = Some(value),
            Self::P0 => params.p0 = Some(value),
            Self::Alpha => params.alpha = Some(value),
        }
    }
}

/// One node of a margin surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell<F: Real> {
    pub value_a: F,
    pub value_b: F,
    pub margin: F,
    pub holds: bool,
}

/// Evaluates the family margin over a rectangular grid of two parameter
/// fields. Cells come back row-major: `values_a` is the slow axis. Empty
/// value lists produce an empty table.
#[allow(clippy::too_many_arguments)]
pub fn margin_surface<F: Real>(
    family: InequalityFamily,
    a: &HermitianMatrix<F>,
    b: &HermitianMatrix<F>,
    base: &ParamSet<F>,
    field_a: ParamField,
    values_a: &[F],
    field_b: ParamField,
    values_b: &[F],
    tol: &TolerancePolicy<F>,
) -> Result<Vec<SurfaceCell<F>>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let da = eigh(a)?;
    da.require_positive_definite()?;
    let db = eigh(b)?;
    db.require_positive_definite()?;

    let mut cells = Vec::with_capacity(values_a.len() * values_b.len());
    for &va in values_a {
        for &vb in values_b {
            let mut params = *base;
            field_a.assign(&mut params, va);
            field_b.assign(&mut params, vb);
            let (lhs, rhs) = eval_sides(family, &da, &db, &params)?;
            let verdict = verdict_of_sides(&lhs, &rhs, tol)?;
            cells.push(SurfaceCell {
                value_a: va,
                value_b: vb,
                margin: verdict.margin,
                holds: verdict.holds,
            });
        }
    }
    Ok(cells)
}
