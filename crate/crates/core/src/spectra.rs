//! Dense real symmetric matrices, their spectral decompositions, and the
//! functional calculus built on top of them.
//!
//! The eigensolver is a cyclic Jacobi iteration: dependency-free, bitwise
//! deterministic for identical input bits, and accurate enough at the target
//! sizes (dim <= 64, routinely <= 8) that no further tuning is needed.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, real, Real};

/// Convergence target for the Jacobi sweep loop: the iteration stops once the
/// off-diagonal Frobenius norm drops below `JACOBI_OFF_REL * ||H||_F` of the
/// input. 1e-13 leaves two digits of slack over f64 machine precision while
/// staying far below every downstream tolerance.
pub const JACOBI_OFF_REL: f64 = 1e-13;

/// Hard sweep budget is `JACOBI_SWEEP_FACTOR * dim^2`; cyclic Jacobi converges
/// quadratically, so hitting the budget indicates non-finite input rather than
/// a slow case.
pub const JACOBI_SWEEP_FACTOR: usize = 50;

/// Guard band for domain-restricted scalar functions (log, inverse, fractional
/// and negative powers): eigenvalues below `EIGEN_CLAMP_REL * ||H||_2` are
/// numerically indistinguishable from zero, and instead of clamping them the
/// calculus raises a domain error. Silent clamping would hide genuine order
/// violations.
pub const EIGEN_CLAMP_REL: f64 = 1e-14;

/// A real symmetric matrix stored dense row-major.
///
/// Exact symmetry (`entries[i][j] == entries[j][i]` bitwise) is enforced at
/// every construction site by averaging `(M + M^T) / 2`, so downstream code
/// never has to re-symmetrize defensively.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<F: Real> {
    dim: usize,
    entries: Vec<F>,
}

impl<F: Real> HermitianMatrix<F> {
    /// Builds a matrix from row-major entries, symmetrizing as `(M + M^T)/2`.
    pub fn new(dim: usize, entries: Vec<F>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for dim {}, got {}",
                dim * dim,
                dim,
                entries.len()
            )));
        }
        let mut m = Self { dim, entries };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a {dim}x{dim} matrix",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self {
            dim,
            entries: vec![F::zero(); dim * dim],
        };
        for i in 0..dim {
            m.entries[i * dim + i] = F::one();
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![F::zero(); dim * dim],
        }
    }

    pub fn diagonal(diag: &[F]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * dim + i] = d;
        }
        m
    }

    /// 1x1 convenience constructor, mostly for scalar cross-checks.
    pub fn scalar(value: F) -> Self {
        Self {
            dim: 1,
            entries: vec![value],
        }
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        let half = real::<F>(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (self.entries[i * n + j] + self.entries[j * n + i]) * half;
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[F] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.entries[i * self.dim + j]
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn scale(&self, factor: F) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&a| a * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> F {
        self.entries
            .iter()
            .fold(F::zero(), |acc, &a| acc + a * a)
            .sqrt()
    }

    /// Multiplies a chain of symmetric factors left to right and symmetrizes
    /// only the final product.
    ///
    /// Intermediate products of non-commuting symmetric matrices are not
    /// symmetric, so the caller must pass a chain that is symmetric as a whole
    /// (a sandwich or palindrome); symmetrizing early would silently change
    /// the value.
    pub fn mul_chain(factors: &[&Self]) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty product chain".into()))?;
        let n = first.dim;
        let mut acc = first.entries.clone();
        for m in &factors[1..] {
            first.check_same_dim(m)?;
            acc = raw_mul(&acc, &m.entries, n);
        }
        let mut out = Self {
            dim: n,
            entries: acc,
        };
        out.symmetrize();
        Ok(out)
    }
}

fn raw_mul<F: Real>(a: &[F], b: &[F], n: usize) -> Vec<F> {
    let mut out = vec![F::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == F::zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Scalar functions lifted to symmetric matrices through the eigensystem.
///
/// `Power` with a non-integer or negative exponent, `Log`, and `Inverse`
/// require a safely positive spectrum; `Exp` and nonnegative integer powers
/// are defined everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFunction<F: Real> {
    Power(F),
    Log,
    Exp,
    Inverse,
}

impl<F: Real> ScalarFunction<F> {
    fn name(&self) -> &'static str {
        match self {
            ScalarFunction::Power(_) => "power",
            ScalarFunction::Log => "log",
            ScalarFunction::Exp => "exp",
            ScalarFunction::Inverse => "inverse",
        }
    }
}

/// Eigensystem of a symmetric matrix: ascending eigenvalues and an orthogonal
/// matrix of eigenvectors (column `j` of `q` pairs with `eigenvalues[j]`).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<F: Real> {
    dim: usize,
    eigenvalues: Vec<F>,
    /// Row-major orthogonal matrix; `q[i * dim + j]` is component `i` of
    /// eigenvector `j`.
    q: Vec<F>,
}

impl<F: Real> SpectralDecomposition<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[F] {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> F {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> F {
        self.eigenvalues[self.dim - 1]
    }

    pub fn spectral_norm(&self) -> F {
        self.lambda_min().abs().max(self.lambda_max().abs())
    }

    /// Component `i` of eigenvector `j`.
    pub fn eigenvector_component(&self, i: usize, j: usize) -> F {
        self.q[i * self.dim + j]
    }

    /// Frobenius norm of `Q^T Q - I`, for orthogonality checks.
    pub fn orthogonality_defect(&self) -> F {
        let n = self.dim;
        let mut acc = F::zero();
        for i in 0..n {
            for j in 0..n {
                let mut dot = F::zero();
                for k in 0..n {
                    dot += self.q[k * n + i] * self.q[k * n + j];
                }
                let target = if i == j { F::one() } else { F::zero() };
                let d = dot - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// Rebuilds `Q diag(f(lambda)) Q^T`, symmetrized.
    fn rebuild(&self, mapped: &[F]) -> HermitianMatrix<F> {
        let n = self.dim;
        let mut entries = vec![F::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = F::zero();
                for (k, &m) in mapped.iter().enumerate() {
                    acc += self.q[i * n + k] * m * self.q[j * n + k];
                }
                entries[i * n + j] = acc;
                entries[j * n + i] = acc;
            }
        }
        HermitianMatrix { dim: n, entries }
    }

    pub fn reconstruct(&self) -> HermitianMatrix<F> {
        self.rebuild(&self.eigenvalues)
    }

    /// Applies a scalar function through the eigensystem.
    ///
    /// Domain rule: functions that need a positive spectrum reject any
    /// eigenvalue below `EIGEN_CLAMP_REL * ||H||_2` instead of clamping it.
    pub fn apply(&self, f: &ScalarFunction<F>) -> Result<HermitianMatrix<F>> {
        let clamp = real::<F>(EIGEN_CLAMP_REL) * self.spectral_norm();
        let lambda_min = self.lambda_min();
        let positive_ok = lambda_min > F::zero() && lambda_min >= clamp;
        let require_positive = || -> Result<()> {
            if positive_ok {
                Ok(())
            } else {
                Err(Error::Domain {
                    func: f.name(),
                    lambda_min: as_f64(lambda_min),
                })
            }
        };

        let mapped: Vec<F> = match *f {
            ScalarFunction::Power(e) => {
                let ef = as_f64(e);
                let is_integer = ef.fract() == 0.0 && ef.abs() < 2_147_483_648.0;
                if is_integer {
                    let k = ef as i32;
                    if k < 0 {
                        require_positive()?;
                    }
                    self.eigenvalues.iter().map(|l| l.powi(k)).collect()
                } else {
                    require_positive()?;
                    self.eigenvalues.iter().map(|l| l.powf(e)).collect()
                }
            }
            ScalarFunction::Log => {
                require_positive()?;
                self.eigenvalues.iter().map(|l| l.ln()).collect()
            }
            ScalarFunction::Exp => self.eigenvalues.iter().map(|l| l.exp()).collect(),
            ScalarFunction::Inverse => {
                require_positive()?;
                self.eigenvalues.iter().map(|&l| F::one() / l).collect()
            }
        };
        Ok(self.rebuild(&mapped))
    }

    /// Shorthand for `apply(Power(e))`.
    pub fn power(&self, e: F) -> Result<HermitianMatrix<F>> {
        self.apply(&ScalarFunction::Power(e))
    }

    pub fn log(&self) -> Result<HermitianMatrix<F>> {
        self.apply(&ScalarFunction::Log)
    }

    /// Errors unless every eigenvalue is safely positive; carries the most
    /// negative eigenvalue as the diagnostic.
    pub fn require_positive_definite(&self) -> Result<()> {
        let clamp = real::<F>(EIGEN_CLAMP_REL) * self.spectral_norm();
        let lambda_min = self.lambda_min();
        if lambda_min > F::zero() && lambda_min >= clamp {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite(as_f64(lambda_min)))
        }
    }
}

fn off_diagonal_norm<F: Real>(a: &[F], n: usize) -> F {
    let mut acc = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a[i * n + j];
            acc += v * v;
        }
    }
    (acc + acc).sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps rotate every upper-triangle pivot in row-major order until the
/// off-diagonal Frobenius norm falls below `JACOBI_OFF_REL * ||H||_F`, then
/// sorts eigenvalues ascending (stable, so the result is deterministic for
/// identical input bits).
pub fn eigh<F: Real>(h: &HermitianMatrix<F>) -> Result<SpectralDecomposition<F>> {
    let n = h.dim;
    let mut a = h.entries.clone();
    let mut q = HermitianMatrix::<F>::identity(n).entries;

    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric(
            "non-finite entry in eigensolver input".into(),
        ));
    }

    let fro = h.frobenius_norm();
    let target = real::<F>(JACOBI_OFF_REL) * fro;
    let budget = JACOBI_SWEEP_FACTOR * n * n;
    let mut converged = fro == F::zero() || n == 1;
    let mut sweeps = 0usize;

    while !converged {
        if sweeps >= budget {
            return Err(Error::NonConvergence {
                off: as_f64(off_diagonal_norm(&a, n)),
                target: as_f64(target),
                sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let apq = a[p * n + r];
                if apq == F::zero() {
                    continue;
                }
                let theta = (a[r * n + r] - a[p * n + p]) / (apq + apq);
                // tan of the rotation angle; for very large theta the direct
                // formula would square it into overflow, so fall back to the
                // first-order form.
                let t = if theta.abs() > real::<F>(1e150) {
                    (theta + theta).recip()
                } else {
                    let sign = if theta < F::zero() {
                        -F::one()
                    } else {
                        F::one()
                    };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = (t * t + F::one()).sqrt().recip();
                let s = t * c;

                // A <- J^T A J with J the (p, r) plane rotation.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + r];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + r] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[r * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[r * n + k] = s * apk + c * aqk;
                }
                // Q <- Q J accumulates the eigenvectors.
                for k in 0..n {
                    let qkp = q[k * n + p];
                    let qkq = q[k * n + r];
                    q[k * n + p] = c * qkp - s * qkq;
                    q[k * n + r] = s * qkp + c * qkq;
                }
            }
        }
        converged = off_diagonal_norm(&a, n) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<F> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut q_sorted = vec![F::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            q_sorted[i * n + new_col] = q[i * n + old_col];
        }
    }

    Ok(SpectralDecomposition {
        dim: n,
        eigenvalues,
        q: q_sorted,
    })
}

/// `f(H)` through the eigensystem; see [`SpectralDecomposition::apply`].
pub fn apply_fn<F: Real>(
    h: &HermitianMatrix<F>,
    f: &ScalarFunction<F>,
) -> Result<HermitianMatrix<F>> {
    eigh(h)?.apply(f)
}

/// Largest absolute eigenvalue.
pub fn spectral_norm<F: Real>(h: &HermitianMatrix<F>) -> Result<F> {
    Ok(eigh(h)?.spectral_norm())
}

/// Two-sided congruence `M X M` (symmetrized once at the end).
pub fn congruence<F: Real>(
    x: &HermitianMatrix<F>,
    m: &HermitianMatrix<F>,
) -> Result<HermitianMatrix<F>> {
    HermitianMatrix::mul_chain(&[m, x, m])
}

/// Parses the shared matrix text format: first line the dimension, then that
/// many rows of space-separated decimal numbers. Input is symmetrized on load.
pub fn read_text<F: Real>(text: &str) -> Result<HermitianMatrix<F>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let dim_line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
    let dim: usize = dim_line
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension line `{dim_line}`")))?;
    if dim == 0 {
        return Err(Error::Parse("dimension must be >= 1".into()));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {} of {dim}", row + 1)))?;
        let mut count = 0usize;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{tok}` in row {}", row + 1)))?;
            entries.push(F::from(v).ok_or_else(|| {
                Error::Parse(format!("value {v} not representable in scalar type"))
            })?);
            count += 1;
        }
        if count != dim {
            return Err(Error::Parse(format!(
                "row {} has {count} entries, expected {dim}",
                row + 1
            )));
        }
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Parse(format!("unexpected trailing line `{extra}`")));
    }
    HermitianMatrix::new(dim, entries)
}

/// Renders a matrix in the shared text format. `Display` on the scalar prints
/// the shortest round-tripping decimal, so write/read is value-exact.
pub fn write_text<F: Real>(m: &HermitianMatrix<F>) -> String {
    let mut out = format!("{}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| format!("{}", m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a pair of matrices separated by at least one blank line.
pub fn read_pair_text<F: Real>(text: &str) -> Result<(HermitianMatrix<F>, HermitianMatrix<F>)> {
    let normalized = text.replace("\r\n", "\n");
    let blocks: Vec<&str> = normalized
        .split("\n\n")
        .map(str::trim)
        .filter(|b| !b.is_empty())
        .collect();
    if blocks.len() != 2 {
        return Err(Error::Parse(format!(
            "expected two blank-line separated matrices, found {} block(s)",
            blocks.len()
        )));
    }
    Ok((read_text(blocks[0])?, read_text(blocks[1])?))
}

pub fn write_pair_text<F: Real>(a: &HermitianMatrix<F>, b: &HermitianMatrix<F>) -> String {
    format!("{}\n{}", write_text(a), write_text(b))
}
