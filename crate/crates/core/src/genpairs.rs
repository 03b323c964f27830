//! Seeded generators for positive definite matrices and matrix pairs in a
//! chosen order relation.
//!
//! Everything here is driven by an explicit splitmix64 stream so that any
//! instance can be regenerated from `(seed, dim, trial)` alone: the same
//! inputs produce bit-identical matrices on every run. The update constants
//! are fixed below and also documented in the README, so other languages can
//! reproduce the streams.

use crate::error::{Error, Result};
use crate::orders::{loewner_geq, OrderVerdict, TolerancePolicy};
use crate::scalar::{real, Real};
use crate::spectra::{eigh, HermitianMatrix};

/// Largest supported generator dimension; beyond this the dense O(dim^3)
/// kernels stop being "instant" and the crate makes no performance promises.
pub const MAX_DIM: usize = 64;

/// Default eigenvalue-ratio cap for generated matrices.
pub const DEFAULT_CONDITION_CAP: f64 = 1e4;

/// Default ordered-pair gap, relative to `||B||_2`: pairs are robustly
/// ordered at the default tolerance policy without being near-multiples of
/// the identity.
pub const DEFAULT_GAP_REL: f64 = 1e-3;

/// How strongly a generated "only" pair must violate the rejected relation:
/// the failing margin must sit below `-REJECTION_MARGIN_FACTOR * tolerance`.
pub const REJECTION_MARGIN_FACTOR: f64 = 10.0;

/// splitmix64: the additive constant of the Weyl sequence driving the state.
pub const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
/// splitmix64: first finalizer multiplier.
pub const SPLITMIX_MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
/// splitmix64: second finalizer multiplier.
pub const SPLITMIX_MIX2: u64 = 0x94D0_49BB_1331_11EB;

/// The splitmix64 generator: 64-bit Weyl sequence plus a two-round finalizer.
///
/// Chosen for its tiny, exactly specified update rule with published
/// reference outputs (frozen in this module's tests), so test suites can be
/// reproduced bit-for-bit from any language.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(SPLITMIX_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(SPLITMIX_MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(SPLITMIX_MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` using the top 53 bits.
    pub fn next_unit<F: Real>(&mut self) -> F {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        real(u)
    }

    /// Uniform in `(-1, 1)`.
    pub fn next_symmetric<F: Real>(&mut self) -> F {
        let u: F = self.next_unit();
        u + u - F::one()
    }
}

/// Derives an independent stream seed from a base seed and a salt path.
///
/// Each step reseeds splitmix64 with `acc ^ salt` and takes one output, so
/// nearby salts (for example consecutive trial indices) give unrelated
/// streams.
pub fn derive_seed(base: u64, salts: &[u64]) -> u64 {
    let mut acc = SplitMix64::new(base).next_u64();
    for &salt in salts {
        acc = SplitMix64::new(acc ^ salt).next_u64();
    }
    acc
}

/// FNV-1a hash of a tag string, for salting streams by family name.
pub fn hash_tag(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// Salt constants separating the different draw kinds under one user seed.
const SALT_PD: u64 = 1;
const SALT_PAIR_BASE: u64 = 2;
const SALT_PAIR_BUMP: u64 = 3;
const SALT_CHAOTIC: u64 = 4;
const SALT_UNORDERED_A: u64 = 5;
const SALT_UNORDERED_B: u64 = 6;

/// Recipe for seeded random positive definite matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec<F: Real> {
    pub dim: usize,
    pub seed: u64,
    /// Upper bound on the eigenvalue ratio; eigenvalues are drawn
    /// log-uniformly from `[cap^-1/2, cap^1/2]`.
    pub condition_cap: F,
    /// Minimum Loewner margin for ordered pairs. `None` selects the relative
    /// default `DEFAULT_GAP_REL * ||B||_2`; an explicit `0` produces `A == B`.
    pub gap: Option<F>,
}

impl<F: Real> GenSpec<F> {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            seed,
            condition_cap: real(DEFAULT_CONDITION_CAP),
            gap: None,
        }
    }

    pub fn with_condition_cap(mut self, cap: F) -> Self {
        self.condition_cap = cap;
        self
    }

    pub fn with_gap(mut self, gap: F) -> Self {
        self.gap = Some(gap);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidSpec(format!(
                "dim must be in 1..={MAX_DIM}, got {}",
                self.dim
            )));
        }
        if self.condition_cap < F::one() || !self.condition_cap.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "condition_cap must be finite and >= 1, got {}",
                self.condition_cap
            )));
        }
        if let Some(g) = self.gap {
            if g < F::zero() || !g.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "gap must be finite and >= 0, got {g}"
                )));
            }
        }
        Ok(())
    }
}

/// Fills a random orthogonal matrix (row-major, column `j` orthonormal)
/// via modified Gram-Schmidt with one re-orthogonalization pass.
fn random_orthogonal<F: Real>(stream: &mut SplitMix64, n: usize) -> Vec<F> {
    let mut q = vec![F::zero(); n * n];
    let mut v = vec![F::zero(); n];
    for j in 0..n {
        loop {
            for vi in v.iter_mut() {
                *vi = stream.next_symmetric();
            }
            for _pass in 0..2 {
                for i in 0..j {
                    let mut dot = F::zero();
                    for k in 0..n {
                        dot += q[k * n + i] * v[k];
                    }
                    for k in 0..n {
                        v[k] -= dot * q[k * n + i];
                    }
                }
            }
            let norm = v.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
            // A fresh draw is almost surely far from the span of the previous
            // columns; retry on the (measure-zero) degenerate draw.
            if norm > real(1e-8) {
                for k in 0..n {
                    q[k * n + j] = v[k] / norm;
                }
                break;
            }
        }
    }
    q
}

/// `Q diag(lambda) Q^T` with exact output symmetry.
fn from_eigensystem<F: Real>(q: &[F], lambda: &[F], n: usize) -> HermitianMatrix<F> {
    let mut entries = vec![F::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = F::zero();
            for k in 0..n {
                acc += q[i * n + k] * lambda[k] * q[j * n + k];
            }
            entries[i * n + j] = acc;
            entries[j * n + i] = acc;
        }
    }
    HermitianMatrix::new(n, entries).expect("square by construction")
}

fn random_pd_from_stream<F: Real>(
    stream: &mut SplitMix64,
    n: usize,
    condition_cap: F,
) -> (HermitianMatrix<F>, F) {
    let q = random_orthogonal::<F>(stream, n);
    let half_log_cap = condition_cap.ln() * real::<F>(0.5);
    let mut lambda = vec![F::zero(); n];
    let mut lambda_max = F::zero();
    for l in lambda.iter_mut() {
        let u: F = stream.next_unit();
        *l = ((u + u - F::one()) * half_log_cap).exp();
        lambda_max = lambda_max.max(*l);
    }
    (from_eigensystem(&q, &lambda, n), lambda_max)
}

/// Random PSD bump with eigenvalues in `[lo, hi]`, used to push pairs apart.
fn random_psd_in_range<F: Real>(
    stream: &mut SplitMix64,
    n: usize,
    lo: F,
    hi: F,
) -> HermitianMatrix<F> {
    let q = random_orthogonal::<F>(stream, n);
    let mut lambda = vec![F::zero(); n];
    for l in lambda.iter_mut() {
        let u: F = stream.next_unit();
        *l = lo + u * (hi - lo);
    }
    from_eigensystem(&q, &lambda, n)
}

/// Seeded positive definite matrix with eigenvalues log-uniform in
/// `[condition_cap^-1/2, condition_cap^1/2]`.
pub fn random_pd<F: Real>(spec: &GenSpec<F>) -> Result<HermitianMatrix<F>> {
    spec.validate()?;
    let mut stream = SplitMix64::new(derive_seed(spec.seed, &[SALT_PD, spec.dim as u64]));
    Ok(random_pd_from_stream(&mut stream, spec.dim, spec.condition_cap).0)
}

/// Ordered pair `A >= B`: `B` is a fresh positive definite draw and
/// `A = B + P` with `P` positive semidefinite of smallest eigenvalue at least
/// the gap. A gap of exactly `0` returns `A == B` bit-identically.
pub fn random_ordered_pair<F: Real>(
    spec: &GenSpec<F>,
) -> Result<(HermitianMatrix<F>, HermitianMatrix<F>)> {
    spec.validate()?;
    let mut stream = SplitMix64::new(derive_seed(spec.seed, &[SALT_PAIR_BASE, spec.dim as u64]));
    let (b, b_norm) = random_pd_from_stream(&mut stream, spec.dim, spec.condition_cap);
    let gap = spec
        .gap
        .unwrap_or_else(|| real::<F>(DEFAULT_GAP_REL) * b_norm);
    if gap == F::zero() {
        return Ok((b.clone(), b));
    }
    let mut bump_stream =
        SplitMix64::new(derive_seed(spec.seed, &[SALT_PAIR_BUMP, spec.dim as u64]));
    // Headroom over the requested gap so entrywise rounding in A - B can
    // never eat below it.
    let lo = gap + real::<F>(1e-12) * (F::one() + b_norm);
    let hi = lo + gap + real::<F>(0.25) * b_norm;
    let p = random_psd_in_range(&mut bump_stream, spec.dim, lo, hi);
    let a = b.add(&p)?;
    Ok((a, b))
}

fn random_symmetric<F: Real>(stream: &mut SplitMix64, n: usize, scale: F) -> HermitianMatrix<F> {
    let mut entries = vec![F::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let v: F = stream.next_symmetric::<F>() * scale;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    HermitianMatrix::new(n, entries).expect("square by construction")
}

/// Pair in the chaotic order but *not* the Loewner order.
///
/// Construction: `B = exp(Y)` for random symmetric `Y`, `A = exp(Y + P)` with
/// a PSD bump `P`, so `log A >= log B` holds with margin `lambda_min(P)`;
/// candidates are rejected until the Loewner comparison fails decisively
/// (margin below `-REJECTION_MARGIN_FACTOR * tolerance`). Returns `Ok(None)`
/// when the trial budget runs out. Needs `dim >= 2`: at `dim = 1` the two
/// orders coincide and no such pair exists.
pub fn random_chaotic_only_pair<F: Real>(
    spec: &GenSpec<F>,
    budget: usize,
    tol: &TolerancePolicy<F>,
) -> Result<Option<(HermitianMatrix<F>, HermitianMatrix<F>)>> {
    spec.validate()?;
    if spec.dim < 2 {
        return Err(Error::InvalidSpec(
            "chaotic-only pairs need dim >= 2: the orders coincide on scalars".into(),
        ));
    }
    for trial in 0..budget {
        let mut stream = SplitMix64::new(derive_seed(
            spec.seed,
            &[SALT_CHAOTIC, spec.dim as u64, trial as u64],
        ));
        let y = random_symmetric::<F>(&mut stream, spec.dim, real(1.25));
        // A thin bump: small uniform part for a robust chaotic margin plus a
        // dominant rank-one direction that exp() refuses to respect.
        let base = random_psd_in_range::<F>(&mut stream, spec.dim, real(0.01), real(0.03));
        let mut v = vec![F::zero(); spec.dim];
        for vi in v.iter_mut() {
            *vi = stream.next_symmetric();
        }
        let vnorm = v.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
        let w: F = stream.next_unit::<F>() * real(1.5) + real(0.5);
        let mut spike_entries = vec![F::zero(); spec.dim * spec.dim];
        for i in 0..spec.dim {
            for j in 0..spec.dim {
                spike_entries[i * spec.dim + j] = w * v[i] * v[j] / (vnorm * vnorm);
            }
        }
        let spike = HermitianMatrix::new(spec.dim, spike_entries)?;
        let p = base.add(&spike)?;
        let x = y.add(&p)?;
        let a = eigh(&x)?.apply(&crate::spectra::ScalarFunction::Exp)?;
        let b = eigh(&y)?.apply(&crate::spectra::ScalarFunction::Exp)?;
        let loewner = loewner_geq(&a, &b, tol)?;
        if fails_decisively(&loewner) {
            return Ok(Some((a, b)));
        }
    }
    Ok(None)
}

/// Pair with no Loewner order in either direction (both margins decisively
/// negative). Returns `Ok(None)` when the budget runs out; needs `dim >= 2`
/// because scalars are always comparable.
pub fn random_unordered_pair<F: Real>(
    spec: &GenSpec<F>,
    budget: usize,
    tol: &TolerancePolicy<F>,
) -> Result<Option<(HermitianMatrix<F>, HermitianMatrix<F>)>> {
    spec.validate()?;
    if spec.dim < 2 {
        return Err(Error::InvalidSpec(
            "unordered pairs need dim >= 2: scalars are always comparable".into(),
        ));
    }
    for trial in 0..budget {
        let mut sa = SplitMix64::new(derive_seed(
            spec.seed,
            &[SALT_UNORDERED_A, spec.dim as u64, trial as u64],
        ));
        let mut sb = SplitMix64::new(derive_seed(
            spec.seed,
            &[SALT_UNORDERED_B, spec.dim as u64, trial as u64],
        ));
        let a = random_pd_from_stream(&mut sa, spec.dim, spec.condition_cap).0;
        let b = random_pd_from_stream(&mut sb, spec.dim, spec.condition_cap).0;
        let fwd = loewner_geq(&a, &b, tol)?;
        let bwd = loewner_geq(&b, &a, tol)?;
        if fails_decisively(&fwd) && fails_decisively(&bwd) {
            return Ok(Some((a, b)));
        }
    }
    Ok(None)
}

fn fails_decisively<F: Real>(verdict: &OrderVerdict<F>) -> bool {
    verdict.margin < -real::<F>(REJECTION_MARGIN_FACTOR) * verdict.tolerance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::chaotic_geq;

    type Spec = GenSpec<f64>;

    #[test]
    fn splitmix64_reference_vectors() {
        // Canonical outputs of the published splitmix64 finalizer.
        let mut s = SplitMix64::new(0);
        let got: Vec<u64> = (0..5).map(|_| s.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                0xE220_A839_7B1D_CDAF,
                0x6E78_9E6A_A1B9_65F4,
                0x06C4_5D18_8009_454F,
                0xF88B_B8A8_724C_81EC,
                0x1B39_896A_51A8_749B,
            ]
        );

        let mut s1 = SplitMix64::new(1);
        assert_eq!(s1.next_u64(), 0x910A_2DEC_8902_5CC1);
        let mut s2 = SplitMix64::new(1_234_567);
        assert_eq!(s2.next_u64(), 0x599E_D017_FB08_FC85);
    }

    #[test]
    fn unit_interval_mapping_is_frozen() {
        let mut s = SplitMix64::new(0xDEAD_BEEF);
        let got: Vec<f64> = (0..4).map(|_| s.next_unit()).collect();
        assert_eq!(
            got,
            vec![
                0.29247624040798537,
                0.868536602998237,
                0.00829673920644669,
                0.4546937019293913,
            ]
        );
    }

    #[test]
    fn derive_seed_separates_streams() {
        let a = derive_seed(42, &[1, 2]);
        let b = derive_seed(42, &[1, 3]);
        let c = derive_seed(42, &[2, 2]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, &[1, 2]));
    }

    #[test]
    fn spec_validation() {
        assert!(random_pd(&Spec::new(0, 1)).is_err());
        assert!(random_pd(&Spec::new(65, 1)).is_err());
        assert!(random_pd(&Spec::new(2, 1).with_condition_cap(0.5)).is_err());
        assert!(random_ordered_pair(&Spec::new(2, 1).with_gap(-1.0)).is_err());
    }

    #[test]
    fn random_pd_is_deterministic_and_in_range() {
        for dim in [1usize, 2, 5, 8] {
            let spec = Spec::new(dim, 97).with_condition_cap(100.0);
            let h1 = random_pd(&spec).unwrap();
            let h2 = random_pd(&spec).unwrap();
            assert_eq!(h1, h2, "bitwise determinism at dim {dim}");

            let d = eigh(&h1).unwrap();
            assert!(d.lambda_min() > 0.1 * (1.0 - 1e-10), "{}", d.lambda_min());
            assert!(d.lambda_max() < 10.0 * (1.0 + 1e-10), "{}", d.lambda_max());
        }
        let other = random_pd(&Spec::new(4, 98).with_condition_cap(100.0)).unwrap();
        assert_ne!(
            other,
            random_pd(&Spec::new(4, 97).with_condition_cap(100.0)).unwrap()
        );
    }

    #[test]
    fn zero_gap_gives_equal_pair() {
        let (a, b) = random_ordered_pair(&Spec::new(3, 7).with_gap(0.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ordered_pairs_respect_requested_gap() {
        let tol = TolerancePolicy::default();
        for seed in 0..50 {
            let dim = 2 + (seed as usize % 5);
            let spec = Spec::new(dim, 1000 + seed).with_condition_cap(100.0);
            let (a, b) = random_ordered_pair(&spec).unwrap();
            let v = loewner_geq(&a, &b, &tol).unwrap();
            let gap = DEFAULT_GAP_REL * eigh(&b).unwrap().spectral_norm();
            assert!(
                v.margin >= gap,
                "seed {seed}: margin {} below gap {gap}",
                v.margin
            );
        }

        let spec = Spec::new(3, 5).with_gap(0.5);
        let (a, b) = random_ordered_pair(&spec).unwrap();
        let v = loewner_geq(&a, &b, &tol).unwrap();
        assert!(v.margin >= 0.5);
    }

    #[test]
    fn chaotic_only_pair_has_the_advertised_relation() {
        let tol = TolerancePolicy::default();
        let spec = Spec::new(3, 11);
        let (a, b) = random_chaotic_only_pair(&spec, 200, &tol)
            .unwrap()
            .expect("should find a chaotic-only pair in 200 tries");
        let chaotic = chaotic_geq(&a, &b, &tol).unwrap();
        let loewner = loewner_geq(&a, &b, &tol).unwrap();
        assert!(chaotic.holds && chaotic.margin > 0.009);
        assert!(!loewner.holds);
        assert!(loewner.margin < -10.0 * loewner.tolerance);
    }

    #[test]
    fn chaotic_only_rejects_dim_one_and_respects_budget() {
        let tol = TolerancePolicy::default();
        assert!(matches!(
            random_chaotic_only_pair(&Spec::new(1, 3), 10, &tol),
            Err(Error::InvalidSpec(_))
        ));
        assert!(random_chaotic_only_pair(&Spec::new(3, 3), 0, &tol)
            .unwrap()
            .is_none());
    }

    #[test]
    fn unordered_pair_fails_both_directions() {
        let tol = TolerancePolicy::default();
        let (a, b) = random_unordered_pair(&Spec::new(3, 13), 100, &tol)
            .unwrap()
            .expect("should find an unordered pair quickly");
        let fwd = loewner_geq(&a, &b, &tol).unwrap();
        let bwd = loewner_geq(&b, &a, &tol).unwrap();
        assert!(!fwd.holds && !bwd.holds);
        assert!(matches!(
            random_unordered_pair(&Spec::new(1, 3), 10, &tol),
            Err(Error::InvalidSpec(_))
        ));
    }
}
