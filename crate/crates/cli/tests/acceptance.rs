//! Acceptance gate: one test per advertised guarantee, each ending in a
//! single `ACCEPTANCE n (...): PASS` line. Every criterion is phrased as a
//! concrete, seeded experiment so a regression points at the exact matrix
//! pair and parameter set that broke.

use std::process::Command;
use std::time::{Duration, Instant};

use loewner_core::equations::{self, EquationFamily, ALL_EQUATION_FAMILIES};
use loewner_core::furuta::{self, InequalityFamily, ParamSet};
use loewner_core::genpairs::{
    derive_seed, random_chaotic_only_pair, random_ordered_pair, random_pd, random_unordered_pair,
    GenSpec, SplitMix64,
};
use loewner_core::harness::{
    default_param_grid, search_counterexample, FamilyKind, SearchOutcome, SearchSpec,
};
use loewner_core::orders::{chaotic_geq, loewner_geq, OrderKind, TolerancePolicy};
use loewner_core::spectra::{apply_fn, eigh, spectral_norm, ScalarFunction};
use loewner_core::{Error, Mat64};

fn pass(number: u32, what: &str) {
    println!("ACCEPTANCE {number} ({what}): PASS");
}

fn rel_err(got: &Mat64, want: &Mat64) -> f64 {
    let denom = want.frobenius_norm();
    let err = got.sub(want).unwrap().frobenius_norm();
    if denom == 0.0 {
        err
    } else {
        err / denom
    }
}

/// Default grid of a family with every constraint parameter filled in, the
/// same way a campaign resolves it.
fn equation_grid(family: EquationFamily) -> Vec<ParamSet<f64>> {
    default_param_grid(FamilyKind::Equation(family))
        .into_iter()
        .map(|entry| {
            let params = entry.to_params();
            match equations::validate_equation(family, &params) {
                Ok(check) => {
                    assert!(check.valid, "{family}: default entry invalid");
                    params
                }
                Err(Error::MissingParam(_)) => equations::complete_params(family, &params).unwrap(),
                Err(e) => panic!("{family}: {e}"),
            }
        })
        .collect()
}

fn inequality_grid(family: InequalityFamily) -> Vec<ParamSet<f64>> {
    default_param_grid(FamilyKind::Inequality(family))
        .into_iter()
        .map(|entry| entry.to_params())
        .collect()
}

#[test]
fn acceptance_1_functional_calculus_identities() {
    let start = Instant::now();
    for i in 0..100u64 {
        let dim = 1 + (i % 8) as usize;
        let h = random_pd(&GenSpec::new(dim, derive_seed(0xACC1, &[i]))).unwrap();
        let d = eigh(&h).unwrap();

        // Square-root round trip: multiplying the square root by itself
        // must reproduce the matrix.
        let root = d.power(0.5).unwrap();
        let squared = Mat64::mul_chain(&[&root, &root]).unwrap();
        let err = rel_err(&squared, &h);
        assert!(
            err <= 1e-9,
            "sqrt round trip drifted {err} (dim {dim}, i {i})"
        );

        // Power semigroup: H^1.5 · H^0.5 == H^2.
        let p_a = d.power(1.5).unwrap();
        let p_b = d.power(0.5).unwrap();
        let product = Mat64::mul_chain(&[&p_a, &p_b]).unwrap();
        let direct = d.power(2.0).unwrap();
        let err = rel_err(&product, &direct);
        assert!(err <= 1e-9, "semigroup drifted {err} (dim {dim}, i {i})");

        // exp after log is the identity on positive definite matrices.
        let log = d.log().unwrap();
        let back = apply_fn(&log, &ScalarFunction::Exp).unwrap();
        let err = rel_err(&back, &h);
        assert!(
            err <= 1e-9,
            "exp-log round trip drifted {err} (dim {dim}, i {i})"
        );
    }
    assert!(
        start.elapsed() < Duration::from_secs(10),
        "took {:?}",
        start.elapsed()
    );
    pass(1, "functional-calculus identities");
}

#[test]
fn acceptance_2_inequality_soundness() {
    let start = Instant::now();
    let tol = TolerancePolicy::default();

    // Ordered-hypothesis families over their full default grids.
    let families = [
        InequalityFamily::FurutaB,
        InequalityFamily::FurutaA,
        InequalityFamily::GrandFuruta,
        InequalityFamily::CompleteForm,
        InequalityFamily::Thm19,
    ];
    let mut checked = 0u64;
    for (fi, &family) in families.iter().enumerate() {
        let grid = inequality_grid(family);
        for i in 0..500u64 {
            let dim = 2 + (i % 5) as usize; // 2..=6
            let spec =
                GenSpec::new(dim, derive_seed(0xACC2, &[fi as u64, i])).with_condition_cap(100.0);
            let (a, b) = random_ordered_pair(&spec).unwrap();
            for params in &grid {
                let eval = furuta::evaluate(family, &a, &b, params, &tol).unwrap();
                assert!(
                    eval.verdict.holds,
                    "{family} [{params}] failed at dim {dim}, pair {i}: margin {}",
                    eval.verdict.margin
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 5 * 500 * 10);

    // Chaotic-hypothesis family on pairs that are chaotically but not
    // Loewner ordered.
    let grid = inequality_grid(InequalityFamily::Thm110);
    let mut produced = 0u64;
    let mut attempt = 0u64;
    while produced < 500 {
        let dim = 2 + (attempt % 2) as usize;
        let spec = GenSpec::new(dim, derive_seed(0xACC2, &[99, attempt])).with_condition_cap(100.0);
        attempt += 1;
        assert!(attempt < 2_000, "chaotic generation too slow");
        let Some((a, b)) = random_chaotic_only_pair(&spec, 400, &tol).unwrap() else {
            continue;
        };
        for params in &grid {
            let eval = furuta::evaluate(InequalityFamily::Thm110, &a, &b, params, &tol).unwrap();
            assert!(
                eval.verdict.holds,
                "thm_1_10 [{params}] failed at dim {dim}, attempt {attempt}: margin {}",
                eval.verdict.margin
            );
        }
        produced += 1;
    }

    assert!(
        start.elapsed() < Duration::from_secs(60),
        "took {:?}",
        start.elapsed()
    );
    pass(
        2,
        "inequality soundness on 3000 hypothesis-satisfying pairs",
    );
}

#[test]
fn acceptance_3_equation_fidelity() {
    let tol = TolerancePolicy::default();
    for (fi, &family) in ALL_EQUATION_FAMILIES.iter().enumerate() {
        let grid = equation_grid(family);
        let chaotic = family.characterized_order() == OrderKind::Chaotic;
        let mut produced = 0u64;
        let mut attempt = 0u64;
        while produced < 300 {
            let dim = if chaotic {
                2 + (attempt % 2) as usize
            } else {
                1 + (attempt % 4) as usize
            };
            let spec = GenSpec::new(dim, derive_seed(0xACC3, &[fi as u64, attempt]))
                .with_condition_cap(100.0);
            attempt += 1;
            assert!(attempt < 1_200, "{family}: generation too slow");
            let pair = if chaotic {
                random_chaotic_only_pair(&spec, 400, &tol).unwrap()
            } else {
                Some(random_ordered_pair(&spec).unwrap())
            };
            let Some((a, b)) = pair else { continue };
            let params = &grid[(produced as usize) % grid.len()];
            let report = equations::solve(family, &a, &b, params, &tol).unwrap();
            assert!(
                report.equation_residual <= 1e-8,
                "{family} [{params}] residual {} at dim {dim}",
                report.equation_residual
            );
            assert!(
                report.norm <= 1.0 + 1e-8,
                "{family} [{params}] norm {} at dim {dim}",
                report.norm
            );
            produced += 1;
        }
    }
    pass(
        3,
        "equation fidelity: 300 solutions per family within residual and norm budgets",
    );
}

#[test]
fn acceptance_4_characterization_reverse_direction() {
    let tol = TolerancePolicy::default();

    // Loewner-family witness: t=0, r=0, n=0, s=1/p makes the contraction
    // property literally equivalent to A >= B.
    let witness = ParamSet::new()
        .with_p(2.0)
        .with_t(0.0)
        .with_r(0.0)
        .with_s(0.5)
        .with_n(0);
    for family in [EquationFamily::OrderC4, EquationFamily::OrderC5] {
        for i in 0..300u64 {
            let dim = 2 + (i % 2) as usize;
            let spec = GenSpec::new(dim, derive_seed(0xACC4, &[0, i]));
            let (a, b) = random_ordered_pair(&spec).unwrap();
            let report = equations::solve(family, &a, &b, &witness, &tol).unwrap();
            let order = loewner_geq(&a, &b, &tol).unwrap();
            assert!(
                order.holds && report.contraction,
                "{family} ordered pair {i}: norm {}",
                report.norm
            );
        }
        let mut produced = 0u64;
        let mut attempt = 0u64;
        while produced < 300 {
            let dim = 2 + (attempt % 2) as usize;
            let spec = GenSpec::new(dim, derive_seed(0xACC4, &[1, attempt]));
            attempt += 1;
            assert!(attempt < 1_200, "unordered generation too slow");
            let Some((a, b)) = random_unordered_pair(&spec, 400, &tol).unwrap() else {
                continue;
            };
            let report = equations::solve(family, &a, &b, &witness, &tol).unwrap();
            let order = loewner_geq(&a, &b, &tol).unwrap();
            assert_eq!(
                report.contraction, order.holds,
                "{family} unordered pair {attempt}: norm {} vs margin {}",
                report.norm, order.margin
            );
            assert!(!order.holds, "generator returned an ordered pair");
            produced += 1;
        }
    }

    // Chaotic-family witness: contraction forces the log comparison up to a
    // defect proportional to ‖log A‖. The defect shrinks linearly with the
    // outer exponent r, so r is kept far below 1/n (s = 64r keeps the
    // constraint exact in binary).
    let witness = ParamSet::new()
        .with_p(1.0)
        .with_t(0.0)
        .with_r(1.0 / 1024.0)
        .with_s(1.0 / 16.0)
        .with_n(64);
    let mut contracted = 0u64;
    for i in 0..300u64 {
        let dim = 2 + (i % 2) as usize;
        let spec = GenSpec::new(dim, derive_seed(0xACC4, &[2, i]));
        let pair = if i % 2 == 0 {
            random_chaotic_only_pair(&spec, 400, &tol).unwrap()
        } else {
            random_unordered_pair(&spec, 400, &tol).unwrap()
        };
        let Some((a, b)) = pair else { continue };
        let report = equations::solve(EquationFamily::ChaoticD4, &a, &b, &witness, &tol).unwrap();
        if !report.contraction {
            continue;
        }
        contracted += 1;
        let chaotic = chaotic_geq(&a, &b, &tol).unwrap();
        let log_a = eigh(&a).unwrap().log().unwrap();
        let bound = 1e-4 * spectral_norm(&log_a).unwrap();
        assert!(
            chaotic.margin >= -bound,
            "pair {i}: contraction held but log margin {} < -{bound}",
            chaotic.margin
        );
    }
    assert!(contracted >= 100, "only {contracted} contracting samples");
    pass(
        4,
        "contraction tracks the order relation through both witness families",
    );
}

#[test]
fn acceptance_5_scalar_oracle_equivalence() {
    let close = |got: f64, want: f64, what: &str| {
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1e-30),
            "{what}: got {got}, closed form {want}"
        );
    };
    let mut rng = SplitMix64::new(0xACC5);
    let mut draw = |lo: f64, hi: f64| lo + (hi - lo) * rng.next_unit::<f64>();
    let tol = TolerancePolicy::default();

    for _ in 0..100 {
        let a = draw(0.2, 3.0);
        let b = draw(0.2, 3.0);
        let ma = Mat64::scalar(a);
        let mb = Mat64::scalar(b);

        // Inequality evaluators against direct powf arithmetic.
        let cases: Vec<(InequalityFamily, ParamSet<f64>, f64, f64)> = vec![
            (
                InequalityFamily::FurutaB,
                ParamSet::new().with_p(2.0).with_q(2.0).with_r(1.0),
                (a.powf(2.0) * b).powf(0.5),
                b.powf(1.5),
            ),
            (
                InequalityFamily::FurutaA,
                ParamSet::new().with_p(2.0).with_q(2.0).with_r(1.0),
                a.powf(1.5),
                (a * b.powf(2.0)).powf(0.5),
            ),
            (
                InequalityFamily::GrandFuruta,
                ParamSet::new()
                    .with_p(2.0)
                    .with_s(1.0)
                    .with_t(0.5)
                    .with_r(1.0),
                a.powf(1.5),
                (a * (a.powf(-0.5) * b * b).powf(1.0)).powf(1.5 / 2.5),
            ),
            (
                InequalityFamily::CompleteForm,
                // p=2, p0=0.5, r=1 gives s = min{2, 2} = 2.
                ParamSet::new().with_p(2.0).with_p0(0.5).with_r(1.0),
                (a * b.powf(0.5)).powf(3.0 / 1.5),
                (a * b * b).powf(1.0),
            ),
            (
                InequalityFamily::Thm19,
                ParamSet::new()
                    .with_p(2.0)
                    .with_t(1.0)
                    .with_r(1.0)
                    .with_s(1.0),
                a.powf(3.0),
                (a * (a * b * b)).powf(3.0 / 4.0),
            ),
            (
                InequalityFamily::Thm110,
                ParamSet::new()
                    .with_p(1.0)
                    .with_t(1.0)
                    .with_r(1.0)
                    .with_s(1.0),
                a.powf(2.0),
                (a * (a * b)).powf(2.0 / 3.0),
            ),
            (
                InequalityFamily::LownerHeinz,
                ParamSet::new().with_alpha(0.5),
                a.powf(0.5),
                b.powf(0.5),
            ),
        ];
        for (family, params, lhs_want, rhs_want) in cases {
            let eval = furuta::evaluate(family, &ma, &mb, &params, &tol).unwrap();
            close(eval.lhs.get(0, 0), lhs_want, family.tag());
            close(eval.rhs.get(0, 0), rhs_want, family.tag());
        }

        // Solvers against the scalar solution of frame * S * frame = target.
        let c4 = ParamSet::new()
            .with_p(3.0)
            .with_t(0.0)
            .with_r(1.0)
            .with_s(1.0)
            .with_n(1);
        let d4 = ParamSet::new()
            .with_p(1.0)
            .with_t(0.0)
            .with_r(0.5)
            .with_s(1.0)
            .with_n(2);
        let sandwich = ParamSet::new()
            .with_p(1.0)
            .with_p0(0.0)
            .with_r(1.0)
            .with_n(0);
        let framed = ParamSet::new()
            .with_p(2.0)
            .with_p0(0.5)
            .with_r(2.0)
            .with_n(0);
        let ratio = ParamSet::new()
            .with_p(1.5)
            .with_p0(0.5)
            .with_r(0.5)
            .with_n(1);

        let w4 = a * b.powf(3.0);
        let scalar_cases: Vec<(EquationFamily, &ParamSet<f64>, f64)> = vec![
            (EquationFamily::OrderC4, &c4, w4.powf(0.5) / a.powf(2.0)),
            (
                EquationFamily::OrderC5,
                &c4,
                b.powf(2.0) / (b * a.powf(3.0)).powf(0.5),
            ),
            (
                EquationFamily::ChaoticD4,
                &d4,
                (a.powf(0.5) * b).powf(1.0 / 3.0) / a.powf(0.5),
            ),
            (
                EquationFamily::ChaoticD5,
                &d4,
                b.powf(0.5) / (b.powf(0.5) * a).powf(1.0 / 3.0),
            ),
            (
                EquationFamily::Complete33,
                &sandwich,
                (a * b) / (a * 1.0).powf(2.0),
            ),
            (
                EquationFamily::Complete35,
                &sandwich,
                (1.0 / (b * a)) / (1.0 / b).powf(2.0),
            ),
            (
                EquationFamily::Complete37,
                &framed,
                (a * a * b * b) / (a * a * b.powf(0.5)).powf(2.0 * 4.0 / 5.0),
            ),
            (
                EquationFamily::Complete39,
                &framed,
                (1.0 / (b * b * a * a)) / (1.0 / (b * b * a.powf(0.5))).powf(2.0 * 4.0 / 5.0),
            ),
            (
                EquationFamily::Complete311,
                &ratio,
                (a.powf(-0.5) * b.powf(-0.5)).powf(2.0) / (a.powf(-0.5) * b.powf(-1.5)),
            ),
            (
                EquationFamily::Complete313,
                &ratio,
                (b.powf(0.5) * a.powf(0.5)).powf(2.0) / (b.powf(0.5) * a.powf(1.5)),
            ),
        ];
        for (family, params, want) in scalar_cases {
            let report = equations::solve(family, &ma, &mb, params, &tol).unwrap();
            close(report.solution.get(0, 0), want, family.tag());
            close(report.norm, want, family.tag());
            assert!(report.equation_residual <= 1e-12, "{family}");
        }
    }
    pass(5, "scalar closed forms match every evaluator and solver");
}

#[test]
fn acceptance_6_squaring_boundary_search() {
    let start = Instant::now();
    let found = search_counterexample(
        &SearchSpec::new(
            InequalityFamily::LownerHeinz,
            ParamSet::new().with_alpha(2.0),
            10_000,
            20_260_815,
        )
        .with_dims(vec![2]),
    )
    .unwrap();
    let SearchOutcome::Found(witness) = found else {
        panic!("no witness for squaring within budget");
    };
    assert!(
        witness.margin < -1e-6,
        "witness margin {} is not decisive",
        witness.margin
    );

    let vacuous = search_counterexample(
        &SearchSpec::new(
            InequalityFamily::LownerHeinz,
            ParamSet::new().with_alpha(0.5),
            10_000,
            20_260_815,
        )
        .with_dims(vec![2]),
    )
    .unwrap();
    assert!(matches!(vacuous, SearchOutcome::VacuouslyValid));

    assert!(
        start.elapsed() < Duration::from_secs(30),
        "took {:?}",
        start.elapsed()
    );
    pass(6, "half power survives the hunt that convicts the square");
}

#[test]
fn acceptance_7_campaign_determinism() {
    let run_verify = || {
        let output = Command::new(env!("CARGO_BIN_EXE_loewner-lab"))
            .arg("verify")
            .output()
            .expect("binary runs");
        assert_eq!(output.status.code(), Some(0), "default campaign not clean");
        String::from_utf8(output.stdout).expect("report is utf-8")
    };
    let first = run_verify();
    let second = run_verify();
    let strip_wall_time = |text: &str| -> String {
        text.lines()
            .filter(|line| !line.contains("\"wall_time_ms\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip_wall_time(&first),
        strip_wall_time(&second),
        "default campaign reports differ beyond wall time"
    );
    pass(
        7,
        "byte-identical default campaign reports modulo wall time",
    );
}
