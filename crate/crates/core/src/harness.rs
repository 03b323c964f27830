//! Batch verification campaigns, counterexample search, and reports.
//!
//! A *campaign* runs every configured family over a grid of parameter sets
//! and a stream of seeded random matrix pairs, tallying holds, failures, and
//! per-instance errors. Everything is keyed off a single base seed, so a
//! campaign is reproducible bit-for-bit: the pair fed to family `f` at
//! dimension `d`, trial `k` is derived from `(seed, tag(f), d, k)` and from
//! nothing else. The *search* entry point drives the same generators toward
//! the opposite goal: find a decisive violation of an inequality whose
//! hypotheses are deliberately broken.
//!
//! This module is deliberately `f64`-only: reports are serialized artifacts
//! and must not depend on the scalar type of the caller.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::equations::{self, EquationFamily, ALL_EQUATION_FAMILIES};
use crate::error::{Error, Result};
use crate::furuta::{self, InequalityFamily, ParamSet, ALL_FAMILIES};
use crate::genpairs::{
    derive_seed, hash_tag, random_chaotic_only_pair, random_ordered_pair, GenSpec,
    DEFAULT_CONDITION_CAP, MAX_DIM, REJECTION_MARGIN_FACTOR,
};
use crate::orders::{OrderKind, TolerancePolicy};
use crate::spectra::HermitianMatrix;

type Mat = HermitianMatrix<f64>;

/// Default number of random pairs per `(family, dimension)` cell.
pub const DEFAULT_TRIALS: u64 = 20;

/// Default base seed for campaigns; any fixed value works, this one is just
/// the shipped default so two installations produce identical reports.
pub const DEFAULT_CAMPAIGN_SEED: u64 = 20_260_815;

/// Default dimensions a campaign sweeps.
pub const DEFAULT_CAMPAIGN_DIMS: [usize; 2] = [2, 3];

/// Default eigenvalue-spread cap for campaign matrices. The shipped parameter
/// grids chain exponents up to a total of about five, so capping the spread
/// at 100 keeps every intermediate matrix within a 1e10 spread — comfortably
/// inside the eigensolver's positive definite floor and the equation solvers'
/// residual budget.
pub const DEFAULT_CAMPAIGN_CONDITION_CAP: f64 = 100.0;

/// Default rejection-sampling budget when a family needs pairs that are
/// chaotically but not Loewner ordered.
pub const DEFAULT_CHAOTIC_BUDGET: usize = 400;

/// Default dimensions for counterexample search.
pub const DEFAULT_SEARCH_DIMS: [usize; 2] = [2, 3];

/// How many per-instance error messages an outcome keeps verbatim.
pub const ERROR_SAMPLE_CAP: usize = 3;

/// A family tag resolved to what it names: one of the inequality families or
/// one of the operator-equation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Inequality(InequalityFamily),
    Equation(EquationFamily),
}

impl FamilyKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilyKind::Inequality(f) => f.tag(),
            FamilyKind::Equation(f) => f.tag(),
        }
    }

    /// Whether the family's hypothesis asks for chaotic rather than Loewner
    /// order between the operands; campaigns pick the pair generator to match.
    pub fn hypothesis_is_chaotic(&self) -> bool {
        match self {
            FamilyKind::Inequality(f) => f.hypothesis_is_chaotic(),
            FamilyKind::Equation(f) => f.characterized_order() == OrderKind::Chaotic,
        }
    }
}

/// Resolves a tag against both family namespaces.
pub fn parse_family_tag(tag: &str) -> Result<FamilyKind> {
    InequalityFamily::from_tag(tag)
        .map(FamilyKind::Inequality)
        .or_else(|| EquationFamily::from_tag(tag).map(FamilyKind::Equation))
        .ok_or_else(|| Error::Config(format!("unknown family tag `{tag}`")))
}

/// Every runnable family tag, inequality families first.
pub fn all_family_tags() -> Vec<String> {
    ALL_FAMILIES
        .iter()
        .map(|f| f.tag().to_string())
        .chain(ALL_EQUATION_FAMILIES.iter().map(|f| f.tag().to_string()))
        .collect()
}

/// One parameter set in a campaign grid. Fields mirror [`ParamSet`]; absent
/// fields stay absent, except that equation-family entries may omit exactly
/// one constraint parameter and have it solved from the family's linear
/// constraint when the campaign starts.
///
/// `allow_invalid` admits an inequality entry whose hypotheses fail on
/// purpose: its violations are tallied under `failed` but never under
/// `failed_valid`, so a campaign can probe boundaries without tripping the
/// overall verdict.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub allow_invalid: bool,
}

impl GridEntry {
    pub fn to_params(self) -> ParamSet<f64> {
        ParamSet {
            p: self.p,
            q: self.q,
            r: self.r,
            s: self.s,
            t: self.t,
            p0: self.p0,
            n: self.n,
            alpha: self.alpha,
        }
    }

    pub fn from_params(params: &ParamSet<f64>) -> Self {
        Self {
            p: params.p,
            q: params.q,
            r: params.r,
            s: params.s,
            t: params.t,
            p0: params.p0,
            n: params.n,
            alpha: params.alpha,
            allow_invalid: false,
        }
    }
}

fn entry_pqr(p: f64, q: f64, r: f64) -> GridEntry {
    GridEntry {
        p: Some(p),
        q: Some(q),
        r: Some(r),
        ..GridEntry::default()
    }
}

fn entry_pstr(p: f64, s: f64, t: f64, r: f64) -> GridEntry {
    GridEntry {
        p: Some(p),
        s: Some(s),
        t: Some(t),
        r: Some(r),
        ..GridEntry::default()
    }
}

fn entry_complete_ineq(p: f64, p0: f64, r: f64) -> GridEntry {
    GridEntry {
        p: Some(p),
        p0: Some(p0),
        r: Some(r),
        ..GridEntry::default()
    }
}

fn entry_alpha(alpha: f64) -> GridEntry {
    GridEntry {
        alpha: Some(alpha),
        ..GridEntry::default()
    }
}

/// Equation-family entry with `s` left for the constraint solver.
fn entry_eq_order(p: f64, t: f64, r: f64, n: u32) -> GridEntry {
    GridEntry {
        p: Some(p),
        t: Some(t),
        r: Some(r),
        n: Some(n),
        ..GridEntry::default()
    }
}

/// Equation-family entry with `p` left for the constraint solver.
fn entry_eq_complete(p0: f64, r: f64, n: u32) -> GridEntry {
    GridEntry {
        p0: Some(p0),
        r: Some(r),
        n: Some(n),
        ..GridEntry::default()
    }
}

/// The shipped parameter grid for a family: a spread over the hypothesis
/// region including boundary points (where the defining constraint holds with
/// equality), with exponent chains kept small enough that campaign matrices
/// stay well conditioned. Equation-family entries omit one constraint
/// parameter on purpose, exercising the completion path on every run.
pub fn default_param_grid(kind: FamilyKind) -> Vec<GridEntry> {
    match kind {
        FamilyKind::Inequality(InequalityFamily::FurutaB)
        | FamilyKind::Inequality(InequalityFamily::FurutaA) => vec![
            entry_pqr(1.0, 1.0, 0.0),
            entry_pqr(2.0, 2.0, 0.0),
            entry_pqr(2.0, 2.0, 1.0),
            entry_pqr(3.0, 2.0, 1.0),
            entry_pqr(3.0, 3.0, 0.5),
            entry_pqr(0.5, 1.0, 0.0),
            entry_pqr(4.0, 2.5, 1.0),
            entry_pqr(2.5, 2.0, 1.0),
            entry_pqr(1.5, 1.5, 0.3),
            entry_pqr(2.0, 1.5, 1.0),
        ],
        FamilyKind::Inequality(InequalityFamily::GrandFuruta) => vec![
            entry_pstr(1.0, 1.0, 0.0, 0.0),
            entry_pstr(2.0, 1.0, 0.0, 1.0),
            entry_pstr(2.0, 1.0, 1.0, 1.0),
            entry_pstr(2.0, 2.0, 0.5, 1.0),
            entry_pstr(3.0, 1.0, 0.5, 1.0),
            entry_pstr(1.5, 1.0, 0.25, 0.25),
            entry_pstr(2.0, 1.8, 0.5, 0.5),
            entry_pstr(1.0, 2.0, 0.5, 0.5),
            entry_pstr(2.5, 1.2, 0.75, 1.0),
            entry_pstr(3.0, 1.0, 0.0, 2.0),
        ],
        FamilyKind::Inequality(InequalityFamily::CompleteForm) => vec![
            entry_complete_ineq(1.0, 0.5, 1.0),
            entry_complete_ineq(2.0, 0.5, 1.0),
            entry_complete_ineq(3.0, 1.0, 1.0),
            entry_complete_ineq(1.0, 0.0, 1.0),
            entry_complete_ineq(2.0, 1.0, 0.5),
            entry_complete_ineq(1.5, 0.25, 2.0),
            entry_complete_ineq(2.5, 1.0, 1.0),
            entry_complete_ineq(2.0, 0.75, 0.25),
            entry_complete_ineq(4.0, 1.5, 1.0),
            entry_complete_ineq(1.2, 0.2, 0.6),
        ],
        FamilyKind::Inequality(InequalityFamily::Thm19) => vec![
            // (p, s, t, r) with s on or above the sharp lower edge (1+t)/(p+t).
            entry_pstr(2.0, 0.5, 0.0, 0.0),
            entry_pstr(1.0, 1.0, 0.0, 0.0),
            entry_pstr(2.0, 1.0, 1.0, 1.0),
            entry_pstr(3.0, 1.0, 0.0, 1.0),
            entry_pstr(2.0, 1.2, 0.5, 0.5),
            entry_pstr(1.5, 1.0, 0.0, 0.5),
            entry_pstr(2.0, 0.9, 2.0, 0.0),
            entry_pstr(1.0, 1.5, 1.0, 1.0),
            entry_pstr(4.0, 1.0, 0.0, 0.5),
            entry_pstr(2.5, 1.0, 0.5, 1.0),
        ],
        FamilyKind::Inequality(InequalityFamily::Thm110) => vec![
            // (p, s, t, r) with s on or above the sharp lower edge t/(p+t).
            entry_pstr(1.0, 1.0, 0.0, 0.5),
            entry_pstr(1.0, 1.0, 1.0, 1.0),
            entry_pstr(2.0, 1.0, 0.0, 1.0),
            entry_pstr(0.5, 1.0, 0.5, 0.5),
            entry_pstr(1.0, 0.8, 0.5, 1.0),
            entry_pstr(2.0, 0.5, 1.0, 0.5),
            entry_pstr(1.5, 1.0, 0.0, 2.0),
            entry_pstr(1.0, 0.9, 2.0, 1.0),
            entry_pstr(3.0, 1.0, 0.0, 0.5),
            entry_pstr(0.75, 1.1, 0.25, 0.75),
        ],
        FamilyKind::Inequality(InequalityFamily::LownerHeinz) => vec![
            entry_alpha(0.0),
            entry_alpha(0.1),
            entry_alpha(0.25),
            entry_alpha(1.0 / 3.0),
            entry_alpha(0.5),
            entry_alpha(2.0 / 3.0),
            entry_alpha(0.75),
            entry_alpha(0.9),
            entry_alpha(0.95),
            entry_alpha(1.0),
        ],
        FamilyKind::Equation(EquationFamily::OrderC4)
        | FamilyKind::Equation(EquationFamily::OrderC5) => vec![
            entry_eq_order(3.0, 0.0, 1.0, 1),
            entry_eq_order(2.0, 0.0, 0.0, 0),
            entry_eq_order(2.0, 1.0, 1.0, 0),
            entry_eq_order(4.0, 0.5, 0.5, 0),
            entry_eq_order(1.0, 0.0, 1.0, 1),
        ],
        FamilyKind::Equation(EquationFamily::ChaoticD4)
        | FamilyKind::Equation(EquationFamily::ChaoticD5) => vec![
            entry_eq_order(1.0, 0.0, 0.5, 2),
            entry_eq_order(1.0, 1.0, 1.0, 1),
            entry_eq_order(2.0, 0.5, 1.0, 1),
            entry_eq_order(1.0, 0.5, 1.5, 1),
            entry_eq_order(0.5, 1.0, 1.0, 1),
        ],
        FamilyKind::Equation(EquationFamily::Complete33)
        | FamilyKind::Equation(EquationFamily::Complete35) => vec![
            entry_eq_complete(0.0, 1.0, 0),
            entry_eq_complete(0.5, 0.5, 0),
            entry_eq_complete(0.5, 1.0, 0),
            entry_eq_complete(1.0, 0.5, 0),
            entry_eq_complete(0.25, 0.75, 1),
        ],
        FamilyKind::Equation(EquationFamily::Complete37)
        | FamilyKind::Equation(EquationFamily::Complete39) => vec![
            entry_eq_complete(0.0, 1.0, 0),
            entry_eq_complete(0.5, 2.0, 0),
            entry_eq_complete(1.0, 1.0, 0),
            entry_eq_complete(0.5, 1.5, 0),
            entry_eq_complete(0.25, 1.0, 0),
        ],
        FamilyKind::Equation(EquationFamily::Complete311)
        | FamilyKind::Equation(EquationFamily::Complete313) => vec![
            entry_eq_complete(0.5, 0.5, 1),
            entry_eq_complete(0.5, 0.0, 1),
            entry_eq_complete(1.0, 0.5, 2),
            entry_eq_complete(0.75, 0.25, 1),
            entry_eq_complete(1.0, 1.0, 3),
        ],
    }
}

fn default_families() -> Vec<String> {
    all_family_tags()
}

fn default_dims() -> Vec<usize> {
    DEFAULT_CAMPAIGN_DIMS.to_vec()
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_CAMPAIGN_SEED
}

fn default_condition_cap() -> f64 {
    DEFAULT_CAMPAIGN_CONDITION_CAP
}

fn default_chaotic_budget() -> usize {
    DEFAULT_CHAOTIC_BUDGET
}

/// Full description of a campaign. Every field has a default, so `{}` parses
/// to the shipped campaign; `param_grid` entries override the default grid
/// for the family named by their key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub families: Vec<String>,
    pub dims: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: TolerancePolicy<f64>,
    pub condition_cap: f64,
    /// Eigenvalue gap forwarded to the ordered-pair generator; `None` keeps
    /// the generator's scale-relative default, `Some(0.0)` makes `A == B`.
    pub gap: Option<f64>,
    /// Rejection-sampling budget per pair for chaotic-hypothesis families.
    pub chaotic_budget: usize,
    pub param_grid: BTreeMap<String, Vec<GridEntry>>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            families: default_families(),
            dims: default_dims(),
            trials: default_trials(),
            seed: default_seed(),
            tolerance: TolerancePolicy::default(),
            condition_cap: default_condition_cap(),
            gap: None,
            chaotic_budget: default_chaotic_budget(),
            param_grid: BTreeMap::new(),
        }
    }
}

impl CampaignConfig {
    /// The shipped campaign: every family, dimensions 2 and 3, twenty trials
    /// per cell, default grids and tolerances.
    pub fn default_campaign() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("campaign config: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }
}

/// Enough to regenerate one campaign or search instance exactly: the derived
/// pair seed, the dimension, the trial (or search attempt) index, and the
/// parameter set rendered as text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFingerprint {
    pub seed: u64,
    pub dim: usize,
    pub trial: u64,
    pub params: String,
}

/// Tally for one family across the whole campaign.
///
/// `checked == held + failed` always; `errors` counts instances that produced
/// no verdict at all (generator exhaustion, eigensolver domain violations)
/// and are *not* part of `checked`. For inequality families the margin is the
/// order margin; for equation families it is `1 - ‖S‖`, the distance from the
/// contraction boundary. Residual fields are present only for equation
/// families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOutcome {
    pub family: String,
    pub checked: u64,
    pub held: u64,
    pub failed: u64,
    /// Failures among parameter sets that satisfy the family's hypotheses;
    /// any nonzero value here means a guaranteed statement was observed to
    /// fail, which is the one thing a campaign exists to flag.
    pub failed_valid: u64,
    pub errors: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_instance: Option<InstanceFingerprint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub error_samples: Vec<String>,
}

impl FamilyOutcome {
    fn new(family: String) -> Self {
        Self {
            family,
            checked: 0,
            held: 0,
            failed: 0,
            failed_valid: 0,
            errors: 0,
            worst_margin: None,
            worst_instance: None,
            residual_max: None,
            residual_mean: None,
            error_samples: Vec::new(),
        }
    }

    fn record_error(&mut self, message: String) {
        self.errors += 1;
        if self.error_samples.len() < ERROR_SAMPLE_CAP {
            self.error_samples.push(message);
        }
    }
}

/// A finished campaign. Identical configs produce identical reports except
/// for `wall_time_ms`; [`CampaignReport::masked`] zeroes that field so two
/// runs can be compared byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: u64,
    pub dims: Vec<usize>,
    pub tolerance: TolerancePolicy<f64>,
    pub condition_cap: f64,
    pub families: Vec<FamilyOutcome>,
    pub wall_time_ms: u64,
}

impl CampaignReport {
    /// True when any family recorded a failure under hypotheses that
    /// guarantee the statement.
    pub fn any_valid_failure(&self) -> bool {
        self.families.iter().any(|f| f.failed_valid > 0)
    }

    pub fn total_errors(&self) -> u64 {
        self.families.iter().map(|f| f.errors).sum()
    }

    /// Process exit code a campaign maps to: 1 when a guaranteed statement
    /// failed, 3 when instances errored out without a verdict, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.any_valid_failure() {
            1
        } else if self.total_errors() > 0 {
            3
        } else {
            0
        }
    }

    /// Copy with the wall time zeroed, for run-to-run comparison.
    pub fn masked(&self) -> Self {
        let mut copy = self.clone();
        copy.wall_time_ms = 0;
        copy
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("campaign report: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "family,checked,held,failed,failed_valid,errors,worst_margin,residual_max\n",
        );
        for f in &self.families {
            let margin = f.worst_margin.map(|v| v.to_string()).unwrap_or_default();
            let residual = f.residual_max.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                f.family, f.checked, f.held, f.failed, f.failed_valid, f.errors, margin, residual
            ));
        }
        out
    }
}

/// Output encodings for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown report format `{other}` (expected `json` or `csv`)"
            ))),
        }
    }
}

/// Writes a report to disk in the requested encoding.
pub fn emit_report(report: &CampaignReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    std::fs::write(path, text)
        .map_err(|e| Error::Config(format!("cannot write report to {}: {e}", path.display())))
}

struct ResolvedFamily {
    tag: String,
    kind: FamilyKind,
    /// Parameter sets with constraint parameters already completed, paired
    /// with whether the set satisfies the family's hypotheses.
    grid: Vec<(ParamSet<f64>, bool)>,
}

fn validate_config(cfg: &CampaignConfig) -> Result<()> {
    if cfg.dims.is_empty() {
        return Err(Error::Config(
            "dims must list at least one dimension".into(),
        ));
    }
    for &dim in &cfg.dims {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!(
                "dimension {dim} out of range 1..={MAX_DIM}"
            )));
        }
    }
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if !cfg.condition_cap.is_finite() || cfg.condition_cap < 1.0 {
        return Err(Error::Config(format!(
            "condition_cap must be finite and >= 1, got {}",
            cfg.condition_cap
        )));
    }
    if let Some(gap) = cfg.gap {
        if !gap.is_finite() || gap < 0.0 {
            return Err(Error::Config(format!(
                "gap must be finite and >= 0, got {gap}"
            )));
        }
    }
    if cfg.chaotic_budget == 0 {
        return Err(Error::Config("chaotic_budget must be at least 1".into()));
    }
    if !cfg.tolerance.rel.is_finite() || !cfg.tolerance.floor.is_finite() {
        return Err(Error::Config("tolerance components must be finite".into()));
    }
    for key in cfg.param_grid.keys() {
        parse_family_tag(key)?;
    }
    Ok(())
}

fn resolve_one_family(cfg: &CampaignConfig, tag: &str) -> Result<ResolvedFamily> {
    let kind = parse_family_tag(tag)?;
    let entries = match cfg.param_grid.get(tag) {
        Some(list) if list.is_empty() => {
            return Err(Error::Config(format!("param_grid for `{tag}` is empty")))
        }
        Some(list) => list.clone(),
        None => default_param_grid(kind),
    };
    let mut grid = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        let params = entry.to_params();
        match kind {
            FamilyKind::Inequality(family) => {
                let check = furuta::validate(family, &params)
                    .map_err(|e| Error::Config(format!("{tag} grid entry {index}: {e}")))?;
                if !check.valid && !entry.allow_invalid {
                    return Err(Error::Config(format!(
                        "{tag} grid entry {index} violates hypotheses ({}); set allow_invalid to probe it",
                        check.violations.join("; ")
                    )));
                }
                grid.push((params, check.valid));
            }
            FamilyKind::Equation(family) => {
                if entry.allow_invalid {
                    return Err(Error::Config(format!(
                        "{tag} grid entry {index}: allow_invalid only applies to inequality families"
                    )));
                }
                let completed = match equations::validate_equation(family, &params) {
                    Ok(check) if check.valid => params,
                    Ok(check) => {
                        return Err(Error::Config(format!(
                            "{tag} grid entry {index} violates hypotheses ({})",
                            check.violations.join("; ")
                        )))
                    }
                    Err(Error::MissingParam(_)) => equations::complete_params(family, &params)
                        .map_err(|e| Error::Config(format!("{tag} grid entry {index}: {e}")))?,
                    Err(e) => return Err(e),
                };
                grid.push((completed, true));
            }
        }
    }
    Ok(ResolvedFamily {
        tag: tag.to_string(),
        kind,
        grid,
    })
}

fn resolve_families(cfg: &CampaignConfig) -> Result<Vec<ResolvedFamily>> {
    cfg.families
        .iter()
        .map(|tag| resolve_one_family(cfg, tag))
        .collect()
}

/// Draws the pair for one campaign cell. Chaotic-hypothesis families get
/// pairs that are chaotically but not Loewner ordered where the dimension
/// permits (scalars cannot separate the two orders, so dimension one falls
/// back to ordered pairs, which satisfy the chaotic hypothesis as well).
fn generate_pair(
    chaotic: bool,
    dim: usize,
    seed: u64,
    cfg: &CampaignConfig,
    tol: &TolerancePolicy<f64>,
) -> Result<Option<(Mat, Mat)>> {
    let mut spec = GenSpec::new(dim, seed).with_condition_cap(cfg.condition_cap);
    if let Some(gap) = cfg.gap {
        spec = spec.with_gap(gap);
    }
    if chaotic && dim >= 2 {
        random_chaotic_only_pair(&spec, cfg.chaotic_budget, tol)
    } else {
        random_ordered_pair(&spec).map(Some)
    }
}

struct InstanceMeasure {
    held: bool,
    margin: f64,
    residual: Option<f64>,
}

fn run_instance(
    kind: FamilyKind,
    a: &Mat,
    b: &Mat,
    params: &ParamSet<f64>,
    tol: &TolerancePolicy<f64>,
) -> Result<InstanceMeasure> {
    match kind {
        FamilyKind::Inequality(family) => {
            let eval = furuta::evaluate(family, a, b, params, tol)?;
            Ok(InstanceMeasure {
                held: eval.verdict.holds,
                margin: eval.verdict.margin,
                residual: None,
            })
        }
        FamilyKind::Equation(family) => {
            let report = equations::solve(family, a, b, params, tol)?;
            Ok(InstanceMeasure {
                held: report.contraction,
                margin: 1.0 - report.norm,
                residual: Some(report.equation_residual),
            })
        }
    }
}

/// Runs a campaign to completion. Per-instance numeric problems are recorded
/// in the owning family's tally and do not abort the run; configuration
/// problems abort immediately with [`Error::Config`].
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let start = Instant::now();
    validate_config(cfg)?;
    let resolved = resolve_families(cfg)?;
    let tol = cfg.tolerance;

    let mut outcomes = Vec::with_capacity(resolved.len());
    for family in &resolved {
        let mut outcome = FamilyOutcome::new(family.tag.clone());
        let chaotic = family.kind.hypothesis_is_chaotic();
        let mut residual_sum = 0.0;
        let mut residual_count = 0u64;
        for &dim in &cfg.dims {
            for trial in 0..cfg.trials {
                let pair_seed = derive_seed(cfg.seed, &[hash_tag(&family.tag), dim as u64, trial]);
                let pair = match generate_pair(chaotic, dim, pair_seed, cfg, &tol) {
                    Ok(Some(pair)) => pair,
                    Ok(None) => {
                        outcome.record_error(format!(
                            "dim {dim} trial {trial}: pair generator exhausted its budget"
                        ));
                        continue;
                    }
                    Err(e) => {
                        outcome.record_error(format!("dim {dim} trial {trial}: {e}"));
                        continue;
                    }
                };
                let (a, b) = pair;
                for (params, valid) in &family.grid {
                    let measure = match run_instance(family.kind, &a, &b, params, &tol) {
                        Ok(measure) => measure,
                        Err(e) => {
                            outcome
                                .record_error(format!("dim {dim} trial {trial} [{params}]: {e}"));
                            continue;
                        }
                    };
                    outcome.checked += 1;
                    if measure.held {
                        outcome.held += 1;
                    } else {
                        outcome.failed += 1;
                        if *valid {
                            outcome.failed_valid += 1;
                        }
                    }
                    if outcome.worst_margin.is_none_or(|w| measure.margin < w) {
                        outcome.worst_margin = Some(measure.margin);
                        outcome.worst_instance = Some(InstanceFingerprint {
                            seed: pair_seed,
                            dim,
                            trial,
                            params: params.to_string(),
                        });
                    }
                    if let Some(residual) = measure.residual {
                        residual_sum += residual;
                        residual_count += 1;
                        if outcome.residual_max.is_none_or(|m| residual > m) {
                            outcome.residual_max = Some(residual);
                        }
                    }
                }
            }
        }
        if residual_count > 0 {
            outcome.residual_mean = Some(residual_sum / residual_count as f64);
        }
        outcomes.push(outcome);
    }

    Ok(CampaignReport {
        seed: cfg.seed,
        trials: cfg.trials,
        dims: cfg.dims.clone(),
        tolerance: tol,
        condition_cap: cfg.condition_cap,
        families: outcomes,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

/// What a counterexample hunt is allowed to use.
#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub family: InequalityFamily,
    pub params: ParamSet<f64>,
    pub budget: u64,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub condition_cap: f64,
    /// Per-attempt rejection budget when the family's hypothesis needs
    /// chaotically-but-not-Loewner ordered pairs.
    pub chaotic_budget: usize,
    pub tolerance: TolerancePolicy<f64>,
}

impl SearchSpec {
    /// Search defaults: dimensions 2 and 3 and the pair generator's own
    /// (wide) eigenvalue-spread cap, which makes violations easier to excite
    /// than the deliberately tame campaign cap.
    pub fn new(family: InequalityFamily, params: ParamSet<f64>, budget: u64, seed: u64) -> Self {
        Self {
            family,
            params,
            budget,
            seed,
            dims: DEFAULT_SEARCH_DIMS.to_vec(),
            condition_cap: DEFAULT_CONDITION_CAP,
            chaotic_budget: DEFAULT_CHAOTIC_BUDGET,
            tolerance: TolerancePolicy::default(),
        }
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_condition_cap(mut self, cap: f64) -> Self {
        self.condition_cap = cap;
        self
    }
}

/// A concrete violation: the pair that produced it, the decisive margin, and
/// enough bookkeeping to regenerate the pair from scratch.
#[derive(Debug, Clone)]
pub struct Witness {
    pub fingerprint: InstanceFingerprint,
    pub a: Mat,
    pub b: Mat,
    pub margin: f64,
    pub tolerance: f64,
}

/// Result of a counterexample hunt.
#[derive(Debug, Clone)]
pub enum SearchOutcome {
    /// The parameter set satisfies the family's hypotheses, so the inequality
    /// is a theorem and no counterexample exists; nothing was sampled.
    VacuouslyValid,
    Found(Box<Witness>),
    Exhausted {
        attempts: u64,
    },
}

/// Hunts for a decisive violation of an inequality family at the given
/// parameters. "Decisive" means the margin is below minus ten times the
/// instance tolerance, the same bar the pair generators use, so borderline
/// rounding never counts as a counterexample. Instances that leave the
/// evaluable domain (extreme spectra under large exponents) are skipped, not
/// fatal: the hunt is sampling hostile territory on purpose.
pub fn search_counterexample(spec: &SearchSpec) -> Result<SearchOutcome> {
    if spec.dims.is_empty() {
        return Err(Error::Config(
            "search requires at least one dimension".into(),
        ));
    }
    for &dim in &spec.dims {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!(
                "dimension {dim} out of range 1..={MAX_DIM}"
            )));
        }
    }
    if spec.budget == 0 {
        return Err(Error::Config("search budget must be at least 1".into()));
    }
    let chaotic = spec.family.hypothesis_is_chaotic();
    if chaotic && spec.dims.iter().any(|&d| d < 2) {
        return Err(Error::Config(
            "chaotic-hypothesis search requires dimensions >= 2".into(),
        ));
    }
    let check = furuta::validate(spec.family, &spec.params)?;
    if check.valid {
        return Ok(SearchOutcome::VacuouslyValid);
    }

    for attempt in 0..spec.budget {
        let dim = spec.dims[(attempt % spec.dims.len() as u64) as usize];
        let pair_seed = derive_seed(
            spec.seed,
            &[hash_tag(spec.family.tag()), dim as u64, attempt],
        );
        let gen_spec = GenSpec::new(dim, pair_seed).with_condition_cap(spec.condition_cap);
        let pair = if chaotic {
            random_chaotic_only_pair(&gen_spec, spec.chaotic_budget, &spec.tolerance)?
        } else {
            Some(random_ordered_pair(&gen_spec)?)
        };
        let Some((a, b)) = pair else { continue };
        let eval = match furuta::evaluate(spec.family, &a, &b, &spec.params, &spec.tolerance) {
            Ok(eval) => eval,
            Err(Error::Domain { .. })
            | Err(Error::Numeric(_))
            | Err(Error::NonConvergence { .. }) => continue,
            Err(e) => return Err(e),
        };
        if eval.verdict.margin < -REJECTION_MARGIN_FACTOR * eval.verdict.tolerance {
            return Ok(SearchOutcome::Found(Box::new(Witness {
                fingerprint: InstanceFingerprint {
                    seed: pair_seed,
                    dim,
                    trial: attempt,
                    params: spec.params.to_string(),
                },
                a,
                b,
                margin: eval.verdict.margin,
                tolerance: eval.verdict.tolerance,
            })));
        }
    }
    Ok(SearchOutcome::Exhausted {
        attempts: spec.budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_family_config(tag: &str, dims: Vec<usize>, trials: u64) -> CampaignConfig {
        CampaignConfig {
            families: vec![tag.to_string()],
            dims,
            trials,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn default_campaign_grids_resolve_for_all_families() {
        let cfg = CampaignConfig::default_campaign();
        assert_eq!(cfg.families.len(), 17);
        let resolved = resolve_families(&cfg).unwrap();
        assert_eq!(resolved.len(), 17);
        for family in &resolved {
            assert!(
                family.grid.len() >= 5,
                "{} grid has only {} entries",
                family.tag,
                family.grid.len()
            );
            for (params, valid) in &family.grid {
                assert!(*valid, "{} default entry [{params}] is invalid", family.tag);
            }
        }
    }

    #[test]
    fn equation_grid_completion_fills_the_missing_parameter() {
        let cfg = single_family_config("order_C4", vec![2], 1);
        let resolved = resolve_families(&cfg).unwrap();
        // First default entry: p=3, t=0, r=1, n=1 forces s=1.
        let (params, valid) = &resolved[0].grid[0];
        assert!(valid);
        assert_eq!(params.s, Some(1.0));
        // Last default entry: p=1, t=0, r=1, n=1 forces s=3.
        let (params, _) = &resolved[0].grid[4];
        assert_eq!(params.s, Some(3.0));
    }

    #[test]
    fn scalar_campaign_counts_every_instance_as_held() {
        let mut cfg = single_family_config("furuta_B", vec![1], 3);
        cfg.param_grid
            .insert("furuta_B".into(), vec![entry_pqr(2.0, 2.0, 0.0)]);
        let report = run_campaign(&cfg).unwrap();
        let outcome = &report.families[0];
        assert_eq!(outcome.checked, 3);
        assert_eq!(outcome.held, 3);
        assert_eq!(outcome.failed, 0);
        assert_eq!(outcome.errors, 0);
        assert!(outcome.worst_margin.unwrap() >= 0.0);
        assert!(outcome.residual_max.is_none());
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn equation_campaign_tracks_residuals_and_contraction() {
        let cfg = single_family_config("order_C4", vec![1, 2], 2);
        let report = run_campaign(&cfg).unwrap();
        let outcome = &report.families[0];
        // 2 dims x 2 trials x 5 grid entries.
        assert_eq!(outcome.checked, 20);
        assert_eq!(outcome.held, 20);
        assert_eq!(outcome.errors, 0);
        let residual_max = outcome.residual_max.unwrap();
        assert!(residual_max <= equations::EQ_RESIDUAL_MAX);
        assert!(outcome.residual_mean.unwrap() <= residual_max);
        // Ordered pairs keep the solution inside the contraction ball.
        assert!(outcome.worst_margin.unwrap() >= -report.tolerance.threshold(1.0));
    }

    #[test]
    fn chaotic_families_fall_back_to_ordered_pairs_at_dimension_one() {
        let cfg = single_family_config("thm_1_10", vec![1], 2);
        let report = run_campaign(&cfg).unwrap();
        let outcome = &report.families[0];
        assert_eq!(outcome.checked, 20);
        assert_eq!(outcome.held, 20);
        assert_eq!(outcome.errors, 0);
    }

    #[test]
    fn chaotic_equation_campaign_holds_on_chaotic_pairs() {
        let cfg = single_family_config("chaotic_D4", vec![2], 2);
        let report = run_campaign(&cfg).unwrap();
        let outcome = &report.families[0];
        assert_eq!(outcome.checked, 10);
        assert_eq!(outcome.held, 10);
        assert_eq!(outcome.errors, 0);
        assert!(outcome.residual_max.unwrap() <= equations::EQ_RESIDUAL_MAX);
    }

    #[test]
    fn invalid_entries_fail_without_flagging_the_campaign() {
        let mut cfg = single_family_config("furuta_B", vec![2], 10);
        cfg.param_grid.insert(
            "furuta_B".into(),
            vec![GridEntry {
                allow_invalid: true,
                ..entry_pqr(3.0, 1.0, 0.0)
            }],
        );
        let report = run_campaign(&cfg).unwrap();
        let outcome = &report.families[0];
        assert_eq!(outcome.checked, 10);
        assert_eq!(outcome.held + outcome.failed, 10);
        assert!(
            outcome.failed >= 1,
            "cubing an ordered pair should break the order at least once in ten draws"
        );
        assert_eq!(outcome.failed_valid, 0);
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn valid_failures_flip_the_exit_code() {
        // A negative floor demands a strictly positive margin, so identical
        // pairs (gap zero => margin exactly zero) must be counted as valid
        // failures. This exercises the accounting path without needing a
        // false theorem.
        let mut cfg = single_family_config("furuta_B", vec![2], 4);
        cfg.gap = Some(0.0);
        cfg.tolerance = TolerancePolicy::new(0.0, -1e-3);
        cfg.param_grid
            .insert("furuta_B".into(), vec![entry_pqr(1.0, 1.0, 0.0)]);
        let report = run_campaign(&cfg).unwrap();
        let outcome = &report.families[0];
        assert_eq!(outcome.checked, 4);
        assert_eq!(outcome.failed_valid, 4);
        assert_eq!(outcome.worst_margin, Some(0.0));
        assert!(outcome.worst_instance.is_some());
        assert!(report.any_valid_failure());
        assert_eq!(report.exit_code(), 1);
    }

    #[test]
    fn identical_configs_produce_identical_masked_reports() {
        let cfg = CampaignConfig {
            families: vec!["furuta_B".into(), "order_C4".into(), "thm_1_10".into()],
            dims: vec![2],
            trials: 2,
            ..CampaignConfig::default()
        };
        let first = run_campaign(&cfg).unwrap();
        let second = run_campaign(&cfg).unwrap();
        assert_eq!(first.masked(), second.masked());
        assert_eq!(first.masked().to_json(), second.masked().to_json());
    }

    #[test]
    fn report_round_trips_through_json() {
        let cfg = single_family_config("lowner_heinz", vec![2], 1);
        let report = run_campaign(&cfg).unwrap();
        let parsed = CampaignReport::from_json(&report.to_json()).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn csv_has_a_header_and_one_row_per_family() {
        let cfg = CampaignConfig {
            families: vec!["furuta_B".into(), "order_C4".into()],
            dims: vec![1],
            trials: 1,
            ..CampaignConfig::default()
        };
        let report = run_campaign(&cfg).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("family,checked,held"));
        assert!(lines[1].starts_with("furuta_B,"));
        assert!(lines[2].starts_with("order_C4,"));
    }

    #[test]
    fn config_round_trips_through_json_and_empty_object_is_the_default() {
        let cfg = CampaignConfig::default_campaign();
        let parsed = CampaignConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(parsed, cfg);
        let from_empty = CampaignConfig::from_json("{}").unwrap();
        assert_eq!(from_empty, cfg);
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let reject = |mutate: &dyn Fn(&mut CampaignConfig)| {
            let mut cfg = single_family_config("furuta_B", vec![2], 1);
            mutate(&mut cfg);
            assert!(matches!(run_campaign(&cfg), Err(Error::Config(_))));
        };
        reject(&|cfg| cfg.families = vec!["furuta_Z".into()]);
        reject(&|cfg| cfg.dims = vec![]);
        reject(&|cfg| cfg.dims = vec![0]);
        reject(&|cfg| cfg.dims = vec![MAX_DIM + 1]);
        reject(&|cfg| cfg.trials = 0);
        reject(&|cfg| cfg.condition_cap = 0.5);
        reject(&|cfg| cfg.gap = Some(-1.0));
        reject(&|cfg| cfg.chaotic_budget = 0);
        reject(&|cfg| {
            cfg.param_grid.insert("furuta_B".into(), vec![]);
        });
        reject(&|cfg| {
            cfg.param_grid
                .insert("furuta_Q".into(), vec![entry_pqr(1.0, 1.0, 0.0)]);
        });
        // Hypothesis violation without allow_invalid.
        reject(&|cfg| {
            cfg.param_grid
                .insert("furuta_B".into(), vec![entry_pqr(3.0, 1.0, 0.0)]);
        });
        // Equation families refuse allow_invalid outright.
        reject(&|cfg| {
            cfg.families = vec!["order_C4".into()];
            cfg.param_grid.insert(
                "order_C4".into(),
                vec![GridEntry {
                    allow_invalid: true,
                    ..entry_eq_order(3.0, 0.0, 1.0, 1)
                }],
            );
        });
        // Equation entry with a violated constraint (s supplied but wrong).
        reject(&|cfg| {
            cfg.families = vec!["order_C4".into()];
            cfg.param_grid.insert(
                "order_C4".into(),
                vec![GridEntry {
                    s: Some(2.0),
                    ..entry_eq_order(3.0, 0.0, 1.0, 1)
                }],
            );
        });
        // Missing a required field entirely (no t).
        reject(&|cfg| {
            cfg.families = vec!["order_C4".into()];
            cfg.param_grid.insert(
                "order_C4".into(),
                vec![GridEntry {
                    p: Some(3.0),
                    r: Some(1.0),
                    n: Some(1),
                    ..GridEntry::default()
                }],
            );
        });
    }

    #[test]
    fn empty_family_list_yields_an_empty_report() {
        let cfg = CampaignConfig {
            families: vec![],
            dims: vec![2],
            trials: 1,
            ..CampaignConfig::default()
        };
        let report = run_campaign(&cfg).unwrap();
        assert!(report.families.is_empty());
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn squaring_search_finds_a_decisive_witness_and_it_replays_exactly() {
        let spec = SearchSpec::new(
            InequalityFamily::LownerHeinz,
            ParamSet::new().with_alpha(2.0),
            10_000,
            7,
        )
        .with_dims(vec![2]);
        let outcome = search_counterexample(&spec).unwrap();
        let SearchOutcome::Found(witness) = outcome else {
            panic!("expected a witness, got {outcome:?}");
        };
        assert!(witness.margin < -REJECTION_MARGIN_FACTOR * witness.tolerance);

        // The fingerprint alone must regenerate the pair and the margin.
        let gen_spec = GenSpec::new(witness.fingerprint.dim, witness.fingerprint.seed)
            .with_condition_cap(spec.condition_cap);
        let (a, b) = random_ordered_pair(&gen_spec).unwrap();
        assert_eq!(a.entries(), witness.a.entries());
        assert_eq!(b.entries(), witness.b.entries());
        let replay = furuta::evaluate(
            InequalityFamily::LownerHeinz,
            &a,
            &b,
            &spec.params,
            &spec.tolerance,
        )
        .unwrap();
        assert_eq!(replay.verdict.margin, witness.margin);
    }

    #[test]
    fn search_is_vacuous_when_the_hypotheses_hold() {
        let spec = SearchSpec::new(
            InequalityFamily::LownerHeinz,
            ParamSet::new().with_alpha(0.5),
            10,
            7,
        );
        assert!(matches!(
            search_counterexample(&spec).unwrap(),
            SearchOutcome::VacuouslyValid
        ));
    }

    #[test]
    fn search_reports_exhaustion_for_barely_invalid_parameters() {
        // (1+r)q = 1 is just below p = 1.02, so violations exist but are far
        // too small to clear the decisive-margin bar in a short hunt.
        let spec = SearchSpec::new(
            InequalityFamily::FurutaB,
            ParamSet::new().with_p(1.02).with_q(1.0).with_r(0.0),
            25,
            11,
        );
        let outcome = search_counterexample(&spec).unwrap();
        assert!(matches!(outcome, SearchOutcome::Exhausted { attempts: 25 }));
    }

    #[test]
    fn search_rejects_unusable_dimension_lists() {
        let base = SearchSpec::new(
            InequalityFamily::LownerHeinz,
            ParamSet::new().with_alpha(2.0),
            10,
            7,
        );
        let empty = base.clone().with_dims(vec![]);
        assert!(matches!(
            search_counterexample(&empty),
            Err(Error::Config(_))
        ));
        let chaotic = SearchSpec::new(
            InequalityFamily::Thm110,
            // t < 0 breaks the hypotheses so the hunt would actually sample.
            ParamSet::new()
                .with_p(1.0)
                .with_s(1.0)
                .with_t(-1.0)
                .with_r(0.5),
            10,
            7,
        )
        .with_dims(vec![1, 2]);
        assert!(matches!(
            search_counterexample(&chaotic),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn emit_report_writes_both_encodings() {
        let cfg = single_family_config("furuta_B", vec![1], 1);
        let report = run_campaign(&cfg).unwrap();
        let dir = std::env::temp_dir();
        let json_path = dir.join("loewner_harness_test_report.json");
        let csv_path = dir.join("loewner_harness_test_report.csv");
        emit_report(&report, &json_path, ReportFormat::Json).unwrap();
        emit_report(&report, &csv_path, ReportFormat::Csv).unwrap();
        let json_text = std::fs::read_to_string(&json_path).unwrap();
        let csv_text = std::fs::read_to_string(&csv_path).unwrap();
        std::fs::remove_file(&json_path).ok();
        std::fs::remove_file(&csv_path).ok();
        assert_eq!(json_text, report.to_json());
        assert_eq!(csv_text, report.to_csv());
        assert!("json".parse::<ReportFormat>().unwrap() == ReportFormat::Json);
        assert!("yaml".parse::<ReportFormat>().is_err());
    }
}
