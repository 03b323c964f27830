//! Command line front end for the verifier: batch campaigns, single-pair
//! equation solving, counterexample hunts, and seeded pair generation.
//!
//! Exit codes: 0 on success, 1 when a campaign observes a failure under
//! hypotheses that guarantee the statement, 2 for usage or configuration
//! problems, 3 for numeric failures (non-convergence, domain violations,
//! exhausted generator budgets).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use loewner_core::equations::{self, EquationFamily, ALL_EQUATION_FAMILIES};
use loewner_core::furuta::{InequalityFamily, ParamSet, ALL_FAMILIES};
use loewner_core::genpairs::{
    random_chaotic_only_pair, random_ordered_pair, random_unordered_pair, GenSpec,
    DEFAULT_CONDITION_CAP,
};
use loewner_core::harness::{
    emit_report, parse_family_tag, run_campaign, search_counterexample, CampaignConfig,
    CampaignReport, ReportFormat, SearchOutcome, SearchSpec, DEFAULT_CHAOTIC_BUDGET,
};
use loewner_core::orders::TolerancePolicy;
use loewner_core::spectra::{read_text, write_pair_text, write_text};
use loewner_core::{Error, Mat64, Result};

#[derive(Parser)]
#[command(
    name = "loewner-lab",
    version,
    about = "Verify operator inequalities and their contraction characterizations on positive definite matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign and emit its report.
    Verify(VerifyArgs),
    /// Solve one equation family on a matrix pair and print the solution report as JSON.
    Solve(SolveArgs),
    /// Hunt for a decisive counterexample to an inequality family whose hypotheses are broken.
    Search(SearchArgs),
    /// Generate a seeded random matrix pair in the shared text format.
    Gen(GenArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON campaign description; omit to run the shipped default campaign.
    /// `{}` is a valid file and also means the default campaign.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the report to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Report encoding: json or csv.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct SolveArgs {
    /// Equation family tag (for example order_C4 or complete_3_3).
    #[arg(long)]
    family: String,
    /// File holding the left operand in the shared text format.
    #[arg(long = "A", value_name = "FILE")]
    a: PathBuf,
    /// File holding the right operand in the shared text format.
    #[arg(long = "B", value_name = "FILE")]
    b: PathBuf,
    /// Comma-separated key=value parameters, e.g. p=3,t=0,r=1,s=1,n=1.
    /// One constraint parameter may be omitted; it is solved from the
    /// family's linear constraint.
    #[arg(long)]
    params: String,
}

#[derive(Args)]
struct SearchArgs {
    /// Inequality family tag (for example lowner_heinz or furuta_B).
    #[arg(long)]
    family: String,
    /// Comma-separated key=value parameters; they should violate at least
    /// one hypothesis, otherwise the search is vacuous.
    #[arg(long)]
    params: String,
    /// Number of random pairs to try.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dimensions the hunt cycles through.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3usize])]
    dims: Vec<usize>,
    /// Largest eigenvalue ratio of generated matrices.
    #[arg(long, default_value_t = DEFAULT_CONDITION_CAP)]
    condition_cap: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Relation {
    /// A >= B with a definite margin.
    Ordered,
    /// log A >= log B but A >= B fails decisively (needs dim >= 2).
    Chaotic,
    /// Neither A >= B nor B >= A (needs dim >= 2).
    Unordered,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Relation::Ordered)]
    relation: Relation,
    /// Largest eigenvalue ratio of the generated matrices.
    #[arg(long, default_value_t = DEFAULT_CONDITION_CAP)]
    condition_cap: f64,
    /// Minimum order margin for ordered pairs; 0 makes A == B.
    #[arg(long)]
    gap: Option<f64>,
    /// Rejection-sampling budget for the chaotic and unordered relations.
    #[arg(long, default_value_t = DEFAULT_CHAOTIC_BUDGET)]
    budget: usize,
    /// Write the pair to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Single-pair solver output; matrix payload in the shared text format, one
/// line per entry of the array.
#[derive(Serialize)]
struct SolveOutput {
    family: String,
    params: String,
    #[serde(rename = "norm_S")]
    norm_s: f64,
    equation_residual: f64,
    contraction: bool,
    order_margin: f64,
    #[serde(rename = "S")]
    s: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => cmd_verify(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Search(args) => cmd_search(&args),
        Command::Gen(args) => cmd_gen(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Usage and configuration problems exit 2; numeric failures exit 3.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Config(_)
        | Error::InvalidSpec(_)
        | Error::MissingParam(_)
        | Error::InvalidParams(_)
        | Error::Constraint(_)
        | Error::DimensionMismatch(_) => 2,
        Error::Domain { .. }
        | Error::NonConvergence { .. }
        | Error::NotPositiveDefinite(_)
        | Error::Numeric(_) => 3,
    }
}

fn read_file(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &PathBuf) -> Result<Mat64> {
    read_text(&read_file(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let cfg = match &args.config {
        Some(path) => CampaignConfig::from_json(&read_file(path)?)?,
        None => CampaignConfig::default_campaign(),
    };
    let format: ReportFormat = args.format.parse()?;
    let report = run_campaign(&cfg)?;

    match &args.out {
        Some(path) => emit_report(&report, path, format)?,
        None => {
            let text = match format {
                ReportFormat::Json => report.to_json(),
                ReportFormat::Csv => report.to_csv(),
            };
            print!("{text}");
        }
    }

    dump_problems(&cfg, &report);
    Ok(ExitCode::from(report.exit_code() as u8))
}

/// Writes a full instance dump for every offending family to stderr, with a
/// command line that regenerates the exact pair behind the worst margin.
fn dump_problems(cfg: &CampaignConfig, report: &CampaignReport) {
    for outcome in &report.families {
        if outcome.failed_valid > 0 {
            eprintln!(
                "FAILURE {}: {} of {} checks failed under valid hypotheses",
                outcome.family, outcome.failed_valid, outcome.checked
            );
            if let (Some(margin), Some(instance)) = (outcome.worst_margin, &outcome.worst_instance)
            {
                let relation = parse_family_tag(&outcome.family)
                    .map(|kind| {
                        if kind.hypothesis_is_chaotic() && instance.dim >= 2 {
                            "chaotic"
                        } else {
                            "ordered"
                        }
                    })
                    .unwrap_or("ordered");
                let gap = cfg.gap.map(|g| format!(" --gap {g}")).unwrap_or_default();
                eprintln!(
                    "  worst margin {margin} at dim {} trial {} [{}]",
                    instance.dim, instance.trial, instance.params
                );
                eprintln!(
                    "  reproduce: loewner-lab gen --dim {} --seed {} --relation {relation} --condition-cap {}{gap}",
                    instance.dim, instance.seed, cfg.condition_cap
                );
            }
        }
        if outcome.errors > 0 {
            eprintln!(
                "ERRORS {}: {} instances produced no verdict",
                outcome.family, outcome.errors
            );
            for sample in &outcome.error_samples {
                eprintln!("  {sample}");
            }
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let family = EquationFamily::from_tag(&args.family).ok_or_else(|| {
        let tags: Vec<&str> = ALL_EQUATION_FAMILIES.iter().map(|f| f.tag()).collect();
        Error::Config(format!(
            "`{}` is not an equation family; expected one of {}",
            args.family,
            tags.join(", ")
        ))
    })?;
    let a = read_matrix(&args.a)?;
    let b = read_matrix(&args.b)?;
    let parsed = ParamSet::parse(&args.params)?;
    // A single missing constraint parameter is filled in from the family's
    // linear constraint; anything else goes to the solver as-is.
    let params = match equations::validate_equation(family, &parsed) {
        Ok(_) => parsed,
        Err(Error::MissingParam(_)) => equations::complete_params(family, &parsed)?,
        Err(e) => return Err(e),
    };
    let tol = TolerancePolicy::default();
    let report = equations::solve(family, &a, &b, &params, &tol)?;

    let output = SolveOutput {
        family: family.tag().to_string(),
        params: params.to_string(),
        norm_s: report.norm,
        equation_residual: report.equation_residual,
        contraction: report.contraction,
        order_margin: report.order_verdict.margin,
        s: write_text(&report.solution)
            .lines()
            .map(String::from)
            .collect(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&output).expect("solver output serializes")
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_search(args: &SearchArgs) -> Result<ExitCode> {
    let family = InequalityFamily::from_tag(&args.family).ok_or_else(|| {
        let tags: Vec<&str> = ALL_FAMILIES.iter().map(|f| f.tag()).collect();
        Error::Config(format!(
            "`{}` is not an inequality family; expected one of {}",
            args.family,
            tags.join(", ")
        ))
    })?;
    let params = ParamSet::parse(&args.params)?;
    let spec = SearchSpec::new(family, params, args.budget, args.seed)
        .with_dims(args.dims.clone())
        .with_condition_cap(args.condition_cap);
    match search_counterexample(&spec)? {
        SearchOutcome::VacuouslyValid => {
            println!(
                "advisory: parameters [{params}] satisfy every hypothesis of {family}; \
                 the inequality is guaranteed and the search is vacuous"
            );
            Ok(ExitCode::SUCCESS)
        }
        SearchOutcome::Found(witness) => {
            let relation = if family.hypothesis_is_chaotic() {
                "chaotic"
            } else {
                "ordered"
            };
            println!("counterexample found for {family} [{params}]");
            println!(
                "margin: {} (decisive below {})",
                witness.margin,
                -10.0 * witness.tolerance
            );
            println!(
                "dim: {}  attempt: {}  pair seed: {}",
                witness.fingerprint.dim, witness.fingerprint.trial, witness.fingerprint.seed
            );
            println!(
                "reproduce: loewner-lab gen --dim {} --seed {} --relation {relation} --condition-cap {}",
                witness.fingerprint.dim, witness.fingerprint.seed, spec.condition_cap
            );
            println!();
            print!("{}", write_pair_text(&witness.a, &witness.b));
            Ok(ExitCode::SUCCESS)
        }
        SearchOutcome::Exhausted { attempts } => {
            println!(
                "no decisive violation of {family} [{params}] in {attempts} attempts \
                 (inconclusive; not a validity claim)"
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode> {
    let mut spec = GenSpec::new(args.dim, args.seed).with_condition_cap(args.condition_cap);
    if let Some(gap) = args.gap {
        spec = spec.with_gap(gap);
    }
    let tol = TolerancePolicy::default();
    let pair = match args.relation {
        Relation::Ordered => Some(random_ordered_pair(&spec)?),
        Relation::Chaotic => random_chaotic_only_pair(&spec, args.budget, &tol)?,
        Relation::Unordered => random_unordered_pair(&spec, args.budget, &tol)?,
    };
    let Some((a, b)) = pair else {
        return Err(Error::Numeric(format!(
            "no acceptable pair within budget {}; raise --budget or change --seed",
            args.budget
        )));
    };
    let text = write_pair_text(&a, &b);
    match &args.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
