//! Command-line front end. Every command builds a serializable report; the
//! text rendering is derived from the same struct, so both formats carry
//! identical numbers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bell::{classify, BellData, ClassificationReport, Context, JointTable, Setting, TableOptions, DEFAULT_TOL_BELL, DEFAULT_TOL_MARGINAL};
use crate::datasets;
use crate::entanglement::DEFAULT_PRODUCT_TOL;
use crate::error::Error;
use crate::linalg::{ComplexVector, ProductIsomorphism, C64};
use crate::models::{construct_model, nonlocal_box_model, ConstructedModel, ContextEntanglement};
use crate::simulators::{self, SimulationResult, SphereExperimentConfig};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVALID_DATA: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "bellzoo", version, about = "Analyze CHSH coincidence data and build Hilbert-space models for it")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a coincidence-data file.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        tolerances: Tolerances,
        /// Rescale tables whose sums are off by rounding (up to 0.005).
        #[arg(long)]
        normalize: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run one of the bundled datasets or models.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        #[command(flatten)]
        tolerances: Tolerances,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Monte-Carlo run of a macroscopic mechanism.
    Simulate {
        #[arg(value_enum)]
        model: SimModel,
        /// Direction of A in degrees (spheres only).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        ap: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        bp: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tolerances: Tolerances,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build measurement bases reproducing a data file from one pure state.
    Construct {
        file: PathBuf,
        /// Eight comma-separated reals re0,im0,re1,im1,re2,im2,re3,im3; the
        /// state is normalized before use.
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        #[command(flatten)]
        tolerances: Tolerances,
        #[arg(long)]
        normalize: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Tolerances {
    #[arg(long, default_value_t = DEFAULT_TOL_BELL, value_parser = positive)]
    pub tol_bell: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_MARGINAL, value_parser = positive)]
    pub tol_marginal: f64,
    #[arg(long, default_value_t = DEFAULT_PRODUCT_TOL, value_parser = positive)]
    pub tol_product: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_bell: DEFAULT_TOL_BELL, tol_marginal: DEFAULT_TOL_MARGINAL, tol_product: DEFAULT_PRODUCT_TOL }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("tolerance must be positive, got {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoName {
    AnimalActs,
    Vessels,
    Cats,
    NonlocalBox,
    Spheres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimModel {
    Spheres,
    VesselsBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidProbabilities(_) => EXIT_INVALID_DATA,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

// Input files

fn plus_minus() -> [f64; 2] {
    [1.0, -1.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    tables: InputTables,
    #[serde(default)]
    outcomes: Option<InputOutcomes>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputTables {
    #[serde(rename = "AB")]
    ab: [[f64; 2]; 2],
    #[serde(rename = "AB'")]
    ab_prime: [[f64; 2]; 2],
    #[serde(rename = "A'B")]
    a_prime_b: [[f64; 2]; 2],
    #[serde(rename = "A'B'")]
    a_prime_b_prime: [[f64; 2]; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputOutcomes {
    #[serde(rename = "A", default = "plus_minus")]
    a: [f64; 2],
    #[serde(rename = "A'", default = "plus_minus")]
    a_prime: [f64; 2],
    #[serde(rename = "B", default = "plus_minus")]
    b: [f64; 2],
    #[serde(rename = "B'", default = "plus_minus")]
    b_prime: [f64; 2],
}

impl Default for InputOutcomes {
    fn default() -> Self {
        Self { a: plus_minus(), a_prime: plus_minus(), b: plus_minus(), b_prime: plus_minus() }
    }
}

/// Parse the coincidence-data JSON format. Structural problems are usage
/// errors naming the offending field; bad probabilities are data errors.
pub fn parse_bell_data(json: &str, options: TableOptions) -> Result<BellData, CliError> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let input: InputFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::usage(e.into_inner().to_string())
        } else {
            CliError::usage(format!("field `{path}`: {}", e.into_inner()))
        }
    })?;
    let outcomes = input.outcomes.unwrap_or_default();
    let t = &input.tables;
    let outcome = |s: Setting| match s {
        Setting::A => outcomes.a,
        Setting::APrime => outcomes.a_prime,
        Setting::B => outcomes.b,
        Setting::BPrime => outcomes.b_prime,
    };
    let mut tables = Vec::with_capacity(4);
    for (ctx, p) in Context::ALL.into_iter().zip([t.ab, t.ab_prime, t.a_prime_b, t.a_prime_b_prime]) {
        let (left, right) = ctx.settings();
        let table = JointTable::with_options(p, outcome(left), outcome(right), options).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("table `tables.{ctx}`: {}", err.message);
            err
        })?;
        tables.push(table);
    }
    Ok(BellData::new(tables.try_into().expect("four tables")))
}

fn load_bell_data(path: &Path, normalize: bool) -> Result<BellData, CliError> {
    let json = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let options = if normalize { TableOptions::normalizing() } else { TableOptions::default() };
    let data = parse_bell_data(&json, options).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        e
    })?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(match label {
        Some(l) => data.with_label(l),
        None => data,
    })
}

fn parse_state(s: &str) -> Result<ComplexVector, CliError> {
    let reals: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("--state: {e}")))?;
    if reals.len() != 8 {
        return Err(CliError::usage(format!("--state needs 8 reals, got {}", reals.len())));
    }
    let v = ComplexVector::new(reals.chunks(2).map(|c| C64::new(c[0], c[1])).collect())?;
    if v.norm() == 0.0 {
        return Err(CliError::usage("--state is the zero vector"));
    }
    Ok(v.normalized()?)
}

// Reports

/// Tables plus their full classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub label: Option<String>,
    /// Per context, `(p11, p12, p21, p22)`.
    pub tables: [[f64; 4]; 4],
    pub classification: ClassificationReport,
}

impl DataSummary {
    pub fn new(data: &BellData, tol: Tolerances) -> Self {
        Self {
            label: data.label.clone(),
            tables: data.tables().each_ref().map(JointTable::grid),
            classification: classify(data, tol.tol_bell, tol.tol_marginal),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub source: String,
    pub data: DataSummary,
}

/// Verification of the nonlocal-box model at one choice of phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCheck {
    pub phases: (f64, f64),
    pub trace_rho_b: f64,
    /// Max-entry |ρ′ − ρ| after the Lüders update of each context.
    pub luders_deviation: [f64; 4],
    /// Max-entry gap between reduced updated states sharing a setting,
    /// order A, A′, B, B′.
    pub reduced_state_gaps: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub state: ComplexVector,
    pub reproduction_residual: f64,
    pub contexts: [ContextEntanglement; 4],
}

impl From<&ConstructedModel> for ConstructionSummary {
    fn from(m: &ConstructedModel) -> Self {
        Self {
            state: m.pure_state.clone(),
            reproduction_residual: m.reproduction_residual,
            contexts: m.contexts.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub name: DemoName,
    /// Measurement directions in degrees, when the demo has any.
    pub angles_deg: Option<[f64; 4]>,
    pub data: DataSummary,
    pub model_check: Option<ModelCheck>,
    pub construction: Option<ConstructionSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub model: SimModel,
    pub angles_deg: Option<[f64; 4]>,
    pub trials: u64,
    pub seed: u64,
    pub counts: [[u64; 4]; 4],
    pub empirical: DataSummary,
    pub analytic: DataSummary,
    /// Max |empirical − analytic| over all sixteen probabilities.
    pub max_deviation_from_analytic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructReport {
    pub source: String,
    pub target: DataSummary,
    pub model: ConstructedModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Analyze(AnalyzeReport),
    Demo(DemoReport),
    Simulate(SimulateReport),
    Construct(ConstructReport),
}

// Commands

pub fn cmd_analyze(file: &Path, tol: Tolerances, normalize: bool) -> Result<AnalyzeReport, CliError> {
    let data = load_bell_data(file, normalize)?;
    Ok(AnalyzeReport { source: file.display().to_string(), data: DataSummary::new(&data, tol) })
}

/// Directions in degrees maximizing CHSH for the spheres.
pub const SPHERES_DEMO_ANGLES: [f64; 4] = [0.0, 90.0, 135.0, 45.0];

fn sphere_config(angles_deg: [f64; 4], trials: u64, seed: u64) -> SphereExperimentConfig {
    let [a, ap, b, bp] = angles_deg.map(f64::to_radians);
    SphereExperimentConfig { angle_a: a, angle_a_prime: ap, angle_b: b, angle_b_prime: bp, trials, seed }
}

pub fn nonlocal_box_check(alpha: f64, beta: f64) -> Result<ModelCheck, CliError> {
    let model = nonlocal_box_model(alpha, beta);
    let rho = model.state.matrix();
    let updates = model.luders_updates()?;
    Ok(ModelCheck {
        phases: (alpha, beta),
        trace_rho_b: model.state.expectation(&model.chsh_operator()),
        luders_deviation: updates.each_ref().map(|u| u.matrix().max_abs_diff(rho)),
        reduced_state_gaps: model.luders_reduced_state_gaps()?,
    })
}

pub fn cmd_demo(name: DemoName, tol: Tolerances) -> Result<DemoReport, CliError> {
    let iso = ProductIsomorphism::identity();
    let mut report = DemoReport {
        name,
        angles_deg: None,
        data: DataSummary::new(&datasets::uniform(), tol),
        model_check: None,
        construction: None,
    };
    match name {
        DemoName::AnimalActs => {
            let data = datasets::animal_acts();
            let model = construct_model(&data, None, &iso, tol.tol_product)?;
            report.data = DataSummary::new(&data, tol);
            report.construction = Some((&model).into());
        }
        DemoName::Vessels => {
            let data = simulators::vessels_deterministic();
            // The siphon-siphon state: AB measured in the standard basis.
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let state = ComplexVector::from_real(&[0.0, h, h, 0.0])?;
            let model = construct_model(&data, Some(state), &iso, tol.tol_product)?;
            report.data = DataSummary::new(&data, tol);
            report.construction = Some((&model).into());
        }
        DemoName::Cats => {
            report.data = DataSummary::new(&simulators::cats_gedanken(), tol);
        }
        DemoName::NonlocalBox => {
            let data = nonlocal_box_model(0.0, 0.0).born_tables()?.with_label("nonlocal box");
            report.data = DataSummary::new(&data, tol);
            report.model_check = Some(nonlocal_box_check(0.0, 0.0)?);
        }
        DemoName::Spheres => {
            let cfg = sphere_config(SPHERES_DEMO_ANGLES, 1, 0);
            report.angles_deg = Some(SPHERES_DEMO_ANGLES);
            report.data = DataSummary::new(&simulators::spheres_analytic_data(&cfg), tol);
        }
    }
    Ok(report)
}

fn max_table_deviation(x: &BellData, y: &BellData) -> f64 {
    let mut out: f64 = 0.0;
    for (s, t) in x.tables().iter().zip(y.tables()) {
        for (p, q) in s.grid().iter().zip(t.grid()) {
            out = out.max((p - q).abs());
        }
    }
    out
}

pub fn cmd_simulate(
    model: SimModel,
    angles_deg: [f64; 4],
    trials: u64,
    seed: u64,
    tol: Tolerances,
) -> Result<SimulateReport, CliError> {
    let (result, angles): (SimulationResult, _) = match model {
        SimModel::Spheres => (simulators::spheres_simulate(&sphere_config(angles_deg, trials, seed))?, Some(angles_deg)),
        SimModel::VesselsBox => (simulators::vessels_nonlocal_box(trials, seed)?, None),
    };
    let analytic = result.analytic.clone().expect("simulators report analytic tables");
    Ok(SimulateReport {
        model,
        angles_deg: angles,
        trials: result.trials,
        seed: result.seed,
        counts: result.counts,
        empirical: DataSummary::new(&result.empirical, tol),
        analytic: DataSummary::new(&analytic, tol),
        max_deviation_from_analytic: max_table_deviation(&result.empirical, &analytic),
    })
}

pub fn cmd_construct(
    file: &Path,
    state: Option<&str>,
    tol: Tolerances,
    normalize: bool,
) -> Result<ConstructReport, CliError> {
    let data = load_bell_data(file, normalize)?;
    let state = state.map(parse_state).transpose()?;
    let model = construct_model(&data, state, &ProductIsomorphism::identity(), tol.tol_product)?;
    Ok(ConstructReport { source: file.display().to_string(), target: DataSummary::new(&data, tol), model })
}

/// Run a parsed command line and return what goes to standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let (report, format) = match &cli.command {
        Command::Analyze { file, tolerances, normalize, format } => {
            (Report::Analyze(cmd_analyze(file, *tolerances, *normalize)?), *format)
        }
        Command::Demo { name, tolerances, format } => (Report::Demo(cmd_demo(*name, *tolerances)?), *format),
        Command::Simulate { model, a, ap, b, bp, trials, seed, tolerances, format } => (
            Report::Simulate(cmd_simulate(*model, [*a, *ap, *b, *bp], *trials, *seed, *tolerances)?),
            *format,
        ),
        Command::Construct { file, state, tolerances, normalize, format } => (
            Report::Construct(cmd_construct(file, state.as_deref(), *tolerances, *normalize)?),
            *format,
        ),
    };
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Text => render_text(&report),
    })
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

// Text rendering

const SETTING_NAMES: [&str; 4] = ["A", "A'", "B", "B'"];

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Analyze(r) => {
            let _ = writeln!(out, "source: {}", r.source);
            render_summary(&mut out, &r.data);
        }
        Report::Demo(r) => render_demo(&mut out, r),
        Report::Simulate(r) => render_simulation(&mut out, r),
        Report::Construct(r) => {
            let _ = writeln!(out, "source: {}", r.source);
            render_summary(&mut out, &r.target);
            render_construction(&mut out, &(&r.model).into());
        }
    }
    out
}

fn render_tables(out: &mut String, tables: &[[f64; 4]; 4]) {
    let _ = writeln!(out, "tables (p11, p12, p21, p22):");
    for (ctx, t) in Context::ALL.iter().zip(tables) {
        let _ = writeln!(out, "  {:<5} {:?} {:?} {:?} {:?}", ctx.label(), t[0], t[1], t[2], t[3]);
    }
}

fn render_summary(out: &mut String, s: &DataSummary) {
    let c = &s.classification;
    if let Some(label) = &s.label {
        let _ = writeln!(out, "dataset: {label}");
    }
    render_tables(out, &s.tables);
    let _ = writeln!(out, "expectations:");
    for (ctx, e) in Context::ALL.iter().zip(c.expectations) {
        let (l, r) = ctx.settings();
        let _ = writeln!(out, "  E({},{}) = {e:?}", l.label(), r.label());
    }
    let _ = writeln!(out, "CHSH = {:?}", c.chsh);
    let _ = writeln!(out, "CHSH max over sign placements = {:?}", c.chsh_max);
    if c.marginal_law_holds() {
        let _ = writeln!(out, "marginal law satisfied (max deviation {:?})", c.max_marginal_deviation);
    } else {
        let _ = writeln!(out, "marginal law violated (max deviation {:?})", c.max_marginal_deviation);
    }
    for m in &c.marginal_deviations {
        let _ = writeln!(
            out,
            "  {}{}: {:?} in {} vs {:?} in {}, deviation {:?}",
            m.setting.label(),
            m.outcome,
            m.lhs,
            m.contexts.0,
            m.rhs,
            m.contexts.1,
            m.deviation
        );
    }
    let flags: Vec<String> = Context::ALL
        .iter()
        .zip(c.factorizable)
        .map(|(ctx, f)| format!("{} {}", ctx.label(), if f { "yes" } else { "no" }))
        .collect();
    let _ = writeln!(out, "factorizable: {}", flags.join(", "));
    let _ = writeln!(out, "verdict: {} ({})", c.verdict, c.verdict.modeling());
}

fn render_construction(out: &mut String, c: &ConstructionSummary) {
    let amps: Vec<String> = c.state.entries().iter().map(|z| format!("{z}")).collect();
    let _ = writeln!(out, "model state: ({})", amps.join(", "));
    let _ = writeln!(out, "reproduction residual = {:?}", c.reproduction_residual);
    for e in &c.contexts {
        let _ = writeln!(
            out,
            "  {:<5} {} (projector residual {:?}, operator {} with residual {:?})",
            e.context.label(),
            if e.is_entangled() { "entangled measurement" } else { "product measurement" },
            e.family_residual,
            if e.operator_product { "product" } else { "entangled" },
            e.operator_residual
        );
    }
}

fn render_demo(out: &mut String, r: &DemoReport) {
    if r.name == DemoName::AnimalActs {
        let _ = writeln!(out, "input probabilities (three decimals):");
        for (ctx, t) in Context::ALL.iter().zip(&r.data.tables) {
            let (l, rr) = ctx.settings();
            let (l, rr) = (l.label(), rr.label());
            let _ = writeln!(
                out,
                "  p({l}1,{rr}1)={:.3} p({l}1,{rr}2)={:.3} p({l}2,{rr}1)={:.3} p({l}2,{rr}2)={:.3}",
                t[0], t[1], t[2], t[3]
            );
        }
    }
    if let Some(a) = r.angles_deg {
        render_angles(out, a);
    }
    render_summary(out, &r.data);
    if let Some(m) = &r.model_check {
        let _ = writeln!(out, "phases (alpha, beta) = ({:?}, {:?})", m.phases.0, m.phases.1);
        if (m.trace_rho_b - 4.0).abs() <= 1e-12 {
            let _ = writeln!(out, "tr(ρB) = 4 (computed {:?})", m.trace_rho_b);
        } else {
            let _ = writeln!(out, "tr(ρB) = {:?}", m.trace_rho_b);
        }
        for (ctx, d) in Context::ALL.iter().zip(m.luders_deviation) {
            let _ = writeln!(out, "  Lüders update {:<5} max |ρ' - ρ| = {d:?}", ctx.label());
        }
        for (s, g) in SETTING_NAMES.iter().zip(m.reduced_state_gaps) {
            let _ = writeln!(out, "  reduced-state gap for {s} = {g:?}");
        }
    }
    if let Some(c) = &r.construction {
        render_construction(out, c);
    }
}

fn render_angles(out: &mut String, a: [f64; 4]) {
    let _ = writeln!(out, "angles (degrees): a = {:?}, a' = {:?}, b = {:?}, b' = {:?}", a[0], a[1], a[2], a[3]);
}

fn render_simulation(out: &mut String, r: &SimulateReport) {
    let name = match r.model {
        SimModel::Spheres => "spheres",
        SimModel::VesselsBox => "vessels-box",
    };
    let _ = writeln!(out, "model: {name}, trials per context: {}, seed: {}", r.trials, r.seed);
    if let Some(a) = r.angles_deg {
        render_angles(out, a);
    }
    let _ = writeln!(out, "counts (n11, n12, n21, n22):");
    for (ctx, n) in Context::ALL.iter().zip(&r.counts) {
        let _ = writeln!(out, "  {:<5} {} {} {} {}", ctx.label(), n[0], n[1], n[2], n[3]);
    }
    let _ = writeln!(out, "\n[empirical]");
    render_summary(out, &r.empirical);
    let _ = writeln!(out, "\n[analytic]");
    render_summary(out, &r.analytic);
    let _ = writeln!(out, "\nmax |empirical - analytic| = {:?}", r.max_deviation_from_analytic);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::Verdict;
    use crate::models::default_model_state;

    const ANIMAL: &str = include_str!("../data/animal_acts.json");

    fn round_trip(r: &Report) {
        let back: Report = serde_json::from_str(&to_json(r)).unwrap();
        assert_eq!(&back, r);
    }

    #[test]
    fn parse_bundled_animal_acts_matches_counts() {
        let d = parse_bell_data(ANIMAL, TableOptions::default()).unwrap();
        assert_eq!(d.tables(), datasets::animal_acts().tables());
    }

    #[test]
    fn missing_field_is_named() {
        let e = parse_bell_data(r#"{"tables":{"AB":[[1,0],[0,0]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]]}}"#, TableOptions::default())
            .unwrap_err();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.message.contains("A'B'"), "{}", e.message);
    }

    #[test]
    fn wrong_type_path_is_named() {
        let e = parse_bell_data(
            r#"{"tables":{"AB":[[1,0],[0,"x"]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]],"A'B'":[[1,0],[0,0]]}}"#,
            TableOptions::default(),
        )
        .unwrap_err();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.message.contains("tables.AB"), "{}", e.message);
    }

    #[test]
    fn unknown_field_rejected() {
        let e = parse_bell_data(r#"{"tablez":{}}"#, TableOptions::default()).unwrap_err();
        assert_eq!(e.code, EXIT_USAGE);
        assert!(e.message.contains("tablez"), "{}", e.message);
    }

    #[test]
    fn negative_probability_is_data_error() {
        let e = parse_bell_data(
            r#"{"tables":{"AB":[[1.1,-0.1],[0,0]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]],"A'B'":[[1,0],[0,0]]}}"#,
            TableOptions::default(),
        )
        .unwrap_err();
        assert_eq!(e.code, EXIT_INVALID_DATA);
        assert!(e.message.contains("tables.AB"), "{}", e.message);
    }

    #[test]
    fn custom_outcomes_used() {
        let d = parse_bell_data(
            r#"{"tables":{"AB":[[1,0],[0,0]],"AB'":[[1,0],[0,0]],"A'B":[[1,0],[0,0]],"A'B'":[[1,0],[0,0]]},
                "outcomes":{"A":[2,0],"B":[3,1]}}"#,
            TableOptions::default(),
        )
        .unwrap();
        assert_eq!(d.table(Context::AB).expectation(), 6.0);
        assert_eq!(d.table(Context::APrimeBPrime).expectation(), 1.0);
    }

    #[test]
    fn state_parsing() {
        let v = parse_state("0,0,1,0,1,0,0,0").unwrap();
        assert!((v.get(1).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(parse_state("1,2,3").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse_state("0,0,0,0,0,0,0,0").unwrap_err().code, EXIT_USAGE);
        assert_eq!(parse_state("a,0,0,0,0,0,0,0").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn every_demo_round_trips() {
        for name in DemoName::value_variants() {
            let r = Report::Demo(cmd_demo(*name, Tolerances::default()).unwrap());
            round_trip(&r);
        }
    }

    #[test]
    fn simulate_round_trips() {
        for model in [SimModel::Spheres, SimModel::VesselsBox] {
            let r = Report::Simulate(cmd_simulate(model, [0.0, 90.0, 135.0, 45.0], 500, 3, Tolerances::default()).unwrap());
            round_trip(&r);
        }
    }

    #[test]
    fn demo_verdicts() {
        let v = |n| cmd_demo(n, Tolerances::default()).unwrap().data.classification.verdict;
        assert_eq!(v(DemoName::AnimalActs), Verdict::Type2);
        assert_eq!(v(DemoName::Vessels), Verdict::Type3);
        assert_eq!(v(DemoName::Cats), Verdict::Type4);
        assert_eq!(v(DemoName::NonlocalBox), Verdict::Type4);
        assert_eq!(v(DemoName::Spheres), Verdict::Type1);
    }

    #[test]
    fn text_carries_json_numbers() {
        let r = cmd_demo(DemoName::AnimalActs, Tolerances::default()).unwrap();
        let text = render_text(&Report::Demo(r.clone()));
        let json = to_json(&Report::Demo(r.clone()));
        let chsh = r.data.classification.chsh;
        assert!(text.contains(&format!("CHSH = {chsh:?}")));
        assert!(json.contains(&format!("{chsh:?}")));
        for e in r.data.classification.expectations {
            assert!(text.contains(&format!("{e:?}")) && json.contains(&format!("{e:?}")));
        }
    }

    #[test]
    fn vessels_demo_construction_structure() {
        let r = cmd_demo(DemoName::Vessels, Tolerances::default()).unwrap();
        let c = r.construction.unwrap();
        assert!(c.reproduction_residual < 1e-10);
        assert!(!c.contexts[0].is_entangled());
        assert!(c.contexts[1..].iter().all(ContextEntanglement::is_entangled));
    }

    #[test]
    fn default_state_used_without_flag() {
        let dir = std::env::temp_dir().join(format!("bellzoo-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("animal_acts.json");
        std::fs::write(&path, ANIMAL).unwrap();
        let r = cmd_construct(&path, None, Tolerances::default(), false).unwrap();
        assert_eq!(r.model.pure_state, default_model_state());
        assert_eq!(r.target.label.as_deref(), Some("animal_acts"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
