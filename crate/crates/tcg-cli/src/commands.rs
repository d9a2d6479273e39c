use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::builder::PossibleValuesParser;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use tcg_core::model::presets::{preset, preset_document, PRESETS};
use tcg_core::model::{
    derive, export_model, import_effective, load_model, prune_terms, DeriveOptions, EffectiveModel, ExportFormat, ModelSpec,
};
use tcg_core::simulator::{
    coarse_grain_series, compare_series, expectation_series, integrate, parse_initial_state, parse_series_csv, series_csv,
    write_atomic, Generator, GuardPolicy, IntegratorSettings, ObservableSpec, Series, TimeGrid,
};
use tcg_core::symbolic::{parse_quantity, parse_real_quantity, Assignment, TAU};
use tcg_core::TcgError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(TcgError),
}

impl From<TcgError> for CliError {
    fn from(e: TcgError) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "tcg", version, about = "Time-coarse-grained effective models: derive, simulate, compare")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Derive the order-K effective model of an input model.
    Derive(DeriveArgs),
    /// Integrate a model (exact, or TCG with --order) and write observables as CSV.
    Simulate(SimulateArgs),
    /// Compare matching columns of two CSV series.
    Compare(CompareArgs),
    /// Write a bundled model file.
    Preset(PresetArgs),
}

/// Numeric overrides applied after loading a model.
#[derive(Args, Debug)]
struct Overrides {
    /// Filter width, e.g. `0.2ns`; 0 turns the filter into the identity.
    #[arg(long)]
    tau: Option<String>,
    /// JSON object of parameter values, e.g. {"g": "2pi*0.4GHz"}.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Replace a symbol by an expression before deriving, e.g. `wa=wc`. Repeatable.
    #[arg(long, value_name = "NAME=EXPR")]
    subst: Vec<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "preset"])))]
struct DeriveArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    #[command(flatten)]
    overrides: Overrides,
    /// Drop terms whose magnitude falls below this value (rad/s).
    #[arg(long)]
    threshold: Option<String>,
    /// Take the regulator limit of ramped models and drop suppressed exponentials.
    #[arg(long)]
    ir_limit: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Abort,
    Warn,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "preset", "effective"])))]
struct SimulateArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_parser = PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    /// Effective model written by `derive --format json`.
    #[arg(long)]
    effective: Option<PathBuf>,
    /// Derive and integrate the order-K effective model instead of the exact one.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), conflicts_with = "effective")]
    order: Option<u32>,
    #[command(flatten)]
    overrides: Overrides,
    /// Pruning threshold for TCG runs (rad/s); fast suppressed terms otherwise dictate the step.
    #[arg(long)]
    threshold: Option<String>,
    /// Product state, one factor per mode: `coherent(2)*e`, `fock(0)*g`.
    #[arg(long)]
    initial: String,
    #[arg(long, allow_hyphen_values = true)]
    t0: String,
    #[arg(long, allow_hyphen_values = true)]
    t1: String,
    #[arg(long)]
    dt: String,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Operator whose expectation value is written, e.g. `t(e,e)` or `a'*a`. Repeatable.
    #[arg(long, required = true)]
    observable: Vec<String>,
    /// Gaussian-average the written series with the model's tau.
    #[arg(long)]
    coarse_grain: bool,
    /// Largest tolerated population of a bosonic top level, or `off`.
    #[arg(long, default_value = "1e-3")]
    population_guard: String,
    #[arg(long, value_enum, default_value_t = Policy::Abort)]
    policy: Policy,
    /// JSON run summary; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct PresetArgs {
    #[arg(value_parser = PossibleValuesParser::new(PRESETS))]
    name: String,
    #[arg(short, long)]
    output: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Derive(a) => run_derive(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Compare(a) => run_compare(a),
        Command::Preset(a) => run_preset(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| TcgError::Io(format!("{}: {e}", path.display())).into())
}

fn quantity(field: &str, text: &str) -> Result<f64> {
    parse_real_quantity(text).map_err(|e| TcgError::validation(field, e.to_string()).into())
}

fn load_source(model: &Option<PathBuf>, name: &Option<String>) -> Result<ModelSpec> {
    match (model, name) {
        (Some(p), None) => Ok(load_model(p)?),
        (None, Some(n)) => Ok(preset(n)?),
        _ => Err(CliError::Usage("give exactly one model source".into())),
    }
}

fn apply_overrides(m: &mut ModelSpec, o: &Overrides) -> Result<()> {
    if let Some(p) = &o.params {
        let doc: Value = serde_json::from_str(&read(p)?).map_err(|e| TcgError::validation("params", e.to_string()))?;
        let Value::Object(entries) = doc else {
            return Err(TcgError::validation("params", "expected a JSON object of name: value").into());
        };
        for (name, v) in entries {
            let value = match &v {
                Value::Number(n) => n.as_f64().map(Into::into),
                Value::String(s) => parse_quantity(s).ok(),
                _ => None,
            }
            .ok_or_else(|| TcgError::validation(format!("params.{name}"), format!("`{v}` is not a number")))?;
            m.set_value(&name, value)?;
        }
    }
    for s in &o.subst {
        let (name, expr) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--subst expects NAME=EXPR, got `{s}`")))?;
        m.substitute(name.trim(), expr.trim())?;
    }
    if let Some(t) = &o.tau {
        m.set_value(TAU, quantity("tau", t)?.into())?;
    }
    Ok(())
}

fn prune(eff: EffectiveModel, threshold: &Option<String>, assign: &Assignment) -> Result<EffectiveModel> {
    Ok(match threshold {
        Some(t) => prune_terms(&eff, quantity("threshold", t)?, assign),
        None => eff,
    })
}

fn run_derive(a: DeriveArgs) -> Result<()> {
    let mut m = load_source(&a.model, &a.preset)?;
    apply_overrides(&mut m, &a.overrides)?;
    let mut eff = derive(&m, a.order as usize, &DeriveOptions::default())?;
    if a.ir_limit {
        eff = eff.ir_limit();
    }
    let eff = prune(eff, &a.threshold, &m.assignment())?;
    let format = match a.format {
        Format::Json => ExportFormat::Json,
        Format::Text => ExportFormat::Text,
    };
    write_atomic(&a.output, export_model(&eff, format).as_bytes())?;
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let (gen, assign) = if let Some(p) = &a.effective {
        let o = &a.overrides;
        if o.tau.is_some() || o.params.is_some() || !o.subst.is_empty() {
            return Err(CliError::Usage("--tau, --params and --subst apply to input models, not to --effective".into()));
        }
        let eff = import_effective(&read(p)?)?;
        let assign = eff.source.assignment();
        let eff = prune(eff, &a.threshold, &assign)?;
        (Generator::tcg(&eff, &assign)?, assign)
    } else {
        let mut m = load_source(&a.model, &a.preset)?;
        apply_overrides(&mut m, &a.overrides)?;
        let assign = m.assignment();
        match a.order {
            Some(k) => {
                let eff = prune(derive(&m, k as usize, &DeriveOptions::default())?, &a.threshold, &assign)?;
                (Generator::tcg(&eff, &assign)?, assign)
            }
            None if a.threshold.is_some() => {
                return Err(CliError::Usage("--threshold needs --order (exact runs keep every term)".into()));
            }
            None => (Generator::exact(&m, &assign)?, assign),
        }
    };

    let rho0 = parse_initial_state(&a.initial, gen.modes())?;
    let (t0, t1, dt) = (quantity("t0", &a.t0)?, quantity("t1", &a.t1)?, quantity("dt", &a.dt)?);
    let grid = TimeGrid::new(t0, t1, dt, a.record_every)?;
    let population_guard = match a.population_guard.trim() {
        "off" | "none" => None,
        s => Some(quantity("population_guard", s)?),
    };
    let settings = IntegratorSettings {
        population_guard,
        policy: match a.policy {
            Policy::Abort => GuardPolicy::Abort,
            Policy::Warn => GuardPolicy::Warn,
        },
        ..IntegratorSettings::default()
    };
    let traj = integrate(&gen, &rho0, &grid, &settings)?;
    for w in &traj.meta.warnings {
        eprintln!("warning: {w}");
    }

    let tau = if a.coarse_grain {
        let t = assign
            .real(TAU)
            .filter(|t| *t > 0.0)
            .ok_or_else(|| TcgError::validation("tau", "coarse-graining needs a positive numeric tau"))?;
        Some(t)
    } else {
        None
    };
    let mut columns: Vec<(String, Series)> = Vec::new();
    for text in &a.observable {
        let obs = ObservableSpec::parse(text, gen.modes())?;
        let mut s = expectation_series(&traj, &obs, &assign)?;
        if let Some(t) = tau {
            s = coarse_grain_series(&s, t, None, Default::default())?;
        }
        let scale = s.values.iter().map(|z| z.re.abs()).fold(1.0, f64::max);
        columns.push((obs.label.clone(), s.re()));
        if s.values.iter().any(|z| z.im.abs() > 1e-12 * scale) {
            columns.push((format!("Im[{}]", obs.label), s.map(|z| z.im)));
        }
    }
    write_atomic(&a.output, series_csv(&columns)?.as_bytes())?;

    let mut stats = Map::new();
    for (label, s) in &columns {
        let (lo, hi) = s.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        stats.insert(
            label.clone(),
            json!({"min": lo, "max": hi, "final": s.values.last().copied().unwrap_or(f64::NAN)}),
        );
    }
    let summary = json!({
        "command": "simulate",
        "source": {
            "model": a.model.as_ref().map(|p| p.display().to_string()),
            "preset": a.preset,
            "effective": a.effective.as_ref().map(|p| p.display().to_string()),
            "order": a.order,
        },
        "generator": traj.meta.generator,
        "dimension": gen.dim(),
        "max_frequency": gen.max_frequency(),
        "initial": a.initial,
        "grid": {"t0": t0, "t1": t1, "dt": dt, "record_every": a.record_every, "snapshots": traj.len()},
        "settings": serde_json::to_value(&settings).expect("plain data"),
        "coarse_grain_tau": tau,
        "trajectory": serde_json::to_value(&traj.meta).expect("plain data"),
        "observables": stats,
    });
    let path = a.summary.clone().unwrap_or_else(|| a.output.with_extension("json"));
    write_atomic(&path, pretty(&summary).as_bytes())?;
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn run_compare(a: CompareArgs) -> Result<()> {
    let reference = parse_series_csv(&read(&a.reference)?)?;
    let test = parse_series_csv(&read(&a.test)?)?;
    let mut columns = Map::new();
    let mut unmatched = Vec::new();
    for (label, r) in &reference {
        match test.iter().find(|(l, _)| l == label) {
            Some((_, t)) => {
                let m = compare_series(r, t)?;
                columns.insert(label.clone(), serde_json::to_value(m).expect("plain data"));
            }
            None => unmatched.push(label.clone()),
        }
    }
    unmatched.extend(test.iter().filter(|(l, _)| !reference.iter().any(|(r, _)| r == l)).map(|(l, _)| l.clone()));
    if columns.is_empty() {
        return Err(TcgError::validation("columns", "the two files share no column label").into());
    }
    let doc = json!({
        "reference": a.reference.display().to_string(),
        "test": a.test.display().to_string(),
        "columns": columns,
        "unmatched": unmatched,
    });
    write_atomic(&a.output, pretty(&doc).as_bytes())?;
    Ok(())
}

fn run_preset(a: PresetArgs) -> Result<()> {
    let doc = serde_json::to_value(preset_document(&a.name)?).expect("plain data");
    write_atomic(&a.output, pretty(&doc).as_bytes())?;
    Ok(())
}
