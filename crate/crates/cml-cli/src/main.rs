//! Command-line surface: model checking, bisimilarity, satisfiability with
//! model synthesis, the distance layer, and axiom soundness campaigns.
//!
//! Exit codes are stable across commands: 0 for a positive verdict or
//! success, 1 for a negative verdict, 2 for any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use cml::axioms::{soundness_campaign, SchemaId};
use cml::bisim::{bisimilar, distinguishing_formula};
use cml::grid::enumerate_family;
use cml::kernel::{load_model, sat, Process};
use cml::metrics::{
    check_weak_robustness_with, dsat, fdist, pdist, sd_hat_over, synthesize_for, DistanceReport,
    DistanceWitness,
};
use cml::sat::{satisfiable_with, SatOutcome};
use cml::{parse, Caps, ClosureSpec, Exec, Formula, Label, Rat};

#[derive(Parser)]
#[command(name = "cml", version, about = "Continuous Markovian Logic toolkit")]
struct Cli {
    /// Output format for results.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Clip every distance clause into [0,1].
    #[arg(long, global = true)]
    clamp: bool,
    /// JSON configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula at a state of a model.
    Mc {
        model: PathBuf,
        state: String,
        /// Formula text, or @file to read it from a file.
        formula: String,
        /// Also report the quantitative satisfiability value.
        #[arg(long = "d")]
        with_d: bool,
    },
    /// Decide bisimilarity of two processes; prints a distinguishing formula
    /// when they differ.
    Bisim {
        model1: PathBuf,
        state1: String,
        model2: PathBuf,
        state2: String,
    },
    /// Decide satisfiability; optionally write the synthesized finite model.
    Sat {
        formula: String,
        /// Write the synthesized model (with its parameter) to this file.
        #[arg(long)]
        synth: Option<PathBuf>,
    },
    /// Distance computations.
    Dist {
        #[command(subcommand)]
        mode: DistMode,
    },
    /// Randomized soundness campaigns over the axiom schemas.
    Axioms {
        /// Comma-separated schema names (default: all sound schemas).
        #[arg(long, value_delimiter = ',')]
        schemas: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Write the full campaign report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DistMode {
    /// Lower bound of the process distance over an enumerated formula family.
    Pdist {
        model1: PathBuf,
        state1: String,
        model2: PathBuf,
        state2: String,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Lower bound of the formula distance over explicit witness processes.
    Fdist {
        phi1: String,
        phi2: String,
        /// Witness process as model.json:state (repeatable).
        #[arg(long = "witness", required = true)]
        witnesses: Vec<String>,
    },
    /// Formula distance over the synthesized model of an anchor formula.
    Sdhat {
        psi: String,
        phi1: String,
        phi2: String,
        /// Also verify the weak-robustness inequality at this process
        /// (model.json:state); the exit code reflects the verdict.
        #[arg(long = "check-weak")]
        check_weak: Option<String>,
    },
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Modal depth bound of the enumerated family.
    #[arg(long)]
    depth: Option<u32>,
    /// Granularity of the index grid.
    #[arg(long)]
    granularity: Option<u64>,
    /// Largest index on the grid.
    #[arg(long = "max-index")]
    max_index: Option<String>,
    /// Truncate the family at this many formulas.
    #[arg(long)]
    cap: Option<usize>,
    /// Include upper-bound modalities in the family.
    #[arg(long = "with-m")]
    with_m: bool,
}

/// On-disk configuration; every field optional with documented defaults.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct Config {
    cap_layer_atoms: Option<usize>,
    cap_atoms: Option<usize>,
    clamp: Option<bool>,
    seed: Option<u64>,
    format: Option<String>,
    family: Option<FamilyConfig>,
}

#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct FamilyConfig {
    depth: Option<u32>,
    granularity: Option<u64>,
    max_index: Option<String>,
    cap: Option<usize>,
    with_m: Option<bool>,
}

struct Settings {
    format: Format,
    seed: u64,
    clamp: bool,
    caps: Caps,
    family: FamilyConfig,
}

fn load_settings(cli: &Cli) -> Result<Settings> {
    let config: Config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).context("parsing config")?
        }
        None => Config::default(),
    };
    let format = match cli.format {
        Some(f) => f,
        None => match config.format.as_deref() {
            Some("json") => Format::Json,
            Some("text") | None => Format::Text,
            Some(other) => bail!("unknown format `{}` in config", other),
        },
    };
    let mut caps = Caps::default();
    if let Some(v) = config.cap_layer_atoms {
        caps.max_layer_atoms = v;
    }
    if let Some(v) = config.cap_atoms {
        caps.max_atoms = v;
    }
    if caps.max_layer_atoms == 0 || caps.max_atoms == 0 {
        bail!("caps must be positive");
    }
    Ok(Settings {
        format,
        seed: cli.seed.or(config.seed).unwrap_or(0),
        clamp: cli.clamp || config.clamp.unwrap_or(false),
        caps,
        family: config.family.unwrap_or_default(),
    })
}

fn read_formula(arg: &str) -> Result<Formula> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading formula file {}", path))?,
        None => arg.to_string(),
    };
    parse(text.trim()).map_err(|e| anyhow!("{}", e))
}

fn load_process(model: &Path, state: &str) -> Result<Process> {
    let kernel = load_model(model)
        .with_context(|| format!("loading model {}", model.display()))?;
    Process::new(Arc::new(kernel), state).map_err(|e| anyhow!("{}", e))
}

/// `model.json:state` (the last colon separates the state id).
fn parse_process_ref(arg: &str) -> Result<Process> {
    let (path, state) = arg
        .rsplit_once(':')
        .ok_or_else(|| anyhow!("expected model.json:state, got `{}`", arg))?;
    load_process(Path::new(path), state)
}

fn family_spec(args: &FamilyArgs, defaults: &FamilyConfig, labels: Vec<Label>) -> Result<(ClosureSpec, u32, usize, bool)> {
    let depth = args.depth.or(defaults.depth).unwrap_or(2);
    let granularity = args.granularity.or(defaults.granularity).unwrap_or(2);
    if granularity == 0 {
        bail!("granularity must be positive");
    }
    let max_index = match args.max_index.clone().or(defaults.max_index.clone()) {
        Some(text) => Rat::parse(&text).map_err(|e| anyhow!("{}", e))?,
        None => Rat::from_int(2),
    };
    let cap = args.cap.or(defaults.cap).unwrap_or(500);
    if cap == 0 {
        bail!("family cap must be positive");
    }
    let with_m = args.with_m || defaults.with_m.unwrap_or(false);
    Ok((
        ClosureSpec::new(granularity, max_index, depth, labels),
        depth,
        cap,
        with_m,
    ))
}

fn witness_json(witness: &DistanceWitness) -> serde_json::Value {
    match witness {
        DistanceWitness::Formula(f) => serde_json::json!({"formula": f.print()}),
        DistanceWitness::Process { index, state_id } => {
            serde_json::json!({"processIndex": index, "state": state_id})
        }
        DistanceWitness::None => serde_json::Value::Null,
    }
}

fn report_json(mode: &str, report: &DistanceReport) -> serde_json::Value {
    serde_json::json!({
        "schemaVersion": 1,
        "mode": mode,
        "value": report.value.to_string(),
        "witness": witness_json(&report.witness),
        "familyDescriptor": report.family_descriptor,
        "exact": report.exact,
    })
}

fn print_report(settings: &Settings, mode: &str, extra: &[(&str, String)], report: &DistanceReport) {
    match settings.format {
        Format::Json => {
            let mut value = report_json(mode, report);
            for (k, v) in extra {
                value[k] = serde_json::Value::String(v.clone());
            }
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
        Format::Text => {
            println!("{} = {}", mode, report.value);
            match &report.witness {
                DistanceWitness::Formula(f) => println!("witness formula: {}", f),
                DistanceWitness::Process { state_id, .. } => {
                    println!("witness process state: {}", state_id)
                }
                DistanceWitness::None => {}
            }
            println!(
                "{} ({})",
                report.family_descriptor,
                if report.exact {
                    "exact over the enumerated domain"
                } else {
                    "lower bound"
                }
            );
            for (k, v) in extra {
                println!("{} = {}", k, v);
            }
        }
    }
}

fn cmd_mc(settings: &Settings, model: &Path, state: &str, formula: &str, with_d: bool) -> Result<u8> {
    let process = load_process(model, state)?;
    let phi = read_formula(formula)?;
    let satisfied = sat(&process, &phi).map_err(|e| anyhow!("{}", e))?;
    let d = if with_d {
        Some(dsat(&process, &phi, settings.clamp).map_err(|e| anyhow!("{}", e))?)
    } else {
        None
    };
    match settings.format {
        Format::Json => {
            let mut out = serde_json::json!({
                "schemaVersion": 1,
                "command": "mc",
                "satisfied": satisfied,
            });
            if let Some(d) = &d {
                out["d"] = serde_json::Value::String(d.to_string());
            }
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Format::Text => {
            println!("{}", satisfied);
            if let Some(d) = &d {
                println!("d = {}", d);
            }
        }
    }
    Ok(if satisfied { 0 } else { 1 })
}

fn cmd_bisim(
    settings: &Settings,
    model1: &Path,
    state1: &str,
    model2: &Path,
    state2: &str,
) -> Result<u8> {
    let p1 = load_process(model1, state1)?;
    let p2 = load_process(model2, state2)?;
    let verdict = bisimilar(&p1, &p2);
    let formula = if verdict {
        None
    } else {
        distinguishing_formula(&p1, &p2)
    };
    match settings.format {
        Format::Json => {
            let out = serde_json::json!({
                "schemaVersion": 1,
                "command": "bisim",
                "bisimilar": verdict,
                "distinguishingFormula": formula.as_ref().map(|f| f.print()),
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        }
        Format::Text => match &formula {
            None => println!("bisimilar"),
            Some(f) => println!("distinguished-by {}", f),
        },
    }
    Ok(if verdict { 0 } else { 1 })
}

fn cmd_sat(settings: &Settings, formula: &str, synth: Option<&Path>) -> Result<u8> {
    let phi = read_formula(formula)?;
    let outcome = satisfiable_with(&phi, &settings.caps, Exec::Parallel)
        .map_err(|e| anyhow!("{}", e))?;
    match outcome {
        SatOutcome::Unsat => {
            match settings.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "schemaVersion": 1,
                        "command": "sat",
                        "satisfiable": false,
                    })
                ),
                Format::Text => println!("unsat"),
            }
            Ok(1)
        }
        SatOutcome::Sat(model, witness) => {
            let witness_state = model.kernel().states()[witness].clone();
            if let Some(path) = synth {
                let file = serde_json::json!({
                    "schemaVersion": 1,
                    "formula": phi.print(),
                    "parameter": model.parameter().to_string(),
                    "witnessState": witness_state,
                    "model": model.kernel().to_json(),
                });
                std::fs::write(path, serde_json::to_string_pretty(&file)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            match settings.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "schemaVersion": 1,
                        "command": "sat",
                        "satisfiable": true,
                        "states": model.state_count(),
                        "parameter": model.parameter().to_string(),
                        "witnessState": witness_state,
                    }))
                    .unwrap()
                ),
                Format::Text => {
                    println!("sat");
                    println!(
                        "model: {} states, parameter {}, witness {}",
                        model.state_count(),
                        model.parameter(),
                        witness_state
                    );
                }
            }
            Ok(0)
        }
    }
}

fn cmd_dist(settings: &Settings, mode: &DistMode) -> Result<u8> {
    match mode {
        DistMode::Pdist {
            model1,
            state1,
            model2,
            state2,
            family,
        } => {
            let p1 = load_process(model1, state1)?;
            let p2 = load_process(model2, state2)?;
            let labels: Vec<Label> = p1
                .kernel
                .labels()
                .union(p2.kernel.labels())
                .cloned()
                .collect();
            let (spec, depth, cap, with_m) = family_spec(family, &settings.family, labels)?;
            let (formulas, truncated) = enumerate_family(depth, &spec, with_m, cap);
            let mut report = pdist(&p1, &p2, &formulas, settings.clamp, Exec::Parallel)
                .map_err(|e| anyhow!("{}", e))?;
            report.family_descriptor = format!(
                "family(depth={}, granularity={}, max={}, withM={}): {} formulas{}",
                depth,
                spec.granularity,
                spec.max_index,
                with_m,
                formulas.len(),
                if truncated { ", truncated" } else { "" }
            );
            print_report(settings, "pdist", &[], &report);
            Ok(0)
        }
        DistMode::Fdist {
            phi1,
            phi2,
            witnesses,
        } => {
            let phi1 = read_formula(phi1)?;
            let phi2 = read_formula(phi2)?;
            let procs: Vec<Process> = witnesses
                .iter()
                .map(|w| parse_process_ref(w))
                .collect::<Result<_>>()?;
            let report = fdist(&phi1, &phi2, &procs, settings.clamp, Exec::Parallel)
                .map_err(|e| anyhow!("{}", e))?;
            print_report(settings, "fdist", &[], &report);
            Ok(0)
        }
        DistMode::Sdhat {
            psi,
            phi1,
            phi2,
            check_weak,
        } => {
            let psi = read_formula(psi)?;
            let phi1 = read_formula(phi1)?;
            let phi2 = read_formula(phi2)?;
            let model = synthesize_for(&psi, &phi1, &phi2, &settings.caps, Exec::Parallel)
                .map_err(|e| anyhow!("{}", e))?;
            let sd = sd_hat_over(&model, &phi1, &phi2, settings.clamp, Exec::Parallel)
                .map_err(|e| anyhow!("{}", e))?;
            let mut extra = vec![("parameter", sd.parameter.to_string())];
            let mut code = 0u8;
            if let Some(process_ref) = check_weak {
                let p = parse_process_ref(process_ref)?;
                let holds = check_weak_robustness_with(&p, &sd, &phi1, &phi2, settings.clamp)
                    .map_err(|e| anyhow!("{}", e))?;
                extra.push(("weakRobustnessHolds", holds.to_string()));
                if !holds {
                    code = 1;
                }
            }
            print_report(settings, "sdhat", &extra, &sd.report);
            Ok(code)
        }
    }
}

fn cmd_axioms(
    settings: &Settings,
    schemas: &[String],
    samples: usize,
    out: Option<&Path>,
) -> Result<u8> {
    if samples == 0 {
        bail!("--samples must be positive");
    }
    let selected: Vec<SchemaId> = if schemas.is_empty() {
        SchemaId::SOUND.to_vec()
    } else {
        schemas
            .iter()
            .map(|s| SchemaId::from_str(s).map_err(|e| anyhow!(e)))
            .collect::<Result<_>>()?
    };
    let report = soundness_campaign(&selected, samples, settings.seed, Exec::Parallel);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match settings.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => {
            for s in &report.schemas {
                println!(
                    "{}: {} samples, {} scored, {} skipped, {} violations ({})",
                    s.schema,
                    s.samples,
                    s.scored,
                    s.skipped,
                    s.violations,
                    if s.expected_sound {
                        "expected sound"
                    } else {
                        "expected unsound"
                    }
                );
            }
        }
    }
    Ok(if report.as_expected() { 0 } else { 1 })
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    let settings = load_settings(&cli)?;
    match &cli.command {
        Command::Mc {
            model,
            state,
            formula,
            with_d,
        } => cmd_mc(&settings, model, state, formula, *with_d),
        Command::Bisim {
            model1,
            state1,
            model2,
            state2,
        } => cmd_bisim(&settings, model1, state1, model2, state2),
        Command::Sat { formula, synth } => cmd_sat(&settings, formula, synth.as_deref()),
        Command::Dist { mode } => cmd_dist(&settings, mode),
        Command::Axioms {
            schemas,
            samples,
            out,
        } => cmd_axioms(&settings, schemas, *samples, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {:#}", err);
            ExitCode::from(2)
        }
    }
}
