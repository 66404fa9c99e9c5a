//! `eqhp`: validate inputs, run identity suites and compute equivariant periodic cyclic homology ranks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use eqhp::forms::{build_forms, paramixed_report};
use eqhp::galgebra::{GAlgebra, Pairing};
use eqhp::gmodule::{comodule_to_module, module_to_comodule, GModule};
use eqhp::greenjulg::green_julg_verify;
use eqhp::groupoid::FiniteGroupoid;
use eqhp::homalg::{hp_level, hp_quasifree};
use eqhp::stability::{stability_check, Admissible};
use eqhp::tensoralg::quasifree_certificate;

/// Exit status when a resource guard trips, distinct from identity failures (1) and usage errors (2).
const EXIT_GUARD: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "eqhp", version, about = "Exact equivariant periodic cyclic homology for finite groupoids")]
struct Cli {
    /// JSON file with default settings; command-line flags take precedence.
    #[arg(long, env = "EQHP_CONFIG", global = true)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Paramixed,
    Comodule,
    Stability,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a groupoid file, then any module or algebra files against it.
    Validate {
        /// Groupoid first, then module or algebra files.
        #[arg(required = true)]
        paths: Vec<String>,
    },
    /// Run an identity suite.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "trivial")]
        algebra: String,
    },
    /// Ranks of HP^G(source, target).
    Hp {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "trivial")]
        source: String,
        #[arg(long, default_value = "trivial")]
        target: String,
        /// Compute Hodge levels `1..=m` instead of requiring quasifree certificates.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Both sides of the Green-Julg isomorphism.
    Greenjulg {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "trivial")]
        algebra: String,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// Groupoid file, or `builtin:z2|pair2|z2z3|flip`.
    #[arg(long)]
    groupoid: String,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    guard_dim: Option<usize>,
}

/// Effective settings after merging the config file and flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    max_form_degree: usize,
    level: Option<usize>,
    guard_dim: usize,
    seed: u64,
    format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { max_form_degree: 6, level: None, guard_dim: 20_000, seed: 0, format: Format::Json }
    }
}

impl RunConfig {
    fn load(path: Option<&Path>) -> anyhow::Result<RunConfig> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn merge(mut self, input: &Input, format: Option<Format>) -> anyhow::Result<RunConfig> {
        self.max_form_degree = input.max_degree.unwrap_or(self.max_form_degree);
        self.guard_dim = input.guard_dim.unwrap_or(self.guard_dim);
        self.seed = input.seed.unwrap_or(self.seed);
        self.format = format.unwrap_or(self.format);
        if self.max_form_degree < 2 || self.guard_dim == 0 || self.level == Some(0) {
            bail!("bounds must be positive and the degree cap at least 2");
        }
        Ok(self)
    }
}

/// Outcome of a command: a report and whether every asserted identity held.
struct Outcome {
    report: Value,
    passed: bool,
}

fn load_groupoid(arg: &str) -> anyhow::Result<Arc<FiniteGroupoid>> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return FiniteGroupoid::builtin(name).map(Arc::new).ok_or_else(|| anyhow!("unknown builtin groupoid `{name}`"));
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    Ok(Arc::new(FiniteGroupoid::from_json(&text).with_context(|| format!("in {arg}"))?))
}

/// Builtin algebras by name, otherwise an algebra JSON file.
fn load_algebra(g: &Arc<FiniteGroupoid>, arg: &str) -> anyhow::Result<GAlgebra> {
    let g = g.clone();
    Ok(match arg {
        "trivial" => GAlgebra::trivial(g),
        "kg" => GAlgebra::k_g(g),
        "og" => GAlgebra::o_g(g),
        "dg" => GAlgebra::group_algebra(g),
        "dual" => GAlgebra::dual_numbers(g),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            GAlgebra::from_json(g, &text).with_context(|| format!("in {path}"))?
        }
    })
}

fn cmd_validate(paths: &[String]) -> anyhow::Result<Outcome> {
    let g = load_groupoid(&paths[0])?;
    let orbits = g.orbits().len();
    let mut lines = vec![format!(
        "valid: {} arrow{}, {} orbit{}",
        g.n_arrows(),
        if g.n_arrows() == 1 { "" } else { "s" },
        orbits,
        if orbits == 1 { "" } else { "s" }
    )];
    for path in &paths[1..] {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("in {path}"))?;
        if value.get("mul").is_some() {
            let a = GAlgebra::from_json(g.clone(), &text).with_context(|| format!("in {path}"))?;
            lines.push(format!("valid: algebra with fiber dimensions {:?}", a.module.dims));
        } else {
            let m = GModule::from_json(g.clone(), &text).with_context(|| format!("in {path}"))?;
            lines.push(format!("valid: module with fiber dimensions {:?}", m.dims));
        }
    }
    Ok(Outcome { report: json!({ "verdicts": lines }), passed: true })
}

fn comodule_round_trip(m: &GModule) -> Value {
    let c = module_to_comodule(m);
    let back = comodule_to_module(&c).ok();
    let module_trip = back.as_ref().is_some_and(|b| b == m);
    let comodule_trip = back.is_some_and(|b| module_to_comodule(&b) == c);
    json!({ "dims": m.dims, "coaction_identity": c.coaction_identity(), "module_round_trip": module_trip, "comodule_round_trip": comodule_trip })
}

fn cmd_check(suite: Suite, g: &Arc<FiniteGroupoid>, algebra: &str, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let a = load_algebra(g, algebra)?;
    match suite {
        Suite::Paramixed => {
            let r = paramixed_report(&build_forms(&a, cfg.max_form_degree)?);
            Ok(Outcome { passed: r.all_pass(), report: serde_json::to_value(r)? })
        }
        Suite::Comodule => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut modules = vec![a.module.clone(), GModule::regular(g.clone()), GModule::trivial(g.clone())];
            modules.extend((0..5).map(|_| GModule::random(g.clone(), &mut rng)));
            let results: Vec<Value> = modules.iter().map(comodule_round_trip).collect();
            let passed = results.iter().all(|r| {
                ["coaction_identity", "module_round_trip", "comodule_round_trip"].iter().all(|k| r[k] == Value::Bool(true))
            });
            Ok(Outcome { report: json!({ "modules": results }), passed })
        }
        Suite::Stability => {
            let h = Pairing::regular(g.clone());
            let adm = Admissible::cutoff(&h)?;
            let r = stability_check(&a, &h, &adm)?;
            Ok(Outcome { passed: r.all_pass(), report: serde_json::to_value(r)? })
        }
    }
}

fn cmd_hp(g: &Arc<FiniteGroupoid>, source: &str, target: &str, level: Option<usize>, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let (a, b) = (load_algebra(g, source)?, load_algebra(g, target)?);
    if let Some(m) = level.or(cfg.level) {
        let reports = hp_level(&a, &b, m, cfg.guard_dim)?;
        return Ok(Outcome { report: serde_json::to_value(reports.last().expect("at least one level"))?, passed: true });
    }
    for (name, alg) in [("source", &a), ("target", &b)] {
        if quasifree_certificate(alg)?.is_none() {
            return Err(Usage(format!("the {name} has no quasifree certificate; pass --level")).into());
        }
    }
    Ok(Outcome { report: serde_json::to_value(hp_quasifree(&a, &b)?)?, passed: true })
}

fn cmd_greenjulg(g: &Arc<FiniteGroupoid>, algebra: &str) -> anyhow::Result<Outcome> {
    let r = green_julg_verify(&load_algebra(g, algebra)?)?;
    let mut report = serde_json::to_value(&r)?;
    report["equal"] = Value::Bool(r.holds());
    Ok(Outcome { passed: r.holds(), report })
}

/// A usage error detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn render_text(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(x, &p, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                render_text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        Value::Array(items) if prefix == "verdicts" => out.extend(items.iter().filter_map(|x| x.as_str().map(String::from))),
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        _ => out.push(format!("{prefix}: {v}")),
    }
}

fn run(cli: Cli) -> anyhow::Result<(Outcome, Format)> {
    let base = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Validate { paths } => Ok((cmd_validate(paths)?, cli.format.unwrap_or(Format::Text))),
        Command::Check { suite, input, algebra } => {
            let cfg = base.merge(input, cli.format)?;
            Ok((cmd_check(*suite, &load_groupoid(&input.groupoid)?, algebra, &cfg)?, cfg.format))
        }
        Command::Hp { input, source, target, level } => {
            let cfg = base.merge(input, cli.format)?;
            if *level == Some(0) {
                return Err(Usage("--level must be positive".into()).into());
            }
            Ok((cmd_hp(&load_groupoid(&input.groupoid)?, source, target, *level, &cfg)?, cfg.format))
        }
        Command::Greenjulg { input, algebra } => {
            let cfg = base.merge(input, cli.format)?;
            Ok((cmd_greenjulg(&load_groupoid(&input.groupoid)?, algebra)?, cfg.format))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((outcome, format)) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&outcome.report).expect("reports serialize")),
                Format::Text => {
                    let mut lines = Vec::new();
                    render_text(&outcome.report, "", &mut lines);
                    println!("{}", lines.join("\n"));
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else if matches!(e.downcast_ref::<eqhp::Error>(), Some(eqhp::Error::Guard { .. })) {
                ExitCode::from(EXIT_GUARD)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
