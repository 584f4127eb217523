//! Experiment driver for the maxlorentz library.
//!
//! Reads a TOML experiment config, dispatches to the requested library
//! operation, and emits deterministic JSON-lines records plus a CSV summary
//! (columns `level,metric,value`). Exit codes: 0 success, 2 configuration
//! error, 3 failed assertion under `--assert`.

use maxlorentz_cli::{config, report};

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use maxlorentz::classes::{self, SearchOptions};
use maxlorentz::lorentz::{lambda_norm, lambda_weak_norm, level_decomposition, LorentzParams};
use maxlorentz::maximal::maximal_fast;
use maxlorentz::measure::{GridDomain, GridFunction, GridSet};
use maxlorentz::rearrange::rearrangement;
use maxlorentz::verify::{
    corollary_inclusion_check, equivalence_report, lemma21_check, lemma22_check,
    opnorm_estimate, prop24_integral, riesz_sandwich, NormKind,
};
use maxlorentz::weight::MaybeDivergent;

use config::{parse_config, print_config, ConfigError, ExperimentConfig};
use report::{config_digest, Reporter};

#[derive(Parser)]
#[command(name = "maxlorentz", version, about = "Maximal-operator and weighted-Lorentz experiments")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Write JSON-lines report here (CSV summary lands alongside).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the refinement levels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Check the `[assert]` block and exit 3 on failure.
    #[arg(long, global = true)]
    assert: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal function of the configured function; profile as CSV.
    Maximal,
    /// Decreasing rearrangement of the configured function; steps as CSV.
    Rearrange,
    /// Strong and weak Lorentz norms with the level decomposition.
    Norms,
    /// Weight-class diagnostics.
    Weights {
        #[command(subcommand)]
        what: WeightsCmd,
    },
    /// Adversarial searches.
    Search {
        #[command(subcommand)]
        what: SearchCmd,
    },
    /// Inequality-chain checks.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Operator-norm estimate by witness sampling.
    Opnorm,
    /// Weak-vs-strong growth experiment across refinement levels.
    Equivalence,
}

#[derive(Subcommand)]
enum WeightsCmd {
    /// All class constants for the configured pair (u, w).
    Check,
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Randomized search for extremal cube/subset families.
    Raposo,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Ratio range of (Mf)* against the Hardy average of f*.
    Riesz,
    /// Norm growth of the restricted maximal function of an indicator.
    Lemma21,
    /// Pointwise lower bound for the twice-applied maximal operator.
    Lemma22,
    /// Level-set inclusion under the measured constant.
    Inclusion,
    /// Closed-form level integral of the maximal function of an indicator.
    Prop24,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ConfigError::Validation {
            key: "config",
            message: "--config PATH is required".into(),
        })?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse(format!("{path}: {e}")))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.params.seed = Some(seed);
    }
    if let Some(levels) = &cli.levels {
        cfg.domain.levels = Some(levels.clone());
    }
    Ok(cfg)
}

struct Ctx {
    cfg: ExperimentConfig,
    reporter: Reporter,
}

impl Ctx {
    fn grid(&self) -> Result<GridDomain<f64>, ConfigError> {
        self.cfg.domain.grid(self.cfg.domain.cells)
    }

    fn lorentz_params(&self, domain: GridDomain<f64>) -> anyhow::Result<LorentzParams<f64>> {
        let u = self.cfg.u.spec().materialize(domain)?;
        Ok(LorentzParams::new(self.cfg.params.p, u, self.cfg.w.weight())?)
    }

    fn function(&self, domain: &GridDomain<f64>) -> Result<GridFunction<f64>, ConfigError> {
        self.cfg
            .function
            .as_ref()
            .ok_or(ConfigError::Validation {
                key: "function",
                message: "this subcommand needs a [function] block".into(),
            })?
            .materialize(domain)
    }

    fn indicator_set(&self, domain: &GridDomain<f64>) -> Result<GridSet<f64>, ConfigError> {
        self.cfg
            .function
            .as_ref()
            .ok_or(ConfigError::Validation {
                key: "function",
                message: "this subcommand needs an indicator [function] block".into(),
            })?
            .indicator_set(domain)
    }

    fn seed(&self) -> u64 {
        self.cfg.params.seed.unwrap_or(0)
    }

    fn trials(&self) -> usize {
        self.cfg.params.trials.unwrap_or(64)
    }

    fn lambdas(&self) -> Vec<f64> {
        self.cfg.params.lambdas.clone().unwrap_or_else(|| vec![0.5])
    }

    fn tgrid(&self, domain: &GridDomain<f64>) -> Vec<f64> {
        self.cfg.params.tgrid.clone().unwrap_or_else(|| {
            // geometric default within (0, |box|)
            let cap = domain.box_measure() * 0.75;
            let lo = domain.cell_volume() * 4.0;
            let steps = 32;
            (0..steps)
                .map(|k| lo * (cap / lo).powf(k as f64 / (steps - 1) as f64))
                .collect()
        })
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = load_config(cli)?;
    let canonical = print_config(&cfg);
    let mut ctx = Ctx { reporter: Reporter::new(config_digest(&canonical)), cfg };

    let started = Instant::now();
    dispatch(cli, &mut ctx)?;
    let elapsed = started.elapsed();

    let (json_path, csv_path) = match (&cli.out, &ctx.cfg.output) {
        (Some(path), _) => (Some(path.clone()), None),
        (None, Some(out)) => (out.json.clone(), out.csv.clone()),
        (None, None) => (None, None),
    };
    ctx.reporter.flush(json_path.as_deref(), csv_path.as_deref())?;
    eprintln!(
        "# config {} done in {:.3}s",
        ctx.reporter.digest(),
        elapsed.as_secs_f64()
    );

    if cli.assert {
        return Ok(check_assertions(&ctx));
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<(), Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Maximal => {
            let domain = ctx.grid()?;
            let f = ctx.function(&domain)?;
            let m = maximal_fast(&f);
            let n = domain.cells_per_axis();
            let mut csv = String::from(match domain.dimension() {
                1 => "x,value\n",
                _ => "x,y,value\n",
            });
            for idx in 0..domain.cell_count() {
                let c = domain.cell_center(idx);
                match domain.dimension() {
                    1 => csv.push_str(&format!("{},{}\n", c[0], m.value(idx))),
                    _ => csv.push_str(&format!("{},{},{}\n", c[0], c[1], m.value(idx))),
                }
            }
            print!("{csv}");
            ctx.reporter.record(
                "maximal",
                n,
                json!({"function": ctx.cfg.function, "domain": ctx.cfg.domain}),
                json!({"max": m.max_value(), "mass": m.total_mass()}),
            );
        }
        Command::Rearrange => {
            let domain = ctx.grid()?;
            let f = ctx.function(&domain)?;
            let star = rearrangement(&f);
            let mut csv = String::from("breakpoint,value\n");
            for (b, v) in star.breakpoints().iter().zip(star.values()) {
                csv.push_str(&format!("{b},{v}\n"));
            }
            print!("{csv}");
            ctx.reporter.record(
                "rearrange",
                domain.cells_per_axis(),
                json!({"function": ctx.cfg.function}),
                json!({"steps": star.values().len(), "support": star.support(),
                       "mass": star.total_integral()}),
            );
        }
        Command::Norms => {
            let domain = ctx.grid()?;
            let f = ctx.function(&domain)?;
            let params = ctx.lorentz_params(domain)?;
            let strong = lambda_norm(&f, &params)?;
            let weak = lambda_weak_norm(&f, &params)?;
            let levels: Vec<serde_json::Value> = level_decomposition(&f, params.u())?
                .into_iter()
                .map(|(t, mass)| json!({"level": t, "u_mass": mass}))
                .collect();
            ctx.reporter.record(
                "norms",
                domain.cells_per_axis(),
                json!({"p": ctx.cfg.params.p, "function": ctx.cfg.function}),
                json!({"strong": strong, "weak": weak, "levels": levels,
                       "doubling": params.doubling_constant()}),
            );
        }
        Command::Weights { what: WeightsCmd::Check } => {
            let domain = ctx.grid()?;
            let u = ctx.cfg.u.spec().materialize(domain)?;
            let w = ctx.cfg.w.weight();
            let p = ctx.cfg.params.p;
            let ap = if p > 1.0 {
                Some(classes::ap_constant(&u, p)?)
            } else {
                None
            };
            let a1 = classes::a1_constant(&u);
            let bp = match classes::bp_constant(&w, p)? {
                MaybeDivergent::Finite(v) => json!(v),
                MaybeDivergent::Divergent => json!("divergent"),
            };
            let bpinf = if p <= 1.0 {
                Some(classes::bpinf_constant(&w, p)?)
            } else {
                None
            };
            let delta2 = classes::delta2_constant(&w)?;
            ctx.reporter.record(
                "weights.check",
                domain.cells_per_axis(),
                json!({"p": p, "u": ctx.cfg.u, "w": ctx.cfg.w,
                       "u_clamp": u.clamp_applied()}),
                json!({"ap": ap, "a1": a1, "bp": bp, "bp_inf": bpinf, "delta2": delta2}),
            );
        }
        Command::Search { what: SearchCmd::Raposo } => {
            let domain = ctx.grid()?;
            let u = ctx.cfg.u.spec().materialize(domain)?;
            let w = ctx.cfg.w.weight();
            let qs = match (&ctx.cfg.params.qs, ctx.cfg.params.q_points) {
                (Some(qs), _) => qs.clone(),
                (None, points) => {
                    classes::default_q_grid(ctx.cfg.params.p, points.unwrap_or(8))
                }
            };
            let opts = SearchOptions {
                budget: ctx.trials(),
                seed: ctx.seed(),
                ..Default::default()
            };
            let certs = classes::raposo_search(&u, &w, &qs, &opts)?;
            for cert in &certs {
                ctx.reporter.record(
                    "search.raposo",
                    cert.level,
                    json!({"q": cert.q, "budget": opts.budget, "seed": opts.seed}),
                    json!({"ratio": cert.ratio, "family": cert.family}),
                );
            }
        }
        Command::Verify { what } => run_verify(what, ctx)?,
        Command::Opnorm => {
            let domain = ctx.grid()?;
            let params = ctx.lorentz_params(domain)?;
            let kind = match ctx.cfg.params.opnorm_kind.as_deref() {
                Some("strong") => NormKind::Strong,
                _ => NormKind::Weak,
            };
            let est = opnorm_estimate(&params, kind, ctx.trials(), ctx.seed())?;
            ctx.reporter.record(
                "opnorm",
                domain.cells_per_axis(),
                json!({"kind": kind, "trials": ctx.trials(), "seed": ctx.seed()}),
                json!({"estimate": est.value, "witness": est.witness}),
            );
        }
        Command::Equivalence => {
            let levels = ctx.cfg.domain.levels.clone().ok_or(ConfigError::Validation {
                key: "domain.levels",
                message: "equivalence needs refinement levels".into(),
            })?;
            let rep = equivalence_report(
                &ctx.cfg.u.spec(),
                &ctx.cfg.w.weight(),
                ctx.cfg.params.p,
                ctx.cfg.domain.dimension,
                ctx.cfg.domain.half_width,
                &levels,
                ctx.trials(),
                ctx.seed(),
            )?;
            for row in &rep.rows {
                ctx.reporter.record(
                    "equivalence.row",
                    row.level,
                    json!({"weak_witness": row.weak_witness,
                           "strong_witness": row.strong_witness}),
                    json!({"weak": row.weak, "strong": row.strong}),
                );
            }
            ctx.reporter.record(
                "equivalence",
                *levels.last().unwrap(),
                json!({"levels": levels, "p": rep.p, "weights": rep.weights,
                       "trials": ctx.trials(), "seed": ctx.seed()}),
                json!({"verdict": rep.verdict}),
            );
        }
    }
    Ok(())
}

fn run_verify(what: &VerifyCmd, ctx: &mut Ctx) -> Result<(), Box<dyn std::error::Error>> {
    let domain = ctx.grid()?;
    let n = domain.cells_per_axis();
    match what {
        VerifyCmd::Riesz => {
            let f = ctx.function(&domain)?;
            let tgrid = ctx.tgrid(&domain);
            let bounds = riesz_sandwich(&f, &tgrid)?;
            ctx.reporter.record(
                "verify.riesz",
                n,
                json!({"tgrid": tgrid, "function": ctx.cfg.function}),
                json!({"c_est": bounds.lower, "C_est": bounds.upper}),
            );
        }
        VerifyCmd::Lemma21 => {
            let e = ctx.indicator_set(&domain)?;
            let params = ctx.lorentz_params(domain)?;
            for lambda in ctx.lambdas() {
                let (lhs, base) = lemma21_check(&e, lambda, &params)?;
                ctx.reporter.record(
                    "verify.lemma21",
                    n,
                    json!({"lambda": lambda, "p": ctx.cfg.params.p}),
                    json!({"lhs": lhs, "base": base, "ratio": lhs / base}),
                );
            }
        }
        VerifyCmd::Lemma22 => {
            let e = ctx.indicator_set(&domain)?;
            for lambda in ctx.lambdas() {
                let c_est = lemma22_check(&e, lambda)?;
                let floor = 1.0 / (1.0 - lambda.ln());
                ctx.reporter.record(
                    "verify.lemma22",
                    n,
                    json!({"lambda": lambda}),
                    json!({"c_est": c_est, "floor": floor}),
                );
            }
        }
        VerifyCmd::Inclusion => {
            let e = ctx.indicator_set(&domain)?;
            for lambda in ctx.lambdas() {
                let c = match ctx.cfg.params.c {
                    Some(c) => c,
                    None => lemma22_check(&e, lambda)? / 2.0,
                };
                let ok = corollary_inclusion_check(&e, lambda, c)?;
                ctx.reporter.record(
                    "verify.inclusion",
                    n,
                    json!({"lambda": lambda, "c": c}),
                    json!({"included": ok, "included_num": if ok { 1.0 } else { 0.0 }}),
                );
            }
        }
        VerifyCmd::Prop24 => {
            let e = ctx.indicator_set(&domain)?;
            let r = ctx.cfg.params.r.ok_or(ConfigError::Validation {
                key: "r",
                message: "prop24 needs params.r".into(),
            })?;
            let params = ctx.lorentz_params(domain)?;
            let value = prop24_integral(&e, r, &params)?;
            ctx.reporter.record(
                "verify.prop24",
                n,
                json!({"r": r, "p": ctx.cfg.params.p}),
                json!({"value": value}),
            );
        }
    }
    Ok(())
}

fn check_assertions(ctx: &Ctx) -> ExitCode {
    let Some(spec) = &ctx.cfg.assert else {
        eprintln!("error: --assert requires an [assert] block");
        return ExitCode::from(2);
    };
    let mut ok = true;
    if let Some(expected_verdict) = &spec.verdict {
        // verdict asserted against the last equivalence record
        let found = ctx
            .reporter
            .json_body()
            .lines()
            .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
            .rev()
            .find_map(|v| v["outputs"]["verdict"].as_str().map(str::to_string));
        let matches = found.as_deref() == Some(expected_verdict.as_str());
        if !matches {
            eprintln!(
                "assert failed: verdict {found:?} != expected {expected_verdict:?}"
            );
            ok = false;
        }
    }
    if spec.expected.is_some() || spec.min.is_some() || spec.max.is_some() {
        let metric = spec.metric.as_deref().unwrap_or("value");
        match ctx.reporter.metric(metric) {
            None => {
                eprintln!("assert failed: metric `{metric}` was not produced");
                ok = false;
            }
            Some(value) => {
                if let (Some(expected), Some(rel)) = (spec.expected, spec.rel_tol) {
                    if (value - expected).abs() > rel * expected.abs() {
                        eprintln!(
                            "assert failed: {metric} = {value} not within rel {rel} of {expected}"
                        );
                        ok = false;
                    }
                }
                if let Some(min) = spec.min {
                    if value < min {
                        eprintln!("assert failed: {metric} = {value} < min {min}");
                        ok = false;
                    }
                }
                if let Some(max) = spec.max {
                    if value > max {
                        eprintln!("assert failed: {metric} = {value} > max {max}");
                        ok = false;
                    }
                }
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

