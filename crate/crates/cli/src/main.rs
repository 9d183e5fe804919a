//! `aot`: command-line front end for the adapted-ot library.
//!
//! Results go to standard output as JSON (or a plain table / number where
//! noted), diagnostics to standard error. Exit codes: 0 when every check
//! passed, 1 when a check failed, 2 on usage, parse or IO errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adapted_ot::adapted::{av1, aw1, aw1_coupling};
use adapted_ot::estimators::{EstimatorKind, EstimatorSpec, Schedule};
use adapted_ot::experiments::{
    bandwidth_sweep, reference_measure, reference_stability, run_convergence_with, surrogate_stability,
    theoretical_envelope, ExperimentConfig, Model,
};
use adapted_ot::gaussian::{stream_id, GaussianMixture, SeededSampler};
use adapted_ot::transport::{self, solve_ot, tv1_cost_matrix, CostMatrix, Coupling};
use adapted_ot::verify::{convexity_sweep, example_suite, inequality_sweep, oracle_sweep};
use adapted_ot::{DiscretePathMeasure, Error, PathSamples};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

/// `println!` that tolerates a closed stdout; the exit code still carries the verdict.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "aot", version, about = "Classical and adapted optimal transport between path measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the closed-form example distances.
    Verify {
        #[arg(long)]
        json: bool,
        /// Example parameters, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.25, 0.5])]
        eps: Vec<f64>,
        /// Added to every expected value; for testing the failure path.
        #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
        offset: f64,
    },
    /// Distance between two measure files.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Write an optimal coupling (w1, tv, tv1, aw1).
        #[arg(long)]
        coupling: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Build an estimator from samples or from a model.
    Estimate {
        #[arg(long, conflicts_with = "model")]
        samples: Option<PathBuf>,
        /// Mixture or measure JSON to sample from.
        #[arg(long, requires = "n")]
        model: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// Estimator spec JSON.
        #[arg(long, conflicts_with = "kind")]
        spec: Option<PathBuf>,
        #[arg(long)]
        kind: Option<EstimatorKind>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Fixed bandwidth instead of the rate schedule.
        #[arg(long)]
        sigma: Option<f64>,
        /// Fixed grid size instead of the rate schedule.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a convergence experiment.
    Converge {
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: u64,
        /// Directory for trials.csv and report.json; defaults to the config outputs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also report doubling stability at this sample size.
        #[arg(long)]
        stability_n: Option<usize>,
    },
    /// Dynamic programs against the LP, plus inequality and convexity sweeps.
    OracleCheck {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Distance between a model and its Gaussian smoothing across bandwidths.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        /// Decreasing bandwidths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1, 0.05])]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 1 << 28)]
        resolution: u64,
        /// Accepted slope range `lo,hi`.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        band: Option<Vec<f64>>,
    },
    /// Envelope constants of the smoothed rates.
    Envelope {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        p: f64,
        /// `p`-th moment of the law.
        #[arg(long)]
        moment: f64,
        /// Radius of a ball containing the support.
        #[arg(long, default_value_t = 0.0)]
        k_bound: f64,
        #[arg(long)]
        d: usize,
        #[arg(long = "horizon", short = 'T')]
        horizon: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    W1,
    Tv,
    Tv1,
    Av1,
    Aw1,
}

enum Failure {
    /// A check ran and failed.
    Check(String),
    /// Bad input, unreadable files, invalid parameters.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Trial { .. } | Error::NoConvergence(_) | Error::Lp(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { json, eps, offset } => cmd_verify(json, &eps, offset),
        Command::Dist {
            a,
            b,
            metric,
            coupling,
            json,
        } => cmd_dist(&a, &b, metric, coupling.as_deref(), json),
        Command::Estimate {
            samples,
            model,
            n,
            spec,
            kind,
            m,
            sigma,
            delta,
            seed,
            out,
        } => {
            let spec = match (spec, kind) {
                (Some(p), _) => read_json::<EstimatorSpec>(&p),
                (None, Some(k)) => Ok(inline_spec(k, m, sigma, delta)),
                (None, None) => Err(Failure::Usage("one of --spec or --kind is required".into())),
            };
            spec.and_then(|spec| cmd_estimate(samples.as_deref(), model.as_deref(), n, &spec, seed, &out))
        }
        Command::Converge {
            config,
            seed,
            out,
            stability_n,
        } => cmd_converge(&config, seed, out.as_deref(), stability_n),
        Command::OracleCheck { seed, count } => cmd_oracle_check(seed, count),
        Command::Sweep {
            model,
            sigmas,
            resolution,
            band,
        } => cmd_sweep(&model, &sigmas, resolution, band.as_deref()),
        Command::Envelope {
            sigma,
            p,
            moment,
            k_bound,
            d,
            horizon,
        } => theoretical_envelope(sigma, p, moment, k_bound, d, horizon)
            .map_err(Failure::from)
            .map(|e| print_json(&e)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn print_json<T: Serialize>(v: &T) {
    out!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// A mixture file has a `components` array; anything else is read as a measure.
fn load_model(path: &Path) -> Result<Model, Failure> {
    let value: serde_json::Value = read_json(path)?;
    if value.get("components").is_some() {
        Ok(Model::Mixture(GaussianMixture::from_json(&value.to_string())?))
    } else {
        Ok(Model::Discrete(DiscretePathMeasure::from_json(&value.to_string())?))
    }
}

fn cmd_verify(json: bool, eps: &[f64], offset: f64) -> Outcome {
    let checks = example_suite(eps, offset)?;
    if json {
        print_json(&checks);
    } else {
        out!("{:<38} {:>6} {:>20} {:>20}  verdict", "check", "eps", "expected", "computed");
        for c in &checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            out!("{:<38} {:>6} {:>20.12} {:>20.12}  {verdict}", c.name, c.eps, c.expected, c.computed);
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} of {} example checks differ by more than 1e-9", checks.len())))
    }
}

fn coupling_json(metric: &str, value: f64, mu: &DiscretePathMeasure, nu: &DiscretePathMeasure, c: &Coupling) -> String {
    let stages = |p: &[f64], d: usize| p.chunks(d).map(<[f64]>::to_vec).collect::<Vec<_>>();
    let entries: Vec<_> = c
        .entries
        .iter()
        .map(|&(i, j, w)| json!({ "x": stages(mu.path(i), mu.d()), "y": stages(nu.path(j), nu.d()), "mass": w }))
        .collect();
    let doc = json!({ "metric": metric, "value": value, "entries": entries });
    serde_json::to_string_pretty(&doc).expect("coupling serializes") + "\n"
}

fn cmd_dist(a: &Path, b: &Path, metric: Metric, coupling_out: Option<&Path>, json: bool) -> Outcome {
    let mu = DiscretePathMeasure::read(a)?;
    let nu = DiscretePathMeasure::read(b)?;
    mu.same_shape(&nu)?;
    let (name, value, coupling) = match metric {
        Metric::W1 => {
            let s = transport::w1_with_coupling(&mu, &nu)?;
            ("w1", s.value, Some(s.coupling))
        }
        Metric::Tv => {
            let c = CostMatrix::from_fn(mu.len(), nu.len(), |i, j| f64::from(u8::from(mu.path(i) != nu.path(j))))?;
            let s = solve_ot(&c, mu.weights(), nu.weights())?;
            ("tv", transport::tv(&mu, &nu)?, Some(s.coupling))
        }
        Metric::Tv1 => {
            let s = solve_ot(&tv1_cost_matrix(&mu, &nu), mu.weights(), nu.weights())?;
            ("tv1", transport::tv1_closed_form(&mu, &nu)?, Some(s.coupling))
        }
        Metric::Av1 => ("av1", av1(&mu, &nu)?, None),
        Metric::Aw1 => match coupling_out {
            Some(_) => {
                let (v, c) = aw1_coupling(&mu, &nu)?;
                ("aw1", v, Some(c))
            }
            None => ("aw1", aw1(&mu, &nu)?, None),
        },
    };
    if let Some(path) = coupling_out {
        let c = coupling.ok_or_else(|| Failure::Usage(format!("no coupling export for {name}")))?;
        write_text(path, &coupling_json(name, value, &mu, &nu, &c))?;
    }
    if json {
        print_json(&json!({ "metric": name, "value": value }));
    } else {
        out!("{value}");
    }
    Ok(())
}

fn inline_spec(kind: EstimatorKind, m: usize, sigma: Option<f64>, delta: Option<f64>) -> EstimatorSpec {
    let mut spec = EstimatorSpec::new(kind).with_m(m);
    if let Some(value) = sigma {
        spec.sigma = Schedule::Fixed { value };
    }
    if let Some(value) = delta {
        spec.delta = Schedule::Fixed { value };
    }
    spec
}

fn cmd_estimate(samples: Option<&Path>, model: Option<&Path>, n: Option<usize>, spec: &EstimatorSpec, seed: u64, out: &Path) -> Outcome {
    let base = |n: usize| SeededSampler::new(seed, stream_id(&[spec.kind.id(), n as u64]));
    let samples: PathSamples = match (samples, model, n) {
        (Some(p), _, _) => PathSamples::read(p)?,
        (None, Some(p), Some(n)) => load_model(p)?.sample(&mut base(n).substream(1), n)?,
        _ => return Err(Failure::Usage("give --samples, or --model with --n".into())),
    };
    let resolved = spec.resolve(samples.len(), samples.d(), samples.horizon())?;
    let est = resolved.build(&samples, &base(samples.len()).substream(2))?;
    est.write(out)?;
    print_json(&json!({
        "kind": resolved.kind.name(),
        "N": resolved.n,
        "atoms": est.len(),
        "sigma": resolved.sigma,
        "delta": resolved.grid.as_ref().map(|g| g.delta()),
        "G": resolved.grid.as_ref().map(|g| g.g()),
        "zetas": resolved.zetas,
        "surrogate": resolved.surrogate,
    }));
    Ok(())
}

fn cmd_converge(config: &Path, seed: u64, out: Option<&Path>, stability_n: Option<usize>) -> Outcome {
    let mut cfg = ExperimentConfig::read(config)?;
    cfg.seed = seed;
    let model = cfg.load_model()?;
    let reference = reference_measure(&model, cfg.reference_resolution)?;
    eprintln!("reference: {} atoms", reference.len());
    let run = run_convergence_with(&cfg, &model, &reference)?;
    let (csv, report) = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
            (Some(dir.join("trials.csv")), Some(dir.join("report.json")))
        }
        None => {
            let base = cfg.base_dir.clone().unwrap_or_default();
            let at = |p: &Option<PathBuf>| p.as_ref().map(|p| base.join(p));
            (at(&cfg.outputs.csv), at(&cfg.outputs.report))
        }
    };
    run.write(csv.as_deref(), report.as_deref())?;
    let mut summary = json!({
        "estimator": run.report.estimator,
        "slope": run.report.fit.map(|f| f.slope),
        "theoretical_slope": run.report.theoretical_slope,
        "inversions": run.report.inversions,
        "passed": run.report.passed,
    });
    let mut stable = true;
    if let Some(n) = stability_n {
        let reference_check = reference_stability(&cfg, &model, n)?;
        stable &= reference_check.relative_change < 0.05;
        summary["reference_stability"] = json!(reference_check);
        if cfg.estimator.kind == EstimatorKind::SEmp {
            let surrogate_check = surrogate_stability(&cfg, &model, &reference, n)?;
            stable &= surrogate_check.relative_change < 0.05;
            summary["surrogate_stability"] = json!(surrogate_check);
        }
    }
    print_json(&summary);
    match (run.report.passed, stable) {
        (Some(false), _) => Err(Failure::Check("slope or monotonicity outside the configured band".into())),
        (_, false) => Err(Failure::Check("doubling changed the mean distance by 5% or more".into())),
        _ => Ok(()),
    }
}

fn cmd_oracle_check(seed: u64, count: usize) -> Outcome {
    let oracle = oracle_sweep(seed, count)?;
    let inequalities = inequality_sweep(seed, count)?;
    let convexity = convexity_sweep(seed, count)?;
    let passed = oracle.passed && inequalities.passed && convexity.passed;
    print_json(&json!({ "oracle": oracle, "inequalities": inequalities, "convexity": convexity, "passed": passed }));
    if passed {
        Ok(())
    } else {
        Err(Failure::Check("oracle, inequality or convexity sweep failed".into()))
    }
}

fn cmd_sweep(model: &Path, sigmas: &[f64], resolution: u64, band: Option<&[f64]>) -> Outcome {
    let model = load_model(model)?;
    let report = bandwidth_sweep(&model, sigmas, resolution)?;
    print_json(&report);
    if let Some(b) = band {
        let ok = report.fit.is_some_and(|f| f.slope >= b[0] && f.slope <= b[1]);
        if !ok {
            return Err(Failure::Check(format!("sweep slope outside [{}, {}]", b[0], b[1])));
        }
    }
    Ok(())
}
