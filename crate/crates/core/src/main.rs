use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qqueue::des::{simulate_des, DesParams};
use qqueue::grover::Thresholds;
use qqueue::harness::io::{format_num, format_opt, to_csv, to_json, write_csv_with_sidecar, CsvRecord};
use qqueue::harness::{
    run_comparison, run_convergence, run_sensitivity, DesSettings, GridRange, QuantumSettings,
    Scenario, SweepSpec,
};
use qqueue::qsim::{demo_42, simulate, KSource, SimParams, DEFAULT_SHOTS};
use qqueue::theory::{metrics, stationary_oracle, TheoryInput};
use qqueue::{Error, Result};

#[derive(Parser)]
#[command(name = "qqueue", version, about = "Quantum statevector simulation of M/M/1/K queues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Three-qubit worked example with pass/fail checks
    Demo(Common),
    /// One quantum simulation; writes the full trace
    Simulate(Common),
    /// Discrete-event baseline
    Des {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        des: DesArgs,
    },
    /// Closed-form metrics and stationary distribution
    Theory(Common),
    /// Quantum vs theory vs DES table for one scenario
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        des: DesArgs,
    },
    /// Effective arrival rate against qubit count
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        min_qubits: usize,
        #[arg(long, default_value_t = 9)]
        max_qubits: usize,
    },
    /// (alpha, beta) sensitivity grid
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        grid_start: f64,
        #[arg(long, default_value_t = 0.15)]
        grid_end: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Worker threads (defaults to all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Use exact probabilities instead of sampling shots
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ScenarioArg {
    Low,
    Moderate,
    High,
    All,
}

impl ScenarioArg {
    fn scenarios(self) -> Vec<Scenario> {
        match self {
            ScenarioArg::Low => vec![Scenario::Low],
            ScenarioArg::Moderate => vec![Scenario::Moderate],
            ScenarioArg::High => vec![Scenario::High],
            ScenarioArg::All => Scenario::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct Common {
    /// Traffic preset; --lambda/--mu override its rates where applicable
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, default_value_t = 1000)]
    steps: u64,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    eps0: f64,
    #[arg(long, default_value_t = 0.7)]
    eps1: f64,
    #[arg(long, default_value_t = 1)]
    grover_iters: u32,
    #[arg(long, default_value = "step-index", value_parser = parse_k_source)]
    k_source: KSource,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample the final state this many times (default: exact probabilities)
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct DesArgs {
    /// Total arrivals generated
    #[arg(long, default_value_t = 1_000_000)]
    events: u64,
    #[arg(long, default_value_t = 0.1)]
    warmup: f64,
    #[arg(long, default_value_t = 20)]
    batches: usize,
}

fn parse_k_source(s: &str) -> std::result::Result<KSource, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn single_scenario(&self, default: Scenario) -> Result<Scenario> {
        match self.scenario.map(ScenarioArg::scenarios) {
            None => Ok(default),
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(_) => Err(Error::InvalidArgument("this command takes a single scenario".into())),
        }
    }

    fn rates(&self, default: Scenario) -> Result<(f64, f64)> {
        let sc = self.single_scenario(default)?;
        Ok((self.lambda.unwrap_or(sc.lambda()), self.mu.unwrap_or(sc.mu())))
    }

    fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::new(self.eps0, self.eps1)
    }

    fn quantum(&self) -> Result<QuantumSettings> {
        Ok(QuantumSettings {
            alpha: self.alpha,
            beta: self.beta,
            dt: self.dt,
            steps: self.steps,
            thresholds: self.thresholds()?,
            grover_iters: self.grover_iters,
            k_source: self.k_source,
            shots: self.shots,
            seed: self.seed,
        })
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    /// CSV goes to `--out` with a params sidecar, or to stdout without one;
    /// JSON bundles params and rows into one document.
    fn emit_table<R: CsvRecord + Serialize, P: Serialize>(&self, rows: &[R], params: &P) -> Result<()> {
        match self.format(Format::Csv) {
            Format::Csv => {
                let csv = to_csv(rows)?;
                match &self.out {
                    Some(path) => write_csv_with_sidecar(path, &csv, params),
                    None => self.emit(&csv),
                }
            }
            Format::Json => self.emit(&to_json(&json!({ "params": params, "rows": rows }))?),
        }
    }
}

fn simple_csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Demo(common) => {
            let report = demo_42()?;
            match common.format(Format::Json) {
                Format::Json => common.emit(&to_json(&report)?),
                Format::Csv => common.emit(&simple_csv(
                    "name,expected,actual,tolerance,pass",
                    report.checks.iter().map(|c| {
                        format!(
                            "{},{},{},{},{}",
                            c.name,
                            format_num(c.expected),
                            format_num(c.actual),
                            format_num(c.tolerance),
                            c.pass
                        )
                    }),
                )),
            }
        }
        Command::Simulate(common) => {
            let (lambda, mu) = common.rates(Scenario::Low)?;
            let n = common.qubits.unwrap_or(5);
            let p: SimParams = common.quantum()?.sim_params(lambda, mu, n);
            let trace = simulate(&p)?;
            match common.format(Format::Json) {
                Format::Json => common.emit(&to_json(&trace)?),
                Format::Csv => common.emit(&simple_csv(
                    "state,probability",
                    trace
                        .final_distribution
                        .as_slice()
                        .iter()
                        .enumerate()
                        .map(|(i, p)| format!("{i},{}", format_num(*p))),
                )),
            }
        }
        Command::Des { common, des } => {
            let (lambda, mu) = common.rates(Scenario::Low)?;
            let n = common.qubits.unwrap_or(5);
            let p = DesParams {
                horizon_events: des.events,
                warmup_fraction: des.warmup,
                batches: des.batches,
                ..DesParams::new(lambda, mu, (1u64 << n.min(62)) - 1, common.seed)
            };
            let r = simulate_des(&p)?;
            match common.format(Format::Json) {
                Format::Json => common.emit(&to_json(&r)?),
                Format::Csv => {
                    let m = &r.metrics;
                    let h = &r.half_widths;
                    let rows = [
                        ("Lq", Some(m.lq), Some(h.lq)),
                        ("Ls", Some(m.ls), Some(h.ls)),
                        ("Wq", m.wq, h.wq),
                        ("Ws", m.ws, h.ws),
                        ("lambda_eff", Some(m.lambda_eff), Some(h.lambda_eff)),
                    ];
                    common.emit(&simple_csv(
                        "metric,estimate,half_width",
                        rows.iter().map(|(k, v, w)| format!("{k},{},{}", format_opt(*v), format_opt(*w))),
                    ))
                }
            }
        }
        Command::Theory(common) => {
            let (lambda, mu) = common.rates(Scenario::Low)?;
            let t = TheoryInput::for_qubits(lambda, mu, common.qubits.unwrap_or(5))?;
            let m = metrics(&t)?;
            let dist = stationary_oracle(&t)?;
            match common.format(Format::Json) {
                Format::Json => common.emit(&to_json(&json!({
                    "input": t,
                    "metrics": m,
                    "distribution": dist,
                }))?),
                Format::Csv => common.emit(&simple_csv(
                    "metric,value",
                    [
                        ("Lq", Some(m.lq)),
                        ("Ls", Some(m.ls)),
                        ("Wq", m.wq),
                        ("Ws", m.ws),
                        ("lambda_eff", Some(m.lambda_eff)),
                        ("P0", Some(m.p0)),
                        ("PK", Some(m.pk)),
                    ]
                    .iter()
                    .map(|(k, v)| format!("{k},{}", format_opt(*v))),
                )),
            }
        }
        Command::Compare { common, des } => {
            let scenario = common.single_scenario(Scenario::Moderate)?;
            let n = common.qubits.unwrap_or(5);
            let des_settings = DesSettings {
                horizon_events: des.events,
                warmup_fraction: des.warmup,
                batches: des.batches,
                seed: common.seed,
            };
            let report = run_comparison(scenario, n, &common.quantum()?, &des_settings)?;
            let params = json!({
                "scenario": scenario,
                "n": n,
                "sim_params": report.sim_params,
                "des_params": report.des.params,
            });
            common.emit_table(&report.rows, &params)
        }
        Command::Converge { common, min_qubits, max_qubits } => {
            let scenarios = common.scenario.unwrap_or(ScenarioArg::All).scenarios();
            let q = common.quantum()?;
            let mut rows = Vec::new();
            for sc in &scenarios {
                rows.extend(run_convergence(*sc, min_qubits..=max_qubits, &q)?);
            }
            let params = json!({
                "scenarios": scenarios,
                "qubits": [min_qubits, max_qubits],
                "quantum": q,
            });
            common.emit_table(&rows, &params)
        }
        Command::Sweep { common, grid_start, grid_end, grid_step, workers, exact } => {
            let grid = GridRange::new(grid_start, grid_end, grid_step)?;
            let spec = SweepSpec {
                scenarios: common.scenario.unwrap_or(ScenarioArg::All).scenarios(),
                alpha: grid,
                beta: grid,
                n: common.qubits.unwrap_or(6),
                dt: common.dt,
                steps: common.steps,
                shots: if exact { None } else { Some(common.shots.unwrap_or(DEFAULT_SHOTS)) },
                seed: common.seed,
                thresholds: common.thresholds()?,
                grover_iters: common.grover_iters,
                k_source: common.k_source,
            };
            let rows = run_sensitivity(&spec, workers)?;
            common.emit_table(&rows, &spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = json!({ "error": { "kind": "usage", "message": e.to_string().trim() } });
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let err = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{err}");
            ExitCode::FAILURE
        }
    }
}
