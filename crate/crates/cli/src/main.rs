mod config;
mod error;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use unipotent_core::chain::{classify, partition_nilpotent, sl_d_single_block_gr};
use unipotent_core::divergence::CoordinateChart;
use unipotent_core::flow::{cusp_tail, divergence_degree, lattice_count, matching_experiment};
use unipotent_core::lie::{parse_element, AlgebraElement, AlgebraSpec, BuiltinSpec, LieAlgebra};
use unipotent_core::sl2::M2;
use unipotent_core::suites::{run_suite, SuiteOptions, SUITES};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "unipotent", version, about = "Growth-rate invariants and numerical checks for unipotent flows")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files. Without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON on stdout (the default).
    #[arg(long, global = true)]
    json: bool,
    /// Print CSV on stdout instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chain basis and growth rate of a nilpotent element.
    Analyze(ElementArgs),
    /// Growth rate of the single Jordan block of each size in sl(d).
    EnumerateSld {
        #[arg(long)]
        d: usize,
    },
    /// Run a verification suite and report per-check verdicts.
    Verify {
        /// One of chain, divergence, flow, sl2, all.
        #[arg(long)]
        suite: Option<String>,
        /// Divide sample counts by ten.
        #[arg(long)]
        quick: bool,
    },
    /// Run a single experiment and emit its record and time series.
    Simulate {
        #[command(subcommand)]
        kind: SimKind,
    },
}

#[derive(Args, Clone, Default)]
struct ElementArgs {
    /// Builtin algebra: sl<d>, su21, or a '+'-joined sum such as sl2+sl2.
    #[arg(long)]
    algebra: Option<String>,
    /// Comma-separated rational coefficients in the algebra basis.
    #[arg(long, allow_hyphen_values = true)]
    element: Option<String>,
    /// Use a single basis vector as the element.
    #[arg(long, conflicts_with = "element")]
    basis_index: Option<usize>,
    /// Jordan type of a nilpotent in sl(d), e.g. 2,1.
    #[arg(long, conflicts_with_all = ["element", "basis_index"])]
    partition: Option<String>,
}

#[derive(Subcommand)]
enum SimKind {
    /// Orbit matching with and without the time change.
    Matching {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Cusp excursion tail under Haar measure.
    Tail {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Lattice point counts in growing balls.
    Count,
    /// Divergence degree along one chart coordinate.
    Degree {
        #[command(flatten)]
        element: ElementArgs,
        /// Chart coordinate index (0 = V, 1 = X, 2 = U).
        #[arg(long, default_value_t = 0)]
        coord: usize,
    },
}

/// A result ready to be written: JSON value, optional CSV table and a verdict.
struct Output {
    stem: &'static str,
    json: String,
    csv: Option<String>,
    passed: bool,
    elapsed_s: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => match emit(&cli, &out) {
            Ok(()) => ExitCode::from(if out.passed { 0 } else { 1 }),
            Err(e) => fail(e),
        },
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let cfg = config::load(cli.config.as_deref())?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(7);
    let start = Instant::now();
    let mut out = match &cli.command {
        Command::Analyze(args) => analyze(&cfg, args)?,
        Command::EnumerateSld { d } => enumerate_sld(*d)?,
        Command::Verify { suite, quick } => {
            let name = suite.clone().or_else(|| cfg.suite.clone()).unwrap_or_else(|| "all".into());
            if name != "all" && !SUITES.contains(&name.as_str()) {
                return Err(CliError::UnknownSuite(name));
            }
            let quick = *quick || cfg.quick.unwrap_or(false);
            let report = run_suite(&name, SuiteOptions { seed, quick })?;
            let mut csv = String::from("id,verdict,worst_ratio\n");
            for c in &report.checks {
                let ratio = c.worst_ratio.map(|r| format!("{r:e}")).unwrap_or_default();
                let verdict = if c.passed() { "pass" } else { "fail" };
                writeln!(csv, "{},{verdict},{ratio}", c.id).unwrap();
            }
            Output {
                stem: "report",
                json: serde_json::to_string_pretty(&report)?,
                csv: Some(csv),
                passed: report.all_passed(),
                elapsed_s: 0.0,
            }
        }
        Command::Simulate { kind } => simulate(&cfg, kind, seed)?,
    };
    out.elapsed_s = start.elapsed().as_secs_f64();
    Ok(out)
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let cfg_out = config::load(cli.config.as_deref())?.out;
    match cli.out.as_ref().or(cfg_out.as_ref()) {
        Some(dir) => write_dir(dir, out),
        None => {
            match (cli.csv, &out.csv) {
                (true, Some(csv)) => print!("{csv}"),
                (true, None) => return Err(CliError::Config("this command has no CSV output".into())),
                (false, _) => println!("{}", out.json),
            }
            Ok(())
        }
    }
}

/// Writes `<stem>.json`, `<stem>.csv` and a separate timing file, so the
/// reports themselves stay byte-identical across runs.
fn write_dir(dir: &Path, out: &Output) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{}.json", out.stem)), format!("{}\n", out.json))?;
    if let Some(csv) = &out.csv {
        std::fs::write(dir.join(format!("{}.csv", out.stem)), csv)?;
    }
    let timing = serde_json::json!({ "command": out.stem, "wall_time_s": out.elapsed_s });
    std::fs::write(dir.join("timings.json"), format!("{}\n", serde_json::to_string_pretty(&timing)?))?;
    Ok(())
}

fn json<T: Serialize>(stem: &'static str, value: &T, csv: Option<String>) -> Result<Output, CliError> {
    Ok(Output { stem, json: serde_json::to_string_pretty(value)?, csv, passed: true, elapsed_s: 0.0 })
}

/// Parses `sl3`, `su21` or `sl2+sl2`.
fn parse_algebra_name(name: &str) -> Result<AlgebraSpec, CliError> {
    let one = |s: &str| -> Result<AlgebraSpec, CliError> {
        let s = s.trim().to_ascii_lowercase();
        if s == "su21" {
            return Ok(AlgebraSpec::Builtin(BuiltinSpec::Su21));
        }
        s.strip_prefix("sl")
            .and_then(|d| d.parse::<usize>().ok())
            .map(|d| AlgebraSpec::Builtin(BuiltinSpec::Sl { d }))
            .ok_or_else(|| CliError::Config(format!("unknown algebra '{s}'")))
    };
    let parts: Vec<&str> = name.split('+').collect();
    if parts.len() == 1 {
        one(parts[0])
    } else {
        Ok(AlgebraSpec::Builtin(BuiltinSpec::Sum { parts: parts.into_iter().map(one).collect::<Result<_, _>>()? }))
    }
}

fn resolve_element(cfg: &RunConfig, args: &ElementArgs) -> Result<(LieAlgebra, AlgebraElement), CliError> {
    let spec = match (&args.algebra, &cfg.algebra) {
        (Some(name), _) => parse_algebra_name(name)?,
        (None, Some(spec)) => spec.clone(),
        (None, None) => AlgebraSpec::Builtin(BuiltinSpec::Sl { d: 2 }),
    };
    let g = spec.build()?;
    let u = if let Some(i) = args.basis_index {
        if i >= g.dim() {
            return Err(CliError::Config(format!("basis index {i} out of range for dimension {}", g.dim())));
        }
        g.basis_element(i)
    } else if let Some(p) = &args.partition {
        let AlgebraSpec::Builtin(BuiltinSpec::Sl { d }) = spec else {
            return Err(CliError::Config("--partition needs an sl(d) algebra".into()));
        };
        let parts = p
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("bad partition '{p}': {e}")))?;
        partition_nilpotent(&g, d, &parts)?
    } else if let Some(e) = &args.element {
        let coeffs: Vec<String> = e.split(',').map(|s| s.trim().to_string()).collect();
        parse_element(&g, &coeffs)?
    } else if let Some(coeffs) = &cfg.element {
        parse_element(&g, coeffs)?
    } else {
        g.basis_element(0)
    };
    Ok((g, u))
}

fn analyze(cfg: &RunConfig, args: &ElementArgs) -> Result<Output, CliError> {
    let (g, u) = resolve_element(cfg, args)?;
    let report = classify(&g, &u)?;
    let depths = report.depths.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
    let csv = format!(
        "algebra,depths,gr,standard,centralizer_codim\n{},{depths},{},{},{}\n",
        report.algebra, report.gr, report.standard, report.centralizer_codim
    );
    json("analyze", &report, Some(csv))
}

#[derive(Serialize)]
struct SldRow {
    l: usize,
    gr: u64,
}

fn enumerate_sld(d: usize) -> Result<Output, CliError> {
    if d < 2 {
        return Err(CliError::Config("enumerate-sld needs d >= 2".into()));
    }
    let rows = (2..=d).map(|l| Ok(SldRow { l, gr: sl_d_single_block_gr(d, l)? })).collect::<Result<Vec<_>, CliError>>()?;
    let mut csv = String::from("l,gr\n");
    for r in &rows {
        writeln!(csv, "{},{}", r.l, r.gr).unwrap();
    }
    json("enumerate-sld", &rows, Some(csv))
}

fn simulate(cfg: &RunConfig, kind: &SimKind, seed: u64) -> Result<Output, CliError> {
    let sim = &cfg.simulate;
    match kind {
        SimKind::Matching { r, eps } => {
            let (r, eps) = (r.unwrap_or(sim.r), eps.unwrap_or(sim.eps));
            if !(r > 0.0 && eps > 0.0) {
                return Err(CliError::Config("r and eps must be positive".into()));
            }
            let y = M2::new(1.1, 0.3, 0.2, (1.0 + 0.3 * 0.2) / 1.1);
            let rec = matching_experiment(&y, r, eps, eps.powi(5) / r, 0.0, 0.0, sim.grid_points)?;
            let csv = format!(
                "r,eps,sup_corrected,sup_uncorrected,max_slope_defect\n{},{},{:e},{:e},{:e}\n",
                rec.r, rec.eps, rec.sup_corrected, rec.sup_uncorrected, rec.max_slope_defect
            );
            let mut out = json("matching", &rec, Some(csv))?;
            out.passed = rec.corrected_ok && rec.control_fails;
            Ok(out)
        }
        SimKind::Tail { samples } => {
            let fit = cusp_tail(samples.unwrap_or(sim.samples), seed)?;
            let mut csv = String::from("threshold,fraction\n");
            for (t, f) in fit.thresholds.iter().zip(&fit.fractions) {
                writeln!(csv, "{t},{f:e}").unwrap();
            }
            json("tail", &fit, Some(csv))
        }
        SimKind::Count => {
            let lc = lattice_count(&sim.t_values)?;
            let mut csv = String::from("t,count\n");
            for (t, c) in lc.t_values.iter().zip(&lc.counts) {
                writeln!(csv, "{t},{c}").unwrap();
            }
            json("count", &lc, Some(csv))
        }
        SimKind::Degree { element, coord } => {
            let (g, u) = resolve_element(cfg, element)?;
            let chart = CoordinateChart::new(&g, &u)?;
            let fit = divergence_degree(&chart, *coord, sim.delta0, sim.horizon)?;
            let mut csv = String::from("t,distance\n");
            for (t, d) in fit.times.iter().zip(&fit.distances) {
                writeln!(csv, "{t:e},{d:e}").unwrap();
            }
            json("degree", &fit, Some(csv))
        }
    }
}
