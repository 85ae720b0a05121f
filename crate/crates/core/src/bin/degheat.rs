use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use degheat::criteria::{evaluate, CriteriaReport, SmallnessIndex};
use degheat::dynamics::simulate;
use degheat::lab::{
    from_json, render_svg, run_decay_probe, run_kernel_probe, run_sweep, write_csv,
    write_kernel_csv, CriteriaConfig, DecayProbeSpec, KernelProbeSpec, SimConfigSpec, SweepRow,
    SweepSpec,
};
use degheat::Error;

#[derive(Parser)]
#[command(
    name = "degheat",
    version,
    about = "Weighted semilinear heat equation laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print the result as JSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify every point of a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate the analytic criteria and print a verdict table.
    Criteria {
        #[arg(long)]
        config: PathBuf,
        /// Print the full report as JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Sup norm and mass of the kernel at the degenerate point, as CSV.
    KernelProbe {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
    },
    /// Decay rate of S(t)(1+|x|)^(-rho) in one dimension, as JSON.
    DecayProbe {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.6e}"))
}

fn verdict_table(r: &CriteriaReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        (
            "weight".into(),
            format!(
                "{:?} alpha={} N={}",
                r.weight.case(),
                r.weight.alpha(),
                r.weight.dim()
            ),
        ),
        (
            "grid".into(),
            format!(
                "{:?} extent={} nodes={}",
                r.grid.geometry(),
                r.grid.extent(),
                r.grid.nodes()
            ),
        ),
        ("t_num".into(), format!("{}", r.options.t_num)),
        ("|u0|_inf".into(), format!("{:.6e}", r.u0_sup)),
        ("mass(u0)".into(), format!("{:.6e}", r.u0_mass)),
        ("boundary leak".into(), format!("{:.3e}", r.boundary_leak)),
    ];
    for term in &r.forcings {
        rows.push((
            "term".into(),
            format!("{:?} x {}", term.profile, term.nonlinearity.label()),
        ));
    }
    for (k, v) in &r.osgood_tails {
        rows.push((format!("osgood tail {k}"), format!("{v:.6e}")));
    }
    if let Some(e) = &r.envelope {
        rows.push((
            "decay theta".into(),
            format!("{:.4} (C={:.4e})", e.theta, e.constant),
        ));
    }
    let index = match &r.index {
        Some(SmallnessIndex::Divergent { term, exponent }) => {
            format!("divergent (term {term}, tail exponent {exponent:.4})")
        }
        _ => fmt_opt(r.smallness_index),
    };
    rows.push(("smallness index I".into(), index));
    rows.push((
        "self certificate".into(),
        r.self_certificate.as_ref().map_or("-".into(), |c| {
            format!("beta={:.4e} delta={:.4e}", c.beta, c.delta)
        }),
    ));
    rows.push(("blow-up certificate tau".into(), fmt_opt(r.certificate_tau)));
    rows.push(("p_star".into(), fmt_opt(r.p_star)));
    rows.push(("q_star".into(), fmt_opt(r.q_star)));
    rows.push(("rho_star".into(), fmt_opt(r.rho_star)));
    rows.push(("verdict".into(), format!("{:?}", r.verdict)));
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        s.push_str(&format!("{k:<w$}  {v}\n"));
    }
    s
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Simulate { config, out } => {
            let spec: SimConfigSpec = from_json(&read(&config)?)?;
            let result = simulate(&spec.build()?)?;
            let mut text = serde_json::to_string_pretty(&result)?;
            text.push('\n');
            emit(&text, out.as_deref())
        }
        Command::Sweep {
            config,
            out,
            svg,
            workers,
        } => {
            let spec: SweepSpec = from_json(&read(&config)?)?;
            spec.validate()?;
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            if workers == 0 {
                return Err(Error::InvalidInput("--workers must be at least 1".into()));
            }
            let points = run_sweep(&spec, workers)?;
            let rows: Vec<SweepRow> = points.iter().map(SweepRow::from).collect();
            write_csv(&rows, fs::File::create(&out)?)?;
            if let Some(p) = svg {
                fs::write(p, render_svg(&spec, &points))?;
            }
            for p in points.iter().filter(|p| p.reason.is_some()) {
                eprintln!("{:?}: {}", p.axes, p.reason.as_deref().unwrap_or_default());
            }
            Ok(())
        }
        Command::Criteria { config, json } => {
            let cfg: CriteriaConfig = from_json(&read(&config)?)?;
            let report = evaluate(&cfg.sim.build()?, &cfg.criteria)?;
            let text = if json {
                serde_json::to_string_pretty(&report)? + "\n"
            } else {
                verdict_table(&report)
            };
            emit(&text, None)
        }
        Command::KernelProbe { alpha, times } => {
            let rows = run_kernel_probe(&KernelProbeSpec::new(alpha, times))?;
            write_kernel_csv(&rows, io::stdout().lock())
        }
        Command::DecayProbe { rho, alpha } => {
            let report = run_decay_probe(&DecayProbeSpec::new(rho, alpha))?;
            emit(&(serde_json::to_string_pretty(&report)? + "\n"), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Numeric { trace, .. } = &e {
                for (t, dt, sup) in trace {
                    eprintln!("  t={t:.6e} dt={dt:.3e} sup={sup:.6e}");
                }
            }
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
