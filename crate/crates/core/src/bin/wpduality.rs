use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wpduality::capacity::duality_check;
use wpduality::counts::{load_counts, save_counts, simulate_counts, write_counts_csv, NoiseModel};
use wpduality::harness::{
    reference, run_figure, run_property_suite, run_trials, ExperimentConfig, NamedState, DEFAULT_BOOTSTRAP,
    PRESET_NAMES,
};
use wpduality::optics::{phase_scan, w_phi_extrema, Convention, DEFAULT_SCAN_POINTS};
use wpduality::tomography::{bootstrap_capacities, estimate_capacities, MleOptions};
use wpduality::{Error, Result};

#[derive(Parser)]
#[command(name = "wpduality", version, about = "Energy-capacity wave-particle duality for qubit batteries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Main,
    Appendix,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Main => Convention::MainText,
            ConventionArg::Appendix => Convention::Appendix,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Preset name (phi1..phi4, mixed) or state file; repeatable
    #[arg(long = "state")]
    states: Vec<String>,
    #[arg(long, value_enum, default_value = "appendix")]
    convention: ConventionArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mean coincidences per measurement axis
    #[arg(long, default_value_t = 16_000.0)]
    counts_per_axis: f64,
    /// Coincidence sets per axis
    #[arg(long, default_value_t = 100)]
    repeats: u32,
    /// Skip every random draw
    #[arg(long)]
    analytic_only: bool,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Unit energy in joules
    #[arg(long)]
    e_joules: Option<f64>,
}

impl Common {
    fn noise(&self) -> NoiseModel {
        NoiseModel::with_counts_per_axis(self.counts_per_axis, self.repeats, self.seed)
    }

    fn e_joules(&self) -> f64 {
        self.e_joules.unwrap_or(reference().e_joules.value)
    }

    fn states(&self) -> Result<Vec<NamedState>> {
        if self.states.is_empty() {
            return PRESET_NAMES.iter().map(|n| NamedState::preset(n)).collect();
        }
        self.states.iter().map(|s| NamedState::resolve(s)).collect()
    }

    fn single_state(&self) -> Result<NamedState> {
        match self.states.as_slice() {
            [one] => NamedState::resolve(one),
            [] => Err(Error::InvalidArgument("--state is required".into())),
            _ => Err(Error::InvalidArgument("exactly one --state is expected".into())),
        }
    }

    fn out_dir(&self) -> Result<Option<&Path>> {
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir).map_err(|e| Error::InvalidArgument(format!("{}: {e}", dir.display())))?;
        }
        Ok(self.out.as_deref())
    }

    fn config(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            states: self.states()?,
            convention: self.convention.into(),
            noise: self.noise(),
            analytic_only: self.analytic_only,
            output_dir: self.out.clone(),
            e_joules: self.e_joules(),
            scan_points: DEFAULT_SCAN_POINTS,
            bootstrap: DEFAULT_BOOTSTRAP,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form capacities and duality diagnostics of a state
    Capacities {
        #[command(flatten)]
        common: Common,
    },
    /// W_phi / E over a phase grid, as CSV
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_SCAN_POINTS)]
        points: usize,
    },
    /// Simulated coincidence counts, as CSV
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Maximum-likelihood reconstruction from a count file or simulated counts
    Tomo {
        #[command(flatten)]
        common: Common,
        /// Count file; when absent, counts are simulated from --state
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Bootstrap replicates for capacity error bars (0 disables)
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
    },
    /// Reproduce one of the three experiments
    Reproduce {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=5))]
        figure: u8,
        /// Re-run over this many seeds and report pass rates
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
        bootstrap: usize,
    },
    /// Randomised invariant sweep
    Proptest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n_states: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match dir {
        Some(d) => {
            let path = d.join(name);
            std::fs::write(&path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
        }
        None => Ok(()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Capacities { common } => {
            let dir = common.out_dir()?;
            let conv: Convention = common.convention.into();
            let mut docs = serde_json::Map::new();
            for st in common.states()? {
                let report = duality_check(&st.rho, &conv);
                let (wmax, wmin) = w_phi_extrema(&st.rho, &conv);
                let mut doc = serde_json::to_value(report.to_document(common.e_joules())).expect("serialisable");
                doc["w_max"] = wmax.into();
                doc["w_min"] = wmin.into();
                docs.insert(st.name, doc);
            }
            let text = json(&docs);
            print!("{text}");
            write_out(dir, "capacities.json", &text)?;
            Ok(true)
        }
        Command::Scan { common, points } => {
            let dir = common.out_dir()?;
            let st = common.single_state()?;
            let scan = phase_scan(&st.rho, &common.convention.into(), points)?;
            match dir {
                Some(d) => scan.save_csv(&d.join(format!("scan_{}.csv", st.name)))?,
                None => scan.write_csv(std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Simulate { common } => {
            let dir = common.out_dir()?;
            let st = common.single_state()?;
            let counts = simulate_counts(&st.rho, &common.noise())?;
            match dir {
                Some(d) => save_counts(&counts, &d.join(format!("counts_{}.csv", st.name)))?,
                None => write_counts_csv(&counts, std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Tomo {
            common,
            counts,
            bootstrap,
        } => {
            let dir = common.out_dir()?;
            let conv: Convention = common.convention.into();
            let (records, target) = match &counts {
                Some(path) => {
                    let target = match common.states.as_slice() {
                        [] => None,
                        _ => Some(common.single_state()?.rho),
                    };
                    (load_counts(path)?, target)
                }
                None => {
                    let st = common.single_state()?;
                    (simulate_counts(&st.rho, &common.noise())?, Some(st.rho))
                }
            };
            let opts = MleOptions {
                seed: common.seed,
                target,
                ..Default::default()
            };
            let (mut report, tomo) = estimate_capacities(&records, &conv, &opts)?;
            let boot = if bootstrap > 0 {
                let b = bootstrap_capacities(&records, bootstrap, &conv, common.seed)?;
                report.std_errors = Some(b.std_errors);
                Some(b)
            } else {
                None
            };
            let doc = serde_json::json!({
                "tomography": tomo.to_document(),
                "capacities": report.to_document(common.e_joules()),
                "bootstrap": boot,
                "noise": counts.is_none().then(|| common.noise()),
            });
            let text = json(&doc);
            print!("{text}");
            write_out(dir, "tomography.json", &text)?;
            Ok(tomo.converged)
        }
        Command::Reproduce {
            common,
            figure,
            trials,
            bootstrap,
        } => {
            common.out_dir()?;
            let mut cfg = common.config()?;
            cfg.bootstrap = bootstrap;
            match trials {
                Some(n) => {
                    let t = run_trials(figure, &cfg, n)?;
                    let text = json(&t);
                    print!("{text}");
                    write_out(cfg.output_dir.as_deref(), &format!("figure{figure}_trials.json"), &text)?;
                    Ok(t.passed())
                }
                None => {
                    let report = run_figure(figure, &cfg)?;
                    print!("{}", report.summary());
                    Ok(report.passed())
                }
            }
        }
        Command::Proptest { seed, n_states, out } => {
            let summary = run_property_suite(seed, n_states)?;
            let text = json(&summary);
            print!("{text}");
            if let Some(d) = &out {
                std::fs::create_dir_all(d).map_err(|e| Error::InvalidArgument(format!("{}: {e}", d.display())))?;
            }
            write_out(out.as_deref(), "proptest.json", &text)?;
            if let Some(f) = &summary.first_failure {
                eprintln!("first failure: {f}");
            }
            Ok(summary.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
