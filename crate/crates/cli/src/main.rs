use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pvsizing::config::RunConfig;
use pvsizing::pso::ConstraintSet;
use pvsizing::report::{self, PlanResult};
use pvsizing::scenario::{load_scenario, LoadedScenario, PlanOptimum, Scenario};

#[derive(Parser, Debug)]
#[command(name = "pvsizing", version, about = "Size and orient a rooftop PV array for maximum NPV")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Override the swarm seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Format of the summary printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize size and orientation for every tariff plan.
    Optimize,
    /// Metrics for one explicit configuration.
    Evaluate {
        #[arg(long)]
        plan: String,
        #[arg(long, allow_negative_numbers = true)]
        tilt: f64,
        #[arg(long, allow_negative_numbers = true)]
        azimuth: f64,
        #[arg(long)]
        panels: u32,
    },
    /// NPV against panel count at a fixed orientation.
    SweepSize {
        #[arg(long)]
        plan: String,
        /// Defaults to the optimized tilt for the plan.
        #[arg(long, allow_negative_numbers = true)]
        tilt: Option<f64>,
        /// Defaults to the optimized azimuth for the plan.
        #[arg(long, allow_negative_numbers = true)]
        azimuth: Option<f64>,
        #[arg(long, default_value_t = 0)]
        z_min: u32,
        /// Defaults to the configured panel limit.
        #[arg(long)]
        z_max: Option<u32>,
    },
    /// NPV over a tilt × azimuth grid at a fixed panel count.
    SweepOrientation {
        #[arg(long)]
        plan: String,
        /// Defaults to the optimized panel count for the plan.
        #[arg(long)]
        panels: Option<u32>,
        #[arg(long, default_value_t = 5.0)]
        tilt_step: f64,
        #[arg(long, default_value_t = 5.0)]
        azimuth_step: f64,
    },
    /// Ingest and check the meter, weather and tariff inputs.
    ValidateData,
}

struct Run {
    cfg: RunConfig,
    loaded: LoadedScenario,
    constraints: ConstraintSet,
    out: PathBuf,
    format: Format,
}

impl Run {
    fn scenario(&self) -> &Scenario {
        &self.loaded.scenario
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn optimize_plan(&self, plan: usize) -> pvsizing::Result<PlanOptimum> {
        self.scenario().optimize_plan(plan, &self.constraints, &self.cfg.swarm)
    }

    fn baseline(&self) -> pvsizing::Result<f64> {
        let base = self.optimize_plan(self.scenario().base_plan)?;
        Ok(report::baseline_npv(self.scenario(), std::slice::from_ref(&base)))
    }

    fn print_table(&self, rows: &[PlanResult]) {
        match self.format {
            Format::Csv => print!("{}", report::plan_table_csv(rows)),
            Format::Text => print!("{}", report::plan_table_text(rows)),
        }
    }

    fn write_tables(&self, rows: &[PlanResult]) -> Result<()> {
        self.write("report.csv", &report::plan_table_csv(rows))?;
        self.write("report.txt", &report::plan_table_text(rows))
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.swarm.seed = seed;
    }
    let loaded = load_scenario(&cfg)?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let run = Run {
        constraints: cfg.bounds.constraints(),
        cfg,
        loaded,
        out: cli.out,
        format: cli.format,
    };
    run.write("ingest_report.txt", &run.loaded.ingest_report())?;
    let s = run.scenario();

    match cli.command {
        Command::ValidateData => {
            print!("{}", run.loaded.ingest_report());
            println!("tariff plans: {} (base: {})", s.plans.len(), s.plans[s.base_plan].id);
        }
        Command::Optimize => {
            let optima = s.optimize_all(&run.constraints, &run.cfg.swarm)?;
            let rows = report::plan_results(s, &optima, &run.constraints)?;
            run.write_tables(&rows)?;
            run.write("convergence.csv", &report::convergence_csv(s, &optima))?;
            run.print_table(&rows);
        }
        Command::Evaluate {
            plan,
            tilt,
            azimuth,
            panels,
        } => {
            let p = s.plan_index(&plan)?;
            // bounds first, so an infeasible request fails before any optimization
            s.evaluate(p, tilt, azimuth, panels, &run.constraints, 0.0)?;
            let baseline = run.baseline()?;
            let row = report::plan_result(s, p, tilt, azimuth, panels, &run.constraints, baseline)?;
            run.write_tables(std::slice::from_ref(&row))?;
            match run.format {
                Format::Csv => run.print_table(std::slice::from_ref(&row)),
                Format::Text => print!("{}", describe(&row)),
            }
        }
        Command::SweepSize {
            plan,
            tilt,
            azimuth,
            z_min,
            z_max,
        } => {
            let p = s.plan_index(&plan)?;
            let (tilt, azimuth) = match (tilt, azimuth) {
                (Some(t), Some(a)) => (t, a),
                (t, a) => {
                    let o = run.optimize_plan(p)?;
                    (t.unwrap_or(o.tilt_deg), a.unwrap_or(o.azimuth_deg))
                }
            };
            let z_max = z_max.unwrap_or(run.cfg.bounds.constraints().panels.hi as u32);
            let rows = s.sweep_size(p, tilt, azimuth, z_min..=z_max);
            let csv = report::sweep_size_csv(&rows, s.panel.rated_power_w);
            run.write("sweep_size.csv", &csv)?;
            match run.format {
                Format::Csv => print!("{csv}"),
                Format::Text => {
                    println!("plan {plan}, tilt {tilt:.0}, azimuth {azimuth:.0}");
                    println!("{:>4}  {:>8}  {:>12}", "Z", "kW", "NPV");
                    for (z, npv) in &rows {
                        println!("{z:>4}  {:>8.2}  {npv:>12.2}", *z as f64 * s.panel.rated_power_w / 1000.0);
                    }
                }
            }
        }
        Command::SweepOrientation {
            plan,
            panels,
            tilt_step,
            azimuth_step,
        } => {
            anyhow::ensure!(tilt_step > 0.0 && azimuth_step > 0.0, "grid steps must be positive");
            let p = s.plan_index(&plan)?;
            let panels = match panels {
                Some(z) => z,
                None => run.optimize_plan(p)?.panels,
            };
            let b = run.constraints.bounds();
            let tilts = grid(b[0].lo, b[0].hi, tilt_step);
            let azimuths = grid(b[1].lo, b[1].hi, azimuth_step);
            let rows = s.sweep_orientation(p, panels, &tilts, &azimuths);
            let csv = report::sweep_orientation_csv(&rows);
            run.write("sweep_orientation.csv", &csv)?;
            match run.format {
                Format::Csv => print!("{csv}"),
                Format::Text => {
                    let best = rows.iter().max_by(|a, b| a.2.total_cmp(&b.2)).expect("non-empty grid");
                    println!(
                        "plan {plan}, {panels} panels: {} cells, best NPV {:.2} at tilt {:.0}, azimuth {:.0}",
                        rows.len(),
                        best.2,
                        best.0,
                        best.1
                    );
                    println!("grid written to {}", run.out.join("sweep_orientation.csv").display());
                }
            }
        }
    }
    Ok(())
}

fn describe(r: &PlanResult) -> String {
    let opt = |v: Option<f64>, scale: f64| v.map_or("-".to_string(), |x| format!("{:.2}", x * scale));
    format!(
        "plan          {}{}\nsize          {:.2} kW ({} panels)\ntilt          {:.0}\nazimuth       {:.0}\nNPV           {:.2}\nMIRR (%)      {}\npayback (yr)  {}\nplan saving   {:.2}\nviable        {}\n",
        r.plan_id,
        if r.is_base { " (base)" } else { "" },
        r.size_kw,
        r.panels,
        r.tilt_deg,
        r.azimuth_deg,
        r.npv,
        opt(r.mirr_annual, 100.0),
        opt(r.payback_years, 1.0),
        r.plan_saving,
        if r.viable { "yes" } else { "no" },
    )
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<pvsizing::Error>() {
        Some(e) if !e.is_validation() => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
