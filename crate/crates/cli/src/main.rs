use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spx_core::design::{ess_moment_match, run_adaptive_trial};
use spx_core::error::Category;
use spx_core::inference::{self, summarize, Method};
use spx_core::io::report::{emit_report, render, render_records, write_file, DesignReport, FitReport, Format, Report};
use spx_core::io::{Mode, RunConfig};
use spx_core::sim::{rate_grid, run_scenario, sweep_observed_rate, SimSetup};
use spx_core::{Error, Result};

const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "spx", version, about = "Historical-control borrowing with the SPx prior")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Fit a control-arm model to the configured new trial.
    Fit,
    /// Effective sample size of the fitted posterior.
    Ess,
    /// Interim analysis: size Stage 2 from Stage-1 data.
    Design,
    /// Replicated-trial simulation of one scenario.
    Simulate,
    /// Submodel weights and Stage-2 size over a grid of interim rates.
    Sweep,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Fit => Mode::Fit,
            Command::Ess => Mode::Ess,
            Command::Design => Mode::Design,
            Command::Simulate => Mode::Simulate,
            Command::Sweep => Mode::Sweep,
        }
    }
}

#[derive(Args)]
struct Opts {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// spx, rmap or independent.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    #[arg(long = "n-max", global = true)]
    n_max: Option<u32>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Simulation scenario preset, 1-4.
    #[arg(long, global = true)]
    scenario: Option<u8>,
    /// fixed or adaptive.
    #[arg(long, global = true)]
    design: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error[{}]: {}", category.as_str(), one_line(&e));
            ExitCode::from(exit_code(category))
        }
    }
}

fn exit_code(c: Category) -> u8 {
    match c {
        Category::Config => 3,
        Category::Data => 4,
        Category::Runtime => 5,
    }
}

fn one_line(e: &Error) -> String {
    e.to_string().replace('\n', " ")
}

fn load_config(opts: &Opts) -> Result<RunConfig> {
    let mut cfg = match &opts.config {
        // an unreadable config file is a configuration problem, not a runtime one
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Io { .. } => Error::InvalidConfig(e.to_string()),
            other => other,
        })?,
        None => RunConfig::default(),
    };
    if let Some(m) = &opts.model {
        cfg.model = m.parse()?;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(r) = opts.replicates {
        cfg.simulate.replicates = r;
    }
    if let Some(n) = opts.n_max {
        cfg.design.n_max = Some(n);
    }
    if let Some(o) = &opts.out {
        cfg.paths.output = Some(o.clone());
    }
    if let Some(s) = opts.scenario {
        cfg.simulate.scenario = Some(s);
    }
    if let Some(d) = &opts.design {
        cfg.simulate.design = d.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(&cli.opts)?;
    let mode = cli.command.mode();
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(Error::InvalidConfig(format!(
                "config is for mode '{}' but '{}' was requested",
                m.name(),
                mode.name()
            )));
        }
    }
    let out = cfg.paths.output.clone().unwrap_or_else(|| PathBuf::from("spx-out"));
    match mode {
        Mode::Fit | Mode::Ess => {
            let report = fit_report(&cfg, mode)?;
            let stem = mode.name();
            let report = Report::Fit(report);
            write_all(&report, &out, stem)?;
            if let Report::Fit(f) = &report {
                if mode == Mode::Ess {
                    println!("n_eff = {:.1}", f.ess);
                }
            }
            print!("{}", render(&report, Format::Table)?);
        }
        Mode::Design => {
            let report = Report::Design(design_report(&cfg)?);
            write_all(&report, &out, "design")?;
            print!("{}", render(&report, Format::Table)?);
        }
        Mode::Simulate => {
            let sc = cfg.scenario_config()?;
            let setup = SimSetup {
                scenario: sc,
                method: cfg.model,
                design: cfg.simulate.design,
                dc: cfg.design.resolve(200)?,
                settings: cfg.settings(),
                mc: cfg.mcmc_for(Mode::Simulate),
            };
            let result = run_scenario(&setup, cfg.simulate.replicates, cfg.seed)?;
            let results = vec![result];
            write_file(&out, "replicates.csv", &render_records(&results)?)?;
            let report = Report::Simulation(results);
            write_all(&report, &out, "oc")?;
            print!("{}", render(&report, Format::Table)?);
        }
        Mode::Sweep => {
            let report = Report::Sweep(sweep(&cfg)?);
            write_all(&report, &out, "sweep")?;
            print!("{}", render(&report, Format::Table)?);
        }
    }
    Ok(())
}

fn write_all(report: &Report, dir: &Path, stem: &str) -> Result<()> {
    for f in Format::ALL {
        emit_report(report, f, dir, stem)?;
    }
    Ok(())
}

fn require_outcome(cfg: &RunConfig) -> Result<spx_core::model::Dataset> {
    let (d, _) = cfg.dataset()?;
    if d.new_trial.outcome.is_none() {
        return Err(Error::InvalidConfig("this command needs [new_trial] y and n".into()));
    }
    Ok(d)
}

fn fit_report(cfg: &RunConfig, mode: Mode) -> Result<FitReport> {
    let d = require_outcome(cfg)?;
    let o = d.outcome()?;
    let draws = inference::fit(cfg.model, &d, &cfg.settings(), &cfg.mcmc_for(mode))?;
    Ok(FitReport {
        model: cfg.model.name().into(),
        y: o.y,
        n: o.n,
        summary: summarize(&draws, 0.95)?,
        rb_weights: draws.rb_weights,
        ess: ess_moment_match(&draws, o.n)?,
        acceptance: draws.diagnostics.acceptance.clone(),
    })
}

fn design_report(cfg: &RunConfig) -> Result<DesignReport> {
    let d = require_outcome(cfg)?;
    let o = d.outcome()?;
    let mut overrides = cfg.design;
    if overrides.n_stage1.is_none() {
        overrides.n_stage1 = Some(o.n);
    }
    let dc = overrides.resolve(2 * o.n)?;
    let mc = cfg.mcmc_for(Mode::Design);
    let (plan, draws) = run_adaptive_trial(&d, cfg.model, &cfg.settings(), &dc, &mc)?;
    Ok(DesignReport {
        fit: FitReport {
            model: cfg.model.name().into(),
            y: o.y,
            n: o.n,
            summary: summarize(&draws, 0.95)?,
            rb_weights: draws.rb_weights,
            ess: plan.ess,
            acceptance: draws.diagnostics.acceptance.clone(),
        },
        plan,
    })
}

fn sweep(cfg: &RunConfig) -> Result<Vec<spx_core::sim::SweepRow>> {
    let (d, _) = cfg.dataset()?;
    let s = cfg.sweep;
    let mut overrides = cfg.design;
    if overrides.n_stage1.is_none() {
        overrides.n_stage1 = Some(s.n);
    }
    let dc = overrides.resolve(2 * s.n)?;
    let grid = rate_grid(s.start, s.end, s.step)?;
    let method: Method = cfg.model;
    sweep_observed_rate(&d, method, &cfg.settings(), &grid, s.n, &dc, &cfg.mcmc_for(Mode::Sweep), cfg.seed)
}
