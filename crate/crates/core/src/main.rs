use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sorption_fv::config::{parse_config, ConfigError, RunPlan};
use sorption_fv::experiments::{
    exact_reference, fine_grid_oracle, preset, run_preset, run_study, Expectation, PresetReport, Reference, RunOptions, Study,
    StudyReport, PRESET_NAMES,
};
use sorption_fv::output::{summary_lines, write_profile_csv, write_report};
use sorption_fv::setup::Profile;
use sorption_fv::SolverError;

/// Overrides the default output directory.
const OUT_ENV: &str = "SORPTION_FV_OUT";

const EXIT_INVALID: u8 = 1;
const EXIT_SOLVER: u8 = 2;

#[derive(Parser)]
#[command(name = "sorption-fv", version, about = "Finite-volume solvers for sorption-transport equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the resolutions of a TOML configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment preset.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run studies one after another (the default; kept for scripts).
        #[arg(long, conflicts_with = "parallel")]
        sequential_timing: bool,
        /// Run studies concurrently; CPU times then overlap.
        #[arg(long)]
        parallel: bool,
        /// Only the first n rungs of each ladder.
        #[arg(long)]
        rungs: Option<usize>,
    },
    /// Print the preset names.
    ListPresets,
    /// Fine-grid reference solution for the resolutions of a configuration.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        refine: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Invalid(String),
    Solver(String),
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidParameter(_) | SolverError::Io { .. } => Self::Invalid(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }
}

fn out_dir(out: Option<PathBuf>, from_config: Option<&str>) -> PathBuf {
    out.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| from_config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_plan(path: &Path) -> Result<RunPlan, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let describe = |e: ConfigError| Failure::Invalid(format!("{}: {e}", path.display()));
    parse_config(&text).map_err(describe)?.plan().map_err(describe)
}

fn print_study(s: &StudyReport) {
    println!("{}", s.label);
    println!("  {:>6} {:>6} {:>12} {:>6} {:>10} {:>8}", "M", "N", "E", "EOC", "cpu [s]", "C");
    for r in &s.rows {
        let e = r.error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into());
        let eoc = r.eoc.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        println!(
            "  {:>6} {:>6} {:>12} {:>6} {:>10.3} {:>8.3}",
            r.cells, r.steps, e, eoc, r.cpu_seconds, r.courant
        );
    }
}

fn finish(report: &PresetReport, dir: &Path) -> Result<(), Failure> {
    for s in &report.studies {
        print_study(s);
    }
    let lines = summary_lines(&report.studies);
    for l in &lines {
        println!("{l}");
    }
    write_report(dir, report)?;
    println!("artifacts written to {}", dir.display());
    if report.passed() {
        Ok(())
    } else {
        let failed = lines.iter().filter(|l| l.starts_with("FAIL")).count();
        Err(Failure::Solver(format!("{failed} check(s) failed")))
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let plan = load_plan(config)?;
    let study = Study {
        label: plan.spec.scheme.scheme.name().to_string(),
        spec: plan.spec.clone(),
        ladder: plan.ladder.clone(),
        reference: plan.reference,
        targets: None,
        expect: Expectation::Converge,
        nominal_courant: None,
        mesh_unit: None,
    };
    let report = run_study(&study, None);
    let mut profiles = BTreeMap::new();
    for (&(m, _), outcome) in plan.ladder.iter().zip(&report.outcomes) {
        if let Ok(o) = outcome {
            profiles.insert(format!("{}-M{m}", study.label), o.profile.clone());
        }
        let initial = plan.spec.initial_profile(m)?;
        if plan.reference == Reference::Exact {
            let u = exact_reference(&plan.spec, m)?;
            let q = u.iter().map(|&v| plan.spec.iso.f_ext(v)).collect();
            profiles.insert(format!("exact-M{m}"), with_values(initial.clone(), u, q));
        }
        profiles.insert(format!("initial-M{m}"), initial);
    }
    let report = PresetReport {
        name: "run".into(),
        studies: vec![report],
        profiles,
    };
    finish(&report, &out_dir(out, plan.output_dir.as_deref()))
}

fn cmd_preset(name: &str, out: Option<PathBuf>, parallel: bool, rungs: Option<usize>) -> Result<(), Failure> {
    let p = preset(name).ok_or_else(|| {
        Failure::Invalid(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")))
    })?;
    let report = run_preset(
        &p,
        RunOptions {
            parallel,
            max_rungs: rungs,
        },
    )?;
    finish(&report, &out_dir(out, None).join(name))
}

/// `template` with its `u` and `q` columns replaced.
fn with_values(template: Profile, u: Vec<f64>, q: Vec<f64>) -> Profile {
    match template {
        Profile::OneD { x, .. } => Profile::OneD { x, u, q },
        Profile::TwoD { x, y, .. } => Profile::TwoD { x, y, u, q },
    }
}

fn cmd_oracle(config: &Path, refine: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    let plan = load_plan(config)?;
    let dir = out_dir(out, plan.output_dir.as_deref());
    for &(m, n) in &plan.ladder {
        let u = fine_grid_oracle(&plan.spec, m, n, refine)?;
        let q = u.iter().map(|&v| plan.spec.iso.f_ext(v)).collect();
        let profile = with_values(plan.spec.initial_profile(m)?, u, q);
        let path = dir.join(format!("oracle-M{m}-r{refine}.csv"));
        write_profile_csv(&path, &profile)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Preset {
            name,
            out,
            sequential_timing: _,
            parallel,
            rungs,
        } => cmd_preset(&name, out, parallel, rungs),
        Command::ListPresets => {
            for name in PRESET_NAMES {
                let p = preset(name).expect("listed presets exist");
                println!("{name:<16} {}", p.description);
            }
            Ok(())
        }
        Command::Oracle { config, refine, out } => cmd_oracle(&config, refine, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
