use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use adaptix::bench::{run_benchmark, BenchConfig};
use adaptix::kernels::{adapt, Checks, KernelParams};
use adaptix::mesh::{io, verify};
use adaptix::metric::MetricField;
use adaptix::runtime::ThreadTeam;

#[derive(Parser)]
#[command(name = "adaptix", version, about = "Parallel anisotropic 2D mesh adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckLevel {
    None,
    Phases,
    Rounds,
}

impl From<CheckLevel> for Checks {
    fn from(c: CheckLevel) -> Checks {
        match c {
            CheckLevel::None => Checks::None,
            CheckLevel::Phases => Checks::Phases,
            CheckLevel::Rounds => Checks::Rounds,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic time-dependent benchmark.
    Bench {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Calibrate eta towards this steady-state element count first.
        #[arg(long = "target-elems")]
        target_elems: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a VTK snapshot per step (needs --out).
        #[arg(long)]
        vtk: bool,
        #[arg(long, default_value_t = 1e-3)]
        hmin: f64,
        #[arg(long, default_value_t = 0.5)]
        hmax: f64,
        #[arg(long, default_value_t = 1e-2)]
        eta: f64,
        /// Period of the synthetic field [default: steps].
        #[arg(long)]
        period: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random displacement of interior initial vertices, in grid spacings.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// 1-thread baseline.csv for efficiency [default: OUT/baseline.csv].
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CheckLevel::Phases)]
        checks: CheckLevel,
    },
    /// Check a mesh file for conformity.
    Verify { file: PathBuf },
    /// Adapt a mesh to a per-vertex metric (CSV of m00,m01,m11).
    Adapt {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = CheckLevel::Phases)]
        checks: CheckLevel,
    },
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

fn run(cli: Cli) -> adaptix::Result<bool> {
    match cli.command {
        Command::Bench {
            n,
            steps,
            threads,
            target_elems,
            out,
            vtk,
            hmin,
            hmax,
            eta,
            period,
            seed,
            jitter,
            baseline,
            checks,
        } => {
            if vtk && out.is_none() {
                eprintln!("warning: --vtk has no effect without --out");
            }
            let config = BenchConfig {
                n,
                steps,
                threads,
                period,
                eta,
                h_min: hmin,
                h_max: hmax,
                target_elements: target_elems,
                out,
                vtk,
                jitter,
                seed,
                baseline,
                kernel: KernelParams {
                    checks: checks.into(),
                    ..KernelParams::default()
                },
            };
            let report = run_benchmark(&config)?;
            if let Some(cal) = &report.calibration {
                println!(
                    "calibration: eta = {:.6e} -> {} elements (target {}, {} passes)",
                    cal.eta, cal.elements, cal.target, cal.passes
                );
            }
            for s in &report.steps {
                println!(
                    "step {:3}  t = {:8.3}  elements {:8}  mean q {:.3}  in band {:5.1}%  adapt {:8.3} s",
                    s.step,
                    s.t,
                    s.adapt.elements,
                    s.adapt.quality.mean,
                    100.0 * s.in_band,
                    s.adapt.total.as_secs_f64()
                );
            }
            println!("mean adapt time per step: {:.4} s", report.mean_adapt_seconds());
            for note in &report.notes {
                println!("note: {note}");
            }
            let ok = report.all_checks_passed();
            println!("invariant checks: {}", if ok { "passed" } else { "FAILED" });
            Ok(ok)
        }
        Command::Verify { file } => {
            let mesh = io::read_native(&file)?;
            let report = verify(&mesh);
            if report.is_empty() {
                println!(
                    "{}: conforming ({} vertices, {} elements)",
                    file.display(),
                    mesh.alive_vertex_count(),
                    mesh.alive_element_count()
                );
                Ok(true)
            } else {
                println!("{}: {report}", file.display());
                Ok(false)
            }
        }
        Command::Adapt {
            mesh,
            metric,
            out,
            threads,
            checks,
        } => {
            let mut m = io::read_native(&mesh)?;
            let input = verify(&m);
            if !input.is_empty() {
                println!("{}: input is not conforming: {input}", mesh.display());
                return Ok(false);
            }
            let defaults = BenchConfig::default();
            let mut field = MetricField::read_csv(&metric, defaults.eta, defaults.h_min, defaults.h_max)?;
            if field.len() != m.vertex_count() {
                return Err(adaptix::AdaptError::Config(format!(
                    "metric has {} tensors but the mesh has {} vertices",
                    field.len(),
                    m.vertex_count()
                )));
            }
            let team = ThreadTeam::new(threads)?;
            let params = KernelParams {
                checks: checks.into(),
                ..KernelParams::default()
            };
            let report = adapt(&team, &mut m, &mut field, &params)?;
            io::write_native(&m, &out)?;
            let ok = verify(&m).is_empty() && report.ownership_violations() == 0;
            println!(
                "{} elements, {} vertices, mean quality {:.3}, {} iterations{}",
                report.elements,
                report.vertices,
                report.quality.mean,
                report.iterations,
                if report.converged { "" } else { " (iteration limit)" }
            );
            Ok(ok)
        }
    }
}
