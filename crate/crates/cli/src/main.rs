//! `cml4`: exact verification and orbit simulation for the reduced
//! four-site coupled map lattice.

mod export;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cml4::explore::{self, Face, SimulationConfig, StartMode};
use cml4::scalar::{parse_scalar, Scalar};
use cml4::verify::RegionName;

#[derive(Parser, Debug)]
#[command(name = "cml4", version, about = "Invariant sets of a coupled map lattice on the 3-torus")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress progress and summaries on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a proposition or a region property exactly.
    Verify(VerifyArgs),
    /// Critical coupling values and their bracket.
    CriticalValues {
        /// Width of the final bisection bracket.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Simulate random orbits and record region occupancy.
    Simulate(SimulateArgs),
    /// Occupancy statistics over a grid of coupling values.
    Scan(ScanArgs),
    /// Dynamics restricted to an invariant face of the cube.
    Faces(FacesArgs),
    /// Write a region as OBJ meshes or JSON half-spaces.
    Export(ExportArgs),
    /// The 26 continuity domains and their offsets.
    DomainTable {
        /// Also give each branch image at this coupling.
        #[arg(long, value_parser = rational)]
        eps: Option<Scalar>,
    },
    /// Generators, relations and equivariance of the symmetry group.
    SymmetryTable {
        #[arg(long, value_parser = rational, default_value = "41/100")]
        eps: Scalar,
        /// Random rational points per generator for the equivariance check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// The Lorenz map: period-two point, mixing components, thresholds.
    Lorenz {
        #[arg(long, value_parser = rational)]
        eps: Scalar,
        /// Iterate the map from this point.
        #[arg(long, value_parser = rational)]
        from: Option<Scalar>,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    target: VerifyTarget,
    /// Rational coupling, `p/q` or a finite decimal.
    #[arg(long, value_parser = rational)]
    eps: Scalar,
    /// Region for `stabilizer`.
    #[arg(long, value_parser = region_name, default_value = "A")]
    region: RegionName,
    /// Check every member directly instead of one per stabilizer class.
    #[arg(long)]
    full: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VerifyTarget {
    Prop1,
    Prop2,
    /// `𝒜` and `𝒮` meet in measure zero.
    Disjoint,
    /// Orbit and stabilizer of a region under the full group.
    Stabilizer,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = 1_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 100)]
    orbits: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Discard orbits coming this close to a singularity plane.
    #[arg(long, default_value_t = 1e-12)]
    margin: f64,
    /// Slack for region membership.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// `uniform`, a region name (`A`, `S`, `P0`, `P1`, `P2`) or a point `p,q,r`.
    #[arg(long, default_value = "uniform", value_parser = start_mode)]
    start: StartMode,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self, eps: f64) -> SimulationConfig {
        SimulationConfig {
            eps,
            steps: self.steps,
            burn_in: self.burn_in,
            orbit_count: self.orbits,
            rng_seed: self.seed,
            singularity_margin: self.margin,
            membership_tol: self.tol,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.41)]
    eps: f64,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, default_value_t = 0.25)]
    eps_from: f64,
    #[arg(long, default_value_t = 0.499)]
    eps_to: f64,
    #[arg(long, default_value_t = 100)]
    eps_points: usize,
    /// Per-ε summary CSV; records go to `--out`.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args, Debug)]
struct FacesArgs {
    #[arg(long, value_parser = face)]
    face: Face,
    /// Coupling; decimal or `p/q`, used exactly for the polygon checks.
    #[arg(long, value_parser = rational)]
    eps: Scalar,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 40)]
    orbits: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// JSON region of dimension 2 to check for exact invariance.
    #[arg(long)]
    polygon: Option<PathBuf>,
    /// Check the section of a named region by the face.
    #[arg(long, value_parser = region_name)]
    section: Option<RegionName>,
    /// Include every orbit hull in the output.
    #[arg(long)]
    orbits_detail: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExportFormat {
    Obj,
    Json,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long, value_parser = region_name)]
    region: RegionName,
    #[arg(long, value_parser = rational)]
    eps: Scalar,
    #[arg(long, value_enum, default_value = "json")]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational(s: &str) -> Result<Scalar, String> {
    parse_scalar(s).map_err(|e| e.to_string())
}

fn region_name(s: &str) -> Result<RegionName, String> {
    s.parse().map_err(|e: cml4::verify::VerifyError| e.to_string())
}

fn face(s: &str) -> Result<Face, String> {
    s.parse().map_err(|e: explore::ExploreError| e.to_string())
}

fn start_mode(s: &str) -> Result<StartMode, String> {
    if s.eq_ignore_ascii_case("uniform") {
        return Ok(StartMode::Uniform);
    }
    if let Ok(name) = s.parse::<RegionName>() {
        return Ok(StartMode::Inside(name));
    }
    let coords: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected uniform, a region name or p,q,r; got {s:?}"))?;
    match coords[..] {
        [p, q, r] if coords.iter().all(|c| (0.0..1.0).contains(c)) => Ok(StartMode::Fixed([p, q, r])),
        _ => Err(format!("a start point needs three coordinates in [0, 1); got {s:?}")),
    }
}

/// What a subcommand found: success or a false verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(b: bool) -> Self {
        if b {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

pub struct Ctx {
    pub json: bool,
    pub quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let ctx = Ctx { json: cli.json, quiet: cli.quiet };
    match cli.command {
        Command::Verify(a) => report::verify(&ctx, a.target, &a.eps, a.region, a.full),
        Command::CriticalValues { tol } => {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("--tol must be positive");
            }
            report::critical_values(&ctx, tol)
        }
        Command::Simulate(a) => {
            let cfg = a.sim.config(a.eps);
            let records = explore::simulate(&cfg, &a.sim.start)?;
            write_out(a.sim.out.as_ref(), &explore::records_to_csv(&records))?;
            let summary = explore::summarize(a.eps, &records);
            if ctx.json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                ctx.note(report::summary_line(&summary));
            }
            Ok(Outcome::Pass)
        }
        Command::Scan(a) => {
            if a.eps_points == 0 {
                bail!("--eps-points must be positive");
            }
            let grid = explore::linspace(a.eps_from, a.eps_to, a.eps_points);
            let cfg = a.sim.config(grid[0]);
            cfg.validate()?;
            let res = explore::scan_eps(&grid, &cfg, &a.sim.start)?;
            write_out(a.sim.out.as_ref(), &explore::records_to_csv(&res.records))?;
            if let Some(p) = &a.summary {
                std::fs::write(p, report::summaries_csv(&res.summaries)?)
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if ctx.json {
                println!("{}", serde_json::to_string_pretty(&res.summaries)?);
            } else {
                for s in &res.summaries {
                    ctx.note(report::summary_line(s));
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Faces(a) => report::faces(&ctx, a),
        Command::Export(a) => {
            let built = cml4::verify::build_region(a.region, &a.eps)?;
            let text = match a.format {
                ExportFormat::Obj => export::to_obj(&built.region)?,
                ExportFormat::Json => built.region.to_json(),
            };
            write_out(a.out.as_ref(), &text)?;
            Ok(Outcome::Pass)
        }
        Command::DomainTable { eps } => report::domain_table(&ctx, eps.as_ref()),
        Command::SymmetryTable { eps, samples, seed } => report::symmetry_table(&ctx, &eps, samples, seed),
        Command::Lorenz { eps, from, n } => report::lorenz(&ctx, &eps, from.as_ref(), n),
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_modes() {
        assert!(matches!(start_mode("uniform"), Ok(StartMode::Uniform)));
        assert!(matches!(start_mode("a"), Ok(StartMode::Inside(RegionName::A))));
        assert!(matches!(start_mode("0.1, 0.2,0.3"), Ok(StartMode::Fixed(_))));
        assert!(start_mode("0.1,0.2").is_err());
        assert!(start_mode("0.1,0.2,1.5").is_err());
    }

    #[test]
    fn rational_flags_are_exact() {
        assert_eq!(rational("41/100").unwrap(), rational("0.41").unwrap());
        assert!(rational("abc").is_err());
        assert_eq!(cml4::scalar::to_f64(&rational("1/4").unwrap()), 0.25);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
