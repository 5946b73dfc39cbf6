//! Command-line front end: spec ingestion, family construction, sweeps,
//! flexion tracking, rigidity reports, and volume verification.
//!
//! Exit codes: 0 on success (and when a `verify` verdict matches the
//! expectation), 1 when a verify verdict mismatches, 2 on any error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod files;
mod reports;

use files::{load_configuration, load_family, FamilyFile};
use flexilab::families::Flexion;

#[derive(Parser)]
#[command(
    name = "flexcli",
    about = "Flexible polyhedra: construct families, sweep and track flexions, verify volume constancy",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expectation {
    Constant,
    NonConstant,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    Euclid,
    Sphere,
    Hyperbolic,
}

impl Space {
    fn name(self) -> &'static str {
        match self {
            Space::Euclid => "euclid",
            Space::Sphere => "sphere",
            Space::Hyperbolic => "hyperbolic",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    ConeSum,
    MonteCarlo,
    Schlafli,
}

#[derive(Args)]
struct SweepRange {
    /// Start of the parameter interval (family default when omitted).
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// End of the parameter interval (family default when omitted).
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of samples, at least 2.
    #[arg(long, default_value_t = 81)]
    steps: usize,
}

impl SweepRange {
    fn resolve<F: flexilab::families::Flexion>(&self, family: &F) -> Result<(f64, f64, usize)> {
        let (dlo, dhi) = family.default_range();
        let from = self.from.unwrap_or(dlo);
        let to = self.to.unwrap_or(dhi);
        if self.steps < 2 {
            bail!("--steps must be at least 2");
        }
        if from == to {
            bail!("sweep range is empty");
        }
        Ok((from, to, self.steps))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate and realize a family spec, or search for an admissible
    /// elliptic spec.
    Construct {
        /// Family spec JSON.
        #[arg(long, conflicts_with = "search")]
        spec: Option<PathBuf>,
        /// Search for an admissible elliptic spec instead of reading one.
        #[arg(long, value_name = "N")]
        search: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        attempts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a family over a parameter sweep and export the trajectory.
    Sweep {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        range: SweepRange,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Track a flexion from a seed configuration by continuation.
    Track {
        /// Configuration JSON: space, mesh, coordinates.
        #[arg(long)]
        config: PathBuf,
        /// Model space (overrides the file's "space" entry).
        #[arg(long, value_enum)]
        space: Option<Space>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Corrector tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Sign of the first predictor step.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        direction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Infinitesimal rigidity report at a configuration.
    Rigidity {
        #[arg(long)]
        config: PathBuf,
        /// Model space (overrides the file's "space" entry).
        #[arg(long, value_enum)]
        space: Option<Space>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verification commands with expected verdicts.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// Volume of a single configuration or family sample.
    Volume {
        #[arg(long, conflicts_with = "family")]
        config: Option<PathBuf>,
        /// Model space (overrides the file's "space" entry).
        #[arg(long, value_enum)]
        space: Option<Space>,
        #[arg(long, requires = "at")]
        family: Option<PathBuf>,
        /// Family parameter to evaluate at.
        #[arg(long, allow_negative_numbers = true)]
        at: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::ConeSum)]
        method: Method,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Sweep a family and check volume constancy.
    Bellows {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        range: SweepRange,
        #[arg(long, value_enum, default_value_t = Method::ConeSum)]
        method: Method,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Verdict tolerance (method default when omitted).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Expectation::Constant)]
        expect: Expectation,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check the tangent structure of a cross-polytope family: parameter
    /// proportionality for rational specs, dn-profiles and biquadratic
    /// coefficient matching for elliptic ones.
    Biquad {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        range: SweepRange,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Construct {
            spec,
            search,
            seed,
            attempts,
            out,
        } => {
            let report = match (spec, search) {
                (Some(path), None) => {
                    let file = files::read_family_file(&path)?;
                    let family = load_family(&path)?;
                    reports::construct_report(&file, &family)?
                }
                (None, Some(n)) => {
                    let spec = flexilab::families::search_elliptic_spec(n, seed, attempts)
                        .ok_or_else(|| {
                            anyhow!("no admissible elliptic spec found in {attempts} attempts")
                        })?;
                    let file = FamilyFile::Elliptic {
                        n,
                        k: spec.k,
                        sigma: spec.sigma.clone(),
                        lambda: spec.lambda.clone(),
                    };
                    let family = file.clone().into_family()?;
                    reports::construct_report(&file, &family)?
                }
                _ => bail!("construct needs exactly one of --spec or --search"),
            };
            write_output(out.as_deref(), &report)?;
            Ok(0)
        }
        Command::Sweep {
            family,
            range,
            out,
            format,
        } => {
            let file = files::read_family_file(&family)?;
            let fam = load_family(&family)?;
            let (from, to, steps) = range.resolve(&fam)?;
            let sweep = flexilab::families::sweep_family(&fam, from, to, steps)?;
            let content = match format {
                Format::Json => reports::sweep_json(&file, &fam, &sweep)?,
                Format::Csv => reports::sweep_csv(&fam, &sweep),
            };
            write_output(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Track {
            config,
            space,
            steps,
            step,
            tol,
            direction,
            out,
            format,
        } => {
            if tol <= 0.0 {
                bail!("--tol must be positive");
            }
            let poly = load_configuration(&config, space.map(Space::name))?;
            let (system, seed) = flexilab::confspace::system_from_configuration(&poly, None)?;
            let opts = flexilab::confspace::TrackOptions {
                step,
                max_steps: steps,
                corrector_tol: tol,
                first_direction: direction,
                ..Default::default()
            };
            let path = flexilab::confspace::track_flex(&system, &seed, opts)?;
            let content = match format {
                Format::Json => reports::track_json(&system, &path)?,
                Format::Csv => reports::track_csv(&system, &path),
            };
            write_output(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Rigidity { config, space, out } => {
            let file = files::read_config_file(&config)?;
            let content = if file.coordinates.is_some() {
                let poly = load_configuration(&config, space.map(Space::name))?;
                let (system, seed) = flexilab::confspace::system_from_configuration(&poly, None)?;
                let report = flexilab::confspace::rigidity_test(&system, &seed)?;
                reports::rigidity_json(&system, Some(&report))?
            } else {
                // Mesh + lengths only: report the constraint system shape.
                let lengths_map = file
                    .lengths
                    .clone()
                    .ok_or_else(|| anyhow!("configuration needs coordinates or lengths"))?;
                let complex = std::sync::Arc::new(
                    file.mesh.clone().into_complex().context("validating the mesh")?,
                );
                let n = complex.dim() + 1;
                let space = files::resolve_space(space.map(Space::name), &file, n)?;
                let lengths = files::parse_lengths(&complex, &lengths_map)?;
                let system =
                    flexilab::confspace::build_constraint_system(complex, lengths, space, None)?;
                reports::rigidity_json(&system, None)?
            };
            write_output(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Verify { what } => match what {
            VerifyCommand::Bellows {
                family,
                range,
                method,
                samples,
                seed,
                tol,
                expect,
                out,
                format,
            } => {
                let fam = load_family(&family)?;
                let (from, to, steps) = range.resolve(&fam)?;
                if let Some(t) = tol {
                    if t <= 0.0 {
                        bail!("--tol must be positive");
                    }
                }
                let method = match method {
                    Method::ConeSum => flexilab::volumetrics::VolumeMethod::ConeSum,
                    Method::MonteCarlo => {
                        flexilab::volumetrics::VolumeMethod::MonteCarlo { samples, seed }
                    }
                    Method::Schlafli => flexilab::volumetrics::VolumeMethod::SchlafliDelta,
                };
                let report =
                    flexilab::volumetrics::bellows_report(&fam, from, to, steps, method, tol)?;
                let content = match format {
                    Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                    Format::Csv => report.to_csv(),
                };
                write_output(out.as_deref(), &content)?;
                let expected = match expect {
                    Expectation::Constant => flexilab::volumetrics::Verdict::Constant,
                    Expectation::NonConstant => flexilab::volumetrics::Verdict::NonConstant,
                };
                if report.verdict == expected {
                    Ok(0)
                } else {
                    eprintln!(
                        "verdict mismatch: report says {:?}, expected {:?}",
                        report.verdict, expected
                    );
                    Ok(1)
                }
            }
            VerifyCommand::Biquad {
                family,
                range,
                tol,
                out,
            } => {
                let file = files::read_family_file(&family)?;
                let fam = load_family(&family)?;
                let (from, to, steps) = range.resolve(&fam)?;
                let (content, ok) = reports::biquad_report(&file, &fam, from, to, steps, tol)?;
                write_output(out.as_deref(), &content)?;
                if ok {
                    Ok(0)
                } else {
                    eprintln!("tangent structure checks failed (see report)");
                    Ok(1)
                }
            }
        },
        Command::Volume {
            config,
            space,
            family,
            at,
            method,
            samples,
            seed,
            out,
        } => {
            let poly = match (config, family) {
                (Some(path), None) => load_configuration(&path, space.map(Space::name))?,
                (None, Some(path)) => {
                    let fam = load_family(&path)?;
                    fam.eval(at.expect("clap enforces --at"))?
                }
                _ => bail!("volume needs exactly one of --config or --family"),
            };
            let content = reports::volume_json(&poly, method, samples, seed)?;
            write_output(out.as_deref(), &content)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
