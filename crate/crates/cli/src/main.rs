//! `midstar`: triangle geometry, star products and composition from the shell.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
//! 3 non-convergence, 4 input outside a geometric domain, 5 numerical
//! singularity, 6 a verification check failed.

mod config;
mod error;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use midstar_core::semiclassics::{compose, stationary_phase_estimate};
use midstar_core::starprod::{star_midpoint_form, star_with, QuadratureSpec, StarOptions, StarResult};
use midstar_core::triangles::{amplitude, area_from_corners, corners_from_midpoints, midpoints_from_corners};
use midstar_core::{CornerTriple, MidpointTriple, Point, Space, SpaceKind};
use serde_json::json;

use config::{coords, parse_numbers, parse_points, ExperimentConfig, FieldSpec, Form, GeneratingSpec, Suite};
use error::{exit, CliError, CliResult};
use output::{emit, num};

#[derive(Debug, Parser)]
#[command(name = "midstar", version, about = "Midpoint-triangle star products on R2, H2 and S2")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Model space: r2, h2 or s2.
    #[arg(long, global = true)]
    space: Option<SpaceKind>,
    /// Planck constant; on s2, 2/hbar must be an integer.
    #[arg(long, global = true)]
    hbar: Option<f64>,
    /// JSON experiment configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for quadrature (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Oriented symplectic area of a triangle from its corners.
    Area {
        /// Three points "x,y[,z];x,y[,z];x,y[,z]".
        #[arg(long)]
        corners: String,
    },
    /// Geodesic side midpoints of a triangle.
    Midpoints {
        #[arg(long)]
        corners: String,
    },
    /// Triangle corners recovered from side midpoints.
    Corners {
        #[arg(long)]
        midpoints: String,
    },
    /// Amplitude function at a midpoint triple "base;m';m''".
    Amplitude {
        #[arg(long)]
        points: String,
    },
    /// Star product of two fields at a point, as JSON.
    Star(StarArgs),
    /// Stationary-phase composition of two generating functions, as JSON.
    Compose {
        /// "a,b" (linear) or "h11,h12,h22,b1,b2,c" (quadratic).
        #[arg(long)]
        g1: Option<String>,
        #[arg(long)]
        g2: Option<String>,
        /// Evaluation point.
        #[arg(long)]
        m: Option<String>,
    },
    /// Seeded oracle checks, one CSV row per check.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Random cases per space.
        #[arg(long)]
        cases: Option<usize>,
    },
    /// One CSV row per refinement level of a star product.
    Convergence {
        #[command(flatten)]
        star: StarArgs,
        /// Report wall times as zero so that output is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Debug, Args)]
struct StarArgs {
    /// Evaluation point.
    #[arg(long)]
    m: Option<String>,
    /// First field as a JSON object, e.g. '{"kind":"bump","center":[0,0],"width":1}'.
    #[arg(long)]
    f1: Option<String>,
    #[arg(long)]
    f2: Option<String>,
    /// Nodes per axis on the finest level.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    /// Half-width of the integration boxes.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    stretch: Option<f64>,
    /// Fail when the refinement error exceeds this bound.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    form: Option<Form>,
}

struct Context {
    cfg: ExperimentConfig,
    space: Space,
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("midstar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let kind = cli.common.space.or(cfg.space).unwrap_or(SpaceKind::Euclidean2);
    let hbar = cli.common.hbar.or(cfg.hbar).unwrap_or(0.5);
    let space = Space::new(kind, hbar)?;
    let output = cli.common.output.clone().or_else(|| cfg.output.clone());
    let threads = cli.common.threads.or(cfg.threads);
    let seed = cli.common.seed.or(cfg.seed).unwrap_or(0);
    let ctx = Context { cfg, space, output };
    let work = move || dispatch(&ctx, cli.command, seed);
    match threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn dispatch(ctx: &Context, command: Command, seed: u64) -> CliResult<()> {
    let s = &ctx.space;
    let out = ctx.output.as_deref();
    match command {
        Command::Area { corners } => {
            let p = parse_points(s, &corners, 3)?;
            let area = area_from_corners(s, &CornerTriple::new(p[0], p[1], p[2]))?;
            emit(out, &format!("{}\n", num(area)))
        }
        Command::Midpoints { corners } => {
            let p = parse_points(s, &corners, 3)?;
            let m = midpoints_from_corners(s, &CornerTriple::new(p[0], p[1], p[2]))?;
            emit(out, &point_lines(s, &[m.alpha, m.beta, m.gamma]))
        }
        Command::Corners { midpoints } => {
            let p = parse_points(s, &midpoints, 3)?;
            let t = corners_from_midpoints(s, &MidpointTriple::new(p[0], p[1], p[2]))?;
            emit(out, &point_lines(s, &[t.a, t.b, t.c]))
        }
        Command::Amplitude { points } => {
            let p = parse_points(s, &points, 3)?;
            emit(out, &format!("{}\n", num(amplitude(s, &p[0], &p[1], &p[2])?)))
        }
        Command::Star(args) => {
            let (spec, form) = quadrature(ctx, &args)?;
            let m = eval_point(ctx, args.m.as_deref())?;
            let r = run_star(ctx, &args, &m, &spec, form)?;
            let record = json!({
                "space": s.kind().short_name(),
                "hbar": s.hbar(),
                "m": coords(&m, s.kind()),
                "value": {"re": r.value.re, "im": r.value.im},
                "refine_error": r.refine_error,
                "samples": r.samples_used,
                "spec": serde_json::to_value(&spec).map_err(|e| CliError::usage(e.to_string()))?,
            });
            emit(out, &format!("{}\n", output::json(&record)))
        }
        Command::Compose { g1, g2, m } => {
            let specs = ctx.cfg.generating.clone();
            let pick = |flag: Option<String>, i: usize| -> CliResult<GeneratingSpec> {
                match (flag, &specs) {
                    (Some(f), _) => GeneratingSpec::parse_flag(&f),
                    (None, Some(g)) => Ok(g[i].clone()),
                    (None, None) => {
                        Err(CliError::usage("compose needs --g1 and --g2 (or \"generating\" in the config)"))
                    }
                }
            };
            let (g1, g2) = (pick(g1, 0)?.build(), pick(g2, 1)?.build());
            let m = eval_point(ctx, m.as_deref())?;
            let c = compose(s, &g1, &g2, &m, None)?;
            let est = stationary_phase_estimate(s, &g1, &g2, &m)?;
            let record = json!({
                "space": s.kind().short_name(),
                "hbar": s.hbar(),
                "m": coords(&m, s.kind()),
                "value": c.value,
                "stationary": [coords(&c.stationary.0, s.kind()), coords(&c.stationary.1, s.kind())],
                "hessian_signature": c.hessian_signature,
                "hessian_det": c.hessian_det,
                "iterations": c.iterations,
                "gradient_norm": c.gradient_norm,
                "estimate": {"re": est.re, "im": est.im},
            });
            emit(out, &format!("{}\n", output::json(&record)))
        }
        Command::Verify { suite, cases } => {
            let suite = suite.or(ctx.cfg.suite).unwrap_or_default();
            let cases = cases.or(ctx.cfg.cases).unwrap_or(100);
            let rows = verify::run(suite, seed, cases, s.hbar())?;
            let mut text = String::from(verify::HEADER);
            text.push('\n');
            for r in &rows {
                text.push_str(&r.csv());
                text.push('\n');
            }
            emit(out, &text)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            eprintln!("verify: {} of {} checks passed", rows.len() - failed, rows.len());
            if failed > 0 {
                return Err(CliError::VerifyFailed { failed, total: rows.len() });
            }
            Ok(())
        }
        Command::Convergence { star, no_timing } => {
            let (mut spec, form) = quadrature(ctx, &star)?;
            if star.levels.is_none() && ctx.cfg.quadrature.is_none() {
                spec.levels = 4;
            }
            spec.validate()?;
            let m = eval_point(ctx, star.m.as_deref())?;
            let r = run_star(ctx, &star, &m, &spec, form)?;
            let mut text = String::from("level,value_re,value_im,refine_error,samples,wall_ms\n");
            for (k, lv) in r.levels.iter().enumerate() {
                let refine = if k == 0 { f64::NAN } else { (lv.value - r.levels[k - 1].value).norm() };
                let wall = if no_timing { 0.0 } else { lv.wall_ms };
                text.push_str(&format!(
                    "{k},{},{},{},{},{}\n",
                    num(lv.value.re),
                    num(lv.value.im),
                    num(refine),
                    lv.samples,
                    num(wall)
                ));
            }
            emit(out, &text)
        }
    }
}

fn point_lines(s: &Space, pts: &[Point]) -> String {
    pts.iter().map(|p| coords(p, s.kind()).iter().map(|&x| num(x)).collect::<Vec<_>>().join(",") + "\n").collect()
}

fn eval_point(ctx: &Context, flag: Option<&str>) -> CliResult<Point> {
    match (flag, &ctx.cfg.point) {
        (Some(f), _) => Ok(ctx.space.project(&parse_numbers(f)?)?),
        (None, Some(p)) => Ok(ctx.space.project(p)?),
        (None, None) => Ok(ctx.space.origin()),
    }
}

fn quadrature(ctx: &Context, a: &StarArgs) -> CliResult<(QuadratureSpec, Form)> {
    let mut spec = ctx.cfg.quadrature.clone().unwrap_or_default();
    if let Some(n) = a.resolution {
        spec.resolution = n;
    }
    if let Some(l) = a.levels {
        spec.levels = l;
    }
    if let Some(r) = a.radius {
        spec.truncation_radius = r;
    }
    if a.stretch.is_some() {
        spec.stretch = a.stretch;
    }
    if a.tolerance.is_some() {
        spec.tolerance = a.tolerance;
    }
    spec.validate()?;
    Ok((spec, a.form.or(ctx.cfg.form).unwrap_or_default()))
}

fn field(ctx: &Context, flag: Option<&str>, i: usize) -> CliResult<midstar_core::ScalarField> {
    let spec: FieldSpec = match (flag, &ctx.cfg.fields) {
        (Some(text), _) => serde_json::from_str(text).map_err(|e| CliError::usage(format!("--f{}: {e}", i + 1)))?,
        (None, Some(f)) => f[i].clone(),
        (None, None) => FieldSpec::default_bump(&ctx.space),
    };
    spec.build(&ctx.space)
}

fn run_star(ctx: &Context, a: &StarArgs, m: &Point, spec: &QuadratureSpec, form: Form) -> CliResult<StarResult> {
    let f1 = field(ctx, a.f1.as_deref(), 0)?;
    let f2 = field(ctx, a.f2.as_deref(), 1)?;
    let r = match form {
        Form::Leaf => star_with(&ctx.space, &f1, &f2, m, spec, &StarOptions::default())?,
        Form::Midpoint => star_midpoint_form(&ctx.space, &f1, &f2, m, spec)?,
    };
    Ok(r)
}
