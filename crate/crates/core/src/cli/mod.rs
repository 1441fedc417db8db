//! The `muhs` command-line driver.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 constraint
//! unsatisfiable. `MUHS_LOG` (error, info, debug) sets stderr verbosity.

// Ignores write errors, so a closed pipe just ends output.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

pub mod init;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{MuhsError, Result};
use crate::evolution::{
    classify_initial, hill_spectrum, integrate, BlowupReason, EvolutionConfig, Outcome,
};
use crate::geometry::{curvature_expanded, curvature_quadratic, sectional};
use crate::hierarchy::{
    b1, bihamiltonian_residual, functional_value, hn_from_gradient, momentum,
    virasoro_equivalence_residual, FunctionalId,
};
use crate::spectral::{apply_a, apply_a_inverse, InverseMethod, PeriodicGrid};
use crate::waves::{profile, solve_period_one, wave_stats, WaveFamily};
use init::parse_init;
use output::{fmt17, num, Csv, OutputDir, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_UNSATISFIABLE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "muhs", version, about = "Numerical laboratory for the muHS equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Smooth,
    Cusped,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate from an initial profile and record diagnostics.
    Simulate {
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long = "t-end")]
        t_end: f64,
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        #[arg(long, default_value_t = 0.3)]
        cfl: f64,
        /// Integrate in the frame moving with the mean.
        #[arg(long)]
        comoving: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A-priori verdict on initial data.
    Classify {
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Period-one traveling wave with mean equal to mu.
    Wave {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long = "m-anchor", allow_negative_numbers = true)]
        m_anchor: f64,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conserved functionals and structural residuals.
    Hierarchy {
        #[arg(long)]
        init: String,
        /// Comma-separated indices in -3..=2.
        #[arg(long, allow_hyphen_values = true, default_value = "-2,-1,0,1,2")]
        orders: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Read the spec as the momentum m and use u = A^{-1} m.
        #[arg(long)]
        momentum: bool,
    },
    /// Sectional curvature of the plane spanned by two fields.
    Curvature {
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long, default_value_t = 128)]
        n: usize,
    },
    /// Hill eigenvalues of the momentum at t = 0 and t_end.
    Spectrum {
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long = "t-end", default_value_t = 0.0)]
        t_end: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Deterministic property suite.
    Selftest {
        #[arg(long, default_value_t = 12345)]
        seed: u64,
    },
}

pub fn exit_code(e: &MuhsError) -> i32 {
    match e {
        MuhsError::NonPositiveMean { .. } | MuhsError::NoBracket { .. } => EXIT_UNSATISFIABLE,
        MuhsError::Numerical(_)
        | MuhsError::DiffeomorphismLost { .. }
        | MuhsError::NonPeriodicAntiderivative { .. } => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("MUHS_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Simulate { init, n, t_end, k, cfl, comoving, out } => {
            let mut cfg = EvolutionConfig::new(n, t_end);
            cfg.k = k;
            cfg.cfl = cfl;
            cfg.comoving = comoving;
            simulate(&init, &cfg, out)
        }
        Command::Classify { init, n } => classify(&init, n),
        Command::Wave { c, family, m_anchor, samples, out } => {
            let family = match family {
                FamilyArg::Smooth => WaveFamily::Smooth,
                FamilyArg::Cusped => WaveFamily::Cusped,
            };
            wave(c, family, m_anchor, samples, out)
        }
        Command::Hierarchy { init, orders, n, momentum } => hierarchy(&init, &orders, n, momentum),
        Command::Curvature { u, v, n } => curvature(&u, &v, n),
        Command::Spectrum { init, count, t_end, n } => spectrum(&init, count, t_end, n),
        Command::Selftest { seed } => {
            let report = crate::selftest::run(seed);
            for c in &report {
                say!("{}", c.line());
            }
            let failed = report.iter().filter(|c| !c.pass).count();
            say!("selftest: {} checks, {failed} failed", report.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
        }
    }
}

fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn simulate(init: &str, cfg: &EvolutionConfig, out: Option<PathBuf>) -> Result<i32> {
    let start = Instant::now();
    let spec = parse_init(init)?;
    cfg.validate()?;
    let grid = PeriodicGrid::new(cfg.n)?;
    let u0 = spec.field(grid);
    log::info!("initial data: {}", classify_initial(&u0).justification);
    let traj = integrate(&u0, cfg)?;
    let (verdict, line, code) = match traj.outcome {
        Outcome::Completed => (
            "Completed".to_string(),
            format!("verdict: Completed t = {}", traj.t_final()),
            EXIT_OK,
        ),
        Outcome::NumericalBlowup { t_est, reason } => (
            "NumericalBlowup".to_string(),
            format!("verdict: NumericalBlowup t_est = {t_est:.6} ({reason:?})"),
            if reason == BlowupReason::NonFinite { EXIT_NUMERICAL } else { EXIT_OK },
        ),
    };
    say!("{line}");
    let d0 = &traj.diagnostics[0];
    let mut summary = json!({
        "t_final": num(traj.t_final()),
        "steps": traj.steps.len(),
        "snapshots": traj.snapshots.len(),
        "mu_drift": num(traj.drift(|d| d.mu)),
        "h1_rel_drift": num(traj.drift(|d| d.h1) / d0.h1.abs().max(f64::MIN_POSITIVE)),
        "r0_drift": num(traj.drift(|d| d.r0)),
        "min_ux_final": num(traj.diagnostics.last().map_or(f64::NAN, |d| d.min_ux)),
    });
    if let Outcome::NumericalBlowup { t_est, reason } = traj.outcome {
        summary["t_est"] = num(t_est);
        summary["reason"] = json!(format!("{reason:?}"));
    }
    if let Some(dir) = out {
        let mut od = OutputDir::create(&dir)?;
        let mut diag = Csv::new(&[
            "t", "mu", "H1", "H0", "H2", "Hm1_or_nan", "r0", "min_ux", "max_abs_u", "dt",
        ]);
        for d in &traj.diagnostics {
            diag.row(&[
                d.t,
                d.mu,
                d.h1,
                d.h0,
                d.h2,
                d.hm1.unwrap_or(f64::NAN),
                d.r0,
                d.min_ux,
                d.max_abs_u,
                d.dt,
            ]);
        }
        od.write("diagnostics.csv", &diag.into_string())?;
        let mut snaps = Csv::new(&["t", "x", "u"]);
        for s in &traj.snapshots {
            for (j, u) in s.u.samples().iter().enumerate() {
                snaps.row(&[s.t, grid.node(j), *u]);
            }
        }
        od.write("snapshots.csv", &snaps.into_string())?;
        summary["wall_time_s"] = num(start.elapsed().as_secs_f64());
        od.finish(RunManifest {
            command: "simulate".into(),
            version: version(),
            config: serde_json::to_value(cfg).map_err(|e| MuhsError::Numerical(e.to_string()))?,
            inputs: json!({ "init": init, "canonical": spec.render() }),
            outputs: Vec::new(),
            summary,
            verdict,
        })?;
    }
    Ok(code)
}

fn classify(init: &str, n: usize) -> Result<i32> {
    let u0 = parse_init(init)?.field(PeriodicGrid::new(n)?);
    say!("{}", classify_initial(&u0).justification);
    Ok(EXIT_OK)
}

fn wave(c: f64, family: WaveFamily, m_anchor: f64, samples: usize, out: Option<PathBuf>) -> Result<i32> {
    let start = Instant::now();
    let p = solve_period_one(c, family, m_anchor)?;
    let stats = wave_stats(p.c, p.m_lo, p.m_hi, p.mu)?;
    let prof = profile(&p, samples)?;
    let sampled_mean = prof.mean / prof.period;
    say!("family = {}", p.family.name());
    for (k, v) in [
        ("c", p.c),
        ("m", p.m_lo),
        ("M", p.m_hi),
        ("mu", p.mu),
        ("period", stats.period),
        ("mean", stats.mean / stats.period),
        ("sampled_mean", sampled_mean),
    ] {
        say!("{k} = {}", fmt17(v));
    }
    if let Some(dir) = out {
        let mut od = OutputDir::create(&dir)?;
        let mut csv = Csv::new(&["x", "phi"]);
        for (x, phi) in prof.xs.iter().zip(&prof.phis) {
            csv.row(&[*x, *phi]);
        }
        od.write("profile.csv", &csv.into_string())?;
        od.finish(RunManifest {
            command: "wave".into(),
            version: version(),
            config: json!({ "samples": samples }),
            inputs: json!({ "c": num(c), "family": p.family.name(), "m_anchor": num(m_anchor) }),
            outputs: Vec::new(),
            summary: json!({
                "c": num(p.c),
                "m": num(p.m_lo),
                "M": num(p.m_hi),
                "mu": num(p.mu),
                "period": num(stats.period),
                "mean": num(stats.mean / stats.period),
                "sampled_mean": num(sampled_mean),
                "wall_time_s": num(start.elapsed().as_secs_f64()),
            }),
            verdict: p.family.name().into(),
        })?;
    }
    Ok(EXIT_OK)
}

fn parse_orders(text: &str) -> Result<Vec<FunctionalId>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<i32>()
                .map_err(|_| MuhsError::InvalidParams(format!("bad order '{s}'")))
                .and_then(FunctionalId::new)
        })
        .collect()
}

fn hierarchy(init: &str, orders: &str, n: usize, from_momentum: bool) -> Result<i32> {
    let ids = parse_orders(orders)?;
    let mut u = parse_init(init)?.field(PeriodicGrid::new(n)?);
    if from_momentum {
        u = apply_a_inverse(&u, InverseMethod::Spectral);
    }
    for id in ids {
        match functional_value(id, &u) {
            Ok(v) => say!("H_{} = {}", id.index(), fmt17(v)),
            Err(e) => say!("H_{} unavailable: {e}", id.index()),
        }
    }
    let (r1, r2) = bihamiltonian_residual(&u);
    say!("residual,value");
    say!("bihamiltonian_B2,{}", fmt17(r1));
    say!("bihamiltonian_direct,{}", fmt17(r2));
    let m = momentum(&u);
    if m.min() > 0.0 {
        let kernel = b1(&m, &m.map(|v| 0.5 / v.sqrt())).max_abs();
        say!("kernel,{}", fmt17(kernel));
        for k in 1..=2u32 {
            let id = FunctionalId::new(-(k as i32))?;
            match (hn_from_gradient(k, &u), functional_value(id, &u)) {
                (Ok(a), Ok(b)) => say!("euler_H-{k},{}", fmt17((a - b).abs())),
                _ => say!("euler_H-{k},NaN"),
            }
        }
    }
    for k in [0.0, 0.5] {
        say!("virasoro_k={k},{}", fmt17(virasoro_equivalence_residual(&u, k)));
    }
    Ok(EXIT_OK)
}

fn curvature(u: &str, v: &str, n: usize) -> Result<i32> {
    let grid = PeriodicGrid::new(n)?;
    let (u, v) = (parse_init(u)?.field(grid), parse_init(v)?.field(grid));
    let q = curvature_quadratic(&u, &v);
    let e = curvature_expanded(&u, &v);
    say!("quadratic = {}", fmt17(q));
    say!("expanded = {}", fmt17(e));
    say!("difference = {}", fmt17((q - e).abs()));
    match sectional(&u, &v) {
        Ok(k) => say!("sectional = {}", fmt17(k)),
        Err(err) => say!("sectional unavailable: {err}"),
    }
    Ok(EXIT_OK)
}

fn spectrum(init: &str, count: usize, t_end: f64, n: usize) -> Result<i32> {
    let u0 = parse_init(init)?.field(PeriodicGrid::new(n)?);
    let first = hill_spectrum(&apply_a(&u0), count)?;
    let last = if t_end > 0.0 {
        let traj = integrate(&u0, &EvolutionConfig::new(n, t_end))?;
        if !traj.is_completed() {
            return Err(MuhsError::Numerical(format!(
                "evolution stopped early: {:?}",
                traj.outcome
            )));
        }
        hill_spectrum(&apply_a(&traj.last().u), count)?
    } else {
        first.clone()
    };
    // the lowest eigenvalue is zero up to round-off, so its drift is absolute
    let top = first.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    say!("index,t0,t_end,drift,kind");
    for (i, (a, b)) in first.iter().zip(&last).enumerate() {
        let (drift, kind) = if a.abs() <= 1e-8 * top {
            ((b - a).abs(), "abs")
        } else {
            (((b - a) / a).abs(), "rel")
        };
        say!("{i},{},{},{},{kind}", fmt17(*a), fmt17(*b), fmt17(drift));
    }
    Ok(EXIT_OK)
}
