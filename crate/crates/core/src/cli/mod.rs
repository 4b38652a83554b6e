//! Batch front end: `check | scan | solve | aux`.
//!
//! Exit codes: 0 success, 1 mathematical failure (violated hypothesis,
//! missing fixed points, residual breach, failed solve), 2 usage error.

mod config;
mod output;

pub use config::{
    build_nonlinearity, CoefficientUnits, FamilyConfig, FamilySection, RunConfig, ScanOptions,
    Setup, SCHEMA_VERSION,
};
pub use output::{num, write_bundle, write_json, write_pk_curve, write_profile};

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedpoint::{assemble_bundle, FixedPoint, IntervalScan, NormMap, SolutionBundle};
use crate::geometry::GeometryConstants;
use crate::hypotheses::{check_all, HypothesisReport};
use crate::nonlinearity::{truncate, FamilyConstants, NonlocalNonlinearity};
use crate::solver::{energy_upper_bound, lower_barrier, pk_upper_bound, solve_auxiliary};

pub const THREADS_ENV: &str = "NONLOCAL_MULTISOL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nonlocal-multisol", version, about = "Positive solutions of nonlocal elliptic problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Screen the admissibility hypotheses and write hypotheses.json.
    Check(Common),
    /// Sample P_k on one interval (all intervals without --k).
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Full pipeline: scans, fixed points, ordered solution bundle.
    Solve(Common),
    /// One auxiliary solve at a fixed nonlocal value.
    Aux {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Endpoint offset relative to the interval length.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Proceed even when a hypothesis is violated.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Math(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Math(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidDomain(_)
            | Error::InvalidArgument(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => Failure::Usage(e.to_string()),
            other => Failure::Math(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub lambda1: f64,
    pub c1: f64,
    pub measure: f64,
    pub int_e1_p: f64,
    pub int_e1_sq: f64,
    pub p: f64,
    pub m: f64,
    pub f5_threshold: f64,
}

impl From<&GeometryConstants> for GeometryReport {
    fn from(g: &GeometryConstants) -> Self {
        Self {
            lambda1: g.lambda1,
            c1: g.c1,
            measure: g.measure,
            int_e1_p: g.int_e1_p,
            int_e1_sq: g.int_e1_sq,
            p: g.p,
            m: g.m_const(),
            f5_threshold: g.f5_threshold(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub k: usize,
    pub delta: f64,
    pub sign_pattern: String,
    pub two_crossing_shape: bool,
    pub brackets: Vec<(f64, f64)>,
    pub samples: Vec<crate::fixedpoint::PkSample>,
    pub failures: Vec<(f64, String)>,
}

impl From<&IntervalScan> for ScanSummary {
    fn from(s: &IntervalScan) -> Self {
        Self {
            k: s.k,
            delta: s.delta,
            sign_pattern: s.sign_pattern(),
            two_crossing_shape: s.two_crossing_shape(),
            brackets: s.brackets.clone(),
            samples: s.samples.clone(),
            failures: s.failures.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub domain: crate::geometry::DomainSpec,
    pub family: String,
    pub geometry: GeometryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_constants: Option<FamilyConstants>,
    pub hypotheses: HypothesisReport,
    pub scans: Vec<ScanSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bundle: Option<SolutionBundle>,
    /// Every fixed point found before the extreme pair was kept.
    pub all_fixed_points: Vec<FixedPoint>,
}

struct Context {
    cfg: RunConfig,
    setup: Setup,
    f: NonlocalNonlinearity,
    constants: Option<FamilyConstants>,
    out: PathBuf,
    force: bool,
}

impl Context {
    fn new(common: &Common) -> Result<Self, Failure> {
        let mut cfg = RunConfig::load(&common.config)?;
        if let Some(n) = common.resolution {
            cfg.domain.resolution = n;
        }
        if let Some(m) = common.samples {
            cfg.scan.samples = m;
        }
        if let Some(d) = common.delta {
            cfg.scan.delta = d;
        }
        cfg.validate()?;
        let out = common
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&out).map_err(Error::from)?;
        let setup = Setup::new(&cfg)?;
        let (f, constants) = build_nonlinearity(&cfg.family, &setup.geom)
            .map_err(|e| match e {
                Error::Admissibility { .. } => Failure::Math(e.to_string()),
                other => Failure::from(other),
            })?;
        Ok(Self {
            cfg,
            setup,
            f,
            constants,
            out,
            force: common.force,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn hypotheses(&self) -> HypothesisReport {
        check_all(&self.f, &self.setup.geom, self.cfg.check)
    }

    fn gate(&self, report: &HypothesisReport) -> Result<(), Failure> {
        if report.all_certified || self.force {
            return Ok(());
        }
        for h in report.hypotheses.iter().filter(|h| !h.is_certified()) {
            eprintln!("{h}");
        }
        Err(Failure::Math(format!(
            "hypotheses not certified: {:?} (use --force to proceed)",
            report.violated()
        )))
    }

    fn norm_map(&self) -> NormMap<'_> {
        NormMap::new(&self.setup.grid, &self.setup.eig, &self.f, self.cfg.solver)
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", message(&f));
        return f.code();
    }
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", message(&f));
            f.code()
        }
    }
}

fn message(f: &Failure) -> &str {
    match f {
        Failure::Usage(m) | Failure::Math(m) => m,
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<(), Failure> {
    match cmd {
        Command::Check(common) => cmd_check(&Context::new(common)?),
        Command::Scan { common, k } => cmd_scan(&Context::new(common)?, *k),
        Command::Solve(common) => cmd_solve(&Context::new(common)?),
        Command::Aux { common, alpha, k } => cmd_aux(&Context::new(common)?, *alpha, *k),
    }
}

fn cmd_check(ctx: &Context) -> Result<(), Failure> {
    let report = ctx.hypotheses();
    write_json(&ctx.path("hypotheses.json"), &report)?;
    for h in &report.hypotheses {
        println!("{h}");
    }
    if report.all_certified {
        println!("verdict: all hypotheses certified on samples");
        Ok(())
    } else {
        Err(Failure::Math(format!("violated: {:?}", report.violated())))
    }
}

fn check_k(f: &NonlocalNonlinearity, k: usize) -> Result<(), Failure> {
    if k == 0 || k > f.k_count() {
        return Err(Failure::Usage(format!("--k {k} outside 1..={}", f.k_count())));
    }
    Ok(())
}

fn scan_all(ctx: &Context, map: &NormMap<'_>, ks: &[usize]) -> Result<Vec<IntervalScan>, Failure> {
    let mut scans = Vec::new();
    for &k in ks {
        let scan = map.scan_interval(k, ctx.cfg.scan.samples, ctx.cfg.scan.delta)?;
        write_pk_curve(&ctx.path(&format!("pk_curve_{k}.csv")), &scan)?;
        scans.push(scan);
    }
    Ok(scans)
}

fn cmd_scan(ctx: &Context, k: Option<usize>) -> Result<(), Failure> {
    ctx.gate(&ctx.hypotheses())?;
    let ks: Vec<usize> = match k {
        Some(k) => {
            check_k(&ctx.f, k)?;
            vec![k]
        }
        None => (1..=ctx.f.k_count()).collect(),
    };
    let map = ctx.norm_map();
    let scans = scan_all(ctx, &map, &ks)?;
    let mut failed = 0;
    for s in &scans {
        println!(
            "k={} samples={} failures={} signs={} two-crossing-shape={}",
            s.k,
            s.samples.len(),
            s.failures.len(),
            s.sign_pattern(),
            s.two_crossing_shape()
        );
        failed += s.failures.len();
    }
    if failed > 0 {
        return Err(Failure::Math(format!("{failed} auxiliary solve(s) failed")));
    }
    Ok(())
}

fn dump_scan(scan: &IntervalScan) {
    eprintln!("scan of interval {} (g = P_k - alpha):", scan.k);
    eprintln!("alpha,pk,g");
    for s in &scan.samples {
        eprintln!("{},{},{}", num(s.alpha), num(s.pk), num(s.g()));
    }
    for (a, msg) in &scan.failures {
        eprintln!("{},failed,{msg}", num(*a));
    }
}

fn cmd_solve(ctx: &Context) -> Result<(), Failure> {
    let hyp = ctx.hypotheses();
    write_json(&ctx.path("hypotheses.json"), &hyp)?;
    ctx.gate(&hyp)?;
    let map = ctx.norm_map();
    let ks: Vec<usize> = (1..=ctx.f.k_count()).collect();
    let scans = scan_all(ctx, &map, &ks)?;
    let mut per_interval = Vec::new();
    let mut all = Vec::new();
    let mut failure = None;
    for scan in &scans {
        let tol = ctx.cfg.scan.tol_fp * interval_len(&ctx.f, scan.k);
        match map.bracket_and_bisect(scan, tol) {
            Ok(fps) => {
                all.extend(fps.iter().cloned());
                per_interval.push((scan.k, fps));
            }
            Err(e) => {
                dump_scan(scan);
                failure.get_or_insert(e);
            }
        }
    }
    let bundle = match failure {
        Some(e) => Err(e),
        None => assemble_bundle(&ctx.f, per_interval, |k| {
            ctx.cfg.scan.tol_fp * interval_len(&ctx.f, k)
        }),
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        domain: ctx.cfg.domain,
        family: ctx.f.term().describe(),
        geometry: (&ctx.setup.geom).into(),
        family_constants: ctx.constants.clone(),
        hypotheses: hyp,
        scans: scans.iter().map(ScanSummary::from).collect(),
        bundle: bundle.as_ref().ok().cloned(),
        all_fixed_points: all,
    };
    write_json(&ctx.path("report.json"), &report)?;
    let bundle = bundle?;
    write_bundle(&ctx.path("bundle.csv"), &bundle.fixed_points)?;
    let mut index = std::collections::HashMap::new();
    for fp in &bundle.fixed_points {
        let i = index.entry(fp.k).or_insert(0);
        *i += 1;
        write_profile(
            &ctx.path(&format!("solution_{}_{}.csv", fp.k, i)),
            &ctx.setup.grid,
            &["u"],
            &[&fp.u],
        )?;
        println!(
            "k={} alpha*={} lp_norm={} residual={:.3e}",
            fp.k,
            num(fp.alpha_star),
            num(fp.lp_norm),
            fp.nonlocal_residual
        );
    }
    println!(
        "{} ordered solutions (certificate: {})",
        bundle.fixed_points.len(),
        bundle.ordering_certificate
    );
    Ok(())
}

fn interval_len(f: &NonlocalNonlinearity, k: usize) -> f64 {
    let (lo, hi) = f.interval(k);
    hi - lo
}

fn cmd_aux(ctx: &Context, alpha: f64, k: Option<usize>) -> Result<(), Failure> {
    let found = ctx
        .f
        .locate(alpha)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(k) = k {
        check_k(&ctx.f, k)?;
        if k != found {
            return Err(Failure::Usage(format!("alpha = {alpha} lies in interval {found}, not {k}")));
        }
    }
    let (grid, eig) = (&ctx.setup.grid, &ctx.setup.eig);
    let tf = truncate(&ctx.f, alpha)?;
    let res = solve_auxiliary(grid, &tf, eig, &ctx.cfg.solver)?;
    let z = lower_barrier(&tf, eig)?;
    write_profile(&ctx.path(&aux_name(alpha)), grid, &["u", "z"], &[&res.u, &z])?;
    println!("alpha = {}", num(alpha));
    println!("k = {found}");
    println!("method = {:?}, iterations = {}", res.method_used, res.iterations);
    println!("residual = {:.6e} (tolerance {:.6e})", res.residual, res.tolerance);
    println!("c_alpha = {}", num(res.c_alpha));
    for eps in [0.1, 0.5, 1.0] {
        match energy_upper_bound(&tf, eig, eps) {
            Ok(b) => println!("energy bound (eps = {eps}) = {}", num(b)),
            Err(_) => println!("energy bound (eps = {eps}) = n/a (eps outside (0, gamma - lambda1))"),
        }
    }
    println!("barrier margin min(u - z) = {:.6e}", res.barrier_margin);
    println!("pk = {}", num(res.lp_norm));
    println!("pk_upper_bound = {}", num(pk_upper_bound(grid, &tf, eig)));
    Ok(())
}

/// `aux_<alpha>.csv` with the value in fixed 17-digit form.
pub fn aux_name(alpha: f64) -> String {
    format!("aux_{}.csv", num(alpha))
}

/// Convenience for tests: run with a config file path and extra flags.
pub fn run_with_config(command: &str, config: &Path, extra: &[&str]) -> i32 {
    let mut args: Vec<OsString> = vec!["nonlocal-multisol".into(), command.into()];
    args.push("--config".into());
    args.push(config.as_os_str().to_owned());
    args.extend(extra.iter().map(OsString::from));
    run(args)
}
