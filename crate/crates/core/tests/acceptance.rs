//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nonlocal_multisol::cli::{build_nonlinearity, run_with_config, RunConfig, Setup};
use nonlocal_multisol::geometry::{build_grid, DomainSpec, EigenData};
use nonlocal_multisol::nonlinearity::{truncate, NonlocalNonlinearity};
use nonlocal_multisol::solver::{
    energy_upper_bound, lower_barrier, solve_auxiliary, solve_auxiliary_from,
};
use serde_json::Value;

type Outcome = Result<String, String>;

const PER_INTERVAL: usize = 16;

fn config(family: &str, resolution: usize) -> String {
    format!(
        "schema_version = 1\np = 1.0\n\n[domain]\nkind = \"interval\"\na = 0.0\nb = 1.0\nresolution = {resolution}\n\n[family]\n{family}\n\n[scan]\nsamples = 64\n"
    )
}

const FAMILY_B: &str = "kind = \"b\"\nk = 2\nu = 3.141592653589793";

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().expect("temp dir"),
        }
    }

    fn write_config(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, text).expect("write config");
        path
    }

    fn run(&self, cmd: &str, config: &Path, out: &str, extra: &[&str]) -> (i32, PathBuf, Duration) {
        let out_dir = self.dir.path().join(out);
        let mut args = vec!["--out", out_dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let start = Instant::now();
        let code = run_with_config(cmd, config, &args);
        (code, out_dir, start.elapsed())
    }
}

fn read_bundle(dir: &Path) -> Result<Vec<(usize, f64, f64, f64)>, String> {
    let mut rdr = csv::Reader::from_path(dir.join("bundle.csv")).map_err(|e| e.to_string())?;
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| e.to_string())?;
            let f = |i: usize| r[i].parse::<f64>().map_err(|e| e.to_string());
            Ok((r[0].parse().map_err(|e: std::num::ParseIntError| e.to_string())?, f(1)?, f(2)?, f(3)?))
        })
        .collect()
}

fn read_report(dir: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn multiplicity(code: i32, dir: &Path, elapsed: Duration) -> Outcome {
    if code != 0 {
        return Err(format!("solve exited with {code}"));
    }
    let rows = read_bundle(dir)?;
    if rows.len() != 4 {
        return Err(format!("{} bundle rows, expected 4", rows.len()));
    }
    let chain = [0.0, rows[0].2, rows[1].2, 1.0, rows[2].2, rows[3].2, 2.0];
    if !chain.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!("ordering chain broken: {chain:?}"));
    }
    let ks: Vec<usize> = rows.iter().map(|r| r.0).collect();
    if ks != [1, 1, 2, 2] {
        return Err(format!("interval labels {ks:?}"));
    }
    let mut worst_mass = 0.0f64;
    let mut worst_res = 0.0f64;
    for &(_, a, lp, res) in &rows {
        worst_mass = worst_mass.max((lp - a).abs());
        worst_res = worst_res.max(res);
    }
    if worst_mass > 1e-8 || worst_res > 1e-7 {
        return Err(format!("|lp - alpha*| = {worst_mass:e}, residual = {worst_res:e}"));
    }
    if elapsed > Duration::from_secs(120) {
        return Err(format!("runtime {elapsed:?}"));
    }
    Ok(format!(
        "alpha* = {:.6}, {:.6}, {:.6}, {:.6}; max |lp - alpha*| = {worst_mass:.1e}; max residual = {worst_res:.1e}; {:.1}s",
        rows[0].1,
        rows[1].1,
        rows[2].1,
        rows[3].1,
        elapsed.as_secs_f64()
    ))
}

fn constants(dir: &Path) -> Outcome {
    let report = read_report(dir)?;
    let g = &report["geometry"];
    let get = |k: &str| g[k].as_f64().ok_or_else(|| format!("missing geometry.{k}"));
    let checks = [
        ("lambda1", get("lambda1")?, std::f64::consts::PI.powi(2), 1e-3),
        ("c1", get("c1")?, 1.0 / 12f64.sqrt(), 1e-6),
        ("int_e1", get("int_e1_p")?, 2.0 / std::f64::consts::PI, 1e-4),
        ("m", get("m")?, 5.4414, 1e-3),
    ];
    let mut line = Vec::new();
    for (name, got, want, tol) in checks {
        if (got - want).abs() > tol {
            return Err(format!("{name} = {got} differs from {want} by more than {tol}"));
        }
        line.push(format!("{name} = {got:.7}"));
    }
    Ok(line.join(", "))
}

fn violated(dir: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(dir.join("hypotheses.json")).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(v["hypotheses"]
        .as_array()
        .ok_or("hypotheses.json has no list")?
        .iter()
        .filter(|h| h["status"] != "certified-on-samples")
        .map(|h| h["hypothesis"].as_str().unwrap_or("?").to_string())
        .collect())
}

fn concurrence(ws: &Workspace) -> Outcome {
    for (i, family) in [
        "kind = \"b\"\nk = 1",
        "kind = \"b\"\nk = 2",
        "kind = \"c\"\nk = 1",
        "kind = \"c\"\nk = 2",
    ]
    .iter()
    .enumerate()
    {
        let cfg = ws.write_config(&format!("pass_{i}.toml"), &config(family, 256));
        let (code, dir, _) = ws.run("check", &cfg, &format!("pass_{i}"), &[]);
        if code != 0 {
            return Err(format!("{family:?} exit {code}, violated {:?}", violated(&dir)?));
        }
    }
    let counterexamples = [
        (
            "increasing slope",
            "kind = \"custom\"\nk = 1\ncoefficients = [0.0, 20.0, 5.0, -3.0]\namplitude_power = 1.0\ns_upper = 20.0",
            "f2",
        ),
        (
            "slope limit at lambda1",
            "kind = \"custom\"\nk = 1\ncoefficients = [0.0, 1.0, -0.25]\namplitude_power = 0.0\ns_upper = 20.0\ncoefficient_units = \"lambda1\"",
            "f3",
        ),
        ("scaled by 1000", "kind = \"b\"\nk = 2\nscale = 1000.0", "f5"),
    ];
    let mut found = Vec::new();
    for (i, (label, family, expect)) in counterexamples.iter().enumerate() {
        let cfg = ws.write_config(&format!("fail_{i}.toml"), &config(family, 256));
        let (code, dir, _) = ws.run("check", &cfg, &format!("fail_{i}"), &[]);
        let names = violated(&dir)?;
        if code != 1 || !names.iter().any(|n| n == expect) {
            return Err(format!("{label}: exit {code}, violated {names:?}, expected {expect}"));
        }
        found.push(format!("{label} -> {names:?}"));
    }
    Ok(format!("families b, c certified; {}", found.join("; ")))
}

struct Library {
    setup: Setup,
    f: NonlocalNonlinearity,
    cfg: RunConfig,
}

impl Library {
    fn new(resolution: usize) -> Self {
        let cfg = RunConfig::from_toml(&config(FAMILY_B, resolution)).expect("config");
        let setup = Setup::new(&cfg).expect("setup");
        let (f, _) = build_nonlinearity(&cfg.family, &setup.geom).expect("family");
        Self { setup, f, cfg }
    }

    fn alphas(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.f.interval(k);
        (0..PER_INTERVAL)
            .map(|j| lo + (hi - lo) * (j as f64 + 0.5) / PER_INTERVAL as f64)
            .collect()
    }

    fn all_alphas(&self) -> Vec<f64> {
        (1..=self.f.k_count()).flat_map(|k| self.alphas(k)).collect()
    }
}

fn barrier(lib: &Library) -> Outcome {
    let mut worst = f64::INFINITY;
    for alpha in lib.all_alphas() {
        let tf = truncate(&lib.f, alpha).map_err(|e| e.to_string())?;
        let res = solve_auxiliary(&lib.setup.grid, &tf, &lib.setup.eig, &lib.cfg.solver)
            .map_err(|e| e.to_string())?;
        let z = lower_barrier(&tf, &lib.setup.eig).map_err(|e| e.to_string())?;
        let margin = res
            .u
            .iter()
            .zip(z.iter())
            .map(|(u, z)| u - z)
            .fold(f64::INFINITY, f64::min);
        let floor = -1e-8 * tf.s_alpha();
        if margin < floor {
            return Err(format!("alpha = {alpha}: min(u - z) = {margin:e} < {floor:e}"));
        }
        worst = worst.min(margin / tf.s_alpha());
    }
    Ok(format!("{} solves, min (u - z)/s_alpha = {worst:.3e}", 2 * PER_INTERVAL))
}

fn energy(lib: &Library) -> Outcome {
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for k in 1..=lib.f.k_count() {
        let alphas = lib.alphas(k);
        let gamma_inf = alphas
            .iter()
            .map(|&a| lib.f.gamma(a).as_f64())
            .fold(f64::INFINITY, f64::min);
        let eps: Vec<f64> = [0.1, 0.5, 1.0]
            .into_iter()
            .filter(|&e| e < gamma_inf - lib.setup.eig.lambda1)
            .collect();
        for &alpha in &alphas {
            let tf = truncate(&lib.f, alpha).map_err(|e| e.to_string())?;
            let res = solve_auxiliary(&lib.setup.grid, &tf, &lib.setup.eig, &lib.cfg.solver)
                .map_err(|e| e.to_string())?;
            for &e in &eps {
                let bound = energy_upper_bound(&tf, &lib.setup.eig, e).map_err(|e| e.to_string())?;
                if res.c_alpha > bound + 1e-8 {
                    return Err(format!(
                        "alpha = {alpha}, eps = {e}: c = {:e} above bound {bound:e}",
                        res.c_alpha
                    ));
                }
                tightest = tightest.min(bound - res.c_alpha);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (alpha, eps) pairs, smallest slack {tightest:.3e}"))
}

fn ceiling(dir: &Path) -> Outcome {
    let mut count = 0;
    for k in 1..=2 {
        let mut rdr = csv::Reader::from_path(dir.join(format!("pk_curve_{k}.csv")))
            .map_err(|e| e.to_string())?;
        for r in rdr.records() {
            let r = r.map_err(|e| e.to_string())?;
            if &r[6] != "ok" {
                return Err(format!("failed sample at alpha = {}", &r[0]));
            }
            let pk: f64 = r[1].parse().map_err(|_| "bad pk")?;
            let ub: f64 = r[5].parse().map_err(|_| "bad bound")?;
            if pk > ub * (1.0 + 1e-6) {
                return Err(format!("alpha = {}: pk = {pk} above {ub}", &r[0]));
            }
            count += 1;
        }
    }
    Ok(format!("{count} samples below the ceiling"))
}

fn uniqueness(lib: &Library) -> Outcome {
    let (grid, eig) = (&lib.setup.grid, &lib.setup.eig);
    let mut worst = 0.0f64;
    for alpha in lib.all_alphas() {
        let tf = truncate(&lib.f, alpha).map_err(|e| e.to_string())?;
        let sa = tf.s_alpha();
        let base = solve_auxiliary(grid, &tf, eig, &lib.cfg.solver).map_err(|e| e.to_string())?;
        let starts: [Vec<f64>; 2] = [
            eig.e1.iter().map(|e| 1e-3 * sa * e.max(1e-12)).collect(),
            vec![0.999 * sa; grid.len()],
        ];
        for init in &starts {
            let other = solve_auxiliary_from(grid, &tf, eig, &lib.cfg.solver, init)
                .map_err(|e| format!("alpha = {alpha}: {e}"))?;
            let gap = base
                .u
                .iter()
                .zip(other.u.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap > 1e-8 {
                return Err(format!("alpha = {alpha}: starts disagree by {gap:e}"));
            }
            worst = worst.max(gap);
        }
    }
    Ok(format!("3 starts x {} alphas, max sup gap {worst:.2e}", 2 * PER_INTERVAL))
}

fn ratio(coarse: f64, mid: f64, fine: f64) -> f64 {
    (coarse - mid) / (mid - fine)
}

fn in_band(r: f64) -> bool {
    (4.0 * 0.7..=4.0 * 1.3).contains(&r)
}

fn convergence(ws: &Workspace, fine_dir: &Path) -> Outcome {
    let mut alpha_rows = Vec::new();
    for n in [256, 512] {
        let cfg = ws.write_config(&format!("mesh_{n}.toml"), &config(FAMILY_B, n));
        let (code, dir, _) = ws.run("solve", &cfg, &format!("mesh_{n}"), &[]);
        if code != 0 {
            return Err(format!("solve at resolution {n} exited with {code}"));
        }
        alpha_rows.push(read_bundle(&dir)?);
    }
    alpha_rows.push(read_bundle(fine_dir)?);
    let mut ratios = Vec::new();
    for i in 0..4 {
        let r = ratio(alpha_rows[0][i].1, alpha_rows[1][i].1, alpha_rows[2][i].1);
        if !in_band(r) {
            return Err(format!("alpha*[{i}] ratio {r:.3}"));
        }
        ratios.push(r);
    }
    let mut lambda = Vec::new();
    let mut c1 = Vec::new();
    for n in [256, 512, 1024] {
        let grid = build_grid(DomainSpec::interval(0.0, 1.0, n)).map_err(|e| e.to_string())?;
        let eig = EigenData::compute(&grid, 1.0).map_err(|e| e.to_string())?;
        lambda.push(eig.lambda1);
        c1.push(eig.c1);
    }
    let rl = ratio(lambda[0], lambda[1], lambda[2]);
    let rc = ratio(c1[0], c1[1], c1[2]);
    if !in_band(rl) || !in_band(rc) {
        return Err(format!("lambda1 ratio {rl:.3}, c1 ratio {rc:.3}"));
    }
    Ok(format!(
        "alpha* ratios {:.3} {:.3} {:.3} {:.3}; lambda1 {rl:.3}; c1 {rc:.3}",
        ratios[0], ratios[1], ratios[2], ratios[3]
    ))
}

fn sign_pattern(dir: &Path) -> Outcome {
    let mut summary = Vec::new();
    for k in 1..=2 {
        let mut rdr = csv::Reader::from_path(dir.join(format!("pk_curve_{k}.csv")))
            .map_err(|e| e.to_string())?;
        let mut g = Vec::new();
        for r in rdr.records() {
            let r = r.map_err(|e| e.to_string())?;
            let alpha: f64 = r[0].parse().map_err(|_| "bad alpha")?;
            let pk: f64 = r[1].parse().map_err(|_| "bad pk")?;
            g.push(pk - alpha);
        }
        let (first, last) = (g[0], g[g.len() - 1]);
        let negatives = g[1..g.len() - 1].iter().filter(|v| **v < 0.0).count();
        if !(first > 0.0 && last > 0.0 && negatives >= 1) {
            return Err(format!(
                "interval {k}: g(left) = {first:e}, g(right) = {last:e}, {negatives} negative interior samples"
            ));
        }
        summary.push(format!("k={k}: {negatives}/{} interior negative", g.len() - 2));
    }
    Ok(summary.join(", "))
}

fn determinism(first: &Path, second: &Path) -> Outcome {
    let mut names: Vec<_> = fs::read_dir(first)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    names.sort();
    for name in &names {
        let a = fs::read(first.join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(second.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        if a != b {
            return Err(format!("{name:?} differs between runs"));
        }
    }
    let extra = fs::read_dir(second).map_err(|e| e.to_string())?.count();
    if extra != names.len() {
        return Err("runs emitted different file sets".into());
    }
    Ok(format!("{} files byte-identical", names.len()))
}

fn main() {
    let ws = Workspace::new();
    let cfg = ws.write_config("family_b.toml", &config(FAMILY_B, 1024));
    let (code, run1, elapsed) = ws.run("solve", &cfg, "run1", &[]);
    let (code2, run2, _) = ws.run("solve", &cfg, "run2", &[]);
    let lib = Library::new(1024);

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 multiplicity", Box::new(|| multiplicity(code, &run1, elapsed))),
        ("2 geometry constants", Box::new(|| constants(&run1))),
        ("3 hypothesis screening", Box::new(|| concurrence(&ws))),
        ("4 lower barrier", Box::new(|| barrier(&lib))),
        ("5 energy bound", Box::new(|| energy(&lib))),
        ("6 norm ceiling", Box::new(|| ceiling(&run1))),
        ("7 unique auxiliary solution", Box::new(|| uniqueness(&lib))),
        ("8 mesh convergence", Box::new(|| convergence(&ws, &run1))),
        ("9 crossing sign pattern", Box::new(|| sign_pattern(&run1))),
        (
            "10 determinism",
            Box::new(|| {
                if code2 != 0 {
                    return Err(format!("second solve exited with {code2}"));
                }
                determinism(&run1, &run2)
            }),
        ),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
