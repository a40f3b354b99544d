//! The subcommands. Each one reads the run configuration, writes its files
//! into the output directory and returns the exit status.

use std::path::{Path, PathBuf};

use polysle::driving::{from_driver_fn, plain_from_driver_fn, simulate_driver_with, simulate_plain};
use polysle::loewner::{compute_trace, flow_point, FlowOptions};
use polysle::noise::SeededNoise;
use polysle::scmap::polygon_snapshot;
use polysle::verify::{
    hitting_probability_formula, hitting_probability_mc, martingale_test, metric_equivalence_test, qv_ensemble,
    sc_oracle_suite, theorem_rate_check, Check, HittingOptions, MartingaleOptions, MetricTestOptions, Status,
    VerifyReport,
};
use polysle::{Complex64, CornerPosition, CorrectedMap, DrivingPath, Error, PolygonSnapshot, ScFamily};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::executor::PoolExecutor;
use crate::formats;
use crate::svg::Plot;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyTest {
    Martingale,
    Qv,
    HittingFormula,
    HittingMc,
    TheoremRate,
    MetricEquivalence,
    ScOracles,
}

impl VerifyTest {
    pub fn name(self) -> &'static str {
        match self {
            VerifyTest::Martingale => "martingale",
            VerifyTest::Qv => "qv",
            VerifyTest::HittingFormula => "hitting-formula",
            VerifyTest::HittingMc => "hitting-mc",
            VerifyTest::TheoremRate => "theorem-rate",
            VerifyTest::MetricEquivalence => "metric-equivalence",
            VerifyTest::ScOracles => "sc-oracles",
        }
    }
}

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub exec: PoolExecutor,
    pub verbose: bool,
}

impl Context {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    seed: u64,
    kappa: f64,
    rows: usize,
    sigma: Option<f64>,
    warnings: Vec<String>,
}

fn write_manifest(ctx: &Context, command: &str, path: &DrivingPath) -> Result<(), CliError> {
    let warnings = match ctx.cfg.prevertex_config()? {
        Some(c) => c.warnings().iter().map(|w| format!("{w:?}")).collect(),
        None => Vec::new(),
    };
    let manifest = Manifest {
        command,
        version: VERSION,
        config_hash: ctx.cfg.hash(),
        seed: path.seed,
        kappa: path.kappa,
        rows: path.len(),
        sigma: path.sigma,
        warnings,
    };
    formats::write_json(&manifest, &ctx.file("manifest.json"))
}

/// The driving path described by the `simulation` section.
pub fn build_path(cfg: &RunConfig) -> Result<DrivingPath, CliError> {
    let s = &cfg.simulation;
    let path = match (cfg.prevertex_config()?, s.driver.deterministic()) {
        (None, None) => simulate_plain(cfg.kappa, s.t_end, s.dt, cfg.seed)?,
        (None, Some(f)) => plain_from_driver_fn(cfg.kappa, s.t_end, s.dt, f)?,
        (Some(pc), None) => simulate_driver_with(
            &pc,
            s.t_end,
            s.dt,
            cfg.seed,
            &mut SeededNoise::new(cfg.seed),
            &cfg.driver_options(),
        )?,
        (Some(pc), Some(f)) => from_driver_fn(&pc, s.t_end, s.dt, f, &cfg.driver_options())?,
    };
    Ok(path)
}

pub fn simulate(ctx: &Context) -> Result<i32, CliError> {
    let path = build_path(&ctx.cfg)?;
    ctx.log(&format!("simulated {} states, sigma = {:?}", path.len(), path.sigma));
    formats::write_path_csv(&path, &ctx.file("path.csv"))?;
    formats::write_path_dump(&path, &ctx.file("path.bin"))?;
    write_manifest(ctx, "simulate", &path)?;
    Ok(0)
}

pub fn trace(ctx: &Context) -> Result<i32, CliError> {
    let path = build_path(&ctx.cfg)?;
    let trace = compute_trace(&path, ctx.cfg.trace.stride)?;
    formats::write_trace_csv(&trace, &ctx.file("trace.csv"))?;
    let mut plot = Plot::new("trace");
    plot.polyline(&trace.points, "black");
    if let Some(tip) = trace.points.last() {
        plot.marker(*tip, "red");
    }
    formats::write_text(&plot.render(), &ctx.file("trace.svg"))?;
    if !ctx.cfg.trace.flow_points.is_empty() {
        let opts = FlowOptions {
            swallow_tol: ctx.cfg.trace.swallow_tol,
        };
        let flows = ctx
            .cfg
            .trace
            .flow_points
            .iter()
            .map(|&[re, im]| flow_point(&path, Complex64::new(re, im), &opts))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, f) in flows.iter().enumerate() {
            ctx.log(&format!("point {k}: swallowed at {:?}", f.swallow_time));
        }
        formats::write_flow_csv(&flows, &ctx.file("flow.csv"))?;
    }
    write_manifest(ctx, "trace", &path)?;
    Ok(0)
}

fn grid_index(path: &DrivingPath, t: f64) -> Result<usize, CliError> {
    path.index_of_time(t).ok_or_else(|| {
        CliError::Numeric(Error::TimeOutOfRange {
            t,
            end: path.end_time(),
        })
    })
}

/// Image of the real line under `f_t`, one polyline from far left to far
/// right. Points are clustered towards the prevertices and anything beyond
/// `clamp` (a corner at infinity) is dropped.
fn boundary_image(path: &DrivingPath, family: &ScFamily, index: usize, samples: usize, clamp: f64) -> Vec<Complex64> {
    let state = &path.states[index];
    let map = CorrectedMap {
        evaluator: family.evaluator(&state.z),
        correction: state.correction,
    };
    let z = &state.z;
    let span = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let far = 50.0 * span;
    let mut xs = Vec::new();
    let samples = samples.max(2);
    let cluster = |a: f64, b: f64, xs: &mut Vec<f64>| {
        for k in 0..samples {
            let u = (k as f64 + 0.5) / samples as f64;
            xs.push(a + (b - a) * 0.5 * (1.0 - (std::f64::consts::PI * u).cos()));
        }
    };
    cluster(-far, z[0], &mut xs);
    for w in z.windows(2) {
        cluster(w[0], w[1], &mut xs);
    }
    cluster(z[z.len() - 1], far, &mut xs);
    xs.into_iter()
        .filter_map(|x| map.eval(Complex64::new(x, 0.0)).ok())
        .filter(|p| p.norm() <= clamp)
        .collect()
}

fn snapshot_plot(path: &DrivingPath, family: &ScFamily, index: usize, snap: &PolygonSnapshot, samples: usize) -> Plot {
    let corners = snap.finite_positions();
    let extent = corners.iter().fold(1.0f64, |m, p| m.max(p.norm()));
    let boundary = boundary_image(path, family, index, samples, 4.0 * extent);
    let mut plot = Plot::new(&format!("t = {}", snap.time));
    if snap.closed {
        plot.polygon(&boundary, "black", "steelblue");
    } else {
        plot.polyline(&boundary, "black");
    }
    for c in &snap.corners {
        if let CornerPosition::Finite(p) = c.position {
            plot.marker(p, "blue");
        }
    }
    let state = &path.states[index];
    let map = CorrectedMap {
        evaluator: family.evaluator(&state.z),
        correction: state.correction,
    };
    if let Ok(tip) = map.eval(Complex64::new(state.w, 0.0)) {
        plot.marker(tip, "red");
    }
    plot
}

#[derive(Serialize)]
struct SnapshotFile<'a> {
    version: &'a str,
    config_hash: String,
    turning_sum: f64,
    snapshot: &'a PolygonSnapshot,
}

pub fn map(ctx: &Context) -> Result<i32, CliError> {
    ctx.cfg.require_prevertices("map")?;
    let path = build_path(&ctx.cfg)?;
    let family = ScFamily::new(path.config.as_ref().unwrap().betas(), ctx.cfg.quadrature())?;
    let index = grid_index(&path, ctx.cfg.map.time)?;
    let snap = polygon_snapshot(&path, &family, index)?;
    let file = SnapshotFile {
        version: VERSION,
        config_hash: ctx.cfg.hash(),
        turning_sum: snap.turning_sum(),
        snapshot: &snap,
    };
    formats::write_json(&file, &ctx.file("snapshot.json"))?;
    let plot = snapshot_plot(&path, &family, index, &snap, ctx.cfg.map.samples);
    formats::write_text(&plot.render(), &ctx.file("snapshot.svg"))?;
    Ok(0)
}

pub fn evolve(ctx: &Context) -> Result<i32, CliError> {
    ctx.cfg.require_prevertices("evolve")?;
    let path = build_path(&ctx.cfg)?;
    let family = ScFamily::new(path.config.as_ref().unwrap().betas(), ctx.cfg.quadrature())?;
    let indices = if ctx.cfg.evolve.frames.is_empty() {
        // five frames up to the last state before the collision time
        let last = path
            .states
            .iter()
            .rposition(|s| path.sigma.is_none_or(|sig| s.t < sig))
            .unwrap_or(0);
        (0..5).map(|k| k * last / 4).collect::<Vec<_>>()
    } else {
        ctx.cfg
            .evolve
            .frames
            .iter()
            .map(|&t| grid_index(&path, t))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut snaps = Vec::with_capacity(indices.len());
    for (k, &i) in indices.iter().enumerate() {
        let snap = polygon_snapshot(&path, &family, i)?;
        let plot = snapshot_plot(&path, &family, i, &snap, ctx.cfg.evolve.samples);
        formats::write_text(&plot.render(), &ctx.file(&format!("frame_{k:03}.svg")))?;
        snaps.push(snap);
    }
    formats::write_json(&snaps, &ctx.file("frames.json"))?;
    formats::write_corners_csv(&snaps, &ctx.file("corners.csv"))?;
    write_manifest(ctx, "evolve", &path)?;
    Ok(0)
}

/// The formula on its own: symmetric points, the complement identity, scale
/// invariance and, for κ = 8, the arcsine closed form.
fn hitting_formula_report(kappa: f64, x: f64, y: f64) -> Result<VerifyReport, CliError> {
    let p = hitting_probability_formula(kappa, x, y)?;
    let mut checks = vec![
        Check::new("P(x swallowed first)", p, p, 0.0),
        Check::new(
            "complement P(x,y) + P(y,x)",
            p + hitting_probability_formula(kappa, y, x)?,
            1.0,
            1e-8,
        ),
        Check::new("scale invariance", hitting_probability_formula(kappa, 7.0 * x, 7.0 * y)?, p, 1e-12),
        Check::new("symmetric points", hitting_probability_formula(kappa, 1.0, 1.0)?, 0.5, 1e-12),
    ];
    if kappa == 8.0 {
        let s = y / (x + y);
        let arcsine = 2.0 / std::f64::consts::PI * s.sqrt().asin();
        checks[0] = Check::new("P(x swallowed first)", p, arcsine, 1e-8);
    }
    Ok(VerifyReport::from_checks("hitting-formula", 1, None, checks))
}

fn theorem_report(ctx: &Context) -> Result<VerifyReport, CliError> {
    let path = build_path(&ctx.cfg)?;
    let th = &ctx.cfg.verify.theorem;
    let h = th.h.unwrap_or(path.dt * 1e-4);
    let points: Vec<(Complex64, f64)> = if th.points.is_empty() {
        let last = path.len().saturating_sub(2);
        let ws = [
            Complex64::new(0.3, 0.5),
            Complex64::new(-0.5, 0.2),
            Complex64::new(0.1, 1.0),
            Complex64::new(2.0, 0.1),
            Complex64::new(-0.2, 0.05),
        ];
        [0.2, 0.35, 0.5, 0.65, 0.8]
            .iter()
            .zip(ws)
            .map(|(f, w)| (w, path.states[((f * last as f64) as usize).max(1)].t))
            .collect()
    } else {
        th.points.iter().map(|&[re, im, t]| (Complex64::new(re, im), t)).collect()
    };
    let mut checks = Vec::with_capacity(points.len());
    for (w, t) in &points {
        let name = format!("residual at w = {w}, t = {t}");
        match theorem_rate_check(&path, *w, *t, h) {
            Ok(rc) => checks.push(Check::at_most(&name, rc.residual, th.tolerance)),
            Err(Error::Swallowed { .. }) | Err(Error::Collision { .. }) => {
                let mut c = Check::at_most(&name, f64::NAN, th.tolerance);
                c.status = Status::Inconclusive;
                checks.push(c);
            }
            Err(e) => return Err(e.into()),
        }
    }
    // headline is the worst residual
    let worst = checks
        .iter()
        .map(|c| c.value)
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let mut report = VerifyReport::from_checks("theorem-rate", points.len() as u64, Some(ctx.cfg.seed), checks);
    report.estimate = worst;
    report.threshold = th.tolerance;
    Ok(report.note("h", h))
}

pub fn run_verify(ctx: &Context, test: VerifyTest) -> Result<VerifyReport, CliError> {
    let cfg = &ctx.cfg;
    let v = &cfg.verify;
    let seed = cfg.seed;
    let report = match test {
        VerifyTest::Martingale => {
            let pc = cfg.require_prevertices("martingale")?;
            let opts = MartingaleOptions {
                driver: cfg.driver_options(),
                attrition_limit: v.martingale.attrition_limit,
                se_gate: v.martingale.se_gate,
            };
            let m = &v.martingale;
            martingale_test(&pc, m.t_end, m.dt, m.n, seed, &opts, &ctx.exec)?
        }
        VerifyTest::Qv => {
            let pc = cfg.require_prevertices("qv")?;
            let opts = MartingaleOptions {
                driver: cfg.driver_options(),
                ..MartingaleOptions::default()
            };
            let q = &v.qv;
            qv_ensemble(&pc, q.t_end, q.dt, q.n, seed, q.intervals, &opts, &ctx.exec)?
        }
        VerifyTest::HittingFormula => hitting_formula_report(cfg.kappa, v.hitting.x, v.hitting.y)?,
        VerifyTest::HittingMc => {
            let h = &v.hitting;
            let opts = HittingOptions {
                t_max: h.t_max,
                dt: h.dt,
                stop_ratio: h.stop_ratio,
                undecided_limit: h.undecided_limit,
                se_gate: h.se_gate,
            };
            hitting_probability_mc(cfg.kappa, h.x, h.y, h.n, seed, &opts, &ctx.exec)?
        }
        VerifyTest::TheoremRate => theorem_report(ctx)?,
        VerifyTest::MetricEquivalence => {
            let pc = cfg.require_prevertices("metric-equivalence")?;
            let m = &v.metric;
            let opts = MetricTestOptions {
                drift_sign: m.drift_sign,
                collision_tol: cfg.simulation.collision_tol,
                states: m.states,
                se_gate: m.se_gate,
                ..MetricTestOptions::default()
            };
            metric_equivalence_test(&pc, m.t, m.dt, m.n, seed, &opts, &ctx.exec)?
        }
        VerifyTest::ScOracles => sc_oracle_suite(&cfg.require_prevertices("sc-oracles")?)?,
    };
    Ok(report)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config_hash: String,
    version: &'a str,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

pub fn render_report(report: &VerifyReport) -> String {
    let mut s = format!("{}: {:?} (n = {})\n", report.test, report.status, report.n);
    for c in &report.checks {
        let se = c.se.map_or(String::new(), |se| format!(" se {se:.3e}"));
        s.push_str(&format!(
            "  {:<44} {:>13.6e}  target {:>13.6e}  gate {:.3e}{}  {:?}\n",
            c.name, c.value, c.target, c.threshold, se, c.status
        ));
    }
    for (k, v) in &report.notes {
        s.push_str(&format!("  {k} = {v}\n"));
    }
    s
}

pub fn verify(ctx: &Context, test: VerifyTest) -> Result<i32, CliError> {
    let report = run_verify(ctx, test)?;
    let file = ReportFile {
        config_hash: ctx.cfg.hash(),
        version: VERSION,
        report: &report,
    };
    formats::write_json(&file, &ctx.file(&format!("verify_{}.json", test.name())))?;
    print!("{}", render_report(&report));
    Ok(report.status.exit_code())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))
}
