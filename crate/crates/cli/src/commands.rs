use std::f64::consts::PI;

use debranges_core::{
    check_asymptotics, hermite_biehler_sweep, inverse_transform, kernel_integral,
    kernel_positivity_sweep, parseval_check, random_bump, smooth_probes, spectral_measure,
    transform_on_atoms, uniqueness_experiment, upper_half_grid, verify_containment, Complex64,
    Containment, DeBrangesSpace, EntireSolution, ExperimentOptions, SpectralMeasure,
    UniquenessReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, KernelGrid, SCHEMA};
use crate::error::{CliError, CliResult};
use crate::io::{fmt, to_json, write_file, MeasureFile};

pub const KERNEL_TOL: f64 = 1e-7;
pub const PARSEVAL_TOL: f64 = 1e-5;
pub const ASYMPTOTIC_TOL: f64 = 1e-2;
const NOISE_FLOOR: f64 = 1e-12;

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: std::path::PathBuf,
    pub seed: u64,
}

impl Context {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn solution(&self) -> CliResult<EntireSolution> {
        self.cfg.solution(&self.cfg.operator)
    }

    fn measure(&self, sol: &EntireSolution) -> CliResult<SpectralMeasure> {
        Ok(spectral_measure(sol, self.cfg.operator.right_angle.0, self.cfg.lambda_max)?)
    }

    fn write(&self, suffix: &str, contents: &str) -> CliResult<()> {
        let path = write_file(&self.out, &format!("{}.{suffix}", self.cfg.name), contents)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureFormat {
    Json,
    Csv,
}

pub fn spectrum(ctx: &Context, format: MeasureFormat) -> CliResult<()> {
    let sol = ctx.solution()?;
    let m = ctx.measure(&sol)?;
    println!("{:>4}  {:>22}  {:>22}", "n", "lambda", "weight");
    for (i, a) in m.atoms().iter().enumerate() {
        println!("{:>4}  {:>22.15e}  {:>22.15e}", i + 1, a.lambda, a.weight);
    }
    println!("{} atoms below {}", m.len(), m.lambda_max());
    let file = MeasureFile::from_measure(&m);
    match format {
        MeasureFormat::Json => ctx.write("measure.json", &to_json(&file)),
        MeasureFormat::Csv => ctx.write("measure.csv", &file.to_csv()),
    }
}

/// `sqrt(K(ζ,ζ) K(z,z))`, the Cauchy–Schwarz bound on `|K(ζ,z)|`.
fn kernel_scale(sol: &EntireSolution, c: f64, zeta: Complex64, z: Complex64) -> CliResult<f64> {
    let kz = kernel_integral(sol, c, zeta, zeta)?.re;
    let kw = kernel_integral(sol, c, z, z)?.re;
    Ok((kz * kw).sqrt())
}

fn kernel_points(grid: KernelGrid, n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<(Complex64, Complex64)> {
    match grid {
        KernelGrid::Diagonal => (0..n)
            .map(|j| {
                let t = if n > 1 { j as f64 / (n - 1) as f64 } else { 0.5 };
                let z = Complex64::new(radius * (2.0 * t - 1.0), 0.5 * radius * t);
                (z, z)
            })
            .collect(),
        KernelGrid::Random => (0..n)
            .map(|_| {
                let mut draw = || Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
                (draw(), draw())
            })
            .collect(),
    }
}

struct KernelRun {
    csv: String,
    max_rel: f64,
    points: usize,
}

fn kernel_run(sol: &EntireSolution, c: f64, pts: &[(Complex64, Complex64)]) -> CliResult<KernelRun> {
    let space = DeBrangesSpace::new(sol.clone(), c)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "zeta_re", "zeta_im", "z_re", "z_im", "formula_re", "formula_im", "integral_re", "integral_im", "abs_diff", "rel_diff",
    ])
    .unwrap();
    let mut max_rel: f64 = 0.0;
    for &(zeta, z) in pts {
        let kf = space.kernel(zeta, z)?;
        let ki = kernel_integral(sol, c, zeta, z)?;
        let d = (kf - ki).norm();
        let scale = kernel_scale(sol, c, zeta, z)?;
        let rel = if scale > 0.0 { d / scale } else { d };
        max_rel = max_rel.max(rel);
        w.write_record(
            [zeta.re, zeta.im, z.re, z.im, kf.re, kf.im, ki.re, ki.im, d, rel].map(fmt),
        )
        .unwrap();
    }
    Ok(KernelRun { csv: String::from_utf8(w.into_inner().unwrap()).unwrap(), max_rel, points: pts.len() })
}

pub fn kernel(ctx: &Context, c: Option<f64>, grid: Option<KernelGrid>) -> CliResult<()> {
    let sol = ctx.solution()?;
    let spec = &ctx.cfg.kernel;
    let c = c.or(spec.c.map(|r| r.0)).unwrap_or(sol.b());
    let grid = grid.unwrap_or(spec.grid);
    let pts = kernel_points(grid, spec.points, spec.radius, &mut ctx.rng());
    let run = kernel_run(&sol, c, &pts)?;
    ctx.write("kernel.csv", &run.csv)?;
    println!("kernel at c = {c}: {} points, max relative discrepancy {:.3e}", run.points, run.max_rel);
    if run.max_rel > KERNEL_TOL {
        return Err(CliError::Verification(format!("kernel discrepancy {:.3e} exceeds {KERNEL_TOL:e}", run.max_rel)));
    }
    Ok(())
}

#[derive(Serialize)]
struct ProbeSummary {
    lo: f64,
    hi: f64,
    omega: f64,
    phase: f64,
    norm_sq: f64,
    atom_sum: f64,
    parseval_error: f64,
    roundtrip_sup_error: f64,
}

pub fn transform(ctx: &Context) -> CliResult<()> {
    let sol = ctx.solution()?;
    let m = ctx.measure(&sol)?;
    let (a, b) = (sol.a(), sol.b());
    let mut rng = ctx.rng();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["probe", "lambda", "fhat_re", "fhat_im"]).unwrap();
    let mut summaries = Vec::new();
    for i in 0..ctx.cfg.probes {
        let bump = random_bump(&mut rng, a, b)?;
        let f = bump.grid_function(48, 8)?;
        let fhat = transform_on_atoms(&sol, &f, &m)?;
        for (atom, v) in m.atoms().iter().zip(&fhat) {
            w.write_record([i.to_string(), fmt(atom.lambda), fmt(v.re), fmt(v.im)]).unwrap();
        }
        let report = parseval_check(&m, &sol, &f)?;
        let back = inverse_transform(&m, &sol, &fhat, &f.grid)?;
        summaries.push(ProbeSummary {
            lo: bump.lo,
            hi: bump.hi,
            omega: bump.omega,
            phase: bump.phase,
            norm_sq: report.norm_sq,
            atom_sum: report.atom_sum,
            parseval_error: report.relative_error,
            roundtrip_sup_error: back.sup_distance(&f)?,
        });
    }
    ctx.write("transform.csv", &String::from_utf8(w.into_inner().unwrap()).unwrap())?;
    let worst = summaries.iter().map(|s| s.parseval_error).fold(0.0, f64::max);
    ctx.write(
        "transform.json",
        &to_json(&json!({
            "schema": SCHEMA,
            "name": ctx.cfg.name,
            "seed": ctx.seed,
            "lambda_max": m.lambda_max(),
            "atoms": m.len(),
            "max_parseval_error": worst,
            "probes": summaries,
        })),
    )?;
    println!("{} probes, {} atoms, max Parseval error {worst:.3e}", ctx.cfg.probes, m.len());
    Ok(())
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    passed: bool,
    metrics: Value,
}

fn parseval_suite(ctx: &Context, sol: &EntireSolution) -> CliResult<Suite> {
    let (m, source) = match &ctx.cfg.measure_file {
        Some(p) => (MeasureFile::read(&ctx.cfg.resolve(p))?.to_measure()?, p.display().to_string()),
        None => (ctx.measure(sol)?, "computed".to_string()),
    };
    let mut rng = ctx.rng();
    let mut worst: f64 = 0.0;
    for f in smooth_probes(&mut rng, ctx.cfg.probes, sol.a(), sol.b())? {
        worst = worst.max(parseval_check(&m, sol, &f)?.relative_error);
    }
    Ok(Suite {
        name: "parseval",
        passed: worst < PARSEVAL_TOL,
        metrics: json!({ "measure": source, "atoms": m.len(), "max_relative_error": worst, "tolerance": PARSEVAL_TOL }),
    })
}

fn hermite_biehler_suite(ctx: &Context, sol: &EntireSolution) -> CliResult<Suite> {
    let r = ctx.cfg.kernel.radius;
    let grid = upper_half_grid(r, r, 20);
    let (a, b) = (sol.a(), sol.b());
    let mut hb = 0;
    let mut pos = 0;
    let mut cs = Vec::new();
    for k in 1..=4 {
        let c = a + (b - a) * k as f64 / 4.0;
        let h = DeBrangesSpace::new(sol.clone(), c)?;
        hb += hermite_biehler_sweep(&h, &grid)?.violations;
        pos += kernel_positivity_sweep(&h, &grid)?.violations;
        cs.push(c);
    }
    Ok(Suite {
        name: "hermite_biehler",
        passed: hb == 0 && pos == 0,
        metrics: json!({ "c": cs, "grid_points": grid.len(), "hb_violations": hb, "positivity_violations": pos }),
    })
}

fn duality_suite(ctx: &Context, sol: &EntireSolution) -> CliResult<Suite> {
    let spec = &ctx.cfg.kernel;
    let pts = kernel_points(KernelGrid::Random, spec.points, spec.radius, &mut ctx.rng());
    let run = kernel_run(sol, sol.b(), &pts)?;
    Ok(Suite {
        name: "kernel_duality",
        passed: run.max_rel < KERNEL_TOL,
        metrics: json!({ "points": run.points, "max_relative_discrepancy": run.max_rel, "tolerance": KERNEL_TOL }),
    })
}

fn nesting_suite(ctx: &Context, sol: &EntireSolution) -> CliResult<Suite> {
    let (a, b) = (sol.a(), sol.b());
    let (c1, c2) = (a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0);
    let lambda = ctx.cfg.lambda_max.max(1e4 * (PI / (b - a)).powi(2));
    let m = spectral_measure(sol, ctx.cfg.operator.right_angle.0, lambda)?;
    let h1 = DeBrangesSpace::new(sol.clone(), c1)?;
    let h2 = DeBrangesSpace::new(sol.clone(), c2)?;
    let mut rng = ctx.rng();
    let mut probes = smooth_probes(&mut rng, 3, a, c1)?;
    probes.extend(smooth_probes(&mut rng, 1, c1, c2)?);
    let rep = verify_containment(&h1, &h2, &m, &probes, None)?;
    let outer = rep.probes.last().expect("one outer probe");
    Ok(Suite {
        name: "nesting",
        passed: rep.verdict == Containment::FirstInSecond && rep.strict,
        metrics: json!({
            "c": [c1, c2],
            "lambda_max": lambda,
            "verdict": format!("{:?}", rep.verdict),
            "inner_errors_in_second": rep.probes[..3].iter().map(|p| p.error_in_second).collect::<Vec<_>>(),
            "outer_error_in_first": outer.error_in_first,
            "outer_error_in_second": outer.error_in_second,
        }),
    })
}

struct Asymptotics {
    ladder: Vec<f64>,
    errors: Vec<f64>,
    passed: bool,
}

fn asymptotics_run(sol: &EntireSolution, x: f64, xt: f64, y_min: f64, y_max: f64, steps: usize) -> CliResult<Asymptotics> {
    let steps = steps.max(2);
    let ladder: Vec<f64> = (0..steps).map(|i| y_min * (y_max / y_min).powf(i as f64 / (steps - 1) as f64)).collect();
    let errors = check_asymptotics(sol, x, xt, &ladder)?;
    let last = *errors.last().unwrap();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0] || w[0].max(w[1]) < NOISE_FLOOR);
    Ok(Asymptotics { ladder, errors, passed: last < ASYMPTOTIC_TOL && decreasing })
}

fn default_points(sol: &EntireSolution) -> (f64, f64) {
    let (a, b) = (sol.a(), sol.b());
    (a + 2.0 * (b - a) / PI, a + (b - a) / PI)
}

fn asymptotics_suite(sol: &EntireSolution) -> CliResult<Suite> {
    let (x, xt) = default_points(sol);
    let r = asymptotics_run(sol, x, xt, 1e3, 1e4, 9)?;
    Ok(Suite {
        name: "asymptotics",
        passed: r.passed,
        metrics: json!({ "x": x, "x_ref": xt, "errors": r.errors, "tolerance": ASYMPTOTIC_TOL }),
    })
}

pub fn verify(ctx: &Context) -> CliResult<()> {
    let sol = ctx.solution()?;
    let suites = vec![
        parseval_suite(ctx, &sol)?,
        hermite_biehler_suite(ctx, &sol)?,
        duality_suite(ctx, &sol)?,
        nesting_suite(ctx, &sol)?,
        asymptotics_suite(&sol)?,
    ];
    for s in &suites {
        println!("{:<16} {}", s.name, if s.passed { "pass" } else { "FAIL" });
    }
    let passed = suites.iter().all(|s| s.passed);
    ctx.write(
        "verify.json",
        &to_json(&json!({ "schema": SCHEMA, "name": ctx.cfg.name, "seed": ctx.seed, "passed": passed, "suites": suites })),
    )?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn report_json(name: &str, r: &UniquenessReport) -> Value {
    let c = &r.comparison;
    let inf = |x: f64| if x.is_finite() { json!(x) } else { json!(null) };
    json!({
        "schema": SCHEMA,
        "name": name,
        "verdict": r.verdict.as_str(),
        "measures_equal": r.measures_equal,
        "measure_distance": {
            "matched": c.matched,
            "unmatched": c.unmatched,
            "first_atom_difference": inf(c.first_atom_difference),
            "max_lambda_difference": inf(c.max_lambda_difference),
            "gauge_ratio": inf(c.gauge_ratio),
            "max_weight_difference": inf(c.max_weight_difference),
        },
        "eta": r.eta.as_ref().map(|e| json!({
            "samples": e.samples,
            "slope": e.slope,
            "intercept": e.intercept,
            "fit_residual": e.fit_residual,
        })),
        "slope_deviation": r.slope_deviation,
        "density_error": r.density_error,
        "logderivative_error": r.logderivative.as_ref().map(|l| l.max_error),
        "logderivative_skipped": r.logderivative.as_ref().map(|l| l.skipped.clone()),
        "potential_match": r.potential_match,
        "centrifugal_fit": r.centrifugal.map(|(a, b)| [a, b]),
        "growth_note": r.growth_note,
        "tolerances": {
            "weight": r.options.weight_tol,
            "slope": r.options.slope_tol,
            "identity": r.options.identity_tol,
            "potential": r.options.potential_tol,
            "centrifugal": r.options.centrifugal_tol,
        },
    })
}

pub fn uniqueness(ctx: &Context) -> CliResult<()> {
    let second = ctx
        .cfg
        .second_operator
        .as_ref()
        .ok_or_else(|| CliError::Config("uniqueness needs a second_operator".into()))?;
    let s1 = ctx.solution()?;
    let s2 = ctx.cfg.solution(second)?;
    let opts = ExperimentOptions {
        lambda_max: ctx.cfg.lambda_max,
        right_angle: ctx.cfg.operator.right_angle.0,
        ..Default::default()
    };
    let r = uniqueness_experiment(&s1, &s2, &opts)?;
    println!("verdict: {}", r.verdict.as_str());
    if let Some(e) = &r.eta {
        println!("eta: slope {:.12}, intercept {:.12}", e.slope, e.intercept);
    }
    ctx.write("uniqueness.json", &to_json(&report_json(&ctx.cfg.name, &r)))
}

pub struct AsymptoticsArgs {
    pub x: Option<f64>,
    pub x_ref: Option<f64>,
    pub y_min: f64,
    pub y_max: f64,
    pub steps: usize,
}

pub fn asymptotics(ctx: &Context, args: &AsymptoticsArgs) -> CliResult<()> {
    let sol = ctx.solution()?;
    let (dx, dxt) = default_points(&sol);
    let (x, xt) = (args.x.unwrap_or(dx), args.x_ref.unwrap_or(dxt));
    let r = asymptotics_run(&sol, x, xt, args.y_min, args.y_max, args.steps)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["y", "relative_error"]).unwrap();
    for (y, e) in r.ladder.iter().zip(&r.errors) {
        w.write_record([fmt(*y), fmt(*e)]).unwrap();
    }
    ctx.write("asymptotics.csv", &String::from_utf8(w.into_inner().unwrap()).unwrap())?;
    println!("relative error {:.3e} at y = {}", r.errors.last().unwrap(), r.ladder.last().unwrap());
    if r.passed {
        Ok(())
    } else {
        Err(CliError::Verification("asymptotic error not small and decreasing".into()))
    }
}
