//! The `check`, `dim` and `example` pipelines.

use crate::manifest::{RunArgs, RunManifest, Source};
use num_complex::Complex64;
use rgdms::format::sig12;
use rgdms::gdms::{builtin, example_section3, load_system, to_json};
use rgdms::julia::{
    box_counting_dim, inverse_iteration, render, CloudParams, JuliaCloud, VertexSelector, Viewport,
};
use rgdms::periodic::{seed_points, PeriodicSettings};
use rgdms::thermo::{
    analytic_bound_section3, delta_operator, find_delta, grid, DeltaRecord, OperatorSettings, PeriodicData,
    PressureProfile, TransferOperator,
};
use rgdms::verify::{
    check_bsc_certified, check_hyperbolic_heuristic, check_loxodromic_condition, estimate_expansion,
    exceptional_screen, non_elementary_search, BscCertificate, BscVerdict, CheckOutcome, Disc,
};
use rgdms::{Error, GdmsSystem};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// Bad input: configuration, schema, I/O, invalid arguments.
    Usage = 1,
    /// A check or assertion failed.
    Failed = 2,
    /// A check could not decide.
    Inconclusive = 3,
    /// The pressure zero could not be bracketed.
    Bracket = 4,
}

pub type Outcome = std::result::Result<Exit, String>;

const NON_ELEMENTARY_PERIODS: usize = 3;
const LOXODROMIC_LENGTH: usize = 4;
const ORBIT_DEPTH: usize = 6;
const ORBIT_GAP: f64 = 0.1;
const ORBIT_CAP: usize = 1_000_000;
const SEED_PERIODS: usize = 4;
const RASTER: usize = 512;

pub struct Loaded {
    pub sys: GdmsSystem,
    pub source: Source,
    /// `n` when the system is the built-in three-vertex example.
    pub section3: Option<usize>,
}

pub fn load(args: &RunArgs) -> std::result::Result<Loaded, String> {
    match (&args.config, &args.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let sys = load_system(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Loaded {
                sys,
                source: Source::Config(path.display().to_string()),
                section3: None,
            })
        }
        (None, Some(name)) => {
            let sys = builtin(name).map_err(|e| e.to_string())?;
            let section3 = name
                .strip_prefix("section3:")
                .and_then(|n| n.parse().ok());
            Ok(Loaded {
                sys,
                source: Source::Builtin(name.clone()),
                section3,
            })
        }
        (None, None) => Err("one of --config or --builtin is required".into()),
    }
}

fn source_label(s: &Source) -> String {
    match s {
        Source::Config(p) => format!("config {p}"),
        Source::Builtin(n) => format!("builtin {n}"),
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> std::result::Result<(), String> {
    fs::write(dir.join(name), bytes).map_err(|e| format!("cannot write {}: {e}", dir.join(name).display()))
}

fn build_cloud(sys: &GdmsSystem, args: &RunArgs) -> rgdms::Result<JuliaCloud> {
    let seeds = seed_points(sys, SEED_PERIODS, &PeriodicSettings::default())?;
    let params = CloudParams {
        samples: args.samples,
        rng_seed: args.seed,
        ..CloudParams::default()
    };
    inverse_iteration(sys, &seeds, &params)
}

/// `D(0, 5)` unless the cloud reaches beyond it.
fn reference_disc(cloud: Option<&JuliaCloud>) -> Disc {
    let reach = cloud
        .map(|c| {
            c.all_points()
                .iter()
                .filter_map(|p| p.finite())
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0);
    let radius = if reach < 5.0 { 5.0 } else { 1.5 * reach };
    Disc::new(Complex64::new(0.0, 0.0), radius)
}

pub struct CheckRun {
    pub items: Vec<(String, CheckOutcome)>,
    pub report: String,
    pub cloud: Option<JuliaCloud>,
    pub bsc: Option<BscCertificate>,
}

impl CheckRun {
    pub fn exit(&self) -> Exit {
        if self.items.iter().any(|(_, o)| *o == CheckOutcome::Fail) {
            Exit::Failed
        } else if self.items.iter().any(|(_, o)| *o == CheckOutcome::Inconclusive) {
            Exit::Inconclusive
        } else {
            Exit::Success
        }
    }
}

fn pass_if(b: bool) -> CheckOutcome {
    if b {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    }
}

pub fn run_checks(sys: &GdmsSystem, args: &RunArgs) -> rgdms::Result<CheckRun> {
    let mut items = Vec::new();
    let mut r = String::new();
    let _ = writeln!(r, "vertices: {}", sys.vertex_count());
    let _ = writeln!(r, "symbols: {}", sys.symbols().len());
    let (rho, _) = sys.incidence().spectral_radius(1e-13)?;
    let _ = writeln!(r, "spectral radius: {}", sig12(rho));

    items.push(("irreducible".to_string(), pass_if(sys.is_irreducible())));
    items.push(("aperiodic".to_string(), pass_if(sys.is_aperiodic())));

    let ne = non_elementary_search(sys, NON_ELEMENTARY_PERIODS, &PeriodicSettings::default())?;
    for (v, o) in ne.iter().enumerate() {
        items.push((format!("non-elementary vertex {}", v + 1), *o));
    }

    let lox = check_loxodromic_condition(sys, LOXODROMIC_LENGTH)?;
    let lox_note = if lox.vacuous {
        " (vacuous: no degree-one generator)".to_string()
    } else if let Some((w, kind)) = &lox.offender {
        format!(" ({} is {kind:?})", w.label(sys))
    } else {
        format!(" ({} loop words up to length {LOXODROMIC_LENGTH})", lox.checked)
    };
    items.push((format!("loxodromic{lox_note}"), pass_if(lox.holds)));

    let cloud = match build_cloud(sys, args) {
        Ok(c) => Some(c),
        Err(e) => {
            let _ = writeln!(r, "julia cloud: unavailable ({e})");
            None
        }
    };
    match &cloud {
        Some(c) => {
            let h = check_hyperbolic_heuristic(sys, c, ORBIT_DEPTH, ORBIT_GAP, ORBIT_CAP)?;
            let dists: Vec<String> = h.min_distance.iter().map(|d| sig12(*d)).collect();
            let trunc = if h.truncated { ", orbit cap reached" } else { "" };
            items.push((
                format!(
                    "hyperbolic HEURISTIC (post-critical distance {} vs gap {}{trunc})",
                    dists.join(" "),
                    sig12(h.gap)
                ),
                h.outcome,
            ));
        }
        None => items.push(("hyperbolic HEURISTIC (no cloud)".to_string(), CheckOutcome::Inconclusive)),
    }

    let u = reference_disc(cloud.as_ref());
    let bsc = match check_bsc_certified(sys, u, cloud.as_ref()) {
        Ok(cert) => {
            let o = match cert.verdict {
                BscVerdict::Certified | BscVerdict::SampledOnly => CheckOutcome::Pass,
                BscVerdict::Overlap => CheckOutcome::Fail,
                BscVerdict::Undecided => CheckOutcome::Inconclusive,
            };
            items.push((format!("BSC {}", cert.verdict.label()), o));
            Some(cert)
        }
        Err(Error::CloudEscapesU { count }) => {
            items.push((format!("BSC ({count} cloud samples outside U)"), CheckOutcome::Fail));
            None
        }
        Err(e) => return Err(e),
    };

    for (name, o) in &items {
        let _ = writeln!(r, "{name}: {}", o.label());
    }
    if let Some(cert) = &bsc {
        r.push_str("--- separation certificate\n");
        r.push_str(&cert.to_text());
    }
    r.push_str("--- exceptional screen (generator level)\n");
    for (v, tally) in exceptional_screen(sys)?.iter().enumerate() {
        let pts: Vec<String> = tally
            .iter()
            .map(|(z, k)| match z.finite() {
                Some(c) => format!("{} {} ({k} maps)", sig12(c.re), sig12(c.im)),
                None => format!("inf ({k} maps)"),
            })
            .collect();
        let _ = writeln!(r, "vertex {}: {}", v + 1, if pts.is_empty() { "none".into() } else { pts.join(", ") });
    }
    Ok(CheckRun {
        items,
        report: r,
        cloud,
        bsc,
    })
}

fn overall(exit: Exit) -> &'static str {
    match exit {
        Exit::Success => "PASS",
        Exit::Inconclusive => "INCONCLUSIVE",
        _ => "FAIL",
    }
}

fn prepare_out(args: &RunArgs) -> std::result::Result<(), String> {
    fs::create_dir_all(&args.out).map_err(|e| format!("cannot create {}: {e}", args.out.display()))
}

pub fn cmd_check(args: &RunArgs, threads: Option<usize>) -> Outcome {
    let loaded = load(args)?;
    prepare_out(args)?;
    let manifest = RunManifest::new("check", loaded.source.clone(), args, threads);
    write(&args.out, "manifest.json", manifest.to_json().as_bytes())?;
    let run = run_checks(&loaded.sys, args).map_err(|e| e.to_string())?;
    let exit = run.exit();
    let text = format!(
        "system: {}\n{}overall: {}\n",
        source_label(&loaded.source),
        run.report,
        overall(exit)
    );
    write(&args.out, "report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(exit)
}

pub struct DimRun {
    pub delta: Option<DeltaRecord>,
    pub report: String,
    pub exit: Exit,
}

fn view_of(points: &[rgdms::SpherePoint]) -> Viewport {
    let zs: Vec<Complex64> = points.iter().filter_map(|p| p.finite()).filter(|z| z.norm() < 1e6).collect();
    if zs.is_empty() {
        return Viewport::square(0.0, 0.0, 2.0);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in &zs {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let half = 0.55 * (x1 - x0).max(y1 - y0).max(1e-6);
    Viewport::square(0.5 * (x0 + x1), 0.5 * (y0 + y1), half)
}

fn delta_line(name: &str, d: &rgdms::Result<DeltaRecord>) -> String {
    match d {
        Ok(r) => format!(
            "{name}: {} (bracket {} {}, final {} {})\n",
            sig12(r.delta),
            sig12(r.bracket.0),
            sig12(r.bracket.1),
            sig12(r.lo),
            sig12(r.hi)
        ),
        Err(e) => format!("{name}: unavailable ({e})\n"),
    }
}

/// Cloud → periodic points → pressure → δ, with outputs written to `args.out`.
pub fn run_dim(loaded: &Loaded, args: &RunArgs, cloud: JuliaCloud) -> std::result::Result<DimRun, String> {
    let sys = &loaded.sys;
    let mut r = String::new();
    let (lo, hi) = args.bracket;
    let e = |e: Error| e.to_string();

    for v in 0..cloud.vertex_count() {
        write(&args.out, &format!("points_{}.txt", v + 1), cloud.to_point_list(v).as_bytes())?;
        let pts = cloud.points(v);
        let raster = render(&cloud, VertexSelector::Vertex(v), &view_of(&pts), RASTER, RASTER);
        raster.write(&args.out.join(format!("julia_{}.ppm", v + 1))).map_err(e)?;
    }
    let _ = writeln!(r, "cloud samples: {}", cloud.len());

    let periodic = PeriodicData::compute(sys, args.period, &PeriodicSettings::default(), Some(&cloud)).map_err(e)?;
    let counts: Vec<String> = (1..=periodic.n_max()).map(|n| periodic.count(n).to_string()).collect();
    let _ = writeln!(
        r,
        "periodic points per period: {}{}",
        counts.join(" "),
        if periodic.seeded { " (seeded search)" } else { "" }
    );
    if periodic.failed_words > 0 {
        let _ = writeln!(r, "periodic words without a solution: {}", periodic.failed_words);
    }

    let op = TransferOperator::build(sys, &cloud).map_err(e)?;
    let settings = OperatorSettings::default();
    let delta_op = delta_operator(&op, lo, hi, args.tol, &settings);
    let n = periodic.n_max();
    let delta_per = find_delta(|t| periodic.pressure(t, n), lo, hi, args.tol);
    let delta_ext = find_delta(|t| periodic.extrapolated(t), lo, hi, args.tol);
    r.push_str(&delta_line("delta (operator)", &delta_op));
    r.push_str(&delta_line(&format!("delta (periodic, n = {n})"), &delta_per));
    r.push_str(&delta_line("delta (periodic, extrapolated)", &delta_ext));

    match box_counting_dim(&cloud, VertexSelector::All, None) {
        Ok(b) => {
            let _ = writeln!(r, "box dimension: {} (rms residual {})", sig12(b.slope), sig12(b.residual));
            if let Ok(d) = &delta_op {
                let ok = b.slope <= d.delta + 0.08;
                let _ = writeln!(r, "box dimension <= delta + 0.08: {}", if ok { "PASS" } else { "FAIL" });
            }
        }
        Err(err) => {
            let _ = writeln!(r, "box dimension: unavailable ({err})");
        }
    }
    if let Some(k) = loaded.section3 {
        let bound = analytic_bound_section3(k).map_err(e)?;
        let _ = writeln!(r, "analytic bound 1 + log((3+sqrt 5)/2)/log {k}: {}", sig12(bound));
    }
    match estimate_expansion(&periodic) {
        Ok(x) => {
            let _ = writeln!(
                r,
                "expansion fit: C {} lambda {} slack {}{}",
                sig12(x.c),
                sig12(x.lambda),
                sig12(x.slack),
                if x.is_expanding() { " (expansion consistent)" } else { "" }
            );
        }
        Err(err) => {
            let _ = writeln!(r, "expansion fit: {err}");
        }
    }

    let mut profile = PressureProfile::sample(Some(&periodic), Some(&op), &grid(lo, hi, 11)).map_err(e)?;
    profile.delta = delta_op.as_ref().ok().copied();
    profile.delta_source = "operator".into();
    write(&args.out, "pressure.tsv", profile.to_tsv().as_bytes())?;

    let exit = match &delta_op {
        Ok(_) => Exit::Success,
        Err(Error::BracketFailure { .. }) => Exit::Bracket,
        Err(err) => return Err(err.to_string()),
    };
    Ok(DimRun {
        delta: delta_op.ok(),
        report: r,
        exit,
    })
}

pub fn cmd_dim(args: &RunArgs, threads: Option<usize>) -> Outcome {
    let loaded = load(args)?;
    prepare_out(args)?;
    let manifest = RunManifest::new("dim", loaded.source.clone(), args, threads);
    write(&args.out, "manifest.json", manifest.to_json().as_bytes())?;
    let checks = run_checks(&loaded.sys, args).map_err(|e| e.to_string())?;
    let check_exit = checks.exit();
    let mut text = format!("system: {}\n{}checks: {}\n", source_label(&loaded.source), checks.report, overall(check_exit));
    if check_exit != Exit::Success && !args.force {
        text.push_str("dimension not computed: checks did not pass (use --force)\n");
        write(&args.out, "report.txt", text.as_bytes())?;
        print!("{text}");
        return Ok(check_exit);
    }
    let Some(cloud) = checks.cloud else {
        return Err("no Julia cloud could be generated".into());
    };
    let dim = run_dim(&loaded, args, cloud)?;
    text.push_str("--- dimension\n");
    text.push_str(&dim.report);
    write(&args.out, "report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(dim.exit)
}

pub fn cmd_example(n: usize, base: &RunArgs, threads: Option<usize>) -> Outcome {
    if n < 5 {
        return Err(format!("the three-vertex example needs n >= 5, got {n}"));
    }
    let mut args = base.clone();
    args.config = None;
    args.builtin = Some(format!("section3:{n}"));
    let loaded = load(&args)?;
    prepare_out(&args)?;
    let sys = example_section3(n).map_err(|e| e.to_string())?;
    write(&args.out, "config.json", to_json(&sys).as_bytes())?;
    let manifest = RunManifest::new(&format!("example {n}"), loaded.source.clone(), &args, threads);
    write(&args.out, "manifest.json", manifest.to_json().as_bytes())?;

    let checks = run_checks(&loaded.sys, &args).map_err(|e| e.to_string())?;
    let check_exit = checks.exit();
    let mut text = format!(
        "system: {}\n{}checks: {}\n",
        source_label(&loaded.source),
        checks.report,
        overall(check_exit)
    );
    let bsc_certified = checks.bsc.as_ref().is_some_and(|c| c.verdict == BscVerdict::Certified);
    let Some(cloud) = checks.cloud else {
        return Err("no Julia cloud could be generated".into());
    };
    let dim = run_dim(&loaded, &args, cloud)?;
    text.push_str("--- dimension\n");
    text.push_str(&dim.report);

    let golden = (3.0 + 5f64.sqrt()) / 2.0;
    let (rho, _) = sys.incidence().spectral_radius(1e-13).map_err(|e| e.to_string())?;
    let bound = analytic_bound_section3(n).map_err(|e| e.to_string())?;
    let facts = [
        (
            format!("spectral radius {} = (3+sqrt 5)/2", sig12(rho)),
            (rho - golden).abs() < 1e-10,
        ),
        ("BSC certified".to_string(), bsc_certified),
        (
            format!(
                "delta {} <= bound {} < 1.6",
                dim.delta.map_or("n/a".into(), |d| sig12(d.delta)),
                sig12(bound)
            ),
            dim.delta.is_some_and(|d| d.delta <= bound) && bound < 1.6,
        ),
    ];
    text.push_str("--- assertions\n");
    for (name, ok) in &facts {
        let _ = writeln!(text, "{name}: {}", if *ok { "PASS" } else { "FAIL" });
    }
    let all = facts.iter().all(|f| f.1);
    let _ = writeln!(text, "example: {}", if all { "PASS" } else { "FAIL" });
    write(&args.out, "report.txt", text.as_bytes())?;
    print!("{text}");
    Ok(if all { Exit::Success } else { Exit::Failed })
}
