//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run a subset by number: `cargo test --test acceptance -- 5 7`.

use std::fs;
use std::process::Command;
use std::time::Instant;

use ftrlab_cli::config::ExperimentConfig;
use ftrlab_cli::experiments::{execute, Outcome};
use ftrlab_cli::pipelines;
use ftrlab_core::analysis::{
    fit_growth_exponent, gaussian_bump, is_admissible, translation_average_multi, DecouplingGeometry, TestFamily,
};
use ftrlab_core::dnls::{
    contraction_report, decay_exponent, picard_solve, scattering_states, splitstep_solve, DecayWindow, Direction,
    DnlsProblem, SolveConfig,
};
use ftrlab_core::lattice::{forward_dft, inverse_dft, propagate, LatticeField, TorusGrid, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets, one block per criterion.
const BESSEL_TOL: f64 = 1e-8;
const BESSEL_BUDGET_S: f64 = 1.0;
const UNITARITY_TOL: f64 = 1e-12;
const ROUND_TRIP_TOL: f64 = 1e-12;
const CURVE_RESCALE_TOL: f64 = 1e-8;
const CURVE_RESCALE_BUDGET_S: f64 = 30.0;
const SURFACE_RESCALE_TOL: f64 = 1e-6;
const DECOUPLING_BOUND: (f64, f64) = (4.0, 0.15);
const DECOUPLING_GROWTH_MAX: f64 = 0.15;
const SINGLE_SLAB_TOL: f64 = 1e-12;
const COMBINE_SLACK: f64 = 1e-6;
const SURFACE_EPS_MAX: f64 = 0.10;
const SURFACE_RESIDUAL_MAX: f64 = 0.05;
const CURVE_EPS_MAX: f64 = 0.05;
const RESTRICTION_BUDGET_S: f64 = 600.0;
const TRANSLATION_GAP_TOL: f64 = 1e-6;
const PLANCHEREL_TOL: f64 = 1e-8;
const CONTRACTION_MAX: f64 = 0.5;
const PICARD_MAX_ITERATIONS: usize = 8;
const PICARD_RATIO_MAX: f64 = 0.6;
const PICARD_RESIDUAL_MAX: f64 = 1e-9;
const CROSS_GAP_TOL: f64 = 1e-5;
const MASS_STEP_TOL: f64 = 1e-12;
const SCATTER_MONOTONE_SLACK: f64 = 1e-14;
const SCATTER_DEVIATION_AT_40: f64 = 1e-3;
const SCATTER_TAIL_TOL: f64 = 1e-4;
const DECAY_D1: (f64, f64) = (-1.0 / 3.0, 0.05);
const DECAY_D2: (f64, f64) = (-2.0 / 3.0, 0.1);
const DECAY_BANDPASS: (f64, f64) = (-0.5, 0.05);
const BANDPASS_CUTOFF: f64 = 1.2;
const THREAD_COUNTS: [usize; 3] = [1, 4, 8];

type Verdict = Result<(bool, String), String>;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text, None).unwrap_or_else(|e| panic!("built-in config: {e}"))
}

fn run(text: &str) -> Result<Outcome, String> {
    execute(&config(text)).map_err(|e| e.to_string())
}

fn summary_f64(o: &Outcome, key: &str) -> Result<f64, String> {
    o.summary.get(key).and_then(|v| v.as_f64()).ok_or_else(|| format!("summary lacks `{key}`"))
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

/// `J_n(x)` from its power series, adequate for `x ≤ 4`.
fn bessel_j(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs();
    let half = 0.5 * x;
    let mut term = (1..=m).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    for k in 1..100u64 {
        term *= -half * half / (k * (k + m)) as f64;
        sum += term;
    }
    if n < 0 && m % 2 == 1 {
        -sum
    } else {
        sum
    }
}

fn c01_bessel() -> Verdict {
    let f = LatticeField::delta(1, 64, &[0]).map_err(err)?;
    let grid = TorusGrid::new(1, 512).map_err(err)?;
    let start = Instant::now();
    let mut fields = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        fields.push((t, propagate(&f, t, grid).map_err(err)?));
    }
    let secs = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    for (t, u) in &fields {
        for n in -64i64..=64 {
            let exact = C64::from_polar(1.0, -2.0 * t) * C64::new(0.0, 1.0).powi(n as i32) * bessel_j(n, 2.0 * t);
            worst = worst.max((u.get(&[n]) - exact).norm());
        }
    }
    Ok((
        worst <= BESSEL_TOL && secs < BESSEL_BUDGET_S,
        format!("max error {worst:.2e} (tol {BESSEL_TOL:e}), {secs:.3} s (budget {BESSEL_BUDGET_S} s)"),
    ))
}

fn c02_unitarity() -> Verdict {
    // Support |x|∞ ≤ 4 and |t| ≤ 5: the window of radius 48 keeps the Bessel
    // tails (|J_n(10)| < 1e-17 for n ≥ 40) so the norm is not truncated.
    const WINDOW: usize = 48;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut unit, mut trip): (f64, f64) = (0.0, 0.0);
    for i in 0..100u64 {
        let d = 1 + (i % 2) as usize;
        let f = pipelines::random_field(d, WINDOW, 4, 1.0, i).map_err(err)?;
        let t = 10.0 * rng.random::<f64>() - 5.0;
        let grid = TorusGrid::for_propagation(d, WINDOW, t).map_err(err)?;
        let u = propagate(&f, t, grid).map_err(err)?;
        unit = unit.max((u.norm_l2() - f.norm_l2()).abs() / f.norm_l2());
        let back = inverse_dft(&forward_dft(&f, grid).map_err(err)?, WINDOW).map_err(err)?;
        trip = trip.max(back.sub(&f).map_err(err)?.sup_norm());
    }
    Ok((
        unit <= UNITARITY_TOL && trip <= ROUND_TRIP_TOL,
        format!("100 fields: relative norm drift {unit:.2e} (tol {UNITARITY_TOL:e}), round trip {trip:.2e} (tol {ROUND_TRIP_TOL:e})"),
    ))
}

fn c03_curve_rescaling() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for phase in ["cubic", "sin"] {
        let o = run(&format!(
            "experiment = rescale-check\nseed = 3\n[rescale-check]\ngeometry = curve\nphase = {phase}\nlambda = 1/4, 1/2\npoints = 50\nreach = 100\n"
        ))?;
        worst = worst.max(summary_f64(&o, "max_rel_diff")?);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= CURVE_RESCALE_TOL && secs < CURVE_RESCALE_BUDGET_S,
        format!("t³ and normalized sin t - t, λ ∈ {{1/4, 1/2}}: max rel diff {worst:.2e} (tol {CURVE_RESCALE_TOL:e}), {secs:.2} s"),
    ))
}

fn c04_surface_rescaling() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for g in ["surface+", "surface-"] {
        let o = run(&format!("experiment = rescale-check\nseed = 4\n[rescale-check]\ngeometry = {g}\nk = 64\npoints = 30\nreach = 50\n"))?;
        worst = worst.max(summary_f64(&o, "max_rel_diff")?);
        cases += o.summary["cases"].as_u64().unwrap_or(0);
    }
    Ok((worst <= SURFACE_RESCALE_TOL, format!("{cases} slabs × 30 points, both signs: max rel diff {worst:.2e} (tol {SURFACE_RESCALE_TOL:e})")))
}

fn decoupling_geometries() -> [DecouplingGeometry; 5] {
    [
        DecouplingGeometry::CurveTheta,
        DecouplingGeometry::SurfaceTau { sign: 1.0 },
        DecouplingGeometry::SurfaceTau { sign: -1.0 },
        DecouplingGeometry::MixedTau { sign: 1.0 },
        DecouplingGeometry::MixedTau { sign: -1.0 },
    ]
}

fn c05_decoupling() -> Verdict {
    let ks = [8.0, 16.0, 32.0, 64.0];
    let ps = [2.0, 22.0 / 7.0, 6.0];
    let (c, e) = DECOUPLING_BOUND;
    let (mut ok, mut worst_excess, mut worst_growth, mut worst_single, mut max_ratio) = (true, 0.0f64, f64::MIN, 0.0f64, 0.0f64);
    for geo in decoupling_geometries() {
        let records = pipelines::decoupling_scan(geo, &ks, &ps, 8, 1024, 5).map_err(err)?;
        for r in &records {
            max_ratio = max_ratio.max(r.result.ratio);
            worst_excess = worst_excess.max(r.result.ratio / (c * r.k.powf(e)));
        }
        for &p in &ps {
            let fit = fit_growth_exponent(&pipelines::max_ratio_by_k(&records, p)).map_err(err)?;
            worst_growth = worst_growth.max(fit.exponent);
            for &k in &ks {
                let single = pipelines::single_slab_ratio(geo, k, p, 1024, 5).map_err(err)?;
                worst_single = worst_single.max((single - 1.0).abs());
            }
        }
    }
    ok &= worst_excess <= 1.0 && worst_growth <= DECOUPLING_GROWTH_MAX && worst_single <= SINGLE_SLAB_TOL;
    Ok((
        ok,
        format!(
            "5 geometries × 4 K × 3 p × 8 draws: max ratio {max_ratio:.3}, max ratio/(4K^0.15) {worst_excess:.3} (≤ 1), \
             max growth exponent {worst_growth:.3} (≤ {DECOUPLING_GROWTH_MAX}), single-slab |ratio-1| {worst_single:.1e}"
        ),
    ))
}

fn c06_parallel() -> Verdict {
    let families: [(DecouplingGeometry, f64, f64); 10] = {
        let [curve, sp, sm, mp, mm] = decoupling_geometries();
        [
            (curve, 16.0, 2.0),
            (curve, 32.0, 6.0),
            (curve, 64.0, 22.0 / 7.0),
            (sp, 8.0, 2.0),
            (sp, 16.0, 22.0 / 7.0),
            (sm, 8.0, 6.0),
            (sm, 16.0, 2.0),
            (mp, 8.0, 22.0 / 7.0),
            (mp, 16.0, 6.0),
            (mm, 8.0, 2.0),
        ]
    };
    let mut worst = f64::MIN;
    for (i, &(geo, k, p)) in families.iter().enumerate() {
        let (_, rep) = pipelines::parallel_balls(geo, k, p, 3, 1024, 60 + i as u64).map_err(err)?;
        worst = worst.max(rep.union_ratio - rep.max_ratio);
    }
    Ok((worst <= COMBINE_SLACK, format!("10 families of 3 disjoint balls: max (union - max ball ratio) {worst:.2e} (≤ {COMBINE_SLACK:e})")))
}

fn c07_restriction() -> Verdict {
    let start = Instant::now();
    let radii: Vec<f64> = (4..=10).map(|k| f64::from(1u32 << k)).collect();
    let families = TestFamily::design_set();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in [("surface+", 22.0 / 7.0), ("surface-", 22.0 / 7.0), ("curve", 5.0)] {
        let g = pipelines::geometry(name).map_err(err)?;
        let (_, fit) = pipelines::restriction_pipeline(&g, p, f64::INFINITY, &radii, &families, 1024, 11).map_err(err)?;
        let fit = fit.ok_or("no growth fit")?;
        let pass = if name == "curve" {
            fit.exponent <= CURVE_EPS_MAX
        } else {
            fit.exponent <= SURFACE_EPS_MAX && fit.residual <= SURFACE_RESIDUAL_MAX
        };
        ok &= pass;
        parts.push(format!("{name} ε̂ {:.3} resid {:.3}", fit.exponent, fit.residual));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < RESTRICTION_BUDGET_S;
    Ok((
        ok,
        format!(
            "{} (surfaces ε̂ ≤ {SURFACE_EPS_MAX}, resid ≤ {SURFACE_RESIDUAL_MAX}; curve ε̂ ≤ {CURVE_EPS_MAX}), {secs:.0} s",
            parts.join("; ")
        ),
    ))
}

fn c08_translation() -> Verdict {
    let (mut gap, mut pl): (f64, f64) = (0.0, 0.0);
    for &(c, w, m) in &pipelines::TRANSLATION_CORPUS {
        let f = gaussian_bump(c, w, m).map_err(err)?;
        for r in translation_average_multi(&f, &[2.0, 4.0], pipelines::TRANSLATION_T, pipelines::TRANSLATION_N).map_err(err)? {
            gap = gap.max(r.gap);
            if let Some(v) = r.plancherel {
                pl = pl.max((v - r.continuum).abs() / v).max((v - r.discrete).abs() / v);
            }
        }
    }
    Ok((
        gap <= TRANSLATION_GAP_TOL && pl <= PLANCHEREL_TOL,
        format!("10 bumps, p ∈ {{2, 4}}: max rel gap {gap:.2e} (tol {TRANSLATION_GAP_TOL:e}), Plancherel {pl:.2e} (tol {PLANCHEREL_TOL:e})"),
    ))
}

/// `1/q + d/(3r) ≤ d/6` in integers, `None` standing for ∞.
fn admissible_closed_form(q: Option<i64>, r: Option<i64>, d: i64) -> bool {
    if q.is_some_and(|q| q < 2) || r.is_some_and(|r| r < 2) || (q == Some(2) && r.is_none() && d == 3) {
        return false;
    }
    match (q, r) {
        (Some(q), Some(r)) => 6 * r + 2 * d * q <= d * q * r,
        (Some(q), None) => 6 <= d * q,
        (None, _) => true,
    }
}

fn c09_admissibility() -> Verdict {
    let qs = [Some(1), Some(2), Some(3), Some(4), Some(6), Some(8), Some(12), Some(24), Some(48), None];
    let rs = [Some(2), Some(3), Some(6), Some(12), None];
    let as_f64 = |v: Option<i64>| v.map_or(f64::INFINITY, |x| x as f64);
    let (mut pairs, mut mismatches, mut admissible) = (0, 0, 0);
    for d in 1..=4i64 {
        for &q in &qs {
            for &r in &rs {
                let want = admissible_closed_form(q, r, d);
                pairs += 1;
                admissible += want as usize;
                mismatches += (is_admissible(as_f64(q), as_f64(r), d as usize) != want) as usize;
            }
        }
    }
    let excluded = !is_admissible(2.0, f64::INFINITY, 3);
    Ok((
        mismatches == 0 && excluded && pairs == 200,
        format!("{pairs} triples ({admissible} admissible), {mismatches} mismatches; (2, ∞, 3) rejected: {excluded}"),
    ))
}

fn delta_problem(amp: f64, radius: usize) -> Result<DnlsProblem, String> {
    let f = pipelines::initial_field("delta", 1, radius, amp, 0).map_err(err)?;
    DnlsProblem::new(8.0, 1.0, f, 8.0, 2.0).map_err(err)
}

fn c10_contraction() -> Verdict {
    let pr = delta_problem(0.01, 40)?;
    let cfg = SolveConfig::for_problem(&pr, 10.0, 800, 1e-12).map_err(err)?;
    let rep = contraction_report(&pr, &cfg, 0.05, 20, 10).map_err(err)?;
    let (_, log) = picard_solve(&pr, &cfg).map_err(err)?;
    let ratios = log.ratios();
    let geometric = ratios.iter().all(|&r| r <= PICARD_RATIO_MAX);
    let ok = rep.ratios.len() == 20
        && rep.max_ratio() <= CONTRACTION_MAX
        && log.converged
        && log.iterations() <= PICARD_MAX_ITERATIONS
        && geometric
        && log.residual <= PICARD_RESIDUAL_MAX;
    let ratio_note = if ratios.is_empty() { "no consecutive distances (converged in one step)".to_string() } else { format!("max distance ratio {:.3}", ratios.iter().copied().fold(0.0, f64::max)) };
    Ok((
        ok,
        format!(
            "‖e^{{itΔ}}f‖ = {:.4} ≤ η = 0.05; 20 trials max ratio {:.2e} (≤ {CONTRACTION_MAX}); Picard {} iterations, {ratio_note}, residual {:.1e}",
            rep.linear_norm,
            rep.max_ratio(),
            log.iterations(),
            log.residual
        ),
    ))
}

fn c11_cross_validation() -> Verdict {
    let (horizon, steps, tol) = pipelines::SMALL_DATA_RUN;
    let (mut gap, mut mass): (f64, f64) = (0.0, 0.0);
    let corpus = pipelines::small_data_corpus().map_err(err)?;
    for (_, pr) in &corpus {
        let cfg = SolveConfig::for_problem(pr, horizon, steps, tol).map_err(err)?;
        let (u, _) = picard_solve(pr, &cfg).map_err(err)?;
        let s = splitstep_solve(pr, &cfg).map_err(err)?;
        gap = gap.max(u.sup_l2_distance(&s).map_err(err)?);
        mass = mass.max(s.mass().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max));
    }
    Ok((
        gap <= CROSS_GAP_TOL && mass <= MASS_STEP_TOL,
        format!("{} problems: sup_t ℓ² gap {gap:.2e} (tol {CROSS_GAP_TOL:e}), split-step mass step {mass:.1e} (tol {MASS_STEP_TOL:e})", corpus.len()),
    ))
}

fn c12_scattering() -> Verdict {
    let pr = delta_problem(0.5, 160)?;
    let cfg = SolveConfig::new(60.0, 4800, 1e-12, 32, TorusGrid::new(1, 1024).map_err(err)?).map_err(err)?;
    let (u, log) = picard_solve(&pr, &cfg).map_err(err)?;
    let rep = scattering_states(&u, &pr, Direction::Plus, SCATTER_TAIL_TOL).map_err(err)?;
    let late: Vec<f64> = rep.deviations.iter().filter(|d| d.0 >= 10.0).map(|d| d.1).collect();
    let monotone = late.windows(2).all(|w| w[1] <= w[0] + SCATTER_MONOTONE_SLACK);
    let (dev40, tail40) = (rep.deviation_at(40.0), rep.tail_at(40.0));
    let ok = log.converged && monotone && dev40 <= SCATTER_DEVIATION_AT_40 && tail40 <= SCATTER_TAIL_TOL && rep.conclusive;
    Ok((
        ok,
        format!(
            "0.5δ₀ to T = 60: non-increasing from t = 10: {monotone}; deviation(40) {dev40:.2e} (≤ {SCATTER_DEVIATION_AT_40:e}); tail(40) {tail40:.2e} (≤ {SCATTER_TAIL_TOL:e})"
        ),
    ))
}

fn c13_decay() -> Verdict {
    let fit = |d: usize, m: usize, w: DecayWindow| -> Result<f64, String> {
        Ok(decay_exponent(d, (10.0, 200.0), TorusGrid::new(d, m).map_err(err)?, w).map_err(err)?.slope)
    };
    let s1 = fit(1, 2048, DecayWindow::Full)?;
    let s2 = fit(2, 1024, DecayWindow::Full)?;
    let sb = fit(1, 2048, DecayWindow::BandPass { cutoff: BANDPASS_CUTOFF })?;
    let within = |s: f64, (target, tol): (f64, f64)| (s - target).abs() <= tol;
    Ok((
        within(s1, DECAY_D1) && within(s2, DECAY_D2) && within(sb, DECAY_BANDPASS),
        format!("slopes d=1 {s1:.4} (-1/3 ± 0.05), d=2 {s2:.4} (-2/3 ± 0.1), band-pass |ξ| < {BANDPASS_CUTOFF} {sb:.4} (-1/2 ± 0.05)"),
    ))
}

/// Small configurations of every experiment for the determinism check.
const DETERMINISM_CONFIGS: [&str; 12] = [
    "experiment = omega-table\n[omega-table]\nd = 2\nnodes = 9\n",
    "experiment = propagate\nseed = 4\n[propagate]\nd = 2\nradius = 8\ninitial = random\nsupport = 3\ntimes = 0.5, 3\n",
    "experiment = extend\nseed = 5\n[extend]\ngeometry = surface+\ndensity = random-signs\npoints = 8\nreach = 30\n",
    "experiment = rescale-check\nseed = 6\n[rescale-check]\ngeometry = mixed-\npoints = 5\n",
    "experiment = decoupling-check\nseed = 7\n[decoupling-check]\ngeometry = surface-\nk = 8, 16, 32\np = 2, 6\ndraws = 2\nballs = 2\n",
    "experiment = restriction-scan\nseed = 8\n[restriction-scan]\ngeometry = curve\np = 5\nradii = 16, 32, 64\nfamilies = constant, knapp, random-signs:4\n",
    "experiment = equi-check\n[equi-check]\ncorpus = single\ncenter = 0.3\nmodulation = 1\nt = 2\nn = 10\n",
    "experiment = dnls-solve\nseed = 9\n[dnls-solve]\ninitial = random\namplitude = 0.3\nradius = 12\nhorizon = 2\nsteps = 200\n",
    "experiment = contraction\nseed = 10\n[contraction]\ntrials = 6\n",
    "experiment = scatter\n[scatter]\nradius = 40\nhorizon = 10\nsteps = 800\n",
    "experiment = strichartz-scan\n[strichartz-scan]\nd = 2\nradius = 12\nhorizon = 4\nsteps = 64\n",
    "experiment = decay-fit\n[decay-fit]\nmodes = 1024\nwindow = bandpass\n",
];

fn c14_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut differing = Vec::new();
    for (i, text) in DETERMINISM_CONFIGS.iter().enumerate() {
        let id = config(text).experiment.id;
        let cfg_path = dir.path().join(format!("{id}.cfg"));
        fs::write(&cfg_path, text).map_err(err)?;
        let mut outputs = Vec::new();
        for threads in THREAD_COUNTS {
            let out = dir.path().join(format!("{i}-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ftrlab"))
                .env("FTRLAB_THREADS", threads.to_string())
                .arg(id)
                .arg("--config")
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(err)?;
            if !matches!(status.status.code(), Some(0 | 3)) {
                return Err(format!("{id} at {threads} threads: {}", String::from_utf8_lossy(&status.stderr).trim()));
            }
            outputs.push(fs::read(out.join(ftrlab_cli::RESULTS_FILE)).map_err(err)?);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(id);
        }
    }
    Ok((
        differing.is_empty(),
        format!("12 experiments at {THREAD_COUNTS:?} threads: differing CSVs {differing:?}"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 14] = [
        ("Bessel oracle", c01_bessel),
        ("unitarity and DFT round trip", c02_unitarity),
        ("curve rescaling intertwining", c03_curve_rescaling),
        ("surface slab rescaling", c04_surface_rescaling),
        ("decoupling scan", c05_decoupling),
        ("parallel decoupling", c06_parallel),
        ("restriction scan", c07_restriction),
        ("translation averaging", c08_translation),
        ("admissibility predicate", c09_admissibility),
        ("contraction", c10_contraction),
        ("solver cross-validation", c11_cross_validation),
        ("scattering", c12_scattering),
        ("dispersive decay", c13_decay),
        ("determinism across thread counts", c14_determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    let start = Instant::now();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {n:>2} {} {name}: {detail} [{:.1} s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        if !pass {
            failed.push(n);
        }
    }
    println!("acceptance: {} failed {failed:?}, {:.0} s total", failed.len(), start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
