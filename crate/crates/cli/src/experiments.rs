//! One runner per experiment. Each turns a resolved config into a result
//! table, a JSON summary for the manifest and a status.

use std::f64::consts::PI;

use ftrlab_core::analysis::{
    fourier_lebesgue_norm, gaussian_bump, is_admissible, mixed_norm, translation_average_multi, Density, Geometry,
};
use ftrlab_core::dnls::{
    contraction_report, decay_exponent, picard_solve, scattering_states, splitstep_solve, DecayWindow, Direction, DnlsProblem,
    SolveConfig,
};
use ftrlab_core::extension::{
    extend_curve, extend_surface, rescale_curve, rescale_mixed_slab, rescale_surface_slab, CurveDensity, CurveSpec,
    QuadraturePlan, SurfaceDensity, SurfaceSpec,
};
use ftrlab_core::finitetype::{
    decompose_mixed_square, decompose_square, normalize_phase, slab_cover, symmetric_interval, unit_interval, Interval,
    Phase1D, PhaseKind, RegionLabel, SlabKind,
};
use ftrlab_core::lattice::{propagate, symbol_omega, LatticeField, TorusGrid, C64};
use ftrlab_core::qmc::mix_seed;
use ftrlab_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::pipelines;
use crate::table::{Cell, Table};

/// How a completed run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Ok,
    /// The computation finished but could not settle its question.
    Inconclusive(String),
}

impl Status {
    pub fn tag(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Inconclusive(_) => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub summary: Map<String, Value>,
    pub status: Status,
}

impl Outcome {
    fn ok(table: Table, summary: Value) -> Self {
        Self::with_status(table, summary, Status::Ok)
    }

    fn with_status(table: Table, summary: Value, status: Status) -> Self {
        let summary = match summary {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Self { table, summary, status }
    }
}

/// Run the experiment named in `cfg`.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment.id {
        "omega-table" => omega_table(cfg),
        "propagate" => propagate_run(cfg),
        "extend" => extend(cfg),
        "rescale-check" => rescale_check(cfg),
        "decoupling-check" => decoupling(cfg),
        "restriction-scan" => restriction(cfg),
        "equi-check" => equi_check(cfg),
        "dnls-solve" => dnls_solve(cfg),
        "contraction" => contraction(cfg),
        "scatter" => scatter(cfg),
        "strichartz-scan" => strichartz(cfg),
        "decay-fit" => decay_fit(cfg),
        other => unreachable!("config parser admitted unknown experiment `{other}`"),
    }
}

fn points(seed: u64, n: usize, dim: usize, reach: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| reach * (2.0 * rng.random::<f64>() - 1.0)).collect()).collect()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m > 0.0 {
        (a - b).abs() / m
    } else {
        0.0
    }
}

/// Equispaced nodes of `[-π, π]` with both endpoints.
pub fn omega_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| if j + 1 == n { PI } else { -PI + 2.0 * PI * j as f64 / (n - 1) as f64 }).collect()
}

fn omega_table(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d");
    let nodes = omega_nodes(cfg.usize("nodes"));
    let mut t = Table::new(&["xi1", "xi2", "omega"]);
    for &a in &nodes {
        if d == 1 {
            t.push(vec![a.into(), Cell::Empty, symbol_omega(&[a])?.into()]);
        } else {
            for &b in &nodes {
                t.push(vec![a.into(), b.into(), symbol_omega(&[a, b])?.into()]);
            }
        }
    }
    Ok(Outcome::ok(t, json!({ "nodes": nodes.len() })))
}

fn grid_for(d: usize, modes: usize, radius: usize, t: f64) -> Result<TorusGrid> {
    if modes == 0 {
        TorusGrid::for_propagation(d, radius, t)
    } else {
        TorusGrid::new(d, modes)
    }
}

fn propagate_run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (d, radius, modes) = (cfg.usize("d"), cfg.usize("radius"), cfg.usize("modes"));
    let f = match cfg.text("initial") {
        "delta" => pipelines::initial_field("delta", d, radius, 1.0, cfg.seed)?,
        _ => pipelines::random_field(d, radius, cfg.usize("support"), 1.0, cfg.seed)?,
    };
    let mut table = Table::new(&["t", "x1", "x2", "re", "im", "modulus"]);
    let mut drift: f64 = 0.0;
    for &t in cfg.floats("times") {
        let u = propagate(&f, t, grid_for(d, modes, radius, t)?)?;
        drift = drift.max((u.norm_l2() - f.norm_l2()).abs());
        for (i, z) in u.values().iter().enumerate() {
            let c = u.coords(i);
            let x2 = if d == 2 { Cell::Int(c[1]) } else { Cell::Empty };
            table.push(vec![t.into(), Cell::Int(c[0]), x2, z.re.into(), z.im.into(), z.norm().into()]);
        }
    }
    Ok(Outcome::ok(table, json!({ "l2_drift": drift, "initial_l2": f.norm_l2() })))
}

fn extend(cfg: &ExperimentConfig) -> Result<Outcome> {
    let geometry = pipelines::geometry(cfg.text("geometry"))?;
    let (grid, random) = (cfg.usize("grid"), cfg.text("density") == "random-signs");
    let one = C64::new(1.0, 0.0);
    let dseed = mix_seed(cfg.seed, 1, 0);
    let density = match &geometry {
        Geometry::Curve(c) if random => Density::Curve(CurveDensity::random_signs(c.domain(), grid, dseed)),
        Geometry::Curve(c) => Density::Curve(CurveDensity::constant(c.domain(), one)),
        Geometry::Surface(s) if random => Density::Surface(SurfaceDensity::random_signs(s.domain(), grid, dseed)),
        Geometry::Surface(s) => Density::Surface(SurfaceDensity::constant(s.domain(), one)),
    };
    let bound = density.norm_lq(1.0);
    let ext = density.prepare(&geometry)?;
    let dim = geometry.space_dim();
    let mut table = Table::new(&["index", "x1", "x2", "x3", "re", "im", "modulus", "bound"]);
    let mut within = true;
    for (i, x) in points(mix_seed(cfg.seed, 2, 0), cfg.usize("points"), dim, cfg.float("reach")).iter().enumerate() {
        let v = ext.eval(x)?;
        within &= v.norm() <= bound * (1.0 + 1e-9);
        let x3 = x.get(2).copied().map_or(Cell::Empty, Cell::Float);
        table.push(vec![i.into(), x[0].into(), x[1].into(), x3, v.re.into(), v.im.into(), v.norm().into(), bound.into()]);
    }
    Ok(Outcome::ok(table, json!({ "l1_bound": bound, "within_bound": within })))
}

fn smooth_curve_density(domain: Interval) -> CurveDensity {
    CurveDensity::from_fn(domain, 2.0, vec![], |t| C64::new(1.0 + 0.5 * (3.0 * t).cos(), 0.5 * t))
}

fn rescale_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let name = cfg.text("geometry");
    let (n, reach, k) = (cfg.usize("points"), cfg.float("reach"), cfg.float("k"));
    let plan = QuadraturePlan::auto();
    let mut table = Table::new(&["case", "lambda", "slab", "index", "lhs", "rhs", "rel_diff"]);
    let mut worst: f64 = 0.0;
    let mut case_no = 0u64;
    let mut record = |table: &mut Table, case: &str, lambda: Option<f64>, slab: Option<usize>, lhs: f64, rhs: f64, i: usize| {
        let r = rel_diff(lhs, rhs);
        worst = worst.max(r);
        table.push(vec![case.into(), lambda.into(), slab.into(), i.into(), lhs.into(), rhs.into(), r.into()]);
    };
    match name {
        "curve" => {
            let phase = match cfg.text("phase") {
                "cubic" => Phase1D::monomial(3, symmetric_interval())?,
                _ => normalize_phase(&Phase1D::from_kind(PhaseKind::SinMinusLinear, symmetric_interval())?, 3)?.0,
            };
            let curve = CurveSpec::new(phase.clone(), symmetric_interval())?;
            for &lambda in cfg.floats("lambda") {
                let f = smooth_curve_density(Interval::new(lambda, 2.0 * lambda)?);
                let r = rescale_curve(lambda, &f, &phase)?;
                for (i, y) in points(mix_seed(cfg.seed, 3, case_no), n, 2, reach).iter().enumerate() {
                    let lhs = extend_curve(&curve, &f, y, plan)?.norm();
                    let rhs = extend_curve(&r.curve, &r.density, &r.map.apply_space(y), plan)?.norm();
                    record(&mut table, cfg.text("phase"), Some(lambda), None, lhs, rhs, i);
                }
                case_no += 1;
            }
        }
        "surface+" | "surface-" => {
            let sign = if name.ends_with('-') { -1.0 } else { 1.0 };
            let s = SurfaceSpec::prototypical(sign)?;
            let g = SurfaceDensity::from_fn(s.domain(), 1.5, (vec![], vec![]), |a, b| C64::new(1.0 + 0.5 * a, b));
            let regions = decompose_square(k)?;
            for region in regions.iter().filter(|r| matches!(r.label, RegionLabel::OmegaLambda { axis: 0, .. })) {
                let lambda = region.lambda().expect("dyadic piece has a scale");
                let slabs = slab_cover(region, k, SlabKind::SurfaceTau)?;
                let j = slabs.len() / 2;
                let r = rescale_surface_slab(&slabs[j], lambda, k, sign)?;
                let piece = g.restrict(slabs[j].rect().expect("surface slab")).expect("slab inside the unit square");
                let pulled = r.pull_density(&g).expect("slab inside the unit square");
                for (i, x) in points(mix_seed(cfg.seed, 3, case_no), n, 3, reach).iter().enumerate() {
                    let lhs = extend_surface(&s, &piece, x, plan)?.norm();
                    let rhs = extend_surface(&r.surface, &pulled, &r.apply_space(x), plan)?.norm();
                    record(&mut table, "surface-slab", Some(lambda), Some(j), lhs, rhs, i);
                }
                case_no += 1;
            }
        }
        _ => {
            let sign = if name.ends_with('-') { -1.0 } else { 1.0 };
            let unit = unit_interval();
            let (p1, p2) = (Phase1D::monomial(2, unit)?, Phase1D::monomial(3, unit)?);
            let s = SurfaceSpec::new(p1.clone(), p2.clone(), sign, ftrlab_core::finitetype::Rect::unit())?;
            let g = SurfaceDensity::constant(s.domain(), C64::new(1.0, 0.0));
            let strip = decompose_mixed_square(k)?
                .into_iter()
                .find(|r| r.label == RegionLabel::TildeOmega1)
                .expect("mixed decomposition has a degenerate strip");
            let slabs = slab_cover(&strip, k, SlabKind::MixedTau)?;
            let mut picks = vec![0, slabs.len() / 2, slabs.len() - 1];
            picks.dedup();
            for j in picks {
                let r = rescale_mixed_slab(&slabs[j], k, &p1, &p2, sign)?;
                let piece = g.restrict(slabs[j].rect().expect("surface slab")).expect("slab inside the unit square");
                let pulled = r.pull_density(&g).expect("slab inside the unit square");
                for (i, x) in points(mix_seed(cfg.seed, 3, case_no), n, 3, reach).iter().enumerate() {
                    let lhs = extend_surface(&s, &piece, x, plan)?.norm();
                    let rhs = extend_surface(&r.surface, &pulled, &r.apply_space(x), plan)?.norm();
                    record(&mut table, "mixed-slab", None, Some(j), lhs, rhs, i);
                }
                case_no += 1;
            }
        }
    }
    Ok(Outcome::ok(table, json!({ "cases": case_no, "max_rel_diff": worst })))
}

const DECOUPLING_COLUMNS: &[&str] = &[
    "kind", "k", "p", "draw", "slabs", "balls", "lhs", "rhs", "stderr", "ratio", "ball_max", "exponent", "intercept",
    "residual", "holds",
];

fn decoupling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let geo = pipelines::decoupling_geometry(cfg.text("geometry"))?;
    let (ks, ps) = (cfg.floats("k"), cfg.floats("p"));
    let (draws, samples, balls) = (cfg.usize("draws"), cfg.usize("samples"), cfg.usize("balls"));
    let records = pipelines::decoupling_scan(geo, ks, ps, draws, samples, cfg.seed)?;
    let mut table = Table::new(DECOUPLING_COLUMNS);
    let mut max_ratio: f64 = 0.0;
    for r in &records {
        max_ratio = max_ratio.max(r.result.ratio);
        table.push_named(vec![
            ("kind", "ratio".into()),
            ("k", r.k.into()),
            ("p", r.p.into()),
            ("draw", r.draw.into()),
            ("slabs", r.slabs.into()),
            ("lhs", r.result.lhs.into()),
            ("rhs", r.result.rhs.into()),
            ("stderr", r.result.lhs_stderr.into()),
            ("ratio", r.result.ratio.into()),
        ]);
    }
    let mut single_gap: f64 = 0.0;
    for &k in ks {
        for &p in ps {
            let ratio = pipelines::single_slab_ratio(geo, k, p, samples, cfg.seed)?;
            single_gap = single_gap.max((ratio - 1.0).abs());
            table.push_named(vec![("kind", "single".into()), ("k", k.into()), ("p", p.into()), ("slabs", 1usize.into()), ("ratio", ratio.into())]);
        }
    }
    let mut exponents = Vec::new();
    for &p in ps {
        let curve = pipelines::max_ratio_by_k(&records, p);
        if curve.len() >= 3 {
            let fit = ftrlab_core::analysis::fit_growth_exponent(&curve)?;
            exponents.push(fit.exponent);
            table.push_named(vec![
                ("kind", "fit".into()),
                ("p", p.into()),
                ("ratio", curve.iter().map(|c| c.1).fold(0.0, f64::max).into()),
                ("exponent", fit.exponent.into()),
                ("intercept", fit.intercept.into()),
                ("residual", fit.residual.into()),
            ]);
        }
    }
    let mut combine_holds = true;
    if balls > 0 {
        for &k in ks {
            for &p in ps {
                let (_, report) = pipelines::parallel_balls(geo, k, p, balls, samples, cfg.seed)?;
                combine_holds &= report.holds;
                table.push_named(vec![
                    ("kind", "combine".into()),
                    ("k", k.into()),
                    ("p", p.into()),
                    ("balls", balls.into()),
                    ("ratio", report.union_ratio.into()),
                    ("ball_max", report.max_ratio.into()),
                    ("holds", report.holds.into()),
                ]);
            }
        }
    }
    let max_exponent = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome::ok(
        table,
        json!({
            "geometry": geo.tag(),
            "max_ratio": max_ratio,
            "single_slab_max_gap": single_gap,
            "max_growth_exponent": exponents.is_empty().then_some(Value::Null).unwrap_or(json!(max_exponent)),
            "combine_holds": (balls > 0).then_some(combine_holds),
        }),
    ))
}

fn restriction(cfg: &ExperimentConfig) -> Result<Outcome> {
    let geometry = pipelines::geometry(cfg.text("geometry"))?;
    let (p, q) = (cfg.float("p"), cfg.float("q"));
    let (estimates, fit) = pipelines::restriction_pipeline(
        &geometry,
        p,
        q,
        cfg.floats("radii"),
        &cfg.families("families"),
        cfg.usize("samples"),
        cfg.seed,
    )?;
    let mut table = Table::new(&["kind", "radius", "p", "q", "value", "stderr", "family", "exponent", "intercept", "residual"]);
    for e in &estimates {
        table.push_named(vec![
            ("kind", "estimate".into()),
            ("radius", e.scale.into()),
            ("p", p.into()),
            ("q", q.into()),
            ("value", e.value.into()),
            ("stderr", e.stderr.into()),
            ("family", e.family.clone().into()),
        ]);
    }
    if let Some(f) = fit {
        table.push_named(vec![
            ("kind", "fit".into()),
            ("p", p.into()),
            ("q", q.into()),
            ("exponent", f.exponent.into()),
            ("intercept", f.intercept.into()),
            ("residual", f.residual.into()),
        ]);
    }
    Ok(Outcome::ok(
        table,
        json!({
            "estimates": estimates.len(),
            "exponent": fit.map(|f| f.exponent),
            "residual": fit.map(|f| f.residual),
        }),
    ))
}

fn equi_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let cases: Vec<(f64, f64, f64)> = match cfg.text("corpus") {
        "standard" => pipelines::TRANSLATION_CORPUS.to_vec(),
        _ => vec![(cfg.float("center"), cfg.float("width"), cfg.float("modulation"))],
    };
    let (tw, nw) = (cfg.float("t"), cfg.usize("n"));
    let mut table = Table::new(&[
        "case", "center", "width", "modulation", "p", "continuum", "discrete", "rel_gap", "plancherel", "plancherel_gap",
    ]);
    let (mut worst, mut worst_pl): (f64, f64) = (0.0, 0.0);
    for (i, &(c, w, m)) in cases.iter().enumerate() {
        let f = gaussian_bump(c, w, m)?;
        for r in translation_average_multi(&f, cfg.floats("p"), tw, nw)? {
            worst = worst.max(r.gap);
            let pl_gap = r.plancherel.map(|v| rel_diff(v, r.discrete).max(rel_diff(v, r.continuum)));
            if let Some(g) = pl_gap {
                worst_pl = worst_pl.max(g);
            }
            table.push(vec![
                i.into(),
                c.into(),
                w.into(),
                m.into(),
                r.p.into(),
                r.continuum.into(),
                r.discrete.into(),
                r.gap.into(),
                r.plancherel.into(),
                pl_gap.into(),
            ]);
        }
    }
    Ok(Outcome::ok(table, json!({ "cases": cases.len(), "max_rel_gap": worst, "max_plancherel_gap": worst_pl })))
}

/// DNLS problem from the shared keys of the solver experiments.
pub fn dnls_problem(cfg: &ExperimentConfig) -> Result<DnlsProblem> {
    let d = cfg.usize("d");
    let f = pipelines::initial_field(cfg.text("initial"), d, cfg.usize("radius"), cfg.float("amplitude"), cfg.seed)?;
    let mu = if cfg.text("mu") == "-1" { -1.0 } else { 1.0 };
    DnlsProblem::new(cfg.float("alpha"), mu, f, cfg.float("p"), cfg.float("q"))
}

pub fn solve_config(cfg: &ExperimentConfig, problem: &DnlsProblem) -> Result<SolveConfig> {
    let horizon = cfg.float("horizon");
    let grid = grid_for(problem.dim(), cfg.usize("modes"), problem.initial().radius(), horizon)?;
    SolveConfig::new(horizon, cfg.usize("steps"), cfg.float("tolerance"), cfg.usize("max_iterations"), grid)
}

fn picard_status(converged: bool, iterations: usize) -> Status {
    if converged {
        Status::Ok
    } else {
        Status::Inconclusive(format!("Picard iteration did not reach the tolerance in {iterations} iterations"))
    }
}

fn dnls_solve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = dnls_problem(cfg)?;
    let sc = solve_config(cfg, &problem)?;
    let solver = cfg.text("solver");
    let every = cfg.usize("report_every");
    let mut table = Table::new(&["kind", "solver", "index", "t", "mass", "sup_norm", "distance", "ratio"]);
    let report = |table: &mut Table, name: &str, path: &ftrlab_core::dnls::SolutionPath| {
        for n in (0..path.len()).filter(|n| n % every == 0 || *n + 1 == path.len()) {
            table.push_named(vec![
                ("kind", "path".into()),
                ("solver", name.into()),
                ("index", n.into()),
                ("t", path.times()[n].into()),
                ("mass", path.mass()[n].into()),
                ("sup_norm", path.fields()[n].sup_norm().into()),
            ]);
        }
    };
    let drift = |path: &ftrlab_core::dnls::SolutionPath| {
        let m0 = path.mass()[0];
        path.mass().iter().map(|m| (m - m0).abs()).fold(0.0, f64::max)
    };
    let mut summary = Map::new();
    let mut status = Status::Ok;
    let mut picard = None;
    if solver != "splitstep" {
        let (path, log) = picard_solve(&problem, &sc)?;
        let ratios = log.ratios();
        for (i, d) in log.distances.iter().enumerate() {
            let ratio = if i == 0 { Cell::Empty } else { ratios[i - 1].into() };
            table.push_named(vec![("kind", "iteration".into()), ("solver", "picard".into()), ("index", (i + 1).into()), ("distance", (*d).into()), ("ratio", ratio)]);
        }
        report(&mut table, "picard", &path);
        summary.insert("picard_iterations".into(), json!(log.iterations()));
        summary.insert("picard_converged".into(), json!(log.converged));
        summary.insert("picard_residual".into(), json!(log.residual));
        summary.insert("picard_mass_drift".into(), json!(drift(&path)));
        status = picard_status(log.converged, log.iterations());
        picard = Some(path);
    }
    if solver != "picard" {
        let path = splitstep_solve(&problem, &sc)?;
        report(&mut table, "splitstep", &path);
        let step = path.mass().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        summary.insert("splitstep_mass_step".into(), json!(step));
        if let Some(u) = &picard {
            let gap = u.sup_l2_distance(&path)?;
            table.push_named(vec![("kind", "gap".into()), ("solver", "both".into()), ("distance", gap.into())]);
            summary.insert("sup_l2_gap".into(), json!(gap));
        }
    }
    Ok(Outcome::with_status(table, Value::Object(summary), status))
}

fn contraction(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = dnls_problem(cfg)?;
    let sc = solve_config(cfg, &problem)?;
    let rep = contraction_report(&problem, &sc, cfg.float("eta"), cfg.usize("trials"), cfg.seed)?;
    let (_, log) = picard_solve(&problem, &sc)?;
    let mut table = Table::new(&["kind", "index", "ratio", "distance", "linear_norm", "eta", "residual", "converged"]);
    for (i, r) in rep.ratios.iter().enumerate() {
        table.push_named(vec![("kind", "trial".into()), ("index", i.into()), ("ratio", (*r).into())]);
    }
    let ratios = log.ratios();
    for (i, d) in log.distances.iter().enumerate() {
        let ratio = if i == 0 { Cell::Empty } else { ratios[i - 1].into() };
        table.push_named(vec![("kind", "iteration".into()), ("index", (i + 1).into()), ("distance", (*d).into()), ("ratio", ratio)]);
    }
    table.push_named(vec![
        ("kind", "summary".into()),
        ("index", log.iterations().into()),
        ("ratio", rep.max_ratio().into()),
        ("linear_norm", rep.linear_norm.into()),
        ("eta", rep.eta.into()),
        ("residual", log.residual.into()),
        ("converged", log.converged.into()),
    ]);
    Ok(Outcome::with_status(
        table,
        json!({
            "linear_norm": rep.linear_norm,
            "eta": rep.eta,
            "max_ratio": rep.max_ratio(),
            "picard_iterations": log.iterations(),
            "picard_residual": log.residual,
            "picard_converged": log.converged,
            "max_picard_ratio": ratios.iter().copied().fold(0.0, f64::max),
        }),
        picard_status(log.converged, log.iterations()),
    ))
}

fn scatter(cfg: &ExperimentConfig) -> Result<Outcome> {
    let problem = dnls_problem(cfg)?;
    let sc = solve_config(cfg, &problem)?;
    let direction = if sc.horizon > 0.0 { Direction::Plus } else { Direction::Minus };
    let (path, log) = picard_solve(&problem, &sc)?;
    let rep = scattering_states(&path, &problem, direction, cfg.float("tail_tolerance"))?;
    let mut table = Table::new(&["kind", "t", "deviation", "tail", "state_l2", "state_fl", "tail_tolerance", "conclusive"]);
    for ((t, dev), (_, tail)) in rep.deviations.iter().zip(&rep.tails) {
        table.push_named(vec![("kind", "profile".into()), ("t", (*t).into()), ("deviation", (*dev).into()), ("tail", (*tail).into())]);
    }
    let state_fl = fourier_lebesgue_norm(&rep.state, ftrlab_core::analysis::conjugate(problem.q()))?;
    table.push_named(vec![
        ("kind", "summary".into()),
        ("t", sc.horizon.into()),
        ("state_l2", rep.state.norm_l2().into()),
        ("state_fl", state_fl.into()),
        ("tail_tolerance", rep.tail_tolerance.into()),
        ("conclusive", rep.conclusive.into()),
    ]);
    let status = if !log.converged {
        picard_status(false, log.iterations())
    } else if !rep.conclusive {
        Status::Inconclusive(format!("Duhamel tail never drops below {} before T = {}", rep.tail_tolerance, sc.horizon))
    } else {
        Status::Ok
    };
    Ok(Outcome::with_status(
        table,
        json!({
            "direction": direction.tag(),
            "conclusive": rep.conclusive,
            "final_tail": rep.tails.iter().rev().nth(1).map(|x| x.1),
            "picard_iterations": log.iterations(),
            "picard_converged": log.converged,
        }),
        status,
    ))
}

fn strichartz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d");
    let (radius, horizon) = (cfg.usize("radius"), cfg.float("horizon"));
    let path = if d <= 2 {
        let f: LatticeField = match cfg.text("initial") {
            "delta" => pipelines::initial_field("delta", d, radius, 1.0, cfg.seed)?,
            _ => pipelines::random_field(d, radius, 3, 1.0, cfg.seed)?,
        };
        let grid = TorusGrid::for_propagation(d, radius, horizon)?;
        let sc = SolveConfig::new(horizon, cfg.usize("steps"), 1.0, 1, grid)?;
        let norm = f.norm_l2();
        Some((ftrlab_core::dnls::linear_path(&f, &sc)?, norm))
    } else {
        None
    };
    let mut table = Table::new(&["q", "r", "d", "admissible", "norm", "ratio"]);
    let mut admissible = 0usize;
    for &q in cfg.floats("q") {
        for &r in cfg.floats("r") {
            let ok = is_admissible(q, r, d);
            admissible += ok as usize;
            let (norm, ratio) = match &path {
                Some((p, f)) => {
                    let n = mixed_norm(p, q, r, (0.0, horizon))?;
                    (Cell::Float(n), Cell::Float(n / f))
                }
                None => (Cell::Empty, Cell::Empty),
            };
            table.push(vec![q.into(), r.into(), d.into(), ok.into(), norm, ratio]);
        }
    }
    let pairs = table.len();
    Ok(Outcome::ok(table, json!({ "pairs": pairs, "admissible": admissible })))
}

fn decay_fit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.usize("d");
    let modes = match cfg.usize("modes") {
        0 if d == 1 => 2048,
        0 => 1024,
        m => m,
    };
    let window = match cfg.text("window") {
        "bandpass" => DecayWindow::BandPass { cutoff: cfg.float("cutoff") },
        _ => DecayWindow::Full,
    };
    let fit = decay_exponent(d, (cfg.float("t0"), cfg.float("t1")), TorusGrid::new(d, modes)?, window)?;
    let mut table = Table::new(&["kind", "t", "sup_norm", "slope", "intercept", "residual"]);
    for &(t, s) in &fit.samples {
        table.push_named(vec![("kind", "sample".into()), ("t", t.into()), ("sup_norm", s.into())]);
    }
    table.push_named(vec![
        ("kind", "fit".into()),
        ("slope", fit.slope.into()),
        ("intercept", fit.intercept.into()),
        ("residual", fit.residual.into()),
    ]);
    Ok(Outcome::ok(table, json!({ "modes": modes, "slope": fit.slope, "residual": fit.residual })))
}
