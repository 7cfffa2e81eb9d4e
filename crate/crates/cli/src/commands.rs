use std::sync::Arc;
use std::time::Instant;

use degreelab::degree::{degree_of, preimage_count};
use degreelab::energy::{
    bbm_limit_estimate, component_threshold_energy, monte_carlo_energy, threshold_energies, EnergyReport,
};
use degreelab::geometry::{write_grid_text, Discretization, GridSpec};
use degreelab::lab::{
    default_families, extremal_search, failure_probe, parse_deltas, sweep, SearchConfig, SweepRecord,
};
use degreelab::maps::sample_map;
use degreelab::proof::{
    average_extension, lemma1_checks, lemma1_population, rho_degree_bound, rho_field, rho_march, Domain,
    FunctionKind, ScalarFn,
};
use degreelab::{LabError, Result, SampledMap, SphereMap, SpherePoint};
use serde_json::json;

use crate::args::*;
use crate::output::{Cell, Report};

/// Runs one command; `timing` controls whether wall times are reported.
pub fn run(cmd: &Command, seed: u64, timing: bool) -> Result<Report> {
    let t = |ms: Option<f64>| if timing { Cell::from(ms) } else { Cell::Null };
    match cmd {
        Command::Degree(a) => degree(a),
        Command::Energy(a) => energy(a, seed, t),
        Command::Sweep(a) => sweep_cmd(a, t),
        Command::Search(a) => search(a, seed, t),
        Command::Probe(a) => probe(a),
        Command::Limit(a) => limit(a),
        Command::Extension(a) => extension(a),
        Command::Rho(a) => rho_cmd(a),
        Command::RhoBound(a) => rho_bound(a),
        Command::Lemma1(a) => lemma1(a, seed),
        Command::Grids(a) => grids(a),
    }
}

fn grid(spec: &str) -> Result<(GridSpec, Discretization)> {
    let g: GridSpec = spec.parse()?;
    let disc = g.build()?;
    Ok((g, disc))
}

fn sampled(map: &str, spec: &str) -> Result<(SphereMap, Discretization, SampledMap)> {
    let (_, disc) = grid(spec)?;
    let m = SphereMap::parse(map, disc.dim())?;
    let sm = sample_map(&m, &disc.grid)?;
    Ok((m, disc, sm))
}

fn default_grid(d: usize, given: &Option<String>, fine: &str, coarse: &str) -> Result<String> {
    match (given, d) {
        (Some(g), _) => Ok(g.clone()),
        (None, 1) => Ok(fine.to_string()),
        (None, 2) => Ok(coarse.to_string()),
        _ => Err(LabError::InvalidArgument(format!("dimension must be 1 or 2, got {d}"))),
    }
}

fn parse_point(s: &str, len: &[usize]) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| LabError::InvalidArgument(format!("bad point `{s}`")))?;
    if !len.contains(&v.len()) {
        return Err(LabError::InvalidArgument(format!("point `{s}` needs {len:?} coordinates")));
    }
    Ok(v)
}

fn sphere_point(s: &str, dim: usize) -> Result<SpherePoint> {
    let v = parse_point(s, &[2, 3])?;
    let z = v.get(2).copied().unwrap_or(0.0);
    if dim == 1 && z != 0.0 {
        return Err(LabError::InvalidArgument("points on S^1 have z = 0".into()));
    }
    SpherePoint::new([v[0], v[1], z])
}

fn degree(a: &DegreeArgs) -> Result<Report> {
    let (m, disc, sm) = sampled(&a.map, &a.grid)?;
    let r = degree_of(&sm, disc.mesh.as_deref())?;
    if r.is_suspect() {
        log::warn!("degree residual {:.3}; refine the grid", r.residual);
    }
    let mut rep = if a.target.is_some() {
        Report::new(&["raw", "degree", "residual", "preimage_count"])
    } else {
        Report::new(&["raw", "degree", "residual"])
    };
    let mut row = vec![r.raw.into(), r.degree.into(), r.residual.into()];
    if let Some(t) = &a.target {
        let target = sphere_point(t, m.dim())?;
        let res = a.resolution.unwrap_or(if m.dim() == 1 { 4096 } else { 5 });
        row.push(preimage_count(&m, &target, res)?.into());
    }
    rep.push(row);
    Ok(rep)
}

const ENERGY_COLUMNS: [&str; 10] =
    ["map", "d", "n", "delta", "scaled", "estimator", "value", "stderr", "pair_fraction", "runtime_ms"];

fn energy_row(map: &str, r: &EnergyReport, dim: usize, ms: Cell) -> Vec<Cell> {
    vec![
        map.into(),
        dim.into(),
        r.n.into(),
        r.delta.into(),
        r.scaled.into(),
        r.estimator.to_string().into(),
        r.value.into(),
        r.stderr.into(),
        r.pair_fraction.into(),
        ms,
    ]
}

fn energy(a: &EnergyArgs, seed: u64, t: impl Fn(Option<f64>) -> Cell) -> Result<Report> {
    let deltas = parse_deltas(&a.delta)?;
    let spec: GridSpec = a.grid.parse()?;
    let dim = spec.dim();
    let map = SphereMap::parse(&a.map, dim)?;
    let name = map.spec();
    let mut rep = Report::new(&ENERGY_COLUMNS);
    if let Some(mc) = &a.mc {
        if a.component.is_some() {
            return Err(LabError::InvalidArgument("--component is not available with --mc".into()));
        }
        let parts = parse_point(mc, &[1, 2])?;
        if parts.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(LabError::InvalidArgument(format!("--mc expects `n[,seed]`, got `{mc}`")));
        }
        let n = parts[0] as usize;
        let s = parts.get(1).map_or(seed, |v| *v as u64);
        for &d in &deltas {
            let start = Instant::now();
            let r = monte_carlo_energy(&map, d, n, s)?.with_scaling(!a.unscaled);
            rep.push(energy_row(&name, &r, dim, t(Some(start.elapsed().as_secs_f64() * 1e3))));
        }
        return Ok(rep);
    }
    let disc = spec.build()?;
    let sm = sample_map(&map, &disc.grid)?;
    let start = Instant::now();
    let reports: Vec<EnergyReport> = match a.component {
        Some(j) => {
            if a.unscaled {
                return Err(LabError::InvalidArgument("component energies are always scaled".into()));
            }
            deltas.iter().map(|&d| component_threshold_energy(&sm, j, d)).collect::<Result<_>>()?
        }
        None => threshold_energies(&sm, &deltas)?.reports(!a.unscaled),
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    for r in &reports {
        if r.under_resolved {
            log::warn!("delta {} is below the grid resolution floor", r.delta);
        }
        rep.push(energy_row(&name, r, dim, t(Some(ms))));
    }
    Ok(rep)
}

const SWEEP_COLUMNS: [&str; 9] = ["map", "d", "n", "delta", "degree", "energy_scaled", "ratio", "runtime_ms", "flag"];

fn sweep_row(r: &SweepRecord, ms: Cell) -> Vec<Cell> {
    vec![
        r.map.clone().into(),
        r.d.into(),
        r.n.into(),
        r.delta.into(),
        r.degree.into(),
        r.energy_scaled.into(),
        r.ratio.into(),
        ms,
        r.flag.to_string().into(),
    ]
}

fn sweep_cmd(a: &SweepArgs, t: impl Fn(Option<f64>) -> Cell) -> Result<Report> {
    let g = default_grid(a.d, &a.grid, "circle:8192", "ico:6")?;
    let (_, disc) = grid(&g)?;
    if disc.dim() != a.d {
        return Err(LabError::InvalidArgument(format!("grid {g} is not a grid on S^{}", a.d)));
    }
    let mut fams = match a.families.as_deref() {
        Some("default") => default_families(a.d)?,
        Some(other) => return Err(LabError::InvalidArgument(format!("unknown family set `{other}`"))),
        None if a.maps.is_empty() => default_families(a.d)?,
        None => Vec::new(),
    };
    for m in &a.maps {
        fams.push(SphereMap::parse(m, a.d)?);
    }
    let deltas = parse_deltas(&a.deltas)?;
    let report = sweep(&fams, &deltas, &disc)?;
    let mut rep = Report::new(&SWEEP_COLUMNS);
    for r in &report.records {
        rep.push(sweep_row(r, t(r.runtime_ms)));
    }
    rep.summary = Some(json!({
        "grid": g,
        "empirical_C_per_delta": report.empirical_c_per_delta,
        "headline_C": report.headline_c,
        "spread": report.spread,
    }));
    Ok(rep)
}

fn search(a: &SearchArgs, seed: u64, t: impl Fn(Option<f64>) -> Cell) -> Result<Report> {
    let mut cfg = SearchConfig::new(a.d, a.degree, a.delta, a.budget, seed);
    if let Some(g) = &a.search_grid {
        cfg.search_grid = g.parse()?;
    }
    if let Some(g) = &a.verify_grid {
        cfg.verify_grid = g.parse()?;
    }
    let res = extremal_search(&cfg)?;
    let mut cols = vec!["role"];
    cols.extend(SWEEP_COLUMNS);
    let mut rep = Report::new(&cols);
    for (role, r) in [("seed", &res.seed_record), ("best", &res.record)] {
        let mut row = vec![Cell::from(role)];
        row.extend(sweep_row(r, t(r.runtime_ms)));
        rep.push(row);
    }
    rep.summary = Some(json!({
        "best_map": res.best_map,
        "search_grid": cfg.search_grid.to_string(),
        "verify_grid": cfg.verify_grid.to_string(),
        "evaluations": res.evaluations,
        "accepted": res.accepted,
        "rejected": res.rejected,
        "search_ratio": res.search_ratio,
    }));
    Ok(rep)
}

fn probe(a: &ProbeArgs) -> Result<Report> {
    let g = default_grid(a.d, &a.grid, "circle:8192", "ico:5")?;
    let (_, disc) = grid(&g)?;
    if disc.dim() != a.d {
        return Err(LabError::InvalidArgument(format!("grid {g} is not a grid on S^{}", a.d)));
    }
    let fams: Vec<SphereMap> = if a.maps.is_empty() {
        [1.0, 10.0, 100.0].iter().map(|&l| SphereMap::bubble(a.d, 1, l)).collect::<Result<_>>()?
    } else {
        a.maps.iter().map(|m| SphereMap::parse(m, a.d)).collect::<Result<_>>()?
    };
    let report = failure_probe(a.delta, &fams, &disc)?;
    let mut rep =
        Report::new(&["map", "d", "n", "delta", "degree", "energy_unscaled", "energy_scaled", "ratio", "flag"]);
    for row in &report.rows {
        let r = &row.record;
        rep.push(vec![
            r.map.clone().into(),
            r.d.into(),
            r.n.into(),
            r.delta.into(),
            r.degree.into(),
            row.energy_unscaled.into(),
            r.energy_scaled.into(),
            r.ratio.into(),
            r.flag.to_string().into(),
        ]);
    }
    rep.summary = Some(json!({ "grid": g, "ell": report.ell, "ratios_increasing": report.ratios_increasing }));
    Ok(rep)
}

fn limit(a: &LimitArgs) -> Result<Report> {
    let (spec, disc) = grid(&a.grid)?;
    let map = SphereMap::parse(&a.map, disc.dim())?;
    let deltas = parse_deltas(&a.deltas)?;
    let est = bbm_limit_estimate(&map, &disc.grid, &deltas)?;
    let mut rep = Report::new(&[
        "map", "d", "n", "delta", "energy_scaled", "dirichlet", "ratio", "fit", "k_estimate", "residual",
    ]);
    for k in 0..deltas.len() {
        rep.push(vec![
            map.spec().into(),
            map.dim().into(),
            disc.grid.len().into(),
            est.deltas[k].into(),
            est.energies[k].into(),
            est.dirichlet.into(),
            est.ratios[k].into(),
            (est.k_estimate + est.slope * est.deltas[k]).into(),
            est.k_estimate.into(),
            est.residual.into(),
        ]);
    }
    rep.summary = Some(json!({
        "grid": spec.to_string(),
        "k_estimate": est.k_estimate,
        "slope": est.slope,
        "residual": est.residual,
    }));
    Ok(rep)
}

fn extension(a: &ExtensionArgs) -> Result<Report> {
    let (_, _, sm) = sampled(&a.map, &a.grid)?;
    let v = parse_point(&a.point, &[3, 4])?;
    let big_x = if v.len() == 4 {
        let x = SpherePoint::new([v[0], v[1], v[2]])?;
        let t = v[3];
        if !(t > 0.0 && t <= 1.0) {
            return Err(LabError::InvalidArgument(format!("t must lie in (0, 1], got {t}")));
        }
        x.0.map(|c| (1.0 - t) * c)
    } else {
        [v[0], v[1], v[2]]
    };
    let u = average_extension(&sm, big_x)?;
    let len = big_x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut rep = Report::new(&["X1", "X2", "X3", "r", "u1", "u2", "u3", "norm"]);
    rep.push(vec![
        big_x[0].into(),
        big_x[1].into(),
        big_x[2].into(),
        (2.0 * (1.0 - len)).into(),
        u[0].into(),
        u[1].into(),
        u[2].into(),
        u.iter().map(|c| c * c).sum::<f64>().sqrt().into(),
    ]);
    Ok(rep)
}

fn rho_cmd(a: &RhoArgs) -> Result<Report> {
    let (m, _, sm) = sampled(&a.map, &a.grid)?;
    let mut rep = Report::new(&["index", "x", "y", "z", "rho"]);
    match &a.point {
        Some(p) => {
            let x = sphere_point(p, m.dim())?;
            let march = rho_march(&sm, &x, a.step)?;
            rep.push(vec![Cell::Null, x.0[0].into(), x.0[1].into(), x.0[2].into(), march.rho.into()]);
            rep.summary = Some(json!({ "modulus": march.modulus, "steps": march.norms.len() }));
        }
        None => {
            let field = rho_field(&sm, a.step)?;
            for (i, (p, r)) in sm.grid().points().iter().zip(&field.rho).enumerate() {
                rep.push(vec![i.into(), p.0[0].into(), p.0[1].into(), p.0[2].into(), (*r).into()]);
            }
        }
    }
    Ok(rep)
}

fn rho_bound(a: &RhoBoundArgs) -> Result<Report> {
    let (m, disc, sm) = sampled(&a.map, &a.grid)?;
    let b = rho_degree_bound(&sm, disc.mesh.as_deref(), a.step)?;
    let mut rep = Report::new(&["map", "d", "n", "step", "lhs", "rhs", "ratio", "violation"]);
    rep.push(vec![
        m.spec().into(),
        m.dim().into(),
        disc.grid.len().into(),
        a.step.into(),
        b.lhs.into(),
        b.rhs.into(),
        b.ratio.into(),
        b.violation.into(),
    ]);
    Ok(rep)
}

fn lemma1(a: &Lemma1Args, seed: u64) -> Result<Report> {
    let deltas = parse_deltas(&a.delta)?;
    let domain = match a.domain {
        DomainArg::Interval => Domain::unit_interval(),
        DomainArg::Disk => Domain::unit_disk(),
    };
    let reports = match a.function {
        FunctionArg::Identity => {
            vec![lemma1_checks(&ScalarFn::Affine { c: 0.0, a: [1.0, 0.0] }, &domain, a.p, &deltas, a.n)?]
        }
        FunctionArg::RandomPl | FunctionArg::RandomTrig => {
            let kind =
                if a.function == FunctionArg::RandomPl { FunctionKind::PiecewiseLinear } else { FunctionKind::Trig };
            if a.trials == 0 {
                return Err(LabError::InvalidArgument("--trials must be positive".into()));
            }
            lemma1_population(kind, &domain, a.trials, seed, a.p, &deltas, a.n)?
        }
    };
    let mut rep =
        Report::new(&["trial", "domain", "p", "delta", "n_points", "measure", "lhs", "rhs_core", "ratio_bound"]);
    let dom = if domain.dim() == 1 { "interval" } else { "disk" };
    for (trial, per_delta) in reports.iter().enumerate() {
        for r in per_delta {
            rep.push(vec![
                trial.into(),
                dom.into(),
                r.p.into(),
                r.delta.into(),
                r.n_points.into(),
                r.measure.into(),
                r.lhs.into(),
                r.rhs_core.into(),
                r.ratio_bound.into(),
            ]);
        }
    }
    let max_per_delta: Vec<_> = deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let best = reports.iter().map(|r| r[k].ratio_bound).fold(0.0, f64::max);
            json!({ "delta": d, "max_ratio_bound": best })
        })
        .collect();
    rep.summary = Some(json!({ "max_ratio_bound_per_delta": max_per_delta }));
    Ok(rep)
}

fn grids(a: &GridsArgs) -> Result<Report> {
    let (spec, disc) = grid(&a.grid)?;
    let g: &Arc<_> = &disc.grid;
    if a.summary {
        let mut rep = Report::new(&["grid", "dim", "n", "weight_sum", "spacing", "triangles"]);
        rep.push(vec![
            spec.to_string().into(),
            g.dim().into(),
            g.len().into(),
            g.total_weight().into(),
            g.spacing().into(),
            disc.mesh.as_ref().map(|m| m.triangles().len()).into(),
        ]);
        return Ok(rep);
    }
    let mut rep = Report::new(&["x", "y", "z", "w"]);
    for (p, w) in g.points().iter().zip(g.weights()) {
        rep.push(vec![p.0[0].into(), p.0[1].into(), p.0[2].into(), (*w).into()]);
    }
    rep.raw = Some(write_grid_text(g, disc.mesh.as_deref()));
    if let Some(m) = &disc.mesh {
        rep.summary = Some(json!({ "triangles": m.triangles() }));
    }
    Ok(rep)
}
