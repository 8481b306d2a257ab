//! One function per subcommand: load the config, run the library, collect
//! results and checks.

use std::path::Path;

use hurwitz::deformation::{flow, reconstruct_map, FlowState, ModuliPath};
use hurwitz::fixtures;
use hurwitz::geometry::{
    beta_scan, bergmann_branch_matrix, egoroff_report, genus_formalism_consistency, rauch_check,
};
use hurwitz::hydro::{axis, evolve, hodograph_solve, verify_hds, verify_tsarev, HydroField};
use hurwitz::isomonodromy::{from_rows, loop_around, to_rows, Pullback};
use hurwitz::rank1::NuPoint;
use hurwitz::suite::{self, Measurement, Suite};
use hurwitz::tolerances::{mixed_error, Tolerances};
use hurwitz::{Error, RationalCovering, Result, C};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    load, CoverConfig, FlowConfig, GeometryConfig, HydroSpec, IsoConfig, Rank1Config,
};
use crate::Outcome;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn outcome<I: Serialize>(inputs: &I, results: Value, checks: Vec<Measurement>) -> Outcome {
    Outcome { inputs: to_value(inputs), results, checks, csv: None }
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn covering_json(cov: &RationalCovering) -> Value {
    json!({
        "degree": cov.degree(),
        "poles": cov.poles(),
        "residues": cov.residues(),
        "lambdas": cov.lambdas(),
        "gammas": cov.gammas(),
        "alphas": cov.alphas(),
        "kappas": cov.kappas(),
    })
}

fn critical_checks(cov: &RationalCovering, tol: &Tolerances) -> Vec<Measurement> {
    let mut residue = 0.0f64;
    let mut value = 0.0f64;
    for ((g, a), l) in cov.gammas().iter().zip(cov.alphas()).zip(cov.lambdas()) {
        residue = residue.max(mixed_error(*a, C::new(1.0, 0.0) / cov.second_derivative(*g)));
        value = value.max(mixed_error(cov.eval_unchecked(*g), *l));
    }
    let expected = 2 * cov.degree() - 2;
    vec![
        Measurement::exact("critical_count", cov.gammas().len().abs_diff(expected)),
        Measurement::below("critical_values", value, tol.partial_fraction),
        Measurement::below("critical_residues", residue, tol.partial_fraction),
    ]
}

pub fn cover_build(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: CoverConfig = load(path)?;
    let cov = cfg.covering.build()?;
    Ok(outcome(&cfg, covering_json(&cov), critical_checks(&cov, tol)))
}

pub fn cover_verify(path: &Path, tol: &Tolerances, seed: u64) -> Result<Outcome> {
    let cfg: CoverConfig = load(path)?;
    let cov = cfg.covering.build()?;
    let scale = cov.scale().max(cov.branch().scale()).max(1.0);
    let mut rng = fixtures::rng(seed);
    let mut samples = Vec::with_capacity(cfg.samples);
    while samples.len() < cfg.samples {
        let z = C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)) * scale;
        if cov.gammas().iter().chain(cov.poles()).all(|g| (g - z).norm() > 0.02 * scale) {
            samples.push(z);
        }
    }
    let pf = cov.verify_partial_fraction(&samples);
    let mut checks = critical_checks(&cov, tol);
    checks.push(Measurement::below("partial_fraction", pf, tol.partial_fraction));
    let results = json!({ "covering": covering_json(&cov), "samples": samples.len(), "partial_fraction": pf });
    Ok(outcome(&cfg, results, checks))
}

pub fn flow_run(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: FlowConfig = load(path)?;
    let cov = cfg.covering.build()?;
    let st = FlowState::from_covering(&cov, cfg.marked.clone(), vec![]);
    let end = flow(&st, &ModuliPath::through(cov.lambdas(), &cfg.path)?)?;
    let target = end.lambdas().to_vec();
    let rec = reconstruct_map(&end, &target, &cov)?;
    let moved = end.covering()?;
    let marked_fiber = end
        .marked
        .iter()
        .zip(&cfg.marked)
        .map(|(p, p0)| (moved.eval_unchecked(*p) - cov.eval_unchecked(*p0)).norm())
        .fold(0.0, f64::max);
    let checks = vec![
        Measurement::below("reconstructed_lambdas", max_diff(rec.lambdas(), &target), tol.deformation),
        Measurement::below("reconstructed_gammas", max_diff(rec.gammas(), &end.branch.gammas), tol.deformation),
        Measurement::below("reconstructed_kappas", max_diff(rec.kappas(), &end.branch.kappas), tol.deformation),
        Measurement::below("marked_projection", marked_fiber, tol.deformation),
    ];
    let results = json!({
        "branch": end.branch,
        "poles": end.poles,
        "residues": end.residues,
        "marked": end.marked,
        "reconstructed": covering_json(&rec),
    });
    Ok(outcome(&cfg, results, checks))
}

pub fn rank1_solve(path: &Path) -> Result<Outcome> {
    let cfg: Rank1Config = load(path)?;
    let cov = cfg.covering.build()?;
    let sol = cfg.solution.build(&cov)?;
    let psi: Vec<C> = sol.probes().iter().map(|p| sol.psi(NuPoint::Finite(*p))).collect::<Result<_>>()?;
    let results = json!({
        "branch": sol.branch(),
        "f": sol.f()?,
        "grad_f": sol.grad_f()?,
        "psi_at_probes": psi,
    });
    Ok(outcome(&cfg, results, vec![]))
}

pub fn rank1_residual(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: Rank1Config = load(path)?;
    let cov = cfg.covering.build()?;
    let sol = cfg.solution.build(&cov)?;
    let pairs = sol.pde_residuals()?;
    let mut checks: Vec<Measurement> = pairs
        .iter()
        .map(|r| Measurement::below(&format!("pde_{}_{}", r.m, r.n), r.relative, tol.residual))
        .collect();
    let mut linear = Vec::new();
    for k in 0..sol.probes().len() {
        let r = sol.linear_system_residual(k)?;
        checks.push(Measurement::below(&format!("linear_system_probe_{k}"), r, tol.residual));
        linear.push(r);
    }
    let table: Vec<Value> =
        pairs.iter().map(|r| json!({ "m": r.m, "n": r.n, "value": r.value, "relative": r.relative })).collect();
    Ok(outcome(&cfg, json!({ "pde": table, "linear_system": linear }), checks))
}

pub fn rank1_tau(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: Rank1Config = load(path)?;
    let cov = cfg.covering.build()?;
    let sol = cfg.solution.build(&cov)?;
    let direct = sol.tau_grad()?;
    let residue = sol.tau_grad_residue()?;
    let agreement = direct.iter().zip(&residue).map(|(a, b)| mixed_error(*a, *b)).fold(0.0, f64::max);
    let mut checks = vec![Measurement::below("residue_vs_direct", agreement, tol.tau_equivalence)];
    let mut loop_integral = None;
    if sol.branch().len() >= 2 {
        let lam = sol.state.lambdas().to_vec();
        let d = cfg.loop_size;
        let corner = |a: f64, b: f64| {
            let mut v = lam.clone();
            v[0] += a;
            v[1] += C::new(0.0, b);
            v
        };
        let lp = ModuliPath::closed(vec![corner(0.0, 0.0), corner(d, 0.0), corner(d, d), corner(0.0, d)])?;
        let (integral, _) = sol.tau_integrate(&lp, 8)?;
        checks.push(Measurement::below("loop_integral", integral.norm(), tol.residual));
        loop_integral = Some(integral);
    }
    let results = json!({
        "tau_grad": direct,
        "tau_grad_residue": residue,
        "tau_hessian": sol.tau_hessian()?,
        "loop_integral": loop_integral,
    });
    Ok(outcome(&cfg, results, checks))
}

pub fn geometry_report(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: GeometryConfig = load(path)?;
    let cov = cfg.covering.build()?;
    let bergmann = bergmann_branch_matrix(cov.branch());
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    results.insert("covering".into(), covering_json(&cov));
    results.insert("bergmann".into(), to_value(&bergmann));
    if let Some([p, q]) = cfg.rauch_points {
        let r = rauch_check(&cov, p, q)?;
        checks.push(Measurement::below("rauch_points", r.points, tol.residual));
        checks.push(Measurement::below("rauch_mixed", r.mixed, tol.residual));
        checks.push(Measurement::below("rauch_shifts", r.shifts, tol.residual));
        results.insert("rauch".into(), to_value(&r));
    }
    if let Some(spec) = &cfg.solution {
        let sol = spec.build(&cov)?;
        let e = egoroff_report(&sol)?;
        for (name, v) in [
            ("rotation_up_to_sign", e.rotation_up_to_sign),
            ("rotation_squared", e.rotation_squared),
            ("flatness", e.flatness),
            ("shifts", e.shifts),
            ("dilatation", e.dilatation),
            ("inversion", e.inversion),
            ("egoroff_symmetry", e.egoroff_symmetry),
            ("christoffel", e.christoffel_residual),
        ] {
            checks.push(Measurement::below(name, v, tol.residual));
        }
        let genus = genus_formalism_consistency(cov.branch(), spec.gamma0)?;
        checks.push(Measurement::below("genus_reduction", genus, tol.genus_reduction));
        results.insert("egoroff".into(), to_value(&e));
    }
    let scan = beta_scan(&cov, &cfg.beta_path)?;
    let m = bergmann.len();
    let mut header = vec!["step".to_string()];
    for k in 0..m {
        header.push(format!("re_lambda_{}", k + 1));
        header.push(format!("im_lambda_{}", k + 1));
    }
    for a in 0..m {
        for b in a + 1..m {
            header.push(format!("re_beta_{}_{}", a + 1, b + 1));
            header.push(format!("im_beta_{}_{}", a + 1, b + 1));
        }
    }
    let mut rows = vec![header];
    let start = hurwitz::geometry::BetaSample { lambdas: cov.lambdas().to_vec(), beta: bergmann.beta.clone() };
    for (step, s) in std::iter::once(&start).chain(&scan).enumerate() {
        let mut row = vec![step.to_string()];
        for l in &s.lambdas {
            row.push(l.re.to_string());
            row.push(l.im.to_string());
        }
        for a in 0..m {
            for b in a + 1..m {
                row.push(s.beta[a][b].re.to_string());
                row.push(s.beta[a][b].im.to_string());
            }
        }
        rows.push(row);
    }
    results.insert("beta_scan".into(), to_value(&scan));
    let mut out = outcome(&cfg, Value::Object(results), checks);
    out.csv = Some(rows);
    Ok(out)
}

fn pullback(cfg: &IsoConfig) -> Result<(RationalCovering, Pullback)> {
    let cov = cfg.covering.build()?;
    let residues = cfg.residues.iter().map(|r| from_rows(r)).collect::<Result<Vec<_>>>()?;
    let pb = Pullback::new(&cov, &cfg.anchors, cfg.gamma0, residues, cfg.frame)?;
    Ok((cov, pb))
}

fn pullback_json(pb: &Pullback) -> Result<Value> {
    let s = pb.schlesinger();
    Ok(json!({
        "lambdas": pb.flow.lambdas(),
        "poles": pb.poles(),
        "gamma0": pb.gamma0(),
        "residues": pb.residues.iter().map(to_rows).collect::<Vec<_>>(),
        "casimirs": s.casimirs(),
        "tau_grad": pb.tau_grad()?,
    }))
}

pub fn iso_run(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: IsoConfig = load(path)?;
    let (cov, pb) = pullback(&cfg)?;
    let end = pb.flow(&ModuliPath::through(cov.lambdas(), &cfg.path)?)?;
    let cons = end.conservation(&pb);
    let hier = end.verify_hierarchy()?;
    let checks = vec![
        Measurement::below("residue_sum", cons.residue_sum, tol.conservation),
        Measurement::below("casimir_drift", cons.casimir_drift, tol.conservation),
        Measurement::below("zero_curvature", hier.zero_curvature, tol.residual),
        Measurement::below("hierarchy", hier.hierarchy, tol.residual),
    ];
    let results = json!({
        "start": pullback_json(&pb)?,
        "end": pullback_json(&end)?,
        "conservation": cons,
        "hierarchy": hier,
    });
    Ok(outcome(&cfg, results, checks))
}

pub fn iso_tau_check(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: IsoConfig = load(path)?;
    let (cov, pb) = pullback(&cfg)?;
    let rep = pb.tau_relation_check(&ModuliPath::through(cov.lambdas(), &cfg.path)?, cfg.order)?;
    let checks = vec![Measurement::below("tau_relation", rep.residual, tol.residual)];
    Ok(outcome(&cfg, to_value(&rep), checks))
}

pub fn iso_monodromy(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: IsoConfig = load(path)?;
    let (cov, pb) = pullback(&cfg)?;
    let end = pb.flow(&ModuliPath::through(cov.lambdas(), &cfg.path)?)?;
    let (s0, s1) = (pb.schlesinger(), end.schlesinger());
    let mut checks = Vec::new();
    let mut loops = Vec::new();
    for j in 0..s0.z.len() {
        let before = pb.monodromy(&loop_around(&s0, j, cfg.loop_radius, cfg.loop_vertices))?;
        let after = end.monodromy(&loop_around(&s1, j, cfg.loop_radius, cfg.loop_vertices))?;
        let drift = (&before - &after).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        checks.push(Measurement::below(&format!("monodromy_pole_{j}"), drift, tol.residual));
        loops.push(json!({ "pole": j, "before": to_rows(&before), "after": to_rows(&after), "drift": drift }));
    }
    Ok(outcome(&cfg, json!({ "loops": loops }), checks))
}

fn hydro_seed(cfg: &HydroSpec) -> Result<HydroField> {
    let field = HydroField::new(&cfg.build()?)?;
    match &cfg.seed_branch_points {
        Some(l) => field.flow_to(l),
        None => Ok(field),
    }
}

pub fn hydro_solve(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: HydroSpec = load(path)?;
    let opts = cfg.options();
    let sol = hodograph_solve(&hydro_seed(&cfg)?, cfg.x, cfg.t, &opts)?;
    let consistency = sol.consistency()?;
    let checks = vec![
        Measurement::below("residual_norm", sol.residual_norm(), opts.tolerance),
        Measurement::below("ratio_form", consistency, tol.hodograph),
    ];
    let results = json!({
        "x": sol.x,
        "t": sol.t,
        "lambdas": sol.lambdas(),
        "speeds": sol.field.speeds()?,
        "iterations": sol.iterations,
        "history": sol.history,
    });
    Ok(outcome(&cfg, results, checks))
}

fn grid_axes(cfg: &HydroSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = cfg.grid.ok_or_else(|| Error::ConfigParse("`grid` is required".into()))?;
    Ok((axis(g.x.lo, g.x.hi, g.x.n), axis(g.t.lo, g.t.hi, g.t.n)))
}

pub fn hydro_evolve(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: HydroSpec = load(path)?;
    let (xs, ts) = grid_axes(&cfg)?;
    let grid = evolve(&hydro_seed(&cfg)?, &xs, &ts, &cfg.options())?;
    let m = grid[0][0].lambdas().len();
    let mut header = vec!["x".to_string(), "t".to_string()];
    for k in 1..=m {
        header.push(format!("re_lambda_{k}"));
        header.push(format!("im_lambda_{k}"));
    }
    for k in 1..=m {
        header.push(format!("re_v_{k}"));
        header.push(format!("im_v_{k}"));
    }
    let mut rows = vec![header];
    for (i, row) in grid.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            let mut r = vec![xs[i].to_string(), ts[j].to_string()];
            for z in s.lambdas().iter().chain(&s.field.speeds()?) {
                r.push(z.re.to_string());
                r.push(z.im.to_string());
            }
            rows.push(r);
        }
    }
    let mut checks = vec![];
    let mut hds = None;
    if xs.len() >= 3 && ts.len() >= 3 {
        let rep = verify_hds(&grid, &xs, &ts)?;
        checks.push(Measurement::below("hds", rep.residual, tol.residual));
        hds = Some(rep);
    }
    let worst = grid.iter().flatten().map(|s| s.residual_norm()).fold(0.0, f64::max);
    checks.push(Measurement::below("residual_norm", worst, cfg.options().tolerance));
    let mut out = outcome(&cfg, json!({ "points": rows.len() - 1, "hds": hds }), checks);
    out.csv = Some(rows);
    Ok(out)
}

pub fn hydro_verify(path: &Path, tol: &Tolerances) -> Result<Outcome> {
    let cfg: HydroSpec = load(path)?;
    let field = HydroField::new(&cfg.build()?)?;
    let ts = verify_tsarev(&field)?;
    let mut checks = vec![
        Measurement::below("tsarev_speeds", ts.speeds, tol.residual),
        Measurement::below("tsarev_phis", ts.phis, tol.residual),
    ];
    let mut hds = None;
    if cfg.grid.is_some() {
        let (xs, ts_axis) = grid_axes(&cfg)?;
        let grid = evolve(&hydro_seed(&cfg)?, &xs, &ts_axis, &cfg.options())?;
        let rep = verify_hds(&grid, &xs, &ts_axis)?;
        checks.push(Measurement::below("hds", rep.residual, tol.residual));
        hds = Some(rep);
    }
    let results = json!({ "speeds": field.speeds()?, "tsarev": ts, "hds": hds });
    Ok(outcome(&cfg, results, checks))
}

pub fn verify_all(s: Suite, tol: &Tolerances) -> Result<Outcome> {
    let report = suite::run_with(s, tol, |c| eprintln!("{}", c.line()));
    let mut checks = Vec::new();
    for c in &report.criteria {
        for m in &c.measurements {
            checks.push(Measurement { name: format!("{}.{}", c.name, m.name), ..m.clone() });
        }
        if c.error.is_some() || c.measurements.is_empty() {
            checks.push(Measurement { name: format!("{}.error", c.name), value: f64::NAN, tolerance: 0.0, passed: false });
        }
    }
    Ok(Outcome { inputs: json!({ "suite": s }), results: to_value(&report), checks, csv: None })
}
