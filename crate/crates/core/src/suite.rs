//! The acceptance criteria as named, deterministic checks.
//!
//! Every criterion runs on fixed seeds. `Suite::Quick` samples fewer
//! coverings and frames than `Suite::Full`; both use the same tolerances.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deformation::{flow, flow_to, reconstruct_map, FlowState, ModuliPath};
use crate::error::Result;
use crate::fixtures as fx;
use crate::geometry::{egoroff_report, genus_formalism_consistency, rauch_check};
use crate::hydro::{axis, evolve, hodograph_solve, verify_hds, verify_tsarev, HydroField, NewtonOptions};
use crate::isomonodromy::{jm_tau_grad, loop_around, Frame, Pullback, SchlesingerState};
use crate::rank1::{euler_darboux_check, Density};
use crate::tolerances::{mixed_error, Tolerances};
use crate::{fd, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Full,
}

impl Suite {
    fn full(self) -> bool {
        self == Suite::Full
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    /// Strict upper bound; zero means the value must be exactly zero.
    pub tolerance: f64,
    pub passed: bool,
}

impl Measurement {
    pub fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Measurement { name: name.into(), value, tolerance, passed: value < tolerance }
    }

    pub fn exact(name: &str, mismatches: usize) -> Self {
        Measurement { name: name.into(), value: mismatches as f64, tolerance: 0.0, passed: mismatches == 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub measurements: Vec<Measurement>,
    /// Name and message of the library error that stopped the criterion.
    pub error: Option<String>,
    pub passed: bool,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionReport {
    /// One line: status, id, name, then every measurement against its bound.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {:>2} {:<22}", self.id, self.name);
        for m in &self.measurements {
            let rel = if m.tolerance == 0.0 { "==" } else { "<" };
            s.push_str(&format!(" {}={:.2e}{}{:.0e}", m.name, m.value, rel, m.tolerance));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(" error={e}"));
        }
        s.push_str(&format!(" ({:.1}s)", self.seconds));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub tolerances: Tolerances,
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

type Check = fn(Suite, &Tolerances) -> Result<Vec<Measurement>>;

pub const CRITERIA: [(&str, Check); 10] = [
    ("closed_form_two_sheets", closed_form_two_sheets),
    ("partial_fractions", partial_fractions),
    ("deformation", deformation),
    ("euler_darboux", euler_darboux),
    ("scalar_tau", scalar_tau),
    ("rauch", rauch),
    ("darboux_egoroff", darboux_egoroff),
    ("genus_reduction", genus_reduction),
    ("isomonodromy", isomonodromy),
    ("hydro", hydro),
];

/// Run criterion `id` (1-based).
pub fn run_criterion(id: usize, suite: Suite, tol: &Tolerances) -> CriterionReport {
    let (name, check) = CRITERIA[id - 1];
    let start = Instant::now();
    let (measurements, error) = match check(suite, tol) {
        Ok(m) => (m, None),
        Err(e) => (vec![], Some(format!("{}: {e}", e.name()))),
    };
    let passed = error.is_none() && !measurements.is_empty() && measurements.iter().all(|m| m.passed);
    CriterionReport { id, name, measurements, error, passed, seconds: start.elapsed().as_secs_f64() }
}

/// Run every criterion, calling `each` as soon as one finishes.
pub fn run_with<F: FnMut(&CriterionReport)>(suite: Suite, tol: &Tolerances, mut each: F) -> SuiteReport {
    let criteria: Vec<CriterionReport> = (1..=CRITERIA.len())
        .map(|id| {
            let r = run_criterion(id, suite, tol);
            each(&r);
            r
        })
        .collect();
    let passed = criteria.iter().all(|c| c.passed);
    SuiteReport { suite, tolerances: *tol, criteria, passed }
}

pub fn run(suite: Suite, tol: &Tolerances) -> SuiteReport {
    run_with(suite, tol, |_| {})
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn closed_form_two_sheets(_: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let cov = fx::two_sheet();
    let want_l = [c(0.0, 0.0), c(4.0, 0.0)];
    let want_g = [c(1.0, 0.0), c(3.0, 0.0)];
    let want_a = [c(-0.5, 0.0), c(0.5, 0.0)];
    Ok(vec![
        Measurement::below("lambda", max_diff(cov.lambdas(), &want_l), tol.closed_form),
        Measurement::below("gamma", max_diff(cov.gammas(), &want_g), tol.closed_form),
        Measurement::below("alpha", max_diff(cov.alphas(), &want_a), tol.closed_form),
    ])
}

fn partial_fractions(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let per_degree = if suite.full() { 10 } else { 3 };
    let mut worst = 0.0f64;
    for degree in 2..=5 {
        for k in 0..per_degree {
            let seed = 1000 * degree as u64 + k;
            let cov = fx::covering(seed, degree);
            let mut rng = fx::rng(seed ^ 0x5eed);
            let mut samples = Vec::with_capacity(100);
            while samples.len() < 100 {
                let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                if cov.gammas().iter().chain(cov.poles()).all(|g| (g - z).norm() > 0.05) {
                    samples.push(z);
                }
            }
            worst = worst.max(cov.verify_partial_fraction(&samples));
        }
    }
    Ok(vec![Measurement::below("partial_fraction", worst, tol.partial_fraction)])
}

fn shifted(l: &[C], i: usize, d: C) -> Vec<C> {
    let mut v = l.to_vec();
    v[i] += d;
    v
}

fn circle(center: C, r: f64, n: usize) -> Vec<C> {
    (0..n).map(|k| center + C::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64 + 0.05)).collect()
}

fn deformation(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let cases: &[(u64, usize)] = if suite.full() { &[(1, 3), (2, 3), (3, 4), (4, 2)] } else { &[(1, 3), (3, 4)] };
    let mut order = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut mismatches = 0;
    for &(seed, degree) in cases {
        let cov = fx::covering(seed, degree);
        let st = FlowState::from_covering(&cov, vec![], vec![]);
        let l = cov.lambdas().to_vec();

        let d = c(0.1, 0.0);
        let a = shifted(&l, 0, d);
        let ab = shifted(&a, 1, d);
        let b = shifted(&l, 1, d);
        let one = flow(&st, &ModuliPath::through(&l, &[a, ab.clone()])?)?;
        let two = flow(&st, &ModuliPath::through(&l, &[b, ab])?)?;
        order = order
            .max(max_diff(&one.branch.gammas, &two.branch.gammas))
            .max(max_diff(&one.branch.alphas, &two.branch.alphas));

        let target: Vec<C> = l.iter().enumerate().map(|(i, x)| x + C::from_polar(0.1, 0.7 * i as f64 + 0.3)).collect();
        let end = flow_to(&st, &target)?;
        let rec = reconstruct_map(&end, &target, &cov)?;
        round_trip = round_trip
            .max(max_diff(rec.lambdas(), &target))
            .max(max_diff(rec.gammas(), &end.branch.gammas))
            .max(max_diff(rec.kappas(), &end.branch.kappas));

        let small: Vec<C> = l.iter().map(|x| x + c(0.03, 0.02)).collect();
        let after = flow_to(&st, &small)?.covering()?;
        let sep = cov.branch().min_lambda_separation();
        for lam in &l {
            let lp = circle(*lam, 0.3 * sep, 24);
            if cov.loop_permutation(&lp)? != after.loop_permutation(&lp)? {
                mismatches += 1;
            }
        }
    }
    Ok(vec![
        Measurement::below("path_order", order, tol.deformation),
        Measurement::below("round_trip", round_trip, tol.deformation),
        Measurement::exact("monodromy_mismatches", mismatches),
    ])
}

fn euler_darboux(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let seeds = if suite.full() { 3 } else { 1 };
    let mut worst = 0.0f64;
    for k in 0..seeds {
        let sol = fx::scalar_solution(200 + k, 3, 3)?;
        for r in sol.pde_residuals()? {
            worst = worst.max(r.relative);
        }
    }
    let h = Density::fourier(vec![c(0.0, 0.3), c(0.5, 0.0), c(1.0, 0.0), c(0.2, 0.2), c(0.0, 0.1)])?;
    let classic = euler_darboux_check(c(0.4, 1.0), c(0.4, -1.0), &h, 3.0, 512)?;
    Ok(vec![
        Measurement::below("generalized", worst, tol.residual),
        Measurement::below("classic", classic.relative, tol.residual),
    ])
}

fn scalar_tau(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let seeds = if suite.full() { 3 } else { 1 };
    let mut equivalence = 0.0f64;
    let mut closedness = 0.0f64;
    for k in 0..seeds {
        let sol = fx::scalar_solution(300 + k, 3, 2)?;
        for (a, b) in sol.tau_grad()?.iter().zip(sol.tau_grad_residue()?) {
            equivalence = equivalence.max(mixed_error(*a, b));
        }
        let lam = sol.state.lambdas().to_vec();
        let corner = |a: f64, b: f64| {
            let mut v = lam.clone();
            v[0] += a;
            v[1] += C::new(0.0, b);
            v
        };
        let d = 0.05;
        let path = ModuliPath::closed(vec![corner(0.0, 0.0), corner(d, 0.0), corner(d, d), corner(0.0, d)])?;
        let (integral, _) = sol.tau_integrate(&path, 8)?;
        closedness = closedness.max(integral.norm());
    }
    Ok(vec![
        Measurement::below("residue_vs_direct", equivalence, tol.tau_equivalence),
        Measurement::below("loop_integral", closedness, tol.residual),
    ])
}

fn rauch(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let cases: &[(u64, usize)] = if suite.full() { &[(200, 3), (201, 3), (202, 3), (203, 2)] } else { &[(200, 3), (203, 2)] };
    let (mut points, mut mixed, mut shifts) = (0.0f64, 0.0f64, 0.0f64);
    for &(seed, degree) in cases {
        let rep = rauch_check(&fx::covering(seed, degree), c(2.3, 1.9), c(-2.1, 2.4))?;
        points = points.max(rep.points);
        mixed = mixed.max(rep.mixed);
        shifts = shifts.max(rep.shifts);
    }
    Ok(vec![
        Measurement::below("point_kernel", points, tol.residual),
        Measurement::below("branch_kernel", mixed, tol.residual),
        Measurement::below("shift_invariance", shifts, tol.residual),
    ])
}

fn darboux_egoroff(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let cases: &[(u64, usize, usize)] =
        if suite.full() { &[(300, 3, 2), (301, 3, 2), (310, 4, 1)] } else { &[(300, 3, 2)] };
    let mut worst = [0.0f64; 6];
    for &(seed, degree, dd) in cases {
        let rep = egoroff_report(&fx::scalar_solution(seed, degree, dd)?)?;
        let vals = [rep.flatness, rep.shifts, rep.dilatation, rep.inversion, rep.egoroff_symmetry, rep.rotation_squared];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
    }
    let names = ["flatness", "shifts", "dilatation", "inversion", "egoroff_symmetry", "squared_hessian"];
    Ok(names.iter().zip(worst).map(|(n, v)| Measurement::below(n, v, tol.residual)).collect())
}

fn genus_reduction(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let count = if suite.full() { 20 } else { 5 };
    let mut rng = fx::rng(400);
    let mut worst = 0.0f64;
    for k in 0..count {
        let cov = crate::covering::random_covering(&mut rng, 2 + k % 3);
        let g0 = c(rng.gen_range(2.0..3.0), rng.gen_range(-3.0..3.0));
        worst = worst.max(genus_formalism_consistency(cov.branch(), g0)?);
    }
    Ok(vec![Measurement::below("coefficients", worst, tol.genus_reduction)])
}

fn mat_norm(a: &nalgebra::DMatrix<C>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn isomonodromy(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let frames: &[Frame] = if suite.full() { &[Frame::Base, Frame::Infinity] } else { &[Frame::Base] };
    let covers = [fx::two_sheet(), fx::covering(9, 3)];
    let mut w = [0.0f64; 6];
    for &frame in frames {
        for (k, cov) in covers.iter().enumerate() {
            let pb = fx::pullback(cov, 13 + k as u64, frame)?;
            let l = cov.lambdas().to_vec();
            let end = pb.flow_to(&fx::nudged(&l, 0.1))?;
            let cons = end.conservation(&pb);
            w[0] = w[0].max(cons.residue_sum);
            w[1] = w[1].max(cons.casimir_drift);

            let (s0, s1) = (pb.schlesinger(), end.schlesinger());
            for j in 0..s0.z.len() {
                let before = pb.monodromy(&loop_around(&s0, j, 0.3, 64))?;
                let after = end.monodromy(&loop_around(&s1, j, 0.3, 64))?;
                w[2] = w[2].max(mat_norm(&(before - after)));
            }

            let rep = pb.verify_hierarchy()?;
            w[3] = w[3].max(rep.zero_curvature);
            w[4] = w[4].max(rep.hierarchy);

            let path = ModuliPath::through(&l, &[fx::nudged(&l, 0.1), fx::nudged(&l, -0.05)])?;
            w[5] = w[5].max(pb.tau_relation_check(&path, 16)?.residual);
        }
    }
    let (commuting, drift) = commuting_residues()?;
    Ok(vec![
        Measurement::below("residue_sum", w[0], tol.conservation),
        Measurement::below("casimirs", w[1], tol.conservation),
        Measurement::below("monodromy", w[2], tol.residual),
        Measurement::below("zero_curvature", w[3], tol.residual),
        Measurement::below("hierarchy", w[4], tol.residual),
        Measurement::below("tau_relation", w[5], tol.residual),
        Measurement::below("commuting_tau", commuting, tol.commuting_tau),
        Measurement::below("commuting_drift", drift, tol.commuting_tau),
    ])
}

/// For simultaneously diagonal residues `τ = Π_{j<k} (z_j - z_k)^{tr A_j A_k}`
/// and the residues do not move under pullback flows.
fn commuting_residues() -> Result<(f64, f64)> {
    let a = vec![fx::diagonal(&[0.2, -0.3]), fx::diagonal(&[-0.1, 0.4]), fx::diagonal(&[-0.1, -0.1])];
    let z = vec![c(0.3, 0.1), c(-0.5, 0.8), c(1.1, -0.6)];
    let st = SchlesingerState::new(z.clone(), a.clone(), c(1.0, 1.0), Frame::Base)?;
    let ln_tau = |z: &[C]| {
        let mut s = C::new(0.0, 0.0);
        for j in 0..z.len() {
            for k in j + 1..z.len() {
                s += (&a[j] * &a[k]).trace() * (z[j] - z[k]).ln();
            }
        }
        s
    };
    let grad = jm_tau_grad(&st);
    let mut worst = 0.0f64;
    for j in 0..z.len() {
        let d = fd::derivative(
            |s| {
                let mut zs = z.clone();
                zs[j] += s;
                Ok(vec![ln_tau(&zs)])
            },
            1e-3,
        )?;
        worst = worst.max((d[0] - grad[j]).norm());
    }

    let (anchors, g0) = fx::anchors();
    let cov = fx::two_sheet();
    let pb = Pullback::new(&cov, &anchors, g0, a.clone(), Frame::Base)?;
    let end = pb.flow_to(&fx::nudged(cov.lambdas(), 0.2))?;
    let drift = end.residues.iter().zip(&a).map(|(x, y)| mat_norm(&(x - y))).fold(0.0, f64::max);
    Ok((worst, drift))
}

fn hydro(suite: Suite, tol: &Tolerances) -> Result<Vec<Measurement>> {
    let cases: &[(u64, usize)] = if suite.full() { &[(3, 2), (4, 3), (5, 3)] } else { &[(3, 2), (4, 3)] };
    let mut tsarev = 0.0f64;
    for &(seed, degree) in cases {
        let rep = verify_tsarev(&HydroField::new(&fx::hydro_config(seed, degree))?)?;
        tsarev = tsarev.max(rep.speeds).max(rep.phis);
    }
    let opts = NewtonOptions::default();
    let xs = axis(-4e-4, 4e-4, 5);

    let field = HydroField::new(&fx::manufactured(8, 2, false)?)?;
    let grid = evolve(&field, &xs, &xs, &opts)?;
    let hds = verify_hds(&grid, &xs, &xs)?;

    let field = HydroField::new(&fx::manufactured(9, 2, true)?)?;
    let grid = evolve(&field, &xs, &xs, &opts)?;
    let unit = verify_hds(&grid, &xs, &xs)?;

    // the manufactured point itself is recovered from a perturbed seed
    let exact = field.lambdas().to_vec();
    let seed: Vec<C> = exact.iter().enumerate().map(|(i, l)| l + C::from_polar(0.02, i as f64)).collect();
    let sol = hodograph_solve(&field.flow_to(&seed)?, c(0.0, 0.0), c(0.0, 0.0), &opts)?;
    let recovered = max_diff(sol.lambdas(), &exact);

    Ok(vec![
        Measurement::below("tsarev", tsarev, tol.residual),
        Measurement::below("hds_grid", hds.residual, tol.residual),
        Measurement::below("unit_speed_symmetry", unit.symmetric.max(unit.residual), tol.residual),
        Measurement::below("manufactured_point", recovered, tol.hodograph),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_criterion_passes_and_formats() {
        let r = run_criterion(1, Suite::Quick, &Tolerances::default());
        assert!(r.passed, "{}", r.line());
        assert!(r.line().starts_with("PASS  1 closed_form_two_sheets"));
    }

    #[test]
    fn exact_measurement_needs_zero() {
        assert!(Measurement::exact("m", 0).passed);
        assert!(!Measurement::exact("m", 1).passed);
        assert!(!Measurement::below("v", f64::NAN, 1.0).passed);
    }
}
