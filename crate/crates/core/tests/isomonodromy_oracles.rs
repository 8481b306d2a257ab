mod common;

use common::c;
use hurwitz::covering::random_covering;
use hurwitz::deformation::{unit, ModuliPath};
use hurwitz::isomonodromy::{
    jm_tau_grad, loop_around, random_residues, value_at_base, Frame, Pullback, SchlesingerState,
};
use hurwitz::rank1::{Measure, ScalarSolution};
use hurwitz::{RationalCovering, C};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mat_norm(a: &DMatrix<C>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn two_sheet() -> RationalCovering {
    RationalCovering::new(vec![c(2.0, 0.0)], vec![c(1.0, 0.0)]).unwrap()
}

fn anchors() -> (Vec<C>, C) {
    (vec![c(0.4, 1.8), c(-1.6, -0.5), c(2.2, -1.7)], c(-0.9, 2.1))
}

fn random_pullback(cov: &RationalCovering, seed: u64, frame: Frame) -> Pullback {
    let (z, g0) = anchors();
    let a = random_residues(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3);
    Pullback::new(cov, &z, g0, a, frame).unwrap()
}

fn nudged(l: &[C], k: f64) -> Vec<C> {
    l.iter().enumerate().map(|(i, x)| x + C::from_polar(k, 0.9 * i as f64 + 0.2)).collect()
}

#[test]
fn conservation_along_pullback_flows() {
    for frame in [Frame::Infinity, Frame::Base] {
        for cov in [two_sheet(), random_covering(&mut ChaCha8Rng::seed_from_u64(7), 3)] {
            let pb = random_pullback(&cov, 11, frame);
            let end = pb.flow_to(&nudged(cov.lambdas(), 0.15)).unwrap();
            let cons = end.conservation(&pb);
            assert!(cons.residue_sum < 1e-9, "{frame:?}: {cons:?}");
            assert!(cons.casimir_drift < 1e-9, "{frame:?}: {cons:?}");
            // residues actually moved
            let moved: f64 = end.residues.iter().zip(&pb.residues).map(|(a, b)| mat_norm(&(a - b))).sum();
            assert!(moved > 1e-4);
        }
    }
}

#[test]
fn frames_agree_up_to_conjugation() {
    let cov = random_covering(&mut ChaCha8Rng::seed_from_u64(8), 3);
    let inf = random_pullback(&cov, 12, Frame::Infinity);
    let g = value_at_base(&inf.schlesinger()).unwrap();
    let gi = g.clone().try_inverse().unwrap();
    let conj: Vec<_> = inf.residues.iter().map(|a| &gi * a * &g).collect();
    let base = Pullback { residues: conj, frame: Frame::Base, ..inf.clone() };
    let target = nudged(cov.lambdas(), 0.1);
    let inf_end = inf.flow_to(&target).unwrap();
    let base_end = base.flow_to(&target).unwrap();
    let g = value_at_base(&inf_end.schlesinger()).unwrap();
    let gi = g.clone().try_inverse().unwrap();
    for (a, b) in inf_end.residues.iter().zip(&base_end.residues) {
        assert!(mat_norm(&(&gi * a * &g - b)) < 1e-8);
    }
}

#[test]
fn hierarchy_residuals_two_and_three_sheets() {
    for frame in [Frame::Infinity, Frame::Base] {
        for cov in [two_sheet(), random_covering(&mut ChaCha8Rng::seed_from_u64(9), 3)] {
            let pb = random_pullback(&cov, 13, frame);
            let rep = pb.verify_hierarchy().unwrap();
            assert!(rep.zero_curvature < 1e-6, "{frame:?} {rep:?}");
            assert!(rep.hierarchy < 1e-6, "{frame:?} {rep:?}");
        }
    }
}

#[test]
fn vanishing_residues_give_exact_zeros() {
    let (z, g0) = anchors();
    let zero = vec![DMatrix::<C>::zeros(2, 2); 3];
    let pb = Pullback::new(&two_sheet(), &z, g0, zero, Frame::Base).unwrap();
    assert!(pb.hierarchy_jm().unwrap().iter().all(|j| mat_norm(j) == 0.0));
    let rep = pb.verify_hierarchy().unwrap();
    assert_eq!((rep.zero_curvature, rep.hierarchy), (0.0, 0.0));
    let path = ModuliPath::straight(pb.flow.lambdas(), &nudged(pb.flow.lambdas(), 0.1)).unwrap();
    let tau = pb.tau_relation_check(&path, 6).unwrap();
    assert_eq!(tau.residual, 0.0);
}

#[test]
fn commuting_residues_stay_put_and_zero_path_is_identity() {
    let (z, g0) = anchors();
    let d = |a: f64, b: f64| DMatrix::from_diagonal(&DVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]));
    let a = vec![d(0.2, -0.2), d(-0.1, 0.3), d(-0.1, -0.1)];
    let pb = Pullback::new(&two_sheet(), &z, g0, a.clone(), Frame::Base).unwrap();
    let end = pb.flow_to(&nudged(pb.flow.lambdas(), 0.2)).unwrap();
    for (x, y) in end.residues.iter().zip(&a) {
        assert!(mat_norm(&(x - y)) == 0.0);
    }
    let same = pb.flow_to(pb.flow.lambdas()).unwrap();
    assert_eq!(same, pb);
}

#[test]
fn commuting_jm_tau_matches_closed_form() {
    // τ_JM = Π_{j<k} (z_j - z_k)^{tr A_j A_k} for simultaneously diagonal residues
    let d = |a: f64, b: f64| DMatrix::from_diagonal(&DVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]));
    let z = vec![c(0.3, 0.1), c(-0.5, 0.8)];
    let a = vec![d(0.2, -0.3), d(-0.2, 0.3)];
    let st = SchlesingerState::new(z.clone(), a.clone(), c(1.0, 1.0), Frame::Base).unwrap();
    let tr = |x: &DMatrix<C>, y: &DMatrix<C>| (x * y).trace();
    let ln_tau = |z: &[C]| tr(&a[0], &a[1]) * (z[0] - z[1]).ln();
    let g = jm_tau_grad(&st);
    let h = 1e-5;
    for j in 0..2 {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[j] += h;
        zm[j] -= h;
        let fd = (ln_tau(&zp) - ln_tau(&zm)) / (2.0 * h);
        assert!((fd - g[j]).norm() < 1e-10, "{fd} vs {}", g[j]);
    }
}

#[test]
fn tau_relation_along_short_paths() {
    for frame in [Frame::Infinity, Frame::Base] {
        let cov = random_covering(&mut ChaCha8Rng::seed_from_u64(10), 3);
        let pb = random_pullback(&cov, 14, frame);
        let l = cov.lambdas().to_vec();
        let path = ModuliPath::through(&l, &[nudged(&l, 0.1), nudged(&l, -0.05)]).unwrap();
        let rep = pb.tau_relation_check(&path, 16).unwrap();
        assert!(rep.residual < 1e-6, "{frame:?} {rep:?}");
        assert!(rep.lhs.norm() > 1e-4);
    }
}

#[test]
fn monodromy_is_invariant_along_pullback_flows() {
    for frame in [Frame::Infinity, Frame::Base] {
        let cov = random_covering(&mut ChaCha8Rng::seed_from_u64(15), 3);
        let pb = random_pullback(&cov, 16, frame);
        let end = pb.flow_to(&nudged(cov.lambdas(), 0.1)).unwrap();
        let (s0, s1) = (pb.schlesinger(), end.schlesinger());
        for j in 0..3 {
            let before = pb.monodromy(&loop_around(&s0, j, 0.3, 64)).unwrap();
            let after = end.monodromy(&loop_around(&s1, j, 0.3, 64)).unwrap();
            let drift = mat_norm(&(&before - &after));
            assert!(drift < 1e-6, "{frame:?} pole {j}: {drift:e}");
            assert!(mat_norm(&(&before - DMatrix::identity(2, 2))) > 1e-3);
        }
    }
}

#[test]
fn scalar_reduction_matches_segment_solution() {
    // r = 1: ln G = Σ a_j ln(γ₀ - z_j) is, up to a constant, the Cauchy
    // integral of weights a_j along segments from a common point c to z_j
    let cov = random_covering(&mut ChaCha8Rng::seed_from_u64(17), 3);
    let start = c(2.4, 2.2);
    let lc = cov.eval(start).unwrap();
    let ends = [lc + c(-0.9, 0.3), lc + c(0.2, -0.8), lc + c(0.7, 0.6)];
    let weights = [c(0.3, 0.1), c(-0.5, 0.2), c(0.2, -0.3)];
    let mut z = Vec::new();
    let mut measure: Option<Measure> = None;
    for (e, w) in ends.iter().zip(&weights) {
        let seg = Measure::segment(&cov, start, *e, 40, *w).unwrap();
        z.push(cov.continue_fiber(lc, &[start], *e).unwrap()[0]);
        measure = Some(match measure {
            None => seg,
            Some(m) => m.join(seg),
        });
    }
    let g0 = c(-2.3, -1.9);
    let sol = ScalarSolution::new(&cov, measure.unwrap(), g0).unwrap();
    let a: Vec<DMatrix<C>> = weights.iter().map(|w| DMatrix::from_element(1, 1, *w)).collect();
    let pb = Pullback::new(&cov, &z, g0, a, Frame::Infinity).unwrap();
    let j = pb.hierarchy_jm().unwrap();
    let f = sol.grad_f().unwrap();
    for (jm, fm) in j.iter().zip(&f) {
        assert!((jm[(0, 0)] - fm).norm() < 1e-6 * fm.norm().max(1.0), "{} vs {fm}", jm[(0, 0)]);
    }
    // J_m obeys the scalar system through finite differences over pullback flows
    let b = pb.branch().clone();
    let mm = b.len();
    for m in 0..mm {
        for n in m + 1..mm {
            let d = pb.derivative_along(&unit(n, mm), |p| Ok(vec![p.hierarchy_jm()?[m][(0, 0)]])).unwrap();
            let (amn, anm) = hurwitz::rank1::pde_coefficients(&b, g0, m, n);
            let q = b.gammas[m] - b.gammas[n];
            let t = [q * q * d[0], -amn * j[m][(0, 0)], -anm * j[n][(0, 0)]];
            let rel = (t[0] + t[1] + t[2]).norm() / t.iter().map(|x| x.norm()).sum::<f64>();
            assert!(rel < 1e-6, "pair {m},{n}: {rel:e}");
        }
    }
}

#[test]
fn anchors_on_branch_points_are_rejected() {
    let cov = two_sheet();
    let a = vec![DMatrix::from_element(1, 1, c(0.1, 0.0)), DMatrix::from_element(1, 1, c(-0.1, 0.0))];
    let err = Pullback::new(&cov, &[cov.gammas()[0], c(5.0, 1.0)], c(-1.0, 1.0), a, Frame::Base);
    assert!(matches!(err, Err(hurwitz::Error::AnchorAtBranchPoint(0))));
}
