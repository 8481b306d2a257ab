mod common;

use common::{adaptive_quad, c, pick_contour, pick_point, random_density, random_solution};
use hurwitz::covering::random_covering;
use hurwitz::deformation::{unit, ModuliPath};
use hurwitz::rank1::{
    euler_darboux_check, plemelj_jump, two_sheet_covering, Contour, Density, Measure, NuPoint,
    ScalarSolution,
};
use hurwitz::{RationalCovering, C};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn two_sheet() -> RationalCovering {
    RationalCovering::new(vec![c(2.0, 0.0)], vec![c(1.0, 0.0)]).unwrap()
}

#[test]
fn cauchy_integral_matches_adaptive_quadrature() {
    let cov = two_sheet();
    let contour = Contour::circle(c(2.0, 0.0), 5.0, 512).unwrap();
    let h = Density::fourier(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
    let g0 = c(0.5, 0.5);
    let sol = ScalarSolution::new(&cov, Measure::on_contour(&cov, &contour, &h).unwrap(), g0).unwrap();
    let oracle = adaptive_quad(
        &|t: f64| t.cos() * contour.tangent(t) / (contour.point(t) - g0),
        0.0,
        TAU,
        1e-13,
    );
    assert!((sol.f().unwrap() - oracle).norm() < 1e-10, "{} vs {oracle}", sol.f().unwrap());
}

#[test]
fn gradient_matches_finite_differences_over_flows() {
    for seed in 0..3 {
        let sol = random_solution(100 + seed, 3, 2);
        let grad = sol.grad_f().unwrap();
        let m = grad.len();
        for k in 0..m {
            let d = sol.derivative_along(&unit(k, m), |s| Ok(vec![s.f().unwrap()])).unwrap();
            let rel = (d[0] - grad[k]).norm() / grad[k].norm().max(1e-300);
            assert!(rel < 1e-6, "seed {seed} m {k}: {} vs {}", d[0], grad[k]);
        }
    }
}

#[test]
fn elementary_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cov = random_covering(&mut rng, 3);
    let contour = pick_contour(&cov, 64, 0.5);
    let q = pick_point(&mut rng, &cov, &contour, 0.4);
    let g0 = pick_point(&mut rng, &cov, &contour, 0.4);
    let sol = ScalarSolution::new(&cov, Measure::point(q, c(1.0, 0.0)), g0).unwrap();
    let grad = sol.grad_f().unwrap();
    for k in 0..grad.len() {
        let d = sol.derivative_along(&unit(k, grad.len()), |s| Ok(vec![s.f()?])).unwrap();
        assert!((d[0] - grad[k]).norm() < 1e-6 * grad[k].norm().max(1.0));
    }
}

#[test]
fn two_sheet_gradient_matches_lambda_plane_integral() {
    // f = ∮ h dλ / sqrt((λ-λ₁)(λ-λ₂)) with the base point at the pole
    let (l1, l2) = (c(0.3, 0.8), c(0.3, -0.8));
    let cov = two_sheet_covering(l1, l2).unwrap();
    let mu = cov.poles()[0];
    let contour = Contour::circle(mu, 1.5, 512).unwrap();
    let h = Density::fourier(vec![c(0.3, -0.2), c(1.0, 0.0), c(0.1, 0.4)]).unwrap();
    let sol =
        ScalarSolution::new(&cov, Measure::on_contour(&cov, &contour, &h).unwrap(), mu).unwrap();
    let grad = sol.grad_f().unwrap();
    let lam = cov.lambdas().to_vec();

    // continuous branch of the square root along the λ-image of the contour
    let lambda_of = |t: f64| cov.eval_unchecked(contour.point(t));
    let dlambda = |t: f64| cov.derivative(contour.point(t)) * contour.tangent(t);
    let root = |t: f64| {
        let g = contour.point(t);
        // on the γ-circle the first-sheet root equals γ - μ - r/(γ - μ)
        let x = g - mu;
        x - cov.residues()[0] / x
    };
    // check the branch choice against (λ-λ₁)(λ-λ₂)
    for t in [0.0, 1.0, 2.5, 4.0] {
        let l = lambda_of(t);
        let sq = root(t);
        assert!((sq * sq - (l - lam[0]) * (l - lam[1])).norm() < 1e-12);
    }
    let f_oracle = adaptive_quad(&|t| h.eval(t).unwrap() * dlambda(t) / root(t), 0.0, TAU, 1e-13);
    assert!((sol.f().unwrap() - f_oracle).norm() < 1e-10);
    for m in 0..2 {
        let oracle = adaptive_quad(
            &|t| h.eval(t).unwrap() * dlambda(t) / (root(t) * (lambda_of(t) - lam[m])) * 0.5,
            0.0,
            TAU,
            1e-13,
        );
        assert!((grad[m] - oracle).norm() < 1e-9 * oracle.norm().max(1.0), "{} vs {oracle}", grad[m]);
    }
}

#[test]
fn generalized_euler_darboux_residuals() {
    for seed in 0..3 {
        let sol = random_solution(200 + seed, 3, 3);
        for r in sol.pde_residuals().unwrap() {
            assert!(r.relative < 1e-6, "seed {seed}: {r:?}");
        }
    }
}

#[test]
fn scalar_linear_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cov = random_covering(&mut rng, 3);
    let contour = pick_contour(&cov, 512, 0.5);
    let h = random_density(&mut rng, 2);
    let g0 = pick_point(&mut rng, &cov, &contour, 0.5);
    let p = pick_point(&mut rng, &cov, &contour, 0.5);
    let sol = ScalarSolution::new(&cov, Measure::on_contour(&cov, &contour, &h).unwrap(), g0)
        .unwrap()
        .with_probes(&[p]);
    assert!(sol.linear_system_residual(0).unwrap() < 1e-6);
}

#[test]
fn tau_hessian_and_closedness() {
    let sol = random_solution(300, 3, 2);
    let h = sol.tau_hessian().unwrap();
    let m = h.len();
    let cols: Vec<Vec<C>> =
        (0..m).map(|n| sol.derivative_along(&unit(n, m), |s| s.tau_grad()).unwrap()).collect();
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let fd = cols[j][i];
            assert!((fd - cols[i][j]).norm() < 1e-6 * fd.norm().max(1.0), "symmetry {i}{j}");
            assert!((fd - h[i][j]).norm() < 1e-6 * fd.norm().max(1.0), "{i}{j}: {fd} vs {}", h[i][j]);
        }
    }
    let lam = sol.state.lambdas().to_vec();
    let corner = |a: C, b: C| {
        let mut v = lam.clone();
        v[0] += a;
        v[1] += b;
        v
    };
    let d = 0.05;
    let path = ModuliPath::closed(vec![
        corner(c(0.0, 0.0), c(0.0, 0.0)),
        corner(c(d, 0.0), c(0.0, 0.0)),
        corner(c(d, 0.0), c(0.0, d)),
        corner(c(0.0, 0.0), c(0.0, d)),
    ])
    .unwrap();
    let (loop_integral, back) = sol.tau_integrate(&path, 8).unwrap();
    assert!(loop_integral.norm() < 1e-6, "{loop_integral}");
    assert!((back.f().unwrap() - sol.f().unwrap()).norm() < 1e-8);
}

#[test]
fn plemelj_jump_across_contour() {
    let cov = two_sheet();
    let contour = Contour::circle(c(2.0, 2.5), 1.0, 4096).unwrap();
    let h = Density::fourier(vec![c(0.2, 0.1), c(1.0, 0.0), c(0.0, -0.5)]).unwrap();
    let spacing = TAU / 4096.0;
    for node in [0, 1000, 2500] {
        let (got, want) = plemelj_jump(&cov, &contour, &h, node, 10.0 * spacing).unwrap();
        assert!((got - want).norm() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn classic_euler_darboux() {
    let h = Density::fourier(vec![c(0.0, 0.3), c(0.5, 0.0), c(1.0, 0.0), c(0.2, 0.2), c(0.0, 0.1)])
        .unwrap();
    let rep = euler_darboux_check(c(0.4, 1.0), c(0.4, -1.0), &h, 3.0, 512).unwrap();
    assert!(rep.relative < 1e-6, "{rep:?}");
}

#[test]
fn psi_vanishes_at_first_sheet_infinity() {
    let sol = random_solution(400, 2, 1);
    assert_eq!(sol.psi(NuPoint::Infinity).unwrap(), C::new(0.0, 0.0));
    let far = sol.psi(NuPoint::Finite(c(1e8, 0.0))).unwrap();
    assert!(far.norm() < 1e-6);
}
