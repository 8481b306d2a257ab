mod common;

use common::{adaptive_quad, c, pick_contour, random_density};
use hurwitz::covering::random_covering;
use hurwitz::hydro::{
    axis, evolve, hodograph_solve, manufacture, verify_hds, verify_tsarev, HydroConfig, HydroField,
    NewtonOptions, Role,
};
use hurwitz::{RationalCovering, C};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn random_config(seed: u64, degree: usize) -> HydroConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let covering = random_covering(&mut rng, degree);
    let contour = pick_contour(&covering, 512, 0.5);
    HydroConfig {
        covering,
        contour,
        h: random_density(&mut rng, 1),
        h1: random_density(&mut rng, 1),
        h2: random_density(&mut rng, 2),
    }
}

/// The base `h₂` carries more Fourier modes than there are branch points, so
/// that the corrected density keeps moments that vary with the branch points.
fn manufactured(seed: u64, degree: usize) -> HydroConfig {
    let cfg = random_config(seed, degree);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let h2 = random_density(&mut rng, 4 * degree);
    manufacture(cfg.covering, cfg.contour, cfg.h, cfg.h1, h2, 2 * degree - 2, c(0.0, 0.0), c(0.0, 0.0)).unwrap()
}

fn oracle_moment(cov: &RationalCovering, cfg: &HydroConfig, role: Role, m: usize) -> C {
    let d = match role {
        Role::H => &cfg.h,
        Role::H1 => &cfg.h1,
        Role::H2 => &cfg.h2,
    };
    let (g, k) = (cov.gammas()[m], cov.kappas()[m]);
    k * adaptive_quad(
        &|t: f64| {
            let q = cfg.contour.point(t) - g;
            d.eval(t).unwrap() * cfg.contour.tangent(t) / (q * q)
        },
        0.0,
        TAU,
        1e-13,
    )
}

#[test]
fn moments_and_speeds_match_adaptive_quadrature() {
    let cfg = random_config(1, 2);
    let f = HydroField::new(&cfg).unwrap();
    let v = f.speeds().unwrap();
    for role in [Role::H, Role::H1, Role::H2] {
        let mom = f.moments(role).unwrap();
        for m in 0..mom.len() {
            let o = oracle_moment(&cfg.covering, &cfg, role, m);
            assert!((mom[m] - o).norm() < 1e-10, "{role:?} {m}: {} vs {o}", mom[m]);
        }
    }
    for m in 0..v.len() {
        let o = oracle_moment(&cfg.covering, &cfg, Role::H1, m) / oracle_moment(&cfg.covering, &cfg, Role::H, m);
        assert!((v[m] - o).norm() < 1e-10 * o.norm().max(1.0));
    }
}

#[test]
fn scaled_density_gives_constant_speed() {
    let mut cfg = random_config(2, 2);
    let hurwitz::rank1::Density::Fourier(coeffs) = cfg.h.clone() else { unreachable!() };
    cfg.h1 = hurwitz::rank1::Density::fourier(coeffs.iter().map(|z| z * 2.5).collect()).unwrap();
    let v = HydroField::new(&cfg).unwrap().speeds().unwrap();
    assert!(v.iter().all(|v| (v - 2.5).norm() < 1e-12));
}

#[test]
fn tsarev_relation_two_and_three_sheets() {
    for (seed, degree) in [(3, 2), (4, 3), (5, 3)] {
        let f = HydroField::new(&random_config(seed, degree)).unwrap();
        let rep = verify_tsarev(&f).unwrap();
        assert!(rep.speeds < 1e-6 && rep.phis < 1e-6, "seed {seed}: {rep:?}");
    }
}

#[test]
fn manufactured_solution_is_recovered() {
    for degree in [2, 3] {
        let cfg = manufactured(6, degree);
        let field = HydroField::new(&cfg).unwrap();
        let exact = field.lambdas().to_vec();
        assert!(field.residual(c(0.0, 0.0), c(0.0, 0.0)).unwrap().iter().all(|z| z.norm() < 1e-11));
        let seed_l: Vec<C> = exact.iter().enumerate().map(|(i, l)| l + C::from_polar(0.02, i as f64)).collect();
        let seed = field.flow_to(&seed_l).unwrap();
        let sol = hodograph_solve(&seed, c(0.0, 0.0), c(0.0, 0.0), &NewtonOptions::default()).unwrap();
        assert!(sol.residual_norm() < 1e-10);
        let err = sol.lambdas().iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "degree {degree}: {err:e}");
        assert!(sol.history.len() >= 3);
    }
}

#[test]
fn nearby_solutions_satisfy_the_ratio_form() {
    let cfg = manufactured(7, 2);
    let field = HydroField::new(&cfg).unwrap();
    let sol = hodograph_solve(&field, c(0.01, 0.0), c(-0.02, 0.0), &NewtonOptions::default()).unwrap();
    assert!(sol.consistency().unwrap() < 1e-8);
    let moved = sol.lambdas().iter().zip(field.lambdas()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(moved > 1e-4);
}

#[test]
fn hydrodynamic_system_on_a_grid() {
    let cfg = manufactured(8, 2);
    let field = HydroField::new(&cfg).unwrap();
    let xs = axis(-4e-4, 4e-4, 5);
    let ts = axis(-4e-4, 4e-4, 5);
    let grid = evolve(&field, &xs, &ts, &NewtonOptions::default()).unwrap();
    let rep = verify_hds(&grid, &xs, &ts).unwrap();
    assert!(rep.residual < 1e-6, "{rep:?}");
    assert!(rep.symmetric > 1e-3, "speeds differ from one, so x and t derivatives differ");
}

#[test]
fn unit_speeds_make_solutions_depend_on_x_plus_t() {
    let base = random_config(9, 2);
    let h2 = random_density(&mut ChaCha8Rng::seed_from_u64(99), 5);
    let cfg = manufacture(base.covering, base.contour, base.h.clone(), base.h, h2, 2, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    let field = HydroField::new(&cfg).unwrap();
    let xs = axis(-4e-4, 4e-4, 5);
    let grid = evolve(&field, &xs, &xs, &NewtonOptions::default()).unwrap();
    let rep = verify_hds(&grid, &xs, &xs).unwrap();
    assert!(rep.symmetric < 1e-6 && rep.residual < 1e-6, "{rep:?}");
}

#[test]
fn far_seed_is_reported_not_silently_accepted() {
    let cfg = manufactured(10, 2);
    let field = HydroField::new(&cfg).unwrap();
    let opts = NewtonOptions::default();
    let out = hodograph_solve(&field, c(40.0, 0.0), c(-35.0, 0.0), &opts);
    match out {
        Err(e) => assert!(
            matches!(e.name(), "NewtonDivergence" | "GradientCatastrophe"),
            "unexpected {e:?}"
        ),
        Ok(sol) => {
            // any accepted answer must actually solve the system
            assert!(sol.residual_norm() < opts.tolerance);
            assert!(sol.field.residual(c(40.0, 0.0), c(-35.0, 0.0)).unwrap().iter().all(|z| z.norm() < 1e-9));
        }
    }
}
