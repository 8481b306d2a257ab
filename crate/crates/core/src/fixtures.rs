//! Deterministic sample data shared by the verification suite and the CLI.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covering::{random_covering, RationalCovering};
use crate::hydro::{manufacture, HydroConfig};
use crate::isomonodromy::{random_residues, Frame, Pullback};
use crate::rank1::{Contour, Density, Measure, ScalarSolution};
use crate::{Result, C};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The two-sheet covering `γ + 1/(γ - 2)` with branch points `0` and `4`.
pub fn two_sheet() -> RationalCovering {
    RationalCovering::new(vec![C::new(2.0, 0.0)], vec![C::new(1.0, 0.0)]).expect("generic")
}

pub fn covering(seed: u64, degree: usize) -> RationalCovering {
    random_covering(&mut rng(seed), degree)
}

/// Circle around the origin keeping `margin` from critical points and poles.
pub fn pick_contour(cov: &RationalCovering, nodes: usize, margin: f64) -> Contour {
    let mut r = 1.0;
    loop {
        let clear = cov
            .gammas()
            .iter()
            .chain(cov.poles())
            .map(|z| (z.norm() - r).abs())
            .fold(f64::INFINITY, f64::min);
        if clear >= margin {
            return Contour::circle(C::new(0.0, 0.0), r, nodes).expect("positive radius");
        }
        r += 0.1;
    }
}

/// A point at least `margin` from critical points, poles and the contour.
pub fn pick_point<R: Rng>(rng: &mut R, cov: &RationalCovering, contour: &Contour, margin: f64) -> C {
    loop {
        let z = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let ok_crit = cov.gammas().iter().all(|g| (g - z).norm() > margin);
        let ok_pole = cov.poles().iter().all(|p| (p - z).norm() > margin);
        let ok_contour = ((z - contour.center).norm() - contour.radius).abs() > margin;
        if ok_crit && ok_pole && ok_contour {
            return z;
        }
    }
}

/// Fourier density with modes `-deg..=deg` and unit-scale coefficients.
pub fn random_density<R: Rng>(rng: &mut R, deg: usize) -> Density {
    Density::fourier(
        (0..2 * deg + 1)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
    .expect("odd length")
}

/// Contour solution on a random covering with a random density and base point.
pub fn scalar_solution(seed: u64, degree: usize, density_degree: usize) -> Result<ScalarSolution> {
    let mut rng = rng(seed);
    let cov = random_covering(&mut rng, degree);
    let contour = pick_contour(&cov, 512, 0.5);
    let h = random_density(&mut rng, density_degree);
    let g0 = pick_point(&mut rng, &cov, &contour, 0.5);
    ScalarSolution::new(&cov, Measure::on_contour(&cov, &contour, &h)?, g0)
}

/// Three poles and a base point clear of the small random coverings.
pub fn anchors() -> (Vec<C>, C) {
    (vec![C::new(0.4, 1.8), C::new(-1.6, -0.5), C::new(2.2, -1.7)], C::new(-0.9, 2.1))
}

pub fn pullback(cov: &RationalCovering, seed: u64, frame: Frame) -> Result<Pullback> {
    let (z, g0) = anchors();
    let a = random_residues(&mut rng(seed), 2, 3);
    Pullback::new(cov, &z, g0, a, frame)
}

/// Branch points moved by `k` in a different direction each.
pub fn nudged(l: &[C], k: f64) -> Vec<C> {
    l.iter().enumerate().map(|(i, x)| x + C::from_polar(k, 0.9 * i as f64 + 0.2)).collect()
}

pub fn diagonal(entries: &[f64]) -> DMatrix<C> {
    DMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            C::new(entries[i], 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// Random densities of low degree on a contour around a random covering.
pub fn hydro_config(seed: u64, degree: usize) -> HydroConfig {
    let mut rng = rng(seed);
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

/// Configuration whose current branch points solve the hodograph system at
/// `(0, 0)`. With `unit_speed` the numerator density equals the denominator.
pub fn manufactured(seed: u64, degree: usize, unit_speed: bool) -> Result<HydroConfig> {
    let cfg = hydro_config(seed, degree);
    let h2 = random_density(&mut rng(seed ^ 0xabc), 4 * degree);
    let h1 = if unit_speed { cfg.h.clone() } else { cfg.h1 };
    let zero = C::new(0.0, 0.0);
    manufacture(cfg.covering, cfg.contour, cfg.h, h1, h2, 2 * degree - 2, zero, zero)
}
