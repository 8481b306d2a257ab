//! Shared oracles for integration tests.
#![allow(dead_code, unused_imports)]

use hurwitz::C;

/// Adaptive Gauss-Kronrod (7/15) quadrature of a complex function on `[a, b]`.
pub fn adaptive_quad<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, tol: f64) -> C {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    fn rule<F: Fn(f64) -> C>(f: &F, a: f64, b: f64) -> (C, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = fc * WK[7];
        let mut g = fc * WG[3];
        for i in 0..7 {
            let x = h * XK[i];
            let s = f(c - x) + f(c + x);
            k += s * WK[i];
            if i % 2 == 1 {
                g += s * WG[i / 2];
            }
        }
        (k * h, ((k - g) * h).norm())
    }
    let mut stack = vec![(a, b, 0u32)];
    let mut total = C::new(0.0, 0.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = rule(f, lo, hi);
        if err <= tol * (hi - lo) / (b - a) || depth > 40 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub use hurwitz::fixtures::{pick_contour, pick_point, random_density};

/// Contour solution on a random covering with a random density and base point.
pub fn random_solution(seed: u64, degree: usize, density_degree: usize) -> hurwitz::rank1::ScalarSolution {
    hurwitz::fixtures::scalar_solution(seed, degree, density_degree).unwrap()
}
