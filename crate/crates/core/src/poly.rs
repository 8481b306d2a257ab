//! Dense complex polynomials and their roots.
//!
//! Roots come from the eigenvalues of the companion matrix of the monic
//! polynomial. Callers that know a better-conditioned form of the same
//! function (the rational map itself, say) polish with Newton on that form.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

/// Coefficients in ascending order: `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == C::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn constant(c: C) -> Self {
        Poly::new(vec![c])
    }

    /// `x - root`
    pub fn linear(root: C) -> Self {
        Poly::new(vec![-root, C::new(1.0, 0.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(C::new(1.0, 0.0)), |acc, r| acc.mul(&Poly::linear(*r)))
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: C) -> C {
        self.coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(C::new(0.0, 0.0));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: C) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// All roots, counted with multiplicity, unordered.
    pub fn roots(&self) -> Vec<C> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[n];
        if n == 1 {
            return vec![-self.coeffs[0] / lead];
        }
        let mut companion = DMatrix::<C>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = C::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        // complex Schur form is upper triangular; eigenvalues sit on the diagonal
        let (_, t) = nalgebra::linalg::Schur::new(companion).unpack();
        (0..n).map(|i| t[(i, i)]).collect()
    }
}

/// Newton polish of a root of `f` given value and derivative closures.
/// Stops early when the correction stops shrinking.
pub fn newton_polish<F>(mut x: C, iterations: usize, f_df: F) -> C
where
    F: Fn(C) -> (C, C),
{
    let mut last = f64::INFINITY;
    for _ in 0..iterations {
        let (f, df) = f_df(x);
        if df.norm() == 0.0 || !df.is_finite() || !f.is_finite() {
            break;
        }
        let dx = f / df;
        if !dx.is_finite() || dx.norm() > last {
            break;
        }
        last = dx.norm();
        x -= dx;
        if dx.norm() <= 1e-17 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn roots_of_unity() {
        let p = Poly::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let mut roots = p.roots();
        roots.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        let expected = [
            C::from_polar(1.0, -2.0 * std::f64::consts::PI / 3.0),
            c(1.0, 0.0),
            C::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0),
        ];
        for (r, e) in roots.iter().zip(expected.iter()) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn from_roots_round_trip() {
        let rs = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.2, 0.2)];
        let p = Poly::from_roots(&rs);
        assert_eq!(p.degree(), 4);
        for r in rs {
            let found = p
                .roots()
                .into_iter()
                .map(|x| (x - r).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(found < 1e-10);
        }
    }

    #[test]
    fn derivative_and_arithmetic() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(p.derivative().coeffs(), &[c(2.0, 0.0), c(6.0, 0.0)]);
        let q = p.mul(&Poly::linear(c(1.0, 0.0)));
        assert!((q.eval(c(1.0, 0.0))).norm() < 1e-15);
        let s = p.add(&p.scale(c(-1.0, 0.0)));
        assert_eq!(s.degree(), 0);
    }

    #[test]
    fn newton_polish_converges() {
        let x = newton_polish(c(1.5, 0.0), 20, |x| (x * x - 2.0, 2.0 * x));
        assert!((x.re - 2f64.sqrt()).abs() < 1e-15);
    }
}
