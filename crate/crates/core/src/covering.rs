//! Genus-zero branched coverings `λ = R(γ) = γ + Σ r_k / (γ - μ_k)`.

use num_complex::Complex64 as C;
use rand::Rng;

use crate::error::{Error, Result};
use crate::poly::{newton_polish, Poly};
use crate::tolerances::{GENERICITY, POLE_GUARD};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Critical data of a covering: branch points `λ_m`, ramification points
/// `γ_m = ν(P_m)`, residues `α_m = 1/R''(γ_m)` and local scalings `κ_m`
/// with `κ_m² = 2 α_m`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BranchData {
    pub lambdas: Vec<C>,
    pub gammas: Vec<C>,
    pub alphas: Vec<C>,
    pub kappas: Vec<C>,
}

impl BranchData {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// `∂ν/∂λ` at a point of the covering in partial-fraction form,
    /// `1 + Σ α_n/(ν - γ_n)`.
    pub fn dnu_dlambda(&self, nu: C) -> C {
        self.gammas
            .iter()
            .zip(&self.alphas)
            .fold(ONE, |acc, (g, a)| acc + a / (nu - g))
    }

    /// `∂ν/∂λ_n = -α_n/(ν - γ_n)` for a point with fixed projection.
    pub fn dnu_dlm(&self, nu: C) -> Vec<C> {
        self.gammas
            .iter()
            .zip(&self.alphas)
            .map(|(g, a)| -a / (nu - g))
            .collect()
    }

    /// Index and distance of the nearest ramification point.
    pub fn nearest_critical(&self, nu: C) -> Option<(usize, f64)> {
        self.gammas
            .iter()
            .map(|g| (nu - g).norm())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Smallest pairwise distance between ramification points.
    pub fn min_gamma_separation(&self) -> f64 {
        min_pairwise(&self.gammas)
    }

    pub fn min_lambda_separation(&self) -> f64 {
        min_pairwise(&self.lambdas)
    }

    pub fn scale(&self) -> f64 {
        self.gammas
            .iter()
            .chain(&self.lambdas)
            .map(|z| z.norm())
            .fold(1.0, f64::max)
    }
}

pub(crate) fn min_pairwise(z: &[C]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            best = best.min((z[i] - z[j]).norm());
        }
    }
    best
}

fn lex_cmp(a: &C, b: &C, tol: f64) -> std::cmp::Ordering {
    if (a.re - b.re).abs() > tol {
        a.re.total_cmp(&b.re)
    } else {
        a.im.total_cmp(&b.im)
    }
}

/// Principal square root of `2α`, or the branch nearest `hint`.
pub fn kappa_branch(alpha: C, hint: Option<C>) -> C {
    // roundoff-level imaginary parts must not flip the principal branch
    let mut two = alpha * 2.0;
    if two.im.abs() <= 1e-14 * two.norm() {
        two.im = 0.0;
    }
    let k = two.sqrt();
    match hint {
        Some(h) if (h + k).norm() < (h - k).norm() => -k,
        _ => k,
    }
}

/// Margins reported with a covering, used to judge how generic it is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericityMargins {
    pub min_gamma_separation: f64,
    pub min_lambda_separation: f64,
    pub min_pole_distance: f64,
    pub min_second_derivative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalCovering {
    poles: Vec<C>,
    residues: Vec<C>,
    branch: BranchData,
    scale: f64,
}

impl RationalCovering {
    /// Build from poles and residues, computing all critical data.
    /// Critical points are ordered lexicographically by (re, im).
    pub fn new(poles: Vec<C>, residues: Vec<C>) -> Result<Self> {
        Self::build(poles, residues, None)
    }

    /// Build with critical points matched to `hint_gammas` (in order) and
    /// each `κ_m` on the branch nearest `hint_kappas[m]`.
    pub fn with_labels(
        poles: Vec<C>,
        residues: Vec<C>,
        hint_gammas: &[C],
        hint_kappas: &[C],
    ) -> Result<Self> {
        Self::build(poles, residues, Some((hint_gammas, hint_kappas)))
    }

    fn build(poles: Vec<C>, residues: Vec<C>, hints: Option<(&[C], &[C])>) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::InvalidCovering(format!(
                "{} poles but {} residues",
                poles.len(),
                residues.len()
            )));
        }
        if let Some(z) = poles.iter().chain(&residues).find(|z| !z.is_finite()) {
            return Err(Error::InvalidCovering(format!("non-finite datum {z}")));
        }
        let pole_scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let res_scale = residues.iter().map(|r| r.norm()).fold(1.0, f64::max);
        for (k, r) in residues.iter().enumerate() {
            if r.norm() <= GENERICITY * res_scale {
                return Err(Error::InvalidCovering(format!("residue {k} vanishes")));
            }
        }
        if min_pairwise(&poles) <= GENERICITY * pole_scale {
            return Err(Error::InvalidCovering("poles must be pairwise distinct".into()));
        }

        let mut cov = RationalCovering {
            poles,
            residues,
            branch: BranchData {
                lambdas: Vec::new(),
                gammas: Vec::new(),
                alphas: Vec::new(),
                kappas: Vec::new(),
            },
            scale: pole_scale,
        };
        let mut gammas: Vec<C> = cov
            .derivative_numerator()
            .roots()
            .into_iter()
            .map(|g| newton_polish(g, 3, |x| (cov.derivative(x), cov.second_derivative(x))))
            .collect();
        cov.scale = gammas.iter().map(|g| g.norm()).fold(pole_scale, f64::max);

        let scale = cov.scale;
        match hints {
            None => gammas.sort_by(|a, b| lex_cmp(a, b, 1e-9 * scale)),
            Some((hg, _)) => {
                if hg.len() != gammas.len() {
                    return Err(Error::InvalidCovering(format!(
                        "expected {} critical points, hints give {}",
                        gammas.len(),
                        hg.len()
                    )));
                }
                let mut pool = gammas.clone();
                gammas = hg
                    .iter()
                    .map(|h| {
                        let (i, _) = pool
                            .iter()
                            .map(|g| (g - h).norm())
                            .enumerate()
                            .min_by(|a, b| a.1.total_cmp(&b.1))
                            .expect("pool matches hint count");
                        pool.swap_remove(i)
                    })
                    .collect();
            }
        }

        let mut lambdas = Vec::with_capacity(gammas.len());
        let mut alphas = Vec::with_capacity(gammas.len());
        let mut kappas = Vec::with_capacity(gammas.len());
        for (m, g) in gammas.iter().enumerate() {
            let (_, dist) = cov.nearest_pole(*g);
            if dist <= GENERICITY * scale {
                return Err(Error::NonGenericCovering(format!(
                    "critical point {m} collides with a pole"
                )));
            }
            let second = cov.second_derivative(*g);
            if second.norm() * scale < GENERICITY {
                return Err(Error::DegenerateCritical { index: m, second: second.norm() });
            }
            let alpha = ONE / second;
            lambdas.push(cov.eval_unchecked(*g));
            kappas.push(kappa_branch(alpha, hints.map(|(_, hk)| hk[m])));
            alphas.push(alpha);
        }
        // α_m = κ_m²/2 holds exactly for the stored values
        let alphas: Vec<C> = kappas.iter().map(|k| k * k / 2.0).collect();
        cov.branch = BranchData { lambdas, gammas, alphas, kappas };

        let gsep = cov.branch.min_gamma_separation();
        if gsep <= GENERICITY * scale {
            return Err(Error::NonGenericCovering(format!(
                "critical points coincide (separation {gsep:e})"
            )));
        }
        let lscale = cov.branch.scale();
        let lsep = cov.branch.min_lambda_separation();
        if lsep <= GENERICITY * lscale {
            return Err(Error::NonGenericCovering(format!(
                "critical values coincide (separation {lsep:e})"
            )));
        }
        Ok(cov)
    }

    pub fn degree(&self) -> usize {
        self.poles.len() + 1
    }

    pub fn poles(&self) -> &[C] {
        &self.poles
    }

    pub fn residues(&self) -> &[C] {
        &self.residues
    }

    pub fn branch(&self) -> &BranchData {
        &self.branch
    }

    pub fn lambdas(&self) -> &[C] {
        &self.branch.lambdas
    }

    pub fn gammas(&self) -> &[C] {
        &self.branch.gammas
    }

    pub fn alphas(&self) -> &[C] {
        &self.branch.alphas
    }

    pub fn kappas(&self) -> &[C] {
        &self.branch.kappas
    }

    /// `max(1, |μ_k|, |γ_m|)`
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn margins(&self) -> GenericityMargins {
        GenericityMargins {
            min_gamma_separation: self.branch.min_gamma_separation(),
            min_lambda_separation: self.branch.min_lambda_separation(),
            min_pole_distance: self
                .branch
                .gammas
                .iter()
                .map(|g| self.nearest_pole(*g).1)
                .fold(f64::INFINITY, f64::min),
            min_second_derivative: self
                .branch
                .gammas
                .iter()
                .map(|g| self.second_derivative(*g).norm())
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn nearest_pole(&self, gamma: C) -> (usize, f64) {
        self.poles
            .iter()
            .map(|p| (gamma - p).norm())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY))
    }

    /// `R(γ)`, rejecting points at a pole.
    pub fn eval(&self, gamma: C) -> Result<C> {
        let (_, d) = self.nearest_pole(gamma);
        if d <= POLE_GUARD * self.scale.max(gamma.norm()) {
            return Err(Error::PoleHit { gamma: gamma.to_string(), distance: d });
        }
        Ok(self.eval_unchecked(gamma))
    }

    pub fn eval_unchecked(&self, gamma: C) -> C {
        self.poles
            .iter()
            .zip(&self.residues)
            .fold(gamma, |acc, (p, r)| acc + r / (gamma - p))
    }

    /// `R'(γ) = 1 - Σ r_k/(γ - μ_k)²`
    pub fn derivative(&self, gamma: C) -> C {
        self.poles.iter().zip(&self.residues).fold(ONE, |acc, (p, r)| {
            let d = gamma - p;
            acc - r / (d * d)
        })
    }

    /// `R''(γ) = 2 Σ r_k/(γ - μ_k)³`
    pub fn second_derivative(&self, gamma: C) -> C {
        self.poles.iter().zip(&self.residues).fold(ZERO, |acc, (p, r)| {
            let d = gamma - p;
            acc + r * 2.0 / (d * d * d)
        })
    }

    /// Numerator of `R'` after clearing denominators:
    /// `Π(γ - μ_k)² - Σ_k r_k Π_{j≠k}(γ - μ_j)²`, monic of degree `2N - 2`.
    pub fn derivative_numerator(&self) -> Poly {
        let sq: Vec<Poly> = self
            .poles
            .iter()
            .map(|p| {
                let l = Poly::linear(*p);
                l.mul(&l)
            })
            .collect();
        let all = sq.iter().fold(Poly::constant(ONE), |acc, q| acc.mul(q));
        self.residues.iter().enumerate().fold(all, |acc, (k, r)| {
            let others = sq
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .fold(Poly::constant(ONE), |a, (_, q)| a.mul(q));
            acc.add(&others.scale(-r))
        })
    }

    /// `(γ - λ) Π(γ - μ_k) + Σ_k r_k Π_{j≠k}(γ - μ_j)`, whose roots are the fiber.
    pub fn fiber_polynomial(&self, lambda: C) -> Poly {
        let lin: Vec<Poly> = self.poles.iter().map(|p| Poly::linear(*p)).collect();
        let all = lin.iter().fold(Poly::linear(lambda), |acc, q| acc.mul(q));
        self.residues.iter().enumerate().fold(all, |acc, (k, r)| {
            let others = lin
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .fold(Poly::constant(ONE), |a, (_, q)| a.mul(q));
            acc.add(&others.scale(*r))
        })
    }

    /// The `N` preimages of `λ`, unordered, counted with multiplicity.
    pub fn fiber(&self, lambda: C) -> Vec<C> {
        self.fiber_polynomial(lambda)
            .roots()
            .into_iter()
            .map(|g| self.polish_preimage(g, lambda))
            .collect()
    }

    /// Newton polish of `R(γ) = λ` starting from `g`.
    pub fn polish_preimage(&self, g: C, lambda: C) -> C {
        newton_polish(g, 3, |x| (self.eval_unchecked(x) - lambda, self.derivative(x)))
    }

    /// `(∂ν/∂λ, ∂ν/∂λ_n)` at the point `γ`; the first from `1/R'(γ)`.
    pub fn nu_derivatives(&self, gamma: C) -> Result<(C, Vec<C>)> {
        if let Some((index, distance)) = self.branch.nearest_critical(gamma) {
            if distance <= GENERICITY * self.scale.max(gamma.norm()) {
                return Err(Error::CriticalPointHit { index, distance });
            }
        }
        if !gamma.is_finite() {
            return Ok((ONE, vec![ZERO; self.branch.len()]));
        }
        let d = self.derivative(gamma);
        Ok((ONE / d, self.branch.dnu_dlm(gamma)))
    }

    /// `max |1/R'(γ) - 1 - Σ α_n/(γ - γ_n)|` over the samples.
    pub fn verify_partial_fraction(&self, samples: &[C]) -> f64 {
        samples
            .iter()
            .map(|g| (ONE / self.derivative(*g) - self.branch.dnu_dlambda(*g)).norm())
            .fold(0.0, f64::max)
    }

    /// Distinct roots tracked along the segment `from → to` in `λ`.
    pub fn continue_fiber(&self, from: C, roots: &[C], to: C) -> Result<Vec<C>> {
        let lscale = self.branch.scale().max(from.norm()).max(to.norm());
        for (index, l) in self.branch.lambdas.iter().enumerate() {
            let distance = segment_distance(*l, from, to);
            if distance <= GENERICITY * lscale {
                return Err(Error::PathThroughBranchPoint { index, distance });
            }
        }
        let mut cur = roots.to_vec();
        let mut t = 0.0f64;
        let mut dt = 1.0f64 / 16.0;
        while t < 1.0 {
            let step = dt.min(1.0 - t);
            let la = from + (to - from) * t;
            let lb = from + (to - from) * (t + step);
            match self.match_step(&cur, la, lb) {
                Some(next) => {
                    cur = next;
                    t += step;
                    dt = (step * 2.0).min(0.25);
                }
                None => {
                    dt = step / 2.0;
                    if dt < 1e-12 {
                        let (index, distance) = self
                            .branch
                            .lambdas
                            .iter()
                            .map(|l| (l - lb).norm())
                            .enumerate()
                            .min_by(|a, b| a.1.total_cmp(&b.1))
                            .unwrap_or((0, 0.0));
                        return Err(Error::PathThroughBranchPoint { index, distance });
                    }
                }
            }
        }
        Ok(cur)
    }

    fn match_step(&self, cur: &[C], la: C, lb: C) -> Option<Vec<C>> {
        let fresh = self.fiber(lb);
        let sep = min_pairwise(&fresh);
        let mut used = vec![false; fresh.len()];
        let mut out = Vec::with_capacity(cur.len());
        for g in cur {
            let predicted = g + (lb - la) / self.derivative(*g);
            let (i, d) = fresh
                .iter()
                .map(|f| (f - predicted).norm())
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))?;
            if used[i] || !(d < 0.25 * sep) {
                return None;
            }
            used[i] = true;
            out.push(fresh[i]);
        }
        Some(out)
    }

    /// Permutation of sheets after continuing the fiber once around the
    /// closed polyline `loop_points` (first point = base, implicitly closed).
    /// `perm[i] = j` means sheet `i` arrives at sheet `j`.
    pub fn loop_permutation(&self, loop_points: &[C]) -> Result<Vec<usize>> {
        let labeling = SheetLabeling::new(self, loop_points[0])?;
        let start = labeling.ordered_fiber.clone();
        let mut cur = start.clone();
        let mut from = loop_points[0];
        for p in loop_points.iter().skip(1).chain(std::iter::once(&loop_points[0])) {
            cur = self.continue_fiber(from, &cur, *p)?;
            from = *p;
        }
        Ok(cur
            .iter()
            .map(|g| {
                start
                    .iter()
                    .map(|s| (s - g).norm())
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(j, _)| j)
                    .unwrap_or(0)
            })
            .collect())
    }
}

fn segment_distance(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * ab.conj()).re / len2;
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

/// A fiber with sheets labelled: sheet 0 continues to the branch with
/// `ν ≈ λ` at infinity, sheet `k + 1` to the one ending at pole `μ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetLabeling {
    pub base_lambda: C,
    pub ordered_fiber: Vec<C>,
}

impl SheetLabeling {
    pub fn new(cov: &RationalCovering, base_lambda: C) -> Result<Self> {
        let far = 1e3 * cov.scale().max(cov.branch().scale()).max(base_lambda.norm());
        // pick the escape direction that stays farthest from branch points
        let (dir, _) = (0..16)
            .map(|i| {
                let d = C::from_polar(1.0, i as f64 * std::f64::consts::PI / 8.0 + 0.1);
                let far_pt = base_lambda + d * far;
                let clearance = cov
                    .lambdas()
                    .iter()
                    .map(|l| segment_distance(*l, base_lambda, far_pt))
                    .fold(f64::INFINITY, f64::min);
                (d, clearance)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty direction set");
        let lf = base_lambda + dir * far;
        let mut pool = cov.fiber(lf);
        let mut asymptotic = vec![lf];
        asymptotic.extend(
            cov.poles()
                .iter()
                .zip(cov.residues())
                .map(|(p, r)| p + r / (lf - p)),
        );
        let at_far: Vec<C> = asymptotic
            .iter()
            .map(|a| {
                let (i, _) = pool
                    .iter()
                    .map(|g| (g - a).norm())
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .expect("fiber has N points");
                pool.swap_remove(i)
            })
            .collect();
        let ordered_fiber = cov.continue_fiber(lf, &at_far, base_lambda)?;
        Ok(SheetLabeling { base_lambda, ordered_fiber })
    }

    /// Labelled fiber over `lambda`, continued along the straight segment
    /// from the base.
    pub fn fiber_at(&self, cov: &RationalCovering, lambda: C) -> Result<Vec<C>> {
        cov.continue_fiber(self.base_lambda, &self.ordered_fiber, lambda)
    }
}

/// Random generic covering of the given degree with data of unit scale.
///
/// Draws poles in `[-1.5, 1.5]²` and residues with modulus in `[0.3, 1]`,
/// rejecting draws whose critical data are closer than `0.15`.
pub fn random_covering<R: Rng>(rng: &mut R, degree: usize) -> RationalCovering {
    assert!(degree >= 1, "degree must be positive");
    loop {
        let poles: Vec<C> = (0..degree - 1)
            .map(|_| C::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect();
        let residues: Vec<C> = (0..degree - 1)
            .map(|_| C::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        if min_pairwise(&poles) < 0.3 {
            continue;
        }
        let Ok(cov) = RationalCovering::new(poles, residues) else {
            continue;
        };
        let m = cov.margins();
        if m.min_gamma_separation > 0.15 && m.min_lambda_separation > 0.15 && m.min_pole_distance > 0.15
        {
            return cov;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn two_sheet() -> RationalCovering {
        RationalCovering::new(vec![c(2.0, 0.0)], vec![c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn eval_map_values() {
        let cov = two_sheet();
        assert!((cov.eval(c(0.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
        let big = c(1e6, 0.0);
        assert!((cov.eval(big).unwrap() - big).norm() < 1e-5);
        assert!(matches!(cov.eval(c(2.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let zero_res = RationalCovering::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0); 2]);
        assert!(matches!(zero_res, Err(Error::InvalidCovering(_))));
        let same_poles = RationalCovering::new(vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0); 2]);
        assert!(matches!(same_poles, Err(Error::InvalidCovering(_))));
    }

    #[test]
    fn two_sheet_critical_data() {
        let cov = two_sheet();
        assert_eq!(cov.gammas().len(), 2);
        let expect_g = [c(1.0, 0.0), c(3.0, 0.0)];
        let expect_l = [c(0.0, 0.0), c(4.0, 0.0)];
        let expect_a = [c(-0.5, 0.0), c(0.5, 0.0)];
        for m in 0..2 {
            assert!((cov.gammas()[m] - expect_g[m]).norm() < 1e-12);
            assert!((cov.lambdas()[m] - expect_l[m]).norm() < 1e-12);
            assert!((cov.alphas()[m] - expect_a[m]).norm() < 1e-12);
        }
        assert!((cov.kappas()[0] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((cov.kappas()[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fiber_examples() {
        let cov = two_sheet();
        let mut f = cov.fiber(c(2.0, 0.0));
        f.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((f[0] - c(2.0, -1.0)).norm() < 1e-12);
        assert!((f[1] - c(2.0, 1.0)).norm() < 1e-12);
        for g in cov.fiber(c(0.0, 0.0)) {
            assert!((g - c(1.0, 0.0)).norm() < 1e-6);
        }
        let lab = SheetLabeling::new(&cov, c(1e6, 0.0)).unwrap();
        assert!((lab.ordered_fiber[0] - c(1e6, 0.0)).norm() < 1e-3);
        assert!((lab.ordered_fiber[1] - c(2.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn nu_derivative_examples() {
        let cov = two_sheet();
        let (w, d) = cov.nu_derivatives(c(0.0, 0.0)).unwrap();
        assert!((w - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!((cov.branch().dnu_dlambda(c(0.0, 0.0)) - w).norm() < 1e-14);
        assert_eq!(d.len(), 2);
        let (_, d) = cov.nu_derivatives(c(2.0, 1.0)).unwrap();
        assert!((d[0] - c(0.25, -0.25)).norm() < 1e-14);
        let (w, d) = cov.nu_derivatives(c(1e9, 0.0)).unwrap();
        assert!((w - ONE).norm() < 1e-8 && d.iter().all(|x| x.norm() < 1e-8));
        assert!(matches!(cov.nu_derivatives(c(1.0, 0.0)), Err(Error::CriticalPointHit { .. })));
    }

    #[test]
    fn identity_covering_has_no_critical_points() {
        let cov = RationalCovering::new(vec![], vec![]).unwrap();
        assert_eq!(cov.degree(), 1);
        assert!(cov.gammas().is_empty());
        assert_eq!(cov.verify_partial_fraction(&[c(0.3, 0.1), c(-2.0, 5.0)]), 0.0);
    }

    #[test]
    fn random_coverings_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=5 {
            let cov = random_covering(&mut rng, n);
            assert_eq!(cov.gammas().len(), 2 * n - 2);
            for m in 0..cov.gammas().len() {
                let g = cov.gammas()[m];
                assert!(cov.derivative(g).norm() < 1e-12);
                let a = cov.alphas()[m];
                assert!((a - ONE / cov.second_derivative(g)).norm() < 1e-10 * (1.0 + a.norm()));
                assert_eq!(cov.kappas()[m] * cov.kappas()[m] / 2.0, a);
            }
        }
    }

    #[test]
    fn loop_around_branch_point_swaps_two_sheets() {
        let cov = two_sheet();
        let pts: Vec<C> = (0..12)
            .map(|i| c(0.0, 0.0) + C::from_polar(1.0, i as f64 * std::f64::consts::TAU / 12.0))
            .collect();
        assert_eq!(cov.loop_permutation(&pts).unwrap(), vec![1, 0]);
        let far: Vec<C> = pts.iter().map(|p| p + c(10.0, 0.0)).collect();
        assert_eq!(cov.loop_permutation(&far).unwrap(), vec![0, 1]);
    }

    #[test]
    fn continuation_through_branch_point_rejected() {
        let cov = two_sheet();
        let lab = SheetLabeling::new(&cov, c(-1.0, 0.0)).unwrap();
        assert!(matches!(
            lab.fiber_at(&cov, c(1.0, 0.0)),
            Err(Error::PathThroughBranchPoint { index: 0, .. })
        ));
    }
}
