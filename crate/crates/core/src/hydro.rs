//! Diagonal hydrodynamic-type systems `∂_x λ_m = V_m ∂_t λ_m` built from
//! contour moments `∮ h B_m`, and their solutions by the hodograph method.
//!
//! With three λ-independent densities `h`, `h₁`, `h₂` the speeds are
//! `V_m = ∮h₁B_m/∮hB_m`, the commuting flows `Φ_m = ∮h₂B_m/∮hB_m`, and
//! solutions solve `∮(h₂ + h t + h₁ x) B_m = 0` for the branch points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use serde::Serialize;

use crate::covering::RationalCovering;
use crate::deformation::{flow_derivative, flow_to, unit, FlowState};
use crate::error::{Error, Result};
use crate::rank1::{Contour, Density, Measure};
use crate::tolerances::mixed_error;

const ZERO: C = C::new(0.0, 0.0);

/// Which of the three densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    H,
    H1,
    H2,
}

impl Role {
    fn index(self) -> usize {
        match self {
            Role::H => 0,
            Role::H1 => 1,
            Role::H2 => 2,
        }
    }
}

/// A covering, a contour on it and the three densities.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroConfig {
    pub covering: RationalCovering,
    pub contour: Contour,
    pub h: Density,
    pub h1: Density,
    pub h2: Density,
}

/// Contour nodes transported with the covering and the fixed weights
/// `ω = h dλ` of each density.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroField {
    pub state: FlowState,
    pub weights: [Vec<C>; 3],
}

impl HydroField {
    pub fn new(cfg: &HydroConfig) -> Result<Self> {
        let cov = &cfg.covering;
        let m = Measure::on_contour(cov, &cfg.contour, &cfg.h)?;
        let m1 = Measure::on_contour(cov, &cfg.contour, &cfg.h1)?;
        let m2 = Measure::on_contour(cov, &cfg.contour, &cfg.h2)?;
        let field = HydroField {
            state: FlowState::from_covering(cov, vec![], m.nodes),
            weights: [m.weights, m1.weights, m2.weights],
        };
        field.guard()?;
        Ok(field)
    }

    pub fn lambdas(&self) -> &[C] {
        self.state.lambdas()
    }

    pub fn flow_to(&self, target: &[C]) -> Result<Self> {
        Ok(HydroField { state: flow_to(&self.state, target)?, weights: self.weights.clone() })
    }

    fn with_state(&self, state: &FlowState) -> HydroField {
        HydroField { state: state.clone(), weights: self.weights.clone() }
    }

    fn guard(&self) -> Result<()> {
        let n = &self.state.contour;
        let spacing = (0..n.len()).map(|k| (n[(k + 1) % n.len()] - n[k]).norm()).fold(0.0, f64::max);
        for g in &self.state.branch.gammas {
            let distance = n.iter().map(|v| (v - g).norm()).fold(f64::INFINITY, f64::min);
            if distance < 10.0 * spacing {
                return Err(Error::QuadratureDegraded { distance, spacing });
            }
        }
        Ok(())
    }

    /// `∮ h B_m` for the chosen density and every m.
    pub fn moments(&self, role: Role) -> Result<Vec<C>> {
        Ok(self.moments_with_scale(role)?.into_iter().map(|(v, _)| v).collect())
    }

    /// Moments together with the sum of the magnitudes of their terms.
    fn moments_with_scale(&self, role: Role) -> Result<Vec<(C, f64)>> {
        self.guard()?;
        let b = &self.state.branch;
        let w = &self.weights[role.index()];
        Ok(b.gammas
            .iter()
            .zip(&b.kappas)
            .map(|(g, k)| {
                let mut s = ZERO;
                let mut mag = 0.0;
                for (v, om) in self.state.contour.iter().zip(w) {
                    let d = v - g;
                    let term = k * om * b.dnu_dlambda(*v) / (d * d);
                    s += term;
                    mag += term.norm();
                }
                (s, mag)
            })
            .collect())
    }

    fn ratios(&self, role: Role) -> Result<Vec<C>> {
        let den = self.moments_with_scale(Role::H)?;
        let num = self.moments(role)?;
        num.iter()
            .zip(&den)
            .enumerate()
            .map(|(m, (a, (b, mag)))| {
                if b.norm() <= 1e-12 * mag || *b == ZERO {
                    Err(Error::ZeroDenominator(m))
                } else {
                    Ok(a / b)
                }
            })
            .collect()
    }

    /// Characteristic speeds `V_m`.
    pub fn speeds(&self) -> Result<Vec<C>> {
        self.ratios(Role::H1)
    }

    /// Commuting-flow characteristics `Φ_m`.
    pub fn phis(&self) -> Result<Vec<C>> {
        self.ratios(Role::H2)
    }

    /// `F_m = ∮ (h₂ + h t + h₁ x) B_m`.
    pub fn residual(&self, x: C, t: C) -> Result<Vec<C>> {
        let m0 = self.moments(Role::H)?;
        let m1 = self.moments(Role::H1)?;
        let m2 = self.moments(Role::H2)?;
        Ok((0..m0.len()).map(|m| m2[m] + t * m0[m] + x * m1[m]).collect())
    }
}

/// Worst [`mixed_error`] of `∂_m V_n = Γ^n_{nm}(V_m - V_n)` and of the same
/// relation for `Φ`, with `Γ^n_{nm} = β_mn ∮hB_m/∮hB_n`, over all `m ≠ n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TsarevReport {
    pub speeds: f64,
    pub phis: f64,
}

pub fn verify_tsarev(field: &HydroField) -> Result<TsarevReport> {
    let b = &field.state.branch;
    let mm = b.len();
    let v = field.speeds()?;
    let phi = field.phis()?;
    let den = field.moments(Role::H)?;
    let mut rep = TsarevReport { speeds: 0.0, phis: 0.0 };
    for m in 0..mm {
        let d = flow_derivative(&field.state, &unit(m, mm), |s| {
            let f = field.with_state(s);
            let mut out = f.speeds()?;
            out.extend(f.phis()?);
            Ok(out)
        })?;
        for n in 0..mm {
            if n == m {
                continue;
            }
            let q = b.gammas[m] - b.gammas[n];
            let beta = b.kappas[m] * b.kappas[n] / (q * q * 2.0);
            let gamma = beta * den[m] / den[n];
            rep.speeds = rep.speeds.max(mixed_error(d[n], gamma * (v[m] - v[n])));
            rep.phis = rep.phis.max(mixed_error(d[mm + n], gamma * (phi[m] - phi[n])));
        }
    }
    Ok(rep)
}

/// Newton controls for [`hodograph_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest singular value of the Jacobian, relative to the largest,
    /// below which the solve stops with `GradientCatastrophe`.
    pub singular_ratio: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tolerance: 1e-10, max_iterations: 40, singular_ratio: 1e-10 }
    }
}

/// A converged point of the hodograph solution.
#[derive(Debug, Clone, PartialEq)]
pub struct HodographState {
    pub x: C,
    pub t: C,
    pub field: HydroField,
    pub iterations: usize,
    /// `‖F‖` after every iteration, starting with the seed.
    pub history: Vec<f64>,
}

impl HodographState {
    pub fn lambdas(&self) -> &[C] {
        self.field.lambdas()
    }

    pub fn residual_norm(&self) -> f64 {
        *self.history.last().unwrap_or(&f64::INFINITY)
    }

    /// `max_m |Φ_m + t + V_m x|`: the solution in ratio form.
    pub fn consistency(&self) -> Result<f64> {
        let v = self.field.speeds()?;
        let phi = self.field.phis()?;
        Ok(v.iter()
            .zip(&phi)
            .map(|(v, p)| mixed_error(p + self.t + v * self.x, ZERO))
            .fold(0.0, f64::max))
    }
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn jacobian(field: &HydroField, x: C, t: C) -> Result<DMatrix<C>> {
    let mm = field.lambdas().len();
    let mut j = DMatrix::<C>::zeros(mm, mm);
    for k in 0..mm {
        let col = flow_derivative(&field.state, &unit(k, mm), |s| field.with_state(s).residual(x, t))?;
        for (i, v) in col.into_iter().enumerate() {
            j[(i, k)] = v;
        }
    }
    Ok(j)
}

fn check_conditioning(j: &DMatrix<C>, ratio: f64) -> Result<()> {
    let sv = j.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > ratio * smax) {
        return Err(Error::GradientCatastrophe { sigma_min: smin });
    }
    Ok(())
}

/// Damped Newton on `F(λ) = 0` at `(x, t)` from the branch points of `seed`.
/// The covering is re-flowed to every iterate and the Jacobian comes from
/// finite differences over flows.
pub fn hodograph_solve(seed: &HydroField, x: C, t: C, opts: &NewtonOptions) -> Result<HodographState> {
    let mut cur = seed.clone();
    let mut f = cur.residual(x, t)?;
    let mut history = vec![norm(&f)];
    let mut polished = false;
    for it in 0..opts.max_iterations {
        let fn0 = norm(&f);
        if fn0 < opts.tolerance {
            if polished || fn0 == 0.0 {
                return Ok(HodographState { x, t, field: cur, iterations: it, history });
            }
            polished = true;
        }
        let jac = jacobian(&cur, x, t)?;
        check_conditioning(&jac, opts.singular_ratio)?;
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|z| -z));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NewtonDivergence("singular Newton system".into()))?;
        let mut damping = 1.0;
        let mut accepted = None;
        while damping >= 1.0 / 64.0 {
            let target: Vec<C> = cur.lambdas().iter().zip(step.iter()).map(|(l, s)| l + s * damping).collect();
            if let Ok(next) = cur.flow_to(&target) {
                if let Ok(fnew) = next.residual(x, t) {
                    if norm(&fnew) < (1.0 - 0.25 * damping) * fn0 || (polished && norm(&fnew) <= fn0) {
                        accepted = Some((next, fnew));
                        break;
                    }
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some((next, fnew)) => {
                cur = next;
                f = fnew;
                history.push(norm(&f));
            }
            None if polished => return Ok(HodographState { x, t, field: cur, iterations: it, history }),
            None => {
                return Err(Error::NewtonDivergence(format!(
                    "no damped step reduces the residual (|F| = {fn0:e}) at iteration {it}"
                )))
            }
        }
    }
    let last = norm(&f);
    if last < opts.tolerance {
        return Ok(HodographState { x, t, field: cur, iterations: opts.max_iterations, history });
    }
    Err(Error::NewtonDivergence(format!("|F| = {last:e} after {} iterations", opts.max_iterations)))
}

fn unit_mode(j: i64, width: usize) -> Density {
    let mut c = vec![ZERO; 2 * width + 1];
    c[(j + width as i64) as usize] = C::new(1.0, 0.0);
    Density::Fourier(c)
}

fn fourier_coeffs(d: &Density) -> Result<&[C]> {
    match d {
        Density::Fourier(c) => Ok(c),
        Density::Samples(_) => Err(Error::InvalidArgument("manufactured solutions need Fourier densities".into())),
    }
}

fn pad(c: &[C], width: usize) -> Vec<C> {
    let j0 = c.len() / 2;
    let mut out = vec![ZERO; 2 * width + 1];
    for (i, v) in c.iter().enumerate() {
        out[i + width - j0] += v;
    }
    out
}

/// Choose `h₂ = h₂_base + Σ_{|j|≤modes} c_j e^{ijt} - h t₀ - h₁ x₀` with the
/// minimum-norm `c_j` making `∮(h₂_base + Σ c_j e^{ijt}) B_m = 0` on the
/// given covering, so that its branch points solve the system at `(x₀, t₀)`.
///
/// When the contour encloses every critical point, modes with `j ≤ 0` have
/// vanishing moments for all branch points. The base density then needs
/// more positive modes than there are branch points, otherwise the
/// correction removes its whole positive part and the moments of `h₂`
/// vanish identically.
pub fn manufacture(
    covering: RationalCovering,
    contour: Contour,
    h: Density,
    h1: Density,
    h2_base: Density,
    modes: usize,
    x0: C,
    t0: C,
) -> Result<HydroConfig> {
    let width = [fourier_coeffs(&h)?, fourier_coeffs(&h1)?, fourier_coeffs(&h2_base)?]
        .iter()
        .map(|c| c.len() / 2)
        .fold(modes, usize::max);
    let mm = covering.lambdas().len();
    let base = HydroConfig { covering: covering.clone(), contour, h: h2_base.clone(), h1: h.clone(), h2: h1.clone() };
    let field = HydroField::new(&base)?;
    let target = field.moments(Role::H)?;
    let mut a = DMatrix::<C>::zeros(mm, 2 * modes + 1);
    for (col, j) in (-(modes as i64)..=modes as i64).enumerate() {
        let probe = HydroConfig { h: unit_mode(j, modes), ..base.clone() };
        let mj = HydroField::new(&probe)?.moments(Role::H)?;
        for m in 0..mm {
            a[(m, col)] = mj[m];
        }
    }
    let rhs = DVector::from_iterator(mm, target.iter().map(|z| -z));
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidArgument(format!("manufactured density: {e}")))?;
    let miss = (&a * &coeffs - &rhs).norm();
    if miss > 1e-10 * rhs.norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "{modes} correction modes cannot cancel the moments (miss {miss:e}); use at least one per branch point"
        )));
    }
    let mut h2 = pad(fourier_coeffs(&h2_base)?, width);
    let corr = pad(coeffs.as_slice(), width);
    let hp = pad(fourier_coeffs(&h)?, width);
    let h1p = pad(fourier_coeffs(&h1)?, width);
    for i in 0..h2.len() {
        h2[i] += corr[i] - hp[i] * t0 - h1p[i] * x0;
    }
    Ok(HydroConfig { covering, contour, h, h1, h2: Density::Fourier(h2) })
}

/// Equispaced axis `lo..=hi` with `n` points.
pub fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Solutions on the grid `xs × ts` (row-major in x), marching outward from
/// the point nearest to `(0, 0)` and seeding each solve from its nearest
/// solved neighbour.
pub fn evolve(seed: &HydroField, xs: &[f64], ts: &[f64], opts: &NewtonOptions) -> Result<Vec<Vec<HodographState>>> {
    let (nx, nt) = (xs.len(), ts.len());
    if nx == 0 || nt == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut order: Vec<(usize, usize)> = (0..nx).flat_map(|i| (0..nt).map(move |j| (i, j))).collect();
    let dist = |&(i, j): &(usize, usize)| xs[i].hypot(ts[j]);
    order.sort_by(|a, b| dist(a).total_cmp(&dist(b)));
    let mut grid: Vec<Vec<Option<HodographState>>> = vec![vec![None; nt]; nx];
    for (i, j) in order {
        let neighbour = grid
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().enumerate().filter_map(move |(b, s)| s.as_ref().map(|s| (a, b, s))))
            .min_by(|p, q| {
                let dp = (xs[p.0] - xs[i]).hypot(ts[p.1] - ts[j]);
                let dq = (xs[q.0] - xs[i]).hypot(ts[q.1] - ts[j]);
                dp.total_cmp(&dq)
            })
            .map(|(_, _, s)| s.field.clone());
        let start = neighbour.unwrap_or_else(|| seed.clone());
        grid[i][j] = Some(hodograph_solve(&start, C::new(xs[i], 0.0), C::new(ts[j], 0.0), opts)?);
    }
    Ok(grid.into_iter().map(|row| row.into_iter().map(|s| s.expect("every grid point solved")).collect()).collect())
}

/// Worst relative residual of `∂_x λ_m - V_m ∂_t λ_m` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HdsReport {
    pub residual: f64,
    /// Worst `|∂_x λ_m - ∂_t λ_m|` relative, informative when `V ≡ 1`.
    pub symmetric: f64,
    pub points: usize,
}

/// Fourth-order weights (times `12h`) for the derivative at each of five
/// equispaced points.
const FIVE_POINT: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

fn derivative_stencil(vals: &[C], k: usize, h: f64) -> C {
    let n = vals.len();
    if n < 5 {
        return (vals[k + 1] - vals[k - 1]) / (2.0 * h);
    }
    let start = k.saturating_sub(2).min(n - 5);
    let w = &FIVE_POINT[k - start];
    (0..5).map(|i| vals[start + i] * w[i]).sum::<C>() / (12.0 * h)
}

/// Finite-difference check of `∂_x λ_m = V_m ∂_t λ_m` on an equispaced grid
/// from [`evolve`]. Axes with at least five points use fourth-order stencils
/// at every point, shorter axes central differences on the interior.
pub fn verify_hds(grid: &[Vec<HodographState>], xs: &[f64], ts: &[f64]) -> Result<HdsReport> {
    let (nx, nt) = (xs.len(), ts.len());
    if nx < 3 || nt < 3 || grid.len() != nx || grid.iter().any(|r| r.len() != nt) {
        return Err(Error::InvalidArgument("verify_hds needs a grid of at least 3×3 points".into()));
    }
    let (hx, ht) = (xs[1] - xs[0], ts[1] - ts[0]);
    let mm = grid[0][0].lambdas().len();
    let mut rep = HdsReport { residual: 0.0, symmetric: 0.0, points: 0 };
    let range = |n: usize| if n >= 5 { 0..n } else { 1..n - 1 };
    for i in range(nx) {
        for j in range(nt) {
            let v = grid[i][j].field.speeds()?;
            for m in 0..mm {
                let along_x: Vec<C> = (0..nx).map(|a| grid[a][j].lambdas()[m]).collect();
                let along_t: Vec<C> = (0..nt).map(|b| grid[i][b].lambdas()[m]).collect();
                let lx = derivative_stencil(&along_x, i, hx);
                let lt = derivative_stencil(&along_t, j, ht);
                let den = lx.norm() + (v[m] * lt).norm();
                let r = (lx - v[m] * lt).norm();
                rep.residual = rep.residual.max(if den == 0.0 { 0.0 } else { r / den });
                let den = lx.norm() + lt.norm();
                rep.symmetric = rep.symmetric.max(if den == 0.0 { 0.0 } else { (lx - lt).norm() / den });
            }
            rep.points += 1;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn two_sheet() -> RationalCovering {
        RationalCovering::new(vec![c(2.0, 0.0)], vec![c(1.0, 0.0)]).unwrap()
    }

    fn config(contour: Contour, h: Density) -> HydroConfig {
        HydroConfig { covering: two_sheet(), contour, h: h.clone(), h1: h.clone(), h2: h }
    }

    #[test]
    fn residue_theorem_moments() {
        // critical points are 1 and 3
        let around_one = Contour::circle(c(1.0, 0.0), 0.5, 256).unwrap();
        let f = HydroField::new(&config(around_one, Density::constant(c(1.0, 0.0)))).unwrap();
        assert!(f.moments(Role::H).unwrap().iter().all(|z| z.norm() < 1e-12));
        let h = Density::fourier(vec![ZERO, c(1.0, 0.0), c(0.5, 0.0)]).unwrap();
        let f = HydroField::new(&config(around_one, h)).unwrap();
        let mom = f.moments(Role::H).unwrap();
        let kappa = two_sheet().kappas()[0];
        assert!((mom[0] - c(0.0, TAU) * kappa).norm() < 1e-10, "{}", mom[0]);
        assert!(mom[1].norm() < 1e-12);
    }

    #[test]
    fn equal_densities_give_unit_speeds() {
        let contour = Contour::circle(c(2.0, 0.0), 2.0, 256).unwrap();
        let h = Density::fourier(vec![c(0.2, 0.1), c(1.0, 0.0), c(0.3, -0.2)]).unwrap();
        let mut cfg = config(contour, h.clone());
        cfg.h2 = Density::fourier(vec![c(0.6, 0.3), c(3.0, 0.0), c(0.9, -0.6)]).unwrap();
        let f = HydroField::new(&cfg).unwrap();
        assert!(f.speeds().unwrap().iter().all(|v| (v - 1.0).norm() < 1e-13));
        assert!(f.phis().unwrap().iter().all(|v| (v - 3.0).norm() < 1e-13));
        let rep = verify_tsarev(&f).unwrap();
        assert!(rep.speeds < 1e-9 && rep.phis < 1e-9);
    }

    #[test]
    fn zero_denominator_is_reported() {
        let around_one = Contour::circle(c(1.0, 0.0), 0.5, 256).unwrap();
        let f = HydroField::new(&config(around_one, Density::constant(c(1.0, 0.0)))).unwrap();
        assert!(matches!(f.speeds(), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn near_singular_jacobian_is_a_catastrophe() {
        let j = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0 + 1e-13, 0.0)]);
        assert!(matches!(check_conditioning(&j, 1e-10), Err(Error::GradientCatastrophe { .. })));
        assert!(check_conditioning(&DMatrix::identity(2, 2), 1e-10).is_ok());
    }

    #[test]
    fn stencils_are_exact_on_quartics_at_every_position() {
        let f = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x;
        let df = |x: f64| 4.0 * x.powi(3) - 6.0 * x * x + 1.0;
        for n in [5, 7] {
            let vals: Vec<C> = (0..n).map(|k| c(f(k as f64 * 0.1), 0.0)).collect();
            for k in 0..n {
                let d = derivative_stencil(&vals, k, 0.1);
                assert!((d.re - df(k as f64 * 0.1)).abs() < 1e-12, "n {n} k {k}");
            }
        }
        let short: Vec<C> = (0..3).map(|k| c((k as f64 * 0.1).powi(2), 0.0)).collect();
        assert!((derivative_stencil(&short, 1, 0.1).re - 0.2).abs() < 1e-12);
    }
}
