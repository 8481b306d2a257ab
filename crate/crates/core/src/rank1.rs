//! Scalar solutions: Cauchy integrals over measures with fixed λ-projection,
//! their derivatives in the branch points, and the scalar tau-function.
//!
//! A measure is a finite set of nodes `ν_k` on the covering together with
//! weights `ω_k = h_k dλ_k` that do not depend on the branch points. All
//! integrals `∮ h F(ν) dν` become `Σ ω_k w(ν_k) F(ν_k)` with
//! `w = ∂ν/∂λ`. Transporting the nodes with the deformation flow keeps the
//! projection of the contour fixed, so the weights never change.

use num_complex::Complex64 as C;
use std::f64::consts::{PI, TAU};

use crate::covering::{BranchData, RationalCovering};
use crate::deformation::{flow, flow_derivative, flow_to, unit, FlowState, ModuliPath};
use crate::error::{Error, Result};
use crate::fd;
use crate::quad::gauss_legendre01;
use crate::tolerances::FD_STEP_SECOND;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// A function on the parameter circle `t ∈ [0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// Coefficients `c_j` of `e^{ijt}` for `j = -J..=J`.
    Fourier(Vec<C>),
    /// Values at the `K` equispaced contour parameters.
    Samples(Vec<C>),
}

impl Density {
    pub fn constant(c: C) -> Self {
        Density::Fourier(vec![c])
    }

    pub fn fourier(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidArgument(
                "Fourier densities need an odd number of coefficients (-J..=J)".into(),
            ));
        }
        Ok(Density::Fourier(coeffs))
    }

    /// Value at parameter `t`; sampled densities only at their own nodes.
    pub fn eval(&self, t: f64) -> Result<C> {
        match self {
            Density::Fourier(c) => {
                let j0 = (c.len() / 2) as i64;
                Ok(c.iter()
                    .enumerate()
                    .map(|(i, cj)| cj * C::from_polar(1.0, (i as i64 - j0) as f64 * t))
                    .sum())
            }
            Density::Samples(s) => {
                let k = s.len() as f64;
                let idx = t.rem_euclid(TAU) * k / TAU;
                let near = idx.round();
                if (idx - near).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(
                        "sampled density evaluated between nodes".into(),
                    ));
                }
                Ok(s[(near as usize) % s.len()])
            }
        }
    }

    pub fn at_nodes(&self, k: usize) -> Result<Vec<C>> {
        if let Density::Samples(s) = self {
            if s.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "density has {} samples, contour has {k} nodes",
                    s.len()
                )));
            }
            return Ok(s.clone());
        }
        (0..k).map(|i| self.eval(TAU * i as f64 / k as f64)).collect()
    }
}

/// Circle `γ = center + radius·e^{it}` at the initial covering, sampled at
/// `nodes` equispaced parameters, counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub center: C,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn circle(center: C, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || nodes < 3 {
            return Err(Error::InvalidArgument("circle needs radius > 0 and ≥ 3 nodes".into()));
        }
        Ok(Contour { center, radius, nodes })
    }

    pub fn params(&self) -> Vec<f64> {
        (0..self.nodes).map(|k| TAU * k as f64 / self.nodes as f64).collect()
    }

    pub fn point(&self, t: f64) -> C {
        self.center + C::from_polar(self.radius, t)
    }

    pub fn tangent(&self, t: f64) -> C {
        I * C::from_polar(self.radius, t)
    }

    pub fn points(&self) -> Vec<C> {
        self.params().into_iter().map(|t| self.point(t)).collect()
    }
}

/// Where to evaluate a Cauchy integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuPoint {
    Finite(C),
    /// The point at infinity on the sheet where `ν ≈ λ`.
    Infinity,
}

/// Nodes with fixed projection and λ-independent weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub nodes: Vec<C>,
    pub weights: Vec<C>,
    /// Nodes sample a closed contour in order (enables the spacing guard).
    pub closed: bool,
}

impl Measure {
    /// Trapezoid rule for `∮ h dν` over the contour on the covering.
    pub fn on_contour(cov: &RationalCovering, contour: &Contour, density: &Density) -> Result<Self> {
        let k = contour.nodes;
        let h = density.at_nodes(k)?;
        let dt = TAU / k as f64;
        let mut nodes = Vec::with_capacity(k);
        let mut weights = Vec::with_capacity(k);
        for (t, hk) in contour.params().into_iter().zip(h) {
            let g = contour.point(t);
            cov.eval(g)?;
            // dλ = R'(γ) dγ is what stays fixed under the flow
            nodes.push(g);
            weights.push(hk * cov.derivative(g) * contour.tangent(t) * dt);
        }
        Ok(Measure { nodes, weights, closed: true })
    }

    /// Unit mass at a single point: the elementary solution.
    pub fn point(nu: C, weight: C) -> Self {
        Measure { nodes: vec![nu], weights: vec![weight], closed: false }
    }

    /// `weight · ∫ dν` along the fixed straight λ-segment from the point
    /// `start` to the projection `end_lambda`, continued on the sheet of
    /// `start`, by `order`-point Gauss-Legendre.
    pub fn segment(
        cov: &RationalCovering,
        start: C,
        end_lambda: C,
        order: usize,
        weight: C,
    ) -> Result<Self> {
        let la = cov.eval(start)?;
        let (s, w) = gauss_legendre01(order);
        let mut nodes = Vec::with_capacity(order);
        let mut cur = start;
        let mut from = la;
        for si in &s {
            let to = la + (end_lambda - la) * *si;
            cur = cov.continue_fiber(from, &[cur], to)?[0];
            from = to;
            nodes.push(cur);
        }
        let weights = w.iter().map(|wi| weight * (end_lambda - la) * *wi).collect();
        Ok(Measure { nodes, weights, closed: false })
    }

    /// Union of two measures.
    pub fn join(mut self, other: Measure) -> Self {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self.closed = false;
        self
    }
}

/// `(γ_m - γ_n)² ∂²f/∂λ_m∂λ_n = A_mn ∂f/∂λ_m + A_nm ∂f/∂λ_n` with
/// `A_mn = α_n (γ_m - γ₀)/(γ_n - γ₀)`; returns `(A_mn, A_nm)`.
pub fn pde_coefficients(branch: &BranchData, gamma0: C, m: usize, n: usize) -> (C, C) {
    let (gm, gn) = (branch.gammas[m], branch.gammas[n]);
    (
        branch.alphas[n] * (gm - gamma0) / (gn - gamma0),
        branch.alphas[m] * (gn - gamma0) / (gm - gamma0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResidual {
    pub m: usize,
    pub n: usize,
    pub value: C,
    /// `|value|` over the sum of the magnitudes of the three terms.
    pub relative: f64,
}

/// A Cauchy-integral solution together with the flow state that carries its
/// nodes, its base point (marked point 0) and optional probes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub state: FlowState,
    pub weights: Vec<C>,
    pub closed: bool,
}

impl ScalarSolution {
    pub fn new(cov: &RationalCovering, measure: Measure, gamma0: C) -> Result<Self> {
        if let Some((index, distance)) = cov.branch().nearest_critical(gamma0) {
            if distance < 1e-9 * cov.scale() {
                return Err(Error::CriticalPointHit { index, distance });
            }
        }
        let sol = ScalarSolution {
            state: FlowState::from_covering(cov, vec![gamma0], measure.nodes),
            weights: measure.weights,
            closed: measure.closed,
        };
        sol.guard(gamma0)?;
        Ok(sol)
    }

    /// Add points with fixed projection that are transported with the
    /// solution (marked points `1..`).
    pub fn with_probes(mut self, probes: &[C]) -> Self {
        self.state.marked.extend_from_slice(probes);
        self
    }

    pub fn gamma0(&self) -> C {
        self.state.marked[0]
    }

    pub fn probes(&self) -> &[C] {
        &self.state.marked[1..]
    }

    pub fn branch(&self) -> &BranchData {
        &self.state.branch
    }

    pub fn flow_to(&self, target: &[C]) -> Result<Self> {
        Ok(ScalarSolution { state: flow_to(&self.state, target)?, ..self.clone_shallow() })
    }

    pub fn flow(&self, path: &ModuliPath) -> Result<Self> {
        Ok(ScalarSolution { state: flow(&self.state, path)?, ..self.clone_shallow() })
    }

    fn clone_shallow(&self) -> Self {
        ScalarSolution {
            state: FlowState {
                branch: self.state.branch.clone(),
                poles: vec![],
                residues: vec![],
                marked: vec![],
                contour: vec![],
            },
            weights: self.weights.clone(),
            closed: self.closed,
        }
    }

    /// Largest distance between consecutive nodes of a closed contour.
    pub fn spacing(&self) -> Option<f64> {
        if !self.closed || self.state.contour.len() < 2 {
            return None;
        }
        let n = &self.state.contour;
        Some((0..n.len()).map(|k| (n[(k + 1) % n.len()] - n[k]).norm()).fold(0.0, f64::max))
    }

    fn guard(&self, point: C) -> Result<()> {
        if let Some(spacing) = self.spacing() {
            let distance = self
                .state
                .contour
                .iter()
                .map(|v| (v - point).norm())
                .fold(f64::INFINITY, f64::min);
            if distance < 10.0 * spacing {
                return Err(Error::QuadratureDegraded { distance, spacing });
            }
        }
        Ok(())
    }

    /// `ω_k w(ν_k)`: the weights of `dν` at the current nodes.
    fn dnu_weights(&self) -> Vec<C> {
        let b = &self.state.branch;
        self.state
            .contour
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * b.dnu_dlambda(*v))
            .collect()
    }

    /// `Σ ω w(ν)/(ν - p)^power`
    fn kernel_sum(&self, p: C, power: i32) -> C {
        self.state
            .contour
            .iter()
            .zip(self.dnu_weights())
            .map(|(v, w)| w / (v - p).powi(power))
            .sum()
    }

    /// `f = ∮ h dν/(ν - γ₀)`
    pub fn f(&self) -> Result<C> {
        self.guard(self.gamma0())?;
        Ok(self.kernel_sum(self.gamma0(), 1))
    }

    /// `ψ(P) = ∮ h dν/(ν - ν(P))`, zero at infinity on the first sheet.
    pub fn psi(&self, p: NuPoint) -> Result<C> {
        match p {
            NuPoint::Infinity => Ok(ZERO),
            NuPoint::Finite(nu) => {
                let d = self
                    .state
                    .contour
                    .iter()
                    .map(|v| (v - nu).norm())
                    .fold(f64::INFINITY, f64::min);
                let tiny = self.spacing().map_or(1e-12, |s| 1e-3 * s);
                if d < tiny {
                    return Err(Error::OnContour);
                }
                Ok(self.kernel_sum(nu, 1))
            }
        }
    }

    /// `∮ h B_m / κ_m = Σ ω w(ν)/(ν - γ_m)²` for every m.
    pub fn second_moments(&self) -> Result<Vec<C>> {
        self.state
            .branch
            .gammas
            .iter()
            .map(|g| {
                self.guard(*g)?;
                Ok(self.kernel_sum(*g, 2))
            })
            .collect()
    }

    /// `∂f/∂λ_m = α_m/(γ_m - γ₀) · Σ ω w(ν)/(ν - γ_m)²`
    pub fn grad_f(&self) -> Result<Vec<C>> {
        self.guard(self.gamma0())?;
        let b = &self.state.branch;
        let g0 = self.gamma0();
        Ok(self
            .second_moments()?
            .into_iter()
            .enumerate()
            .map(|(m, s)| b.alphas[m] / (b.gammas[m] - g0) * s)
            .collect())
    }

    /// `H[m][n] = ∂(∂f/∂λ_m)/∂λ_n` by finite differences over flows.
    pub fn hessian_fd(&self) -> Result<Vec<Vec<C>>> {
        let m = self.state.branch.len();
        let cols: Vec<Vec<C>> = (0..m)
            .map(|n| self.derivative_along(&unit(n, m), |s| s.grad_f()))
            .collect::<Result<_>>()?;
        Ok((0..m).map(|i| (0..m).map(|n| cols[n][i]).collect()).collect())
    }

    /// Directional derivative of any solution functional over genuine flows.
    pub fn derivative_along<F>(&self, dir: &[C], mut f: F) -> Result<Vec<C>>
    where
        F: FnMut(&ScalarSolution) -> Result<Vec<C>>,
    {
        flow_derivative(&self.state, dir, |st| {
            let s = ScalarSolution { state: st.clone(), ..self.clone_shallow() };
            f(&s)
        })
    }

    /// Residual of the generalized Euler-Darboux equation for a pair.
    pub fn pde_residual(&self, m: usize, n: usize) -> Result<PairResidual> {
        if m == n {
            return Err(Error::InvalidArgument("pde residual needs m != n".into()));
        }
        let grad = self.grad_f()?;
        let d = self.derivative_along(&unit(n, self.state.branch.len()), |s| s.grad_f())?;
        Ok(self.assemble_residual(m, n, d[m], &grad))
    }

    /// Residuals for every pair `m < n`, sharing the finite differences.
    pub fn pde_residuals(&self) -> Result<Vec<PairResidual>> {
        let grad = self.grad_f()?;
        let h = self.hessian_fd()?;
        let mm = grad.len();
        let mut out = Vec::new();
        for m in 0..mm {
            for n in m + 1..mm {
                out.push(self.assemble_residual(m, n, h[m][n], &grad));
            }
        }
        Ok(out)
    }

    fn assemble_residual(&self, m: usize, n: usize, fmn: C, grad: &[C]) -> PairResidual {
        let b = &self.state.branch;
        let (amn, anm) = pde_coefficients(b, self.gamma0(), m, n);
        let d = b.gammas[m] - b.gammas[n];
        let t = [d * d * fmn, -amn * grad[m], -anm * grad[n]];
        let value = t[0] + t[1] + t[2];
        let scale: f64 = t.iter().map(|z| z.norm()).sum();
        PairResidual { m, n, value, relative: if scale == 0.0 { 0.0 } else { value.norm() / scale } }
    }

    /// `∂ ln τ/∂λ_m = (γ₀ - γ_m)²/(2α_m) (∂f/∂λ_m)²`
    pub fn tau_grad(&self) -> Result<Vec<C>> {
        let b = &self.state.branch;
        let g0 = self.gamma0();
        Ok(self
            .grad_f()?
            .into_iter()
            .enumerate()
            .map(|(m, fm)| {
                let d = g0 - b.gammas[m];
                d * d / (b.alphas[m] * 2.0) * fm * fm
            })
            .collect())
    }

    /// Same quantity as half the residue of `(dψ)²/dλ` at each ramification
    /// point, computed by a trapezoid rule on a small circle around `γ_m`.
    pub fn tau_grad_residue(&self) -> Result<Vec<C>> {
        let b = &self.state.branch;
        let nodes = 64;
        (0..b.len())
            .map(|m| {
                let g = b.gammas[m];
                let clearance = b
                    .gammas
                    .iter()
                    .enumerate()
                    .filter(|(n, _)| *n != m)
                    .map(|(_, o)| (o - g).norm())
                    .chain(self.state.contour.iter().map(|v| (v - g).norm()))
                    .fold(f64::INFINITY, f64::min);
                let rho = 0.3 * clearance;
                let mut acc = ZERO;
                for j in 0..nodes {
                    let e = C::from_polar(1.0, TAU * j as f64 / nodes as f64);
                    let nu = g + e * rho;
                    let dpsi = self.kernel_sum(nu, 2);
                    // (1/2πi)∮ F dν with dν = iρe dθ becomes the mean of F ρ e
                    acc += dpsi * dpsi * b.dnu_dlambda(nu) * e * rho;
                }
                Ok(acc / nodes as f64 * 0.5)
            })
            .collect()
    }

    /// Analytic mixed second derivatives of `ln τ` for `m ≠ n`:
    /// `(γ₀ - γ_m)(γ₀ - γ_n)/(γ_m - γ_n)² · f_m f_n`. Diagonal entries are
    /// left at zero.
    pub fn tau_hessian(&self) -> Result<Vec<Vec<C>>> {
        let b = &self.state.branch;
        let g0 = self.gamma0();
        let f = self.grad_f()?;
        let mm = f.len();
        Ok((0..mm)
            .map(|m| {
                (0..mm)
                    .map(|n| {
                        if m == n {
                            return ZERO;
                        }
                        let d = b.gammas[m] - b.gammas[n];
                        (g0 - b.gammas[m]) * (g0 - b.gammas[n]) / (d * d) * f[m] * f[n]
                    })
                    .collect()
            })
            .collect())
    }

    /// `∫ Σ_m ∂_m ln τ dλ_m` along the path by `order`-point Gauss-Legendre
    /// per segment. Returns the increment and the solution at the end.
    pub fn tau_integrate(&self, path: &ModuliPath, order: usize) -> Result<(C, ScalarSolution)> {
        line_integral(self, path, order, |s| s.tau_grad())
    }

    /// `max_m |∂ψ(P)/∂λ_m - (γ₀ - γ_m)/(ν(P) - γ_m) ∂f/∂λ_m|` for the probe
    /// with the given index.
    pub fn linear_system_residual(&self, probe: usize) -> Result<f64> {
        let b = &self.state.branch;
        let g0 = self.gamma0();
        let p = self.probes()[probe];
        let grad = self.grad_f()?;
        let mm = b.len();
        let mut worst = 0.0f64;
        for m in 0..mm {
            let d = self.derivative_along(&unit(m, mm), |s| {
                Ok(vec![s.psi(NuPoint::Finite(s.probes()[probe]))?])
            })?;
            let expect = (g0 - b.gammas[m]) / (p - b.gammas[m]) * grad[m];
            worst = worst.max(crate::tolerances::mixed_error(d[0], expect));
        }
        Ok(worst)
    }
}

/// Integrate a 1-form `Σ_m q_m dλ_m` of a flowed solution along a path.
pub(crate) fn line_integral<F>(
    sol: &ScalarSolution,
    path: &ModuliPath,
    order: usize,
    mut q: F,
) -> Result<(C, ScalarSolution)>
where
    F: FnMut(&ScalarSolution) -> Result<Vec<C>>,
{
    let (s, w) = gauss_legendre01(order);
    let mut cur = sol.clone();
    let mut total = ZERO;
    for seg in path.vertices().windows(2) {
        let d: Vec<C> = seg[1].iter().zip(&seg[0]).map(|(b, a)| b - a).collect();
        for (si, wi) in s.iter().zip(&w) {
            let target: Vec<C> = seg[0].iter().zip(&d).map(|(a, d)| a + d * *si).collect();
            cur = cur.flow_to(&target)?;
            let qv = q(&cur)?;
            total += qv.iter().zip(&d).map(|(a, b)| a * b).sum::<C>() * *wi;
        }
        cur = cur.flow_to(&seg[1])?;
    }
    Ok((total, cur))
}

/// Numerical jump of `ψ` across the contour at node `node`, from points at
/// normal offsets `±ε, ±2ε, ±4ε` combined by two Richardson levels.
/// Returns `(measured, 2πi·h)`.
pub fn plemelj_jump(
    cov: &RationalCovering,
    contour: &Contour,
    density: &Density,
    node: usize,
    eps: f64,
) -> Result<(C, C)> {
    let measure = Measure::on_contour(cov, contour, density)?;
    let t = contour.params()[node % contour.nodes];
    let sol = ScalarSolution {
        state: FlowState::from_covering(cov, vec![contour.center], measure.nodes),
        weights: measure.weights,
        closed: true,
    };
    let normal = C::from_polar(1.0, t);
    let base = contour.point(t);
    let jump = |e: f64| -> Result<C> {
        let inside = sol.psi(NuPoint::Finite(base - normal * e))?;
        let outside = sol.psi(NuPoint::Finite(base + normal * e))?;
        Ok(inside - outside)
    };
    let (d1, d2, d4) = (jump(eps)?, jump(2.0 * eps)?, jump(4.0 * eps)?);
    let r1 = d1 * 2.0 - d2;
    let r2 = d2 * 2.0 - d4;
    let measured = (r1 * 4.0 - r2) / 3.0;
    Ok((measured, 2.0 * PI * I * density.eval(t)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerDarbouxReport {
    pub f: C,
    pub f_zz: C,
    pub f_rho: C,
    pub f_rhorho: C,
    pub rho: C,
    /// `f_zz + f_ρ/ρ + f_ρρ`
    pub residual: C,
    pub relative: f64,
}

/// The two-sheeted covering with branch points `ξ`, `ξ̄` (independent
/// complex inputs): pole `(ξ + ξ̄)/2`, residue `((ξ - ξ̄)/4)²`.
pub fn two_sheet_covering(xi: C, xibar: C) -> Result<RationalCovering> {
    let r = (xi - xibar) / 4.0;
    let cov = RationalCovering::new(vec![(xi + xibar) / 2.0], vec![r * r])?;
    Ok(cov)
}

/// Euler-Darboux check at the two-sheeted covering with branch points
/// `ξ, ξ̄`, base point at infinity on the second sheet (the pole), and a
/// circle of radius `radius_factor · |ξ - ξ̄|/4` around the pole.
pub fn euler_darboux_check(
    xi: C,
    xibar: C,
    density: &Density,
    radius_factor: f64,
    nodes: usize,
) -> Result<EulerDarbouxReport> {
    let cov = two_sheet_covering(xi, xibar)?;
    let mu = cov.poles()[0];
    let radius = radius_factor * ((xi - xibar) / 4.0).norm();
    let contour = Contour::circle(mu, radius, nodes)?;
    let measure = Measure::on_contour(&cov, &contour, density)?;
    let sol = ScalarSolution::new(&cov, measure, mu)?;
    // the covering's critical values come sorted; keep ξ first
    let lam = sol.state.lambdas().to_vec();
    let (i1, i2) = if (lam[0] - xi).norm() <= (lam[1] - xi).norm() { (0, 1) } else { (1, 0) };
    let mut ez = vec![ZERO; 2];
    ez[i1] = C::new(1.0, 0.0);
    ez[i2] = C::new(1.0, 0.0);
    let mut erho = vec![ZERO; 2];
    erho[i1] = I;
    erho[i2] = -I;
    let rho = (xi - xibar) / (2.0 * I);

    let scale = lam.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let h = FD_STEP_SECOND * scale;
    let along = |dir: &[C], s: f64| -> Result<Vec<C>> {
        let target: Vec<C> = lam.iter().zip(dir).map(|(l, d)| l + d * s).collect();
        Ok(vec![sol.flow_to(&target)?.f()?])
    };
    let f_zz = fd::second_derivative(|s| along(&ez, s), h)?[0];
    let f_rhorho = fd::second_derivative(|s| along(&erho, s), h)?[0];
    let f_rho = fd::derivative(|s| along(&erho, s), h)?[0];
    let residual = f_zz + f_rho / rho + f_rhorho;
    let scale = f_zz.norm() + (f_rho / rho).norm() + f_rhorho.norm();
    Ok(EulerDarbouxReport {
        f: sol.f()?,
        f_zz,
        f_rho,
        f_rhorho,
        rho,
        residual,
        relative: if scale == 0.0 { 0.0 } else { residual.norm() / scale },
    })
}
