//! Bergmann kernel on the sphere, rotation coefficients and the flat
//! diagonal metric built from the scalar tau-function.
//!
//! In the uniformizer the kernel is `dν_P dν_Q/(ν_P - ν_Q)²`. Dividing by
//! local parameters gives `b(P, Q)`: at ordinary points the parameter is λ
//! (so `dν/dλ = w`), at a ramification point it is `√(λ - λ_m)` (so
//! `dν/dx_m = κ_m`).

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::covering::{BranchData, RationalCovering};
use crate::deformation::{flow_derivative, flow_to, unit, FlowState, ModuliPath};
use crate::error::{Error, Result};
use crate::rank1::{NuPoint, ScalarSolution};
use crate::tolerances::mixed_error;

const ZERO: C = C::new(0.0, 0.0);

/// `b(P_m, P_n)` and `β_mn = b/2` for every pair; diagonals are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergmannData {
    pub b: Vec<Vec<C>>,
    pub beta: Vec<Vec<C>>,
}

impl BergmannData {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// `b(P_m, P_n) = κ_m κ_n/(γ_m - γ_n)²`.
pub fn bergmann_branch_matrix(branch: &BranchData) -> BergmannData {
    let m = branch.len();
    let mut b = vec![vec![ZERO; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let d = branch.gammas[i] - branch.gammas[j];
                b[i][j] = branch.kappas[i] * branch.kappas[j] / (d * d);
            }
        }
    }
    let beta = b.iter().map(|r| r.iter().map(|z| z * 0.5).collect()).collect();
    BergmannData { b, beta }
}

fn check_off_critical(branch: &BranchData, gamma: C) -> Result<()> {
    if let Some((index, distance)) = branch.nearest_critical(gamma) {
        if distance < 1e-12 * branch.scale() {
            return Err(Error::CriticalPointHit { index, distance });
        }
    }
    Ok(())
}

/// `B_m/dν = κ_m/(ν - γ_m)²`.
pub fn differential_b(branch: &BranchData, m: usize, gamma: C) -> Result<C> {
    check_off_critical(branch, gamma)?;
    let d = gamma - branch.gammas[m];
    Ok(branch.kappas[m] / (d * d))
}

/// `Ω_m(P) = ∫_{Q₀}^{P} B_m = κ_m [1/(ν(Q₀) - γ_m) - 1/(ν(P) - γ_m)]`.
pub fn integral_omega(branch: &BranchData, m: usize, p: NuPoint, q0: NuPoint) -> Result<C> {
    let part = |x: NuPoint| -> Result<C> {
        match x {
            NuPoint::Infinity => Ok(ZERO),
            NuPoint::Finite(nu) => {
                check_off_critical(branch, nu)?;
                Ok(C::new(1.0, 0.0) / (nu - branch.gammas[m]))
            }
        }
    };
    Ok(branch.kappas[m] * (part(q0)? - part(p)?))
}

/// `b(P, Q) = w_P w_Q/(ν_P - ν_Q)²` for two ordinary points.
pub fn bergmann_points(branch: &BranchData, p: C, q: C) -> C {
    let d = p - q;
    branch.dnu_dlambda(p) * branch.dnu_dlambda(q) / (d * d)
}

/// `b(P, P_m) = w_P κ_m/(ν_P - γ_m)²` for every m.
pub fn bergmann_to_branch(branch: &BranchData, p: C) -> Vec<C> {
    let w = branch.dnu_dlambda(p);
    branch
        .gammas
        .iter()
        .zip(&branch.kappas)
        .map(|(g, k)| {
            let d = p - g;
            w * k / (d * d)
        })
        .collect()
}

/// Worst residuals of the variational formulas, measured by
/// [`mixed_error`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RauchReport {
    /// `∂_m b(P, Q) - ½ b(P, P_m) b(Q, P_m)`
    pub points: f64,
    /// `∂_m b(P, P_n) - ½ b(P_m, P_n) b(P, P_m)`, m ≠ n
    pub mixed: f64,
    /// `Σ_k ∂_k b(P_m, P_n)`
    pub shifts: f64,
}

/// Finite differences over flows of the kernel between two fixed-projection
/// points `p`, `q` and the ramification points, against the variational
/// formulas.
pub fn rauch_check(cov: &RationalCovering, p: C, q: C) -> Result<RauchReport> {
    let branch = cov.branch();
    check_off_critical(branch, p)?;
    check_off_critical(branch, q)?;
    let st = FlowState::from_covering(cov, vec![p, q], vec![]);
    let mm = branch.len();
    let sample = |s: &FlowState| -> Result<Vec<C>> {
        let b = &s.branch;
        let (p, q) = (s.marked[0], s.marked[1]);
        let mut v = vec![bergmann_points(b, p, q)];
        v.extend(bergmann_to_branch(b, p));
        Ok(v)
    };
    let here = sample(&st)?;
    let bq = bergmann_to_branch(branch, q);
    let bmn = bergmann_branch_matrix(branch).b;
    let mut rep = RauchReport { points: 0.0, mixed: 0.0, shifts: 0.0 };
    for m in 0..mm {
        let d = flow_derivative(&st, &unit(m, mm), sample)?;
        let bp = &here[1..];
        rep.points = rep.points.max(mixed_error(d[0], 0.5 * bp[m] * bq[m]));
        for n in 0..mm {
            if n != m {
                rep.mixed = rep.mixed.max(mixed_error(d[1 + n], 0.5 * bmn[m][n] * bp[m]));
            }
        }
    }
    let ones = vec![C::new(1.0, 0.0); mm];
    let d = flow_derivative(&st, &ones, |s| Ok(flatten(&bergmann_branch_matrix(&s.branch).b)))?;
    rep.shifts = d.iter().map(|z| mixed_error(*z, ZERO)).fold(0.0, f64::max);
    Ok(rep)
}

fn flatten(a: &[Vec<C>]) -> Vec<C> {
    a.iter().flatten().copied().collect()
}

/// The diagonal metric `g_mm = ∂ ln τ/∂λ_m` with the square roots
/// `√g_m = f_m (γ_m - γ₀)/κ_m`, which inherit the continuity of `κ_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricData {
    pub g: Vec<C>,
    pub sqrt_g: Vec<C>,
    /// `v_m = Ω_m(P₀)` with the base point at infinity on the first sheet.
    pub v: Vec<C>,
}

pub fn metric(sol: &ScalarSolution) -> Result<MetricData> {
    let b = sol.branch();
    let g0 = sol.gamma0();
    let g = sol.tau_grad()?;
    let f = sol.grad_f()?;
    let v: Vec<C> = (0..b.len())
        .map(|m| integral_omega(b, m, NuPoint::Finite(g0), NuPoint::Infinity))
        .collect::<Result<_>>()?;
    let sqrt_g = f.iter().zip(&v).map(|(f, v)| f / v).collect();
    Ok(MetricData { g, sqrt_g, v })
}

/// Residuals of the flat diagonal metric identities, each the worst
/// [`mixed_error`] over the relevant pairs or triples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgoroffReport {
    pub bergmann: BergmannData,
    pub metric: MetricData,
    /// `Γ^n_{nm} = β_mn √g_m/√g_n`, diagonal zero.
    pub christoffel: Vec<Vec<C>>,
    /// `(√g_m)² = g_m`
    pub square_root: f64,
    /// `β_mn = ½ ∂_m∂_n ln τ/(√g_m √g_n)`, up to sign per pair
    pub rotation_up_to_sign: f64,
    /// `β_mn² = ¼ (∂_m∂_n ln τ)²/(g_m g_n)`
    pub rotation_squared: f64,
    /// `∂_l β_mn = β_ml β_ln`, l, m, n distinct
    pub flatness: f64,
    /// `Σ_k ∂_k β_mn = 0`
    pub shifts: f64,
    /// `Σ_k λ_k ∂_k β_mn = -β_mn`
    pub dilatation: f64,
    /// `Σ_k λ_k² ∂_k β_mn = -(λ_m + λ_n) β_mn`
    pub inversion: f64,
    /// `∂_m g_n = ∂_n g_m`
    pub egoroff_symmetry: f64,
    /// `½ ∂_m g_n/g_n = Γ^n_{nm}`
    pub christoffel_residual: f64,
    /// Set when some `g_m` is too small to fix the sign of its root.
    pub branch_ambiguity: bool,
}

impl EgoroffReport {
    /// Worst residual over all checks.
    pub fn max_residual(&self) -> f64 {
        [
            self.square_root,
            self.rotation_up_to_sign,
            self.rotation_squared,
            self.flatness,
            self.shifts,
            self.dilatation,
            self.inversion,
            self.egoroff_symmetry,
            self.christoffel_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Assemble the metric of a scalar solution and check its structure. The
/// Hessian of `ln τ` comes from finite differences over flows, independently
/// of the rotation coefficients.
pub fn egoroff_report(sol: &ScalarSolution) -> Result<EgoroffReport> {
    let branch = sol.branch();
    let mm = branch.len();
    let bergmann = bergmann_branch_matrix(branch);
    let beta = &bergmann.beta;
    let metric = metric(sol)?;
    let (g, s) = (&metric.g, &metric.sqrt_g);
    let gmax = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let branch_ambiguity = g.iter().any(|z| z.norm() <= 1e-10 * gmax) || gmax == 0.0;

    // hess[n][m] = ∂_n g_m
    let hess: Vec<Vec<C>> = (0..mm)
        .map(|n| sol.derivative_along(&unit(n, mm), |x| x.tau_grad()))
        .collect::<Result<_>>()?;
    let dbeta: Vec<Vec<C>> = (0..mm)
        .map(|l| sol.derivative_along(&unit(l, mm), |x| Ok(flatten(&bergmann_branch_matrix(x.branch()).beta))))
        .collect::<Result<_>>()?;
    let lam = branch.lambdas.clone();
    let along = |dir: Vec<C>| sol.derivative_along(&dir, |x| Ok(flatten(&bergmann_branch_matrix(x.branch()).beta)));
    let shift = along(vec![C::new(1.0, 0.0); mm])?;
    let dil = along(lam.clone())?;
    let inv = along(lam.iter().map(|l| l * l).collect())?;

    let mut christoffel = vec![vec![ZERO; mm]; mm];
    let mut rep = EgoroffReport {
        bergmann: bergmann.clone(),
        metric: metric.clone(),
        christoffel: vec![],
        square_root: g.iter().zip(s).map(|(g, s)| mixed_error(s * s, *g)).fold(0.0, f64::max),
        rotation_up_to_sign: 0.0,
        rotation_squared: 0.0,
        flatness: 0.0,
        shifts: 0.0,
        dilatation: 0.0,
        inversion: 0.0,
        egoroff_symmetry: 0.0,
        christoffel_residual: 0.0,
        branch_ambiguity,
    };
    for m in 0..mm {
        for n in 0..mm {
            if m == n {
                continue;
            }
            let bmn = beta[m][n];
            let h = hess[n][m];
            let rot = 0.5 * h / (s[m] * s[n]);
            rep.rotation_up_to_sign =
                rep.rotation_up_to_sign.max(mixed_error(bmn, rot).min(mixed_error(bmn, -rot)));
            rep.rotation_squared = rep.rotation_squared.max(mixed_error(bmn * bmn, 0.25 * h * h / (g[m] * g[n])));
            rep.egoroff_symmetry = rep.egoroff_symmetry.max(mixed_error(hess[n][m], hess[m][n]));
            christoffel[n][m] = bmn * s[m] / s[n];
            rep.christoffel_residual =
                rep.christoffel_residual.max(mixed_error(0.5 * hess[m][n] / g[n], christoffel[n][m]));
            let k = m * mm + n;
            rep.shifts = rep.shifts.max(mixed_error(shift[k], ZERO));
            rep.dilatation = rep.dilatation.max(mixed_error(dil[k], -bmn));
            rep.inversion = rep.inversion.max(mixed_error(inv[k], -(lam[m] + lam[n]) * bmn));
            for (l, dl) in dbeta.iter().enumerate() {
                if l != m && l != n {
                    rep.flatness = rep.flatness.max(mixed_error(dl[k], beta[m][l] * beta[l][n]));
                }
            }
        }
    }
    rep.christoffel = christoffel;
    Ok(rep)
}

/// Worst [`mixed_error`] between the coefficient `(b_mn/2)(v_n/v_m)` of the
/// kernel-based equation and `α_n (γ_m - γ₀)/((γ_m - γ_n)² (γ_n - γ₀))`.
pub fn genus_formalism_consistency(branch: &BranchData, gamma0: C) -> Result<f64> {
    check_off_critical(branch, gamma0)?;
    let mm = branch.len();
    let bd = bergmann_branch_matrix(branch);
    let v: Vec<C> = (0..mm)
        .map(|m| integral_omega(branch, m, NuPoint::Finite(gamma0), NuPoint::Infinity))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for m in 0..mm {
        for n in 0..mm {
            if m == n {
                continue;
            }
            let lhs = bd.b[m][n] * 0.5 * v[n] / v[m];
            let (gm, gn) = (branch.gammas[m], branch.gammas[n]);
            let rhs = branch.alphas[n] * (gm - gamma0) / ((gm - gn) * (gm - gn) * (gn - gamma0));
            worst = worst.max(mixed_error(lhs, rhs));
        }
    }
    Ok(worst)
}

/// One row of a rotation-coefficient scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaSample {
    pub lambdas: Vec<C>,
    pub beta: Vec<Vec<C>>,
}

/// `β` along a sequence of branch-point configurations, each reached from the
/// previous one by a straight flow.
pub fn beta_scan(cov: &RationalCovering, targets: &[Vec<C>]) -> Result<Vec<BetaSample>> {
    let mut st = FlowState::from_covering(cov, vec![], vec![]);
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        ModuliPath::straight(st.lambdas(), t)?;
        st = flow_to(&st, t)?;
        out.push(BetaSample { lambdas: st.lambdas().to_vec(), beta: bergmann_branch_matrix(&st.branch).beta });
    }
    Ok(out)
}
