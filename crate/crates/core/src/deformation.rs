//! Moving branch points: the deformation flow of a covering and everything
//! transported along it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use crate::covering::{min_pairwise, BranchData, RationalCovering};
use crate::error::{Error, Result};
use crate::fd;
use crate::ode::{integrate, OdeOptions};
use crate::tolerances::{FD_STEP, GENERICITY};

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Polyline in branch-point space, each segment traversed linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliPath {
    vertices: Vec<Vec<C>>,
    pub collision_margin: f64,
}

impl ModuliPath {
    pub fn new(vertices: Vec<Vec<C>>, collision_margin: f64) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidArgument("path needs at least one vertex".into()));
        };
        let m = first.len();
        if vertices.iter().any(|v| v.len() != m) {
            return Err(Error::InvalidArgument("path vertices differ in dimension".into()));
        }
        if !(collision_margin > 0.0) {
            return Err(Error::InvalidArgument("collision margin must be positive".into()));
        }
        let path = ModuliPath { vertices, collision_margin };
        for w in path.vertices.windows(2) {
            for i in 0..m {
                for j in i + 1..m {
                    // λ_i - λ_j is linear along a segment
                    let a = w[0][i] - w[0][j];
                    let b = w[1][i] - w[1][j];
                    let d = segment_origin_distance(a, b);
                    if d < collision_margin {
                        return Err(Error::CriticalCollision(format!(
                            "branch points {i} and {j} come within {d:e} along the path"
                        )));
                    }
                }
            }
        }
        Ok(path)
    }

    /// Straight segment with the default margin.
    pub fn straight(from: &[C], to: &[C]) -> Result<Self> {
        Self::new(vec![from.to_vec(), to.to_vec()], default_margin(from))
    }

    /// Polyline `from → targets[0] → targets[1] → …`.
    pub fn through(from: &[C], targets: &[Vec<C>]) -> Result<Self> {
        let mut v = vec![from.to_vec()];
        v.extend(targets.iter().cloned());
        Self::new(v, default_margin(from))
    }

    /// Closed polygon through the given vertices, returning to the first.
    pub fn closed(mut vertices: Vec<Vec<C>>) -> Result<Self> {
        let first = vertices
            .first()
            .cloned()
            .ok_or_else(|| Error::InvalidArgument("empty loop".into()))?;
        let margin = default_margin(&first);
        vertices.push(first);
        Self::new(vertices, margin)
    }

    pub fn vertices(&self) -> &[Vec<C>] {
        &self.vertices
    }

    pub fn start(&self) -> &[C] {
        &self.vertices[0]
    }

    pub fn end(&self) -> &[C] {
        self.vertices.last().expect("non-empty path")
    }
}

fn default_margin(lambdas: &[C]) -> f64 {
    GENERICITY * lambdas.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn segment_origin_distance(a: C, b: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let t = (-(a * ab.conj()).re / len2).clamp(0.0, 1.0);
    (a + ab * t).norm()
}

/// Covering data transported along a flow, with any number of marked
/// points and contour nodes whose λ-projections stay fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub branch: BranchData,
    pub poles: Vec<C>,
    pub residues: Vec<C>,
    pub marked: Vec<C>,
    pub contour: Vec<C>,
}

impl FlowState {
    pub fn from_covering(cov: &RationalCovering, marked: Vec<C>, contour: Vec<C>) -> Self {
        FlowState {
            branch: cov.branch().clone(),
            poles: cov.poles().to_vec(),
            residues: cov.residues().to_vec(),
            marked,
            contour,
        }
    }

    pub fn lambdas(&self) -> &[C] {
        &self.branch.lambdas
    }

    /// The covering described by the transported poles and residues, with
    /// critical points labelled as in the flow.
    pub fn covering(&self) -> Result<RationalCovering> {
        RationalCovering::with_labels(
            self.poles.clone(),
            self.residues.clone(),
            &self.branch.gammas,
            &self.branch.kappas,
        )
    }
}

/// Quantities available to a coupled right-hand side at one instant.
pub struct Motion<'a> {
    pub branch: &'a BranchData,
    /// `dλ/ds` on the current segment.
    pub dlambda: &'a [C],
    pub marked: &'a [C],
    /// `dν/ds` of each marked point.
    pub dmarked: &'a [C],
}

struct Layout {
    m: usize,
    p: usize,
    marked: usize,
    contour: usize,
}

impl Layout {
    fn of(s: &FlowState) -> Self {
        Layout { m: s.branch.len(), p: s.poles.len(), marked: s.marked.len(), contour: s.contour.len() }
    }
    fn base(&self) -> usize {
        2 * self.m + 2 * self.p + self.marked + self.contour
    }
}

fn pack(s: &FlowState, extra: &[C]) -> Vec<C> {
    let mut y = Vec::with_capacity(Layout::of(s).base() + extra.len());
    y.extend(&s.branch.gammas);
    y.extend(&s.branch.kappas);
    y.extend(&s.poles);
    y.extend(&s.residues);
    y.extend(&s.marked);
    y.extend(&s.contour);
    y.extend(extra);
    y
}

fn unpack(y: &[C], lay: &Layout, lambdas: Vec<C>) -> FlowState {
    let (m, p) = (lay.m, lay.p);
    let mut o = 0;
    let mut take = |n: usize| {
        let v = y[o..o + n].to_vec();
        o += n;
        v
    };
    let gammas = take(m);
    let kappas = take(m);
    let poles = take(p);
    let residues = take(p);
    let marked = take(lay.marked);
    let contour = take(lay.contour);
    let alphas = kappas.iter().map(|k| k * k / 2.0).collect();
    FlowState {
        branch: BranchData { lambdas, gammas, alphas, kappas },
        poles,
        residues,
        marked,
        contour,
    }
}

/// Velocity of a point with fixed projection: `-Σ α_n d_n/(ν - γ_n)`.
fn fixed_point_velocity(gammas: &[C], alphas: &[C], d: &[C], nu: C) -> C {
    gammas
        .iter()
        .zip(alphas)
        .zip(d)
        .fold(ZERO, |acc, ((g, a), dn)| acc - a * dn / (nu - g))
}

fn base_rhs(y: &[C], lay: &Layout, d: &[C], dy: &mut [C]) {
    let m = lay.m;
    let gammas = &y[..m];
    let kappas = &y[m..2 * m];
    let alphas: Vec<C> = kappas.iter().map(|k| k * k / 2.0).collect();
    for i in 0..m {
        let mut dg = d[i];
        let mut dk = ZERO;
        for n in 0..m {
            if n == i {
                continue;
            }
            let diff = gammas[n] - gammas[i];
            dg += alphas[n] * (d[n] - d[i]) / diff;
            dk += alphas[n] * kappas[i] * (d[n] - d[i]) / (diff * diff);
        }
        dy[i] = dg;
        dy[m + i] = dk;
    }
    let po = 2 * m;
    for k in 0..lay.p {
        let mu = y[po + k];
        let r = y[po + lay.p + k];
        dy[po + k] = fixed_point_velocity(gammas, &alphas, d, mu);
        let mut dr = ZERO;
        for n in 0..m {
            let q = mu - gammas[n];
            dr += alphas[n] * r * d[n] / (q * q);
        }
        dy[po + lay.p + k] = dr;
    }
    let start = 2 * m + 2 * lay.p;
    for i in start..lay.base() {
        dy[i] = fixed_point_velocity(gammas, &alphas, d, y[i]);
    }
}

fn check_collisions(y: &[C], lay: &Layout, margin: f64) -> Result<()> {
    let gammas = &y[..lay.m];
    let sep = min_pairwise(gammas);
    if sep < margin {
        return Err(Error::CriticalCollision(format!("critical points within {sep:e}")));
    }
    let start = 2 * lay.m + 2 * lay.p;
    for (k, nu) in y[start..lay.base()].iter().enumerate() {
        for (i, g) in gammas.iter().enumerate() {
            let dist = (nu - g).norm();
            if dist < margin {
                let what = if k < lay.marked { "marked point" } else { "contour node" };
                return Err(Error::CriticalCollision(format!(
                    "{what} {} within {dist:e} of critical point {i}",
                    if k < lay.marked { k } else { k - lay.marked }
                )));
            }
        }
    }
    Ok(())
}

/// Flow the state along the path.
pub fn flow(state: &FlowState, path: &ModuliPath) -> Result<FlowState> {
    flow_coupled(state, path, &mut [], |_, _, _| Ok(()))
}

/// Flow along the straight segment to `target`.
pub fn flow_to(state: &FlowState, target: &[C]) -> Result<FlowState> {
    let path = ModuliPath::straight(state.lambdas(), target)?;
    flow(state, &path)
}

/// Flow with additional dynamics: `extra` is integrated alongside the
/// covering with `d extra/ds = rhs(motion, extra)`.
pub fn flow_coupled<F>(
    state: &FlowState,
    path: &ModuliPath,
    extra: &mut [C],
    mut rhs: F,
) -> Result<FlowState>
where
    F: FnMut(&Motion, &[C], &mut [C]) -> Result<()>,
{
    let m = state.branch.len();
    if path.start().len() != m {
        return Err(Error::InvalidArgument(format!(
            "path has {} branch points, covering has {m}",
            path.start().len()
        )));
    }
    let scale = state.branch.scale();
    let start_gap = path
        .start()
        .iter()
        .zip(&state.branch.lambdas)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if start_gap > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!(
            "path starts {start_gap:e} away from the covering's branch points"
        )));
    }
    let lay = Layout::of(state);
    let nb = lay.base();
    let mut y = pack(state, extra);
    let opts = OdeOptions::default();
    let mut lambdas = state.branch.lambdas.clone();

    for seg in path.vertices().windows(2) {
        let a = &seg[0];
        let d: Vec<C> = seg[1].iter().zip(a).map(|(b, a)| b - a).collect();
        if d.iter().all(|z| *z == ZERO) {
            continue;
        }
        let margin = path.collision_margin;
        integrate(
            |s, y, dy| {
                base_rhs(y, &lay, &d, dy);
                if y.len() > nb {
                    let lam: Vec<C> = a.iter().zip(&d).map(|(a, d)| a + d * s).collect();
                    let kappas = &y[m..2 * m];
                    let branch = BranchData {
                        lambdas: lam,
                        gammas: y[..m].to_vec(),
                        alphas: kappas.iter().map(|k| k * k / 2.0).collect(),
                        kappas: kappas.to_vec(),
                    };
                    let mo = 2 * m + 2 * lay.p;
                    let motion = Motion {
                        branch: &branch,
                        dlambda: &d,
                        marked: &y[mo..mo + lay.marked],
                        dmarked: &dy[mo..mo + lay.marked].to_vec(),
                    };
                    let (_, tail) = dy.split_at_mut(nb);
                    rhs(&motion, &y[nb..], tail)?;
                }
                Ok(())
            },
            &mut y,
            0.0,
            1.0,
            &opts,
            |_, y| check_collisions(y, &lay, margin),
        )?;
        lambdas = seg[1].clone();
    }
    extra.copy_from_slice(&y[nb..]);
    Ok(unpack(&y, &lay, lambdas))
}

/// Directional derivative over genuine flows: `d/ds F(flow(state, λ + s·dir))`
/// at `s = 0`, by central differences with one Richardson level.
pub fn flow_derivative<F>(state: &FlowState, dir: &[C], mut f: F) -> Result<Vec<C>>
where
    F: FnMut(&FlowState) -> Result<Vec<C>>,
{
    let scale = state.lambdas().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dn = dir.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dn == 0.0 {
        let v = f(state)?;
        return Ok(vec![ZERO; v.len()]);
    }
    let h = FD_STEP * scale / dn;
    fd::derivative(
        |s| {
            let target: Vec<C> = state.lambdas().iter().zip(dir).map(|(l, d)| l + d * s).collect();
            f(&flow_to(state, &target)?)
        },
        h,
    )
}

/// Unit coordinate direction `e_m` in `C^M`.
pub fn unit(m: usize, len: usize) -> Vec<C> {
    let mut e = vec![ZERO; len];
    e[m] = ONE;
    e
}

/// Solve for the covering whose critical values are `targets` by Newton on
/// `(r_k, μ_k, γ_m)` with equations `R'(γ_m) = 0`, `R(γ_m) = λ_m`, starting
/// from `seed` and continuing in the blended target when a full step fails.
/// Branches of `κ_m` follow `state`.
pub fn reconstruct_map(
    state: &FlowState,
    targets: &[C],
    seed: &RationalCovering,
) -> Result<RationalCovering> {
    let p = seed.poles().len();
    let m = seed.gammas().len();
    if targets.len() != m || state.branch.len() != m {
        return Err(Error::InvalidArgument(format!(
            "expected {m} targets, got {}",
            targets.len()
        )));
    }
    let mut x: Vec<C> = seed
        .residues()
        .iter()
        .chain(seed.poles())
        .chain(seed.gammas())
        .copied()
        .collect();
    let from = seed.lambdas().to_vec();
    let scale = seed.scale().max(targets.iter().map(|z| z.norm()).fold(1.0, f64::max));
    let mut tau = 0.0f64;
    let mut dtau = 1.0f64;
    while tau < 1.0 {
        let next = (tau + dtau).min(1.0);
        let goal: Vec<C> = from.iter().zip(targets).map(|(a, b)| a + (b - a) * next).collect();
        match newton_branch_points(&x, p, &goal, scale) {
            Ok(sol) => {
                x = sol;
                tau = next;
                dtau = (dtau * 2.0).min(1.0);
            }
            Err(Error::JacobianSingular(msg)) => return Err(Error::JacobianSingular(msg)),
            Err(e) => {
                dtau /= 2.0;
                if dtau < 1.0 / 1024.0 {
                    return Err(match e {
                        Error::NewtonDivergence(s) => Error::NewtonDivergence(s),
                        other => Error::NewtonDivergence(other.to_string()),
                    });
                }
            }
        }
    }
    let residues = x[..p].to_vec();
    let poles = x[p..2 * p].to_vec();
    let gammas = x[2 * p..].to_vec();
    RationalCovering::with_labels(poles, residues, &gammas, &state.branch.kappas)
}

fn newton_branch_points(x0: &[C], p: usize, goal: &[C], scale: f64) -> Result<Vec<C>> {
    let m = goal.len();
    let n = 2 * p + m;
    let mut x = x0.to_vec();
    let residual = |x: &[C]| -> Vec<C> {
        let (r, mu, g) = (&x[..p], &x[p..2 * p], &x[2 * p..]);
        let mut f = Vec::with_capacity(2 * m);
        for gm in g {
            f.push(mu.iter().zip(r).fold(ONE, |a, (mk, rk)| a - rk / ((gm - mk) * (gm - mk))));
        }
        for (gm, l) in g.iter().zip(goal) {
            f.push(mu.iter().zip(r).fold(*gm, |a, (mk, rk)| a + rk / (gm - mk)) - l);
        }
        f
    };
    let norm = |f: &[C]| f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut f = residual(&x);
    let mut fnorm = norm(&f);
    for _ in 0..40 {
        if fnorm < 1e-14 * scale {
            return Ok(x);
        }
        let (r, mu, g) = (&x[..p], &x[p..2 * p], &x[2 * p..]);
        let mut jac = DMatrix::<C>::zeros(2 * m, n);
        for (i, gm) in g.iter().enumerate() {
            let mut second = ZERO;
            let mut slope = ONE;
            for k in 0..p {
                let q = gm - mu[k];
                jac[(i, k)] = -ONE / (q * q);
                jac[(i, p + k)] = -r[k] * 2.0 / (q * q * q);
                jac[(m + i, k)] = ONE / q;
                jac[(m + i, p + k)] = r[k] / (q * q);
                second += r[k] * 2.0 / (q * q * q);
                slope -= r[k] / (q * q);
            }
            jac[(i, 2 * p + i)] = second;
            jac[(m + i, 2 * p + i)] = slope;
        }
        let rhs = DVector::from_iterator(2 * m, f.iter().map(|z| -z));
        let dx = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::JacobianSingular("branch-point Newton system".into()))?;
        if dx.iter().any(|z| !z.is_finite()) {
            return Err(Error::JacobianSingular("branch-point Newton system".into()));
        }
        let trial: Vec<C> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
        let ft = residual(&trial);
        let tn = norm(&ft);
        if !(tn < fnorm) && fnorm > 1e-12 * scale {
            return Err(Error::NewtonDivergence(format!("residual stalled at {fnorm:e}")));
        }
        x = trial;
        f = ft;
        fnorm = tn;
    }
    if fnorm < 1e-11 * scale {
        Ok(x)
    } else {
        Err(Error::NewtonDivergence(format!("residual {fnorm:e} after 40 iterations")))
    }
}

/// Parametrization of a single branch point by one real or complex variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchCurve {
    Constant(C),
    /// `offset + slope · p`
    Linear { offset: C, slope: C },
}

impl BranchCurve {
    pub fn value(&self, p: C) -> C {
        match self {
            BranchCurve::Constant(c) => *c,
            BranchCurve::Linear { offset, slope } => offset + slope * p,
        }
    }

    pub fn derivative(&self) -> C {
        match self {
            BranchCurve::Constant(_) => ZERO,
            BranchCurve::Linear { slope, .. } => *slope,
        }
    }
}

/// Branch points split into an `x`-family and a `y`-family.
#[derive(Debug, Clone, PartialEq)]
pub struct BmzSplit {
    pub x_indices: Vec<usize>,
    pub y_indices: Vec<usize>,
    /// One curve per branch point, indexed like the covering's `λ_m`.
    pub curves: Vec<BranchCurve>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmzReport {
    /// `c_n = α_n ∂λ_n/∂x` for the `x`-family.
    pub c: Vec<C>,
    /// `b_m = α_m ∂λ_m/∂y` for the `y`-family.
    pub b: Vec<C>,
    /// Max residuals of the four transport equations, in the order:
    /// `γ_n` in `y`, `c_n` in `y`, `γ_m` in `x`, `b_m` in `x`.
    pub residuals: [f64; 4],
    pub state: FlowState,
}

impl BmzSplit {
    fn validate(&self, m: usize) -> Result<()> {
        let mut seen = vec![0u8; m];
        for &i in self.x_indices.iter().chain(&self.y_indices) {
            if i >= m {
                return Err(Error::InvalidArgument(format!("index {i} out of range")));
            }
            seen[i] += 1;
        }
        if seen.iter().any(|&s| s != 1) || self.curves.len() != m {
            return Err(Error::InvalidArgument(
                "x and y index sets must partition the branch points".into(),
            ));
        }
        Ok(())
    }

    fn lambdas(&self, x: C, y: C) -> Vec<C> {
        let mut l: Vec<C> = self.curves.iter().map(|c| c.value(ZERO)).collect();
        for &i in &self.x_indices {
            l[i] = self.curves[i].value(x);
        }
        for &i in &self.y_indices {
            l[i] = self.curves[i].value(y);
        }
        l
    }
}

/// Realize the split deformation at `(x, y)` and check its transport
/// equations by finite differences over flows.
pub fn bmz_realize(cov: &RationalCovering, split: &BmzSplit, x: C, y: C) -> Result<BmzReport> {
    let m = cov.gammas().len();
    split.validate(m)?;
    let start = FlowState::from_covering(cov, vec![], vec![]);
    let state = flow_to(&start, &split.lambdas(x, y))?;

    let weights = |s: &FlowState, idx: &[usize]| -> Vec<C> {
        idx.iter().map(|&i| s.branch.alphas[i] * split.curves[i].derivative()).collect()
    };
    let c = weights(&state, &split.x_indices);
    let b = weights(&state, &split.y_indices);

    // direction of motion in λ-space when y (resp. x) moves
    let dir = |idx: &[usize]| -> Vec<C> {
        let mut d = vec![ZERO; m];
        for &i in idx {
            d[i] = split.curves[i].derivative();
        }
        d
    };
    // positions and weights of one family, differentiated along the other
    let gather = |s: &FlowState, own: &[usize]| -> Vec<C> {
        let mut v: Vec<C> = own.iter().map(|&i| s.branch.gammas[i]).collect();
        v.extend(own.iter().map(|&i| s.branch.alphas[i] * split.curves[i].derivative()));
        v
    };
    let dy = flow_derivative(&state, &dir(&split.y_indices), |s| Ok(gather(s, &split.x_indices)))?;
    let dx = flow_derivative(&state, &dir(&split.x_indices), |s| Ok(gather(s, &split.y_indices)))?;

    let g = &state.branch.gammas;
    let transport = |own: &[usize], other: &[usize], wo: &[C], ws: &[C], d: &[C]| -> (f64, f64) {
        let k = own.len();
        let mut r_pos = 0.0f64;
        let mut r_w = 0.0f64;
        for (a, &i) in own.iter().enumerate() {
            let mut s1 = ZERO;
            let mut s2 = ZERO;
            for (bidx, &j) in other.iter().enumerate() {
                let q = g[i] - g[j];
                s1 += wo[bidx] / q;
                s2 += wo[bidx] / (q * q);
            }
            r_pos = r_pos.max((d[a] + s1).norm());
            r_w = r_w.max((d[k + a] - ws[a] * 2.0 * s2).norm());
        }
        (r_pos, r_w)
    };
    let (r1, r2) = transport(&split.x_indices, &split.y_indices, &b, &c, &dy);
    let (r3, r4) = transport(&split.y_indices, &split.x_indices, &c, &b, &dx);
    Ok(BmzReport { c, b, residuals: [r1, r2, r3, r4], state })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn two_sheet_state() -> (RationalCovering, FlowState) {
        let cov = RationalCovering::new(vec![c(2.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let st = FlowState::from_covering(&cov, vec![], vec![]);
        (cov, st)
    }

    #[test]
    fn two_sheet_flow_matches_closed_form() {
        let (_, st) = two_sheet_state();
        let end = flow_to(&st, &[c(0.2, 0.0), c(4.0, 0.0)]).unwrap();
        assert!((end.branch.gammas[0] - c(1.15, 0.0)).norm() < 1e-9);
        assert!((end.branch.gammas[1] - c(3.05, 0.0)).norm() < 1e-9);
        assert!((end.branch.alphas[0] - c(-0.475, 0.0)).norm() < 1e-9);
        assert!((end.branch.alphas[1] - c(0.475, 0.0)).norm() < 1e-9);
        assert!((end.poles[0] - c(2.1, 0.0)).norm() < 1e-9);
        assert!((end.residues[0] - c(0.9025, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_length_path_is_identity() {
        let (_, st) = two_sheet_state();
        let end = flow_to(&st, &st.lambdas().to_vec()).unwrap();
        assert_eq!(end, st);
    }

    #[test]
    fn reconstruct_two_sheet() {
        let (cov, st) = two_sheet_state();
        let target = [c(0.2, 0.0), c(4.0, 0.0)];
        let end = flow_to(&st, &target).unwrap();
        let rec = reconstruct_map(&end, &target, &cov).unwrap();
        assert!((rec.poles()[0] - c(2.1, 0.0)).norm() < 1e-12);
        assert!((rec.residues()[0] - c(0.9025, 0.0)).norm() < 1e-12);
        let same = reconstruct_map(&st, cov.lambdas(), &cov).unwrap();
        assert!((same.poles()[0] - cov.poles()[0]).norm() < 1e-12);
    }

    #[test]
    fn collision_is_reported() {
        let (_, st) = two_sheet_state();
        let res = flow_to(&st, &[c(4.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(res, Err(Error::CriticalCollision(_))));
    }

    #[test]
    fn bmz_two_sheet() {
        let (cov, _) = two_sheet_state();
        let split = BmzSplit {
            x_indices: vec![0],
            y_indices: vec![1],
            curves: vec![
                BranchCurve::Linear { offset: ZERO, slope: ONE },
                BranchCurve::Linear { offset: ZERO, slope: ONE },
            ],
        };
        let (x, y) = (c(0.3, 0.0), c(3.7, 0.1));
        let rep = bmz_realize(&cov, &split, x, y).unwrap();
        assert!((rep.c[0] - (x - y) / 8.0).norm() < 1e-9);
        assert!((rep.b[0] - (y - x) / 8.0).norm() < 1e-9);
        assert!(rep.residuals.iter().all(|r| *r < 1e-6), "{:?}", rep.residuals);

        let frozen = BmzSplit {
            curves: vec![BranchCurve::Constant(ZERO), BranchCurve::Constant(c(4.0, 0.0))],
            ..split
        };
        let rep = bmz_realize(&cov, &frozen, x, y).unwrap();
        assert!(rep.b[0] == ZERO && rep.c[0] == ZERO);
        assert!(rep.residuals.iter().all(|r| *r == 0.0));
    }
}
