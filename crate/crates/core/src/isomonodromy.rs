//! Schlesinger systems pulled back to the branch-point coordinates, the
//! matrix hierarchy they generate and the Jimbo-Miwa tau-function.
//!
//! `dΨ/dγ = A(γ)Ψ` with `A(γ) = Σ A_j/(γ - z_j)` and `Σ A_j = 0`. Two
//! normalizations are supported. In [`Frame::Infinity`] the residues are
//! those of the solution equal to `I` at `γ = ∞`; in [`Frame::Base`] they are
//! conjugated by that solution's value at `γ₀`, so that `Ψ(γ₀) = I`. The
//! poles and `γ₀` are points of the covering with fixed projections.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::covering::{BranchData, RationalCovering};
use crate::deformation::{flow_coupled, unit, FlowState, ModuliPath, Motion};
use crate::error::{Error, Result};
use crate::fd;
use crate::ode::{integrate, OdeOptions};
use crate::quad::gauss_legendre01;
use crate::tolerances::FD_STEP;

type Mat = DMatrix<C>;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Infinity,
    #[default]
    Base,
}

fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

fn trace(a: &Mat) -> C {
    a.diagonal().iter().sum()
}

fn norm(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rows of a matrix, for reports.
pub fn to_rows(a: &Mat) -> Vec<Vec<C>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// Matrix from rows; every row must have the same length as the row count.
pub fn from_rows(rows: &[Vec<C>]) -> Result<Mat> {
    let r = rows.len();
    if r == 0 || rows.iter().any(|row| row.len() != r) {
        return Err(Error::InvalidArgument("residue matrices must be square and non-empty".into()));
    }
    Ok(Mat::from_fn(r, r, |i, j| rows[i][j]))
}

/// Poles, residues and base point of a Schlesinger system.
#[derive(Debug, Clone, PartialEq)]
pub struct SchlesingerState {
    pub z: Vec<C>,
    pub a: Vec<Mat>,
    pub gamma0: C,
    pub frame: Frame,
}

impl SchlesingerState {
    pub fn new(z: Vec<C>, a: Vec<Mat>, gamma0: C, frame: Frame) -> Result<Self> {
        if z.len() != a.len() || z.is_empty() {
            return Err(Error::InvalidArgument(format!("{} poles, {} residues", z.len(), a.len())));
        }
        let r = a[0].nrows();
        if a.iter().any(|m| m.nrows() != r || m.ncols() != r) {
            return Err(Error::InvalidArgument("residues must share one square shape".into()));
        }
        let s = SchlesingerState { z, a, gamma0, frame };
        let scale = s.a.iter().map(norm).fold(1.0, f64::max);
        if s.residue_sum() > 1e-9 * scale {
            return Err(Error::InvalidArgument(format!("residues sum to {:e}, not zero", s.residue_sum())));
        }
        s.check_poles()?;
        resonance_guard(&s.a)?;
        Ok(s)
    }

    pub fn rank(&self) -> usize {
        self.a[0].nrows()
    }

    fn scale(&self) -> f64 {
        self.z.iter().chain([&self.gamma0]).map(|z| z.norm()).fold(1.0, f64::max)
    }

    fn check_poles(&self) -> Result<()> {
        let tiny = 1e-12 * self.scale();
        for j in 0..self.z.len() {
            for k in j + 1..self.z.len() {
                if (self.z[j] - self.z[k]).norm() < tiny {
                    return Err(Error::PoleCollision(format!("poles {j} and {k} coincide")));
                }
            }
            if (self.z[j] - self.gamma0).norm() < tiny {
                return Err(Error::PoleCollision(format!("base point on pole {j}")));
            }
        }
        Ok(())
    }

    /// `‖Σ A_j‖`
    pub fn residue_sum(&self) -> f64 {
        let r = self.a[0].nrows();
        norm(&self.a.iter().fold(Mat::zeros(r, r), |s, m| s + m))
    }

    /// `tr A_j²` for every pole.
    pub fn casimirs(&self) -> Vec<C> {
        self.a.iter().map(|m| trace(&(m * m))).collect()
    }

    /// `A(γ) = Σ A_j/(γ - z_j)`
    pub fn a_at(&self, gamma: C) -> Mat {
        let r = self.rank();
        self.a.iter().zip(&self.z).fold(Mat::zeros(r, r), |s, (m, z)| s + m / (gamma - z))
    }
}

/// Reject residues with eigenvalues differing by a nonzero integer.
pub fn resonance_guard(a: &[Mat]) -> Result<()> {
    for (index, m) in a.iter().enumerate() {
        if m.nrows() < 2 {
            continue;
        }
        let (_, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
        let ev: Vec<C> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
        for i in 0..ev.len() {
            for j in i + 1..ev.len() {
                let d = ev[i] - ev[j];
                let k = d.re.round();
                if k != 0.0 && (d - k).norm() < 1e-8 {
                    return Err(Error::ResonantResidue { index });
                }
            }
        }
    }
    Ok(())
}

/// `d[k][j] = ∂A_j/∂z_k`. Off the diagonal `[A_j, A_k]/(z_j - z_k)`, minus
/// `[A_j, A_k]/(γ₀ - z_k)` in the base frame; on the diagonal
/// `-Σ_{l≠j} [A_j, A_l]/(z_j - z_l)` in both frames.
pub fn schlesinger_rhs(state: &SchlesingerState) -> Result<Vec<Vec<Mat>>> {
    state.check_poles()?;
    let l = state.z.len();
    let (z, a, g0) = (&state.z, &state.a, state.gamma0);
    let r = state.rank();
    let mut d = vec![vec![Mat::zeros(r, r); l]; l];
    for k in 0..l {
        for j in 0..l {
            if j == k {
                let mut s = Mat::zeros(r, r);
                for m in 0..l {
                    if m != j {
                        s -= commutator(&a[j], &a[m]) / (z[j] - z[m]);
                    }
                }
                d[k][j] = s;
            } else {
                let mut w = C::new(1.0, 0.0) / (z[j] - z[k]);
                if state.frame == Frame::Base {
                    w -= C::new(1.0, 0.0) / (g0 - z[k]);
                }
                d[k][j] = commutator(&a[j], &a[k]) * w;
            }
        }
    }
    Ok(d)
}

/// `∂A_j/∂γ₀ = [A_j, A(γ₀)]` in the base frame, zero at infinity.
pub fn base_point_rhs(state: &SchlesingerState) -> Vec<Mat> {
    let r = state.rank();
    match state.frame {
        Frame::Infinity => vec![Mat::zeros(r, r); state.z.len()],
        Frame::Base => {
            let a0 = state.a_at(state.gamma0);
            state.a.iter().map(|m| commutator(m, &a0)).collect()
        }
    }
}

/// `∂ ln τ_JM/∂z_j = Σ_{k≠j} tr(A_j A_k)/(z_j - z_k)`.
pub fn jm_tau_grad(state: &SchlesingerState) -> Vec<C> {
    let l = state.z.len();
    (0..l)
        .map(|j| {
            (0..l)
                .filter(|k| *k != j)
                .map(|k| trace(&(&state.a[j] * &state.a[k])) / (state.z[j] - state.z[k]))
                .sum()
        })
        .collect()
}

/// The same gradient as half the residue of `tr A(γ)²` at each pole, by a
/// trapezoid rule on a small circle.
pub fn jm_tau_grad_residue(state: &SchlesingerState) -> Vec<C> {
    let l = state.z.len();
    let nodes = 64;
    (0..l)
        .map(|j| {
            let clear = state
                .z
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, z)| (z - state.z[j]).norm())
                .fold(f64::INFINITY, f64::min);
            let rho = 0.3 * clear;
            let mut acc = ZERO;
            for i in 0..nodes {
                let e = C::from_polar(1.0, std::f64::consts::TAU * i as f64 / nodes as f64);
                let a = state.a_at(state.z[j] + e * rho);
                acc += trace(&(&a * &a)) * e * rho;
            }
            acc / nodes as f64 * 0.5
        })
        .collect()
}

/// Fixed-seed traceless residues with Frobenius norms at most one and
/// `Σ A_j = 0`, away from resonance.
pub fn random_residues<R: Rng>(rng: &mut R, rank: usize, count: usize) -> Vec<Mat> {
    assert!(count >= 2, "need at least two residues");
    loop {
        let mut a: Vec<Mat> = (0..count - 1)
            .map(|_| {
                let mut m = Mat::from_fn(rank, rank, |_, _| {
                    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                let t = trace(&m) / rank as f64;
                for i in 0..rank {
                    m[(i, i)] -= t;
                }
                let n = norm(&m);
                let target = rng.gen_range(0.3..1.0) / (count - 1) as f64;
                if n > 0.0 {
                    m *= C::new(target / n, 0.0);
                }
                m
            })
            .collect();
        let last = -a.iter().fold(Mat::zeros(rank, rank), |s, m| s + m);
        a.push(last);
        let far = a.iter().all(|m| {
            if rank < 2 {
                return true;
            }
            let (_, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
            (0..rank).all(|i| {
                (i + 1..rank).all(|j| {
                    let d = t[(i, i)] - t[(j, j)];
                    d.re.round() == 0.0 || (d - d.re.round()).norm() > 0.05
                })
            })
        });
        if far {
            return a;
        }
    }
}

/// A Schlesinger system whose poles and base point sit over fixed
/// projections of a covering and move with its branch points.
#[derive(Debug, Clone, PartialEq)]
pub struct Pullback {
    /// Marked points are the poles followed by the base point.
    pub flow: FlowState,
    pub residues: Vec<Mat>,
    pub frame: Frame,
}

impl Pullback {
    pub fn new(cov: &RationalCovering, anchors: &[C], gamma0: C, residues: Vec<Mat>, frame: Frame) -> Result<Self> {
        let branch = cov.branch();
        for (j, z) in anchors.iter().chain([&gamma0]).enumerate() {
            cov.eval(*z)?;
            if let Some((_, d)) = branch.nearest_critical(*z) {
                if d < 1e-9 * cov.scale() {
                    return Err(Error::AnchorAtBranchPoint(j));
                }
            }
        }
        SchlesingerState::new(anchors.to_vec(), residues.clone(), gamma0, frame)?;
        let mut marked = anchors.to_vec();
        marked.push(gamma0);
        Ok(Pullback { flow: FlowState::from_covering(cov, marked, vec![]), residues, frame })
    }

    pub fn branch(&self) -> &BranchData {
        &self.flow.branch
    }

    pub fn poles(&self) -> &[C] {
        &self.flow.marked[..self.residues.len()]
    }

    pub fn gamma0(&self) -> C {
        self.flow.marked[self.residues.len()]
    }

    pub fn schlesinger(&self) -> SchlesingerState {
        SchlesingerState {
            z: self.poles().to_vec(),
            a: self.residues.clone(),
            gamma0: self.gamma0(),
            frame: self.frame,
        }
    }

    /// Co-integrate the covering flow and the Schlesinger equations along
    /// the induced motion of the poles and the base point.
    pub fn flow(&self, path: &ModuliPath) -> Result<Pullback> {
        let l = self.residues.len();
        let r = self.residues[0].nrows();
        let rr = r * r;
        let frame = self.frame;
        let mut extra: Vec<C> = self.residues.iter().flat_map(|m| m.iter().copied()).collect();
        let flow = flow_coupled(&self.flow, path, &mut extra, |mo: &Motion, y: &[C], dy: &mut [C]| {
            let a: Vec<Mat> = (0..l).map(|j| Mat::from_column_slice(r, r, &y[j * rr..(j + 1) * rr])).collect();
            let st = SchlesingerState { z: mo.marked[..l].to_vec(), a, gamma0: mo.marked[l], frame };
            let d = schlesinger_rhs(&st)?;
            let g = base_point_rhs(&st);
            for j in 0..l {
                let mut da = &g[j] * mo.dmarked[l];
                for (k, dk) in d.iter().enumerate() {
                    da += &dk[j] * mo.dmarked[k];
                }
                dy[j * rr..(j + 1) * rr].copy_from_slice(da.as_slice());
            }
            Ok(())
        })?;
        let residues = (0..l).map(|j| Mat::from_column_slice(r, r, &extra[j * rr..(j + 1) * rr])).collect();
        Ok(Pullback { flow, residues, frame })
    }

    pub fn flow_to(&self, target: &[C]) -> Result<Pullback> {
        self.flow(&ModuliPath::straight(self.flow.lambdas(), target)?)
    }

    /// `J_m = α_m/(γ_m - γ₀) A(γ_m)` in the frame of the residues.
    pub fn hierarchy_jm(&self) -> Result<Vec<Mat>> {
        let b = self.branch();
        let st = self.schlesinger();
        for (j, z) in st.z.iter().enumerate() {
            if let Some((_, d)) = b.nearest_critical(*z) {
                if d < 1e-9 * b.scale() {
                    return Err(Error::AnchorAtBranchPoint(j));
                }
            }
        }
        Ok((0..b.len()).map(|m| st.a_at(b.gammas[m]) * (b.alphas[m] / (b.gammas[m] - st.gamma0))).collect())
    }

    /// `∂ ln τ/∂λ_m = (γ₀ - γ_m)²/(2α_m) tr J_m²`.
    pub fn tau_grad(&self) -> Result<Vec<C>> {
        let b = self.branch();
        let g0 = self.gamma0();
        Ok(self
            .hierarchy_jm()?
            .iter()
            .enumerate()
            .map(|(m, j)| {
                let d = g0 - b.gammas[m];
                d * d / (b.alphas[m] * 2.0) * trace(&(j * j))
            })
            .collect())
    }

    /// Directional derivative over pullback flows by central differences.
    pub fn derivative_along<F>(&self, dir: &[C], mut f: F) -> Result<Vec<C>>
    where
        F: FnMut(&Pullback) -> Result<Vec<C>>,
    {
        let scale = self.flow.lambdas().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dn = dir.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dn == 0.0 {
            let v = f(self)?;
            return Ok(vec![ZERO; v.len()]);
        }
        let base = self.flow.lambdas().to_vec();
        fd::derivative(
            |s| {
                let target: Vec<C> = base.iter().zip(dir).map(|(l, d)| l + d * s).collect();
                f(&self.flow_to(&target)?)
            },
            FD_STEP * scale / dn,
        )
    }

    /// Zero-curvature and hierarchy residuals for every pair `m ≠ n`.
    pub fn verify_hierarchy(&self) -> Result<HierarchyReport> {
        let b = self.branch().clone();
        let mm = b.len();
        let r = self.residues[0].nrows();
        let rr = r * r;
        let g0 = self.gamma0();
        let sample = |p: &Pullback| -> Result<Vec<C>> {
            let j = p.hierarchy_jm()?;
            let pb = p.branch();
            let mut v: Vec<C> = j.iter().flat_map(|m| m.iter().copied()).collect();
            for (m, jm) in j.iter().enumerate() {
                v.extend((jm * (p.gamma0() - pb.gammas[m])).iter().copied());
            }
            Ok(v)
        };
        let j = self.hierarchy_jm()?;
        let x: Vec<Mat> = j.iter().enumerate().map(|(m, jm)| jm * (g0 - b.gammas[m])).collect();
        // d[n] holds ∂_n of every J_m then every X_m
        let d: Vec<Vec<C>> = (0..mm).map(|n| self.derivative_along(&unit(n, mm), sample)).collect::<Result<_>>()?;
        let pick = |n: usize, which: usize, m: usize| -> Mat {
            let o = (which * mm + m) * rr;
            Mat::from_column_slice(r, r, &d[n][o..o + rr])
        };
        let sign = if self.frame == Frame::Infinity { C::new(1.0, 0.0) } else { C::new(-1.0, 0.0) };
        let mut rep = HierarchyReport { zero_curvature: 0.0, hierarchy: 0.0, pairs: vec![] };
        for m in 0..mm {
            for n in 0..mm {
                if m == n {
                    continue;
                }
                let (djm, djn) = (pick(n, 0, m), pick(m, 0, n));
                let comm = commutator(&j[n], &j[m]) * sign;
                let zc = relative(&(&djm - &djn - &comm), &[&djm, &djn, &comm]);
                let (dxm, dxn) = (pick(n, 1, m), pick(m, 1, n));
                let hie = match self.frame {
                    Frame::Infinity => relative(&(&dxm - &dxn), &[&dxm, &dxn]),
                    Frame::Base => {
                        let c1 = commutator(&j[n], &x[m]);
                        let c2 = commutator(&j[m], &x[n]);
                        relative(&(&dxm - &dxn + &c1 - &c2), &[&dxm, &dxn, &c1, &c2])
                    }
                };
                rep.zero_curvature = rep.zero_curvature.max(zc);
                rep.hierarchy = rep.hierarchy.max(hie);
                if m < n {
                    rep.pairs.push(PairHierarchy { m, n, zero_curvature: zc, hierarchy: hie });
                }
            }
        }
        Ok(rep)
    }

    /// Integrate `d ln τ` along the path two ways: from `tr J_m²`, and from
    /// the weights `∂ν/∂λ(Q_j)^{tr A_j²/2}` times `τ_JM(z)`.
    pub fn tau_relation_check(&self, path: &ModuliPath, order: usize) -> Result<TauRelationReport> {
        let (s, w) = gauss_legendre01(order);
        let l = self.residues.len();
        let casimirs = self.schlesinger().casimirs();
        let weight_log = |p: &Pullback| -> Vec<C> {
            let b = p.branch();
            p.poles().iter().map(|z| b.dnu_dlambda(*z)).collect()
        };
        let mut cur = self.clone();
        let mut prev_w = weight_log(&cur);
        let mut lhs = ZERO;
        let mut jm_part = ZERO;
        let mut log_w = vec![ZERO; l];
        let advance = |cur: &Pullback, prev: &mut Vec<C>, acc: &mut Vec<C>| {
            let now = weight_log(cur);
            for j in 0..l {
                acc[j] += (now[j] / prev[j]).ln();
            }
            *prev = now;
        };
        for seg in path.vertices().windows(2) {
            let d: Vec<C> = seg[1].iter().zip(&seg[0]).map(|(b, a)| b - a).collect();
            for (si, wi) in s.iter().zip(&w) {
                let target: Vec<C> = seg[0].iter().zip(&d).map(|(a, d)| a + d * *si).collect();
                cur = cur.flow_to(&target)?;
                advance(&cur, &mut prev_w, &mut log_w);
                let g = cur.tau_grad()?;
                lhs += g.iter().zip(&d).map(|(a, b)| a * b).sum::<C>() * *wi;
                let b = cur.branch();
                let grad = jm_tau_grad(&cur.schlesinger());
                for (j, z) in cur.poles().iter().enumerate() {
                    let dz: C = (0..b.len()).map(|m| b.alphas[m] * d[m] / (b.gammas[m] - z)).sum();
                    jm_part += grad[j] * dz * *wi;
                }
            }
            cur = cur.flow_to(&seg[1])?;
            advance(&cur, &mut prev_w, &mut log_w);
        }
        let weight_part: C = casimirs.iter().zip(&log_w).map(|(c, lw)| c * 0.5 * lw).sum();
        let rhs = weight_part + jm_part;
        let residual = (lhs - rhs).norm() / 1f64.max(lhs.norm()).max(rhs.norm());
        Ok(TauRelationReport { lhs, rhs, weight_part, jm_part, residual })
    }

    /// Monodromy of the loop (see [`monodromy_probe`]).
    pub fn monodromy(&self, loop_vertices: &[C]) -> Result<Mat> {
        monodromy_probe(&self.schlesinger(), loop_vertices)
    }

    /// `‖Σ A_j‖` and the drift of `tr A_j²` relative to `initial`.
    pub fn conservation(&self, initial: &Pullback) -> ConservationReport {
        let now = self.schlesinger();
        let drift = now
            .casimirs()
            .iter()
            .zip(initial.schlesinger().casimirs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        ConservationReport { residue_sum: now.residue_sum(), casimir_drift: drift }
    }
}

fn relative(value: &Mat, terms: &[&Mat]) -> f64 {
    let s: f64 = terms.iter().map(|t| norm(t)).sum();
    if s == 0.0 {
        0.0
    } else {
        norm(value) / s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairHierarchy {
    pub m: usize,
    pub n: usize,
    pub zero_curvature: f64,
    pub hierarchy: f64,
}

/// Worst relative residuals (norm of the sum over the sum of term norms).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyReport {
    pub zero_curvature: f64,
    pub hierarchy: f64,
    pub pairs: Vec<PairHierarchy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauRelationReport {
    pub lhs: C,
    pub rhs: C,
    pub weight_part: C,
    pub jm_part: C,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    pub residue_sum: f64,
    pub casimir_drift: f64,
}

/// Closed polygon around pole `j`: a circle of `radius` sampled at
/// `vertices` points, starting on the side facing the base point.
pub fn loop_around(state: &SchlesingerState, j: usize, radius: f64, vertices: usize) -> Vec<C> {
    let z = state.z[j];
    let phase = (state.gamma0 - z).arg();
    (0..=vertices)
        .map(|k| z + C::from_polar(radius, phase + std::f64::consts::TAU * k as f64 / vertices as f64))
        .collect()
}

fn segment_distance(a: C, b: C, p: C) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

fn transport(y: &mut [C], r: usize, mut coeff: impl FnMut(f64) -> Mat) -> Result<()> {
    let opts = OdeOptions { first_step: Some(0.05), ..OdeOptions::default() };
    integrate(
        |u, y, dy| {
            let psi = Mat::from_column_slice(r, r, y);
            dy.copy_from_slice((coeff(u) * psi).as_slice());
            Ok(())
        },
        y,
        0.0,
        1.0,
        &opts,
        |_, _| Ok(()),
    )?;
    Ok(())
}

/// Holonomy of `dΨ/dγ = A(γ)Ψ` along `γ₀ → loop → γ₀` with `Ψ(γ₀) = I`.
/// In the frame at infinity the result is conjugated by the value at `γ₀`
/// of the solution normalized at infinity, so that it does not depend on
/// the pole positions.
pub fn monodromy_probe(state: &SchlesingerState, loop_vertices: &[C]) -> Result<Mat> {
    let r = state.rank();
    let mut pts = vec![state.gamma0];
    pts.extend_from_slice(loop_vertices);
    pts.push(state.gamma0);
    let guard = 1e-6 * state.scale();
    for w in pts.windows(2) {
        for z in &state.z {
            let distance = segment_distance(w[0], w[1], *z);
            if distance < guard {
                return Err(Error::LoopThroughPole { distance });
            }
        }
    }
    let mut y: Vec<C> = Mat::identity(r, r).as_slice().to_vec();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        transport(&mut y, r, |u| state.a_at(a + (b - a) * u) * (b - a))?;
    }
    let hol = Mat::from_column_slice(r, r, &y);
    if state.frame == Frame::Base {
        return Ok(hol);
    }
    let t = value_at_base(state)?;
    let tinv = t.clone().try_inverse().ok_or_else(|| Error::JacobianSingular("normalizing solution is singular".into()))?;
    Ok(tinv * hol * t)
}

/// The solution normalized at infinity, evaluated at `γ₀`, by integrating
/// along a ray `γ = γ₀ + e^{iφ} ℓ (1/u - 1)` with `u` from 0 to 1. The
/// direction is the one of 16 keeping farthest from the poles.
pub fn value_at_base(state: &SchlesingerState) -> Result<Mat> {
    let r = state.rank();
    let ell = state.scale();
    let g0 = state.gamma0;
    let mut best = (f64::NEG_INFINITY, C::new(1.0, 0.0));
    for k in 0..16 {
        let e = C::from_polar(1.0, std::f64::consts::TAU * k as f64 / 16.0);
        // distance from each pole to the ray g0 + e·[0, ∞)
        let clear = state
            .z
            .iter()
            .map(|z| {
                let t = ((z - g0) * e.conj()).re.max(0.0);
                (g0 + e * t - z).norm()
            })
            .fold(f64::INFINITY, f64::min);
        if clear > best.0 {
            best = (clear, e);
        }
    }
    if best.0 < 1e-6 * ell {
        return Err(Error::LoopThroughPole { distance: best.0 });
    }
    let e = best.1;
    let c: Vec<C> = state.z.iter().map(|z| g0 - z - e * ell).collect();
    let mut y: Vec<C> = Mat::identity(r, r).as_slice().to_vec();
    transport(&mut y, r, |u| {
        state.a.iter().zip(&c).fold(Mat::zeros(r, r), |s, (m, cj)| s + m * (cj / (e * ell + cj * u)))
    })?;
    Ok(Mat::from_column_slice(r, r, &y))
}
