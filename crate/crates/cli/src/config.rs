//! JSON input schemas. Complex numbers are `[re, im]` pairs.

use std::path::Path;

use hurwitz::deformation::{flow_to, reconstruct_map, FlowState};
use hurwitz::fixtures;
use hurwitz::isomonodromy::Frame;
use hurwitz::rank1::{Contour, Density, Measure, ScalarSolution};
use hurwitz::{Error, RationalCovering, Result, C};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Parse a config file, reporting the position of any syntax or schema error.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))
}

fn invalid(msg: &str) -> Error {
    Error::ConfigParse(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCovering {
    pub degree: usize,
    pub seed: u64,
}

/// A covering given by poles and residues or drawn at random, optionally
/// deformed so that its critical values become `branch_points`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<Vec<C>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residues: Option<Vec<C>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomCovering>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_points: Option<Vec<C>>,
}

impl CoveringSpec {
    pub fn build(&self) -> Result<RationalCovering> {
        let base = match (&self.poles, &self.residues, &self.random) {
            (Some(p), Some(r), None) => RationalCovering::new(p.clone(), r.clone())?,
            (None, None, Some(r)) => fixtures::covering(r.seed, r.degree),
            _ => return Err(invalid("covering needs either `poles` and `residues` or `random`")),
        };
        match &self.branch_points {
            None => Ok(base),
            Some(targets) => {
                let end = flow_to(&FlowState::from_covering(&base, vec![], vec![]), targets)?;
                reconstruct_map(&end, targets, &base)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum ContourSpec {
    Circle { center: C, radius: f64, nodes: usize },
    /// Circle around the origin keeping `margin` from critical points and poles.
    Auto { nodes: usize, margin: f64 },
}

impl ContourSpec {
    pub fn build(&self, cov: &RationalCovering) -> Result<Contour> {
        match *self {
            ContourSpec::Circle { center, radius, nodes } => Contour::circle(center, radius, nodes),
            ContourSpec::Auto { nodes, margin } => Ok(fixtures::pick_contour(cov, nodes, margin)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum DensitySpec {
    /// Coefficients of `e^{ijt}` for `j = -J..=J`.
    Fourier(Vec<C>),
    /// Values at the contour nodes.
    Samples(Vec<C>),
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        match self {
            DensitySpec::Fourier(c) => Density::fourier(c.clone()),
            DensitySpec::Samples(s) => Ok(Density::Samples(s.clone())),
        }
    }
}

fn default_samples() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub covering: CoveringSpec,
    /// Random sample points for the partial-fraction check.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub covering: CoveringSpec,
    /// Branch-point vertices visited after the covering's own.
    pub path: Vec<Vec<C>>,
    /// Points of the covering carried along with fixed projection.
    #[serde(default)]
    pub marked: Vec<C>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSpec {
    pub contour: ContourSpec,
    pub density: DensitySpec,
    pub gamma0: C,
    #[serde(default)]
    pub probes: Vec<C>,
}

impl SolutionSpec {
    pub fn build(&self, cov: &RationalCovering) -> Result<ScalarSolution> {
        let contour = self.contour.build(cov)?;
        let measure = Measure::on_contour(cov, &contour, &self.density.build()?)?;
        Ok(ScalarSolution::new(cov, measure, self.gamma0)?.with_probes(&self.probes))
    }
}

fn default_loop_size() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rank1Config {
    pub covering: CoveringSpec,
    pub solution: SolutionSpec,
    /// Side of the square loop in the first two branch points for the
    /// closedness check of the tau 1-form.
    #[serde(default = "default_loop_size")]
    pub loop_size: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub covering: CoveringSpec,
    #[serde(default)]
    pub solution: Option<SolutionSpec>,
    /// Two points of the covering for the point-kernel variational check.
    #[serde(default)]
    pub rauch_points: Option<[C; 2]>,
    /// Branch-point configurations at which to sample the rotation coefficients.
    #[serde(default)]
    pub beta_path: Vec<Vec<C>>,
}

fn default_order() -> usize {
    16
}

fn default_loop_radius() -> f64 {
    0.3
}

fn default_loop_vertices() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoConfig {
    pub covering: CoveringSpec,
    /// Poles of the Fuchsian system, as points of the covering.
    pub anchors: Vec<C>,
    pub gamma0: C,
    /// One matrix per pole, as rows.
    pub residues: Vec<Vec<Vec<C>>>,
    #[serde(default)]
    pub frame: Frame,
    pub path: Vec<Vec<C>>,
    /// Gauss-Legendre nodes per path segment for the tau relation.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_loop_radius")]
    pub loop_radius: f64,
    #[serde(default = "default_loop_vertices")]
    pub loop_vertices: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufactureSpec {
    /// Fourier correction modes; at least one per branch point.
    pub modes: usize,
    #[serde(default)]
    pub x0: C,
    #[serde(default)]
    pub t0: C,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: AxisSpec,
    pub t: AxisSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSpec {
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSpec {
    pub covering: CoveringSpec,
    pub contour: ContourSpec,
    pub h: DensitySpec,
    pub h1: DensitySpec,
    /// With `manufacture`, the base density that gets corrected.
    pub h2: DensitySpec,
    #[serde(default)]
    pub manufacture: Option<ManufactureSpec>,
    #[serde(default)]
    pub x: C,
    #[serde(default)]
    pub t: C,
    /// Starting branch points for Newton; defaults to the covering's own.
    #[serde(default)]
    pub seed_branch_points: Option<Vec<C>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub newton: Option<NewtonSpec>,
}

impl HydroSpec {
    pub fn build(&self) -> Result<hurwitz::hydro::HydroConfig> {
        let covering = self.covering.build()?;
        let contour = self.contour.build(&covering)?;
        let (h, h1, h2) = (self.h.build()?, self.h1.build()?, self.h2.build()?);
        match &self.manufacture {
            None => Ok(hurwitz::hydro::HydroConfig { covering, contour, h, h1, h2 }),
            Some(m) => hurwitz::hydro::manufacture(covering, contour, h, h1, h2, m.modes, m.x0, m.t0),
        }
    }

    pub fn options(&self) -> hurwitz::hydro::NewtonOptions {
        let mut o = hurwitz::hydro::NewtonOptions::default();
        if let Some(n) = self.newton {
            o.tolerance = n.tolerance;
            o.max_iterations = n.max_iterations;
        }
        o
    }
}
