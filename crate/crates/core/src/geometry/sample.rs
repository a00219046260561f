use std::sync::Arc;

use super::grid::{GridMode, GridSpec};
use super::shape::ShapeSpec;
use crate::error::{Error, Result};
use crate::numeric::{fd_first, fd_periodic, fd_second, restrict_even, Parity};

/// Deliberate corruptions used to show that the verification checks are
/// sensitive. All off by default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Faults {
    /// Negate the second fundamental form.
    pub flip_second_fundamental_form: bool,
    /// Normalize `H_j` by `C(n-1, j + 1)` instead of `C(n-1, j)`.
    pub binomial_off_by_one: bool,
    /// Drop the lower-order quermassintegral correction from `Q_k`.
    pub drop_qk_correction: bool,
}

impl Faults {
    pub fn any(&self) -> bool {
        self.flip_second_fundamental_form || self.binomial_off_by_one || self.drop_qk_correction
    }
}

/// A radius function sampled on a grid over `S^{n-1}`, together with its
/// first and second coordinate partial derivatives.
///
/// Node `i * n_theta + j` sits at polar angle `phi[i]` and azimuth
/// `theta[j]`. `rho_d1 = [rho_phi, rho_theta]` and
/// `rho_d2 = [rho_phiphi, rho_phitheta, rho_thetatheta]`; the azimuthal
/// entries are zero on axisymmetric grids.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub grid: GridSpec,
    pub n: usize,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_d1: Vec<[f64; 2]>,
    pub rho_d2: Vec<[f64; 3]>,
    weights: Arc<Vec<f64>>,
    source: Option<ShapeSpec>,
    pub faults: Faults,
}

/// Samples `spec` on `grid`. Closed-form shapes get exact derivatives;
/// tabulated profiles are interpolated and differentiated on the grid.
pub fn sample_shape(spec: &ShapeSpec, grid: GridSpec) -> Result<SurfaceSample> {
    let n = spec.n();
    if let GridMode::Full2D { .. } = grid.mode {
        if n != 3 {
            return Err(Error::DimensionMismatch(format!("Full2D grids require n = 3, got n = {n}")));
        }
    }
    let phi = grid.polar_nodes();
    let theta = grid.azimuth_nodes();
    let mt = theta.len();
    let profile: Vec<(f64, f64, f64)> = phi.iter().map(|&p| spec.eval(p)).collect();

    let (rho_p, d1_p, d2_p): (Vec<f64>, Vec<f64>, Vec<f64>) = if spec.is_analytic() || !grid.is_axisym() {
        (
            profile.iter().map(|t| t.0).collect(),
            profile.iter().map(|t| t.1).collect(),
            profile.iter().map(|t| t.2).collect(),
        )
    } else {
        let rho: Vec<f64> = profile.iter().map(|t| t.0).collect();
        let h = grid.h();
        let d1 = fd_first(&rho, h, grid.order, Parity::Even);
        let d2 = fd_second(&rho, h, grid.order, Parity::Even);
        (rho, d1, d2)
    };

    let mut sample = SurfaceSample {
        grid,
        n,
        phi,
        theta,
        rho: Vec::with_capacity(grid.len()),
        rho_d1: Vec::with_capacity(grid.len()),
        rho_d2: Vec::with_capacity(grid.len()),
        weights: Arc::new(grid.sphere_weights(n)),
        source: Some(spec.clone()),
        faults: Faults::default(),
    };
    for i in 0..rho_p.len() {
        for _ in 0..mt {
            sample.rho.push(rho_p[i]);
            sample.rho_d1.push([d1_p[i], 0.0]);
            sample.rho_d2.push([d2_p[i], 0.0, 0.0]);
        }
    }
    if !grid.is_axisym() {
        sample.fill_azimuthal_derivatives();
    }
    sample.check_positive()?;
    Ok(sample)
}

impl SurfaceSample {
    /// Builds an axisymmetric sample from nodal radii; derivatives come from
    /// the grid's finite differences with even reflection at the poles.
    pub fn from_nodes(grid: GridSpec, n: usize, rho: Vec<f64>) -> Result<Self> {
        if !grid.is_axisym() {
            return Err(Error::UnsupportedMode(grid.mode_name()));
        }
        if rho.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} radii for a grid of {} nodes",
                rho.len(),
                grid.len()
            )));
        }
        let weights = Arc::new(grid.sphere_weights(n));
        Self::with_weights(grid, n, rho, weights)
    }

    fn with_weights(grid: GridSpec, n: usize, rho: Vec<f64>, weights: Arc<Vec<f64>>) -> Result<Self> {
        let h = grid.h();
        let d1 = fd_first(&rho, h, grid.order, Parity::Even);
        let d2 = fd_second(&rho, h, grid.order, Parity::Even);
        let s = Self {
            grid,
            n,
            phi: grid.polar_nodes(),
            theta: vec![0.0],
            rho_d1: d1.iter().map(|&d| [d, 0.0]).collect(),
            rho_d2: d2.iter().map(|&d| [d, 0.0, 0.0]).collect(),
            rho,
            weights,
            source: None,
            faults: Faults::default(),
        };
        s.check_positive()?;
        Ok(s)
    }

    /// Same grid and weights, new nodal radii (axisymmetric only).
    pub fn with_rho(&self, rho: Vec<f64>) -> Result<Self> {
        if !self.grid.is_axisym() {
            return Err(Error::UnsupportedMode(self.grid.mode_name()));
        }
        let mut s = Self::with_weights(self.grid, self.n, rho, self.weights.clone())?;
        s.faults = self.faults;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Quadrature weights of `int_{S^{n-1}} f dA` per node.
    pub fn sphere_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn source(&self) -> Option<&ShapeSpec> {
        self.source.as_ref()
    }

    pub fn phi_at(&self, node: usize) -> f64 {
        self.phi[node / self.theta.len()]
    }

    /// The same surface on the grid with half the resolution: resampled from
    /// the shape when known, otherwise interpolated from the nodes.
    pub fn coarsen(&self) -> Option<Self> {
        let grid = self.grid.coarsened()?;
        let mut s = match &self.source {
            Some(spec) => sample_shape(spec, grid).ok()?,
            None => Self::from_nodes(grid, self.n, restrict_even(&self.rho)).ok()?,
        };
        s.faults = self.faults;
        Some(s)
    }

    fn check_positive(&self) -> Result<()> {
        match self.rho.iter().position(|r| !(*r > 0.0)) {
            Some(node) => Err(Error::NonPositiveRadius { node, rho: self.rho[node] }),
            None => Ok(()),
        }
    }

    fn fill_azimuthal_derivatives(&mut self) {
        let mt = self.theta.len();
        let h = 2.0 * std::f64::consts::PI / mt as f64;
        let order = self.grid.order;
        for i in 0..self.phi.len() {
            let row = i * mt..(i + 1) * mt;
            let r: Vec<f64> = self.rho[row.clone()].to_vec();
            let rp: Vec<f64> = self.rho_d1[row.clone()].iter().map(|d| d[0]).collect();
            let rt = fd_periodic(&r, h, order, false);
            let rtt = fd_periodic(&r, h, order, true);
            let rpt = fd_periodic(&rp, h, order, false);
            for (j, node) in row.enumerate() {
                self.rho_d1[node][1] = rt[j];
                self.rho_d2[node][1] = rpt[j];
                self.rho_d2[node][2] = rtt[j];
            }
        }
    }
}
