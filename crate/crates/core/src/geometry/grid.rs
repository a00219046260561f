use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{cosine_rule_weights, gauss_legendre, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// `n_phi` cell-centred nodes over `phi in (0, pi)`; any ambient dimension.
    Axisym1D { n_phi: usize },
    /// Latitude-longitude grid for `n = 3`: Gauss-Legendre in `cos phi`,
    /// uniform in azimuth.
    Full2D { n_phi: usize, n_theta: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub mode: GridMode,
    /// Finite-difference order, 2 or 4.
    pub order: usize,
}

impl GridSpec {
    pub fn axisym(n_phi: usize, order: usize) -> Result<Self> {
        Self::new(GridMode::Axisym1D { n_phi }, order)
    }

    pub fn full2d(n_phi: usize, n_theta: usize, order: usize) -> Result<Self> {
        Self::new(GridMode::Full2D { n_phi, n_theta }, order)
    }

    pub fn new(mode: GridMode, order: usize) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(Error::InvalidGrid(format!("difference order {order} must be 2 or 4")));
        }
        let n_phi = match mode {
            GridMode::Axisym1D { n_phi } => n_phi,
            GridMode::Full2D { n_phi, n_theta } => {
                if n_theta < 8 || n_theta % 2 != 0 {
                    return Err(Error::InvalidGrid(format!("n_theta = {n_theta} must be even and >= 8")));
                }
                n_phi
            }
        };
        if n_phi < 16 {
            return Err(Error::InvalidGrid(format!("n_phi = {n_phi} must be >= 16")));
        }
        Ok(Self { mode, order })
    }

    pub fn n_phi(&self) -> usize {
        match self.mode {
            GridMode::Axisym1D { n_phi } | GridMode::Full2D { n_phi, .. } => n_phi,
        }
    }

    pub fn n_theta(&self) -> usize {
        match self.mode {
            GridMode::Axisym1D { .. } => 1,
            GridMode::Full2D { n_theta, .. } => n_theta,
        }
    }

    pub fn len(&self) -> usize {
        self.n_phi() * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_axisym(&self) -> bool {
        matches!(self.mode, GridMode::Axisym1D { .. })
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            GridMode::Axisym1D { .. } => "Axisym1D",
            GridMode::Full2D { .. } => "Full2D_n3",
        }
    }

    /// Uniform polar spacing of the axisymmetric grid.
    pub fn h(&self) -> f64 {
        PI / self.n_phi() as f64
    }

    /// The grid with half as many polar (and azimuthal) nodes, if valid.
    pub fn coarsened(&self) -> Option<Self> {
        let mode = match self.mode {
            GridMode::Axisym1D { n_phi } if n_phi % 2 == 0 => GridMode::Axisym1D { n_phi: n_phi / 2 },
            GridMode::Full2D { n_phi, n_theta } if n_theta % 4 == 0 => {
                GridMode::Full2D { n_phi: n_phi / 2, n_theta: n_theta / 2 }
            }
            _ => return None,
        };
        Self::new(mode, self.order).ok()
    }

    /// Polar node angles in ascending order.
    pub fn polar_nodes(&self) -> Vec<f64> {
        match self.mode {
            GridMode::Axisym1D { n_phi } => (0..n_phi).map(|i| (i as f64 + 0.5) * PI / n_phi as f64).collect(),
            GridMode::Full2D { n_phi, .. } => {
                let (x, _) = gauss_legendre(n_phi);
                x.iter().rev().map(|c| c.acos()).collect()
            }
        }
    }

    pub fn azimuth_nodes(&self) -> Vec<f64> {
        let m = self.n_theta();
        (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
    }

    /// Quadrature weights for `int_{S^{n-1}} f dA` at every node (node index
    /// is `i * n_theta + j`).
    pub fn sphere_weights(&self, n: usize) -> Vec<f64> {
        match self.mode {
            GridMode::Axisym1D { n_phi } => {
                let lower = sphere_area(n - 2);
                cosine_rule_weights(n - 2, n_phi).into_iter().map(|w| w * lower).collect()
            }
            GridMode::Full2D { n_phi, n_theta } => {
                let (_, w) = gauss_legendre(n_phi);
                let dtheta = 2.0 * PI / n_theta as f64;
                w.iter()
                    .rev()
                    .flat_map(|wi| std::iter::repeat_n(wi * dtheta, n_theta))
                    .collect()
            }
        }
    }
}
