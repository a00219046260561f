use nalgebra::{DMatrix, Matrix2};

use super::sample::SurfaceSample;
use crate::error::{Error, Result};

/// Geometry of the radial graph `X = rho(theta) theta` at one node.
///
/// Axisymmetric frames use the coordinates `(phi, psi_1..psi_{n-2})` with
/// the `psi` orthonormal on the parallel `S^{n-2}` at the node, so every
/// tensor is diagonal and index 0 is the meridian direction. Full 2-D frames
/// (`n = 3`) use `(phi, theta)`.
#[derive(Debug, Clone)]
pub struct PointFrame {
    /// Induced metric `g_ij`.
    pub g: DMatrix<f64>,
    /// Second fundamental form `h_ij` with respect to the outer normal.
    pub h: DMatrix<f64>,
    /// Shape operator `h_i^j = g^{jk} h_{ik}`.
    pub s: DMatrix<f64>,
    /// Principal curvatures, ascending.
    pub kappa: Vec<f64>,
    /// `sqrt(rho^2 + |grad rho|^2)` with the round-sphere gradient.
    pub v: f64,
    /// Support function `<X, nu> = rho^2 / v`.
    pub u: f64,
    pub r2: f64,
    /// Density of `d mu` against the round measure of `S^{n-1}`.
    pub area_weight: f64,
}

/// Principal curvatures and graph factors of an axisymmetric radial graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub kappa_meridian: f64,
    /// Curvature of the `(n - 2)`-fold degenerate parallel direction.
    pub kappa_parallel: f64,
    pub v: f64,
    pub u: f64,
}

/// Meridian and parallel curvatures from `rho`, `rho'`, `rho''` at `phi`.
pub fn radial_node(rho: f64, d1: f64, d2: f64, phi: f64) -> RadialNode {
    let v = (rho * rho + d1 * d1).sqrt();
    let kappa_meridian = (rho * rho + 2.0 * d1 * d1 - rho * d2) / (v * v * v);
    let kappa_parallel = (rho - d1 / phi.tan()) / (rho * v);
    RadialNode { kappa_meridian, kappa_parallel, v, u: rho * rho / v }
}

/// The full geometric package at `node`.
pub fn point_frame(sample: &SurfaceSample, node: usize) -> Result<PointFrame> {
    let n = sample.n;
    let d = n - 1;
    let rho = sample.rho[node];
    let [rp, rt] = sample.rho_d1[node];
    let [rpp, rpt, rtt] = sample.rho_d2[node];
    let phi = sample.phi_at(node);
    let sign = if sample.faults.flip_second_fundamental_form { -1.0 } else { 1.0 };

    if sample.grid.is_axisym() {
        let (s, c) = phi.sin_cos();
        let v = (rho * rho + rp * rp).sqrt();
        let mut g = DMatrix::zeros(d, d);
        let mut h = DMatrix::zeros(d, d);
        g[(0, 0)] = v * v;
        h[(0, 0)] = sign * (rho * rho + 2.0 * rp * rp - rho * rpp) / v;
        for a in 1..d {
            g[(a, a)] = rho * rho * s * s;
            h[(a, a)] = sign * (rho * rho * s * s - rho * rp * s * c) / v;
        }
        if (0..d).any(|a| !(g[(a, a)] > 0.0)) {
            return Err(Error::SingularMetric { node });
        }
        let node_geom = radial_node(rho, rp, rpp, phi);
        let mut shape_op = DMatrix::zeros(d, d);
        shape_op[(0, 0)] = sign * node_geom.kappa_meridian;
        for a in 1..d {
            shape_op[(a, a)] = sign * node_geom.kappa_parallel;
        }
        let mut kappa: Vec<f64> = (0..d).map(|a| shape_op[(a, a)]).collect();
        kappa.sort_by(f64::total_cmp);
        return Ok(PointFrame {
            g,
            h,
            s: shape_op,
            kappa,
            v,
            u: rho * rho / v,
            r2: rho * rho,
            area_weight: rho.powi(n as i32 - 2) * v,
        });
    }

    // Full 2-D frame, n = 3.
    let (s, c) = phi.sin_cos();
    let grad2 = rp * rp + rt * rt / (s * s);
    let v = (rho * rho + grad2).sqrt();
    let round = Matrix2::new(1.0, 0.0, 0.0, s * s);
    let dr = [rp, rt];
    let hess = Matrix2::new(rpp, rpt - c / s * rt, rpt - c / s * rt, rtt + s * c * rp);
    let g2 = Matrix2::from_fn(|i, j| rho * rho * round[(i, j)] + dr[i] * dr[j]);
    let h2 = Matrix2::from_fn(|i, j| {
        sign * (rho * rho * round[(i, j)] + 2.0 * dr[i] * dr[j] - rho * hess[(i, j)]) / v
    });
    let chol = g2.cholesky().ok_or(Error::SingularMetric { node })?;
    let linv = chol.l().try_inverse().ok_or(Error::SingularMetric { node })?;
    let m = linv * h2 * linv.transpose();
    let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let disc = (0.25 * (m[(0, 0)] - m[(1, 1)]).powi(2) + m[(0, 1)] * m[(1, 0)]).max(0.0).sqrt();
    let g2inv = g2.try_inverse().ok_or(Error::SingularMetric { node })?;
    let s2 = g2inv * h2;
    Ok(PointFrame {
        g: DMatrix::from_fn(2, 2, |i, j| g2[(i, j)]),
        h: DMatrix::from_fn(2, 2, |i, j| h2[(i, j)]),
        s: DMatrix::from_fn(2, 2, |i, j| s2[(i, j)]),
        kappa: vec![half_tr - disc, half_tr + disc],
        v,
        u: rho * rho / v,
        r2: rho * rho,
        area_weight: rho * v,
    })
}

/// Frames at every node, evaluated in parallel and returned in node order.
pub fn all_frames(sample: &SurfaceSample) -> Result<Vec<PointFrame>> {
    use rayon::prelude::*;
    (0..sample.len()).into_par_iter().map(|i| point_frame(sample, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_shape, GridSpec, ShapeSpec};

    #[test]
    fn sphere_frame() {
        let r = 1.7;
        let s = sample_shape(&ShapeSpec::sphere(5, r).unwrap(), GridSpec::axisym(32, 4).unwrap()).unwrap();
        for node in [0, 9, 31] {
            let f = point_frame(&s, node).unwrap();
            let sn = s.phi[node].sin();
            assert!((f.g[(0, 0)] - r * r).abs() < 1e-14);
            assert!((f.g[(2, 2)] - r * r * sn * sn).abs() < 1e-14);
            assert!((f.h[(1, 1)] - r * sn * sn).abs() < 1e-14);
            assert!(f.kappa.iter().all(|k| (k - 1.0 / r).abs() < 1e-14));
            assert!((f.u - r).abs() < 1e-15 && (f.v - r).abs() < 1e-15);
        }
    }

    #[test]
    fn critical_point_of_rho_gives_u_equal_rho() {
        let spec = ShapeSpec::perturbed(3, 1.0, &[(2, 0.05)]).unwrap();
        // Nodes are cell-centred; an even count puts pi/2 between nodes, so use
        // a Full2D-free direct evaluation at phi = pi/2.
        let (rho, d1, d2) = spec.eval(std::f64::consts::FRAC_PI_2);
        let rn = radial_node(rho, d1, d2, std::f64::consts::FRAC_PI_2);
        assert!((rho - 0.95).abs() < 1e-15);
        assert!((rn.u - 0.95).abs() < 1e-15 && (rn.v - 0.95).abs() < 1e-15);
    }

    #[test]
    fn full2d_agrees_with_axisym() {
        let spec = ShapeSpec::ellipsoid(3, 1.0, 1.6).unwrap();
        let full = sample_shape(&spec, GridSpec::full2d(24, 8, 4).unwrap()).unwrap();
        for i in [0, 5, 11, 23] {
            let node = i * 8 + 3;
            let f = point_frame(&full, node).unwrap();
            let (rho, d1, d2) = spec.eval(full.phi[i]);
            let rn = radial_node(rho, d1, d2, full.phi[i]);
            let mut expect = [rn.kappa_meridian, rn.kappa_parallel];
            expect.sort_by(f64::total_cmp);
            assert!((f.kappa[0] - expect[0]).abs() < 1e-12);
            assert!((f.kappa[1] - expect[1]).abs() < 1e-12);
            assert!((f.u - rn.u).abs() < 1e-14);
        }
    }
}
