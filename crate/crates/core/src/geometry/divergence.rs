use super::curvature::CurvatureData;
use super::frame::all_frames;
use super::sample::SurfaceSample;
use crate::error::{check_k, Error, Result};
use crate::numeric::{binomial, fd_first, Parity};

/// Nodewise residual of `div(T_{k-1} grad r^2) = 2 k C(n-1,k) (H_{k-1} - u H_k)`.
#[derive(Debug, Clone)]
pub struct DivergenceResidual {
    pub residual: Vec<f64>,
    pub max_abs: f64,
    /// Largest magnitude of the right-hand side, for relative reporting.
    pub scale: f64,
}

/// Discrete surface divergence of `T_{k-1} grad r^2` against the closed-form
/// right-hand side. The meridian component is differentiated with the
/// grid's centred differences (odd reflection at the poles); the metric
/// factor `d ln sqrt(det g) / d phi` is applied in closed form.
pub fn check_divergence_identity(sample: &SurfaceSample, k: usize) -> Result<DivergenceResidual> {
    let n = sample.n;
    check_k(k, n, 1)?;
    if !sample.grid.is_axisym() {
        return Err(Error::UnsupportedMode(sample.grid.mode_name()));
    }
    let frames = all_frames(sample)?;
    let mut w = Vec::with_capacity(sample.len());
    let mut rhs = Vec::with_capacity(sample.len());
    let c = binomial(n - 1, k);
    for (i, f) in frames.iter().enumerate() {
        let curv = CurvatureData::new(f, &sample.faults);
        let rho = sample.rho[i];
        let rp = sample.rho_d1[i][0];
        let grad_phi = 2.0 * rho * rp / f.g[(0, 0)];
        w.push(curv.t[k - 1][(0, 0)] * grad_phi);
        rhs.push(2.0 * k as f64 * c * (curv.h_at(k - 1) - f.u * curv.h_at(k)));
    }
    let dw = fd_first(&w, sample.grid.h(), sample.grid.order, Parity::Odd);
    let residual: Vec<f64> = (0..sample.len())
        .map(|i| {
            let rho = sample.rho[i];
            let rp = sample.rho_d1[i][0];
            let rpp = sample.rho_d2[i][0];
            let phi = sample.phi[i];
            let v = frames[i].v;
            let dlog_j = (n as f64 - 2.0) * (rp / rho + 1.0 / phi.tan()) + (rho * rp + rp * rpp) / (v * v);
            dw[i] + w[i] * dlog_j - rhs[i]
        })
        .collect();
    let max_abs = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let scale = rhs.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    Ok(DivergenceResidual { residual, max_abs, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_shape, GridSpec, ShapeSpec};
    use crate::numeric::log_log_slope;

    #[test]
    fn sphere_is_exact() {
        for n in [3, 4, 6] {
            let s = sample_shape(&ShapeSpec::sphere(n, 2.0).unwrap(), GridSpec::axisym(32, 4).unwrap()).unwrap();
            for k in 1..n {
                assert!(check_divergence_identity(&s, k).unwrap().max_abs < 1e-12);
            }
        }
    }

    #[test]
    fn converges_at_grid_order() {
        let spec = ShapeSpec::perturbed(3, 1.0, &[(2, 0.05)]).unwrap();
        for p in [2, 4] {
            let ns = [32.0, 64.0, 128.0];
            let res: Vec<f64> = ns
                .iter()
                .map(|&m| {
                    let s = sample_shape(&spec, GridSpec::axisym(m as usize, p).unwrap()).unwrap();
                    check_divergence_identity(&s, 1).unwrap().max_abs
                })
                .collect();
            let order = -log_log_slope(&ns, &res);
            assert!(order >= p as f64 - 0.3, "p = {p}: order {order}, residuals {res:?}");
        }
    }

    #[test]
    fn residual_linear_in_amplitude() {
        let g = GridSpec::axisym(32, 2).unwrap();
        let r = |eps: f64| {
            let s = sample_shape(&ShapeSpec::perturbed(3, 1.0, &[(2, eps)]).unwrap(), g).unwrap();
            check_divergence_identity(&s, 1).unwrap().max_abs
        };
        let ratio = r(0.002) / r(0.001);
        assert!((ratio - 2.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn full2d_unsupported() {
        let s = sample_shape(&ShapeSpec::sphere(3, 1.0).unwrap(), GridSpec::full2d(16, 8, 4).unwrap()).unwrap();
        assert!(matches!(check_divergence_identity(&s, 1), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn invalid_k() {
        let s = sample_shape(&ShapeSpec::sphere(3, 1.0).unwrap(), GridSpec::axisym(16, 4).unwrap()).unwrap();
        assert!(matches!(check_divergence_identity(&s, 3), Err(Error::InvalidK { .. })));
        assert!(matches!(check_divergence_identity(&s, 0), Err(Error::InvalidK { .. })));
    }
}
