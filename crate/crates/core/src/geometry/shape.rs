use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Analytic or tabulated description of an axisymmetric star-shaped profile
/// `rho(phi)`, `phi` being the polar angle from the symmetry axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    /// `a` is the semi-axis along the symmetry axis, `b` the transverse one.
    AxisymEllipsoid { a: f64, b: f64 },
    /// `rho = radius + sum eps_m cos(m phi)`.
    PerturbedSphere { radius: f64, modes: Vec<(u32, f64)> },
    /// Samples `(phi, rho)` with `phi` increasing from `0` to `pi`.
    TabulatedProfile { points: Vec<(f64, f64)> },
}

/// A validated shape in ambient dimension `n >= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    n: usize,
    shape: Shape,
    spline: Option<ClampedSpline>,
}

impl ShapeSpec {
    pub fn new(n: usize, shape: Shape) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidShape(format!("ambient dimension n = {n} must be >= 3")));
        }
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidShape(format!("{name} = {x} must be positive")))
            }
        };
        let mut spline = None;
        match &shape {
            Shape::Sphere { radius } => positive("radius", *radius)?,
            Shape::AxisymEllipsoid { a, b } => {
                positive("a", *a)?;
                positive("b", *b)?;
            }
            Shape::PerturbedSphere { radius, modes } => {
                positive("radius", *radius)?;
                let mut budget = 0.0;
                for &(m, eps) in modes {
                    if m == 0 {
                        return Err(Error::InvalidShape("perturbation modes must be >= 1".into()));
                    }
                    if !eps.is_finite() {
                        return Err(Error::InvalidShape("non-finite amplitude".into()));
                    }
                    budget += eps.abs() * (1.0 + (m as f64).powi(2));
                }
                if budget >= *radius {
                    return Err(Error::InvalidShape(format!(
                        "perturbation budget sum |eps|(1 + m^2) = {budget} must stay below the radius {radius}"
                    )));
                }
            }
            Shape::TabulatedProfile { points } => {
                spline = Some(ClampedSpline::new(points)?);
            }
        }
        Ok(Self { n, shape, spline })
    }

    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, Shape::Sphere { radius })
    }

    pub fn ellipsoid(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(n, Shape::AxisymEllipsoid { a, b })
    }

    pub fn perturbed(n: usize, radius: f64, modes: &[(u32, f64)]) -> Result<Self> {
        Self::new(n, Shape::PerturbedSphere { radius, modes: modes.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_sphere(&self) -> bool {
        match &self.shape {
            Shape::Sphere { .. } => true,
            Shape::AxisymEllipsoid { a, b } => a == b,
            Shape::PerturbedSphere { modes, .. } => modes.iter().all(|&(_, e)| e == 0.0),
            Shape::TabulatedProfile { .. } => false,
        }
    }

    /// Whether derivatives of the profile are available in closed form.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.shape, Shape::TabulatedProfile { .. })
    }

    /// The same shape dilated by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let shape = match &self.shape {
            Shape::Sphere { radius } => Shape::Sphere { radius: radius * lambda },
            Shape::AxisymEllipsoid { a, b } => Shape::AxisymEllipsoid { a: a * lambda, b: b * lambda },
            Shape::PerturbedSphere { radius, modes } => Shape::PerturbedSphere {
                radius: radius * lambda,
                modes: modes.iter().map(|&(m, e)| (m, e * lambda)).collect(),
            },
            Shape::TabulatedProfile { points } => Shape::TabulatedProfile {
                points: points.iter().map(|&(p, r)| (p, r * lambda)).collect(),
            },
        };
        Self::new(self.n, shape)
    }

    /// `(rho, rho', rho'')` at polar angle `phi`.
    pub fn eval(&self, phi: f64) -> (f64, f64, f64) {
        match &self.shape {
            Shape::Sphere { radius } => (*radius, 0.0, 0.0),
            Shape::AxisymEllipsoid { a, b } if a == b => (*a, 0.0, 0.0),
            Shape::AxisymEllipsoid { a, b } => {
                let (s, c) = phi.sin_cos();
                let d = 1.0 / (b * b) - 1.0 / (a * a);
                let q = c * c / (a * a) + s * s / (b * b);
                let q1 = (2.0 * phi).sin() * d;
                let q2 = 2.0 * (2.0 * phi).cos() * d;
                let rho = q.powf(-0.5);
                let rho1 = -0.5 * q.powf(-1.5) * q1;
                let rho2 = 0.75 * q.powf(-2.5) * q1 * q1 - 0.5 * q.powf(-1.5) * q2;
                (rho, rho1, rho2)
            }
            Shape::PerturbedSphere { radius, modes } => {
                let mut r = (*radius, 0.0, 0.0);
                for &(m, eps) in modes {
                    let mf = m as f64;
                    let (s, c) = (mf * phi).sin_cos();
                    r.0 += eps * c;
                    r.1 -= eps * mf * s;
                    r.2 -= eps * mf * mf * c;
                }
                r
            }
            Shape::TabulatedProfile { .. } => self
                .spline
                .as_ref()
                .expect("tabulated shapes carry a spline")
                .eval(phi),
        }
    }
}

/// Cubic spline with clamped zero slope at `phi = 0` and `phi = pi`, which
/// is the even reflection condition at both poles.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl ClampedSpline {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidShape("tabulated profile needs at least 4 samples".into()));
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if x[0].abs() > 1e-12 || (x[x.len() - 1] - PI).abs() > 1e-12 {
            return Err(Error::InvalidShape("tabulated profile must span phi = 0 to phi = pi".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidShape("tabulated phi values must be strictly increasing".into()));
        }
        if let Some(&r) = y.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidShape(format!("tabulated radius {r} must be positive")));
        }
        // Second-derivative unknowns m_i; clamped end slopes are zero.
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = h[0] / 3.0;
        sup[0] = h[0] / 6.0;
        rhs[0] = (y[1] - y[0]) / h[0];
        for i in 1..n - 1 {
            sub[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
        }
        sub[n - 1] = h[n - 2] / 6.0;
        diag[n - 1] = h[n - 2] / 3.0;
        rhs[n - 1] = -(y[n - 1] - y[n - 2]) / h[n - 2];
        // Thomas algorithm.
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }
}
