//! Independent reference values for the integral fixtures.
//!
//! The generating curve is treated as a planar curve `(x, z)` in the
//! meridian half-plane. Curvatures come from the plane-curve formula and the
//! normal direction, `sigma_j` from the closed form for one simple and one
//! `(n-2)`-fold eigenvalue, and integrals from composite 8-point
//! Gauss-Legendre over the curve parameter. Nothing here calls the library's
//! geometry or quadrature code.

#![allow(dead_code)]

use std::f64::consts::PI;

use icflow::geometry::Shape;

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

pub const PANELS: usize = 2000;

fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Area of the unit `d`-sphere.
pub fn omega(d: usize) -> f64 {
    if d == 0 {
        2.0
    } else if d == 1 {
        2.0 * PI
    } else {
        2.0 * PI / (d - 1) as f64 * omega(d - 2)
    }
}

/// Position and first two parameter derivatives of the generating curve.
struct CurvePoint {
    x: f64,
    z: f64,
    dx: f64,
    dz: f64,
    ddx: f64,
    ddz: f64,
}

fn curve(shape: &Shape, t: f64) -> CurvePoint {
    let (s, c) = t.sin_cos();
    match shape {
        Shape::Sphere { radius } => {
            let r = *radius;
            CurvePoint { x: r * s, z: r * c, dx: r * c, dz: -r * s, ddx: -r * s, ddz: -r * c }
        }
        // x = b sin t, z = a cos t.
        Shape::AxisymEllipsoid { a, b } => {
            CurvePoint { x: b * s, z: a * c, dx: b * c, dz: -a * s, ddx: -b * s, ddz: -a * c }
        }
        Shape::PerturbedSphere { radius, modes } => {
            let mut r = *radius;
            let mut r1 = 0.0;
            let mut r2 = 0.0;
            for &(m, e) in modes {
                let m = m as f64;
                r += e * (m * t).cos();
                r1 -= e * m * (m * t).sin();
                r2 -= e * m * m * (m * t).cos();
            }
            CurvePoint {
                x: r * s,
                z: r * c,
                dx: r1 * s + r * c,
                dz: r1 * c - r * s,
                ddx: r2 * s + 2.0 * r1 * c - r * s,
                ddz: r2 * c - 2.0 * r1 * s - r * c,
            }
        }
        Shape::TabulatedProfile { .. } => panic!("the oracle covers closed-form shapes only"),
    }
}

/// Reference integrals of one shape in `R^n`.
#[derive(Debug, Clone)]
pub struct OracleValues {
    pub i_h: Vec<f64>,
    pub i_r2h: Vec<f64>,
    pub i_uh: Vec<f64>,
    /// Enclosed volume from slices, `omega_{n-2}/(n-1) int x^{n-1} |dz|`.
    pub vol: f64,
}

impl OracleValues {
    pub fn qk(&self, n: usize, k: usize) -> f64 {
        let w = omega(n - 1);
        let lower = if k >= 2 { self.i_h[k - 2] } else { 0.0 };
        let comb = self.i_r2h[k] + 2.0 * (k - 1) as f64 / (n + 1 - k) as f64 * lower;
        comb * (self.i_h[k - 1] / w).powf(-((n - k + 1) as f64) / (n - k) as f64)
    }
}

pub fn oracle(shape: &Shape, n: usize) -> OracleValues {
    let mut i_h = vec![0.0; n];
    let mut i_r2h = vec![0.0; n];
    let mut i_uh = vec![0.0; n];
    let mut vol = 0.0;
    let w_par = omega(n - 2);
    let width = PI / PANELS as f64;
    for p in 0..PANELS {
        let mid = (p as f64 + 0.5) * width;
        for (gx, gw) in GL8_X.iter().zip(GL8_W) {
            for t in [mid - 0.5 * width * gx, mid + 0.5 * width * gx] {
                let wt = 0.5 * width * gw;
                let cp = curve(shape, t);
                let speed = cp.dx.hypot(cp.dz);
                // Outward normal for a curve running from the north to the south pole.
                let nx = -cp.dz / speed;
                let nz = cp.dx / speed;
                let k_mer = (cp.dz * cp.ddx - cp.dx * cp.ddz) / speed.powi(3);
                let k_par = nx / cp.x;
                let u = cp.x * nx + cp.z * nz;
                let r2 = cp.x * cp.x + cp.z * cp.z;
                let dmu = w_par * cp.x.powi(n as i32 - 2) * speed * wt;
                for j in 0..n {
                    let sigma = choose(n - 2, j) * k_par.powi(j as i32)
                        + if j >= 1 { k_mer * choose(n - 2, j - 1) * k_par.powi(j as i32 - 1) } else { 0.0 };
                    let h = sigma / choose(n - 1, j);
                    i_h[j] += h * dmu;
                    i_r2h[j] += r2 * h * dmu;
                    i_uh[j] += u * h * dmu;
                }
                vol += w_par / (n - 1) as f64 * cp.x.powi(n as i32 - 1) * (-cp.dz) * wt;
            }
        }
    }
    OracleValues { i_h, i_r2h, i_uh, vol }
}

/// The shapes and dimensions covered by the frozen fixture file.
pub fn fixture_shapes() -> Vec<(String, Shape, usize)> {
    let mut out = Vec::new();
    for n in [3, 4, 5, 7] {
        for r in [0.5, 1.0, 2.0] {
            out.push((format!("sphere_n{n}_r{r}"), Shape::Sphere { radius: r }, n));
        }
    }
    for n in [3, 4, 5] {
        for b in [1.2, 1.5, 2.0, 3.0] {
            out.push((format!("ellipsoid_n{n}_a1_b{b}"), Shape::AxisymEllipsoid { a: 1.0, b }, n));
        }
        for a in [1.5, 3.0] {
            out.push((format!("ellipsoid_n{n}_a{a}_b1"), Shape::AxisymEllipsoid { a, b: 1.0 }, n));
        }
        for (m, e) in [(2u32, 0.1), (2, 0.15), (3, 0.05), (4, 0.03)] {
            out.push((
                format!("perturbed_n{n}_m{m}_e{e}"),
                Shape::PerturbedSphere { radius: 1.0, modes: vec![(m, e)] },
                n,
            ));
        }
        out.push((
            format!("perturbed_n{n}_mixed"),
            Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.05), (3, 0.03)] },
            n,
        ));
    }
    out
}

pub fn fixture_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("oracle.txt")
}
