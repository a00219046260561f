//! Small numeric helpers shared across modules: binomials, sphere areas,
//! deterministic summation, quadrature rules and finite-difference stencils.

use std::f64::consts::PI;

/// Binomial coefficient `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Area of the unit sphere `S^d` in `R^{d+1}`, i.e. `2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
///
/// Uses the recurrence `omega_d = 2 pi / (d - 1) * omega_{d-2}` from
/// `omega_0 = 2` and `omega_1 = 2 pi`.
pub fn sphere_area(d: usize) -> f64 {
    let (mut w, start) = if d % 2 == 0 { (2.0, 0) } else { (2.0 * PI, 1) };
    let mut j = start;
    while j < d {
        j += 2;
        w *= 2.0 * PI / (j - 1) as f64;
    }
    w
}

/// Pairwise (tree) summation in a fixed order. The result does not depend on
/// how the terms were produced, only on their order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        len if len <= 8 => xs.iter().fold(0.0, |acc, &x| acc + x),
        len => {
            let mid = len / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// `int_0^pi cos(j phi) sin^m(phi) dphi` for `j = 0..count`.
pub fn sin_power_cosine_moments(m: usize, count: usize) -> Vec<f64> {
    let mut wallis = [PI, 2.0];
    for q in 2..=m {
        let next = (q - 1) as f64 / q as f64 * wallis[q % 2];
        wallis[q % 2] = next;
    }
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let mut c = wallis[m % 2];
    out[0] = c;
    let mut l = 0usize;
    while 2 * (l + 1) < count {
        c *= (2.0 * l as f64 - m as f64) / (m as f64 + 2.0 * l as f64 + 2.0);
        l += 1;
        out[2 * l] = c;
    }
    out
}

/// Weights of the interpolatory rule for `int_0^pi g(phi) sin^m(phi) dphi` on
/// the cell-centred nodes `phi_i = (i + 1/2) pi / N`. The rule is exact for
/// every cosine polynomial of degree below `N`, so it converges spectrally on
/// integrands that are smooth even functions on the sphere.
pub fn cosine_rule_weights(m: usize, nodes: usize) -> Vec<f64> {
    let moments = sin_power_cosine_moments(m, nodes);
    let nf = nodes as f64;
    (0..nodes)
        .map(|i| {
            let phi = (i as f64 + 0.5) * PI / nf;
            let mut terms = Vec::with_capacity(nodes);
            terms.push(moments[0] / nf);
            for (j, c) in moments.iter().enumerate().skip(1) {
                if *c != 0.0 {
                    terms.push(2.0 / nf * c * (j as f64 * phi).cos());
                }
            }
            pairwise_sum(&terms)
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; count];
    let mut w = vec![0.0; count];
    let nf = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[count - 1 - i] = z;
        w[i] = weight;
        w[count - 1 - i] = weight;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Parity of a grid function under reflection through a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Value at (possibly ghost) index `i` of a cell-centred grid on `[0, pi]`,
/// extended across both poles by reflection with the given parity.
fn ghost(f: &[f64], i: isize, parity: Parity) -> f64 {
    let n = f.len() as isize;
    if i < 0 {
        parity.sign() * f[(-i - 1) as usize]
    } else if i >= n {
        parity.sign() * f[(2 * n - 1 - i) as usize]
    } else {
        f[i as usize]
    }
}

/// Centred first derivative of order `order` (2 or 4) on a uniform
/// cell-centred pole-to-pole grid with spacing `h`.
pub fn fd_first(f: &[f64], h: f64, order: usize, parity: Parity) -> Vec<f64> {
    (0..f.len() as isize)
        .map(|i| {
            let at = |o: isize| ghost(f, i + o, parity);
            if order == 2 {
                (at(1) - at(-1)) / (2.0 * h)
            } else {
                (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
            }
        })
        .collect()
}

/// Centred second derivative, same conventions as [`fd_first`].
pub fn fd_second(f: &[f64], h: f64, order: usize, parity: Parity) -> Vec<f64> {
    (0..f.len() as isize)
        .map(|i| {
            let at = |o: isize| ghost(f, i + o, parity);
            if order == 2 {
                (at(1) - 2.0 * at(0) + at(-1)) / (h * h)
            } else {
                (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h)
            }
        })
        .collect()
}

/// Centred derivatives on a periodic grid.
pub fn fd_periodic(f: &[f64], h: f64, order: usize, second: bool) -> Vec<f64> {
    let n = f.len() as isize;
    (0..n)
        .map(|i| {
            let at = |o: isize| f[(i + o).rem_euclid(n) as usize];
            match (order, second) {
                (2, false) => (at(1) - at(-1)) / (2.0 * h),
                (2, true) => (at(1) - 2.0 * at(0) + at(-1)) / (h * h),
                (_, false) => (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h),
                (_, true) => {
                    (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h)
                }
            }
        })
        .collect()
}

/// Restricts a cell-centred pole-to-pole grid function to the grid with half
/// as many cells by four-point cubic interpolation (fourth order).
pub fn restrict_even(f: &[f64]) -> Vec<f64> {
    (0..f.len() as isize / 2)
        .map(|j| {
            let at = |i: isize| ghost(f, i, Parity::Even);
            (-at(2 * j - 1) + 9.0 * at(2 * j) + 9.0 * at(2 * j + 1) - at(2 * j + 2)) / 16.0
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
