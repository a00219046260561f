use nalgebra::DMatrix;

use super::frame::PointFrame;
use super::sample::Faults;
use crate::numeric::binomial;

/// Elementary symmetric functions `sigma_0..=sigma_d` of `kappa` (`d` entries),
/// by expanding `prod (1 + kappa_i x)` one factor at a time.
pub fn sigma_all(kappa: &[f64]) -> Vec<f64> {
    let d = kappa.len();
    let mut s = vec![0.0; d + 1];
    s[0] = 1.0;
    for (i, &k) in kappa.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            s[j] += k * s[j - 1];
        }
    }
    s
}

/// `H_j = sigma_j / C(n - 1, j)` for `j = 0..sigma.len()`.
pub fn normalize(sigma: &[f64], faults: &Faults) -> Vec<f64> {
    let d = sigma.len() - 1;
    sigma
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let c = if faults.binomial_off_by_one { binomial(d + 1, j) } else { binomial(d, j) };
            s / c
        })
        .collect()
}

/// Newton tensors `T_0 = I`, `T_k = sigma_k I - T_{k-1} S` for
/// `k = 0..d-1`, where `d` is the size of the shape operator `S`.
pub fn newton_tensors(s: &DMatrix<f64>, sigma: &[f64]) -> Vec<DMatrix<f64>> {
    let d = s.nrows();
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(d);
    out.push(DMatrix::identity(d, d));
    for k in 1..d {
        let next = DMatrix::identity(d, d) * sigma[k] - &out[k - 1] * s;
        out.push(next);
    }
    out
}

/// Curvature functions at a node: `sigma_j`, `H_j` for `j = 0..=n-1` and the
/// Newton tensors `T_0..=T_{n-2}` as mixed tensors.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub sigma: Vec<f64>,
    pub h: Vec<f64>,
    pub t: Vec<DMatrix<f64>>,
}

impl CurvatureData {
    pub fn new(frame: &PointFrame, faults: &Faults) -> Self {
        let sigma = sigma_all(&frame.kappa);
        let h = normalize(&sigma, faults);
        let t = newton_tensors(&frame.s, &sigma);
        Self { sigma, h, t }
    }

    /// `sigma_j`, zero for `j >= n`.
    pub fn sigma_at(&self, j: usize) -> f64 {
        self.sigma.get(j).copied().unwrap_or(0.0)
    }

    /// `H_j`, zero for `j >= n`.
    pub fn h_at(&self, j: usize) -> f64 {
        self.h.get(j).copied().unwrap_or(0.0)
    }

    /// `H_1, ..., H_k` all positive.
    pub fn is_k_convex(&self, k: usize) -> bool {
        (1..=k).all(|i| self.h_at(i) > 0.0)
    }

    /// `min_{1 <= i <= k} H_i`.
    pub fn convexity_margin(&self, k: usize) -> f64 {
        (1..=k).map(|i| self.h_at(i)).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(sigma_all(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
        let c = 0.7;
        let s = sigma_all(&[c; 5]);
        for (k, v) in s.iter().enumerate() {
            assert!((v - binomial(5, k) * c.powi(k as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn newton_tensors_of_scalar_matrix() {
        let c = 1.3;
        let d = 4;
        let s = DMatrix::identity(d, d) * c;
        let sigma = sigma_all(&[c; 4]);
        let t = newton_tensors(&s, &sigma);
        for (k, tk) in t.iter().enumerate() {
            let expect = binomial(d - 1, k) * c.powi(k as i32);
            assert!((tk - DMatrix::identity(d, d) * expect).amax() < 1e-12);
            assert!((tk.trace() - (d - k) as f64 * sigma[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn off_by_one_fault_changes_normalization() {
        let sigma = sigma_all(&[1.0, 1.0]);
        let clean = normalize(&sigma, &Faults::default());
        let bad = normalize(&sigma, &Faults { binomial_off_by_one: true, ..Faults::default() });
        assert_eq!(clean, vec![1.0, 1.0, 1.0]);
        assert!((bad[1] - 2.0 / 3.0).abs() < 1e-15);
    }
}
