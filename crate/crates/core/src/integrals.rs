//! Surface quadrature and the global curvature functionals: quermassintegral
//! type integrals, `r^2`-weighted integrals, enclosed volume, the
//! scale-invariant `Q_k`, and residuals of the weighted inequalities.

use rayon::prelude::*;

use crate::error::{check_k, Error, Result};
use crate::geometry::{all_frames, CurvatureData, SurfaceSample};
use crate::numeric::{binomial, pairwise_sum, sphere_area};

/// Relative floor added to every two-grid tolerance estimate.
pub const TAU_FLOOR_REL: f64 = 1e-13;

/// Per-node scalars needed by the integrals.
#[derive(Debug, Clone)]
pub struct SurfaceFields {
    pub u: Vec<f64>,
    pub r2: Vec<f64>,
    /// Density of `d mu` against the round measure.
    pub area: Vec<f64>,
    /// `H_0..=H_{n-1}` per node.
    pub h: Vec<Vec<f64>>,
}

impl SurfaceFields {
    pub fn new(sample: &SurfaceSample) -> Result<Self> {
        let frames = all_frames(sample)?;
        let h: Vec<Vec<f64>> = frames
            .par_iter()
            .map(|f| CurvatureData::new(f, &sample.faults).h)
            .collect();
        Ok(Self {
            u: frames.iter().map(|f| f.u).collect(),
            r2: frames.iter().map(|f| f.r2).collect(),
            area: frames.iter().map(|f| f.area_weight).collect(),
            h,
        })
    }

    /// `H_j` at every node; zero for `j >= n`.
    pub fn h_field(&self, j: usize) -> Vec<f64> {
        self.h.iter().map(|hs| hs.get(j).copied().unwrap_or(0.0)).collect()
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `min_node min_{1 <= i <= k} H_i`.
    pub fn convexity_margin(&self, k: usize) -> f64 {
        self.h
            .iter()
            .flat_map(|hs| (1..=k).map(move |i| hs.get(i).copied().unwrap_or(0.0)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `int_Sigma f d mu` for nodal values `f` with the given area densities.
pub fn integrate_density(sample: &SurfaceSample, area: &[f64], f: &[f64]) -> Result<f64> {
    if f.len() != sample.len() {
        return Err(Error::DimensionMismatch(format!("{} values for {} nodes", f.len(), sample.len())));
    }
    if let Some(node) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteIntegrand { node });
    }
    let terms: Vec<f64> = sample
        .sphere_weights()
        .iter()
        .zip(area)
        .zip(f)
        .map(|((w, a), x)| w * a * x)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `int_Sigma f d mu` for nodal values `f`.
pub fn integrate(sample: &SurfaceSample, f: &[f64]) -> Result<f64> {
    let area: Vec<f64> = (0..sample.len())
        .map(|i| {
            let rho = sample.rho[i];
            let [rp, rt] = sample.rho_d1[i];
            if sample.grid.is_axisym() {
                rho.powi(sample.n as i32 - 2) * (rho * rho + rp * rp).sqrt()
            } else {
                let s = sample.phi_at(i).sin();
                rho * (rho * rho + rp * rp + rt * rt / (s * s)).sqrt()
            }
        })
        .collect();
    integrate_density(sample, &area, f)
}

/// Global curvature integrals of a closed radial graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSet {
    pub n: usize,
    pub k: usize,
    /// `int H_j d mu`, `j = 0..=n-1`.
    pub i_h: Vec<f64>,
    /// `int r^2 H_j d mu`, `j = 0..=n-1`.
    pub i_r2h: Vec<f64>,
    /// `int u H_j d mu`, `j = 0..=n-1`.
    pub i_uh: Vec<f64>,
    /// Enclosed volume `(1/n) int u d mu`.
    pub vol: f64,
    /// Area of the unit sphere `S^{n-1}`.
    pub omega: f64,
    pub qk: Option<f64>,
    drop_qk_correction: bool,
}

impl FunctionalSet {
    pub fn area(&self) -> f64 {
        self.i_h[0]
    }

    /// `int H_j d mu` for `j >= -1`, with the convention `int H_{-1} = n Vol`.
    pub fn i_h_ext(&self, j: isize) -> f64 {
        match j {
            -1 => self.n as f64 * self.vol,
            j if j >= 0 && (j as usize) < self.n => self.i_h[j as usize],
            _ => 0.0,
        }
    }

    /// `int r^2 H_k + 2(k-1)/(n+1-k) int H_{k-2}`, the monotone combination.
    pub fn weighted_combination(&self, k: usize) -> f64 {
        let (n, kf) = (self.n as f64, k as f64);
        let corr = if self.drop_qk_correction {
            0.0
        } else {
            2.0 * (kf - 1.0) / (n + 1.0 - kf) * self.i_h_ext(k as isize - 2)
        };
        self.i_r2h[k] + corr
    }

    /// `Q_k`; `None` when `int H_{k-1} <= 0`.
    pub fn qk_for(&self, k: usize) -> Option<f64> {
        let base = self.i_h[k - 1];
        if !(base > 0.0) {
            return None;
        }
        let (n, kf) = (self.n as f64, k as f64);
        let expo = -(n - kf + 1.0) / (n - kf);
        Some((base / self.omega).powf(expo) * self.weighted_combination(k))
    }
}

/// Value of `Q_k` on round spheres, `(n+k-1)/(n-k+1) omega_{n-1}`.
pub fn sphere_qk(n: usize, k: usize) -> f64 {
    (n + k - 1) as f64 / (n - k + 1) as f64 * sphere_area(n - 1)
}

pub fn functionals_from_fields(sample: &SurfaceSample, fields: &SurfaceFields, k: usize) -> Result<FunctionalSet> {
    let n = sample.n;
    check_k(k, n, 1)?;
    let mut i_h = Vec::with_capacity(n);
    let mut i_r2h = Vec::with_capacity(n);
    let mut i_uh = Vec::with_capacity(n);
    for j in 0..n {
        let hj = fields.h_field(j);
        let r2h: Vec<f64> = hj.iter().zip(&fields.r2).map(|(a, b)| a * b).collect();
        let uh: Vec<f64> = hj.iter().zip(&fields.u).map(|(a, b)| a * b).collect();
        i_h.push(integrate_density(sample, &fields.area, &hj)?);
        i_r2h.push(integrate_density(sample, &fields.area, &r2h)?);
        i_uh.push(integrate_density(sample, &fields.area, &uh)?);
    }
    let vol = i_uh[0] / n as f64;
    let mut fs = FunctionalSet {
        n,
        k,
        i_h,
        i_r2h,
        i_uh,
        vol,
        omega: sphere_area(n - 1),
        qk: None,
        drop_qk_correction: sample.faults.drop_qk_correction,
    };
    fs.qk = fs.qk_for(k);
    Ok(fs)
}

/// All global functionals of `sample`, with `Q_k` for the given `k`.
pub fn functionals(sample: &SurfaceSample, k: usize) -> Result<FunctionalSet> {
    let fields = SurfaceFields::new(sample)?;
    functionals_from_fields(sample, &fields, k)
}

/// Two-grid estimate of the quadrature error of `Q_k` plus a relative floor.
pub fn qk_tolerance(sample: &SurfaceSample, fs: &FunctionalSet) -> f64 {
    let q = fs.qk.unwrap_or(0.0);
    let floor = TAU_FLOOR_REL * q.abs();
    match sample.coarsen().and_then(|c| functionals(&c, fs.k).ok()).and_then(|c| c.qk) {
        Some(qc) => (q - qc).abs() + floor,
        None => floor,
    }
}

/// Minkowski identity residual `int u H_k - int H_{k-1}` and the scale
/// `int H_{k-1}` it should be compared against.
pub fn minkowski_residual(sample: &SurfaceSample, k: usize) -> Result<(f64, f64)> {
    let fs = functionals(sample, k)?;
    Ok((fs.i_uh[k] - fs.i_h[k - 1], fs.i_h[k - 1].abs()))
}

/// Residuals of the two integral identities that pair `r^2` and `u` with
/// the Newton tensor quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonFormResiduals {
    /// `int r^2 u H_k - int r^2 H_{k-1} - (2k C)^{-1} int T_{k-1}(grad r^2, grad r^2)`.
    pub weighted: f64,
    /// `int u^2 H_k - int u H_{k-1} - (4k C)^{-1} int T_{k-1}(S grad r^2, grad r^2)`.
    pub support: f64,
    pub quad_form_t: f64,
    pub quad_form_ts: f64,
    /// Magnitudes of the left-hand sides.
    pub scale_weighted: f64,
    pub scale_support: f64,
}

/// On axisymmetric grids `grad r^2` is taken from centred differences of the
/// nodal `r^2`; on Full2D grids from `2 rho grad rho`.
pub fn newton_form_residuals(sample: &SurfaceSample, k: usize) -> Result<NewtonFormResiduals> {
    use crate::numeric::{fd_first, Parity};
    let n = sample.n;
    check_k(k, n, 1)?;
    let frames = all_frames(sample)?;
    let r2: Vec<f64> = frames.iter().map(|f| f.r2).collect();
    let dr2_phi: Vec<f64> = if sample.grid.is_axisym() {
        fd_first(&r2, sample.grid.h(), sample.grid.order, Parity::Even)
    } else {
        (0..sample.len()).map(|i| 2.0 * sample.rho[i] * sample.rho_d1[i][0]).collect()
    };
    let d = n - 1;
    let mut f_a = Vec::new();
    let mut f_b = Vec::new();
    let mut f_c = Vec::new();
    let mut f_d = Vec::new();
    let mut f_t = Vec::new();
    let mut f_ts = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let curv = CurvatureData::new(f, &sample.faults);
        let mut dr2 = nalgebra::DVector::zeros(d);
        dr2[0] = dr2_phi[i];
        if !sample.grid.is_axisym() {
            dr2[1] = 2.0 * sample.rho[i] * sample.rho_d1[i][1];
        }
        let ginv = f.g.clone().try_inverse().ok_or(crate::Error::SingularMetric { node: i })?;
        let grad = &ginv * &dr2;
        let t = &curv.t[k - 1];
        let tg = t * &grad;
        let tsg = t * (&f.s * &grad);
        f_t.push(dr2.dot(&tg));
        f_ts.push(dr2.dot(&tsg));
        let (hk, hk1) = (curv.h_at(k), curv.h_at(k - 1));
        f_a.push(f.r2 * f.u * hk);
        f_b.push(f.r2 * hk1);
        f_c.push(f.u * f.u * hk);
        f_d.push(f.u * hk1);
    }
    let area: Vec<f64> = frames.iter().map(|f| f.area_weight).collect();
    let int = |v: &[f64]| integrate_density(sample, &area, v);
    let c = binomial(n - 1, k) * k as f64;
    let (a, b, cc, dd) = (int(&f_a)?, int(&f_b)?, int(&f_c)?, int(&f_d)?);
    let qt = int(&f_t)?;
    let qts = int(&f_ts)?;
    Ok(NewtonFormResiduals {
        weighted: a - b - qt / (2.0 * c),
        support: cc - dd - qts / (4.0 * c),
        quad_form_t: qt,
        quad_form_ts: qts,
        scale_weighted: a.abs(),
        scale_support: cc.abs(),
    })
}

/// The inequalities compared by [`inequality_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// `|Sigma| / omega >= (n Vol / omega)^{(n-1)/n}`.
    Isoperimetric,
    /// `(1/omega) int H_k >= ((1/omega) int H_j)^{(n-1-k)/(n-1-j)}`, `0 <= j < k`.
    AlexandrovFenchel { j: usize, k: usize },
    /// `int r^2 H_1 >= n Vol`.
    WeightedVolume,
    /// `int r^2 H_1 >= omega (|Sigma|/omega)^{n/(n-1)}`.
    WeightedArea,
    /// `int r^2 H_k >= int H_{k-2}`, `k >= 2`.
    WeightedLowerOrder { k: usize },
    /// `int r^2 H_k >= omega (int H_{k-1} / omega)^{(n-k+1)/(n-k)}`, `k >= 2`.
    WeightedQuermass { k: usize },
    /// `int r^2 H_k + 2(k-1)/(n-k+1) int H_{k-2}
    ///   >= (n+k-1)/(n-k+1) omega (int H_{k-1} / omega)^{(n-k+1)/(n-k)}`.
    WeightedTwoQuermass { k: usize },
}

impl Inequality {
    pub fn id(&self) -> String {
        match self {
            Inequality::Isoperimetric => "isoperimetric".into(),
            Inequality::AlexandrovFenchel { j, k } => format!("alexandrov_fenchel({j},{k})"),
            Inequality::WeightedVolume => "weighted_volume".into(),
            Inequality::WeightedArea => "weighted_area".into(),
            Inequality::WeightedLowerOrder { k } => format!("weighted_lower_order({k})"),
            Inequality::WeightedQuermass { k } => format!("weighted_quermass({k})"),
            Inequality::WeightedTwoQuermass { k } => format!("weighted_two_quermass({k})"),
        }
    }

    /// Convexity order required by the hypotheses (0: star-shaped only).
    pub fn convexity_order(&self) -> usize {
        match *self {
            Inequality::Isoperimetric => 0,
            Inequality::AlexandrovFenchel { k, .. } => k,
            Inequality::WeightedVolume | Inequality::WeightedArea => 1,
            Inequality::WeightedLowerOrder { k }
            | Inequality::WeightedQuermass { k }
            | Inequality::WeightedTwoQuermass { k } => k,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Inequality::Isoperimetric | Inequality::WeightedVolume | Inequality::WeightedArea => Ok(()),
            Inequality::AlexandrovFenchel { j, k } => {
                check_k(k, n, 1)?;
                if j >= k {
                    return Err(Error::InvalidK { k: j, n, lo: 0, hi: k - 1 });
                }
                Ok(())
            }
            Inequality::WeightedLowerOrder { k } | Inequality::WeightedQuermass { k } => check_k(k, n, 2),
            Inequality::WeightedTwoQuermass { k } => check_k(k, n, 1),
        }
    }

    /// Every inequality that applies in dimension `n`.
    pub fn all(n: usize) -> Vec<Inequality> {
        let mut out = vec![Inequality::Isoperimetric];
        for k in 1..n {
            for j in 0..k {
                out.push(Inequality::AlexandrovFenchel { j, k });
            }
        }
        out.push(Inequality::WeightedVolume);
        out.push(Inequality::WeightedArea);
        for k in 2..n {
            out.push(Inequality::WeightedLowerOrder { k });
            out.push(Inequality::WeightedQuermass { k });
        }
        for k in 1..n {
            out.push(Inequality::WeightedTwoQuermass { k });
        }
        out
    }

    /// `(lhs, rhs)` evaluated on the functionals.
    pub fn sides(&self, fs: &FunctionalSet) -> (f64, f64) {
        let n = fs.n as f64;
        let w = fs.omega;
        match *self {
            Inequality::Isoperimetric => (fs.area() / w, (n * fs.vol / w).powf((n - 1.0) / n)),
            Inequality::AlexandrovFenchel { j, k } => {
                let e = (n - 1.0 - k as f64) / (n - 1.0 - j as f64);
                (fs.i_h[k] / w, (fs.i_h[j] / w).powf(e))
            }
            Inequality::WeightedVolume => (fs.i_r2h[1], n * fs.vol),
            Inequality::WeightedArea => (fs.i_r2h[1], w * (fs.area() / w).powf(n / (n - 1.0))),
            Inequality::WeightedLowerOrder { k } => (fs.i_r2h[k], fs.i_h[k - 2]),
            Inequality::WeightedQuermass { k } => {
                let kf = k as f64;
                (fs.i_r2h[k], w * (fs.i_h[k - 1] / w).powf((n - kf + 1.0) / (n - kf)))
            }
            Inequality::WeightedTwoQuermass { k } => {
                let kf = k as f64;
                let lhs = fs.weighted_combination(k);
                let rhs = (n + kf - 1.0) / (n - kf + 1.0) * w * (fs.i_h[k - 1] / w).powf((n - kf + 1.0) / (n - kf));
                (lhs, rhs)
            }
        }
    }
}

/// Hypotheses evaluated on the sampled surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypotheses {
    pub min_u: f64,
    pub star_shaped: bool,
    /// `min_node min_{i <= q} H_i` for the required convexity order `q`.
    pub convexity_margin: f64,
    pub k_convex: bool,
    /// Whether the surface is also `(q+1)`-convex.
    pub next_order_convex: bool,
}

/// One inequality evaluated on one surface; `residual = lhs - rhs`, so a
/// satisfied inequality has a non-negative residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub which: Inequality,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_margin: f64,
    /// Two-grid estimate of the quadrature error of the residual.
    pub tau_quad: f64,
    pub hypotheses: Hypotheses,
    pub hypotheses_ok: bool,
}

pub fn report_from(
    which: Inequality,
    fs: &FunctionalSet,
    fields: &SurfaceFields,
    coarse: Option<&FunctionalSet>,
) -> ResidualReport {
    let (lhs, rhs) = which.sides(fs);
    let residual = lhs - rhs;
    let scale = lhs.abs().max(rhs.abs());
    let tau_quad = coarse
        .map(|c| {
            let (l, r) = which.sides(c);
            (residual - (l - r)).abs()
        })
        .unwrap_or(0.0)
        + TAU_FLOOR_REL * scale;
    let q = which.convexity_order();
    let min_u = fields.min_u();
    let margin = if q == 0 { f64::INFINITY } else { fields.convexity_margin(q) };
    let next = fields.convexity_margin((q + 1).min(fs.n - 1));
    let hypotheses = Hypotheses {
        min_u,
        star_shaped: min_u > 0.0,
        convexity_margin: margin,
        k_convex: margin > 0.0,
        next_order_convex: next > 0.0,
    };
    ResidualReport {
        which,
        lhs,
        rhs,
        residual,
        relative_margin: if scale > 0.0 { residual / scale } else { 0.0 },
        tau_quad,
        hypotheses,
        hypotheses_ok: hypotheses.star_shaped && hypotheses.k_convex,
    }
}

/// Evaluates one inequality; hypotheses are recorded, not enforced.
pub fn inequality_report(sample: &SurfaceSample, which: Inequality) -> Result<ResidualReport> {
    which.validate(sample.n)?;
    let fields = SurfaceFields::new(sample)?;
    let fs = functionals_from_fields(sample, &fields, 1)?;
    let coarse = sample.coarsen().map(|c| functionals(&c, 1)).transpose()?;
    Ok(report_from(which, &fs, &fields, coarse.as_ref()))
}

/// Every applicable inequality on `sample`, sharing one evaluation.
pub fn all_reports(sample: &SurfaceSample) -> Result<Vec<ResidualReport>> {
    let fields = SurfaceFields::new(sample)?;
    let fs = functionals_from_fields(sample, &fields, 1)?;
    let coarse = sample.coarsen().map(|c| functionals(&c, 1)).transpose()?;
    Ok(Inequality::all(sample.n)
        .into_iter()
        .map(|w| report_from(w, &fs, &fields, coarse.as_ref()))
        .collect())
}
