//! Convergence-order estimates for refinement studies.

use crate::numeric::log_log_slope;

/// Outcome of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderFit {
    /// Every residual is at or below the floor.
    Exact,
    /// Observed order; `NaN` when the residuals do not decay monotonically in sign.
    Measured(f64),
    /// The coarse rungs decay and the finest one has reached the floor.
    Saturated(f64),
}

impl OrderFit {
    pub fn value(&self) -> Option<f64> {
        match self {
            OrderFit::Exact => None,
            OrderFit::Measured(p) | OrderFit::Saturated(p) => Some(*p),
        }
    }

    /// Exact and saturated fits pass; measured ones need `order >= min_order`.
    pub fn meets(&self, min_order: f64) -> bool {
        match self {
            OrderFit::Exact => true,
            OrderFit::Saturated(p) => p.is_nan() || *p >= min_order,
            OrderFit::Measured(p) => *p >= min_order,
        }
    }

    pub fn label(&self) -> String {
        match self {
            OrderFit::Exact => "exact".into(),
            OrderFit::Measured(p) => format!("{p:.3}"),
            OrderFit::Saturated(p) => format!("{p:.3} (floor)"),
        }
    }
}

/// Least-squares order of `|residual|` against the grid size `n_rungs`
/// (the spacing is `pi / N`, so the order is minus the slope in `N`).
/// Rungs at or below `floor` are dropped from the fit.
pub fn fit_grid_order(n_rungs: &[usize], residuals: &[f64], floor: f64) -> OrderFit {
    assert_eq!(n_rungs.len(), residuals.len());
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&n, &r) in n_rungs.iter().zip(residuals) {
        if !r.is_finite() {
            return OrderFit::Measured(f64::NAN);
        }
        if r.abs() > floor {
            x.push(n as f64);
            y.push(r.abs());
        }
    }
    let last_below = residuals.last().is_some_and(|r| r.abs() <= floor);
    match (x.len(), last_below) {
        (0, _) => OrderFit::Exact,
        (1, true) => OrderFit::Saturated(f64::NAN),
        (1, false) => OrderFit::Measured(f64::NAN),
        (_, true) => OrderFit::Saturated(-log_log_slope(&x, &y)),
        (_, false) => OrderFit::Measured(-log_log_slope(&x, &y)),
    }
}

/// Richardson order from signed residuals at step sizes `d`, `d/2`, `d/4`:
/// `log2((r1 - r2) / (r2 - r3))`. A constant offset common to all three
/// (the spatial error) cancels. Differences at or below `floor` count as exact.
pub fn richardson_order(r: [f64; 3], floor: f64) -> OrderFit {
    let d1 = r[0] - r[1];
    let d2 = r[1] - r[2];
    if !(d1.is_finite() && d2.is_finite()) {
        return OrderFit::Measured(f64::NAN);
    }
    if d1.abs() <= floor && d2.abs() <= floor {
        return OrderFit::Exact;
    }
    OrderFit::Measured((d1 / d2).log2())
}
