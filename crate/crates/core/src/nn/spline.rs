//! Uniform B-spline basis evaluation on an extended knot grid.
//!
//! The grid covers `[lo, hi]` with `segments` equal pieces and `order` extra
//! knots on each side, giving `segments + order` basis functions that form a
//! partition of unity over the whole covered interval. Inputs outside the
//! grid are clamped to it (the basis is then constant in the input, so its
//! input-derivative is zero there).

use serde::{Deserialize, Serialize};

use super::params::NnError;

/// Hyperparameters of one spline-activated layer.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct KanLayerSpec {
    /// Number of grid segments (G′).
    pub grid_size: usize,
    /// Polynomial degree of the basis (3 = cubic).
    pub spline_order: usize,
    /// Symmetric grid extent: the grid covers `[-grid_range, grid_range]`.
    pub grid_range: f64,
}

impl Default for KanLayerSpec {
    fn default() -> Self {
        KanLayerSpec { grid_size: 5, spline_order: 3, grid_range: 2.0 }
    }
}

impl KanLayerSpec {
    /// Learnable spline coefficients per edge: `grid_size + spline_order`.
    pub fn coefficients_per_edge(&self) -> usize {
        self.grid_size + self.spline_order
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.grid_size < 2 {
            return Err(NnError::BadSpec("grid_size must be at least 2".into()));
        }
        if self.spline_order < 1 {
            return Err(NnError::BadSpec("spline_order must be at least 1".into()));
        }
        if !self.grid_range.is_finite() || self.grid_range <= 0.0 {
            return Err(NnError::BadSpec("grid_range must be positive".into()));
        }
        Ok(())
    }
}

/// Knot layout and basis evaluation for one (segments, order, range) triple.
#[derive(Clone, Debug)]
pub struct SplineGrid {
    pub segments: usize,
    pub order: usize,
    pub lo: f64,
    pub hi: f64,
    knots: Vec<f64>,
}

/// Basis values (and optionally derivatives) restricted to the active
/// window: `order + 1` consecutive functions starting at `first`.
#[derive(Clone, Debug)]
pub struct BasisWindow {
    /// Index of the first active basis function.
    pub first: usize,
    /// Active basis values, length `order + 1`.
    pub values: Vec<f64>,
    /// Derivatives of the active values w.r.t. the input (zero when the
    /// input was clamped to the grid).
    pub derivs: Vec<f64>,
}

impl SplineGrid {
    pub fn from_spec(spec: &KanLayerSpec) -> SplineGrid {
        SplineGrid::new(spec.grid_size, spec.spline_order, -spec.grid_range, spec.grid_range)
    }

    pub fn new(segments: usize, order: usize, lo: f64, hi: f64) -> SplineGrid {
        assert!(segments >= 1 && hi > lo);
        let h = (hi - lo) / segments as f64;
        let knots = (0..segments + 2 * order + 1)
            .map(|i| lo + (i as f64 - order as f64) * h)
            .collect();
        SplineGrid { segments, order, lo, hi, knots }
    }

    /// Number of basis functions: `segments + order`.
    pub fn basis_count(&self) -> usize {
        self.segments + self.order
    }

    fn segment_of(&self, x: f64) -> usize {
        let h = (self.hi - self.lo) / self.segments as f64;
        (((x - self.lo) / h) as usize).min(self.segments - 1)
    }

    /// Evaluates the active basis window at `x` (clamped to the grid).
    ///
    /// The window algorithm walks the triangular recursion over the local
    /// knots once per degree; degree 0 returns the indicator of the
    /// containing segment.
    pub fn basis_window(&self, x: f64) -> BasisWindow {
        let clamped = x.clamp(self.lo, self.hi);
        let inside = clamped == x;
        let p = self.order;
        let s = self.segment_of(clamped);
        let span = s + p;
        let t = &self.knots;

        let mut values = vec![0.0; p + 1];
        values[0] = 1.0;
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        // Degree p-1 values are saved for the derivative formula.
        let mut lower = vec![0.0; p.max(1)];
        for j in 1..=p {
            if j == p {
                lower[..j].copy_from_slice(&values[..j]);
            }
            left[j] = clamped - t[span + 1 - j];
            right[j] = t[span + j] - clamped;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            values[j] = saved;
        }

        let mut derivs = vec![0.0; p + 1];
        if p >= 1 && inside {
            // B'_{j,p} = p·(B_{j,p-1}/(t_{j+p}-t_j) - B_{j+1,p-1}/(t_{j+p+1}-t_{j+1}))
            // where the active degree-(p-1) functions at this span are
            // indices s+1 ..= s+p, stored in `lower[0..p]`.
            for i in 0..=p {
                let j = s + i;
                let a = if i >= 1 { lower[i - 1] / (t[j + p] - t[j]) } else { 0.0 };
                let b = if i < p { lower[i] / (t[j + p + 1] - t[j + 1]) } else { 0.0 };
                derivs[i] = p as f64 * (a - b);
            }
        }
        BasisWindow { first: s, values, derivs }
    }

    /// Full-length basis vector (`basis_count()` entries, zero outside the
    /// active window).
    pub fn basis_full(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.basis_count()];
        let w = self.basis_window(x);
        out[w.first..w.first + w.values.len()].copy_from_slice(&w.values);
        out
    }
}
