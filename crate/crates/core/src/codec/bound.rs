use serde::{Deserialize, Serialize};

use crate::fields::Field3D;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    Absolute,
    PointwiseRelative,
}

/// Error budget for one compression run.
///
/// In point-wise relative mode `value` is a fraction (`0.10` for a 10 %
/// bound) of each cell's own magnitude. Cells with `|x| < zero_threshold`
/// are reconstructed as exactly zero and only promise `|x̂ - x| <=
/// zero_threshold`. When no threshold is set, `value * max|x| * 1e-6` is
/// used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub mode: BoundMode,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_threshold: Option<f64>,
}

impl ErrorBound {
    pub fn absolute(value: f64) -> Result<Self> {
        let b = Self {
            mode: BoundMode::Absolute,
            value,
            zero_threshold: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn pointwise_relative(value: f64) -> Result<Self> {
        let b = Self {
            mode: BoundMode::PointwiseRelative,
            value,
            zero_threshold: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn with_zero_threshold(mut self, t: f64) -> Result<Self> {
        self.zero_threshold = Some(t);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.value.is_finite() && self.value > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "error bound must be positive and finite, got {}",
                self.value
            )));
        }
        if self.mode == BoundMode::PointwiseRelative && self.value >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "point-wise relative bound must be below 1.0 (100 %), got {}",
                self.value
            )));
        }
        if let Some(t) = self.zero_threshold {
            if self.mode == BoundMode::Absolute {
                return Err(Error::InvalidArgument(
                    "zero threshold only applies to point-wise relative bounds".into(),
                ));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "zero threshold must be non-negative and finite, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// Threshold actually used for `field`: 0 in absolute mode.
    pub fn resolve_zero_threshold(&self, field: &Field3D) -> f64 {
        match self.mode {
            BoundMode::Absolute => 0.0,
            BoundMode::PointwiseRelative => self.zero_threshold.unwrap_or_else(|| {
                let max_abs = field
                    .values()
                    .iter()
                    .filter(|v| v.is_finite())
                    .fold(0.0f64, |m, v| m.max((*v as f64).abs()));
                self.value * max_abs * 1e-6
            }),
        }
    }

    /// Copy with the zero threshold pinned to the value used for `field`.
    pub fn resolved_for(&self, field: &Field3D) -> Self {
        match self.mode {
            BoundMode::Absolute => *self,
            BoundMode::PointwiseRelative => Self {
                zero_threshold: Some(self.resolve_zero_threshold(field)),
                ..*self
            },
        }
    }
}

impl std::fmt::Display for ErrorBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.mode {
            BoundMode::Absolute => write!(f, "abs {}", self.value),
            BoundMode::PointwiseRelative => write!(f, "pwr {}%", self.value * 100.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CellCheck {
    Within,
    /// Below the zero threshold and within it.
    Floored,
    Violation,
}

/// Per-cell bound predicate. The compressor and [`verify_bound`] share it so
/// that a cell accepted during compression can never be reported as a
/// violation.
#[inline]
pub(crate) fn check_cell(x: f32, y: f32, mode: BoundMode, value: f64, zero_threshold: f64) -> CellCheck {
    let (x, y) = (x as f64, y as f64);
    let err = (y - x).abs();
    match mode {
        BoundMode::Absolute => {
            if err <= value {
                CellCheck::Within
            } else {
                CellCheck::Violation
            }
        }
        BoundMode::PointwiseRelative => {
            if is_floored(x, zero_threshold) {
                if err <= zero_threshold {
                    CellCheck::Floored
                } else {
                    CellCheck::Violation
                }
            } else if err <= value * x.abs() {
                CellCheck::Within
            } else {
                CellCheck::Violation
            }
        }
    }
}

#[inline]
pub(crate) fn is_floored(x: f64, zero_threshold: f64) -> bool {
    x == 0.0 || x.abs() < zero_threshold
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub max_abs_error: f64,
    /// Over cells at or above the zero threshold (all non-zero cells in
    /// absolute mode).
    pub max_rel_error: f64,
    pub violations: usize,
    pub floored_cells: usize,
    /// Cells excluded because the original value was NaN or infinite.
    pub nonfinite_cells: usize,
}

/// Exhaustive per-cell check of `reconstructed` against `original`.
///
/// In point-wise relative mode the bound's zero threshold must be set (use
/// [`ErrorBound::resolved_for`] on the original field); an unset threshold
/// is resolved here from `original`.
pub fn verify_bound(original: &Field3D, reconstructed: &Field3D, bound: &ErrorBound) -> Result<BoundReport> {
    original.check_same_dims(reconstructed)?;
    bound.validate()?;
    let t = bound.resolve_zero_threshold(original);
    let mut report = BoundReport {
        max_abs_error: 0.0,
        max_rel_error: 0.0,
        violations: 0,
        floored_cells: 0,
        nonfinite_cells: 0,
    };
    for (&x, &y) in original.values().iter().zip(reconstructed.values()) {
        if !x.is_finite() {
            report.nonfinite_cells += 1;
            continue;
        }
        let err = (y as f64 - x as f64).abs();
        // NaN reconstructions compare false everywhere; make them count.
        let err = if err.is_nan() { f64::INFINITY } else { err };
        report.max_abs_error = report.max_abs_error.max(err);
        if !is_floored(x as f64, t) {
            report.max_rel_error = report.max_rel_error.max(err / (x as f64).abs());
        }
        match check_cell(x, y, bound.mode, bound.value, t) {
            CellCheck::Within => {}
            CellCheck::Floored => report.floored_cells += 1,
            CellCheck::Violation => report.violations += 1,
        }
    }
    Ok(report)
}
