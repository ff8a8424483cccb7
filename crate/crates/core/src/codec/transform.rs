use super::bound::is_floored;
use crate::fields::Field3D;

/// Log-domain representation used by point-wise relative mode.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTransformed {
    /// `log2|x|` per cell; NaN for zero-flagged and non-finite cells.
    pub values: Vec<f64>,
    pub negative: Vec<bool>,
    pub zero: Vec<bool>,
    /// Absolute bound to honour in log space.
    pub delta: f64,
}

/// `log2(1 + r)`: an absolute log2 error of at most this keeps the
/// reconstruction ratio inside `[1/(1+r), 1+r]`, i.e. relative error <= r.
pub fn log_bound(r: f64) -> f64 {
    r.ln_1p() / std::f64::consts::LN_2
}

#[inline]
pub fn to_log(x: f32) -> f64 {
    (x as f64).abs().log2()
}

#[inline]
pub fn from_log(y: f64, negative: bool) -> f32 {
    let m = y.exp2() as f32;
    if negative {
        -m
    } else {
        m
    }
}

pub fn log_transform(field: &Field3D, r: f64, zero_threshold: f64) -> LogTransformed {
    let n = field.values().len();
    let mut out = LogTransformed {
        values: Vec::with_capacity(n),
        negative: Vec::with_capacity(n),
        zero: Vec::with_capacity(n),
        delta: log_bound(r),
    };
    for &x in field.values() {
        let zero = x.is_finite() && is_floored(x as f64, zero_threshold);
        out.zero.push(zero);
        out.negative.push(!zero && x.is_sign_negative());
        out.values
            .push(if zero || !x.is_finite() { f64::NAN } else { to_log(x) });
    }
    out
}
