use serde::{Deserialize, Serialize};

use super::lorenzo::lorenzo_predict;
use crate::fields::Dims;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Lorenzo,
    Regression,
}

/// Axis-aligned block of cells, `origin + [0, extent)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRegion {
    pub origin: [usize; 3],
    pub extent: [usize; 3],
}

/// Blocks of edge `edge` covering `dims` in block-raster order (x fastest).
/// Trailing blocks are clipped to the grid.
pub fn block_regions(dims: Dims, edge: usize) -> Vec<BlockRegion> {
    let counts = dims.as_array().map(|n| n.div_ceil(edge));
    let mut out = Vec::with_capacity(counts.iter().product());
    for bk in 0..counts[2] {
        for bj in 0..counts[1] {
            for bi in 0..counts[0] {
                let origin = [bi * edge, bj * edge, bk * edge];
                let full = dims.as_array();
                let extent = [0, 1, 2].map(|a| edge.min(full[a] - origin[a]));
                out.push(BlockRegion { origin, extent });
            }
        }
    }
    out
}

/// Plane coefficients `(a, b, c, d)` for `a*u + b*v + c*w + d`.
pub type PlaneCoeffs = [f32; 4];

#[inline]
pub fn plane_predict(c: &PlaneCoeffs, u: usize, v: usize, w: usize) -> f64 {
    c[0] as f64 * u as f64 + c[1] as f64 * v as f64 + c[2] as f64 * w as f64 + c[3] as f64
}

/// Least-squares plane through `samples` (local coordinates, value).
///
/// Axes along which every sample shares one coordinate are dropped from the
/// model (coefficient 0). If the remaining normal equations are singular the
/// fit falls back to the mean. An empty sample set gives all zeros.
pub fn fit_block_regression(samples: &[([f64; 3], f64)]) -> PlaneCoeffs {
    let n = samples.len();
    if n == 0 {
        return [0.0; 4];
    }
    let nf = n as f64;
    let mut mean_x = [0.0; 3];
    let mut mean_f = 0.0;
    for (x, f) in samples {
        for a in 0..3 {
            mean_x[a] += x[a];
        }
        mean_f += f;
    }
    mean_x.iter_mut().for_each(|m| *m /= nf);
    mean_f /= nf;
    let mean_only = [0.0, 0.0, 0.0, mean_f as f32];

    let active: Vec<usize> = (0..3)
        .filter(|&a| samples.iter().any(|(x, _)| x[a] != samples[0].0[a]))
        .collect();
    let m = active.len();
    if m == 0 || n < m + 1 {
        return mean_only;
    }

    // Centred normal equations: the intercept decouples.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (x, f) in samples {
        let dx: Vec<f64> = active.iter().map(|&a| x[a] - mean_x[a]).collect();
        let df = f - mean_f;
        for r in 0..m {
            atb[r] += dx[r] * df;
            for c in 0..m {
                ata[r][c] += dx[r] * dx[c];
            }
        }
    }
    let Some(sol) = solve_spd(&mut ata, &mut atb, m) else {
        return mean_only;
    };
    let mut coeffs = [0.0f64; 3];
    for (r, &a) in active.iter().enumerate() {
        coeffs[a] = sol[r];
    }
    let d = mean_f - (0..3).map(|a| coeffs[a] * mean_x[a]).sum::<f64>();
    let out = [coeffs[0] as f32, coeffs[1] as f32, coeffs[2] as f32, d as f32];
    if out.iter().all(|c| c.is_finite()) {
        out
    } else {
        mean_only
    }
}

/// Gaussian elimination with partial pivoting on the leading `m x m` block.
fn solve_spd(a: &mut [[f64; 3]; 3], b: &mut [f64; 3], m: usize) -> Option<[f64; 3]> {
    let scale = (0..m).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot = a[col];
        for row in col + 1..m {
            let f = a[row][col] / pivot[col];
            for (x, p) in a[row][col..m].iter_mut().zip(&pivot[col..m]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Estimated absolute prediction error of both predictors over every second
/// cell per axis of `block`.
///
/// `filled` holds original working values with unusable cells already
/// replaced; Lorenzo is evaluated on it as a proxy for the reconstruction.
pub fn estimate_block_errors(
    filled: &[f64],
    usable: &[bool],
    dims: Dims,
    block: &BlockRegion,
    coeffs: &PlaneCoeffs,
) -> (f64, f64) {
    let mut lorenzo_err = 0.0;
    let mut regression_err = 0.0;
    let [ox, oy, oz] = block.origin;
    for w in (0..block.extent[2]).step_by(2) {
        for v in (0..block.extent[1]).step_by(2) {
            for u in (0..block.extent[0]).step_by(2) {
                let (i, j, k) = (ox + u, oy + v, oz + w);
                let idx = dims.index(i, j, k);
                if !usable[idx] {
                    continue;
                }
                let x = filled[idx];
                lorenzo_err += (x - lorenzo_predict(filled, dims, i, j, k)).abs();
                regression_err += (x - plane_predict(coeffs, u, v, w)).abs();
            }
        }
    }
    (lorenzo_err, regression_err)
}

/// Picks the predictor with the smaller estimate; ties go to Lorenzo.
pub fn select_predictor(lorenzo_err: f64, regression_err: f64) -> Predictor {
    if regression_err < lorenzo_err {
        Predictor::Regression
    } else {
        Predictor::Lorenzo
    }
}
