use crate::fields::Dims;

/// First-order 3-D Lorenzo prediction of cell `(i, j, k)` from its seven
/// lower-index neighbours; neighbours outside the grid count as zero.
///
/// On a face this degenerates to the 2-D stencil, on an edge to the previous
/// value, and at the origin to zero. The prediction is exact for any field
/// of the form `g(i) + h(j) + l(k)` once all neighbours are in the grid.
#[inline]
pub fn lorenzo_predict(recon: &[f64], dims: Dims, i: usize, j: usize, k: usize) -> f64 {
    let sx = 1;
    let sy = dims.nx;
    let sz = dims.nx * dims.ny;
    let idx = dims.index(i, j, k);
    if i > 0 && j > 0 && k > 0 {
        return recon[idx - sx] + recon[idx - sy] + recon[idx - sz]
            - recon[idx - sx - sy]
            - recon[idx - sx - sz]
            - recon[idx - sy - sz]
            + recon[idx - sx - sy - sz];
    }
    let at = |di: bool, dj: bool, dk: bool| -> f64 {
        if (di && i == 0) || (dj && j == 0) || (dk && k == 0) {
            return 0.0;
        }
        let mut p = idx;
        if di {
            p -= sx;
        }
        if dj {
            p -= sy;
        }
        if dk {
            p -= sz;
        }
        recon[p]
    };
    at(true, false, false) + at(false, true, false) + at(false, false, true)
        - at(true, true, false)
        - at(true, false, true)
        - at(false, true, true)
        + at(true, true, true)
}
