use super::{Axis, Dims, Field3D};

/// Partial derivatives along all three axes, kept in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub dims: Dims,
    pub components: [Vec<f64>; 3],
}

impl GradientField {
    pub fn component(&self, axis: Axis) -> &[f64] {
        &self.components[axis.ordinal()]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        let [gx, gy, gz] = &self.components;
        gx.iter()
            .zip(gy)
            .zip(gz)
            .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
            .collect()
    }
}

/// Finite-difference derivative along `axis` using the field's coordinates.
///
/// Interior cells use the central difference
/// `(f[i+1] - f[i-1]) / (c[i+1] - c[i-1])`, boundary cells the one-sided
/// first-order difference. An axis of extent 1 yields all zeros. Both
/// stencils are exact for affine profiles.
pub fn gradient_values(field: &Field3D, axis: Axis) -> Vec<f64> {
    let dims = field.dims();
    let n = dims.extent(axis);
    let mut out = vec![0.0; dims.len()];
    if n < 2 {
        return out;
    }
    let c = field.coords(axis);
    let stride = match axis {
        Axis::X => 1,
        Axis::Y => dims.nx,
        Axis::Z => dims.nx * dims.ny,
    };
    let v = field.values();
    for (idx, slot) in out.iter_mut().enumerate() {
        let (i, j, k) = dims.coords(idx);
        let pos = [i, j, k][axis.ordinal()];
        let (lo, hi) = if pos == 0 {
            (0, 1)
        } else if pos == n - 1 {
            (n - 2, n - 1)
        } else {
            (pos - 1, pos + 1)
        };
        let f_lo = v[idx - (pos - lo) * stride] as f64;
        let f_hi = v[idx + (hi - pos) * stride] as f64;
        *slot = (f_hi - f_lo) / (c[hi] - c[lo]);
    }
    out
}

/// Single-axis derivative as a single-precision field on the same grid.
pub fn gradient(field: &Field3D, axis: Axis) -> Field3D {
    let values = gradient_values(field, axis).into_iter().map(|g| g as f32).collect();
    field.with_values(values).expect("gradient preserves grid shape")
}

pub fn gradient_vector(field: &Field3D) -> GradientField {
    GradientField {
        dims: field.dims(),
        components: Axis::ALL.map(|a| gradient_values(field, a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_zero_gradient() {
        let f = Field3D::constant(Dims::new(4, 3, 2), 2.5).unwrap();
        for a in Axis::ALL {
            assert!(gradient_values(&f, a).iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn linear_profile_exact_everywhere() {
        let f = Field3D::from_fn(Dims::new(5, 2, 1), |i, _, _| 2.0 * i as f32).unwrap();
        let g = gradient(&f, Axis::X);
        assert!(g.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn stretched_central_difference() {
        // f = c^2 on c = [0, 1, 3]
        let coords = [vec![0.0, 1.0, 3.0], vec![0.0], vec![0.0]];
        let f = Field3D::with_coords(Dims::new(3, 1, 1), vec![0.0, 1.0, 9.0], coords).unwrap();
        let g = gradient_values(&f, Axis::X);
        assert_eq!(g[1], (9.0 - 0.0) / (3.0 - 0.0));
        assert_eq!(g[0], 1.0);
        assert_eq!(g[2], 4.0);
    }

    #[test]
    fn unit_extent_axis_is_zero() {
        let f = Field3D::from_fn(Dims::new(3, 3, 1), |i, j, _| (i * j) as f32).unwrap();
        assert!(gradient_values(&f, Axis::Z).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn separable_affine_exact_on_stretched_grid() {
        let coords = [vec![0.0, 0.5, 2.0, 2.25], vec![-1.0, 0.0, 4.0], vec![1.0, 2.0]];
        let dims = Dims::new(4, 3, 2);
        let mut vals = Vec::new();
        for k in 0..2 {
            for j in 0..3 {
                for i in 0..4 {
                    vals.push((3.0 * coords[0][i] - 0.5 * coords[1][j] + 2.0 * coords[2][k] + 1.0) as f32);
                }
            }
        }
        let f = Field3D::with_coords(dims, vals, coords).unwrap();
        let grad = gradient_vector(&f);
        for (axis, want) in [(Axis::X, 3.0), (Axis::Y, -0.5), (Axis::Z, 2.0)] {
            for g in grad.component(axis) {
                assert!((g - want).abs() < 1e-5, "{axis:?}: {g} vs {want}");
            }
        }
    }
}
