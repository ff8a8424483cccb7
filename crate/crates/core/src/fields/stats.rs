use serde::{Deserialize, Serialize};

use super::Field3D;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub rms: f64,
    pub n_cells: usize,
    pub n_nonfinite: usize,
}

/// Min, max, mean and RMS over the finite cells.
pub fn field_stats(field: &Field3D) -> Result<FieldStats> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n = 0usize;
    for &v in field.values() {
        if !v.is_finite() {
            continue;
        }
        let v = v as f64;
        min = min.min(v);
        max = max.max(v);
        sum += v;
        sum_sq += v * v;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Data("field has no finite cells".into()));
    }
    let mean = (sum / n as f64).clamp(min, max);
    Ok(FieldStats {
        min,
        max,
        mean,
        rms: (sum_sq / n as f64).sqrt(),
        n_cells: field.values().len(),
        n_nonfinite: field.values().len() - n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dims;

    #[test]
    fn small_cases() {
        let f = Field3D::new(Dims::new(4, 1, 1), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = field_stats(&f).unwrap();
        assert_eq!((s.min, s.max, s.mean), (1.0, 4.0, 2.5));
        let c = Field3D::constant(Dims::new(3, 3, 3), 5.0).unwrap();
        assert_eq!(field_stats(&c).unwrap().rms, 5.0);
    }

    #[test]
    fn all_nonfinite_is_error() {
        let f = Field3D::new_allow_nonfinite(Dims::new(2, 1, 1), vec![f32::NAN, f32::INFINITY]).unwrap();
        assert!(field_stats(&f).is_err());
        let g = Field3D::new_allow_nonfinite(Dims::new(2, 1, 1), vec![f32::NAN, 3.0]).unwrap();
        let s = field_stats(&g).unwrap();
        assert_eq!((s.n_nonfinite, s.mean), (1, 3.0));
    }

    #[test]
    fn matches_two_pass_oracle_on_random_cube() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let dims = Dims::new(64, 64, 64);
        let vals: Vec<f32> = (0..dims.len()).map(|_| rng.gen_range(-3.0..10.0)).collect();
        let f = Field3D::new(dims, vals.clone()).unwrap();
        let s = field_stats(&f).unwrap();

        // two-pass oracle: mean first, then rms through mean + variance
        let n = vals.len() as f64;
        let mean: f64 = vals.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var: f64 = vals.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        let rms = (var + mean * mean).sqrt();
        let min = vals.iter().fold(f32::INFINITY, |a, &b| a.min(b)) as f64;
        let max = vals.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64;
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(s.mean, mean) < 1e-6);
        assert!(rel(s.rms, rms) < 1e-6);
        assert_eq!((s.min, s.max), (min, max));
    }
}
