//! Field generators and brute-force oracles shared by the integration and
//! acceptance tests. The oracles deliberately avoid the library's code paths.

#![allow(dead_code)]

use lossyfield::synth::{signed_field, smooth_field};
use lossyfield::{Dims, Field3D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Smooth,
    Noisy,
    Signed,
    NearZero,
    WideRange,
}

pub const FAMILIES: [Family; 5] = [
    Family::Smooth,
    Family::Noisy,
    Family::Signed,
    Family::NearZero,
    Family::WideRange,
];

pub fn make_field(family: Family, dims: Dims, seed: u64) -> Field3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    match family {
        Family::Smooth => smooth_field(dims, seed),
        Family::Noisy => {
            let base = smooth_field(dims, seed);
            let v = base.values().iter().map(|x| x + rng.gen_range(-0.3f32..0.3)).collect();
            Field3D::new(dims, v).unwrap()
        }
        Family::Signed => signed_field(dims, seed),
        Family::NearZero => {
            // small values with exact zeros and sign changes
            let base = signed_field(dims, seed);
            let v = base
                .values()
                .iter()
                .map(|x| {
                    if rng.gen_bool(0.1) {
                        0.0
                    } else {
                        x * 1e-6 + rng.gen_range(-1e-9f32..1e-9)
                    }
                })
                .collect();
            Field3D::new(dims, v).unwrap()
        }
        Family::WideRange => {
            // about ten decades, both signs
            let base = smooth_field(dims, seed);
            let v = base
                .values()
                .iter()
                .map(|x| {
                    let e = (x - 0.5) * 5.0 - 5.0; // [-5, 5]
                    let s = if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
                    s * 10f32.powf(e + rng.gen_range(-0.1f32..0.1))
                })
                .collect();
            Field3D::new(dims, v).unwrap()
        }
    }
}

pub fn random_dims(rng: &mut impl Rng, max: usize) -> Dims {
    Dims::new(rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// Straightforward per-cell bound check in f64.
pub fn oracle_violations(orig: &[f32], recon: &[f32], pwr: bool, value: f64, zero_threshold: f64) -> usize {
    orig.iter()
        .zip(recon)
        .filter(|(&x, &y)| {
            let (x, y) = (x as f64, y as f64);
            let err = (y - x).abs();
            if !err.is_finite() {
                return true;
            }
            if !pwr {
                return err > value;
            }
            if x == 0.0 || x.abs() < zero_threshold {
                err > zero_threshold
            } else {
                err > value * x.abs() || (y != 0.0 && y.signum() != x.signum())
            }
        })
        .count()
}

pub fn oracle_psnr(a: &[f32], b: &[f32]) -> f64 {
    let lo = a.iter().fold(f64::INFINITY, |m, &v| m.min(v as f64));
    let hi = a.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64));
    let mse = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        / a.len() as f64;
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * ((hi - lo) * (hi - lo) / mse).log10()
}

/// Window-by-window SSIM with two-pass moments.
pub fn oracle_ssim(a: &Field3D, b: &Field3D, l: f64) -> f64 {
    let d = a.dims();
    let w = 8;
    let c1 = (0.01 * l).powi(2);
    let c2 = (0.03 * l).powi(2);
    let mut total = 0.0;
    for k in 0..d.nz {
        let mut acc = 0.0;
        let mut count = 0usize;
        for j0 in 0..=d.ny - w {
            for i0 in 0..=d.nx - w {
                let mut xs = Vec::with_capacity(w * w);
                let mut ys = Vec::with_capacity(w * w);
                for j in j0..j0 + w {
                    for i in i0..i0 + w {
                        xs.push(a.get(i, j, k) as f64);
                        ys.push(b.get(i, j, k) as f64);
                    }
                }
                let n = xs.len() as f64;
                let mx = xs.iter().sum::<f64>() / n;
                let my = ys.iter().sum::<f64>() / n;
                let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n;
                let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n;
                let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
                acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        total += acc / count as f64;
    }
    total / d.nz as f64
}

pub fn oracle_hamming(a: &[u8], b: &[u8]) -> f64 {
    let mut diff = 0usize;
    for i in 0..a.len() {
        if a[i] != b[i] {
            diff += 1;
        }
    }
    diff as f64 / a.len() as f64
}

/// Random pair on `dims`: a smooth field and a noisy copy.
pub fn random_pair(dims: Dims, seed: u64) -> (Field3D, Field3D) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Field3D::from_fn(dims, |_, _, _| rng.gen_range(-2.0f32..3.0)).unwrap();
    let amp = rng.gen_range(0.01f32..0.5);
    let b = a
        .with_values(a.values().iter().map(|v| v + rng.gen_range(-amp..amp)).collect())
        .unwrap();
    (a, b)
}
