//! Seeded synthetic fields used by the examples, the sweep command and the
//! test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::{Dims, Field3D};
use crate::labeler::FlameChannels;

/// Seed of the canonical smooth test field.
pub const CANONICAL_SEED: u64 = 20_220_705;

struct Mode {
    k: [f64; 3],
    phase: f64,
    amp: f64,
}

fn random_modes(rng: &mut ChaCha8Rng, count: usize, max_wavenumber: u32) -> Vec<Mode> {
    let mut modes = Vec::with_capacity(count);
    while modes.len() < count {
        let k = [0; 3].map(|_: u32| rng.gen_range(0..=max_wavenumber) as f64);
        if k == [0.0; 3] {
            continue;
        }
        let k2: f64 = k.iter().map(|v| v * v).sum();
        modes.push(Mode {
            k,
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
            amp: rng.gen_range(0.5..1.0) / (1.0 + k2),
        });
    }
    modes
}

/// Sum of low-wavenumber Fourier modes scaled into `[-1, 1]`.
fn band_limited(dims: Dims, rng: &mut ChaCha8Rng, modes: usize, max_wavenumber: u32) -> Vec<f64> {
    let modes = random_modes(rng, modes, max_wavenumber);
    let norm: f64 = modes.iter().map(|m| m.amp).sum();
    let ext = dims.as_array().map(|n| n as f64);
    (0..dims.len())
        .map(|idx| {
            let (i, j, k) = dims.coords(idx);
            let p = [i as f64 / ext[0], j as f64 / ext[1], k as f64 / ext[2]];
            modes
                .iter()
                .map(|m| {
                    let arg = std::f64::consts::TAU * (m.k[0] * p[0] + m.k[1] * p[1] + m.k[2] * p[2]) + m.phase;
                    m.amp * arg.cos()
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Strictly positive band-limited field in `[0.5, 2.5]`.
pub fn smooth_field(dims: Dims, seed: u64) -> Field3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = band_limited(dims, &mut rng, 12, 3);
    Field3D::new(dims, g.into_iter().map(|v| (1.5 + v) as f32).collect()).expect("finite by construction")
}

/// The 64³ field used for compression, quality and trend checks.
pub fn canonical_smooth_field() -> Field3D {
    smooth_field(Dims::new(64, 64, 64), CANONICAL_SEED)
}

/// Zero-mean band-limited field in `[-1, 1]`, crossing zero.
pub fn signed_field(dims: Dims, seed: u64) -> Field3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = band_limited(dims, &mut rng, 12, 4);
    Field3D::new(dims, g.into_iter().map(|v| v as f32).collect()).expect("finite by construction")
}

/// Default grid of the synthetic flame.
pub const FLAME_DIMS: Dims = Dims::new(64, 64, 8);

/// Wrinkled hydrogen/air mixing layer with a burning region behind a
/// premixed front.
///
/// Mixture fraction rises from air (x = 0) to fuel (x = nx - 1) through a
/// smoothstep layer whose centre is perturbed by seeded modes; outside the
/// layer both streams are pure (exactly 0 or 1), as in inflow-fed DNS. A progress variable
/// along y marks burnt gas; there reactants are partially consumed and water
/// appears around the stoichiometric mixture fraction. The result contains
/// all five regime classes: air and fuel on the flanks, unburnt mixture
/// ahead of the front, premixed burning across the front and non-premixed
/// burning along the stoichiometric surface.
pub fn flame_field(dims: Dims, seed: u64) -> FlameChannels {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wrinkles: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|m| {
            (
                rng.gen_range(0.02..0.05) / (1.0 + m as f64),
                (m + 1) as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let front: Vec<(f64, f64, f64)> = (0..3)
        .map(|m| {
            (
                rng.gen_range(0.03..0.06) / (1.0 + m as f64),
                (m + 1) as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();

    const Y_FUEL: f64 = 0.1;
    const Y_OX: f64 = 0.233;
    let z_st = Y_OX / (8.0 * Y_FUEL + Y_OX);
    let sigma = 0.18;
    let half_width = 0.3;
    let width_c = 0.05;
    let tau = std::f64::consts::TAU;

    let n = dims.len();
    let mut chans: [Vec<f32>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    let scale = |n: usize| if n > 1 { (n - 1) as f64 } else { 1.0 };
    let (sx, sy, sz) = (scale(dims.nx), scale(dims.ny), scale(dims.nz));
    for idx in 0..n {
        let (i, j, k) = dims.coords(idx);
        let (x, y, z) = (i as f64 / sx, j as f64 / sy, k as f64 / sz);
        let x0 = 0.5
            + wrinkles
                .iter()
                .map(|(a, f, p, q)| a * (tau * f * y + p).sin() * (0.5 + 0.5 * (tau * z + q).cos()))
                .sum::<f64>();
        let t = (0.5 + (x - x0) / (2.0 * half_width)).clamp(0.0, 1.0);
        let mix = t * t * (3.0 - 2.0 * t);
        let y_front = 0.45 + front.iter().map(|(a, f, p)| a * (tau * f * x + p).sin()).sum::<f64>();
        let burnt = 0.5 * (1.0 + ((y - y_front) / width_c).tanh());
        let reaction = (-((mix - z_st) / sigma).powi(2)).exp();
        let consumed = 0.85 * burnt * reaction;
        chans[0].push((Y_FUEL * mix * (1.0 - consumed)) as f32);
        chans[1].push((Y_OX * (1.0 - mix) * (1.0 - consumed)) as f32);
        chans[2].push((0.25 * burnt * reaction) as f32);
        chans[3].push(mix as f32);
    }
    let [h2, o2, h2o, z] = chans.map(|v| Field3D::new(dims, v).expect("finite by construction"));
    FlameChannels {
        y_h2: h2,
        y_o2: o2,
        y_h2o: h2o,
        z,
    }
}
