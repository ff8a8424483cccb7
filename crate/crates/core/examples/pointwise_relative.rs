//! Point-wise relative bounds on a signed field spanning ten orders of
//! magnitude. An absolute bound wide enough for the large values wipes out
//! the small ones; the relative bound keeps every cell within its own
//! percentage.
//!
//!     cargo run --example pointwise_relative

use anyhow::ensure;
use lossyfield::codec::{compress, decompress_like, verify_bound, BlockConfig, ErrorBound};
use lossyfield::{Dims, Field3D};

fn main() -> anyhow::Result<()> {
    run()
}

fn wide_field(dims: Dims) -> anyhow::Result<Field3D> {
    Ok(Field3D::from_fn(dims, |i, j, k| {
        let e = -5.0 + 10.0 * i as f32 / (dims.nx - 1) as f32;
        let wobble = 1.0 + 0.3 * ((j as f32 * 0.4).sin() * (k as f32 * 0.3).cos());
        let sign = if (j / 8 + k / 8) % 2 == 0 { 1.0 } else { -1.0 };
        // a sliver of exact zeros
        if i == dims.nx / 2 && j < 4 {
            0.0
        } else {
            sign * 10f32.powf(e) * wobble
        }
    })?)
}

pub fn run() -> anyhow::Result<()> {
    let field = wide_field(Dims::new(64, 32, 16))?;
    let cfg = BlockConfig::default();
    let worst_rel = |recon: &Field3D| {
        field
            .values()
            .iter()
            .zip(recon.values())
            .filter(|(x, _)| **x != 0.0)
            .map(|(x, y)| ((x - y) / x).abs() as f64)
            .fold(0.0, f64::max)
    };

    println!(
        "{:>12} {:>8} {:>10} {:>14}",
        "bound", "bytes", "violations", "max rel err"
    );
    for pct in [0.01, 0.05, 0.10, 0.30] {
        // the default threshold scales with max|x| and would floor the 1e-5
        // cells; pin it below the smallest magnitude instead
        let bound = ErrorBound::pointwise_relative(pct)?.with_zero_threshold(1e-6)?;
        let art = compress(&field, &bound, &cfg)?;
        let recon = decompress_like(&art, &field)?;
        let r = verify_bound(&field, &recon, &art.header.bound)?;
        ensure!(r.violations == 0);
        let zeros = field.values().iter().filter(|x| **x == 0.0).count();
        let kept = field
            .values()
            .iter()
            .zip(recon.values())
            .filter(|(x, y)| **x == 0.0 && **y == 0.0)
            .count();
        ensure!(kept == zeros, "zeros must survive");
        println!(
            "{:>12} {:>8} {:>10} {:>14.4e}",
            format!("pwr {pct}"),
            art.encoded_len(),
            r.violations,
            worst_rel(&recon)
        );
    }

    // absolute bound at 1% of the largest magnitude
    let big = field.values().iter().fold(0f32, |m, v| m.max(v.abs())) as f64;
    let abs = ErrorBound::absolute(0.01 * big)?;
    let art = compress(&field, &abs, &cfg)?;
    let recon = decompress_like(&art, &field)?;
    println!(
        "{:>12} {:>8} {:>10} {:>14.4e}  (small values lost)",
        "abs 1%max",
        art.encoded_len(),
        verify_bound(&field, &recon, &art.header.bound)?.violations,
        worst_rel(&recon)
    );
    Ok(())
}
