//! Sweep point-wise relative bounds over the canonical smooth field and
//! print the CSV rows: ratio goes up, PSNR and SSIM go down.
//!
//!     cargo run --release --example quality_sweep

use anyhow::ensure;
use lossyfield::codec::BlockConfig;
use lossyfield::sweep::{run_sweep, sweep_csv, DEFAULT_BOUNDS, TOTAL};
use lossyfield::synth::canonical_smooth_field;

fn main() -> anyhow::Result<()> {
    run()
}

pub fn run() -> anyhow::Result<()> {
    let channels = vec![("smooth".to_owned(), canonical_smooth_field())];
    let rows = run_sweep(&channels, &DEFAULT_BOUNDS, &BlockConfig::default(), None)?;
    print!("{}", sweep_csv(&rows));

    let field_rows: Vec<_> = rows.iter().filter(|r| r.channel != TOTAL).collect();
    for w in field_rows.windows(2) {
        ensure!(w[1].ratio >= w[0].ratio * 0.95, "ratio should grow with the bound");
    }
    Ok(())
}
