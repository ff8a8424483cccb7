//! Compress a smooth field under an absolute bound, write the artifact to
//! disk, read it back and check every cell.
//!
//!     cargo run --example compress_roundtrip [-- OUT_DIR]

use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use lossyfield::codec::{compress, decompress, verify_bound, BlockConfig, CompressedArtifact, ErrorBound};
use lossyfield::quality::{psnr, quality_report};
use lossyfield::synth::smooth_field;
use lossyfield::Dims;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let dir = tempfile::tempdir()?;
    run(out.as_deref().unwrap_or(dir.path()))
}

pub fn run(out_dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let field = smooth_field(Dims::new(48, 40, 32), 7);
    let (lo, hi) = field.finite_range().context("empty field")?;
    // one thousandth of the value range
    let bound = ErrorBound::absolute((hi - lo) as f64 * 1e-3)?;

    let artifact = compress(&field, &bound, &BlockConfig::default())?;
    let path = out_dir.join("smooth.blsf");
    std::fs::write(&path, artifact.to_bytes())?;

    let reread = CompressedArtifact::from_bytes(&std::fs::read(&path)?)?;
    let recon = decompress(&reread)?;
    let check = verify_bound(&field, &recon, &reread.header.bound)?;
    ensure!(check.violations == 0, "{} cells outside {bound}", check.violations);

    let report = quality_report(&field, &recon, &reread, &bound)?;
    println!("field {} range [{lo:.3}, {hi:.3}]", field.dims());
    println!(
        "bound {bound}, artifact {} bytes at {}",
        reread.encoded_len(),
        path.display()
    );
    println!(
        "ratio {:.2}  psnr {:.2} dB  ssim {:.4}  max abs err {:.3e}",
        report.compression_ratio, report.psnr_db, report.ssim, check.max_abs_error
    );
    println!("psnr against itself: {}", psnr(&field, &field)?);
    Ok(())
}
