//! Inspect an artifact: header fields and section sizes without touching
//! the payload, then the decoded quantization codes and the predictor
//! chosen for each block.
//!
//!     cargo run --example artifact_info

use lossyfield::cli::info_text;
use lossyfield::codec::{block_predictors, compress, quantization_codes, BlockConfig, ErrorBound, Predictor};
use lossyfield::synth::smooth_field;
use lossyfield::Dims;

fn main() -> anyhow::Result<()> {
    run()
}

pub fn run() -> anyhow::Result<()> {
    let field = smooth_field(Dims::new(36, 36, 24), 3);
    let art = compress(&field, &ErrorBound::pointwise_relative(0.05)?, &BlockConfig::default())?;
    print!("{}", info_text(&art.to_bytes())?);

    let codes = quantization_codes(&art)?;
    let literals = codes.iter().filter(|c| c.is_none()).count();
    let zeros = codes.iter().filter(|c| **c == Some(0)).count();
    let widest = codes.iter().flatten().map(|c| c.unsigned_abs()).max().unwrap_or(0);
    println!(
        "codes: {} cells, {zeros} zero, {literals} literal, widest |code| {widest}",
        codes.len()
    );

    let blocks = block_predictors(&art)?;
    let regression = blocks.iter().filter(|(_, p, _)| *p == Predictor::Regression).count();
    println!(
        "blocks: {} total, {regression} regression, {} lorenzo",
        blocks.len(),
        blocks.len() - regression
    );
    Ok(())
}
