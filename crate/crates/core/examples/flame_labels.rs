//! Label the synthetic flame into five regimes, then measure how many
//! labels flip when the species fields go through the compressor first.
//!
//!     cargo run --release --example flame_labels

use lossyfield::codec::{compress, decompress_like, BlockConfig, ErrorBound};
use lossyfield::labeler::{class_histogram, classify, label_error, FlameChannels, LabelThresholds, Regime};
use lossyfield::synth::{flame_field, CANONICAL_SEED, FLAME_DIMS};

fn main() -> anyhow::Result<()> {
    run()
}

pub fn run() -> anyhow::Result<()> {
    let set = flame_field(FLAME_DIMS, CANONICAL_SEED);
    let thr = LabelThresholds::default();
    let clean = classify(&set, &thr)?;
    let hist = class_histogram(&clean);
    println!("clean labels on {}:", FLAME_DIMS);
    for r in Regime::ALL {
        println!("  {:<20} {:>6}", r.name(), hist.count(r));
    }

    println!("\nbound   label error");
    for pct in [1e-6, 0.01, 0.05, 0.10, 0.20, 0.40] {
        let bound = ErrorBound::pointwise_relative(pct)?;
        let lossy = set.as_array().map(|f| {
            let art = compress(f, &bound, &BlockConfig::default()).expect("compress");
            decompress_like(&art, f).expect("decompress")
        });
        let relabeled = classify(&FlameChannels::from_array(lossy)?, &thr)?;
        println!(
            "{:<7} {:.4}",
            format!("{}", bound.value),
            label_error(&clean, &relabeled)?
        );
    }
    Ok(())
}
