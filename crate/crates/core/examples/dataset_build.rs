//! Build a tiled, split and augmented dataset from flame fields on disk,
//! read a sample back, then rebuild it from the manifest alone.
//!
//!     cargo run --release --example dataset_build [-- OUT_DIR]

use std::path::{Path, PathBuf};

use anyhow::ensure;
use lossyfield::dataset::{
    build_dataset, load_sample, rebuild_from_manifest, DatasetSpec, SourcePaths, Split, MANIFEST_NAME,
};
use lossyfield::fields::save_field_with_sidecar;
use lossyfield::labeler::CHANNEL_NAMES;
use lossyfield::synth::{flame_field, CANONICAL_SEED, FLAME_DIMS};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let dir = tempfile::tempdir()?;
    run(out.as_deref().unwrap_or(dir.path()))
}

pub fn run(root: &Path) -> anyhow::Result<()> {
    let src = root.join("fields");
    std::fs::create_dir_all(&src)?;
    let set = flame_field(FLAME_DIMS, CANONICAL_SEED);
    let mut paths = Vec::new();
    for (name, f) in CHANNEL_NAMES.iter().zip(set.as_array()) {
        let p = src.join(format!("{name}.f32"));
        save_field_with_sidecar(&p, f, Some(name))?;
        paths.push(p);
    }
    let spec = DatasetSpec {
        tile_shape: [16, 16, 2],
        augmentations_per_tile: 2,
        ..DatasetSpec::new(SourcePaths {
            y_h2: paths[0].clone(),
            y_o2: paths[1].clone(),
            y_h2o: paths[2].clone(),
            z: paths[3].clone(),
        })
    };

    let out = root.join("dataset");
    let m = build_dataset(&spec, &out)?;
    let c = m.split_counts;
    println!(
        "{} tiles: train {} val {} test {}",
        m.tiles.len(),
        c.train,
        c.val,
        c.test
    );
    for w in &m.warnings {
        println!("warning: {w}");
    }

    let tile = m.tiles_in(Split::Train).next().expect("a train tile");
    for f in &tile.files {
        let s = load_sample(&out.join(&f.path))?;
        println!(
            "{} origin {:?} shape {} channels {} provenance {}",
            f.path,
            s.origin,
            s.shape,
            s.features.len(),
            s.provenance_tag()
        );
    }

    let again = root.join("rebuilt");
    rebuild_from_manifest(&out.join(MANIFEST_NAME), &again)?;
    for t in &m.tiles {
        for f in &t.files {
            ensure!(
                std::fs::read(out.join(&f.path))? == std::fs::read(again.join(&f.path))?,
                "{}",
                f.path
            );
        }
    }
    ensure!(std::fs::read(out.join(MANIFEST_NAME))? == std::fs::read(again.join(MANIFEST_NAME))?);
    println!("rebuild from manifest is byte-identical");
    Ok(())
}
