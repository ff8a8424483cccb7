//! Tiling, splitting, augmentation and reproducible on-disk datasets.
//!
//! A build reads the four source channels, optionally passes them through
//! the codec, labels the full fields, cuts non-overlapping tiles, assigns a
//! seeded 60:20:20 split, fits a min-max scaler on train cells only and
//! writes one sample file per (tile, transform). The manifest is written
//! last, so a failed build never leaves one behind.

mod augment;
mod sample;
mod tiling;

pub use augment::{augment, Augmentation, Flip, Rotation, SubvolumeSample};
pub use sample::{decode_sample, encode_sample, SAMPLE_MAGIC, SAMPLE_VERSION};
pub use tiling::{split_counts, split_dataset, tile_subvolumes, Split, SplitCounts};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use crate::codec::{compress, decompress_like, verify_bound, BlockConfig, ErrorBound};
use crate::fields::{fit_scaler, load_field_with_sidecar, Dims, Field3D, MinMaxScaler};
use crate::labeler::{
    classify_resolved, resolve_thresholds, FlameChannels, LabelField, LabelThresholds, ResolvedThresholds,
    CHANNEL_NAMES,
};
use crate::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

/// Raw field files, one per channel. Each needs a `.meta` sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePaths {
    #[serde(rename = "Y_H2")]
    pub y_h2: PathBuf,
    #[serde(rename = "Y_O2")]
    pub y_o2: PathBuf,
    #[serde(rename = "Y_H2O")]
    pub y_h2o: PathBuf,
    #[serde(rename = "Z")]
    pub z: PathBuf,
}

impl SourcePaths {
    pub fn as_array(&self) -> [&Path; 4] {
        [&self.y_h2, &self.y_o2, &self.y_h2o, &self.z]
    }

    fn map(&self, f: impl Fn(&Path) -> PathBuf) -> Self {
        Self {
            y_h2: f(&self.y_h2),
            y_o2: f(&self.y_o2),
            y_h2o: f(&self.y_h2o),
            z: f(&self.z),
        }
    }
}

/// Which fields the label blocks are computed from in a lossy build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    #[default]
    Clean,
    Lossy,
}

/// Features (and optionally labels) come from `decompress(compress(·))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossySpec {
    pub bound: ErrorBound,
    #[serde(default)]
    pub block: BlockConfig,
    #[serde(default)]
    pub labels: LabelSource,
}

fn default_tile() -> [usize; 3] {
    [256, 256, 3]
}

fn default_augs() -> usize {
    1
}

/// Everything a build depends on besides the source bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub sources: SourcePaths,
    #[serde(default = "default_tile")]
    pub tile_shape: [usize; 3],
    #[serde(default)]
    pub seed: u64,
    /// Extra transformed copies written per train tile.
    #[serde(default = "default_augs")]
    pub augmentations_per_tile: usize,
    #[serde(default)]
    pub thresholds: LabelThresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lossy: Option<LossySpec>,
}

impl DatasetSpec {
    pub fn new(sources: SourcePaths) -> Self {
        Self {
            sources,
            tile_shape: default_tile(),
            seed: 0,
            augmentations_per_tile: default_augs(),
            thresholds: LabelThresholds::default(),
            lossy: None,
        }
    }

    /// Parses a TOML spec. Relative source paths are taken relative to
    /// `base_dir` when given.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut spec: Self = toml::from_str(text).map_err(|e| Error::Format(format!("dataset config: {e}")))?;
        if let Some(base) = base_dir {
            spec.sources = spec
                .sources
                .map(|p| if p.is_relative() { base.join(p) } else { p.to_owned() });
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn tile_dims(&self) -> Dims {
        let [x, y, z] = self.tile_shape;
        Dims::new(x, y, z)
    }

    pub fn validate(&self) -> Result<()> {
        self.tile_dims().check_positive()?;
        self.thresholds.validate()?;
        if self.augmentations_per_tile > 15 {
            return Err(Error::InvalidArgument(format!(
                "at most 15 distinct transforms exist, asked for {}",
                self.augmentations_per_tile
            )));
        }
        if let Some(l) = &self.lossy {
            l.bound.validate()?;
            l.block.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub channel: String,
    pub path: PathBuf,
    pub dims: [usize; 3],
    /// xxh3-64 of the raw data file, hex.
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossyRecord {
    pub spec: LossySpec,
    /// Per channel, in channel order.
    pub compression_ratio: Vec<f64>,
    pub compressed_bytes: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFile {
    /// Relative to the dataset directory.
    pub path: String,
    pub augmentation: Augmentation,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileRecord {
    pub index: usize,
    pub origin: [usize; 3],
    pub split: Split,
    /// Transforms drawn for this tile; empty outside train.
    pub augmentations: Vec<Augmentation>,
    pub files: Vec<SampleFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: u64,
    pub channels: Vec<String>,
    pub sources: Vec<SourceRecord>,
    pub tile_shape: [usize; 3],
    pub augmentations_per_tile: usize,
    pub split_counts: SplitCounts,
    pub tiles: Vec<TileRecord>,
    /// Fitted on train-tile cells of the feature fields.
    pub scaler: MinMaxScaler,
    pub thresholds: LabelThresholds,
    pub resolved_thresholds: ResolvedThresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lossy: Option<LossyRecord>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if m.format_version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "unsupported manifest version {}",
                m.format_version
            )));
        }
        Ok(m)
    }

    /// The inputs that produced this manifest.
    pub fn spec(&self) -> Result<DatasetSpec> {
        let path = |name: &str| {
            self.sources
                .iter()
                .find(|s| s.channel == name)
                .map(|s| s.path.clone())
                .ok_or_else(|| Error::Format(format!("manifest lacks source for channel {name}")))
        };
        Ok(DatasetSpec {
            sources: SourcePaths {
                y_h2: path("Y_H2")?,
                y_o2: path("Y_O2")?,
                y_h2o: path("Y_H2O")?,
                z: path("Z")?,
            },
            tile_shape: self.tile_shape,
            seed: self.seed,
            augmentations_per_tile: self.augmentations_per_tile,
            thresholds: self.thresholds,
            lossy: self.lossy.as_ref().map(|l| l.spec),
        })
    }

    pub fn tiles_in(&self, split: Split) -> impl Iterator<Item = &TileRecord> {
        self.tiles.iter().filter(move |t| t.split == split)
    }
}

/// Linear cell indices covered by a tile at `origin`, in raster order.
pub fn tile_cells(dims: Dims, tile: Dims, origin: [usize; 3]) -> Vec<usize> {
    let mut out = Vec::with_capacity(tile.len());
    for k in 0..tile.nz {
        for j in 0..tile.ny {
            let row = dims.index(origin[0], origin[1] + j, origin[2] + k);
            out.extend(row..row + tile.nx);
        }
    }
    out
}

pub fn load_sample(path: &Path) -> Result<SubvolumeSample> {
    decode_sample(&fs::read(path)?)
}

fn hex(v: u64) -> String {
    format!("{v:016x}")
}

fn tile_augmentations(seed: u64, index: usize, tile: Dims, n: usize) -> Vec<Augmentation> {
    let candidates: Vec<_> = Augmentation::all()
        .into_iter()
        .filter(|a| !a.is_identity() && a.preserves_shape(tile))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stream 0 belongs to the split shuffle
    rng.set_stream(index as u64 + 1);
    candidates
        .choose_multiple(&mut rng, n.min(candidates.len()))
        .copied()
        .collect()
}

struct Loaded {
    clean: FlameChannels,
    records: Vec<SourceRecord>,
}

fn load_sources(sources: &SourcePaths) -> Result<Loaded> {
    let mut fields = Vec::with_capacity(4);
    let mut records = Vec::with_capacity(4);
    for (name, path) in CHANNEL_NAMES.iter().zip(sources.as_array()) {
        let bytes = fs::read(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let (field, _) = load_field_with_sidecar(path, false)?;
        let path = fs::canonicalize(path)?;
        records.push(SourceRecord {
            channel: (*name).to_owned(),
            path,
            dims: field.dims().as_array(),
            checksum: hex(xxh3_64(&bytes)),
        });
        fields.push(field);
    }
    let arr: [Field3D; 4] = fields.try_into().expect("four channels");
    Ok(Loaded {
        clean: FlameChannels::from_array(arr)?,
        records,
    })
}

fn lossy_channels(clean: &FlameChannels, spec: &LossySpec) -> Result<(FlameChannels, LossyRecord)> {
    let mut out = Vec::with_capacity(4);
    let mut ratio = Vec::with_capacity(4);
    let mut bytes = Vec::with_capacity(4);
    for (name, field) in CHANNEL_NAMES.iter().zip(clean.as_array()) {
        let art = compress(field, &spec.bound, &spec.block)?;
        let lossy = decompress_like(&art, field)?;
        let report = verify_bound(field, &lossy, &art.header.bound)?;
        if report.violations > 0 {
            return Err(Error::Invariant(format!(
                "channel {name}: {} bound violations after round trip",
                report.violations
            )));
        }
        let len = art.encoded_len() as u64;
        ratio.push(crate::quality::compression_ratio(field.values().len() as u64 * 4, len)?);
        bytes.push(len);
        out.push(lossy);
    }
    let arr: [Field3D; 4] = out.try_into().expect("four channels");
    Ok((
        FlameChannels::from_array(arr)?,
        LossyRecord {
            spec: *spec,
            compression_ratio: ratio,
            compressed_bytes: bytes,
        },
    ))
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

/// Builds the dataset into `out_dir` and returns its manifest, which is
/// also written to `out_dir/manifest.json`.
pub fn build_dataset(spec: &DatasetSpec, out_dir: &Path) -> Result<DatasetManifest> {
    build(spec, out_dir, None)
}

/// Rebuilds from a manifest and the source files it names. Fails before
/// writing anything if a source checksum no longer matches.
pub fn rebuild_from_manifest(manifest_path: &Path, out_dir: &Path) -> Result<DatasetManifest> {
    let old = DatasetManifest::read(manifest_path)?;
    build(&old.spec()?, out_dir, Some(&old.sources))
}

fn build(spec: &DatasetSpec, out_dir: &Path, expected: Option<&[SourceRecord]>) -> Result<DatasetManifest> {
    spec.validate()?;
    let tile = spec.tile_dims();
    let Loaded { clean, records } = load_sources(&spec.sources)?;
    if let Some(exp) = expected {
        for (got, want) in records.iter().zip(exp) {
            if got.checksum != want.checksum {
                return Err(Error::Data(format!(
                    "source {} changed since the manifest was written (checksum {} != {})",
                    got.path.display(),
                    got.checksum,
                    want.checksum
                )));
            }
        }
    }
    let dims = clean.dims()?;
    let mut warnings = Vec::new();

    let (features, labels_from, lossy) = match &spec.lossy {
        None => (None, None, None),
        Some(l) => {
            let (lossy, rec) = lossy_channels(&clean, l)?;
            match l.labels {
                LabelSource::Clean => (Some(lossy), None, Some(rec)),
                LabelSource::Lossy => (None, Some(lossy), Some(rec)),
            }
        }
    };
    // In a lossy-label build the lossy fields serve as features too.
    let feature_fields = features.as_ref().or(labels_from.as_ref()).unwrap_or(&clean);
    let label_fields = labels_from.as_ref().unwrap_or(&clean);
    let resolved = resolve_thresholds(label_fields, &spec.thresholds)?;
    let labels = classify_resolved(label_fields, &resolved)?;

    let origins = tile_subvolumes(dims, tile)?;
    if origins.len() < 5 {
        warnings.push(format!("only {} tile(s); some splits will be empty", origins.len()));
    }
    let splits = split_dataset(origins.len(), spec.seed)?;
    let train_cells: Vec<usize> = origins
        .iter()
        .zip(&splits)
        .filter(|(_, s)| **s == Split::Train)
        .flat_map(|(o, _)| tile_cells(dims, tile, *o))
        .collect();
    if train_cells.is_empty() {
        return Err(Error::Data("no train tiles to fit the scaler on".into()));
    }
    let channels: Vec<(&str, &Field3D)> = CHANNEL_NAMES.iter().copied().zip(feature_fields.as_array()).collect();
    let scaler = fit_scaler(&channels, Some(&train_cells))?;
    warnings.extend(scaler.warnings());

    fs::create_dir_all(out_dir)?;
    let manifest_path = out_dir.join(MANIFEST_NAME);
    if manifest_path.exists() {
        fs::remove_file(&manifest_path)?;
    }
    for s in Split::ALL {
        fs::create_dir_all(out_dir.join(s.name()))?;
    }

    let tiles = origins
        .par_iter()
        .zip(splits.par_iter())
        .enumerate()
        .map(|(index, (&origin, &split))| {
            let augs = match split {
                Split::Train => tile_augmentations(spec.seed, index, tile, spec.augmentations_per_tile),
                _ => Vec::new(),
            };
            write_tile(
                TileInput {
                    out_dir,
                    dims,
                    tile,
                    index,
                    origin,
                    split,
                    features: feature_fields,
                    labels: &labels,
                    scaler: &scaler,
                },
                augs,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        seed: spec.seed,
        channels: CHANNEL_NAMES.iter().map(|s| (*s).to_owned()).collect(),
        sources: records,
        tile_shape: spec.tile_shape,
        augmentations_per_tile: spec.augmentations_per_tile,
        split_counts: split_counts(origins.len()),
        tiles,
        scaler,
        thresholds: spec.thresholds,
        resolved_thresholds: resolved,
        lossy,
        warnings,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invariant(e.to_string()))?;
    text.push('\n');
    let tmp = out_dir.join(format!("{MANIFEST_NAME}.tmp"));
    write_synced(&tmp, text.as_bytes())?;
    fs::rename(&tmp, &manifest_path)?;
    Ok(manifest)
}

struct TileInput<'a> {
    out_dir: &'a Path,
    dims: Dims,
    tile: Dims,
    index: usize,
    origin: [usize; 3],
    split: Split,
    features: &'a FlameChannels,
    labels: &'a LabelField,
    scaler: &'a MinMaxScaler,
}

fn write_tile(t: TileInput<'_>, augs: Vec<Augmentation>) -> Result<TileRecord> {
    let cells = tile_cells(t.dims, t.tile, t.origin);
    let features = t
        .features
        .as_array()
        .iter()
        .enumerate()
        .map(|(c, f)| {
            let v = f.values();
            cells
                .iter()
                .map(|&i| t.scaler.apply_value(c, v[i] as f64) as f32)
                .collect()
        })
        .collect();
    let codes = t.labels.codes();
    let base = SubvolumeSample {
        shape: t.tile,
        features,
        labels: Some(cells.iter().map(|&i| codes[i]).collect()),
        origin: t.origin,
        augmentations: Vec::new(),
    };
    let mut files = Vec::with_capacity(1 + augs.len());
    for aug in std::iter::once(Augmentation::IDENTITY).chain(augs.iter().copied()) {
        let sample = augment(&base, aug)?;
        let bytes = encode_sample(&sample);
        let rel = format!("{}/tile_{:05}_{}.bin", t.split.name(), t.index, aug);
        write_synced(&t.out_dir.join(&rel), &bytes)?;
        files.push(SampleFile {
            path: rel,
            augmentation: aug,
            checksum: hex(xxh3_64(&bytes)),
        });
    }
    Ok(TileRecord {
        index: t.index,
        origin: t.origin,
        split: t.split,
        augmentations: augs,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tile_cells_cover_block() {
        let dims = Dims::new(4, 3, 2);
        let c = tile_cells(dims, Dims::new(2, 2, 1), [2, 1, 1]);
        assert_eq!(
            c,
            vec![
                dims.index(2, 1, 1),
                dims.index(3, 1, 1),
                dims.index(2, 2, 1),
                dims.index(3, 2, 1)
            ]
        );
    }

    #[test]
    fn augmentation_draw_is_seeded_and_distinct() {
        let t = Dims::new(8, 8, 3);
        let a = tile_augmentations(7, 3, t, 5);
        assert_eq!(a, tile_augmentations(7, 3, t, 5));
        assert_eq!(a.len(), 5);
        let mut u = a.clone();
        u.sort_by_key(|x| x.codes());
        u.dedup();
        assert_eq!(u.len(), 5);
        let rect = tile_augmentations(7, 3, Dims::new(8, 4, 3), 15);
        assert_eq!(rect.len(), 7);
        assert!(rect.iter().all(|x| x.preserves_shape(Dims::new(8, 4, 3))));
    }

    #[test]
    fn spec_from_toml_resolves_paths() {
        let text = r#"
            seed = 3
            tile_shape = [16, 16, 2]
            [sources]
            Y_H2 = "a.f32"
            Y_O2 = "/abs/b.f32"
            Y_H2O = "c.f32"
            Z = "d.f32"
            [lossy]
            bound = { mode = "pointwise-relative", value = 0.1 }
            labels = "lossy"
        "#;
        let s = DatasetSpec::from_toml(text, Some(Path::new("/data"))).unwrap();
        assert_eq!(s.sources.y_h2, PathBuf::from("/data/a.f32"));
        assert_eq!(s.sources.y_o2, PathBuf::from("/abs/b.f32"));
        assert_eq!(s.augmentations_per_tile, 1);
        let l = s.lossy.unwrap();
        assert_eq!(l.labels, LabelSource::Lossy);
        assert_eq!(l.block, BlockConfig::default());
    }
}
