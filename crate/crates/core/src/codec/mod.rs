//! Error-bounded lossy codec for single-precision 3-D fields.
//!
//! Pipeline: (point-wise relative mode only) log2 transform with sign and
//! zero bitmaps, per-block choice between a Lorenzo predictor on
//! reconstructed values and a plane regression fitted to original values,
//! residual quantization into `2 * eb` wide bins, canonical Huffman coding of
//! bin indices, and a general-purpose byte stage over every section.
//!
//! Every cell is checked against the requested bound with the final
//! single-precision value the decoder will produce; cells that fail (and
//! residuals beyond the bin radius) are stored verbatim. The bound therefore
//! holds by construction, not only in exact arithmetic.

mod bound;
mod entropy;
mod format;
mod lorenzo;
mod quantize;
mod regression;
mod transform;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use crate::fields::{Dims, Field3D};
use crate::{Error, Result, Section};

pub use bound::{verify_bound, BoundMode, BoundReport, ErrorBound};
pub use entropy::{entropy_decode, entropy_encode, huffman_decode, huffman_encode, ByteStage, EncodedCodes};
pub use format::{read_header, ArtifactHeader, CompressedArtifact, Transform, FORMAT_VERSION, HEADER_LEN, MAGIC};
pub use lorenzo::lorenzo_predict;
pub use quantize::{dequantize, quantize_residual, Quantized};
pub use regression::{
    block_regions, estimate_block_errors, fit_block_regression, plane_predict, select_predictor, BlockRegion,
    PlaneCoeffs, Predictor,
};
pub use transform::{log_bound, log_transform, LogTransformed};

use bound::{check_cell, CellCheck};
use format::{pack_bits, unpack_bits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockConfig {
    pub block_edge: usize,
    pub bin_radius: u32,
    pub lorenzo: bool,
    pub regression: bool,
    pub byte_stage: ByteStage,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            block_edge: 6,
            bin_radius: 32768,
            lorenzo: true,
            regression: true,
            byte_stage: ByteStage::Deflate,
        }
    }
}

impl BlockConfig {
    pub fn lorenzo_only() -> Self {
        Self {
            regression: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=u16::MAX as usize).contains(&self.block_edge) {
            return Err(Error::InvalidArgument(format!(
                "block edge must be in 2..=65535, got {}",
                self.block_edge
            )));
        }
        if !(2..=(i32::MAX as u32 - 1) / 2).contains(&self.bin_radius) {
            return Err(Error::InvalidArgument(format!(
                "bin radius must be at least 2 and fit the symbol range, got {}",
                self.bin_radius
            )));
        }
        if !self.lorenzo && !self.regression {
            return Err(Error::InvalidArgument("at least one predictor must be enabled".into()));
        }
        Ok(())
    }

    fn marker(&self) -> u32 {
        2 * self.bin_radius + 1
    }
}

#[derive(Debug, Clone, Copy)]
struct BlockPlan {
    predictor: Predictor,
    coeffs: PlaneCoeffs,
}

/// Everything both directions need to reproduce the same arithmetic.
struct Engine<'a> {
    dims: Dims,
    mode: BoundMode,
    value: f64,
    zero_threshold: f64,
    edge: usize,
    blocks_x: usize,
    blocks_xy: usize,
    regions: &'a [BlockRegion],
    plans: &'a [BlockPlan],
}

impl Engine<'_> {
    #[inline]
    fn predict(&self, recon: &[f64], i: usize, j: usize, k: usize) -> f64 {
        let b = i / self.edge + self.blocks_x * (j / self.edge) + self.blocks_xy * (k / self.edge);
        let plan = &self.plans[b];
        let p = match plan.predictor {
            Predictor::Lorenzo => lorenzo_predict(recon, self.dims, i, j, k),
            Predictor::Regression => {
                let [ox, oy, oz] = self.regions[b].origin;
                plane_predict(&plan.coeffs, i - ox, j - oy, k - oz)
            }
        };
        if p.is_finite() {
            p
        } else {
            0.0
        }
    }

    #[inline]
    fn output(&self, working: f64, negative: bool) -> f32 {
        match self.mode {
            BoundMode::Absolute => working as f32,
            BoundMode::PointwiseRelative => transform::from_log(working, negative),
        }
    }

    #[inline]
    fn literal_working(&self, x: f32) -> Option<f64> {
        if !x.is_finite() {
            return None;
        }
        Some(match self.mode {
            BoundMode::Absolute => x as f64,
            BoundMode::PointwiseRelative => transform::to_log(x),
        })
    }
}

fn block_grid(dims: Dims, edge: usize) -> (usize, usize) {
    let bx = dims.nx.div_ceil(edge);
    (bx, bx * dims.ny.div_ceil(edge))
}

fn plan_block(
    work: &[f64],
    filled: &[f64],
    usable: &[bool],
    dims: Dims,
    region: &BlockRegion,
    cfg: &BlockConfig,
) -> BlockPlan {
    let lorenzo = BlockPlan {
        predictor: Predictor::Lorenzo,
        coeffs: [0.0; 4],
    };
    if !cfg.regression {
        return lorenzo;
    }
    let [ox, oy, oz] = region.origin;
    let mut samples = Vec::with_capacity(region.extent.iter().product());
    for w in 0..region.extent[2] {
        for v in 0..region.extent[1] {
            for u in 0..region.extent[0] {
                let idx = dims.index(ox + u, oy + v, oz + w);
                if usable[idx] {
                    samples.push(([u as f64, v as f64, w as f64], work[idx]));
                }
            }
        }
    }
    let coeffs = fit_block_regression(&samples);
    if !cfg.lorenzo {
        return BlockPlan {
            predictor: Predictor::Regression,
            coeffs,
        };
    }
    let (le, re) = estimate_block_errors(filled, usable, dims, region, &coeffs);
    match select_predictor(le, re) {
        Predictor::Lorenzo => lorenzo,
        Predictor::Regression => BlockPlan {
            predictor: Predictor::Regression,
            coeffs,
        },
    }
}

/// Compresses `field` so that [`decompress`] honours `bound` at every cell.
///
/// Output bytes depend only on the inputs, not on the rayon thread count.
pub fn compress(field: &Field3D, bound: &ErrorBound, cfg: &BlockConfig) -> Result<CompressedArtifact> {
    bound.validate()?;
    cfg.validate()?;
    let dims = field.dims();
    dims.check_positive()?;
    let bound = bound.resolved_for(field);
    let zero_threshold = bound.zero_threshold.unwrap_or(0.0);
    let x = field.values();
    let n = dims.len();

    let (work, negative, zero, eb, transform) = match bound.mode {
        BoundMode::Absolute => {
            let work: Vec<f64> = x
                .iter()
                .map(|&v| if v.is_finite() { v as f64 } else { f64::NAN })
                .collect();
            (work, vec![false; n], vec![false; n], bound.value, Transform::None)
        }
        BoundMode::PointwiseRelative => {
            let t = log_transform(field, bound.value, zero_threshold);
            (t.values, t.negative, t.zero, t.delta, Transform::Log2)
        }
    };
    let usable: Vec<bool> = work.iter().map(|w| w.is_finite()).collect();

    // Original values with unusable cells filled by their own Lorenzo
    // prediction; input to predictor selection.
    let mut filled = vec![0.0f64; n];
    for idx in 0..n {
        filled[idx] = if usable[idx] {
            work[idx]
        } else {
            let (i, j, k) = dims.coords(idx);
            lorenzo_predict(&filled, dims, i, j, k)
        };
    }

    let regions = block_regions(dims, cfg.block_edge);
    let plans: Vec<BlockPlan> = regions
        .par_iter()
        .map(|r| plan_block(&work, &filled, &usable, dims, r, cfg))
        .collect();
    drop(filled);

    let (blocks_x, blocks_xy) = block_grid(dims, cfg.block_edge);
    let engine = Engine {
        dims,
        mode: bound.mode,
        value: bound.value,
        zero_threshold,
        edge: cfg.block_edge,
        blocks_x,
        blocks_xy,
        regions: &regions,
        plans: &plans,
    };

    let radius = cfg.bin_radius;
    let marker = cfg.marker();
    let mut recon = vec![0.0f64; n];
    let mut symbols = Vec::with_capacity(n);
    let mut literals = Vec::new();
    let mut idx = 0;
    for k in 0..dims.nz {
        for j in 0..dims.ny {
            for i in 0..dims.nx {
                let pred = engine.predict(&recon, i, j, k);
                if zero[idx] {
                    recon[idx] = pred;
                    idx += 1;
                    continue;
                }
                let xv = x[idx];
                if usable[idx] {
                    if let Quantized::Code(m) = quantize_residual(work[idx] - pred, eb, radius) {
                        let rw = pred + dequantize(m, eb);
                        let y = engine.output(rw, negative[idx]);
                        if check_cell(xv, y, engine.mode, engine.value, engine.zero_threshold) != CellCheck::Violation {
                            symbols.push((m + radius as i32) as u32);
                            recon[idx] = rw;
                            idx += 1;
                            continue;
                        }
                    }
                }
                symbols.push(marker);
                literals.extend_from_slice(&xv.to_le_bytes());
                recon[idx] = engine.literal_working(xv).unwrap_or(pred);
                idx += 1;
            }
        }
    }

    let mut coeff_bytes = Vec::new();
    for p in plans.iter().filter(|p| p.predictor == Predictor::Regression) {
        for c in p.coeffs {
            coeff_bytes.extend_from_slice(&c.to_le_bytes());
        }
    }
    let predictor_bits: Vec<bool> = plans.iter().map(|p| p.predictor == Predictor::Regression).collect();
    let codes = huffman_encode(&symbols);
    let (sign_raw, zero_raw) = match bound.mode {
        BoundMode::Absolute => (Vec::new(), Vec::new()),
        BoundMode::PointwiseRelative => (pack_bits(&negative), pack_bits(&zero)),
    };
    let stage = cfg.byte_stage;
    let raw = [
        pack_bits(&predictor_bits),
        coeff_bytes,
        codes.table,
        codes.payload,
        literals,
        sign_raw,
        zero_raw,
    ];
    let sections = raw.map(|s| stage.encode(&s));

    Ok(CompressedArtifact {
        header: ArtifactHeader {
            version: FORMAT_VERSION,
            dims,
            bound,
            config: *cfg,
            transform,
            original_checksum: xxh3_64(&field.to_le_bytes()),
        },
        sections,
    })
}

/// Decoded (but not yet reconstructed) artifact contents.
struct Decoded {
    plans: Vec<BlockPlan>,
    regions: Vec<BlockRegion>,
    symbols: Vec<u32>,
    literals: Vec<f32>,
    negative: Vec<bool>,
    zero: Vec<bool>,
}

fn decode_sections(a: &CompressedArtifact) -> Result<Decoded> {
    let h = &a.header;
    let stage = h.config.byte_stage;
    let n = h.dims.len();
    let get = |s: Section| stage.decode(a.section(s), s);

    let regions = block_regions(h.dims, h.config.block_edge);
    let bits = unpack_bits(&get(Section::PredictorBitmap)?, regions.len(), Section::PredictorBitmap)?;
    let coeff_raw = get(Section::Coefficients)?;
    let n_reg = bits.iter().filter(|&&b| b).count();
    if coeff_raw.len() != n_reg * 16 {
        return Err(Error::decode(
            Section::Coefficients,
            format!("{} bytes for {n_reg} regression blocks", coeff_raw.len()),
        ));
    }
    let mut coeffs = coeff_raw
        .chunks_exact(16)
        .map(|c| std::array::from_fn::<f32, 4, _>(|q| f32::from_le_bytes(c[4 * q..4 * q + 4].try_into().unwrap())));
    let plans = bits
        .iter()
        .map(|&reg| {
            if reg {
                BlockPlan {
                    predictor: Predictor::Regression,
                    coeffs: coeffs.next().expect("count checked above"),
                }
            } else {
                BlockPlan {
                    predictor: Predictor::Lorenzo,
                    coeffs: [0.0; 4],
                }
            }
        })
        .collect();

    let table = get(Section::FrequencyTable)?;
    let payload = get(Section::Codes)?;
    let symbols = huffman_decode(&table, &payload)?;

    let lit_raw = get(Section::Literals)?;
    if lit_raw.len() % 4 != 0 {
        return Err(Error::decode(Section::Literals, "length is not a multiple of 4"));
    }
    let literals = lit_raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let (negative, zero) = match h.bound.mode {
        BoundMode::Absolute => (vec![false; n], vec![false; n]),
        BoundMode::PointwiseRelative => (
            unpack_bits(&get(Section::SignBitmap)?, n, Section::SignBitmap)?,
            unpack_bits(&get(Section::ZeroBitmap)?, n, Section::ZeroBitmap)?,
        ),
    };
    Ok(Decoded {
        plans,
        regions,
        symbols,
        literals,
        negative,
        zero,
    })
}

/// Rebuilds the field from an artifact. The grid uses unit spacing; callers
/// holding the original grid can use [`decompress_like`].
pub fn decompress(artifact: &CompressedArtifact) -> Result<Field3D> {
    let h = &artifact.header;
    let d = decode_sections(artifact)?;
    let dims = h.dims;
    let n = dims.len();
    let (eb, zero_threshold) = match h.bound.mode {
        BoundMode::Absolute => (h.bound.value, 0.0),
        BoundMode::PointwiseRelative => (log_bound(h.bound.value), h.bound.zero_threshold.unwrap_or(0.0)),
    };
    let (blocks_x, blocks_xy) = block_grid(dims, h.config.block_edge);
    let engine = Engine {
        dims,
        mode: h.bound.mode,
        value: h.bound.value,
        zero_threshold,
        edge: h.config.block_edge,
        blocks_x,
        blocks_xy,
        regions: &d.regions,
        plans: &d.plans,
    };
    let radius = h.config.bin_radius;
    let marker = h.config.marker();

    let mut recon = vec![0.0f64; n];
    let mut out = vec![0.0f32; n];
    let mut symbols = d.symbols.iter();
    let mut literals = d.literals.iter();
    let mut idx = 0;
    for k in 0..dims.nz {
        for j in 0..dims.ny {
            for i in 0..dims.nx {
                let pred = engine.predict(&recon, i, j, k);
                if d.zero[idx] {
                    recon[idx] = pred;
                    idx += 1;
                    continue;
                }
                let &sym = symbols
                    .next()
                    .ok_or_else(|| Error::decode(Section::Codes, "fewer codes than cells"))?;
                if sym == marker {
                    let &lit = literals
                        .next()
                        .ok_or_else(|| Error::decode(Section::Literals, "fewer literals than markers"))?;
                    out[idx] = lit;
                    recon[idx] = engine.literal_working(lit).unwrap_or(pred);
                } else if sym <= 2 * radius {
                    let rw = pred + dequantize(sym as i32 - radius as i32, eb);
                    recon[idx] = rw;
                    out[idx] = engine.output(rw, d.negative[idx]);
                } else {
                    return Err(Error::decode(Section::Codes, format!("symbol {sym} outside alphabet")));
                }
                idx += 1;
            }
        }
    }
    if symbols.next().is_some() {
        return Err(Error::decode(Section::Codes, "more codes than cells"));
    }
    if literals.next().is_some() {
        return Err(Error::decode(Section::Literals, "more literals than markers"));
    }
    Field3D::new_allow_nonfinite(dims, out)
}

/// [`decompress`] onto the grid of `template`, keeping its coordinates.
pub fn decompress_like(artifact: &CompressedArtifact, template: &Field3D) -> Result<Field3D> {
    if artifact.header.dims != template.dims() {
        return Err(Error::DimsMismatch(format!(
            "artifact {} vs template {}",
            artifact.header.dims,
            template.dims()
        )));
    }
    template.with_values(decompress(artifact)?.into_values())
}

/// Quantization codes in raster order over non-zero cells; `None` marks a
/// verbatim literal.
pub fn quantization_codes(artifact: &CompressedArtifact) -> Result<Vec<Option<i32>>> {
    let d = decode_sections(artifact)?;
    let radius = artifact.header.config.bin_radius;
    let marker = artifact.header.config.marker();
    Ok(d.symbols
        .iter()
        .map(|&s| (s != marker).then(|| s as i32 - radius as i32))
        .collect())
}

/// Per-block predictor choices in block-raster order.
pub fn block_predictors(artifact: &CompressedArtifact) -> Result<Vec<(BlockRegion, Predictor, PlaneCoeffs)>> {
    let d = decode_sections(artifact)?;
    Ok(d.regions
        .into_iter()
        .zip(d.plans)
        .map(|(r, p)| (r, p.predictor, p.coeffs))
        .collect())
}
