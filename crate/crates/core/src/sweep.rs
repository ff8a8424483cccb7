//! Bound sweeps: compress every channel at every bound and tabulate the
//! fidelity numbers as CSV.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{compress, decompress_like, verify_bound, BlockConfig, ErrorBound};
use crate::fields::Field3D;
use crate::labeler::{classify, label_error, FlameChannels, LabelThresholds, CHANNEL_NAMES};
use crate::quality::{compression_ratio, psnr, ssim};
use crate::{Error, Result};

pub const DEFAULT_BOUNDS: [f64; 7] = [0.01, 0.05, 0.10, 0.20, 0.30, 0.40, 0.50];

/// Name used for the aggregate row of each bound.
pub const TOTAL: &str = "total";

pub const CSV_HEADER: &str = "channel,bound_pct,ratio,psnr_db,ssim,max_rel_err,label_err";

/// Sweep configuration as read from TOML. Every field may be overridden
/// from the command line.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    /// Point-wise relative bounds as fractions; empty means
    /// [`DEFAULT_BOUNDS`].
    pub bounds: Vec<f64>,
    /// Field files with `.meta` sidecars.
    pub channels: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    /// TOML file with labeler thresholds; enables the label_err column.
    pub thresholds: Option<PathBuf>,
    /// Used only for synthetic inputs.
    pub seed: u64,
    pub block: BlockConfig,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("sweep config: {e}")))
    }
}

/// Bounds must be non-empty, strictly increasing and inside (0, 1).
pub fn validate_bounds(bounds: &[f64]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::InvalidArgument("bound list is empty".into()));
    }
    if let Some(b) = bounds.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(Error::InvalidArgument(format!("bound {b} outside (0, 1)")));
    }
    if bounds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("bounds must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub channel: String,
    pub bound_pct: f64,
    pub ratio: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub max_rel_err: f64,
    /// Label disagreement of the whole channel set at this bound; the same
    /// on every row of a bound.
    pub label_err: Option<f64>,
}

struct ChannelResult {
    original_bytes: u64,
    compressed_bytes: u64,
    psnr: f64,
    ssim: f64,
    max_rel: f64,
    lossy: Field3D,
}

fn run_channel(field: &Field3D, bound: f64, cfg: &BlockConfig) -> Result<ChannelResult> {
    let eb = ErrorBound::pointwise_relative(bound)?;
    let art = compress(field, &eb, cfg)?;
    let lossy = decompress_like(&art, field)?;
    let report = verify_bound(field, &lossy, &art.header.bound)?;
    if report.violations > 0 {
        return Err(Error::Invariant(format!(
            "{} bound violations at {bound}",
            report.violations
        )));
    }
    Ok(ChannelResult {
        original_bytes: field.values().len() as u64 * 4,
        compressed_bytes: art.encoded_len() as u64,
        psnr: psnr(field, &lossy)?,
        ssim: ssim(field, &lossy)?,
        max_rel: report.max_rel_error,
        lossy,
    })
}

/// One row per (bound, channel) followed by a `total` row per bound. The
/// total ratio pools bytes over channels, PSNR and SSIM are channel means
/// and the relative error is the maximum.
///
/// With `thresholds`, `channels` must be the four flame channels and each
/// row gets the label error between labels of the clean and lossy sets,
/// each resolved on its own fields.
pub fn run_sweep(
    channels: &[(String, Field3D)],
    bounds: &[f64],
    cfg: &BlockConfig,
    thresholds: Option<&LabelThresholds>,
) -> Result<Vec<SweepRow>> {
    validate_bounds(bounds)?;
    cfg.validate()?;
    if channels.is_empty() {
        return Err(Error::InvalidArgument("no channels to sweep".into()));
    }
    let flame = match thresholds {
        Some(t) => Some((flame_set(channels)?, t)),
        None => None,
    };
    let clean_labels = match &flame {
        Some((set, t)) => Some(classify(set, t)?),
        None => None,
    };

    let per_bound: Vec<Vec<SweepRow>> = bounds
        .par_iter()
        .map(|&b| {
            let results = channels
                .iter()
                .map(|(_, f)| run_channel(f, b, cfg))
                .collect::<Result<Vec<_>>>()?;
            let label_err = match (&flame, &clean_labels) {
                (Some((_, t)), Some(clean)) => {
                    let named: Vec<(String, Field3D)> = channels
                        .iter()
                        .zip(&results)
                        .map(|((n, _), r)| (n.clone(), r.lossy.clone()))
                        .collect();
                    let lossy = flame_set(&named)?;
                    Some(label_error(clean, &classify(&lossy, t)?)?)
                }
                _ => None,
            };
            let mut rows: Vec<SweepRow> = channels
                .iter()
                .zip(&results)
                .map(|((name, _), r)| {
                    Ok(SweepRow {
                        channel: name.clone(),
                        bound_pct: b * 100.0,
                        ratio: compression_ratio(r.original_bytes, r.compressed_bytes)?,
                        psnr_db: r.psnr,
                        ssim: r.ssim,
                        max_rel_err: r.max_rel,
                        label_err,
                    })
                })
                .collect::<Result<_>>()?;
            let n = results.len() as f64;
            rows.push(SweepRow {
                channel: TOTAL.to_owned(),
                bound_pct: b * 100.0,
                ratio: compression_ratio(
                    results.iter().map(|r| r.original_bytes).sum(),
                    results.iter().map(|r| r.compressed_bytes).sum(),
                )?,
                psnr_db: results.iter().map(|r| r.psnr).sum::<f64>() / n,
                ssim: results.iter().map(|r| r.ssim).sum::<f64>() / n,
                max_rel_err: results.iter().map(|r| r.max_rel).fold(0.0, f64::max),
                label_err,
            });
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_bound.into_iter().flatten().collect())
}

fn flame_set(channels: &[(String, Field3D)]) -> Result<FlameChannels> {
    let get = |name: &str| {
        channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, fld)| fld.clone())
            .ok_or_else(|| Error::InvalidArgument(format!("label error needs channel {name}")))
    };
    FlameChannels::from_array([
        get(CHANNEL_NAMES[0])?,
        get(CHANNEL_NAMES[1])?,
        get(CHANNEL_NAMES[2])?,
        get(CHANNEL_NAMES[3])?,
    ])
}

fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v:.16e}")
    }
}

/// CSV with a header line; numbers carry 17 significant digits and PSNR of
/// a lossless row is `inf`. `label_err` is empty when not computed.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.channel,
            num(r.bound_pct),
            num(r.ratio),
            num(r.psnr_db),
            num(r.ssim),
            num(r.max_rel_err),
            r.label_err.map(num).unwrap_or_default()
        );
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Format("sweep CSV header mismatch".into()));
    }
    let parse = |s: &str| -> Result<f64> {
        match s {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => s.parse().map_err(|_| Error::Format(format!("bad number `{s}`"))),
        }
    };
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            if c.len() != 7 {
                return Err(Error::Format(format!("expected 7 columns: `{l}`")));
            }
            Ok(SweepRow {
                channel: c[0].to_owned(),
                bound_pct: parse(c[1])?,
                ratio: parse(c[2])?,
                psnr_db: parse(c[3])?,
                ssim: parse(c[4])?,
                max_rel_err: parse(c[5])?,
                label_err: if c[6].is_empty() { None } else { Some(parse(c[6])?) },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Dims;
    use crate::synth::smooth_field;

    #[test]
    fn bound_validation() {
        assert!(validate_bounds(&[]).is_err());
        assert!(validate_bounds(&[0.1, 0.1]).is_err());
        assert!(validate_bounds(&[0.2, 0.1]).is_err());
        assert!(validate_bounds(&[0.0, 0.1]).is_err());
        assert!(validate_bounds(&[0.5, 1.0]).is_err());
        assert!(validate_bounds(&DEFAULT_BOUNDS).is_ok());
    }

    #[test]
    fn csv_roundtrip() {
        let f = smooth_field(Dims::new(16, 16, 4), 1);
        let rows = run_sweep(&[("a".into(), f)], &[0.05, 0.2], &BlockConfig::default(), None).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].channel, TOTAL);
        let text = sweep_csv(&rows);
        assert_eq!(parse_sweep_csv(&text).unwrap(), rows);
    }

    #[test]
    fn labels_need_flame_channels() {
        let f = smooth_field(Dims::new(16, 16, 4), 1);
        let r = run_sweep(
            &[("a".into(), f)],
            &[0.1],
            &BlockConfig::default(),
            Some(&LabelThresholds::default()),
        );
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
