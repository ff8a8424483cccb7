//! Fidelity metrics between a clean field and its lossy reconstruction.

use serde::{Deserialize, Serialize, Serializer};

use crate::codec::{verify_bound, BoundReport, CompressedArtifact, ErrorBound};
use crate::fields::Field3D;
use crate::{Error, Result};

/// Side length of the square SSIM window.
pub const SSIM_WINDOW: usize = 8;

/// Original size over compressed size.
pub fn compression_ratio(original_bytes: u64, compressed_bytes: u64) -> Result<f64> {
    if original_bytes == 0 || compressed_bytes == 0 {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    Ok(original_bytes as f64 / compressed_bytes as f64)
}

/// `20 log10(range / rmse)` with the clean field's range as the peak.
/// Identical fields give `f64::INFINITY`. Non-finite clean cells are
/// skipped.
pub fn psnr(clean: &Field3D, lossy: &Field3D) -> Result<f64> {
    clean.check_same_dims(lossy)?;
    let (lo, hi) = clean
        .finite_range()
        .ok_or_else(|| Error::Data("clean field has no finite cells".into()))?;
    let range = hi as f64 - lo as f64;
    if range == 0.0 {
        return Err(Error::Data("PSNR undefined for a constant clean field".into()));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (&a, &b) in clean.values().iter().zip(lossy.values()) {
        if a.is_finite() {
            let d = a as f64 - b as f64;
            sum += d * d;
            n += 1;
        }
    }
    let mse = sum / n as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (range / mse.sqrt()).log10())
}

/// Mean SSIM over all 8x8 windows (stride 1) of every x-y slice, with
/// `L` taken from the clean field's range.
pub fn ssim(clean: &Field3D, lossy: &Field3D) -> Result<f64> {
    let (lo, hi) = clean
        .finite_range()
        .ok_or_else(|| Error::Data("clean field has no finite cells".into()))?;
    let range = hi as f64 - lo as f64;
    if range == 0.0 {
        return Err(Error::Data(
            "SSIM dynamic range is zero for a constant clean field; use ssim_with_range".into(),
        ));
    }
    ssim_with_range(clean, lossy, range)
}

/// SSIM with an explicit dynamic range `L`: `C1 = (0.01 L)^2`,
/// `C2 = (0.03 L)^2`, uniform weights, population (1/N) moments.
pub fn ssim_with_range(a: &Field3D, b: &Field3D, dynamic_range: f64) -> Result<f64> {
    a.check_same_dims(b)?;
    let d = a.dims();
    if d.nx < SSIM_WINDOW || d.ny < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} cells per slice, grid is {d}"
        )));
    }
    if !(dynamic_range.is_finite() && dynamic_range > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dynamic range must be positive, got {dynamic_range}"
        )));
    }
    let c1 = (0.01 * dynamic_range).powi(2);
    let c2 = (0.03 * dynamic_range).powi(2);
    let w = SSIM_WINDOW;
    let (wx, wy) = (d.nx - w + 1, d.ny - w + 1);
    let nw = (w * w) as f64;
    let slice_len = d.nx * d.ny;

    let mut total = 0.0;
    // Per slice: vertical box sums of five moments, then horizontal sums.
    let mut cols = vec![[0.0f64; 5]; d.nx * wy];
    for k in 0..d.nz {
        let xa = &a.values()[k * slice_len..(k + 1) * slice_len];
        let xb = &b.values()[k * slice_len..(k + 1) * slice_len];
        for j0 in 0..wy {
            for i in 0..d.nx {
                let mut m = [0.0; 5];
                for j in j0..j0 + w {
                    let (p, q) = (xa[i + d.nx * j] as f64, xb[i + d.nx * j] as f64);
                    m[0] += p;
                    m[1] += q;
                    m[2] += p * p;
                    m[3] += q * q;
                    m[4] += p * q;
                }
                cols[i + d.nx * j0] = m;
            }
        }
        let mut slice_sum = 0.0;
        for j0 in 0..wy {
            for i0 in 0..wx {
                let mut m = [0.0; 5];
                for c in &cols[i0 + d.nx * j0..i0 + d.nx * j0 + w] {
                    for q in 0..5 {
                        m[q] += c[q];
                    }
                }
                let (mu_a, mu_b) = (m[0] / nw, m[1] / nw);
                let var_a = (m[2] / nw - mu_a * mu_a).max(0.0);
                let var_b = (m[3] / nw - mu_b * mu_b).max(0.0);
                let cov = m[4] / nw - mu_a * mu_b;
                slice_sum += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                    / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            }
        }
        total += slice_sum / (wx * wy) as f64;
    }
    Ok(total / d.nz as f64)
}

pub(crate) fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn deserialize_db<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Db {
        Num(f64),
        Tok(String),
    }
    match Db::deserialize(d)? {
        Db::Num(v) => Ok(v),
        Db::Tok(t) if t == "inf" => Ok(f64::INFINITY),
        Db::Tok(t) => Err(serde::de::Error::custom(format!("bad PSNR token `{t}`"))),
    }
}

/// Bundle of fidelity numbers for one (clean, lossy) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub compression_ratio: f64,
    /// `+inf` (serialised as `"inf"`) for a lossless reconstruction.
    #[serde(serialize_with = "serialize_db", deserialize_with = "deserialize_db")]
    pub psnr_db: f64,
    pub ssim: f64,
    pub bound_report: BoundReport,
    pub bound: ErrorBound,
}

pub fn quality_report(
    clean: &Field3D,
    lossy: &Field3D,
    artifact: &CompressedArtifact,
    bound: &ErrorBound,
) -> Result<QualityReport> {
    clean.check_same_dims(lossy)?;
    if artifact.header.dims != clean.dims() {
        return Err(Error::DimsMismatch(format!(
            "artifact {} vs field {}",
            artifact.header.dims,
            clean.dims()
        )));
    }
    Ok(QualityReport {
        compression_ratio: compression_ratio(clean.values().len() as u64 * 4, artifact.encoded_len() as u64)?,
        psnr_db: psnr(clean, lossy)?,
        ssim: ssim(clean, lossy)?,
        bound_report: verify_bound(clean, lossy, bound)?,
        bound: *bound,
    })
}
