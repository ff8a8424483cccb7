//! Sample file layout (little-endian):
//!
//! ```text
//! "BLSS" | u16 version | u32 nx, ny, nz | u32 channels | u8 has_labels
//! | u32 origin x, y, z | u8 n_aug | (u8 rotation, u8 flip) * n_aug
//! | f32 features [channel][z][y][x] | u8 labels [z][y][x] (if present)
//! ```

use super::augment::{Augmentation, SubvolumeSample};
use crate::fields::Dims;
use crate::{Error, Result};

pub const SAMPLE_MAGIC: &[u8; 4] = b"BLSS";
pub const SAMPLE_VERSION: u16 = 1;

pub fn encode_sample(s: &SubvolumeSample) -> Vec<u8> {
    let cells = s.shape.len();
    let mut out = Vec::with_capacity(40 + s.features.len() * cells * 4 + cells);
    out.extend_from_slice(SAMPLE_MAGIC);
    out.extend_from_slice(&SAMPLE_VERSION.to_le_bytes());
    for n in s.shape.as_array() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&(s.features.len() as u32).to_le_bytes());
    out.push(s.labels.is_some() as u8);
    for o in s.origin {
        out.extend_from_slice(&(o as u32).to_le_bytes());
    }
    out.push(s.augmentations.len() as u8);
    for a in &s.augmentations {
        let (r, f) = a.codes();
        out.push(r);
        out.push(f);
    }
    for block in &s.features {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(l) = &s.labels {
        out.extend_from_slice(l);
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format("sample file truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
}

pub fn decode_sample(bytes: &[u8]) -> Result<SubvolumeSample> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != SAMPLE_MAGIC {
        return Err(Error::Format("not a sample file (bad magic)".into()));
    }
    let version = u16::from_le_bytes(c.take(2)?.try_into().unwrap());
    if version != SAMPLE_VERSION {
        return Err(Error::Format(format!("unsupported sample version {version}")));
    }
    let shape = Dims::new(c.u32()?, c.u32()?, c.u32()?);
    shape.check_positive()?;
    let channels = c.u32()?;
    let has_labels = c.u8()? != 0;
    let origin = [c.u32()?, c.u32()?, c.u32()?];
    let n_aug = c.u8()?;
    let mut augmentations = Vec::with_capacity(n_aug as usize);
    for _ in 0..n_aug {
        let (r, f) = (c.u8()?, c.u8()?);
        augmentations.push(
            Augmentation::from_codes(r, f).ok_or_else(|| Error::Format(format!("bad augmentation code {r}/{f}")))?,
        );
    }
    let cells = shape.len();
    let mut features = Vec::with_capacity(channels);
    for _ in 0..channels {
        let raw = c.take(cells * 4)?;
        features.push(
            raw.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        );
    }
    let labels = if has_labels {
        Some(c.take(cells)?.to_vec())
    } else {
        None
    };
    if c.pos != bytes.len() {
        return Err(Error::Format("trailing bytes in sample file".into()));
    }
    Ok(SubvolumeSample {
        shape,
        features,
        labels,
        origin,
        augmentations,
    })
}
