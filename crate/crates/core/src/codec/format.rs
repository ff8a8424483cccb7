//! `BLSF` artifact container. See `docs/FORMAT.md` for the byte layout.

use xxhash_rust::xxh3::xxh3_64;

use super::bound::{BoundMode, ErrorBound};
use super::entropy::ByteStage;
use super::BlockConfig;
use crate::fields::Dims;
use crate::{Error, Result, Section};

pub const MAGIC: &[u8; 4] = b"BLSF";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 73;

/// Section order inside the container.
pub const SECTIONS: [Section; 7] = [
    Section::PredictorBitmap,
    Section::Coefficients,
    Section::FrequencyTable,
    Section::Codes,
    Section::Literals,
    Section::SignBitmap,
    Section::ZeroBitmap,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    None,
    Log2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtifactHeader {
    pub version: u16,
    pub dims: Dims,
    /// Bound with its zero threshold resolved (absolute mode: `None`).
    pub bound: ErrorBound,
    pub config: BlockConfig,
    pub transform: Transform,
    /// xxh3-64 of the original little-endian f32 bytes.
    pub original_checksum: u64,
}

impl ArtifactHeader {
    fn write(&self, out: &mut Vec<u8>) {
        let start = out.len();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        for n in self.dims.as_array() {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        out.push(match self.bound.mode {
            BoundMode::Absolute => 0,
            BoundMode::PointwiseRelative => 1,
        });
        out.extend_from_slice(&self.bound.value.to_le_bytes());
        out.extend_from_slice(&self.bound.zero_threshold.unwrap_or(0.0).to_le_bytes());
        out.extend_from_slice(&(self.config.block_edge as u16).to_le_bytes());
        out.extend_from_slice(&self.config.bin_radius.to_le_bytes());
        out.push(self.config.byte_stage.id());
        out.extend_from_slice(&self.original_checksum.to_le_bytes());
        out.push(0); // dtype: f32
        out.push(match self.transform {
            Transform::None => 0,
            Transform::Log2 => 1,
        });
        out.push(self.config.lorenzo as u8 | (self.config.regression as u8) << 1);
        let sum = xxh3_64(&out[start..]);
        out.extend_from_slice(&sum.to_le_bytes());
        debug_assert_eq!(out.len() - start, HEADER_LEN);
    }

    fn read(bytes: &[u8]) -> Result<Self> {
        let bad = |why: String| Error::decode(Section::Header, why);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes, header needs {HEADER_LEN}", bytes.len())));
        }
        if &bytes[0..4] != MAGIC {
            return Err(bad("bad magic".into()));
        }
        let stored_sum = u64_at(bytes, 65);
        if xxh3_64(&bytes[..65]) != stored_sum {
            return Err(bad("header checksum mismatch".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let dim = |off| usize::try_from(u64_at(bytes, off)).map_err(|_| bad("dimension overflow".into()));
        let dims = Dims::new(dim(6)?, dim(14)?, dim(22)?);
        dims.check_positive().map_err(|e| bad(e.to_string()))?;
        dims.nx
            .checked_mul(dims.ny)
            .and_then(|p| p.checked_mul(dims.nz))
            .ok_or_else(|| bad("cell count overflow".into()))?;
        let mode = match bytes[30] {
            0 => BoundMode::Absolute,
            1 => BoundMode::PointwiseRelative,
            m => return Err(bad(format!("unknown bound mode {m}"))),
        };
        let value = f64::from_le_bytes(bytes[31..39].try_into().unwrap());
        let zt = f64::from_le_bytes(bytes[39..47].try_into().unwrap());
        let bound = ErrorBound {
            mode,
            value,
            zero_threshold: (mode == BoundMode::PointwiseRelative).then_some(zt),
        };
        bound.validate().map_err(|e| bad(e.to_string()))?;
        let block_edge = u16::from_le_bytes([bytes[47], bytes[48]]) as usize;
        let bin_radius = u32::from_le_bytes(bytes[49..53].try_into().unwrap());
        let byte_stage =
            ByteStage::from_id(bytes[53]).ok_or_else(|| bad(format!("unknown byte stage id {}", bytes[53])))?;
        let original_checksum = u64_at(bytes, 54);
        if bytes[62] != 0 {
            return Err(bad(format!("unsupported dtype id {}", bytes[62])));
        }
        let transform = match bytes[63] {
            0 => Transform::None,
            1 => Transform::Log2,
            t => return Err(bad(format!("unknown transform {t}"))),
        };
        let flags = bytes[64];
        let config = BlockConfig {
            block_edge,
            bin_radius,
            lorenzo: flags & 1 != 0,
            regression: flags & 2 != 0,
            byte_stage,
        };
        config.validate().map_err(|e| bad(e.to_string()))?;
        let expected = match mode {
            BoundMode::Absolute => Transform::None,
            BoundMode::PointwiseRelative => Transform::Log2,
        };
        if transform != expected {
            return Err(bad("transform flag inconsistent with bound mode".into()));
        }
        Ok(Self {
            version,
            dims,
            bound,
            config,
            transform,
            original_checksum,
        })
    }
}

fn u64_at(b: &[u8], off: usize) -> u64 {
    u64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

/// A compressed field: header plus seven sections, each already passed
/// through the byte stage.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedArtifact {
    pub header: ArtifactHeader,
    pub(crate) sections: [Vec<u8>; 7],
}

impl CompressedArtifact {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.header.write(&mut out);
        for s in &self.sections {
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            out.extend_from_slice(&xxh3_64(s).to_le_bytes());
            out.extend_from_slice(s);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = ArtifactHeader::read(bytes)?;
        let mut sections: [Vec<u8>; 7] = Default::default();
        let mut pos = HEADER_LEN;
        for (slot, section) in sections.iter_mut().zip(SECTIONS) {
            let (body, next) = section_at(bytes, pos, section)?;
            if xxh3_64(body) != u64_at(bytes, pos + 8) {
                return Err(Error::decode(section, "checksum mismatch"));
            }
            *slot = body.to_vec();
            pos = next;
        }
        if pos != bytes.len() {
            return Err(Error::decode(Section::ZeroBitmap, "trailing bytes after last section"));
        }
        Ok(Self { header, sections })
    }

    /// Total serialized size in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.sections.iter().map(|s| 16 + s.len()).sum::<usize>()
    }

    pub fn section_sizes(&self) -> [(Section, usize); 7] {
        std::array::from_fn(|i| (SECTIONS[i], self.sections[i].len()))
    }

    pub(crate) fn section(&self, s: Section) -> &[u8] {
        let i = SECTIONS
            .iter()
            .position(|&x| x == s)
            .expect("header is not a stored section");
        &self.sections[i]
    }
}

fn section_at(bytes: &[u8], pos: usize, section: Section) -> Result<(&[u8], usize)> {
    if bytes.len() < pos + 16 {
        return Err(Error::decode(section, "truncated section prefix"));
    }
    let len = usize::try_from(u64_at(bytes, pos)).map_err(|_| Error::decode(section, "length overflow"))?;
    let start = pos + 16;
    let end = start
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::decode(section, "section extends past end of artifact"))?;
    Ok((&bytes[start..end], end))
}

/// Reads the header and section sizes without touching any payload.
pub fn read_header(bytes: &[u8]) -> Result<(ArtifactHeader, [(Section, usize); 7])> {
    let header = ArtifactHeader::read(bytes)?;
    let mut sizes = [(Section::Header, 0); 7];
    let mut pos = HEADER_LEN;
    for (slot, section) in sizes.iter_mut().zip(SECTIONS) {
        let (body, next) = section_at(bytes, pos, section)?;
        *slot = (section, body.len());
        pos = next;
    }
    Ok((header, sizes))
}

pub(crate) fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub(crate) fn unpack_bits(bytes: &[u8], n: usize, section: Section) -> Result<Vec<bool>> {
    if bytes.len() != n.div_ceil(8) {
        return Err(Error::decode(
            section,
            format!("bitmap holds {} bytes, expected {}", bytes.len(), n.div_ceil(8)),
        ));
    }
    Ok((0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}
