//! Canonical Huffman coding of quantization symbols plus a pluggable
//! lossless byte stage.
//!
//! Frequency table layout (little-endian):
//!
//! ```text
//! u64 symbol count | u32 distinct symbols | (u32 symbol, u64 frequency)*
//! ```
//!
//! Entries are sorted by symbol. Code lengths are rebuilt from the
//! frequencies with the same deterministic Huffman construction on both
//! sides, so no lengths are stored. A single-symbol alphabet uses zero bits
//! per symbol. Payload bits are packed MSB first.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Section};

const MAX_CODE_LEN: u32 = 64;

/// General-purpose lossless stage applied to each serialized section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ByteStage {
    None,
    #[default]
    Deflate,
}

impl ByteStage {
    pub fn id(self) -> u8 {
        match self {
            ByteStage::None => 0,
            ByteStage::Deflate => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(ByteStage::None),
            1 => Some(ByteStage::Deflate),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ByteStage::None => "none",
            ByteStage::Deflate => "deflate",
        }
    }

    pub fn encode(self, raw: &[u8]) -> Vec<u8> {
        if raw.is_empty() {
            return Vec::new();
        }
        match self {
            ByteStage::None => raw.to_vec(),
            ByteStage::Deflate => {
                let mut enc = flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::best());
                enc.write_all(raw).expect("in-memory write");
                enc.finish().expect("in-memory write")
            }
        }
    }

    pub fn decode(self, stored: &[u8], section: Section) -> Result<Vec<u8>> {
        if stored.is_empty() {
            return Ok(Vec::new());
        }
        match self {
            ByteStage::None => Ok(stored.to_vec()),
            ByteStage::Deflate => {
                let mut out = Vec::new();
                flate2::read::DeflateDecoder::new(stored)
                    .read_to_end(&mut out)
                    .map_err(|e| Error::decode(section, format!("deflate: {e}")))?;
                Ok(out)
            }
        }
    }
}

impl std::str::FromStr for ByteStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ByteStage::None),
            "deflate" => Ok(ByteStage::Deflate),
            _ => Err(Error::InvalidArgument(format!("unknown byte stage `{s}`"))),
        }
    }
}

/// Huffman code lengths for `(symbol, frequency)` pairs sorted by symbol.
fn code_lengths(freqs: &[(u32, u64)]) -> Vec<u32> {
    let n = freqs.len();
    if n <= 1 {
        return vec![0; n];
    }
    // Leaves are nodes 0..n, internal nodes follow. Ties pop the lower id.
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        freqs.iter().enumerate().map(|(id, &(_, f))| Reverse((f, id))).collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().unwrap();
        let Reverse((fb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((fa.saturating_add(fb), next)));
        next += 1;
    }
    (0..n)
        .map(|leaf| {
            let mut depth = 0;
            let mut node = leaf;
            while parent[node] != usize::MAX {
                node = parent[node];
                depth += 1;
            }
            depth
        })
        .collect()
}

/// Canonical code assignment: `(len, symbol)` order, consecutive codes.
struct Canonical {
    /// symbols sorted by (length, symbol)
    sorted: Vec<u32>,
    count: Vec<u64>,
    first_code: Vec<u64>,
    first_index: Vec<usize>,
    max_len: u32,
}

impl Canonical {
    fn new(freqs: &[(u32, u64)], lengths: &[u32]) -> Result<Self> {
        let max_len = lengths.iter().copied().max().unwrap_or(0);
        if max_len > MAX_CODE_LEN {
            return Err(Error::decode(Section::FrequencyTable, "code length exceeds 64 bits"));
        }
        let mut order: Vec<usize> = (0..freqs.len()).collect();
        order.sort_by_key(|&i| (lengths[i], freqs[i].0));
        let mut count = vec![0u64; max_len as usize + 2];
        for &l in lengths {
            count[l as usize] += 1;
        }
        let mut first_code = vec![0u64; max_len as usize + 2];
        let mut first_index = vec![0usize; max_len as usize + 2];
        let mut code = 0u64;
        let mut index = count[0] as usize;
        for len in 1..=max_len as usize {
            first_code[len] = code;
            first_index[len] = index;
            code = (code + count[len]) << 1;
            index += count[len] as usize;
        }
        Ok(Self {
            sorted: order.iter().map(|&i| freqs[i].0).collect(),
            count,
            first_code,
            first_index,
            max_len,
        })
    }

    fn codebook(&self) -> BTreeMap<u32, (u64, u32)> {
        let mut book = BTreeMap::new();
        for len in 1..=self.max_len as usize {
            for n in 0..self.count[len] {
                let sym = self.sorted[self.first_index[len] + n as usize];
                book.insert(sym, (self.first_code[len] + n, len as u32));
            }
        }
        book
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u8,
    used: u32,
}

impl BitWriter {
    fn new() -> Self {
        Self {
            out: Vec::new(),
            acc: 0,
            used: 0,
        }
    }

    fn put(&mut self, code: u64, len: u32) {
        for shift in (0..len).rev() {
            self.acc = (self.acc << 1) | ((code >> shift) & 1) as u8;
            self.used += 1;
            if self.used == 8 {
                self.out.push(self.acc);
                self.acc = 0;
                self.used = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.out.push(self.acc << (8 - self.used));
        }
        self.out
    }
}

/// Encoded symbol stream split into its two artifact sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedCodes {
    pub table: Vec<u8>,
    pub payload: Vec<u8>,
}

pub fn huffman_encode(symbols: &[u32]) -> EncodedCodes {
    let mut hist: BTreeMap<u32, u64> = BTreeMap::new();
    for &s in symbols {
        *hist.entry(s).or_default() += 1;
    }
    let freqs: Vec<(u32, u64)> = hist.into_iter().collect();
    let mut table = Vec::with_capacity(12 + freqs.len() * 12);
    table.extend_from_slice(&(symbols.len() as u64).to_le_bytes());
    table.extend_from_slice(&(freqs.len() as u32).to_le_bytes());
    for &(s, f) in &freqs {
        table.extend_from_slice(&s.to_le_bytes());
        table.extend_from_slice(&f.to_le_bytes());
    }
    let lengths = code_lengths(&freqs);
    let canonical = Canonical::new(&freqs, &lengths).expect("Huffman depth is bounded by the symbol count");
    let book = canonical.codebook();
    let mut w = BitWriter::new();
    if canonical.max_len > 0 {
        for s in symbols {
            let (code, len) = book[s];
            w.put(code, len);
        }
    }
    EncodedCodes {
        table,
        payload: w.finish(),
    }
}

fn parse_table(table: &[u8]) -> Result<(u64, Vec<(u32, u64)>)> {
    let bad = |why: &str| Error::decode(Section::FrequencyTable, why.to_owned());
    if table.len() < 12 {
        return Err(bad("truncated table header"));
    }
    let total = u64::from_le_bytes(table[0..8].try_into().unwrap());
    let distinct = u32::from_le_bytes(table[8..12].try_into().unwrap()) as usize;
    if table.len() != 12 + distinct * 12 {
        return Err(bad("table length does not match its entry count"));
    }
    let mut freqs = Vec::with_capacity(distinct);
    let mut sum = 0u64;
    for e in table[12..].chunks_exact(12) {
        let s = u32::from_le_bytes(e[0..4].try_into().unwrap());
        let f = u64::from_le_bytes(e[4..12].try_into().unwrap());
        if f == 0 || freqs.last().is_some_and(|&(p, _)| p >= s) {
            return Err(bad("entries must be unique, sorted and non-zero"));
        }
        sum = sum.checked_add(f).ok_or_else(|| bad("frequency overflow"))?;
        freqs.push((s, f));
    }
    if sum != total {
        return Err(bad("frequencies do not sum to the symbol count"));
    }
    Ok((total, freqs))
}

pub fn huffman_decode(table: &[u8], payload: &[u8]) -> Result<Vec<u32>> {
    let (total, freqs) = parse_table(table)?;
    let total = usize::try_from(total).map_err(|_| Error::decode(Section::FrequencyTable, "symbol count too large"))?;
    if freqs.len() == 1 {
        return Ok(vec![freqs[0].0; total]);
    }
    let lengths = code_lengths(&freqs);
    let c = Canonical::new(&freqs, &lengths)?;
    let mut out = Vec::with_capacity(total);
    let mut bits = payload.iter().flat_map(|b| (0..8).rev().map(move |s| (b >> s) & 1));
    for _ in 0..total {
        let mut code = 0u64;
        let mut len = 0usize;
        loop {
            let bit = bits
                .next()
                .ok_or_else(|| Error::decode(Section::Codes, "code stream truncated"))?;
            code = (code << 1) | bit as u64;
            len += 1;
            if len > c.max_len as usize {
                return Err(Error::decode(Section::Codes, "invalid code"));
            }
            let offset = code.wrapping_sub(c.first_code[len]);
            if offset < c.count[len] {
                out.push(c.sorted[c.first_index[len] + offset as usize]);
                break;
            }
        }
    }
    Ok(out)
}

/// Self-contained stream: `u64 table length | table | payload`, passed
/// through `stage`.
pub fn entropy_encode(symbols: &[u32], stage: ByteStage) -> Vec<u8> {
    let enc = huffman_encode(symbols);
    let mut raw = Vec::with_capacity(8 + enc.table.len() + enc.payload.len());
    raw.extend_from_slice(&(enc.table.len() as u64).to_le_bytes());
    raw.extend_from_slice(&enc.table);
    raw.extend_from_slice(&enc.payload);
    stage.encode(&raw)
}

pub fn entropy_decode(bytes: &[u8], stage: ByteStage) -> Result<Vec<u32>> {
    let raw = stage.decode(bytes, Section::Codes)?;
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    if raw.len() < 8 {
        return Err(Error::decode(Section::FrequencyTable, "truncated stream"));
    }
    let tlen = u64::from_le_bytes(raw[0..8].try_into().unwrap()) as usize;
    let table = raw
        .get(8..8usize.saturating_add(tlen))
        .ok_or_else(|| Error::decode(Section::FrequencyTable, "truncated table"))?;
    huffman_decode(table, &raw[8 + tlen..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn all_zero_stream_is_tiny() {
        let codes = vec![0u32; 1_000_000];
        for stage in [ByteStage::None, ByteStage::Deflate] {
            let enc = entropy_encode(&codes, stage);
            assert!(enc.len() < 40_000, "{} bytes", enc.len());
            assert_eq!(entropy_decode(&enc, stage).unwrap(), codes);
        }
    }

    #[test]
    fn empty_stream() {
        let enc = huffman_encode(&[]);
        assert_eq!(enc.table.len(), 12);
        assert!(enc.payload.is_empty());
        assert!(huffman_decode(&enc.table, &enc.payload).unwrap().is_empty());
        let e = entropy_encode(&[], ByteStage::Deflate);
        assert!(entropy_decode(&e, ByteStage::Deflate).unwrap().is_empty());
    }

    #[test]
    fn uniform_256_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let codes: Vec<u32> = (0..100_000).map(|_| rng.gen_range(0..256)).collect();
        let enc = entropy_encode(&codes, ByteStage::Deflate);
        assert_eq!(entropy_decode(&enc, ByteStage::Deflate).unwrap(), codes);
    }

    #[test]
    fn skewed_distribution_beats_fixed_width() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let codes: Vec<u32> = (0..50_000)
            .map(|_| {
                let r: f64 = rng.gen();
                32768 + (r.powi(6) * 20.0) as u32
            })
            .collect();
        let enc = huffman_encode(&codes);
        assert!(enc.payload.len() * 8 < codes.len() * 3);
        assert_eq!(huffman_decode(&enc.table, &enc.payload).unwrap(), codes);
    }

    #[test]
    fn fibonacci_frequencies_give_deep_but_valid_codes() {
        let mut codes = Vec::new();
        let (mut a, mut b) = (1u64, 1u64);
        for s in 0..25u32 {
            codes.extend(std::iter::repeat_n(s, a as usize));
            (a, b) = (b, a + b);
        }
        let enc = huffman_encode(&codes);
        assert_eq!(huffman_decode(&enc.table, &enc.payload).unwrap(), codes);
    }

    #[test]
    fn truncation_detected() {
        let codes: Vec<u32> = (0..1000).map(|i| i % 7).collect();
        let enc = huffman_encode(&codes);
        let err = huffman_decode(&enc.table, &enc.payload[..enc.payload.len() / 2]).unwrap_err();
        assert!(matches!(
            err,
            Error::Decode {
                section: Section::Codes,
                ..
            }
        ));
        let err = huffman_decode(&enc.table[..enc.table.len() - 3], &enc.payload).unwrap_err();
        assert!(matches!(
            err,
            Error::Decode {
                section: Section::FrequencyTable,
                ..
            }
        ));
        let full = entropy_encode(&codes, ByteStage::None);
        assert!(entropy_decode(&full[..5], ByteStage::None).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(codes in prop::collection::vec(0u32..70_000, 0..500)) {
            let enc = huffman_encode(&codes);
            prop_assert_eq!(huffman_decode(&enc.table, &enc.payload).unwrap(), codes);
        }
    }
}
