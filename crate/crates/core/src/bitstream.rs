//! The `RMS1` container shared by the plain and the pruned coder.
//!
//! Layout, all multi-byte integers big-endian:
//!
//! | field             | size            |
//! |-------------------|-----------------|
//! | magic `RMS1`      | 4               |
//! | flags             | 1               |
//! | width, height     | 2 + 2           |
//! | levels            | 1               |
//! | top bitplane `P`  | 1               |
//! | scale shift       | 1               |
//! | quant num, den    | 2 + 2           |
//! | mask length + RLE | 4 + n, optional |
//! | payload bit count | 4               |
//! | payload           | ceil(bits / 8)  |
//!
//! Flag bits: 0 transform (set = orthonormal float), 1 coder (set = pruned),
//! 2 mask present, 3 all-zero. The RLE mask alternates zero-run and one-run
//! lengths as LEB128 varints, row-major, starting with a (possibly empty)
//! zero-run. Payload bits are packed MSB-first; the last byte is zero-padded.

use crate::error::{Error, Result};
use crate::wavelet::TransformMode;

pub const MAGIC: &[u8; 4] = b"RMS1";

const FLAG_FLOAT: u8 = 1 << 0;
const FLAG_PRUNED: u8 = 1 << 1;
const FLAG_MASK: u8 = 1 << 2;
const FLAG_ALL_ZERO: u8 = 1 << 3;
const KNOWN_FLAGS: u8 = FLAG_FLOAT | FLAG_PRUNED | FLAG_MASK | FLAG_ALL_ZERO;

/// Bytes of a header without a mask section.
pub const BASE_HEADER_BYTES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoderKind {
    Spiht,
    Remspiht,
}

/// Quantization step `num / den` applied before integer bitplane coding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantStep {
    pub num: u16,
    pub den: u16,
}

impl QuantStep {
    pub const UNIT: Self = Self { num: 1, den: 1 };
    pub const DEFAULT_FLOAT: Self = Self { num: 1, den: 64 };

    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub mode: TransformMode,
    pub coder: CoderKind,
    pub all_zero: bool,
    pub width: u16,
    pub height: u16,
    pub levels: u8,
    pub top_plane: u8,
    pub scale_shift: u8,
    pub quant: QuantStep,
    /// Row-major coefficient support; `Some` iff the mask flag is set.
    pub mask: Option<Vec<bool>>,
}

impl StreamHeader {
    fn flags(&self) -> u8 {
        let mut f = 0;
        if self.mode == TransformMode::OrthonormalFloat {
            f |= FLAG_FLOAT;
        }
        if self.coder == CoderKind::Remspiht {
            f |= FLAG_PRUNED;
        }
        if self.mask.is_some() {
            f |= FLAG_MASK;
        }
        if self.all_zero {
            f |= FLAG_ALL_ZERO;
        }
        f
    }

    /// Serialized header bytes, payload bit count included.
    pub fn to_bytes(&self, payload_bits: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity(BASE_HEADER_BYTES);
        out.extend_from_slice(MAGIC);
        out.push(self.flags());
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.push(self.levels);
        out.push(self.top_plane);
        out.push(self.scale_shift);
        out.extend_from_slice(&self.quant.num.to_be_bytes());
        out.extend_from_slice(&self.quant.den.to_be_bytes());
        if let Some(mask) = &self.mask {
            let rle = encode_mask_rle(mask);
            out.extend_from_slice(&(rle.len() as u32).to_be_bytes());
            out.extend_from_slice(&rle);
        }
        out.extend_from_slice(&payload_bits.to_be_bytes());
        out
    }

    pub fn byte_len(&self) -> usize {
        BASE_HEADER_BYTES + self.mask.as_ref().map_or(0, |m| 4 + encode_mask_rle(m).len())
    }

    pub fn coefficient_count(&self) -> usize {
        usize::from(self.width) * usize::from(self.height)
    }
}

/// A header plus an MSB-first packed payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpihtBitstream {
    pub header: StreamHeader,
    payload: Vec<u8>,
    bit_count: u64,
}

impl SpihtBitstream {
    pub fn new(header: StreamHeader, bits: BitWriter) -> Self {
        let bit_count = bits.len();
        Self {
            header,
            payload: bits.into_bytes(),
            bit_count,
        }
    }

    pub fn bit_count(&self) -> u64 {
        self.bit_count
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Payload bit `i`, MSB-first.
    pub fn bit(&self, i: u64) -> bool {
        let byte = self.payload[(i / 8) as usize];
        byte >> (7 - (i % 8)) & 1 == 1
    }

    pub fn header_bytes(&self) -> usize {
        self.header.byte_len()
    }

    /// Size of the serialized stream: header, mask and payload.
    pub fn total_bytes(&self) -> usize {
        self.header_bytes() + self.payload.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.to_bytes(self.bit_count as u32);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses a complete stream. A payload shorter than announced is a
    /// [`Error::Truncation`].
    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let bs = Self::from_bytes_lenient(data)?;
        let available = bs.payload.len() as u64 * 8;
        let (expected, _) = announced_bits(data)?;
        if available < expected {
            return Err(Error::Truncation {
                expected,
                available,
            });
        }
        Ok(bs)
    }

    /// Parses a stream whose payload may have been cut short; the returned
    /// stream carries only the bits actually present.
    pub fn from_bytes_lenient(data: &[u8]) -> Result<Self> {
        let (expected, payload_at) = announced_bits(data)?;
        let header = parse_header(data)?;
        let need = expected.div_ceil(8) as usize;
        let present = &data[payload_at..];
        let payload = present[..present.len().min(need)].to_vec();
        let bit_count = expected.min(payload.len() as u64 * 8);
        Ok(Self {
            header,
            payload,
            bit_count,
        })
    }

    /// Copy holding only the first `bits` payload bits.
    pub fn truncated(&self, bits: u64) -> Self {
        let bits = bits.min(self.bit_count);
        let mut payload = self.payload[..bits.div_ceil(8) as usize].to_vec();
        if !bits.is_multiple_of(8) {
            if let Some(last) = payload.last_mut() {
                *last &= 0xFFu8 << (8 - bits % 8);
            }
        }
        Self {
            header: self.header.clone(),
            payload,
            bit_count: bits,
        }
    }
}

fn take<'a>(data: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let slice = data
        .get(*pos..*pos + n)
        .ok_or_else(|| Error::Format(format!("header ends at byte {}", data.len())))?;
    *pos += n;
    Ok(slice)
}

fn be16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

/// Announced payload bit count and the offset where the payload starts.
fn announced_bits(data: &[u8]) -> Result<(u64, usize)> {
    let mut pos = 16;
    if data.len() < 5 {
        return Err(Error::Format("stream shorter than its magic".into()));
    }
    if data[4] & FLAG_MASK != 0 {
        let len = be32(take(data, &mut pos, 4)?) as usize;
        take(data, &mut pos, len)?;
    }
    let bits = be32(take(data, &mut pos, 4)?);
    Ok((u64::from(bits), pos))
}

fn parse_header(data: &[u8]) -> Result<StreamHeader> {
    let mut pos = 0;
    if take(data, &mut pos, 4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let flags = take(data, &mut pos, 1)?[0];
    if flags & !KNOWN_FLAGS != 0 {
        return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
    }
    let width = be16(take(data, &mut pos, 2)?);
    let height = be16(take(data, &mut pos, 2)?);
    let fixed = take(data, &mut pos, 3)?;
    let (levels, top_plane, scale_shift) = (fixed[0], fixed[1], fixed[2]);
    let num = be16(take(data, &mut pos, 2)?);
    let den = be16(take(data, &mut pos, 2)?);
    if num == 0 || den == 0 {
        return Err(Error::Format("zero quantization step".into()));
    }
    let mask = if flags & FLAG_MASK != 0 {
        let len = be32(take(data, &mut pos, 4)?) as usize;
        let rle = take(data, &mut pos, len)?;
        Some(decode_mask_rle(rle, usize::from(width) * usize::from(height))?)
    } else {
        None
    };
    let coder = if flags & FLAG_PRUNED != 0 {
        CoderKind::Remspiht
    } else {
        CoderKind::Spiht
    };
    if coder == CoderKind::Remspiht && mask.is_none() {
        return Err(Error::Format("pruned coder without a mask section".into()));
    }
    Ok(StreamHeader {
        mode: if flags & FLAG_FLOAT != 0 {
            TransformMode::OrthonormalFloat
        } else {
            TransformMode::IntegerLifting
        },
        coder,
        all_zero: flags & FLAG_ALL_ZERO != 0,
        width,
        height,
        levels,
        top_plane,
        scale_shift,
        quant: QuantStep { num, den },
        mask,
    })
}

pub fn write_leb128(out: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7F) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub fn read_leb128(data: &[u8], pos: &mut usize) -> Result<u64> {
    let mut value = 0u64;
    for shift in (0..64).step_by(7) {
        let byte = *data
            .get(*pos)
            .ok_or_else(|| Error::Format("mask varint runs past its section".into()))?;
        *pos += 1;
        value |= u64::from(byte & 0x7F) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
    }
    Err(Error::Format("mask varint too long".into()))
}

/// Alternating zero/one run lengths, starting with zeros.
pub fn encode_mask_rle(mask: &[bool]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for &bit in mask {
        if bit == current {
            run += 1;
        } else {
            write_leb128(&mut out, run);
            current = bit;
            run = 1;
        }
    }
    write_leb128(&mut out, run);
    out
}

pub fn decode_mask_rle(rle: &[u8], len: usize) -> Result<Vec<bool>> {
    let mut mask = Vec::with_capacity(len);
    let mut pos = 0;
    let mut current = false;
    while pos < rle.len() {
        let run = read_leb128(rle, &mut pos)? as usize;
        if mask.len() + run > len {
            return Err(Error::Format("mask runs exceed the grid".into()));
        }
        mask.resize(mask.len() + run, current);
        current = !current;
    }
    if mask.len() != len {
        return Err(Error::Format(format!(
            "mask covers {} of {len} coefficients",
            mask.len()
        )));
    }
    Ok(mask)
}

/// Signals that the bit budget or the available payload ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

/// MSB-first bit packer with a hard limit.
#[derive(Debug, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
    limit: u64,
}

impl BitWriter {
    pub fn with_limit(limit: u64) -> Self {
        Self {
            bytes: Vec::new(),
            len: 0,
            limit,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) -> Result<(), Exhausted> {
        if self.len >= self.limit {
            return Err(Exhausted);
        }
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
        Ok(())
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads payload bits up to a prefix length.
#[derive(Debug)]
pub struct BitReader<'a> {
    stream: &'a SpihtBitstream,
    pos: u64,
    end: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(stream: &'a SpihtBitstream, upto: Option<u64>) -> Self {
        let end = upto.map_or(stream.bit_count, |u| u.min(stream.bit_count));
        Self { stream, pos: 0, end }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn next_bit(&mut self) -> Result<bool, Exhausted> {
        if self.pos >= self.end {
            return Err(Exhausted);
        }
        let bit = self.stream.bit(self.pos);
        self.pos += 1;
        Ok(bit)
    }
}
