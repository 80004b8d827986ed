//! Set partitioning in hierarchical trees.
//!
//! The encoder and the decoder run one shared list schedule,
//! [`Schedule`], parameterized by a [`Side`]: the encoder side answers each
//! significance, sign, and refinement question from the coefficients and
//! writes the answer; the decoder side reads it. Both stop at the same bit
//! when the payload (or the budget) runs out, so any payload prefix decodes.
//!
//! Spatial-orientation trees follow the nested layout of
//! [`WaveletPyramid`]. In every 2x2 group of the LL band the top-left
//! coefficient has no offspring; the other three parent the same-position
//! 2x2 blocks of `HL`, `LH` and `HH` at the coarsest level. Every other
//! coefficient `(i, j)` that is not in a finest band parents
//! `(2i, 2j) .. (2i + 1, 2j + 1)`.

use crate::bitstream::{
    BitReader, BitWriter, CoderKind, Exhausted, QuantStep, SpihtBitstream, StreamHeader,
    BASE_HEADER_BYTES,
};
use crate::error::{Error, Result};
use crate::wavelet::{check_dimensions, TransformMode, WaveletPyramid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// `A` sets hold all descendants of a root, `B` sets all descendants except
/// the direct offspring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetType {
    A,
    B,
}

/// Snapshot of the three coder lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpihtLists {
    pub lip: Vec<Coord>,
    pub lis: Vec<(Coord, SetType)>,
    /// Each significant coefficient with the pass that found it.
    pub lsp: Vec<(Coord, u32)>,
}

/// Total bit budget for a stream, header and mask included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Budget {
    #[default]
    Unbounded,
    Bits(u64),
}

impl Budget {
    /// Payload bits left after a `header_bytes` header.
    pub(crate) fn payload_limit(self, header_bytes: usize) -> Result<u64> {
        let header = header_bytes as u64 * 8;
        match self {
            Budget::Unbounded => Ok(u64::from(u32::MAX)),
            Budget::Bits(b) if b < header => Err(Error::BudgetTooSmall { budget: b, header }),
            Budget::Bits(b) => Ok((b - header).min(u64::from(u32::MAX))),
        }
    }
}

/// Result of the top-bitplane scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bitplane {
    pub top: u32,
    pub all_zero: bool,
}

/// `floor(log2(max |c|))` over the coefficients rounded to integers.
pub fn max_bitplane(pyr: &WaveletPyramid) -> Bitplane {
    let max = pyr
        .coeffs()
        .iter()
        .map(|c| c.abs().round() as u64)
        .max()
        .unwrap_or(0);
    bitplane_of(max)
}

pub(crate) fn bitplane_of(max: u64) -> Bitplane {
    if max == 0 {
        Bitplane { top: 0, all_zero: true }
    } else {
        Bitplane {
            top: 63 - max.leading_zeros(),
            all_zero: false,
        }
    }
}

/// Threshold `2^(top - pass)` of sorting pass `pass`.
pub fn threshold(top: u32, pass: u32) -> Result<u64> {
    if pass > top {
        return Err(Error::Range { pass, top });
    }
    Ok(1u64 << (top - pass))
}

/// Tree topology of a `width x height` grid with `levels` decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeLayout {
    pub width: usize,
    pub height: usize,
    pub levels: u8,
}

impl TreeLayout {
    pub fn of(pyr: &WaveletPyramid) -> Self {
        Self {
            width: pyr.width(),
            height: pyr.height(),
            levels: pyr.levels(),
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ll_dims(&self) -> (usize, usize) {
        (self.height >> self.levels, self.width >> self.levels)
    }

    #[inline]
    pub fn index(&self, c: Coord) -> usize {
        c.row * self.width + c.col
    }

    #[inline]
    pub fn coord(&self, idx: usize) -> Coord {
        Coord::new(idx / self.width, idx % self.width)
    }

    /// Top-left index of the 2x2 offspring block, if any.
    #[inline]
    pub fn first_child(&self, idx: usize) -> Option<usize> {
        let (row, col) = (idx / self.width, idx % self.width);
        let (llh, llw) = self.ll_dims();
        if row < llh && col < llw {
            let (dr, dc) = (row & 1, col & 1);
            if dr == 0 && dc == 0 {
                return None;
            }
            return Some((row - dr + dr * llh) * self.width + (col - dc + dc * llw));
        }
        if 2 * row < self.height && 2 * col < self.width {
            Some(2 * row * self.width + 2 * col)
        } else {
            None
        }
    }

    #[inline]
    pub fn children(&self, idx: usize) -> Option<[usize; 4]> {
        self.first_child(idx)
            .map(|c| [c, c + 1, c + self.width, c + self.width + 1])
    }

    /// LL coordinates in row-major order.
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        let (llh, llw) = self.ll_dims();
        (0..llh).flat_map(move |r| (0..llw).map(move |c| r * self.width + c))
    }

    /// Every descendant of `idx`, breadth-first.
    pub fn descendants(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut frontier: Vec<usize> = self.children(idx).map(Vec::from).unwrap_or_default();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &c in &frontier {
                if let Some(kids) = self.children(c) {
                    next.extend(kids);
                }
            }
            out.append(&mut frontier);
            frontier = next;
        }
        out
    }

    /// Folds `value` up the trees: `.0[i]` is the reduction over all
    /// descendants of `i`, `.1[i]` over the descendants minus the offspring.
    pub(crate) fn fold_up<T: Copy + Default>(
        &self,
        value: impl Fn(usize) -> T,
        join: impl Fn(T, T) -> T,
    ) -> (Vec<T>, Vec<T>) {
        let mut desc = vec![T::default(); self.len()];
        let mut grand = vec![T::default(); self.len()];
        // offspring always sit later in row-major order than their parent
        for idx in (0..self.len()).rev() {
            if let Some(kids) = self.children(idx) {
                let mut d = T::default();
                let mut g = T::default();
                for k in kids {
                    g = join(g, desc[k]);
                    d = join(d, join(value(k), desc[k]));
                }
                desc[idx] = d;
                grand[idx] = g;
            }
        }
        (desc, grand)
    }
}

/// Offspring of `c` in the tree structure of `pyr`.
pub fn offspring(c: Coord, pyr: &WaveletPyramid) -> Vec<Coord> {
    let layout = TreeLayout::of(pyr);
    if c.row >= layout.height || c.col >= layout.width {
        return Vec::new();
    }
    layout
        .children(layout.index(c))
        .map(|kids| kids.iter().map(|&k| layout.coord(k)).collect())
        .unwrap_or_default()
}

/// Bit accounting for one finished pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassTrace {
    pub pass: u32,
    pub plane: u32,
    /// Payload bits emitted from the start of the stream to the end of this
    /// pass.
    pub cumulative_bits: u64,
    pub significance_bits: u64,
    pub sign_bits: u64,
    pub refinement_bits: u64,
    /// Lists after the pass (after pruning), if recording was requested.
    pub lists: Option<SpihtLists>,
}

/// What a schedule run produced besides the payload.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodingTrace {
    /// Completed passes only.
    pub passes: Vec<PassTrace>,
    pub significance_bits: u64,
    pub sign_bits: u64,
    pub refinement_bits: u64,
    /// True when the schedule ran to the last bitplane.
    pub complete: bool,
}

impl CodingTrace {
    pub fn total_bits(&self) -> u64 {
        self.significance_bits + self.sign_bits + self.refinement_bits
    }
}

/// Coefficient support used for pruning, with per-set liveness.
#[derive(Debug, Clone)]
pub(crate) struct Pruning {
    alive: Vec<bool>,
    desc_alive: Vec<bool>,
    grand_alive: Vec<bool>,
    prefiltered: bool,
}

impl Pruning {
    pub(crate) fn new(layout: &TreeLayout, mask: &[bool], prefiltered: bool) -> Self {
        let (desc_alive, grand_alive) = layout.fold_up(|i| mask[i], |a, b| a || b);
        Self {
            alive: mask.to_vec(),
            desc_alive,
            grand_alive,
            prefiltered,
        }
    }

    fn set_alive(&self, idx: usize, kind: SetType) -> bool {
        match kind {
            SetType::A => self.desc_alive[idx],
            SetType::B => self.grand_alive[idx],
        }
    }
}

/// One end of the channel.
pub(crate) trait Side {
    fn coeff_significant(&mut self, idx: usize, plane: u32) -> Result<bool, Exhausted>;
    fn set_significant(&mut self, idx: usize, kind: SetType, plane: u32)
        -> Result<bool, Exhausted>;
    /// Called once a coefficient tested significant at `plane`.
    fn sign(&mut self, idx: usize, plane: u32) -> Result<(), Exhausted>;
    fn refine(&mut self, idx: usize, plane: u32) -> Result<(), Exhausted>;
}

/// Shared list schedule.
pub(crate) struct Schedule<'a, S> {
    layout: TreeLayout,
    side: S,
    pruning: Option<&'a Pruning>,
    record_lists: bool,
    lip: Vec<usize>,
    lis: Vec<(usize, SetType)>,
    lsp: Vec<(usize, u32)>,
    trace: CodingTrace,
}

impl<'a, S: Side> Schedule<'a, S> {
    pub(crate) fn new(
        layout: TreeLayout,
        side: S,
        pruning: Option<&'a Pruning>,
        record_lists: bool,
    ) -> Self {
        let prefilter = pruning.filter(|p| p.prefiltered);
        let lip = layout
            .roots()
            .filter(|&r| prefilter.is_none_or(|p| p.alive[r]))
            .collect();
        let lis = layout
            .roots()
            .filter(|&r| layout.first_child(r).is_some())
            .filter(|&r| prefilter.is_none_or(|p| p.desc_alive[r]))
            .map(|r| (r, SetType::A))
            .collect();
        Self {
            layout,
            side,
            pruning,
            record_lists,
            lip,
            lis,
            lsp: Vec::new(),
            trace: CodingTrace::default(),
        }
    }

    /// Runs passes `top` down to plane 0 until the side is exhausted.
    pub(crate) fn run(mut self, top: u32) -> (S, CodingTrace) {
        for pass in 0..=top {
            let plane = top - pass;
            if self.pass(pass, plane).is_err() {
                return (self.side, self.trace);
            }
            let lists = self.record_lists.then(|| self.snapshot());
            self.trace.passes.push(PassTrace {
                pass,
                plane,
                cumulative_bits: self.trace.total_bits(),
                significance_bits: self.trace.significance_bits,
                sign_bits: self.trace.sign_bits,
                refinement_bits: self.trace.refinement_bits,
                lists,
            });
        }
        self.trace.complete = true;
        (self.side, self.trace)
    }

    fn coeff_alive(&self, idx: usize) -> bool {
        self.pruning.is_none_or(|p| p.alive[idx])
    }

    fn set_alive(&self, idx: usize, kind: SetType) -> bool {
        self.pruning.is_none_or(|p| p.set_alive(idx, kind))
    }

    fn test_coeff(&mut self, idx: usize, plane: u32) -> Result<bool, Exhausted> {
        let sig = self.side.coeff_significant(idx, plane)?;
        self.trace.significance_bits += 1;
        Ok(sig)
    }

    fn emit_sign(&mut self, idx: usize, plane: u32) -> Result<(), Exhausted> {
        self.side.sign(idx, plane)?;
        self.trace.sign_bits += 1;
        Ok(())
    }

    fn pass(&mut self, pass: u32, plane: u32) -> Result<(), Exhausted> {
        self.sorting_pass(pass, plane)?;
        self.prune();
        self.refinement_pass(pass, plane)
    }

    fn sorting_pass(&mut self, pass: u32, plane: u32) -> Result<(), Exhausted> {
        let mut lip = std::mem::take(&mut self.lip);
        let mut kept = 0;
        for k in 0..lip.len() {
            let idx = lip[k];
            if self.coeff_alive(idx) && self.test_coeff(idx, plane)? {
                self.emit_sign(idx, plane)?;
                self.lsp.push((idx, pass));
            } else {
                lip[kept] = idx;
                kept += 1;
            }
        }
        lip.truncate(kept);
        self.lip = lip;

        // entries appended while scanning are scanned in this same pass;
        // removed entries are tombstoned and compacted afterwards
        let mut removed = vec![false; self.lis.len()];
        let mut k = 0;
        while k < self.lis.len() {
            let (idx, kind) = self.lis[k];
            if !self.set_alive(idx, kind) {
                k += 1;
                continue;
            }
            let sig = self.side.set_significant(idx, kind, plane)?;
            self.trace.significance_bits += 1;
            if sig {
                let kids = self.layout.children(idx).expect("LIS root without offspring");
                removed[k] = true;
                match kind {
                    SetType::A => {
                        for kid in kids {
                            if self.coeff_alive(kid) && self.test_coeff(kid, plane)? {
                                self.emit_sign(kid, plane)?;
                                self.lsp.push((kid, pass));
                            } else {
                                self.lip.push(kid);
                            }
                        }
                        if self.layout.first_child(kids[0]).is_some() {
                            self.lis.push((idx, SetType::B));
                            removed.push(false);
                        }
                    }
                    SetType::B => {
                        self.lis.extend(kids.iter().map(|&kid| (kid, SetType::A)));
                        removed.extend([false; 4]);
                    }
                }
            }
            k += 1;
        }
        let mut flags = removed.into_iter();
        self.lis.retain(|_| !flags.next().unwrap());
        Ok(())
    }

    /// Deletes blocked coefficients from LIP and fully blocked sets from LIS.
    fn prune(&mut self) {
        let Some(p) = self.pruning else { return };
        self.lip.retain(|&i| p.alive[i]);
        self.lis.retain(|&(i, kind)| p.set_alive(i, kind));
    }

    fn refinement_pass(&mut self, pass: u32, plane: u32) -> Result<(), Exhausted> {
        for k in 0..self.lsp.len() {
            let (idx, found) = self.lsp[k];
            if found < pass {
                self.side.refine(idx, plane)?;
                self.trace.refinement_bits += 1;
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> SpihtLists {
        let c = |i| self.layout.coord(i);
        SpihtLists {
            lip: self.lip.iter().map(|&i| c(i)).collect(),
            lis: self.lis.iter().map(|&(i, t)| (c(i), t)).collect(),
            lsp: self.lsp.iter().map(|&(i, p)| (c(i), p)).collect(),
        }
    }
}

/// Sign-magnitude integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IntegerGrid {
    pub magnitude: Vec<u64>,
    pub negative: Vec<bool>,
}

impl IntegerGrid {
    pub(crate) fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let (magnitude, negative) = values
            .map(|v| {
                let r = v.round();
                (r.abs() as u64, r < 0.0)
            })
            .unzip();
        Self {
            magnitude,
            negative,
        }
    }

    pub(crate) fn max(&self) -> u64 {
        self.magnitude.iter().copied().max().unwrap_or(0)
    }
}

pub(crate) struct EncoderSide<'g> {
    grid: &'g IntegerGrid,
    desc_max: Vec<u64>,
    grand_max: Vec<u64>,
    pub(crate) writer: BitWriter,
}

impl<'g> EncoderSide<'g> {
    pub(crate) fn new(layout: &TreeLayout, grid: &'g IntegerGrid, limit: u64) -> Self {
        let (desc_max, grand_max) = layout.fold_up(|i| grid.magnitude[i], u64::max);
        Self {
            grid,
            desc_max,
            grand_max,
            writer: BitWriter::with_limit(limit),
        }
    }
}

impl Side for EncoderSide<'_> {
    fn coeff_significant(&mut self, idx: usize, plane: u32) -> Result<bool, Exhausted> {
        let bit = self.grid.magnitude[idx] >> plane != 0;
        self.writer.push(bit)?;
        Ok(bit)
    }

    fn set_significant(
        &mut self,
        idx: usize,
        kind: SetType,
        plane: u32,
    ) -> Result<bool, Exhausted> {
        let max = match kind {
            SetType::A => self.desc_max[idx],
            SetType::B => self.grand_max[idx],
        };
        let bit = max >> plane != 0;
        self.writer.push(bit)?;
        Ok(bit)
    }

    fn sign(&mut self, idx: usize, _plane: u32) -> Result<(), Exhausted> {
        self.writer.push(self.grid.negative[idx])
    }

    fn refine(&mut self, idx: usize, plane: u32) -> Result<(), Exhausted> {
        self.writer.push(self.grid.magnitude[idx] >> plane & 1 == 1)
    }
}

pub(crate) struct DecoderSide<'s> {
    reader: BitReader<'s>,
    pub(crate) magnitude: Vec<u64>,
    pub(crate) negative: Vec<bool>,
    /// Lowest bitplane known per coefficient; `None` while insignificant.
    pub(crate) known_plane: Vec<Option<u32>>,
}

impl<'s> DecoderSide<'s> {
    pub(crate) fn new(stream: &'s SpihtBitstream, len: usize, upto: Option<u64>) -> Self {
        Self {
            reader: BitReader::new(stream, upto),
            magnitude: vec![0; len],
            negative: vec![false; len],
            known_plane: vec![None; len],
        }
    }

    /// Reconstructed integer-domain values. Magnitudes whose low bits were
    /// never received are moved to the middle of their uncertainty interval.
    pub(crate) fn reconstruct(&self) -> Vec<f64> {
        self.magnitude
            .iter()
            .zip(&self.negative)
            .zip(&self.known_plane)
            .map(|((&m, &neg), &plane)| match plane {
                None => 0.0,
                Some(p) => {
                    let centre = if p > 0 { (1u64 << (p - 1)) as f64 } else { 0.0 };
                    let v = m as f64 + centre;
                    if neg {
                        -v
                    } else {
                        v
                    }
                }
            })
            .collect()
    }
}

impl Side for DecoderSide<'_> {
    fn coeff_significant(&mut self, _idx: usize, _plane: u32) -> Result<bool, Exhausted> {
        self.reader.next_bit()
    }

    fn set_significant(&mut self, _: usize, _: SetType, _: u32) -> Result<bool, Exhausted> {
        self.reader.next_bit()
    }

    fn sign(&mut self, idx: usize, plane: u32) -> Result<(), Exhausted> {
        self.negative[idx] = self.reader.next_bit()?;
        self.magnitude[idx] = 1 << plane;
        self.known_plane[idx] = Some(plane);
        Ok(())
    }

    fn refine(&mut self, idx: usize, plane: u32) -> Result<(), Exhausted> {
        if self.reader.next_bit()? {
            self.magnitude[idx] |= 1 << plane;
        }
        self.known_plane[idx] = Some(plane);
        Ok(())
    }
}

/// Encoder settings beyond the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpihtOptions {
    pub budget: Budget,
    /// Quantization step for orthonormal pyramids; integer pyramids always
    /// use a unit step.
    pub quant: QuantStep,
    /// Snapshot the lists after every pass.
    pub record_lists: bool,
}

impl Default for SpihtOptions {
    fn default() -> Self {
        Self {
            budget: Budget::Unbounded,
            quant: QuantStep::DEFAULT_FLOAT,
            record_lists: false,
        }
    }
}

pub(crate) fn quant_for(mode: TransformMode, requested: QuantStep) -> QuantStep {
    match mode {
        TransformMode::IntegerLifting => QuantStep::UNIT,
        TransformMode::OrthonormalFloat => requested,
    }
}

/// Coefficients divided by the quantization step and rounded.
pub(crate) fn integerize(pyr: &WaveletPyramid, quant: QuantStep) -> IntegerGrid {
    let inv = f64::from(quant.den) / f64::from(quant.num);
    IntegerGrid::from_values(pyr.coeffs().iter().map(|&c| c * inv))
}

pub(crate) fn check_stream_dims(pyr: &WaveletPyramid) -> Result<(u16, u16)> {
    let w = u16::try_from(pyr.width())
        .map_err(|_| Error::Shape(format!("width {} exceeds 65535", pyr.width())))?;
    let h = u16::try_from(pyr.height())
        .map_err(|_| Error::Shape(format!("height {} exceeds 65535", pyr.height())))?;
    Ok((w, h))
}

/// Encodes with unit options apart from `budget`.
pub fn encode(pyr: &WaveletPyramid, budget: Budget) -> Result<SpihtBitstream> {
    let opts = SpihtOptions {
        budget,
        ..SpihtOptions::default()
    };
    Ok(encode_traced(pyr, &opts)?.0)
}

/// Encodes and also returns the per-pass bit accounting.
pub fn encode_traced(
    pyr: &WaveletPyramid,
    opts: &SpihtOptions,
) -> Result<(SpihtBitstream, CodingTrace)> {
    let (width, height) = check_stream_dims(pyr)?;
    let quant = quant_for(pyr.mode(), opts.quant);
    let grid = integerize(pyr, quant);
    let plane = bitplane_of(grid.max());
    let header = StreamHeader {
        mode: pyr.mode(),
        coder: CoderKind::Spiht,
        all_zero: plane.all_zero,
        width,
        height,
        levels: pyr.levels(),
        top_plane: plane.top as u8,
        scale_shift: 0,
        quant,
        mask: None,
    };
    let limit = opts.budget.payload_limit(BASE_HEADER_BYTES)?;
    let layout = TreeLayout::of(pyr);
    let side = EncoderSide::new(&layout, &grid, limit);
    if plane.all_zero {
        return Ok((SpihtBitstream::new(header, side.writer), CodingTrace {
            complete: true,
            ..CodingTrace::default()
        }));
    }
    let (side, trace) = Schedule::new(layout, side, None, opts.record_lists).run(plane.top);
    Ok((SpihtBitstream::new(header, side.writer), trace))
}

pub(crate) fn layout_from_header(header: &StreamHeader) -> Result<TreeLayout> {
    let (w, h) = (usize::from(header.width), usize::from(header.height));
    check_dimensions(w, h, header.levels).map_err(|e| Error::Format(e.to_string()))?;
    Ok(TreeLayout {
        width: w,
        height: h,
        levels: header.levels,
    })
}

/// Decodes a plain stream, optionally only its first `upto_bits` payload bits.
pub fn decode(bs: &SpihtBitstream, upto_bits: Option<u64>) -> Result<WaveletPyramid> {
    Ok(decode_traced(bs, upto_bits, false)?.0)
}

pub fn decode_traced(
    bs: &SpihtBitstream,
    upto_bits: Option<u64>,
    record_lists: bool,
) -> Result<(WaveletPyramid, CodingTrace)> {
    if bs.header.coder != CoderKind::Spiht || bs.header.mask.is_some() {
        return Err(Error::Format("stream was written by the pruned coder".into()));
    }
    let layout = layout_from_header(&bs.header)?;
    let (values, trace) = run_decoder(bs, &layout, None, upto_bits, record_lists);
    let step = bs.header.quant.value();
    let coeffs = values.into_iter().map(|v| v * step).collect();
    let pyr = WaveletPyramid::from_parts(
        layout.width,
        layout.height,
        layout.levels,
        bs.header.mode,
        coeffs,
    )?;
    Ok((pyr, trace))
}

pub(crate) fn run_decoder(
    bs: &SpihtBitstream,
    layout: &TreeLayout,
    pruning: Option<&Pruning>,
    upto_bits: Option<u64>,
    record_lists: bool,
) -> (Vec<f64>, CodingTrace) {
    let side = DecoderSide::new(bs, layout.len(), upto_bits);
    if bs.header.all_zero {
        return (side.reconstruct(), CodingTrace {
            complete: true,
            ..CodingTrace::default()
        });
    }
    let (side, trace) =
        Schedule::new(*layout, side, pruning, record_lists).run(u32::from(bs.header.top_plane));
    (side.reconstruct(), trace)
}
