//! Weighted, pruned SPIHT.
//!
//! A [`WeightMap`] selects the coefficients worth coding. Blocked ones
//! (weight 0) are zeroed, retained ones are multiplied by `2^scale_shift`,
//! and the usual list schedule runs with two changes: blocked coefficients
//! and sets with no retained descendant are skipped without spending a bit,
//! and after every sorting pass they are deleted from LIP and LIS. The
//! binary mask travels in the stream header so the decoder prunes in
//! lockstep.

use crate::bitstream::{CoderKind, QuantStep, SpihtBitstream, StreamHeader};
use crate::error::{Error, Result};
use crate::spiht::{
    bitplane_of, check_stream_dims, integerize, layout_from_header, quant_for, run_decoder,
    Budget, CodingTrace, EncoderSide, Pruning, Schedule, TreeLayout,
};
use crate::wavelet::WaveletPyramid;
use crate::weighting::{
    crossband_mask, entropy_times_nonzero, importance_weights, rescale, segment, unscale,
    ClusterScore, CrossbandPolicy, SegmentConfig, WeightMap,
};

/// How many coefficients the texture ranking keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Retained {
    Count(usize),
    /// Share of all coefficients in `[0, 1]`, rounded to the nearest count.
    Fraction(f64),
}

impl Retained {
    pub fn resolve(self, total: usize) -> Result<usize> {
        match self {
            Retained::Count(m) if m <= total => Ok(m),
            Retained::Count(m) => Err(Error::Argument(format!("m = {m} exceeds {total} coefficients"))),
            Retained::Fraction(f) if (0.0..=1.0).contains(&f) => Ok((f * total as f64).round() as usize),
            Retained::Fraction(f) => Err(Error::Argument(format!("fraction {f} outside [0, 1]"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskSource {
    /// Cross-band threshold mask.
    CaseI { u0: u32, policy: CrossbandPolicy },
    /// Texture clustering with entropy-ranked retention.
    CaseII { k: usize, seed: u64, em_iters: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct RemspihtConfig {
    pub scale_shift: u8,
    /// Texture ranking only; the default keeps every coefficient.
    pub retained: Retained,
    pub lambda: f64,
    pub mask_source: MaskSource,
    pub budget: Budget,
    /// Leave blocked entries out of the initial lists instead of pruning
    /// them after the first sorting pass. The payload is the same.
    pub prefiltered_lists: bool,
    /// Snapshot the lists after every pass.
    pub record_lists: bool,
    /// Quantization step for orthonormal pyramids.
    pub quant: QuantStep,
    pub score: ClusterScore,
}

impl Default for RemspihtConfig {
    fn default() -> Self {
        Self {
            scale_shift: 2,
            retained: Retained::Fraction(1.0),
            lambda: 2.0,
            mask_source: MaskSource::CaseII {
                k: 2,
                seed: 0,
                em_iters: 10,
            },
            budget: Budget::Unbounded,
            prefiltered_lists: false,
            record_lists: false,
            quant: QuantStep::DEFAULT_FLOAT,
            score: entropy_times_nonzero,
        }
    }
}

/// The weights `cfg` selects for `pyr`.
pub fn derive_weights(pyr: &WaveletPyramid, cfg: &RemspihtConfig) -> Result<WeightMap> {
    match cfg.mask_source {
        MaskSource::CaseI { u0, policy } => Ok(crossband_mask(pyr, u0, policy)),
        MaskSource::CaseII { k, seed, em_iters } => {
            let seg_cfg = SegmentConfig {
                k,
                seed,
                em_iters,
                ..SegmentConfig::default()
            };
            let seg = segment(pyr, &seg_cfg, cfg.score)?;
            let m = cfg.retained.resolve(pyr.len())?;
            importance_weights(pyr, &seg.assignments, &seg.scores, m, cfg.lambda)
        }
    }
}

pub fn encode_remspiht(pyr: &WaveletPyramid, cfg: &RemspihtConfig) -> Result<SpihtBitstream> {
    let weights = derive_weights(pyr, cfg)?;
    Ok(encode_with_weights_traced(pyr, &weights, cfg)?.0)
}

/// Encodes with caller-supplied weights; `cfg.mask_source`, `retained` and
/// `lambda` are ignored.
pub fn encode_with_weights(
    pyr: &WaveletPyramid,
    weights: &WeightMap,
    cfg: &RemspihtConfig,
) -> Result<SpihtBitstream> {
    Ok(encode_with_weights_traced(pyr, weights, cfg)?.0)
}

pub fn encode_with_weights_traced(
    pyr: &WaveletPyramid,
    weights: &WeightMap,
    cfg: &RemspihtConfig,
) -> Result<(SpihtBitstream, CodingTrace)> {
    let (width, height) = check_stream_dims(pyr)?;
    let mask = weights.mask();
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask);
    }
    let scaled = rescale(pyr, weights, cfg.scale_shift)?;
    let quant = quant_for(pyr.mode(), cfg.quant);
    let grid = integerize(&scaled, quant);
    let plane = bitplane_of(grid.max());
    let header = StreamHeader {
        mode: pyr.mode(),
        coder: CoderKind::Remspiht,
        all_zero: plane.all_zero,
        width,
        height,
        levels: pyr.levels(),
        top_plane: plane.top as u8,
        scale_shift: cfg.scale_shift,
        quant,
        mask: Some(mask),
    };
    let limit = cfg.budget.payload_limit(header.byte_len())?;
    let layout = TreeLayout::of(pyr);
    let side = EncoderSide::new(&layout, &grid, limit);
    if plane.all_zero {
        let trace = CodingTrace {
            complete: true,
            ..CodingTrace::default()
        };
        return Ok((SpihtBitstream::new(header, side.writer), trace));
    }
    let pruning = Pruning::new(&layout, header.mask.as_deref().unwrap(), cfg.prefiltered_lists);
    let (side, trace) = Schedule::new(layout, side, Some(&pruning), cfg.record_lists).run(plane.top);
    Ok((SpihtBitstream::new(header, side.writer), trace))
}

pub fn decode_remspiht(bs: &SpihtBitstream, upto_bits: Option<u64>) -> Result<WaveletPyramid> {
    Ok(decode_remspiht_traced(bs, upto_bits, false)?.0)
}

pub fn decode_remspiht_traced(
    bs: &SpihtBitstream,
    upto_bits: Option<u64>,
    record_lists: bool,
) -> Result<(WaveletPyramid, CodingTrace)> {
    if bs.header.coder != CoderKind::Remspiht {
        return Err(Error::Format("stream was written by the plain coder".into()));
    }
    let Some(mask) = bs.header.mask.as_deref() else {
        return Err(Error::Format("pruned stream without a mask".into()));
    };
    let layout = layout_from_header(&bs.header)?;
    if mask.len() != layout.len() {
        return Err(Error::Format(format!(
            "mask covers {} of {} coefficients",
            mask.len(),
            layout.len()
        )));
    }
    let pruning = Pruning::new(&layout, mask, false);
    let (values, trace) = run_decoder(bs, &layout, Some(&pruning), upto_bits, record_lists);
    let step = bs.header.quant.value();
    let scaled = WaveletPyramid::from_parts(
        layout.width,
        layout.height,
        layout.levels,
        bs.header.mode,
        values,
    )?;
    let pyr = unscale(&scaled, mask, bs.header.scale_shift).map(|v| v * step);
    Ok((pyr, trace))
}

/// Decodes either kind of stream, dispatching on the coder flag.
pub fn decode_auto(bs: &SpihtBitstream, upto_bits: Option<u64>) -> Result<WaveletPyramid> {
    match bs.header.coder {
        CoderKind::Spiht => crate::spiht::decode(bs, upto_bits),
        CoderKind::Remspiht => decode_remspiht(bs, upto_bits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiht::{encode_traced, SpihtOptions};
    use crate::wavelet::TransformMode;

    fn random_pyramid(w: usize, h: usize, levels: u8, seed: u64) -> WaveletPyramid {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let coeffs = (0..w * h)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s % 81) as f64 - 40.0
            })
            .collect();
        WaveletPyramid::from_parts(w, h, levels, TransformMode::IntegerLifting, coeffs).unwrap()
    }

    fn cfg(shift: u8) -> RemspihtConfig {
        RemspihtConfig {
            scale_shift: shift,
            ..RemspihtConfig::default()
        }
    }

    fn bits(bs: &SpihtBitstream) -> String {
        (0..bs.bit_count()).map(|i| if bs.bit(i) { '1' } else { '0' }).collect()
    }

    #[test]
    fn all_ones_matches_plain_coder() {
        for seed in 0..10 {
            let p = random_pyramid(16, 16, 2, seed);
            let ones = WeightMap::filled(16, 16, 1.0);
            let pruned = encode_with_weights(&p, &ones, &cfg(0)).unwrap();
            let plain = crate::spiht::encode(&p, Budget::Unbounded).unwrap();
            assert_eq!(pruned.payload(), plain.payload());
            assert_eq!(pruned.bit_count(), plain.bit_count());
            assert_eq!(decode_remspiht(&pruned, None).unwrap(), crate::spiht::decode(&plain, None).unwrap());
        }
    }

    #[test]
    fn single_coefficient_hand_trace() {
        // 4x4, one level, only (0,0) = 5 kept; scaled to 10, P = 3.
        // plane 3: LIP (0,0) significant "1", sign "0"; every other entry is
        // blocked. planes 2..0 refine 10 = 0b1010: "0", "1", "0".
        let mut p = WaveletPyramid::zeros(4, 4, 1, TransformMode::IntegerLifting).unwrap();
        p.set(0, 0, 5.0);
        p.set(3, 3, 7.0);
        p.set(0, 1, -2.0);
        let mut mask = vec![false; 16];
        mask[0] = true;
        let w = WeightMap::from_mask(4, 4, &mask);
        let bs = encode_with_weights(&p, &w, &cfg(1)).unwrap();
        assert_eq!(bs.header.top_plane, 3);
        assert_eq!(bits(&bs), "10010");
        // mask RLE: zero-run 0, one-run 1, zero-run 15
        assert_eq!(bs.header_bytes(), 20 + 4 + 3);
        let back = decode_remspiht(&bs, None).unwrap();
        assert_eq!(back.get(0, 0), 5.0);
        assert!(back.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn blocked_tree_never_costs_more() {
        let p = random_pyramid(32, 32, 3, 7);
        let layout = TreeLayout::of(&p);
        // block the tree rooted at LL (0,1), keep everything else
        let mut mask = vec![true; 1024];
        for d in layout.descendants(1) {
            mask[d] = false;
        }
        let w = WeightMap::from_mask(32, 32, &mask);
        let (pruned, pt) = encode_with_weights_traced(&p, &w, &cfg(0)).unwrap();
        let (_, st) = encode_traced(&p, &SpihtOptions::default()).unwrap();
        assert_eq!(pt.passes.len(), st.passes.len());
        for (a, b) in pt.passes.iter().zip(&st.passes) {
            assert!(a.cumulative_bits <= b.cumulative_bits);
        }
        let back = decode_remspiht(&pruned, None).unwrap();
        for (i, &keep) in mask.iter().enumerate() {
            let want = if keep { p.coeffs()[i] } else { 0.0 };
            assert_eq!(back.coeffs()[i], want);
        }
    }

    #[test]
    fn exact_on_support_for_random_masks() {
        for seed in 0..20 {
            let p = random_pyramid(16, 16, 2, seed);
            let mut s = seed + 1;
            let mask: Vec<bool> = (0..256)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                    s >> 62 != 0
                })
                .collect();
            let w = WeightMap::from_mask(16, 16, &mask);
            for shift in [0, 1, 3] {
                let bs = encode_with_weights(&p, &w, &cfg(shift)).unwrap();
                let back = decode_remspiht(&bs, None).unwrap();
                for i in 0..256 {
                    assert_eq!(back.coeffs()[i], if mask[i] { p.coeffs()[i] } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn prefiltered_lists_give_the_same_payload() {
        for seed in 0..10 {
            let p = random_pyramid(16, 16, 2, seed);
            let w = crossband_mask(&p, 2, CrossbandPolicy::Any);
            let a = encode_with_weights(&p, &w, &cfg(2)).unwrap();
            let b = encode_with_weights(&p, &w, &RemspihtConfig { prefiltered_lists: true, ..cfg(2) }).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn empty_mask_is_rejected() {
        let p = random_pyramid(8, 8, 1, 1);
        let w = WeightMap::filled(8, 8, 0.0);
        assert!(matches!(encode_with_weights(&p, &w, &cfg(0)), Err(Error::EmptyMask)));
    }

    #[test]
    fn budget_counts_the_mask() {
        let p = random_pyramid(16, 16, 2, 2);
        let w = crossband_mask(&p, 1, CrossbandPolicy::All);
        let header_bits = {
            let bs = encode_with_weights(&p, &w, &cfg(0)).unwrap();
            bs.header_bytes() as u64 * 8
        };
        let small = RemspihtConfig { budget: Budget::Bits(header_bits - 1), ..cfg(0) };
        assert!(matches!(encode_with_weights(&p, &w, &small), Err(Error::BudgetTooSmall { .. })));
        let tight = RemspihtConfig { budget: Budget::Bits(header_bits + 50), ..cfg(0) };
        let bs = encode_with_weights(&p, &w, &tight).unwrap();
        assert_eq!(bs.bit_count(), 50);
        decode_remspiht(&bs, None).unwrap();
    }

    #[test]
    fn decoder_rejects_plain_streams_and_vice_versa() {
        let p = random_pyramid(8, 8, 1, 3);
        let plain = crate::spiht::encode(&p, Budget::Unbounded).unwrap();
        assert!(matches!(decode_remspiht(&plain, None), Err(Error::Format(_))));
        let pruned = encode_remspiht(&p, &RemspihtConfig {
            mask_source: MaskSource::CaseI { u0: 2, policy: CrossbandPolicy::Any },
            ..cfg(1)
        })
        .unwrap();
        assert!(matches!(crate::spiht::decode(&pruned, None), Err(Error::Format(_))));
        let mut stripped = pruned.clone();
        stripped.header.mask = None;
        assert!(matches!(decode_remspiht(&stripped, None), Err(Error::Format(_))));
        assert_eq!(decode_auto(&pruned, None).unwrap(), decode_remspiht(&pruned, None).unwrap());
    }

    #[test]
    fn case_two_pipeline_round_trips_on_support() {
        let p = random_pyramid(32, 32, 2, 5);
        let c = RemspihtConfig { retained: Retained::Fraction(0.5), ..cfg(2) };
        let w = derive_weights(&p, &c).unwrap();
        let support = w.support_size();
        assert!((512..=512 + 64).contains(&support), "{support}");
        let bs = encode_remspiht(&p, &c).unwrap();
        assert_eq!(bs.header.mask.as_deref().unwrap(), w.mask().as_slice());
        let back = decode_remspiht(&bs, None).unwrap();
        for (i, keep) in w.mask().into_iter().enumerate() {
            assert_eq!(back.coeffs()[i], if keep { p.coeffs()[i] } else { 0.0 });
        }
    }

    #[test]
    fn retained_resolution() {
        assert_eq!(Retained::Fraction(0.5).resolve(1024).unwrap(), 512);
        assert_eq!(Retained::Count(3).resolve(4).unwrap(), 3);
        assert!(Retained::Count(5).resolve(4).is_err());
        assert!(Retained::Fraction(1.5).resolve(4).is_err());
    }

    #[test]
    fn float_mode_round_trip_within_quant_step() {
        let img = crate::pixelio::GrayImage::from_fn(16, 16, |r, c| ((r * 13 + c * 7) % 200) as f64).unwrap();
        let p = crate::wavelet::dwt2(&img, 2, TransformMode::OrthonormalFloat).unwrap();
        let w = WeightMap::filled(16, 16, 1.0);
        let bs = encode_with_weights(&p, &w, &cfg(2)).unwrap();
        let back = decode_remspiht(&bs, None).unwrap();
        let step = QuantStep::DEFAULT_FLOAT.value();
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() <= step / 8.0 + 1e-12, "{a} vs {b}");
        }
    }
}
