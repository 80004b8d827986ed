mod common;

use common::{mosaic, random_image};
use wavefuse::remspiht::{decode_remspiht_traced, encode_with_weights_traced, RemspihtConfig};
use wavefuse::spiht::{decode_traced, encode_traced, Budget, SpihtOptions};
use wavefuse::wavelet::{dwt2, TransformMode};
use wavefuse::weighting::{crossband_mask, CrossbandPolicy};

#[test]
fn plain_lists_agree_after_every_pass() {
    for seed in 0..6 {
        let img = random_image(32, 32, seed);
        let mode = if seed % 2 == 0 { TransformMode::IntegerLifting } else { TransformMode::OrthonormalFloat };
        let pyr = dwt2(&img, 2, mode).unwrap();
        let opts = SpihtOptions { record_lists: true, ..SpihtOptions::default() };
        let (bs, enc) = encode_traced(&pyr, &opts).unwrap();
        let (_, dec) = decode_traced(&bs, None, true).unwrap();
        assert_eq!(enc.passes.len(), dec.passes.len());
        for (e, d) in enc.passes.iter().zip(&dec.passes) {
            assert_eq!(e.lists, d.lists, "seed {seed} pass {}", e.pass);
            assert_eq!(e.cumulative_bits, d.cumulative_bits);
        }
    }
}

#[test]
fn truncated_decode_stops_where_the_encoder_stopped() {
    let pyr = dwt2(&random_image(32, 32, 9), 3, TransformMode::IntegerLifting).unwrap();
    let opts = SpihtOptions { budget: Budget::Bits(160 + 3000), record_lists: true, ..SpihtOptions::default() };
    let (bs, enc) = encode_traced(&pyr, &opts).unwrap();
    assert_eq!(bs.bit_count(), 3000);
    assert!(!enc.complete);
    let (_, dec) = decode_traced(&bs, None, true).unwrap();
    assert_eq!(enc.passes, dec.passes);
    assert_eq!(enc.total_bits(), dec.total_bits());
}

#[test]
fn pruned_lists_agree_after_every_pass() {
    for (seed, policy) in [(0, CrossbandPolicy::All), (1, CrossbandPolicy::Any), (2, CrossbandPolicy::Any)] {
        let pyr = dwt2(&mosaic(32, 16, seed), 2, TransformMode::IntegerLifting).unwrap();
        let weights = crossband_mask(&pyr, 3, policy);
        for prefiltered_lists in [false, true] {
            let cfg = RemspihtConfig { record_lists: true, prefiltered_lists, ..RemspihtConfig::default() };
            let (bs, enc) = encode_with_weights_traced(&pyr, &weights, &cfg).unwrap();
            let (_, dec) = decode_remspiht_traced(&bs, None, true).unwrap();
            for (e, d) in enc.passes.iter().zip(&dec.passes) {
                assert_eq!(e.lists, d.lists);
            }
            // after pruning no list entry refers to a blocked coefficient
            let mask = weights.mask();
            for pass in &enc.passes {
                let lists = pass.lists.as_ref().unwrap();
                assert!(lists.lip.iter().all(|c| mask[c.row * 32 + c.col]));
                assert!(lists.lsp.iter().all(|(c, _)| mask[c.row * 32 + c.col]));
            }
        }
    }
}
