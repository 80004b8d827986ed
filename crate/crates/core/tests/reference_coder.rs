mod common;

use common::reference::{self, Grid};
use common::{as_rows, mask_rows, payload_bits, random_int_pyramid, rng};
use rand::Rng;
use wavefuse::remspiht::{encode_with_weights, RemspihtConfig};
use wavefuse::spiht::{encode, Budget};
use wavefuse::weighting::WeightMap;

#[test]
fn plain_payload_matches_reference() {
    for (seed, (w, h, levels)) in [(8, 8, 1), (8, 8, 2), (16, 16, 3), (32, 16, 2), (16, 32, 1)]
        .into_iter()
        .cycle()
        .take(60)
        .enumerate()
    {
        let span = [1, 7, 100, 5000][seed % 4];
        let p = random_int_pyramid(w, h, levels, span, seed as u64);
        let rows = as_rows(&p);
        let want = reference::encode(&Grid { values: &rows, levels: u32::from(levels), keep: None });
        let got = payload_bits(&encode(&p, Budget::Unbounded).unwrap());
        assert_eq!(got, want, "seed {seed} {w}x{h} L{levels}");
    }
}

#[test]
fn sparse_pyramids_match_reference() {
    let mut r = rng(99);
    for seed in 0..40 {
        let mut p = random_int_pyramid(16, 16, 2, 0, seed);
        for _ in 0..r.random_range(1..6) {
            let i = r.random_range(0..256);
            p.coeffs_mut()[i] = f64::from(r.random_range(-300..300));
        }
        let rows = as_rows(&p);
        let want = reference::encode(&Grid { values: &rows, levels: 2, keep: None });
        assert_eq!(payload_bits(&encode(&p, Budget::Unbounded).unwrap()), want);
    }
}

#[test]
fn pruned_payload_matches_reference() {
    let mut r = rng(7);
    for seed in 0..40 {
        let p = random_int_pyramid(16, 16, 2, 60, seed);
        let density = [0.1, 0.5, 0.9][seed as usize % 3];
        let mut mask: Vec<bool> = (0..256).map(|_| r.random_bool(density)).collect();
        mask[r.random_range(0..256)] = true;
        let weights = WeightMap::from_mask(16, 16, &mask);
        let shift = (seed % 3) as u8;
        let cfg = RemspihtConfig { scale_shift: shift, ..RemspihtConfig::default() };
        let got = payload_bits(&encode_with_weights(&p, &weights, &cfg).unwrap());

        let scaled: Vec<Vec<i64>> = as_rows(&p)
            .into_iter()
            .enumerate()
            .map(|(row, vals)| {
                vals.into_iter()
                    .enumerate()
                    .map(|(col, v)| if mask[row * 16 + col] { v << shift } else { 0 })
                    .collect()
            })
            .collect();
        let keep = mask_rows(&mask, 16);
        let want = reference::encode(&Grid { values: &scaled, levels: 2, keep: Some(&keep) });
        assert_eq!(got, want, "seed {seed}");
    }
}
