//! Hand-computed and brute-force oracles for the baseline metrics and the
//! meta-study building blocks.

use std::collections::HashSet;

use ctxmeasure_core::baselines::{e_measure, mae, s_measure, BaselineParams};
use ctxmeasure_core::cmeasure::{context_measure, CmParams};
use ctxmeasure_core::metastudy::{derangement, inject_noise, CandidateMode, NOISE_SIGMA};
use ctxmeasure_core::{BinaryMask, GrayMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk(h: usize, w: usize, cr: f64, cc: f64, rad: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |r, c| {
        let (dr, dc) = (r as f64 - cr, c as f64 - cc);
        dr * dr + dc * dc <= rad * rad
    })
    .unwrap()
}

#[test]
fn s_measure_constant_half_on_top_half() {
    // object term: both sides see a constant 0.5, giving 2*0.5/(0.25+1) = 0.8.
    // region term: the two upper quadrants are pure foreground and match
    // (ssim 1); the two lower ones mix labels against a flat map (ssim 0);
    // each holds a quarter of the foreground, so the region term is 0.5.
    let y = BinaryMask::from_fn(8, 8, |r, _| r < 4).unwrap();
    let x = GrayMap::constant(8, 8, 0.5).unwrap();
    let s = s_measure(&x, &y, &BaselineParams::default()).unwrap();
    assert!((s - 0.65).abs() < 1e-9, "{s}");
}

#[test]
fn e_measure_four_by_four() {
    // X covers the top-left 2x2 block, Y the top row; both means are 1/4.
    // Agreeing pixels have xi = 1 and contribute 4, disagreeing ones have
    // xi = -0.6 and contribute 0.16: (12*4 + 4*0.16) / 64 = 0.76.
    let x = BinaryMask::from_fn(4, 4, |r, c| r < 2 && c < 2).unwrap();
    let y = BinaryMask::from_fn(4, 4, |r, _| r == 0).unwrap();
    let e = e_measure(&x, &y).unwrap();
    assert!((e - 0.76).abs() < 1e-9, "{e}");
}

#[test]
fn mae_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (h, w) = (rng.random_range(1..30), rng.random_range(1..30));
        let x = GrayMap::from_fn(w, h, |_, _| rng.random()).unwrap();
        let y = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(0.4)).unwrap();
        let mut total = 0.0;
        for r in 0..h {
            for c in 0..w {
                total += (x.get(r, c) - if y.get(r, c) { 1.0 } else { 0.0 }).abs();
            }
        }
        assert!((mae(&x, &y).unwrap() - total / (h * w) as f64).abs() < 1e-12);
    }
}

#[test]
fn derangements_of_five_are_all_reachable() {
    let mut seen = HashSet::new();
    for seed in 0..10_000 {
        let p = derangement(5, seed).unwrap();
        assert!(p.iter().enumerate().all(|(i, &j)| i != j));
        seen.insert(p);
    }
    assert_eq!(seen.len(), 44);
}

#[test]
fn noise_on_empty_background_has_half_normal_mean() {
    // clamping N(0, s^2) at zero leaves a mean of s / sqrt(2 pi)
    let y = disk(100, 100, 50.0, 50.0, 20.0);
    let x = GrayMap::from(&y);
    let (mut total, mut changed) = (0.0, 0usize);
    for seed in 0..40 {
        let noisy = inject_noise(&x, &y, seed, CandidateMode::Background).unwrap();
        for (a, b) in noisy.values().iter().zip(x.values()) {
            total += a - b;
        }
        changed += 100;
    }
    let expected = NOISE_SIGMA / (2.0 * std::f64::consts::PI).sqrt();
    let mean = total / changed as f64;
    assert!((mean - expected).abs() < 0.1 * expected, "{mean} vs {expected}");
}

#[test]
fn context_measure_disk_regression() {
    let y = disk(64, 64, 32.0, 32.0, 8.0);
    let x = GrayMap::from(&y);
    let c = context_measure(&x, &y, &CmParams::generic()).unwrap();
    assert!((c - PINNED_DISK).abs() < 1e-12, "{c:.17}");
}

// A perfect prediction does not reach 1: the kernel leaks mass past the
// object boundary on both passes.
const PINNED_DISK: f64 = 0.638_045_168_145_511_7;
