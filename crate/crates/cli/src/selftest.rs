//! Embedded oracle checks run by `ctxmeasure selftest`.

use ctxmeasure_core::camo::camo_degree;
use ctxmeasure_core::cmeasure::{forward_inference, kernel_for, reverse_deduction, reverse_exact, REVERSE_NORMALIZER};
use ctxmeasure_core::colorimetry::{ciede2000, REFERENCE_PAIRS};
use ctxmeasure_core::{BinaryMask, GrayMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteStatus {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn status(name: &'static str, passed: bool, detail: String) -> SuiteStatus {
    SuiteStatus { name, passed, detail }
}

fn color_difference() -> SuiteStatus {
    let worst = REFERENCE_PAIRS.iter().map(|&(a, b, want)| (ciede2000(a, b) - want).abs()).fold(0.0, f64::max);
    status("ciede2000", worst <= 1e-4, format!("{} pairs, max error {worst:.2e}", REFERENCE_PAIRS.len()))
}

/// Random blob mask with at least two foreground pixels in two rows and
/// two columns, so the covariance is not degenerate.
fn random_instance(rng: &mut ChaCha8Rng, size: usize) -> (GrayMap, BinaryMask) {
    loop {
        let (cr, cc) = (rng.random_range(0.0..size as f64), rng.random_range(0.0..size as f64));
        let (a, b) = (rng.random_range(2.0..size as f64 / 2.0), rng.random_range(2.0..size as f64 / 2.0));
        let y = BinaryMask::from_fn(size, size, |r, c| {
            let (dr, dc) = ((r as f64 - cr) / a, (c as f64 - cc) / b);
            dr * dr + dc * dc <= 1.0
        })
        .expect("square frame");
        let rows = y.foreground_pixels().iter().map(|p| p.row).collect::<std::collections::BTreeSet<_>>().len();
        let cols = y.foreground_pixels().iter().map(|p| p.col).collect::<std::collections::BTreeSet<_>>().len();
        if rows < 2 || cols < 2 {
            continue;
        }
        let x = GrayMap::from_fn(size, size, |_, _| if rng.random_bool(0.5) { rng.random() } else { 0.0 }).expect("square");
        return (x, y);
    }
}

fn convolution() -> SuiteStatus {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let size = rng.random_range(8..=32);
        let (x, y) = random_instance(&mut rng, size);
        let k = match kernel_for(&y, 6.0) {
            Ok(k) => k,
            Err(e) => return status("convolution", false, e.to_string()),
        };
        let fast = forward_inference(&x, &y, &k).expect("same frame");
        let half = (k.rows() / 2) as isize;
        for r in 0..size {
            for c in 0..size {
                let mut acc = 0.0;
                for dr in -half..=half {
                    for dc in -half..=half {
                        let (qr, qc) = (r as isize + dr, c as isize + dc);
                        if qr >= 0 && qc >= 0 && (qr as usize) < size && (qc as usize) < size && y.get(qr as usize, qc as usize) {
                            acc += k.weight(dr, dc);
                        }
                    }
                }
                worst = worst.max((fast.get(r, c) - x.get(r, c) * acc).abs());
            }
        }
    }
    status("convolution", worst <= 1e-10, format!("8 instances, max error {worst:.2e}"))
}

fn reverse_approximation() -> SuiteStatus {
    let mut rng = ChaCha8Rng::seed_from_u64(0xe4e6);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let size = 40;
        let (_, y) = random_instance(&mut rng, size);
        let x = GrayMap::from_fn(size, size, |_, _| if rng.random_bool(0.01) { rng.random_range(0.0..=0.1) } else { 0.0 })
            .expect("square");
        let k = kernel_for(&y, 6.0).expect("non-degenerate");
        let approx = reverse_deduction(&x, &y, &k).expect("same frame");
        let exact = reverse_exact(&x, &y, k.source()).expect("same frame");
        for (a, e) in approx.values().iter().zip(exact.values()) {
            worst = worst.max((a - REVERSE_NORMALIZER * e).abs());
        }
    }
    status("reverse-approximation", worst <= 1e-3, format!("8 sparse instances, max gap {worst:.2e}"))
}

fn degree_mapping() -> SuiteStatus {
    let mid = ((4.0f64).exp() - 1.0) / ((8.0f64).exp() - 1.0);
    let ok = camo_degree(0.0, 8.0) == 1.0 && camo_degree(100.0, 8.0) == 0.0 && (camo_degree(50.0, 8.0) - mid).abs() <= 1e-12;
    status("degree-mapping", ok, format!("D(50) = {:.12}", camo_degree(50.0, 8.0)))
}

pub fn run_all() -> Vec<SuiteStatus> {
    vec![color_difference(), convolution(), reverse_approximation(), degree_mapping()]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_suites_pass() {
        for s in super::run_all() {
            assert!(s.passed, "{}: {}", s.name, s.detail);
        }
    }
}
