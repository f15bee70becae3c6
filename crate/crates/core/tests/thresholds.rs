use mdsc_core::de::{bp_threshold, DeCaps};
use mdsc_core::ensemble::{design_rate, EnsembleParams};
use mdsc_core::window::{
    decode_chain, wc_threshold, worst_case_threshold, DecodeSchedule, WindowOptions, WindowSpec, WorstCase,
};
use mdsc_core::WorstCase32;

const DELTA: f64 = 1e-12;

/// Coupled-chain recursion written out directly; true when every position
/// drops to `delta` before the values stop moving.
fn chain_decodes(dl: i32, dr: i32, l1: usize, g1: usize, eps: f64) -> bool {
    let mut x = vec![1.0f64; l1];
    let at = |v: &[f64], i: i64| if (0..v.len() as i64).contains(&i) { v[i as usize] } else { 0.0 };
    for _ in 0..1_000_000 {
        let checks: Vec<f64> = (0..(l1 + g1 - 1) as i64)
            .map(|p| {
                let avg = (0..g1 as i64).map(|k| at(&x, p - k)).sum::<f64>() / g1 as f64;
                1.0 - (1.0 - avg).powi(dr - 1)
            })
            .collect();
        let next: Vec<f64> = (0..l1 as i64)
            .map(|i| {
                let avg = (0..g1 as i64).map(|k| at(&checks, i + k)).sum::<f64>() / g1 as f64;
                eps * avg.powi(dl - 1)
            })
            .collect();
        if next.iter().all(|&v| v <= DELTA) {
            return true;
        }
        let moved = next.iter().zip(&x).map(|(a, b)| (a - b).abs() / b.max(1e-300)).fold(0.0, f64::max);
        if moved < 1e-10 {
            return false;
        }
        x = next;
    }
    false
}

#[test]
fn bp_threshold_agrees_with_a_grid_scan() {
    let p = EnsembleParams::new(4, 8, 30, 2, 3, 2, 0.1).unwrap();
    let b = bp_threshold(&p, DELTA, 1e-5, DeCaps::default());
    // scan the 1e-4 grid around the bisection result
    let grid: Vec<f64> = (0..=40).map(|k| 0.492 + 1e-4 * k as f64).collect();
    let first_fail = grid.iter().copied().find(|&e| !chain_decodes(4, 8, 30, 2, e)).unwrap();
    let last_ok = first_fail - 1e-4;
    assert!(chain_decodes(4, 8, 30, 2, last_ok));
    let scan = 0.5 * (last_ok + first_fail);
    assert!((b.midpoint() - scan).abs() <= 1e-4, "bisection {} vs scan {scan}", b.midpoint());
}

#[test]
fn bp_threshold_respects_the_rate_bound() {
    for (l2, g2, t) in [(3, 2, 0.1), (7, 3, 0.05), (1, 1, 0.0)] {
        let p = EnsembleParams::new(4, 8, 30, 2, l2, g2, t).unwrap();
        let res = 1e-4;
        let b = bp_threshold(&p, DELTA, res, DeCaps::default());
        assert!(b.midpoint() <= 1.0 - design_rate::<f64>(&p) + res);
        assert!(b.lower < b.upper && b.upper - b.lower <= res);
    }
}

#[test]
fn brackets_are_valid() {
    let p = EnsembleParams::new(4, 8, 30, 2, 7, 2, 0.05).unwrap();
    let spec: WindowSpec = "5,5,4,2,3,4,5".parse().unwrap();
    let wc = WorstCase::new(&spec, &p, DELTA).unwrap();
    let b = wc.threshold(1e-5, DeCaps::default());
    assert!(b.upper - b.lower <= 1e-5);
    assert!(wc.run(b.lower, DeCaps::default()).converged);
    assert!(!wc.run(b.upper, DeCaps::default()).converged);
    assert!(b.probes >= 16);
}

#[test]
fn uniform_windows_ignore_the_second_dimension() {
    let spec = WindowSpec::uniform(7, 4).unwrap();
    let mut worst = Vec::new();
    let mut chain = Vec::new();
    for (g2, t) in [(2, 0.05), (2, 0.1), (3, 0.05), (3, 0.1), (7, 0.3)] {
        let p = EnsembleParams::new(4, 8, 30, 2, 7, g2, t).unwrap();
        worst.push(worst_case_threshold(&spec, &p, DELTA, 1e-5, DeCaps::default()).unwrap().midpoint());
        let s = DecodeSchedule::natural(&p);
        chain.push(wc_threshold(&spec, &p, &s, DELTA, 1e-4, WindowOptions::default()).unwrap().midpoint());
    }
    for v in worst.iter().chain(&chain) {
        assert!((v - worst[0]).abs() <= 1e-4, "{worst:?} {chain:?}");
    }
    assert!((worst[0] - 0.4685).abs() <= 5e-4);
}

#[test]
fn worst_case_bounds_every_window_of_the_chain() {
    let p = EnsembleParams::new(4, 8, 30, 2, 9, 2, 0.1).unwrap();
    let spec: WindowSpec = "5,5,4,3,2,3,4,5,5".parse().unwrap();
    let wc = WorstCase::new(&spec, &p, DELTA).unwrap();
    let threshold = wc.threshold(1e-4, DeCaps::default()).lower;
    for eps in [0.3, 0.45, threshold - 1e-3] {
        let worst_iters = wc.run(eps, DeCaps::default());
        assert!(worst_iters.converged);
        let profile = decode_chain(&p, &spec, &DecodeSchedule::natural(&p), eps, DELTA, WindowOptions::default())
            .expect("every WC decodes below the worst-case threshold");
        let most = profile.per_wc.iter().map(|w| w.iterations).max().unwrap();
        assert!(most <= worst_iters.iterations, "eps {eps}: chain {most} > worst case {}", worst_iters.iterations);
    }
}

#[test]
fn single_precision_tracks_double() {
    let p = EnsembleParams::new(4, 8, 30, 2, 7, 2, 0.05).unwrap();
    let spec: WindowSpec = "5,5,4,2,3,4,5".parse().unwrap();
    // delta stays well inside f32 range
    let t64 = WorstCase::<f64>::new(&spec, &p, 1e-6).unwrap().threshold(1e-4, DeCaps::default()).midpoint();
    let t32 = WorstCase32::new(&spec, &p, 1e-6).unwrap().threshold(1e-4, DeCaps::default()).midpoint();
    assert!((t64 - t32 as f64).abs() <= 2e-3, "{t64} vs {t32}");
}
