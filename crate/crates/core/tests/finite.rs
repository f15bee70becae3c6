use std::collections::BTreeSet;

use mdsc_core::ensemble::EnsembleParams;
use mdsc_core::sim::{mc_pstop, mc_purged, peel, sample_graph, ErasurePattern, Perspective};

#[test]
fn peeling_succeeds_far_below_threshold() {
    let p = EnsembleParams::new(4, 8, 30, 2, 3, 2, 0.1).unwrap();
    let g = sample_graph(&p, 512, 1).unwrap();
    let trials = 1000;
    let failures = (0..trials).filter(|&s| !peel(&g, &ErasurePattern::sample(&g, 0.2, 100 + s)).is_empty()).count();
    assert!((failures as f64) < 0.01 * trials as f64, "{failures} failures in {trials}");
}

#[test]
fn same_neighbourhood_frequency_falls_with_section_size() {
    let p = EnsembleParams::new(2, 4, 5, 1, 1, 1, 0.0).unwrap();
    let small = mc_pstop(&p, 8, 200_000, 5).unwrap();
    let large = mc_pstop(&p, 16, 200_000, 5).unwrap();
    // 1 / C(4, 2) and 1 / C(8, 2)
    assert!((small.estimate - 1.0 / 6.0).abs() <= 3.0 * small.stderr);
    assert!((large.estimate - 1.0 / 28.0).abs() <= 3.0 * large.stderr);
    assert!(small.estimate - large.estimate > 3.0 * (small.stderr + large.stderr));
}

#[test]
fn monte_carlo_is_reproducible() {
    let p = EnsembleParams::new(2, 4, 5, 1, 1, 1, 0.0).unwrap();
    let a = mc_pstop(&p, 8, 40_000, 9).unwrap();
    let b = mc_pstop(&p, 8, 40_000, 9).unwrap();
    assert_eq!(a.estimate, b.estimate);
    let q = EnsembleParams::new(4, 8, 4, 2, 3, 2, 0.1).unwrap();
    let x = mc_purged(&q, 16, 50, 2, Perspective::Check).unwrap();
    let y = mc_purged(&q, 16, 50, 2, Perspective::Check).unwrap();
    assert_eq!(x.mean, y.mean);
}

#[test]
fn edge_list_round_trip() {
    let p = EnsembleParams::new(4, 8, 5, 2, 3, 2, 0.2).unwrap();
    let g = sample_graph(&p, 16, 8).unwrap();
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let parsed: BTreeSet<Vec<i64>> = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| l.split(' ').map(|f| f.parse().unwrap()).collect())
        .collect();
    let mut direct = BTreeSet::new();
    for vn in 0..g.num_vns() {
        let (vs, vi) = g.vn_location(vn);
        for &cn in g.vn_neighbors(vn) {
            let (cs, ci) = g.cn_location(cn as usize);
            direct.insert(vec![vs.i, vs.j as i64, vi as i64, cs.i, cs.j as i64, ci as i64]);
        }
    }
    assert_eq!(parsed, direct);
    assert_eq!(parsed.len(), g.num_vns() * 4);
}
