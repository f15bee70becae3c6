//! Finite-length Tanner graphs sampled from the ensemble, a peeling decoder,
//! and Monte Carlo / enumeration oracles for the ensemble's closed forms.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{EnsembleParams, SectionIndex};
use crate::error::{Error, Result};
use crate::exact::{binomial, rational_from_decimal};

/// Which side of the graph draws its edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Perspective {
    /// Each VN draws `d_l` edges: biased coin, section, then a uniform CN.
    /// VN-regular; CN degrees are random.
    Variable,
    /// Each CN (including those next to the virtual sections outside the
    /// chain) draws `d_r` sockets the same way towards VNs; sockets landing
    /// on virtual sections carry no edge. CN-regular before purging; VN
    /// degrees are random.
    Check,
}

const SECTION_ATTEMPTS: usize = 256;

/// Sampled bipartite graph; VNs live on `[L1] x [L2]`, CNs on positions
/// `[0, L1 + gamma1 - 2]` of every segment.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    pub m: usize,
    pub params: EnsembleParams,
    pub perspective: Perspective,
    checks_per_section: usize,
    cn_positions: usize,
    vn_adj: Vec<Vec<u32>>,
    cn_adj: Vec<Vec<u32>>,
    purged: Vec<bool>,
}

impl TannerGraph {
    pub fn num_vns(&self) -> usize {
        self.vn_adj.len()
    }

    pub fn num_cns(&self) -> usize {
        self.cn_adj.len()
    }

    pub fn checks_per_section(&self) -> usize {
        self.checks_per_section
    }

    pub fn vn_id(&self, s: SectionIndex, idx: usize) -> usize {
        (s.i as usize * self.params.l2() + s.j) * self.m + idx
    }

    pub fn vn_location(&self, vn: usize) -> (SectionIndex, usize) {
        let sec = vn / self.m;
        let l2 = self.params.l2();
        (SectionIndex::new((sec / l2) as i64, sec % l2), vn % self.m)
    }

    pub fn cn_id(&self, s: SectionIndex, idx: usize) -> usize {
        (s.i as usize * self.params.l2() + s.j) * self.checks_per_section + idx
    }

    pub fn cn_location(&self, cn: usize) -> (SectionIndex, usize) {
        let sec = cn / self.checks_per_section;
        let l2 = self.params.l2();
        (SectionIndex::new((sec / l2) as i64, sec % l2), cn % self.checks_per_section)
    }

    pub fn vn_neighbors(&self, vn: usize) -> &[u32] {
        &self.vn_adj[vn]
    }

    pub fn cn_neighbors(&self, cn: usize) -> &[u32] {
        &self.cn_adj[cn]
    }

    pub fn is_purged(&self, cn: usize) -> bool {
        self.purged[cn]
    }

    /// Purged CNs per CN section, indexed `[position][segment]`.
    pub fn purged_per_section(&self) -> Vec<Vec<usize>> {
        let l2 = self.params.l2();
        let mut counts = vec![vec![0; l2]; self.cn_positions];
        for (cn, &gone) in self.purged.iter().enumerate() {
            if gone {
                let (s, _) = self.cn_location(cn);
                counts[s.i as usize][s.j] += 1;
            }
        }
        counts
    }

    /// `1 - (unpurged CNs) / VNs`.
    pub fn empirical_rate(&self) -> f64 {
        let live = self.purged.iter().filter(|&&p| !p).count();
        1.0 - live as f64 / self.num_vns() as f64
    }

    /// One line per edge:
    /// `vn_section_i vn_section_j vn_idx cn_section_i cn_section_j cn_idx`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for (vn, cns) in self.vn_adj.iter().enumerate() {
            let (vs, vi) = self.vn_location(vn);
            for &cn in cns {
                let (cs, ci) = self.cn_location(cn as usize);
                writeln!(w, "{} {} {} {} {} {}", vs.i, vs.j, vi, cs.i, cs.j, ci)?;
            }
        }
        Ok(())
    }

    /// Checks adjacency inversion, absence of parallel edges, locality and
    /// (for VN-drawn graphs) VN regularity. Returns a description of the
    /// first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let p = &self.params;
        let l2 = p.l2() as i64;
        let mut edges = 0usize;
        for (vn, cns) in self.vn_adj.iter().enumerate() {
            if self.perspective == Perspective::Variable && cns.len() != p.dl() {
                return Err(format!("VN {vn} has degree {}", cns.len()));
            }
            let mut sorted = cns.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cns.len() {
                return Err(format!("VN {vn} has parallel edges"));
            }
            let (vs, _) = self.vn_location(vn);
            for &cn in cns {
                let (cs, _) = self.cn_location(cn as usize);
                let dk = cs.i - vs.i;
                let dj = (cs.j as i64 - vs.j as i64).rem_euclid(l2);
                if !(0..p.gamma1() as i64).contains(&dk) || dj >= p.gamma2() as i64 {
                    return Err(format!("edge VN {vn} -> CN {cn} leaves the coupling window"));
                }
                if p.density() == 0.0 && dj != 0 {
                    return Err(format!("edge VN {vn} -> CN {cn} crosses segments with T = 0"));
                }
                if !self.cn_adj[cn as usize].contains(&(vn as u32)) {
                    return Err(format!("edge VN {vn} -> CN {cn} missing from CN side"));
                }
                edges += 1;
            }
        }
        let cn_edges: usize = self.cn_adj.iter().map(Vec::len).sum();
        if cn_edges != edges {
            return Err(format!("{edges} VN-side edges but {cn_edges} CN-side edges"));
        }
        for (cn, vns) in self.cn_adj.iter().enumerate() {
            if self.purged[cn] != vns.is_empty() {
                return Err(format!("CN {cn} purge flag disagrees with its degree"));
            }
        }
        Ok(())
    }
}

/// Offset `(k, r)` of one edge: `r = 0` with probability `1 - T`.
fn draw_offset<R: Rng>(rng: &mut R, p: &EnsembleParams) -> (i64, i64) {
    let k = rng.gen_range(0..p.gamma1()) as i64;
    let cross = p.gamma2() > 1 && rng.gen_bool(p.density());
    let r = if cross { rng.gen_range(1..p.gamma2()) as i64 } else { 0 };
    (k, r)
}

/// The `d_l` distinct CN neighbours of one VN in section `s`.
fn draw_vn_edges<R: Rng>(
    rng: &mut R,
    p: &EnsembleParams,
    s: SectionIndex,
    idx: usize,
    checks_per_section: usize,
    cn_id: impl Fn(SectionIndex, usize) -> u32,
) -> Result<Vec<u32>> {
    let mut chosen: Vec<u32> = Vec::with_capacity(p.dl());
    for _ in 0..p.dl() {
        let mut placed = false;
        'sections: for _ in 0..SECTION_ATTEMPTS {
            let (k, r) = draw_offset(rng, p);
            let target = s.offset(k, r, p.l2());
            for _ in 0..checks_per_section {
                let cn = cn_id(target, rng.gen_range(0..checks_per_section));
                if !chosen.contains(&cn) {
                    chosen.push(cn);
                    placed = true;
                    break 'sections;
                }
            }
        }
        if !placed {
            return Err(Error::SamplingExhausted { section: s, vn: idx });
        }
    }
    Ok(chosen)
}

/// Samples a graph with the given perspective; `seed` fully determines it.
pub fn sample_graph_with(p: &EnsembleParams, m: usize, seed: u64, perspective: Perspective) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_graph_rng(p, m, &mut rng, perspective)
}

/// VN-perspective sample: every in-range VN gets exactly `d_l` distinct CNs.
pub fn sample_graph(p: &EnsembleParams, m: usize, seed: u64) -> Result<TannerGraph> {
    sample_graph_with(p, m, seed, Perspective::Variable)
}

fn sample_graph_rng<R: Rng>(p: &EnsembleParams, m: usize, rng: &mut R, perspective: Perspective) -> Result<TannerGraph> {
    let nc = p.checks_per_section(m)?;
    let l2 = p.l2();
    let cn_positions = p.l1() + p.gamma1() - 1;
    let num_vns = p.l1() * l2 * m;
    let num_cns = cn_positions * l2 * nc;
    let cn_id = |s: SectionIndex, idx: usize| ((s.i as usize * l2 + s.j) * nc + idx) as u32;
    let mut vn_adj: Vec<Vec<u32>> = vec![Vec::new(); num_vns];
    let mut cn_adj: Vec<Vec<u32>> = vec![Vec::new(); num_cns];

    match perspective {
        Perspective::Variable => {
            for i in 0..p.l1() {
                for j in 0..l2 {
                    let s = SectionIndex::new(i as i64, j);
                    for idx in 0..m {
                        let vn = (i * l2 + j) * m + idx;
                        let cns = draw_vn_edges(rng, p, s, idx, nc, cn_id)?;
                        for &cn in &cns {
                            cn_adj[cn as usize].push(vn as u32);
                        }
                        vn_adj[vn] = cns;
                    }
                }
            }
        }
        Perspective::Check => {
            let vn_id = |s: SectionIndex, idx: usize| ((s.i as usize * l2 + s.j) * m + idx) as u32;
            for pos in 0..cn_positions {
                for j in 0..l2 {
                    let cs = SectionIndex::new(pos as i64, j);
                    for idx in 0..nc {
                        let cn = cn_id(cs, idx);
                        let mut chosen: Vec<u32> = Vec::with_capacity(p.dr());
                        for _ in 0..p.dr() {
                            let mut placed = false;
                            'sections: for _ in 0..SECTION_ATTEMPTS {
                                let (k, r) = draw_offset(rng, p);
                                let vs = cs.offset(-k, -r, l2);
                                if !p.in_range(vs) {
                                    // socket goes to a virtual VN: no edge
                                    placed = true;
                                    break 'sections;
                                }
                                for _ in 0..m {
                                    let vn = vn_id(vs, rng.gen_range(0..m));
                                    if !chosen.contains(&vn) {
                                        chosen.push(vn);
                                        placed = true;
                                        break 'sections;
                                    }
                                }
                            }
                            if !placed {
                                return Err(Error::SamplingExhausted { section: cs, vn: idx });
                            }
                        }
                        for &vn in &chosen {
                            vn_adj[vn as usize].push(cn);
                        }
                        cn_adj[cn as usize] = chosen;
                    }
                }
            }
        }
    }
    let purged = cn_adj.iter().map(Vec::is_empty).collect();
    Ok(TannerGraph {
        m,
        params: p.clone(),
        perspective,
        checks_per_section: nc,
        cn_positions,
        vn_adj,
        cn_adj,
        purged,
    })
}

/// A BEC realisation over the VNs of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasurePattern {
    pub erased: Vec<u32>,
    pub epsilon: f64,
    pub seed: u64,
}

impl ErasurePattern {
    pub fn sample(g: &TannerGraph, epsilon: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let erased = (0..g.num_vns() as u32).filter(|_| rng.gen_bool(epsilon)).collect();
        ErasurePattern { erased, epsilon, seed }
    }

    pub fn from_vns(erased: Vec<u32>) -> Self {
        ErasurePattern { erased, epsilon: f64::NAN, seed: 0 }
    }
}

/// Peeling decoder: repeatedly resolves CNs with exactly one erased
/// neighbour. Returns the sorted residual erased VNs (empty on success).
pub fn peel(g: &TannerGraph, e: &ErasurePattern) -> Vec<u32> {
    let mut erased = vec![false; g.num_vns()];
    for &v in &e.erased {
        erased[v as usize] = true;
    }
    let mut pending = vec![0u32; g.num_cns()];
    for &v in &e.erased {
        for &c in g.vn_neighbors(v as usize) {
            pending[c as usize] += 1;
        }
    }
    let mut queue: Vec<u32> = (0..g.num_cns() as u32).filter(|&c| pending[c as usize] == 1).collect();
    while let Some(c) = queue.pop() {
        if pending[c as usize] != 1 {
            continue;
        }
        let Some(&v) = g.cn_neighbors(c as usize).iter().find(|&&v| erased[v as usize]) else {
            continue;
        };
        erased[v as usize] = false;
        for &c2 in g.vn_neighbors(v as usize) {
            pending[c2 as usize] -= 1;
            if pending[c2 as usize] == 1 {
                queue.push(c2);
            }
        }
    }
    (0..g.num_vns() as u32).filter(|&v| erased[v as usize]).collect()
}

/// `true` when every CN touching `set` touches it at least twice.
pub fn is_stopping_set(g: &TannerGraph, set: &[u32]) -> bool {
    let mut hits = vec![0u32; g.num_cns()];
    for &v in set {
        for &c in g.vn_neighbors(v as usize) {
            hits[c as usize] += 1;
        }
    }
    hits.iter().all(|&h| h != 1)
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub params: serde_json::Value,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
}

const TRIALS_PER_STREAM: u64 = 1 << 14;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Frequency with which VNs 0 and 1 of section `(0, 0)` draw the same CN set
/// under VN-perspective sampling.
///
/// Only the two VNs' neighbourhoods are drawn: under this sampler every VN
/// draws its edges independently, so the rest of the graph does not affect
/// the event. Trials are split into fixed-size ChaCha substreams, so the
/// result does not depend on the worker count.
pub fn mc_pstop(p: &EnsembleParams, m: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::PreconditionViolated("mc_pstop needs at least one trial".into()));
    }
    let nc = p.checks_per_section(m)?;
    let l2 = p.l2();
    let cn_id = |s: SectionIndex, idx: usize| ((s.i as usize * l2 + s.j) * nc + idx) as u32;
    let origin = SectionIndex::new(0, 0);
    let streams = trials.div_ceil(TRIALS_PER_STREAM);
    let hits: u64 = (0..streams)
        .into_par_iter()
        .map(|stream| -> Result<u64> {
            let mut rng = substream(seed, stream);
            let n = TRIALS_PER_STREAM.min(trials - stream * TRIALS_PER_STREAM);
            let mut hits = 0;
            for _ in 0..n {
                let mut a = draw_vn_edges(&mut rng, p, origin, 0, nc, cn_id)?;
                let mut b = draw_vn_edges(&mut rng, p, origin, 1, nc, cn_id)?;
                a.sort_unstable();
                b.sort_unstable();
                hits += u64::from(a == b);
            }
            Ok(hits)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    let est = hits as f64 / trials as f64;
    Ok(McEstimate {
        params: p.to_json_value(),
        m,
        trials,
        seed,
        estimate: est,
        stderr: (est * (1.0 - est) / trials as f64).sqrt(),
    })
}

/// `1 / C(M d_l / d_r, d_l)`: the VN-perspective same-neighbourhood
/// probability when all edges stay in one CN section (`gamma1 = 1`, `T = 0`).
pub fn cn_uniform_pstop(p: &EnsembleParams, m: usize) -> Result<Option<BigRational>> {
    if p.gamma1() != 1 || p.density() != 0.0 {
        return Ok(None);
    }
    let nc = p.checks_per_section(m)? as i64;
    let ways = binomial(nc, p.dl() as i64);
    if ways.is_zero() {
        return Err(Error::PreconditionViolated(format!("fewer than d_l = {} CNs per section", p.dl())));
    }
    Ok(Some(BigRational::new(BigInt::one(), ways)))
}

/// Per-position statistics of purged CNs over many sampled graphs.
#[derive(Debug, Clone, Serialize)]
pub struct PurgeStats {
    pub graphs: usize,
    pub seed: u64,
    pub perspective: Perspective,
    /// Mean purged CNs per section at CN position `i` (averaged over segments).
    pub mean: Vec<f64>,
    /// Standard error of `mean`.
    pub stderr: Vec<f64>,
    /// Mean empirical rate `1 - live CNs / VNs`.
    pub rate_mean: f64,
    pub rate_stderr: f64,
}

/// Samples `graphs` graphs (graph `g` uses substream `g` of `seed`) and
/// tallies purged CNs by position.
pub fn mc_purged(p: &EnsembleParams, m: usize, graphs: usize, seed: u64, perspective: Perspective) -> Result<PurgeStats> {
    let per_graph: Vec<(Vec<f64>, f64)> = (0..graphs as u64)
        .into_par_iter()
        .map(|g| -> Result<(Vec<f64>, f64)> {
            let mut rng = substream(seed, g);
            let graph = sample_graph_rng(p, m, &mut rng, perspective)?;
            let counts = graph
                .purged_per_section()
                .into_iter()
                .map(|row| row.iter().sum::<usize>() as f64 / row.len() as f64)
                .collect();
            Ok((counts, graph.empirical_rate()))
        })
        .collect::<Result<_>>()?;
    let positions = p.l1() + p.gamma1() - 1;
    let n = graphs as f64;
    let mut mean = vec![0.0; positions];
    let mut sq = vec![0.0; positions];
    let (mut rate_sum, mut rate_sq) = (0.0, 0.0);
    for (counts, rate) in &per_graph {
        for (i, &c) in counts.iter().enumerate() {
            mean[i] += c;
            sq[i] += c * c;
        }
        rate_sum += rate;
        rate_sq += rate * rate;
    }
    let se = |sum: f64, sq: f64| {
        let mu = sum / n;
        let var = if graphs > 1 { (sq - n * mu * mu).max(0.0) / (n - 1.0) } else { 0.0 };
        (mu, (var / n).sqrt())
    };
    let mut stderr = vec![0.0; positions];
    for i in 0..positions {
        let (mu, s) = se(mean[i], sq[i]);
        mean[i] = mu;
        stderr[i] = s;
    }
    let (rate_mean, rate_stderr) = se(rate_sum, rate_sq);
    Ok(PurgeStats { graphs, seed, perspective, mean, stderr, rate_mean, rate_stderr })
}

/// Expected purged CNs per section at CN position `i` when every CN socket
/// picks its position offset uniformly: `M (d_l/d_r) ((gamma1 - 1 - i)/gamma1)^{d_r}`
/// at the chain start, mirrored at the end, zero in between.
pub fn expected_purged(p: &EnsembleParams, m: usize, position: usize) -> Result<f64> {
    let nc = p.checks_per_section(m)? as f64;
    let g1 = p.gamma1();
    let last = p.l1() + g1 - 2;
    let from_edge = if position < g1 {
        position
    } else if position + g1 > last {
        last - position
    } else {
        return Ok(0.0);
    };
    if from_edge + 1 >= g1 {
        return Ok(0.0);
    }
    Ok(nc * (((g1 - 1 - from_edge) as f64) / g1 as f64).powi(p.dr() as i32))
}

/// Largest instance the socket enumerator accepts, in ordered CN tuples.
const MAX_ENUMERATION: u128 = 50_000_000;

/// Ordered non-parallel socket assignments of the second VN's `c` edges
/// among `n` CNs with `d_r` sockets each, given that the first VN occupies
/// one socket on CNs `0..c`. Returns `(same neighbourhood, total)`.
fn count_socket_assignments(n: usize, c: usize, dr: usize) -> (u128, u128) {
    #[allow(clippy::too_many_arguments)]
    fn rec(n: usize, c: usize, dr: usize, used: &mut Vec<bool>, depth: usize, weight: u128, all_shared: bool, acc: &mut (u128, u128)) {
        if depth == c {
            acc.1 += weight;
            if all_shared {
                acc.0 += weight;
            }
            return;
        }
        for cn in 0..n {
            if used[cn] {
                continue;
            }
            let shared = cn < c;
            let free = if shared { dr - 1 } else { dr } as u128;
            used[cn] = true;
            rec(n, c, dr, used, depth + 1, weight * free, all_shared && shared, acc);
            used[cn] = false;
        }
    }
    let mut acc = (0, 0);
    rec(n, c, dr, &mut vec![false; n], 0, 1, true, &mut acc);
    acc
}

/// Exact same-section size-2 stopping-set probability by enumerating the
/// second VN's socket assignments for every in-segment / cross-segment split.
pub fn socket_oracle(p: &EnsembleParams, m: usize) -> Result<BigRational> {
    let nc = p.checks_per_section(m)?;
    let dl = p.dl();
    let own_pool = p.gamma1() * nc;
    let cross_pool = p.gamma1() * (p.gamma2() - 1) * nc;
    if own_pool > 4 * dl {
        return Err(Error::EnumerationTooLarge(format!(
            "gamma1 * M * d_l / d_r = {own_pool} exceeds 4 d_l = {}",
            4 * dl
        )));
    }
    if own_pool <= dl {
        return Err(Error::PreconditionViolated(format!("gamma1 * M * d_l / d_r = {own_pool} must exceed d_l = {dl}")));
    }
    let size = |n: usize, c: usize| (n as u128).saturating_pow(c as u32);
    let t = rational_from_decimal(p.density());
    let stay = BigRational::one() - t.clone();
    let mut total = BigRational::zero();
    for a in 0..=dl {
        let b = dl - a;
        let split = num_traits::pow(stay.clone(), 2 * a)
            * num_traits::pow(t.clone(), 2 * b)
            * BigRational::from_integer(num_traits::pow(binomial(dl as i64, a as i64), 2));
        if split.is_zero() {
            continue;
        }
        if b > cross_pool {
            return Err(Error::PreconditionViolated(format!("cross-segment pool {cross_pool} smaller than {b} edges")));
        }
        if size(own_pool, a).saturating_add(size(cross_pool, b)) > MAX_ENUMERATION {
            return Err(Error::EnumerationTooLarge(format!("split a = {a}, b = {b}")));
        }
        let (s0, n0) = count_socket_assignments(own_pool, a, p.dr());
        let (s1, n1) = count_socket_assignments(cross_pool, b, p.dr());
        let ratio = BigRational::new(BigInt::from(s0) * BigInt::from(s1), BigInt::from(n0) * BigInt::from(n1));
        total += split * ratio;
    }
    Ok(total)
}
