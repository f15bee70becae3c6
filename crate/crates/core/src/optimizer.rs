//! Exhaustive search for the window vector with the largest worst-case
//! threshold under a fixed complexity budget `s(W) = C`.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::de::{Bracket, DeCaps};
use crate::ensemble::EnsembleParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::window::{WindowSpec, WorstCase};

/// Compositions of `complexity` into `l2` parts within `[w_min, w_max]`,
/// with `W_0 >= 1` always enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchSpace {
    pub l2: usize,
    pub complexity: usize,
    pub w_min: usize,
    pub w_max: usize,
}

impl SearchSpace {
    pub fn new(l2: usize, complexity: usize, w_min: usize, w_max: usize) -> Self {
        SearchSpace { l2, complexity, w_min, w_max }
    }

    /// Default bounds `[0, C]`.
    pub fn unbounded(l2: usize, complexity: usize) -> Self {
        SearchSpace::new(l2, complexity, 0, complexity)
    }

    fn lower(&self, pos: usize) -> usize {
        if pos == 0 {
            self.w_min.max(1)
        } else {
            self.w_min
        }
    }

    fn check(&self) -> Result<()> {
        let min_total: usize = (0..self.l2).map(|r| self.lower(r)).sum();
        if self.l2 == 0 || self.w_max < self.lower(0) || min_total > self.complexity
            || self.l2 * self.w_max < self.complexity
        {
            return Err(Error::EmptySpace(format!(
                "no composition of {} into {} parts within [{}, {}] with W_0 >= 1",
                self.complexity, self.l2, self.w_min, self.w_max
            )));
        }
        Ok(())
    }
}

/// Lexicographic stream of the compositions in a [`SearchSpace`].
#[derive(Debug, Clone)]
pub struct Compositions {
    space: SearchSpace,
    current: Option<Vec<usize>>,
}

impl Compositions {
    /// Lexicographically smallest tail filling `parts[from..]` with `total`.
    fn fill_smallest(&self, parts: &mut [usize], from: usize, mut total: usize) -> bool {
        let n = parts.len();
        for (pos, slot) in parts.iter_mut().enumerate().skip(from) {
            let rest_max = (n - pos - 1) * self.space.w_max;
            let v = self.space.lower(pos).max(total.saturating_sub(rest_max));
            if v > self.space.w_max || v > total {
                return false;
            }
            *slot = v;
            total -= v;
        }
        total == 0
    }

    fn advance(&self, cur: &[usize]) -> Option<Vec<usize>> {
        let n = cur.len();
        let mut next = cur.to_vec();
        let mut suffix: usize = 0;
        for pos in (0..n).rev() {
            suffix += cur[pos];
            if pos == n - 1 || cur[pos] >= self.space.w_max || suffix == cur[pos] {
                continue;
            }
            // bump this entry by one and refill the tail with the smallest fit
            next[pos] = cur[pos] + 1;
            if self.fill_smallest(&mut next, pos + 1, suffix - cur[pos] - 1) {
                return Some(next);
            }
            next[pos] = cur[pos];
        }
        None
    }
}

impl Iterator for Compositions {
    type Item = WindowSpec;

    fn next(&mut self) -> Option<WindowSpec> {
        let cur = self.current.take()?;
        self.current = self.advance(&cur);
        Some(WindowSpec::new(cur).expect("W_0 >= 1 is enforced by the space"))
    }
}

/// Every admissible window vector, in lexicographic order.
pub fn enumerate(space: SearchSpace) -> Result<Compositions> {
    space.check()?;
    let mut it = Compositions { space, current: None };
    let mut first = vec![0; space.l2];
    if it.fill_smallest(&mut first, 0, space.complexity) {
        it.current = Some(first);
    }
    Ok(it)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeOptions {
    pub coarse_resolution: f64,
    /// Fraction of candidates re-evaluated at the fine resolution.
    pub refine_fraction: f64,
    pub caps: DeCaps,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { coarse_resolution: 1e-3, refine_fraction: 0.1, caps: DeCaps::default(), workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    #[serde(rename = "W")]
    pub spec: WindowSpec,
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
    /// Bracket width the threshold was resolved to.
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub space: SearchSpace,
    pub best: WindowSpec,
    pub best_threshold: f64,
    /// Sorted by threshold, descending; equal thresholds in lexicographic order.
    pub all: Vec<Candidate>,
    /// Specs whose threshold is within two fine resolutions of the best.
    pub ties: Vec<WindowSpec>,
    pub refined: usize,
}

impl SearchReport {
    /// CSV leaderboard `rank, W, complexity, threshold, lower, upper, resolution`.
    pub fn write_leaderboard<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rank", "W", "complexity", "threshold", "lower", "upper", "resolution"])?;
        for (rank, c) in self.all.iter().enumerate() {
            out.write_record([
                (rank + 1).to_string(),
                c.spec.to_string(),
                c.spec.complexity().to_string(),
                format!("{:.6}", c.threshold),
                format!("{:.6}", c.lower),
                format!("{:.6}", c.upper),
                format!("{:e}", c.resolution),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn threshold_of(&self, spec: &WindowSpec) -> Option<f64> {
        self.all.iter().find(|c| &c.spec == spec).map(|c| c.threshold)
    }
}

fn evaluate<S: Scalar>(
    spec: &WindowSpec,
    p: &EnsembleParams,
    delta: S,
    start: Option<Bracket<S>>,
    resolution: S,
    caps: DeCaps,
) -> Result<Bracket<S>> {
    let wrap = |e: Error| Error::Evaluation { spec: spec.sizes().to_vec(), source: Box::new(e) };
    let wc = WorstCase::new(spec, p, delta).map_err(wrap)?;
    let (lo, hi) = start.map_or((S::zero(), S::one()), |b| (b.lower, b.upper));
    let mut b = crate::de::bisect(lo, hi, resolution, |eps| wc.run(eps, caps).converged);
    if let Some(s) = start {
        b.probes += s.probes;
    }
    Ok(b)
}

fn candidate<S: Scalar>(spec: WindowSpec, b: Bracket<S>, resolution: S) -> Candidate {
    Candidate {
        spec,
        threshold: b.midpoint().as_f64(),
        lower: b.lower.as_f64(),
        upper: b.upper.as_f64(),
        resolution: resolution.as_f64(),
    }
}

fn by_threshold(a: &Candidate, b: &Candidate) -> Ordering {
    b.threshold.total_cmp(&a.threshold).then_with(|| a.spec.cmp(&b.spec))
}

/// Worst-case threshold of every candidate; coarse pass first, then the top
/// fraction (and anything the coarse brackets cannot rule out) at `resolution`.
pub fn optimize<S: Scalar>(
    space: SearchSpace,
    p: &EnsembleParams,
    delta: S,
    resolution: S,
    opts: OptimizeOptions,
) -> Result<SearchReport> {
    if space.l2 != p.l2() {
        return Err(Error::InvalidWindow(format!("search space L2 = {} but ensemble L2 = {}", space.l2, p.l2())));
    }
    let specs: Vec<WindowSpec> = enumerate(space)?.collect();
    let run = || optimize_specs(space, specs, p, delta, resolution, opts);
    match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::PreconditionViolated(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn optimize_specs<S: Scalar>(
    space: SearchSpace,
    specs: Vec<WindowSpec>,
    p: &EnsembleParams,
    delta: S,
    resolution: S,
    opts: OptimizeOptions,
) -> Result<SearchReport> {
    let coarse_res = S::of(opts.coarse_resolution).max(resolution);
    let coarse: Vec<(WindowSpec, Bracket<S>)> = specs
        .into_par_iter()
        .map(|spec| evaluate(&spec, p, delta, None, coarse_res, opts.caps).map(|b| (spec, b)))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..coarse.len()).collect();
    order.sort_by(|&a, &b| {
        coarse[b].1.midpoint().as_f64()
            .total_cmp(&coarse[a].1.midpoint().as_f64())
            .then_with(|| coarse[a].0.cmp(&coarse[b].0))
    });
    let best_lower = coarse.iter().map(|(_, b)| b.lower).fold(S::zero(), |m, v| m.max(v));
    let top = ((coarse.len() as f64 * opts.refine_fraction).ceil() as usize).max(1);
    let mut refine = vec![false; coarse.len()];
    for (rank, &idx) in order.iter().enumerate() {
        // anything whose coarse bracket could still hold the maximum is refined too
        refine[idx] = rank < top || coarse[idx].1.upper >= best_lower;
    }

    let all: Vec<Candidate> = coarse
        .into_par_iter()
        .zip(refine.into_par_iter())
        .map(|((spec, b), fine)| {
            if fine && resolution < coarse_res {
                let fb = evaluate(&spec, p, delta, Some(b), resolution, opts.caps)?;
                Ok(candidate(spec, fb, resolution))
            } else {
                Ok(candidate(spec, b, coarse_res))
            }
        })
        .collect::<Result<_>>()?;
    let refined = all.iter().filter(|c| c.resolution <= resolution.as_f64()).count();

    let mut all = all;
    all.sort_by(by_threshold);
    let top_threshold = all[0].threshold;
    let tie_gap = 2.0 * resolution.as_f64();
    let mut ties: Vec<WindowSpec> = all
        .iter()
        .filter(|c| top_threshold - c.threshold <= tie_gap)
        .map(|c| c.spec.clone())
        .collect();
    ties.sort();
    let best = ties[0].clone();
    let best_threshold = all.iter().find(|c| c.spec == best).map(|c| c.threshold).unwrap_or(top_threshold);
    Ok(SearchReport { space, best, best_threshold, all, ties, refined })
}
