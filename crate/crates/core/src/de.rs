//! Density evolution for the BEC under a flooding schedule.
//!
//! One iteration computes every CN-to-VN erasure probability
//!
//! ```text
//! y(i,j) = 1 - (1 - w0 sum_k x(i-k, j) - w1 sum_k sum_r x(i-k, j-r))^(d_r - 1)
//! ```
//!
//! from the previous constellation and then every active VN value
//!
//! ```text
//! x(i,j) = eps (w0 sum_k y(i+k, j) + w1 sum_k sum_r y(i+k, j+r))^(d_l - 1)
//! ```
//!
//! with `w0 = (1 - T) / gamma1`, `w1 = T / (gamma1 (gamma2 - 1))`,
//! `k in [gamma1]`, `r in 1..gamma2` and segment offsets taken modulo `L2`.
//! Sections outside the stored grid read as 0 (known bits).

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::ensemble::{EnsembleParams, SectionIndex};
use crate::error::Result;
use crate::scalar::Scalar;

/// Default target erasure probability.
pub const DEFAULT_DELTA: f64 = 1e-12;

/// Grid of VN erasure probabilities over positions `[i_min, i_max]` and all
/// segments, with a per-section frozen mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<S> {
    i_min: i64,
    positions: usize,
    segments: usize,
    // One trailing slot holds the constant 0 read for out-of-grid sections.
    values: Vec<S>,
    frozen: Vec<bool>,
    pub epsilon: S,
    pub delta: S,
}

impl<S: Scalar> Constellation<S> {
    /// A grid filled with `fill`, nothing frozen.
    pub fn new(i_min: i64, positions: usize, segments: usize, fill: S, epsilon: S, delta: S) -> Self {
        assert!(segments > 0, "need at least one segment");
        let n = positions * segments;
        let mut values = vec![fill; n + 1];
        values[n] = S::zero();
        Constellation {
            i_min,
            positions,
            segments,
            values,
            frozen: vec![false; n],
            epsilon,
            delta,
        }
    }

    /// The full-code start: 1 on `[L1] x [L2]`, 0 everywhere else.
    pub fn full_code(p: &EnsembleParams, epsilon: S, delta: S) -> Self {
        Constellation::new(0, p.l1(), p.l2(), S::one(), epsilon, delta)
    }

    pub fn i_min(&self) -> i64 {
        self.i_min
    }

    pub fn i_max(&self) -> i64 {
        self.i_min + self.positions as i64 - 1
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.positions * self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `s`, or `None` when the position lies off the grid.
    pub fn index_of(&self, s: SectionIndex) -> Option<usize> {
        let off = s.i - self.i_min;
        if off < 0 || off as usize >= self.positions {
            return None;
        }
        Some(off as usize * self.segments + s.j % self.segments)
    }

    pub fn section_at(&self, idx: usize) -> SectionIndex {
        SectionIndex::new(self.i_min + (idx / self.segments) as i64, idx % self.segments)
    }

    /// Stored value, or 0 off the grid.
    pub fn get(&self, s: SectionIndex) -> S {
        match self.index_of(s) {
            Some(idx) => self.values[idx],
            None => S::zero(),
        }
    }

    /// Overwrite a section. Panics off the grid.
    pub fn set(&mut self, s: SectionIndex, v: S) {
        let idx = self.index_of(s).expect("section outside the constellation grid");
        self.values[idx] = v;
    }

    pub fn is_frozen(&self, s: SectionIndex) -> bool {
        self.index_of(s).is_none_or(|idx| self.frozen[idx])
    }

    pub fn freeze(&mut self, s: SectionIndex, v: S) {
        let idx = self.index_of(s).expect("section outside the constellation grid");
        self.values[idx] = v;
        self.frozen[idx] = true;
    }

    pub fn unfreeze(&mut self, s: SectionIndex) {
        let idx = self.index_of(s).expect("section outside the constellation grid");
        self.frozen[idx] = false;
    }

    /// Values in flat order (position-major).
    pub fn values(&self) -> &[S] {
        &self.values[..self.len()]
    }

    pub fn sections(&self) -> impl Iterator<Item = SectionIndex> + '_ {
        (0..self.len()).map(move |idx| self.section_at(idx))
    }

    /// Every non-frozen section of the grid.
    pub fn unfrozen_sections(&self) -> Vec<SectionIndex> {
        (0..self.len())
            .filter(|&idx| !self.frozen[idx])
            .map(|idx| self.section_at(idx))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Constellation<S>) -> S {
        self.values()
            .iter()
            .zip(other.values())
            .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// CSV dump with columns `i, j, x`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "j", "x"])?;
        for (idx, v) in self.values().iter().enumerate() {
            let s = self.section_at(idx);
            out.write_record([s.i.to_string(), s.j.to_string(), format!("{v:e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// CN-to-VN erasure probabilities over positions `[i_min, i_max + gamma1 - 1]`.
#[derive(Debug, Clone)]
pub struct CheckMessages<S> {
    i_min: i64,
    positions: usize,
    segments: usize,
    values: Vec<S>,
}

impl<S: Scalar> CheckMessages<S> {
    /// Computes every CN message that any VN of `c` can read.
    pub fn compute(c: &Constellation<S>, p: &EnsembleParams) -> Self {
        let positions = c.positions + p.gamma1() - 1;
        let mut values = Vec::with_capacity(positions * c.segments);
        for pos in 0..positions {
            for j in 0..c.segments {
                let at = SectionIndex::new(c.i_min + pos as i64, j);
                values.push(cn_update(c, p, at));
            }
        }
        CheckMessages { i_min: c.i_min, positions, segments: c.segments, values }
    }

    pub fn get(&self, s: SectionIndex) -> S {
        let off = s.i - self.i_min;
        if off < 0 || off as usize >= self.positions {
            return S::zero();
        }
        self.values[off as usize * self.segments + s.j % self.segments]
    }
}

#[inline]
fn check_from_average<S: Scalar>(avg: S, dr: usize) -> S {
    let avg = avg.max(S::zero()).min(S::one());
    S::one() - (S::one() - avg).powi(dr as i32 - 1)
}

#[inline]
fn variable_from_average<S: Scalar>(avg: S, epsilon: S, dl: usize) -> S {
    let avg = avg.max(S::zero()).min(S::one());
    epsilon * avg.powi(dl as i32 - 1)
}

/// CN message of section `at` from the constellation `c`.
pub fn cn_update<S: Scalar>(c: &Constellation<S>, p: &EnsembleParams, at: SectionIndex) -> S {
    let (w0, w1) = p.weights::<S>();
    let l2 = p.l2();
    let mut own = S::zero();
    let mut cross = S::zero();
    for k in 0..p.gamma1() as i64 {
        own = own + c.get(at.offset(-k, 0, l2));
        for r in 1..p.gamma2() as i64 {
            cross = cross + c.get(at.offset(-k, -r, l2));
        }
    }
    check_from_average(w0 * own + w1 * cross, p.dr())
}

/// VN value of section `at` from CN messages `y`.
pub fn vn_update<S: Scalar>(
    y: &CheckMessages<S>,
    p: &EnsembleParams,
    at: SectionIndex,
    epsilon: S,
) -> S {
    let (w0, w1) = p.weights::<S>();
    let l2 = p.l2();
    let mut own = S::zero();
    let mut cross = S::zero();
    for k in 0..p.gamma1() as i64 {
        own = own + y.get(at.offset(k, 0, l2));
        for r in 1..p.gamma2() as i64 {
            cross = cross + y.get(at.offset(k, r, l2));
        }
    }
    variable_from_average(w0 * own + w1 * cross, epsilon, p.dl())
}

/// One flooding round over `active`, returning a new constellation.
///
/// Frozen sections and sections not listed in `active` keep their values.
pub fn de_step<S: Scalar>(
    c: &Constellation<S>,
    p: &EnsembleParams,
    active: &[SectionIndex],
) -> Constellation<S> {
    let y = CheckMessages::compute(c, p);
    let mut next = c.clone();
    for &s in active {
        if let Some(idx) = c.index_of(s) {
            if !c.frozen[idx] {
                next.values[idx] = vn_update(&y, p, s, c.epsilon);
            }
        }
    }
    next
}

/// Per-step movement of the active sections.
#[derive(Debug, Clone, Copy)]
pub struct StepStats<S> {
    pub max_change: S,
    /// Largest `|new - old| / max(new, old)` over active sections.
    pub max_relative_change: S,
}

/// Precomputed update plan for repeated steps over a fixed active set.
///
/// Equivalent to [`de_step`] but allocation-free per iteration; reads of
/// off-grid sections go to the constellation's trailing zero slot.
#[derive(Debug, Clone)]
pub struct DeStepper<S> {
    w0: S,
    w1: S,
    dl: usize,
    dr: usize,
    own_stride: usize,
    cross_stride: usize,
    // per CN: x indices read with weight w0, then with weight w1
    cn_own: Vec<u32>,
    cn_cross: Vec<u32>,
    // per active VN: its flat index and the CN slots it reads
    vn_index: Vec<u32>,
    vn_own: Vec<u32>,
    vn_cross: Vec<u32>,
    y: Vec<S>,
}

impl<S: Scalar> DeStepper<S> {
    pub fn new(c: &Constellation<S>, p: &EnsembleParams, active: &[SectionIndex]) -> Self {
        let (w0, w1) = p.weights::<S>();
        let g1 = p.gamma1() as i64;
        let l2 = p.l2();
        let cross_offsets: Vec<i64> = if w1 > S::zero() {
            (1..p.gamma2() as i64).collect()
        } else {
            Vec::new()
        };
        let zero_slot = c.len() as u32;
        let x_slot = |s: SectionIndex| c.index_of(s).map_or(zero_slot, |idx| idx as u32);

        let mut vn_index = Vec::new();
        let mut seen = vec![false; c.len()];
        for &s in active {
            if let Some(idx) = c.index_of(s) {
                if !c.frozen[idx] && !seen[idx] {
                    seen[idx] = true;
                    vn_index.push(idx as u32);
                }
            }
        }
        vn_index.sort_unstable();

        let mut cn_slots: HashMap<SectionIndex, u32> = HashMap::new();
        let mut cn_sections = Vec::new();
        let mut slot_of = |s: SectionIndex, cn_sections: &mut Vec<SectionIndex>| -> u32 {
            *cn_slots.entry(s).or_insert_with(|| {
                cn_sections.push(s);
                (cn_sections.len() - 1) as u32
            })
        };
        let mut vn_own = Vec::with_capacity(vn_index.len() * g1 as usize);
        let mut vn_cross = Vec::with_capacity(vn_index.len() * g1 as usize * cross_offsets.len());
        for &idx in &vn_index {
            let s = c.section_at(idx as usize);
            for k in 0..g1 {
                vn_own.push(slot_of(s.offset(k, 0, l2), &mut cn_sections));
                for &r in &cross_offsets {
                    vn_cross.push(slot_of(s.offset(k, r, l2), &mut cn_sections));
                }
            }
        }

        let mut cn_own = Vec::with_capacity(cn_sections.len() * g1 as usize);
        let mut cn_cross = Vec::with_capacity(cn_sections.len() * g1 as usize * cross_offsets.len());
        for &s in &cn_sections {
            for k in 0..g1 {
                cn_own.push(x_slot(s.offset(-k, 0, l2)));
                for &r in &cross_offsets {
                    cn_cross.push(x_slot(s.offset(-k, -r, l2)));
                }
            }
        }

        DeStepper {
            w0,
            w1,
            dl: p.dl(),
            dr: p.dr(),
            own_stride: g1 as usize,
            cross_stride: g1 as usize * cross_offsets.len(),
            cn_own,
            cn_cross,
            vn_index,
            vn_own,
            vn_cross,
            y: vec![S::zero(); cn_sections.len()],
        }
    }

    /// Number of VN sections updated per step.
    pub fn active_len(&self) -> usize {
        self.vn_index.len()
    }

    /// One flooding round applied in place.
    pub fn step(&mut self, c: &mut Constellation<S>) -> StepStats<S> {
        let x = &mut c.values;
        let (w0, w1) = (self.w0, self.w1);
        for (n, y) in self.y.iter_mut().enumerate() {
            let mut own = S::zero();
            for &idx in &self.cn_own[n * self.own_stride..(n + 1) * self.own_stride] {
                own = own + x[idx as usize];
            }
            let mut cross = S::zero();
            for &idx in &self.cn_cross[n * self.cross_stride..(n + 1) * self.cross_stride] {
                cross = cross + x[idx as usize];
            }
            *y = check_from_average(w0 * own + w1 * cross, self.dr);
        }

        let mut max_change = S::zero();
        let mut max_rel = S::zero();
        for (n, &idx) in self.vn_index.iter().enumerate() {
            let mut own = S::zero();
            for &slot in &self.vn_own[n * self.own_stride..(n + 1) * self.own_stride] {
                own = own + self.y[slot as usize];
            }
            let mut cross = S::zero();
            for &slot in &self.vn_cross[n * self.cross_stride..(n + 1) * self.cross_stride] {
                cross = cross + self.y[slot as usize];
            }
            let new = variable_from_average(w0 * own + w1 * cross, c.epsilon, self.dl);
            let old = x[idx as usize];
            let change = (new - old).abs();
            if change > max_change {
                max_change = change;
            }
            let scale = new.max(old);
            if scale > S::zero() {
                let rel = change / scale;
                if rel > max_rel {
                    max_rel = rel;
                }
            }
            x[idx as usize] = new;
        }
        StepStats { max_change, max_relative_change: max_rel }
    }
}

/// Stopping limits for [`run_de`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeCaps {
    pub max_iterations: usize,
    /// A step whose per-section relative change stays below this is a fixed point.
    pub tol_fp: f64,
}

impl Default for DeCaps {
    fn default() -> Self {
        DeCaps { max_iterations: 200_000, tol_fp: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct DeOutcome<S> {
    pub converged: bool,
    pub iterations: usize,
    pub final_state: Constellation<S>,
    /// Stopped without success, at a fixed point or at the iteration cap.
    pub stall: bool,
    /// The stall was the iteration cap rather than a detected fixed point.
    pub capped: bool,
}

/// Iterate flooding rounds over `active` until `success` holds or DE stalls.
pub fn run_de<S, F>(
    c: Constellation<S>,
    p: &EnsembleParams,
    active: &[SectionIndex],
    success: F,
    caps: DeCaps,
) -> DeOutcome<S>
where
    S: Scalar,
    F: Fn(&Constellation<S>) -> bool,
{
    let mut stepper = DeStepper::new(&c, p, active);
    run_with_stepper(c, &mut stepper, success, caps)
}

pub(crate) fn run_with_stepper<S, F>(
    mut c: Constellation<S>,
    stepper: &mut DeStepper<S>,
    success: F,
    caps: DeCaps,
) -> DeOutcome<S>
where
    S: Scalar,
    F: Fn(&Constellation<S>) -> bool,
{
    let tol = S::of(caps.tol_fp);
    let mut iterations = 0;
    while iterations < caps.max_iterations {
        let stats = stepper.step(&mut c);
        iterations += 1;
        if success(&c) {
            return DeOutcome { converged: true, iterations, final_state: c, stall: false, capped: false };
        }
        if stats.max_relative_change < tol {
            return DeOutcome { converged: false, iterations, final_state: c, stall: true, capped: false };
        }
    }
    DeOutcome { converged: false, iterations, final_state: c, stall: true, capped: true }
}

/// Final bisection bracket of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket<S> {
    /// Largest probe known to succeed.
    pub lower: S,
    /// Smallest probe known to fail.
    pub upper: S,
    pub probes: usize,
}

impl<S: Scalar> Bracket<S> {
    pub fn midpoint(&self) -> S {
        (self.lower + self.upper) / S::of(2.0)
    }

    pub fn width(&self) -> S {
        self.upper - self.lower
    }
}

/// Bisection on `[lower, upper]` for the boundary of a monotone predicate.
///
/// `succeeds` is assumed true at `lower` and false at `upper`; neither end is
/// probed.
pub fn bisect<S: Scalar>(
    lower: S,
    upper: S,
    resolution: S,
    mut succeeds: impl FnMut(S) -> bool,
) -> Bracket<S> {
    assert!(resolution > S::zero(), "bisection resolution must be positive");
    let mut b = Bracket { lower, upper, probes: 0 };
    while b.width() > resolution {
        let mid = b.midpoint();
        b.probes += 1;
        if succeeds(mid) {
            b.lower = mid;
        } else {
            b.upper = mid;
        }
    }
    b
}

/// `true` once every in-range section is at most `delta`.
pub fn all_below<S: Scalar>(c: &Constellation<S>, delta: S) -> bool {
    c.values().iter().all(|&v| v <= delta)
}

/// Whether full-code BP decodes every section to `delta` at `epsilon`.
pub fn full_code_decodes<S: Scalar>(p: &EnsembleParams, epsilon: S, delta: S, caps: DeCaps) -> DeOutcome<S> {
    let c = Constellation::full_code(p, epsilon, delta);
    let active = c.unfrozen_sections();
    run_de(c, p, &active, |c| all_below(c, delta), caps)
}

/// Full-code BP threshold by bisection over `[0, 1]`.
pub fn bp_threshold<S: Scalar>(p: &EnsembleParams, delta: S, resolution: S, caps: DeCaps) -> Bracket<S> {
    let c0 = Constellation::full_code(p, S::one(), delta);
    let active = c0.unfrozen_sections();
    let stepper = DeStepper::new(&c0, p, &active);
    bisect(S::zero(), S::one(), resolution, |eps| {
        let mut c = c0.clone();
        c.epsilon = eps;
        run_with_stepper(c, &mut stepper.clone(), |c| all_below(c, delta), caps).converged
    })
}

/// Segment-free 1D recursion for `C(d_l, d_r, L1, gamma1)`.
///
/// Returns the VN values after each of `iterations` rounds, index 0 being the
/// all-ones start. Positions outside `[0, L1)` read as 0.
pub fn de_1d_reference<S: Scalar>(
    dl: usize,
    dr: usize,
    l1: usize,
    gamma1: usize,
    epsilon: S,
    iterations: usize,
) -> Vec<Vec<S>> {
    let g = gamma1 as i64;
    let inv = S::one() / S::of(gamma1 as f64);
    let read = |v: &[S], i: i64| if i >= 0 && (i as usize) < v.len() { v[i as usize] } else { S::zero() };
    let mut x = vec![S::one(); l1];
    let mut out = Vec::with_capacity(iterations + 1);
    out.push(x.clone());
    for _ in 0..iterations {
        // CN positions 0 ..= L1 + gamma1 - 2
        let y: Vec<S> = (0..(l1 as i64 + g - 1))
            .map(|i| {
                let sum = (0..g).fold(S::zero(), |acc, k| acc + read(&x, i - k));
                check_from_average(inv * sum, dr)
            })
            .collect();
        x = (0..l1 as i64)
            .map(|i| {
                let sum = (0..g).fold(S::zero(), |acc, k| acc + read(&y, i + k));
                variable_from_average(inv * sum, epsilon, dl)
            })
            .collect();
        out.push(x.clone());
    }
    out
}

/// Largest per-iteration gap between the multi-segment DE and the 1D
/// recursion, over all positions, segments and the first `iterations` rounds.
pub fn segment_equivalence_gap<S: Scalar>(p: &EnsembleParams, epsilon: S, iterations: usize) -> S {
    let reference = de_1d_reference(p.dl(), p.dr(), p.l1(), p.gamma1(), epsilon, iterations);
    let mut c = Constellation::full_code(p, epsilon, S::of(DEFAULT_DELTA));
    let active = c.unfrozen_sections();
    let mut stepper = DeStepper::new(&c, p, &active);
    let mut gap = S::zero();
    for row in reference.iter().skip(1) {
        stepper.step(&mut c);
        for (idx, v) in c.values().iter().enumerate() {
            let pos = c.section_at(idx).i as usize;
            gap = gap.max((*v - row[pos]).abs());
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn md() -> EnsembleParams {
        EnsembleParams::new(4, 8, 6, 2, 3, 2, 0.1).unwrap()
    }

    #[test]
    fn cn_update_trivial_cases() {
        let p = EnsembleParams::new(4, 8, 6, 2, 4, 3, 0.3).unwrap();
        let zeros = Constellation::<f64>::new(-3, 12, 4, 0.0, 0.5, 1e-12);
        let ones = Constellation::<f64>::new(-3, 12, 4, 1.0, 0.5, 1e-12);
        let c = 0.37;
        let uniform = Constellation::<f64>::new(-3, 12, 4, c, 0.5, 1e-12);
        let at = SectionIndex::new(2, 1);
        assert_eq!(cn_update(&zeros, &p, at), 0.0);
        assert!((cn_update(&ones, &p, at) - 1.0).abs() < 1e-15);
        let expected = 1.0 - (1.0 - c).powi(7);
        assert!((cn_update(&uniform, &p, at) - expected).abs() < 1e-14);
    }

    #[test]
    fn vn_update_trivial_cases() {
        let p = EnsembleParams::new(4, 8, 6, 2, 4, 3, 0.3).unwrap();
        let at = SectionIndex::new(2, 1);
        let ones = Constellation::<f64>::new(-3, 12, 4, 1.0, 0.5, 1e-12);
        let y = CheckMessages::compute(&ones, &p);
        assert!((vn_update(&y, &p, at, 0.42) - 0.42).abs() < 1e-14);
        assert_eq!(vn_update(&y, &p, at, 0.0), 0.0);

        let uniform = Constellation::<f64>::new(-3, 12, 4, 0.2, 0.5, 1e-12);
        let y = CheckMessages::compute(&uniform, &p);
        let yc = 1.0 - 0.8f64.powi(7);
        assert!((vn_update(&y, &p, at, 0.42) - 0.42 * yc.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn empty_active_set_is_identity() {
        let p = md();
        let c = Constellation::<f64>::full_code(&p, 0.4, 1e-12);
        assert_eq!(de_step(&c, &p, &[]), c);
    }

    #[test]
    fn stepper_matches_reference_step() {
        let p = EnsembleParams::new(4, 8, 6, 2, 5, 3, 0.2).unwrap();
        let mut c = Constellation::<f64>::full_code(&p, 0.47, 1e-12);
        let active = c.unfrozen_sections();
        let mut stepper = DeStepper::new(&c, &p, &active);
        let mut slow = c.clone();
        for _ in 0..25 {
            stepper.step(&mut c);
            slow = de_step(&slow, &p, &active);
            assert!(c.max_abs_diff(&slow) < 1e-15);
        }
    }

    #[test]
    fn frozen_sections_are_bit_exact() {
        let p = md();
        let mut c = Constellation::<f64>::full_code(&p, 0.45, 1e-12);
        let pinned = SectionIndex::new(2, 1);
        c.freeze(pinned, 0.123_456_789);
        let active: Vec<_> = c.sections().collect();
        let out = run_de(c, &p, &active, |_| false, DeCaps { max_iterations: 50, tol_fp: 0.0 });
        assert_eq!(out.final_state.get(pinned), 0.123_456_789);
    }

    #[test]
    fn zero_erasure_converges_in_one_step() {
        let p = md();
        let out = full_code_decodes::<f64>(&p, 0.0, 1e-12, DeCaps::default());
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!(out.final_state.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn far_above_threshold_stalls() {
        let p = EnsembleParams::new(4, 8, 30, 2, 3, 2, 0.1).unwrap();
        let out = full_code_decodes::<f64>(&p, 0.9, 1e-12, DeCaps::default());
        assert!(out.stall && !out.converged && !out.capped);
        assert!(out.final_state.values().iter().all(|&v| v > 0.1));
    }

    #[test]
    fn segment_uniformity_is_preserved() {
        let p = EnsembleParams::new(4, 8, 10, 2, 5, 3, 0.1).unwrap();
        let mut c = Constellation::<f64>::full_code(&p, 0.47, 1e-12);
        let active = c.unfrozen_sections();
        let mut stepper = DeStepper::new(&c, &p, &active);
        for _ in 0..40 {
            stepper.step(&mut c);
            for i in 0..10 {
                let first = c.get(SectionIndex::new(i, 0));
                for j in 1..5 {
                    assert!((c.get(SectionIndex::new(i, j)) - first).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn one_dimensional_reference_basics() {
        let zero = de_1d_reference::<f64>(4, 8, 10, 2, 0.0, 3);
        assert!(zero[1].iter().all(|&v| v == 0.0));
        // regular d_l = d_r: values never exceed epsilon
        let eps = 0.6;
        for row in de_1d_reference::<f64>(3, 3, 12, 3, eps, 50).iter().skip(1) {
            assert!(row.iter().all(|&v| v <= eps));
        }
    }

    #[test]
    fn bisect_finds_boundary() {
        let b = bisect(0.0f64, 1.0, 1e-6, |x| x <= 0.3141);
        assert!(b.lower <= 0.3141 && b.upper > 0.3141);
        assert!(b.width() <= 1e-6);
        assert_eq!(b.probes, 20);
    }

    #[test]
    fn single_precision_runs() {
        let p = md();
        let out = full_code_decodes::<f32>(&p, 0.3, 1e-12, DeCaps::default());
        assert!(out.converged);
    }

    #[test]
    fn csv_dump_has_one_row_per_section() {
        let p = md();
        let c = Constellation::<f64>::full_code(&p, 0.4, 1e-12);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 6 * 3);
        assert!(text.starts_with("i,j,x\n"));
    }

    fn small_params() -> impl Strategy<Value = EnsembleParams> {
        (2usize..5, 2usize..8, 1usize..4, 1usize..5, 0.0f64..1.0)
            .prop_flat_map(|(dl, dr, g1, l2, t)| {
                (Just((dl, dr, g1, l2, t)), 1usize..=l2)
            })
            .prop_map(|((dl, dr, g1, l2, t), g2)| {
                let t = if g2 == 1 { 0.0 } else { t };
                EnsembleParams::new(dl, dr, g1 + 3, g1, l2, g2, t).unwrap()
            })
    }

    fn random_grid(p: &EnsembleParams, seed: &[f64]) -> Constellation<f64> {
        let mut c = Constellation::full_code(p, 0.5, 1e-12);
        let sections: Vec<_> = c.sections().collect();
        for (n, s) in sections.into_iter().enumerate() {
            c.set(s, seed[n % seed.len()]);
        }
        c
    }

    proptest! {
        #[test]
        fn updates_stay_in_unit_interval(
            p in small_params(),
            vals in prop::collection::vec(0.0f64..=1.0, 1..40),
            eps in 0.0f64..=1.0,
        ) {
            let mut c = random_grid(&p, &vals);
            c.epsilon = eps;
            let active: Vec<_> = c.sections().collect();
            let next = de_step(&c, &p, &active);
            for &v in next.values() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn step_is_monotone(
            p in small_params(),
            vals in prop::collection::vec(0.0f64..=1.0, 1..40),
            bumps in prop::collection::vec(0.0f64..=0.5, 1..40),
            eps in 0.0f64..=1.0,
        ) {
            let mut lo = random_grid(&p, &vals);
            lo.epsilon = eps;
            let mut hi = lo.clone();
            let sections: Vec<_> = hi.sections().collect();
            for (n, &s) in sections.iter().enumerate() {
                let v = (lo.get(s) + bumps[n % bumps.len()]).min(1.0);
                hi.set(s, v);
            }
            let a = de_step(&lo, &p, &sections);
            let b = de_step(&hi, &p, &sections);
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!(*x <= *y + 1e-15);
            }
        }

        #[test]
        fn descent_from_all_ones(p in small_params(), eps in 0.0f64..1.0) {
            let mut c = Constellation::<f64>::full_code(&p, eps, 1e-12);
            let active = c.unfrozen_sections();
            let mut stepper = DeStepper::new(&c, &p, &active);
            let mut prev = c.values().to_vec();
            for _ in 0..30 {
                stepper.step(&mut c);
                for (now, before) in c.values().iter().zip(&prev) {
                    prop_assert!(*now <= *before + 1e-15);
                }
                prev = c.values().to_vec();
            }
        }
    }
}
