//! Non-uniform windowed decoding.
//!
//! A window configuration (WC) targets one section `(i_t, j_t)` and runs DE
//! over `W_r` consecutive positions of segment `(j_t + r) mod L2`, starting at
//! position `i_t`. After the target reaches the erasure target only its own
//! value is written back to the global constellation.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::de::{bisect, run_with_stepper, Bracket, Constellation, DeCaps, DeStepper};
use crate::ensemble::{EnsembleParams, SectionIndex};
use crate::error::{Error, FailureReason, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_WINDOW_ITERS: usize = 10_000;

/// Window sizes `[W_0, ..., W_{L2-1}]`, indexed relative to the targeted segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct WindowSpec {
    sizes: Vec<usize>,
}

impl WindowSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        match sizes.first() {
            None => Err(Error::InvalidWindow("empty window vector".into())),
            Some(0) => Err(Error::InvalidWindow("W_0 must be at least 1".into())),
            Some(_) => Ok(WindowSpec { sizes }),
        }
    }

    pub fn uniform(l2: usize, w: usize) -> Result<Self> {
        WindowSpec::new(vec![w; l2])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Window complexity `s(W)`.
    pub fn complexity(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn is_uniform(&self) -> bool {
        self.sizes.windows(2).all(|w| w[0] == w[1])
    }

    /// Element-wise `self <= other`.
    pub fn dominated_by(&self, other: &WindowSpec) -> bool {
        self.len() == other.len() && self.sizes.iter().zip(&other.sizes).all(|(a, b)| a <= b)
    }

    fn check_against(&self, p: &EnsembleParams) -> Result<()> {
        if self.len() != p.l2() {
            return Err(Error::InvalidWindow(format!(
                "window has {} entries but L2 = {}",
                self.len(),
                p.l2()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for WindowSpec {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        WindowSpec::new(v)
    }
}

impl From<WindowSpec> for Vec<usize> {
    fn from(w: WindowSpec) -> Self {
        w.sizes
    }
}

impl FromStr for WindowSpec {
    type Err = Error;

    /// Parses a comma-separated list such as `5,5,4,2,3,4,5`.
    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad window entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        WindowSpec::new(sizes)
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The section set `S^W` of one WC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowConfiguration {
    pub spec: WindowSpec,
    pub tvn: SectionIndex,
    pub sections: Vec<SectionIndex>,
}

impl WindowConfiguration {
    pub fn new(spec: &WindowSpec, tvn: SectionIndex) -> Self {
        let l2 = spec.len();
        let mut sections = Vec::with_capacity(spec.complexity());
        for (r, &w) in spec.sizes().iter().enumerate() {
            for k in 0..w as i64 {
                sections.push(tvn.offset(k, r as i64, l2));
            }
        }
        WindowConfiguration { spec: spec.clone(), tvn, sections }
    }

    pub fn contains(&self, s: SectionIndex) -> bool {
        self.sections.contains(&s)
    }
}

/// Segment processing order within each position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProcessingOrder {
    /// `0, 1, ..., L2 - 1`
    Natural,
    /// `L2 - 1, ..., 0`
    Reverse,
    /// A permutation drawn from ChaCha8 seeded with `seed`.
    Random { seed: u64 },
    Custom { permutation: Vec<usize> },
}

impl ProcessingOrder {
    pub fn permutation(&self, l2: usize) -> Result<Vec<usize>> {
        let perm = match self {
            ProcessingOrder::Natural => (0..l2).collect(),
            ProcessingOrder::Reverse => (0..l2).rev().collect(),
            ProcessingOrder::Random { seed } => {
                let mut perm: Vec<usize> = (0..l2).collect();
                perm.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                perm
            }
            ProcessingOrder::Custom { permutation } => permutation.clone(),
        };
        let mut seen = vec![false; l2];
        if perm.len() != l2 || !perm.iter().all(|&j| j < l2 && !std::mem::replace(&mut seen[j], true)) {
            return Err(Error::InvalidSchedule(format!("{perm:?} is not a permutation of 0..{l2}")));
        }
        Ok(perm)
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ProcessingOrder::Random { seed } => Some(*seed),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessingOrder::Natural => "natural",
            ProcessingOrder::Reverse => "reverse",
            ProcessingOrder::Random { .. } => "random",
            ProcessingOrder::Custom { .. } => "custom",
        }
    }
}

/// Position-major TVN list `(0, s(0)), ..., (0, s(L2-1)), (1, s(0)), ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeSchedule {
    pub order: ProcessingOrder,
    pub permutation: Vec<usize>,
    pub schedule: Vec<SectionIndex>,
}

impl DecodeSchedule {
    pub fn new(p: &EnsembleParams, order: ProcessingOrder) -> Result<Self> {
        let permutation = order.permutation(p.l2())?;
        let schedule = (0..p.l1() as i64)
            .flat_map(|i| permutation.iter().map(move |&j| SectionIndex::new(i, j)))
            .collect();
        Ok(DecodeSchedule { order, permutation, schedule })
    }

    pub fn natural(p: &EnsembleParams) -> Self {
        DecodeSchedule::new(p, ProcessingOrder::Natural).expect("natural order is a permutation")
    }
}

/// Iterations used by one processed WC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowIterations {
    pub t: usize,
    pub i: i64,
    pub j: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationProfile {
    pub epsilon: f64,
    pub delta: f64,
    pub window: WindowSpec,
    pub order: ProcessingOrder,
    pub seed: Option<u64>,
    pub max_window_iters: usize,
    pub per_wc: Vec<WindowIterations>,
}

impl IterationProfile {
    /// Mean of the per-WC iteration counts.
    pub fn average(&self) -> f64 {
        if self.per_wc.is_empty() {
            return 0.0;
        }
        self.per_wc.iter().map(|w| w.iterations as f64).sum::<f64>() / self.per_wc.len() as f64
    }

    pub fn header_json(&self) -> serde_json::Value {
        serde_json::json!({
            "epsilon": self.epsilon,
            "delta": self.delta,
            "W": self.window,
            "order": self.order.name(),
            "seed": self.seed,
            "max_window_iters": self.max_window_iters,
            "windows": self.per_wc.len(),
            "average": self.average(),
        })
    }

    /// CSV with a leading `# {json}` header record, then `t,i,j,iterations`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {}", self.header_json())?;
        let mut out = csv::Writer::from_writer(w);
        if self.per_wc.is_empty() {
            out.write_record(["t", "i", "j", "iterations"])?;
        }
        for e in &self.per_wc {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads what [`IterationProfile::write_csv`] produced.
    pub fn read_csv<R: BufRead>(mut r: R) -> Result<(serde_json::Value, Vec<WindowIterations>)> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let header = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse("missing '# ' JSON header line".into()))?;
        let header: serde_json::Value = serde_json::from_str(header.trim())?;
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            rows.push(rec?);
        }
        Ok((header, rows))
    }
}

/// Knobs for per-window decoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowOptions {
    pub max_window_iters: usize,
    pub tol_fp: f64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions { max_window_iters: DEFAULT_MAX_WINDOW_ITERS, tol_fp: DeCaps::default().tol_fp }
    }
}

/// Sections of `wc` that the window actually updates in `z`.
fn window_active<S: Scalar>(z: &Constellation<S>, wc: &WindowConfiguration) -> Vec<SectionIndex> {
    wc.sections.iter().copied().filter(|&s| !z.is_frozen(s)).collect()
}

/// One DE round restricted to the window's sections.
pub fn window_step<S: Scalar>(
    z: &Constellation<S>,
    wc: &WindowConfiguration,
    p: &EnsembleParams,
) -> Constellation<S> {
    crate::de::de_step(z, p, &window_active(z, wc))
}

/// Decode one WC against `global` and write back the target section only.
///
/// Returns the number of window iterations used.
pub fn decode_window_in_place<S: Scalar>(
    global: &mut Constellation<S>,
    wc: &WindowConfiguration,
    p: &EnsembleParams,
    delta: S,
    opts: WindowOptions,
) -> Result<usize> {
    let z = global.clone();
    let active = window_active(&z, wc);
    let mut stepper = DeStepper::new(&z, p, &active);
    let tvn = wc.tvn;
    let caps = DeCaps { max_iterations: opts.max_window_iters, tol_fp: opts.tol_fp };
    let out = run_with_stepper(z, &mut stepper, |z| z.get(tvn) <= delta, caps);
    if !out.converged {
        return Err(Error::WindowDecodeFailure {
            tvn,
            iterations: out.iterations,
            value: out.final_state.get(tvn).as_f64(),
            reason: if out.capped { FailureReason::IterationCap } else { FailureReason::FixedPoint },
        });
    }
    global.set(tvn, out.final_state.get(tvn));
    Ok(out.iterations)
}

/// Functional form of [`decode_window_in_place`].
pub fn decode_window<S: Scalar>(
    global: &Constellation<S>,
    wc: &WindowConfiguration,
    p: &EnsembleParams,
    delta: S,
    opts: WindowOptions,
) -> Result<(Constellation<S>, usize)> {
    let mut next = global.clone();
    let iters = decode_window_in_place(&mut next, wc, p, delta, opts)?;
    Ok((next, iters))
}

/// Process every WC of `schedule` in turn, starting from the full-code
/// constellation.
pub fn decode_chain<S: Scalar>(
    p: &EnsembleParams,
    spec: &WindowSpec,
    schedule: &DecodeSchedule,
    epsilon: S,
    delta: S,
    opts: WindowOptions,
) -> Result<IterationProfile> {
    spec.check_against(p)?;
    let mut global = Constellation::full_code(p, epsilon, delta);
    let mut profile = IterationProfile {
        epsilon: epsilon.as_f64(),
        delta: delta.as_f64(),
        window: spec.clone(),
        order: schedule.order.clone(),
        seed: schedule.order.seed(),
        max_window_iters: opts.max_window_iters,
        per_wc: Vec::with_capacity(schedule.schedule.len()),
    };
    for (t, &tvn) in schedule.schedule.iter().enumerate() {
        let wc = WindowConfiguration::new(spec, tvn);
        match decode_window_in_place(&mut global, &wc, p, delta, opts) {
            Ok(iterations) => profile.per_wc.push(WindowIterations { t, i: tvn.i, j: tvn.j, iterations }),
            Err(e) => {
                return Err(Error::ChainDecodeFailure { t, source: Box::new(e), partial: Box::new(profile) })
            }
        }
    }
    Ok(profile)
}

/// The pessimistic WC targeting `(0, 0)`: positions behind the target are
/// frozen at `delta`, everything ahead outside the window is frozen at 1.
///
/// The grid spans positions `[-(gamma1 - 1), max W + gamma1 - 1]`, which
/// covers every section the window's DE can read.
pub fn worst_case_constellation<S: Scalar>(
    spec: &WindowSpec,
    p: &EnsembleParams,
    epsilon: S,
    delta: S,
) -> Constellation<S> {
    let back = p.gamma1() as i64 - 1;
    let positions = (spec.max_size() + p.gamma1() - 1) as i64 + back + 1;
    let mut c = Constellation::new(-back, positions as usize, p.l2(), S::one(), epsilon, delta);
    let wc = WindowConfiguration::new(spec, SectionIndex::new(0, 0));
    let sections: Vec<SectionIndex> = c.sections().collect();
    for s in sections {
        if s.i < 0 {
            c.freeze(s, delta);
        } else if !wc.contains(s) {
            c.freeze(s, S::one());
        }
    }
    c
}

/// Template for repeated worst-case probes at varying `epsilon`.
#[derive(Debug, Clone)]
pub struct WorstCase<S> {
    start: Constellation<S>,
    stepper: DeStepper<S>,
}

impl<S: Scalar> WorstCase<S> {
    pub fn new(spec: &WindowSpec, p: &EnsembleParams, delta: S) -> Result<Self> {
        spec.check_against(p)?;
        let start = worst_case_constellation(spec, p, S::one(), delta);
        let active = start.unfrozen_sections();
        let stepper = DeStepper::new(&start, p, &active);
        Ok(WorstCase { start, stepper })
    }

    /// Runs the worst-case WC at `epsilon` until the target reaches `delta`.
    pub fn run(&self, epsilon: S, caps: DeCaps) -> crate::de::DeOutcome<S> {
        let mut c = self.start.clone();
        c.epsilon = epsilon;
        let tvn = SectionIndex::new(0, 0);
        let delta = c.delta;
        run_with_stepper(c, &mut self.stepper.clone(), |c| c.get(tvn) <= delta, caps)
    }

    pub fn threshold(&self, resolution: S, caps: DeCaps) -> Bracket<S> {
        bisect(S::zero(), S::one(), resolution, |eps| self.run(eps, caps).converged)
    }
}

/// Worst-case window threshold `eps^worst` by bisection over `[0, 1]`.
pub fn worst_case_threshold<S: Scalar>(
    spec: &WindowSpec,
    p: &EnsembleParams,
    delta: S,
    resolution: S,
    caps: DeCaps,
) -> Result<Bracket<S>> {
    Ok(WorstCase::new(spec, p, delta)?.threshold(resolution, caps))
}

/// Windowed-decoder threshold `eps^WC`: largest `epsilon` at which every WC
/// of the chain reaches `delta`.
pub fn wc_threshold<S: Scalar>(
    spec: &WindowSpec,
    p: &EnsembleParams,
    schedule: &DecodeSchedule,
    delta: S,
    resolution: S,
    opts: WindowOptions,
) -> Result<Bracket<S>> {
    spec.check_against(p)?;
    Ok(bisect(S::zero(), S::one(), resolution, |eps| {
        decode_chain(p, spec, schedule, eps, delta, opts).is_ok()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2_9_params() -> EnsembleParams {
        EnsembleParams::new(4, 8, 30, 2, 9, 2, 0.1).unwrap()
    }

    #[test]
    fn spec_parsing_and_validation() {
        let w: WindowSpec = "5,5,4,2,3,4,5".parse().unwrap();
        assert_eq!(w.complexity(), 28);
        assert_eq!(w.to_string(), "5,5,4,2,3,4,5");
        assert!("0,4,4".parse::<WindowSpec>().is_err());
        assert!("".parse::<WindowSpec>().is_err());
        assert!("4,x".parse::<WindowSpec>().is_err());
        let p = EnsembleParams::new(4, 8, 30, 2, 3, 2, 0.1).unwrap();
        assert!(w.check_against(&p).is_err());
    }

    #[test]
    fn window_sections_are_shifted_to_the_target() {
        let spec: WindowSpec = "5,4,3,3,4".parse().unwrap();
        let wc = WindowConfiguration::new(&spec, SectionIndex::new(1, 2));
        assert_eq!(wc.sections.len(), spec.complexity());
        assert!(wc.contains(SectionIndex::new(1, 2)));
        assert!(wc.contains(SectionIndex::new(5, 2)));
        assert!(!wc.contains(SectionIndex::new(6, 2)));
        // segment 3 is r = 1 -> W_1 = 4; segment 1 is r = 4 -> W_4 = 4; segment 0 is r = 3 -> 3
        assert!(wc.contains(SectionIndex::new(4, 3)));
        assert!(!wc.contains(SectionIndex::new(5, 3)));
        assert!(wc.contains(SectionIndex::new(3, 0)));
        assert!(!wc.contains(SectionIndex::new(4, 0)));
        assert!(!wc.contains(SectionIndex::new(0, 2)));
    }

    #[test]
    fn schedules_are_position_major_permutations() {
        let p = EnsembleParams::new(4, 8, 4, 2, 5, 2, 0.1).unwrap();
        for order in [
            ProcessingOrder::Natural,
            ProcessingOrder::Reverse,
            ProcessingOrder::Random { seed: 7 },
        ] {
            let s = DecodeSchedule::new(&p, order).unwrap();
            assert_eq!(s.schedule.len(), 20);
            for w in s.schedule.windows(2) {
                assert!(w[0].i <= w[1].i);
            }
            let mut all = s.schedule.clone();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), 20);
        }
        let bad = ProcessingOrder::Custom { permutation: vec![0, 1, 1, 3, 4] };
        assert!(DecodeSchedule::new(&p, bad).is_err());
        let a = ProcessingOrder::Random { seed: 42 }.permutation(19).unwrap();
        let b = ProcessingOrder::Random { seed: 42 }.permutation(19).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sections_outside_the_window_never_move() {
        let p = l2_9_params();
        let spec = WindowSpec::uniform(9, 3).unwrap();
        let wc = WindowConfiguration::new(&spec, SectionIndex::new(4, 6));
        let mut z = Constellation::<f64>::full_code(&p, 0.45, 1e-12);
        let start = z.clone();
        for _ in 0..20 {
            z = window_step(&z, &wc, &p);
        }
        for s in z.sections() {
            if !wc.contains(s) {
                assert_eq!(z.get(s), start.get(s));
            }
        }
    }

    #[test]
    fn full_cover_window_equals_full_step() {
        let p = EnsembleParams::new(4, 8, 6, 2, 3, 2, 0.2).unwrap();
        let spec = WindowSpec::uniform(3, 6 + 2).unwrap();
        let wc = WindowConfiguration::new(&spec, SectionIndex::new(0, 0));
        let c = Constellation::<f64>::full_code(&p, 0.46, 1e-12);
        let all: Vec<_> = c.sections().collect();
        let mut a = c.clone();
        let mut b = c;
        for _ in 0..10 {
            a = window_step(&a, &wc, &p);
            b = crate::de::de_step(&b, &p, &all);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn zero_erasure_window_takes_one_iteration() {
        let p = l2_9_params();
        let spec = WindowSpec::uniform(9, 4).unwrap();
        let wc = WindowConfiguration::new(&spec, SectionIndex::new(0, 0));
        let g = Constellation::<f64>::full_code(&p, 0.0, 1e-12);
        let (next, iters) = decode_window(&g, &wc, &p, 1e-12, WindowOptions::default()).unwrap();
        assert_eq!(iters, 1);
        assert_eq!(next.get(wc.tvn), 0.0);
    }

    #[test]
    fn write_back_touches_only_the_target() {
        let p = l2_9_params();
        let spec = WindowSpec::uniform(9, 4).unwrap();
        let wc = WindowConfiguration::new(&spec, SectionIndex::new(0, 3));
        let g = Constellation::<f64>::full_code(&p, 0.4, 1e-12);
        let (next, _) = decode_window(&g, &wc, &p, 1e-12, WindowOptions::default()).unwrap();
        let changed: Vec<_> = g.sections().filter(|&s| g.get(s) != next.get(s)).collect();
        assert_eq!(changed, vec![wc.tvn]);
    }

    #[test]
    fn uniform_window_below_its_threshold_decodes() {
        let p = l2_9_params();
        let spec = WindowSpec::uniform(9, 4).unwrap();
        let sched = DecodeSchedule::natural(&p);
        let prof = decode_chain::<f64>(&p, &spec, &sched, 0.46, 1e-12, WindowOptions::default()).unwrap();
        assert_eq!(prof.per_wc.len(), 30 * 9);
        assert!(prof.per_wc.iter().all(|w| w.iterations > 0 && w.iterations <= DEFAULT_MAX_WINDOW_ITERS));
    }

    #[test]
    fn chain_failure_reports_partial_profile() {
        let p = l2_9_params();
        let spec = WindowSpec::uniform(9, 2).unwrap();
        let sched = DecodeSchedule::natural(&p);
        match decode_chain::<f64>(&p, &spec, &sched, 0.49, 1e-12, WindowOptions::default()) {
            Err(Error::ChainDecodeFailure { t, partial, .. }) => assert_eq!(partial.per_wc.len(), t),
            other => panic!("expected a chain failure, got {other:?}"),
        }
    }

    #[test]
    fn worst_case_layout() {
        let p = EnsembleParams::new(4, 8, 30, 2, 7, 2, 0.05).unwrap();
        let spec: WindowSpec = "5,5,4,0,3,4,5".parse().unwrap();
        let c = worst_case_constellation::<f64>(&spec, &p, 0.45, 1e-12);
        assert_eq!(c.i_min(), -1);
        assert_eq!(c.i_max(), 5 + 1);
        for j in 0..7 {
            let s = SectionIndex::new(-1, j);
            assert!(c.is_frozen(s));
            assert_eq!(c.get(s), 1e-12);
        }
        for i in 0..=c.i_max() {
            let s = SectionIndex::new(i, 3);
            assert!(c.is_frozen(s));
            assert_eq!(c.get(s), 1.0);
        }
        assert!(!c.is_frozen(SectionIndex::new(0, 0)));
        assert_eq!(c.unfrozen_sections().len(), spec.complexity());

        let exact = worst_case_constellation::<f64>(&spec, &p, 0.45, 0.0);
        assert_eq!(exact.get(SectionIndex::new(-1, 2)), 0.0);
    }

    #[test]
    fn profile_csv_round_trip() {
        let p = EnsembleParams::new(4, 8, 5, 2, 3, 2, 0.1).unwrap();
        let spec = WindowSpec::uniform(3, 4).unwrap();
        let sched = DecodeSchedule::new(&p, ProcessingOrder::Random { seed: 3 }).unwrap();
        let prof = decode_chain::<f64>(&p, &spec, &sched, 0.3, 1e-12, WindowOptions::default()).unwrap();
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let (header, rows) = IterationProfile::read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, prof.per_wc);
        assert_eq!(header["seed"], 3);
        assert_eq!(header["W"], serde_json::json!([4, 4, 4]));
        let avg = rows.iter().map(|r| r.iterations as f64).sum::<f64>() / rows.len() as f64;
        assert_eq!(header["average"].as_f64().unwrap(), avg);
    }
}
