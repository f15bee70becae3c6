//! Ensemble parameters, section geometry, design rate and the same-section
//! size-2 stopping-set probability.
//!
//! The ensemble `C(d_l, d_r, L1, gamma1, L2, gamma2, T)` places sections on
//! a grid `(i, j)`: `i` is the position along the terminated coupling
//! dimension, `j` the segment along the circular one. A VN edge stays in its
//! own segment with probability `1 - T` (choosing one of `gamma1` positions
//! ahead) or jumps forward `r in 1..gamma2` segments with probability `T`.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, rational_from_decimal, to_f64};
use crate::scalar::Scalar;

/// Grid coordinate of a section.
///
/// `i` is never wrapped and may be negative for the virtual sections before
/// the chain start; `j` is always reduced modulo `L2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectionIndex {
    pub i: i64,
    pub j: usize,
}

impl SectionIndex {
    pub fn new(i: i64, j: usize) -> Self {
        SectionIndex { i, j }
    }

    /// Shift by `(di, dj)`, wrapping the segment modulo `l2`.
    pub fn offset(self, di: i64, dj: i64, l2: usize) -> Self {
        let l2 = l2 as i64;
        SectionIndex {
            i: self.i + di,
            j: (self.j as i64 + dj).rem_euclid(l2) as usize,
        }
    }
}

/// On-disk form of [`EnsembleParams`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    dl: usize,
    dr: usize,
    #[serde(rename = "L1")]
    l1: usize,
    gamma1: usize,
    #[serde(rename = "L2")]
    l2: usize,
    gamma2: usize,
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
}

/// The seven ensemble parameters plus an optional section size.
///
/// Always valid once constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EnsembleParams {
    dl: usize,
    dr: usize,
    l1: usize,
    gamma1: usize,
    l2: usize,
    gamma2: usize,
    t: f64,
    m: Option<usize>,
}

impl TryFrom<RawParams> for EnsembleParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let p = EnsembleParams::new(raw.dl, raw.dr, raw.l1, raw.gamma1, raw.l2, raw.gamma2, raw.t)?;
        match raw.m {
            Some(m) => p.with_section_size(m),
            None => Ok(p),
        }
    }
}

impl From<EnsembleParams> for RawParams {
    fn from(p: EnsembleParams) -> Self {
        RawParams {
            dl: p.dl,
            dr: p.dr,
            l1: p.l1,
            gamma1: p.gamma1,
            l2: p.l2,
            gamma2: p.gamma2,
            t: p.t,
            m: p.m,
        }
    }
}

impl EnsembleParams {
    pub fn new(
        dl: usize,
        dr: usize,
        l1: usize,
        gamma1: usize,
        l2: usize,
        gamma2: usize,
        t: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if dl == 0 || dr == 0 {
            return bad(format!("degrees must be positive (dl = {dl}, dr = {dr})"));
        }
        if l1 == 0 || l2 == 0 {
            return bad(format!("coupling lengths must be positive (L1 = {l1}, L2 = {l2})"));
        }
        if gamma1 == 0 || gamma1 > l1 {
            return bad(format!("need 1 <= gamma1 <= L1 (gamma1 = {gamma1}, L1 = {l1})"));
        }
        if gamma2 == 0 || gamma2 > l2 {
            return bad(format!("need 1 <= gamma2 <= L2 (gamma2 = {gamma2}, L2 = {l2})"));
        }
        if !(0.0..=1.0).contains(&t) {
            return bad(format!("density T = {t} outside [0, 1]"));
        }
        if gamma2 == 1 && t != 0.0 {
            return Err(Error::DegenerateCoupling(t));
        }
        Ok(EnsembleParams { dl, dr, l1, gamma1, l2, gamma2, t, m: None })
    }

    /// Attach a section size; `d_r` must divide `d_l * M`.
    pub fn with_section_size(mut self, m: usize) -> Result<Self> {
        self.checks_per_section(m)?;
        self.m = Some(m);
        Ok(self)
    }

    /// The `(4, 8, L1 = 30, gamma1 = 2)` family used throughout the experiments.
    pub fn regular_4_8(l2: usize, gamma2: usize, t: f64) -> Result<Self> {
        EnsembleParams::new(4, 8, 30, 2, l2, gamma2, t)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("params always serialize")
    }

    pub fn dl(&self) -> usize {
        self.dl
    }
    pub fn dr(&self) -> usize {
        self.dr
    }
    pub fn l1(&self) -> usize {
        self.l1
    }
    pub fn gamma1(&self) -> usize {
        self.gamma1
    }
    pub fn l2(&self) -> usize {
        self.l2
    }
    pub fn gamma2(&self) -> usize {
        self.gamma2
    }
    pub fn density(&self) -> f64 {
        self.t
    }
    pub fn section_size(&self) -> Option<usize> {
        self.m
    }

    /// Copy with a different `(L2, gamma2, T)`.
    pub fn with_md_coupling(&self, l2: usize, gamma2: usize, t: f64) -> Result<Self> {
        let p = EnsembleParams::new(self.dl, self.dr, self.l1, self.gamma1, l2, gamma2, t)?;
        match self.m {
            Some(m) => p.with_section_size(m),
            None => Ok(p),
        }
    }

    /// Copy with a different chain length `L1`.
    pub fn with_l1(&self, l1: usize) -> Result<Self> {
        let p = EnsembleParams::new(self.dl, self.dr, l1, self.gamma1, self.l2, self.gamma2, self.t)?;
        match self.m {
            Some(m) => p.with_section_size(m),
            None => Ok(p),
        }
    }

    /// The 1D ensemble `C(d_l, d_r, L1, gamma1)`: one segment, no cross coupling.
    pub fn one_dimensional(&self) -> Self {
        EnsembleParams { l2: 1, gamma2: 1, t: 0.0, ..self.clone() }
    }

    /// Number of CNs per section, `M d_l / d_r`.
    pub fn checks_per_section(&self, m: usize) -> Result<usize> {
        if m == 0 {
            return Err(Error::InvalidParams("section size M must be positive".into()));
        }
        let edges = self.dl * m;
        if !edges.is_multiple_of(self.dr) {
            return Err(Error::InvalidParams(format!(
                "d_r = {} does not divide d_l * M = {edges}",
                self.dr
            )));
        }
        Ok(edges / self.dr)
    }

    /// Coupling weights `((1 - T) / gamma1, T / (gamma1 (gamma2 - 1)))`.
    ///
    /// The second weight is zero when `gamma2 = 1`.
    pub fn weights<S: Scalar>(&self) -> (S, S) {
        let g1 = self.gamma1 as f64;
        let own = (1.0 - self.t) / g1;
        let cross = if self.gamma2 > 1 {
            self.t / (g1 * (self.gamma2 - 1) as f64)
        } else {
            0.0
        };
        (S::of(own), S::of(cross))
    }

    /// `true` when `(i, j)` is one of the transmitted sections `[L1] x [L2]`.
    pub fn in_range(&self, s: SectionIndex) -> bool {
        s.i >= 0 && (s.i as usize) < self.l1 && s.j < self.l2
    }
}

/// Design rate as an exact rational.
///
/// `R = 1 - (d_l/d_r) (1 + (gamma1 - 1 - 2 sum_{i<gamma1} (i/gamma1)^{d_r}) / L1)`;
/// depends on `(d_l, d_r, L1, gamma1)` only.
pub fn design_rate_exact(p: &EnsembleParams) -> BigRational {
    let int = |v: usize| BigRational::from_integer(BigInt::from(v));
    let g1 = int(p.gamma1);
    let mut boundary = BigRational::zero();
    for i in 0..p.gamma1 {
        boundary += num_traits::pow(int(i) / g1.clone(), p.dr);
    }
    let correction = (g1 - BigRational::one() - int(2) * boundary) / int(p.l1);
    BigRational::one() - int(p.dl) / int(p.dr) * (BigRational::one() + correction)
}

pub fn design_rate<S: Scalar>(p: &EnsembleParams) -> S {
    S::of(to_f64(&design_rate_exact(p)))
}

/// Probability that two VNs of one section form a size-2 stopping set, exactly.
///
/// Follows the socket-counting model: each CN has `d_r` sockets, and the
/// neighbourhood of the second VN is uniform over ordered non-parallel
/// socket assignments with the same in-segment / cross-segment edge split.
pub fn p_stop_exact(p: &EnsembleParams, m: usize) -> Result<BigRational> {
    let per_section = p.checks_per_section(m)? as i64;
    let dl = p.dl as i64;
    let own_pool = p.gamma1 as i64 * per_section;
    let cross_pool = p.gamma1 as i64 * (p.gamma2 as i64 - 1) * per_section;
    if own_pool <= dl {
        return Err(Error::PreconditionViolated(format!(
            "gamma1 * M * d_l / d_r = {own_pool} must exceed d_l = {dl}"
        )));
    }
    if p.t > 0.0 && p.gamma2 < 2 {
        return Err(Error::DegenerateCoupling(p.t));
    }
    if p.t > 0.0 && cross_pool < dl {
        return Err(Error::PreconditionViolated(format!(
            "gamma1 * (gamma2 - 1) * M * d_l / d_r = {cross_pool} must be at least d_l = {dl}"
        )));
    }

    let t = rational_from_decimal(p.t);
    let stay = BigRational::one() - t.clone();
    let q = BigRational::new(BigInt::from(p.dr - 1), BigInt::from(p.dr));
    let q_pows: Vec<BigRational> = (0..=p.dl).map(|e| num_traits::pow(q.clone(), e)).collect();

    let mut total = BigRational::zero();
    for a in 0..=dl {
        let b = dl - a;
        let split = num_traits::pow(stay.clone(), 2 * a as usize)
            * num_traits::pow(t.clone(), 2 * b as usize)
            * BigRational::from_integer(num_traits::pow(binomial(dl, a), 2));
        if split.is_zero() {
            continue;
        }
        let mut denom = BigRational::zero();
        for l in 0..=a {
            let own = binomial(a, l) * binomial(own_pool - a, a - l);
            if own.is_zero() {
                continue;
            }
            for k in 0..=b {
                let kab = own.clone() * binomial(b, k) * binomial(cross_pool - b, b - k);
                if kab.is_zero() {
                    continue;
                }
                denom += BigRational::from_integer(kab) * q_pows[(l + k) as usize].clone();
            }
        }
        total += split * q_pows[p.dl].clone() / denom;
    }
    Ok(total)
}

pub fn p_stop<S: Scalar>(p: &EnsembleParams, m: usize) -> Result<S> {
    Ok(S::of(to_f64(&p_stop_exact(p, m)?)))
}

/// Fully-coupled comparison point for the `P_stop` versus `M` sweep.
///
/// With `gamma2 = L2` the cross-coupled ensemble behaves like a 1D code with
/// section size `M L2`. Two densities are reported: the one that equalises
/// per-section edge probabilities, `(gamma2 - 1) / gamma2`, and the printed
/// caption value `(gamma2 - 1) / gamma1`. They coincide only when
/// `gamma1 = gamma2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullyCoupledEquivalent {
    pub one_dimensional: EnsembleParams,
    pub section_size: usize,
    pub md_gamma2: usize,
    pub density_balanced: f64,
    pub density_caption: f64,
    /// `false` when the caption density exceeds 1 and cannot be evaluated.
    pub caption_in_range: bool,
    pub densities_disagree: bool,
}

pub fn fully_coupled_equivalent(p: &EnsembleParams, m: usize) -> FullyCoupledEquivalent {
    let gamma2 = p.l2;
    let balanced = (gamma2 - 1) as f64 / gamma2 as f64;
    let caption = (gamma2 - 1) as f64 / p.gamma1 as f64;
    FullyCoupledEquivalent {
        one_dimensional: p.one_dimensional(),
        section_size: m * p.l2,
        md_gamma2: gamma2,
        density_balanced: balanced,
        density_caption: caption,
        caption_in_range: caption <= 1.0,
        densities_disagree: balanced != caption,
    }
}
