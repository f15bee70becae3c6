//! Published window-optimization results for the `(4, 8, L1 = 30, gamma1 = 2)`
//! family at `delta = 1e-12`.

use crate::ensemble::EnsembleParams;
use crate::error::Result;
use crate::window::WindowSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub l2: usize,
    pub gamma2: usize,
    pub t: f64,
    pub complexity: usize,
    pub w_min: usize,
    pub w_max: usize,
    pub window: &'static [usize],
    /// Published worst-case threshold (4 decimals).
    pub worst: f64,
    /// Published chain threshold (4 decimals).
    pub wc: f64,
}

impl ReferenceRow {
    pub fn params(&self) -> Result<EnsembleParams> {
        EnsembleParams::regular_4_8(self.l2, self.gamma2, self.t)
    }

    pub fn spec(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.window.to_vec())
    }
}

pub const DELTA: f64 = 1e-12;
pub const RESOLUTION: f64 = 1e-5;
/// Allowed distance from the published thresholds.
pub const TOLERANCE: f64 = 5e-4;
/// Allowed gap between the chain and worst-case thresholds.
pub const WC_GAP: f64 = 2e-4;

const fn row(l2: usize, gamma2: usize, t: f64, window: &'static [usize], value: f64) -> ReferenceRow {
    let (complexity, w_max) = if l2 == 7 { (28, 7) } else { (36, 5) };
    ReferenceRow { l2, gamma2, t, complexity, w_min: 2, w_max, window, worst: value, wc: value }
}

pub const ROWS: [ReferenceRow; 8] = [
    row(7, 2, 0.05, &[5, 5, 4, 2, 3, 4, 5], 0.4829),
    row(7, 2, 0.1, &[5, 5, 4, 3, 3, 4, 4], 0.4722),
    row(7, 3, 0.05, &[5, 4, 4, 3, 4, 4, 4], 0.4723),
    row(7, 3, 0.1, &[4, 4, 4, 4, 4, 4, 4], 0.4685),
    row(9, 2, 0.05, &[5, 5, 4, 3, 2, 3, 4, 5, 5], 0.4872),
    row(9, 2, 0.1, &[5, 5, 4, 3, 2, 3, 4, 5, 5], 0.4806),
    row(9, 3, 0.05, &[5, 5, 5, 2, 3, 3, 4, 4, 5], 0.4767),
    row(9, 3, 0.1, &[4, 4, 4, 4, 4, 4, 4, 4, 4], 0.4685),
];
