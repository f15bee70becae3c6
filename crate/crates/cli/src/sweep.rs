//! `start:stop:step` ranges; `step` may be `xK` for a geometric sweep.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Step {
    Add(usize),
    Mul(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sweep {
    pub start: usize,
    pub stop: usize,
    pub step: Step,
}

impl Sweep {
    /// Values from `start` up to and including `stop`.
    pub fn values(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut v = self.start;
        while v <= self.stop {
            out.push(v);
            v = match self.step {
                Step::Add(k) => v + k,
                Step::Mul(k) => v * k,
            };
        }
        out
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a non-negative integer"));
        let parts: Vec<&str> = s.split(':').collect();
        let sweep = match parts.as_slice() {
            [one] => {
                let v = num(one)?;
                Sweep { start: v, stop: v, step: Step::Add(1) }
            }
            [a, b, step] => {
                let step = match step.trim().strip_prefix('x') {
                    Some(k) => Step::Mul(num(k)?),
                    None => Step::Add(num(step)?),
                };
                Sweep { start: num(a)?, stop: num(b)?, step }
            }
            _ => return Err(format!("'{s}' is not of the form start:stop:step")),
        };
        match sweep.step {
            Step::Add(0) => Err("step must be positive".into()),
            Step::Mul(k) if k < 2 => Err("geometric step must be at least x2".into()),
            _ if sweep.start == 0 => Err("range must start above 0".into()),
            _ if sweep.stop < sweep.start => Err(format!("empty range '{s}'")),
            _ => Ok(sweep),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Step::Add(k) => write!(f, "{}:{}:{k}", self.start, self.stop),
            Step::Mul(k) => write!(f, "{}:{}:x{k}", self.start, self.stop),
        }
    }
}
