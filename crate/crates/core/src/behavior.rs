//! The tripartite behavior table P(abc|xyz) and its bipartite counterpart.
//!
//! Storage order is fixed: x-major, then y, z, a, b, c, so a flat index is
//! ((((x·2+y)·2+z)·2+a)·2+b)·2+c. Serialized tables use the same order.

use serde::{Deserialize, Serialize};

use crate::quantum::{Pair, Party};
use crate::{tol, Error, Result};

pub const N_ENTRIES: usize = 64;
pub const PAIR_ENTRIES: usize = 16;

/// Flat index into a tripartite table.
pub fn index(x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> usize {
    ((((x * 2 + y) * 2 + z) * 2 + a) * 2 + b) * 2 + c
}

/// Flat index into a bipartite table (x-major, then y, a, b).
pub fn pair_index(x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * 2 + y) * 2 + a) * 2 + b
}

fn validate_table(p: &[f64], contexts: usize, outcomes: usize) -> Result<()> {
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() || !(-tol::ALGEBRAIC..=1.0 + tol::ALGEBRAIC).contains(&v) {
            return Err(Error::InvalidBehavior(format!(
                "entry {i} = {v} outside [0, 1]"
            )));
        }
    }
    for ctx in 0..contexts {
        let sum: f64 = p[ctx * outcomes..(ctx + 1) * outcomes].iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidBehavior(format!(
                "context {ctx} sums to {sum}, expected 1"
            )));
        }
    }
    Ok(())
}

/// A normalized tripartite behavior with binary inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    p: [f64; N_ENTRIES],
}

impl Behavior {
    pub fn new(p: [f64; N_ENTRIES]) -> Result<Self> {
        validate_table(&p, 8, 8)?;
        Ok(Self { p })
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut p = [0.0; N_ENTRIES];
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    for a in 0..2 {
                        for b in 0..2 {
                            for c in 0..2 {
                                p[index(x, y, z, a, b, c)] = f(x, y, z, a, b, c);
                            }
                        }
                    }
                }
            }
        }
        Self::new(p)
    }

    /// The uniform box: probability 1/8 for every outcome triple.
    pub fn white_noise() -> Self {
        Self {
            p: [0.125; N_ENTRIES],
        }
    }

    /// Convex mixture.
    pub fn mix(parts: &[(f64, &Behavior)]) -> Result<Self> {
        let mut p = [0.0; N_ENTRIES];
        let mut wsum = 0.0;
        for &(w, b) in parts {
            if w < -tol::ALGEBRAIC {
                return Err(Error::InvalidParameter("negative mixture weight".into()));
            }
            wsum += w;
            for i in 0..N_ENTRIES {
                p[i] += w * b.p[i];
            }
        }
        if (wsum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {wsum}"
            )));
        }
        Self::new(p)
    }

    pub fn get(&self, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> f64 {
        self.p[index(x, y, z, a, b, c)]
    }

    pub fn entries(&self) -> &[f64; N_ENTRIES] {
        &self.p
    }

    /// Worst violation of the no-signaling constraints over all three
    /// party-marginal conditions.
    pub fn no_signaling_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        // P(bc|yz) independent of x
        for y in 0..2 {
            for z in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let m = |x: usize| -> f64 {
                            (0..2).map(|a| self.get(x, y, z, a, b, c)).sum()
                        };
                        worst = worst.max((m(0) - m(1)).abs());
                    }
                }
            }
        }
        // P(ac|xz) independent of y
        for x in 0..2 {
            for z in 0..2 {
                for a in 0..2 {
                    for c in 0..2 {
                        let m = |y: usize| -> f64 {
                            (0..2).map(|b| self.get(x, y, z, a, b, c)).sum()
                        };
                        worst = worst.max((m(0) - m(1)).abs());
                    }
                }
            }
        }
        // P(ab|xy) independent of z
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let m = |z: usize| -> f64 {
                            (0..2).map(|c| self.get(x, y, z, a, b, c)).sum()
                        };
                        worst = worst.max((m(0) - m(1)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn is_no_signaling(&self, tolerance: f64) -> bool {
        self.no_signaling_deviation() <= tolerance
    }

    fn require_no_signaling(&self) -> Result<()> {
        let dev = self.no_signaling_deviation();
        if dev > tol::NO_SIGNALING {
            return Err(Error::Signaling { deviation: dev });
        }
        Ok(())
    }

    /// Full three-party correlator ⟨x y z⟩ = Σ (−1)^{a⊕b⊕c} P(abc|xyz).
    pub fn correlator(&self, x: usize, y: usize, z: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let sign = if (a ^ b ^ c) == 0 { 1.0 } else { -1.0 };
                    s += sign * self.get(x, y, z, a, b, c);
                }
            }
        }
        s
    }

    /// Single-party expectation ⟨party_setting⟩, computed from fixed inputs
    /// of the other parties after verifying no-signaling. A signaling table
    /// has no well-defined marginal, so that is an error rather than an
    /// average.
    pub fn single_marginal_expectation(&self, party: Party, setting: usize) -> Result<f64> {
        self.require_no_signaling()?;
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let outcome = [a, b, c][party.index()];
                    let sign = if outcome == 0 { 1.0 } else { -1.0 };
                    let mut inputs = [0, 0, 0];
                    inputs[party.index()] = setting;
                    s += sign * self.get(inputs[0], inputs[1], inputs[2], a, b, c);
                }
            }
        }
        Ok(s)
    }

    /// True iff both settings of the party have |expectation| ≤ tolerance.
    pub fn is_marginal_maximally_mixed(&self, party: Party, tolerance: f64) -> Result<bool> {
        let e0 = self.single_marginal_expectation(party, 0)?;
        let e1 = self.single_marginal_expectation(party, 1)?;
        Ok(e0.abs() <= tolerance && e1.abs() <= tolerance)
    }

    /// Bipartite marginal behavior of the given pair.
    pub fn pair_marginal(&self, pair: Pair) -> Result<PairBehavior> {
        self.require_no_signaling()?;
        let (p0, p1) = pair.parties();
        let other = pair.complement();
        PairBehavior::from_fn(|u, v, oa, ob| {
            let mut inputs = [0usize, 0, 0];
            inputs[p0.index()] = u;
            inputs[p1.index()] = v;
            // other party's input fixed at 0; outcomes summed out
            let mut s = 0.0;
            for oc in 0..2 {
                let mut outs = [0usize, 0, 0];
                outs[p0.index()] = oa;
                outs[p1.index()] = ob;
                outs[other.index()] = oc;
                s += self.get(inputs[0], inputs[1], inputs[2], outs[0], outs[1], outs[2]);
            }
            s
        })
    }

    /// All single-party expectations and two-party correlators.
    pub fn marginal_profile(&self) -> Result<MarginalProfile> {
        let mut single = [[0.0; 2]; 3];
        for party in Party::ALL {
            for setting in 0..2 {
                single[party.index()][setting] = self.single_marginal_expectation(party, setting)?;
            }
        }
        let mut pair = [[0.0; 4]; 3];
        for (pi, p) in Pair::ALL.iter().enumerate() {
            let marginal = self.pair_marginal(*p)?;
            for u in 0..2 {
                for v in 0..2 {
                    pair[pi][u * 2 + v] = marginal.correlator(u, v);
                }
            }
        }
        Ok(MarginalProfile { single, pair })
    }
}

/// Single-party expectations (3 parties × 2 settings) and two-party
/// correlators (pairs AB, AC, BC × setting combinations 00, 01, 10, 11).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalProfile {
    pub single: [[f64; 2]; 3],
    pub pair: [[f64; 4]; 3],
}

/// A normalized two-party behavior with binary inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBehavior {
    p: [f64; PAIR_ENTRIES],
}

impl PairBehavior {
    pub fn new(p: [f64; PAIR_ENTRIES]) -> Result<Self> {
        validate_table(&p, 4, 4)?;
        Ok(Self { p })
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut p = [0.0; PAIR_ENTRIES];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        p[pair_index(x, y, a, b)] = f(x, y, a, b);
                    }
                }
            }
        }
        Self::new(p)
    }

    pub fn white_noise() -> Self {
        Self {
            p: [0.25; PAIR_ENTRIES],
        }
    }

    pub fn mix(parts: &[(f64, &PairBehavior)]) -> Result<Self> {
        let mut p = [0.0; PAIR_ENTRIES];
        let mut wsum = 0.0;
        for &(w, b) in parts {
            wsum += w;
            for i in 0..PAIR_ENTRIES {
                p[i] += w * b.p[i];
            }
        }
        if (wsum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {wsum}"
            )));
        }
        Self::new(p)
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[pair_index(x, y, a, b)]
    }

    pub fn entries(&self) -> &[f64; PAIR_ENTRIES] {
        &self.p
    }

    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let sign = if (a ^ b) == 0 { 1.0 } else { -1.0 };
                s += sign * self.get(x, y, a, b);
            }
        }
        s
    }

    pub fn no_signaling_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for y in 0..2 {
            for b in 0..2 {
                let m = |x: usize| -> f64 { (0..2).map(|a| self.get(x, y, a, b)).sum() };
                worst = worst.max((m(0) - m(1)).abs());
            }
        }
        for x in 0..2 {
            for a in 0..2 {
                let m = |y: usize| -> f64 { (0..2).map(|b| self.get(x, y, a, b)).sum() };
                worst = worst.max((m(0) - m(1)).abs());
            }
        }
        worst
    }

    pub fn is_no_signaling(&self, tolerance: f64) -> bool {
        self.no_signaling_deviation() <= tolerance
    }

    pub fn require_no_signaling(&self) -> Result<()> {
        let dev = self.no_signaling_deviation();
        if dev > tol::NO_SIGNALING {
            return Err(Error::Signaling { deviation: dev });
        }
        Ok(())
    }

    pub fn single_expectation(&self, side: usize, setting: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let outcome = [a, b][side];
                let sign = if outcome == 0 { 1.0 } else { -1.0 };
                let (x, y) = if side == 0 { (setting, 0) } else { (0, setting) };
                s += sign * self.get(x, y, a, b);
            }
        }
        s
    }
}

/// Serialized behavior schema shared with the CLI:
/// {"inputs": 2, "outputs": 2, "parties": 3, "p": [64 floats], "meta": {...}}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorFile {
    pub inputs: u32,
    pub outputs: u32,
    pub parties: u32,
    pub p: Vec<f64>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

impl BehaviorFile {
    pub fn from_behavior(b: &Behavior, meta: serde_json::Value) -> Self {
        Self {
            inputs: 2,
            outputs: 2,
            parties: 3,
            p: b.entries().to_vec(),
            meta,
        }
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidBehavior(format!("behavior file: {e}")))
    }

    pub fn to_behavior(&self) -> Result<Behavior> {
        if (self.inputs, self.outputs, self.parties) != (2, 2, 3) {
            return Err(Error::InvalidBehavior(format!(
                "unsupported shape: inputs={}, outputs={}, parties={}",
                self.inputs, self.outputs, self.parties
            )));
        }
        if self.p.len() != N_ENTRIES {
            return Err(Error::InvalidBehavior(format!(
                "field p has {} entries, expected {N_ENTRIES}",
                self.p.len()
            )));
        }
        let mut p = [0.0; N_ENTRIES];
        p.copy_from_slice(&self.p);
        Behavior::new(p)
    }
}
