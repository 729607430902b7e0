//! Exact Feynman path sums for Hadamard / Toffoli / CNOT / X circuits.
//!
//! Every Hadamard offers two branches. Classical gates permute the tracked
//! basis state, and a Hadamard acting on |1> taking the |1> branch flips the
//! path sign. Each complete path therefore contributes exactly +1 or -1 to
//! the outcome it ends in, and the final amplitude of |z> is
//! `c_z * 2^(-h/2)` for the integer `c_z` = (sum of path signs). Comparing
//! probabilities reduces to comparing sums of `c_z^2` (or `c_z^p`) as exact
//! integers; the shared `2^(-h/2)` scale never enters.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::state::qubit_mask;

/// Maximum number of branch bits enumerated (2^24 paths).
pub const PATH_BUDGET: usize = 24;

/// Number of leading Hadamard choices fixed per parallel task.
const SPLIT_BITS: usize = 6;

/// Per-outcome signed path sums with the common `2^(-h/2)` factored out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathLedger {
    num_qubits: usize,
    hadamard_count: usize,
    sums: BTreeMap<usize, BigInt>,
}

impl PathLedger {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn hadamard_count(&self) -> usize {
        self.hadamard_count
    }

    /// Nonzero entries only.
    pub fn sums(&self) -> &BTreeMap<usize, BigInt> {
        &self.sums
    }

    pub fn sum(&self, z: usize) -> BigInt {
        self.sums.get(&z).cloned().unwrap_or_default()
    }

    /// `c_z * 2^(-h/2)` as a float.
    pub fn amplitude(&self, z: usize) -> f64 {
        let scale = 2f64.powf(-(self.hadamard_count as f64) / 2.0);
        self.sums.get(&z).map_or(0.0, |c| bigint_to_f64(c) * scale)
    }

    /// Dense real amplitude vector.
    pub fn amplitudes(&self) -> Vec<f64> {
        (0..1usize << self.num_qubits).map(|z| self.amplitude(z)).collect()
    }

    /// Sum of `c_z^2`; equals `2^h` exactly for every unitary path-sum
    /// circuit.
    pub fn squared_norm(&self) -> BigInt {
        self.sums.values().map(|c| c * c).sum()
    }

    /// Multiplies every `c_z` by `factor`; probabilities are unchanged.
    pub fn scaled(&self, factor: &BigInt) -> PathLedger {
        PathLedger {
            num_qubits: self.num_qubits,
            hadamard_count: self.hadamard_count,
            sums: self
                .sums
                .iter()
                .filter(|_| !factor.is_zero())
                .map(|(&z, c)| (z, c * factor))
                .collect(),
        }
    }
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    // |c_z| <= 2^h <= 2^24, exact in an f64
    let magnitude: u64 = c.magnitude().try_into().unwrap_or(u64::MAX);
    let v = magnitude as f64;
    if c.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact comparison of the accepting and rejecting sides of the ledger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerDecision {
    /// Strictly more accepting than rejecting weight.
    pub accept: bool,
    /// The two sides were exactly equal; `accept` is then false.
    pub tie: bool,
    pub accepting: BigInt,
    pub rejecting: BigInt,
}

impl LedgerDecision {
    fn compare(accepting: BigInt, rejecting: BigInt) -> Result<Self> {
        if accepting.is_zero() && rejecting.is_zero() {
            return Err(Error::ZeroProbability);
        }
        Ok(Self {
            accept: accepting > rejecting,
            tie: accepting == rejecting,
            accepting,
            rejecting,
        })
    }
}

fn check_supported(c: &Circuit) -> Result<()> {
    if let Some(g) = c.gates().iter().find(|g| !g.is_path_sum_native()) {
        return Err(Error::UnsupportedGate(format!(
            "{} (path-sum backend accepts H, X, CNOT, TOF)",
            g.name()
        )));
    }
    if c
        .postselections()
        .iter()
        .any(|p| p.position < c.gates().len())
    {
        return Err(Error::validation(
            "path-sum backend needs postselections deferred to the end; normalize first",
        ));
    }
    Ok(())
}

/// Gate with qubits pre-resolved to bit masks.
#[derive(Clone, Copy)]
enum Step {
    H(usize),
    Flip { controls: usize, target: usize },
}

fn compile(c: &Circuit) -> Vec<Step> {
    let n = c.num_qubits();
    let m = |q: usize| qubit_mask(n, q);
    c.gates()
        .iter()
        .map(|g| match *g {
            Gate::H(q) => Step::H(m(q)),
            Gate::X(q) => Step::Flip {
                controls: 0,
                target: m(q),
            },
            Gate::Cnot { control, target } => Step::Flip {
                controls: m(control),
                target: m(target),
            },
            Gate::Toffoli { c1, c2, target } => Step::Flip {
                controls: m(c1) | m(c2),
                target: m(target),
            },
            _ => unreachable!("checked by check_supported"),
        })
        .collect()
}

/// Depth-first walk over branch choices. `prefix` forces the choices of the
/// first `prefix_len` Hadamards (bit k of `prefix` = choice at Hadamard k).
fn walk(
    steps: &[Step],
    mut basis: usize,
    sign: i64,
    seen: usize,
    prefix: usize,
    prefix_len: usize,
    out: &mut BTreeMap<usize, i64>,
) {
    for (k, step) in steps.iter().enumerate() {
        match *step {
            Step::Flip { controls, target } => {
                if basis & controls == controls {
                    basis ^= target;
                }
            }
            Step::H(mask) => {
                let was_one = basis & mask != 0;
                let branch = |choice: bool, out: &mut BTreeMap<usize, i64>| {
                    let next = if choice { basis | mask } else { basis & !mask };
                    let s = if was_one && choice { -sign } else { sign };
                    walk(&steps[k + 1..], next, s, seen + 1, prefix, prefix_len, out);
                };
                if seen < prefix_len {
                    branch(prefix >> seen & 1 == 1, out);
                } else {
                    branch(false, out);
                    branch(true, out);
                }
                return;
            }
        }
    }
    *out.entry(basis).or_insert(0) += sign;
}

/// Enumerates all `2^h` paths of `c` from basis input `input`.
pub fn enumerate_ledger(c: &Circuit, input: usize) -> Result<PathLedger> {
    check_supported(c)?;
    let n = c.num_qubits();
    if input >> n != 0 {
        return Err(Error::validation(format!(
            "input index {input} out of range for {n} qubits"
        )));
    }
    let h = c.hadamard_count();
    if h > PATH_BUDGET {
        return Err(Error::PathBudgetExceeded {
            required: h,
            cap: PATH_BUDGET,
        });
    }
    let steps = compile(c);
    let split = h.min(SPLIT_BITS);
    let partials: Vec<BTreeMap<usize, i64>> = (0..1usize << split)
        .into_par_iter()
        .map(|prefix| {
            let mut out = BTreeMap::new();
            walk(&steps, input, 1, 0, prefix, split, &mut out);
            out
        })
        .collect();

    let mut merged: BTreeMap<usize, i64> = BTreeMap::new();
    for part in partials {
        for (z, v) in part {
            *merged.entry(z).or_insert(0) += v;
        }
    }
    let sums = merged
        .into_iter()
        .filter(|&(_, v)| v != 0)
        .map(|(z, v)| (z, BigInt::from(v)))
        .collect();
    Ok(PathLedger {
        num_qubits: n,
        hadamard_count: h,
        sums,
    })
}

/// Ledger decision on an existing ledger: accepting weight is the sum of
/// `c_z^2` over outcomes with flag = 1 and accept = 1, rejecting weight over
/// flag = 1 and accept = 0.
pub fn decide_from_ledger(
    ledger: &PathLedger,
    flag_qubit: usize,
    accept_qubit: usize,
) -> Result<LedgerDecision> {
    let n = ledger.num_qubits();
    let fm = qubit_mask(n, flag_qubit);
    let am = qubit_mask(n, accept_qubit);
    let mut accepting = BigInt::zero();
    let mut rejecting = BigInt::zero();
    for (&z, c) in ledger.sums() {
        if z & fm == 0 {
            continue;
        }
        if z & am != 0 {
            accepting += c * c;
        } else {
            rejecting += c * c;
        }
    }
    LedgerDecision::compare(accepting, rejecting)
}

/// Decides whether P(accept = 1 | flag = 1) > 1/2 by exact integer
/// comparison. Ties are reported, not accepted.
pub fn pp_decide(c: &Circuit, input: usize) -> Result<LedgerDecision> {
    c.require_flag_semantics()?;
    let ledger = enumerate_ledger(c, input)?;
    decide_from_ledger(&ledger, c.flag_qubit(), c.accept_qubit())
}

/// Decides sum over S of |amp_z|^p > sum over the complement, for even `p`,
/// by raising the exact ledger sums to the p-th power. Expanding
/// `(sum_i a_i)^p` over ordered p-tuples of paths gives the same integer;
/// the budget still caps `h * p`, the exponent of that tuple count.
pub fn p_power_decide<F>(c: &Circuit, p: u32, subset: F, input: usize) -> Result<LedgerDecision>
where
    F: Fn(usize) -> bool,
{
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::Domain(format!("p = {p} must be an even integer >= 2")));
    }
    if !c.postselections().is_empty() {
        return Err(Error::validation("p-power decision takes circuits without postselection"));
    }
    check_supported(c)?;
    let h = c.hadamard_count();
    let required = h * p as usize;
    if required > PATH_BUDGET {
        return Err(Error::PathBudgetExceeded {
            required,
            cap: PATH_BUDGET,
        });
    }
    let ledger = enumerate_ledger(c, input)?;
    let mut inside = BigInt::zero();
    let mut outside = BigInt::zero();
    for (&z, cz) in ledger.sums() {
        let w = num_traits::pow(cz.clone(), p as usize);
        if subset(z) {
            inside += w;
        } else {
            outside += w;
        }
    }
    LedgerDecision::compare(inside, outside)
}
