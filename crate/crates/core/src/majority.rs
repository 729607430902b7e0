//! Deciding s < 2^(n-1) for a Boolean function with postselection.
//!
//! The construction: Hadamard the input register, write f into a function
//! qubit, Hadamard the register again and postselect it on all zeros. The
//! function qubit is then proportional to (2^n - s)|0> + s|1>. A control
//! qubit prepared as a|0> + b|1> switches a Hadamard onto the function
//! qubit, and postselecting the function qubit on |1> leaves the control in
//!
//! ```text
//! phi_r ∝ s|0> + r (2^n - 2s)/sqrt(2) |1>,      r = b/a.
//! ```
//!
//! When 1 <= s < 2^(n-1) both components are positive and sweeping
//! r = 2^i, i in [-n, n], brings phi_r within angle 9.74° of |+>, so some
//! overlap is at least (1 + sqrt 2)/sqrt 6 > 0.985. When s >= 2^(n-1) the
//! second component is never positive and every overlap stays at or below
//! 1/sqrt 2.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Circuit, Gate, MajorityInstance};
use crate::dense::run_circuit;
use crate::error::{Error, Result};
use crate::state::{overlap_plus, qubit_mask, sample_with_rng, stream_rng, FantasyRule, StateVector};

/// Analytic and circuit modes declare s < 2^(n-1) when the best overlap
/// reaches this; it sits between 1/sqrt 2 and (1 + sqrt 2)/sqrt 6.
pub const DECISION_THRESHOLD: f64 = 0.85;

/// Sampled modes call `i` a witness when at least this fraction of runs
/// land on |+>.
pub const WITNESS_THRESHOLD: f64 = 0.75;

/// (1 + sqrt 2)/sqrt 6, the worst-case best overlap when s < 2^(n-1).
pub fn worst_case_overlap() -> f64 {
    (1.0 + 2f64.sqrt()) / 6f64.sqrt()
}

/// Qubit roles in the circuit built by [`build_majority_circuit`].
pub const CONTROL_QUBIT: usize = 0;
pub const FUNCTION_QUBIT: usize = 1;
pub const FIRST_INPUT_QUBIT: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionMode {
    Analytic,
    Circuit,
    Sampled,
}

impl DecisionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecisionMode::Analytic => "analytic",
            DecisionMode::Circuit => "circuit",
            DecisionMode::Sampled => "sampled",
        }
    }
}

/// How postselection was realized in a sampled run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Postselector {
    /// Projection and renormalization.
    Exact,
    /// diag(2^-q, 1) style damping followed by renormalization.
    Nonunitary,
    /// Conditional Hadamards on fresh ancillas under a |psi|^p rule.
    MassBoost,
}

impl Postselector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Postselector::Exact => "exact",
            Postselector::Nonunitary => "nonunitary",
            Postselector::MassBoost => "mass-boost",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecisionReport {
    pub n: usize,
    pub s_true: u64,
    /// i -> |<+|phi_{2^i}>| (analytic and circuit modes).
    pub overlaps: BTreeMap<i32, f64>,
    /// i -> fraction of runs measured as |+> (sampled modes).
    pub plus_fractions: BTreeMap<i32, f64>,
    /// true when the decider concluded s < 2^(n-1).
    pub verdict: bool,
    pub mode: DecisionMode,
    pub repetitions: Option<u32>,
    pub seed: Option<u64>,
    /// Measurement exponent of sampled runs (2 is the Born rule).
    pub rule_p: Option<f64>,
    pub postselector: Option<Postselector>,
    pub q_poly: Option<u32>,
    /// Ancillas per postselection event for mass-boost runs.
    pub ancillas_per_event: Option<usize>,
}

impl DecisionReport {
    fn new(inst: &MajorityInstance, mode: DecisionMode) -> Self {
        Self {
            n: inst.n(),
            s_true: inst.s(),
            overlaps: BTreeMap::new(),
            plus_fractions: BTreeMap::new(),
            verdict: false,
            mode,
            repetitions: None,
            seed: None,
            rule_p: None,
            postselector: None,
            q_poly: None,
            ancillas_per_event: None,
        }
    }

    pub fn max_overlap(&self) -> Option<f64> {
        self.overlaps.values().copied().reduce(f64::max)
    }

    /// Whether the verdict matches the ground truth s < 2^(n-1).
    pub fn is_correct(&self) -> bool {
        self.verdict == (self.s_true < 1u64 << (self.n - 1))
    }

    /// Flat `key = value` block; floats use six significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "s_true = {}", self.s_true);
        let _ = writeln!(out, "threshold = {}", 1u64 << (self.n - 1));
        let _ = writeln!(out, "mode = {}", self.mode.as_str());
        if let Some(p) = self.rule_p {
            let _ = writeln!(out, "rule_p = {}", fmt_sig6(p));
        }
        if let Some(ps) = self.postselector {
            let _ = writeln!(out, "postselector = {}", ps.as_str());
        }
        if let Some(q) = self.q_poly {
            let _ = writeln!(out, "q_poly = {q}");
        }
        if let Some(k) = self.ancillas_per_event {
            let _ = writeln!(out, "ancillas_per_event = {k}");
        }
        if let Some(r) = self.repetitions {
            let _ = writeln!(out, "repetitions = {r}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed = {s}");
        }
        for (i, v) in &self.overlaps {
            let _ = writeln!(out, "overlap[{i}] = {}", fmt_sig6(*v));
        }
        if let Some(m) = self.max_overlap() {
            let _ = writeln!(out, "max_overlap = {}", fmt_sig6(m));
        }
        for (i, v) in &self.plus_fractions {
            let _ = writeln!(out, "plus_fraction[{i}] = {}", fmt_sig6(*v));
        }
        let _ = writeln!(out, "verdict = {}", if self.verdict { "s < 2^(n-1)" } else { "s >= 2^(n-1)" });
        let _ = writeln!(out, "minority = {}", self.verdict);
        out
    }

    /// `i,overlap` rows (or `i,plus_fraction` for sampled reports).
    pub fn to_csv(&self) -> String {
        let (header, rows) = if self.mode == DecisionMode::Sampled {
            ("i,plus_fraction", &self.plus_fractions)
        } else {
            ("i,overlap", &self.overlaps)
        };
        let mut out = format!("{header}\n");
        for (i, v) in rows {
            let _ = writeln!(out, "{i},{}", fmt_sig6(*v));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Six significant digits, fixed notation for magnitudes in [1e-5, 1e6).
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        let decimals = (5 - e) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit, e.g. 9.999996 -> 10.00000
        let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
        let leading_zeros = if e < 0 { (-e) as usize } else { 0 };
        if digits > 6 + leading_zeros && decimals > 0 {
            let decimals = decimals - 1;
            return format!("{x:.decimals$}");
        }
        s
    } else {
        format!("{x:.5e}")
    }
}

/// Widens f to n + 1 bits so the count becomes positive while the answer is
/// unchanged: g(0x) = f(x), g(1x) = 1 exactly when the leading bit of x is
/// 0. Then s_g = s + 2^(n-1), and s_g < 2^n iff s < 2^(n-1).
pub fn pad_instance(inst: &MajorityInstance) -> MajorityInstance {
    let n = inst.n();
    let half = 1usize << (n - 1);
    let mut table = inst.table().to_vec();
    table.extend((0..1usize << n).map(|x| x < half));
    MajorityInstance::new(n + 1, table).expect("padded width is valid")
}

/// ((2^n - s)|0> + s|1>) / sqrt((2^n - s)^2 + s^2).
pub fn psi_state(inst: &MajorityInstance) -> StateVector {
    let size = (1u64 << inst.n()) as f64;
    let s = inst.s() as f64;
    let a0 = size - s;
    let norm = (a0 * a0 + s * s).sqrt();
    StateVector::from_real(&[a0 / norm, s / norm]).expect("two amplitudes")
}

/// The control-qubit state after both postselections, for b/a = `ratio`,
/// with a^2 + b^2 = 1.
pub fn phi_state(inst: &MajorityInstance, ratio: f64) -> Result<StateVector> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!("ratio must be positive and finite, got {ratio}")));
    }
    let (alpha, beta) = alpha_beta(ratio);
    let size = (1u64 << inst.n()) as f64;
    let s = inst.s() as f64;
    let a0 = alpha * s;
    let a1 = beta * std::f64::consts::FRAC_1_SQRT_2 * (size - 2.0 * s);
    let norm = (a0 * a0 + a1 * a1).sqrt();
    if norm == 0.0 {
        // s = 0 and 2^n = 2s cannot hold together
        return Err(Error::ZeroProbability);
    }
    StateVector::from_real(&[a0 / norm, a1 / norm])
}

fn alpha_beta(ratio: f64) -> (f64, f64) {
    // a = cos(t), b = sin(t) with tan(t) = ratio; stable for huge ratios
    let t = ratio.atan();
    (t.cos(), t.sin())
}

/// The sweep range [-n, n].
pub fn exponent_range(n: usize) -> std::ops::RangeInclusive<i32> {
    -(n as i32)..=(n as i32)
}

fn ratio_for(i: i32) -> f64 {
    2f64.powi(i)
}

fn require_positive(inst: &MajorityInstance) -> Result<()> {
    if inst.s() == 0 {
        return Err(Error::PreconditionViolated(
            "instance has s = 0; pad it first".into(),
        ));
    }
    Ok(())
}

/// Sweeps b/a = 2^i over i in [-n, n] with the closed-form phi state.
pub fn decide_majority_analytic(inst: &MajorityInstance) -> Result<DecisionReport> {
    require_positive(inst)?;
    let mut report = DecisionReport::new(inst, DecisionMode::Analytic);
    for i in exponent_range(inst.n()) {
        let phi = phi_state(inst, ratio_for(i))?;
        report.overlaps.insert(i, overlap_plus(&phi)?);
    }
    report.verdict = report.max_overlap().unwrap_or(0.0) >= DECISION_THRESHOLD;
    Ok(report)
}

/// Circuit on n + 2 qubits: control (qubit 0), function qubit (1), inputs
/// (2..n+2). The control is the accept qubit and the function qubit the
/// flag; the circuit stops before any read-out basis change.
pub fn build_majority_circuit(inst: &MajorityInstance, i: i32) -> Result<Circuit> {
    require_positive(inst)?;
    let n = inst.n();
    if i.unsigned_abs() as usize > n {
        return Err(Error::PreconditionViolated(format!("|i| = {} exceeds n = {n}", i.abs())));
    }
    let inputs: Vec<usize> = (FIRST_INPUT_QUBIT..FIRST_INPUT_QUBIT + n).collect();
    let mut c = Circuit::new(n + 2)?;
    for &q in &inputs {
        c.push(Gate::H(q))?;
    }
    c.push(Gate::oracle(inputs.clone(), FUNCTION_QUBIT, inst.table().to_vec())?)?;
    for &q in &inputs {
        c.push(Gate::H(q))?;
    }
    for &q in &inputs {
        c.postselect(q, false)?;
    }
    let (alpha, beta) = alpha_beta(ratio_for(i));
    let re = |x: f64| Complex64::new(x, 0.0);
    c.push(Gate::u1(CONTROL_QUBIT, [re(alpha), re(-beta), re(beta), re(alpha)])?)?;
    c.push(Gate::Ch {
        control: CONTROL_QUBIT,
        target: FUNCTION_QUBIT,
    })?;
    c.postselect(FUNCTION_QUBIT, true)?;
    c.set_flag(FUNCTION_QUBIT)?.set_accept(CONTROL_QUBIT)?;
    Ok(c)
}

/// Reduced control-qubit state of a postselected majority-circuit output
/// (function qubit 1, inputs 0).
pub fn control_qubit_state(state: &StateVector) -> Result<StateVector> {
    let n = state.num_qubits();
    let func = qubit_mask(n, FUNCTION_QUBIT);
    let ctrl = qubit_mask(n, CONTROL_QUBIT);
    let a = state.amplitudes();
    let a0 = a[func];
    let a1 = a[func | ctrl];
    let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroProbability);
    }
    StateVector::from_amplitudes(vec![a0 / norm, a1 / norm])
}

/// Circuit mode: dense simulation of every swept circuit.
pub fn decide_majority_circuit(inst: &MajorityInstance) -> Result<DecisionReport> {
    require_positive(inst)?;
    let mut report = DecisionReport::new(inst, DecisionMode::Circuit);
    let rows: Vec<(i32, f64)> = exponent_range(inst.n())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let out = run_circuit(&build_majority_circuit(inst, i)?, 0)?;
            Ok((i, overlap_plus(&control_qubit_state(&out)?)?))
        })
        .collect::<Result<_>>()?;
    report.overlaps.extend(rows);
    report.verdict = report.max_overlap().unwrap_or(0.0) >= DECISION_THRESHOLD;
    Ok(report)
}

/// Independent PRNG stream for repetition `rep` at sweep exponent `i`.
pub(crate) fn stream_id(i: i32, rep: u32) -> u64 {
    ((i as i64 + (1 << 20)) as u64) << 32 | u64::from(rep)
}

/// Runs `reps` seeded draws per exponent from `weights_for(i)` and applies
/// the witness rule. `is_plus(z)` reads the control outcome.
pub(crate) fn sampled_sweep<W, P>(
    inst: &MajorityInstance,
    reps: u32,
    seed: u64,
    weights_for: W,
    is_plus: P,
) -> Result<DecisionReport>
where
    W: Fn(i32) -> Result<Vec<f64>> + Sync,
    P: Fn(usize) -> bool + Sync,
{
    require_positive(inst)?;
    if reps == 0 {
        return Err(Error::PreconditionViolated("reps_per_i must be at least 1".into()));
    }
    let rows: Vec<(i32, f64)> = exponent_range(inst.n())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let weights = weights_for(i)?;
            let mut plus = 0u32;
            for rep in 0..reps {
                let mut rng = stream_rng(seed, stream_id(i, rep));
                let z = crate::state::sample_weights(&weights, &mut rng)?;
                plus += u32::from(is_plus(z));
            }
            Ok((i, f64::from(plus) / f64::from(reps)))
        })
        .collect::<Result<_>>()?;
    let mut report = DecisionReport::new(inst, DecisionMode::Sampled);
    report.plus_fractions.extend(rows);
    report.verdict = report
        .plus_fractions
        .values()
        .any(|&f| f >= WITNESS_THRESHOLD);
    report.repetitions = Some(reps);
    report.seed = Some(seed);
    Ok(report)
}

/// The swept circuit followed by a Hadamard on the control, so a standard
/// measurement of the control reads the {|+>, |->} basis.
pub fn majority_readout_circuit(inst: &MajorityInstance, i: i32) -> Result<Circuit> {
    let mut c = build_majority_circuit(inst, i)?;
    c.push(Gate::H(CONTROL_QUBIT))?;
    Ok(c)
}

/// Sampled mode: per exponent, `reps` end-to-end runs with exact
/// postselection and a Born-rule read-out of the control in the +/- basis.
/// The postselected state is computed once per exponent and each run draws
/// from it with its own seeded stream.
pub fn decide_majority_sampled(inst: &MajorityInstance, reps: u32, seed: u64) -> Result<DecisionReport> {
    let width = inst.n() + 2;
    let ctrl = qubit_mask(width, CONTROL_QUBIT);
    let born = FantasyRule::born();
    let mut report = sampled_sweep(
        inst,
        reps,
        seed,
        |i| {
            let out = run_circuit(&majority_readout_circuit(inst, i)?, 0)?;
            Ok(out.amplitudes().iter().map(|&a| born.weight(a)).collect())
        },
        |z| z & ctrl == 0,
    )?;
    report.rule_p = Some(2.0);
    report.postselector = Some(Postselector::Exact);
    Ok(report)
}

/// Single draw from a prepared state under `rule` with the stream for
/// (`seed`, `i`, `rep`).
pub fn sample_run(state: &StateVector, rule: FantasyRule, seed: u64, i: i32, rep: u32) -> Result<usize> {
    let mut rng = stream_rng(seed, stream_id(i, rep));
    sample_with_rng(state, rule, &mut rng)
}

/// Probability that the input register reads all zeros after the
/// Hadamard / oracle / Hadamard stage, by dense simulation without
/// postselection.
pub fn first_register_zero_probability(inst: &MajorityInstance) -> Result<f64> {
    let n = inst.n();
    let inputs: Vec<usize> = (1..=n).collect();
    let mut c = Circuit::new(n + 1)?;
    for &q in &inputs {
        c.push(Gate::H(q))?;
    }
    c.push(Gate::oracle(inputs.clone(), 0, inst.table().to_vec())?)?;
    for &q in &inputs {
        c.push(Gate::H(q))?;
    }
    let out = run_circuit(&c, 0)?;
    let register = (1usize << n) - 1;
    Ok(out
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(z, _)| z & register == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// One row of the overlap-trajectory data: (i, 2^i, amp0, amp1, overlap).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub i: i32,
    pub ratio: f64,
    pub amp0: f64,
    pub amp1: f64,
    pub overlap: f64,
}

pub fn phi_trajectory(inst: &MajorityInstance) -> Result<Vec<TrajectoryRow>> {
    exponent_range(inst.n())
        .map(|i| {
            let ratio = ratio_for(i);
            let phi = phi_state(inst, ratio)?;
            Ok(TrajectoryRow {
                i,
                ratio,
                amp0: phi.amplitudes()[0].re,
                amp1: phi.amplitudes()[1].re,
                overlap: overlap_plus(&phi)?,
            })
        })
        .collect()
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("i,ratio,amp0,amp1,overlap\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.i,
            fmt_sig6(r.ratio),
            fmt_sig6(r.amp0),
            fmt_sig6(r.amp1),
            fmt_sig6(r.overlap)
        );
    }
    out
}
