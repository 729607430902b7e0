//! Variant rules of quantum mechanics: invertible nonunitary gates, and
//! measurement with outcome weights |amp|^p instead of |amp|^2.
//!
//! Both can stand in for postselection. A damping gate diag(2^-q, 1)
//! followed by renormalization suppresses the unwanted branch. Under a
//! |amp|^p rule with p < 2, spreading an amplitude over 2^K ancilla strings
//! with Hadamards multiplies its total weight by 2^K * 2^(-pK/2) =
//! 2^((2-p)K/2); for p > 2 the same move shrinks it, so one suppresses the
//! complement instead.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, MajorityInstance};
use crate::dense::{apply_gate_in_place, run_circuit, ZERO_MASS_GUARD};
use crate::error::{Error, Result};
use crate::majority::{
    majority_readout_circuit, sampled_sweep, DecisionReport, Postselector, CONTROL_QUBIT,
};
use crate::state::{
    qubit_mask, sample_measurement, sample_weights, stream_rng, FantasyRule, StateVector,
};

/// Default damping / boost exponent for gadget-based postselection.
pub const DEFAULT_Q_POLY: u32 = 20;

/// Largest `q` whose 2^-q is still representable (as a subnormal f64).
pub const MAX_DAMPING_EXPONENT: u32 = 1074;

/// Largest per-event ancilla count the block simulator accepts; beyond it
/// 2^(K/2) factors leave the f64 range.
pub const MAX_BOOST_ANCILLAS: usize = 400;

/// diag(2^-q, 1) on `qubit` when keeping `bit = 1`, diag(1, 2^-q) when
/// keeping `bit = 0`.
pub fn nonunitary_postselect_gadget(qubit: usize, bit: bool, q_poly: u32) -> Result<Gate> {
    if q_poly == 0 || q_poly > MAX_DAMPING_EXPONENT {
        return Err(Error::Domain(format!(
            "damping exponent must be in 1..={MAX_DAMPING_EXPONENT}, got {q_poly}"
        )));
    }
    let damp = Complex64::new(2f64.powi(-(q_poly as i32)), 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let matrix = if bit {
        [damp, zero, zero, one]
    } else {
        [one, zero, zero, damp]
    };
    // Built directly: the determinant 2^-q is tiny but nonzero.
    Ok(Gate::U1 {
        qubit,
        matrix,
        unitary: false,
    })
}

/// Replaces every postselection marker by the damping gadget at the same
/// program point. The result has no markers; renormalizing its output
/// approximates the postselected state.
pub fn replace_postselections_nonunitary(c: &Circuit, q_poly: u32) -> Result<Circuit> {
    let mut out = Circuit::new(c.num_qubits())?;
    let posts = c.postselections();
    let mut next = 0;
    let flush = |out: &mut Circuit, upto: usize, next: &mut usize| -> Result<()> {
        while *next < posts.len() && posts[*next].position <= upto {
            let p = posts[*next];
            out.push(nonunitary_postselect_gadget(p.qubit, p.bit, q_poly)?)?;
            *next += 1;
        }
        Ok(())
    };
    for (k, g) in c.gates().iter().enumerate() {
        flush(&mut out, k, &mut next)?;
        out.push(g.clone())?;
    }
    flush(&mut out, c.gates().len(), &mut next)?;
    out.set_flag(c.flag_qubit())?.set_accept(c.accept_qubit())?;
    Ok(out)
}

/// K = ceil(2 q / |2 - p|).
pub fn boost_ancilla_count(rule: FantasyRule, q_poly: u32) -> Result<usize> {
    let gap = (2.0 - rule.p()).abs();
    if gap == 0.0 {
        return Err(Error::Domain("the mass-boost gadget needs p != 2".into()));
    }
    let k = (2.0 * f64::from(q_poly) / gap).ceil();
    if k > MAX_BOOST_ANCILLAS as f64 {
        return Err(Error::Domain(format!(
            "p = {} needs {k} ancillas per event, more than {MAX_BOOST_ANCILLAS}",
            rule.p()
        )));
    }
    Ok(k as usize)
}

/// p < 2 boosts the chosen states themselves; p > 2 shrinks the rest.
fn targets_complement(rule: FantasyRule) -> Result<bool> {
    if rule.is_born() {
        return Err(Error::Domain("the mass-boost gadget needs p != 2".into()));
    }
    Ok(rule.p() > 2.0)
}

/// Multiplier 2^((2-p)K/2) on the p-mass of the Hadamard-spread states.
pub fn boost_factor(rule: FantasyRule, k: usize) -> f64 {
    2f64.powf((2.0 - rule.p()) * k as f64 / 2.0)
}

fn boost_gates(n: usize, first_ancilla: usize, k: usize, table: &[bool]) -> Result<Vec<Gate>> {
    let controls: Vec<usize> = (0..n).collect();
    (first_ancilla..first_ancilla + k)
        .map(|a| Gate::cond_h(controls.clone(), a, table.to_vec()))
        .collect()
}

fn target_table<F: Fn(usize) -> bool>(n: usize, subset: F, complement: bool) -> Vec<bool> {
    (0..1usize << n).map(|z| subset(z) != complement).collect()
}

/// `c` followed by `k` fresh ancillas, each Hadamarded where the original
/// register lies in the targeted set (`subset` for p < 2, its complement
/// for p > 2). `subset` reads indices of the original register.
pub fn mass_boost_with_ancillas<F>(c: &Circuit, subset: F, rule: FantasyRule, k: usize) -> Result<Circuit>
where
    F: Fn(usize) -> bool,
{
    let complement = targets_complement(rule)?;
    let n = c.num_qubits();
    let mut out = Circuit::new(n + k)?;
    let posts = c.postselections();
    let mut next = 0;
    for (pos, g) in c.gates().iter().enumerate() {
        while next < posts.len() && posts[next].position == pos {
            out.postselect(posts[next].qubit, posts[next].bit)?;
            next += 1;
        }
        out.push(g.clone())?;
    }
    let table = target_table(n, subset, complement);
    for g in boost_gates(n, n, k, &table)? {
        out.push(g)?;
    }
    for p in &posts[next..] {
        out.postselect(p.qubit, p.bit)?;
    }
    out.set_flag(c.flag_qubit())?.set_accept(c.accept_qubit())?;
    Ok(out)
}

/// [`mass_boost_with_ancillas`] with K = ceil(2 q / |2 - p|).
pub fn mass_boost_gadget<F>(c: &Circuit, subset: F, rule: FantasyRule, q_poly: u32) -> Result<Circuit>
where
    F: Fn(usize) -> bool,
{
    let k = boost_ancilla_count(rule, q_poly)?;
    mass_boost_with_ancillas(c, subset, rule, k)
}

/// The gadget applied to a prepared state: `state` tensored with |0^k>,
/// then the conditional Hadamards.
pub fn apply_mass_boost<F>(state: &StateVector, subset: F, rule: FantasyRule, k: usize) -> Result<StateVector>
where
    F: Fn(usize) -> bool,
{
    let complement = targets_complement(rule)?;
    let n = state.num_qubits();
    if k == 0 {
        return Ok(state.clone());
    }
    let width = n + k;
    let mut amps = state.tensor(&StateVector::zero(k)?)?.into_amplitudes();
    let table = target_table(n, subset, complement);
    for g in boost_gates(n, n, k, &table)? {
        apply_gate_in_place(&mut amps, width, &g);
    }
    StateVector::from_amplitudes(amps)
}

/// Postselection markers grouped by program point; each group is one boost
/// event whose success predicate is the conjunction of its markers.
#[derive(Clone, Debug)]
struct BoostEvent {
    position: usize,
    mask: usize,
    want: usize,
}

impl BoostEvent {
    fn succeeds(&self, z: usize) -> bool {
        z & self.mask == self.want
    }
}

fn boost_events(c: &Circuit) -> Vec<BoostEvent> {
    let n = c.num_qubits();
    let mut events: Vec<BoostEvent> = Vec::new();
    for p in c.postselections() {
        let m = qubit_mask(n, p.qubit);
        let bit = if p.bit { m } else { 0 };
        match events.last_mut() {
            Some(e) if e.position == p.position => {
                e.mask |= m;
                e.want |= bit;
            }
            _ => events.push(BoostEvent {
                position: p.position,
                mask: m,
                want: bit,
            }),
        }
    }
    events
}

/// Largest number of boost events [`boosted_outcome_weights`] handles.
pub const MAX_BOOST_EVENTS: usize = 8;

/// Replaces each postselection event by `k` conditional-Hadamard ancillas
/// and returns the explicit dense circuit. Only practical for small `k`;
/// ancillas of event j occupy qubits `n + j k .. n + (j + 1) k`.
pub fn replace_postselections_with_boost(c: &Circuit, rule: FantasyRule, k: usize) -> Result<Circuit> {
    let complement = targets_complement(rule)?;
    let n = c.num_qubits();
    let events = boost_events(c);
    let mut out = Circuit::new(n + events.len() * k)?;
    let push_event = |out: &mut Circuit, j: usize| -> Result<()> {
        let e = &events[j];
        let table: Vec<bool> = (0..1usize << n).map(|z| e.succeeds(z) != complement).collect();
        for g in boost_gates(n, n + j * k, k, &table)? {
            out.push(g)?;
        }
        Ok(())
    };
    let mut next = 0;
    for (pos, g) in c.gates().iter().enumerate() {
        while next < events.len() && events[next].position == pos {
            push_event(&mut out, next)?;
            next += 1;
        }
        out.push(g.clone())?;
    }
    while next < events.len() {
        push_event(&mut out, next)?;
        next += 1;
    }
    out.set_flag(c.flag_qubit())?.set_accept(c.accept_qubit())?;
    Ok(out)
}

/// Exact outcome weights of [`replace_postselections_with_boost`] under
/// `rule` without materializing the ancillas.
///
/// The joint state is kept as one base-register vector v_b per set b of
/// events whose Hadamard layer fired. At the end, an outcome is a base index
/// z together with the set N of ancilla blocks that read a nonzero string;
/// its amplitude is sum over b ⊇ N of v_b(z) 2^(-K|b|/2), shared by
/// (2^K - 1)^|N| ancilla strings. The returned vector is indexed by
/// `N * 2^n + z` and holds the total weight of that class.
pub fn boosted_outcome_weights(c: &Circuit, rule: FantasyRule, k: usize) -> Result<Vec<f64>> {
    let complement = targets_complement(rule)?;
    if k > MAX_BOOST_ANCILLAS {
        return Err(Error::Domain(format!(
            "{k} ancillas per event exceeds {MAX_BOOST_ANCILLAS}"
        )));
    }
    let n = c.num_qubits();
    let dim = 1usize << n;
    let events = boost_events(c);
    if events.len() > MAX_BOOST_EVENTS {
        return Err(Error::validation(format!(
            "{} postselection events exceed the limit of {MAX_BOOST_EVENTS}",
            events.len()
        )));
    }
    let sets = 1usize << events.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut comps = vec![vec![zero; dim]; sets];
    comps[0][0] = Complex64::new(1.0, 0.0);

    let fire = |comps: &mut Vec<Vec<Complex64>>, j: usize| {
        let e = &events[j];
        let bit = 1usize << j;
        for b in 0..sets {
            if b & bit != 0 || b >> j != 0 {
                // only sets of earlier events can be populated
                continue;
            }
            let (lo, hi) = comps.split_at_mut(b | bit);
            for (z, (src, dst)) in lo[b].iter_mut().zip(hi[0].iter_mut()).enumerate() {
                if e.succeeds(z) != complement {
                    *dst = std::mem::replace(src, zero);
                }
            }
        }
    };

    let mut next = 0;
    for (pos, g) in c.gates().iter().enumerate() {
        while next < events.len() && events[next].position == pos {
            fire(&mut comps, next);
            next += 1;
        }
        for (b, v) in comps.iter_mut().enumerate() {
            if b >> next == 0 {
                apply_gate_in_place(v, n, g);
            }
        }
    }
    while next < events.len() {
        fire(&mut comps, next);
        next += 1;
    }

    let spread: Vec<f64> = (0..sets)
        .map(|b| 2f64.powf(-(k as f64) * b.count_ones() as f64 / 2.0))
        .collect();
    let strings = 2f64.powi(k as i32) - 1.0;
    let mut weights = vec![0.0; sets * dim];
    for nset in 0..sets {
        let count = strings.powi(nset.count_ones() as i32);
        if count == 0.0 {
            continue;
        }
        for z in 0..dim {
            let mut amp = zero;
            for b in 0..sets {
                if b & nset == nset {
                    amp += comps[b][z] * spread[b];
                }
            }
            weights[nset * dim + z] = count * rule.weight(amp);
        }
    }
    if !(weights.iter().sum::<f64>() >= ZERO_MASS_GUARD) {
        return Err(Error::ZeroMass);
    }
    Ok(weights)
}

/// Runs a unitary, marker-free circuit from |0...0> and draws one outcome
/// under `rule`.
pub fn run_bqp_p(c: &Circuit, rule: FantasyRule, seed: u64) -> Result<usize> {
    if !c.postselections().is_empty() {
        return Err(Error::validation("run_bqp_p does not accept postselection markers"));
    }
    if let Some(g) = c.gates().iter().find(|g| !g.is_unitary()) {
        return Err(Error::validation(format!(
            "run_bqp_p needs unitary gates, found a nonunitary {}",
            g.name()
        )));
    }
    let state = run_circuit(c, 0)?;
    sample_measurement(&state, rule, seed)
}

/// Outcome counts of `reps` seeded runs of [`run_bqp_p`]; the final state is
/// computed once and run `r` draws from stream `r` of `seed`.
pub fn bqp_p_histogram(c: &Circuit, rule: FantasyRule, reps: u32, seed: u64) -> Result<Vec<u64>> {
    run_bqp_p(c, rule, seed)?;
    let state = run_circuit(c, 0)?;
    let weights: Vec<f64> = state.amplitudes().iter().map(|&a| rule.weight(a)).collect();
    let mut counts = vec![0u64; weights.len()];
    for r in 0..reps {
        let mut rng = stream_rng(seed, u64::from(r));
        counts[sample_weights(&weights, &mut rng)?] += 1;
    }
    Ok(counts)
}

/// The sampled majority decider with every postselection event replaced by
/// a mass-boost gadget of K = ceil(2 q / |2 - p|) ancillas, read out under
/// the |amp|^p rule.
pub fn majority_via_bqp_p(
    inst: &MajorityInstance,
    rule: FantasyRule,
    reps: u32,
    seed: u64,
    q_poly: u32,
) -> Result<DecisionReport> {
    let k = boost_ancilla_count(rule, q_poly)?;
    let width = inst.n() + 2;
    let dim = 1usize << width;
    let ctrl = qubit_mask(width, CONTROL_QUBIT);
    let mut report = sampled_sweep(
        inst,
        reps,
        seed,
        |i| boosted_outcome_weights(&majority_readout_circuit(inst, i)?, rule, k),
        |idx| (idx % dim) & ctrl == 0,
    )?;
    report.rule_p = Some(rule.p());
    report.postselector = Some(Postselector::MassBoost);
    report.q_poly = Some(q_poly);
    report.ancillas_per_event = Some(k);
    Ok(report)
}

/// The sampled majority decider with postselections replaced by damping
/// gadgets, under the standard rule.
pub fn majority_via_nonunitary(
    inst: &MajorityInstance,
    reps: u32,
    seed: u64,
    q_poly: u32,
) -> Result<DecisionReport> {
    let width = inst.n() + 2;
    let ctrl = qubit_mask(width, CONTROL_QUBIT);
    let born = FantasyRule::born();
    let mut report = sampled_sweep(
        inst,
        reps,
        seed,
        |i| {
            let c = replace_postselections_nonunitary(&majority_readout_circuit(inst, i)?, q_poly)?;
            let out = run_circuit(&c, 0)?;
            Ok(out.amplitudes().iter().map(|&a| born.weight(a)).collect())
        },
        |z| z & ctrl == 0,
    )?;
    report.rule_p = Some(2.0);
    report.postselector = Some(Postselector::Nonunitary);
    report.q_poly = Some(q_poly);
    Ok(report)
}
