//! Reference dense simulator.
//!
//! Gates are applied in place by walking amplitude pairs that differ only in
//! the target bit; no 2^n x 2^n matrix is ever built. Large states split the
//! pair walk across rayon workers. Each amplitude is written exactly once per
//! gate by the same arithmetic, so results are bit-identical to a sequential
//! run. Mass sums are always taken sequentially in index order.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::state::{qubit_mask, StateVector};

/// States at least this large use the parallel kernels.
const PARALLEL_MIN_DIM: usize = 1 << 14;

/// Conditioning events with less mass than this are treated as empty.
pub const ZERO_MASS_GUARD: f64 = 1e-300;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[inline]
fn hadamard(a: &mut Complex64, b: &mut Complex64) {
    let (x, y) = (*a, *b);
    *a = (x + y) * FRAC_1_SQRT_2;
    *b = (x - y) * FRAC_1_SQRT_2;
}

#[inline]
fn apply_2x2(m: &[Complex64; 4], a: &mut Complex64, b: &mut Complex64) {
    let (x, y) = (*a, *b);
    *a = m[0] * x + m[1] * y;
    *b = m[2] * x + m[3] * y;
}

/// Calls `f(i0, &mut amp[i0], &mut amp[i0 | mask])` for every index `i0`
/// whose `mask` bit is clear.
fn for_each_pair<F>(amps: &mut [Complex64], mask: usize, f: F)
where
    F: Fn(usize, &mut Complex64, &mut Complex64) + Sync,
{
    let block = 2 * mask;
    let run_block = |b: usize, chunk: &mut [Complex64], inner_parallel: bool| {
        let base = b * block;
        let (lo, hi) = chunk.split_at_mut(mask);
        if inner_parallel {
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .enumerate()
                .for_each(|(j, (x, y))| f(base + j, x, y));
        } else {
            for (j, (x, y)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(base + j, x, y);
            }
        }
    };
    if amps.len() >= PARALLEL_MIN_DIM && rayon::current_num_threads() > 1 {
        let inner_parallel = mask >= PARALLEL_MIN_DIM / 4;
        amps.par_chunks_mut(block)
            .enumerate()
            .for_each(|(b, chunk)| run_block(b, chunk, inner_parallel));
    } else {
        for (b, chunk) in amps.chunks_mut(block).enumerate() {
            run_block(b, chunk, false);
        }
    }
}

/// Index into a gate's table from the listed qubits of basis index `i`,
/// first listed qubit most significant.
#[inline]
fn table_index(i: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0, |acc, &m| (acc << 1) | usize::from(i & m != 0))
}

fn apply_two_qubit(amps: &mut [Complex64], m1: usize, m2: usize, matrix: &[Complex64; 16]) {
    let (hi_mask, lo_mask) = if m1 > m2 { (m1, m2) } else { (m2, m1) };
    let work = |chunk: &mut [Complex64]| {
        // chunk covers 2 * hi_mask indices starting at a multiple of that
        for base in 0..hi_mask {
            if base & lo_mask != 0 {
                continue;
            }
            // local order: (q1 bit, q2 bit) = 00, 01, 10, 11
            let idx = [base, base | m2, base | m1, base | m1 | m2];
            let v = idx.map(|k| chunk[k]);
            for (r, &k) in idx.iter().enumerate() {
                chunk[k] = (0..4).map(|c| matrix[r * 4 + c] * v[c]).sum();
            }
        }
    };
    if amps.len() >= PARALLEL_MIN_DIM && rayon::current_num_threads() > 1 {
        amps.par_chunks_mut(2 * hi_mask).for_each(work);
    } else {
        amps.chunks_mut(2 * hi_mask).for_each(work);
    }
}

/// Applies one gate to raw amplitudes of an `n`-qubit register. The gate must
/// already be validated against `n`.
pub fn apply_gate_in_place(amps: &mut [Complex64], n: usize, gate: &Gate) {
    let mask = |q: usize| qubit_mask(n, q);
    match gate {
        Gate::H(q) => for_each_pair(amps, mask(*q), |_, a, b| hadamard(a, b)),
        Gate::X(q) => for_each_pair(amps, mask(*q), |_, a, b| std::mem::swap(a, b)),
        Gate::Cnot { control, target } => {
            let cm = mask(*control);
            for_each_pair(amps, mask(*target), |i, a, b| {
                if i & cm != 0 {
                    std::mem::swap(a, b)
                }
            })
        }
        Gate::Toffoli { c1, c2, target } => {
            let cm = mask(*c1) | mask(*c2);
            for_each_pair(amps, mask(*target), |i, a, b| {
                if i & cm == cm {
                    std::mem::swap(a, b)
                }
            })
        }
        Gate::Ch { control, target } => {
            let cm = mask(*control);
            for_each_pair(amps, mask(*target), |i, a, b| {
                if i & cm != 0 {
                    hadamard(a, b)
                }
            })
        }
        Gate::U1 { qubit, matrix, .. } => {
            for_each_pair(amps, mask(*qubit), |_, a, b| apply_2x2(matrix, a, b))
        }
        Gate::U2 { q1, q2, matrix, .. } => apply_two_qubit(amps, mask(*q1), mask(*q2), matrix),
        Gate::Oracle {
            inputs,
            target,
            table,
        } => {
            let masks: Vec<usize> = inputs.iter().map(|&q| mask(q)).collect();
            for_each_pair(amps, mask(*target), |i, a, b| {
                if table[table_index(i, &masks)] {
                    std::mem::swap(a, b)
                }
            })
        }
        Gate::CondH {
            controls,
            target,
            table,
        } => {
            let masks: Vec<usize> = controls.iter().map(|&q| mask(q)).collect();
            for_each_pair(amps, mask(*target), |i, a, b| {
                if table[table_index(i, &masks)] {
                    hadamard(a, b)
                }
            })
        }
    }
}

/// Applies one gate, returning the new (possibly unnormalized) state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let n = state.num_qubits();
    gate.validate(n)?;
    let mut amps = state.amplitudes().to_vec();
    apply_gate_in_place(&mut amps, n, gate);
    StateVector::from_raw(n, amps)
}

fn mass_where(amps: &[Complex64], mask: usize, bit: bool) -> f64 {
    amps.iter()
        .enumerate()
        .filter(|(i, _)| (i & mask != 0) == bit)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Projects in place onto `qubit == bit` and rescales to unit norm.
fn postselect_in_place(amps: &mut [Complex64], n: usize, qubit: usize, bit: bool) -> Result<()> {
    let mask = qubit_mask(n, qubit);
    let kept = mass_where(amps, mask, bit);
    if !(kept >= ZERO_MASS_GUARD) {
        return Err(Error::ZeroProbability);
    }
    let scale = 1.0 / kept.sqrt();
    for (i, a) in amps.iter_mut().enumerate() {
        if (i & mask != 0) == bit {
            *a *= scale;
        } else {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Conditions `state` on `qubit` reading `bit` and renormalizes.
pub fn postselect(state: &StateVector, qubit: usize, bit: bool) -> Result<StateVector> {
    let n = state.num_qubits();
    if qubit >= n {
        return Err(Error::validation(format!(
            "postselection on qubit {qubit} of a {n}-qubit state"
        )));
    }
    let mut amps = state.amplitudes().to_vec();
    postselect_in_place(&mut amps, n, qubit, bit)?;
    StateVector::from_raw(n, amps)
}

fn check_input(c: &Circuit, input: usize) -> Result<()> {
    if input >> c.num_qubits() != 0 {
        return Err(Error::validation(format!(
            "input index {input} out of range for {} qubits",
            c.num_qubits()
        )));
    }
    Ok(())
}

/// Raw amplitudes after every gate and every postselection marker.
/// Nonunitary gates are applied as plain linear maps; only postselection
/// markers rescale.
fn evolve(c: &Circuit, input: usize, skip_terminal: bool) -> Result<Vec<Complex64>> {
    check_input(c, input)?;
    let n = c.num_qubits();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[input] = Complex64::new(1.0, 0.0);
    let posts = c.postselections();
    let mut next = 0;
    for (k, gate) in c.gates().iter().enumerate() {
        while next < posts.len() && posts[next].position == k {
            postselect_in_place(&mut amps, n, posts[next].qubit, posts[next].bit)?;
            next += 1;
        }
        apply_gate_in_place(&mut amps, n, gate);
    }
    if !skip_terminal {
        for p in &posts[next..] {
            postselect_in_place(&mut amps, n, p.qubit, p.bit)?;
        }
    }
    Ok(amps)
}

/// Runs `c` on basis input |input>, applying postselections at their program
/// points, and returns the 2-normalized final state.
pub fn run_circuit(c: &Circuit, input: usize) -> Result<StateVector> {
    let amps = evolve(c, input, false)?;
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if !(norm >= ZERO_MASS_GUARD) {
        return Err(Error::ZeroProbability);
    }
    let scale = 1.0 / norm.sqrt();
    StateVector::from_raw(c.num_qubits(), amps.into_iter().map(|a| a * scale).collect())
}

/// Final state before any terminal postselection, unnormalized when the
/// circuit contains nonunitary gates.
pub fn run_unconditioned(c: &Circuit, input: usize) -> Result<StateVector> {
    StateVector::from_raw(c.num_qubits(), evolve(c, input, true)?)
}

/// P(accept = 1 | flag = 1) on the final state.
pub fn conditional_accept_prob(c: &Circuit, input: usize) -> Result<f64> {
    c.require_flag_semantics()?;
    let amps = evolve(c, input, true)?;
    let n = c.num_qubits();
    let fm = qubit_mask(n, c.flag_qubit());
    let am = qubit_mask(n, c.accept_qubit());
    let mut flagged = 0.0;
    let mut accepted = 0.0;
    for (i, a) in amps.iter().enumerate() {
        if i & fm != 0 {
            let w = a.norm_sqr();
            flagged += w;
            if i & am != 0 {
                accepted += w;
            }
        }
    }
    if !(flagged >= ZERO_MASS_GUARD) {
        return Err(Error::ZeroProbability);
    }
    Ok((accepted / flagged).clamp(0.0, 1.0))
}
