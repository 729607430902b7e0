//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use postsim::circuit::{Circuit, Gate};
use postsim::state::stream_rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 0xACCE)
}

fn distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    qs.truncate(k);
    qs
}

/// Random H / X / CNOT / Toffoli circuit with exactly `h` Hadamards.
pub fn random_restricted(rng: &mut ChaCha8Rng, n: usize, h: usize, classical: usize) -> Circuit {
    let mut kinds: Vec<u8> = std::iter::repeat_n(0, h).collect();
    for _ in 0..classical {
        kinds.push(match n {
            1 => 1,
            2 => rng.gen_range(1..=2),
            _ => rng.gen_range(1..=3),
        });
    }
    kinds.shuffle(rng);
    let mut c = Circuit::new(n).unwrap();
    for k in kinds {
        let g = match k {
            0 => Gate::H(rng.gen_range(0..n)),
            1 => Gate::X(rng.gen_range(0..n)),
            2 => {
                let q = distinct(rng, n, 2);
                Gate::Cnot { control: q[0], target: q[1] }
            }
            _ => {
                let q = distinct(rng, n, 3);
                Gate::Toffoli { c1: q[0], c2: q[1], target: q[2] }
            }
        };
        c.push(g).unwrap();
    }
    c
}

pub fn random_unitary_2x2(rng: &mut ChaCha8Rng) -> [C; 4] {
    let (t, a, b, d): (f64, f64, f64, f64) = (
        rng.gen_range(0.0..std::f64::consts::PI),
        rng.gen_range(0.0..6.3),
        rng.gen_range(0.0..6.3),
        rng.gen_range(0.0..6.3),
    );
    let (c, s) = (t.cos(), t.sin());
    let e = |x: f64| C::from_polar(1.0, x);
    [e(a) * c, -e(a + d) * s, e(b) * s, e(b + d) * c]
}

/// Kronecker product of two random 2x2 unitaries followed by a CNOT, so the
/// 4x4 map is entangling.
pub fn random_unitary_4x4(rng: &mut ChaCha8Rng) -> [C; 16] {
    let a = random_unitary_2x2(rng);
    let b = random_unitary_2x2(rng);
    let mut k = [C::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            k[r * 4 + c] = a[(r >> 1) * 2 + (c >> 1)] * b[(r & 1) * 2 + (c & 1)];
        }
    }
    let mut out = k;
    // rows 2 and 3 swapped = CNOT applied after
    for c in 0..4 {
        out[2 * 4 + c] = k[3 * 4 + c];
        out[3 * 4 + c] = k[2 * 4 + c];
    }
    out
}

/// Random gate from the full vocabulary on `n >= 3` qubits.
pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    match rng.gen_range(0..9) {
        0 => Gate::H(rng.gen_range(0..n)),
        1 => Gate::X(rng.gen_range(0..n)),
        2 => {
            let q = distinct(rng, n, 2);
            Gate::Cnot { control: q[0], target: q[1] }
        }
        3 => {
            let q = distinct(rng, n, 3);
            Gate::Toffoli { c1: q[0], c2: q[1], target: q[2] }
        }
        4 => {
            let q = distinct(rng, n, 2);
            Gate::Ch { control: q[0], target: q[1] }
        }
        5 => Gate::u1(rng.gen_range(0..n), random_unitary_2x2(rng)).unwrap(),
        6 => {
            let q = distinct(rng, n, 2);
            Gate::u2(q[0], q[1], random_unitary_4x4(rng)).unwrap()
        }
        7 => {
            let k = rng.gen_range(1..n);
            let q = distinct(rng, n, k + 1);
            let table = (0..1 << k).map(|_| rng.gen_bool(0.5)).collect();
            Gate::oracle(q[1..].to_vec(), q[0], table).unwrap()
        }
        _ => {
            let k = rng.gen_range(1..n);
            let q = distinct(rng, n, k + 1);
            let table = (0..1 << k).map(|_| rng.gen_bool(0.5)).collect();
            Gate::cond_h(q[1..].to_vec(), q[0], table).unwrap()
        }
    }
}

/// Bit of qubit `q` (qubit 0 most significant) in basis index `x`.
pub fn bit(x: usize, n: usize, q: usize) -> usize {
    (x >> (n - 1 - q)) & 1
}

fn with_bit(x: usize, n: usize, q: usize, b: usize) -> usize {
    let m = 1 << (n - 1 - q);
    if b == 1 {
        x | m
    } else {
        x & !m
    }
}

fn pattern(x: usize, n: usize, qs: &[usize]) -> usize {
    qs.iter().fold(0, |acc, &q| acc * 2 + bit(x, n, q))
}

/// Column `x` of the gate's 2^n x 2^n matrix, straight from its definition.
fn column(g: &Gate, n: usize, x: usize) -> Vec<(usize, C)> {
    let one = C::new(1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard_on = |t: usize| {
        let b = bit(x, n, t);
        vec![
            (with_bit(x, n, t, 0), C::new(h, 0.0)),
            (with_bit(x, n, t, 1), C::new(if b == 1 { -h } else { h }, 0.0)),
        ]
    };
    match g {
        Gate::H(t) => hadamard_on(*t),
        Gate::X(t) => vec![(with_bit(x, n, *t, 1 - bit(x, n, *t)), one)],
        Gate::Cnot { control, target } => {
            let b = bit(x, n, *target) ^ bit(x, n, *control);
            vec![(with_bit(x, n, *target, b), one)]
        }
        Gate::Toffoli { c1, c2, target } => {
            let b = bit(x, n, *target) ^ (bit(x, n, *c1) & bit(x, n, *c2));
            vec![(with_bit(x, n, *target, b), one)]
        }
        Gate::Ch { control, target } => {
            if bit(x, n, *control) == 1 {
                hadamard_on(*target)
            } else {
                vec![(x, one)]
            }
        }
        Gate::U1 { qubit, matrix, .. } => {
            let b = bit(x, n, *qubit);
            (0..2).map(|r| (with_bit(x, n, *qubit, r), matrix[r * 2 + b])).collect()
        }
        Gate::U2 { q1, q2, matrix, .. } => {
            let col = bit(x, n, *q1) * 2 + bit(x, n, *q2);
            (0..4)
                .map(|r| {
                    let y = with_bit(with_bit(x, n, *q1, r >> 1), n, *q2, r & 1);
                    (y, matrix[r * 4 + col])
                })
                .collect()
        }
        Gate::Oracle { inputs, target, table } => {
            let b = bit(x, n, *target) ^ usize::from(table[pattern(x, n, inputs)]);
            vec![(with_bit(x, n, *target, b), one)]
        }
        Gate::CondH { controls, target, table } => {
            if table[pattern(x, n, controls)] {
                hadamard_on(*target)
            } else {
                vec![(x, one)]
            }
        }
    }
}

/// The full 2^n x 2^n matrix, row-major.
pub fn gate_matrix(g: &Gate, n: usize) -> Vec<C> {
    let d = 1 << n;
    let mut m = vec![C::new(0.0, 0.0); d * d];
    for x in 0..d {
        for (y, v) in column(g, n, x) {
            m[y * d + x] += v;
        }
    }
    m
}

pub fn mat_vec(m: &[C], v: &[C]) -> Vec<C> {
    let d = v.len();
    (0..d).map(|r| (0..d).map(|c| m[r * d + c] * v[c]).sum()).collect()
}

/// Runs a circuit by explicit matrices, projecting and renormalizing at each
/// postselection marker.
pub fn naive_run(c: &Circuit, input: usize) -> Option<Vec<C>> {
    let n = c.num_qubits();
    let mut v = vec![C::new(0.0, 0.0); 1 << n];
    v[input] = C::new(1.0, 0.0);
    let project = |v: &mut Vec<C>, q: usize, b: bool| -> bool {
        for (x, a) in v.iter_mut().enumerate() {
            if bit(x, n, q) != usize::from(b) {
                *a = C::new(0.0, 0.0);
            }
        }
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-150 {
            return false;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        true
    };
    let posts = c.postselections();
    for (k, g) in c.gates().iter().enumerate() {
        for p in posts.iter().filter(|p| p.position == k) {
            if !project(&mut v, p.qubit, p.bit) {
                return None;
            }
        }
        v = mat_vec(&gate_matrix(g, n), &v);
    }
    for p in posts.iter().filter(|p| p.position == c.gates().len()) {
        if !project(&mut v, p.qubit, p.bit) {
            return None;
        }
    }
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    Some(v)
}

pub fn popcount(table: &[bool]) -> u64 {
    table.iter().filter(|&&b| b).count() as u64
}

/// Closed-form control state after both postselections, written from
/// (alpha s, beta (2^n - 2 s)/sqrt 2) with alpha^2 + beta^2 = 1.
pub fn phi_oracle(n: usize, s: u64, ratio: f64) -> (f64, f64) {
    let alpha = 1.0 / (1.0 + ratio * ratio).sqrt();
    let beta = ratio * alpha;
    let a0 = alpha * s as f64;
    let a1 = beta * ((1u64 << n) as f64 - 2.0 * s as f64) / 2f64.sqrt();
    let norm = a0.hypot(a1);
    (a0 / norm, a1 / norm)
}

pub fn overlap_oracle((a0, a1): (f64, f64)) -> f64 {
    ((a0 + a1) / 2f64.sqrt()).abs()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> postsim::StateVector {
    let amps: Vec<C> = (0..1 << n)
        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    postsim::StateVector::from_amplitudes(amps).unwrap().normalize().unwrap()
}

/// Random table on `n` inputs with at least one 1.
pub fn random_positive_table(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    loop {
        let t: Vec<bool> = (0..1 << n).map(|_| rng.gen_bool(0.5)).collect();
        if t.iter().any(|&b| b) {
            return t;
        }
    }
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}
