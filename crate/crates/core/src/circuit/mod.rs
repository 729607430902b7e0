//! Gate and circuit data model.
//!
//! A [`Circuit`] is an ordered gate list plus postselection markers that sit
//! at program points between gates. Postselection is conditioning, not linear
//! evolution, so it is kept out of the [`Gate`] enum.

mod amplify;
mod parse;
mod rewrite;

pub use amplify::amplify;
pub use parse::{parse_circuit, parse_truth_table, render_circuit, render_truth_table};
pub use rewrite::{complement, compose_intersection, compose_union, normalize_postselections};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Matrices with |det| at or below this are treated as singular.
pub const DET_EPSILON: f64 = 1e-12;
/// Tolerance of the U·U† = I check.
pub const UNITARY_TOLERANCE: f64 = 1e-9;
/// Largest table-driven gate fan-in and largest majority instance.
pub const MAX_TABLE_INPUTS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    Toffoli {
        c1: usize,
        c2: usize,
        target: usize,
    },
    /// Controlled Hadamard.
    Ch {
        control: usize,
        target: usize,
    },
    /// Arbitrary invertible 2x2 map, row-major.
    U1 {
        qubit: usize,
        matrix: [Complex64; 4],
        unitary: bool,
    },
    /// Arbitrary invertible 4x4 map, row-major; `q1` is the more
    /// significant local bit.
    U2 {
        q1: usize,
        q2: usize,
        matrix: [Complex64; 16],
        unitary: bool,
    },
    /// |x>|b> -> |x>|b xor table[x]>, with `inputs[0]` the most significant
    /// bit of `x`.
    Oracle {
        inputs: Vec<usize>,
        target: usize,
        table: Vec<bool>,
    },
    /// Hadamard on `target` applied only where `table[x]` holds for the
    /// control pattern `x` (same bit order as `Oracle`).
    CondH {
        controls: Vec<usize>,
        target: usize,
        table: Vec<bool>,
    },
}

impl Gate {
    pub fn u1(qubit: usize, matrix: [Complex64; 4]) -> Result<Gate> {
        check_finite(&matrix)?;
        let det = matrix[0] * matrix[3] - matrix[1] * matrix[2];
        if det.norm() <= DET_EPSILON {
            return Err(Error::validation("U1 matrix is not invertible"));
        }
        let unitary = is_unitary(&matrix, 2);
        Ok(Gate::U1 {
            qubit,
            matrix,
            unitary,
        })
    }

    pub fn u2(q1: usize, q2: usize, matrix: [Complex64; 16]) -> Result<Gate> {
        check_finite(&matrix)?;
        if determinant(&matrix, 4).norm() <= DET_EPSILON {
            return Err(Error::validation("U2 matrix is not invertible"));
        }
        let unitary = is_unitary(&matrix, 4);
        Ok(Gate::U2 {
            q1,
            q2,
            matrix,
            unitary,
        })
    }

    pub fn oracle(inputs: Vec<usize>, target: usize, table: Vec<bool>) -> Result<Gate> {
        check_table(inputs.len(), table.len())?;
        Ok(Gate::Oracle {
            inputs,
            target,
            table,
        })
    }

    pub fn cond_h(controls: Vec<usize>, target: usize, table: Vec<bool>) -> Result<Gate> {
        check_table(controls.len(), table.len())?;
        Ok(Gate::CondH {
            controls,
            target,
            table,
        })
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::U1 { qubit: q, .. } => vec![*q],
            Gate::Cnot { control, target } | Gate::Ch { control, target } => {
                vec![*control, *target]
            }
            Gate::Toffoli { c1, c2, target } => vec![*c1, *c2, *target],
            Gate::U2 { q1, q2, .. } => vec![*q1, *q2],
            Gate::Oracle { inputs, target, .. } => {
                let mut v = inputs.clone();
                v.push(*target);
                v
            }
            Gate::CondH {
                controls, target, ..
            } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
        }
    }

    pub fn is_unitary(&self) -> bool {
        match self {
            Gate::U1 { unitary, .. } | Gate::U2 { unitary, .. } => *unitary,
            _ => true,
        }
    }

    /// Gates the exact path-sum backend handles natively.
    pub fn is_path_sum_native(&self) -> bool {
        matches!(
            self,
            Gate::H(_) | Gate::X(_) | Gate::Cnot { .. } | Gate::Toffoli { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Cnot { .. } => "CNOT",
            Gate::Toffoli { .. } => "TOF",
            Gate::Ch { .. } => "CH",
            Gate::U1 { .. } => "U1",
            Gate::U2 { .. } => "U2",
            Gate::Oracle { .. } => "ORACLE",
            Gate::CondH { .. } => "CONDH",
        }
    }

    /// Same gate with every qubit index shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Gate {
        let s = |q: &usize| q + offset;
        match self {
            Gate::H(q) => Gate::H(s(q)),
            Gate::X(q) => Gate::X(s(q)),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: s(control),
                target: s(target),
            },
            Gate::Toffoli { c1, c2, target } => Gate::Toffoli {
                c1: s(c1),
                c2: s(c2),
                target: s(target),
            },
            Gate::Ch { control, target } => Gate::Ch {
                control: s(control),
                target: s(target),
            },
            Gate::U1 {
                qubit,
                matrix,
                unitary,
            } => Gate::U1 {
                qubit: s(qubit),
                matrix: *matrix,
                unitary: *unitary,
            },
            Gate::U2 {
                q1,
                q2,
                matrix,
                unitary,
            } => Gate::U2 {
                q1: s(q1),
                q2: s(q2),
                matrix: *matrix,
                unitary: *unitary,
            },
            Gate::Oracle {
                inputs,
                target,
                table,
            } => Gate::Oracle {
                inputs: inputs.iter().map(s).collect(),
                target: s(target),
                table: table.clone(),
            },
            Gate::CondH {
                controls,
                target,
                table,
            } => Gate::CondH {
                controls: controls.iter().map(s).collect(),
                target: s(target),
                table: table.clone(),
            },
        }
    }

    pub(crate) fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (k, &q) in qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::validation(format!(
                    "{} references qubit {q} but the circuit has {num_qubits} qubits",
                    self.name()
                )));
            }
            if qubits[..k].contains(&q) {
                return Err(Error::validation(format!(
                    "{} repeats qubit {q}",
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

fn check_finite(m: &[Complex64]) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation("matrix has a non-finite entry"))
    }
}

fn check_table(inputs: usize, len: usize) -> Result<()> {
    if inputs > MAX_TABLE_INPUTS {
        return Err(Error::validation(format!(
            "table gate fan-in {inputs} exceeds {MAX_TABLE_INPUTS}"
        )));
    }
    if len != 1usize << inputs {
        return Err(Error::validation(format!(
            "table has {len} entries, expected {}",
            1usize << inputs
        )));
    }
    Ok(())
}

fn is_unitary(m: &[Complex64], dim: usize) -> bool {
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += m[r * dim + k] * m[c * dim + k].conj();
            }
            let expected = if r == c { 1.0 } else { 0.0 };
            if (acc - Complex64::new(expected, 0.0)).norm() > UNITARY_TOLERANCE {
                return false;
            }
        }
    }
    true
}

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant(m: &[Complex64], dim: usize) -> Complex64 {
    let mut a = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&x, &y| a[x * dim + col].norm().total_cmp(&a[y * dim + col].norm()))
            .unwrap();
        if a[pivot * dim + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(pivot * dim + k, col * dim + k);
            }
            det = -det;
        }
        let p = a[col * dim + col];
        det *= p;
        for row in col + 1..dim {
            let factor = a[row * dim + col] / p;
            for k in col..dim {
                let v = a[col * dim + k];
                a[row * dim + k] -= factor * v;
            }
        }
    }
    det
}

/// A conditioning marker: after the first `position` gates, keep only the
/// branch where `qubit` reads `bit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Postselection {
    pub position: usize,
    pub qubit: usize,
    pub bit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    postselections: Vec<Postselection>,
    accept_qubit: usize,
    flag_qubit: usize,
}

impl Circuit {
    /// Empty circuit. Flag defaults to qubit 0 and accept to qubit 1 (or 0
    /// on a single qubit).
    pub fn new(num_qubits: usize) -> Result<Circuit> {
        if num_qubits == 0 || num_qubits > crate::state::MAX_QUBITS {
            return Err(Error::validation(format!(
                "qubit count {num_qubits} outside 1..={}",
                crate::state::MAX_QUBITS
            )));
        }
        Ok(Circuit {
            num_qubits,
            gates: Vec::new(),
            postselections: Vec::new(),
            accept_qubit: usize::from(num_qubits > 1),
            flag_qubit: 0,
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends a postselection marker after the gates pushed so far.
    pub fn postselect(&mut self, qubit: usize, bit: bool) -> Result<&mut Self> {
        self.check_qubit(qubit, "post")?;
        self.postselections.push(Postselection {
            position: self.gates.len(),
            qubit,
            bit,
        });
        Ok(self)
    }

    pub fn set_flag(&mut self, qubit: usize) -> Result<&mut Self> {
        self.check_qubit(qubit, "flag")?;
        self.flag_qubit = qubit;
        Ok(self)
    }

    pub fn set_accept(&mut self, qubit: usize) -> Result<&mut Self> {
        self.check_qubit(qubit, "accept")?;
        self.accept_qubit = qubit;
        Ok(self)
    }

    fn check_qubit(&self, qubit: usize, what: &str) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::validation(format!(
                "{what} references qubit {qubit} but the circuit has {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn postselections(&self) -> &[Postselection] {
        &self.postselections
    }

    pub fn accept_qubit(&self) -> usize {
        self.accept_qubit
    }

    pub fn flag_qubit(&self) -> usize {
        self.flag_qubit
    }

    pub fn hadamard_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::H(_))).count()
    }

    pub fn is_unitary(&self) -> bool {
        self.gates.iter().all(Gate::is_unitary)
    }

    /// Exactly one postselection, placed after the last gate, requiring the
    /// flag qubit to read 1.
    pub fn is_normal_form(&self) -> bool {
        matches!(
            self.postselections.as_slice(),
            [p] if p.position == self.gates.len() && p.qubit == self.flag_qubit && p.bit
        )
    }

    /// True when acceptance can be read as P(accept = 1 | flag = 1) on the
    /// final state: no postselection other than a terminal flag = 1 marker.
    pub fn has_flag_semantics(&self) -> bool {
        self.postselections.is_empty() || self.is_normal_form()
    }

    /// Postselections with `position < gates.len()` or not on the flag.
    pub(crate) fn require_flag_semantics(&self) -> Result<()> {
        if self.has_flag_semantics() {
            Ok(())
        } else {
            Err(Error::validation(
                "circuit is not in normal form (single terminal postselection on the flag qubit)",
            ))
        }
    }
}

/// Boolean function given by its truth table, with `s` = number of ones.
/// Table index bits are most-significant-input first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MajorityInstance {
    n: usize,
    table: Vec<bool>,
    s: u64,
}

impl MajorityInstance {
    pub fn new(n: usize, table: Vec<bool>) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_INPUTS {
            return Err(Error::validation(format!(
                "instance width {n} outside 1..={MAX_TABLE_INPUTS}"
            )));
        }
        if table.len() != 1usize << n {
            return Err(Error::validation(format!(
                "truth table has {} entries, expected {}",
                table.len(),
                1usize << n
            )));
        }
        let s = table.iter().filter(|&&b| b).count() as u64;
        Ok(Self { n, table, s })
    }

    /// Builds the table from the low `2^n` bits of `bits` (bit `x` is f(x)).
    pub fn from_index_bits(n: usize, bits: u64) -> Result<Self> {
        if n > 6 {
            return Err(Error::validation("from_index_bits supports n <= 6"));
        }
        let table = (0..1usize << n).map(|x| bits >> x & 1 == 1).collect();
        Self::new(n, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    /// Half the domain size, 2^(n-1).
    pub fn half(&self) -> u64 {
        1u64 << (self.n - 1)
    }

    /// The ground-truth answer: is s < 2^(n-1)?
    pub fn is_minority(&self) -> bool {
        self.s < self.half()
    }
}
