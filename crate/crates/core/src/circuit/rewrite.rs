//! Circuit rewrites: deferring postselection to a single flag, and the
//! intersection / union / complement combinators on postselected circuits.

use super::{Circuit, Gate};
use crate::error::{Error, Result};

/// Rewrites intermediate postselections into one terminal postselection.
///
/// Each postselected qubit is copied by CNOT into a fresh ancilla at its
/// program point (with an X when the required bit is 0, so the ancilla
/// reads 1 on success). A Toffoli chain then ANDs the ancillas into a
/// result qubit that becomes the flag, and the circuit ends with
/// `post flag = 1`. Ancillas are appended after the original qubits, so
/// original qubit indices are unchanged. The AND is not uncomputed.
///
/// A circuit already in normal form is returned unchanged; a circuit with no
/// postselections gets a fresh flag qubit set to 1.
pub fn normalize_postselections(c: &Circuit) -> Result<Circuit> {
    if c.is_normal_form() {
        return Ok(c.clone());
    }
    let n = c.num_qubits();
    let posts = c.postselections();
    let m = posts.len();

    if m == 0 {
        let mut out = Circuit::new(n + 1)?;
        for g in c.gates() {
            out.push(g.clone())?;
        }
        out.push(Gate::X(n))?;
        out.postselect(n, true)?;
        out.set_flag(n)?.set_accept(c.accept_qubit())?;
        return Ok(out);
    }

    let workspace = if m == 1 { 1 } else { m - 1 };
    let mut out = Circuit::new(n + m + workspace)?;
    let copy_into_ancilla = |out: &mut Circuit, j: usize| -> Result<()> {
        let p = posts[j];
        out.push(Gate::Cnot {
            control: p.qubit,
            target: n + j,
        })?;
        if !p.bit {
            out.push(Gate::X(n + j))?;
        }
        Ok(())
    };

    let mut next = 0;
    for (k, g) in c.gates().iter().enumerate() {
        while next < m && posts[next].position == k {
            copy_into_ancilla(&mut out, next)?;
            next += 1;
        }
        out.push(g.clone())?;
    }
    while next < m {
        copy_into_ancilla(&mut out, next)?;
        next += 1;
    }

    let first_work = n + m;
    let result = if m == 1 {
        out.push(Gate::Cnot {
            control: n,
            target: first_work,
        })?;
        first_work
    } else {
        out.push(Gate::Toffoli {
            c1: n,
            c2: n + 1,
            target: first_work,
        })?;
        for j in 2..m {
            out.push(Gate::Toffoli {
                c1: first_work + j - 2,
                c2: n + j,
                target: first_work + j - 1,
            })?;
        }
        first_work + m - 2
    };
    out.postselect(result, true)?;
    out.set_flag(result)?.set_accept(c.accept_qubit())?;
    Ok(out)
}

fn require_normal(c: &Circuit, which: &str) -> Result<()> {
    c.require_flag_semantics()
        .map_err(|_| Error::validation(format!("{which} circuit is not in normal form")))
}

/// Runs both circuits on disjoint registers; the new flag is the AND of the
/// two flags and the new accept qubit is the AND of the two accept qubits.
/// Layout: `c1`'s qubits, then `c2`'s, then the flag, then the accept qubit.
pub fn compose_intersection(c1: &Circuit, c2: &Circuit) -> Result<Circuit> {
    require_normal(c1, "first")?;
    require_normal(c2, "second")?;
    let n1 = c1.num_qubits();
    let n2 = c2.num_qubits();
    let flag = n1 + n2;
    let accept = flag + 1;
    let mut out = Circuit::new(n1 + n2 + 2)?;
    for g in c1.gates() {
        out.push(g.clone())?;
    }
    for g in c2.gates() {
        out.push(g.shifted(n1))?;
    }
    out.push(Gate::Toffoli {
        c1: c1.flag_qubit(),
        c2: c2.flag_qubit() + n1,
        target: flag,
    })?;
    out.push(Gate::Toffoli {
        c1: c1.accept_qubit(),
        c2: c2.accept_qubit() + n1,
        target: accept,
    })?;
    out.postselect(flag, true)?;
    out.set_flag(flag)?.set_accept(accept)?;
    Ok(out)
}

/// Negates the accept bit (copied into a fresh qubit so the flag is never
/// disturbed). Conditional acceptance becomes 1 - P.
pub fn complement(c: &Circuit) -> Result<Circuit> {
    require_normal(c, "input")?;
    let n = c.num_qubits();
    let mut out = Circuit::new(n + 1)?;
    for g in c.gates() {
        out.push(g.clone())?;
    }
    out.push(Gate::Cnot {
        control: c.accept_qubit(),
        target: n,
    })?;
    out.push(Gate::X(n))?;
    if c.is_normal_form() {
        out.postselect(c.flag_qubit(), true)?;
    }
    out.set_flag(c.flag_qubit())?.set_accept(n)?;
    Ok(out)
}

/// De Morgan: NOT(NOT c1 AND NOT c2). Conditional acceptance becomes
/// 1 - (1 - P1)(1 - P2).
pub fn compose_union(c1: &Circuit, c2: &Circuit) -> Result<Circuit> {
    complement(&compose_intersection(&complement(c1)?, &complement(c2)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn already_normal_is_unchanged() {
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::H(0)).unwrap();
        c.postselect(0, true).unwrap();
        assert_eq!(normalize_postselections(&c).unwrap(), c);
    }

    #[test]
    fn empty_case_gets_trivial_flag() {
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::H(1)).unwrap();
        let out = normalize_postselections(&c).unwrap();
        assert_eq!(out.num_qubits(), 3);
        assert_eq!(out.gates(), &[Gate::H(1), Gate::X(2)]);
        assert!(out.is_normal_form());
        assert_eq!(out.flag_qubit(), 2);
        assert_eq!(out.accept_qubit(), 1);
    }

    #[test]
    fn structure_of_two_posts() {
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::H(0)).unwrap();
        c.postselect(0, false).unwrap();
        c.push(Gate::H(1)).unwrap();
        c.postselect(1, true).unwrap();
        let out = normalize_postselections(&c).unwrap();
        // 2 original + 2 copy ancillas + 1 AND result
        assert_eq!(out.num_qubits(), 5);
        assert_eq!(
            out.gates(),
            &[
                Gate::H(0),
                Gate::Cnot { control: 0, target: 2 },
                Gate::X(2),
                Gate::H(1),
                Gate::Cnot { control: 1, target: 3 },
                Gate::Toffoli { c1: 2, c2: 3, target: 4 },
            ]
        );
        assert!(out.is_normal_form());
        assert_eq!(normalize_postselections(&out).unwrap(), out);
    }

    #[test]
    fn intersection_rejects_intermediate_posts() {
        let mut c = Circuit::new(2).unwrap();
        c.postselect(0, true).unwrap();
        c.push(Gate::H(0)).unwrap();
        let ok = Circuit::new(2).unwrap();
        assert!(compose_intersection(&c, &ok).is_err());
        assert!(compose_intersection(&ok, &c).is_err());
        assert!(compose_intersection(&ok, &ok).is_ok());
    }
}
