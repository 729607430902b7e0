//! Line-oriented circuit and truth-table text formats.
//!
//! ```text
//! # comment
//! qubits 3
//! H 0
//! TOF 0 1 2
//! U1 0 1,0 0,0 0,0 0.5,0
//! ORACLE 2 0 1 : 0110
//! post 2 = 1
//! flag 2
//! accept 1
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{Circuit, Gate, MajorityInstance};
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    tokens
}

struct LineCtx<'a> {
    line_no: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> LineCtx<'a> {
    fn err(&self, column: usize, msg: impl Into<String>) -> Error {
        Error::syntax(self.line_no, column, msg)
    }

    fn invalid(&self, err: Error) -> Error {
        match err {
            Error::Validation(m) => Error::Validation(format!("line {}: {m}", self.line_no)),
            other => other,
        }
    }

    fn expect_len(&self, len: usize, usage: &str) -> Result<()> {
        if self.tokens.len() != len {
            let column = self
                .tokens
                .get(len)
                .map_or(self.end_column, |t| t.column);
            return Err(self.err(column, format!("expected `{usage}`")));
        }
        Ok(())
    }

    fn index(&self, k: usize) -> Result<usize> {
        let tok = self.tokens[k];
        tok.text
            .parse::<usize>()
            .map_err(|_| self.err(tok.column, format!("expected a qubit index, found `{}`", tok.text)))
    }

    fn complex(&self, k: usize) -> Result<Complex64> {
        let tok = self.tokens[k];
        let bad = || self.err(tok.column, format!("expected a `re,im` pair, found `{}`", tok.text));
        let (re, im) = tok.text.split_once(',').ok_or_else(bad)?;
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        if !re.is_finite() || !im.is_finite() {
            return Err(bad());
        }
        Ok(Complex64::new(re, im))
    }

    fn bits(&self, k: usize) -> Result<Vec<bool>> {
        let tok = self.tokens[k];
        tok.text
            .chars()
            .enumerate()
            .map(|(i, ch)| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(self.err(tok.column + i, format!("expected 0 or 1, found `{ch}`"))),
            })
            .collect()
    }

    /// `KW t q... : bits`
    fn table_gate(&self) -> Result<(usize, Vec<usize>, Vec<bool>)> {
        let usage = "<gate> t q... : <bits>";
        let colon = self
            .tokens
            .iter()
            .position(|t| t.text == ":")
            .ok_or_else(|| self.err(self.end_column, format!("expected `{usage}`")))?;
        if colon < 2 {
            return Err(self.err(self.tokens[colon].column, "missing target qubit"));
        }
        if self.tokens.len() != colon + 2 {
            let column = self.tokens.get(colon + 2).map_or(self.end_column, |t| t.column);
            return Err(self.err(column, format!("expected `{usage}`")));
        }
        let target = self.index(1)?;
        let inputs = (2..colon).map(|k| self.index(k)).collect::<Result<Vec<_>>>()?;
        let table = self.bits(colon + 1)?;
        Ok((target, inputs, table))
    }
}

/// Parses and validates a circuit. Syntax errors carry 1-based line and
/// column; validation errors name the offending line.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut flag: Option<(usize, LineNo)> = None;
    let mut accept: Option<(usize, LineNo)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let ctx = LineCtx {
            line_no,
            end_column: content.trim_end().chars().count() + 1,
            tokens,
        };
        let head = ctx.tokens[0];
        let keyword = head.text.to_ascii_uppercase();

        if keyword == "QUBITS" {
            if circuit.is_some() {
                return Err(ctx.err(head.column, "duplicate `qubits` header"));
            }
            ctx.expect_len(2, "qubits <n>")?;
            let n = ctx.index(1)?;
            circuit = Some(Circuit::new(n).map_err(|e| ctx.invalid(e))?);
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| ctx.err(head.column, "expected `qubits <n>` header before this line"))?;

        let gate = match keyword.as_str() {
            "H" | "X" => {
                ctx.expect_len(2, &format!("{} q", head.text))?;
                let q = ctx.index(1)?;
                if keyword == "H" {
                    Gate::H(q)
                } else {
                    Gate::X(q)
                }
            }
            "CNOT" | "CX" => {
                ctx.expect_len(3, "CNOT c t")?;
                Gate::Cnot {
                    control: ctx.index(1)?,
                    target: ctx.index(2)?,
                }
            }
            "CH" => {
                ctx.expect_len(3, "CH c t")?;
                Gate::Ch {
                    control: ctx.index(1)?,
                    target: ctx.index(2)?,
                }
            }
            "TOF" | "TOFFOLI" | "CCX" => {
                ctx.expect_len(4, "TOF a b c")?;
                Gate::Toffoli {
                    c1: ctx.index(1)?,
                    c2: ctx.index(2)?,
                    target: ctx.index(3)?,
                }
            }
            "U1" => {
                ctx.expect_len(6, "U1 q re,im re,im re,im re,im")?;
                let q = ctx.index(1)?;
                let mut m = [Complex64::new(0.0, 0.0); 4];
                for (k, slot) in m.iter_mut().enumerate() {
                    *slot = ctx.complex(2 + k)?;
                }
                Gate::u1(q, m).map_err(|e| ctx.invalid(e))?
            }
            "U2" => {
                ctx.expect_len(19, "U2 q1 q2 <16 re,im entries>")?;
                let q1 = ctx.index(1)?;
                let q2 = ctx.index(2)?;
                let mut m = [Complex64::new(0.0, 0.0); 16];
                for (k, slot) in m.iter_mut().enumerate() {
                    *slot = ctx.complex(3 + k)?;
                }
                Gate::u2(q1, q2, m).map_err(|e| ctx.invalid(e))?
            }
            "ORACLE" => {
                let (target, inputs, table) = ctx.table_gate()?;
                Gate::oracle(inputs, target, table).map_err(|e| ctx.invalid(e))?
            }
            "CONDH" => {
                let (target, controls, table) = ctx.table_gate()?;
                Gate::cond_h(controls, target, table).map_err(|e| ctx.invalid(e))?
            }
            "POST" => {
                ctx.expect_len(4, "post q = b")?;
                let q = ctx.index(1)?;
                if ctx.tokens[2].text != "=" {
                    return Err(ctx.err(ctx.tokens[2].column, "expected `=`"));
                }
                let b = match ctx.tokens[3].text {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(ctx.err(ctx.tokens[3].column, format!("expected 0 or 1, found `{other}`")))
                    }
                };
                c.postselect(q, b).map_err(|e| ctx.invalid(e))?;
                continue;
            }
            "FLAG" | "ACCEPT" => {
                ctx.expect_len(2, &format!("{} q", head.text.to_ascii_lowercase()))?;
                let q = ctx.index(1)?;
                let slot = if keyword == "FLAG" { &mut flag } else { &mut accept };
                if slot.is_some() {
                    return Err(ctx.err(head.column, format!("duplicate `{}` marker", head.text)));
                }
                *slot = Some((q, line_no));
                continue;
            }
            _ => return Err(ctx.err(head.column, format!("unknown keyword `{}`", head.text))),
        };
        c.push(gate).map_err(|e| ctx.invalid(e))?;
    }

    let mut c = circuit.ok_or_else(|| Error::syntax(1, 1, "missing `qubits <n>` header"))?;
    if let Some((q, line)) = flag {
        c.set_flag(q)
            .map_err(|e| Error::validation(format!("line {line}: {e}")))?;
    }
    if let Some((q, line)) = accept {
        c.set_accept(q)
            .map_err(|e| Error::validation(format!("line {line}: {e}")))?;
    }
    Ok(c)
}

type LineNo = usize;

fn push_complex(out: &mut String, z: &Complex64) {
    let _ = write!(out, " {},{}", z.re, z.im);
}

fn push_bits(out: &mut String, bits: &[bool]) {
    out.push_str(" : ");
    out.extend(bits.iter().map(|&b| if b { '1' } else { '0' }));
}

fn render_gate(out: &mut String, gate: &Gate) {
    match gate {
        Gate::H(q) => {
            let _ = write!(out, "H {q}");
        }
        Gate::X(q) => {
            let _ = write!(out, "X {q}");
        }
        Gate::Cnot { control, target } => {
            let _ = write!(out, "CNOT {control} {target}");
        }
        Gate::Ch { control, target } => {
            let _ = write!(out, "CH {control} {target}");
        }
        Gate::Toffoli { c1, c2, target } => {
            let _ = write!(out, "TOF {c1} {c2} {target}");
        }
        Gate::U1 { qubit, matrix, .. } => {
            let _ = write!(out, "U1 {qubit}");
            matrix.iter().for_each(|z| push_complex(out, z));
        }
        Gate::U2 { q1, q2, matrix, .. } => {
            let _ = write!(out, "U2 {q1} {q2}");
            matrix.iter().for_each(|z| push_complex(out, z));
        }
        Gate::Oracle {
            inputs,
            target,
            table,
        } => {
            let _ = write!(out, "ORACLE {target}");
            inputs.iter().for_each(|q| {
                let _ = write!(out, " {q}");
            });
            push_bits(out, table);
        }
        Gate::CondH {
            controls,
            target,
            table,
        } => {
            let _ = write!(out, "CONDH {target}");
            controls.iter().for_each(|q| {
                let _ = write!(out, " {q}");
            });
            push_bits(out, table);
        }
    }
    out.push('\n');
}

/// Canonical text for a circuit; `parse_circuit` reads it back unchanged.
pub fn render_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.num_qubits());
    let mut posts = c.postselections().iter().peekable();
    for (k, gate) in c.gates().iter().enumerate() {
        while let Some(p) = posts.next_if(|p| p.position == k) {
            let _ = writeln!(out, "post {} = {}", p.qubit, u8::from(p.bit));
        }
        render_gate(&mut out, gate);
    }
    for p in posts {
        let _ = writeln!(out, "post {} = {}", p.qubit, u8::from(p.bit));
    }
    let _ = writeln!(out, "flag {}", c.flag_qubit());
    let _ = writeln!(out, "accept {}", c.accept_qubit());
    out
}

/// Truth-table file: `n <n>` then one line of 2^n characters from {0,1}.
pub fn parse_truth_table(text: &str) -> Result<MajorityInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::syntax(1, 1, "missing `n <n>` header"))?;
    let tokens = tokenize(header);
    if tokens.len() != 2 || tokens[0].text != "n" {
        return Err(Error::syntax(line_no, 1, "expected `n <n>`"));
    }
    let n: usize = tokens[1]
        .text
        .parse()
        .map_err(|_| Error::syntax(line_no, tokens[1].column, "expected an integer width"))?;

    let (line_no, body) = lines
        .next()
        .ok_or_else(|| Error::syntax(line_no + 1, 1, "missing truth-table bits"))?;
    let table = body
        .chars()
        .enumerate()
        .map(|(i, ch)| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::syntax(line_no, i + 1, format!("expected 0 or 1, found `{ch}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((extra, _)) = lines.next() {
        return Err(Error::syntax(extra, 1, "unexpected content after the truth table"));
    }
    MajorityInstance::new(n, table).map_err(|e| match e {
        Error::Validation(m) => Error::Validation(format!("line {line_no}: {m}")),
        other => other,
    })
}

pub fn render_truth_table(inst: &MajorityInstance) -> String {
    let bits: String = inst.table().iter().map(|&b| if b { '1' } else { '0' }).collect();
    format!("n {}\n{bits}\n", inst.n())
}
