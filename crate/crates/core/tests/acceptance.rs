//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so lines print in order; exits nonzero on any failure.

mod common;

use std::time::{Duration, Instant};

use common::*;
use num_bigint::BigInt;
use num_traits::One;
use postsim::circuit::{amplify, normalize_postselections, Gate, MajorityInstance};
use postsim::dense::{apply_gate, conditional_accept_prob, postselect, run_circuit};
use postsim::fantasy::{apply_mass_boost, majority_via_bqp_p, majority_via_nonunitary, nonunitary_postselect_gadget};
use postsim::majority::{
    build_majority_circuit, control_qubit_state, decide_majority_analytic, decide_majority_sampled, exponent_range,
    first_register_zero_probability, pad_instance, phi_state,
};
use postsim::pathsum::{enumerate_ledger, p_power_decide, pp_decide};
use postsim::state::{p_mass, FantasyRule};
use rand::Rng;

type Outcome = Result<String, String>;

// Printed with five decimals on purpose; the margin is against 0.70711, not 1/sqrt 2.
#[allow(clippy::approx_constant)]
const OVERLAP_CEILING: f64 = 0.70711 + 1e-6;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_tables(n: usize) -> impl Iterator<Item = MajorityInstance> {
    (0..1u64 << (1 << n)).map(move |bits| MajorityInstance::from_index_bits(n, bits).unwrap())
}

fn c1_dichotomy() -> Outcome {
    let (mut count, mut worst_yes, mut worst_no) = (0usize, f64::INFINITY, 0.0f64);
    for n in 1..=4 {
        let half = 1u64 << (n - 1);
        for inst in all_tables(n).filter(|i| i.s() >= 1) {
            let s = popcount(inst.table());
            let r = decide_majority_analytic(&inst).map_err(|e| e.to_string())?;
            ensure(r.verdict == (s < half), || format!("n = {n}, s = {s}: verdict {}", r.verdict))?;
            if s < half {
                let max = r.max_overlap().unwrap();
                worst_yes = worst_yes.min(max);
                ensure(max >= 0.9855, || format!("n = {n}, s = {s}: max overlap {max}"))?;
            } else {
                for &v in r.overlaps.values() {
                    worst_no = worst_no.max(v);
                    ensure(v <= OVERLAP_CEILING, || format!("n = {n}, s = {s}: overlap {v}"))?;
                }
            }
            count += 1;
        }
    }
    ensure(count == 65_808, || format!("enumerated {count} tables"))?;
    Ok(format!(
        "{count} tables (every n <= 4 table with s >= 1); min best overlap {worst_yes:.6}, max overlap otherwise {worst_no:.6}"
    ))
}

fn c2_circuit_agreement() -> Outcome {
    let mut checks = 0;
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for inst in all_tables(n).filter(|i| i.s() >= 1) {
            for i in exponent_range(n) {
                let out = run_circuit(&build_majority_circuit(&inst, i).unwrap(), 0).map_err(|e| e.to_string())?;
                let got = control_qubit_state(&out).unwrap();
                let want = phi_state(&inst, 2f64.powi(i)).unwrap();
                let oracle = phi_oracle(n, popcount(inst.table()), 2f64.powi(i));
                for k in 0..2 {
                    let d = (got.amplitudes()[k] - want.amplitudes()[k]).norm();
                    let o = (got.amplitudes()[k].re - [oracle.0, oracle.1][k]).abs();
                    worst = worst.max(d).max(o);
                }
                checks += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("{checks} (table, i) pairs, max deviation {worst:.1e}"))
}

fn c3_padding() -> Outcome {
    let mut count = 0;
    for n in 1..=3 {
        for inst in all_tables(n) {
            let truth = popcount(inst.table()) < 1 << (n - 1);
            let v = decide_majority_analytic(&pad_instance(&inst)).map_err(|e| e.to_string())?.verdict;
            ensure(v == truth, || format!("n = {n}, s = {}: padded verdict {v}", inst.s()))?;
            count += 1;
        }
    }
    Ok(format!("{count} tables including s = 0"))
}

fn c4_ledger() -> Outcome {
    let mut r = rng(400);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let n = r.gen_range(1..=5);
        let h = r.gen_range(0..=12);
        let classical = r.gen_range(0..=12);
        let c = random_restricted(&mut r, n, h, classical);
        let ledger = enumerate_ledger(&c, 0).map_err(|e| e.to_string())?;
        let dense = run_circuit(&c, 0).unwrap();
        for (a, b) in dense.amplitudes().iter().zip(ledger.amplitudes()) {
            worst = worst.max((a.re - b).abs()).max(a.im.abs());
        }
        ensure(ledger.squared_norm() == BigInt::one() << h, || format!("circuit {k}: sum c^2 != 2^{h}"))?;
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("200 circuits, max deviation {worst:.1e}, sum c^2 = 2^h exact"))
}

fn c5_pp_decision() -> Outcome {
    let mut r = rng(500);
    let (mut decided, mut ties, mut attempts) = (0, 0, 0);
    while decided < 50 {
        attempts += 1;
        if attempts > 10_000 {
            return Err("could not generate 50 usable circuits".into());
        }
        let n = r.gen_range(2..=4);
        let (h, k) = (r.gen_range(1..=7), r.gen_range(0..8));
        let mut c = random_restricted(&mut r, n, h, k);
        c.postselect(r.gen_range(0..n), r.gen_bool(0.5)).unwrap();
        c.push(Gate::H(r.gen_range(0..n))).unwrap();
        c.set_accept(r.gen_range(0..n)).unwrap();
        let c = normalize_postselections(&c).unwrap();
        let Ok(p) = conditional_accept_prob(&c, 0) else { continue };
        if (p - 0.5).abs() < 1e-9 {
            ties += 1;
            continue;
        }
        let d = pp_decide(&c, 0).map_err(|e| e.to_string())?;
        ensure(d.accept == (p > 0.5) && !d.tie, || format!("P = {p}, ledger accept = {}", d.accept))?;
        decided += 1;
    }
    Ok(format!("50 normal-form circuits agree ({ties} ties skipped)"))
}

fn c6_mass_identity() -> Outcome {
    let mut r = rng(600);
    let mut worst = 0.0f64;
    for p in [0.5, 1.0, 3.0, 4.0] {
        let rule = FantasyRule::new(p).unwrap();
        for k in [1usize, 2, 4] {
            for _ in 0..20 {
                let s = random_state(&mut r, 3);
                let subset: Vec<bool> = (0..8).map(|_| r.gen_bool(0.5)).collect();
                let targeted = |z: usize| subset[z] != (p > 2.0);
                let boosted = apply_mass_boost(&s, |z| subset[z], rule, k).map_err(|e| e.to_string())?;
                let (bt, bu) = (p_mass(&s, rule, targeted), p_mass(&s, rule, |z| !targeted(z)));
                let (at, au) = (
                    p_mass(&boosted, rule, |z| targeted(z >> k)),
                    p_mass(&boosted, rule, |z| !targeted(z >> k)),
                );
                if bt == 0.0 || bu == 0.0 {
                    continue;
                }
                let factor = 2f64.powf((2.0 - p) * k as f64 / 2.0);
                let rel = ((at / au) / (bt / bu) - factor).abs() / factor;
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max relative deviation {worst:e}"))?;
    Ok(format!("12 (p, K) pairs x 20 states, max relative deviation {worst:.1e}"))
}

fn c7_even_power() -> Outcome {
    let mut r = rng(700);
    let rule = FantasyRule::new(4.0).unwrap();
    let (mut decided, mut ties) = (0, 0);
    for _ in 0..300 {
        let n = r.gen_range(2..=4);
        let (h, k) = (r.gen_range(0..=5), r.gen_range(0..8));
        let c = random_restricted(&mut r, n, h, k);
        let subset: Vec<bool> = (0..1 << n).map(|_| r.gen_bool(0.5)).collect();
        let state = run_circuit(&c, 0).unwrap();
        let inside = p_mass(&state, rule, |z| subset[z]);
        let outside = p_mass(&state, rule, |z| !subset[z]);
        if (inside - outside).abs() < 1e-12 {
            ties += 1;
            continue;
        }
        let d = p_power_decide(&c, 4, |z| subset[z], 0).map_err(|e| e.to_string())?;
        ensure(d.accept == (inside > outside), || format!("masses {inside} vs {outside}, ledger {}", d.accept))?;
        decided += 1;
    }
    Ok(format!("{decided} non-tie circuits agree ({ties} ties skipped)"))
}

fn c8_nonunitary() -> Outcome {
    let mut r = rng(800);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = random_state(&mut r, 3);
        let (q, b) = (r.gen_range(0..3), r.gen_bool(0.5));
        let exact = postselect(&s, q, b).map_err(|e| e.to_string())?.probabilities();
        let g = nonunitary_postselect_gadget(q, b, 20).unwrap();
        let approx = apply_gate(&s, &g).unwrap().normalize().unwrap().probabilities();
        worst = worst.max(total_variation(&exact, &approx));
    }
    ensure(worst <= 1e-4, || format!("max total variation {worst:e}"))?;
    let mut agree = 0;
    for k in 0..100u64 {
        let inst = MajorityInstance::new(3, random_positive_table(&mut r, 3)).unwrap();
        let want = decide_majority_analytic(&inst).unwrap().verdict;
        let got = majority_via_nonunitary(&inst, 100, 8000 + k, 20).map_err(|e| e.to_string())?;
        agree += usize::from(got.verdict == want);
    }
    ensure(agree >= 97, || format!("pipeline agreed on {agree} of 100"))?;
    Ok(format!("max total variation {worst:.1e}; damped pipeline agreed on {agree}/100"))
}

fn c9_amplification() -> Outcome {
    for k in (1..=201).step_by(2) {
        let v = amplify(2.0 / 3.0, k).unwrap();
        let bound = 1.0 - (-(k as f64) / 18.0).exp();
        ensure(v >= bound, || format!("k = {k}: {v} < {bound}"))?;
    }
    let mut worst = 0.0f64;
    for k in (1..=15u32).step_by(2) {
        for p in [0.1f64, 0.5, 2.0 / 3.0, 0.9] {
            let mut brute = 0.0;
            for outcome in 0u32..1 << k {
                let ones = outcome.count_ones();
                if 2 * ones > k {
                    brute += p.powi(ones as i32) * (1.0 - p).powi((k - ones) as i32);
                }
            }
            worst = worst.max((amplify(p, k).unwrap() - brute).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation from enumeration {worst:e}"))?;
    Ok(format!("bound holds for odd k <= 201; enumeration deviation {worst:.1e}"))
}

fn c10_sampled() -> Outcome {
    let mut r = rng(1000);
    let instances: Vec<MajorityInstance> = (0..100)
        .map(|_| {
            let n = r.gen_range(3..=4);
            MajorityInstance::new(n, random_positive_table(&mut r, n)).unwrap()
        })
        .collect();
    let truth: Vec<bool> = instances.iter().map(|i| popcount(i.table()) < 1 << (i.n() - 1)).collect();
    let score = |f: &dyn Fn(&MajorityInstance, u64) -> postsim::Result<bool>| -> Result<usize, String> {
        let mut agree = 0;
        for (k, inst) in instances.iter().enumerate() {
            agree += usize::from(f(inst, 10_000 + k as u64).map_err(|e| e.to_string())? == truth[k]);
        }
        Ok(agree)
    };
    let born = score(&|i, seed| Ok(decide_majority_sampled(i, 60, seed)?.verdict))?;
    let p1 = score(&|i, seed| Ok(majority_via_bqp_p(i, FantasyRule::new(1.0)?, 100, seed, 20)?.verdict))?;
    let p4 = score(&|i, seed| Ok(majority_via_bqp_p(i, FantasyRule::new(4.0)?, 100, seed, 20)?.verdict))?;
    ensure(born >= 97 && p1 >= 97 && p4 >= 97, || format!("agreement p=2 {born}, p=1 {p1}, p=4 {p4}"))?;
    Ok(format!("agreement: exact postselection {born}/100, p = 1 {p1}/100, p = 4 {p4}/100"))
}

fn c11_first_register() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for n in 1..=4 {
        for inst in all_tables(n) {
            let p = first_register_zero_probability(&inst).map_err(|e| e.to_string())?;
            let size = (1u64 << n) as f64;
            let s = popcount(inst.table()) as f64;
            let formula = ((size - s).powi(2) + s * s) / (size * size);
            ensure((p - formula).abs() < 1e-12, || format!("n = {n}, s = {s}: {p} vs {formula}"))?;
            worst = worst.min(p);
            count += 1;
        }
    }
    ensure(worst >= 0.25 - 1e-12, || format!("minimum {worst}"))?;
    Ok(format!("{count} tables, minimum probability {worst:.6}"))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "exhaustive dichotomy, n <= 4", budget: Duration::from_secs(10), run: c1_dichotomy },
        Criterion { id: 2, name: "circuit / analytic agreement, n <= 3", budget: Duration::from_secs(10), run: c2_circuit_agreement },
        Criterion { id: 3, name: "padding soundness, n <= 3", budget: Duration::from_secs(5), run: c3_padding },
        Criterion { id: 4, name: "path-sum ledger equals dense amplitudes", budget: Duration::from_secs(30), run: c4_ledger },
        Criterion { id: 5, name: "exact ledger decision of P(accept | flag) > 1/2", budget: Duration::from_secs(30), run: c5_pp_decision },
        Criterion { id: 6, name: "mass-boost scaling identity", budget: Duration::from_secs(5), run: c6_mass_identity },
        Criterion { id: 7, name: "even-p ledger decision, p = 4", budget: Duration::from_secs(20), run: c7_even_power },
        Criterion { id: 8, name: "damping gadget and damped majority pipeline", budget: Duration::from_secs(60), run: c8_nonunitary },
        Criterion { id: 9, name: "majority-vote amplification", budget: Duration::from_secs(5), run: c9_amplification },
        Criterion { id: 10, name: "sampled deciders, p in {2, 1, 4}", budget: Duration::from_secs(120), run: c10_sampled },
        Criterion { id: 11, name: "first-register mass >= 1/4, n <= 4", budget: Duration::from_secs(5), run: c11_first_register },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; took {elapsed:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {} [{detail}] ({elapsed:.2?})", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {} [{why}] ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

