mod common;

use common::*;
use postsim::circuit::MajorityInstance;
use postsim::dense::run_circuit;
use postsim::majority::*;
use postsim::state::overlap_plus;
use rand::Rng;

fn all_tables(n: usize) -> impl Iterator<Item = MajorityInstance> {
    (0..1u64 << (1 << n)).map(move |bits| MajorityInstance::from_index_bits(n, bits).unwrap())
}

#[test]
fn phi_matches_closed_form_oracle() {
    for n in 1..=4 {
        for s in 1..=1u64 << n {
            let table: Vec<bool> = (0..1u64 << n).map(|x| x < s).collect();
            let inst = MajorityInstance::new(n, table).unwrap();
            for i in exponent_range(n) {
                let ratio = 2f64.powi(i);
                let phi = phi_state(&inst, ratio).unwrap();
                let (a0, a1) = phi_oracle(n, s, ratio);
                assert!((phi.amplitudes()[0].re - a0).abs() < 1e-12);
                assert!((phi.amplitudes()[1].re - a1).abs() < 1e-12);
                assert!((overlap_plus(&phi).unwrap() - overlap_oracle((a0, a1))).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn angle_increases_and_brackets_45_degrees() {
    for n in 1..=6usize {
        for s in 1..1u64 << (n - 1) {
            let table: Vec<bool> = (0..1u64 << n).map(|x| x < s).collect();
            let inst = MajorityInstance::new(n, table).unwrap();
            let angles: Vec<f64> = exponent_range(n)
                .map(|i| {
                    let phi = phi_state(&inst, 2f64.powi(i)).unwrap();
                    phi.amplitudes()[1].re.atan2(phi.amplitudes()[0].re)
                })
                .collect();
            assert!(angles.windows(2).all(|w| w[1] > w[0]), "n = {n}, s = {s}");
            let quarter = std::f64::consts::FRAC_PI_4;
            assert!(angles.windows(2).any(|w| w[0] <= quarter && quarter <= w[1]), "n = {n}, s = {s}");
        }
    }
}

#[test]
fn dichotomy_on_random_wide_tables() {
    let mut r = rng(30);
    let bound = (1.0 + 2f64.sqrt()) / 6f64.sqrt();
    for _ in 0..1000 {
        let n = 8;
        let inst = MajorityInstance::new(n, random_positive_table(&mut r, n)).unwrap();
        let report = decide_majority_analytic(&inst).unwrap();
        let max = report.max_overlap().unwrap();
        if inst.s() < 128 {
            assert!(max >= bound - 1e-12);
            assert!(report.verdict);
        } else {
            assert!(max <= std::f64::consts::FRAC_1_SQRT_2 + 1e-12);
            assert!(!report.verdict);
        }
    }
}

#[test]
fn skewed_wide_tables_on_both_sides() {
    let mut r = rng(31);
    for _ in 0..200 {
        let n = 8;
        let density = if r.gen_bool(0.5) { 0.3 } else { 0.7 };
        let table: Vec<bool> = (0..256).map(|_| r.gen_bool(density)).collect();
        let inst = MajorityInstance::new(n, table.clone()).unwrap();
        if inst.s() == 0 {
            continue;
        }
        assert_eq!(decide_majority_analytic(&inst).unwrap().verdict, popcount(&table) < 128);
    }
}

#[test]
fn circuit_reproduces_phi_for_n4() {
    let mut r = rng(32);
    for _ in 0..30 {
        let inst = MajorityInstance::new(4, random_positive_table(&mut r, 4)).unwrap();
        for i in exponent_range(4) {
            let out = run_circuit(&build_majority_circuit(&inst, i).unwrap(), 0).unwrap();
            let ctrl = control_qubit_state(&out).unwrap();
            let (a0, a1) = phi_oracle(4, inst.s(), 2f64.powi(i));
            assert!((ctrl.amplitudes()[0].re - a0).abs() < 1e-9);
            assert!((ctrl.amplitudes()[1].re - a1).abs() < 1e-9);
        }
    }
}

#[test]
fn readout_probability_is_squared_overlap() {
    let inst = MajorityInstance::new(3, vec![true, false, false, false, true, false, false, false]).unwrap();
    let best = decide_majority_analytic(&inst).unwrap();
    let (&i, &overlap) = best
        .overlaps
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let out = run_circuit(&majority_readout_circuit(&inst, i).unwrap(), 0).unwrap();
    let plus: f64 = out
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(z, _)| bit(*z, 5, CONTROL_QUBIT) == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    assert!((plus - overlap * overlap).abs() < 1e-9);
}

#[test]
fn sampled_decider_agrees_on_n4() {
    let mut r = rng(33);
    let mut agree = 0;
    for k in 0..200 {
        let inst = MajorityInstance::new(4, random_positive_table(&mut r, 4)).unwrap();
        let sampled = decide_majority_sampled(&inst, 60, 1000 + k).unwrap();
        agree += usize::from(sampled.verdict == decide_majority_analytic(&inst).unwrap().verdict);
    }
    assert!(agree >= 198, "{agree} of 200");
}

#[test]
fn sampled_reports_are_reproducible() {
    let inst = MajorityInstance::new(3, vec![true, true, false, false, false, true, false, false]).unwrap();
    let a = decide_majority_sampled(&inst, 80, 42).unwrap();
    let b = decide_majority_sampled(&inst, 80, 42).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let c = decide_majority_sampled(&inst, 80, 43).unwrap();
    assert_ne!(a.plus_fractions, c.plus_fractions);
}

#[test]
fn first_register_mass_formula() {
    for n in 1..=3 {
        for inst in all_tables(n) {
            let size = (1u64 << n) as f64;
            let s = inst.s() as f64;
            let want = ((size - s).powi(2) + s * s) / (size * size);
            let got = first_register_zero_probability(&inst).unwrap();
            assert!((got - want).abs() < 1e-12);
            assert!(got >= 0.25 - 1e-12);
        }
    }
}

#[test]
fn trajectory_csv_regimes() {
    let minority = MajorityInstance::new(3, vec![false, true, false, false, false, false, false, false]).unwrap();
    let rows = phi_trajectory(&minority).unwrap();
    assert!(rows.iter().any(|r| r.overlap > 0.985));
    let majority = MajorityInstance::new(3, vec![true, true, true, false, true, false, true, false]).unwrap();
    let rows = phi_trajectory(&majority).unwrap();
    assert!(rows.iter().all(|r| r.overlap <= 0.7072));
    assert!(rows.iter().all(|r| r.amp1 <= 0.0));
    let csv = trajectory_csv(&rows);
    assert_eq!(csv.lines().count(), 1 + 7);
    assert!(csv.starts_with("i,ratio,amp0,amp1,overlap\n-3,0.125000,"));
}
