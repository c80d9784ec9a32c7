//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`). Every comparison is
//! exact rational equality.

mod common;

use std::time::Instant;

use common::*;
use num_traits::{One, Zero};
use rand::Rng;

use graphshift::cauchydual::{
    builtin_example, builtin_example_report, dual_squared_norms, dual_weights,
    subnormality_check,
};
use graphshift::exactmath::{interpolate, rat, Polynomial, Rational};
use graphshift::misometry::{
    build_a_matrix, ch_sweep, cross_validate, default_horizon, is_m_isometric_oracle,
    rank_criterion,
};
use graphshift::shift::MeasuredGraph;

fn announce(number: usize, name: &str, pass: bool) {
    println!(
        "ACCEPTANCE {number} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {number} ({name}) failed");
}

/// Shared pool for criteria 3 and 4: per order m in {2,3,4}, twenty
/// exact constructions and twenty measure-perturbed variants.
fn criterion_pool() -> Vec<(MeasuredGraph, usize)> {
    let mut rng = rng(0xC0FFEE);
    let mut pool = Vec::new();
    for m in 2..=4usize {
        for _ in 0..20 {
            pool.push((m_isometric_instance(&mut rng, m), m));
        }
        for _ in 0..20 {
            let base = m_isometric_instance(&mut rng, m);
            pool.push((perturb_measure(&mut rng, &base), m));
        }
    }
    pool
}

#[test]
fn criterion_1_builtin_reproduction() {
    let started = Instant::now();
    let mg = builtin_example();

    let oracle = is_m_isometric_oracle(&mg, 2, 22).unwrap();
    let defects_vanish = oracle.verdict
        && oracle
            .vertices
            .values()
            .all(|v| v.max_abs.is_zero() && v.first_nonzero.is_none());

    let table = mg.squared_norms(12);
    let cert = rank_criterion(&mg, &table, 2).unwrap();
    let ranks_ok =
        cert.verdict && cert.rank_a_tilde == Some(2) && cert.rank_b_tilde == Some(2);

    let dw = dual_weights(&mg, &table).unwrap();
    let dual = dual_squared_norms(&mg, &dw, 6).unwrap();
    let dual_cert = subnormality_check(&mg, &dw, &dual).unwrap();
    let dual_ok = !dual_cert.verdict && dual_cert.d == rat(49, 1936);

    let report = builtin_example_report();

    let elapsed = started.elapsed();
    announce(
        1,
        "built-in example reproduction",
        defects_vanish && ranks_ok && dual_ok && report.passed && elapsed.as_secs_f64() < 1.0,
    );
}

#[test]
fn criterion_2_three_isometric_family() {
    let started = Instant::now();
    let mut rng = rng(0xFA417);
    let mut all_ok = true;
    for _ in 0..20 {
        let fam = feasible_family(&mut rng);
        let cv = cross_validate(&fam.instance, 3, Some(23)).unwrap();
        let zero_defects = cv
            .oracle
            .vertices
            .values()
            .all(|v| v.max_abs.is_zero() && v.first_nonzero.is_none());
        all_ok &= cv.agree && cv.oracle.verdict && cv.rank.verdict && zero_defects;
    }
    let elapsed = started.elapsed();
    announce(
        2,
        "three-isometric family cross-validation",
        all_ok && elapsed.as_secs_f64() < 10.0,
    );
}

#[test]
fn criterion_3_criterion_equivalence() {
    let pool = criterion_pool();
    assert!(pool.len() >= 100);
    let mut agreements = 0;
    let mut positives = 0;
    let mut negatives = 0;
    for (mg, m) in &pool {
        let cv = cross_validate(mg, *m, None).unwrap();
        if cv.agree {
            agreements += 1;
        }
        if cv.rank.verdict {
            positives += 1;
        } else {
            negatives += 1;
        }
    }
    announce(
        3,
        "defect oracle and rank criterion agree",
        agreements == pool.len() && positives >= 30 && negatives >= 30,
    );
}

#[test]
fn criterion_4_ch_iff_two_isometry() {
    let pool = criterion_pool();
    let mut mismatches = 0;
    for (mg, _) in &pool {
        let kappa = mg.structure().kappa();
        let table = mg.squared_norms(default_horizon(2, kappa).max(15));
        let two_isometric = rank_criterion(mg, &table, 2).unwrap().verdict;
        let ch = ch_sweep(mg, &table, 15).unwrap();
        if ch.verdict != two_isometric {
            mismatches += 1;
        }
    }
    announce(
        4,
        "complete hyperexpansivity matches 2-isometry",
        mismatches == 0,
    );
}

#[test]
fn criterion_5_isometry_rigidity() {
    let mut rng = rng(0x51D);
    let mut treed_ok = true;
    for i in 0..200 {
        let mg = random_treed_instance(&mut rng, i % 2 == 0);
        assert!(!mg.structure().trees.is_empty());
        let kappa = mg.structure().kappa();
        let report = is_m_isometric_oracle(&mg, 1, default_horizon(1, kappa)).unwrap();
        treed_ok &= !report.verdict;
    }
    let mut cycles_ok = true;
    for kappa in 1..=8 {
        let mg = uniform_cycle(kappa, positive_rational(&mut rng, 9, 9));
        let report = is_m_isometric_oracle(&mg, 1, default_horizon(1, kappa)).unwrap();
        cycles_ok &= report.verdict;
    }
    announce(
        5,
        "trees break isometry, uniform cycles keep it",
        treed_ok && cycles_ok,
    );
}

#[test]
fn criterion_6_kappa_one_duals_subnormal() {
    let mut rng = rng(0xD0A1);
    let mut all_subnormal = true;
    for _ in 0..30 {
        let mg = kappa_one_two_isometric(&mut rng);
        let table = mg.squared_norms(default_horizon(2, 1));
        let dw = dual_weights(&mg, &table).unwrap();
        let dual = dual_squared_norms(&mg, &dw, 4).unwrap();
        let cert = subnormality_check(&mg, &dw, &dual).unwrap();
        all_subnormal &= cert.verdict;
    }
    announce(6, "fixed-point duals are subnormal", all_subnormal);
}

#[test]
fn criterion_7_brute_force_operator_oracle() {
    let mut rng = rng(0xB0B);
    let mut pool: Vec<MeasuredGraph> = vec![
        builtin_example(),
        graphshift::cauchydual::builtin_example_perturbed(),
        uniform_cycle(3, rat(2, 5)),
        uniform_cycle(1, rat(7, 3)),
    ];
    while pool.iter().filter(|mg| mg.graph().len() <= 10).count() < 25 {
        let order = 2 + rng.gen_range(0..=1);
        let mg = match pool.len() % 4 {
            0 => feasible_family(&mut rng).instance,
            1 => kappa_one_two_isometric(&mut rng),
            2 => m_isometric_instance(&mut rng, order),
            _ => random_treed_instance(&mut rng, true),
        };
        if mg.graph().len() <= 10 {
            pool.push(mg);
        }
    }
    pool.retain(|mg| mg.graph().len() <= 10);

    let mut all_match = true;
    for mg in &pool {
        let table = mg.squared_norms(12);
        let dw = dual_weights(mg, &table).unwrap();
        let dual = dual_squared_norms(mg, &dw, 12).unwrap();
        for v in mg.graph().vertices() {
            let brute = brute_force_norms(mg, v, 12, 30);
            let brute_dual = brute_force_dual_norms(mg, v, 12, 30);
            for n in 0..=12 {
                all_match &= table.value(v, n).unwrap() == &brute[n];
                all_match &= dual.value(v, n).unwrap() == &brute_dual[n];
            }
        }
    }
    announce(
        7,
        "tables match brute-force mass propagation",
        pool.len() >= 25 && all_match,
    );
}

#[test]
fn criterion_8_exact_linear_algebra() {
    let mut rng = rng(0xE8);
    let mut interp_ok = true;
    for _ in 0..25 {
        let deg = rng.gen_range(0..=5);
        let coeffs: Vec<Rational> = (0..=deg)
            .map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=7)))
            .collect();
        let p = Polynomial::from_coeffs(coeffs);
        let bound = p.degree().unwrap_or(0);
        let points: Vec<(Rational, Rational)> = (0..=bound as i64)
            .map(|x| (Rational::from_integer(x.into()), p.eval_int(x)))
            .collect();
        interp_ok &= interpolate(&points).unwrap() == p;
    }

    let mut rank_ok = true;
    for _ in 0..25 {
        let rows = rng.gen_range(2..=4);
        let cols = rng.gen_range(2..=4);
        let mut m = graphshift::exactmath::RationalMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, rat(rng.gen_range(-5..=5), rng.gen_range(1..=6)));
            }
        }
        let base = m.rank();
        let mut altered = m.clone();
        let factor = rat(rng.gen_range(1..=9), rng.gen_range(1..=9));
        let mult = rat(rng.gen_range(-3..=3), 1);
        for j in 0..cols {
            let scaled = altered.get(0, j) * &factor + altered.get(1, j) * &mult;
            altered.set(0, j, scaled);
        }
        rank_ok &= altered.rank() == base;
    }

    let mut det_ok = true;
    for m in 1..=6usize {
        let mut factorial = Rational::one();
        for i in 1..m {
            factorial *= Rational::from_integer(i.into());
        }
        for kappa in 1..=5usize {
            let mut expected = factorial.clone();
            for _ in 0..m - 1 {
                expected *= Rational::from_integer(kappa.into());
            }
            det_ok &= cofactor_det(&build_a_matrix(m, kappa)) == expected;
        }
    }
    announce(
        8,
        "interpolation, rank invariance, and the closed-form determinant",
        interp_ok && rank_ok && det_ok,
    );
}
