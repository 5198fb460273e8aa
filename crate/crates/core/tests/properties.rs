// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::random::{self as rnd, M};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use slhforge::dynamics::lindblad_rhs;
use slhforge::netlist::parse_expression;
use slhforge::slh::{
    build_cancellation_chain, coupling_signal_term, series_chain, series_chain_right, triples_approx_equal,
};
use slhforge::{Operator, OpPolynomial, SlhTriple};

const TOL: f64 = 1e-10;

fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn assert_same(a: &SlhTriple, b: &SlhTriple, bindings: &slhforge::SignalSet) {
    let cmp = triples_approx_equal(a, b, TOL, &[0.0, 0.3, 0.9], bindings);
    assert!(cmp.equal(), "{}", cmp.report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_reverses_products(seed in any::<u64>()) {
        let mut r = rnd::rng(seed);
        let sp = rnd::space(&mut r, 1..=5);
        let a = Operator::new(sp.clone(), rnd::matrix(&mut r, sp.dim())).unwrap();
        let b = Operator::new(sp.clone(), rnd::matrix(&mut r, sp.dim())).unwrap();
        let lhs = a.try_mul(&b).unwrap().adjoint();
        let rhs = b.adjoint().try_mul(&a.adjoint()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
        prop_assert!(a.adjoint().adjoint().approx_eq(&a, 0.0));
    }

    #[test]
    fn evaluation_is_a_homomorphism(seed in any::<u64>(), t in 0.0f64..2.0) {
        let mut r = rnd::rng(seed);
        let sp = rnd::space(&mut r, 1..=4);
        let b = rnd::bindings(&mut r, &["u", "v"]);
        let p = rnd::poly(&mut r, &sp, &["u", "v"]);
        let q = rnd::poly(&mut r, &sp, &["u"]);
        let ev = |x: &OpPolynomial| x.evaluate_matrix(t, &b).unwrap();
        prop_assert!(max_diff(&ev(&p.mul(&q).unwrap()), &ev(&p).dot(&ev(&q))) < 1e-12);
        prop_assert!(max_diff(&ev(&p.add(&q).unwrap()), &(ev(&p) + ev(&q))) < 1e-12);
        prop_assert!(max_diff(&ev(&p.dagger()), &rnd::dagger(&ev(&p))) < 1e-12);
        prop_assert!(p.imag().is_formally_self_adjoint());
    }

    #[test]
    fn series_is_associative(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rnd::rng(seed);
        let sp = rnd::space(&mut r, 2..=4);
        let b = rnd::bindings(&mut r, &["u"]);
        let g: Vec<_> = (0..3).map(|_| rnd::triple(&mut r, &sp, n, &["u"])).collect();
        assert_same(&series_chain(&g).unwrap(), &series_chain_right(&g).unwrap(), &b);
    }

    #[test]
    fn identity_and_hamiltonian_commute(seed in any::<u64>()) {
        let mut r = rnd::rng(seed);
        let sp = rnd::space(&mut r, 2..=4);
        let b = rnd::bindings(&mut r, &["u"]);
        let g = rnd::triple(&mut r, &sp, 2, &["u"]);
        let id = SlhTriple::identity(sp.clone(), 2).unwrap();
        assert_same(&g.series(&id).unwrap(), &g, &b);
        assert_same(&id.series(&g).unwrap(), &g, &b);
        let ham = SlhTriple::ham(sp.clone(), 2, rnd::self_adjoint(&mut r, &sp, &["u"])).unwrap();
        assert_same(&g.series(&ham).unwrap(), &ham.series(&g).unwrap(), &b);
    }

    #[test]
    fn conjugation_matches_explicit_series(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rnd::rng(seed);
        let sp = rnd::space(&mut r, 2..=3);
        let b = rnd::bindings(&mut r, &["u"]);
        let g = rnd::triple(&mut r, &sp, n, &["u"]);
        let t = rnd::unitary(&mut r, n);
        let explicit = series_chain(&[
            SlhTriple::beam_splitter(sp.clone(), &rnd::dagger(&t)).unwrap(),
            g.clone(),
            SlhTriple::beam_splitter(sp.clone(), &t).unwrap(),
        ]).unwrap();
        assert_same(&g.splitter_conjugate(&t).unwrap(), &explicit, &b);
    }

    #[test]
    fn feedback_chain_cancels_coupling(seed in any::<u64>()) {
        let mut r = rnd::rng(seed);
        let sp = rnd::space(&mut r, 2..=5);
        let b = rnd::bindings(&mut r, &["u"]);
        let l = vec![rnd::poly(&mut r, &sp, &[])];
        let h0 = rnd::self_adjoint(&mut r, &sp, &[]);
        let u = vec![OpPolynomial::signal(sp.clone(), "u")];
        let reduced = build_cancellation_chain(&l, &h0, &u).unwrap();
        let term = coupling_signal_term(&l, &u).unwrap().scale(C::new(2.0, 0.0));
        let expected = SlhTriple::ham(sp.clone(), 1, h0.add(&term).unwrap()).unwrap();
        assert_same(&reduced, &expected, &b);
    }

    #[test]
    fn lindblad_rhs_is_traceless_and_hermitian(seed in any::<u64>()) {
        let mut r = rnd::rng(seed);
        let d = r_dim(&mut r);
        let rho = rnd::density(&mut r, d);
        let h = rnd::hermitian(&mut r, d);
        let l = vec![rnd::matrix(&mut r, d), rnd::matrix(&mut r, d)];
        let drho = lindblad_rhs(&rho, &h, &l);
        prop_assert!(drho.diag().sum().norm() < 1e-12);
        prop_assert!(max_diff(&drho, &rnd::dagger(&drho)) < 1e-12);
    }

    #[test]
    fn printed_expressions_reparse(text in expression()) {
        let labels = ["c"];
        let first = parse_expression(&text, &labels).unwrap();
        let printed = slhforge::netlist::print_expression(&first);
        let second = parse_expression(&printed, &labels).unwrap();
        prop_assert_eq!(first, second, "{} printed as {}", text, printed);
    }
}

fn r_dim(r: &mut rand::rngs::StdRng) -> usize {
    use rand::Rng;
    r.gen_range(1..=6)
}

/// Fully parenthesized random expressions over numbers and ladder operators.
fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..100).prop_map(|k| format!("{}", k as f64 / 4.0)),
        (1u32..9).prop_map(|k| format!("{k}i")),
        Just("a(c)".to_string()),
        Just("adag(c)".to_string()),
        Just("n(c)".to_string()),
        Just("I".to_string()),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("(-{a})")),
            inner.prop_map(|a| format!("dagger({a})")),
        ]
    })
}
