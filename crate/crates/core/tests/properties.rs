use proptest::prelude::*;

use unipotent_core::chain::{chain_basis, classify, jacobson_morozov, partition_nilpotent, verify_rep_relations};
use unipotent_core::divergence::{conj_poly, kak_volume_exponent, CoordinateChart};
use unipotent_core::flow::{flow, imul, ito_f, reduce, IMat};
use unipotent_core::lie::{build_sl, build_su21, direct_sum, AlgebraElement, LieAlgebra};
use unipotent_core::matrix::{frac, parse_scalar, Matrix};
use unipotent_core::report::{Check, SuiteReport};
use unipotent_core::sl2::{exp_u, exp_v, exp_x, kak, psi_match, rotation, M2};

fn algebras() -> Vec<LieAlgebra> {
    let sl2 = build_sl(2).unwrap();
    vec![sl2.clone(), build_sl(3).unwrap(), build_su21().unwrap(), direct_sum(&sl2, &sl2).unwrap()]
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    (-20i64..=20, 1i64..=9)
}

fn element(dim: usize) -> impl Strategy<Value = AlgebraElement> {
    prop::collection::vec(rational(), dim).prop_map(|v| AlgebraElement::new(v.into_iter().map(|(p, q)| frac(p, q)).collect()))
}

fn algebra_and_elements(k: usize) -> impl Strategy<Value = (usize, Vec<AlgebraElement>)> {
    (0usize..4).prop_flat_map(move |i| {
        let dim = [3, 8, 8, 6][i];
        (Just(i), prop::collection::vec(element(dim), k))
    })
}

/// A nilpotent conjugate to a partition representative by an integer unipotent matrix.
fn conjugated_nilpotent(g: &LieAlgebra, d: usize, parts: &[usize], entries: &[i64]) -> AlgebraElement {
    let u = partition_nilpotent(g, d, parts).unwrap();
    let mut p = Matrix::identity(d);
    let mut k = 0;
    for i in 0..d {
        for j in i + 1..d {
            p.set(i, j, frac(entries[k], 1));
            k += 1;
        }
    }
    let pinv = p.inverse().unwrap();
    g.from_matrix(&(&(&p * &g.to_matrix(&u)) * &pinv)).unwrap()
}

fn partition_of(d: usize, pick: usize) -> Vec<usize> {
    let ps: Vec<_> = unipotent_core::chain::partitions(d).into_iter().filter(|p| p[0] > 1).collect();
    ps[pick % ps.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_are_normalised((p, q) in (-1000i64..1000, -50i64..50).prop_filter("q != 0", |x| x.1 != 0)) {
        let x = parse_scalar(&format!("{p}/{q}")).unwrap();
        prop_assert!(*x.denom() > 0.into());
        prop_assert_eq!(num_gcd(x.numer(), x.denom()), 1);
    }

    #[test]
    fn bracket_bilinear_and_antisymmetric((i, xs) in algebra_and_elements(3), (a, b) in rational()) {
        let g = &algebras()[i];
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        let s = frac(a, b);
        let lhs = g.bracket(&x.scale(&s).add(y), z).unwrap();
        let rhs = g.bracket(x, z).unwrap().scale(&s).add(&g.bracket(y, z).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(g.bracket(x, y).unwrap(), g.bracket(y, x).unwrap().scale(&frac(-1, 1)));
        prop_assert!(g.bracket(x, x).unwrap().is_zero());
    }

    #[test]
    fn jacobi_on_random_elements((i, xs) in algebra_and_elements(3)) {
        let g = &algebras()[i];
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        let t1 = g.bracket(x, &g.bracket(y, z).unwrap()).unwrap();
        let t2 = g.bracket(y, &g.bracket(z, x).unwrap()).unwrap();
        let t3 = g.bracket(z, &g.bracket(x, y).unwrap()).unwrap();
        prop_assert!(t1.add(&t2).add(&t3).is_zero());
    }

    #[test]
    fn ad_matches_bracket((i, xs) in algebra_and_elements(2)) {
        let g = &algebras()[i];
        prop_assert_eq!(g.ad(&xs[0]).unwrap().apply(&xs[1]), g.bracket(&xs[0], &xs[1]).unwrap());
        prop_assert_eq!(g.bracket_structural(&xs[0], &xs[1]), g.bracket(&xs[0], &xs[1]).unwrap());
    }

    #[test]
    fn chain_structure_invariants(d in 2usize..=4, pick in 0usize..10, entries in prop::collection::vec(-3i64..=3, 6)) {
        let g = build_sl(d).unwrap();
        let parts = partition_of(d, pick);
        let u = conjugated_nilpotent(&g, d, &parts, &entries);
        let cb = chain_basis(&g, &u).unwrap();
        cb.verify(&g).unwrap();
        let depths = cb.depths();
        prop_assert_eq!(depths.iter().map(|m| m + 1).sum::<usize>(), g.dim());
        let gr = cb.growth_rate();
        prop_assert_eq!(gr, depths.iter().map(|&m| (m * (m + 1) / 2) as u64).sum::<u64>());
        prop_assert!(gr >= 3 && gr != 4);
        prop_assert_eq!(kak_volume_exponent(&cb), gr - 2);
        // conjugation does not change the class
        let base = chain_basis(&g, &partition_nilpotent(&g, d, &parts).unwrap()).unwrap();
        prop_assert_eq!(base.growth_rate(), gr);
        let report = classify(&g, &u).unwrap();
        prop_assert!(report.gap_witness && report.codim_criterion_agrees);
        prop_assert_eq!(report.standard, gr == 3);
    }

    #[test]
    fn jacobson_morozov_triples(d in 2usize..=4, pick in 0usize..10, entries in prop::collection::vec(-3i64..=3, 6)) {
        let g = build_sl(d).unwrap();
        let u = conjugated_nilpotent(&g, d, &partition_of(d, pick), &entries);
        let triple = jacobson_morozov(&g, &u).unwrap();
        prop_assert!(triple.relations_hold(&g).unwrap());
        // the span of the triple is closed under bracket
        let span = Matrix::from_columns(&[triple.v.coeffs.clone(), triple.x.coeffs.clone(), triple.u.coeffs.clone()]);
        for (a, b) in [(&triple.v, &triple.x), (&triple.x, &triple.u), (&triple.u, &triple.v)] {
            prop_assert!(span.solve(&g.bracket(a, b).unwrap().coeffs).is_some());
        }
        let cb = chain_basis(&g, &u).unwrap();
        prop_assert!(verify_rep_relations(&g, &cb, cb.triple.as_ref().unwrap()).is_ok());
    }

    #[test]
    fn chart_round_trip(i in 0usize..4, raw in prop::collection::vec(-1.0f64..1.0, 8)) {
        let g = &algebras()[i];
        let u = if i == 3 { g.basis_element(0).add(&g.basis_element(3)) } else if i == 2 { g.basis_element(2) } else { g.basis_element(0) };
        let chart = CoordinateChart::new(g, &u).unwrap();
        let a: Vec<f64> = raw.iter().cycle().take(chart.dim()).map(|x| x * 0.01).collect();
        let back = chart.decompose(&chart.recompose(&a)).unwrap();
        let err = a.iter().zip(&back).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "round trip error {err}");
    }

    #[test]
    fn conj_poly_matches_direct(i in 0usize..4, raw in prop::collection::vec(-1.0f64..1.0, 8), t in -3.0f64..3.0, s in -1.0f64..1.0) {
        let g = &algebras()[i];
        let u = if i == 3 { g.basis_element(0).add(&g.basis_element(3)) } else if i == 2 { g.basis_element(2) } else { g.basis_element(0) };
        let chart = CoordinateChart::new(g, &u).unwrap();
        let mut a: Vec<f64> = raw.iter().cycle().take(chart.dim()).copied().collect();
        a[0] = 0.0;
        a[1] = 0.0;
        let poly = conj_poly(&chart, &a, s).unwrap().eval(t);
        let direct = chart.conj_direct(&a, t, s);
        let scale = direct.iter().map(|x| x.abs()).fold(1e-300, f64::max);
        let err = poly.iter().zip(&direct).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
        prop_assert!(err < 1e-9, "relative error {err}");
    }
}

fn num_gcd(a: &num_bigint::BigInt, b: &num_bigint::BigInt) -> i64 {
    use num_integer::Integer;
    use num_traits::ToPrimitive;
    a.gcd(b).to_i64().unwrap()
}

fn sl2_element() -> impl Strategy<Value = M2> {
    (0.0f64..6.3, 0.0f64..10.0, 0.0f64..6.3).prop_map(|(a, s, b)| rotation(a) * exp_x(s / 2.0) * rotation(b))
}

fn gamma_word() -> impl Strategy<Value = IMat> {
    prop::collection::vec((0usize..2, -3i64..=3), 1..6).prop_map(|steps| {
        steps.into_iter().fold([[1, 0], [0, 1]], |acc, (kind, n)| {
            let step = if kind == 0 { [[1, n], [0, 1]] } else { [[0, -1], [1, 0]] };
            imul(&acc, &step)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kak_recomposes(g in sl2_element()) {
        let k = kak(&g);
        let r = k.recompose();
        prop_assert!((r - g).norm() <= 1e-10 * g.norm().max(1.0).powi(2));
        prop_assert!(k.s >= 0.0);
    }

    #[test]
    fn determinant_preserved(a in -5.0f64..5.0, b in -3.0f64..3.0, c in -5.0f64..5.0, th in 0.0f64..6.3) {
        let g = exp_v(a) * exp_x(b) * exp_u(c) * rotation(th);
        prop_assert!((g.determinant() - 1.0).abs() <= 1e-12 * g.norm_squared().max(1.0));
    }

    #[test]
    fn psi_fixes_zero_and_increases(a_v in -0.009f64..0.009, a_x in -0.009f64..0.009, f in 0.0f64..0.9) {
        let eps1 = 0.1;
        let bound = if a_v == 0.0 { 5.0 } else { (eps1 / a_v.abs()).min(5.0) };
        let t = bound * f;
        let p0 = psi_match(a_v, a_x, 0.0, eps1).unwrap();
        prop_assert!(p0.psi.abs() < 1e-15);
        let p = psi_match(a_v, a_x, t, eps1).unwrap();
        let q = psi_match(a_v, a_x, t + bound * 0.05, eps1).unwrap();
        prop_assert!(q.psi > p.psi);
        prop_assert!(p.psi_prime > 0.0);
        prop_assert!(p.residual < 1e-10);
        prop_assert!(p.alpha_bound_ok && p.beta_bound_ok);
    }

    #[test]
    fn reduction_is_orbit_invariant(g in sl2_element(), w in gamma_word()) {
        let a = reduce(&g);
        let b = reduce(&(g * ito_f(&w)));
        let same = (a.rep - b.rep).norm() < 1e-8 || (a.rep + b.rep).norm() < 1e-8;
        prop_assert!(same, "{:?} vs {:?}", a.rep, b.rep);
        // a reduced point is a fixed point
        let again = reduce(&a.rep);
        prop_assert!((again.rep - a.rep).norm() < 1e-12 || (again.rep + a.rep).norm() < 1e-12);
    }

    #[test]
    fn flow_is_a_semigroup(g in sl2_element(), s in 0.0f64..20.0, t in 0.0f64..20.0) {
        let x = reduce(&g);
        let a = flow(&flow(&x, s), t);
        let b = flow(&x, s + t);
        let same = (a.rep - b.rep).norm() < 1e-9 || (a.rep + b.rep).norm() < 1e-9;
        prop_assert!(same);
    }

    #[test]
    fn reports_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 1..5), pass in any::<bool>(), seed in any::<u64>()) {
        let mut c = Check::new("id", "anchor", "bound").input("k", 3).samples(10);
        for (i, v) in vals.iter().enumerate() {
            c = c.measure(&format!("m{i}"), *v);
        }
        let report = SuiteReport::new("s", seed, vec![c.ratio(0.5).verdict(pass)]);
        let json = serde_json::to_string(&report).unwrap();
        let back: SuiteReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, report);
    }
}

#[test]
fn every_builtin_is_semisimple_and_satisfies_jacobi() {
    for g in algebras() {
        assert!(g.jacobi_holds(), "{}", g.label());
        assert_eq!(g.killing_form().rank(), g.dim(), "{}", g.label());
    }
}

#[test]
fn seed_determines_stochastic_outputs() {
    let a = unipotent_core::flow::cusp_tail(10_000, 5).unwrap();
    let b = unipotent_core::flow::cusp_tail(10_000, 5).unwrap();
    assert_eq!(a, b);
    let c = unipotent_core::flow::cusp_tail(10_000, 6).unwrap();
    assert_ne!(a.fractions, c.fractions);
}
