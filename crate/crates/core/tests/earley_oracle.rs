mod common;

use common::{cyk_accepts, from_concrete};
use metagram_core::earley::{provenance, recognize, Provenance, Semiring};
use metagram_core::grammar::{CSym, ConcreteGrammar};
use proptest::prelude::*;
use std::collections::HashSet;

fn sym() -> impl Strategy<Value = CSym> {
    prop_oneof![
        3 => (0..3usize).prop_map(|i| CSym::N(["S", "A", "B"][i].to_string())),
        3 => (0..3usize).prop_map(|i| CSym::Lit(["a", "b", "c"][i].to_string())),
        1 => Just(CSym::Lit("ab".into())),
        1 => Just(CSym::Set(vec![('a', 'b')])),
    ]
}

fn grammar() -> impl Strategy<Value = ConcreteGrammar> {
    prop::collection::vec((0..3usize, prop::collection::vec(sym(), 0..=3)), 1..=10).prop_map(|rules| {
        ConcreteGrammar::from_rules("S", rules.into_iter().map(|(l, r)| (["S", "A", "B"][l].to_string(), r)).collect())
    })
}

fn word() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['a', 'b', 'c']), 0..=6).prop_map(|v| v.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    /// Every production subset satisfies the provenance formula exactly when
    /// the subset recognizes the input.
    #[test]
    fn provenance_matches_recognizer(g in grammar(), w in word()) {
        let prov = Provenance::new();
        let f = provenance(&g, &w, &prov);
        let chars: Vec<char> = w.chars().collect();
        let n = g.productions.len();
        for mask in 0u32..(1 << n) {
            let sel: HashSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let oracle = cyk_accepts(&from_concrete(&g, |i| sel.contains(&i)), "S", &chars);
            prop_assert_eq!(prov.eval(f, &|v| sel.contains(&(v as usize))), oracle, "subset {:b}", mask);
            prop_assert_eq!(recognize(&g, &sel, &w), oracle, "subset {:b}", mask);
        }
        let all: HashSet<usize> = (0..n).collect();
        prop_assert_eq!(recognize(&g, &all, &w), !prov.is_zero(&f));
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Var(u32),
    Zero,
    One,
    Plus(Box<Expr>, Box<Expr>),
    Times(Box<Expr>, Box<Expr>),
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0..8u32).prop_map(Expr::Var), Just(Expr::Zero), Just(Expr::One)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Plus(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Times(Box::new(a), Box::new(b))),
        ]
    })
}

fn build(p: &Provenance, e: &Expr) -> u32 {
    match e {
        Expr::Var(v) => p.var(*v),
        Expr::Zero => p.zero(),
        Expr::One => p.one(),
        Expr::Plus(a, b) => {
            let (a, b) = (build(p, a), build(p, b));
            p.plus(&a, &b)
        }
        Expr::Times(a, b) => {
            let (a, b) = (build(p, a), build(p, b));
            p.times(&a, &b)
        }
    }
}

fn equivalent(p: &Provenance, a: u32, b: u32) -> bool {
    (0u32..256).all(|m| p.eval(a, &|v| m >> v & 1 == 1) == p.eval(b, &|v| m >> v & 1 == 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn provenance_semiring_laws(x in expr(), y in expr(), z in expr()) {
        let p = Provenance::new();
        let (a, b, c) = (build(&p, &x), build(&p, &y), build(&p, &z));
        let (zero, one) = (p.zero(), p.one());
        prop_assert!(equivalent(&p, p.plus(&a, &p.plus(&b, &c)), p.plus(&p.plus(&a, &b), &c)));
        prop_assert!(equivalent(&p, p.times(&a, &p.times(&b, &c)), p.times(&p.times(&a, &b), &c)));
        prop_assert!(equivalent(&p, p.plus(&a, &b), p.plus(&b, &a)));
        prop_assert!(equivalent(&p, p.times(&a, &b), p.times(&b, &a)));
        prop_assert!(equivalent(&p, p.times(&a, &p.plus(&b, &c)), p.plus(&p.times(&a, &b), &p.times(&a, &c))));
        prop_assert!(equivalent(&p, p.plus(&a, &a), a));
        prop_assert!(equivalent(&p, p.times(&a, &a), a));
        prop_assert_eq!(p.plus(&a, &zero), a);
        prop_assert_eq!(p.times(&a, &one), a);
        prop_assert_eq!(p.times(&a, &zero), zero);
        prop_assert_eq!(p.eval(a, &|_| true), a != zero);
    }
}
