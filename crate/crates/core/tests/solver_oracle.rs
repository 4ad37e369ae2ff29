use metagram_core::solver::sat::SatSolver;
use metagram_core::solver::{solve_maxsat, to_cnf, Formula, Lit, WeightedInstance};
use metagram_core::surface::CmpOp;
use proptest::prelude::*;

fn lit(n: u32) -> impl Strategy<Value = Lit> {
    (0..n, any::<bool>()).prop_map(|(v, s)| Lit::new(v, s))
}

fn instance() -> impl Strategy<Value = WeightedInstance> {
    (1..=14u32).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(lit(n), 1..=3), 0..=20),
            prop::collection::vec((-5..=9i64, lit(n)), 0..=10),
        )
            .prop_map(move |(hard, soft)| WeightedInstance { num_vars: n, hard, soft, names: vec![] })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn maxsat_rank_is_brute_force_max(inst in instance()) {
        let n = inst.num_vars;
        let mut best: Option<i64> = None;
        for m in 0u32..(1 << n) {
            let a: Vec<bool> = (0..n).map(|v| m >> v & 1 == 1).collect();
            if inst.hard_satisfied(&a) {
                let r = inst.rank_of(&a).unwrap();
                best = Some(best.map_or(r, |b: i64| b.max(r)));
            }
        }
        let got = solve_maxsat(&inst, None).unwrap();
        prop_assert_eq!(got.as_ref().map(|m| m.rank), best);
        if let Some(m) = got {
            prop_assert!(inst.hard_satisfied(&m.assignment));
            prop_assert_eq!(inst.rank_of(&m.assignment).unwrap(), m.rank);
        }
    }
}

#[derive(Debug, Clone)]
enum F {
    Var(u32),
    Const(bool),
    Not(Box<F>),
    And(Vec<F>),
    Or(Vec<F>),
    Xor(Box<F>, Box<F>),
    Implies(Box<F>, Box<F>),
    Iff(Box<F>, Box<F>),
    Card(Vec<F>, usize, u64),
}

fn formula(n: u32) -> impl Strategy<Value = F> {
    let leaf = prop_oneof![4 => (0..n).prop_map(F::Var), 1 => any::<bool>().prop_map(F::Const)];
    leaf.prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| F::Not(Box::new(f))),
            prop::collection::vec(inner.clone(), 0..=3).prop_map(F::And),
            prop::collection::vec(inner.clone(), 0..=3).prop_map(F::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::Xor(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::Implies(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::Iff(Box::new(a), Box::new(b))),
            (prop::collection::vec(inner, 0..=4), 0..6usize, 0..=5u64).prop_map(|(xs, op, k)| F::Card(xs, op, k)),
        ]
    })
}

const OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge];

fn to_formula(f: &F) -> Formula {
    match f {
        F::Var(v) => Formula::var(*v),
        F::Const(b) => Formula::constant(*b),
        F::Not(a) => Formula::not(to_formula(a)),
        F::And(xs) => Formula::and(xs.iter().map(to_formula).collect::<Vec<_>>()),
        F::Or(xs) => Formula::or(xs.iter().map(to_formula).collect::<Vec<_>>()),
        F::Xor(a, b) => Formula::xor(to_formula(a), to_formula(b)),
        F::Implies(a, b) => Formula::implies(to_formula(a), to_formula(b)),
        F::Iff(a, b) => Formula::iff(to_formula(a), to_formula(b)),
        F::Card(xs, op, k) => Formula::card(xs.iter().map(to_formula).collect(), OPS[*op], *k),
    }
}

/// Direct semantics, independent of the engine's evaluator.
fn truth(f: &F, a: &[bool]) -> bool {
    match f {
        F::Var(v) => a[*v as usize],
        F::Const(b) => *b,
        F::Not(x) => !truth(x, a),
        F::And(xs) => xs.iter().all(|x| truth(x, a)),
        F::Or(xs) => xs.iter().any(|x| truth(x, a)),
        F::Xor(x, y) => truth(x, a) != truth(y, a),
        F::Implies(x, y) => !truth(x, a) || truth(y, a),
        F::Iff(x, y) => truth(x, a) == truth(y, a),
        F::Card(xs, op, k) => OPS[*op].holds(xs.iter().filter(|x| truth(x, a)).count() as u64, *k),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The CNF has an extension of an assignment to the original variables
    /// exactly when the formula holds under it.
    #[test]
    fn cnf_projection_is_exact((n, f) in (1..=10u32).prop_flat_map(|n| (Just(n), formula(n)))) {
        let cnf = to_cnf(&to_formula(&f), n);
        let mut sat = SatSolver::new(cnf.num_vars);
        let mut trivially_unsat = false;
        for c in &cnf.clauses {
            trivially_unsat |= !sat.add_clause(c);
        }
        for m in 0u32..(1 << n) {
            let a: Vec<bool> = (0..n).map(|v| m >> v & 1 == 1).collect();
            let assume: Vec<Lit> = (0..n).map(|v| Lit::new(v, a[v as usize])).collect();
            let extends = !trivially_unsat && sat.solve(&assume, None).unwrap().is_some();
            prop_assert_eq!(extends, truth(&f, &a), "assignment {:b}", m);
        }
    }
}
