mod common;

use metagram_core::induction::{induce, verify_solution, EngineOptions, Example, InduceError, Job, NoGrammarReason};
use metagram_core::lowering::lower_program;
use metagram_core::surface::{load_program, stdlib};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Verdict and best rank agree with enumerating every member grammar.
    #[test]
    fn engine_matches_enumeration(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (prog, pos, neg) = common::random_job(&mut rng, 4096);
        let src = prog.source();
        let space = lower_program(&load_program(&src, "gen", &stdlib()).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?);
        let ex = |xs: &[String], t: &str| xs.iter().enumerate().map(|(i, w)| Example::new(format!("{t}{i}"), w.clone())).collect();
        let job = Job { space, positives: ex(&pos, "p"), negatives: ex(&neg, "n"), options: EngineOptions::default() };
        let expect = prog.oracle(&pos, &neg);
        match induce(&job) {
            Ok(sol) => {
                prop_assert_eq!(Some(sol.rank), expect, "{}\npos {:?} neg {:?}", src, pos, neg);
                prop_assert!(verify_solution(&job, &sol).is_empty());
            }
            Err(InduceError::NoGrammar(NoGrammarReason::BoundedExhaustion { .. })) => {
                prop_assert_eq!(None, expect, "{}\npos {:?} neg {:?}", src, pos, neg);
            }
            Err(e) => prop_assert!(false, "{e}\n{src}"),
        }
    }
}
