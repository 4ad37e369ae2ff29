mod common;

use metagram_core::fixtures;
use metagram_core::surface::{erase_spans, parse_program, print_program};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn round_trips(src: &str) {
    let p = parse_program(src, "a").unwrap();
    let printed = print_program(&p);
    let q = parse_program(&printed, "b").unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert_eq!(erase_spans(&p), erase_spans(&q), "{printed}");
}

#[test]
fn fixtures_round_trip() {
    for (name, src) in fixtures::ALL {
        eprintln!("{name}");
        round_trips(src);
    }
}

proptest! {
    #[test]
    fn generated_programs_round_trip(seed in any::<u64>()) {
        let p = common::GenProgram::random(&mut StdRng::seed_from_u64(seed));
        round_trips(&p.source());
    }
}
