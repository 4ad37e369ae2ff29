use metagram_cli::examples::{ExampleSetBuilder, ReadOptions};
use metagram_cli::grammar_text;
use metagram_core::grammar::{CSym, ConcreteGrammar};
use proptest::prelude::*;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_metagram");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("METAGRAM_SMT_SOLVER").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::create_dir_all(p.parent().unwrap()).unwrap();
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const FIG2: &str = "\
Date -> Month Sep Day Sep Year .
Sep -> \"/\" .
Year -> Digit Digit .
Digit -> [\"0\"-\"9\"] .
Month -> \"0\" Digit .
Month -> \"10\" .
Month -> \"11\" .
Month -> \"12\" .
Day -> \"0\" [\"1\"-\"9\"] .
Day -> [\"1\"-\"2\"] Digit .
Day -> \"30\" .
Day -> \"31\" .
start Date
";

#[test]
fn induce_dates_from_directory() {
    let d = tempfile::tempdir().unwrap();
    for (i, s) in ["12/31/72", "01/01/72", "02/28/99"].iter().enumerate() {
        write(d.path(), &format!("us/{i}.txt"), &format!("{s}\n"));
    }
    let dir = d.path().join("us").display().to_string();
    let o = run(&["induce", "fixture:dates", "--pos", &dir, "--print-grammar"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = grammar_text::parse(&stdout(&o)).unwrap();
    assert!(grammar_text::isomorphic(&got, &grammar_text::parse(FIG2).unwrap()), "{}", stdout(&o));
}

#[test]
fn contradictory_examples() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.txt", "12/31/72\n");
    let o = run(&["induce", "fixture:dates", "--pos", &a, "--neg", &a]);
    assert_eq!(o.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&o.stderr).contains("both positive and negative"));
}

#[test]
fn csv_emits() {
    let d = tempfile::tempdir().unwrap();
    let t = write(d.path(), "table.csv", "0,1,15,Hello world!\n1,2,23,Programming\n0,3,-2,rocks!\n");
    let o = run(&["induce", "fixture:csv_prefs", "--pos", &t, "--print-emits"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Row0:Num\nRow1:Num\nRow2:Num\nRow3:String\n");
}

#[test]
fn max_lines_truncates_examples() {
    let d = tempfile::tempdir().unwrap();
    // the third row is ragged; only two rows are read
    let t = write(d.path(), "t.csv", "1,2\n3,4\n5\n");
    let o = run(&["induce", "fixture:csv_strict", "--pos", &t, "--max-lines", "2", "--print-emits"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "delimiter: comma\n");
    let o = run(&["induce", "fixture:csv_strict", "--pos", &t]);
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn trailing_newline_flag() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.txt", "12/31/72\n");
    assert_eq!(run(&["induce", "fixture:dates", "--pos", &a]).status.code(), Some(0));
    let o = run(&["induce", "fixture:dates", "--pos", &a, "--strip-trailing-newline", "false"]);
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn check_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let g = write(d.path(), "g.txt", FIG2);
    let empty = write(d.path(), "empty.txt", "");
    let good = write(d.path(), "good.txt", "02/28/99\n");
    let bad = write(d.path(), "bad.txt", "1999.12.31\n");
    assert_eq!(run(&["check", &g, &good]).status.code(), Some(0));
    assert_eq!(run(&["check", &g, &bad]).status.code(), Some(1));
    assert_eq!(run(&["check", &empty, &good]).status.code(), Some(2));
    assert_eq!(run(&["check", &g, "/nonexistent/input"]).status.code(), Some(2));
}

#[test]
fn usage_errors() {
    let d = tempfile::tempdir().unwrap();
    let mg = write(d.path(), "bad.sag", "S -> Undefined.\nstart S.\n");
    let a = write(d.path(), "a.txt", "x");
    assert_eq!(run(&["induce", &mg, "--pos", &a]).status.code(), Some(2));
    assert_eq!(run(&["induce", "fixture:nope", "--pos", &a]).status.code(), Some(2));
    assert_eq!(run(&["induce", "fixture:dates", "--pos", &a, "--solver", "magic"]).status.code(), Some(2));
    assert_eq!(run(&["induce"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn manifest_and_labels() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "x/a.txt", "1\n");
    write(d.path(), "y/a.txt", "2\n");
    write(d.path(), "b.txt", "3");
    let m = write(d.path(), "m.txt", "# examples\n+ x/a.txt\n\n- b.txt\n+ y\n");
    let mut b = ExampleSetBuilder::new();
    b.add_manifest(Path::new(&m)).unwrap();
    let set = b.build(ReadOptions::default()).unwrap();
    assert_eq!(set.positives.len(), 2);
    assert_eq!(set.negatives.len(), 1);
    assert_eq!(set.negatives[0].label, "b.txt");
    assert_eq!(set.positives[0].text, "1");
    // both positives are named a.txt, so the paths disambiguate
    assert!(set.positives[0].label.ends_with("x/a.txt"));
    assert!(set.positives[1].label.ends_with("y/a.txt"));

    let bad = write(d.path(), "bad.txt", "* a.txt\n");
    let mut b = ExampleSetBuilder::new();
    assert!(b.add_manifest(Path::new(&bad)).is_err());
}

#[test]
fn directory_labels_are_file_names() {
    let d = tempfile::tempdir().unwrap();
    for n in ["p", "q", "r"] {
        write(d.path(), &format!("dir/{n}.txt"), n);
    }
    let mut b = ExampleSetBuilder::new();
    b.add_path(&d.path().join("dir"), true).unwrap();
    let set = b.build(ReadOptions::default()).unwrap();
    let labels: Vec<&str> = set.positives.iter().map(|e| e.label.as_str()).collect();
    assert_eq!(labels, ["p.txt", "q.txt", "r.txt"]);
}

#[test]
fn external_solver_through_the_bridge() {
    let d = tempfile::tempdir().unwrap();
    let t = write(d.path(), "table.csv", "0,1,15,Hello world!\n1,2,23,Programming\n0,3,-2,rocks!\n");
    let solver = format!("external:{BIN} solve-smt");
    let o = run(&["induce", "fixture:csv_prefs", "--pos", &t, "--print-emits", "--solver", &solver, "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "Row0:Num\nRow1:Num\nRow2:Num\nRow3:String\n");

    let o = Command::new(BIN)
        .args(["induce", "fixture:csv_prefs", "--pos", &t])
        .env("METAGRAM_SMT_SOLVER", "exit 7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dump_formula_is_a_solvable_script() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.txt", "12/31/72");
    let dump = d.path().join("f.smt2");
    let o = run(&["induce", "fixture:dates", "--pos", &a, "--dump-formula", dump.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let script = fs::read_to_string(&dump).unwrap();
    assert!(script.contains("(check-sat)"));
    let o = Command::new(BIN)
        .arg("solve-smt")
        .stdin(fs::File::open(&dump).unwrap())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("sat"));
}

#[test]
fn bundled_suite() {
    let suite = concat!(env!("CARGO_MANIFEST_DIR"), "/bench/suite.toml");
    let o = run(&["bench", suite, "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches(" ok\n").count(), 10);
}

#[test]
fn fixtures_listing() {
    let o = run(&["fixtures"]);
    assert!(stdout(&o).lines().any(|l| l == "dates"));
    let o = run(&["fixtures", "dates"]);
    assert!(stdout(&o).contains("start Date"));
}

#[test]
fn check_agrees_with_induced_grammars() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.txt", "12/31/72");
    let b = write(d.path(), "b.txt", "01/01/72");
    let o = run(&["induce", "fixture:dates", "--pos", &a, &b, "--print-grammar"]);
    let g = write(d.path(), "g.txt", &stdout(&o));
    for (text, code) in [("02/28/99", 0), ("31/12/72", 1), ("12-31-72", 1), ("1999.12.31", 1)] {
        let input = write(d.path(), "in.txt", text);
        assert_eq!(run(&["check", &g, &input]).status.code(), Some(code), "{text}");
    }
}

fn arb_char() -> impl Strategy<Value = char> {
    prop_oneof![Just('a'), Just('"'), Just('\\'), Just('\n'), Just('\t'), Just('\u{7}'), Just('é'), Just(' ')]
}

fn arb_sym() -> impl Strategy<Value = CSym> {
    prop_oneof![
        (0..4usize).prop_map(|i| CSym::N(["A", "B_1", "C#0", "#Start"][i].to_string())),
        prop::collection::vec(arb_char(), 1..4).prop_map(|cs| CSym::Lit(cs.into_iter().collect())),
        prop::collection::vec((arb_char(), arb_char()), 1..3)
            .prop_map(|rs| CSym::Set(rs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect())),
    ]
}

proptest! {
    #[test]
    fn grammar_text_round_trips(rules in prop::collection::vec((0..4usize, prop::collection::vec(arb_sym(), 0..4)), 0..8)) {
        let names = ["A", "B_1", "C#0", "#Start"];
        let g = ConcreteGrammar::from_rules("A", rules.into_iter().map(|(l, r)| (names[l].to_string(), r)).collect());
        let text = grammar_text::serialize(&g);
        let back = grammar_text::parse(&text).unwrap();
        prop_assert!(grammar_text::isomorphic(&g, &back), "{}", text);
        prop_assert_eq!(grammar_text::serialize(&back), text);
    }
}
