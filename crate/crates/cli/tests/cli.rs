use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ame_cli::json::{self, CertificateJson, StateJson};
use ame_cli::oa_text::parse_oa_text;
use ame_cli::reproduce::{decorate, haar_unitary, random_monomial_op};
use ame_core::butson::{enumerate_bh, fourier, tensor_butson};
use ame_core::designs::{state_to_molh, state_to_oa};
use ame_core::equivalence::{butson_match, lm_match, SearchOptions};
use ame_core::operator::Monomial;
use ame_core::states::{construct_ame43, construct_ame44, construct_ame5_prime, construct_ame64, construct_ghz};
use ame_core::{ComplexAmp, LocalOperator, MinimalSupportState, MultiIndex, Phase, SiteMatrix, SparseState};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

fn ame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ame")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn construct_to(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = ame(&[&["construct"], args].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    write(dir, name, &stdout(&out))
}

#[test]
fn construct_ame43_emits_nine_terms() {
    let out = ame(&["construct", "ame43"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: StateJson = json::parse(&stdout(&out), "stdout").unwrap();
    assert_eq!((doc.n, doc.d, doc.terms.len()), (4, 3, 9));
    assert_eq!(doc.terms[3].idx, vec![1, 0, 1, 2]);
}

#[test]
fn five_party_pair_is_inequivalent() {
    let dir = tempfile::tempdir().unwrap();
    let a = construct_to(dir.path(), "ame55.json", &["ame55"]);
    let b = construct_to(dir.path(), "ame55p.json", &["ame55p"]);
    let cert_path = dir.path().join("cert.json");
    let out = ame(&[
        "equiv",
        "--src",
        a.to_str().unwrap(),
        "--dst",
        b.to_str().unwrap(),
        "--json",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stdout(&out).contains("verdict: inequivalent"));
    let cert: CertificateJson = json::read(&cert_path).unwrap();
    let text = serde_json::to_string(&cert).unwrap();
    assert!(text.contains(r#""verdict":"inequivalent""#) && text.contains("support_counting"), "{text}");
}

#[test]
fn equivalent_pair_certificate_replays() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let src = construct_ame64();
    let dst = random_monomial_op(&mut rng, 6, 4).apply_monomial(&src).unwrap();
    let a = write(dir.path(), "a.json", &json::to_string(&json::state_to_json(&src.to_sparse())));
    let b = write(dir.path(), "b.json", &json::to_string(&json::state_to_json(&dst.to_sparse())));
    let c = dir.path().join("c.json");
    let (a, b, c) = (a.to_str().unwrap(), b.to_str().unwrap(), c.to_str().unwrap());
    let out = ame(&["equiv", "--src", a, "--dst", b, "--branch", "lm", "--json", c, "--output", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = ame(&["check", "certificate", "--file", c, "--src", a, "--dst", b]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("maps src onto dst"));
    // the same witness does not carry src onto a different state
    let out = ame(&["check", "certificate", "--file", c, "--src", a, "--dst", a]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_ex9_passes() {
    let out = ame(&["reproduce", "ex9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("PASS ex9"));
}

#[test]
fn reproduce_appendix_d_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("report.json");
    let out = ame(&["reproduce", "appendix-d", "--d", "5", "--json", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report: serde_json::Value = json::read(&p).unwrap();
    assert_eq!(report["id"], "appendix-d");
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 5);
    assert_eq!(ame(&["reproduce", "appendix-d", "--d", "4"]).status.code(), Some(2));
}

#[test]
fn unknown_inputs_are_usage_errors() {
    let out = ame(&["reproduce", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fourier-automorphism") && stderr(&out).contains("bell-UUbar"));
    assert_eq!(ame(&["equiv", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(ame(&["teleport"]).status.code(), Some(2));
    assert_eq!(ame(&["--tolerance", "-1", "construct", "ame43"]).status.code(), Some(2));
    assert_eq!(ame(&["--max-nodes", "0", "construct", "ame43"]).status.code(), Some(2));
    assert_eq!(ame(&["--help"]).status.code(), Some(0));
}

#[test]
fn exact_mode_rejects_real_turns() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"n":2,"d":2,"terms":[{"idx":[0,0]},{"idx":[1,1],"phase":{"turn_real":0.3}}]}"#;
    let p = write(dir.path(), "real.json", text);
    let out = ame(&["check", "state", "--file", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exact mode"));
    let out = ame(&["--mode", "float", "check", "state", "--file", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("1-uniform"));
}

const AME43_ROWS: &str = "0 0 0 0\n0 1 1 1\n0 2 2 2\n1 0 1 2\n1 1 2 0\n1 2 0 1\n2 0 2 1\n2 1 0 2\n2 2 1 0\n";

#[test]
fn oa_file_of_ame43() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "oa.txt", &format!("9 4 3 2\n{AME43_ROWS}"));
    let out = ame(&["check", "oa", "--file", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "valid: OA(9, 4, 3, 2) with index 1");
    let out = ame(&["convert", "--input", p.to_str().unwrap(), "--to", "state"]);
    let from_file: StateJson = json::parse(&stdout(&out), "stdout").unwrap();
    assert_eq!(from_file, json::state_to_json(&construct_ame43().to_sparse()));
    let out = ame(&["convert", "--input", p.to_str().unwrap(), "--to", "oa-text"]);
    assert_eq!(stdout(&out), format!("9 4 3 2\n{AME43_ROWS}"));
}

#[test]
fn oa_file_errors() {
    // swapping the last two symbols of row 5 collides with row 8 on columns 2 and 3
    let collided = AME43_ROWS.replace("1 1 2 0", "1 1 0 2");
    let cases = [
        (format!("9 4 3 2\n{collided}"), "oa-strength"),
        ("2 3 2 1\n000\n111\n".to_string(), ""),
        ("1 4 3 1\n0 3 0 0\n".to_string(), "oa-symbol-range"),
        ("9 4 3\n".to_string(), "oa-header"),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, (text, code)) in cases.iter().enumerate() {
        let parsed = parse_oa_text(text);
        match code.is_empty() {
            true => assert_eq!(parsed.unwrap().rows(), &[vec![0, 0, 0], vec![1, 1, 1]]),
            false => assert_eq!(parsed.unwrap_err().code(), *code),
        }
        let p = write(dir.path(), &format!("{i}.txt"), text);
        let expected = if code.is_empty() { 0 } else { 2 };
        assert_eq!(ame(&["check", "oa", "--file", p.to_str().unwrap()]).status.code(), Some(expected));
    }
}

#[test]
fn molh_and_butson_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = construct_to(dir.path(), "ame44.json", &["ame44"]);
    let out = ame(&["convert", "--input", s.to_str().unwrap(), "--to", "molh"]);
    let molh = write(dir.path(), "molh.json", &stdout(&out));
    let out = ame(&["check", "molh", "--file", molh.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = ame(&["--output", "json", "enumerate-bh", "4"]);
    let reps: Vec<json::MatrixJson> = json::parse(&stdout(&out), "stdout").unwrap();
    assert_eq!(reps.len(), 2);
    let m = write(dir.path(), "bh.json", &json::to_string(&reps[1]));
    assert_eq!(ame(&["check", "butson", "--file", m.to_str().unwrap()]).status.code(), Some(0));
    let mut broken = reps[1].clone();
    broken[1] = broken[0].clone();
    let m = write(dir.path(), "bad.json", &json::to_string(&broken));
    assert_eq!(ame(&["check", "butson", "--file", m.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn autos_and_filter() {
    let dir = tempfile::tempdir().unwrap();
    let g = construct_to(dir.path(), "ghz.json", &["ghz", "--n", "3", "--d", "2"]);
    let out = ame(&["autos", "--state", g.to_str().unwrap()]);
    assert!(stdout(&out).starts_with("2 automorphisms, search complete"), "{}", stdout(&out));
    let a = construct_to(dir.path(), "p.json", &["ame5p", "--d", "5"]);
    let out = ame(&["filter", "--src", a.to_str().unwrap(), "--dst", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("filter passed"));
    let b = construct_to(dir.path(), "q.json", &["ame43"]);
    assert_eq!(ame(&["filter", "--src", b.to_str().unwrap(), "--dst", b.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reproduce_all_honours_thread_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_ame"))
        .args(["reproduce", "all"])
        .env("AME_SLOCC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("PASS ")).count(), 11);
    let out = Command::new(env!("CARGO_BIN_EXE_ame"))
        .args(["reproduce", "all"])
        .env("AME_SLOCC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn round_trip_state(s: &SparseState) {
    let first = json::to_string(&json::state_to_json(s));
    let parsed = json::state_from_json(&json::parse(&first, "first").unwrap()).unwrap();
    assert_eq!(&parsed, s);
    assert_eq!(json::to_string(&json::state_to_json(&parsed)), first);
}

fn round_trip_operator(op: &LocalOperator) {
    let first = json::to_string(&json::operator_to_json(op));
    let parsed = json::operator_from_json(&json::parse(&first, "first").unwrap()).unwrap();
    assert_eq!(json::to_string(&json::operator_to_json(&parsed)), first);
    for (a, b) in op.sites().iter().zip(parsed.sites()) {
        assert_eq!(a.to_dense(), b.to_dense());
    }
}

fn bases() -> Vec<MinimalSupportState> {
    vec![construct_ghz(3, 2).unwrap(), construct_ame43(), construct_ame44(), construct_ame5_prime(5).unwrap()]
}

#[test]
fn designs_and_matrices_round_trip() {
    for s in bases() {
        let oa = state_to_oa(&s);
        let text = json::to_string(&json::oa_to_json(&oa));
        let back = json::oa_from_json(&json::parse(&text, "oa").unwrap()).unwrap();
        assert_eq!(back, oa);
        assert_eq!(json::to_string(&json::oa_to_json(&back)), text);
        if 2 * s.k() == s.n() {
            let l = state_to_molh(&s).unwrap();
            let text = json::to_string(&json::molh_to_json(&l));
            let back = json::molh_from_json(&json::parse(&text, "molh").unwrap()).unwrap();
            assert_eq!(back, l);
        }
    }
    for d in 2..=6 {
        for m in enumerate_bh(d).unwrap() {
            let text = json::to_string(&json::butson_to_json(&m));
            let back = json::butson_from_json(&json::parse(&text, "bh").unwrap()).unwrap();
            // the complexity is re-derived as the least common order of the entries
            assert_eq!(back.phases(), m.phases());
            assert_eq!(json::to_string(&json::butson_to_json(&back)), text);
        }
    }
}

#[test]
fn certificates_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = SearchOptions::default();
    let mut certs = Vec::new();
    for s in bases() {
        let src = decorate(&mut rng, &s).unwrap();
        let dst = random_monomial_op(&mut rng, s.n(), s.d()).apply_monomial(&src).unwrap();
        certs.push((lm_match(&src, &dst, &opts).unwrap(), src.clone(), dst));
        let other = decorate(&mut rng, &s).unwrap();
        certs.push((lm_match(&src, &other, &opts).unwrap(), src, other));
    }
    let s = construct_ame44();
    let id = Monomial::identity(4);
    let site = SiteMatrix::butson_layer(&id, &tensor_butson(&fourier(2), &fourier(2)), &id).unwrap();
    let h = LocalOperator::new(vec![site; 4], Phase::ONE).unwrap().apply(&s.to_sparse(), TOL).unwrap();
    let h = MinimalSupportState::try_from_sparse(&h, TOL).unwrap();
    certs.push((butson_match(&s, &h, &opts).unwrap(), s, h));
    let tight = SearchOptions { max_nodes: 1, ..opts };
    let a = construct_ame64();
    let b = random_monomial_op(&mut rng, 6, 4).apply_monomial(&a).unwrap();
    certs.push((lm_match(&a, &b, &tight).unwrap(), a, b));
    assert!(certs.iter().any(|(c, ..)| c.is_inequivalent()));
    assert!(certs.iter().any(|(c, ..)| c.is_inconclusive()));
    for (cert, src, dst) in certs {
        let first = json::to_string(&json::certificate_to_json(&cert));
        let parsed = json::certificate_from_json(&json::parse(&first, "cert").unwrap()).unwrap();
        assert_eq!(json::to_string(&json::certificate_to_json(&parsed)), first);
        if !cert.is_equivalent() {
            assert_eq!(parsed.verdict, cert.verdict);
        }
        assert_eq!(
            parsed.replay(&src.to_sparse(), &dst.to_sparse(), TOL).unwrap(),
            cert.replay(&src.to_sparse(), &dst.to_sparse(), TOL).unwrap()
        );
    }
}

#[test]
fn dense_operators_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 2..=5 {
        let u = haar_unitary(&mut rng, d);
        let op =
            LocalOperator::new(vec![SiteMatrix::dense(d, u).unwrap(), SiteMatrix::identity(d)], Phase::real(0.125))
                .unwrap();
        round_trip_operator(&op);
    }
}

prop_compose! {
    fn exact_state()(n in 1usize..5, d in 2usize..5)
        (terms in prop::collection::btree_map(prop::collection::vec(0..d, n), (0i64..60, 1u64..30, 1u64..4), 1..12), n in Just(n), d in Just(d))
        -> SparseState {
        let terms = terms.into_iter().map(|(idx, (num, den, weight))| {
            (MultiIndex::new(idx), ComplexAmp::Exact { weight, phase: Phase::rational(num.into(), den).unwrap() })
        });
        SparseState::new(n, d, terms).unwrap()
    }
}

proptest! {
    #[test]
    fn exact_states_round_trip(s in exact_state()) {
        round_trip_state(&s);
    }

    #[test]
    fn float_states_round_trip(amps in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..9)) {
        let terms = amps.iter().enumerate().map(|(i, &(re, im))| {
            (MultiIndex::new(vec![i % 3, i / 3]), ComplexAmp::Float(Complex64::new(re, im)))
        });
        let s = SparseState::new(2, 3, terms).unwrap();
        round_trip_state(&s);
    }

    #[test]
    fn phases_canonicalise(num in -1000i64..1000, den in 1u64..500) {
        let raw = format!(r#"{{"turn":{{"num":{num},"den":{den}}}}}"#);
        let p = json::phase_from_json(&json::parse(&raw, "phase").unwrap()).unwrap();
        let once = serde_json::to_string(&json::phase_to_json(p)).unwrap();
        let again = json::phase_from_json(&json::parse(&once, "phase").unwrap()).unwrap();
        prop_assert_eq!(serde_json::to_string(&json::phase_to_json(again)).unwrap(), once);
        prop_assert_eq!(p, Phase::rational(num.into(), den).unwrap());
    }

    #[test]
    fn monomial_operators_round_trip(seed in any::<u64>(), n in 1usize..6, d in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        round_trip_operator(&random_monomial_op(&mut rng, n, d));
    }
}
