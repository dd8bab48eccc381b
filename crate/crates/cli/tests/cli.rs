use std::process::Command;

use fcgroup::combinat::SetFamily;
use fcgroup::constructions::corpus;
use fcgroup::{BilinearMap, FactorSystem, FormGroup, FpVec};
use fcgroup_cli::check::invoke;
use fcgroup_cli::files::{to_json, GroupFile, ReportFile, SubgroupSpec};
use proptest::prelude::*;
use serde_json::Value;

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn path(d: &tempfile::TempDir, name: &str) -> String {
    d.path().join(name).display().to_string()
}

fn reason(err: &str) -> String {
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    v["reason"].as_str().unwrap().to_string()
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fcgroup");
    let out = Command::new(bin)
        .args(["invariants", "missing.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        reason(&String::from_utf8_lossy(&out.stderr)),
        "no such input"
    );
    let out = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("orbit-search"));
}

#[test]
fn capacity_errors_exit_two() {
    let d = tmp();
    let g = path(&d, "g.json");
    assert_eq!(
        invoke(&["build", "extraspecial", "--k", "2", "-o", &g]).0,
        0
    );
    let (code, _, err) = invoke(&["decompose", &g, "--max-elements", "100"]);
    assert_eq!(code, 2);
    assert_eq!(reason(&err), "capacity exceeded");
    let (code, _, _) = invoke(&["invariants", &g, "--max-elements", "100"]);
    assert_eq!(code, 2);
}

#[test]
fn invariants_report() {
    let d = tmp();
    let g = path(&d, "g.json");
    invoke(&["build", "free-nil2", "--n", "3", "-o", &g]);
    let (code, out, _) = invoke(&["invariants", &g]);
    assert_eq!(code, 0);
    let r: ReportFile = serde_json::from_str(&out).unwrap();
    assert_eq!(r.command, "invariants");
    assert_eq!(r.results["order"], 729);
    assert_eq!(r.results["kind"], "special");
    assert_eq!(r.results["g"], 3);
    assert_eq!(r.input_sha256.as_ref().map(String::len), Some(64));
    assert!(r.timing_ms.is_none());
    let (_, timed, _) = invoke(&["invariants", &g, "--timing"]);
    let r: ReportFile = serde_json::from_str(&timed).unwrap();
    assert!(r.timing_ms.is_some());
}

#[test]
fn maximal_abelians_annotation_round_trips() {
    let d = tmp();
    let g = path(&d, "g.json");
    let a = path(&d, "a.json");
    invoke(&["build", "tree-group", "--sizes", "2,3", "-o", &g]);
    let (code, out, _) = invoke(&["maximal-abelians", &g, "--annotate", &a]);
    assert_eq!(code, 0);
    let r: ReportFile = serde_json::from_str(&out).unwrap();
    assert_eq!(r.results["count"], 52);
    let text = std::fs::read_to_string(&a).unwrap();
    let f = GroupFile::parse(&text).unwrap();
    assert_eq!(f.subgroups.len(), 52);
    assert_eq!(to_json(&f), text);
    let grp = f.group().unwrap();
    let subs = f
        .named_subgroups(&grp, &fcgroup::Limits::default())
        .unwrap();
    assert!(subs.iter().all(|(_, s)| s.is_abelian(&grp)));
}

fn base_file() -> GroupFile {
    GroupFile::from_group(&fcgroup::constructions::extraspecial(3, 1).unwrap(), None)
}

#[test]
fn group_files_are_strict() {
    let mut f = base_file();
    f.tau = vec![(1, 0, vec![1])];
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    let mut f = base_file();
    f.tau = vec![(0, 1, vec![3])];
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    let mut f = base_file();
    f.tau = vec![(0, 1, vec![0])];
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    let mut f = base_file();
    f.tau = vec![(0, 1, vec![1, 0])];
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    let mut f = base_file();
    f.format_version = 2;
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    let mut v: Value = serde_json::from_str(&to_json(&base_file())).unwrap();
    v["colour"] = Value::from("blue");
    assert!(GroupFile::parse(&v.to_string()).is_err());
    let mut f = base_file();
    f.subgroups = vec![fcgroup_cli::files::NamedSubgroup {
        name: "H".into(),
        spec: SubgroupSpec::Pair {
            gens: vec![vec![2, 0]],
            central: vec![vec![1]],
        },
    }];
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    f.subgroups[0].spec = SubgroupSpec::Elements {
        elements: vec![(vec![0, 0], vec![0]), (vec![1, 0], vec![0])],
    };
    assert!(GroupFile::parse(&to_json(&f)).is_err());
    f.subgroups[0].spec = SubgroupSpec::Elements {
        elements: vec![
            (vec![0, 0], vec![0]),
            (vec![1, 0], vec![0]),
            (vec![2, 0], vec![0]),
        ],
    };
    assert!(GroupFile::parse(&to_json(&f)).is_ok());
}

#[test]
fn corpus_files_are_byte_stable() {
    for (name, g) in corpus(3u64.pow(6)).unwrap() {
        let text = to_json(&GroupFile::from_group(&g, Some(name)));
        let f = GroupFile::parse(&text).unwrap();
        assert_eq!(f.group().unwrap(), g);
        assert_eq!(to_json(&f), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_groups_round_trip(n in 1usize..5, m in 0usize..3, raw in proptest::collection::vec(0u32..5, 48)) {
        let p = 5;
        let tau = BilinearMap::from_fn(p, n, m, |i, j| {
            FpVec::new(p, (0..m).map(|k| raw[(i * 4 + j) * 3 % 48 + k]).collect())
        });
        let g = FormGroup::new(FactorSystem::new(tau)).unwrap();
        let text = to_json(&GroupFile::from_group(&g, None));
        let f = GroupFile::parse(&text).unwrap();
        prop_assert_eq!(f.group().unwrap(), g);
        prop_assert_eq!(to_json(&f), text);
    }
}

#[test]
fn family_commands() {
    let d = tmp();
    let fam = path(&d, "f.json");
    let input = SetFamily::new(6, vec![vec![0, 1], vec![2, 3, 5], vec![4], vec![0, 5]]).unwrap();
    std::fs::write(&fam, to_json(&input)).unwrap();
    let (code, out, _) = invoke(&["ad-convert", &fam]);
    assert_eq!(code, 0);
    let ad: SetFamily = serde_json::from_str(&out).unwrap();
    assert_eq!(ad.len(), 4);
    assert!(ad.is_almost_disjoint(6));
    let (code, out, _) = invoke(&["sunflower", &fam, "--r", "2"]);
    assert_eq!(code, 0);
    let r: ReportFile = serde_json::from_str(&out).unwrap();
    assert_eq!(r.results["petals"], 2);
    let g = path(&d, "g.json");
    assert_eq!(invoke(&["tree2group", &fam, "--k", "3", "-o", &g]).0, 0);
    let (code, out, _) = invoke(&["group2tree", &g]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<SetFamily>(&out).unwrap(), input);
    let (code, _, err) = invoke(&["tree2group", &fam, "--k", "2"]);
    assert_eq!(code, 1);
    assert_eq!(reason(&err), "invalid input");
    let plain = path(&d, "plain.json");
    invoke(&["build", "extraspecial", "--k", "1", "-o", &plain]);
    let (code, _, err) = invoke(&["group2tree", &plain]);
    assert_eq!(code, 1);
    assert_eq!(reason(&err), "missing family annotation");
}

#[test]
fn seeded_procedures_check_out_and_repeat() {
    let d = tmp();
    let t = path(&d, "t.json");
    invoke(&[
        "build",
        "tree-group",
        "--sizes",
        "2,3,4",
        "--fresh-central",
        "-o",
        &t,
    ]);
    for seed in ["1", "2", "3"] {
        for args in [
            vec![
                "diagonalize",
                &t,
                "--avoid",
                "2",
                "--fix",
                "2",
                "--seed",
                seed,
            ],
            vec!["filter", &t, "--requirements", "3", "--seed", seed],
        ] {
            let (code, out, err) = invoke(&args);
            assert_eq!(code, 0, "{err}");
            let r: ReportFile = serde_json::from_str(&out).unwrap();
            assert_eq!(r.results["check"], "ok");
            assert_eq!(r.seed, Some(seed.parse().unwrap()));
            assert_eq!(invoke(&args).1, out);
        }
    }
    let (code, out, _) = invoke(&["orbit-search", "--exps", "1,1"]);
    assert_eq!(code, 0);
    let r: ReportFile = serde_json::from_str(&out).unwrap();
    assert_eq!(r.results["automorphisms"], 48);
    assert_eq!(r.results["orbit_size"], 4);
    assert_eq!(r.seed, None);
}
