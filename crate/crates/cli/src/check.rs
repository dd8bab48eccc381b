//! The end-to-end command-line criterion and the combined self-test.

use std::path::Path;
use std::time::{Duration, Instant};

use fcgroup::combinat::SetFamily;
use fcgroup::constructions::corpus;
use fcgroup::selftest::{self, Outcome, CRITERIA};
use serde_json::Value;

use crate::files::{to_json, GroupFile, ReportFile};

pub const CLI_CRITERION: u32 = 14;
const CLI_NAME: &str = "command-line round trips";
const CLI_BUDGET_S: u64 = 5;

/// Criteria `only` (all when empty), library checks first.
pub fn selftest(only: &[u32]) -> Vec<Outcome> {
    let wanted = |id: u32| only.is_empty() || only.contains(&id);
    let mut out: Vec<Outcome> = CRITERIA
        .iter()
        .filter(|c| wanted(c.0))
        .filter_map(|c| selftest::run(c.0))
        .collect();
    if wanted(CLI_CRITERION) {
        out.push(criterion14());
    }
    out
}

/// Exit code, stdout and stderr of one in-process invocation.
pub fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fcgroup").chain(args.iter().copied());
    let code = crate::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

struct Steps {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Steps {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    /// Runs a command that must succeed and returns its stdout.
    fn ok(&mut self, args: &[&str]) -> String {
        let (code, out, err) = invoke(args);
        self.check(
            code == 0,
            format!("{} exited {code}: {}", args.join(" "), err.trim()),
        );
        out
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_default()
}

fn report(path: &Path) -> Option<ReportFile> {
    serde_json::from_str(&read(path)).ok()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn body(s: &mut Steps, dir: &Path) -> Result<(), String> {
    let g = p(dir, "g.json");
    let r = p(dir, "r.json");
    s.ok(&["build", "extraspecial", "--p", "3", "--k", "1", "-o", &g]);
    s.ok(&["invariants", &g, "-o", &r]);
    let rep = report(Path::new(&r)).ok_or("invariants report does not parse")?;
    let res = &rep.results;
    let want = [("order", 27), ("g", 2), ("chi", 4), ("pmax", 4)];
    for (k, v) in want {
        s.check(res[k] == v, format!("invariants {k} = {}", res[k]));
    }
    s.check(
        res["kind"] == "extraspecial",
        format!("kind = {}", res["kind"]),
    );

    let mut files = 0;
    for (name, grp) in corpus(3u64.pow(6)).map_err(|e| e.to_string())? {
        let text = to_json(&GroupFile::from_group(&grp, Some(name.clone())));
        let parsed = GroupFile::parse(&text).map_err(|e| e.line())?;
        let same = parsed.group().map_err(|e| e.line())? == grp;
        s.check(
            same && to_json(&parsed) == text,
            format!("{name}: group file round trip"),
        );
        files += 1;
    }
    let builds: [&[&str]; 6] = [
        &["build", "extraspecial", "--p", "5", "--k", "1"],
        &["build", "free-nil2", "--n", "3"],
        &["build", "tree-group", "--sizes", "2,3", "--fresh-central"],
        &["build", "chain", "--n", "3", "--kind", "paired"],
        &["build", "abelian", "--n", "2", "--m", "1"],
        &[
            "maximal-abelians",
            &g,
            "--annotate",
            &p(dir, "annotated.json"),
        ],
    ];
    for args in builds {
        let out = s.ok(args);
        let text = if args[0] == "build" {
            out
        } else {
            read(&dir.join("annotated.json"))
        };
        let again = GroupFile::parse(&text).map(|f| to_json(&f)).ok();
        s.check(
            again.as_deref() == Some(text.as_str()),
            format!("{}: not byte stable", args.join(" ")),
        );
        files += 1;
    }

    let fam = p(dir, "family.json");
    let input =
        SetFamily::new(4, vec![vec![0, 2], vec![1], vec![0, 1, 3]]).map_err(|e| e.to_string())?;
    std::fs::write(&fam, to_json(&input)).map_err(|e| e.to_string())?;
    let fg = p(dir, "fg.json");
    s.ok(&["tree2group", &fam, "--p", "3", "--k", "2", "-o", &fg]);
    let back = s.ok(&["group2tree", &fg, "--dot", &p(dir, "tree.dot")]);
    let recovered: Option<SetFamily> = serde_json::from_str(&back).ok();
    s.check(
        recovered.map(|f| f.canonical()) == Some(input.canonical()),
        "group2tree does not recover the family",
    );
    s.check(
        read(&dir.join("tree.dot")).starts_with("digraph"),
        "no DOT output",
    );

    let tg = p(dir, "tg.json");
    s.ok(&[
        "build",
        "tree-group",
        "--sizes",
        "2,3,3",
        "--fresh-central",
        "-o",
        &tg,
    ]);
    let seeded: [&[&str]; 5] = [
        &[
            "diagonalize",
            &tg,
            "--avoid",
            "2",
            "--fix",
            "2",
            "--seed",
            "11",
        ],
        &["filter", &tg, "--requirements", "2", "--seed", "11"],
        &[
            "orbit-search",
            "--exps",
            "1,2",
            "--random",
            "3",
            "--seed",
            "11",
        ],
        &["profile", &g, "--seed", "11"],
        &["build", "random-tree", "--height", "4", "--seed", "11"],
    ];
    for args in seeded {
        let a = s.ok(args);
        let b = s.ok(args);
        s.check(
            a == b && !a.is_empty(),
            format!("{}: output differs between runs", args.join(" ")),
        );
    }
    let (_, a, _) = invoke(&[
        "build",
        "random-family",
        "--n",
        "8",
        "--count",
        "6",
        "--seed",
        "1",
    ]);
    let (_, b, _) = invoke(&[
        "build",
        "random-family",
        "--n",
        "8",
        "--count",
        "6",
        "--seed",
        "2",
    ]);
    s.check(a != b, "different seeds gave the same family");

    let bad = p(dir, "bad.json");
    std::fs::write(&bad, "{\"format_version\": 1, \"p\": 3}").map_err(|e| e.to_string())?;
    let big = p(dir, "big.json");
    s.ok(&["build", "free-nil2", "--n", "4", "-o", &big]);
    let missing = p(dir, "missing.json");
    let errors: [(&[&str], i32, &str); 5] = [
        (&["invariants", &missing], 1, "no such input"),
        (&["invariants", &bad], 1, "malformed input"),
        (&["decompose", &big], 2, "capacity exceeded"),
        (&["invariants", &g, "--no-such-flag"], 3, "usage"),
        (
            &["build", "extraspecial", "--p", "4", "--k", "1"],
            1,
            "invalid modulus",
        ),
    ];
    for (args, code, reason) in errors {
        let (c, _, err) = invoke(args);
        let line: Option<Value> = serde_json::from_str(err.trim()).ok();
        let got = line.as_ref().map(|l| l["reason"].clone());
        s.check(
            c == code && err.trim().lines().count() == 1 && got == Some(Value::from(reason)),
            format!("{}: exit {c}, stderr {}", args.join(" "), err.trim()),
        );
    }
    s.notes.push(format!(
        "{files} group files byte stable, family round trip, 5 seeded commands repeatable, exit codes 1/1/2/3/1"
    ));
    Ok(())
}

pub fn criterion14() -> Outcome {
    let start = Instant::now();
    let mut s = Steps {
        failures: Vec::new(),
        notes: Vec::new(),
    };
    match tempfile::tempdir() {
        Ok(dir) => {
            if let Err(e) = body(&mut s, dir.path()) {
                s.failures.push(e);
            }
        }
        Err(e) => s.failures.push(format!("no scratch directory: {e}")),
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(CLI_BUDGET_S) {
        s.failures
            .push(format!("over budget: {:.2} s", elapsed.as_secs_f64()));
    }
    let passed = s.failures.is_empty();
    Outcome {
        id: CLI_CRITERION,
        name: CLI_NAME,
        passed,
        detail: if passed {
            s.notes.join("; ")
        } else {
            s.failures.join("; ")
        },
        elapsed_ms: elapsed.as_millis(),
        budget_ms: u128::from(CLI_BUDGET_S) * 1000,
    }
}
