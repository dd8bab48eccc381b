//! Command-line front end: build groups and families, analyze them, and
//! write deterministic JSON reports.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fcgroup::abaut::{all_automorphisms, orbit_search, random_automorphisms, AbelianPGroup};
use fcgroup::analysis::{decompose_22, invariants, maximal_abelians, neumann_profile, ProfileMode};
use fcgroup::combinat::{
    ad_convert, extract_tree, random_family, random_tree, random_uniform_family, sunflower,
    tree_from_family,
};
use fcgroup::constructions::{
    chain_group, check_diagonal, check_qc_chain, diagonal_automorphism, extraspecial, family_group,
    free_nil2, qc_filter, random_scenario, tree_group, ChainKind, Requirement, TreeGroup,
};
use fcgroup::{FormGroup, GroupElement, Limits};
use serde_json::json;

pub mod check;
pub mod files;

use files::{
    element_json, read_input, rows, subgroup_spec, to_json, GroupFile, NamedSubgroup, ReportFile,
};

pub const DEFAULT_SEED: u64 = 1;

/// Error carrying its exit code: 1 for bad input or domain failures, 2 for
/// capacity, 3 for usage.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input {
        reason: &'static str,
        detail: String,
    },
    Domain(fcgroup::Error),
}

impl CliError {
    pub fn input(reason: &'static str, detail: impl Into<String>) -> CliError {
        CliError::Input {
            reason,
            detail: detail.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Domain(e) if e.is_capacity() => 2,
            _ => 1,
        }
    }

    fn reason(&self) -> &'static str {
        use fcgroup::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input { reason, .. } => reason,
            CliError::Domain(e) => match e {
                E::DimensionMismatch(_) => "dimension mismatch",
                E::ModulusMismatch { .. } => "modulus mismatch",
                E::InvalidModulus { .. } => "invalid modulus",
                E::Capacity { .. } => "capacity exceeded",
                E::Precondition(_) => "precondition failed",
                E::Infeasible(_) => "infeasible",
                E::Structure(_) => "structural error",
                E::Invalid(_) => "invalid input",
            },
        }
    }

    /// One JSON line for the error stream.
    pub fn line(&self) -> String {
        let detail = match self {
            CliError::Usage(d) | CliError::Input { detail: d, .. } => d.clone(),
            CliError::Domain(e) => e.to_string(),
        };
        json!({"exit": self.exit_code(), "reason": self.reason(), "detail": detail}).to_string()
    }
}

impl From<fcgroup::Error> for CliError {
    fn from(e: fcgroup::Error) -> CliError {
        CliError::Domain(e)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fcgroup",
    version,
    about = "Exponent-p class-2 groups, set families and their invariants"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    caps: Caps,
    /// Add wall-clock timing to reports (makes them non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Debug, Clone)]
struct Caps {
    /// Largest group order for element-exhaustive passes.
    #[arg(long, global = true, default_value_t = Limits::default().max_elements)]
    max_elements: u64,
    /// Largest group order for subgroup-exhaustive passes.
    #[arg(long, global = true, default_value_t = Limits::default().max_subgroup_order)]
    max_subgroup_order: u64,
    /// Largest isotropic search dimension.
    #[arg(long, global = true, default_value_t = Limits::default().max_isotropic_dim)]
    max_isotropic_dim: usize,
    /// Node budget for branch-and-bound searches.
    #[arg(long, global = true, default_value_t = Limits::default().max_search_nodes)]
    max_search_nodes: u64,
}

impl Caps {
    fn limits(&self) -> Limits {
        Limits {
            max_elements: self.max_elements,
            max_subgroup_order: self.max_subgroup_order,
            max_isotropic_dim: self.max_isotropic_dim,
            max_search_nodes: self.max_search_nodes,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a group file (or, for random-family/random-tree, a family file).
    Build(BuildArgs),
    /// Order, classification, g, chi and pmax with witnesses.
    Invariants(GroupInput),
    /// Extremal normalizer, centralizer and core indices.
    Profile {
        #[command(flatten)]
        input: GroupInput,
        /// Random subgroups to sample when the exact sweep is over the cap.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Maximal abelian subgroups.
    MaximalAbelians {
        #[command(flatten)]
        input: GroupInput,
        /// Also write the group file with the subgroups attached.
        #[arg(long)]
        annotate: Option<PathBuf>,
    },
    /// Abelian subgroups generating the group.
    Decompose(GroupInput),
    /// Search a family file for an r-sunflower.
    Sunflower {
        #[command(flatten)]
        input: FileInput,
        #[arg(long, default_value_t = 3)]
        r: usize,
        /// Largest number of distinct sets searched exhaustively.
        #[arg(long, default_value_t = fcgroup::combinat::DEFAULT_EXHAUSTIVE_THRESHOLD)]
        threshold: usize,
    },
    /// Rewrite a family of subsets of [0, h) as an almost-disjoint family.
    AdConvert {
        #[command(flatten)]
        input: FileInput,
        /// Height; defaults to the universe size.
        #[arg(long)]
        h: Option<usize>,
    },
    /// Build the family group of a family file.
    Tree2group {
        #[command(flatten)]
        input: FileInput,
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long)]
        k: usize,
    },
    /// Read the family back off a group's commutators.
    Group2tree {
        #[command(flatten)]
        input: FileInput,
        /// Number of probe generators; defaults to the annotated universe.
        #[arg(long)]
        probes: Option<usize>,
        /// First generator realizing a set; defaults to the annotation.
        #[arg(long)]
        base_gen_dim: Option<usize>,
        /// Central coordinate carrying the values; defaults to the annotation.
        #[arg(long)]
        target: Option<usize>,
        /// Also write the prefix tree of the family as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Diagonal central automorphism for a seeded scenario on a tree group.
    Diagonalize {
        #[command(flatten)]
        input: GroupInput,
        #[arg(long, default_value_t = 2)]
        avoid: usize,
        #[arg(long, default_value_t = 2)]
        fix: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Descending chain of conditions for seeded requirements on a tree group.
    Filter {
        #[command(flatten)]
        input: GroupInput,
        #[arg(long, default_value_t = 2)]
        requirements: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Subgroup of a finite abelian p-group with the largest orbit.
    OrbitSearch {
        #[arg(long, default_value_t = 3)]
        p: u32,
        /// Cyclic factor exponents, e.g. 1,1 for (Z_p)^2.
        #[arg(long, value_delimiter = ',', required = true)]
        exps: Vec<u32>,
        /// Use this many seeded automorphisms instead of all of them.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Cap on the number of automorphisms when using all of them.
        #[arg(long, default_value_t = 100_000)]
        max_automorphisms: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks and print one line per criterion.
    Selftest {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Args, Debug)]
struct GroupInput {
    /// Group file.
    input: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FileInput {
    input: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(subcommand)]
    what: Construction,
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Plain,
    Paired,
}

#[derive(Subcommand, Debug)]
enum Construction {
    /// Extraspecial group of order p^(1+2k).
    Extraspecial {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long)]
        k: usize,
    },
    /// Free class-2 exponent-p group on n generators.
    FreeNil2 {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long)]
        n: usize,
    },
    /// Direct sum of free class-2 groups, one block per size.
    TreeGroup {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Append the central coordinate that automorphisms act through.
        #[arg(long)]
        fresh_central: bool,
    },
    /// Chain group on n generators.
    Chain {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Plain)]
        kind: KindArg,
    },
    /// Elementary abelian group (Z_p)^(n+m).
    Abelian {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    /// Seeded random family of subsets of [0, n) (family file).
    RandomFamily {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        /// Make every set this size.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Seeded random level tree, written as its path family (family file).
    RandomTree {
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = 3)]
        max_children: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write the tree as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Errors go to `err` as one JSON line.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("").to_string();
            let fail = CliError::Usage(first.trim_start_matches("error: ").to_string());
            let _ = writeln!(err, "{}", fail.line());
            return fail.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit_code()
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    start: Instant,
}

impl Ctx<'_> {
    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<(), CliError> {
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| {
                CliError::input("cannot write output", format!("{}: {e}", p.display()))
            }),
            None => self
                .out
                .write_all(text.as_bytes())
                .map_err(|e| CliError::input("cannot write output", e.to_string())),
        }
    }

    fn report(
        &mut self,
        path: Option<&Path>,
        digest: Option<String>,
        seed: Option<u64>,
        exact: bool,
        results: serde_json::Value,
    ) -> Result<(), CliError> {
        let (command, args) = echo(&self.cli.command);
        let r = ReportFile {
            format_version: files::FORMAT_VERSION,
            command,
            args,
            input_sha256: digest,
            seed,
            exact,
            results,
            timing_ms: self
                .cli
                .timing
                .then(|| self.start.elapsed().as_millis() as u64),
        };
        self.emit(path, &to_json(&r))
    }
}

/// Command name and the parameters that determine its output; output paths
/// are left out so that reports do not depend on where they are written.
fn echo(c: &Command) -> (String, Vec<String>) {
    let name = match c {
        Command::Build(_) => "build",
        Command::Invariants(_) => "invariants",
        Command::Profile { .. } => "profile",
        Command::MaximalAbelians { .. } => "maximal-abelians",
        Command::Decompose(_) => "decompose",
        Command::Sunflower { .. } => "sunflower",
        Command::AdConvert { .. } => "ad-convert",
        Command::Tree2group { .. } => "tree2group",
        Command::Group2tree { .. } => "group2tree",
        Command::Diagonalize { .. } => "diagonalize",
        Command::Filter { .. } => "filter",
        Command::OrbitSearch { .. } => "orbit-search",
        Command::Selftest { .. } => "selftest",
    };
    let args = match c {
        Command::Invariants(_) | Command::Decompose(_) | Command::MaximalAbelians { .. } => vec![],
        Command::Profile { samples, seed, .. } => {
            vec![format!("--samples={samples}"), format!("--seed={seed}")]
        }
        Command::Sunflower { r, threshold, .. } => {
            vec![format!("--r={r}"), format!("--threshold={threshold}")]
        }
        Command::Diagonalize {
            avoid, fix, seed, ..
        } => {
            vec![
                format!("--avoid={avoid}"),
                format!("--fix={fix}"),
                format!("--seed={seed}"),
            ]
        }
        Command::Filter {
            requirements, seed, ..
        } => {
            vec![
                format!("--requirements={requirements}"),
                format!("--seed={seed}"),
            ]
        }
        Command::OrbitSearch {
            p,
            exps,
            random,
            seed,
            max_automorphisms,
            ..
        } => {
            let mut a = vec![
                format!("--p={p}"),
                format!(
                    "--exps={}",
                    exps.iter()
                        .map(u32::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                ),
            ];
            match random {
                Some(r) => a.extend([format!("--random={r}"), format!("--seed={seed}")]),
                None => a.push(format!("--max-automorphisms={max_automorphisms}")),
            }
            a
        }
        _ => vec![],
    };
    (name.to_string(), args)
}

fn load_group(path: &Path) -> Result<(GroupFile, FormGroup, String), CliError> {
    let (text, digest) = read_input(path)?;
    let f = GroupFile::parse(&text)?;
    let g = f.group()?;
    Ok((f, g, digest))
}

fn pmax_rows(xs: &[GroupElement]) -> Vec<(Vec<u32>, Vec<u32>)> {
    xs.iter().map(element_json).collect()
}

/// Tree group with the automorphism coordinate `d`, adding it when absent.
fn tree_with_d(f: &GroupFile) -> Result<(TreeGroup, bool), CliError> {
    let t = f.tree_group()?;
    if t.blocks.d_index.is_some() {
        Ok((t, false))
    } else {
        Ok((t.with_fresh_central()?, true))
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let limits = cli.caps.limits();
    let mut ctx = Ctx {
        cli,
        out,
        start: Instant::now(),
    };
    match &cli.command {
        Command::Build(b) => build(&mut ctx, b)?,
        Command::Invariants(i) => {
            let (_, g, digest) = load_group(&i.input)?;
            if g.order() > limits.max_elements {
                return Err(fcgroup::Error::Capacity {
                    what: "invariants group order".into(),
                    needed: g.order(),
                    limit: limits.max_elements,
                }
                .into());
            }
            let c = g.classify();
            let inv = invariants(&g, &limits)?;
            let results = json!({
                "p": g.p(),
                "order": g.order(),
                "gen_dim": g.gen_dim(),
                "cen_dim": g.cen_dim(),
                "kind": c.kind,
                "center_order": c.center_order,
                "derived_order": c.derived_order,
                "frattini_order": c.frattini_order,
                "g": inv.g,
                "chi": inv.chi,
                "pmax": inv.pmax,
                "g_witness": inv.g_witness.iter().map(rows).collect::<Vec<_>>(),
                "chi_witness": inv.chi_witness.iter().map(rows).collect::<Vec<_>>(),
                "pmax_witness": pmax_rows(&inv.pmax_witness),
            });
            ctx.report(i.out.as_deref(), Some(digest), None, true, results)?;
        }
        Command::Profile {
            input,
            samples,
            seed,
        } => {
            let (_, g, digest) = load_group(&input.input)?;
            let mode = ProfileMode::Auto {
                samples: *samples,
                seed: *seed,
            };
            let prof = neumann_profile(&g, mode, &limits)?;
            let exact = prof.exact;
            let seed = (!exact).then_some(*seed);
            ctx.report(input.out.as_deref(), Some(digest), seed, exact, json!(prof))?;
        }
        Command::MaximalAbelians { input, annotate } => {
            let (f, g, digest) = load_group(&input.input)?;
            let ms = maximal_abelians(&g, &limits)?;
            let subs: Vec<_> = ms
                .iter()
                .map(|m| {
                    json!({
                        "index": g.order() / m.order(),
                        "subgroup": subgroup_spec(m),
                    })
                })
                .collect();
            if let Some(path) = annotate {
                let mut f = f.clone();
                f.subgroups = ms
                    .iter()
                    .enumerate()
                    .map(|(k, m)| NamedSubgroup {
                        name: format!("M{k}"),
                        spec: subgroup_spec(m),
                    })
                    .collect();
                ctx.emit(Some(path), &to_json(&f))?;
            }
            let results = json!({"count": ms.len(), "maximal_abelians": subs});
            ctx.report(input.out.as_deref(), Some(digest), None, true, results)?;
        }
        Command::Decompose(i) => {
            let (_, g, digest) = load_group(&i.input)?;
            let d = decompose_22(&g, &limits)?;
            let parts: Vec<_> = d.parts.iter().map(subgroup_spec).collect();
            let results = json!({"count": d.parts.len(), "depth": d.depth, "parts": parts});
            ctx.report(i.out.as_deref(), Some(digest), None, true, results)?;
        }
        Command::Sunflower {
            input,
            r,
            threshold,
        } => {
            let (text, digest) = read_input(&input.input)?;
            let fam = files::parse_family(&text)?;
            if *r < 1 {
                return Err(CliError::input(
                    "invalid parameter",
                    "--r must be at least 1",
                ));
            }
            let rep = sunflower(&fam, *r, *threshold);
            ctx.report(input.out.as_deref(), Some(digest), None, true, json!(rep))?;
        }
        Command::AdConvert { input, h } => {
            let (text, _) = read_input(&input.input)?;
            let fam = files::parse_family(&text)?;
            let conv = ad_convert(&fam, h.unwrap_or(fam.universe_size()))?;
            ctx.emit(input.out.as_deref(), &to_json(&conv))?;
        }
        Command::Tree2group { input, p, k } => {
            let (text, _) = read_input(&input.input)?;
            let fam = files::parse_family(&text)?;
            let d = family_group(*p, *k, &fam)?;
            let mut f = GroupFile::from_group(&d.group, Some(format!("family_group({p},{k})")));
            f.family = Some(files::FamilyAnnotation {
                family: fam,
                base_gen_dim: d.base_gen_dim,
                target: d.target,
            });
            ctx.emit(input.out.as_deref(), &to_json(&f))?;
        }
        Command::Group2tree {
            input,
            probes,
            base_gen_dim,
            target,
            dot,
        } => {
            let (f, g, _) = load_group(&input.input)?;
            let ann = f.family.as_ref();
            let base = base_gen_dim
                .or(ann.map(|a| a.base_gen_dim))
                .ok_or_else(|| {
                    CliError::input(
                        "missing family annotation",
                        "pass --base-gen-dim and --target",
                    )
                })?;
            let target = target.or(ann.map(|a| a.target)).ok_or_else(|| {
                CliError::input(
                    "missing family annotation",
                    "pass --base-gen-dim and --target",
                )
            })?;
            let probes = probes
                .or(ann.map(|a| a.family.universe_size()))
                .unwrap_or(base);
            if probes > base || base > g.gen_dim() {
                return Err(CliError::input(
                    "invalid parameter",
                    format!("need probes <= base_gen_dim <= {}", g.gen_dim()),
                ));
            }
            let ps: Vec<_> = (0..probes).map(|i| g.generator(i)).collect();
            let reps: Vec<_> = (base..g.gen_dim()).map(|i| g.generator(i)).collect();
            let x = extract_tree(&g, &ps, &reps, target)?;
            if let Some(path) = dot {
                ctx.emit(Some(path), &tree_from_family(&x.family)?.to_dot())?;
            }
            ctx.emit(input.out.as_deref(), &to_json(&x.family))?;
        }
        Command::Diagonalize {
            input,
            avoid,
            fix,
            seed,
        } => {
            let (f, _, digest) = load_group(&input.input)?;
            let (t, added) = tree_with_d(&f)?;
            let (av, fx) = random_scenario(&t, *avoid, *fix, *seed)?;
            let d = diagonal_automorphism(&t, &av, &fx)?;
            let verdict = check_diagonal(&t, &av, &fx, &d);
            let results = json!({
                "added_central": added,
                "avoid": av.iter().map(|a| a.lambda.coords().to_vec()).collect::<Vec<_>>(),
                "fix": fx.iter().map(subgroup_spec).collect::<Vec<_>>(),
                "lambda": d.aut.lambda.coords(),
                "target": d.aut.target,
                "windows": d.windows.iter().map(|w| [w.start, w.end]).collect::<Vec<_>>(),
                "check": verdict.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| e.clone()),
            });
            ctx.report(
                input.out.as_deref(),
                Some(digest),
                Some(*seed),
                true,
                results,
            )?;
            if verdict.is_err() {
                return Ok(1);
            }
        }
        Command::Filter {
            input,
            requirements,
            seed,
        } => {
            let (f, _, digest) = load_group(&input.input)?;
            let (t, added) = tree_with_d(&f)?;
            let (auts, subs) = random_scenario(&t, *requirements, *requirements, *seed)?;
            let reqs: Vec<Requirement> = auts
                .into_iter()
                .zip(subs)
                .map(|(a, m)| Requirement {
                    abelian: m,
                    differ_from: a,
                })
                .collect();
            let q = qc_filter(&t, &reqs)?;
            let verdict = check_qc_chain(&t, &reqs, &q);
            let results = json!({
                "added_central": added,
                "requirements": reqs.iter().map(|r| json!({
                    "abelian": subgroup_spec(&r.abelian),
                    "differ_from": r.differ_from.lambda.coords(),
                })).collect::<Vec<_>>(),
                "lambda": q.aut.lambda.coords(),
                "target": q.aut.target,
                "chain": q.chain.iter().map(|c| json!({
                    "domain": c.domain,
                    "lambda": c.lambda.coords(),
                    "side": c.side,
                })).collect::<Vec<_>>(),
                "resolutions": q.resolutions,
                "check": verdict.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| e.clone()),
            });
            ctx.report(
                input.out.as_deref(),
                Some(digest),
                Some(*seed),
                true,
                results,
            )?;
            if verdict.is_err() {
                return Ok(1);
            }
        }
        Command::OrbitSearch {
            p,
            exps,
            random,
            seed,
            max_automorphisms,
            out,
        } => {
            let a = AbelianPGroup::new(*p, exps.clone())?;
            let phis = match random {
                Some(r) => random_automorphisms(&a, *r, *seed),
                None => all_automorphisms(&a, *max_automorphisms)?,
            };
            let res = orbit_search(&a, &phis, limits.max_subgroup_order)?;
            let results = json!({
                "order": a.order(),
                "automorphisms": phis.len(),
                "subgroup_count": res.subgroup_count,
                "orbit_size": res.orbit_size,
                "best_order": res.best.order(),
                "best": res.best.members.iter().map(|&i| a.element(i)).collect::<Vec<_>>(),
            });
            let seed = random.map(|_| *seed);
            ctx.report(out.as_deref(), None, seed, true, results)?;
        }
        Command::Selftest { only } => {
            let outcomes = check::selftest(only);
            let mut text = String::new();
            for o in &outcomes {
                text.push_str(&o.line());
                text.push('\n');
            }
            ctx.emit(None, &text)?;
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn build(ctx: &mut Ctx, b: &BuildArgs) -> Result<(), CliError> {
    let out = b.out.as_deref();
    let text = match &b.what {
        Construction::Extraspecial { p, k } => to_json(&GroupFile::from_group(
            &extraspecial(*p, *k)?,
            Some(format!("extraspecial({p},{k})")),
        )),
        Construction::FreeNil2 { p, n } => to_json(&GroupFile::from_group(
            &free_nil2(*p, *n)?,
            Some(format!("free_nil2({p},{n})")),
        )),
        Construction::TreeGroup {
            p,
            sizes,
            fresh_central,
        } => {
            let mut t = tree_group(*p, sizes)?;
            if *fresh_central {
                t = t.with_fresh_central()?;
            }
            let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
            let name = format!(
                "tree_group({p},[{}]){}",
                sizes.join(","),
                if *fresh_central { "+d" } else { "" }
            );
            to_json(&GroupFile::from_tree(&t, Some(name)))
        }
        Construction::Chain { p, n, kind } => {
            let (k, label) = match kind {
                KindArg::Plain => (ChainKind::Plain, "plain"),
                KindArg::Paired => (ChainKind::Paired, "paired"),
            };
            to_json(&GroupFile::from_group(
                &chain_group(*p, *n, k)?,
                Some(format!("chain_group({p},{n},{label})")),
            ))
        }
        Construction::Abelian { p, n, m } => to_json(&GroupFile::from_group(
            &FormGroup::abelian(*p, *n, *m)?,
            Some(format!("abelian({p},{n},{m})")),
        )),
        Construction::RandomFamily { n, count, k, seed } => {
            let fam = match k {
                Some(k) => random_uniform_family(*n, *k, *count, *seed)?,
                None => random_family(*n, *count, *seed),
            };
            to_json(&fam)
        }
        Construction::RandomTree {
            height,
            max_children,
            seed,
            dot,
        } => {
            let t = random_tree(*height, *max_children, *seed)?;
            if let Some(path) = dot {
                ctx.emit(Some(path), &t.to_dot())?;
            }
            to_json(&t.path_family())
        }
    };
    ctx.emit(out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let cap = CliError::from(fcgroup::Error::Capacity {
            what: "x".into(),
            needed: 2,
            limit: 1,
        });
        assert_eq!(cap.exit_code(), 2);
        assert_eq!(CliError::Usage("u".into()).exit_code(), 3);
        assert_eq!(CliError::input("no such input", "f").exit_code(), 1);
        assert_eq!(
            CliError::from(fcgroup::Error::Infeasible("i".into())).exit_code(),
            1
        );
        let line: serde_json::Value = serde_json::from_str(&cap.line()).unwrap();
        assert_eq!(line["reason"], "capacity exceeded");
        assert!(!cap.line().contains('\n'));
    }

    #[test]
    fn echo_leaves_out_paths() {
        let cli = Cli::try_parse_from([
            "fcgroup", "profile", "g.json", "-o", "r.json", "--seed", "4",
        ])
        .unwrap();
        let (name, args) = echo(&cli.command);
        assert_eq!(name, "profile");
        assert_eq!(args, vec!["--samples=2000", "--seed=4"]);
    }

    #[test]
    fn caps_default_to_the_library_limits() {
        let cli = Cli::try_parse_from(["fcgroup", "selftest"]).unwrap();
        assert_eq!(cli.caps.limits(), Limits::default());
    }
}
