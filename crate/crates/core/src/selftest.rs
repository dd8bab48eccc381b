//! The library-side acceptance criteria, each a self-contained check with a
//! pinned time budget. A criterion passes only when every check holds and
//! the run finishes inside its budget.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abaut::{
    abelian_p_groups, all_automorphisms, for_each_automorphism, orbit_search, random_automorphisms,
    verify_height_fix, verify_height_fix_rows, AbelianPGroup,
};
use crate::analysis::{
    closure, decompose_22, gnum, invariants, maximal_abelians, neumann_profile, pnum, ProfileMode,
};
use crate::combinat::{
    ad_convert, extract_tree, is_sunflower, random_uniform_family, sunflower, LevelTree, SetFamily,
    DEFAULT_EXHAUSTIVE_THRESHOLD,
};
use crate::constructions::{
    chain_group, check_diagonal, check_qc_chain, corpus, diagonal_automorphism, extraspecial,
    family_group, free_nil2, qc_filter, random_scenario, tree_group, ChainKind, Requirement,
};
use crate::error::Result;
use crate::formgroup::GroupKind;
use crate::fpspace::{span_reduce, FpVec};
use crate::oracle::{ab_orbit_oracle, members_of, Table};
use crate::Limits;

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
    pub budget_ms: u128,
}

impl Outcome {
    /// `criterion 3 PASS tree-group branches (0.41 s of 10 s): ...`
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.2} s of {} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed_ms as f64 / 1000.0,
            self.budget_ms / 1000,
            self.detail
        )
    }
}

/// Collects named checks; the first failing check goes into the detail.
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Checks {
        Checks {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, got: T, want: T, what: &str) {
        if got != want {
            self.failures
                .push(format!("{what}: got {got:?}, want {want:?}"));
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

pub const CRITERIA: [(u32, &str, u64); 13] = [
    (1, "extraspecial(3,1) against the table oracle", 1),
    (2, "free_nil2(3,3) structure", 5),
    (3, "tree_group(3,[2,3]) branches", 10),
    (4, "chain groups", 10),
    (5, "family groups round trip", 30),
    (6, "extraspecial profile law", 60),
    (7, "almost-disjoint conversion", 1),
    (8, "sunflower guarantee", 5),
    (9, "height-fix property", 60),
    (10, "orbit search against its oracle", 5),
    (11, "decomposition over the corpus", 60),
    (12, "maximal abelians against the table oracle", 60),
    (13, "diagonalization and filter checkers", 10),
];

pub fn run(id: u32) -> Option<Outcome> {
    let &(_, name, budget) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let mut c = Checks::new();
    let body: fn(&mut Checks) -> Result<()> = match id {
        1 => c1,
        2 => c2,
        3 => c3,
        4 => c4,
        5 => c5,
        6 => c6,
        7 => c7,
        8 => c8,
        9 => c9,
        10 => c10,
        11 => c11,
        12 => c12,
        _ => c13,
    };
    if let Err(e) = body(&mut c) {
        c.failures.push(format!("error: {e}"));
    }
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    if elapsed > budget {
        c.failures
            .push(format!("over budget: {:.2} s", elapsed.as_secs_f64()));
    }
    let detail = if c.failures.is_empty() {
        c.notes.join("; ")
    } else {
        c.failures.join("; ")
    };
    Some(Outcome {
        id,
        name,
        passed: c.failures.is_empty(),
        detail,
        elapsed_ms: elapsed.as_millis(),
        budget_ms: budget.as_millis(),
    })
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|c| run(c.0)).collect()
}

fn c1(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let g = extraspecial(3, 1)?;
    let t = Table::from_group(&g, &l)?;
    let cls = g.classify();
    c.eq(g.order(), 27, "order");
    c.eq(cls.center_order, 3, "center order");
    c.eq(
        t.center().len() as u64,
        cls.center_order,
        "center order (oracle)",
    );
    let ma = maximal_abelians(&g, &l)?;
    c.eq(ma.len(), 4, "maximal abelian count");
    c.check(
        ma.iter().all(|m| g.order() / m.order() == 3),
        "maximal abelian index 3",
    );
    let mine: BTreeSet<Vec<usize>> = ma.iter().map(|m| members_of(&g, m)).collect();
    let theirs: BTreeSet<Vec<usize>> = t.maximal_abelians().into_iter().collect();
    c.check(mine == theirs, "maximal abelians differ from the oracle");
    let inv = invariants(&g, &l)?;
    c.eq((inv.g, inv.chi, inv.pmax), (2, 4, 4), "(g, chi, pmax)");
    c.eq(
        (t.gnum(), t.chinum(), t.pnum()),
        (inv.g, inv.chi, inv.pmax),
        "(g, chi, pmax) oracle",
    );
    let pr = neumann_profile(&g, ProfileMode::Exact, &l)?;
    let op = t.profile();
    c.eq(
        (pr.gz, pr.max_n, pr.max_c, pr.max_core),
        (9, 3, 9, 3),
        "profile",
    );
    c.eq(
        (op.gz, op.max_n, op.max_c, op.max_core, op.max_abelian_n),
        (pr.gz, pr.max_n, pr.max_c, pr.max_core, pr.max_abelian_n),
        "profile oracle",
    );
    c.note("27, Z=3, 4 maximal abelians of index 3, g=2 chi=4 pmax=4, profile (9,3,9,3)");
    Ok(())
}

fn c2(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let g = free_nil2(3, 3)?;
    c.eq(g.order(), 729, "order");
    let cls = g.classify();
    c.eq(cls.kind, GroupKind::Special, "kind");
    let s = g.structural_subgroups();
    c.check(
        s.center == s.derived && s.derived == s.frattini,
        "Z, G' and Phi differ",
    );
    c.eq(s.center.order(), 27, "|Z|");
    let ma = maximal_abelians(&g, &l)?;
    c.eq(ma.len(), 13, "maximal abelian count");
    c.check(
        ma.iter()
            .all(|m| m.gen_span().dim() == 1 && m.central_part().is_full()),
        "a maximal abelian is not B + line",
    );
    c.eq(gnum(&g, &l)?.count, 3, "g");
    c.note("729, special with |Z|=|G'|=|Phi|=27, 13 maximal abelians B+line, g=3");
    Ok(())
}

fn c3(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let t = tree_group(3, &[2, 3])?;
    let ma = maximal_abelians(&t.group, &l)?;
    c.eq(ma.len(), 52, "maximal abelian count");
    let mut seen = BTreeSet::new();
    for m in &ma {
        match t.branch_of(m) {
            Some(b) => {
                let back = t.branch_subgroup(&b)?;
                c.check(
                    back.same_as(m, &t.group),
                    "branch does not give back its subgroup",
                );
                seen.insert(b);
            }
            None => c.check(false, "maximal abelian without a branch"),
        }
    }
    let all: BTreeSet<Vec<FpVec>> = t.branches().into_iter().collect();
    c.eq(all.len(), 52, "branch tuples");
    c.check(
        seen == all,
        "subgroups and branch tuples are not in bijection",
    );
    c.note("52 maximal abelians paired with 4 x 13 branch tuples");
    Ok(())
}

fn c4(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let n = 4;
    let f = chain_group(3, n, ChainKind::Paired)?;
    let a0: Vec<_> = (0..n)
        .map(|i| f.mul(&f.generator(i), &f.generator(n + i)))
        .collect();
    let a1: Vec<_> = (0..n).map(|i| f.generator(n + i)).collect();
    let abelian =
        |xs: &[crate::GroupElement]| xs.iter().all(|x| xs.iter().all(|y| f.commutes(x, y)));
    c.check(abelian(&a0) && abelian(&a1), "A_0 or A_1 is not abelian");
    let big = Limits {
        max_elements: f.order(),
        ..l.clone()
    };
    let both: Vec<_> = a0.iter().chain(&a1).cloned().collect();
    c.eq(
        closure(&f, &both, &big)?.order(),
        f.order(),
        "order of <A_0, A_1>",
    );
    c.eq(gnum(&f, &l)?.count, 2, "g of the paired group");

    let g = chain_group(3, n, ChainKind::Plain)?;
    let els: Vec<_> = g.elements().collect();
    let mut bad = 0usize;
    for x in &els {
        for y in &els {
            let mut s: i64 = 0;
            for a in 0..n {
                for b in a + 1..n {
                    s += x.v.get(a) as i64 * y.v.get(b) as i64
                        - x.v.get(b) as i64 * y.v.get(a) as i64;
                }
            }
            let want = g.power(&g.central(0), s)?;
            if g.comm(x, y) != want {
                bad += 1;
            }
        }
    }
    c.eq(bad, 0, "pairs breaking the commutator formula");
    let gens: Vec<_> = (0..n).map(|i| g.generator(i)).collect();
    c.check(
        gens.iter()
            .enumerate()
            .all(|(i, x)| gens[i + 1..].iter().all(|y| !g.commutes(x, y))),
        "generators commute",
    );
    let pm = pnum(&g, &l)?.size;
    c.check(pm >= 4, format!("pmax {pm} < 4"));
    c.note(format!(
        "paired g=2 with <A_0,A_1>=G; plain formula on {} pairs, pmax={pm}",
        els.len() * els.len()
    ));
    Ok(())
}

/// Three distinct sets over four generators with linearly independent
/// characteristic vectors.
pub fn independent_family(seed: u64) -> Result<SetFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let sets: Vec<Vec<usize>> = (0..3)
            .map(|_| (0..4).filter(|_| rng.gen_bool(0.5)).collect())
            .collect();
        let f = SetFamily::new(4, sets)?;
        let vecs: Vec<FpVec> = f
            .sets()
            .iter()
            .map(|s| FpVec::new(3, (0..4).map(|i| u32::from(s.contains(&i))).collect()))
            .collect();
        if span_reduce(3, 4, &vecs)?.dim() == 3 {
            return Ok(f);
        }
    }
}

fn c5(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let mut worst = 0;
    for seed in 0..20 {
        let f = independent_family(seed)?;
        let d = family_group(3, 2, &f)?;
        let g = &d.group;
        let probes: Vec<_> = (0..4).map(|i| g.generator(i)).collect();
        let reps: Vec<_> = (0..3).map(|i| d.phi(i)).collect();
        let x = extract_tree(g, &probes, &reps, d.target)?;
        c.check(
            x.family.canonical() == f.canonical(),
            format!("seed {seed}: family not recovered"),
        );
        let gz = g.order() / g.classify().center_order;
        c.eq(gz, 729, &format!("seed {seed}: |G/Z|"));
        for m in maximal_abelians(g, &l)? {
            let idx = g.order() / m.order();
            worst = worst.max(idx);
            c.check(
                idx <= 81,
                format!("seed {seed}: maximal abelian of index {idx}"),
            );
        }
    }
    c.note(format!(
        "20 families recovered; max abelian index {worst} <= 81 < |G/Z| = 729"
    ));
    Ok(())
}

fn c6(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    for (p, k) in [(3u32, 1usize), (3, 2), (5, 1)] {
        let g = extraspecial(p, k)?;
        let pr = neumann_profile(&g, ProfileMode::Exact, &l)?;
        let pk = (p as u64).pow(k as u32);
        c.check(pr.exact, format!("({p},{k}) profile not exact"));
        c.eq(
            (pr.max_n, pr.gz),
            (pk, pk * pk),
            &format!("({p},{k}) (maxN, gz)"),
        );
        if k == 1 {
            let op = Table::from_group(&g, &l)?.profile();
            c.eq(
                (op.max_n, op.gz),
                (pr.max_n, pr.gz),
                &format!("({p},{k}) oracle"),
            );
        }
    }
    c.note("maxN = p^k and |G/Z| = p^2k for (3,1), (3,2), (5,1)");
    Ok(())
}

/// Length of the longest common prefix of `a` and `b` as subsets of `h`
/// levels.
fn agreement(a: &[usize], b: &[usize], h: usize) -> usize {
    (0..h)
        .take_while(|&l| a.contains(&l) == b.contains(&l))
        .count()
}

fn check_ad(c: &mut Checks, f: &SetFamily, h: usize, tag: &str) -> Result<()> {
    let out = ad_convert(f, h)?;
    c.eq(out.len(), f.len(), &format!("{tag}: output count"));
    c.check(
        out.sets().iter().all(|s| s.len() == h),
        format!("{tag}: output set size"),
    );
    c.check(!out.has_duplicates(), format!("{tag}: not injective"));
    c.check(
        out.is_almost_disjoint(h),
        format!("{tag}: intersection of size h"),
    );
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            let inter = out.sets()[i]
                .iter()
                .filter(|x| out.sets()[j].contains(x))
                .count();
            c.eq(
                inter,
                agreement(&f.sets()[i], &f.sets()[j], h),
                &format!("{tag}: intersection ({i},{j})"),
            );
        }
    }
    Ok(())
}

fn c7(c: &mut Checks) -> Result<()> {
    let t = LevelTree::complete(2, 4)?;
    let sets: Vec<Vec<usize>> = t
        .branches()
        .iter()
        .map(|b| (0..4).filter(|&d| b[d] % 2 == 1).collect())
        .collect();
    let f = SetFamily::new(4, sets)?;
    c.eq(f.len(), 16, "branches");
    check_ad(c, &f, 4, "binary tree")?;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rng.gen_range(2..=6);
        let count = rng.gen_range(1..=(1usize << h).min(12));
        let mut seen = BTreeSet::new();
        while seen.len() < count {
            let s: Vec<usize> = (0..h).filter(|_| rng.gen_bool(0.5)).collect();
            seen.insert(s);
        }
        check_ad(
            c,
            &SetFamily::new(h, seen.into_iter().collect())?,
            h,
            &format!("seed {seed}"),
        )?;
    }
    c.note("16 sets of size 4 pairwise meeting in < 4; 50 random instances");
    Ok(())
}

fn c8(c: &mut Checks) -> Result<()> {
    let r = 3;
    for seed in 0..100u64 {
        let k = 1 + (seed % 3) as usize;
        let n = [0, 10, 10, 12][k];
        let bound = crate::combinat::erdos_rado_bound(k, r).expect("small") as usize;
        let count = bound + 1 + (seed as usize % 5);
        let f = random_uniform_family(n, k, count, seed)?;
        let rep = sunflower(&f, r, DEFAULT_EXHAUSTIVE_THRESHOLD);
        c.check(rep.premise_met, format!("seed {seed}: premise not met"));
        match rep.found {
            Some(s) => c.check(
                s.members.len() >= r && is_sunflower(&f, &s),
                format!("seed {seed}: invalid sunflower"),
            ),
            None => c.check(false, format!("seed {seed}: no sunflower")),
        }
    }
    c.note("100 families above k!(r-1)^k, every sunflower exact-root");
    Ok(())
}

/// Exhaustive over every abelian 3-group of order at most 81, every
/// 2-group up to 32 and the 5- and 7-groups up to `p^2`; sampled on the
/// 3-groups up to `3^6` and the 2-groups of order 64.
fn c9(c: &mut Checks) -> Result<()> {
    let mut exhaustive = 0u64;
    let mut failures = 0u64;
    let mut groups = abelian_p_groups(3, 4)?;
    groups.extend(abelian_p_groups(2, 5)?);
    groups.extend(abelian_p_groups(5, 2)?);
    groups.extend(abelian_p_groups(7, 2)?);
    for a in &groups {
        for_each_automorphism(a, |m| {
            exhaustive += 1;
            if !verify_height_fix_rows(a, m).holds {
                failures += 1;
            }
        });
    }
    let mut sampled = 0u64;
    let mut pool = abelian_p_groups(3, 6)?;
    pool.extend(
        abelian_p_groups(2, 6)?
            .into_iter()
            .filter(|a| a.order() == 64),
    );
    for (i, a) in pool.iter().enumerate() {
        for phi in random_automorphisms(a, 200, 9000 + i as u64) {
            sampled += 1;
            if !verify_height_fix(&phi).holds {
                failures += 1;
            }
        }
    }
    c.eq(failures, 0, "height-fix failures");
    c.note(format!(
        "{exhaustive} automorphisms of {} groups exhaustively, {sampled} sampled on {} groups, 0 failures",
        groups.len(),
        pool.len()
    ));
    Ok(())
}

fn c10(c: &mut Checks) -> Result<()> {
    let cap = 3u64.pow(6);
    let a = AbelianPGroup::new(3, vec![1, 1])?;
    let all = all_automorphisms(&a, 1000)?;
    c.eq(all.len(), 48, "automorphisms of (Z_3)^2");
    let r = orbit_search(&a, &all, cap)?;
    let (o, best) = ab_orbit_oracle(&a, &all);
    c.eq(r.orbit_size, 4, "orbit size");
    c.eq((r.orbit_size, &r.best), (o, &best), "oracle");
    let groups = abelian_p_groups(3, 4)?;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = groups[rng.gen_range(0..groups.len())].clone();
        let count = rng.gen_range(1..=5);
        let phis = random_automorphisms(&a, count, 500 + seed);
        let r = orbit_search(&a, &phis, cap)?;
        let (o, best) = ab_orbit_oracle(&a, &phis);
        c.check(
            r.orbit_size == o && r.best == best,
            format!("seed {seed}: {:?} differs from the oracle", a.exps()),
        );
    }
    c.note("(Z_3)^2 under all 48: orbit 4; 20 seeded instances agree");
    Ok(())
}

fn c11(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let groups = corpus(3u64.pow(6))?;
    for (name, g) in &groups {
        let d = decompose_22(g, &l)?;
        c.check(
            d.parts.iter().all(|h| h.is_abelian(g)),
            format!("{name}: non-abelian part"),
        );
        let gens: Vec<_> = d.parts.iter().flat_map(|h| h.generators(g)).collect();
        c.eq(
            closure(g, &gens, &l)?.order(),
            g.order(),
            &format!("{name}: closure order"),
        );
        let gn = gnum(g, &l)?.count;
        c.check(
            d.parts.len() >= gn,
            format!("{name}: {} parts < g = {gn}", d.parts.len()),
        );
    }
    c.note(format!("{} corpus groups", groups.len()));
    Ok(())
}

fn c12(c: &mut Checks) -> Result<()> {
    let l = Limits::default();
    let groups = corpus(3u64.pow(5))?;
    for (name, g) in &groups {
        let mine: BTreeSet<Vec<usize>> = maximal_abelians(g, &l)?
            .iter()
            .map(|m| members_of(g, m))
            .collect();
        let theirs: BTreeSet<Vec<usize>> = Table::from_group(g, &l)?
            .maximal_abelians()
            .into_iter()
            .collect();
        c.check(mine == theirs, format!("{name}: maximal abelians differ"));
    }
    c.note(format!("{} corpus groups of order <= 243", groups.len()));
    Ok(())
}

fn c13(c: &mut Checks) -> Result<()> {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes: Vec<usize> = (0..rng.gen_range(3..=5))
            .map(|_| rng.gen_range(2..=3))
            .collect();
        let t = tree_group(3, &sizes)?.with_fresh_central()?;
        let k = rng.gen_range(1..=sizes.len().min(3));
        let (avoid, fix) = random_scenario(&t, k, k, seed)?;
        let d = diagonal_automorphism(&t, &avoid, &fix)?;
        if let Err(e) = check_diagonal(&t, &avoid, &fix, &d) {
            c.check(false, format!("seed {seed}: diagonal {e}"));
        }
        let (auts, subs) = random_scenario(&t, k, k, 1000 + seed)?;
        let reqs: Vec<Requirement> = auts
            .into_iter()
            .zip(subs)
            .map(|(a, m)| Requirement {
                abelian: m,
                differ_from: a,
            })
            .collect();
        let q = qc_filter(&t, &reqs)?;
        if let Err(e) = check_qc_chain(&t, &reqs, &q) {
            c.check(false, format!("seed {seed}: filter {e}"));
        }
    }
    c.note("20 diagonalizations and 20 filter chains verified");
    Ok(())
}
