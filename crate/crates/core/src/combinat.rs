//! Finite set families, sunflowers, level trees, and the prefix coding that
//! turns a family of branches into an almost-disjoint family.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formgroup::{FormGroup, GroupElement};
use crate::fpspace::FpVec;

/// Subsets of `[0, universe_size)`, each stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFamily", into = "RawFamily")]
pub struct SetFamily {
    universe_size: usize,
    sets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawFamily {
    universe_size: usize,
    sets: Vec<Vec<usize>>,
}

impl TryFrom<RawFamily> for SetFamily {
    type Error = Error;

    fn try_from(r: RawFamily) -> Result<SetFamily> {
        SetFamily::new(r.universe_size, r.sets)
    }
}

impl From<SetFamily> for RawFamily {
    fn from(f: SetFamily) -> RawFamily {
        RawFamily {
            universe_size: f.universe_size,
            sets: f.sets,
        }
    }
}

impl SetFamily {
    /// Sorts each set; rejects out-of-range or repeated indices.
    pub fn new(universe_size: usize, sets: Vec<Vec<usize>>) -> Result<SetFamily> {
        let mut out = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Invalid(format!("set {i} repeats an element")));
            }
            if s.last().is_some_and(|&x| x >= universe_size) {
                return Err(Error::Invalid(format!(
                    "set {i} leaves the universe [0, {universe_size})"
                )));
            }
            out.push(s);
        }
        Ok(SetFamily {
            universe_size,
            sets: out,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Common set size, if all sets have one.
    pub fn uniform_size(&self) -> Option<usize> {
        let k = self.sets.first()?.len();
        self.sets.iter().all(|s| s.len() == k).then_some(k)
    }

    /// Sets sorted and deduplicated.
    pub fn canonical(&self) -> SetFamily {
        let mut sets = self.sets.clone();
        sets.sort();
        sets.dedup();
        SetFamily {
            universe_size: self.universe_size,
            sets,
        }
    }

    pub fn has_duplicates(&self) -> bool {
        self.canonical().len() != self.len()
    }

    /// Every pairwise intersection has fewer than `bound` elements.
    pub fn is_almost_disjoint(&self, bound: usize) -> bool {
        self.sets.iter().enumerate().all(|(i, a)| {
            self.sets[i + 1..]
                .iter()
                .all(|b| intersect(a, b).len() < bound)
        })
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sunflower {
    pub root: Vec<usize>,
    /// Indices into the searched family.
    pub members: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SunflowerMethod {
    Greedy,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SunflowerReport {
    pub petals: usize,
    pub uniform_size: Option<usize>,
    /// `k! (r - 1)^k` for a `k`-uniform family.
    pub premise_bound: Option<u128>,
    pub premise_met: bool,
    pub found: Option<Sunflower>,
    pub method: Option<SunflowerMethod>,
}

pub const DEFAULT_EXHAUSTIVE_THRESHOLD: usize = 20;

pub fn erdos_rado_bound(k: usize, r: usize) -> Option<u128> {
    let mut b: u128 = 1;
    for i in 1..=k {
        b = b.checked_mul(i as u128)?;
    }
    for _ in 0..k {
        b = b.checked_mul(r.saturating_sub(1) as u128)?;
    }
    Some(b)
}

/// Greedy search for `r` sets meeting pairwise in one root: a maximal
/// disjoint subfamily, and failing that, recursion on the sets through a
/// frequent element of its union. Families of at most `threshold` distinct
/// sets fall back to exhaustive search when the greedy pass fails.
pub fn sunflower(family: &SetFamily, r: usize, threshold: usize) -> SunflowerReport {
    let mut first: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
    for (i, s) in family.sets().iter().enumerate() {
        first.entry(s).or_insert(i);
    }
    let mut distinct: Vec<(Vec<usize>, usize)> =
        first.into_iter().map(|(s, i)| (s.clone(), i)).collect();
    distinct.sort_by_key(|&(_, i)| i);
    let uniform_size = family.uniform_size();
    let premise_bound = uniform_size.map(|k| erdos_rado_bound(k, r).unwrap_or(u128::MAX));
    let premise_met = premise_bound.is_some_and(|b| (distinct.len() as u128) > b);
    let mut report = SunflowerReport {
        petals: r,
        uniform_size,
        premise_bound,
        premise_met,
        found: None,
        method: None,
    };
    if let Some((root, members)) = greedy(&distinct, r) {
        report.found = Some(finish(family, root, members));
        report.method = Some(SunflowerMethod::Greedy);
    } else if distinct.len() <= threshold {
        let sets: Vec<Vec<usize>> = distinct.iter().map(|(s, _)| s.clone()).collect();
        if let Some(found) = exhaustive_sunflower(&sets, r) {
            let members = found.members.iter().map(|&k| distinct[k].1).collect();
            report.found = Some(finish(family, found.root, members));
            report.method = Some(SunflowerMethod::Exhaustive);
        }
    }
    if let Some(s) = &report.found {
        assert!(is_sunflower(family, s), "sunflower with a wrong root");
    }
    report
}

fn finish(family: &SetFamily, mut root: Vec<usize>, mut members: Vec<usize>) -> Sunflower {
    members.sort_unstable();
    if members.len() >= 2 {
        root = intersect(&family.sets()[members[0]], &family.sets()[members[1]]);
    }
    root.sort_unstable();
    Sunflower { root, members }
}

fn greedy(sets: &[(Vec<usize>, usize)], r: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    if r == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    if sets.len() < r {
        return None;
    }
    if r == 1 {
        return Some((sets[0].0.clone(), vec![sets[0].1]));
    }
    let mut used: Vec<usize> = Vec::new();
    let mut picked = Vec::new();
    for (s, i) in sets {
        if s.iter().all(|x| !used.contains(x)) {
            used.extend(s);
            picked.push(*i);
            if picked.len() == r {
                return Some((Vec::new(), picked));
            }
        }
    }
    let mut freq: Vec<(usize, usize)> = used
        .iter()
        .map(|&x| (sets.iter().filter(|(s, _)| s.contains(&x)).count(), x))
        .collect();
    freq.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (count, x) in freq {
        if count < r {
            break;
        }
        let sub: Vec<(Vec<usize>, usize)> = sets
            .iter()
            .filter(|(s, _)| s.contains(&x))
            .map(|(s, i)| (s.iter().copied().filter(|&y| y != x).collect(), *i))
            .collect();
        if let Some((mut root, members)) = greedy(&sub, r) {
            root.push(x);
            return Some((root, members));
        }
    }
    None
}

/// Tries every pair as the root-defining pair and extends by backtracking.
pub fn exhaustive_sunflower(sets: &[Vec<usize>], r: usize) -> Option<Sunflower> {
    if r <= 1 {
        return sets.first().map(|s| Sunflower {
            root: if r == 1 { s.clone() } else { Vec::new() },
            members: if r == 1 { vec![0] } else { Vec::new() },
        });
    }
    fn extend(
        sets: &[Vec<usize>],
        root: &[usize],
        cand: &[usize],
        chosen: &mut Vec<usize>,
        r: usize,
    ) -> bool {
        if chosen.len() == r {
            return true;
        }
        for (k, &c) in cand.iter().enumerate() {
            if chosen
                .iter()
                .all(|&m| intersect(&sets[m], &sets[c]) == root)
            {
                chosen.push(c);
                if extend(sets, root, &cand[k + 1..], chosen, r) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let root = intersect(&sets[i], &sets[j]);
            let cand: Vec<usize> = (j + 1..sets.len())
                .filter(|&k| sets[k].len() >= root.len())
                .collect();
            let mut chosen = vec![i, j];
            if extend(sets, &root, &cand, &mut chosen, r) {
                return Some(Sunflower {
                    root,
                    members: chosen,
                });
            }
        }
    }
    None
}

/// Exact-root check: distinct members, pairwise intersections all equal
/// to the root.
pub fn is_sunflower(family: &SetFamily, s: &Sunflower) -> bool {
    let sets = family.sets();
    let mut seen = s.members.clone();
    seen.sort_unstable();
    seen.dedup();
    seen.len() == s.members.len()
        && s.members.iter().all(|&m| m < sets.len())
        && s.members.iter().enumerate().all(|(a, &x)| {
            s.members[a + 1..]
                .iter()
                .all(|&y| sets[x] != sets[y] && intersect(&sets[x], &sets[y]) == s.root)
        })
}

/// Prefix coding: a set `A` of levels `[0, h)` becomes the `h` tagged
/// prefixes `(b, A ∩ [0, b))`, `b = 1..=h`, numbered in order of first
/// appearance. Two outputs share exactly the prefixes on which their inputs
/// agree, so distinct inputs meet in fewer than `h` points.
pub fn ad_convert(family: &SetFamily, h: usize) -> Result<SetFamily> {
    if family.universe_size() > h
        && family
            .sets()
            .iter()
            .any(|s| s.last().is_some_and(|&x| x >= h))
    {
        return Err(Error::Invalid(format!("sets must lie in the {h} levels")));
    }
    if family.has_duplicates() {
        return Err(Error::Invalid("duplicate input sets".into()));
    }
    let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut out = Vec::with_capacity(family.len());
    for s in family.sets() {
        let mut coded = Vec::with_capacity(h);
        for b in 1..=h {
            let prefix: Vec<usize> = s.iter().copied().filter(|&x| x < b).collect();
            let next = ids.len();
            coded.push(*ids.entry((b, prefix)).or_insert(next));
        }
        out.push(coded);
    }
    SetFamily::new(ids.len(), out)
}

/// Rooted tree stored by levels: `levels[d][k]` is the parent (an index
/// into level `d - 1`) of node `k` at depth `d + 1`; depth-1 nodes hang
/// from the implicit root and record parent 0. `terminal` marks nodes where
/// a path ends; every leaf is terminal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTree {
    pub levels: Vec<Vec<usize>>,
    pub terminal: Vec<Vec<bool>>,
}

/// Node indices, one per level, from depth 1 down to a leaf.
pub type Branch = Vec<usize>;

impl LevelTree {
    pub fn new(levels: Vec<Vec<usize>>, terminal: Vec<Vec<bool>>) -> Result<LevelTree> {
        let t = LevelTree { levels, terminal };
        t.validate()?;
        Ok(t)
    }

    /// Terminal flags set exactly on the leaves.
    pub fn from_parents(levels: Vec<Vec<usize>>) -> Result<LevelTree> {
        let terminal = levels
            .iter()
            .enumerate()
            .map(|(d, l)| {
                (0..l.len())
                    .map(|k| levels.get(d + 1).is_none_or(|next| !next.contains(&k)))
                    .collect()
            })
            .collect();
        LevelTree::new(levels, terminal)
    }

    fn validate(&self) -> Result<()> {
        if self.terminal.len() != self.levels.len() {
            return Err(Error::Invalid("terminal flags do not match levels".into()));
        }
        for (d, level) in self.levels.iter().enumerate() {
            if self.terminal[d].len() != level.len() || level.is_empty() {
                return Err(Error::Invalid(format!("level {} is malformed", d + 1)));
            }
            let bound = if d == 0 { 1 } else { self.levels[d - 1].len() };
            if let Some(k) = level.iter().position(|&p| p >= bound) {
                return Err(Error::Invalid(format!(
                    "node {k} at depth {} has a missing parent",
                    d + 1
                )));
            }
        }
        for d in 0..self.height() {
            for k in 0..self.levels[d].len() {
                if self.children(d, k).is_empty() && !self.terminal[d][k] {
                    return Err(Error::Invalid(format!(
                        "leaf {k} at depth {} is not terminal",
                        d + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Children of node `k` at depth `d + 1`.
    pub fn children(&self, d: usize, k: usize) -> Vec<usize> {
        match self.levels.get(d + 1) {
            Some(next) => (0..next.len()).filter(|&c| next[c] == k).collect(),
            None => Vec::new(),
        }
    }

    /// Complete `arity`-ary tree.
    pub fn complete(arity: usize, height: usize) -> Result<LevelTree> {
        let mut levels = Vec::new();
        let mut width = 1;
        for d in 0..height {
            levels.push(
                (0..width * arity)
                    .map(|k| if d == 0 { 0 } else { k / arity })
                    .collect(),
            );
            width *= arity;
        }
        LevelTree::from_parents(levels)
    }

    /// Maximal paths in depth-first order, children by index.
    pub fn branches(&self) -> Vec<Branch> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        if self.height() > 0 {
            for k in 0..self.levels[0].len() {
                self.collect_branches(0, k, &mut path, &mut out);
            }
        }
        out
    }

    fn collect_branches(&self, d: usize, k: usize, path: &mut Vec<usize>, out: &mut Vec<Branch>) {
        path.push(k);
        let ch = self.children(d, k);
        if ch.is_empty() {
            out.push(path.clone());
        }
        for c in ch {
            self.collect_branches(d + 1, c, path, out);
        }
        path.pop();
    }

    /// Global id of node `k` at depth `d + 1`, numbering level by level.
    pub fn node_id(&self, d: usize, k: usize) -> usize {
        self.levels[..d].iter().map(Vec::len).sum::<usize>() + k
    }

    /// Each terminal node's path as the set of global node ids. Ids grow
    /// with depth, so sorting a set recovers its path.
    pub fn path_family(&self) -> SetFamily {
        let mut sets = Vec::new();
        for d in 0..self.height() {
            for k in 0..self.levels[d].len() {
                if self.terminal[d][k] {
                    let mut s = Vec::with_capacity(d + 1);
                    let mut node = k;
                    for e in (0..=d).rev() {
                        s.push(self.node_id(e, node));
                        node = self.levels[e][node];
                    }
                    sets.push(s);
                }
            }
        }
        SetFamily::new(self.node_count(), sets).expect("ids are in range")
    }

    /// AHU-style canonical string; equal iff the trees are isomorphic with
    /// terminal flags preserved.
    pub fn canonical_form(&self) -> String {
        fn enc(t: &LevelTree, d: usize, k: usize) -> String {
            let mut ch: Vec<String> = t
                .children(d, k)
                .into_iter()
                .map(|c| enc(t, d + 1, c))
                .collect();
            ch.sort();
            format!(
                "{}({})",
                if t.terminal[d][k] { "*" } else { "" },
                ch.concat()
            )
        }
        let mut top: Vec<String> = match self.levels.first() {
            Some(l) => (0..l.len()).map(|k| enc(self, 0, k)).collect(),
            None => Vec::new(),
        };
        top.sort();
        format!("({})", top.concat())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph tree {\n  r [label=\"root\"];\n");
        for d in 0..self.height() {
            for (k, &p) in self.levels[d].iter().enumerate() {
                let id = self.node_id(d, k);
                let shape = if self.terminal[d][k] {
                    "doublecircle"
                } else {
                    "circle"
                };
                let _ = writeln!(s, "  n{id} [label=\"{}.{k}\", shape={shape}];", d + 1);
                let parent = if d == 0 {
                    "r".to_string()
                } else {
                    format!("n{}", self.node_id(d - 1, p))
                };
                let _ = writeln!(s, "  {parent} -> n{id};");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Prefix tree of the sets' sorted element chains; the node reached by a
/// whole set is terminal.
pub fn tree_from_family(family: &SetFamily) -> Result<LevelTree> {
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut terminal: Vec<Vec<bool>> = Vec::new();
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for s in family.sets() {
        let mut parent = 0;
        for (d, &x) in s.iter().enumerate() {
            if levels.len() == d {
                levels.push(Vec::new());
                terminal.push(Vec::new());
            }
            let k = *index.entry((d, parent, x)).or_insert_with(|| {
                levels[d].push(parent);
                terminal[d].push(false);
                levels[d].len() - 1
            });
            parent = k;
        }
        if let Some(d) = s.len().checked_sub(1) {
            terminal[d][parent] = true;
        }
    }
    LevelTree::new(levels, terminal)
}

/// Seeded random tree: every node below the last level gets between 0 and
/// `max_children` children, the first node of each level at least one.
pub fn random_tree(height: usize, max_children: usize, seed: u64) -> Result<LevelTree> {
    if max_children == 0 && height > 0 {
        return Err(Error::Invalid("max_children must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = Vec::new();
    let mut width = 1;
    for _ in 0..height {
        let mut level = Vec::new();
        for p in 0..width {
            let lo = usize::from(p == 0);
            for _ in 0..rng.gen_range(lo..=max_children) {
                level.push(p);
            }
        }
        width = level.len();
        levels.push(level);
    }
    LevelTree::from_parents(levels)
}

/// `count` distinct `k`-subsets of `[0, n)`.
pub fn random_uniform_family(n: usize, k: usize, count: usize, seed: u64) -> Result<SetFamily> {
    if k > n {
        return Err(Error::Invalid(format!("{k}-subsets of a {n}-set")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut sets = Vec::new();
    let mut tries = 0usize;
    while sets.len() < count {
        let mut s: Vec<usize> = sample(&mut rng, n, k).into_vec();
        s.sort_unstable();
        if seen.insert(s.clone()) {
            sets.push(s);
        }
        tries += 1;
        if tries > 100 * count + 1000 {
            return Err(Error::Infeasible(format!(
                "fewer than {count} distinct {k}-subsets found"
            )));
        }
    }
    SetFamily::new(n, sets)
}

/// `count` independent subsets of `[0, n)`, each element kept with
/// probability one half.
pub fn random_family(n: usize, count: usize, seed: u64) -> SetFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets = (0..count)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).collect())
        .collect();
    SetFamily::new(n, sets).expect("elements in range")
}

/// The functions `g_b(a) = k` iff `[probe_a, rep_b] = central_gen^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeExtraction {
    pub functions: Vec<FpVec>,
    /// Supports of the functions over the probe indices.
    pub family: SetFamily,
}

/// Reads off the functions and checks that two representatives agree
/// exactly when they differ by an element centralizing every probe.
pub fn extract_tree(
    g: &FormGroup,
    probes: &[GroupElement],
    reps: &[GroupElement],
    central_gen: usize,
) -> Result<TreeExtraction> {
    if central_gen >= g.cen_dim() {
        return Err(Error::dims(format!("no central generator {central_gen}")));
    }
    for x in probes.iter().chain(reps) {
        g.check(x)?;
    }
    let p = g.p();
    let mut functions = Vec::with_capacity(reps.len());
    for (b, f) in reps.iter().enumerate() {
        let mut vals = Vec::with_capacity(probes.len());
        for (a, u) in probes.iter().enumerate() {
            let c = g.comm(u, f);
            if !c.v.is_zero() || c.w.support().iter().any(|&j| j != central_gen) {
                return Err(Error::Structure(format!(
                    "commutator of probe {a} and representative {b} leaves the central line"
                )));
            }
            vals.push(c.w.get(central_gen));
        }
        functions.push(FpVec::new(p, vals));
    }
    for b in 0..reps.len() {
        for c in b + 1..reps.len() {
            let q = g.mul(&g.inv(&reps[b]), &reps[c]);
            let centralizes = probes.iter().all(|u| g.commutes(u, &q));
            if centralizes != (functions[b] == functions[c]) {
                return Err(Error::Structure(format!(
                    "representatives {b} and {c} break the coset criterion"
                )));
            }
        }
    }
    let family = SetFamily::new(probes.len(), functions.iter().map(FpVec::support).collect())?;
    Ok(TreeExtraction { functions, family })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{extraspecial, family_group};

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::new(n, sets.iter().map(|s| s.to_vec()).collect()).unwrap()
    }

    #[test]
    fn family_validation() {
        assert!(SetFamily::new(3, vec![vec![3]]).is_err());
        assert!(SetFamily::new(3, vec![vec![1, 1]]).is_err());
        assert_eq!(
            SetFamily::new(3, vec![vec![2, 0]]).unwrap().sets()[0],
            vec![0, 2]
        );
        assert_eq!(fam(4, &[&[0, 1], &[1], &[1, 0]]).canonical().len(), 2);
    }

    #[test]
    fn sunflower_examples() {
        let mut pairs = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                pairs.push(vec![i, j]);
            }
        }
        let f = SetFamily::new(6, pairs).unwrap();
        let r = sunflower(&f, 3, DEFAULT_EXHAUSTIVE_THRESHOLD);
        let s = r.found.unwrap();
        assert!(s.root.is_empty());
        let petals: Vec<&Vec<usize>> = s.members.iter().map(|&m| &f.sets()[m]).collect();
        assert_eq!(petals, [&vec![0, 1], &vec![2, 3], &vec![4, 5]]);
        assert_eq!(r.premise_bound, Some(8));
        assert!(r.premise_met);

        let g = fam(4, &[&[0, 1], &[0, 2], &[0, 3]]);
        assert_eq!(
            sunflower(&g, 3, DEFAULT_EXHAUSTIVE_THRESHOLD)
                .found
                .unwrap()
                .root,
            vec![0]
        );

        let none = fam(3, &[&[0, 1], &[1, 2], &[0, 2]]);
        let r = sunflower(&none, 3, DEFAULT_EXHAUSTIVE_THRESHOLD);
        assert!(r.found.is_none());
        assert!(exhaustive_sunflower(none.sets(), 3).is_none());
    }

    #[test]
    fn exhaustive_fallback_and_oracle() {
        for seed in 0..20 {
            let f = random_uniform_family(10, 3, 30, seed).unwrap();
            let r = sunflower(&f, 3, DEFAULT_EXHAUSTIVE_THRESHOLD);
            assert!(!r.premise_met);
            let truth = exhaustive_sunflower(f.sets(), 3).is_some();
            if let Some(s) = &r.found {
                assert!(is_sunflower(&f, s));
                assert!(truth);
            }
        }
    }

    #[test]
    fn ad_convert_examples() {
        let t = LevelTree::complete(2, 3).unwrap();
        let bits: Vec<Vec<usize>> = t
            .branches()
            .iter()
            .map(|b| (0..3).filter(|&d| b[d] % 2 == 1).collect())
            .collect();
        let f = SetFamily::new(3, bits).unwrap();
        let out = ad_convert(&f, 3).unwrap();
        assert_eq!(out.len(), 8);
        assert!(out.sets().iter().all(|s| s.len() == 3));
        assert!(out.is_almost_disjoint(3));
        let one = ad_convert(&fam(3, &[&[1]]), 3).unwrap();
        assert_eq!(one.sets(), &[vec![0, 1, 2]]);
        assert!(ad_convert(&fam(3, &[&[1], &[1]]), 3).is_err());
    }

    #[test]
    fn tree_examples() {
        let t = LevelTree::complete(2, 3).unwrap();
        assert_eq!(t.branches().len(), 8);
        assert_eq!(t.node_count(), 14);
        let c = tree_from_family(&fam(2, &[&[0], &[0, 1]])).unwrap();
        assert_eq!(c.height(), 2);
        assert_eq!(c.branches(), vec![vec![0, 0]]);
        assert_eq!(c.terminal, vec![vec![true], vec![true]]);
        let back = tree_from_family(&t.path_family()).unwrap();
        assert_eq!(back.canonical_form(), t.canonical_form());
        assert!(t.to_dot().contains("n13"));
        assert!(LevelTree::from_parents(vec![vec![0], vec![1]]).is_err());
    }

    #[test]
    fn random_tree_round_trip() {
        for seed in 0..10 {
            let t = random_tree(1 + (seed as usize % 5), 3, seed).unwrap();
            let back = tree_from_family(&t.path_family()).unwrap();
            assert_eq!(back.canonical_form(), t.canonical_form());
        }
    }

    #[test]
    fn extraction_examples() {
        let e = extraspecial(3, 1).unwrap();
        let a2 = e.generator(1);
        let x = extract_tree(&e, &[e.generator(0)], &[a2.clone(), e.mul(&a2, &a2)], 0).unwrap();
        assert_eq!(
            x.functions,
            vec![FpVec::new(3, vec![1]), FpVec::new(3, vec![2])]
        );
        let z = extract_tree(&e, &[e.generator(0), e.generator(1)], &[e.central(0)], 0).unwrap();
        assert!(z.functions[0].is_zero());

        let f = fam(4, &[&[0, 1], &[1, 2, 3], &[3]]);
        let d = family_group(3, 2, &f).unwrap();
        let probes: Vec<GroupElement> = (0..4).map(|i| d.group.generator(i)).collect();
        let reps: Vec<GroupElement> = (0..3).map(|i| d.phi(i)).collect();
        let x = extract_tree(&d.group, &probes, &reps, d.target).unwrap();
        assert_eq!(x.family, f);

        let f3 = crate::constructions::free_nil2(3, 3).unwrap();
        assert!(matches!(
            extract_tree(&f3, &[f3.generator(0)], &[f3.generator(1)], 1),
            Err(Error::Structure(_))
        ));
    }
}
