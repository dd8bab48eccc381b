//! Brute-force counterparts of the structural computations. Everything
//! here works from the multiplication table of the group, with subgroups
//! as sets of element indices.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::abaut::{image, AbAut, AbSubgroup, AbelianPGroup};
use crate::analysis::Subgroup;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::formgroup::FormGroup;
use crate::Limits;

/// Multiplication table over the element indices of a group.
#[derive(Clone, Debug)]
pub struct Table {
    n: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: usize,
}

impl Table {
    /// Tabulates `g`; the order must be within `limits.max_subgroup_order`.
    pub fn from_group(g: &FormGroup, limits: &Limits) -> Result<Table> {
        if g.order() > limits.max_subgroup_order {
            return Err(Error::capacity(
                "table order",
                g.order(),
                limits.max_subgroup_order,
            ));
        }
        let els: Vec<_> = g.elements().collect();
        let n = els.len();
        let mut mul = Vec::with_capacity(n * n);
        for x in &els {
            for y in &els {
                mul.push(g.element_index(&g.mul(x, y)) as u32);
            }
        }
        let identity = g.element_index(&g.identity()) as usize;
        let mut inv = vec![0u32; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a * n + b] as usize == identity)
                .expect("group") as u32;
        }
        Ok(Table {
            n,
            mul,
            inv,
            identity,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    fn conj(&self, g: usize, s: usize) -> usize {
        self.mul(self.mul(g, s), self.inv(g))
    }

    fn commute(&self, a: usize, b: usize) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    fn closure(&self, start: &Bits, gens: &[usize]) -> Bits {
        let mut set = start.clone();
        set.insert(self.identity);
        let mut frontier: Vec<usize> = set.iter().collect();
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    fn to_bits(&self, members: &[usize]) -> Bits {
        let mut b = Bits::new(self.n);
        for &m in members {
            b.insert(m);
        }
        b
    }

    /// All subgroups of a `p`-group: each nontrivial subgroup has a
    /// subgroup of prime index, so the layers grow by prime-index steps
    /// from the trivial group. Sorted by size, then members.
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        self.subgroup_bits()
            .into_iter()
            .map(|(b, _)| b.iter().collect())
            .collect()
    }

    fn subgroup_bits(&self) -> Vec<(Bits, Vec<usize>)> {
        let mut trivial = Bits::new(self.n);
        trivial.insert(self.identity);
        let mut seen: HashSet<Bits> = HashSet::from([trivial.clone()]);
        let mut all = vec![(trivial.clone(), Vec::new())];
        let mut layer = vec![(trivial, Vec::<usize>::new())];
        while !layer.is_empty() {
            let mut next = Vec::new();
            for (s, gens) in &layer {
                let size = s.count();
                let mut done = s.clone();
                for x in 0..self.n {
                    if done.contains(x) {
                        continue;
                    }
                    let mut g2 = gens.clone();
                    g2.push(x);
                    let t = self.closure(s, &g2);
                    let prime_step = is_prime_usize(t.count() / size);
                    if prime_step {
                        done.or_assign(&t);
                        if seen.insert(t.clone()) {
                            all.push((t.clone(), g2.clone()));
                            next.push((t, g2));
                        }
                    } else {
                        done.insert(x);
                    }
                }
            }
            layer = next;
        }
        all.sort_by(|a, b| {
            a.0.count()
                .cmp(&b.0.count())
                .then_with(|| a.0.iter().cmp(b.0.iter()))
        });
        all
    }

    fn is_abelian(&self, gens: &[usize]) -> bool {
        gens.iter()
            .enumerate()
            .all(|(i, &a)| gens[i + 1..].iter().all(|&b| self.commute(a, b)))
    }

    /// Abelian subgroups not properly inside another abelian subgroup.
    pub fn maximal_abelians(&self) -> Vec<Vec<usize>> {
        let ab: Vec<Bits> = self
            .subgroup_bits()
            .into_iter()
            .filter(|(_, g)| self.is_abelian(g))
            .map(|(b, _)| b)
            .collect();
        ab.iter()
            .filter(|a| !ab.iter().any(|b| b != *a && a.is_subset(b)))
            .map(|a| a.iter().collect())
            .collect()
    }

    pub fn normal_subgroups(&self) -> Vec<Vec<usize>> {
        self.subgroups()
            .into_iter()
            .filter(|s| self.normalizer(s).len() == self.n)
            .collect()
    }

    pub fn center(&self) -> Vec<usize> {
        self.centralizer(&(0..self.n).collect::<Vec<_>>())
    }

    pub fn centralizer(&self, s: &[usize]) -> Vec<usize> {
        (0..self.n)
            .filter(|&g| s.iter().all(|&x| self.commute(g, x)))
            .collect()
    }

    pub fn normalizer(&self, s: &[usize]) -> Vec<usize> {
        let set = self.to_bits(s);
        (0..self.n)
            .filter(|&g| s.iter().all(|&x| set.contains(self.conj(g, x))))
            .collect()
    }

    /// Intersection of all conjugates.
    pub fn core(&self, s: &[usize]) -> Vec<usize> {
        let mut core = self.to_bits(s);
        for g in 0..self.n {
            let mut conj = Bits::new(self.n);
            for &x in s {
                conj.insert(self.conj(g, x));
            }
            core = core.and(&conj);
        }
        core.iter().collect()
    }

    /// Least number of abelian subgroups generating the group; maximal
    /// abelians suffice since enlarging a part keeps the join.
    pub fn gnum(&self) -> usize {
        let maxab: Vec<Bits> = self
            .maximal_abelians()
            .iter()
            .map(|m| self.to_bits(m))
            .collect();
        let gens: Vec<Vec<usize>> = maxab.iter().map(|b| b.iter().collect()).collect();
        let start = Bits::new(self.n);
        for r in 1..=maxab.len() {
            let mut idx: Vec<usize> = (0..r).collect();
            loop {
                let all: Vec<usize> = idx.iter().flat_map(|&i| gens[i].iter().copied()).collect();
                if self.closure(&start, &all).count() == self.n {
                    return r;
                }
                if !next_combination(&mut idx, maxab.len()) {
                    break;
                }
            }
        }
        unreachable!("the maximal abelians generate the group")
    }

    /// Least number of maximal abelian subgroups covering every element:
    /// branch on the subgroups through the first uncovered element.
    pub fn chinum(&self) -> usize {
        let maxab: Vec<Bits> = self
            .maximal_abelians()
            .iter()
            .map(|m| self.to_bits(m))
            .collect();
        let mut best = maxab.len();
        fn go(t: &Table, sets: &[Bits], covered: &Bits, used: usize, best: &mut usize) {
            if used >= *best {
                return;
            }
            let Some(x) = (0..t.n).find(|&x| !covered.contains(x)) else {
                *best = used;
                return;
            };
            if used + 1 >= *best {
                return;
            }
            for s in sets.iter().filter(|s| s.contains(x)) {
                let mut c = covered.clone();
                c.or_assign(s);
                go(t, sets, &c, used + 1, best);
            }
        }
        go(self, &maxab, &Bits::new(self.n), 0, &mut best);
        best
    }

    /// Largest set of pairwise non-commuting elements, by branch-and-bound
    /// over all noncentral elements with a greedy colouring bound.
    pub fn pnum(&self) -> usize {
        let z = self.to_bits(&self.center());
        let verts: Vec<usize> = (0..self.n).filter(|x| !z.contains(*x)).collect();
        if verts.is_empty() {
            return 1;
        }
        let k = verts.len();
        let adj: Vec<Bits> = verts
            .iter()
            .map(|&a| {
                let mut b = Bits::new(k);
                for (j, &c) in verts.iter().enumerate() {
                    if !self.commute(a, c) {
                        b.insert(j);
                    }
                }
                b
            })
            .collect();
        fn go(adj: &[Bits], cand: Bits, size: usize, best: &mut usize) {
            if cand.is_empty() {
                *best = (*best).max(size);
                return;
            }
            let mut order = Vec::new();
            let mut uncolored = cand.clone();
            let mut color = 0;
            while !uncolored.is_empty() {
                color += 1;
                let mut avail = uncolored.clone();
                while let Some(v) = avail.first() {
                    avail = avail.and_not(&adj[v]);
                    avail.remove(v);
                    uncolored.remove(v);
                    order.push((v, color));
                }
            }
            let mut cand = cand;
            for &(v, c) in order.iter().rev() {
                if size + c <= *best {
                    return;
                }
                go(adj, cand.and(&adj[v]), size + 1, best);
                cand.remove(v);
            }
        }
        let mut best = 1;
        go(&adj, Bits::full(k), 0, &mut best);
        best
    }

    /// The five profile indices over every subgroup.
    pub fn profile(&self) -> OracleProfile {
        let z = self.center().len();
        let mut prof = OracleProfile {
            gz: (self.n / z) as u64,
            max_n: 1,
            max_c: 1,
            max_core: 1,
            max_abelian_n: 1,
        };
        for (s, gens) in self.subgroup_bits() {
            let members: Vec<usize> = s.iter().collect();
            let n_idx = (self.n / self.normalizer(&members).len()) as u64;
            let c_idx = (self.n / self.centralizer(&members).len()) as u64;
            let core = (members.len() / self.core(&members).len()) as u64;
            prof.max_n = prof.max_n.max(n_idx);
            prof.max_c = prof.max_c.max(c_idx);
            prof.max_core = prof.max_core.max(core);
            if self.is_abelian(&gens) {
                prof.max_abelian_n = prof.max_abelian_n.max(n_idx);
            }
        }
        prof
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleProfile {
    pub gz: u64,
    pub max_n: u64,
    pub max_c: u64,
    pub max_core: u64,
    pub max_abelian_n: u64,
}

fn is_prime_usize(n: usize) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let r = idx.len();
    for i in (0..r).rev() {
        if idx[i] < n - r + i {
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Sorted element indices of a subgroup, for comparison with table results.
pub fn members_of(g: &FormGroup, s: &Subgroup) -> Vec<usize> {
    let mut m: Vec<usize> = s
        .elements()
        .iter()
        .map(|x| g.element_index(x) as usize)
        .collect();
    m.sort_unstable();
    m
}

/// Subgroups of an abelian `p`-group as joins of cyclic subgroups,
/// closed under pairwise joins until nothing new appears.
pub fn ab_subgroups_by_joins(a: &AbelianPGroup) -> Vec<AbSubgroup> {
    let n = a.order() as usize;
    let cyclic = |x: usize| -> BTreeSet<usize> {
        let xe = a.element(x);
        let mut cur = a.zero();
        let mut s = BTreeSet::new();
        loop {
            if !s.insert(a.index(&cur)) {
                return s;
            }
            cur = a.add(&cur, &xe);
        }
    };
    let join = |s: &BTreeSet<usize>, t: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut out = s.clone();
        loop {
            let add: Vec<usize> = out
                .iter()
                .flat_map(|&x| t.iter().map(move |&y| (x, y)))
                .map(|(x, y)| a.index(&a.add(&a.element(x), &a.element(y))))
                .filter(|z| !out.contains(z))
                .collect();
            if add.is_empty() {
                return out;
            }
            out.extend(add);
        }
    };
    let mut all: BTreeSet<BTreeSet<usize>> = (0..n).map(cyclic).collect();
    let mut fresh: Vec<BTreeSet<usize>> = all.iter().cloned().collect();
    while !fresh.is_empty() {
        let snapshot: Vec<BTreeSet<usize>> = all.iter().cloned().collect();
        let mut next = Vec::new();
        for f in &fresh {
            for s in &snapshot {
                let j = join(f, s);
                if !all.contains(&j) {
                    all.insert(j.clone());
                    next.push(j);
                }
            }
        }
        fresh = next;
    }
    all.into_iter()
        .map(|s| AbSubgroup {
            members: s.into_iter().collect(),
        })
        .collect()
}

/// Maximum orbit size and its first maximizer by (size, members), over
/// the join-closure subgroup list.
pub fn ab_orbit_oracle(a: &AbelianPGroup, phis: &[AbAut]) -> (usize, AbSubgroup) {
    let mut subs = ab_subgroups_by_joins(a);
    subs.sort_by(|x, y| (x.members.len(), &x.members).cmp(&(y.members.len(), &y.members)));
    let mut best = (0, subs[0].clone());
    for s in subs {
        let orbit: HashSet<AbSubgroup> = phis.iter().map(|f| image(f, &s)).collect();
        if orbit.len() > best.0 {
            best = (orbit.len(), s);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abaut::{ab_subgroups, all_automorphisms};
    use crate::constructions::{extraspecial, free_nil2};

    #[test]
    fn extraspecial_by_table() {
        let g = extraspecial(3, 1).unwrap();
        let t = Table::from_group(&g, &Limits::default()).unwrap();
        assert_eq!(t.subgroups().len(), 1 + 13 + 4 + 1);
        assert_eq!(t.center().len(), 3);
        assert_eq!(t.maximal_abelians().len(), 4);
        assert_eq!((t.gnum(), t.chinum(), t.pnum()), (2, 4, 4));
        let p = t.profile();
        assert_eq!(
            (p.gz, p.max_n, p.max_c, p.max_core, p.max_abelian_n),
            (9, 3, 9, 3, 3)
        );
        assert_eq!(t.normal_subgroups().len(), 1 + 1 + 4 + 1);
    }

    #[test]
    fn noncentral_line() {
        let g = extraspecial(3, 1).unwrap();
        let t = Table::from_group(&g, &Limits::default()).unwrap();
        let x = g.element_index(&g.generator(0)) as usize;
        let line: Vec<usize> = {
            let mut v = vec![t.identity(), x, t.mul(x, x)];
            v.sort_unstable();
            v
        };
        assert_eq!(t.centralizer(&line).len(), 9);
        assert_eq!(t.normalizer(&line).len(), 9);
        assert_eq!(t.core(&line), vec![t.identity()]);
    }

    #[test]
    fn free_group_by_table() {
        let g = free_nil2(3, 2).unwrap();
        let t = Table::from_group(&g, &Limits::default()).unwrap();
        assert_eq!(t.maximal_abelians().len(), 4);
        let big = free_nil2(3, 4).unwrap();
        assert!(Table::from_group(&big, &Limits::default())
            .unwrap_err()
            .is_capacity());
    }

    #[test]
    fn abelian_table() {
        let g = FormGroup::abelian(3, 2, 0).unwrap();
        let t = Table::from_group(&g, &Limits::default()).unwrap();
        assert_eq!((t.gnum(), t.chinum(), t.pnum()), (1, 1, 1));
    }

    #[test]
    fn join_enumeration_matches_layers() {
        for e in [vec![1, 1], vec![2, 1], vec![1, 1, 1], vec![3]] {
            let a = AbelianPGroup::new(3, e).unwrap();
            let mut x = ab_subgroups_by_joins(&a);
            x.sort();
            let mut y = ab_subgroups(&a, 729).unwrap();
            y.sort();
            assert_eq!(x, y);
        }
        let a = AbelianPGroup::new(3, vec![1, 1]).unwrap();
        let all = all_automorphisms(&a, 100).unwrap();
        assert_eq!(ab_orbit_oracle(&a, &all).0, 4);
    }
}
