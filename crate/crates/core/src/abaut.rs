//! Finite abelian `p`-groups, their automorphisms as integer matrices, the
//! displacement subgroup `<a - aφ>`, and orbit maximization over subgroups.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::fpspace::FpVec;

/// `Z_{p^{e_0}} ⊕ ... ⊕ Z_{p^{e_{n-1}}}`; elements are residue tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianPGroup {
    p: u64,
    exps: Vec<u32>,
}

impl AbelianPGroup {
    pub fn new(p: u32, exps: Vec<u32>) -> Result<AbelianPGroup> {
        if !crate::fpspace::is_prime(p) {
            return Err(Error::InvalidModulus {
                p,
                reason: "not prime".into(),
            });
        }
        if exps.contains(&0) {
            return Err(Error::Invalid("cyclic factors need exponent >= 1".into()));
        }
        let total: u32 = exps.iter().sum();
        if (p as u64).checked_pow(total).is_none() {
            return Err(Error::capacity("abelian group order", total as u64, 63));
        }
        Ok(AbelianPGroup { p: p as u64, exps })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    /// `p^{e_i}`.
    pub fn modulus(&self, i: usize) -> u64 {
        self.p.pow(self.exps[i])
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.exps.iter().sum())
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn generator(&self, i: usize) -> Vec<u64> {
        let mut x = self.zero();
        x[i] = 1 % self.modulus(i);
        x
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        (0..self.rank())
            .map(|i| (a[i] + b[i]) % self.modulus(i))
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> Vec<u64> {
        (0..self.rank())
            .map(|i| (self.modulus(i) - a[i]) % self.modulus(i))
            .collect()
    }

    pub fn scale(&self, k: u64, a: &[u64]) -> Vec<u64> {
        (0..self.rank())
            .map(|i| {
                let m = self.modulus(i);
                ((k % m) as u128 * a[i] as u128 % m as u128) as u64
            })
            .collect()
    }

    /// `t` with `p^t` the order of `a`.
    pub fn order_exponent(&self, a: &[u64]) -> u32 {
        (0..self.rank())
            .map(|i| {
                if a[i] == 0 {
                    0
                } else {
                    let mut v = a[i];
                    let mut val = 0;
                    while v.is_multiple_of(self.p) {
                        v /= self.p;
                        val += 1;
                    }
                    self.exps[i] - val
                }
            })
            .max()
            .unwrap_or(0)
    }

    /// Mixed-radix index, coordinate 0 most significant.
    pub fn index(&self, a: &[u64]) -> usize {
        let mut idx = 0u64;
        for (i, &x) in a.iter().enumerate().take(self.rank()) {
            idx = idx * self.modulus(i) + x;
        }
        idx as usize
    }

    pub fn element(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            let m = self.modulus(i) as usize;
            out[i] = (idx % m) as u64;
            idx /= m;
        }
        out
    }

    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.order() as usize).map(|i| self.element(i))
    }

    fn check_order(&self, limit: u64) -> Result<()> {
        if self.order() > limit {
            return Err(Error::capacity("abelian group order", self.order(), limit));
        }
        Ok(())
    }
}

/// All abelian `p`-groups of order `p^n`, `n <= max_log`, as exponent
/// lists in descending order.
pub fn abelian_p_groups(p: u32, max_log: u32) -> Result<Vec<AbelianPGroup>> {
    fn parts(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            parts(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    for n in 1..=max_log {
        parts(n, n, &mut Vec::new(), &mut all);
    }
    all.into_iter().map(|e| AbelianPGroup::new(p, e)).collect()
}

/// Endomorphism given by the images of the generators: row `i` is the
/// image of generator `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbAut {
    pub group: AbelianPGroup,
    pub matrix: Vec<Vec<u64>>,
}

/// Row `i` has order dividing `p^{e_i}`: `p^{e_j - e_i}` divides entry
/// `(i, j)` whenever `e_j > e_i`.
fn rows_well_defined(a: &AbelianPGroup, m: &[Vec<u64>]) -> bool {
    m.len() == a.rank()
        && m.iter().enumerate().all(|(i, row)| {
            row.len() == a.rank()
                && row.iter().enumerate().all(|(j, &x)| {
                    x < a.modulus(j)
                        && (a.exps[j] <= a.exps[i] || x % a.p.pow(a.exps[j] - a.exps[i]) == 0)
                })
        })
}

/// An endomorphism of a finite `p`-group is onto iff it is onto modulo the
/// Frattini subgroup `pA`, so invertibility is rank of the matrix mod `p`.
fn invertible_mod_p(a: &AbelianPGroup, m: &[Vec<u64>]) -> bool {
    let p = a.p as u32;
    let rows: Vec<FpVec> = m
        .iter()
        .map(|r| FpVec::new(p, r.iter().map(|&x| (x % a.p) as u32).collect()))
        .collect();
    crate::fpspace::span_reduce(p, a.rank(), &rows).is_ok_and(|s| s.dim() == a.rank())
}

impl AbAut {
    pub fn new(group: AbelianPGroup, matrix: Vec<Vec<u64>>) -> Result<AbAut> {
        if !rows_well_defined(&group, &matrix) {
            return Err(Error::Invalid(
                "matrix is not a well-defined endomorphism".into(),
            ));
        }
        if !invertible_mod_p(&group, &matrix) {
            return Err(Error::Invalid("matrix is not invertible".into()));
        }
        Ok(AbAut { group, matrix })
    }

    pub fn identity(group: &AbelianPGroup) -> AbAut {
        let matrix = (0..group.rank()).map(|i| group.generator(i)).collect();
        AbAut {
            group: group.clone(),
            matrix,
        }
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        apply_rows(&self.group, &self.matrix, x)
    }

    /// `x ↦ (x self) other`.
    pub fn then(&self, other: &AbAut) -> AbAut {
        let matrix = self.matrix.iter().map(|r| other.apply(r)).collect();
        AbAut {
            group: self.group.clone(),
            matrix,
        }
    }

    /// Size of the image set; equals `|A|` for an automorphism.
    pub fn image_count(&self) -> usize {
        self.group
            .elements()
            .map(|x| self.group.index(&self.apply(&x)))
            .collect::<HashSet<_>>()
            .len()
    }
}

fn apply_rows(a: &AbelianPGroup, rows: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
    let mut out = a.zero();
    for (i, &c) in x.iter().enumerate() {
        if c != 0 {
            out = a.add(&out, &a.scale(c, &rows[i]));
        }
    }
    out
}

/// Allowed entries of row `i`, column `j`.
fn entry_choices(a: &AbelianPGroup, i: usize, j: usize) -> Vec<u64> {
    let step = if a.exps[j] > a.exps[i] {
        a.p.pow(a.exps[j] - a.exps[i])
    } else {
        1
    };
    (0..a.modulus(j)).step_by(step as usize).collect()
}

/// Calls `visit` on every automorphism matrix, rows chosen in order with
/// the rows mod `p` kept independent. The span of the chosen rows is kept
/// as a set of indices of `F_p^n`.
pub fn for_each_automorphism(a: &AbelianPGroup, mut visit: impl FnMut(&[Vec<u64>])) {
    let n = a.rank();
    let p = a.p as usize;
    let pn = p.pow(n as u32);
    let rows: Vec<Vec<Vec<u64>>> = (0..n)
        .map(|i| {
            let mut all: Vec<Vec<u64>> = vec![Vec::new()];
            for j in 0..n {
                let c = entry_choices(a, i, j);
                all = all
                    .into_iter()
                    .flat_map(|pre| {
                        c.iter().map(move |&x| {
                            let mut r = pre.clone();
                            r.push(x);
                            r
                        })
                    })
                    .collect();
            }
            all
        })
        .collect();
    let idx = |r: &[u64]| {
        r.iter()
            .fold(0usize, |acc, &x| acc * p + (x % a.p) as usize)
    };
    let reduced: Vec<Vec<usize>> = rows
        .iter()
        .map(|rs| rs.iter().map(|r| idx(r)).collect())
        .collect();
    let add = |x: usize, y: usize| -> usize {
        let (mut x, mut y, mut out, mut place) = (x, y, 0, 1);
        for _ in 0..n {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        out
    };
    struct Walk<'a, F: FnMut(usize, usize) -> usize> {
        rows: &'a [Vec<Vec<u64>>],
        reduced: &'a [Vec<usize>],
        add: F,
        p: usize,
        pn: usize,
    }
    fn go<F: FnMut(usize, usize) -> usize>(
        w: &mut Walk<'_, F>,
        i: usize,
        span: &Bits,
        cur: &mut [Vec<u64>],
        visit: &mut dyn FnMut(&[Vec<u64>]),
    ) {
        if i == w.rows.len() {
            visit(cur);
            return;
        }
        for k in 0..w.rows[i].len() {
            let v = w.reduced[i][k];
            if span.contains(v) {
                continue;
            }
            cur[i].copy_from_slice(&w.rows[i][k]);
            if i + 1 == w.rows.len() {
                visit(cur);
                continue;
            }
            let mut next = Bits::new(w.pn);
            for s in span.iter() {
                let mut x = s;
                for _ in 0..w.p {
                    next.insert(x);
                    x = (w.add)(x, v);
                }
            }
            go(w, i + 1, &next, cur, visit);
        }
    }
    let mut zero = Bits::new(pn);
    zero.insert(0);
    let mut w = Walk {
        rows: &rows,
        reduced: &reduced,
        add,
        p,
        pn,
    };
    go(&mut w, 0, &zero, &mut vec![vec![0; n]; n], &mut visit);
}

pub fn all_automorphisms(a: &AbelianPGroup, cap: usize) -> Result<Vec<AbAut>> {
    let mut out = Vec::new();
    let mut over = false;
    for_each_automorphism(a, |m| {
        if out.len() < cap {
            out.push(AbAut {
                group: a.clone(),
                matrix: m.to_vec(),
            });
        } else {
            over = true;
        }
    });
    if over {
        return Err(Error::capacity("automorphisms", cap as u64 + 1, cap as u64));
    }
    Ok(out)
}

/// Uniform over well-defined matrices, rejecting singular ones.
pub fn random_automorphism(a: &AbelianPGroup, rng: &mut ChaCha8Rng) -> AbAut {
    let n = a.rank();
    loop {
        let m: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = entry_choices(a, i, j);
                        c[rng.gen_range(0..c.len())]
                    })
                    .collect()
            })
            .collect();
        if invertible_mod_p(a, &m) {
            return AbAut {
                group: a.clone(),
                matrix: m,
            };
        }
    }
}

pub fn random_automorphisms(a: &AbelianPGroup, count: usize, seed: u64) -> Vec<AbAut> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_automorphism(a, &mut rng))
        .collect()
}

/// Subgroup of an [`AbelianPGroup`] as its sorted element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbSubgroup {
    pub members: Vec<usize>,
}

impl AbSubgroup {
    pub fn order(&self) -> usize {
        self.members.len()
    }

    fn from_bits(b: &Bits) -> AbSubgroup {
        AbSubgroup {
            members: b.iter().collect(),
        }
    }

    /// Ordered by size, then member list.
    fn canonical_key(&self) -> (usize, &[usize]) {
        (self.members.len(), &self.members)
    }
}

/// `<gens>`, by repeated addition.
pub fn ab_closure(a: &AbelianPGroup, gens: &[Vec<u64>]) -> AbSubgroup {
    AbSubgroup::from_bits(&closure_bits(a, &Bits::new(a.order() as usize), gens))
}

fn closure_bits(a: &AbelianPGroup, start: &Bits, gens: &[Vec<u64>]) -> Bits {
    let mut set = start.clone();
    set.insert(0);
    let mut frontier: Vec<usize> = set.iter().collect();
    while let Some(x) = frontier.pop() {
        let xe = a.element(x);
        for g in gens {
            let y = a.index(&a.add(&xe, g));
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Displacement {
    pub subgroup: AbSubgroup,
    /// Least `m` with `p^m A_φ = 0`.
    pub m: u32,
}

fn displacement_rows(a: &AbelianPGroup, rows: &[Vec<u64>]) -> Vec<Vec<u64>> {
    (0..a.rank())
        .map(|i| a.add(&a.generator(i), &a.neg(&rows[i])))
        .collect()
}

/// The exponent of an abelian group is the largest order of a generator.
fn displacement_exponent(a: &AbelianPGroup, rows: &[Vec<u64>]) -> u32 {
    displacement_rows(a, rows)
        .iter()
        .map(|d| a.order_exponent(d))
        .max()
        .unwrap_or(0)
}

/// `A_φ = <a - aφ>` from the generator displacements, and its exponent.
pub fn displacement(phi: &AbAut) -> Displacement {
    let a = &phi.group;
    let ds = displacement_rows(a, &phi.matrix);
    Displacement {
        subgroup: ab_closure(a, &ds),
        m: displacement_exponent(a, &phi.matrix),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightFix {
    pub holds: bool,
    pub m: u32,
    /// An element of `p^m A` moved by φ.
    pub witness: Option<Vec<u64>>,
}

/// Checks that φ fixes `p^m A`, `m` the exponent of `A_φ`. `p^m A` is
/// generated by the `p^m a_i`, so the generators suffice.
pub fn verify_height_fix(phi: &AbAut) -> HeightFix {
    verify_height_fix_rows(&phi.group, &phi.matrix)
}

pub fn verify_height_fix_rows(a: &AbelianPGroup, rows: &[Vec<u64>]) -> HeightFix {
    let n = a.rank();
    let mut m = 0;
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let md = a.modulus(j);
            let d = (u64::from(i == j) + md - x) % md;
            if d != 0 {
                let mut v = d;
                let mut val = 0;
                while v.is_multiple_of(a.p) {
                    v /= a.p;
                    val += 1;
                }
                m = m.max(a.exps[j] - val);
            }
        }
    }
    let pm = a.p.pow(m);
    for (i, row) in rows.iter().enumerate().take(n) {
        let moved = (0..n).any(|j| {
            let md = a.modulus(j);
            let image = (pm % md) as u128 * row[j] as u128 % md as u128;
            let fixed = if i == j { pm % md } else { 0 };
            image as u64 != fixed
        });
        if moved {
            return HeightFix {
                holds: false,
                m,
                witness: Some(a.scale(pm, &a.generator(i))),
            };
        }
    }
    HeightFix {
        holds: true,
        m,
        witness: None,
    }
}

pub const DEFAULT_ORBIT_CAP_LOG: u32 = 6;

/// Every subgroup, grown layer by layer from the trivial one by adjoining
/// one element at a time; sorted by size, then members.
pub fn ab_subgroups(a: &AbelianPGroup, order_cap: u64) -> Result<Vec<AbSubgroup>> {
    a.check_order(order_cap)?;
    let n = a.order() as usize;
    let mut seen: HashSet<Bits> = HashSet::new();
    let mut trivial = Bits::new(n);
    trivial.insert(0);
    seen.insert(trivial.clone());
    let mut layer = vec![trivial];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for s in &layer {
            for x in 0..n {
                if s.contains(x) {
                    continue;
                }
                let t = closure_bits(a, s, &[a.element(x)]);
                if seen.insert(t.clone()) {
                    next.push(t);
                }
            }
        }
        layer = next;
    }
    let mut out: Vec<AbSubgroup> = seen.iter().map(AbSubgroup::from_bits).collect();
    out.sort_by(|x, y| x.canonical_key().cmp(&y.canonical_key()));
    Ok(out)
}

pub fn image(phi: &AbAut, s: &AbSubgroup) -> AbSubgroup {
    let a = &phi.group;
    let mut m: Vec<usize> = s
        .members
        .iter()
        .map(|&x| a.index(&phi.apply(&a.element(x))))
        .collect();
    m.sort_unstable();
    AbSubgroup { members: m }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub best: AbSubgroup,
    pub orbit_size: usize,
    pub subgroup_count: usize,
}

/// Subgroup with the most distinct images under `phis`; ties go to the
/// first subgroup by size, then members.
pub fn orbit_search(a: &AbelianPGroup, phis: &[AbAut], order_cap: u64) -> Result<OrbitResult> {
    if phis.iter().any(|f| f.group != *a) {
        return Err(Error::dims("automorphism of a different group"));
    }
    let subs = ab_subgroups(a, order_cap)?;
    let mut best: Option<(usize, &AbSubgroup)> = None;
    for s in &subs {
        let k = phis
            .iter()
            .map(|f| image(f, s))
            .collect::<BTreeSet<_>>()
            .len();
        if best.is_none_or(|(b, _)| k > b) {
            best = Some((k, s));
        }
    }
    let (orbit_size, best) = best.expect("the trivial subgroup exists");
    Ok(OrbitResult {
        best: best.clone(),
        orbit_size,
        subgroup_count: subs.len(),
    })
}
