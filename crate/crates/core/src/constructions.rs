//! Builders for the named groups, and the two procedures that construct
//! central automorphisms block by block: the diagonalization against a list
//! of automorphisms, and the descent through finite partial automorphisms.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::Subgroup;
use crate::combinat::SetFamily;
use crate::error::{Error, Result};
use crate::formgroup::{direct_sum, FactorSystem, FormGroup, GroupElement};
use crate::fpspace::{all_vectors, projective_points, BilinearMap, FpVec, Subspace};

/// `c ↦ c + lambda(c) d` where `d` is the central coordinate `target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CentralAut {
    pub lambda: FpVec,
    pub target: usize,
}

impl CentralAut {
    /// Builds the automorphism and checks the homomorphism law on all pairs
    /// of basis elements.
    pub fn new(g: &FormGroup, lambda: FpVec, target: usize) -> Result<CentralAut> {
        if lambda.len() != g.gen_dim() || lambda.p() != g.p() {
            return Err(Error::dims(format!(
                "functional of length {} on a generator space of dimension {}",
                lambda.len(),
                g.gen_dim()
            )));
        }
        if target >= g.cen_dim() {
            return Err(Error::dims(format!(
                "target coordinate {target} outside a central space of dimension {}",
                g.cen_dim()
            )));
        }
        let a = CentralAut { lambda, target };
        let basis: Vec<GroupElement> = (0..g.gen_dim())
            .map(|i| g.generator(i))
            .chain((0..g.cen_dim()).map(|j| g.central(j)))
            .collect();
        for x in &basis {
            for y in &basis {
                if a.apply(g, &g.mul(x, y)) != g.mul(&a.apply(g, x), &a.apply(g, y)) {
                    return Err(Error::Structure("central map is not a homomorphism".into()));
                }
            }
        }
        Ok(a)
    }

    pub fn identity(g: &FormGroup, target: usize) -> Result<CentralAut> {
        CentralAut::new(g, FpVec::zero(g.p(), g.gen_dim()), target)
    }

    pub fn apply(&self, g: &FormGroup, x: &GroupElement) -> GroupElement {
        let k = self.lambda.dot(&x.v);
        let mut w = x.w.clone();
        w.set(self.target, (w.get(self.target) + k) % g.p());
        GroupElement { v: x.v.clone(), w }
    }

    /// Composition adds the functionals.
    pub fn compose(&self, other: &CentralAut) -> Result<CentralAut> {
        if self.target != other.target || self.lambda.len() != other.lambda.len() {
            return Err(Error::dims("central automorphisms with different targets"));
        }
        Ok(CentralAut {
            lambda: self.lambda.add(&other.lambda),
            target: self.target,
        })
    }
}

/// Block layout of a direct sum of free class-2 groups, with an optional
/// extra central coordinate `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub gen_bounds: Vec<usize>,
    pub cen_bounds: Vec<usize>,
    pub d_index: Option<usize>,
}

impl BlockStructure {
    pub fn len(&self) -> usize {
        self.gen_bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gen_range(&self, i: usize) -> Range<usize> {
        self.gen_bounds[i]..self.gen_bounds[i + 1]
    }

    pub fn cen_range(&self, i: usize) -> Range<usize> {
        self.cen_bounds[i]..self.cen_bounds[i + 1]
    }

    /// Generator coordinates of blocks `range`.
    pub fn gen_span(&self, blocks: Range<usize>) -> Range<usize> {
        self.gen_bounds[blocks.start]..self.gen_bounds[blocks.end]
    }

    fn validate(&self, g: &FormGroup) -> Result<()> {
        let ok = self.gen_bounds.first() == Some(&0)
            && self.cen_bounds.first() == Some(&0)
            && self.gen_bounds.len() == self.cen_bounds.len()
            && self.gen_bounds.windows(2).all(|w| w[0] < w[1])
            && self.cen_bounds.windows(2).all(|w| w[0] <= w[1])
            && self.gen_bounds.last() == Some(&g.gen_dim())
            && match self.d_index {
                Some(d) => d == g.cen_dim() - 1 && self.cen_bounds.last() == Some(&d),
                None => self.cen_bounds.last() == Some(&g.cen_dim()),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(
                "block structure does not match the group".into(),
            ))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeGroup {
    pub group: FormGroup,
    pub blocks: BlockStructure,
}

impl TreeGroup {
    pub fn new(group: FormGroup, blocks: BlockStructure) -> Result<TreeGroup> {
        blocks.validate(&group)?;
        Ok(TreeGroup { group, blocks })
    }

    /// Appends the central coordinate `d`.
    pub fn with_fresh_central(&self) -> Result<TreeGroup> {
        if self.blocks.d_index.is_some() {
            return Err(Error::Precondition("group already carries d".into()));
        }
        let group = with_fresh_central(&self.group)?;
        let blocks = BlockStructure {
            d_index: Some(group.cen_dim() - 1),
            ..self.blocks.clone()
        };
        TreeGroup::new(group, blocks)
    }

    pub fn d_index(&self) -> Result<usize> {
        self.blocks.d_index.ok_or_else(|| {
            Error::Precondition("the group needs the extra central coordinate d".into())
        })
    }

    /// `M_g = <W, g(i)>` for a branch given as one projective point per block.
    pub fn branch_subgroup(&self, points: &[FpVec]) -> Result<Subgroup> {
        let g = &self.group;
        if points.len() != self.blocks.len() {
            return Err(Error::dims("branch must pick one point per block"));
        }
        let mut vs = Vec::new();
        for (i, pt) in points.iter().enumerate() {
            let r = self.blocks.gen_range(i);
            if pt.len() != r.len() || pt.is_zero() {
                return Err(Error::Invalid(format!("bad point for block {i}")));
            }
            let mut v = FpVec::zero(g.p(), g.gen_dim());
            for (k, c) in r.clone().enumerate() {
                v.set(c, pt.get(k));
            }
            vs.push(v);
        }
        let u = crate::fpspace::span_reduce(g.p(), g.gen_dim(), &vs)?;
        Ok(Subgroup::over_center(g, u))
    }

    /// Inverse of [`branch_subgroup`](Self::branch_subgroup): the per-block
    /// points of a subgroup of the form `M_g`, or `None`.
    pub fn branch_of(&self, h: &Subgroup) -> Option<Vec<FpVec>> {
        let g = &self.group;
        if !h.central_part().is_full() {
            return None;
        }
        let u = h.gen_span();
        let mut out = Vec::new();
        let mut total = 0;
        for i in 0..self.blocks.len() {
            let r = self.blocks.gen_range(i);
            let coord = Subspace::coordinate(g.p(), g.gen_dim(), r.clone());
            let part = u.intersection(&coord).ok()?;
            if part.dim() != 1 {
                return None;
            }
            total += 1;
            out.push(part.basis()[0].slice(r.start, r.end).normalized());
        }
        (total == u.dim()).then_some(out)
    }

    /// All branch tuples, in lexicographic order of the per-block points.
    pub fn branches(&self) -> Vec<Vec<FpVec>> {
        let p = self.group.p();
        let mut out: Vec<Vec<FpVec>> = vec![Vec::new()];
        for i in 0..self.blocks.len() {
            let pts = projective_points(p, self.blocks.gen_range(i).len());
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    pts.iter().map(move |pt| {
                        let mut t = prefix.clone();
                        t.push(pt.clone());
                        t
                    })
                })
                .collect();
        }
        out
    }
}

/// Appends one central coordinate untouched by `tau`.
pub fn with_fresh_central(g: &FormGroup) -> Result<FormGroup> {
    direct_sum(g, &FormGroup::abelian(g.p(), 0, 1)?)
}

/// `tau(e_{2i}, e_{2i+1}) = 1`: the extraspecial group of order `p^(1+2k)`
/// and exponent `p`.
pub fn extraspecial(p: u32, k: usize) -> Result<FormGroup> {
    if k == 0 {
        return Err(Error::Invalid("extraspecial group needs k >= 1".into()));
    }
    let mut tau = BilinearMap::zero(p, 2 * k, 1);
    for i in 0..k {
        tau.set(2 * i, 2 * i + 1, FpVec::new(p, vec![1 % p]));
    }
    FormGroup::new(FactorSystem::new(tau))
}

/// Colexicographic rank of `{i, j}` with `i < j`.
pub fn colex_rank(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// Free class-2 exponent-`p` group on `n` generators.
pub fn free_nil2(p: u32, n: usize) -> Result<FormGroup> {
    if n == 0 {
        return Err(Error::Invalid("free group needs n >= 1".into()));
    }
    let m = n * (n - 1) / 2;
    let tau = BilinearMap::from_fn(p, n, m, |i, j| {
        if i < j {
            FpVec::unit(p, m, colex_rank(i, j))
        } else {
            FpVec::zero(p, m)
        }
    });
    FormGroup::new(FactorSystem::new(tau))
}

/// Direct sum of `free_nil2(p, n)` over `sizes`.
pub fn tree_group(p: u32, sizes: &[usize]) -> Result<TreeGroup> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Invalid(
            "tree group needs positive block sizes".into(),
        ));
    }
    let mut g = FormGroup::abelian(p, 0, 0)?;
    let mut gen_bounds = vec![0];
    let mut cen_bounds = vec![0];
    for &n in sizes {
        g = direct_sum(&g, &free_nil2(p, n)?)?;
        gen_bounds.push(g.gen_dim());
        cen_bounds.push(g.cen_dim());
    }
    TreeGroup::new(
        g,
        BlockStructure {
            gen_bounds,
            cen_bounds,
            d_index: None,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    /// `[a_i, a_j] = a` for `i < j`.
    Plain,
    /// Adds `b_0..b_{n-1}` with `[a_i, b_j] = a^-1` for `i < j`.
    Paired,
}

pub fn chain_group(p: u32, n: usize, kind: ChainKind) -> Result<FormGroup> {
    if n < 2 {
        return Err(Error::Invalid("chain group needs n >= 2".into()));
    }
    let one = FpVec::new(p, vec![1 % p]);
    let minus = FpVec::new(p, vec![p - 1]);
    let dim = match kind {
        ChainKind::Plain => n,
        ChainKind::Paired => 2 * n,
    };
    let tau = BilinearMap::from_fn(p, dim, 1, |i, j| {
        if i < j && j < n {
            one.clone()
        } else if i < n && j >= n && i < j - n {
            minus.clone()
        } else {
            FpVec::zero(p, 1)
        }
    });
    FormGroup::new(FactorSystem::new(tau))
}

/// A group extended by commuting central automorphisms, rewritten as a
/// [`FormGroup`]: generator `base_gen_dim + i` is the automorphism `phi_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualExtension {
    pub group: FormGroup,
    pub base_gen_dim: usize,
    pub target: usize,
    pub functionals: Vec<FpVec>,
    /// The automorphisms as maps of the base group (with `d` if added).
    pub automorphisms: Vec<CentralAut>,
    pub family: Option<SetFamily>,
}

impl DualExtension {
    /// The generator realizing `phi_i`.
    pub fn phi(&self, i: usize) -> GroupElement {
        self.group.generator(self.base_gen_dim + i)
    }
}

/// `(G ⊕ D) ⋊ <phi_lambda>` (or `G ⋊ <phi_lambda>` acting through the
/// central coordinate 0) as a class-2 group with
/// `beta'((u, s), (v, t)) = beta(u, v) + (Σ t_i lambda_i(u) - Σ s_i lambda_i(v)) e_target`.
/// With this sign `[a, phi_i] = lambda_i(a) e_target`.
pub fn dual_extension(
    g: &FormGroup,
    functionals: &[FpVec],
    fresh_d: bool,
) -> Result<DualExtension> {
    let base = if fresh_d {
        with_fresh_central(g)?
    } else {
        g.clone()
    };
    if base.cen_dim() == 0 {
        return Err(Error::Precondition(
            "no central coordinate to target".into(),
        ));
    }
    let target = if fresh_d { base.cen_dim() - 1 } else { 0 };
    let p = base.p();
    let n = base.gen_dim();
    let m = base.cen_dim();
    let r = functionals.len();
    let mut automorphisms = Vec::with_capacity(r);
    for f in functionals {
        automorphisms.push(CentralAut::new(&base, f.clone(), target)?);
    }
    let skew = BilinearMap::from_fn(p, n + r, m, |i, j| {
        if i < n && j < n {
            base.skew().get(i, j).clone()
        } else if i < n && j >= n {
            FpVec::unit(p, m, target).scale(functionals[j - n].get(i))
        } else if i >= n && j < n {
            FpVec::unit(p, m, target).scale(p - functionals[i - n].get(j))
        } else {
            FpVec::zero(p, m)
        }
    });
    let group = FormGroup::from_skew(&skew)?;
    for (i, f) in functionals.iter().enumerate() {
        for b in 0..n {
            let c = group.comm(&group.generator(b), &group.generator(n + i));
            assert_eq!(
                c.w,
                FpVec::unit(p, m, target).scale(f.get(b)),
                "automorphism must act through the target coordinate"
            );
        }
    }
    Ok(DualExtension {
        group,
        base_gen_dim: n,
        target,
        functionals: functionals.to_vec(),
        automorphisms,
        family: None,
    })
}

/// `extraspecial(p, k)` extended by the characteristic functionals of the
/// family's sets, acting through the centre. Set element `i` names the
/// generator `e_i`.
pub fn family_group(p: u32, k: usize, family: &SetFamily) -> Result<DualExtension> {
    let e = extraspecial(p, k)?;
    if family.universe_size() > 2 * k {
        return Err(Error::Invalid(format!(
            "family universe {} exceeds the {} generators",
            family.universe_size(),
            2 * k
        )));
    }
    let fs: Vec<FpVec> = family
        .sets()
        .iter()
        .map(|s| {
            let mut v = FpVec::zero(p, 2 * k);
            for &i in s {
                v.set(i, 1 % p);
            }
            v
        })
        .collect();
    let mut d = dual_extension(&e, &fs, false)?;
    d.family = Some(family.clone());
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagonalization {
    pub aut: CentralAut,
    /// Block windows, one per avoided automorphism.
    pub windows: Vec<Range<usize>>,
}

/// First functional on the window coordinates that vanishes on `constraints`
/// and differs from `psi`, scanning the allowed space in coefficient order.
fn pick_functional(
    p: u32,
    coords: Range<usize>,
    constraints: &[FpVec],
    psi: &FpVec,
) -> Option<FpVec> {
    let w = coords.len();
    let rows: Vec<FpVec> = constraints
        .iter()
        .map(|c| c.slice(coords.start, coords.end))
        .collect();
    let allowed = crate::fpspace::nullspace(p, w, &rows);
    let target = psi.slice(coords.start, coords.end);
    let found = allowed.elements().find(|f| *f != target);
    found
}

/// V-parts of `fix` that lie inside the coordinates `coords`.
fn parts_inside(g: &FormGroup, h: &Subgroup, coords: Range<usize>) -> Result<Vec<FpVec>> {
    let c = Subspace::coordinate(g.p(), g.gen_dim(), coords);
    Ok(h.gen_span().intersection(&c)?.basis().to_vec())
}

fn embed(p: u32, n: usize, coords: Range<usize>, f: &FpVec) -> FpVec {
    let mut v = FpVec::zero(p, n);
    for (k, c) in coords.enumerate() {
        v.set(c, f.get(k));
    }
    v
}

/// Builds `lambda` window by window. Window `k` is the shortest run of
/// blocks after window `k - 1` on which some functional differs from
/// `avoid[k]` while vanishing on the generator parts of `fix[0..=k]` there.
/// Outside the windows `lambda` is zero.
pub fn diagonal_automorphism(
    tree: &TreeGroup,
    avoid: &[CentralAut],
    fix: &[Subgroup],
) -> Result<Diagonalization> {
    let g = &tree.group;
    let d = tree.d_index()?;
    let (p, n) = (g.p(), g.gen_dim());
    let nb = tree.blocks.len();
    if avoid.len() > nb {
        return Err(Error::Infeasible(format!(
            "condition (iii) for avoid[{nb}]: {} automorphisms to avoid but only {nb} blocks",
            avoid.len()
        )));
    }
    for psi in avoid {
        if psi.target != d || psi.lambda.len() != n {
            return Err(Error::dims("avoided automorphism does not act through d"));
        }
    }
    let mut lambda = FpVec::zero(p, n);
    let mut windows = Vec::new();
    let mut start = 0;
    for (k, psi) in avoid.iter().enumerate() {
        let mut found = None;
        for end in start + 1..=nb {
            let coords = tree.blocks.gen_span(start..end);
            let mut cons = Vec::new();
            for h in fix.iter().take(k + 1) {
                cons.extend(parts_inside(g, h, coords.clone())?);
            }
            if let Some(f) = pick_functional(p, coords.clone(), &cons, &psi.lambda) {
                found = Some((end, coords, f));
                break;
            }
        }
        let Some((end, coords, f)) = found else {
            return Err(Error::Infeasible(format!(
                "condition (iii) for avoid[{k}]: no block window from block {start} works"
            )));
        };
        lambda = lambda.add(&embed(p, n, coords, &f));
        windows.push(start..end);
        start = end;
    }
    Ok(Diagonalization {
        aut: CentralAut::new(g, lambda, d)?,
        windows,
    })
}

/// Verifies the four window conditions from scratch on group elements:
/// (i) every `c` maps to `c + kd`, (ii) `W` is fixed, (iii) the map differs
/// from `avoid[k]` on the blocks up to the end of window `k`, (iv) it fixes
/// every element of `fix[j]` supported in window `k` for `j <= k`, and in
/// the blocks past the last window.
pub fn check_diagonal(
    tree: &TreeGroup,
    avoid: &[CentralAut],
    fix: &[Subgroup],
    result: &Diagonalization,
) -> std::result::Result<(), String> {
    let g = &tree.group;
    let d = tree.d_index().map_err(|e| e.to_string())?;
    let phi = &result.aut;
    if phi.target != d {
        return Err("automorphism does not act through d".into());
    }
    for i in 0..g.gen_dim() {
        let x = g.generator(i);
        let diff = g.mul(&g.inv(&x), &phi.apply(g, &x));
        if !diff.v.is_zero() || diff.w.support().iter().any(|&c| c != d) {
            return Err(format!("(i) fails on generator {i}"));
        }
    }
    for j in 0..g.cen_dim() {
        let z = g.central(j);
        if phi.apply(g, &z) != z {
            return Err(format!("(ii) fails on central coordinate {j}"));
        }
    }
    if result.windows.len() != avoid.len() {
        return Err("one window per avoided automorphism expected".into());
    }
    let mut prev = 0;
    for w in &result.windows {
        if w.start != prev || w.end <= w.start || w.end > tree.blocks.len() {
            return Err(format!("malformed window {w:?}"));
        }
        prev = w.end;
    }
    for (k, psi) in avoid.iter().enumerate() {
        let upto = tree.blocks.gen_bounds[result.windows[k].end];
        let differs = (0..upto).any(|i| {
            let x = g.generator(i);
            phi.apply(g, &x) != psi.apply(g, &x)
        });
        if !differs {
            return Err(format!("(iii) fails against avoid[{k}]"));
        }
    }
    let fixed_on = |blocks: Range<usize>, h: &Subgroup| -> bool {
        let coords = tree.blocks.gen_span(blocks);
        all_vectors(g.p(), coords.len()).all(|f| {
            let x = g.lift(&embed(g.p(), g.gen_dim(), coords.clone(), &f));
            !h.contains(&x) || phi.apply(g, &x) == x
        })
    };
    for (k, w) in result.windows.iter().enumerate() {
        for (j, h) in fix.iter().enumerate().take(k + 1) {
            if !fixed_on(w.clone(), h) {
                return Err(format!("(iv) fails for fix[{j}] in window {k}"));
            }
        }
    }
    for b in prev..tree.blocks.len() {
        for (j, h) in fix.iter().enumerate() {
            if !fixed_on(b..b + 1, h) {
                return Err(format!("(iv) fails for fix[{j}] in trailing block {b}"));
            }
        }
    }
    Ok(())
}

/// "Put `abelian` into the side set and differ from `differ_from` somewhere."
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub abelian: Subgroup,
    pub differ_from: CentralAut,
}

/// A finite partial automorphism (`lambda` on the first `domain` blocks,
/// zero beyond) together with its side set of abelian subgroups, given as
/// indices into the requirement list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub domain: usize,
    pub lambda: FpVec,
    pub side: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterResult {
    pub aut: CentralAut,
    /// `chain[0]` is the empty condition; `chain[r + 1]` meets requirement `r`.
    pub chain: Vec<Condition>,
    /// `(block, requirement)` for every block added to the domain.
    pub resolutions: Vec<(usize, usize)>,
}

/// Descends through conditions, meeting each requirement in turn. A new
/// block must be fixed by every subgroup already in the side set; side
/// conditions are applied per block. The final automorphism is the last
/// condition extended by the identity.
pub fn qc_filter(tree: &TreeGroup, requirements: &[Requirement]) -> Result<FilterResult> {
    let g = &tree.group;
    let d = tree.d_index()?;
    let (p, n) = (g.p(), g.gen_dim());
    let mut cond = Condition {
        domain: 0,
        lambda: FpVec::zero(p, n),
        side: Vec::new(),
    };
    let mut chain = vec![cond.clone()];
    let mut resolutions = Vec::new();
    for (r, req) in requirements.iter().enumerate() {
        if req.differ_from.target != d || req.differ_from.lambda.len() != n {
            return Err(Error::dims(format!(
                "requirement {r} does not act through d"
            )));
        }
        let dom = tree.blocks.gen_bounds[cond.domain];
        let mut differs = (0..dom).any(|i| cond.lambda.get(i) != req.differ_from.lambda.get(i));
        while !differs {
            let b = cond.domain;
            if b == tree.blocks.len() {
                return Err(Error::Infeasible(format!(
                    "requirement {r} is stuck: no free block left to differ from its automorphism"
                )));
            }
            let coords = tree.blocks.gen_range(b);
            let mut cons = Vec::new();
            for &s in &cond.side {
                cons.extend(parts_inside(g, &requirements[s].abelian, coords.clone())?);
            }
            let f = match pick_functional(p, coords.clone(), &cons, &req.differ_from.lambda) {
                Some(f) => {
                    differs = true;
                    f
                }
                None => FpVec::zero(p, coords.len()),
            };
            cond.lambda = cond.lambda.add(&embed(p, n, coords, &f));
            cond.domain += 1;
            resolutions.push((b, r));
        }
        if !cond.side.contains(&r) {
            cond.side.push(r);
        }
        chain.push(cond.clone());
    }
    Ok(FilterResult {
        aut: CentralAut::new(g, cond.lambda.clone(), d)?,
        chain,
        resolutions,
    })
}

/// Checks that consecutive conditions descend in the order
/// `(phi, A) <= (psi, B)` iff `phi ⊇ psi`, `A ⊇ B`, and `phi` fixes the
/// elements of every member of `B` in each newly added block; that
/// `chain[r + 1]` lies in the dense set of requirement `r`; and that the
/// final automorphism extends the last condition by the identity.
pub fn check_qc_chain(
    tree: &TreeGroup,
    requirements: &[Requirement],
    result: &FilterResult,
) -> std::result::Result<(), String> {
    let g = &tree.group;
    let nb = tree.blocks.len();
    let as_aut = |c: &Condition| CentralAut {
        lambda: c.lambda.clone(),
        target: result.aut.target,
    };
    if result.chain.len() != requirements.len() + 1 {
        return Err("chain length must be one more than the requirement count".into());
    }
    let first = &result.chain[0];
    if first.domain != 0 || !first.side.is_empty() || !first.lambda.is_zero() {
        return Err("chain must start at the empty condition".into());
    }
    for c in &result.chain {
        if c.domain > nb {
            return Err("domain beyond the last block".into());
        }
        let dom = tree.blocks.gen_bounds[c.domain];
        if (dom..g.gen_dim()).any(|i| c.lambda.get(i) != 0) {
            return Err("partial automorphism defined outside its domain".into());
        }
    }
    for r in 0..requirements.len() {
        let (weak, strong) = (&result.chain[r], &result.chain[r + 1]);
        if strong.domain < weak.domain {
            return Err(format!("step {r}: domain shrinks"));
        }
        let (phi, psi) = (as_aut(strong), as_aut(weak));
        for i in 0..tree.blocks.gen_bounds[weak.domain] {
            let x = g.generator(i);
            if phi.apply(g, &x) != psi.apply(g, &x) {
                return Err(format!("step {r}: extension changes the old domain"));
            }
        }
        if !weak.side.iter().all(|s| strong.side.contains(s)) {
            return Err(format!("step {r}: side set shrinks"));
        }
        for b in weak.domain..strong.domain {
            let coords = tree.blocks.gen_range(b);
            for &s in &weak.side {
                let h = &requirements[s].abelian;
                for f in all_vectors(g.p(), coords.len()) {
                    let x = g.lift(&embed(g.p(), g.gen_dim(), coords.clone(), &f));
                    if h.contains(&x) && phi.apply(g, &x) != x {
                        return Err(format!(
                            "step {r}: block {b} moves an element of side member {s}"
                        ));
                    }
                }
            }
        }
        if !strong.side.contains(&r) {
            return Err(format!(
                "step {r}: requirement's subgroup missing from the side set"
            ));
        }
        let psi_r = &requirements[r].differ_from;
        let differs = (0..tree.blocks.gen_bounds[strong.domain]).any(|i| {
            let x = g.generator(i);
            phi.apply(g, &x) != psi_r.apply(g, &x)
        });
        if !differs {
            return Err(format!(
                "step {r}: condition does not differ from the named automorphism"
            ));
        }
    }
    let last = result.chain.last().unwrap();
    if result.aut.lambda != last.lambda {
        return Err(
            "final automorphism is not the identity extension of the last condition".into(),
        );
    }
    Ok(())
}

/// A random maximal abelian subgroup `M_g` of a tree group.
pub fn random_branch_subgroup(tree: &TreeGroup, rng: &mut ChaCha8Rng) -> Result<Subgroup> {
    let p = tree.group.p();
    let pts: Vec<FpVec> = (0..tree.blocks.len())
        .map(|i| {
            let all = projective_points(p, tree.blocks.gen_range(i).len());
            all[rng.gen_range(0..all.len())].clone()
        })
        .collect();
    tree.branch_subgroup(&pts)
}

/// A random central automorphism through `d`.
pub fn random_central_aut(tree: &TreeGroup, rng: &mut ChaCha8Rng) -> Result<CentralAut> {
    let g = &tree.group;
    let lambda = FpVec::new(
        g.p(),
        (0..g.gen_dim()).map(|_| rng.gen_range(0..g.p())).collect(),
    );
    CentralAut::new(g, lambda, tree.d_index()?)
}

/// Seeded inputs for the two procedures: `n_avoid` automorphisms and
/// `n_fix` branch subgroups.
pub fn random_scenario(
    tree: &TreeGroup,
    n_avoid: usize,
    n_fix: usize,
    seed: u64,
) -> Result<(Vec<CentralAut>, Vec<Subgroup>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let avoid = (0..n_avoid)
        .map(|_| random_central_aut(tree, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let fix = (0..n_fix)
        .map(|_| random_branch_subgroup(tree, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((avoid, fix))
}

/// The named constructions at `p = 3`, each with a descriptive name, up to
/// order `max_order`.
pub fn corpus(max_order: u64) -> Result<Vec<(String, FormGroup)>> {
    let p = 3;
    let e1 = extraspecial(p, 1)?;
    let mut all: Vec<(String, FormGroup)> = vec![
        ("abelian(3,2,0)".into(), FormGroup::abelian(p, 2, 0)?),
        ("abelian(3,1,1)".into(), FormGroup::abelian(p, 1, 1)?),
        ("extraspecial(3,1)".into(), e1.clone()),
        ("extraspecial(3,2)".into(), extraspecial(p, 2)?),
        ("free_nil2(3,2)".into(), free_nil2(p, 2)?),
        ("free_nil2(3,3)".into(), free_nil2(p, 3)?),
        ("tree_group(3,[1,2])".into(), tree_group(p, &[1, 2])?.group),
        ("tree_group(3,[2,2])".into(), tree_group(p, &[2, 2])?.group),
        (
            "tree_group(3,[2,1,1])".into(),
            tree_group(p, &[2, 1, 1])?.group,
        ),
        (
            "with_fresh_central(extraspecial(3,1))".into(),
            with_fresh_central(&e1)?,
        ),
        (
            "central_product(extraspecial(3,1),extraspecial(3,1))".into(),
            crate::formgroup::central_product(&e1, &e1)?,
        ),
        (
            "direct_sum(extraspecial(3,1),abelian(3,1,0))".into(),
            direct_sum(&e1, &FormGroup::abelian(p, 1, 0)?)?,
        ),
        (
            "dual_extension(extraspecial(3,1),[(1,0)],fresh)".into(),
            dual_extension(&e1, &[FpVec::new(p, vec![1, 0])], true)?.group,
        ),
        (
            "dual_extension(extraspecial(3,1),[(1,1)])".into(),
            dual_extension(&e1, &[FpVec::new(p, vec![1, 1])], false)?.group,
        ),
    ];
    for n in 2..=5 {
        all.push((
            format!("chain_group(3,{n},plain)"),
            chain_group(p, n, ChainKind::Plain)?,
        ));
    }
    all.push((
        "chain_group(3,2,paired)".into(),
        chain_group(p, 2, ChainKind::Paired)?,
    ));
    let fams: [&[&[usize]]; 3] = [&[&[0]], &[&[0], &[1]], &[&[0, 1]]];
    for sets in fams {
        let f = SetFamily::new(2, sets.iter().map(|s| s.to_vec()).collect())?;
        all.push((
            format!("family_group(3,1,{sets:?})"),
            family_group(p, 1, &f)?.group,
        ));
    }
    let f = SetFamily::new(4, vec![vec![0, 2]])?;
    all.push((
        "family_group(3,2,[[0,2]])".into(),
        family_group(p, 2, &f)?.group,
    ));
    all.retain(|(_, g)| g.order() <= max_order);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{gnum, maximal_abelians};
    use crate::formgroup::GroupKind;
    use crate::fpspace::radical;
    use crate::Limits;

    #[test]
    fn named_groups() {
        let l = Limits::default();
        let e = extraspecial(3, 1).unwrap();
        assert_eq!(e.order(), 27);
        assert_eq!(e.classify().center_order, 3);
        let e2 = extraspecial(3, 2).unwrap();
        assert_eq!(e2.order(), 243);
        assert_eq!(maximal_abelians(&e2, &l).unwrap().len(), 40);
        let e5 = extraspecial(5, 1).unwrap();
        assert_eq!(e5.order(), 125);
        assert_eq!(maximal_abelians(&e5, &l).unwrap().len(), 6);
        assert!(extraspecial(2, 1).is_err());

        let f3 = free_nil2(3, 3).unwrap();
        assert_eq!(f3.order(), 729);
        let c = f3.classify();
        assert_eq!((c.kind, c.center_order), (GroupKind::Special, 27));
        assert_eq!(
            free_nil2(3, 2).unwrap().classify().kind,
            GroupKind::Extraspecial
        );
        assert_eq!(free_nil2(3, 1).unwrap().classify().kind, GroupKind::Abelian);
        assert_eq!(free_nil2(3, 1).unwrap().order(), 3);
    }

    #[test]
    fn tree_groups() {
        let l = Limits::default();
        let t = tree_group(3, &[2, 3]).unwrap();
        assert_eq!(t.group.order(), 3u64.pow(9));
        assert_eq!(maximal_abelians(&t.group, &l).unwrap().len(), 52);
        assert_eq!(t.branches().len(), 52);
        assert_eq!(tree_group(3, &[2]).unwrap().group, free_nil2(3, 2).unwrap());
        let ab = tree_group(3, &[1, 1]).unwrap().group;
        assert_eq!((ab.classify().kind, ab.order()), (GroupKind::Abelian, 9));
    }

    #[test]
    fn chain_groups() {
        let g = chain_group(3, 3, ChainKind::Plain).unwrap();
        let x = g.mul(&g.generator(0), &g.generator(1));
        let y = g.mul(&g.generator(1), &g.generator(2));
        assert_eq!(g.commutator(&x, &y).unwrap(), g.identity());
        assert_eq!(
            g.commutator(&g.generator(0), &g.generator(1)).unwrap(),
            g.central(0)
        );
        assert_eq!(
            chain_group(3, 2, ChainKind::Plain).unwrap().classify().kind,
            GroupKind::Extraspecial
        );
        let f = chain_group(3, 2, ChainKind::Paired).unwrap();
        let inv_a = f.inverse(&f.central(0)).unwrap();
        assert_eq!(
            f.commutator(&f.generator(0), &f.generator(3)).unwrap(),
            inv_a
        );
        assert_eq!(
            f.commutator(&f.generator(1), &f.generator(2)).unwrap(),
            f.identity()
        );
        assert_eq!(
            gnum(
                &chain_group(3, 4, ChainKind::Paired).unwrap(),
                &Limits::default()
            )
            .unwrap()
            .count,
            2
        );
    }

    #[test]
    fn dual_extension_examples() {
        let e = extraspecial(3, 1).unwrap();
        let lam = FpVec::new(3, vec![1, 0]);
        let d = dual_extension(&e, &[lam], true).unwrap();
        let g = &d.group;
        assert_eq!(g.order(), 243);
        let dd = g.central(d.target);
        assert_eq!(g.commutator(&g.generator(0), &d.phi(0)).unwrap(), dd);
        assert_eq!(
            g.commutator(&g.generator(1), &d.phi(0)).unwrap(),
            g.identity()
        );

        let e2 = extraspecial(3, 2).unwrap();
        let chi = FpVec::new(3, vec![1, 1, 0, 0]);
        let d2 = dual_extension(&e2, &[chi], false).unwrap();
        for b in 0..4 {
            let c = d2
                .group
                .commutator(&d2.group.generator(b), &d2.phi(0))
                .unwrap();
            assert_eq!(c.w.is_zero(), b >= 2);
        }
        let same = dual_extension(&e, &[], false).unwrap();
        assert_eq!(same.group, e);
        assert!(dual_extension(&e, &[FpVec::zero(3, 3)], false).is_err());
    }

    #[test]
    fn family_groups() {
        let f = SetFamily::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(family_group(3, 2, &f).unwrap().group.order(), 3u64.pow(8));
        let empty = SetFamily::new(2, vec![]).unwrap();
        assert_eq!(
            family_group(3, 1, &empty).unwrap().group,
            extraspecial(3, 1).unwrap()
        );
        let two = SetFamily::new(4, vec![vec![0], vec![1]]).unwrap();
        let g = family_group(3, 2, &two).unwrap().group;
        let rad = radical(g.skew(), &Subspace::full(3, g.gen_dim())).unwrap();
        assert_eq!(g.classify().kind == GroupKind::Extraspecial, rad.is_zero());
        let wide = SetFamily::new(5, vec![vec![4]]).unwrap();
        assert!(family_group(3, 2, &wide).is_err());
    }

    #[test]
    fn central_aut_composes_by_adding() {
        let t = tree_group(3, &[2]).unwrap().with_fresh_central().unwrap();
        let g = &t.group;
        let a = CentralAut::new(g, FpVec::new(3, vec![1, 0]), 1).unwrap();
        let b = CentralAut::new(g, FpVec::new(3, vec![2, 1]), 1).unwrap();
        let ab = a.compose(&b).unwrap();
        for x in g.elements() {
            assert_eq!(ab.apply(g, &x), a.apply(g, &b.apply(g, &x)));
        }
        assert!(CentralAut::new(g, FpVec::new(3, vec![1, 0]), 2).is_err());
    }

    #[test]
    fn diagonalization_examples() {
        let t = tree_group(3, &[2, 2, 2])
            .unwrap()
            .with_fresh_central()
            .unwrap();
        let g = &t.group;
        let id = CentralAut::identity(g, t.d_index().unwrap()).unwrap();
        let m = t.branches()[5].clone();
        let fix = vec![t.branch_subgroup(&m).unwrap()];
        let r = diagonal_automorphism(&t, std::slice::from_ref(&id), &fix).unwrap();
        assert!(!r.aut.lambda.is_zero());
        check_diagonal(&t, std::slice::from_ref(&id), &fix, &r).unwrap();

        let r0 = diagonal_automorphism(&t, &[], &[]).unwrap();
        assert!(r0.aut.lambda.is_zero());
        check_diagonal(&t, &[], &[], &r0).unwrap();

        let one = tree_group(3, &[2]).unwrap().with_fresh_central().unwrap();
        let a = CentralAut::identity(&one.group, 1).unwrap();
        let b = CentralAut::new(&one.group, FpVec::new(3, vec![1, 0]), 1).unwrap();
        assert!(matches!(
            diagonal_automorphism(&one, &[a, b], &[]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn filter_examples() {
        let t = tree_group(3, &[2, 2, 2, 2])
            .unwrap()
            .with_fresh_central()
            .unwrap();
        let (auts, subs) = random_scenario(&t, 2, 2, 11).unwrap();
        let reqs: Vec<Requirement> = auts
            .into_iter()
            .zip(subs)
            .map(|(a, m)| Requirement {
                abelian: m,
                differ_from: a,
            })
            .collect();
        let r = qc_filter(&t, &reqs).unwrap();
        check_qc_chain(&t, &reqs, &r).unwrap();
        for q in &reqs {
            assert_ne!(r.aut.lambda, q.differ_from.lambda);
        }
        let none = qc_filter(&t, &[]).unwrap();
        assert!(none.aut.lambda.is_zero());

        let one = tree_group(3, &[2]).unwrap().with_fresh_central().unwrap();
        let m = one.branch_subgroup(&one.branches()[0]).unwrap();
        let every: Vec<Requirement> = all_vectors(3, 2)
            .map(|f| Requirement {
                abelian: m.clone(),
                differ_from: CentralAut::new(&one.group, f, 1).unwrap(),
            })
            .collect();
        assert!(matches!(qc_filter(&one, &every), Err(Error::Infeasible(_))));
    }

    #[test]
    fn branch_round_trip() {
        let t = tree_group(3, &[2, 3]).unwrap();
        for b in t.branches() {
            let h = t.branch_subgroup(&b).unwrap();
            assert_eq!(t.branch_of(&h), Some(b));
        }
        assert_eq!(t.branch_of(&Subgroup::whole(&t.group)), None);
    }
}
