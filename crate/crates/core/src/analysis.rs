//! Subgroups of a [`FormGroup`] and the invariants computed from them.
//!
//! Most questions about a subgroup `H` of `E(tau)` only depend on two
//! subspaces: its generator projection `U = pi(H) ⊆ V` and its central
//! intersection `X = H ∩ W`. Centralizers, normalizers and cores are read off
//! the commutator form `beta`; maximal abelian subgroups correspond to
//! maximal isotropic subspaces of `(V, beta)`.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::formgroup::{FormGroup, GroupElement};
use crate::fpspace::{
    all_subspaces, for_each_subspace, inv_mod, maximal_isotropics_capped, projective_points,
    span_reduce, FpVec, Subspace,
};
use crate::Limits;

/// A subgroup of a [`FormGroup`].
///
/// `Pair { gens: U, central: X }` is the product set `{(u, x) : u ∈ U, x ∈ X}`,
/// which is a subgroup exactly when `tau(U, U) ⊆ X` (in particular whenever
/// `X = W`). Everything else is stored as its sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Subgroup {
    Generated { elements: Vec<GroupElement> },
    Pair { gens: Subspace, central: Subspace },
}

impl Subgroup {
    /// Checked subspace-pair constructor.
    pub fn pair(g: &FormGroup, gens: Subspace, central: Subspace) -> Result<Subgroup> {
        if gens.ambient_dim() != g.gen_dim() || central.ambient_dim() != g.cen_dim() {
            return Err(Error::dims("subspace pair does not fit the group"));
        }
        for a in gens.basis() {
            for b in gens.basis() {
                if !central.contains(&g.tau().eval(a, b)) {
                    return Err(Error::Invalid(format!(
                        "tau({a:?}, {b:?}) leaves the central part, not a subgroup"
                    )));
                }
            }
        }
        Ok(Subgroup::Pair { gens, central })
    }

    /// `U x W` for any `U`; always a subgroup.
    pub fn over_center(g: &FormGroup, gens: Subspace) -> Subgroup {
        Subgroup::Pair {
            gens,
            central: Subspace::full(g.p(), g.cen_dim()),
        }
    }

    pub fn trivial(g: &FormGroup) -> Subgroup {
        Subgroup::Pair {
            gens: Subspace::zero(g.p(), g.gen_dim()),
            central: Subspace::zero(g.p(), g.cen_dim()),
        }
    }

    pub fn whole(g: &FormGroup) -> Subgroup {
        Subgroup::Pair {
            gens: Subspace::full(g.p(), g.gen_dim()),
            central: Subspace::full(g.p(), g.cen_dim()),
        }
    }

    pub fn order(&self) -> u64 {
        match self {
            Subgroup::Generated { elements } => elements.len() as u64,
            Subgroup::Pair { gens, central } => gens.size() * central.size(),
        }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        match self {
            Subgroup::Generated { elements } => elements.binary_search(x).is_ok(),
            Subgroup::Pair { gens, central } => gens.contains(&x.v) && central.contains(&x.w),
        }
    }

    /// All elements, sorted.
    pub fn elements(&self) -> Vec<GroupElement> {
        match self {
            Subgroup::Generated { elements } => elements.clone(),
            Subgroup::Pair { gens, central } => {
                let ws: Vec<FpVec> = central.elements().collect();
                let mut out = Vec::with_capacity(self.order() as usize);
                for v in gens.elements() {
                    for w in &ws {
                        out.push(GroupElement {
                            v: v.clone(),
                            w: w.clone(),
                        });
                    }
                }
                out.sort();
                out
            }
        }
    }

    /// `pi(H)`, the projection to the generator space.
    pub fn gen_span(&self) -> Subspace {
        match self {
            Subgroup::Generated { elements } => {
                let id = &elements[0];
                let vs: Vec<FpVec> = elements.iter().map(|x| x.v.clone()).collect();
                span_reduce(id.v.p(), id.v.len(), &vs).expect("elements share shape")
            }
            Subgroup::Pair { gens, .. } => gens.clone(),
        }
    }

    /// `H ∩ W`.
    pub fn central_part(&self) -> Subspace {
        match self {
            Subgroup::Generated { elements } => {
                let id = &elements[0];
                let ws: Vec<FpVec> = elements
                    .iter()
                    .filter(|x| x.v.is_zero())
                    .map(|x| x.w.clone())
                    .collect();
                span_reduce(id.w.p(), id.w.len(), &ws).expect("elements share shape")
            }
            Subgroup::Pair { central, .. } => central.clone(),
        }
    }

    pub fn is_abelian(&self, g: &FormGroup) -> bool {
        g.skew().image_span(&self.gen_span()).is_zero()
    }

    /// `[H, G] ⊆ H`, i.e. `beta(U, V) ⊆ X`.
    pub fn is_normal(&self, g: &FormGroup) -> bool {
        let n = Subspace::full(g.p(), g.gen_dim());
        g.skew()
            .right_perp_into(&self.gen_span(), &self.central_part())
            .contains_subspace(&n)
    }

    /// A small generating set: lifts of a basis of `U` that lie in `H`,
    /// followed by a basis of `X`.
    pub fn generators(&self, g: &FormGroup) -> Vec<GroupElement> {
        match self {
            Subgroup::Pair { gens, central } => gens
                .basis()
                .iter()
                .map(|u| g.lift(u))
                .chain(central.basis().iter().map(|x| GroupElement {
                    v: FpVec::zero(g.p(), g.gen_dim()),
                    w: x.clone(),
                }))
                .collect(),
            Subgroup::Generated { elements } => {
                let mut out = Vec::new();
                let mut span = Subspace::zero(g.p(), g.gen_dim());
                for x in elements {
                    if !span.contains(&x.v) {
                        span = span.extend(&x.v).expect("shape");
                        out.push(x.clone());
                    }
                }
                for x in self.central_part().basis() {
                    out.push(GroupElement {
                        v: FpVec::zero(g.p(), g.gen_dim()),
                        w: x.clone(),
                    });
                }
                out
            }
        }
    }

    pub fn is_subgroup_of(&self, other: &Subgroup, g: &FormGroup) -> bool {
        self.generators(g).iter().all(|x| other.contains(x))
    }

    pub fn same_as(&self, other: &Subgroup, g: &FormGroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other, g)
    }

    /// Re-expresses the subgroup as a subspace pair when it is a product set.
    pub fn normalized(self, g: &FormGroup) -> Subgroup {
        if let Subgroup::Generated { .. } = &self {
            let u = self.gen_span();
            let x = self.central_part();
            if u.basis().iter().all(|b| self.contains(&g.lift(b))) {
                if let Ok(pair) = Subgroup::pair(g, u, x) {
                    return pair;
                }
            }
        }
        self
    }
}

/// The smallest subgroup containing `gens`. Subgroups that contain all of
/// `W` come back in subspace-pair form.
pub fn closure(g: &FormGroup, gens: &[GroupElement], limits: &Limits) -> Result<Subgroup> {
    for x in gens {
        g.check(x)?;
    }
    let id = g.identity();
    let mut set: HashSet<GroupElement> = HashSet::from([id.clone()]);
    let mut list = vec![id];
    let mut effective: Vec<GroupElement> = Vec::new();
    for x in gens {
        if set.contains(x) {
            continue;
        }
        effective.push(x.clone());
        let mut queue = list.clone();
        while let Some(a) = queue.pop() {
            for s in &effective {
                let b = g.mul(&a, s);
                if set.insert(b.clone()) {
                    if set.len() as u64 > limits.max_elements {
                        return Err(Error::capacity(
                            "subgroup closure order",
                            set.len() as u64,
                            limits.max_elements,
                        ));
                    }
                    list.push(b.clone());
                    queue.push(b);
                }
            }
        }
    }
    list.sort();
    let h = Subgroup::Generated { elements: list };
    if h.central_part().is_full() {
        return Ok(Subgroup::over_center(g, h.gen_span()));
    }
    Ok(h)
}

#[derive(Clone, Debug)]
pub struct RelativeSubgroups {
    pub centralizer: Subgroup,
    pub normalizer: Subgroup,
    pub core: Subgroup,
}

/// Centralizer, normalizer and core of `s`.
///
/// With `U = pi(S)` and `X = S ∩ W`: `C_G(S) = U^perp x W`,
/// `N_G(S) = {v : beta(U, v) ⊆ X} x W`, and the core is the set of elements
/// of `S` whose generator part `u` has `beta(u, V) ⊆ X`.
pub fn relative_subgroups(g: &FormGroup, s: &Subgroup) -> Result<RelativeSubgroups> {
    let u = s.gen_span();
    let x = s.central_part();
    if u.ambient_dim() != g.gen_dim() || x.ambient_dim() != g.cen_dim() {
        return Err(Error::dims("subgroup does not belong to the group"));
    }
    let full = Subspace::full(g.p(), g.gen_dim());
    let centralizer = Subgroup::over_center(g, g.skew().right_perp(&u));
    let normalizer = Subgroup::over_center(g, g.skew().right_perp_into(&u, &x));
    let u0 = u.intersection(&g.skew().right_perp_into(&full, &x))?;
    let core = match s {
        Subgroup::Pair { central, .. } => Subgroup::Pair {
            gens: u0,
            central: central.clone(),
        },
        Subgroup::Generated { elements } => Subgroup::Generated {
            elements: elements
                .iter()
                .filter(|e| u0.contains(&e.v))
                .cloned()
                .collect(),
        }
        .normalized(g),
    };
    debug_assert!(centralizer.is_subgroup_of(&normalizer, g));
    debug_assert!(core.is_subgroup_of(s, g) && core.is_normal(g));
    Ok(RelativeSubgroups {
        centralizer,
        normalizer,
        core,
    })
}

/// Every maximal abelian subgroup, in canonical order. Each one contains the
/// centre, hence `W`, and is `U x W` for a maximal isotropic `U`.
pub fn maximal_abelians(g: &FormGroup, limits: &Limits) -> Result<Vec<Subgroup>> {
    Ok(
        maximal_isotropics_capped(g.skew(), limits.max_isotropic_dim)?
            .into_iter()
            .map(|u| Subgroup::over_center(g, u))
            .collect(),
    )
}

/// Least number of abelian subgroups generating `G`, with a witness given by
/// the generator parts of maximal abelian subgroups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverWitness {
    pub count: usize,
    pub witness: Vec<Subspace>,
}

/// Least `r` such that `r` isotropic subspaces span `V`. Abelian subgroups
/// can be enlarged by `W` without losing commutativity, so this is `g(G)`.
pub fn gnum(g: &FormGroup, limits: &Limits) -> Result<CoverWitness> {
    let full = Subspace::full(g.p(), g.gen_dim());
    let isos = maximal_isotropics_capped(g.skew(), limits.max_isotropic_dim)?;
    if let Some(u) = isos.iter().find(|u| u.is_full()) {
        return Ok(CoverWitness {
            count: 1,
            witness: vec![u.clone()],
        });
    }
    let mut level: HashMap<Subspace, Vec<usize>> = isos
        .iter()
        .enumerate()
        .map(|(i, u)| (u.clone(), vec![i]))
        .collect();
    let mut seen: HashSet<Subspace> = level.keys().cloned().collect();
    let mut nodes = 0u64;
    loop {
        let mut keys: Vec<&Subspace> = level.keys().collect();
        keys.sort();
        let mut next: HashMap<Subspace, Vec<usize>> = HashMap::new();
        for s in keys {
            let path = &level[s];
            for (i, u) in isos.iter().enumerate() {
                nodes += 1;
                if nodes > limits.max_search_nodes {
                    return Err(Error::capacity(
                        "generating-number search nodes",
                        nodes,
                        limits.max_search_nodes,
                    ));
                }
                let t = s.sum(u)?;
                if t == full {
                    let mut w = path.clone();
                    w.push(i);
                    return Ok(CoverWitness {
                        count: w.len(),
                        witness: w.into_iter().map(|k| isos[k].clone()).collect(),
                    });
                }
                if seen.insert(t.clone()) {
                    let mut w = path.clone();
                    w.push(i);
                    next.insert(t, w);
                }
            }
        }
        if next.is_empty() {
            return Err(Error::Structure(
                "isotropic subspaces fail to span the generator space".into(),
            ));
        }
        level = next;
    }
}

/// Least number of maximal abelian subgroups whose union is `G`. An element
/// `(u, w)` lies in `U x W` iff `u ∈ U`, so this is an exact cover problem on
/// the projective points of `V` outside the radical.
pub fn chinum(g: &FormGroup, limits: &Limits) -> Result<CoverWitness> {
    let isos = maximal_isotropics_capped(g.skew(), limits.max_isotropic_dim)?;
    let rad = g.center_gens();
    let points: Vec<FpVec> = projective_points(g.p(), g.gen_dim())
        .into_iter()
        .filter(|x| !rad.contains(x))
        .collect();
    if points.is_empty() {
        return Ok(CoverWitness {
            count: 1,
            witness: vec![isos[0].clone()],
        });
    }
    let sets: Vec<Bits> = isos
        .iter()
        .map(|u| {
            let mut b = Bits::new(points.len());
            for (i, x) in points.iter().enumerate() {
                if u.contains(x) {
                    b.insert(i);
                }
            }
            b
        })
        .collect();
    let chosen = min_set_cover(points.len(), &sets, limits.max_search_nodes)?;
    Ok(CoverWitness {
        count: chosen.len(),
        witness: chosen.into_iter().map(|i| isos[i].clone()).collect(),
    })
}

/// Largest set of pairwise non-commuting elements.
///
/// The finite maximum is reported; the strict supremum `P(G)` used for
/// infinite groups is this value plus one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pmax {
    pub size: usize,
    pub witness: Vec<GroupElement>,
}

/// Vertices are projective points of `V` outside the radical, merged when
/// they have proportional `beta`-rows; edges join non-orthogonal points.
pub fn pnum(g: &FormGroup, limits: &Limits) -> Result<Pmax> {
    let (reps, adj) = noncommuting_graph(g, &Subspace::full(g.p(), g.gen_dim()), None)?;
    if reps.is_empty() {
        return Ok(Pmax {
            size: 1,
            witness: vec![g.identity()],
        });
    }
    let clique = max_clique(&adj, limits.max_search_nodes)?;
    Ok(Pmax {
        size: clique.len(),
        witness: clique.into_iter().map(|i| g.lift(&reps[i])).collect(),
    })
}

/// Points of `inside` not in `avoid` (default: the radical), merged by
/// proportional `beta`-rows, with the non-orthogonality graph.
fn noncommuting_graph(
    g: &FormGroup,
    inside: &Subspace,
    avoid: Option<&Subspace>,
) -> Result<(Vec<FpVec>, Vec<Bits>)> {
    let n = g.gen_dim();
    let rad = g.center_gens();
    let avoid = avoid.unwrap_or(&rad);
    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    for x in projective_points(g.p(), inside.dim()) {
        let v = inside.combine(x.coords());
        if avoid.contains(&v) {
            continue;
        }
        let row: Vec<u32> = (0..n)
            .flat_map(|j| {
                g.skew()
                    .eval(&v, &FpVec::unit(g.p(), n, j))
                    .coords()
                    .to_vec()
            })
            .collect();
        let key = FpVec::new(g.p(), row).normalized();
        if seen.insert(key) {
            reps.push(v);
        }
    }
    let mut adj = vec![Bits::new(reps.len()); reps.len()];
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if !g.skew().eval(&reps[i], &reps[j]).is_zero() {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    Ok((reps, adj))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub g: usize,
    pub chi: usize,
    pub pmax: usize,
    pub g_witness: Vec<Subspace>,
    pub chi_witness: Vec<Subspace>,
    pub pmax_witness: Vec<GroupElement>,
}

pub fn invariants(g: &FormGroup, limits: &Limits) -> Result<InvariantReport> {
    let gw = gnum(g, limits)?;
    let cw = chinum(g, limits)?;
    let pm = pnum(g, limits)?;
    Ok(InvariantReport {
        g: gw.count,
        chi: cw.count,
        pmax: pm.size,
        g_witness: gw.witness,
        chi_witness: cw.witness,
        pmax_witness: pm.witness,
    })
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Abelian subgroups whose join is `G`.
    pub parts: Vec<Subgroup>,
    /// Number of splitting levels along the deepest branch.
    pub depth: usize,
}

/// Splits `G` into abelian subgroups that together generate it.
///
/// Each level picks a hyperplane `A` of the derived subgroup `H'` and sweeps
/// the elements of `H` in lexicographic order. The first element `c0` that
/// fails to commute modulo `A` with some later element, and the first such
/// partner `c1`, are sent to `H_0` and `H_1`; everything before `c0` goes to
/// `H_0`, and every later element is corrected by powers of `c0` and `c1`
/// until it commutes with both modulo `A`. Both halves have derived subgroup
/// inside `A`, so the recursion ends after at most `log_p |G'|` levels.
pub fn decompose_22(g: &FormGroup, limits: &Limits) -> Result<Decomposition> {
    if g.order() > limits.max_elements {
        return Err(Error::capacity(
            "decomposition group order",
            g.order(),
            limits.max_elements,
        ));
    }
    let mut parts = Vec::new();
    let depth = split(g, Subgroup::whole(g), limits, &mut parts)?;
    Ok(Decomposition { parts, depth })
}

fn split(g: &FormGroup, h: Subgroup, limits: &Limits, out: &mut Vec<Subgroup>) -> Result<usize> {
    let p = g.p();
    let u = h.gen_span();
    let derived = g.skew().image_span(&u);
    if derived.is_zero() {
        out.push(h);
        return Ok(0);
    }
    let k = derived.dim();
    let a_n = derived.basis()[k - 1].clone();
    let a = span_reduce(p, g.cen_dim(), &derived.basis()[..k - 1])?;
    let q = a
        .annihilator()
        .basis()
        .iter()
        .find(|q| q.dot(&a_n) != 0)
        .cloned()
        .expect("a_n lies outside A");
    let q = q.scale(inv_mod(q.dot(&a_n), p));
    let n = g.gen_dim();
    let omega: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| q.dot(&g.skew().eval(&FpVec::unit(p, n, i), &FpVec::unit(p, n, j))))
                .collect()
        })
        .collect();
    let functional = |x: &GroupElement| -> FpVec {
        let mut f = FpVec::zero(p, n);
        for (i, row) in omega.iter().enumerate() {
            let c = x.v.get(i);
            if c != 0 {
                f.add_scaled(&FpVec::new(p, row.clone()), c);
            }
        }
        f
    };
    let om = |x: &GroupElement, y: &GroupElement| functional(x).dot(&y.v);

    let mut l = h.elements();
    let mut h0: Vec<GroupElement> = Vec::new();
    let mut h1: Vec<GroupElement> = Vec::new();
    loop {
        let fs: Vec<FpVec> = l.iter().map(&functional).collect();
        let pivot = (0..l.len()).find_map(|i| {
            (0..l.len())
                .find(|&j| fs[i].dot(&l[j].v) != 0)
                .map(|j| (i, j))
        });
        let Some((ia, ib)) = pivot else {
            h0.append(&mut l);
            break;
        };
        let ce = l[ia].clone();
        let co = l[ib].clone();
        h0.extend(l[..=ia].iter().cloned());
        h1.push(co.clone());
        let eo = om(&ce, &co);
        assert!(eo != 0, "pivot pair must pair non-trivially");
        let inv_eo = inv_mod(eo, p);
        let mut rest = Vec::with_capacity(l.len());
        for (idx, d) in l.iter().enumerate().skip(ia + 1) {
            if idx == ib {
                continue;
            }
            // omega(d', ce) = omega(d, ce) - y * eo, omega(d', co) = omega(d, co) + x * eo
            let x = ((p - om(d, &co)) as u64 * inv_eo as u64 % p as u64) as i64;
            let y = (om(d, &ce) as u64 * inv_eo as u64 % p as u64) as i64;
            let d2 = g.mul(&g.mul(d, &g.pow(&ce, x)), &g.pow(&co, y));
            debug_assert_eq!(om(&d2, &ce), 0);
            debug_assert_eq!(om(&d2, &co), 0);
            rest.push(d2);
        }
        l = rest;
    }
    let k0 = closure(g, &h0, limits)?;
    let k1 = closure(g, &h1, limits)?;
    for part in [&k0, &k1] {
        let d = g.skew().image_span(&part.gen_span());
        assert!(
            a.contains_subspace(&d),
            "derived subgroup of a half must lie in the chosen hyperplane"
        );
    }
    let d0 = split(g, k0, limits, out)?;
    let d1 = split(g, k1, limits, out)?;
    Ok(1 + d0.max(d1))
}

/// `count` abelian overgroups `<A, g_i>` of `a`, pairwise generating
/// non-abelian subgroups.
pub fn incompatible_extensions(
    g: &FormGroup,
    a: &Subgroup,
    count: usize,
    limits: &Limits,
) -> Result<Vec<Subgroup>> {
    let ua = a.gen_span();
    if !a.is_abelian(g) {
        return Err(Error::Precondition("A must be abelian".into()));
    }
    if !a.central_part().is_full() || !ua.contains_subspace(&g.center_gens()) {
        return Err(Error::Precondition("A must contain the centre".into()));
    }
    let c = g.skew().right_perp(&ua);
    if g.skew().image_span(&c).is_zero() {
        return Err(Error::Precondition(
            "the centralizer of A is abelian, so A has no incompatible extensions".into(),
        ));
    }
    let (reps, adj) = noncommuting_graph(g, &c, Some(&ua))?;
    let clique = max_clique(&adj, limits.max_search_nodes)?;
    if clique.len() < count {
        return Err(Error::Infeasible(format!(
            "requested {count} pairwise incompatible extensions, at most {} exist",
            clique.len()
        )));
    }
    clique
        .into_iter()
        .take(count)
        .map(|i| Ok(Subgroup::over_center(g, ua.extend(&reps[i])?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeumannProfile {
    /// `|G/Z(G)|`.
    pub gz: u64,
    /// `max_U [G : N_G(U)]`.
    pub max_n: u64,
    /// `max_U [G : C_G(U)]`.
    pub max_c: u64,
    /// `max_U |U / U_G|`.
    pub max_core: u64,
    /// `max [G : N_G(A)]` over abelian `A`.
    pub max_abelian_n: u64,
    /// False when the values are lower bounds from sampling.
    pub exact: bool,
    /// Number of `(U, X)` classes inspected.
    pub classes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileMode {
    Exact,
    /// Exact when within the cap, otherwise `samples` random subgroups.
    Auto {
        samples: usize,
        seed: u64,
    },
}

#[derive(Default)]
struct ProfileAcc {
    max_n: usize,
    max_c: usize,
    max_core: usize,
    max_abelian_n: usize,
    classes: u64,
}

impl ProfileAcc {
    fn visit(&mut self, g: &FormGroup, u: &Subspace, x: &Subspace) {
        let n = g.gen_dim();
        let full = Subspace::full(g.p(), n);
        let beta = g.skew();
        let norm = n - beta.right_perp_into(u, x).dim();
        let cent = n - beta.right_perp(u).dim();
        let u0 = u
            .intersection(&beta.right_perp_into(&full, x))
            .expect("shapes agree");
        let core = u.dim() - u0.dim();
        self.max_n = self.max_n.max(norm);
        self.max_c = self.max_c.max(cent);
        self.max_core = self.max_core.max(core);
        if beta.image_span(u).is_zero() {
            self.max_abelian_n = self.max_abelian_n.max(norm);
        }
        self.classes += 1;
    }
}

/// Extremal indices over all subgroups. Each index depends only on the pair
/// `(pi(H), H ∩ W)`, so the sweep runs over pairs `(U, X)` with
/// `beta(U, U) ⊆ X`, which is every such class of subgroups.
pub fn neumann_profile(
    g: &FormGroup,
    mode: ProfileMode,
    limits: &Limits,
) -> Result<NeumannProfile> {
    let p = g.p();
    let (n, m) = (g.gen_dim(), g.cen_dim());
    let mut acc = ProfileAcc::default();
    let exact = g.order() <= limits.max_subgroup_order;
    match (exact, mode) {
        (true, _) => {
            let beta = g.skew();
            for x in all_subspaces(p, m) {
                for_each_subspace(
                    p,
                    n,
                    |rows, r| rows.iter().all(|b| x.contains(&beta.eval(r, b))),
                    |u| acc.visit(g, u, &x),
                );
            }
        }
        (false, ProfileMode::Exact) => {
            return Err(Error::capacity(
                "exact subgroup profile group order",
                g.order(),
                limits.max_subgroup_order,
            ));
        }
        (false, ProfileMode::Auto { samples, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            acc.visit(g, &Subspace::full(p, n), &Subspace::full(p, m));
            for _ in 0..samples {
                let r = rng.gen_range(0..=n);
                let vs: Vec<FpVec> = (0..r).map(|_| random_vec(&mut rng, p, n)).collect();
                let u = span_reduce(p, n, &vs)?;
                let extra = rng.gen_range(0..=m);
                let mut ws: Vec<FpVec> = g.skew().image_span(&u).basis().to_vec();
                ws.extend((0..extra).map(|_| random_vec(&mut rng, p, m)));
                let x = span_reduce(p, m, &ws)?;
                acc.visit(g, &u, &x);
            }
        }
    }
    let pw = |e: usize| (p as u64).pow(e as u32);
    Ok(NeumannProfile {
        gz: pw(n - g.center_gens().dim()),
        max_n: pw(acc.max_n),
        max_c: pw(acc.max_c),
        max_core: pw(acc.max_core),
        max_abelian_n: pw(acc.max_abelian_n),
        exact,
        classes: acc.classes,
    })
}

fn random_vec(rng: &mut ChaCha8Rng, p: u32, n: usize) -> FpVec {
    FpVec::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect())
}

/// Minimum cover of `0..universe` by `sets`, returned as set indices.
pub(crate) fn min_set_cover(universe: usize, sets: &[Bits], node_cap: u64) -> Result<Vec<usize>> {
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (i, s) in sets.iter().enumerate() {
        for e in s.iter() {
            containing[e].push(i);
        }
    }
    if containing.iter().any(|c| c.is_empty()) {
        return Err(Error::Infeasible("some point lies in no set".into()));
    }
    let max_size = sets.iter().map(|s| s.count()).max().unwrap_or(1).max(1);

    let mut best: Vec<usize> = Vec::new();
    let mut covered = Bits::new(universe);
    while covered.count() < universe {
        let i = (0..sets.len())
            .max_by_key(|&i| (sets[i].and_not(&covered).count(), std::cmp::Reverse(i)))
            .unwrap();
        covered.or_assign(&sets[i]);
        best.push(i);
    }

    struct Search<'a> {
        sets: &'a [Bits],
        containing: &'a [Vec<usize>],
        universe: usize,
        max_size: usize,
        best: Vec<usize>,
        nodes: u64,
        cap: u64,
    }
    impl Search<'_> {
        fn dfs(&mut self, covered: &Bits, chosen: &mut Vec<usize>) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::capacity(
                    "set cover search nodes",
                    self.nodes,
                    self.cap,
                ));
            }
            let left = self.universe - covered.count();
            if left == 0 {
                if chosen.len() < self.best.len() {
                    self.best = chosen.clone();
                }
                return Ok(());
            }
            if chosen.len() + left.div_ceil(self.max_size) >= self.best.len() {
                return Ok(());
            }
            let e = (0..self.universe)
                .filter(|&e| !covered.contains(e))
                .min_by_key(|&e| self.containing[e].len())
                .unwrap();
            let mut opts = self.containing[e].clone();
            opts.sort_by_key(|&i| std::cmp::Reverse(self.sets[i].and_not(covered).count()));
            for i in opts {
                let mut c = covered.clone();
                c.or_assign(&self.sets[i]);
                chosen.push(i);
                self.dfs(&c, chosen)?;
                chosen.pop();
            }
            Ok(())
        }
    }
    let mut s = Search {
        sets,
        containing: &containing,
        universe,
        max_size,
        best,
        nodes: 0,
        cap: node_cap,
    };
    s.dfs(&Bits::new(universe), &mut Vec::new())?;
    let mut out = s.best;
    out.sort();
    Ok(out)
}

/// Maximum clique by branch and bound with a greedy colouring bound.
pub(crate) fn max_clique(adj: &[Bits], node_cap: u64) -> Result<Vec<usize>> {
    struct Search<'a> {
        adj: &'a [Bits],
        best: Vec<usize>,
        nodes: u64,
        cap: u64,
    }
    impl Search<'_> {
        fn expand(&mut self, r: &mut Vec<usize>, p: Bits) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::capacity("clique search nodes", self.nodes, self.cap));
            }
            // greedy colouring of p: colour classes are independent sets
            let mut order = Vec::new();
            let mut colour = Vec::new();
            let mut uncoloured = p.clone();
            let mut c = 0;
            while !uncoloured.is_empty() {
                c += 1;
                let mut q = uncoloured.clone();
                while let Some(v) = q.first() {
                    q.remove(v);
                    q = q.and_not(&self.adj[v]);
                    uncoloured.remove(v);
                    order.push(v);
                    colour.push(c);
                }
            }
            let mut p = p;
            for k in (0..order.len()).rev() {
                if r.len() + colour[k] <= self.best.len() {
                    return Ok(());
                }
                let v = order[k];
                r.push(v);
                let np = p.and(&self.adj[v]);
                if np.is_empty() {
                    if r.len() > self.best.len() {
                        self.best = r.clone();
                    }
                } else {
                    self.expand(r, np)?;
                }
                r.pop();
                p.remove(v);
            }
            Ok(())
        }
    }
    if adj.is_empty() {
        return Ok(Vec::new());
    }
    let n = adj.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by_key(|&v| (std::cmp::Reverse(adj[v].count()), v));
    let mut pos = vec![0; n];
    for (k, &v) in perm.iter().enumerate() {
        pos[v] = k;
    }
    let relabelled: Vec<Bits> = perm
        .iter()
        .map(|&v| {
            let mut b = Bits::new(n);
            for u in adj[v].iter() {
                b.insert(pos[u]);
            }
            b
        })
        .collect();
    let mut s = Search {
        adj: &relabelled,
        best: vec![0],
        nodes: 0,
        cap: node_cap,
    };
    s.expand(&mut Vec::new(), Bits::full(n))?;
    let mut out: Vec<usize> = s.best.iter().map(|&k| perm[k]).collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formgroup::FactorSystem;
    use crate::fpspace::BilinearMap;

    fn heis(p: u32, k: usize) -> FormGroup {
        let mut tau = BilinearMap::zero(p, 2 * k, 1);
        for i in 0..k {
            tau.set(2 * i, 2 * i + 1, FpVec::new(p, vec![1]));
        }
        FormGroup::new(FactorSystem::new(tau)).unwrap()
    }

    fn free2(p: u32, n: usize) -> FormGroup {
        let m = n * (n - 1) / 2;
        let tau = BilinearMap::from_fn(p, n, m, |i, j| {
            if i < j {
                FpVec::unit(p, m, j * (j - 1) / 2 + i)
            } else {
                FpVec::zero(p, m)
            }
        });
        FormGroup::new(FactorSystem::new(tau)).unwrap()
    }

    #[test]
    fn closure_examples() {
        let l = Limits::default();
        let h = heis(3, 1);
        assert_eq!(
            closure(&h, &[h.generator(0), h.generator(1)], &l)
                .unwrap()
                .order(),
            27
        );
        assert_eq!(closure(&h, &[], &l).unwrap().order(), 1);
        let f = free2(3, 2);
        let c = closure(&f, &[f.generator(0)], &l).unwrap();
        assert_eq!(c.order(), 3);
        let big = closure(
            &h,
            &[h.generator(0), h.generator(1)],
            &Limits {
                max_elements: 10,
                ..Limits::default()
            },
        );
        assert!(big.unwrap_err().is_capacity());
    }

    #[test]
    fn relative_subgroups_of_a_line() {
        let l = Limits::default();
        let h = heis(3, 1);
        let s = closure(&h, &[h.generator(0)], &l).unwrap();
        let r = relative_subgroups(&h, &s).unwrap();
        assert_eq!(r.centralizer.order(), 9);
        assert!(r.normalizer.same_as(&r.centralizer, &h));
        assert_eq!(r.core.order(), 1);

        let z = h.structural_subgroups().center;
        let r = relative_subgroups(&h, &z).unwrap();
        assert_eq!(r.centralizer.order(), 27);
        assert_eq!(r.normalizer.order(), 27);
        assert!(r.core.same_as(&z, &h));
    }

    #[test]
    fn invariants_of_small_extraspecial() {
        let l = Limits::default();
        let h = heis(3, 1);
        let ma = maximal_abelians(&h, &l).unwrap();
        assert_eq!(ma.len(), 4);
        assert!(ma.iter().all(|a| a.order() == 9));
        let r = invariants(&h, &l).unwrap();
        assert_eq!((r.g, r.chi, r.pmax), (2, 4, 4));
        assert_eq!(gnum(&heis(3, 2), &l).unwrap().count, 2);
        assert_eq!(chinum(&heis(3, 2), &l).unwrap().count, 10);
        let f = free2(3, 3);
        assert_eq!(maximal_abelians(&f, &l).unwrap().len(), 13);
        assert_eq!(gnum(&f, &l).unwrap().count, 3);
        assert_eq!(gnum(&free2(3, 2), &l).unwrap().count, 2);
    }

    #[test]
    fn abelian_invariants_are_trivial() {
        let l = Limits::default();
        let a = FormGroup::abelian(3, 2, 1).unwrap();
        let r = invariants(&a, &l).unwrap();
        assert_eq!((r.g, r.chi, r.pmax), (1, 1, 1));
        assert_eq!(maximal_abelians(&a, &l).unwrap().len(), 1);
        let d = decompose_22(&a, &l).unwrap();
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.depth, 0);
        let prof = neumann_profile(&a, ProfileMode::Exact, &l).unwrap();
        assert_eq!(
            (
                prof.gz,
                prof.max_n,
                prof.max_c,
                prof.max_core,
                prof.max_abelian_n
            ),
            (1, 1, 1, 1, 1)
        );
    }

    #[test]
    fn decompose_small_groups() {
        let l = Limits::default();
        for g in [heis(3, 1), heis(3, 2), free2(3, 3)] {
            let d = decompose_22(&g, &l).unwrap();
            assert!(d.parts.iter().all(|h| h.is_abelian(&g)));
            let gens: Vec<GroupElement> = d.parts.iter().flat_map(|h| h.generators(&g)).collect();
            assert_eq!(closure(&g, &gens, &l).unwrap().order(), g.order());
            assert!(d.depth <= g.derived_space().dim());
        }
        assert!(decompose_22(&heis(3, 1), &l).unwrap().parts.len() <= 2);
        assert!(decompose_22(&heis(3, 2), &l).unwrap().parts.len() <= 4);
    }

    #[test]
    fn incompatible_extension_cases() {
        let l = Limits::default();
        let h = heis(3, 1);
        let z = h.structural_subgroups().center;
        let ext = incompatible_extensions(&h, &z, 2, &l).unwrap();
        assert_eq!(ext.len(), 2);
        let join: Vec<GroupElement> = ext.iter().flat_map(|b| b.generators(&h)).collect();
        assert!(!closure(&h, &join, &l).unwrap().is_abelian(&h));

        let h2 = heis(3, 2);
        let z2 = h2.structural_subgroups().center;
        let ext = incompatible_extensions(&h2, &z2, 3, &l).unwrap();
        for i in 0..3 {
            assert!(ext[i].is_abelian(&h2));
            for j in i + 1..3 {
                let gens: Vec<GroupElement> = ext[i]
                    .generators(&h2)
                    .into_iter()
                    .chain(ext[j].generators(&h2))
                    .collect();
                assert!(!closure(&h2, &gens, &l).unwrap().is_abelian(&h2));
            }
        }
        let max = maximal_abelians(&h, &l).unwrap().remove(0);
        assert!(matches!(
            incompatible_extensions(&h, &max, 2, &l),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            incompatible_extensions(&h, &z, 5, &l),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn profiles_of_extraspecials() {
        let l = Limits::default();
        let p1 = neumann_profile(&heis(3, 1), ProfileMode::Exact, &l).unwrap();
        assert_eq!(
            (p1.gz, p1.max_n, p1.max_c, p1.max_core, p1.max_abelian_n),
            (9, 3, 9, 3, 3)
        );
        assert!(p1.exact);
        let p2 = neumann_profile(&heis(3, 2), ProfileMode::Exact, &l).unwrap();
        assert_eq!(
            (p2.gz, p2.max_n, p2.max_c, p2.max_abelian_n),
            (81, 9, 81, 9)
        );
        let tight = Limits {
            max_subgroup_order: 27,
            ..Limits::default()
        };
        assert!(neumann_profile(&heis(3, 2), ProfileMode::Exact, &tight)
            .unwrap_err()
            .is_capacity());
        let s = neumann_profile(
            &heis(3, 2),
            ProfileMode::Auto {
                samples: 50,
                seed: 1,
            },
            &tight,
        )
        .unwrap();
        assert!(!s.exact);
        assert!(s.max_n <= 9 && s.max_c == 81);
    }

    #[test]
    fn subgroup_representations_agree() {
        let l = Limits::default();
        let h = heis(3, 1);
        let x = h.multiply(&h.generator(0), &h.generator(1)).unwrap();
        let c = closure(&h, std::slice::from_ref(&x), &l).unwrap();
        assert!(matches!(c, Subgroup::Generated { .. }));
        assert_eq!(c.order(), 3);
        assert!(c.contains(&h.power(&x, 2).unwrap()));
        let line = Subspace::coordinate(3, 2, [0]);
        let pair = Subgroup::pair(&h, line, Subspace::zero(3, 1)).unwrap();
        let gen = closure(&h, &[h.generator(0)], &l).unwrap();
        assert_eq!(pair.elements(), gen.elements());
        let diag = span_reduce(3, 2, &[FpVec::new(3, vec![1, 1])]).unwrap();
        assert!(Subgroup::pair(&h, diag, Subspace::zero(3, 1)).is_err());
    }
}
