//! Groups `E(tau)` of exponent `p` and class at most 2, presented by a
//! bilinear factor system `tau: V x V -> W` over `F_p`.
//!
//! An element is a pair `(v, w)` with `v ∈ V` (generator part) and `w ∈ W`
//! (central part), multiplied by `(u, a)(v, b) = (u + v, a + b + tau(u, v))`.
//! The commutator of two elements depends only on their generator parts,
//! through the skew form `beta(u, v) = tau(u, v) - tau(v, u)`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::Subgroup;
use crate::error::{Error, Result};
use crate::fpspace::{self, all_vectors, radical, BilinearMap, FpVec, Subspace};

/// A factor system `tau: F_p^n x F_p^n -> F_p^m`, given bilinearly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorSystem {
    tau: BilinearMap,
}

impl FactorSystem {
    pub fn new(tau: BilinearMap) -> Self {
        FactorSystem { tau }
    }

    pub fn p(&self) -> u32 {
        self.tau.p()
    }

    pub fn gen_dim(&self) -> usize {
        self.tau.dom_dim()
    }

    pub fn cen_dim(&self) -> usize {
        self.tau.cod_dim()
    }

    pub fn tau(&self) -> &BilinearMap {
        &self.tau
    }
}

/// Anything that can be evaluated as a (candidate) factor system on
/// arbitrary vectors. Used by [`validate_factor_system`].
pub trait Cocycle {
    fn p(&self) -> u32;
    fn gen_dim(&self) -> usize;
    fn cen_dim(&self) -> usize;
    fn value(&self, u: &FpVec, v: &FpVec) -> FpVec;
}

impl Cocycle for FactorSystem {
    fn p(&self) -> u32 {
        self.tau.p()
    }
    fn gen_dim(&self) -> usize {
        self.tau.dom_dim()
    }
    fn cen_dim(&self) -> usize {
        self.tau.cod_dim()
    }
    fn value(&self, u: &FpVec, v: &FpVec) -> FpVec {
        self.tau.eval(u, v)
    }
}

/// A factor system given pointwise: a bilinear base plus explicit
/// overrides at chosen pairs. Overrides need not respect bilinearity.
#[derive(Clone, Debug)]
pub struct TabulatedCocycle {
    base: FactorSystem,
    overrides: HashMap<(FpVec, FpVec), FpVec>,
}

impl TabulatedCocycle {
    pub fn new(base: FactorSystem) -> Self {
        TabulatedCocycle {
            base,
            overrides: HashMap::new(),
        }
    }

    pub fn with_override(mut self, u: FpVec, v: FpVec, value: FpVec) -> Self {
        self.overrides.insert((u, v), value);
        self
    }
}

impl Cocycle for TabulatedCocycle {
    fn p(&self) -> u32 {
        self.base.p()
    }
    fn gen_dim(&self) -> usize {
        self.base.gen_dim()
    }
    fn cen_dim(&self) -> usize {
        self.base.cen_dim()
    }
    fn value(&self, u: &FpVec, v: &FpVec) -> FpVec {
        match self.overrides.get(&(u.clone(), v.clone())) {
            Some(x) => x.clone(),
            None => self.base.value(u, v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Normalization,
    CocycleIdentity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Validation {
    Ok,
    Violation {
        kind: ViolationKind,
        /// `(f, g, h)`; for normalization failures `h` is zero.
        triple: (FpVec, FpVec, FpVec),
    },
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        matches!(self, Validation::Ok)
    }
}

/// Above this many vectors in `V` the check runs over a spanning set
/// (zero, the basis, and pairwise basis sums) instead of all of `V`.
const EXHAUSTIVE_VALIDATION_LIMIT: u64 = 27;

/// Checks `tau(g, 0) = tau(0, g) = 0` and
/// `tau(f + g, h) + tau(f, g) = tau(f, g + h) + tau(g, h)`.
pub fn validate_factor_system(c: &dyn Cocycle) -> Validation {
    let (p, n, m) = (c.p(), c.gen_dim(), c.cen_dim());
    let zero = FpVec::zero(p, n);
    let test_set: Vec<FpVec> = if (p as u64).pow(n as u32) <= EXHAUSTIVE_VALIDATION_LIMIT {
        all_vectors(p, n).collect()
    } else {
        let mut s = vec![zero.clone()];
        for i in 0..n {
            s.push(FpVec::unit(p, n, i));
        }
        for i in 0..n {
            for j in i + 1..n {
                s.push(FpVec::unit(p, n, i).add(&FpVec::unit(p, n, j)));
            }
        }
        s
    };
    let wzero = FpVec::zero(p, m);
    for u in &test_set {
        if c.value(u, &zero) != wzero {
            return Validation::Violation {
                kind: ViolationKind::Normalization,
                triple: (u.clone(), zero.clone(), zero.clone()),
            };
        }
        if c.value(&zero, u) != wzero {
            return Validation::Violation {
                kind: ViolationKind::Normalization,
                triple: (zero.clone(), u.clone(), zero.clone()),
            };
        }
    }
    for f in &test_set {
        for g in &test_set {
            let fg = c.value(f, g);
            let fpg = f.add(g);
            for h in &test_set {
                let lhs = c.value(&fpg, h).add(&fg);
                let rhs = c.value(f, &g.add(h)).add(&c.value(g, h));
                if lhs != rhs {
                    return Validation::Violation {
                        kind: ViolationKind::CocycleIdentity,
                        triple: (f.clone(), g.clone(), h.clone()),
                    };
                }
            }
        }
    }
    Validation::Ok
}

/// An element `(v, w)` of a [`FormGroup`]; ordered lexicographically by
/// `v` then `w`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub v: FpVec,
    pub w: FpVec,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}; {:?})", self.v, self.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "abelian")]
    Abelian,
    #[serde(rename = "special")]
    Special,
    #[serde(rename = "extraspecial")]
    Extraspecial,
    #[serde(rename = "class2-other")]
    Class2Other,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Abelian => "abelian",
            GroupKind::Special => "special",
            GroupKind::Extraspecial => "extraspecial",
            GroupKind::Class2Other => "class2-other",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: GroupKind,
    pub center_order: u64,
    pub derived_order: u64,
    pub frattini_order: u64,
}

#[derive(Clone, Debug)]
pub struct StructuralSubgroups {
    pub center: Subgroup,
    pub derived: Subgroup,
    pub frattini: Subgroup,
}

/// The group `E(tau)` for an odd prime `p`.
///
/// `tau` is kept in canonical strictly upper-triangular form: `tau(e_i, e_j)`
/// is zero for `i >= j`. Any bilinear table is accepted and replaced by the
/// upper-triangular table with the same skew form, which presents an
/// isomorphic group because the symmetric difference is a coboundary for odd
/// `p`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormGroup {
    tau: BilinearMap,
    skew: BilinearMap,
}

impl fmt::Debug for FormGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FormGroup(p={}, n={}, m={}, tau={:?})",
            self.p(),
            self.gen_dim(),
            self.cen_dim(),
            self.tau
        )
    }
}

impl FormGroup {
    pub fn new(fs: FactorSystem) -> Result<Self> {
        let p = fs.p();
        fpspace::check_prime(p)?;
        if p == 2 {
            return Err(Error::InvalidModulus {
                p,
                reason: "p = 2 is rejected: the exponent-p identity fails, \
                         (u, 0)^2 = (0, tau(u, u)) need not be trivial"
                    .into(),
            });
        }
        let n = fs.gen_dim();
        let t = fs.tau();
        let tau = BilinearMap::from_fn(p, n, fs.cen_dim(), |i, j| {
            if i < j {
                t.get(i, j).sub(t.get(j, i))
            } else {
                FpVec::zero(p, fs.cen_dim())
            }
        });
        let skew = tau.skew();
        Ok(FormGroup { tau, skew })
    }

    /// Builds the group whose commutator form is the given alternating map.
    pub fn from_skew(skew: &BilinearMap) -> Result<Self> {
        if !skew.is_alternating() {
            return Err(Error::Invalid("commutator form must be alternating".into()));
        }
        let (p, n, m) = (skew.p(), skew.dom_dim(), skew.cod_dim());
        let tau = BilinearMap::from_fn(p, n, m, |i, j| {
            if i < j {
                skew.get(i, j).clone()
            } else {
                FpVec::zero(p, m)
            }
        });
        Self::new(FactorSystem::new(tau))
    }

    /// Elementary abelian group `F_p^n x F_p^m` with zero factor system.
    pub fn abelian(p: u32, n: usize, m: usize) -> Result<Self> {
        Self::new(FactorSystem::new(BilinearMap::zero(p, n, m)))
    }

    pub fn p(&self) -> u32 {
        self.tau.p()
    }

    pub fn gen_dim(&self) -> usize {
        self.tau.dom_dim()
    }

    pub fn cen_dim(&self) -> usize {
        self.tau.cod_dim()
    }

    pub fn tau(&self) -> &BilinearMap {
        &self.tau
    }

    pub fn skew(&self) -> &BilinearMap {
        &self.skew
    }

    pub fn factor_system(&self) -> FactorSystem {
        FactorSystem::new(self.tau.clone())
    }

    /// `log_p |G|`.
    pub fn log_order(&self) -> usize {
        self.gen_dim() + self.cen_dim()
    }

    /// `|G|`, saturating at `u64::MAX`.
    pub fn order(&self) -> u64 {
        (self.p() as u64)
            .checked_pow(self.log_order() as u32)
            .unwrap_or(u64::MAX)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            v: FpVec::zero(self.p(), self.gen_dim()),
            w: FpVec::zero(self.p(), self.cen_dim()),
        }
    }

    pub fn element(&self, v: FpVec, w: FpVec) -> Result<GroupElement> {
        let x = GroupElement { v, w };
        self.check(&x)?;
        Ok(x)
    }

    /// `(e_i, 0)`.
    pub fn generator(&self, i: usize) -> GroupElement {
        GroupElement {
            v: FpVec::unit(self.p(), self.gen_dim(), i),
            w: FpVec::zero(self.p(), self.cen_dim()),
        }
    }

    /// `(0, e_j)`.
    pub fn central(&self, j: usize) -> GroupElement {
        GroupElement {
            v: FpVec::zero(self.p(), self.gen_dim()),
            w: FpVec::unit(self.p(), self.cen_dim(), j),
        }
    }

    pub fn lift(&self, v: &FpVec) -> GroupElement {
        GroupElement {
            v: v.clone(),
            w: FpVec::zero(self.p(), self.cen_dim()),
        }
    }

    pub fn check(&self, x: &GroupElement) -> Result<()> {
        let p = self.p();
        if x.v.p() != p || x.w.p() != p {
            return Err(Error::ModulusMismatch {
                left: p,
                right: x.v.p(),
            });
        }
        if x.v.len() != self.gen_dim() || x.w.len() != self.cen_dim() {
            return Err(Error::dims(format!(
                "element with parts of length ({}, {}) in a group with dimensions ({}, {})",
                x.v.len(),
                x.w.len(),
                self.gen_dim(),
                self.cen_dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let mut w = x.w.add(&y.w);
        w = w.add(&self.tau.eval(&x.v, &y.v));
        GroupElement {
            v: x.v.add(&y.v),
            w,
        }
    }

    pub(crate) fn inv(&self, x: &GroupElement) -> GroupElement {
        GroupElement {
            v: x.v.neg(),
            w: x.w.neg().add(&self.tau.eval(&x.v, &x.v)),
        }
    }

    pub(crate) fn pow(&self, x: &GroupElement, k: i64) -> GroupElement {
        let (mut base, mut e) = if k < 0 {
            (self.inv(x), k.unsigned_abs())
        } else {
            (x.clone(), k as u64)
        };
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `[x, y] = x^-1 y^-1 x y = (0, beta(u, v))`.
    pub(crate) fn comm(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement {
            v: FpVec::zero(self.p(), self.gen_dim()),
            w: self.skew.eval(&x.v, &y.v),
        }
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    pub fn inverse(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(self.inv(x))
    }

    pub fn power(&self, x: &GroupElement, k: i64) -> Result<GroupElement> {
        self.check(x)?;
        Ok(self.pow(x, k))
    }

    pub fn commutator(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.comm(x, y))
    }

    pub fn commutes(&self, x: &GroupElement, y: &GroupElement) -> bool {
        self.skew.eval(&x.v, &y.v).is_zero()
    }

    /// Position of `x` in the lexicographic enumeration of the group.
    pub fn element_index(&self, x: &GroupElement) -> u64 {
        x.v.index() * (self.p() as u64).pow(self.cen_dim() as u32) + x.w.index()
    }

    pub fn element_at(&self, index: u64) -> GroupElement {
        let wsize = (self.p() as u64).pow(self.cen_dim() as u32);
        GroupElement {
            v: FpVec::from_index(self.p(), self.gen_dim(), index / wsize),
            w: FpVec::from_index(self.p(), self.cen_dim(), index % wsize),
        }
    }

    /// All elements in lexicographic `(v, w)` order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(move |i| self.element_at(i))
    }

    /// Radical of the commutator form: the generator parts of central
    /// elements.
    pub fn center_gens(&self) -> Subspace {
        radical(&self.skew, &Subspace::full(self.p(), self.gen_dim())).expect("shapes agree")
    }

    /// `G' = span beta(V, V)` as a subspace of `W`.
    pub fn derived_space(&self) -> Subspace {
        self.skew
            .image_span(&Subspace::full(self.p(), self.gen_dim()))
    }

    /// Checks `x^p = 1` on a generating set. For odd `p` in class 2 this
    /// gives exponent `p`, since `(xy)^p = x^p y^p [y, x]^(p(p-1)/2)`.
    pub fn has_exponent_p(&self) -> bool {
        let p = self.p() as i64;
        let id = self.identity();
        (0..self.gen_dim()).all(|i| self.pow(&self.generator(i), p) == id)
            && (0..self.cen_dim()).all(|j| self.pow(&self.central(j), p) == id)
    }

    pub fn structural_subgroups(&self) -> StructuralSubgroups {
        let p = self.p();
        let full_w = Subspace::full(p, self.cen_dim());
        let derived = self.derived_space();
        assert!(self.has_exponent_p(), "Frattini = derived needs exponent p");
        let center = Subgroup::Pair {
            gens: self.center_gens(),
            central: full_w,
        };
        let derived_sg = Subgroup::Pair {
            gens: Subspace::zero(p, self.gen_dim()),
            central: derived,
        };
        StructuralSubgroups {
            center,
            frattini: derived_sg.clone(),
            derived: derived_sg,
        }
    }

    pub fn classify(&self) -> Classification {
        let p = self.p() as u64;
        let rad = self.center_gens().dim();
        let der = self.derived_space().dim();
        let m = self.cen_dim();
        let center_dim = rad + m;
        let kind = if der == 0 {
            GroupKind::Abelian
        } else if rad == 0 && der == m {
            // Phi = G' = Z
            if m == 1 {
                GroupKind::Extraspecial
            } else {
                GroupKind::Special
            }
        } else {
            GroupKind::Class2Other
        };
        Classification {
            kind,
            center_order: p.pow(center_dim as u32),
            derived_order: p.pow(der as u32),
            frattini_order: p.pow(der as u32),
        }
    }
}

/// Direct sum: generator and central coordinates concatenated, block-diagonal
/// factor system.
pub fn direct_sum(a: &FormGroup, b: &FormGroup) -> Result<FormGroup> {
    if a.p() != b.p() {
        return Err(Error::ModulusMismatch {
            left: a.p(),
            right: b.p(),
        });
    }
    let p = a.p();
    let (n1, m1) = (a.gen_dim(), a.cen_dim());
    let (n2, m2) = (b.gen_dim(), b.cen_dim());
    let tau = BilinearMap::from_fn(p, n1 + n2, m1 + m2, |i, j| {
        if i < n1 && j < n1 {
            a.tau().get(i, j).concat(&FpVec::zero(p, m2))
        } else if i >= n1 && j >= n1 {
            FpVec::zero(p, m1).concat(b.tau().get(i - n1, j - n1))
        } else {
            FpVec::zero(p, m1 + m2)
        }
    });
    FormGroup::new(FactorSystem::new(tau))
}

/// Central product of two groups with one-dimensional central parts: the
/// generator parts are concatenated and the two central lines identified.
pub fn central_product(a: &FormGroup, b: &FormGroup) -> Result<FormGroup> {
    if a.p() != b.p() {
        return Err(Error::ModulusMismatch {
            left: a.p(),
            right: b.p(),
        });
    }
    if a.cen_dim() != 1 || b.cen_dim() != 1 {
        return Err(Error::Precondition(format!(
            "central product needs one-dimensional centres, got {} and {}",
            a.cen_dim(),
            b.cen_dim()
        )));
    }
    let p = a.p();
    let n1 = a.gen_dim();
    let n2 = b.gen_dim();
    let tau = BilinearMap::from_fn(p, n1 + n2, 1, |i, j| {
        if i < n1 && j < n1 {
            a.tau().get(i, j).clone()
        } else if i >= n1 && j >= n1 {
            b.tau().get(i - n1, j - n1).clone()
        } else {
            FpVec::zero(p, 1)
        }
    });
    FormGroup::new(FactorSystem::new(tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heisenberg(p: u32) -> FormGroup {
        let mut tau = BilinearMap::zero(p, 2, 1);
        tau.set(0, 1, FpVec::new(p, vec![1]));
        FormGroup::new(FactorSystem::new(tau)).unwrap()
    }

    #[test]
    fn rejects_p_two_and_composites() {
        let e = FormGroup::abelian(2, 1, 1).unwrap_err();
        match e {
            Error::InvalidModulus { p: 2, reason } => assert!(reason.contains("exponent")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(FormGroup::abelian(9, 1, 1).is_err());
    }

    #[test]
    fn validation_accepts_bilinear_and_reports_normalization() {
        let g = heisenberg(3);
        assert!(validate_factor_system(&g.factor_system()).is_ok());
        let e0 = FpVec::unit(3, 2, 0);
        let zero = FpVec::zero(3, 2);
        let bad = TabulatedCocycle::new(g.factor_system()).with_override(
            e0.clone(),
            zero.clone(),
            FpVec::new(3, vec![1]),
        );
        assert_eq!(
            validate_factor_system(&bad),
            Validation::Violation {
                kind: ViolationKind::Normalization,
                triple: (e0, zero.clone(), zero),
            }
        );
    }

    #[test]
    fn validation_catches_broken_cocycle_identity() {
        let g = heisenberg(3);
        let e0 = FpVec::unit(3, 2, 0);
        let e1 = FpVec::unit(3, 2, 1);
        let bad =
            TabulatedCocycle::new(g.factor_system()).with_override(e0, e1, FpVec::new(3, vec![2]));
        match validate_factor_system(&bad) {
            Validation::Violation { kind, .. } => assert_eq!(kind, ViolationKind::CocycleIdentity),
            Validation::Ok => panic!("expected a violation"),
        }
    }

    #[test]
    fn canonicalizes_to_upper_triangular() {
        let mut tau = BilinearMap::zero(3, 2, 1);
        tau.set(1, 0, FpVec::new(3, vec![1]));
        tau.set(0, 0, FpVec::new(3, vec![2]));
        let g = FormGroup::new(FactorSystem::new(tau.clone())).unwrap();
        assert_eq!(g.tau().get(0, 1), &FpVec::new(3, vec![2]));
        assert!(g.tau().get(1, 0).is_zero());
        assert!(g.tau().get(0, 0).is_zero());
        assert_eq!(g.skew(), &tau.skew());
    }

    #[test]
    fn element_arithmetic() {
        let g = heisenberg(3);
        let x = g.generator(0);
        let y = g.generator(1);
        assert_eq!(g.commutator(&x, &y).unwrap(), g.central(0));
        for a in g.elements() {
            assert_eq!(
                g.multiply(&a, &g.inverse(&a).unwrap()).unwrap(),
                g.identity()
            );
            assert_eq!(g.power(&a, 3).unwrap(), g.identity());
            assert_eq!(g.power(&a, -1).unwrap(), g.inverse(&a).unwrap());
        }
        let other = heisenberg(5);
        assert!(g.multiply(&x, &other.generator(0)).is_err());
    }

    #[test]
    fn classification_and_compose() {
        let h = heisenberg(3);
        let c = h.classify();
        assert_eq!(c.kind, GroupKind::Extraspecial);
        assert_eq!(c.center_order, 3);
        let z = FormGroup::abelian(3, 2, 1).unwrap();
        assert_eq!(z.classify().kind, GroupKind::Abelian);

        let cp = central_product(&h, &h).unwrap();
        assert_eq!(cp.order(), 243);
        assert_eq!(cp.classify().kind, GroupKind::Extraspecial);
        let ds = direct_sum(&h, &h).unwrap();
        assert_eq!(ds.order(), 3u64.pow(6));
        assert_eq!(ds.classify().kind, GroupKind::Special);
        let triv = FormGroup::abelian(3, 0, 0).unwrap();
        let same = direct_sum(&h, &triv).unwrap();
        assert_eq!(same, h);
        assert!(central_product(&ds, &h).is_err());
        assert!(direct_sum(&h, &heisenberg(5)).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = heisenberg(3);
        for (i, x) in g.elements().enumerate() {
            assert_eq!(g.element_index(&x), i as u64);
        }
        let all: Vec<_> = g.elements().collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }
}
