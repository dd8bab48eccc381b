//! Exact linear algebra over a prime field `F_p`.
//!
//! Vectors are dense residue lists, subspaces are stored by their reduced
//! row-echelon basis (so equality of subspaces is equality of structs), and
//! bilinear maps `F_p^n x F_p^n -> F_p^m` are stored by their values on
//! ordered pairs of basis vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the ambient dimension for exhaustive isotropic search.
pub const DEFAULT_MAX_ISOTROPIC_DIM: usize = 10;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidModulus {
            p,
            reason: "modulus must be prime".into(),
        })
    }
}

/// Multiplicative inverse modulo the prime `p`. `a` must be nonzero mod `p`.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    let a = a % p;
    assert!(a != 0, "zero has no inverse mod {p}");
    pow_mod(a, p - 2, p)
}

pub fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let m = p as u64;
    let mut acc = 1u64 % m;
    let mut b = base as u64 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u32
}

/// Reduce a signed integer into `[0, p)`.
pub fn reduce_i64(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

/// A vector over `F_p` with a fixed length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpVec {
    p: u32,
    coords: Vec<u32>,
}

impl fmt::Debug for FpVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl FpVec {
    pub fn zero(p: u32, len: usize) -> Self {
        FpVec {
            p,
            coords: vec![0; len],
        }
    }

    pub fn unit(p: u32, len: usize, i: usize) -> Self {
        let mut v = Self::zero(p, len);
        v.coords[i] = 1 % p;
        v
    }

    /// Builds a vector from arbitrary residues, reducing each modulo `p`.
    pub fn new(p: u32, coords: Vec<u32>) -> Self {
        FpVec {
            p,
            coords: coords.into_iter().map(|c| c % p).collect(),
        }
    }

    pub fn from_i64s(p: u32, coords: &[i64]) -> Self {
        FpVec {
            p,
            coords: coords.iter().map(|&c| reduce_i64(c, p)).collect(),
        }
    }

    /// Vector number `index` in the lexicographic enumeration of `F_p^len`
    /// (coordinate 0 is the most significant digit).
    pub fn from_index(p: u32, len: usize, mut index: u64) -> Self {
        let mut coords = vec![0u32; len];
        for c in coords.iter_mut().rev() {
            *c = (index % p as u64) as u32;
            index /= p as u64;
        }
        FpVec { p, coords }
    }

    /// Inverse of [`FpVec::from_index`].
    pub fn index(&self) -> u64 {
        self.coords
            .iter()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> u32 {
        self.coords[i]
    }

    pub fn set(&mut self, i: usize, value: u32) {
        self.coords[i] = value % self.p;
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Index of the first nonzero coordinate.
    pub fn leading(&self) -> Option<usize> {
        self.coords.iter().position(|&c| c != 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.coords[i] != 0).collect()
    }

    fn same_shape(&self, other: &FpVec) {
        debug_assert_eq!(self.p, other.p, "mixed moduli");
        debug_assert_eq!(self.len(), other.len(), "mixed lengths");
    }

    pub fn add(&self, other: &FpVec) -> FpVec {
        self.same_shape(other);
        let p = self.p;
        FpVec {
            p,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| ((a as u64 + b as u64) % p as u64) as u32)
                .collect(),
        }
    }

    pub fn sub(&self, other: &FpVec) -> FpVec {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FpVec {
        let p = self.p;
        FpVec {
            p,
            coords: self.coords.iter().map(|&a| (p - a) % p).collect(),
        }
    }

    pub fn scale(&self, c: u32) -> FpVec {
        let p = self.p as u64;
        let c = c as u64 % p;
        FpVec {
            p: self.p,
            coords: self
                .coords
                .iter()
                .map(|&a| (a as u64 * c % p) as u32)
                .collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &FpVec, c: u32) {
        self.same_shape(other);
        let p = self.p as u64;
        let c = c as u64 % p;
        if c == 0 {
            return;
        }
        for (a, &b) in self.coords.iter_mut().zip(&other.coords) {
            *a = ((*a as u64 + c * b as u64) % p) as u32;
        }
    }

    pub fn dot(&self, other: &FpVec) -> u32 {
        self.same_shape(other);
        let p = self.p as u64;
        (self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a as u64 * b as u64 % p)
            .sum::<u64>()
            % p) as u32
    }

    /// Scalar multiple whose leading coordinate is 1 (zero stays zero).
    pub fn normalized(&self) -> FpVec {
        match self.leading() {
            None => self.clone(),
            Some(i) => self.scale(inv_mod(self.coords[i], self.p)),
        }
    }

    pub fn concat(&self, other: &FpVec) -> FpVec {
        debug_assert_eq!(self.p, other.p);
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        FpVec { p: self.p, coords }
    }

    pub fn slice(&self, start: usize, end: usize) -> FpVec {
        FpVec {
            p: self.p,
            coords: self.coords[start..end].to_vec(),
        }
    }
}

/// Every vector of `F_p^len` in lexicographic order.
pub fn all_vectors(p: u32, len: usize) -> impl Iterator<Item = FpVec> {
    let total = (p as u64).pow(len as u32);
    (0..total).map(move |i| FpVec::from_index(p, len, i))
}

/// One normalized representative per 1-dimensional subspace of `F_p^len`,
/// in lexicographic order.
pub fn projective_points(p: u32, len: usize) -> Vec<FpVec> {
    all_vectors(p, len)
        .filter(|v| !v.is_zero() && v.coords[v.leading().unwrap()] == 1)
        .collect()
}

/// A subspace of `F_p^n` held as its reduced row-echelon basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    p: u32,
    ambient_dim: usize,
    basis: Vec<FpVec>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(F_{}^{}; {:?})",
            self.p, self.ambient_dim, self.basis
        )
    }
}

fn check_vectors(p: u32, n: usize, vectors: &[FpVec]) -> Result<()> {
    for v in vectors {
        if v.p != p {
            return Err(Error::ModulusMismatch {
                left: p,
                right: v.p,
            });
        }
        if v.len() != n {
            return Err(Error::dims(format!(
                "vector of length {} in F_{p}^{n}",
                v.len()
            )));
        }
    }
    Ok(())
}

/// Reduced row-echelon form of a list of rows, zero rows removed.
fn rref(p: u32, n: usize, rows: &[FpVec]) -> Vec<FpVec> {
    let mut m: Vec<FpVec> = rows.iter().filter(|r| !r.is_zero()).cloned().collect();
    let mut rank = 0;
    for col in 0..n {
        if rank == m.len() {
            break;
        }
        let Some(piv) = (rank..m.len()).find(|&r| m[r].coords[col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank].coords[col], p);
        m[rank] = m[rank].scale(inv);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row.coords[col] != 0 {
                let c = p - row.coords[col];
                row.add_scaled(&pivot_row, c);
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

/// Row-echelon basis of the span of `vectors` inside `F_p^n`.
pub fn span_reduce(p: u32, n: usize, vectors: &[FpVec]) -> Result<Subspace> {
    check_vectors(p, n, vectors)?;
    Ok(Subspace {
        p,
        ambient_dim: n,
        basis: rref(p, n, vectors),
    })
}

/// Solutions `x` of `rows . x = 0`; every row has length `n`.
pub fn nullspace(p: u32, n: usize, rows: &[FpVec]) -> Subspace {
    let r = rref(p, n, rows);
    let pivots: Vec<usize> = r.iter().map(|row| row.leading().unwrap()).collect();
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = FpVec::zero(p, n);
        v.coords[free] = 1 % p;
        for (row, &pc) in r.iter().zip(&pivots) {
            v.coords[pc] = (p - row.coords[free]) % p;
        }
        basis.push(v);
    }
    Subspace {
        p,
        ambient_dim: n,
        basis: rref(p, n, &basis),
    }
}

impl Subspace {
    pub fn zero(p: u32, n: usize) -> Self {
        Subspace {
            p,
            ambient_dim: n,
            basis: Vec::new(),
        }
    }

    pub fn full(p: u32, n: usize) -> Self {
        Subspace {
            p,
            ambient_dim: n,
            basis: (0..n).map(|i| FpVec::unit(p, n, i)).collect(),
        }
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(p: u32, n: usize, axes: impl IntoIterator<Item = usize>) -> Self {
        let vs: Vec<FpVec> = axes.into_iter().map(|i| FpVec::unit(p, n, i)).collect();
        Subspace {
            p,
            ambient_dim: n,
            basis: rref(p, n, &vs),
        }
    }

    /// Trusts the caller that `rows` are already in reduced row-echelon form.
    pub(crate) fn from_rref_unchecked(p: u32, n: usize, rows: Vec<FpVec>) -> Self {
        debug_assert_eq!(rref(p, n, &rows), rows);
        Subspace {
            p,
            ambient_dim: n,
            basis: rows,
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FpVec] {
        &self.basis
    }

    /// Number of vectors, `p^dim`.
    pub fn size(&self) -> u64 {
        (self.p as u64).pow(self.dim() as u32)
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|r| r.leading().unwrap()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Remainder of `v` after clearing the pivot columns; zero iff `v` is in
    /// the subspace.
    pub fn reduce(&self, v: &FpVec) -> FpVec {
        let mut r = v.clone();
        for row in &self.basis {
            let pc = row.leading().unwrap();
            let c = r.coords[pc];
            if c != 0 {
                r.add_scaled(row, self.p - c);
            }
        }
        r
    }

    pub fn contains(&self, v: &FpVec) -> bool {
        v.len() == self.ambient_dim && self.reduce(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        span_reduce(self.p, self.ambient_dim, &rows)
    }

    /// Adds one vector to the span.
    pub fn extend(&self, v: &FpVec) -> Result<Subspace> {
        let mut rows = self.basis.clone();
        rows.push(v.clone());
        span_reduce(self.p, self.ambient_dim, &rows)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::dims("intersection of subspaces of different spaces"));
        }
        // x in self ∩ other  <=>  x = Σ a_i s_i = Σ b_j o_j
        let (k, l, n) = (self.dim(), other.dim(), self.ambient_dim);
        let p = self.p;
        let mut eqs = Vec::with_capacity(n);
        for c in 0..n {
            let mut row = FpVec::zero(p, k + l);
            for i in 0..k {
                row.coords[i] = self.basis[i].coords[c];
            }
            for j in 0..l {
                row.coords[k + j] = (p - other.basis[j].coords[c]) % p;
            }
            eqs.push(row);
        }
        let sol = nullspace(p, k + l, &eqs);
        let vs: Vec<FpVec> = sol
            .basis
            .iter()
            .map(|s| self.combine(&s.coords[..k]))
            .collect();
        span_reduce(p, n, &vs)
    }

    /// `Σ coeffs[i] * basis[i]`.
    pub fn combine(&self, coeffs: &[u32]) -> FpVec {
        let mut v = FpVec::zero(self.p, self.ambient_dim);
        for (row, &c) in self.basis.iter().zip(coeffs) {
            v.add_scaled(row, c);
        }
        v
    }

    /// Every vector of the subspace, ordered by coefficient tuple.
    pub fn elements(&self) -> impl Iterator<Item = FpVec> + '_ {
        all_vectors(self.p, self.dim()).map(move |c| self.combine(&c.coords))
    }

    /// Linear functionals (as coefficient vectors) vanishing on the subspace.
    pub fn annihilator(&self) -> Subspace {
        nullspace(self.p, self.ambient_dim, &self.basis)
    }
}

/// A bilinear map `F_p^n x F_p^n -> F_p^m` given by its values on basis pairs.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BilinearMap {
    p: u32,
    dom_dim: usize,
    cod_dim: usize,
    table: Vec<FpVec>,
}

impl fmt::Debug for BilinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for i in 0..self.dom_dim {
            for j in 0..self.dom_dim {
                let v = self.get(i, j);
                if !v.is_zero() {
                    m.entry(&(i, j), v);
                }
            }
        }
        m.finish()
    }
}

impl BilinearMap {
    pub fn zero(p: u32, dom_dim: usize, cod_dim: usize) -> Self {
        BilinearMap {
            p,
            dom_dim,
            cod_dim,
            table: vec![FpVec::zero(p, cod_dim); dom_dim * dom_dim],
        }
    }

    pub fn from_fn(
        p: u32,
        dom_dim: usize,
        cod_dim: usize,
        mut f: impl FnMut(usize, usize) -> FpVec,
    ) -> Self {
        let mut m = Self::zero(p, dom_dim, cod_dim);
        for i in 0..dom_dim {
            for j in 0..dom_dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// A scalar-valued form from its Gram matrix.
    pub fn from_gram(p: u32, gram: &[Vec<i64>]) -> Self {
        let n = gram.len();
        Self::from_fn(p, n, 1, |i, j| FpVec::from_i64s(p, &[gram[i][j]]))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dom_dim(&self) -> usize {
        self.dom_dim
    }

    pub fn cod_dim(&self) -> usize {
        self.cod_dim
    }

    pub fn get(&self, i: usize, j: usize) -> &FpVec {
        &self.table[i * self.dom_dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: FpVec) {
        assert_eq!(value.len(), self.cod_dim, "codomain length");
        assert_eq!(value.p, self.p, "codomain modulus");
        self.table[i * self.dom_dim + j] = value;
    }

    /// Bilinear extension of the table.
    pub fn eval(&self, u: &FpVec, v: &FpVec) -> FpVec {
        debug_assert_eq!(u.len(), self.dom_dim);
        debug_assert_eq!(v.len(), self.dom_dim);
        let p = self.p as u64;
        let mut acc = vec![0u64; self.cod_dim];
        for (i, &ui) in u.coords.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.coords.iter().enumerate() {
                if vj == 0 {
                    continue;
                }
                let c = ui as u64 * vj as u64 % p;
                for (a, &t) in acc.iter_mut().zip(&self.get(i, j).coords) {
                    *a = (*a + c * t as u64) % p;
                }
            }
        }
        FpVec {
            p: self.p,
            coords: acc.into_iter().map(|a| a as u32).collect(),
        }
    }

    pub fn transpose(&self) -> BilinearMap {
        Self::from_fn(self.p, self.dom_dim, self.cod_dim, |i, j| {
            self.get(j, i).clone()
        })
    }

    /// `(u, v) -> beta(u, v) - beta(v, u)`.
    pub fn skew(&self) -> BilinearMap {
        Self::from_fn(self.p, self.dom_dim, self.cod_dim, |i, j| {
            self.get(i, j).sub(self.get(j, i))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(FpVec::is_zero)
    }

    pub fn is_alternating(&self) -> bool {
        (0..self.dom_dim).all(|i| {
            self.get(i, i).is_zero()
                && (0..self.dom_dim).all(|j| self.get(i, j).add(self.get(j, i)).is_zero())
        })
    }

    /// Rows of the linear conditions `beta(u, x) = 0` on `x`, one per
    /// codomain coordinate.
    fn right_conditions(&self, u: &FpVec) -> Vec<FpVec> {
        (0..self.cod_dim)
            .map(|k| {
                let mut row = FpVec::zero(self.p, self.dom_dim);
                for j in 0..self.dom_dim {
                    let mut s = 0u64;
                    for i in 0..self.dom_dim {
                        s += u.coords[i] as u64 * self.get(i, j).coords[k] as u64;
                    }
                    row.coords[j] = (s % self.p as u64) as u32;
                }
                row
            })
            .collect()
    }

    /// `{x : beta(u, x) = 0 for all u in U}`.
    pub fn right_perp(&self, u: &Subspace) -> Subspace {
        let rows: Vec<FpVec> = u
            .basis()
            .iter()
            .flat_map(|b| self.right_conditions(b))
            .collect();
        nullspace(self.p, self.dom_dim, &rows)
    }

    /// `{x : beta(u, x) ∈ target for all u in U}`; `target` lives in the
    /// codomain.
    pub fn right_perp_into(&self, u: &Subspace, target: &Subspace) -> Subspace {
        let ann = target.annihilator();
        let mut rows = Vec::new();
        for b in u.basis() {
            let conds = self.right_conditions(b);
            for q in ann.basis() {
                let mut row = FpVec::zero(self.p, self.dom_dim);
                for (k, c) in conds.iter().enumerate() {
                    row.add_scaled(c, q.coords[k]);
                }
                rows.push(row);
            }
        }
        nullspace(self.p, self.dom_dim, &rows)
    }

    /// Span of `beta(U, U)` inside the codomain.
    pub fn image_span(&self, u: &Subspace) -> Subspace {
        let mut vals = Vec::new();
        for a in u.basis() {
            for b in u.basis() {
                vals.push(self.eval(a, b));
            }
        }
        span_reduce(self.p, self.cod_dim, &vals).expect("values share shape")
    }
}

/// `{u ∈ inside : beta(u, v) = beta(v, u) = 0 for all v ∈ inside}`.
pub fn radical(beta: &BilinearMap, inside: &Subspace) -> Result<Subspace> {
    if inside.ambient_dim() != beta.dom_dim() {
        return Err(Error::dims(format!(
            "subspace of F_p^{} against form on F_p^{}",
            inside.ambient_dim(),
            beta.dom_dim()
        )));
    }
    if inside.p() != beta.p() {
        return Err(Error::ModulusMismatch {
            left: beta.p(),
            right: inside.p(),
        });
    }
    let p = beta.p();
    let k = inside.dim();
    let mut rows = Vec::new();
    for b in inside.basis() {
        for comp in 0..beta.cod_dim() {
            let mut left = FpVec::zero(p, k);
            let mut right = FpVec::zero(p, k);
            for (a, ba) in inside.basis().iter().enumerate() {
                left.coords[a] = beta.eval(ba, b).coords[comp];
                right.coords[a] = beta.eval(b, ba).coords[comp];
            }
            rows.push(left);
            rows.push(right);
        }
    }
    let coeffs = nullspace(p, k, &rows);
    let vs: Vec<FpVec> = coeffs
        .basis()
        .iter()
        .map(|c| inside.combine(c.coords()))
        .collect();
    span_reduce(p, inside.ambient_dim(), &vs)
}

/// Depth-first enumeration of all subspaces of `F_p^n` whose every
/// extension step passes `admissible(parent, new_row)`.
///
/// Each subspace is produced once: the parent of a subspace is the span of
/// its reduced row-echelon basis without the first row, so a child is formed
/// by a new first row whose pivot lies left of every existing pivot.
/// `admissible` must describe a hereditary property.
pub fn for_each_subspace<A, V>(p: u32, n: usize, mut admissible: A, mut visit: V)
where
    A: FnMut(&[FpVec], &FpVec) -> bool,
    V: FnMut(&Subspace),
{
    fn rec<A, V>(p: u32, n: usize, rows: &mut Vec<FpVec>, admissible: &mut A, visit: &mut V)
    where
        A: FnMut(&[FpVec], &FpVec) -> bool,
        V: FnMut(&Subspace),
    {
        visit(&Subspace::from_rref_unchecked(p, n, rows.clone()));
        let pivots: Vec<usize> = rows.iter().map(|r| r.leading().unwrap()).collect();
        let limit = pivots.first().copied().unwrap_or(n);
        for c in 0..limit {
            let free: Vec<usize> = (c + 1..n).filter(|j| !pivots.contains(j)).collect();
            for assign in all_vectors(p, free.len()) {
                let mut r = FpVec::zero(p, n);
                r.coords[c] = 1 % p;
                for (&j, &a) in free.iter().zip(assign.coords()) {
                    r.coords[j] = a;
                }
                if !admissible(rows, &r) {
                    continue;
                }
                rows.insert(0, r);
                rec(p, n, rows, admissible, visit);
                rows.remove(0);
            }
        }
    }
    let mut rows = Vec::new();
    rec(p, n, &mut rows, &mut admissible, &mut visit);
}

/// All subspaces of `F_p^n`, sorted canonically.
pub fn all_subspaces(p: u32, n: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for_each_subspace(p, n, |_, _| true, |s| out.push(s.clone()));
    out.sort();
    out
}

/// Every inclusion-maximal subspace on which the skew part of `beta`
/// vanishes, in canonical order.
pub fn maximal_isotropics(beta: &BilinearMap) -> Result<Vec<Subspace>> {
    maximal_isotropics_capped(beta, DEFAULT_MAX_ISOTROPIC_DIM)
}

/// Every maximal isotropic subspace contains the radical `R`, so the search
/// runs on a coordinate complement of `R`, where the form is nondegenerate;
/// `max_dim` caps the dimension of that complement.
pub fn maximal_isotropics_capped(beta: &BilinearMap, max_dim: usize) -> Result<Vec<Subspace>> {
    let (p, n) = (beta.p(), beta.dom_dim());
    let skew = beta.skew();
    let rad = radical(&skew, &Subspace::full(p, n))?;
    let pivots = rad.pivots();
    let comp: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let k = comp.len();
    if k > max_dim {
        return Err(Error::capacity(
            "exhaustive isotropic search dimension",
            k as u64,
            max_dim as u64,
        ));
    }
    let m = skew.cod_dim();
    let gram: Vec<u64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .flat_map(|(i, j)| skew.get(comp[i], comp[j]).coords().to_vec())
        .map(u64::from)
        .collect();
    let pairing = |u: &FpVec, v: &FpVec| -> bool {
        (0..m).all(|c| {
            let mut acc = 0u64;
            for (i, &ui) in u.coords().iter().enumerate() {
                if ui == 0 {
                    continue;
                }
                for (j, &vj) in v.coords().iter().enumerate() {
                    acc += ui as u64 * vj as u64 * gram[(i * k + j) * m + c];
                }
            }
            acc.is_multiple_of(p as u64)
        })
    };
    let restricted = BilinearMap::from_fn(p, k, m, |i, j| skew.get(comp[i], comp[j]).clone());
    let mut out = Vec::new();
    for_each_subspace(
        p,
        k,
        |rows, r| rows.iter().all(|u| pairing(u, r)),
        |u| {
            if restricted.right_perp(u).dim() == u.dim() {
                let lifted: Vec<FpVec> = u
                    .basis()
                    .iter()
                    .map(|b| {
                        let mut v = FpVec::zero(p, n);
                        for (i, &c) in comp.iter().enumerate() {
                            v.coords[c] = b.coords[i];
                        }
                        v
                    })
                    .collect();
                let rows = [rad.basis(), &lifted[..]].concat();
                out.push(span_reduce(p, n, &rows).expect("same field"));
            }
        },
    );
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(p: u32, c: &[i64]) -> FpVec {
        FpVec::from_i64s(p, c)
    }

    fn symplectic(p: u32, k: usize) -> BilinearMap {
        BilinearMap::from_fn(p, 2 * k, 1, |i, j| {
            let val = if i % 2 == 0 && j == i + 1 { 1 } else { 0 };
            FpVec::from_i64s(p, &[val])
        })
    }

    #[test]
    fn span_reduce_examples() {
        assert_eq!(span_reduce(3, 2, &[]).unwrap().dim(), 0);
        let s = span_reduce(3, 2, &[v(3, &[1, 1]), v(3, &[2, 2])]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis(), &[v(3, &[1, 1])]);
        let s = span_reduce(3, 2, &[v(3, &[1, 0]), v(3, &[1, 1])]).unwrap();
        assert!(s.is_full());
    }

    #[test]
    fn span_reduce_rejects_mixed_input() {
        assert!(matches!(
            span_reduce(3, 2, &[v(3, &[1, 0]), v(5, &[1, 0])]),
            Err(Error::ModulusMismatch { .. })
        ));
        assert!(matches!(
            span_reduce(3, 2, &[v(3, &[1, 0, 0])]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn radical_examples() {
        let full = Subspace::full(3, 2);
        assert_eq!(radical(&symplectic(3, 1), &full).unwrap().dim(), 0);
        assert!(radical(&BilinearMap::zero(3, 2, 1), &full)
            .unwrap()
            .is_full());
        let form = BilinearMap::from_gram(3, &[vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 0]]);
        let r = radical(&form, &Subspace::full(3, 3)).unwrap();
        assert_eq!(r.basis(), &[FpVec::unit(3, 3, 2)]);
        assert_eq!(radical(&form, &r).unwrap(), r);
    }

    #[test]
    fn maximal_isotropic_counts() {
        assert_eq!(maximal_isotropics(&symplectic(3, 1)).unwrap().len(), 4);
        assert_eq!(maximal_isotropics(&symplectic(3, 2)).unwrap().len(), 40);
        assert_eq!(maximal_isotropics(&symplectic(5, 1)).unwrap().len(), 6);
        let z = maximal_isotropics(&BilinearMap::zero(3, 2, 1)).unwrap();
        assert_eq!(z, vec![Subspace::full(3, 2)]);
    }

    #[test]
    fn lagrangian_dimension() {
        for (p, k) in [(3, 1), (3, 2), (5, 1)] {
            for u in maximal_isotropics(&symplectic(p, k)).unwrap() {
                assert_eq!(u.dim(), k);
            }
        }
    }

    #[test]
    fn isotropic_cap() {
        assert!(maximal_isotropics(&symplectic(3, 6))
            .unwrap_err()
            .is_capacity());
        let degenerate = maximal_isotropics(&BilinearMap::zero(3, 11, 1)).unwrap();
        assert_eq!(degenerate.len(), 1);
        assert!(degenerate[0].is_full());
    }

    #[test]
    fn subspace_counts() {
        // Gaussian binomials: F_3^3 has 1 + 13 + 13 + 1, F_3^4 has 212
        assert_eq!(all_subspaces(3, 3).len(), 28);
        assert_eq!(all_subspaces(3, 4).len(), 212);
        assert_eq!(all_subspaces(2, 3).len(), 16);
    }

    #[test]
    fn intersection_and_sum() {
        let a = Subspace::coordinate(3, 3, [0, 1]);
        let b = Subspace::coordinate(3, 3, [1, 2]);
        assert_eq!(a.intersection(&b).unwrap(), Subspace::coordinate(3, 3, [1]));
        assert!(a.sum(&b).unwrap().is_full());
    }

    #[test]
    fn right_perp_into_quotient() {
        // beta(e0, e1) = (1, 0): perp of e0 modulo the first codomain axis is everything
        let mut b = BilinearMap::zero(3, 2, 2);
        b.set(0, 1, v(3, &[1, 0]));
        let u = Subspace::coordinate(3, 2, [0]);
        assert_eq!(b.right_perp(&u).dim(), 1);
        let target = Subspace::coordinate(3, 2, [0]);
        assert!(b.right_perp_into(&u, &target).is_full());
    }
}
