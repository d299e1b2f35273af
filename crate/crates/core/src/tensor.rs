//! Sparse square tensors and the multilinear contractions built on them.
//!
//! A tensor of order `m` and dimension `n` is stored as a sorted list of
//! nonzero coordinate entries. Indices are 0-based in memory; the JSON
//! format in [`crate::io`] is 1-based.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Result, TcpError};

/// Contractions switch to compensated summation above this many stored entries.
pub const COMPENSATED_NNZ: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    order: usize,
    dim: usize,
    entries: Vec<(Vec<usize>, f64)>,
}

/// Neumaier running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_len(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(TcpError::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}

impl Tensor {
    /// Builds a tensor from 0-based coordinate entries. Zero values are
    /// dropped; repeated index tuples are rejected.
    pub fn new<I>(order: usize, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        Self::check_shape(order, dim)?;
        let mut map = BTreeMap::new();
        for (idx, val) in entries {
            Self::check_index(order, dim, &idx)?;
            if !val.is_finite() {
                return Err(TcpError::InvalidTensor(format!(
                    "non-finite value at {idx:?}"
                )));
            }
            if map.insert(idx.clone(), val).is_some() {
                return Err(TcpError::InvalidTensor(format!(
                    "duplicate index {:?}",
                    idx.iter().map(|i| i + 1).collect::<Vec<_>>()
                )));
            }
        }
        Ok(Self::from_map(order, dim, map))
    }

    /// Like [`Tensor::new`] but repeated index tuples are summed.
    pub fn accumulate<I>(order: usize, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        Self::check_shape(order, dim)?;
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, val) in entries {
            Self::check_index(order, dim, &idx)?;
            if !val.is_finite() {
                return Err(TcpError::InvalidTensor(format!(
                    "non-finite value at {idx:?}"
                )));
            }
            *map.entry(idx).or_insert(0.0) += val;
        }
        Ok(Self::from_map(order, dim, map))
    }

    fn from_map(order: usize, dim: usize, map: BTreeMap<Vec<usize>, f64>) -> Self {
        let entries = map.into_iter().filter(|(_, v)| *v != 0.0).collect();
        Self {
            order,
            dim,
            entries,
        }
    }

    fn check_shape(order: usize, dim: usize) -> Result<()> {
        if order < 2 {
            return Err(TcpError::InvalidTensor(format!("order {order} < 2")));
        }
        if dim < 1 {
            return Err(TcpError::InvalidTensor("dimension 0".into()));
        }
        Ok(())
    }

    fn check_index(order: usize, dim: usize, idx: &[usize]) -> Result<()> {
        if idx.len() != order {
            return Err(TcpError::InvalidTensor(format!(
                "index {idx:?} has length {} but order is {order}",
                idx.len()
            )));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
            return Err(TcpError::InvalidTensor(format!(
                "index component {} out of range 1..={dim}",
                bad + 1
            )));
        }
        Ok(())
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        Self::new(order, dim, std::iter::empty())
    }

    /// The unit tensor: one on the main diagonal, zero elsewhere.
    pub fn unit(order: usize, dim: usize) -> Result<Self> {
        Self::new(order, dim, (0..dim).map(|i| (vec![i; order], 1.0)))
    }

    /// Order-2 tensor from matrix rows.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len(n, row)?;
            for (j, &v) in row.iter().enumerate() {
                entries.push((vec![i, j], v));
            }
        }
        Self::new(2, n, entries)
    }

    /// Dense row-major data, last index varying fastest.
    pub fn from_dense(order: usize, dim: usize, data: &[f64]) -> Result<Self> {
        Self::check_shape(order, dim)?;
        check_len(dim.pow(order as u32), data)?;
        let entries = data.iter().enumerate().map(|(flat, &v)| {
            let mut idx = vec![0; order];
            let mut r = flat;
            for p in (0..order).rev() {
                idx[p] = r % dim;
                r /= dim;
            }
            (idx, v)
        });
        Self::new(order, dim, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Stored nonzero entries in lexicographic index order.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.entries.iter().map(|(i, v)| (i.as_slice(), *v))
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries
            .binary_search_by(|(k, _)| k.as_slice().cmp(idx))
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        let map = self
            .entries
            .iter()
            .map(|(i, v)| (i.clone(), v * t))
            .collect();
        Self::from_map(self.order, self.dim, map)
    }

    pub fn add(&self, other: &Tensor) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut map: BTreeMap<Vec<usize>, f64> = self.entries.iter().cloned().collect();
        for (idx, v) in &other.entries {
            *map.entry(idx.clone()).or_insert(0.0) += v;
        }
        Ok(Self::from_map(self.order, self.dim, map))
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return Err(TcpError::ShapeMismatch(
                self.order,
                self.dim,
                other.order,
                other.dim,
            ));
        }
        Ok(())
    }

    fn compensated(&self) -> bool {
        self.entries.len() > COMPENSATED_NNZ
    }

    /// `A x^{m-1}`: component `i` is the sum of `a_{i i2..im} x_{i2}..x_{im}`.
    pub fn apply_m1(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, x)?;
        if self.compensated() {
            let mut acc = vec![Compensated::default(); self.dim];
            for (idx, a) in &self.entries {
                acc[idx[0]].add(a * idx[1..].iter().map(|&k| x[k]).product::<f64>());
            }
            return Ok(acc.iter().map(Compensated::value).collect());
        }
        let mut out = vec![0.0; self.dim];
        for (idx, a) in &self.entries {
            out[idx[0]] += a * idx[1..].iter().map(|&k| x[k]).product::<f64>();
        }
        Ok(out)
    }

    /// `A x^m = <x, A x^{m-1}>`.
    pub fn apply_m(&self, x: &[f64]) -> Result<f64> {
        let f = self.apply_m1(x)?;
        Ok(dot(x, &f))
    }

    /// `A x^{m-2}`: the n-by-n matrix with entry (i, j) the sum of
    /// `a_{i j i3..im} x_{i3}..x_{im}`. For order 2 this is the matrix itself.
    pub fn apply_m2(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.dim, x)?;
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (idx, a) in &self.entries {
            out[(idx[0], idx[1])] += a * idx[2..].iter().map(|&k| x[k]).product::<f64>();
        }
        Ok(out)
    }

    /// Exact Jacobian of `x -> A x^{m-1}`. Equals `(m-1) A x^{m-2}` only when
    /// the tensor is sub-symmetric.
    pub fn jacobian_m1(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.dim, x)?;
        let mut jac = DMatrix::zeros(self.dim, self.dim);
        for (idx, a) in &self.entries {
            let tail = &idx[1..];
            for p in 0..tail.len() {
                let rest: f64 = tail
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != p)
                    .map(|(_, &k)| x[k])
                    .product();
                jac[(idx[0], tail[p])] += a * rest;
            }
        }
        Ok(jac)
    }

    /// Gradient of the form `x -> A x^m`.
    pub fn gradient_m(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, x)?;
        let mut g = vec![0.0; self.dim];
        for (idx, a) in &self.entries {
            for p in 0..idx.len() {
                let rest: f64 = idx
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != p)
                    .map(|(_, &k)| x[k])
                    .product();
                g[idx[p]] += a * rest;
            }
        }
        Ok(g)
    }

    /// Principal sub-tensor on `alpha`, re-indexed to `0..|alpha|`.
    pub fn principal_subtensor(&self, alpha: &IndexSet) -> Result<Tensor> {
        self.check_index_set(alpha)?;
        if alpha.is_empty() {
            return Err(TcpError::InvalidIndexSet("empty index set".into()));
        }
        let pos = alpha.positions();
        let entries = self.entries.iter().filter_map(|(idx, v)| {
            idx.iter()
                .map(|&i| pos[i])
                .collect::<Option<Vec<_>>>()
                .map(|sub| (sub, *v))
        });
        Tensor::new(self.order, alpha.len(), entries)
    }

    /// `A_{ᾱα} u^{m-1}`: rows from the complement of `alpha`, every other
    /// index in `alpha`. `u` is indexed by position within `alpha`.
    pub fn apply_off(&self, alpha: &IndexSet, u: &[f64]) -> Result<Vec<f64>> {
        self.check_index_set(alpha)?;
        if alpha.is_empty() || alpha.len() == self.dim {
            return Err(TcpError::InvalidIndexSet(
                "need a nonempty proper subset".into(),
            ));
        }
        check_len(alpha.len(), u)?;
        let pos = alpha.positions();
        let comp = alpha.complement();
        let cpos = comp.positions();
        let mut out = vec![0.0; comp.len()];
        for (idx, a) in &self.entries {
            let Some(row) = cpos[idx[0]] else { continue };
            let prod: Option<f64> = idx[1..].iter().map(|&k| pos[k].map(|p| u[p])).product();
            if let Some(p) = prod {
                out[row] += a * p;
            }
        }
        Ok(out)
    }

    fn check_index_set(&self, alpha: &IndexSet) -> Result<()> {
        if alpha.ambient() != self.dim {
            return Err(TcpError::DimensionMismatch {
                expected: self.dim,
                found: alpha.ambient(),
            });
        }
        Ok(())
    }

    /// Invariance under every permutation of the index tuple (exact equality).
    pub fn is_symmetric(&self) -> bool {
        self.entries
            .iter()
            .all(|(idx, v)| permutations(idx).iter().all(|p| self.get(p) == *v))
    }

    /// Each slice `A_i` is invariant under permutations of `(i2, .., im)`.
    pub fn is_subsymmetric(&self) -> bool {
        self.entries.iter().all(|(idx, v)| {
            permutations(&idx[1..]).iter().all(|tail| {
                let mut full = Vec::with_capacity(idx.len());
                full.push(idx[0]);
                full.extend_from_slice(tail);
                self.get(&full) == *v
            })
        })
    }

    /// Average over all index permutations.
    pub fn symmetrized(&self) -> Tensor {
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, v) in &self.entries {
            for p in all_orderings(idx) {
                *map.entry(p).or_insert(0.0) += v;
            }
        }
        let count = (1..=self.order).product::<usize>() as f64;
        map.values_mut().for_each(|v| *v /= count);
        Self::from_map(self.order, self.dim, map)
    }

    /// Average over permutations of the trailing `m-1` indices.
    pub fn subsymmetrized(&self) -> Tensor {
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, v) in &self.entries {
            for tail in all_orderings(&idx[1..]) {
                let mut full = vec![idx[0]];
                full.extend(tail);
                *map.entry(full).or_insert(0.0) += v;
            }
        }
        let count = (1..self.order).product::<usize>() as f64;
        map.values_mut().for_each(|v| *v /= count);
        Self::from_map(self.order, self.dim, map)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &Tensor) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut map: BTreeMap<&[usize], f64> = BTreeMap::new();
        for (idx, v) in &self.entries {
            *map.entry(idx.as_slice()).or_insert(0.0) += v;
        }
        for (idx, v) in &other.entries {
            *map.entry(idx.as_slice()).or_insert(0.0) -= v;
        }
        Ok(map.values().map(|d| d * d).sum::<f64>().sqrt())
    }
}

/// Distinct orderings of an index tuple (multiset permutations).
fn permutations(idx: &[usize]) -> Vec<Vec<usize>> {
    let mut out = all_orderings(idx);
    out.sort();
    out.dedup();
    out
}

/// All `k!` orderings, repeats included, so averaging weights stay exact.
fn all_orderings(idx: &[usize]) -> Vec<Vec<usize>> {
    if idx.len() <= 1 {
        return vec![idx.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..idx.len() {
        let mut rest = idx.to_vec();
        let head = rest.remove(i);
        for mut tail in all_orderings(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Componentwise power `x^[p]`.
pub fn power_vec(x: &[f64], p: f64) -> Result<Vec<f64>> {
    let integral = p.fract() == 0.0;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v < 0.0 && !integral {
                Err(TcpError::NegativeBase { index: i, value: v })
            } else if integral {
                Ok(v.powi(p as i32))
            } else {
                Ok(v.powf(p))
            }
        })
        .collect()
}

/// Sorted, duplicate-free subset of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    n: usize,
    members: Vec<usize>,
}

impl IndexSet {
    /// 0-based members; must be distinct and below `n`.
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        let mut m = members.to_vec();
        m.sort_unstable();
        if m.windows(2).any(|w| w[0] == w[1]) {
            return Err(TcpError::InvalidIndexSet(format!(
                "duplicate members in {members:?}"
            )));
        }
        if let Some(&bad) = m.iter().find(|&&i| i >= n) {
            return Err(TcpError::InvalidIndexSet(format!(
                "member {} outside 1..={n}",
                bad + 1
            )));
        }
        Ok(Self { n, members: m })
    }

    pub fn from_one_based(n: usize, members: &[usize]) -> Result<Self> {
        if members.contains(&0) {
            return Err(TcpError::InvalidIndexSet("index 0 in 1-based list".into()));
        }
        let zero: Vec<usize> = members.iter().map(|i| i - 1).collect();
        Self::new(n, &zero)
    }

    pub fn empty(n: usize) -> Self {
        Self { n, members: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            members: (0..n).collect(),
        }
    }

    /// Members of bit mask `mask` (bit i set means i is a member).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self {
            n,
            members: (0..n).filter(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            n: self.n,
            members: (0..self.n).filter(|&i| !self.contains(i)).collect(),
        }
    }

    /// `pos[i] = Some(k)` when `i` is the k-th member.
    pub fn positions(&self) -> Vec<Option<usize>> {
        let mut pos = vec![None; self.n];
        for (k, &i) in self.members.iter().enumerate() {
            pos[i] = Some(k);
        }
        pos
    }

    /// Gathers the members' coordinates of `x`.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.members.iter().map(|&i| x[i]).collect()
    }

    /// Places `u` (indexed by member position) into a zero vector of length `n`.
    pub fn lift(&self, u: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (k, &i) in self.members.iter().enumerate() {
            x[i] = u[k];
        }
        x
    }

    /// All subsets of `0..n`, by increasing cardinality and lexicographically
    /// within a cardinality. The empty set comes first.
    pub fn all_by_cardinality(n: usize) -> Vec<IndexSet> {
        let mut out = vec![IndexSet::empty(n)];
        for k in 1..=n {
            let mut comb: Vec<usize> = (0..k).collect();
            loop {
                out.push(IndexSet {
                    n,
                    members: comb.clone(),
                });
                // advance to the next combination in lex order
                let mut i = k;
                while i > 0 && comb[i - 1] == n - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                comb[i - 1] += 1;
                for j in i..k {
                    comb[j] = comb[j - 1] + 1;
                }
            }
        }
        out
    }
}
