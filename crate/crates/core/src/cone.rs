//! Finitely generated convex cones with both V- and H-representations.
//!
//! Generators and inequality normals are stored as unit vectors. The
//! H-representation of a general cone is derived from its generators by the
//! double description method, limited to `n <= 6`; orthant-like cones
//! (inequalities that are signed coordinate vectors) are handled at any
//! dimension.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TcpError};
use crate::rng::SplitMix64;
use crate::tensor::{dot, norm};

/// Largest dimension for which the double description method runs.
pub const MAX_DD_DIM: usize = 6;

/// Default absolute tolerance for active constraints.
pub const ACTIVE_TOL: f64 = 1e-8;

const RAY_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    Orthant,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    dim: usize,
    kind: ConeKind,
    generators: Vec<Vec<f64>>,
    inequalities: Vec<Vec<f64>>,
}

fn unit_basis(n: usize, i: usize, sign: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = sign;
    e
}

/// Unit vector along `v`; vectors already of unit length up to a few ulps
/// are kept as they are so that serialized cones load back bit-identical.
fn normalized(v: &[f64]) -> Vec<f64> {
    let s = norm(v);
    if (s - 1.0).abs() <= 4.0 * f64::EPSILON {
        return v.to_vec();
    }
    v.iter().map(|a| a / s).collect()
}

fn check_vectors(dim: usize, vs: &[Vec<f64>]) -> Result<()> {
    for (k, v) in vs.iter().enumerate() {
        if v.len() != dim {
            return Err(TcpError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if v.iter().any(|a| !a.is_finite()) {
            return Err(TcpError::InvalidCone(format!(
                "non-finite entry in vector {k}"
            )));
        }
        if norm(v) <= 1e-14 {
            return Err(TcpError::ZeroGenerator(k));
        }
    }
    Ok(())
}

/// If every row is a signed coordinate vector, returns the sign pattern per
/// coordinate: (has +e_i, has -e_i).
fn coordinate_pattern(dim: usize, rows: &[Vec<f64>]) -> Option<Vec<(bool, bool)>> {
    let mut pat = vec![(false, false); dim];
    for r in rows {
        let nz: Vec<usize> = (0..dim).filter(|&i| r[i] != 0.0).collect();
        if nz.len() != 1 {
            return None;
        }
        let i = nz[0];
        if r[i] > 0.0 {
            pat[i].0 = true;
        } else {
            pat[i].1 = true;
        }
    }
    Some(pat)
}

fn coordinate_generators(pat: &[(bool, bool)]) -> Vec<Vec<f64>> {
    let n = pat.len();
    let mut out = Vec::new();
    for (i, &(plus, minus)) in pat.iter().enumerate() {
        match (plus, minus) {
            (true, true) => {}
            (true, false) => out.push(unit_basis(n, i, 1.0)),
            (false, true) => out.push(unit_basis(n, i, -1.0)),
            (false, false) => {
                out.push(unit_basis(n, i, 1.0));
                out.push(unit_basis(n, i, -1.0));
            }
        }
    }
    out
}

/// Generators of `{y : <r, y> >= 0 for every row r}`: the extreme rays of
/// its pointed part plus a `±` pair for each lineality direction.
pub fn dual_generators(dim: usize, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if let Some(pat) = coordinate_pattern(dim, rows) {
        return Ok(coordinate_generators(&pat));
    }
    if dim > MAX_DD_DIM {
        return Err(TcpError::TooLarge {
            what: "double description",
            dim,
            limit: MAX_DD_DIM,
        });
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let gram = m.transpose() * &m;
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let tol = 1e-10 * top.max(1e-300);
    let mut range = Vec::new();
    let mut null = Vec::new();
    // sort eigenpairs for a deterministic basis ordering
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for k in order {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().cloned().collect();
        // sign convention: first significant component positive
        if let Some(first) = v.iter().find(|a| a.abs() > 1e-9) {
            if *first < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
        }
        if eig.eigenvalues[k] > tol {
            range.push(v);
        } else {
            null.push(v);
        }
    }
    let d = range.len();
    let reduced: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| normalized(&range.iter().map(|b| dot(b, r)).collect::<Vec<_>>()))
        .collect();
    let rays = pointed_extreme_rays(d, &reduced);
    let mut out: Vec<Vec<f64>> = rays
        .iter()
        .map(|z| {
            let y: Vec<f64> = (0..dim)
                .map(|i| range.iter().zip(z).map(|(b, zk)| b[i] * zk).sum())
                .collect();
            normalized(&y)
        })
        .collect();
    for l in null {
        out.push(l.iter().map(|a| -a).collect());
        out.push(l);
    }
    Ok(out)
}

/// Double description on `{z in R^d : <c, z> >= 0}` where the constraint
/// rows have full rank `d` (so the cone is pointed).
fn pointed_extreme_rays(d: usize, cons: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if d == 0 {
        return Vec::new();
    }
    // greedy choice of d independent rows
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (j, c) in cons.iter().enumerate() {
        let mut r = c.clone();
        for b in &basis {
            let t = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(a, bb)| *a -= t * bb);
        }
        if norm(&r) > 1e-9 {
            basis.push(normalized(&r));
            chosen.push(j);
            if chosen.len() == d {
                break;
            }
        }
    }
    let c0 = DMatrix::from_fn(d, d, |i, k| cons[chosen[i]][k]);
    let inv = c0.try_inverse().expect("chosen rows are independent");
    let mut rays: Vec<Vec<f64>> = (0..d)
        .map(|k| normalized(&inv.column(k).iter().cloned().collect::<Vec<_>>()))
        .collect();
    let mut processed = chosen.clone();

    for (j, c) in cons.iter().enumerate() {
        if chosen.contains(&j) {
            continue;
        }
        let vals: Vec<f64> = rays.iter().map(|r| dot(c, r)).collect();
        if vals.iter().all(|&v| v >= -RAY_EPS) {
            processed.push(j);
            continue;
        }
        let zero_sets: Vec<Vec<usize>> = rays
            .iter()
            .map(|r| {
                processed
                    .iter()
                    .cloned()
                    .filter(|&k| dot(&cons[k], r).abs() <= RAY_EPS)
                    .collect()
            })
            .collect();
        let mut next: Vec<Vec<f64>> = Vec::new();
        for (r, &v) in rays.iter().zip(&vals) {
            if v >= -RAY_EPS {
                next.push(r.clone());
            }
        }
        for (p, &vp) in vals.iter().enumerate() {
            if vp <= RAY_EPS {
                continue;
            }
            for (q, &vq) in vals.iter().enumerate() {
                if vq >= -RAY_EPS {
                    continue;
                }
                let common: Vec<usize> = zero_sets[p]
                    .iter()
                    .cloned()
                    .filter(|k| zero_sets[q].contains(k))
                    .collect();
                if common.len() + 2 < d {
                    continue;
                }
                let blocked = (0..rays.len())
                    .any(|t| t != p && t != q && common.iter().all(|k| zero_sets[t].contains(k)));
                if blocked {
                    continue;
                }
                let r: Vec<f64> = rays[q]
                    .iter()
                    .zip(&rays[p])
                    .map(|(a, b)| vp * a - vq * b)
                    .collect();
                if norm(&r) > 1e-12 {
                    next.push(normalized(&r));
                }
            }
        }
        dedup_directions(&mut next);
        rays = next;
        processed.push(j);
        if rays.is_empty() {
            break;
        }
    }
    rays
}

fn dedup_directions(vs: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs.drain(..) {
        if !out.iter().any(|w| same_direction(w, &v)) {
            out.push(v);
        }
    }
    *vs = out;
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() < 1e-16
}

fn matrix_rank(dim: usize, vs: &[Vec<f64>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(vs.len(), dim, |i, j| vs[i][j]);
    m.rank(1e-9)
}

impl PolyhedralCone {
    /// The nonnegative orthant of `R^n`; self-dual.
    pub fn orthant(n: usize) -> Self {
        let basis: Vec<Vec<f64>> = (0..n).map(|i| unit_basis(n, i, 1.0)).collect();
        Self {
            dim: n,
            kind: ConeKind::Orthant,
            generators: basis.clone(),
            inequalities: basis,
        }
    }

    /// Pointed cone spanned by `generators`. Redundant and repeated
    /// generators are dropped, leaving the extreme rays.
    pub fn from_generators(dim: usize, generators: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(TcpError::InvalidCone("dimension 0".into()));
        }
        if generators.is_empty() {
            return Err(TcpError::InvalidCone("no generators".into()));
        }
        check_vectors(dim, &generators)?;
        let gens: Vec<Vec<f64>> = generators.iter().map(|g| normalized(g)).collect();
        let ineq = dual_generators(dim, &gens)?;
        if matrix_rank(dim, &ineq) < dim {
            return Err(TcpError::NonPointedCone);
        }
        let rays = dual_generators(dim, &ineq)?;
        // keep the caller's vectors for each extreme ray
        let mut kept: Vec<Vec<f64>> = Vec::new();
        for g in &gens {
            let extreme = rays
                .iter()
                .any(|r| r.iter().zip(g).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < 1e-12);
            if extreme && !kept.iter().any(|k| same_direction(k, g)) {
                kept.push(g.clone());
            }
        }
        let is_orthant = kept.len() == dim
            && kept.iter().all(|g| {
                g.iter().filter(|&&a| a == 0.0).count() == dim - 1 && g.iter().all(|&a| a >= 0.0)
            });
        if is_orthant {
            return Ok(Self::orthant(dim));
        }
        Ok(Self {
            dim,
            kind: ConeKind::General,
            generators: kept,
            inequalities: ineq,
        })
    }

    /// Cone `{x : <g, x> >= 0}`. May contain lines (tangent cones, duals of
    /// lower-dimensional cones); lineality directions appear as `±` generator pairs.
    pub fn from_inequalities(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(TcpError::InvalidCone("dimension 0".into()));
        }
        check_vectors(dim, &rows)?;
        let mut rows: Vec<Vec<f64>> = rows.iter().map(|r| normalized(r)).collect();
        dedup_directions(&mut rows);
        let generators = dual_generators(dim, &rows)?;
        Ok(Self {
            dim,
            kind: ConeKind::General,
            generators,
            inequalities: rows,
        })
    }

    /// The ray spanned by a single nonzero vector.
    pub fn ray(v: Vec<f64>) -> Result<Self> {
        Self::from_generators(v.len(), vec![v])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn inequalities(&self) -> &[Vec<f64>] {
        &self.inequalities
    }

    /// True when the cone contains no line.
    pub fn is_pointed(&self) -> bool {
        matrix_rank(self.dim, &self.inequalities) == self.dim
    }

    /// `K* = {y : <y, x> >= 0 for all x in K}`: the two representations swap.
    pub fn dual(&self) -> Self {
        Self {
            dim: self.dim,
            kind: self.kind,
            generators: self.inequalities.clone(),
            inequalities: self.generators.clone(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(TcpError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Largest violation `max(0, -<g, x>)` over the inequalities.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self
            .inequalities
            .iter()
            .map(|g| (-dot(g, x)).max(0.0))
            .fold(0.0, f64::max))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.violation(x)? <= tol)
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z)?;
        if self.kind == ConeKind::Orthant {
            return Ok(z.iter().map(|&a| a.max(0.0)).collect());
        }
        if self.contains(z, 0.0)? {
            return Ok(z.to_vec());
        }
        if self.generators.is_empty() {
            return Ok(vec![0.0; self.dim]);
        }
        let e = DMatrix::from_fn(self.dim, self.generators.len(), |i, j| {
            self.generators[j][i]
        });
        let lambda = nnls(&e, &DVector::from_column_slice(z));
        Ok((e * lambda).iter().cloned().collect())
    }

    /// `dist(z, K) = inf_{u in K} |z - u|`.
    pub fn dist(&self, z: &[f64]) -> Result<f64> {
        self.check_point(z)?;
        if self.kind == ConeKind::Orthant {
            return Ok(z.iter().map(|&a| a.min(0.0).powi(2)).sum::<f64>().sqrt());
        }
        if self.contains(z, 1e-12 * norm(z).max(1.0))? {
            return Ok(0.0);
        }
        let p = self.project(z)?;
        Ok(z.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// Tangent cone at `x`: the inequalities active at `x`. Interior points
    /// give all of `R^n`.
    pub fn tangent_cone(&self, x: &[f64], tol: f64) -> Result<Self> {
        let v = self.violation(x)?;
        if v > tol {
            return Err(TcpError::NotInCone(v));
        }
        let active: Vec<Vec<f64>> = self
            .inequalities
            .iter()
            .filter(|g| dot(g, x).abs() <= tol)
            .cloned()
            .collect();
        if self.kind == ConeKind::Orthant && active.len() == self.dim {
            return Ok(Self::orthant(self.dim));
        }
        Self::from_inequalities(self.dim, active)
    }

    /// Unit vectors in the cone: every normalized generator, then normalized
    /// random nonnegative combinations of generators until `count` points.
    pub fn basis_samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.generators.iter().map(|g| normalized(g)).collect();
        if self.generators.is_empty() {
            return out;
        }
        let mut rng = SplitMix64::new(seed);
        let p = self.generators.len();
        let mut attempts = 0;
        while out.len() < count && attempts < 100 * count {
            attempts += 1;
            let w = rng.simplex_point(p);
            if let Some(x) = self.combine_normalized(&w) {
                out.push(x);
            }
        }
        out
    }

    /// `G w / |G w|`, or `None` when the combination vanishes.
    pub fn combine_normalized(&self, w: &[f64]) -> Option<Vec<f64>> {
        let mut y = vec![0.0; self.dim];
        for (g, &wk) in self.generators.iter().zip(w) {
            if wk != 0.0 {
                y.iter_mut().zip(g).for_each(|(a, b)| *a += wk * b);
            }
        }
        let s = norm(&y);
        (s > 1e-12).then(|| y.iter().map(|a| a / s).collect())
    }

    /// Deterministic quasi-uniform sample of `K ∩ B`: the origin, the unit
    /// generators, and low-discrepancy generator combinations pushed to the sphere.
    fn section_samples(&self, count: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]];
        out.extend(self.generators.iter().map(|g| normalized(g)));
        let p = self.generators.len();
        if p < 2 {
            return out;
        }
        // additive recurrence with the generalized golden ratio of dimension p
        let mut phi = 2.0_f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (p as f64 + 1.0));
        }
        let alpha: Vec<f64> = (1..=p).map(|i| phi.powi(-(i as i32))).collect();
        for k in 1..=count {
            let w: Vec<f64> = alpha
                .iter()
                .map(|a| {
                    let u = (0.5 + k as f64 * a).fract().max(1e-12);
                    -u.ln()
                })
                .collect();
            if let Some(x) = self.combine_normalized(&w) {
                out.push(x);
            }
        }
        out
    }
}

/// Sampled estimate of the cone metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub samples: usize,
}

/// Hausdorff distance between `K1 ∩ B` and `K2 ∩ B`, maximized over a
/// deterministic sample of each section. Underestimates by at most the
/// covering radius of the sample.
pub fn delta_metric(
    k1: &PolyhedralCone,
    k2: &PolyhedralCone,
    samples: usize,
) -> Result<MetricEstimate> {
    if k1.dim != k2.dim {
        return Err(TcpError::DimensionMismatch {
            expected: k1.dim,
            found: k2.dim,
        });
    }
    if k1 == k2 {
        return Ok(MetricEstimate {
            value: 0.0,
            samples: 0,
        });
    }
    let s1 = k1.section_samples(samples.max(1));
    let s2 = k2.section_samples(samples.max(1));
    // the projection of a point of B onto K lies in B, so dist(z, K ∩ B) = dist(z, K)
    let one_sided = |pts: &[Vec<f64>], k: &PolyhedralCone| -> Result<f64> {
        pts.iter()
            .try_fold(0.0_f64, |acc, z| Ok(acc.max(k.dist(z)?)))
    };
    let value = one_sided(&s1, k2)?.max(one_sided(&s2, k1)?);
    Ok(MetricEstimate {
        value,
        samples: s1.len() + s2.len(),
    })
}

/// Lawson-Hanson nonnegative least squares: `argmin |E w - z|, w >= 0`.
pub fn nnls(e: &DMatrix<f64>, z: &DVector<f64>) -> DVector<f64> {
    let p = e.ncols();
    let mut w = DVector::zeros(p);
    let mut passive = vec![false; p];
    let scale = z.norm().max(1.0) * e.norm().max(1.0);
    let tol = 1e-13 * scale;
    for _ in 0..(3 * p + 10) {
        let grad = e.transpose() * (z - e * &w);
        let pick = (0..p)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]).then(b.cmp(&a)));
        let Some(j) = pick else { break };
        passive[j] = true;
        for _ in 0..(3 * p + 10) {
            let cols: Vec<usize> = (0..p).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(e.nrows(), cols.len(), |i, k| e[(i, cols[k])]);
            let s_p = sub
                .clone()
                .svd(true, true)
                .solve(z, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(cols.len()));
            if s_p.iter().all(|&v| v > 0.0) {
                for (k, &c) in cols.iter().enumerate() {
                    w[c] = s_p[k];
                }
                break;
            }
            let mut step = 1.0_f64;
            for (k, &c) in cols.iter().enumerate() {
                if s_p[k] <= 0.0 {
                    let denom = w[c] - s_p[k];
                    if denom > 0.0 {
                        step = step.min(w[c] / denom);
                    }
                }
            }
            for (k, &c) in cols.iter().enumerate() {
                w[c] += step * (s_p[k] - w[c]);
                if w[c] <= 1e-15 {
                    w[c] = 0.0;
                    passive[c] = false;
                }
            }
            if !passive.iter().any(|&b| b) {
                break;
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_direction(set: &[Vec<f64>], v: &[f64]) -> bool {
        let v = normalized(v);
        set.iter().any(|w| same_direction(w, &v))
    }

    #[test]
    fn orthant_representations() {
        let k = PolyhedralCone::orthant(2);
        assert_eq!(k.generators(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(k.inequalities(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(k.kind(), ConeKind::Orthant);
        assert_eq!(k.dual(), k);
    }

    #[test]
    fn ray_inequalities() {
        let ray = PolyhedralCone::ray(vec![1.0, 0.0]).unwrap();
        let h = ray.inequalities();
        assert_eq!(h.len(), 3);
        for v in [[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            assert!(has_direction(h, &v), "missing {v:?} in {h:?}");
        }
        assert!(ray.is_pointed());
    }

    #[test]
    fn non_pointed_and_zero_generators_rejected() {
        assert_eq!(
            PolyhedralCone::from_generators(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]),
            Err(TcpError::NonPointedCone)
        );
        assert_eq!(
            PolyhedralCone::from_generators(2, vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(TcpError::ZeroGenerator(1))
        );
    }

    #[test]
    fn redundant_generators_dropped() {
        let k = PolyhedralCone::from_generators(
            2,
            vec![
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 2.0],
                vec![2.0, 0.0],
            ],
        )
        .unwrap();
        assert_eq!(k.kind(), ConeKind::Orthant);
        let k = PolyhedralCone::from_generators(
            3,
            vec![
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 1.0],
                vec![-1.0, 0.0, 1.0],
                vec![0.0, -1.0, 1.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(k.generators().len(), 4);
        assert_eq!(k.inequalities().len(), 4);
    }

    #[test]
    fn dual_of_ray_is_halfplane() {
        let d = PolyhedralCone::ray(vec![1.0, 0.0]).unwrap().dual();
        assert!(d.contains(&[0.0, -5.0], 0.0).unwrap());
        assert!(d.contains(&[2.0, 5.0], 0.0).unwrap());
        assert!(!d.contains(&[-0.1, 0.0], 1e-12).unwrap());
        assert!(!d.is_pointed());
    }

    #[test]
    fn representations_agree() {
        let k = PolyhedralCone::from_generators(
            3,
            vec![
                vec![1.0, 0.2, 0.0],
                vec![0.0, 1.0, 0.3],
                vec![0.4, 0.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
        )
        .unwrap();
        for g in k.generators() {
            assert!(k.contains(g, 1e-12).unwrap());
        }
        for h in k.inequalities() {
            assert!(k.dual().contains(h, 1e-12).unwrap());
            // every facet normal is tight on at least two generators in R^3
            let tight = k
                .generators()
                .iter()
                .filter(|g| dot(g, h).abs() < 1e-9)
                .count();
            assert!(tight >= 2);
        }
    }

    #[test]
    fn distances() {
        let o = PolyhedralCone::orthant(2);
        assert_eq!(o.dist(&[-3.0, 4.0]).unwrap(), 3.0);
        let ray = PolyhedralCone::ray(vec![1.0, 0.0]).unwrap();
        assert!((ray.dist(&[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((ray.dist(&[-1.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(o.contains(&[0.0, 0.0], 0.0).unwrap());
        assert!(o.dist(&[1.0]).is_err());
    }

    #[test]
    fn tangent_cones() {
        let o = PolyhedralCone::orthant(2);
        let t = o.tangent_cone(&[1.0, 0.0], ACTIVE_TOL).unwrap();
        assert_eq!(t.inequalities(), &[vec![0.0, 1.0]]);
        assert!(t.contains(&[-4.0, 0.5], 0.0).unwrap());
        let t = o.tangent_cone(&[1.0, 1.0], ACTIVE_TOL).unwrap();
        assert!(t.inequalities().is_empty());
        assert_eq!(t.generators().len(), 4);
        assert_eq!(o.tangent_cone(&[0.0, 0.0], ACTIVE_TOL).unwrap(), o);
        assert!(matches!(
            o.tangent_cone(&[-1.0, 0.0], ACTIVE_TOL),
            Err(TcpError::NotInCone(_))
        ));
    }

    #[test]
    fn tangent_cone_of_general_cone_at_apex_is_cone() {
        let k = PolyhedralCone::from_generators(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let t = k.tangent_cone(&[0.0, 0.0], ACTIVE_TOL).unwrap();
        for g in k.generators() {
            assert!(has_direction(t.generators(), g));
        }
        assert_eq!(t.generators().len(), 2);
    }

    #[test]
    fn basis_samples_contain_generators() {
        let o = PolyhedralCone::orthant(2);
        let s = o.basis_samples(10, 1);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0], vec![1.0, 0.0]);
        assert_eq!(s[1], vec![0.0, 1.0]);
        for x in &s {
            assert!(o.contains(x, 1e-12).unwrap());
            assert!((norm(x) - 1.0).abs() <= 1e-12);
        }
        let ray = PolyhedralCone::ray(vec![3.0, 4.0]).unwrap();
        let s = ray.basis_samples(5, 9);
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| same_direction(x, &[0.6, 0.8])));
    }

    #[test]
    fn delta_examples() {
        let o = PolyhedralCone::orthant(2);
        assert_eq!(delta_metric(&o, &o, 100).unwrap().value, 0.0);
        let ray = PolyhedralCone::ray(vec![1.0, 0.0]).unwrap();
        let d = delta_metric(&ray, &o, 10_000).unwrap();
        assert!((d.value - 1.0).abs() <= 0.02);
    }

    #[test]
    fn nnls_matches_known_projection() {
        let e = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let w = nnls(&e, &DVector::from_column_slice(&[2.0, -1.0]));
        // projection of (2,-1) onto cone{(1,0),(1,1)} is (2,0)
        assert!((w[0] - 2.0).abs() < 1e-12 && w[1].abs() < 1e-12);
    }

    #[test]
    fn high_dimensional_orthant_tangent() {
        let o = PolyhedralCone::orthant(9);
        let mut x = vec![0.0; 9];
        x[3] = 1.0;
        let t = o.tangent_cone(&x, ACTIVE_TOL).unwrap();
        assert_eq!(t.inequalities().len(), 8);
        assert_eq!(t.generators().len(), 8 + 2);
        assert!(PolyhedralCone::from_generators(7, vec![vec![1.0; 7]]).is_err());
    }
}
