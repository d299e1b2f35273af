//! Complementary tensors and the decomposition of the solvable set over
//! the orthant into complementary cones.
//!
//! For a subset `alpha`, the right-hand side `q` lies in `Tpos(C_A(alpha))`
//! exactly when the system `A_alpha u^{m-1} = -q_alpha` has a solution
//! `u >= 0` whose slack `A_{alpha-bar, alpha} u^{m-1} + q_alpha-bar` is
//! nonnegative. Each system is attacked with multistart projected
//! Levenberg-Marquardt; when local search finds nothing, the rows are first
//! checked for an exact linear dependence contradicting `q`, then a branch-and-bound
//! over directions on the unit max-norm sphere either excludes every
//! direction by interval arithmetic (a certificate of infeasibility) or
//! hands its surviving leaves back to Newton as starting points.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{SearchBudget, Status, Verdict};
use crate::cone::PolyhedralCone;
use crate::error::{Result, TcpError};
use crate::poly::{Interval, Poly};
use crate::search::{self, polish, ImageNormSq, Section};
use crate::tensor::{dot, norm, power_vec, IndexSet, Tensor};

/// Largest dimension accepted by the subset enumeration.
pub const MAX_ENUM_DIM: usize = 12;

/// Relative residual accepted for `A_alpha u^{m-1} + q_alpha = 0`.
pub const SYSTEM_TOL: f64 = 1e-9;

/// Most negative slack accepted off the support.
pub const SLACK_TOL: f64 = 1e-8;

/// Relative size below which a combination of subsystem rows counts as
/// identically zero.
const DEPENDENCE_TOL: f64 = 1e-12;

const MAX_BOXES: usize = 50_000;
const MIN_BOX_WIDTH: f64 = 1e-9;
const MAX_LEAF_STARTS: usize = 64;
const LM_ITERS: usize = 100;

/// `C_A(alpha)`: `-a_{i1..im}` where `i2..im` all lie in `alpha`, the unit
/// tensor on diagonal positions outside `alpha`, zero elsewhere.
pub fn complementary_tensor(a: &Tensor, alpha: &IndexSet) -> Result<Tensor> {
    if alpha.ambient() != a.dim() {
        return Err(TcpError::DimensionMismatch {
            expected: a.dim(),
            found: alpha.ambient(),
        });
    }
    let mut entries: Vec<(Vec<usize>, f64)> = a
        .entries()
        .filter(|(idx, _)| idx[1..].iter().all(|&j| alpha.contains(j)))
        .map(|(idx, v)| (idx.to_vec(), -v))
        .collect();
    for i in alpha.complement().members() {
        entries.push((vec![*i; a.order()], 1.0));
    }
    Tensor::new(a.order(), a.dim(), entries)
}

fn quantized(d: f64) -> f64 {
    if d < 1e-12 {
        0.0
    } else {
        d
    }
}

/// Whether `y = A x^{m-1}` for some `x` in `K`.
///
/// Holds with a witness `x` once projected Levenberg-Marquardt reaches
/// `|A x^{m-1} - y| <= margin * max(1, |y|)`. Fails when the smallest
/// distance from `y/|y|` to a ray spanned by an image direction, over the
/// lattice and all local searches, exceeds `margin`; the witness is then the
/// unit point whose image ray came closest.
pub fn tpos_contains(
    k: &PolyhedralCone,
    a: &Tensor,
    y: &[f64],
    budget: &SearchBudget,
) -> Result<Verdict> {
    let n = k.dim();
    if a.dim() != n || y.len() != n {
        return Err(TcpError::DimensionMismatch {
            expected: n,
            found: if a.dim() != n { a.dim() } else { y.len() },
        });
    }
    budget.validate()?;
    let verdict = |status, certificate, witness, used, note: Option<String>| Verdict {
        property: "in-Tpos".into(),
        status,
        certificate,
        witness,
        budget_used: used,
        budget: *budget,
        note,
    };
    let ny = norm(y);
    if ny == 0.0 {
        return Ok(verdict(Status::Holds, 0.0, Some(vec![0.0; n]), 0, None));
    }
    let yhat: Vec<f64> = y.iter().map(|v| v / ny).collect();
    let gens = k.generators();
    let sec = Section {
        dim: n,
        generators: gens,
    };
    let cands = search::candidates(
        gens.len(),
        budget.grid_resolution,
        budget.multistarts,
        budget.seed,
    );
    let ray_gap = |f: &[f64]| -> f64 {
        let nf = norm(f);
        if nf <= 1e-300 {
            return 1.0;
        }
        let c = dot(f, &yhat) / nf;
        if c <= 0.0 {
            return 1.0;
        }
        norm(
            &yhat
                .iter()
                .zip(f)
                .map(|(a, b)| a - c * b / nf)
                .collect::<Vec<_>>(),
        )
    };
    type Scored = Option<(f64, Vec<f64>, Vec<f64>)>;
    let scored: Vec<Scored> = cands
        .par_iter()
        .map(|w| {
            let (_, x) = sec.eval(&ImageNormSq(a), w)?;
            let f = a.apply_m1(&x).ok()?;
            Some((quantized(ray_gap(&f)), x, f))
        })
        .collect();
    let mut order: Vec<usize> = (0..cands.len()).filter(|&i| scored[i].is_some()).collect();
    let key = |i: usize| scored[i].as_ref().map(|s| s.0).unwrap_or(f64::INFINITY);
    order.sort_by(|&i, &j| key(i).total_cmp(&key(j)).then(i.cmp(&j)));
    let Some(&best) = order.first() else {
        return Err(TcpError::InvalidCone("cone has no nonzero points".into()));
    };
    let mut gap = key(best);
    let mut gap_point = scored[best].as_ref().map(|s| s.1.clone());
    let mut used = cands.len();
    let tol = budget.margin * ny.max(1.0);
    for &i in order.iter().take(budget.multistarts) {
        let (_, _, f) = scored[i].as_ref().expect("filtered");
        let nf2 = dot(f, f);
        let tau = if nf2 > 0.0 {
            (dot(f, y) / nf2).max(0.0)
        } else {
            0.0
        };
        let c = tau.powf(1.0 / (a.order() as f64 - 1.0));
        let s = norm(&sec.combine(&cands[i]));
        let lambda0: Vec<f64> = cands[i].iter().map(|w| w * c / s).collect();
        let (x, r, evals) = lm_in_cone(a, gens, y, lambda0, budget.polish_iters);
        used += evals;
        if r <= tol {
            return Ok(verdict(Status::Holds, r, Some(x), used, None));
        }
        if let Ok(fx) = a.apply_m1(&x) {
            let d = ray_gap(&fx);
            if d < gap && norm(&x) > 0.0 {
                gap = d;
                let nx = norm(&x);
                gap_point = Some(x.iter().map(|v| v / nx).collect());
            }
        }
    }
    if gap > budget.margin {
        Ok(verdict(
            Status::Fails,
            gap,
            gap_point,
            used,
            Some("separation of y/|y| from every image ray".into()),
        ))
    } else {
        Ok(verdict(Status::Unknown, gap, None, used, None))
    }
}

/// Projected Levenberg-Marquardt for `min |A (G l)^{m-1} - y|` over `l >= 0`.
/// Returns the point `G l`, its residual and the evaluation count.
fn lm_in_cone(
    a: &Tensor,
    gens: &[Vec<f64>],
    y: &[f64],
    mut lam: Vec<f64>,
    iters: usize,
) -> (Vec<f64>, f64, usize) {
    let n = y.len();
    let p = gens.len();
    let point = |lam: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (g, &l) in gens.iter().zip(lam) {
            x.iter_mut().zip(g).for_each(|(a, b)| *a += l * b);
        }
        x
    };
    let resid = |x: &[f64]| -> Vec<f64> {
        let f = a.apply_m1(x).expect("dimension checked");
        f.iter().zip(y).map(|(a, b)| a - b).collect()
    };
    let mut x = point(&lam);
    let mut r = resid(&x);
    let mut rn = norm(&r);
    let mut evals = 1;
    let mut mu = 1e-3;
    let gmat = nalgebra::DMatrix::from_fn(n, p, |i, k| gens[k][i]);
    for _ in 0..iters {
        if rn <= 1e-15 * norm(y).max(1.0) {
            break;
        }
        let j = a.jacobian_m1(&x).expect("dimension checked") * &gmat;
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let dscale = (0..p).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-12);
        let mut improved = false;
        while mu < 1e12 {
            let mut m = jtj.clone();
            for i in 0..p {
                m[(i, i)] += mu * dscale;
            }
            if let Some(d) = m.lu().solve(&g) {
                let cand: Vec<f64> = lam
                    .iter()
                    .zip(d.iter())
                    .map(|(l, s)| (l - s).max(0.0))
                    .collect();
                let xc = point(&cand);
                let rc = resid(&xc);
                evals += 1;
                let rcn = norm(&rc);
                if rcn < rn {
                    lam = cand;
                    x = xc;
                    r = rc;
                    rn = rcn;
                    mu = (mu * 0.3).max(1e-15);
                    improved = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, rn, evals)
}

/// Projected Levenberg-Marquardt for `A_alpha u^{m-1} = target`, `u >= 0`.
fn lm_solve(sub: &Tensor, target: &[f64], mut u: Vec<f64>) -> Option<Vec<f64>> {
    let k = target.len();
    let scale = norm(target).max(1.0);
    let resid = |u: &[f64]| -> Vec<f64> {
        let f = sub.apply_m1(u).expect("dimension checked");
        f.iter().zip(target).map(|(a, b)| a - b).collect()
    };
    let mut r = resid(&u);
    let mut rn = norm(&r);
    let mut mu = 1e-3;
    for _ in 0..LM_ITERS {
        if rn <= 1e-14 * scale {
            break;
        }
        let j = sub.jacobian_m1(&u).ok()?;
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let dscale = (0..k).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-12);
        let mut improved = false;
        while mu < 1e12 {
            let mut m = jtj.clone();
            for i in 0..k {
                m[(i, i)] += mu * dscale;
            }
            if let Some(d) = m.lu().solve(&g) {
                let cand: Vec<f64> = u
                    .iter()
                    .zip(d.iter())
                    .map(|(a, s)| (a - s).max(0.0))
                    .collect();
                let rc = resid(&cand);
                let rcn = norm(&rc);
                if rcn < rn {
                    u = cand;
                    r = rc;
                    rn = rcn;
                    mu = (mu * 0.3).max(1e-15);
                    improved = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (rn <= SYSTEM_TOL * scale).then_some(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetStatus {
    Feasible,
    Infeasible,
    Inconclusive,
}

/// Outcome for one subset. Solutions are full-length points supported on
/// `alpha`, in the order they were found.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetAnalysis {
    pub alpha: IndexSet,
    pub status: SubsetStatus,
    pub solutions: Vec<Vec<f64>>,
    pub boxes: usize,
}

struct Tests {
    /// Must be positive somewhere on the box.
    positive: Vec<Poly>,
    /// Must be nonnegative somewhere on the box.
    nonnegative: Vec<Poly>,
    /// Must vanish somewhere on the box.
    zero: Vec<Poly>,
}

impl Tests {
    fn excludes(&self, b: &[Interval]) -> bool {
        self.positive.iter().any(|p| p.range(b).hi <= 0.0)
            || self.nonnegative.iter().any(|p| p.range(b).hi < 0.0)
            || self.zero.iter().any(|p| !p.range(b).contains_zero())
    }
}

struct BoxSearch {
    leaves: Vec<Vec<f64>>,
    complete: bool,
    boxes: usize,
}

/// Subdivides each face `s_j = 1` of the max-norm sphere in the orthant.
fn branch_and_bound(k: usize, tests: &Tests) -> BoxSearch {
    let mut out = BoxSearch {
        leaves: Vec::new(),
        complete: true,
        boxes: 0,
    };
    for face in 0..k {
        let root: Vec<Interval> = (0..k)
            .map(|i| {
                if i == face {
                    Interval::point(1.0)
                } else {
                    Interval::new(0.0, 1.0)
                }
            })
            .collect();
        let mut stack = vec![root];
        while let Some(b) = stack.pop() {
            out.boxes += 1;
            if out.boxes > MAX_BOXES {
                out.complete = false;
                return out;
            }
            if tests.excludes(&b) {
                continue;
            }
            let (widest, w) = b
                .iter()
                .enumerate()
                .map(|(i, iv)| (i, iv.width()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if w < MIN_BOX_WIDTH {
                let c: Vec<f64> = b.iter().map(Interval::mid).collect();
                let far = out.leaves.iter().all(|l| {
                    l.iter()
                        .zip(&c)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                        > 1e-6
                });
                if far && out.leaves.len() < MAX_LEAF_STARTS {
                    out.leaves.push(c);
                }
                continue;
            }
            let mid = b[widest].mid();
            let mut hi = b.clone();
            hi[widest].lo = mid;
            let mut lo = b;
            lo[widest].hi = mid;
            stack.push(hi);
            stack.push(lo);
        }
    }
    out
}

struct Subsystem<'a> {
    a: &'a Tensor,
    q: &'a [f64],
    alpha: IndexSet,
    beta: IndexSet,
    sub: Tensor,
    q_a: Vec<f64>,
    q_b: Vec<f64>,
    f: Vec<Poly>,
    g: Vec<Poly>,
}

impl Subsystem<'_> {
    fn pow(&self) -> f64 {
        1.0 / (self.a.order() as f64 - 1.0)
    }

    /// The full point if `u` solves the subsystem within tolerance.
    fn accept(&self, u: &[f64]) -> Option<Vec<f64>> {
        let x = self.alpha.lift(u);
        let f = self.a.apply_m1(&x).ok()?;
        let w: Vec<f64> = f.iter().zip(self.q).map(|(a, b)| a + b).collect();
        let scale = norm(self.q).max(1.0);
        let on = self
            .alpha
            .members()
            .iter()
            .all(|&i| w[i].abs() <= SYSTEM_TOL * scale);
        let off = self.beta.members().iter().all(|&i| w[i] >= -SLACK_TOL);
        (on && off && x.iter().all(|&v| v >= 0.0)).then_some(x)
    }

    fn push(&self, found: &mut Vec<Vec<f64>>, x: Vec<f64>) {
        let dup = found
            .iter()
            .any(|y| norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()) <= 1e-6);
        if !dup {
            found.push(x);
        }
    }

    /// Scales direction `s` onto the least squares fit of `-q_alpha`.
    fn start_from(&self, s: &[f64]) -> Option<(f64, Vec<f64>)> {
        let f = self.sub.apply_m1(s).ok()?;
        let nf2 = dot(&f, &f);
        if nf2 <= 1e-300 {
            return None;
        }
        let t = -dot(&f, &self.q_a) / nf2;
        if t <= 0.0 {
            return None;
        }
        let fit = norm(
            &f.iter()
                .zip(&self.q_a)
                .map(|(a, b)| t * a + b)
                .collect::<Vec<_>>(),
        );
        let c = t.powf(self.pow());
        Some((fit / norm(&self.q_a), s.iter().map(|v| c * v).collect()))
    }

    /// A combination `sum c_j F_j` that vanishes identically while
    /// `sum c_j q_j` does not rules out every `u`, including directions
    /// where all `F_j` vanish together and the box tests cannot decide.
    fn linearly_inconsistent(&self) -> bool {
        let mut monomials: Vec<&[u32]> = self
            .f
            .iter()
            .flat_map(|p| p.terms().map(|(e, _)| e))
            .collect();
        monomials.sort();
        monomials.dedup();
        let k = self.f.len();
        let mut c = DMatrix::zeros(k, monomials.len());
        for (r, p) in self.f.iter().enumerate() {
            for (e, v) in p.terms() {
                let col = monomials.binary_search(&e).expect("collected above");
                c[(r, col)] = v;
            }
        }
        let scale = c.norm();
        if scale == 0.0 {
            return self.q_a.iter().any(|&v| v != 0.0);
        }
        let gram = &c * c.transpose() / (scale * scale);
        let eig = gram.symmetric_eigen();
        let qa = DVector::from_column_slice(&self.q_a);
        (0..k).any(|i| {
            eig.eigenvalues[i].abs() <= DEPENDENCE_TOL * DEPENDENCE_TOL
                && eig.eigenvectors.column(i).dot(&qa).abs() > 1e-8 * qa.norm()
        })
    }

    fn analyze(&self, budget: &SearchBudget, exhaustive: bool) -> SubsetAnalysis {
        let k = self.alpha.len();
        let mut found = Vec::new();
        let done = |status, solutions, boxes| SubsetAnalysis {
            alpha: self.alpha.clone(),
            status,
            solutions,
            boxes,
        };
        if k == 0 {
            if self.q.iter().all(|&v| v >= -SLACK_TOL) {
                return done(SubsetStatus::Feasible, vec![vec![0.0; self.q.len()]], 0);
            }
            return done(SubsetStatus::Infeasible, vec![], 0);
        }
        if self.q_a.iter().all(|&v| v == 0.0) {
            return self.analyze_homogeneous(budget, exhaustive);
        }
        let res = search::effective_resolution(k, budget.grid_resolution);
        let mut starts: Vec<(f64, usize, Vec<f64>)> = search::simplex_grid(k, res)
            .into_iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let s: Vec<f64> = c.iter().map(|&v| v as f64 / res as f64).collect();
                self.start_from(&s).map(|(fit, u)| (fit, i, u))
            })
            .collect();
        starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, _, u0) in starts.into_iter().take(budget.multistarts) {
            if let Some(x) = lm_solve(&self.sub, &neg(&self.q_a), u0).and_then(|u| self.accept(&u))
            {
                self.push(&mut found, x);
                if !exhaustive {
                    return done(SubsetStatus::Feasible, found, 0);
                }
            }
        }
        if found.is_empty() && self.linearly_inconsistent() {
            return done(SubsetStatus::Infeasible, found, 0);
        }
        let bb = branch_and_bound(k, &self.tests());
        for s in &bb.leaves {
            if let Some((_, u0)) = self.start_from(s) {
                if let Some(x) =
                    lm_solve(&self.sub, &neg(&self.q_a), u0).and_then(|u| self.accept(&u))
                {
                    self.push(&mut found, x);
                    if !exhaustive {
                        break;
                    }
                }
            }
        }
        let status = if !found.is_empty() {
            SubsetStatus::Feasible
        } else if bb.complete && bb.leaves.is_empty() {
            SubsetStatus::Infeasible
        } else {
            SubsetStatus::Inconclusive
        };
        done(status, found, bb.boxes)
    }

    fn tests(&self) -> Tests {
        let i = (0..self.q_a.len()).fold(0, |best, j| {
            if self.q_a[j].abs() > self.q_a[best].abs() {
                j
            } else {
                best
            }
        });
        let qi = self.q_a[i];
        let sg = qi.signum();
        let fi = &self.f[i];
        let positive = vec![Poly::combine(&[(-sg, fi)])];
        let zero = (0..self.f.len())
            .filter(|&j| j != i)
            .map(|j| Poly::combine(&[(self.q_a[j], fi), (-qi, &self.f[j])]))
            .collect();
        let nonnegative = self
            .g
            .iter()
            .zip(&self.q_b)
            .map(|(g, &qk)| Poly::combine(&[(qi.abs(), g), (-sg * qk, fi)]))
            .collect();
        Tests {
            positive,
            nonnegative,
            zero,
        }
    }

    /// `q_alpha = 0`: either `u = 0` with `q >= 0` off the support, or a
    /// direction `s` with `A_alpha s^{m-1} = 0` scaled until the slack clears.
    fn analyze_homogeneous(&self, budget: &SearchBudget, exhaustive: bool) -> SubsetAnalysis {
        let k = self.alpha.len();
        let mut found = Vec::new();
        let zero_ok = self.q_b.iter().all(|&v| v >= -SLACK_TOL);
        if zero_ok {
            found.push(vec![0.0; self.q.len()]);
            if !exhaustive {
                return SubsetAnalysis {
                    alpha: self.alpha.clone(),
                    status: SubsetStatus::Feasible,
                    solutions: found,
                    boxes: 0,
                };
            }
        }
        let tests = Tests {
            positive: self
                .g
                .iter()
                .zip(&self.q_b)
                .filter(|(_, &qk)| qk < 0.0)
                .map(|(g, _)| g.clone())
                .collect(),
            nonnegative: vec![],
            zero: self.f.clone(),
        };
        let bb = branch_and_bound(k, &tests);
        let gens: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let sec = Section {
            dim: k,
            generators: &gens,
        };
        let obj = ImageNormSq(&self.sub);
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for s in &bb.leaves {
            let total: f64 = s.iter().sum();
            let w: Vec<f64> = s.iter().map(|v| v / total).collect();
            match polish(&obj, &sec, &w, budget.polish_iters) {
                Some(p) if p.value.sqrt() <= SYSTEM_TOL => dirs.push(p.point),
                _ => {}
            }
        }
        for s in dirs {
            let x = self.alpha.lift(&s);
            let Ok(f) = self.a.apply_m1(&x) else { continue };
            let mut lo: f64 = 0.0;
            let mut hi = f64::INFINITY;
            for &kk in self.beta.members() {
                let (g, qk) = (f[kk], self.q[kk]);
                if g > 0.0 {
                    lo = lo.max(-qk / g);
                } else if g < 0.0 {
                    hi = hi.min(qk / -g);
                } else if qk < 0.0 {
                    hi = -1.0;
                }
            }
            if lo > 0.0 && lo <= hi {
                let c = lo.powf(self.pow());
                let u: Vec<f64> = s.iter().map(|v| c * v).collect();
                if let Some(x) = self.accept(&u) {
                    self.push(&mut found, x);
                    if !exhaustive {
                        break;
                    }
                }
            }
        }
        let status = if !found.is_empty() {
            SubsetStatus::Feasible
        } else if bb.complete && bb.leaves.is_empty() {
            SubsetStatus::Infeasible
        } else {
            SubsetStatus::Inconclusive
        };
        SubsetAnalysis {
            alpha: self.alpha.clone(),
            status,
            solutions: found,
            boxes: bb.boxes,
        }
    }
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

/// Solves the subsystem for `alpha`. With `exhaustive`, every solution the
/// search reaches is collected; otherwise the first one ends the search.
pub fn analyze_subset(
    a: &Tensor,
    q: &[f64],
    alpha: &IndexSet,
    budget: &SearchBudget,
    exhaustive: bool,
) -> Result<SubsetAnalysis> {
    if q.len() != a.dim() || alpha.ambient() != a.dim() {
        return Err(TcpError::DimensionMismatch {
            expected: a.dim(),
            found: if q.len() != a.dim() {
                q.len()
            } else {
                alpha.ambient()
            },
        });
    }
    budget.validate()?;
    let beta = alpha.complement();
    let sys = Subsystem {
        a,
        q,
        sub: if alpha.is_empty() {
            Tensor::zeros(a.order(), 1)?
        } else {
            a.principal_subtensor(alpha)?
        },
        q_a: alpha.restrict(q),
        q_b: beta.restrict(q),
        f: Poly::rows_on_support(a, alpha.members(), alpha),
        g: Poly::rows_on_support(a, beta.members(), alpha),
        alpha: alpha.clone(),
        beta,
    };
    Ok(sys.analyze(budget, exhaustive))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Member,
    NonMember,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipResult {
    #[serde(serialize_with = "crate::io::membership")]
    pub member: Membership,
    #[serde(serialize_with = "crate::io::index_set_opt")]
    pub alpha: Option<IndexSet>,
    pub u: Option<Vec<f64>>,
    pub residual: f64,
    pub subsets_examined: usize,
    #[serde(serialize_with = "crate::io::index_sets")]
    pub inconclusive: Vec<IndexSet>,
}

impl MembershipResult {
    pub fn is_member(&self) -> bool {
        self.member == Membership::Member
    }
}

pub(crate) fn check_enum_dim(a: &Tensor, q: &[f64]) -> Result<()> {
    if q.len() != a.dim() {
        return Err(TcpError::DimensionMismatch {
            expected: a.dim(),
            found: q.len(),
        });
    }
    if a.dim() > MAX_ENUM_DIM {
        return Err(TcpError::TooLarge {
            what: "subset enumeration dimension",
            dim: a.dim(),
            limit: MAX_ENUM_DIM,
        });
    }
    Ok(())
}

/// `|min(x, A x^{m-1} + q)|`.
pub fn min_map_residual(a: &Tensor, q: &[f64], x: &[f64]) -> Result<f64> {
    let f = a.apply_m1(x)?;
    Ok(norm(
        &x.iter()
            .zip(f.iter().zip(q))
            .map(|(xi, (fi, qi))| xi.min(fi + qi))
            .collect::<Vec<_>>(),
    ))
}

/// Decides `q` in `Q(R^n_+, A)` by walking the subsets in order of
/// increasing cardinality; the first feasible subset wins.
pub fn q_membership(a: &Tensor, q: &[f64], budget: &SearchBudget) -> Result<MembershipResult> {
    check_enum_dim(a, q)?;
    budget.validate()?;
    let mut inconclusive = Vec::new();
    let mut examined = 0;
    for alpha in IndexSet::all_by_cardinality(a.dim()) {
        let r = analyze_subset(a, q, &alpha, budget, false)?;
        examined += 1;
        match r.status {
            SubsetStatus::Feasible => {
                let x = r.solutions[0].clone();
                let f = a.apply_m1(&x)?;
                let slack: Vec<f64> = f.iter().zip(q).map(|(a, b)| (a + b).max(0.0)).collect();
                let rest = power_vec(&slack, 1.0 / (a.order() as f64 - 1.0))?;
                let u: Vec<f64> = (0..a.dim())
                    .map(|i| if alpha.contains(i) { x[i] } else { rest[i] })
                    .collect();
                return Ok(MembershipResult {
                    member: Membership::Member,
                    residual: min_map_residual(a, q, &x)?,
                    alpha: Some(alpha),
                    u: Some(u),
                    subsets_examined: examined,
                    inconclusive,
                });
            }
            SubsetStatus::Inconclusive => inconclusive.push(alpha),
            SubsetStatus::Infeasible => {}
        }
    }
    Ok(MembershipResult {
        member: if inconclusive.is_empty() {
            Membership::NonMember
        } else {
            Membership::Unknown
        },
        alpha: None,
        u: None,
        residual: 0.0,
        subsets_examined: examined,
        inconclusive,
    })
}

/// The point `x = (u_alpha, 0)` of a member result.
pub fn solution_from_membership(
    result: &MembershipResult,
    a: &Tensor,
    q: &[f64],
) -> Result<Vec<f64>> {
    let (Some(alpha), Some(u)) = (&result.alpha, &result.u) else {
        return Err(TcpError::Precondition(
            "membership result is not a member".into(),
        ));
    };
    check_enum_dim(a, q)?;
    let x = alpha.lift(&alpha.restrict(u));
    let r = min_map_residual(a, q, &x)?;
    if r > 1e-7 {
        return Err(TcpError::NotASolution(r));
    }
    Ok(x)
}
