//! Minimization of homogeneous functions over the unit section of a
//! finitely generated cone.
//!
//! Points are parametrized by simplex weights `w` over the generators,
//! `x = G w / |G w|`. A barycentric lattice gives the coarse search; the best
//! lattice points are then polished by projected gradient with
//! Barzilai-Borwein steps and Armijo backtracking.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::rng::SplitMix64;
use crate::tensor::{dot, norm, Tensor};

/// Lattice size cap; larger requests fall back to a coarser resolution.
pub const MAX_GRID_POINTS: usize = 200_000;

/// A function with `f(t y) = t^d f(y)` for `t > 0`.
pub trait Homogeneous: Sync {
    fn degree(&self) -> f64;
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64]) -> Vec<f64>;
}

/// `A y^m`.
pub struct Form<'a>(pub &'a Tensor);

/// `|A y^{m-1}|^2`.
pub struct ImageNormSq<'a>(pub &'a Tensor);

/// `(A y^m)^2`.
pub struct FormSq<'a>(pub &'a Tensor);

/// `y^T M y`.
pub struct Quadratic(pub DMatrix<f64>);

impl Homogeneous for Form<'_> {
    fn degree(&self) -> f64 {
        self.0.order() as f64
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.0.apply_m(y).expect("dimension checked by caller")
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        self.0.gradient_m(y).expect("dimension checked by caller")
    }
}

impl Homogeneous for ImageNormSq<'_> {
    fn degree(&self) -> f64 {
        2.0 * (self.0.order() as f64 - 1.0)
    }
    fn value(&self, y: &[f64]) -> f64 {
        let f = self.0.apply_m1(y).expect("dimension checked by caller");
        dot(&f, &f)
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let f = self.0.apply_m1(y).expect("dimension checked by caller");
        let j = self.0.jacobian_m1(y).expect("dimension checked by caller");
        let n = f.len();
        (0..n)
            .map(|c| 2.0 * (0..n).map(|r| j[(r, c)] * f[r]).sum::<f64>())
            .collect()
    }
}

impl Homogeneous for FormSq<'_> {
    fn degree(&self) -> f64 {
        2.0 * self.0.order() as f64
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.0
            .apply_m(y)
            .expect("dimension checked by caller")
            .powi(2)
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let v = self.0.apply_m(y).expect("dimension checked by caller");
        self.0
            .gradient_m(y)
            .expect("dimension checked by caller")
            .into_iter()
            .map(|g| 2.0 * v * g)
            .collect()
    }
}

impl Homogeneous for Quadratic {
    fn degree(&self) -> f64 {
        2.0
    }
    fn value(&self, y: &[f64]) -> f64 {
        let n = y.len();
        (0..n)
            .map(|i| y[i] * (0..n).map(|j| self.0[(i, j)] * y[j]).sum::<f64>())
            .sum()
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (self.0[(i, j)] + self.0[(j, i)]) * y[j])
                    .sum()
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Number of lattice points with resolution `res` on a simplex with `p` vertices.
pub fn grid_size(p: usize, res: usize) -> usize {
    binomial(res + p - 1, p - 1)
}

/// Largest resolution `<= requested` whose lattice fits in [`MAX_GRID_POINTS`].
pub fn effective_resolution(p: usize, requested: usize) -> usize {
    let mut r = requested.max(1);
    while r > 1 && grid_size(p, r) > MAX_GRID_POINTS {
        r -= 1;
    }
    r
}

/// Barycentric lattice points `k / res` with `sum k = res`. The first weight
/// runs from `res` down to 0, so the first vertex comes first.
pub fn simplex_grid(p: usize, res: usize) -> Vec<Vec<u32>> {
    fn rec(p: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if p == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(p - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(grid_size(p, res));
    rec(p, res as u32, &mut Vec::with_capacity(p), &mut out);
    out
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&a| (a - theta).max(0.0)).collect()
}

/// The generator set a search runs over.
pub struct Section<'a> {
    pub dim: usize,
    pub generators: &'a [Vec<f64>],
}

impl Section<'_> {
    pub fn combine(&self, w: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (g, &wk) in self.generators.iter().zip(w) {
            if wk != 0.0 {
                y.iter_mut().zip(g).for_each(|(a, b)| *a += wk * b);
            }
        }
        y
    }

    /// `f(G w) / |G w|^d` and the unit point, or `None` if `G w` vanishes.
    pub fn eval<F: Homogeneous + ?Sized>(&self, f: &F, w: &[f64]) -> Option<(f64, Vec<f64>)> {
        let y = self.combine(w);
        let s = norm(&y);
        if s <= 1e-12 {
            return None;
        }
        let x: Vec<f64> = y.iter().map(|a| a / s).collect();
        Some((f.value(&x), x))
    }

    fn grad<F: Homogeneous + ?Sized>(&self, f: &F, w: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let y = self.combine(w);
        let s = norm(&y);
        if s <= 1e-12 {
            return None;
        }
        let x: Vec<f64> = y.iter().map(|a| a / s).collect();
        let d = f.degree();
        let fx = f.value(&x);
        let gx = f.gradient(&x);
        // derivative of f(y)/|y|^d at y = s x, expressed through x
        let gy: Vec<f64> = gx
            .iter()
            .zip(&x)
            .map(|(g, xi)| (g - d * fx * xi) / s)
            .collect();
        let gw = self.generators.iter().map(|g| dot(g, &gy)).collect();
        Some((fx, x, gw))
    }
}

/// Outcome of a polish run.
#[derive(Debug, Clone)]
pub struct Polished {
    pub value: f64,
    pub weights: Vec<f64>,
    pub point: Vec<f64>,
    pub evaluations: usize,
}

/// Projected gradient on the weight simplex from `start`.
pub fn polish<F: Homogeneous + ?Sized>(
    f: &F,
    sec: &Section,
    start: &[f64],
    iters: usize,
) -> Option<Polished> {
    let mut w = start.to_vec();
    let (mut h, mut x, mut g) = sec.grad(f, &w)?;
    let mut evals = 1;
    let mut step = 1.0 / norm(&g).max(1.0);
    for _ in 0..iters {
        let mut accepted = None;
        for _ in 0..50 {
            let cand: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let cand = project_simplex(&cand);
            let decrease: f64 = g
                .iter()
                .zip(w.iter().zip(&cand))
                .map(|(gi, (a, b))| gi * (a - b))
                .sum();
            evals += 1;
            if let Some((hn, _)) = sec.eval(f, &cand) {
                if hn <= h - 1e-4 * decrease && hn <= h {
                    accepted = Some(cand);
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-300 {
                break;
            }
        }
        let Some(wn) = accepted else { break };
        let Some((hn, xn, gn)) = sec.grad(f, &wn) else {
            break;
        };
        evals += 1;
        let dw: Vec<f64> = wn.iter().zip(&w).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let moved = norm(&dw);
        let improved = hn < h;
        w = wn;
        h = hn;
        x = xn;
        g = gn;
        if moved < 1e-16 || !improved {
            break;
        }
        let curv = dot(&dw, &dg);
        step = if curv > 0.0 {
            (dot(&dw, &dw) / curv).clamp(1e-12, 1e12)
        } else {
            (step * 2.0).min(1e12)
        };
    }
    Some(Polished {
        value: h,
        weights: w,
        point: x,
        evaluations: evals,
    })
}

/// Best point found by lattice search plus polish.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub value: f64,
    pub point: Vec<f64>,
    pub weights: Vec<f64>,
    pub evaluations: usize,
}

/// Lattice and seeded random candidates on the weight simplex.
pub fn candidates(p: usize, resolution: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
    let res = effective_resolution(p, resolution);
    let mut out: Vec<Vec<f64>> = simplex_grid(p, res)
        .into_iter()
        .map(|k| k.iter().map(|&c| c as f64 / res as f64).collect())
        .collect();
    let mut rng = SplitMix64::new(seed);
    out.extend((0..random).map(|_| rng.simplex_point(p)));
    out
}

/// Minimizes `f` over the unit section. Ties among candidates go to the
/// earliest candidate; polish only replaces it when it improves on it by
/// more than rounding noise relative to the largest candidate value.
pub fn minimize<F: Homogeneous + ?Sized>(
    f: &F,
    sec: &Section,
    resolution: usize,
    starts: usize,
    iters: usize,
    seed: u64,
) -> Option<Minimum> {
    let p = sec.generators.len();
    if p == 0 {
        return None;
    }
    let cands = candidates(p, resolution, starts, seed);
    let values: Vec<Option<f64>> = cands
        .par_iter()
        .map(|w| sec.eval(f, w).map(|(v, _)| v).filter(|v| v.is_finite()))
        .collect();
    let mut order: Vec<usize> = (0..cands.len()).filter(|&i| values[i].is_some()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .unwrap()
            .total_cmp(&values[b].unwrap())
            .then(a.cmp(&b))
    });
    let &first = order.first()?;
    let mut evaluations = cands.len();
    let (v0, x0) = sec.eval(f, &cands[first])?;
    let mut best = Minimum {
        value: v0,
        point: x0,
        weights: cands[first].clone(),
        evaluations: 0,
    };
    let picked: Vec<usize> = order.iter().take(starts.max(1)).cloned().collect();
    let polished: Vec<Option<Polished>> = picked
        .par_iter()
        .map(|&i| polish(f, sec, &cands[i], iters))
        .collect();
    // improvements below rounding level of f would only break ties arbitrarily
    let scale = values.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    let tie = 1e-14 * scale;
    for p in polished.into_iter().flatten() {
        evaluations += p.evaluations;
        if p.value < best.value - tie {
            best.value = p.value;
            best.point = p.point;
            best.weights = p.weights;
        }
    }
    best.evaluations = evaluations;
    Some(best)
}
