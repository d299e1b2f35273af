//! Sparse polynomials in nonnegative variables with interval evaluation.

use std::collections::BTreeMap;

use crate::tensor::{IndexSet, Tensor};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    /// Rows `rows` of `A x^{m-1}` with `x` supported on `alpha`, as polynomials
    /// in the `|alpha|` member coordinates.
    pub fn rows_on_support(a: &Tensor, rows: &[usize], alpha: &IndexSet) -> Vec<Poly> {
        let pos = alpha.positions();
        let mut row_of = vec![None; a.dim()];
        for (r, &i) in rows.iter().enumerate() {
            row_of[i] = Some(r);
        }
        let mut out = vec![Poly::default(); rows.len()];
        'entries: for (idx, v) in a.entries() {
            let Some(r) = row_of[idx[0]] else { continue };
            let mut exp = vec![0u32; alpha.len()];
            for &j in &idx[1..] {
                match pos[j] {
                    Some(p) => exp[p] += 1,
                    None => continue 'entries,
                }
            }
            *out[r].terms.entry(exp).or_insert(0.0) += v;
        }
        for p in &mut out {
            p.terms.retain(|_, c| *c != 0.0);
        }
        out
    }

    /// `sum c_k p_k` with like monomials merged.
    pub fn combine(parts: &[(f64, &Poly)]) -> Poly {
        let mut terms = BTreeMap::new();
        for (c, p) in parts {
            if *c == 0.0 {
                continue;
            }
            for (e, v) in &p.terms {
                *terms.entry(e.clone()).or_insert(0.0) += c * v;
            }
        }
        terms.retain(|_, c: &mut f64| *c != 0.0);
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(s)
                    .map(|(&k, x)| x.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Enclosure of the range over a box of nonnegative intervals, widened
    /// to absorb floating point rounding.
    pub fn range(&self, b: &[Interval]) -> Interval {
        let (mut lo, mut hi, mut mag) = (0.0, 0.0, 0.0);
        for (e, &c) in &self.terms {
            let (mut plo, mut phi) = (1.0, 1.0);
            for (&k, iv) in e.iter().zip(b) {
                if k > 0 {
                    plo *= iv.lo.powi(k as i32);
                    phi *= iv.hi.powi(k as i32);
                }
            }
            if c > 0.0 {
                lo += c * plo;
                hi += c * phi;
            } else {
                lo += c * phi;
                hi += c * plo;
            }
            mag += c.abs() * phi;
        }
        let slack = 1e-13 * mag;
        Interval::new(lo - slack, hi + slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rows_match_contraction() {
        let a = fixtures::e4();
        let alpha = IndexSet::full(2);
        let p = Poly::rows_on_support(&a, &[0, 1], &alpha);
        let x = [0.3, 0.9];
        let f = a.apply_m1(&x).unwrap();
        assert!((p[0].eval(&x) - f[0]).abs() < 1e-15);
        assert!((p[1].eval(&x) - f[1]).abs() < 1e-15);
    }

    #[test]
    fn off_support_rows() {
        // E1 row 2 restricted to support {1}: x1^2
        let alpha = IndexSet::new(2, &[0]).unwrap();
        let p = Poly::rows_on_support(&fixtures::e1(), &[0, 1], &alpha);
        assert!(p[0].is_zero());
        assert_eq!(p[1].eval(&[2.0]), 4.0);
    }

    #[test]
    fn range_encloses_samples() {
        let a = fixtures::random_uniform(3, 3, -2.0, 2.0, 5);
        let polys = Poly::rows_on_support(&a, &[0, 1, 2], &IndexSet::full(3));
        let b = [
            Interval::new(0.2, 0.5),
            Interval::point(1.0),
            Interval::new(0.0, 0.3),
        ];
        for p in &polys {
            let r = p.range(&b);
            for i in 0..=10 {
                for j in 0..=10 {
                    let s = [0.2 + 0.03 * i as f64, 1.0, 0.03 * j as f64];
                    let v = p.eval(&s);
                    assert!(r.lo <= v && v <= r.hi);
                }
            }
        }
    }

    #[test]
    fn combine_cancels() {
        let a = fixtures::e2();
        let p = Poly::rows_on_support(&a, &[0, 1], &IndexSet::full(2));
        assert!(Poly::combine(&[(1.0, &p[0]), (-1.0, &p[1])]).is_zero());
    }
}
