//! Verification and solution of `TCP(K, q, A)`.
//!
//! Any polyhedral `K` can be verified. Solving is restricted to the orthant,
//! where the solution set splits along complementary supports.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::SearchBudget;
use crate::complementary::{analyze_subset, check_enum_dim, SubsetStatus};
use crate::cone::{ConeKind, PolyhedralCone};
use crate::error::{Result, TcpError};
use crate::rng::SplitMix64;
use crate::tensor::{dot, norm, IndexSet, Tensor};

/// Points closer than this are reported once.
pub const DEDUP_DIST: f64 = 1e-6;

/// Tolerance for solver output.
pub const SOLUTION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct TcpInstance {
    pub cone: PolyhedralCone,
    pub q: Vec<f64>,
    pub tensor: Tensor,
}

impl TcpInstance {
    pub fn new(cone: PolyhedralCone, q: Vec<f64>, tensor: Tensor) -> Result<Self> {
        let n = cone.dim();
        if q.len() != n {
            return Err(TcpError::DimensionMismatch {
                expected: n,
                found: q.len(),
            });
        }
        if tensor.dim() != n {
            return Err(TcpError::DimensionMismatch {
                expected: n,
                found: tensor.dim(),
            });
        }
        Ok(TcpInstance { cone, q, tensor })
    }

    pub fn orthant(tensor: Tensor, q: Vec<f64>) -> Result<Self> {
        Self::new(PolyhedralCone::orthant(tensor.dim()), q, tensor)
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    /// `w = A x^{m-1} + q`.
    pub fn w(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.tensor.apply_m1(x)?;
        Ok(f.iter().zip(&self.q).map(|(a, b)| a + b).collect())
    }

    fn is_orthant(&self) -> bool {
        self.cone.kind() == ConeKind::Orthant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub primal_dist: f64,
    pub dual_dist: f64,
    pub comp_gap: f64,
}

impl Residual {
    pub fn max(&self) -> f64 {
        self.primal_dist.max(self.dual_dist).max(self.comp_gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TcpSolution {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub primal_dist: f64,
    pub dual_dist: f64,
    pub comp_gap: f64,
    #[serde(serialize_with = "crate::io::index_set")]
    pub alpha: IndexSet,
}

pub fn residual(inst: &TcpInstance, x: &[f64]) -> Result<Residual> {
    let w = inst.w(x)?;
    Ok(Residual {
        primal_dist: inst.cone.dist(x)?,
        dual_dist: inst.cone.dual().dist(&w)?,
        comp_gap: dot(x, &w).abs(),
    })
}

pub fn is_solution(inst: &TcpInstance, x: &[f64], tol: f64) -> bool {
    residual(inst, x).map(|r| r.max() <= tol).unwrap_or(false)
}

/// Packages `x` with its residuals; the support uses a cutoff of `1e-9`
/// relative to `max(1, |x|)`.
pub fn solution(inst: &TcpInstance, x: &[f64]) -> Result<TcpSolution> {
    let r = residual(inst, x)?;
    let cut = 1e-9 * norm(x).max(1.0);
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > cut).collect();
    Ok(TcpSolution {
        x: x.to_vec(),
        w: inst.w(x)?,
        primal_dist: r.primal_dist,
        dual_dist: r.dual_dist,
        comp_gap: r.comp_gap,
        alpha: IndexSet::new(x.len(), &support)?,
    })
}

fn require_orthant(inst: &TcpInstance) -> Result<()> {
    if inst.is_orthant() {
        check_enum_dim(&inst.tensor, &inst.q)
    } else {
        Err(TcpError::NonOrthantCone)
    }
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn dedup_sorted(mut xs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in xs.drain(..) {
        let dup = out
            .iter()
            .any(|y| norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()) <= DEDUP_DIST);
        if !dup {
            out.push(x);
        }
    }
    out.sort_by(|a, b| lex(a, b));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enumeration {
    pub solutions: Vec<TcpSolution>,
    /// No solution found while some subset stayed undecided.
    pub unknown: bool,
    #[serde(serialize_with = "crate::io::index_sets")]
    pub inconclusive: Vec<IndexSet>,
}

/// Every solution reachable through the per-support subsystems, deduplicated
/// and sorted lexicographically. With `q = 0` only `x = 0` is returned.
pub fn solve_enumerate(inst: &TcpInstance, budget: &SearchBudget) -> Result<Enumeration> {
    require_orthant(inst)?;
    budget.validate()?;
    let n = inst.dim();
    if inst.q.iter().all(|&v| v == 0.0) {
        return Ok(Enumeration {
            solutions: vec![solution(inst, &vec![0.0; n])?],
            unknown: false,
            inconclusive: vec![],
        });
    }
    let subsets = IndexSet::all_by_cardinality(n);
    let analyses: Vec<_> = subsets
        .par_iter()
        .map(|alpha| analyze_subset(&inst.tensor, &inst.q, alpha, budget, true))
        .collect::<Result<_>>()?;
    let mut inconclusive = Vec::new();
    let mut found = Vec::new();
    for a in analyses {
        if a.status == SubsetStatus::Inconclusive {
            inconclusive.push(a.alpha.clone());
        }
        for x in a.solutions {
            let r = refine(inst, &x, 20)?;
            let best = if r.converged { r.solution.x } else { x };
            if is_solution(inst, &best, SOLUTION_TOL) {
                found.push(best);
            }
        }
    }
    let solutions = dedup_sorted(found)
        .iter()
        .map(|x| solution(inst, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(Enumeration {
        unknown: solutions.is_empty() && !inconclusive.is_empty(),
        solutions,
        inconclusive,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refined {
    pub solution: TcpSolution,
    pub converged: bool,
    pub iterations: usize,
    pub min_map_norm: f64,
}

fn min_map(inst: &TcpInstance, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = inst.w(x)?;
    Ok((x.iter().zip(&w).map(|(a, b)| a.min(*b)).collect(), w))
}

/// Semismooth Newton on `min(x, A x^{m-1} + q)` with Armijo backtracking;
/// a Levenberg-Marquardt step replaces the Newton step when the generalized
/// Jacobian is singular or the step does not descend. `converged` is set only
/// when the min-map norm reaches `1e-9` and the point verifies at
/// [`SOLUTION_TOL`].
pub fn refine(inst: &TcpInstance, x0: &[f64], iters: usize) -> Result<Refined> {
    if !inst.is_orthant() {
        return Err(TcpError::NonOrthantCone);
    }
    let n = inst.dim();
    if x0.len() != n {
        return Err(TcpError::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let mut x = x0.to_vec();
    let (mut phi, mut w) = min_map(inst, &x)?;
    let mut pn = norm(&phi);
    let mut it = 0;
    while it < iters && pn > 1e-12 {
        it += 1;
        let jf = inst.tensor.jacobian_m1(&x)?;
        let j = DMatrix::from_fn(n, n, |r, c| {
            if x[r] <= w[r] {
                if r == c {
                    1.0
                } else {
                    0.0
                }
            } else {
                jf[(r, c)]
            }
        });
        let rhs = -DVector::from_column_slice(&phi);
        let newton = j.clone().lu().solve(&rhs);
        let lm = {
            let jt = j.transpose();
            let mut m = &jt * &j;
            let mu = 1e-6 * (0..n).map(|i| m[(i, i)]).fold(1.0, f64::max);
            for i in 0..n {
                m[(i, i)] += mu;
            }
            m.lu().solve(&(&jt * &rhs))
        };
        let mut moved = false;
        for d in [newton, lm].into_iter().flatten() {
            if d.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let mut t = 1.0;
            while t > 1e-10 {
                let cand: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                let (pc, wc) = min_map(inst, &cand)?;
                let pcn = norm(&pc);
                if pcn * pcn <= (1.0 - 1e-4 * t) * pn * pn {
                    x = cand;
                    phi = pc;
                    w = wc;
                    pn = pcn;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if moved {
                break;
            }
        }
        if !moved {
            break;
        }
    }
    // roundoff can leave components like -1e-18 on the inactive side
    let cleaned: Vec<f64> = x
        .iter()
        .map(|&v| if v < 0.0 && v > -1e-14 { 0.0 } else { v })
        .collect();
    if is_solution(inst, &cleaned, SOLUTION_TOL) {
        x = cleaned;
        pn = norm(&min_map(inst, &x)?.0);
    }
    let converged = pn <= 1e-9 && is_solution(inst, &x, SOLUTION_TOL);
    Ok(Refined {
        solution: solution(inst, &x)?,
        converged,
        iterations: it,
        min_map_norm: pn,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSetReport {
    pub bounded_within: f64,
    pub count: usize,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub solutions: Vec<Vec<f64>>,
    pub unknown: bool,
}

/// Enumeration plus refinement from `samples` random starts in `[0, radius]^n`.
pub fn solution_set_probe(
    inst: &TcpInstance,
    radius: f64,
    samples: usize,
    seed: u64,
    budget: &SearchBudget,
) -> Result<SolutionSetReport> {
    let e = solve_enumerate(inst, budget)?;
    let n = inst.dim();
    let mut rng = SplitMix64::new(seed);
    let starts: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..n).map(|_| rng.uniform(0.0, radius)).collect())
        .collect();
    let refined: Vec<Refined> = starts
        .par_iter()
        .map(|s| refine(inst, s, 100))
        .collect::<Result<_>>()?;
    let mut xs: Vec<Vec<f64>> = e.solutions.iter().map(|s| s.x.clone()).collect();
    xs.extend(
        refined
            .into_iter()
            .filter(|r| r.converged)
            .map(|r| r.solution.x),
    );
    let xs = dedup_sorted(xs);
    Ok(SolutionSetReport {
        bounded_within: xs.iter().map(|x| norm(x)).fold(0.0, f64::max),
        count: xs.len(),
        radius,
        samples,
        seed,
        solutions: xs,
        unknown: e.unknown,
    })
}
