//! Empirical probes of the stability theory: local uniqueness, existence
//! and error bounds under perturbation, upper semicontinuity, closedness of
//! the solution graph, and openness of the solvable and nonsingular sets.
//!
//! Every probe is a pure function of its inputs and seed. Trial `i` draws
//! from a child stream seeded by the `i`-th output of the master generator,
//! so trials may run in parallel without changing the report.

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{
    all_principal_nonsingular, is_K_nonsingular, is_K_regular, is_copositive, q_in_dual_SA,
    SearchBudget, Status, Verdict, WITNESS_FACTOR,
};
use crate::complementary::{q_membership, tpos_contains, Membership};
use crate::cone::{ConeKind, PolyhedralCone};
use crate::error::{Result, TcpError};
use crate::fixtures;
use crate::rng::SplitMix64;
use crate::search::{self, Quadratic, Section};
use crate::solver::{is_solution, refine, residual, solve_enumerate, TcpInstance, SOLUTION_TOL};
use crate::tensor::{dot, norm, Tensor};

/// Redraws allowed per trial before a copositivity-restoring shift is added.
pub const MAX_REDRAWS: usize = 100;

fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut master = SplitMix64::new(seed);
    (0..trials).map(|_| master.derive()).collect()
}

/// A perturbation `(dq, dA)` with `|dq| + |dA|_F = eps * U`, `U` uniform on
/// `[0, 1)` and the direction uniform on the joint unit sphere.
#[derive(Debug, Clone)]
pub struct Perturbation {
    pub dq: Vec<f64>,
    pub da: Tensor,
    pub size: f64,
}

impl Perturbation {
    pub fn draw(
        rng: &mut SplitMix64,
        order: usize,
        dim: usize,
        eps: f64,
        perturb_tensor: bool,
    ) -> Result<Self> {
        let na = if perturb_tensor {
            dim.pow(order as u32)
        } else {
            0
        };
        let dir = rng.unit_vector(dim + na);
        let radius = eps * rng.next_f64();
        let split = norm(&dir[..dim]) + norm(&dir[dim..]);
        let s = radius / split;
        let dq: Vec<f64> = dir[..dim].iter().map(|v| v * s).collect();
        let da = if perturb_tensor {
            let data: Vec<f64> = dir[dim..].iter().map(|v| v * s).collect();
            Tensor::from_dense(order, dim, &data)?
        } else {
            Tensor::zeros(order, dim)?
        };
        let size = norm(&dq) + da.frobenius_norm();
        Ok(Perturbation { dq, da, size })
    }

    pub fn apply(&self, inst: &TcpInstance) -> Result<TcpInstance> {
        let q = inst.q.iter().zip(&self.dq).map(|(a, b)| a + b).collect();
        TcpInstance::new(inst.cone.clone(), q, inst.tensor.add(&self.da)?)
    }
}

fn precondition(what: &str, v: &Verdict) -> Result<()> {
    if v.status == Status::Holds {
        Ok(())
    } else {
        Err(TcpError::Precondition(format!(
            "{what} is {} (certificate {:e})",
            v.status, v.certificate
        )))
    }
}

fn require_orthant(inst: &TcpInstance) -> Result<()> {
    if inst.cone.kind() == ConeKind::Orthant {
        Ok(())
    } else {
        Err(TcpError::NonOrthantCone)
    }
}

/// Second-order sufficient condition for `x̄` to be an isolated solution:
/// `v^T (A x̄^{m-2}) v > 0` for unit `v` in `T(x̄, K) ∩ {v : <v, w> = 0}`.
///
/// The certificate is `+inf` when that cone is `{0}`. For tensors that are
/// not sub-symmetric the verdict carries a note, since the quadratic form is
/// then not the derivative of the map.
pub fn local_uniqueness_certificate(
    inst: &TcpInstance,
    xbar: &[f64],
    budget: &SearchBudget,
) -> Result<Verdict> {
    budget.validate()?;
    let r = residual(inst, xbar)?.max();
    if r > 1e-6 {
        return Err(TcpError::NotASolution(r));
    }
    let n = inst.dim();
    let note = (!inst.tensor.is_subsymmetric()).then(|| "tensor is not sub-symmetric".to_string());
    let w = inst.w(xbar)?;
    let tangent = inst.cone.tangent_cone(xbar, 1e-8)?;
    let slice = if norm(&w) <= 1e-12 {
        tangent
    } else {
        let mut rows = tangent.inequalities().to_vec();
        rows.push(w.clone());
        rows.push(w.iter().map(|v| -v).collect());
        PolyhedralCone::from_inequalities(n, rows)?
    };
    let m = inst.tensor.apply_m2(xbar)?;
    let sec = Section {
        dim: n,
        generators: slice.generators(),
    };
    let found = search::minimize(
        &Quadratic(m),
        &sec,
        budget.grid_resolution,
        budget.multistarts,
        budget.polish_iters,
        budget.seed,
    );
    let Some(found) = found else {
        let empty = "tangent cone meets the complementarity hyperplane only at 0".to_string();
        return Ok(Verdict {
            property: "local-uniqueness".into(),
            status: Status::Holds,
            certificate: f64::INFINITY,
            witness: None,
            budget_used: 0,
            budget: *budget,
            note: Some(match note {
                Some(n) => format!("{empty}; {n}"),
                None => empty,
            }),
        });
    };
    let status = if found.value > budget.margin {
        Status::Holds
    } else if found.value <= budget.margin * WITNESS_FACTOR {
        Status::Fails
    } else {
        Status::Unknown
    };
    Ok(Verdict {
        property: "local-uniqueness".into(),
        status,
        certificate: found.value,
        witness: Some(found.point),
        budget_used: found.evaluations,
        budget: *budget,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub probe: String,
    pub trials: usize,
    pub eps: f64,
    pub seed: u64,
    pub solvable_fraction: f64,
    pub max_solution_norm: f64,
    pub error_ratio_max: f64,
    /// Seeds of trials without a solution (or, for error bounds, without a
    /// solution near the reference point).
    pub failures: Vec<u64>,
    pub skipped: usize,
    pub redraws: usize,
    pub shifted_trials: usize,
}

struct TrialOutcome {
    seed: u64,
    solved: bool,
    max_norm: f64,
    ratio: Option<f64>,
    skipped: bool,
    redraws: usize,
    shifted: bool,
}

fn summarize(probe: &str, eps: f64, seed: u64, outcomes: Vec<TrialOutcome>) -> PerturbationReport {
    let counted: Vec<&TrialOutcome> = outcomes.iter().filter(|o| !o.skipped).collect();
    let solved = counted.iter().filter(|o| o.solved).count();
    PerturbationReport {
        probe: probe.into(),
        trials: outcomes.len(),
        eps,
        seed,
        solvable_fraction: if counted.is_empty() {
            1.0
        } else {
            solved as f64 / counted.len() as f64
        },
        max_solution_norm: counted.iter().map(|o| o.max_norm).fold(0.0, f64::max),
        error_ratio_max: counted.iter().filter_map(|o| o.ratio).fold(0.0, f64::max),
        failures: counted
            .iter()
            .filter(|o| !o.solved)
            .map(|o| o.seed)
            .collect(),
        skipped: outcomes.len() - counted.len(),
        redraws: outcomes.iter().map(|o| o.redraws).sum(),
        shifted_trials: outcomes.iter().filter(|o| o.shifted).count(),
    }
}

/// Solvability of perturbed instances around a copositive tensor with `q` in
/// the interior of `S_A*`. Perturbed tensors that lose copositivity are
/// redrawn; after [`MAX_REDRAWS`] the unit tensor scaled by `eps` is added.
/// With a reference point, `error_ratio_max` records the distance from it to
/// the nearest perturbed solution relative to the perturbation size.
pub fn perturb_existence(
    inst: &TcpInstance,
    xbar: Option<&[f64]>,
    eps: f64,
    trials: usize,
    seed: u64,
    budget: &SearchBudget,
) -> Result<PerturbationReport> {
    require_orthant(inst)?;
    precondition(
        "copositivity of the base tensor",
        &is_copositive(&inst.tensor, budget)?,
    )?;
    precondition(
        "q in the dual of S_A",
        &q_in_dual_SA(&inst.tensor, &inst.q, budget)?,
    )?;
    let (m, n) = (inst.tensor.order(), inst.dim());
    let outcomes = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<TrialOutcome> {
            let mut rng = SplitMix64::new(s);
            let mut redraws = 0;
            let mut shifted = false;
            let mut p = Perturbation::draw(&mut rng, m, n, eps, true)?;
            let mut perturbed = p.apply(inst)?;
            while !is_copositive(&perturbed.tensor, budget)?.holds() {
                if redraws == MAX_REDRAWS {
                    let shift = fixtures::identity(m, n).scaled(eps);
                    perturbed.tensor = perturbed.tensor.add(&shift)?;
                    shifted = true;
                    break;
                }
                redraws += 1;
                p = Perturbation::draw(&mut rng, m, n, eps, true)?;
                perturbed = p.apply(inst)?;
            }
            let e = solve_enumerate(&perturbed, budget)?;
            let ratio = match xbar {
                Some(xb) if p.size >= 1e-12 && !e.solutions.is_empty() => Some(
                    e.solutions
                        .iter()
                        .map(|s| dist(&s.x, xb))
                        .fold(f64::INFINITY, f64::min)
                        / p.size,
                ),
                _ => None,
            };
            Ok(TrialOutcome {
                seed: s,
                solved: !e.solutions.is_empty(),
                max_norm: e.solutions.iter().map(|s| norm(&s.x)).fold(0.0, f64::max),
                ratio,
                skipped: false,
                redraws,
                shifted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("existence", eps, seed, outcomes))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}

/// Estimates the error-bound constant `sup |x - x̄| / (|dq| + |dA|_F)` over
/// perturbed solutions within `radius` of an isolated solution `x̄`.
/// Solutions are sought by refinement from `x̄` and from a few seeded points
/// of the ball. Trials with a zero perturbation are skipped.
pub fn error_bound_probe(
    inst: &TcpInstance,
    xbar: &[f64],
    radius: f64,
    eps: f64,
    trials: usize,
    seed: u64,
    budget: &SearchBudget,
) -> Result<PerturbationReport> {
    require_orthant(inst)?;
    precondition(
        "local uniqueness at the reference point",
        &local_uniqueness_certificate(inst, xbar, budget)?,
    )?;
    let (m, n) = (inst.tensor.order(), inst.dim());
    let outcomes = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<TrialOutcome> {
            let mut rng = SplitMix64::new(s);
            let p = Perturbation::draw(&mut rng, m, n, eps, true)?;
            if p.size < 1e-12 {
                return Ok(TrialOutcome {
                    seed: s,
                    solved: true,
                    max_norm: 0.0,
                    ratio: None,
                    skipped: true,
                    redraws: 0,
                    shifted: false,
                });
            }
            let perturbed = p.apply(inst)?;
            let mut starts = vec![xbar.to_vec()];
            for _ in 0..4 {
                let d = rng.unit_vector(n);
                let r = radius * rng.next_f64();
                starts.push(
                    xbar.iter()
                        .zip(&d)
                        .map(|(a, b)| (a + r * b).max(0.0))
                        .collect(),
                );
            }
            let mut best: Option<(f64, f64)> = None;
            for x0 in starts {
                let r = refine(&perturbed, &x0, 100)?;
                let d = dist(&r.solution.x, xbar);
                if r.converged && d <= radius && best.is_none_or(|(bd, _)| d > bd) {
                    best = Some((d, norm(&r.solution.x)));
                }
            }
            Ok(TrialOutcome {
                seed: s,
                solved: best.is_some(),
                max_norm: best.map_or(0.0, |b| b.1),
                ratio: best.map(|b| b.0 / p.size),
                skipped: false,
                redraws: 0,
                shifted: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("error-bound", eps, seed, outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UscReport {
    pub trials: usize,
    pub eps: f64,
    pub seed: u64,
    #[serde(with = "crate::io::float")]
    pub max_excursion: f64,
    pub base_solutions: usize,
    pub perturbed_solutions: usize,
}

/// Largest distance from a perturbed solution to the base solution set.
/// Every perturbed solution counted passes [`is_solution`] on its own
/// perturbed instance.
pub fn usc_probe(
    inst: &TcpInstance,
    eps: f64,
    trials: usize,
    seed: u64,
    budget: &SearchBudget,
) -> Result<UscReport> {
    require_orthant(inst)?;
    precondition(
        "K-regularity of the base tensor",
        &is_K_regular(&inst.tensor, &inst.cone, budget)?,
    )?;
    let base: Vec<Vec<f64>> = solve_enumerate(inst, budget)?
        .solutions
        .into_iter()
        .map(|s| s.x)
        .collect();
    let (m, n) = (inst.tensor.order(), inst.dim());
    let per_trial = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<(f64, usize)> {
            let mut rng = SplitMix64::new(s);
            let perturbed = Perturbation::draw(&mut rng, m, n, eps, true)?.apply(inst)?;
            let sols = solve_enumerate(&perturbed, budget)?.solutions;
            let mut worst: f64 = 0.0;
            let mut counted = 0;
            for sol in sols {
                if !is_solution(&perturbed, &sol.x, SOLUTION_TOL) {
                    continue;
                }
                counted += 1;
                let d = base
                    .iter()
                    .map(|b| dist(&sol.x, b))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
            Ok((worst, counted))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UscReport {
        trials,
        eps,
        seed,
        max_excursion: per_trial.iter().map(|t| t.0).fold(0.0, f64::max),
        base_solutions: base.len(),
        perturbed_solutions: per_trial.iter().map(|t| t.1).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosednessReport {
    pub closed: bool,
    pub limit_residual: f64,
    pub tolerance: f64,
    pub sequence_length: usize,
}

/// Whether the limit of a convergent sequence of solutions solves the limit
/// instance. The tolerance is `1e-7` plus ten times the largest residual in
/// the last quarter of the sequence.
pub fn graph_closedness_probe(
    sequence: &[(TcpInstance, Vec<f64>)],
    limit: &(TcpInstance, Vec<f64>),
) -> Result<ClosednessReport> {
    let mut residuals = Vec::with_capacity(sequence.len());
    for (inst, x) in sequence {
        let r = residual(inst, x)?.max();
        if r > SOLUTION_TOL {
            return Err(TcpError::NotASolution(r));
        }
        residuals.push(r);
    }
    let tail = residuals[residuals.len() - residuals.len().div_ceil(4).min(residuals.len())..]
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    let tolerance = SOLUTION_TOL + 10.0 * tail;
    let limit_residual = residual(&limit.0, &limit.1)?.max();
    Ok(ClosednessReport {
        closed: limit_residual <= tolerance,
        limit_residual,
        tolerance,
        sequence_length: sequence.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example3Row {
    pub l: u32,
    pub image: Vec<f64>,
    pub image_error: f64,
    pub frobenius_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example3Report {
    pub rows: Vec<Example3Row>,
    pub max_image_error: f64,
    pub max_distance_error: f64,
    pub limit_membership: Verdict,
}

/// The matrices `A^l -> Ā` map `x^l = (2 + 2l, l)` onto `(1, 2)` for every
/// `l`, yet `(1, 2)` is not in `Tpos(R^2_+, Ā)`.
pub fn example3_nonclosedness(l_max: u32, budget: &SearchBudget) -> Result<Example3Report> {
    let target = [1.0, 2.0];
    let bar = fixtures::e3_bar();
    let rows = (1..=l_max)
        .map(|l| -> Result<Example3Row> {
            let a = fixtures::example3_member(l);
            let image = a.apply_m1(&fixtures::example3_point(l))?;
            Ok(Example3Row {
                l,
                image_error: dist(&image, &target),
                image,
                frobenius_distance: a.frobenius_distance(&bar)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Example3Report {
        max_image_error: rows.iter().map(|r| r.image_error).fold(0.0, f64::max),
        max_distance_error: rows
            .iter()
            .map(|r| (r.frobenius_distance - 1.0 / r.l as f64).abs())
            .fold(0.0, f64::max),
        limit_membership: tpos_contains(&PolyhedralCone::orthant(2), &bar, &target, budget)?,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionReport {
    pub probe: String,
    pub trials: usize,
    pub eps: f64,
    pub seed: u64,
    pub fraction: f64,
    pub undecided: usize,
}

/// Fraction of right-hand sides within `eps` of an unsolvable `q` that stay
/// unsolvable. Undecided memberships count against the fraction.
pub fn unsolvable_neighborhood_probe(
    a: &Tensor,
    q: &[f64],
    eps: f64,
    trials: usize,
    seed: u64,
    budget: &SearchBudget,
) -> Result<FractionReport> {
    let base = q_membership(a, q, budget)?;
    if base.member != Membership::NonMember {
        return Err(TcpError::Precondition(format!(
            "q must be certified unsolvable, membership is {:?}",
            base.member
        )));
    }
    precondition(
        "nonsingularity of all principal sub-tensors",
        &all_principal_nonsingular(a, budget)?.verdict,
    )?;
    let (m, n) = (a.order(), a.dim());
    let outcomes = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<Membership> {
            let mut rng = SplitMix64::new(s);
            let p = Perturbation::draw(&mut rng, m, n, eps, false)?;
            let qp: Vec<f64> = q.iter().zip(&p.dq).map(|(x, d)| x + d).collect();
            Ok(q_membership(a, &qp, budget)?.member)
        })
        .collect::<Result<Vec<_>>>()?;
    let unsolvable = outcomes
        .iter()
        .filter(|&&m| m == Membership::NonMember)
        .count();
    Ok(FractionReport {
        probe: "unsolvable-neighborhood".into(),
        trials,
        eps,
        seed,
        fraction: if trials == 0 {
            1.0
        } else {
            unsolvable as f64 / trials as f64
        },
        undecided: outcomes
            .iter()
            .filter(|&&m| m == Membership::Unknown)
            .count(),
    })
}

/// Fraction of perturbed pairs `(K, A)` that stay `K`-nonsingular. Tensors
/// move by `|dA|_F <= eps`; general cones also have their generators jittered
/// by at most `eps` in total.
pub fn nonsingularity_openness_probe(
    k: &PolyhedralCone,
    a: &Tensor,
    eps: f64,
    trials: usize,
    seed: u64,
    budget: &SearchBudget,
) -> Result<FractionReport> {
    precondition(
        "K-nonsingularity of the base tensor",
        &is_K_nonsingular(a, k, budget)?,
    )?;
    let (m, n) = (a.order(), a.dim());
    let outcomes = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<Status> {
            let mut rng = SplitMix64::new(s);
            let dir = rng.unit_vector(n.pow(m as u32));
            let r = eps * rng.next_f64();
            let data: Vec<f64> = dir.iter().map(|v| v * r).collect();
            let ap = a.add(&Tensor::from_dense(m, n, &data)?)?;
            let kp = if k.kind() == ConeKind::Orthant {
                k.clone()
            } else {
                let gens = k.generators();
                let jitter = rng.unit_vector(gens.len() * n);
                let rj = eps * rng.next_f64();
                let moved: Vec<Vec<f64>> = gens
                    .iter()
                    .enumerate()
                    .map(|(g, v)| {
                        v.iter()
                            .enumerate()
                            .map(|(i, c)| c + rj * jitter[g * n + i])
                            .collect()
                    })
                    .collect();
                PolyhedralCone::from_generators(n, moved).unwrap_or_else(|_| k.clone())
            };
            Ok(is_K_nonsingular(&ap, &kp, budget)?.status)
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = outcomes.iter().filter(|&&s| s == Status::Holds).count();
    Ok(FractionReport {
        probe: "nonsingularity-openness".into(),
        trials,
        eps,
        seed,
        fraction: if trials == 0 {
            1.0
        } else {
            holds as f64 / trials as f64
        },
        undecided: outcomes.iter().filter(|&&s| s == Status::Unknown).count(),
    })
}

/// Quadratic form value used by [`local_uniqueness_certificate`], for re-checking
/// its witness.
pub fn second_order_form(inst: &TcpInstance, xbar: &[f64], v: &[f64]) -> Result<f64> {
    let m = inst.tensor.apply_m2(xbar)?;
    let n = v.len();
    let mv: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] * v[j]).sum())
        .collect();
    Ok(dot(v, &mv))
}
