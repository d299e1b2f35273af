//! Three-valued numeric classification of tensors over polyhedral cones.
//!
//! Each property reduces to a minimum of a homogeneous function over the
//! unit section of the cone. The minimum found is an upper bound on the true
//! minimum, so a property stated as "min > 0" is reported as holding only when
//! the bound clears `margin`, and as failing only when a witness sits well
//! below it (`margin * 1e-3`). Everything in between is `unknown`.

use serde::{Deserialize, Serialize};

use crate::cone::PolyhedralCone;
use crate::error::{Result, TcpError};
use crate::rng::SplitMix64;
use crate::search::{self, polish, Form, FormSq, Homogeneous, ImageNormSq, Section};
use crate::tensor::{dot, norm, IndexSet, Tensor};

/// Ratio between the decision margin and the tolerance a witness must meet.
pub const WITNESS_FACTOR: f64 = 1e-3;

/// Largest dimension for sweeps over all principal sub-tensors.
pub const MAX_SWEEP_DIM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub grid_resolution: usize,
    pub multistarts: usize,
    pub polish_iters: usize,
    pub seed: u64,
    pub margin: f64,
}

impl SearchBudget {
    /// Defaults tuned for dimension `n`: lattice resolution 64 up to n = 3,
    /// 16 at n = 4 and 8 beyond.
    pub fn for_dim(n: usize) -> Self {
        SearchBudget {
            grid_resolution: match n {
                0..=3 => 64,
                4 => 16,
                _ => 8,
            },
            multistarts: 8,
            polish_iters: 200,
            seed: 0,
            margin: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution == 0 || self.multistarts == 0 || self.polish_iters == 0 {
            return Err(TcpError::Precondition(
                "search budget counts must be positive".into(),
            ));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(TcpError::Precondition(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        Ok(())
    }

    /// Multiplies resolution, starts and iterations by `k`.
    pub fn scaled(&self, k: usize) -> Self {
        SearchBudget {
            grid_resolution: self.grid_resolution * k,
            multistarts: self.multistarts * k,
            polish_iters: self.polish_iters * k,
            ..*self
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_resolution(mut self, grid_resolution: usize) -> Self {
        self.grid_resolution = grid_resolution;
        self
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::for_dim(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: String,
    pub status: Status,
    #[serde(with = "crate::io::float")]
    pub certificate: f64,
    pub witness: Option<Vec<f64>>,
    pub budget_used: usize,
    pub budget: SearchBudget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails(&self) -> bool {
        self.status == Status::Fails
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisObjective {
    /// `A x^m`
    Form,
    /// `|A x^{m-1}|`
    ImageNorm,
    /// `|A x^m|`
    AbsForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisMinimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub evaluations: usize,
}

fn check_dims(a: &Tensor, k: &PolyhedralCone) -> Result<()> {
    if a.dim() != k.dim() {
        return Err(TcpError::DimensionMismatch {
            expected: k.dim(),
            found: a.dim(),
        });
    }
    Ok(())
}

/// Smallest value of `f` found over the unit vectors of `K`.
pub fn min_over_basis(
    f: BasisObjective,
    a: &Tensor,
    k: &PolyhedralCone,
    budget: &SearchBudget,
) -> Result<BasisMinimum> {
    check_dims(a, k)?;
    budget.validate()?;
    let sec = Section {
        dim: k.dim(),
        generators: k.generators(),
    };
    let obj: Box<dyn Homogeneous + '_> = match f {
        BasisObjective::Form => Box::new(Form(a)),
        BasisObjective::ImageNorm => Box::new(ImageNormSq(a)),
        BasisObjective::AbsForm => Box::new(FormSq(a)),
    };
    let m = search::minimize(
        obj.as_ref(),
        &sec,
        budget.grid_resolution,
        budget.multistarts,
        budget.polish_iters,
        budget.seed,
    )
    .ok_or_else(|| TcpError::InvalidCone("cone has no nonzero points".into()))?;
    let value = match f {
        BasisObjective::Form => m.value,
        BasisObjective::ImageNorm | BasisObjective::AbsForm => m.value.max(0.0).sqrt(),
    };
    Ok(BasisMinimum {
        value,
        argmin: m.point,
        evaluations: m.evaluations,
    })
}

fn positive_verdict(property: String, found: BasisMinimum, budget: &SearchBudget) -> Verdict {
    let status = if found.value > budget.margin {
        Status::Holds
    } else if found.value <= budget.margin * WITNESS_FACTOR {
        Status::Fails
    } else {
        Status::Unknown
    };
    Verdict {
        property,
        status,
        certificate: found.value,
        witness: (status == Status::Fails).then_some(found.argmin),
        budget_used: found.evaluations,
        budget: *budget,
        note: None,
    }
}

fn named(k: &PolyhedralCone, orthant_name: &str, general: &str) -> String {
    if k.kind() == crate::cone::ConeKind::Orthant {
        orthant_name.to_string()
    } else {
        general.to_string()
    }
}

/// `A x^m >= 0` on `K`.
#[allow(non_snake_case)]
pub fn is_K_psd(a: &Tensor, k: &PolyhedralCone, budget: &SearchBudget) -> Result<Verdict> {
    let found = min_over_basis(BasisObjective::Form, a, k, budget)?;
    let status = if found.value < -budget.margin {
        Status::Fails
    } else if found.value >= -budget.margin * WITNESS_FACTOR {
        Status::Holds
    } else {
        Status::Unknown
    };
    Ok(Verdict {
        property: named(k, "copositive", "K-positive-semidefinite"),
        status,
        certificate: found.value,
        witness: (status == Status::Fails).then_some(found.argmin),
        budget_used: found.evaluations,
        budget: *budget,
        note: None,
    })
}

pub fn is_copositive(a: &Tensor, budget: &SearchBudget) -> Result<Verdict> {
    is_K_psd(a, &PolyhedralCone::orthant(a.dim()), budget)
}

/// `A x^m > 0` on `K \ {0}`.
#[allow(non_snake_case)]
pub fn is_K_pd(a: &Tensor, k: &PolyhedralCone, budget: &SearchBudget) -> Result<Verdict> {
    let found = min_over_basis(BasisObjective::Form, a, k, budget)?;
    Ok(positive_verdict(
        named(k, "strictly-copositive", "K-positive-definite"),
        found,
        budget,
    ))
}

pub fn is_strictly_copositive(a: &Tensor, budget: &SearchBudget) -> Result<Verdict> {
    is_K_pd(a, &PolyhedralCone::orthant(a.dim()), budget)
}

/// `A x^m != 0` on `K \ {0}`.
#[allow(non_snake_case)]
pub fn is_K_regular(a: &Tensor, k: &PolyhedralCone, budget: &SearchBudget) -> Result<Verdict> {
    let found = min_over_basis(BasisObjective::AbsForm, a, k, budget)?;
    Ok(positive_verdict("K-regular".into(), found, budget))
}

/// `A x^{m-1} != 0` on `K \ {0}`.
#[allow(non_snake_case)]
pub fn is_K_nonsingular(a: &Tensor, k: &PolyhedralCone, budget: &SearchBudget) -> Result<Verdict> {
    let found = min_over_basis(BasisObjective::ImageNorm, a, k, budget)?;
    Ok(positive_verdict("K-nonsingular".into(), found, budget))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalSweep {
    pub verdict: Verdict,
    pub table: Vec<(IndexSet, Verdict)>,
}

/// Orthant nonsingularity of every principal sub-tensor, in order of
/// increasing cardinality. The overall verdict fails at the first failing
/// subset, and is unknown if no subset fails but some subset is unknown.
pub fn all_principal_nonsingular(a: &Tensor, budget: &SearchBudget) -> Result<PrincipalSweep> {
    let n = a.dim();
    if n > MAX_SWEEP_DIM {
        return Err(TcpError::TooLarge {
            what: "principal sweep dimension",
            dim: n,
            limit: MAX_SWEEP_DIM,
        });
    }
    budget.validate()?;
    let mut table = Vec::new();
    let mut used = 0;
    let mut first_fail: Option<(IndexSet, Verdict)> = None;
    let mut unknown = false;
    let mut worst = f64::INFINITY;
    for alpha in IndexSet::all_by_cardinality(n) {
        if alpha.is_empty() {
            continue;
        }
        let sub = a.principal_subtensor(&alpha)?;
        let v = is_K_nonsingular(&sub, &PolyhedralCone::orthant(alpha.len()), budget)?;
        used += v.budget_used;
        worst = worst.min(v.certificate);
        match v.status {
            Status::Fails if first_fail.is_none() => first_fail = Some((alpha.clone(), v.clone())),
            Status::Unknown => unknown = true,
            _ => {}
        }
        table.push((alpha, v));
    }
    let verdict = match first_fail {
        Some((alpha, v)) => Verdict {
            property: "all-principal-nonsingular".into(),
            status: Status::Fails,
            certificate: v.certificate,
            witness: v.witness.map(|u| alpha.lift(&u)),
            budget_used: used,
            budget: *budget,
            note: Some(format!("singular at alpha = {:?}", alpha.one_based())),
        },
        None => Verdict {
            property: "all-principal-nonsingular".into(),
            status: if unknown {
                Status::Unknown
            } else {
                Status::Holds
            },
            certificate: worst,
            witness: None,
            budget_used: used,
            budget: *budget,
            note: None,
        },
    };
    Ok(PrincipalSweep { verdict, table })
}

/// Points of `S_A = SOL(R^n_+, 0, A)` on the unit sphere.
///
/// Every face of the orthant is searched for zeros of the restricted map
/// `A_alpha u^{m-1}` with all of `u` strictly positive; such a zero is kept
/// when the remaining components of `A x^{m-1}` are nonnegative up to
/// `margin`. `starts` polish runs are spent per face, half of them from
/// seeded random points. The result is deduplicated and sorted.
pub fn s_cone_samples(a: &Tensor, starts: usize, seed: u64, margin: f64) -> Result<Vec<Vec<f64>>> {
    let n = a.dim();
    if n > MAX_SWEEP_DIM {
        return Err(TcpError::TooLarge {
            what: "S_A sampling dimension",
            dim: n,
            limit: MAX_SWEEP_DIM,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for alpha in IndexSet::all_by_cardinality(n) {
        if alpha.is_empty() {
            continue;
        }
        let k = alpha.len();
        let sub = a.principal_subtensor(&alpha)?;
        let face_seed = rng.derive();
        let mut roots: Vec<Vec<f64>> = Vec::new();
        if k == 1 {
            roots.push(vec![1.0]);
        } else {
            let gens: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            let sec = Section {
                dim: k,
                generators: &gens,
            };
            let obj = ImageNormSq(&sub);
            let res = SearchBudget::for_dim(k).grid_resolution;
            let cands = search::candidates(k, res, starts.div_ceil(2), face_seed);
            let mut scored: Vec<(f64, usize)> = cands
                .iter()
                .enumerate()
                .filter(|(_, w)| w.iter().all(|&c| c > 0.0))
                .filter_map(|(i, w)| sec.eval(&obj, w).map(|(v, _)| (v, i)))
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, i) in scored.iter().take(starts.max(1)) {
                if let Some(p) = polish(&obj, &sec, &cands[i], 400) {
                    if p.point.iter().all(|&c| c > 1e-9) {
                        roots.push(p.point);
                    }
                }
            }
        }
        for u in roots {
            let x = alpha.lift(&u);
            let s = norm(&x);
            let x: Vec<f64> = x.iter().map(|c| c / s).collect();
            let fx = a.apply_m1(&x)?;
            let on_face = alpha.members().iter().all(|&i| fx[i].abs() <= margin);
            let feasible = fx.iter().all(|&c| c >= -margin);
            if on_face && feasible && dot(&x, &fx).abs() <= margin {
                found.push(x);
            }
        }
    }
    found.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in found {
        if !out
            .iter()
            .any(|y| norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()) <= 1e-6)
        {
            out.push(x);
        }
    }
    Ok(out)
}

/// Necessary check for `q` in the dual of `S_A`: `q^T x >= -margin` at every
/// sampled point of `S_A`.
#[allow(non_snake_case)]
pub fn q_in_dual_SA(a: &Tensor, q: &[f64], budget: &SearchBudget) -> Result<Verdict> {
    if q.len() != a.dim() {
        return Err(TcpError::DimensionMismatch {
            expected: a.dim(),
            found: q.len(),
        });
    }
    budget.validate()?;
    let samples = s_cone_samples(a, budget.multistarts, budget.seed, budget.margin)?;
    let mut cert = f64::INFINITY;
    let mut arg = None;
    for x in &samples {
        let v = dot(q, x);
        if v < cert {
            cert = v;
            arg = Some(x.clone());
        }
    }
    let fails = cert < -budget.margin;
    Ok(Verdict {
        property: "q-in-dual-S_A".into(),
        status: if fails { Status::Fails } else { Status::Holds },
        certificate: cert,
        witness: if fails { arg } else { None },
        budget_used: samples.len(),
        budget: *budget,
        note: (!fails).then(|| {
            if samples.is_empty() {
                "holds at sampling resolution; no nonzero point of S_A found".to_string()
            } else {
                "holds at sampling resolution".to_string()
            }
        }),
    })
}
