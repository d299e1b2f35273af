//! Acceptance suite. Runs as a plain binary so each criterion prints exactly
//! one PASS/FAIL line regardless of output capture.

use std::f64::consts::FRAC_PI_2;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use approx::relative_eq;
use rayon::prelude::*;

use tcpkit::classify::{self, SearchBudget};
use tcpkit::complementary::{complementary_tensor, q_membership, tpos_contains, Membership};
use tcpkit::fixtures::{self, RandomKind};
use tcpkit::rng::SplitMix64;
use tcpkit::solver::{solve_enumerate, TcpInstance};
use tcpkit::stability;
use tcpkit::{delta_metric, IndexSet, PolyhedralCone, Tensor};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn tuples(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

// ═══ 1. Named fixtures ═════════════════════════════════════════════════════

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let k = PolyhedralCone::orthant(2);
    let b = SearchBudget::for_dim(2);

    let e1 = fixtures::e1();
    ensure!(
        classify::is_copositive(&e1, &b).map_err(err)?.holds(),
        "E1 copositive"
    );
    let strict = classify::is_strictly_copositive(&e1, &b).map_err(err)?;
    ensure!(strict.fails(), "E1 strictly copositive should fail");
    let w = strict.witness.clone().ok_or("E1 strict witness missing")?;
    ensure!(
        w.iter().filter(|v| v.abs() < 1e-9).count() == 1,
        "E1 witness {w:?} not on an axis"
    );
    ensure!(
        classify::is_K_nonsingular(&e1, &k, &b)
            .map_err(err)?
            .holds(),
        "E1 nonsingular"
    );

    let e2 = classify::is_K_nonsingular(&fixtures::e2(), &k, &b).map_err(err)?;
    ensure!(e2.fails(), "E2 should be singular");
    let w = e2.witness.ok_or("E2 witness missing")?;
    ensure!(dist(&unit(&w), &[1.0, 0.0]) < 1e-12, "E2 witness {w:?}");

    let e3 = classify::is_K_nonsingular(&fixtures::e3_bar(), &k, &b).map_err(err)?;
    ensure!(e3.fails(), "E3 matrix should be singular");
    let w = e3.witness.ok_or("E3 witness missing")?;
    ensure!(
        dist(&unit(&w), &unit(&[2.0, 1.0])) < 1e-6,
        "E3 witness {w:?}"
    );

    let e4 = fixtures::e4();
    ensure!(
        classify::is_copositive(&e4, &b).map_err(err)?.holds(),
        "E4 copositive"
    );
    let strict = classify::is_strictly_copositive(&e4, &b).map_err(err)?;
    ensure!(strict.fails(), "E4 strictly copositive should fail");
    let w = strict.witness.ok_or("E4 witness missing")?;
    ensure!(
        dist(&unit(&w), &unit(&[1.0, 1.0])) < 1e-9,
        "E4 witness {w:?}"
    );
    let sweep = classify::all_principal_nonsingular(&e4, &b).map_err(err)?;
    ensure!(sweep.verdict.holds(), "E4 principal sweep");
    ensure!(sweep.table.len() == 3, "E4 sweep covers 3 subsets");

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("{:.2}s", elapsed.as_secs_f64()))
}

// ═══ 2. Complementary tensors ══════════════════════════════════════════════

fn criterion_2() -> Outcome {
    let mut checked_sets = 0;
    for s in 0..50u64 {
        let m = [2, 3, 4][s as usize % 3];
        let n = [2, 3][(s as usize / 3) % 2];
        let a = fixtures::random_uniform(m, n, -1.0, 1.0, 700 + s);

        let c_empty = complementary_tensor(&a, &IndexSet::empty(n)).map_err(err)?;
        ensure!(
            c_empty == Tensor::unit(m, n).map_err(err)?,
            "seed {s}: C_A(empty) is not the unit tensor"
        );
        let c_full = complementary_tensor(&a, &IndexSet::full(n)).map_err(err)?;
        for idx in tuples(m, n) {
            ensure!(
                c_full.get(&idx) == -a.get(&idx),
                "seed {s}: C_A(full) differs at {idx:?}"
            );
        }

        let mut rng = SplitMix64::new(900 + s);
        for mask in 1..(1u64 << n) - 1 {
            let alpha = IndexSet::from_mask(n, mask);
            let c = complementary_tensor(&a, &alpha).map_err(err)?;
            for idx in tuples(m, n) {
                let tail_in = idx[1..].iter().all(|&j| alpha.contains(j));
                let diag_out = idx.iter().all(|&j| j == idx[0]) && !alpha.contains(idx[0]);
                let want = if tail_in {
                    -a.get(&idx)
                } else if diag_out {
                    1.0
                } else {
                    0.0
                };
                ensure!(
                    c.get(&idx) == want,
                    "seed {s}, alpha {:?}: entry {idx:?}",
                    alpha.one_based()
                );
            }
            let u: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 2.0)).collect();
            let lhs = c.apply_m1(&u).map_err(err)?;
            for i in 0..n {
                let mut block = 0.0;
                for idx in tuples(m - 1, n) {
                    if idx.iter().all(|&j| alpha.contains(j)) {
                        let mut full = vec![i];
                        full.extend(&idx);
                        block -= a.get(&full) * idx.iter().map(|&j| u[j]).product::<f64>();
                    }
                }
                if !alpha.contains(i) {
                    block += u[i].powi(m as i32 - 1);
                }
                ensure!(
                    (lhs[i] - block).abs() <= 1e-12 * (1.0 + block.abs()),
                    "seed {s}, alpha {:?}: row {i} gives {} vs {block}",
                    alpha.one_based(),
                    lhs[i]
                );
            }
            // the same law through the sub-tensor and off-block helpers
            let ua = alpha.restrict(&u);
            let inner = a
                .principal_subtensor(&alpha)
                .map_err(err)?
                .apply_m1(&ua)
                .map_err(err)?;
            let off = a.apply_off(&alpha, &ua).map_err(err)?;
            for (p, &i) in alpha.members().iter().enumerate() {
                ensure!(
                    (lhs[i] + inner[p]).abs() <= 1e-12 * (1.0 + inner[p].abs()),
                    "alpha block row {i}"
                );
            }
            for (p, &i) in alpha.complement().members().iter().enumerate() {
                let want = -off[p] + u[i].powi(m as i32 - 1);
                ensure!(
                    (lhs[i] - want).abs() <= 1e-12 * (1.0 + want.abs()),
                    "complement block row {i}"
                );
            }
            checked_sets += 1;
        }
    }
    Ok(format!("50 tensors, {checked_sets} proper subsets"))
}

// ═══ 3. Decomposition vs. brute-force lattice ══════════════════════════════

const LATTICE: usize = 2000;

/// Cubic 2-d instance evaluated without the library: `F(x) = A x^2 + q`.
struct Cubic {
    c: [[f64; 3]; 2],
    q: [f64; 2],
}

impl Cubic {
    fn new(a: &Tensor, q: &[f64]) -> Self {
        let mut c = [[0.0; 3]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            row[0] = a.get(&[i, 0, 0]);
            row[1] = a.get(&[i, 0, 1]) + a.get(&[i, 1, 0]);
            row[2] = a.get(&[i, 1, 1]);
        }
        Cubic { c, q: [q[0], q[1]] }
    }

    fn f(&self, x: [f64; 2]) -> [f64; 2] {
        let mono = [x[0] * x[0], x[0] * x[1], x[1] * x[1]];
        let row =
            |i: usize| self.c[i].iter().zip(&mono).map(|(c, m)| c * m).sum::<f64>() + self.q[i];
        [row(0), row(1)]
    }

    fn phi(&self, x: [f64; 2]) -> [f64; 2] {
        let f = self.f(x);
        [x[0].min(f[0]), x[1].min(f[1])]
    }

    fn res(&self, x: [f64; 2]) -> f64 {
        let p = self.phi(x);
        p[0].abs().max(p[1].abs())
    }

    /// Damped Newton on the min-map with a finite-difference Jacobian of the
    /// active pieces.
    fn newton(&self, mut x: [f64; 2]) -> f64 {
        for _ in 0..60 {
            let p = self.phi(x);
            let r = p[0].hypot(p[1]);
            if r < 1e-14 {
                break;
            }
            let f = self.f(x);
            let mut jac = [[0.0; 2]; 2];
            for j in 0..2 {
                let h = 1e-6 * (1.0 + x[j].abs());
                let (mut xp, mut xm) = (x, x);
                xp[j] += h;
                xm[j] -= h;
                let (fp, fm) = (self.f(xp), self.f(xm));
                for i in 0..2 {
                    jac[i][j] = if x[i] <= f[i] {
                        f64::from(i == j)
                    } else {
                        (fp[i] - fm[i]) / (2.0 * h)
                    };
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() < 1e-300 {
                break;
            }
            let d = [
                -(jac[1][1] * p[0] - jac[0][1] * p[1]) / det,
                -(jac[0][0] * p[1] - jac[1][0] * p[0]) / det,
            ];
            let mut t = 1.0;
            loop {
                let y = [x[0] + t * d[0], x[1] + t * d[1]];
                let py = self.phi(y);
                if py[0].hypot(py[1]) < (1.0 - 1e-4 * t) * r {
                    x = y;
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    return self.res(x);
                }
            }
        }
        self.res(x)
    }
}

/// `Some(true)` with a refined solution, `Some(false)` when the lattice stays
/// far from zero everywhere, `None` otherwise.
fn lattice_oracle(p: &Cubic) -> Option<bool> {
    let scale = 1.0 + p.q[0].abs().max(p.q[1].abs());
    let rho: Vec<f64> = (0..LATTICE)
        .map(|i| {
            let r = i as f64 / LATTICE as f64;
            r / (1.0 - r)
        })
        .collect();
    let dirs: Vec<[f64; 2]> = (0..LATTICE)
        .map(|j| {
            if j == LATTICE - 1 {
                [0.0, 1.0]
            } else {
                let t = FRAC_PI_2 * j as f64 / (LATTICE - 1) as f64;
                [t.cos(), t.sin()]
            }
        })
        .collect();
    let point = |i: usize, j: usize| [rho[i] * dirs[j][0], rho[i] * dirs[j][1]];
    let mut grid = vec![0.0; LATTICE * LATTICE];
    for i in 0..LATTICE {
        for j in 0..LATTICE {
            grid[i * LATTICE + j] = p.res(point(i, j));
        }
    }
    let lattice_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut minima = vec![(grid[0], 0usize, 0usize)];
    for i in 1..LATTICE {
        for j in 0..LATTICE {
            let v = grid[i * LATTICE + j];
            let mut is_min = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0)
                        || ni < 1
                        || nj < 0
                        || ni >= LATTICE as i64
                        || nj >= LATTICE as i64
                    {
                        continue;
                    }
                    if grid[ni as usize * LATTICE + nj as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(_, i, j) in minima.iter().take(24) {
        if p.newton(point(i, j)) <= 1e-10 * scale {
            return Some(true);
        }
    }
    if lattice_min > 0.1 * scale {
        Some(false)
    } else {
        None
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let budget = SearchBudget::for_dim(2);
    let rows: Vec<(Membership, Option<bool>)> = (0..200u64)
        .into_par_iter()
        .map(|s| -> Result<_, String> {
            let a = fixtures::random_uniform(3, 2, -2.0, 2.0, 1000 + s);
            let mut rng = SplitMix64::new(5000 + s);
            let q = vec![rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)];
            let lib = q_membership(&a, &q, &budget).map_err(err)?.member;
            Ok((lib, lattice_oracle(&Cubic::new(&a, &q))))
        })
        .collect::<Result<_, _>>()?;
    let (mut unknown, mut lib_unknown, mut members) = (0, 0, 0);
    let mut disagree = Vec::new();
    for (s, (lib, oracle)) in rows.iter().enumerate() {
        lib_unknown += usize::from(*lib == Membership::Unknown);
        match (lib, oracle) {
            (Membership::Unknown, _) | (_, None) => unknown += 1,
            (Membership::Member, Some(true)) => members += 1,
            (Membership::NonMember, Some(false)) => {}
            _ => disagree.push(s),
        }
    }
    let elapsed = start.elapsed();
    let rate = unknown as f64 / rows.len() as f64;
    ensure!(
        disagree.is_empty(),
        "disagreement on instances {disagree:?}"
    );
    ensure!(rate <= 0.10, "unknown rate {rate}");
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!(
        "agreement 100% ({members} members, {} non-members), unknown rate {:.1}% ({lib_unknown} from q_membership), {:.1}s",
        rows.len() - unknown - members,
        100.0 * rate,
        elapsed.as_secs_f64()
    ))
}

// ═══ 4. Solution soundness and homogeneity ═════════════════════════════════

fn independent_residual(a: &Tensor, q: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let m = a.order();
    let mut w = q.to_vec();
    for idx in tuples(m, n) {
        w[idx[0]] += a.get(&idx) * idx[1..].iter().map(|&j| x[j]).product::<f64>();
    }
    let neg = |v: &[f64]| v.iter().map(|t| (-t).max(0.0)).fold(0.0, f64::max);
    let gap: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs();
    neg(x).max(neg(&w)).max(gap)
}

fn criterion_4() -> Outcome {
    let cases: Vec<(&str, Tensor, Vec<f64>)> = vec![
        ("E1", fixtures::e1(), vec![-1.0, -1.0]),
        ("E1", fixtures::e1(), vec![-1.0, 2.0]),
        ("E2", fixtures::e2(), vec![1.0, -1.0]),
        ("E2", fixtures::e2(), vec![-1.0, -1.0]),
        ("E3", fixtures::e3_bar(), vec![-1.0, -1.0]),
        ("E4", fixtures::e4(), vec![-1.0, -1.0]),
        ("E4", fixtures::e4(), vec![-2.0, 1.0]),
        ("identity32", fixtures::identity(3, 2), vec![-1.0, -1.0]),
        (
            "identity33",
            fixtures::identity(3, 3),
            vec![-1.0, 2.0, -3.0],
        ),
        ("identity42", fixtures::identity(4, 2), vec![-8.0, 1.0]),
    ];
    let budget = SearchBudget::for_dim(2);
    let (mut outputs, mut solved) = (0, 0);
    for (name, a, q) in &cases {
        let m = a.order();
        let b = SearchBudget::for_dim(a.dim()).with_seed(budget.seed);
        let base = solve_enumerate(
            &TcpInstance::orthant(a.clone(), q.clone()).map_err(err)?,
            &b,
        )
        .map_err(err)?;
        for s in &base.solutions {
            let r = independent_residual(a, q, &s.x);
            ensure!(r <= 1e-7, "{name} q={q:?}: residual {r} at {:?}", s.x);
            outputs += 1;
        }
        if base.solutions.is_empty() {
            continue;
        }
        solved += 1;
        for t in [0.25, 4.0] {
            let tq: Vec<f64> = q.iter().map(|v| t * v).collect();
            let factor = f64::powf(t, 1.0 / (m as f64 - 1.0));
            for s in &base.solutions {
                let scaled: Vec<f64> = s.x.iter().map(|v| factor * v).collect();
                let r = independent_residual(a, &tq, &scaled);
                ensure!(
                    r <= 1e-8 * (1.0 + t),
                    "{name} t={t}: scaled solution residual {r}"
                );
            }
            let other = solve_enumerate(&TcpInstance::orthant(a.clone(), tq).map_err(err)?, &b)
                .map_err(err)?;
            for s in &other.solutions {
                let r =
                    independent_residual(a, q, &s.x.iter().map(|v| v / factor).collect::<Vec<_>>());
                ensure!(r <= 1e-8, "{name} t={t}: unscaled solution residual {r}");
                outputs += 1;
            }
            if base.solutions.len() <= 4 {
                ensure!(
                    other.solutions.len() == base.solutions.len(),
                    "{name} t={t}: solution counts differ"
                );
                for (x, y) in base.solutions.iter().zip(&other.solutions) {
                    for (u, v) in x.x.iter().zip(&y.x) {
                        ensure!(
                            relative_eq!(factor * u, *v, epsilon = 1e-8, max_relative = 1e-8),
                            "{name} t={t}: {:?} vs {:?}",
                            x.x,
                            y.x
                        );
                    }
                }
            }
        }
    }
    Ok(format!(
        "{outputs} solver outputs, {solved} solved fixture instances"
    ))
}

// ═══ 5. Non-closedness along the E3 sequence ══════════════════════════════

fn criterion_5() -> Outcome {
    let budget = SearchBudget::for_dim(2);
    let report = stability::example3_nonclosedness(100, &budget).map_err(err)?;
    ensure!(report.rows.len() == 100, "row count");
    let bar = fixtures::e3_bar();
    for row in &report.rows {
        let l = row.l as f64;
        let a = fixtures::example3_member(row.l);
        let (a11, a12, a21, a22) = (
            a.get(&[0, 0]),
            a.get(&[0, 1]),
            a.get(&[1, 0]),
            a.get(&[1, 1]),
        );
        let det = a11 * a22 - a12 * a21;
        let x = [(a22 - 2.0 * a12) / det, (2.0 * a11 - a21) / det];
        ensure!(
            (x[0] - (2.0 + 2.0 * l)).abs() <= 1e-10 * l && (x[1] - l).abs() <= 1e-10 * l,
            "l={l}: x = {x:?}"
        );
        ensure!(
            dist(&row.image, &[1.0, 2.0]) <= 1e-10,
            "l={l}: image {:?}",
            row.image
        );
        let mut fro = 0.0f64;
        for idx in tuples(2, 2) {
            fro += (a.get(&idx) - bar.get(&idx)).powi(2);
        }
        ensure!(
            (fro.sqrt() - 1.0 / l).abs() <= 1e-15,
            "l={l}: independent distance {}",
            fro.sqrt()
        );
        ensure!(
            (row.frobenius_distance - 1.0 / l).abs() <= 1e-15,
            "l={l}: distance {}",
            row.frobenius_distance
        );
    }
    let v = tpos_contains(&PolyhedralCone::orthant(2), &bar, &[1.0, 2.0], &budget).map_err(err)?;
    ensure!(v.fails(), "(1,2) should lie outside Tpos of the limit");
    let expected = (0.1f64).sqrt();
    ensure!(v.certificate >= 0.3, "certificate {}", v.certificate);
    ensure!(
        (v.certificate - expected).abs() <= 1e-9,
        "certificate {} vs {expected}",
        v.certificate
    );
    Ok(format!("separation {:.6}", v.certificate))
}

// ═══ 6. Jacobian ═══════════════════════════════════════════════════════════

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for s in 0..100u64 {
        let m = [2, 3, 4][s as usize % 3];
        let n = [2, 3][(s as usize / 3) % 2];
        let a = fixtures::random_tensor(RandomKind::SubSymmetric, m, n, 300 + s);
        let mut rng = SplitMix64::new(400 + s);
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let jac = a.apply_m2(&x).map_err(err)? * (m as f64 - 1.0);
        let h = 1e-5;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in 0..n {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (a.apply_m1(&xp).map_err(err)?, a.apply_m1(&xm).map_err(err)?);
            for i in 0..n {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                num += (fd - jac[(i, j)]).powi(2);
                den += jac[(i, j)].powi(2);
            }
        }
        let rel = num.sqrt() / den.sqrt().max(1e-12);
        worst = worst.max(rel);
        ensure!(rel <= 1e-5, "seed {s} (m={m}, n={n}): relative error {rel}");
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

// ═══ 7. Stability suite ════════════════════════════════════════════════════

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let inst = TcpInstance::orthant(fixtures::identity(3, 2), vec![-1.0, -1.0]).map_err(err)?;
    let xbar = [1.0, 1.0];
    let b = SearchBudget::for_dim(2);
    let cert = stability::local_uniqueness_certificate(&inst, &xbar, &b).map_err(err)?;
    ensure!(
        cert.holds() && cert.certificate >= 0.9,
        "uniqueness certificate {}",
        cert.certificate
    );
    let ex = stability::perturb_existence(&inst, Some(&xbar), 1e-3, 50, 11, &b).map_err(err)?;
    ensure!(
        ex.solvable_fraction == 1.0,
        "solvable fraction {}",
        ex.solvable_fraction
    );
    let eb3 = stability::error_bound_probe(&inst, &xbar, 0.1, 1e-3, 50, 12, &b).map_err(err)?;
    let eb4 = stability::error_bound_probe(&inst, &xbar, 0.1, 1e-4, 50, 12, &b).map_err(err)?;
    let (r3, r4) = (eb3.error_ratio_max, eb4.error_ratio_max);
    ensure!(r3 > 0.0 && r4 > 0.0, "error ratios {r3}, {r4}");
    ensure!(r3 <= 5.0 && r4 <= 5.0, "error ratios {r3}, {r4}");
    ensure!(
        r3.max(r4) <= 2.0 * r3.min(r4),
        "error ratios {r3}, {r4} not within 2x"
    );
    let usc = stability::usc_probe(&inst, 1e-3, 50, 13, &b).map_err(err)?;
    ensure!(
        usc.max_excursion <= 0.01,
        "max excursion {}",
        usc.max_excursion
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "certificate {:.3}, error ratios {r3:.3}/{r4:.3}, excursion {:.2e}, {:.2}s",
        cert.certificate,
        usc.max_excursion,
        elapsed.as_secs_f64()
    ))
}

// ═══ 8. Cone metric ════════════════════════════════════════════════════════

fn criterion_8() -> Outcome {
    let gen = |d: usize, g: &[&[f64]]| {
        PolyhedralCone::from_generators(d, g.iter().map(|v| v.to_vec()).collect())
    };
    let ray = |v: &[f64]| PolyhedralCone::ray(v.to_vec());
    let cones2 = [
        PolyhedralCone::orthant(2),
        ray(&[1.0, 0.0]).map_err(err)?,
        ray(&[1.0, 1.0]).map_err(err)?,
        gen(2, &[&[1.0, 0.0], &[1.0, 1.0]]).map_err(err)?,
        gen(2, &[&[1.0, 1.0], &[-1.0, 2.0]]).map_err(err)?,
    ];
    let cones3 = [
        PolyhedralCone::orthant(3),
        ray(&[1.0, 1.0, 1.0]).map_err(err)?,
        gen(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0, 1.0]]).map_err(err)?,
        gen(3, &[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0]]).map_err(err)?,
    ];
    for k in cones2.iter().chain(&cones3) {
        ensure!(
            delta_metric(k, k, 10_000).map_err(err)?.value == 0.0,
            "delta(K, K) nonzero"
        );
    }
    let d = delta_metric(&cones2[1], &cones2[0], 10_000)
        .map_err(err)?
        .value;
    ensure!((d - 1.0).abs() <= 0.02, "delta(ray, orthant) = {d}");

    let pairs: Vec<(&PolyhedralCone, &PolyhedralCone)> = vec![
        (&cones2[0], &cones2[1]),
        (&cones2[0], &cones2[2]),
        (&cones2[0], &cones2[3]),
        (&cones2[1], &cones2[4]),
        (&cones2[3], &cones2[4]),
        (&cones2[2], &cones2[3]),
        (&cones3[0], &cones3[1]),
        (&cones3[0], &cones3[2]),
        (&cones3[0], &cones3[3]),
        (&cones3[2], &cones3[3]),
    ];
    let mut worst = 0.0f64;
    for (k1, k2) in pairs {
        let primal = delta_metric(k1, k2, 10_000).map_err(err)?.value;
        let dual = delta_metric(&k1.dual(), &k2.dual(), 10_000)
            .map_err(err)?
            .value;
        worst = worst.max((primal - dual).abs());
        ensure!(
            (primal - dual).abs() <= 0.05,
            "isometry gap {primal} vs {dual}"
        );
    }
    Ok(format!(
        "delta(ray, orthant) = {d:.4}, worst isometry gap {worst:.4}"
    ))
}

// ═══ 9. CLI determinism ════════════════════════════════════════════════════

fn run_cli(args: &[&str], threads: &str) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tcpkit"))
        .args(args)
        .env("TCPKIT_THREADS", threads)
        .output()
        .map_err(err)?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_9() -> Outcome {
    let commands: &[&[&str]] = &[
        &["classify", "--fixture", "E4", "--principal", "--seed", "3"],
        &["classify", "--fixture", "E1", "--cone", "ray11", "--pretty"],
        &["solve", "--fixture", "E1", "--q=1,-1"],
        &[
            "solve",
            "--fixture",
            "E3",
            "--q=-1,-1",
            "--all",
            "--seed",
            "9",
        ],
        &["membership", "--fixture", "E4", "--q=-1,-1"],
        &[
            "perturb",
            "existence",
            "--fixture",
            "identity32",
            "--q=-1,-1",
            "--xbar",
            "1,1",
            "--trials",
            "8",
            "--seed",
            "5",
        ],
        &[
            "perturb",
            "error-bound",
            "--fixture",
            "identity32",
            "--q=-1,-1",
            "--xbar",
            "1,1",
            "--trials",
            "8",
            "--seed",
            "5",
        ],
        &[
            "perturb",
            "uniqueness",
            "--fixture",
            "identity32",
            "--q=-1,-1",
            "--xbar",
            "1,1",
        ],
        &[
            "perturb",
            "usc",
            "--fixture",
            "identity32",
            "--q=-1,-1",
            "--trials",
            "8",
            "--seed",
            "5",
        ],
        &[
            "perturb",
            "unsolvable",
            "--fixture",
            "negidentity32",
            "--q=-1,-1",
            "--trials",
            "8",
            "--seed",
            "5",
        ],
        &[
            "perturb",
            "openness",
            "--fixture",
            "identity32",
            "--trials",
            "8",
            "--seed",
            "5",
        ],
        &["perturb", "example3", "--lmax", "10"],
        &[
            "distance",
            "--cone1",
            "orthant3",
            "--cone2",
            "ray111",
            "--samples",
            "500",
        ],
        &[
            "fixtures",
            "--random",
            "subsymmetric",
            "--order",
            "4",
            "--dim",
            "3",
            "--seed",
            "21",
        ],
        &["fixtures"],
    ];
    for args in commands {
        let (c1, o1) = run_cli(args, "1")?;
        let (c2, o2) = run_cli(args, "1")?;
        let (c3, o3) = run_cli(args, "4")?;
        ensure!(c1 == 0, "{args:?} exited with {c1}");
        ensure!(!o1.is_empty(), "{args:?} printed nothing");
        ensure!(
            c1 == c2 && o1 == o2,
            "{args:?} differs between repeated runs"
        );
        ensure!(
            c1 == c3 && o1 == o3,
            "{args:?} differs between thread counts"
        );
    }
    Ok(format!(
        "{} commands, byte-identical across runs and thread counts",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("example-fixture classification", criterion_1),
        ("complementary-tensor identities", criterion_2),
        ("decomposition equivalence", criterion_3),
        ("solution soundness and homogeneity", criterion_4),
        ("E3 sequence non-closedness", criterion_5),
        ("jacobian check", criterion_6),
        ("stability suite", criterion_7),
        ("cone metric", criterion_8),
        ("determinism", criterion_9),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("{label}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("{label}: FAIL ({why})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
