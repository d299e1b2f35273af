//! `tcpkit`: classify tensors, solve and probe tensor complementarity
//! problems from the command line. Reports are JSON on stdout; `--pretty`
//! switches to an indented plain-text layout.

mod pretty;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tcpkit::classify::{self, SearchBudget};
use tcpkit::complementary::{q_membership, Membership};
use tcpkit::fixtures::{self, RandomKind};
use tcpkit::solver::{self, TcpInstance};
use tcpkit::{io, stability, PolyhedralCone, TcpError, Tensor};

#[derive(Parser)]
#[command(
    name = "tcpkit",
    version,
    about = "Tensor complementarity problems over polyhedral cones"
)]
struct Cli {
    /// Plain-text report instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct TensorSource {
    /// Named fixture: E1..E4, identity<m><n>, negidentity<m><n>, example3_l<l>.
    #[arg(long, conflicts_with = "tensor")]
    fixture: Option<String>,
    /// Tensor JSON file.
    #[arg(long)]
    tensor: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lattice resolution; defaults depend on the dimension.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 200)]
    polish_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
}

impl BudgetArgs {
    fn budget(&self, n: usize) -> SearchBudget {
        let mut b = SearchBudget::for_dim(n);
        if let Some(r) = self.resolution {
            b.grid_resolution = r;
        }
        b.multistarts = self.starts;
        b.polish_iters = self.polish_iters;
        b.margin = self.margin;
        b.seed = self.seed;
        b
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every classifier on a tensor.
    Classify {
        #[command(flatten)]
        src: TensorSource,
        /// orthant<n>, ray<digits> or a cone JSON file; defaults to the orthant.
        #[arg(long)]
        cone: Option<String>,
        /// Also sweep all principal sub-tensors for nonsingularity.
        #[arg(long)]
        principal: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Enumerate solutions of an orthant instance.
    Solve {
        /// Instance JSON file.
        #[arg(long, conflicts_with_all = ["fixture", "tensor"])]
        instance: Option<PathBuf>,
        #[command(flatten)]
        src: TensorSource,
        /// Comma-separated right-hand side, e.g. --q=-1,-1.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        /// Verification tolerance for reported solutions.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// List every solution found instead of the first.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Decide whether the problem is solvable for q.
    Membership {
        #[command(flatten)]
        src: TensorSource,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Stability probes.
    Perturb {
        #[command(subcommand)]
        probe: Probe,
    },
    /// Estimate the metric between two cones.
    Distance {
        #[arg(long)]
        cone1: String,
        #[arg(long)]
        cone2: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// List fixtures or print one as tensor JSON.
    Fixtures {
        #[arg(long, conflicts_with = "random")]
        name: Option<String>,
        #[arg(long, value_enum)]
        random: Option<Kind>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct ProbeArgs {
    #[command(flatten)]
    src: TensorSource,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Subcommand)]
enum Probe {
    /// Solvability under copositivity-preserving perturbations.
    Existence {
        #[command(flatten)]
        args: ProbeArgs,
        #[arg(long, allow_hyphen_values = true)]
        xbar: Option<String>,
    },
    /// Error-bound constant around an isolated solution.
    ErrorBound {
        #[command(flatten)]
        args: ProbeArgs,
        #[arg(long, allow_hyphen_values = true)]
        xbar: String,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
    },
    /// Second-order local uniqueness certificate.
    Uniqueness {
        #[command(flatten)]
        args: ProbeArgs,
        #[arg(long, allow_hyphen_values = true)]
        xbar: String,
    },
    /// Excursion of perturbed solution sets from the base set.
    Usc {
        #[command(flatten)]
        args: ProbeArgs,
    },
    /// Persistence of unsolvability under perturbations of q.
    Unsolvable {
        #[command(flatten)]
        args: ProbeArgs,
    },
    /// Persistence of nonsingularity under perturbations of the tensor.
    Openness {
        #[command(flatten)]
        args: ProbeArgs,
        #[arg(long)]
        cone: Option<String>,
    },
    /// Image of the matrix sequence converging to E3, and its non-closed limit.
    Example3 {
        #[arg(long, default_value_t = 100)]
        lmax: u32,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    General,
    Symmetric,
    Subsymmetric,
    Copositive,
}

enum Failure {
    Parse(String),
    Unknown(Value),
    Op(u8, String),
}

type Outcome = Result<Value, Failure>;

fn parse_err(e: impl std::fmt::Display) -> Failure {
    Failure::Parse(e.to_string())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_tensor(src: &TensorSource) -> Result<(Tensor, String), Failure> {
    match (&src.fixture, &src.tensor) {
        (Some(name), _) => fixtures::by_name(name)
            .map(|t| (t, name.clone()))
            .ok_or_else(|| {
                Failure::Parse(format!(
                    "unknown fixture {name:?}; known: {}",
                    fixtures::NAMES.join(", ")
                ))
            }),
        (None, Some(path)) => {
            let t = io::tensor_from_json(&read(path)?)
                .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
            Ok((t, path.display().to_string()))
        }
        (None, None) => Err(Failure::Parse(
            "one of --fixture or --tensor is required".into(),
        )),
    }
}

fn parse_vector(text: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Failure::Parse(format!("bad number {s:?} in {text:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(Failure::Parse(format!(
            "expected {n} components, got {} in {text:?}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Parse(format!("non-finite component in {text:?}")));
    }
    Ok(v)
}

fn parse_cone(arg: &str) -> Result<PolyhedralCone, Failure> {
    if let Some(n) = arg.strip_prefix("orthant") {
        let n: usize = n
            .parse()
            .map_err(|_| Failure::Parse(format!("bad cone {arg:?}")))?;
        if n == 0 {
            return Err(Failure::Parse("orthant dimension must be positive".into()));
        }
        return Ok(PolyhedralCone::orthant(n));
    }
    if let Some(d) = arg.strip_prefix("ray") {
        if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
            let v: Vec<f64> = d.bytes().map(|b| (b - b'0') as f64).collect();
            return PolyhedralCone::ray(v).map_err(parse_err);
        }
    }
    let text =
        std::fs::read_to_string(arg).map_err(|e| Failure::Parse(format!("cone {arg:?}: {e}")))?;
    io::cone_from_json(&text).map_err(|e| Failure::Parse(format!("{arg}: {e}")))
}

fn value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn budget_value(b: &SearchBudget) -> Value {
    value(b)
}

fn classify_cmd(
    src: &TensorSource,
    cone: Option<&str>,
    principal: bool,
    ba: &BudgetArgs,
) -> Outcome {
    let (a, name) = load_tensor(src)?;
    let k = match cone {
        Some(s) => parse_cone(s)?,
        None => PolyhedralCone::orthant(a.dim()),
    };
    let b = ba.budget(a.dim());
    b.validate().map_err(parse_err)?;
    let run = || -> tcpkit::Result<Value> {
        let verdicts = vec![
            classify::is_K_psd(&a, &k, &b)?,
            classify::is_K_pd(&a, &k, &b)?,
            classify::is_K_regular(&a, &k, &b)?,
            classify::is_K_nonsingular(&a, &k, &b)?,
        ];
        let mut out = json!({
            "command": "classify",
            "tensor": name,
            "cone": serde_json::from_str::<Value>(&io::cone_to_json(&k, false)).expect("valid json"),
            "budget": budget_value(&b),
            "verdicts": value(&verdicts),
        });
        if principal {
            let sweep = classify::all_principal_nonsingular(&a, &b)?;
            let table: Vec<Value> = sweep
                .table
                .iter()
                .map(|(alpha, v)| json!({"alpha": alpha.one_based(), "status": v.status, "certificate": v.certificate}))
                .collect();
            out["principal"] = json!({"verdict": value(&sweep.verdict), "table": table});
        }
        Ok(out)
    };
    run().map_err(parse_err)
}

fn solve_cmd(
    instance: Option<&PathBuf>,
    src: &TensorSource,
    q: Option<&str>,
    tol: f64,
    all: bool,
    ba: &BudgetArgs,
) -> Outcome {
    let (inst, source) = match instance {
        Some(path) => {
            let i = io::instance_from_json(&read(path)?)
                .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
            (i, path.display().to_string())
        }
        None => {
            let (a, name) = load_tensor(src)?;
            let q = parse_vector(
                q.ok_or_else(|| Failure::Parse("--q is required with a tensor".into()))?,
                a.dim(),
            )?;
            (TcpInstance::orthant(a, q).map_err(parse_err)?, name)
        }
    };
    let b = ba.budget(inst.dim());
    b.validate().map_err(parse_err)?;
    let e = solver::solve_enumerate(&inst, &b).map_err(|e| Failure::Op(4, e.to_string()))?;
    let sols: Vec<_> = e
        .solutions
        .into_iter()
        .filter(|s| solver::is_solution(&inst, &s.x, tol))
        .collect();
    let count = sols.len();
    let shown: Vec<_> = if all {
        sols
    } else {
        sols.into_iter().take(1).collect()
    };
    let (member, message) = if count > 0 {
        (json!(true), format!("{count} solution(s) found"))
    } else if e.unknown {
        (
            json!("unknown"),
            "no solution found; some supports were inconclusive".to_string(),
        )
    } else {
        (
            json!(false),
            "no solution (certified at grid resolution)".to_string(),
        )
    };
    let out = json!({
        "command": "solve",
        "source": source,
        "q": inst.q,
        "tol": tol,
        "all": all,
        "budget": budget_value(&b),
        "member": member,
        "message": message,
        "count": count,
        "solutions": value(&shown),
        "inconclusive": e.inconclusive.iter().map(|a| a.one_based()).collect::<Vec<_>>(),
    });
    if count == 0 && e.unknown {
        Err(Failure::Unknown(out))
    } else {
        Ok(out)
    }
}

fn membership_cmd(src: &TensorSource, q: &str, ba: &BudgetArgs) -> Outcome {
    let (a, name) = load_tensor(src)?;
    let q = parse_vector(q, a.dim())?;
    let b = ba.budget(a.dim());
    b.validate().map_err(parse_err)?;
    let r = q_membership(&a, &q, &b).map_err(|e| Failure::Op(4, e.to_string()))?;
    let x = if r.member == Membership::Member {
        Some(
            tcpkit::complementary::solution_from_membership(&r, &a, &q)
                .map_err(|e| Failure::Op(4, e.to_string()))?,
        )
    } else {
        None
    };
    Ok(json!({
        "command": "membership",
        "tensor": name,
        "q": q,
        "budget": budget_value(&b),
        "result": value(&r),
        "x": x,
    }))
}

/// Tensor, its display name, optional `q` and the budget shared by every probe.
type ProbeSetup = (Tensor, String, Option<Vec<f64>>, SearchBudget);

fn probe_cmd(probe: &Probe) -> Outcome {
    let op = |e: TcpError| Failure::Op(5, e.to_string());
    let setup = |args: &ProbeArgs| -> Result<ProbeSetup, Failure> {
        let (a, name) = load_tensor(&args.src)?;
        let q = args
            .q
            .as_deref()
            .map(|q| parse_vector(q, a.dim()))
            .transpose()?;
        if !(args.eps >= 0.0 && args.eps.is_finite()) {
            return Err(Failure::Parse(format!(
                "eps must be a nonnegative number, got {}",
                args.eps
            )));
        }
        let b = args.budget.budget(a.dim());
        b.validate().map_err(parse_err)?;
        Ok((a, name, q, b))
    };
    let need_q = |q: Option<Vec<f64>>| {
        q.ok_or_else(|| Failure::Parse("--q is required for this probe".into()))
    };
    let config =
        |probe: &str, args: &ProbeArgs, name: &str, q: &Option<Vec<f64>>, b: &SearchBudget| {
            json!({
                "probe": probe,
                "tensor": name,
                "q": q,
                "eps": args.eps,
                "trials": args.trials,
                "seed": args.budget.seed,
                "budget": budget_value(b),
            })
        };
    let (cfg, report) = match probe {
        Probe::Existence { args, xbar } => {
            let (a, name, q, b) = setup(args)?;
            let cfg = config("existence", args, &name, &q, &b);
            let inst = TcpInstance::orthant(a, need_q(q)?).map_err(parse_err)?;
            let xb = xbar
                .as_deref()
                .map(|x| parse_vector(x, inst.dim()))
                .transpose()?;
            let r = stability::perturb_existence(
                &inst,
                xb.as_deref(),
                args.eps,
                args.trials,
                b.seed,
                &b,
            )
            .map_err(op)?;
            (cfg, value(&r))
        }
        Probe::ErrorBound { args, xbar, radius } => {
            let (a, name, q, b) = setup(args)?;
            let mut cfg = config("error-bound", args, &name, &q, &b);
            cfg["radius"] = json!(radius);
            let inst = TcpInstance::orthant(a, need_q(q)?).map_err(parse_err)?;
            let xb = parse_vector(xbar, inst.dim())?;
            cfg["xbar"] = json!(xb);
            let r = stability::error_bound_probe(
                &inst,
                &xb,
                *radius,
                args.eps,
                args.trials,
                b.seed,
                &b,
            )
            .map_err(op)?;
            (cfg, value(&r))
        }
        Probe::Uniqueness { args, xbar } => {
            let (a, name, q, b) = setup(args)?;
            let mut cfg = config("uniqueness", args, &name, &q, &b);
            let inst = TcpInstance::orthant(a, need_q(q)?).map_err(parse_err)?;
            let xb = parse_vector(xbar, inst.dim())?;
            cfg["xbar"] = json!(xb);
            let r = stability::local_uniqueness_certificate(&inst, &xb, &b).map_err(op)?;
            (cfg, value(&r))
        }
        Probe::Usc { args } => {
            let (a, name, q, b) = setup(args)?;
            let cfg = config("usc", args, &name, &q, &b);
            let inst = TcpInstance::orthant(a, need_q(q)?).map_err(parse_err)?;
            let r = stability::usc_probe(&inst, args.eps, args.trials, b.seed, &b).map_err(op)?;
            (cfg, value(&r))
        }
        Probe::Unsolvable { args } => {
            let (a, name, q, b) = setup(args)?;
            let cfg = config("unsolvable", args, &name, &q, &b);
            let q = need_q(q)?;
            let r =
                stability::unsolvable_neighborhood_probe(&a, &q, args.eps, args.trials, b.seed, &b)
                    .map_err(op)?;
            (cfg, value(&r))
        }
        Probe::Openness { args, cone } => {
            let (a, name, q, b) = setup(args)?;
            let mut cfg = config("openness", args, &name, &q, &b);
            let k = match cone {
                Some(s) => parse_cone(s)?,
                None => PolyhedralCone::orthant(a.dim()),
            };
            cfg["cone"] = serde_json::from_str(&io::cone_to_json(&k, false)).expect("valid json");
            let r =
                stability::nonsingularity_openness_probe(&k, &a, args.eps, args.trials, b.seed, &b)
                    .map_err(op)?;
            (cfg, value(&r))
        }
        Probe::Example3 { lmax, budget } => {
            let b = budget.budget(2);
            b.validate().map_err(parse_err)?;
            let r = stability::example3_nonclosedness(*lmax, &b).map_err(op)?;
            (
                json!({"probe": "example3", "lmax": lmax, "budget": budget_value(&b)}),
                value(&r),
            )
        }
    };
    Ok(json!({"command": "perturb", "config": cfg, "report": report}))
}

fn distance_cmd(c1: &str, c2: &str, samples: usize) -> Outcome {
    let k1 = parse_cone(c1)?;
    let k2 = parse_cone(c2)?;
    let m = tcpkit::delta_metric(&k1, &k2, samples).map_err(|e| Failure::Op(6, e.to_string()))?;
    Ok(json!({
        "command": "distance",
        "cone1": c1,
        "cone2": c2,
        "samples": samples,
        "delta": m.value,
        "points_used": m.samples,
    }))
}

fn fixtures_cmd(
    name: Option<&str>,
    random: Option<Kind>,
    order: usize,
    dim: usize,
    seed: u64,
) -> Outcome {
    let tensor_value = |t: &Tensor| {
        serde_json::from_str::<Value>(&io::tensor_to_json(t, false)).expect("valid json")
    };
    if let Some(n) = name {
        let t =
            fixtures::by_name(n).ok_or_else(|| Failure::Parse(format!("unknown fixture {n:?}")))?;
        return Ok(tensor_value(&t));
    }
    if let Some(kind) = random {
        if order < 2 || dim < 1 || dim.checked_pow(order as u32).is_none_or(|s| s > 1 << 20) {
            return Err(Failure::Parse(format!(
                "unsupported shape order {order}, dim {dim}"
            )));
        }
        let kind = match kind {
            Kind::General => RandomKind::General,
            Kind::Symmetric => RandomKind::Symmetric,
            Kind::Subsymmetric => RandomKind::SubSymmetric,
            Kind::Copositive => RandomKind::CopositiveShifted,
        };
        return Ok(tensor_value(&fixtures::random_tensor(
            kind, order, dim, seed,
        )));
    }
    Ok(json!({"command": "fixtures", "names": fixtures::NAMES}))
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("TCPKIT_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Parse(format!(
                "TCPKIT_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(parse_err)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    match &cli.cmd {
        Cmd::Classify {
            src,
            cone,
            principal,
            budget,
        } => classify_cmd(src, cone.as_deref(), *principal, budget),
        Cmd::Solve {
            instance,
            src,
            q,
            tol,
            all,
            budget,
        } => solve_cmd(instance.as_ref(), src, q.as_deref(), *tol, *all, budget),
        Cmd::Membership { src, q, budget } => membership_cmd(src, q, budget),
        Cmd::Perturb { probe } => probe_cmd(probe),
        Cmd::Distance {
            cone1,
            cone2,
            samples,
        } => distance_cmd(cone1, cone2, *samples),
        Cmd::Fixtures {
            name,
            random,
            order,
            dim,
            seed,
        } => fixtures_cmd(name.as_deref(), *random, *order, *dim, *seed),
    }
}

fn emit(v: &Value, pretty: bool) {
    if pretty {
        print!("{}", pretty::render(v));
    } else {
        println!("{}", serde_json::to_string(v).expect("values serialize"));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            emit(&v, cli.pretty);
            ExitCode::SUCCESS
        }
        Err(Failure::Unknown(v)) => {
            emit(&v, cli.pretty);
            ExitCode::from(3)
        }
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Op(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
