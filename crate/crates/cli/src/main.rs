//! `prs`: command-line front end for the regularized-subproblem solvers.

mod instance_file;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use prs_core::constrained::solve_constrained_with;
use prs_core::global::{
    check_sign_structure_with, solve_global_convex_oracle, solve_global_with, GlobalSet,
    GlobalSolution,
};
use prs_core::local::{
    check_local_sign_structure, enumerate_critical_points_p4, solve_local_nonglobal_with,
    CriticalKind,
};
use prs_core::spectra::decompose_with;
use prs_core::{kdsp_brute, kdsp_reduce, PrsError, PrsInstance, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use instance_file::{InputError, InstanceFile};
use output::{render, Record, Value};

#[derive(Debug, Parser)]
#[command(name = "prs", version, about = "Global and local minimizers of ½xᵀHx + cᵀx + (σ/p)‖x‖ᵖ")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Secular root acceptance |h(t)| ≤ tol·(1+t).
    #[arg(long, global = true, default_value_t = Tolerances::default().root)]
    tol_root: f64,
    /// Positive-semidefiniteness slack, relative to the spectral scale.
    #[arg(long, global = true, default_value_t = Tolerances::default().psd)]
    tol_psd: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complete set of global minimizers.
    Global { file: String },
    /// The local-nonglobal minimizer, if any.
    Local { file: String },
    /// Every critical point of a quartic (p = 4) instance, classified.
    AllCritical { file: String },
    /// Global minimizer of a quartic instance under its slab constraints.
    Constrained { file: String },
    /// Reduce a k-dispersion-sum instance and solve it.
    Kdsp {
        file: String,
        /// Penalty weight; defaults to 8k²·max|D| + 1.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Run the certificate checks and report each one.
    Verify {
        file: String,
        /// Seed for the random sampling probe.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Input(InputError),
    Solver(PrsError),
    /// Ran to completion but a check failed; the record was printed.
    Checks,
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<PrsError> for Failure {
    fn from(e: PrsError) -> Self {
        Failure::Solver(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerances {
        root: cli.tol.tol_root,
        psd: cli.tol.tol_psd,
        ..Tolerances::default()
    };
    match run(&cli.command, &tol) {
        Ok(record) => {
            print!("{}", render(&record));
            ExitCode::SUCCESS
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            let record = Record::new()
                .field("status", Value::str("error"))
                .field("error", Value::str(e.to_string()))
                .build();
            print!("{}", render(&record));
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Checks) => ExitCode::from(1),
    }
}

fn run(command: &Command, tol: &Tolerances) -> Result<Value, Failure> {
    match command {
        Command::Global { file } => {
            let inst = InstanceFile::read(file)?.instance()?;
            let sol = solve_global_with(&inst, tol)?;
            Ok(global_record(&inst, &sol, tol))
        }
        Command::Local { file } => {
            let inst = InstanceFile::read(file)?.instance()?;
            let local = solve_local_nonglobal_with(&inst, tol)?;
            let mut r = Record::new()
                .field("status", Value::str("ok"))
                .field("command", Value::str("local"));
            match &local.minimizer {
                Some(m) => {
                    r.push("variant", Value::str("local-nonglobal"));
                    r.push("point", Value::vector(&m.point));
                    r.push("t_star", Value::Num(m.t_val));
                    r.push("value", Value::Num(m.value));
                    r.push(
                        "certificates",
                        Record::new()
                            .field("hessian_min_eigenvalue", Value::Num(m.hess_min_eig))
                            .field("stationarity", Value::Num(inst.gradient(&m.point).norm()))
                            .build(),
                    );
                }
                None => {
                    r.push("variant", Value::str("none"));
                    r.push("reason", Value::str(local.verdict.reason()));
                }
            }
            Ok(r.build())
        }
        Command::AllCritical { file } => {
            let inst = InstanceFile::read(file)?.instance()?;
            let points = enumerate_critical_points_p4(&inst)?;
            let list = points
                .iter()
                .map(|p| {
                    Record::new()
                        .field(
                            "kind",
                            Value::str(match p.kind {
                                CriticalKind::LocalMin => "local_min",
                                CriticalKind::Saddle => "saddle",
                            }),
                        )
                        .field("point", Value::vector(&p.point))
                        .field("t", Value::Num(p.t))
                        .field("value", Value::Num(p.value))
                        .field("h_prime", Value::Num(p.h_prime))
                        .field("hessian_min_eigenvalue", Value::Num(p.hess_min_eig))
                        .build()
                })
                .collect();
            Ok(Record::new()
                .field("status", Value::str("ok"))
                .field("command", Value::str("all-critical"))
                .field("variant", Value::str("critical-points"))
                .field("points", Value::List(list))
                .build())
        }
        Command::Constrained { file } => {
            let f = InstanceFile::read(file)?;
            let inst = f.instance()?;
            let cons = f
                .constraints(inst.dim())?
                .ok_or_else(|| InputError::Schema("`constrained` needs a constraints section".into()))?;
            let sol = solve_constrained_with(&inst, &cons, tol)?;
            Ok(Record::new()
                .field("status", Value::str("ok"))
                .field("command", Value::str("constrained"))
                .field("variant", Value::str("point"))
                .field("point", Value::vector(&sol.point))
                .field("value", Value::Num(sol.value))
                .field("facet_trace", trace_value(&sol.facet_trace))
                .field("subproblems", Value::Int(sol.subproblems as i64))
                .field(
                    "certificates",
                    Record::new()
                        .field("max_violation", Value::Num(cons.max_violation(&sol.point)))
                        .build(),
                )
                .build())
        }
        Command::Kdsp { file, theta } => {
            let kd = InstanceFile::read(file)?.kdsp()?;
            let theta = theta.unwrap_or_else(|| kd.default_theta());
            let red = kdsp_reduce(&kd, theta)?;
            let sol = solve_constrained_with(&red.instance, &red.constraints, tol)?;
            let mut r = Record::new()
                .field("status", Value::str("ok"))
                .field("command", Value::str("kdsp"))
                .field("theta", Value::Num(theta))
                .field("linear_weight", Value::Num(red.linear))
                .field("d_star", Value::Num(sol.value + red.constant))
                .field("point", Value::vector(&sol.point))
                .field("facet_trace", trace_value(&sol.facet_trace));
            if let Ok(brute) = kdsp_brute(&kd) {
                r.push("d_star_enumerated", Value::Num(brute));
            }
            Ok(r.build())
        }
        Command::Verify { file, seed } => verify(&InstanceFile::read(file)?, tol, *seed),
    }
}

fn trace_value(trace: &[(usize, prs_core::FacetSide)]) -> Value {
    Value::List(
        trace
            .iter()
            .map(|(i, side)| {
                Record::new()
                    .field("index", Value::Int(*i as i64))
                    .field("side", Value::str(side.as_str()))
                    .build()
            })
            .collect(),
    )
}

fn global_record(inst: &PrsInstance, sol: &GlobalSolution, tol: &Tolerances) -> Value {
    let rep = sol.representative();
    let mut r = Record::new()
        .field("status", Value::str("ok"))
        .field("command", Value::str("global"));
    match &sol.set {
        GlobalSet::Point(x) => {
            r.push("variant", Value::str("point"));
            r.push("point", Value::vector(x));
        }
        GlobalSet::Sphere {
            center,
            radius,
            basis,
        } => {
            r.push("variant", Value::str("sphere"));
            r.push("point", Value::vector(&rep));
            r.push("center", Value::vector(center));
            r.push("radius", Value::Num(*radius));
            r.push("basis", Value::matrix(basis));
        }
    }
    r.push("t_star", Value::Num(sol.t_star));
    r.push("value", Value::Num(sol.value));
    let scale = inst.h().clone().symmetric_eigenvalues().amax().max(1.0);
    r.push(
        "certificates",
        Record::new()
            .field("stationarity", Value::Num(inst.gradient(&rep).norm()))
            .field(
                "stationarity_bound",
                Value::Num(tol.kkt * (1.0 + inst.c().norm())),
            )
            .field("min_shifted_eigenvalue", Value::Num(inst.shifted_min_eigenvalue(&rep)))
            .field("psd_bound", Value::Num(-tol.psd * scale))
            .build(),
    );
    r.build()
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

const VERIFY_SAMPLES: usize = 10_000;

fn verify(file: &InstanceFile, tol: &Tolerances, seed: u64) -> Result<Value, Failure> {
    let mut checks: Vec<Check> = Vec::new();
    if file.kdsp.is_some() {
        let kd = file.kdsp()?;
        let red = kdsp_reduce(&kd, kd.default_theta())?;
        let sol = solve_constrained_with(&red.instance, &red.constraints, tol)?;
        let d_star = sol.value + red.constant;
        let brute = kdsp_brute(&kd)?;
        checks.push(Check {
            name: "kdsp_reduction",
            pass: (d_star - brute).abs() <= 1e-5,
            detail: format!("reduced {d_star:.10e}, enumerated {brute:.10e}"),
        });
        checks.push(Check {
            name: "feasibility",
            pass: red.constraints.is_feasible(&sol.point),
            detail: format!("max violation {:.3e}", red.constraints.max_violation(&sol.point)),
        });
        return finish(checks);
    }

    let inst = file.instance()?;
    let spec = decompose_with(&inst, tol)?;
    let sol = solve_global_with(&inst, tol)?;
    let x = sol.representative();
    let scale = spec.scale();

    let residual = inst.gradient(&x).norm();
    let bound = tol.kkt * (1.0 + inst.c().norm());
    checks.push(Check {
        name: "stationarity",
        pass: residual <= bound,
        detail: format!("‖∇g(x*)‖ = {residual:.3e} ≤ {bound:.3e}"),
    });
    let lam = inst.shifted_min_eigenvalue(&x);
    checks.push(Check {
        name: "psd",
        pass: lam >= -tol.psd * scale,
        detail: format!("λ_min(H + σ‖x*‖^(p−2) I) = {lam:.3e}"),
    });
    let y = spec.to_rotated(&x)?;
    checks.push(Check {
        name: "sign_structure",
        pass: check_sign_structure_with(&spec, &y, tol),
        detail: "c̃ᵢ x̃ᵢ ≤ 0".into(),
    });
    let oracle = solve_global_convex_oracle(&inst)?;
    let rel = (oracle - sol.value).abs() / sol.value.abs().max(1e-300);
    checks.push(Check {
        name: "convex_oracle",
        pass: rel <= 1e-6 || (oracle - sol.value).abs() <= 1e-12,
        detail: format!("oracle {oracle:.10e}, solver {:.10e}", sol.value),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = inst.dim();
    let radius = 3.0 * x.norm().max(1.0);
    let mut best = f64::INFINITY;
    for _ in 0..VERIFY_SAMPLES {
        let dir = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let len = dir.norm();
        if len == 0.0 || len > 1.0 {
            continue;
        }
        best = best.min(inst.objective(&(dir * radius)));
    }
    checks.push(Check {
        name: "sampling_dominance",
        pass: sol.value <= best + 1e-7,
        detail: format!("g(x*) = {:.10e}, best sample {best:.10e}", sol.value),
    });

    match solve_local_nonglobal_with(&inst, tol) {
        Ok(local) => {
            if let Some(m) = &local.minimizer {
                checks.push(Check {
                    name: "local_nonglobal_certificate",
                    pass: m.hess_min_eig > 0.0
                        && m.value > sol.value
                        && check_local_sign_structure(&spec, &m.point_rot),
                    detail: format!(
                        "λ_min(∇²g) = {:.3e}, value {:.10e}",
                        m.hess_min_eig, m.value
                    ),
                });
            }
        }
        Err(e) => checks.push(Check {
            name: "local_nonglobal_certificate",
            pass: false,
            detail: e.to_string(),
        }),
    }

    if let Some(cons) = file.constraints(n)? {
        if inst.p() == 4.0 {
            let c = solve_constrained_with(&inst, &cons, tol)?;
            checks.push(Check {
                name: "constrained_feasibility",
                pass: cons.is_feasible(&c.point) && c.value >= sol.value - 1e-9 * (1.0 + sol.value.abs()),
                detail: format!("max violation {:.3e}", cons.max_violation(&c.point)),
            });
        }
    }
    finish(checks)
}

fn finish(checks: Vec<Check>) -> Result<Value, Failure> {
    let all = checks.iter().all(|c| c.pass);
    let list = checks
        .iter()
        .map(|c| {
            Record::new()
                .field("check", Value::str(c.name))
                .field("pass", Value::Bool(c.pass))
                .field("detail", Value::str(c.detail.clone()))
                .build()
        })
        .collect();
    let record = Record::new()
        .field("status", Value::str(if all { "ok" } else { "failed" }))
        .field("command", Value::str("verify"))
        .field("certificates", Value::List(list))
        .build();
    if all {
        Ok(record)
    } else {
        print!("{}", render(&record));
        Err(Failure::Checks)
    }
}
