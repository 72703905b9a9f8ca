//! Command-line surface for the product-state toolkit.
//!
//! Exit codes: 0 product / success, 1 entangled verdict, 2 usage error,
//! 3 input or validation error, 4 numerical failure (including
//! criterion/oracle disagreement and grid-cap overruns).

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::{Array2, Dimension};
use num_complex::Complex64 as C64;

use prodstate::criterion::{
    check_product, check_weakened_condition_with_cap, probe_condition_with_cap, Factorization,
    ProjectorKind, ViolationReport, WitnessProjector, DEFAULT_GRID_CAP,
};
use prodstate::measurement::{independence_violation, joint_distribution, sample_outcomes};
use prodstate::op_schmidt::operator_schmidt_decompose;
use prodstate::oracle::{
    oracle_condition_grid_with_cap, oracle_mixed_product, oracle_pure_product,
};
use prodstate::schmidt::schmidt_decompose;
use prodstate::statefile::{load_observables, load_state};
use prodstate::{BipartiteSplit, Error, MixedState, State};

use report::{Report, Val};

#[derive(Parser)]
#[command(
    name = "prodstate",
    version,
    about = "Decide whether tensor-product quantum states factorize, and report the evidence"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Schmidt decomposition of a pure state at a bipartite cut.
    Schmidt {
        file: PathBuf,
        /// Number of leading factors on the left side of the cut.
        #[arg(long)]
        cut: usize,
        /// Relative cutoff below which weights are discarded.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Operator Schmidt decomposition of a density matrix at a cut
    /// (pure inputs are decomposed through their projector).
    Opschmidt {
        file: PathBuf,
        #[arg(long)]
        cut: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Decide product vs entangled; print a factorization or a witness.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Search for condition violations over the deterministic grid plus
    /// seeded random projector tuples.
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Number of random tuples to evaluate.
        #[arg(long, default_value_t = 200)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the weakened condition on every factor subset of size
    /// at least 2 (pure inputs are lifted to their projector).
    Subsets {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Random tuples per subset on top of the per-subset grid.
        #[arg(long, default_value_t = 64)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Joint outcome distribution of per-factor observables and its
    /// worst deviation from the product of marginals.
    Independence {
        file: PathBuf,
        /// Observables file: one hermitian matrix per factor.
        #[arg(long)]
        observables: PathBuf,
    },
    /// Draw outcome tuples from the joint distribution.
    Sample {
        file: PathBuf,
        #[arg(long)]
        observables: PathBuf,
        /// Number of samples.
        #[arg(long, default_value_t = 100)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the brute-force references and diff them against the decision
    /// procedure.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((rep, code)) => {
            print!("{}", rep.render(cli.format == Format::Json));
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit(&e))
        }
    }
}

fn error_exit(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::GridCapExceeded { .. } | Error::Backend(_) => 4,
        _ => 3,
    }
}

fn grid_cap() -> Result<usize, Error> {
    match std::env::var("PRODSTATE_GRID_CAP") {
        Ok(s) => s.trim().parse().map_err(|_| {
            Error::Malformed(format!(
                "PRODSTATE_GRID_CAP must be a nonnegative integer, got {s:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_GRID_CAP),
    }
}

fn with_path(path: &PathBuf, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    }
}

fn load_state_at(path: &PathBuf) -> Result<State, Error> {
    load_state(path).map_err(|e| with_path(path, e))
}

fn kind_name(state: &State) -> &'static str {
    match state {
        State::Pure(_) => "pure",
        State::Mixed(_) => "mixed",
    }
}

fn dims_val(state: &State) -> Val {
    Val::Ints(state.dims().factors().iter().map(|&d| d as u64).collect())
}

/// Density matrix view of either input kind, for the operator-level
/// subcommands.
fn as_mixed(state: &State) -> Result<MixedState, Error> {
    match state {
        State::Pure(p) => p.density_matrix(),
        State::Mixed(m) => Ok(m.clone()),
    }
}

fn push_matrix(rep: &mut Report, m: &Array2<C64>) {
    for (r, row) in m.rows().into_iter().enumerate() {
        rep.push(format!("row {r}"), Val::Complexes(row.to_vec()));
    }
}

fn witness_blocks(witness: &[WitnessProjector]) -> Val {
    let mut blocks = Vec::new();
    for (k, w) in witness.iter().enumerate() {
        let mut rep = Report::new();
        rep.push(
            "factors",
            Val::Ints(w.factors.iter().map(|&f| f as u64).collect()),
        );
        match &w.kind {
            ProjectorKind::Identity => rep.push("kind", Val::Text("identity".into())),
            ProjectorKind::Orthonormal(cols) => {
                let name = if cols.len() == 1 { "rank1" } else { "orthonormal" };
                rep.push("kind", Val::Text(name.into()));
                for (i, v) in cols.iter().enumerate() {
                    rep.push(format!("vector {i}"), Val::Complexes(v.to_vec()));
                }
            }
        }
        blocks.push((format!("block {k}"), rep));
    }
    Val::Blocks(blocks)
}

fn push_violation(rep: &mut Report, vr: &ViolationReport) {
    rep.push("max violation", Val::Num(vr.max_violation));
    rep.push("probes evaluated", Val::Int(vr.probes_evaluated as u64));
    rep.push("seed", Val::Int(vr.seed));
    if !vr.witness.is_empty() {
        rep.push("witness", witness_blocks(&vr.witness));
    }
}

fn run(cli: &Cli) -> Result<(Report, u8), Error> {
    match &cli.cmd {
        Cmd::Schmidt { file, cut, tol } => {
            let state = load_state_at(file)?;
            let State::Pure(phi) = state else {
                return Err(Error::Malformed(
                    "schmidt requires a pure state (use opschmidt for density matrices)".into(),
                ));
            };
            let split = BipartiteSplit::new(*cut, phi.dims())?;
            let sd = schmidt_decompose(&phi, split, *tol)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text("pure".into()));
            rep.push(
                "dims",
                Val::Ints(phi.dims().factors().iter().map(|&d| d as u64).collect()),
            );
            rep.push("cut", Val::Int(*cut as u64));
            rep.push("rank", Val::Int(sd.rank() as u64));
            rep.push("lambdas", Val::Nums(sd.lambdas().to_vec()));
            for k in 0..sd.rank() {
                rep.push(
                    format!("left {k}"),
                    Val::Complexes(sd.left_vectors()[k].to_vec()),
                );
                rep.push(
                    format!("right {k}"),
                    Val::Complexes(sd.right_vectors()[k].to_vec()),
                );
            }
            Ok((rep, 0))
        }

        Cmd::Opschmidt { file, cut, tol } => {
            let state = load_state_at(file)?;
            let rho = as_mixed(&state)?;
            let split = BipartiteSplit::new(*cut, rho.dims())?;
            let osd =
                operator_schmidt_decompose(&rho.matrix().view(), rho.dims(), split, *tol, true)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            rep.push("cut", Val::Int(*cut as u64));
            rep.push("rank", Val::Int(osd.rank() as u64));
            rep.push("coefficients", Val::Nums(osd.coefficients().to_vec()));
            Ok((rep, 0))
        }

        Cmd::Check { file, tol } => {
            let state = load_state_at(file)?;
            let verdict = check_product(&state, *tol)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            rep.push(
                "verdict",
                Val::Text(if verdict.is_product { "product" } else { "entangled" }.into()),
            );
            rep.push("residual", Val::Num(verdict.residual));
            match verdict.factors {
                Some(Factorization::Pure(vecs)) => {
                    for (i, v) in vecs.iter().enumerate() {
                        rep.push(format!("factor {i}"), Val::Complexes(v.to_vec()));
                    }
                }
                Some(Factorization::Mixed(mats)) => {
                    let mut blocks = Vec::new();
                    for (i, m) in mats.iter().enumerate() {
                        let mut sub = Report::new();
                        push_matrix(&mut sub, m);
                        blocks.push((format!("factor {i}"), sub));
                    }
                    rep.push("factors", Val::Blocks(blocks));
                }
                None => {}
            }
            if let Some(vr) = &verdict.witness {
                rep.push("violation", Val::Num(vr.max_violation));
                rep.push("witness", witness_blocks(&vr.witness));
            }
            Ok((rep, if verdict.is_product { 0 } else { 1 }))
        }

        Cmd::Probe { file, tol, probes, seed } => {
            let state = load_state_at(file)?;
            let vr = probe_condition_with_cap(&state, *probes, *seed, *tol, grid_cap()?)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            push_violation(&mut rep, &vr);
            Ok((rep, if vr.max_violation > *tol { 1 } else { 0 }))
        }

        Cmd::Subsets { file, tol, probes, seed } => {
            let state = load_state_at(file)?;
            let rho = as_mixed(&state)?;
            let subsets =
                check_weakened_condition_with_cap(&rho, *tol, *probes, *seed, grid_cap()?)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            let mut violated = 0u64;
            for s in &subsets {
                let indices: Vec<String> = s.subset.iter().map(|i| i.to_string()).collect();
                let status = if s.violated { "violated" } else { "ok" };
                rep.push(
                    format!("subset {}", indices.join(" ")),
                    Val::Text(format!("{} {status}", report::fmt_g(s.max_violation))),
                );
                if s.violated {
                    violated += 1;
                }
            }
            rep.push("violations", Val::Int(violated));
            Ok((rep, if violated > 0 { 1 } else { 0 }))
        }

        Cmd::Independence { file, observables } => {
            let state = load_state_at(file)?;
            let rho = as_mixed(&state)?;
            let obs = load_observables(observables, rho.dims()).map_err(|e| with_path(observables, e))?;
            let jd = joint_distribution(&rho, &obs)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            for (i, vals) in jd.outcome_values().iter().enumerate() {
                rep.push(format!("values {i}"), Val::Nums(vals.clone()));
            }
            for (idx, &p) in jd.table().indexed_iter() {
                let key: Vec<String> = idx.slice().iter().map(|k| k.to_string()).collect();
                rep.push(format!("p {}", key.join(" ")), Val::Num(p));
            }
            rep.push("violation", Val::Num(independence_violation(&jd)));
            Ok((rep, 0))
        }

        Cmd::Sample { file, observables, probes, seed } => {
            let state = load_state_at(file)?;
            let rho = as_mixed(&state)?;
            let obs = load_observables(observables, rho.dims()).map_err(|e| with_path(observables, e))?;
            let samples = sample_outcomes(&rho, &obs, *probes, *seed)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            rep.push("samples", Val::Int(*probes as u64));
            rep.push("seed", Val::Int(*seed));
            for (k, row) in samples.iter().enumerate() {
                rep.push(format!("sample {k}"), Val::Nums(row.clone()));
            }
            Ok((rep, 0))
        }

        Cmd::Oracle { file, tol } => {
            let state = load_state_at(file)?;
            let verdict = check_product(&state, *tol)?;
            let mut rep = Report::new();
            rep.push("kind", Val::Text(kind_name(&state).into()));
            rep.push("dims", dims_val(&state));
            rep.push(
                "criterion verdict",
                Val::Text(if verdict.is_product { "product" } else { "entangled" }.into()),
            );
            rep.push("criterion residual", Val::Num(verdict.residual));
            let oracle_product = match &state {
                State::Pure(p) => {
                    let out = oracle_pure_product(p, *tol, 1000)?;
                    rep.push(
                        "oracle verdict",
                        Val::Text(if out.is_product { "product" } else { "entangled" }.into()),
                    );
                    rep.push("oracle overlap", Val::Num(out.overlap));
                    out.is_product
                }
                State::Mixed(m) => {
                    let out = oracle_mixed_product(m, *tol)?;
                    rep.push(
                        "oracle verdict",
                        Val::Text(if out.is_product { "product" } else { "entangled" }.into()),
                    );
                    rep.push("oracle distance", Val::Num(out.distance));
                    out.is_product
                }
            };
            match oracle_condition_grid_with_cap(&state, *tol, grid_cap()?) {
                Ok(vr) => rep.push("grid max violation", Val::Num(vr.max_violation)),
                Err(Error::GridCapExceeded { .. }) => {
                    rep.push("grid max violation", Val::Text("skipped (over cap)".into()));
                }
                Err(e) => return Err(e),
            }
            let agree = verdict.is_product == oracle_product;
            rep.push("agree", Val::Text(if agree { "yes" } else { "no" }.into()));
            if !agree {
                return Err(Error::Numerical(format!(
                    "criterion ({}) and oracle ({}) verdicts disagree",
                    if verdict.is_product { "product" } else { "entangled" },
                    if oracle_product { "product" } else { "entangled" },
                )));
            }
            Ok((rep, if verdict.is_product { 0 } else { 1 }))
        }
    }
}
