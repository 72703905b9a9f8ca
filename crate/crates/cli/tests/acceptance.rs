//! Acceptance suite: each test checks one release criterion end to end
//! and prints a single `criterion N: PASS/FAIL` line (visible with
//! `--nocapture`). Tolerances are pinned here, not read from anywhere.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prodstate::criterion::{
    check_mixed_product, check_pure_product, check_weakened_condition, probe_condition,
    pure_condition_violation, witness_violation, Factorization, Rank1Projector,
};
use prodstate::measurement::{
    independence_violation, joint_distribution, sample_outcomes, Observable,
};
use prodstate::op_schmidt::operator_schmidt_decompose;
use prodstate::oracle::{oracle_mixed_product, oracle_pure_product};
use prodstate::random::{
    haar_pure_state, haar_vector, random_mixed_state, random_product_mixed, random_product_pure,
    random_hermitian,
};
use prodstate::schmidt::{coefficient_matrix, schmidt_decompose};
use prodstate::statefile::save_state;
use prodstate::tensor::{dagger, op_norm, partial_trace, trace_norm};
use prodstate::{states, BipartiteSplit, Dims, MixedState, PureState, State};

const RECONSTRUCTION_TOL: f64 = 1e-9;
const WEIGHT_SUM_TOL: f64 = 1e-10;
const ORTHONORMALITY_TOL: f64 = 1e-10;
const PINNED_EXACT_TOL: f64 = 1e-12;
const PINNED_COEFF_TOL: f64 = 1e-10;
const PINNED_DISTANCE_TOL: f64 = 1e-9;
const DECISION_TOL: f64 = 1e-8;
const PRODUCT_PROBE_TOL: f64 = 1e-9;
const WITNESS_FLOOR: f64 = 1e-6;
const FACTOR_MATCH_TOL: f64 = 1e-9;
const INEQUALITY_SLACK: f64 = -1e-12;
const SUBSET_SILENT_TOL: f64 = 1e-9;
const SUBSET_LOUD_FLOOR: f64 = 0.1;
const INDEPENDENCE_TOL: f64 = 1e-9;
const SAMPLER_TOL: f64 = 0.02;

fn run_criterion(n: usize, what: &str, f: impl FnOnce() + UnwindSafe) {
    match catch_unwind(f) {
        Ok(()) => println!("criterion {n}: PASS - {what}"),
        Err(e) => {
            println!("criterion {n}: FAIL - {what}");
            resume_unwind(e);
        }
    }
}

fn l2_diff(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn orthonormality_defect(vectors: &[Array1<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, a) in vectors.iter().enumerate() {
        for (l, b) in vectors.iter().enumerate() {
            let g: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
            let expect = if k == l { 1.0 } else { 0.0 };
            worst = worst.max((g - C64::new(expect, 0.0)).norm());
        }
    }
    worst
}

fn random_dims(rng: &mut ChaCha8Rng, n_choices: &[usize], d_lo: usize, d_hi: usize) -> Dims {
    use rand::Rng;
    let n = n_choices[rng.random_range(0..n_choices.len())];
    let factors: Vec<usize> = (0..n).map(|_| rng.random_range(d_lo..=d_hi)).collect();
    Dims::new(factors).unwrap()
}

#[test]
fn criterion_1_schmidt_correctness() {
    run_criterion(1, "Schmidt reconstruction, weight sum, orthonormality", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        for i in 0..200 {
            let dims = random_dims(&mut rng, &[2, 2, 3], 2, 6);
            let mut phi = haar_pure_state(&dims, &mut rng);
            if i % 5 == 0 {
                let scaled = phi.amplitudes().mapv(|z| z * 2.5);
                phi = PureState::new(dims.clone(), scaled).unwrap();
            }
            for cut in 1..dims.n_factors() {
                let split = BipartiteSplit::new(cut, &dims).unwrap();
                let sd = schmidt_decompose(&phi, split, 0.0).unwrap();
                let back = sd.reconstruct().unwrap();
                assert!(
                    l2_diff(back.amplitudes(), phi.amplitudes()) <= RECONSTRUCTION_TOL,
                    "reconstruction failed at state {i} cut {cut}"
                );
                let total: f64 = sd.lambdas().iter().sum();
                assert!(
                    (total - phi.norm().powi(2)).abs() <= WEIGHT_SUM_TOL,
                    "weight sum failed at state {i} cut {cut}"
                );
                assert!(orthonormality_defect(sd.left_vectors()) <= ORTHONORMALITY_TOL);
                assert!(orthonormality_defect(sd.right_vectors()) <= ORTHONORMALITY_TOL);
            }
        }
    });
}

#[test]
fn criterion_2_pinned_values() {
    run_criterion(2, "pinned Bell/GHZ/correlated-state values", || {
        let bell = states::bell();
        let split = BipartiteSplit::new(1, bell.dims()).unwrap();
        let sd = schmidt_decompose(&bell, split, 0.0).unwrap();
        assert_eq!(sd.lambdas().len(), 2);
        assert!((sd.lambdas()[0] - 0.5).abs() <= PINNED_EXACT_TOL);
        assert!((sd.lambdas()[1] - 0.5).abs() <= PINNED_EXACT_TOL);

        let p0 = |factor| Rank1Projector::new(factor, states::basis_vector(2, 0)).unwrap();
        let v = pure_condition_violation(&bell, &[p0(0), p0(1)]).unwrap();
        assert!((v - 0.25).abs() <= PINNED_EXACT_TOL);

        let ghz = states::ghz(3);
        let v = pure_condition_violation(&ghz, &[p0(0), p0(1), p0(2)]).unwrap();
        assert!((v - 0.375).abs() <= PINNED_EXACT_TOL);

        let cc = states::classically_correlated();
        let split = BipartiteSplit::new(1, cc.dims()).unwrap();
        let osd =
            operator_schmidt_decompose(&cc.matrix().view(), cc.dims(), split, 1e-10, true)
                .unwrap();
        assert_eq!(osd.rank(), 2);
        assert!((osd.coefficients()[0] - 0.5).abs() <= PINNED_COEFF_TOL);
        assert!((osd.coefficients()[1] - 0.5).abs() <= PINNED_COEFF_TOL);

        let out = oracle_mixed_product(&cc, DECISION_TOL).unwrap();
        assert!((out.distance - 1.0).abs() <= PINNED_DISTANCE_TOL);
    });
}

#[test]
fn criterion_3_pure_equivalence() {
    run_criterion(3, "pure decision matches product structure", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3001);
        for i in 0..200 {
            let dims = random_dims(&mut rng, &[2, 3, 4], 2, 3);
            let phi = random_product_pure(&dims, &mut rng);
            let verdict = check_pure_product(&phi, DECISION_TOL).unwrap();
            assert!(verdict.is_product, "product state {i} misflagged");
            let report =
                probe_condition(&State::Pure(phi), 30, 3100 + i, PRODUCT_PROBE_TOL).unwrap();
            assert!(
                report.max_violation <= PRODUCT_PROBE_TOL,
                "probe found {} on product state {i}",
                report.max_violation
            );
        }
        for i in 0..200 {
            let dims = random_dims(&mut rng, &[2, 3], 2, 3);
            let phi = haar_pure_state(&dims, &mut rng);
            let verdict = check_pure_product(&phi, DECISION_TOL).unwrap();
            assert!(!verdict.is_product, "haar state {i} declared product");
            let report = verdict.witness.expect("witness for entangled state");
            let direct = witness_violation(&State::Pure(phi), &report.witness).unwrap();
            assert!(
                direct > WITNESS_FLOOR,
                "witness violation {direct} too small on state {i}"
            );
            assert!((direct - report.max_violation).abs() <= 1e-9);
        }
    });
}

#[test]
fn criterion_4_mixed_equivalence() {
    run_criterion(4, "mixed decision with factor recovery and witnesses", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4001);
        for i in 0..100 {
            let dims = random_dims(&mut rng, &[2, 3], 2, 3);
            let rho = random_product_mixed(&dims, &mut rng);
            let verdict = check_mixed_product(&rho, DECISION_TOL).unwrap();
            assert!(verdict.is_product, "product state {i} misflagged");
            let Some(Factorization::Mixed(factors)) = verdict.factors else {
                panic!("missing factors on product state {i}");
            };
            for (k, f) in factors.iter().enumerate() {
                let marginal = partial_trace(&rho, &[k]).unwrap();
                let diff = f - marginal.matrix();
                assert!(
                    trace_norm(&diff.view()).unwrap() <= FACTOR_MATCH_TOL,
                    "factor {k} of state {i} does not match its marginal"
                );
            }
        }
        for i in 0..100 {
            let dims = random_dims(&mut rng, &[2, 3], 2, 3);
            let rho = random_mixed_state(&dims, &mut rng);
            let oracle = oracle_mixed_product(&rho, DECISION_TOL).unwrap();
            assert!(!oracle.is_product, "oracle calls random state {i} product");
            let verdict = check_mixed_product(&rho, DECISION_TOL).unwrap();
            assert!(!verdict.is_product, "random state {i} declared product");
            let report = verdict.witness.expect("witness for non-product state");
            let direct =
                witness_violation(&State::Mixed(rho), &report.witness).unwrap();
            assert!(direct > DECISION_TOL);
            assert!((direct - report.max_violation).abs() <= 1e-9);
        }
        let verdict = check_mixed_product(&states::classically_correlated(), DECISION_TOL)
            .unwrap();
        assert!(!verdict.is_product, "correlated mixture declared product");
    });
}

#[test]
fn criterion_5_oracle_agreement() {
    run_criterion(5, "criterion and oracle verdicts agree on fuzz states", || {
        let mixed_dims = [vec![2, 2], vec![3, 2], vec![2, 2, 2], vec![3, 3], vec![3, 3, 2]];
        let mut rng = ChaCha8Rng::seed_from_u64(5001);
        for i in 0..500 {
            let dims = Dims::new(mixed_dims[i % mixed_dims.len()].clone()).unwrap();
            let rho = if i % 2 == 0 {
                random_product_mixed(&dims, &mut rng)
            } else {
                random_mixed_state(&dims, &mut rng)
            };
            let verdict = check_mixed_product(&rho, DECISION_TOL).unwrap();
            let oracle = oracle_mixed_product(&rho, DECISION_TOL).unwrap();
            assert_eq!(
                verdict.is_product, oracle.is_product,
                "mixed disagreement at state {i}"
            );
        }
        let pure_dims = [vec![2, 2], vec![3, 2], vec![2, 2, 2], vec![3, 3, 2]];
        for i in 0..500 {
            let dims = Dims::new(pure_dims[i % pure_dims.len()].clone()).unwrap();
            let phi = if i % 2 == 0 {
                random_product_pure(&dims, &mut rng)
            } else {
                haar_pure_state(&dims, &mut rng)
            };
            let verdict = check_pure_product(&phi, DECISION_TOL).unwrap();
            let oracle = oracle_pure_product(&phi, DECISION_TOL, 400).unwrap();
            assert_eq!(
                verdict.is_product, oracle.is_product,
                "pure disagreement at state {i}"
            );
        }
    });
}

#[test]
fn criterion_6_inequality_fuzzing() {
    run_criterion(6, "contraction, Gram, and projector bounds hold", || {
        let dims = Dims::new(vec![3, 4]).unwrap();
        let split = BipartiteSplit::new(1, &dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6001);
        let gaussian_vec = |d: usize, rng: &mut ChaCha8Rng| -> Array1<C64> {
            Array1::from_iter((0..d).map(|_| prodstate::random::complex_gaussian(rng)))
        };

        for _ in 0..1000 {
            let phi = PureState::new(dims.clone(), gaussian_vec(12, &mut rng)).unwrap();
            let c = coefficient_matrix(&phi, split).unwrap();
            let x = gaussian_vec(3, &mut rng);
            let y = gaussian_vec(4, &mut rng);
            let norm = |v: &Array1<C64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let lhs = norm(&c.t().dot(&x.mapv(|z| z.conj())));
            assert!(phi.norm() * norm(&x) - lhs >= INEQUALITY_SLACK);
            let lhs = norm(&c.dot(&y.mapv(|z| z.conj())));
            assert!(phi.norm() * norm(&y) - lhs >= INEQUALITY_SLACK);
        }

        for _ in 0..1000 {
            let phi = PureState::new(dims.clone(), gaussian_vec(12, &mut rng)).unwrap();
            let psi = PureState::new(dims.clone(), gaussian_vec(12, &mut rng)).unwrap();
            let cp = coefficient_matrix(&phi, split).unwrap();
            let cq = coefficient_matrix(&psi, split).unwrap();
            let diff = cp.dot(&dagger(&cp.view())) - cq.dot(&dagger(&cq.view()));
            let lhs = op_norm(&diff.view()).unwrap();
            let rhs = (phi.norm() + psi.norm()) * l2_diff(phi.amplitudes(), psi.amplitudes());
            assert!(rhs - lhs >= INEQUALITY_SLACK);
        }

        for _ in 0..1000 {
            let x = gaussian_vec(4, &mut rng);
            let y = gaussian_vec(4, &mut rng);
            let unit = |v: &Array1<C64>| {
                let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.mapv(|z| z / n)
            };
            let xe = unit(&x);
            let ye = unit(&y);
            let proj = |v: &Array1<C64>| {
                Array2::from_shape_fn((4, 4), |(i, j)| v[i] * v[j].conj())
            };
            let diff = proj(&xe) - proj(&ye);
            let lhs = op_norm(&diff.view()).unwrap();
            assert!(2.0 * l2_diff(&xe, &ye) - lhs >= INEQUALITY_SLACK);
        }
    });
}

#[test]
fn criterion_7_weakened_condition() {
    run_criterion(7, "subset search stays silent on products, finds the pair", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7001);
        let dims = Dims::new(vec![2, 2, 2]).unwrap();
        let rho = random_product_mixed(&dims, &mut rng);
        let subsets = check_weakened_condition(&rho, SUBSET_SILENT_TOL, 50, 7100).unwrap();
        assert_eq!(subsets.len(), 4);
        for s in &subsets {
            assert!(
                s.max_violation <= SUBSET_SILENT_TOL,
                "subset {:?} reports {} on a product state",
                s.subset,
                s.max_violation
            );
        }

        let blocked = states::blocked_bell();
        let subsets =
            check_weakened_condition(&blocked, SUBSET_SILENT_TOL, 50, 7200).unwrap();
        for s in &subsets {
            let probes_pair = s.subset.contains(&1) && s.subset.contains(&2);
            if probes_pair {
                assert!(
                    s.violated && s.max_violation > SUBSET_LOUD_FLOOR,
                    "subset {:?} should expose the entangled pair, got {}",
                    s.subset,
                    s.max_violation
                );
            } else {
                assert!(
                    s.max_violation <= SUBSET_SILENT_TOL,
                    "subset {:?} should stay silent, got {}",
                    s.subset,
                    s.max_violation
                );
            }
        }
    });
}

#[test]
fn criterion_8_independence() {
    run_criterion(8, "independence of product statistics, Bell correlation, sampler", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8001);
        let dims = Dims::new(vec![2, 3]).unwrap();
        for i in 0..50 {
            let rho = if i % 2 == 0 {
                random_product_mixed(&dims, &mut rng)
            } else {
                random_product_pure(&dims, &mut rng).density_matrix().unwrap()
            };
            let obs = vec![
                Observable::new(0, random_hermitian(2, &mut rng)).unwrap(),
                Observable::new(1, random_hermitian(3, &mut rng)).unwrap(),
            ];
            let jd = joint_distribution(&rho, &obs).unwrap();
            assert!(
                independence_violation(&jd) <= INDEPENDENCE_TOL,
                "tuple {i} shows dependence on a product state"
            );
        }

        let bell = states::bell().density_matrix().unwrap();
        let zz = vec![
            Observable::new(0, states::pauli_z()).unwrap(),
            Observable::new(1, states::pauli_z()).unwrap(),
        ];
        let jd = joint_distribution(&bell, &zz).unwrap();
        assert!((independence_violation(&jd) - 0.25).abs() <= PINNED_EXACT_TOL);

        let n = 10_000usize;
        let samples = sample_outcomes(&bell, &zz, n, 842).unwrap();
        let values = jd.outcome_values();
        let mut counts = vec![vec![0usize; values[1].len()]; values[0].len()];
        for row in &samples {
            let i = values[0].iter().position(|v| (v - row[0]).abs() < 1e-12).unwrap();
            let j = values[1].iter().position(|v| (v - row[1]).abs() < 1e-12).unwrap();
            counts[i][j] += 1;
        }
        for i in 0..values[0].len() {
            for j in 0..values[1].len() {
                let freq = counts[i][j] as f64 / n as f64;
                assert!(
                    (freq - jd.prob(&[i, j])).abs() <= SAMPLER_TOL,
                    "empirical frequency off at outcome ({i},{j})"
                );
            }
        }
    });
}

#[test]
fn criterion_9_cli_determinism() {
    run_criterion(9, "CLI reports are byte-identical across runs", || {
        let dir = tempfile::tempdir().unwrap();
        let bell = dir.path().join("bell.json");
        save_state(&bell, &State::Pure(states::bell())).unwrap();
        let bell = bell.to_str().unwrap();
        let cases: Vec<Vec<&str>> = vec![
            vec!["schmidt", bell, "--cut", "1"],
            vec!["check", bell],
            vec!["probe", bell, "--seed", "7"],
        ];
        for args in cases {
            let run = || {
                Command::new(env!("CARGO_BIN_EXE_prodstate"))
                    .args(&args)
                    .output()
                    .expect("binary runs")
            };
            let a = run();
            let b = run();
            assert_eq!(a.stdout, b.stdout, "stdout differs for {args:?}");
            assert_eq!(a.status.code(), b.status.code());
            assert!(!a.stdout.is_empty());
        }
    });
}

/// Guards the validator helpers themselves: a product mixed state built by
/// hand must round-trip the whole pipeline used above.
#[test]
fn acceptance_helpers_are_sound() {
    let dims = Dims::new(vec![2, 2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let rho = random_product_mixed(&dims, &mut rng);
    MixedState::validate(rho.dims(), rho.matrix(), 1e-9).unwrap();
    let v = haar_vector(3, &mut rng);
    assert!((v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
}
