//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values. Run with
//! `cargo test -p hqnn-cli --test acceptance -- --nocapture` to see every
//! line; failures always surface their line.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hqnn_core::analysis::SamplingPlan;
use hqnn_core::circuit::ReuploadCircuit;
use hqnn_core::embed::EmbeddingKind;
use hqnn_core::eval;
use hqnn_core::gates::{apply_gate_dm, Gate};
use hqnn_core::noise::{depolarize, noisy_forward, NoiseChannel, NoiseModel};
use hqnn_core::state::{DensityMatrix, Observable};

use hqnn_cli::experiment::{
    complexity_report, gradient_audit, metric_sweep, noise_sweep, run_experiment_parallel,
    ExperimentSpec, ModelKind, TaskKind,
};

const ACCEPT_SEED: u64 = 0;

fn verdict(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn spec_for(task: TaskKind, model: ModelKind, qubits: usize, layers: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(task, model, qubits, layers);
    spec.train.seed = ACCEPT_SEED;
    spec
}

/// Pooled standard deviation of two equally sized samples.
fn pooled_std(s1: f64, s2: f64) -> f64 {
    ((s1 * s1 + s2 * s2) / 2.0).sqrt()
}

#[test]
fn criterion_1_univariate_approximation() {
    let start = Instant::now();
    let spec = spec_for(TaskKind::Univariate, ModelKind::Hqnn, 1, 5);
    let report = complexity_report(&spec).unwrap();
    assert_eq!(report.classical_param_count, 4);
    assert_eq!(report.quantum_param_count, 15);
    let agg = run_experiment_parallel(&spec).unwrap();
    let elapsed = start.elapsed();
    let pass = agg.mean_test_mse <= 0.01 && elapsed.as_secs() <= 120;
    let ok = verdict(
        "1 (univariate approximation)",
        pass,
        &format!(
            "HQNN 1 qubit / 5 layers, 4C+15Q params: mean test MSE {:.6} ± {:.6} \
             (threshold 0.01), {} runs, {:.1?}",
            agg.mean_test_mse,
            agg.std_test_mse,
            agg.runs.len(),
            elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_multivariate_approximation() {
    let start = Instant::now();
    let spec = spec_for(TaskKind::Multivariate, ModelKind::Hqnn, 2, 5);
    let report = complexity_report(&spec).unwrap();
    assert_eq!(report.classical_param_count, 9);
    assert_eq!(report.quantum_param_count, 30);
    let agg = run_experiment_parallel(&spec).unwrap();
    let elapsed = start.elapsed();
    let pass = agg.mean_test_mse <= 0.01 && elapsed.as_secs() <= 300;
    let ok = verdict(
        "2 (multivariate approximation)",
        pass,
        &format!(
            "HQNN 2 qubits / 5 layers, 9C+30Q params: mean test MSE {:.6} ± {:.6} \
             (threshold 0.01), {:.1?}; see README 'Known limitations' for the \
             20-epoch budget analysis",
            agg.mean_test_mse, agg.std_test_mse, elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_ordering_claims() {
    let mut all_pass = true;
    let mut details = Vec::new();
    for (task, qubits) in [(TaskKind::Univariate, 1), (TaskKind::Multivariate, 2)] {
        let hqnn = run_experiment_parallel(&spec_for(task, ModelKind::Hqnn, qubits, 5)).unwrap();
        let qnn = run_experiment_parallel(&spec_for(task, ModelKind::Qnn, qubits, 5)).unwrap();
        let nn = run_experiment_parallel(&spec_for(task, ModelKind::Nn, 0, 5)).unwrap();
        if task == TaskKind::Univariate {
            // The bare circuit still fits the univariate target reasonably.
            all_pass &= qnn.mean_test_mse <= 0.08;
        }
        for (name, other) in [("QNN", &qnn), ("width-2 NN", &nn)] {
            let gap = other.mean_test_mse - hqnn.mean_test_mse;
            let pooled = pooled_std(hqnn.std_test_mse, other.std_test_mse);
            let pass = gap > pooled;
            all_pass &= pass;
            details.push(format!(
                "{task:?}: HQNN {:.5} < {name} {:.5} (gap {:.5} vs pooled std {:.5}: {})",
                hqnn.mean_test_mse,
                other.mean_test_mse,
                gap,
                pooled,
                if pass { "ok" } else { "VIOLATED" }
            ));
        }
    }
    let ok = verdict("3 (hybrid beats baselines)", all_pass, &details.join("; "));
    assert!(ok);
}

#[test]
fn criterion_4_parameter_accounting() {
    let mut all = true;
    // Quantum parameter counts are 3nL across the full grid; 540 at (9, 20).
    for n in [1usize, 2, 4, 7, 9] {
        for l in [1usize, 5, 10, 15, 20] {
            let r = if n == 1 { None } else { Some(1) };
            let c = ReuploadCircuit::new(n, l, EmbeddingKind::Angle, r).unwrap();
            all &= c.param_count() == 3 * n * l;
        }
    }
    let at920 = ReuploadCircuit::new(9, 20, EmbeddingKind::Angle, Some(1)).unwrap();
    all &= at920.param_count() == 540;
    all &= at920.depth_gate_layers() == 260;
    all &= at920.u4_gate_count() == 180;
    let amp920 = ReuploadCircuit::new(
        9,
        20,
        EmbeddingKind::Amplitude {
            auto_normalize: true,
        },
        Some(1),
    )
    .unwrap();
    all &= amp920.depth_gate_layers() == 10480;

    // Classical counts of every arithmetically consistent reference row.
    use hqnn_core::dense::{Activation, DenseNet};
    let count = |widths: Vec<usize>| {
        let acts = vec![Activation::Relu; widths.len() - 1];
        DenseNet::new(widths, acts).unwrap().count_params()
    };
    let reference: &[(Vec<usize>, usize)] = &[
        (vec![1, 1], 2),
        (vec![1, 2, 2, 2, 2, 1], 25),
        (vec![1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 1], 55),
        (vec![2, 1], 3),
        (vec![2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 1], 57),
        (vec![2, 4, 4, 4, 4, 1], 77),
        (vec![1, 8, 8, 8, 8, 1], 241),
        (vec![1, 16, 16, 16, 16, 1], 865),
        (vec![1, 32, 32, 32, 32, 1], 3265),
        (vec![2, 32, 32, 32, 32, 1], 3297),
        (vec![2, 64, 64, 64, 64, 1], 12737),
        (vec![2, 128, 128, 128, 128, 1], 50049),
    ];
    for (widths, expect) in reference {
        all &= count(widths.clone()) == *expect;
    }

    // Model presets: 4 and 9 classical parameters for the hybrid rows, with
    // the build-time audit agreeing with the closed-form accounting.
    for (task, model, q, l, c_expect, q_expect) in [
        (TaskKind::Univariate, ModelKind::Hqnn, 1, 5, 4usize, 15usize),
        (TaskKind::Univariate, ModelKind::Hqnn, 1, 1, 4, 3),
        (TaskKind::Univariate, ModelKind::HqnnNoCin, 1, 5, 2, 15),
        (TaskKind::Univariate, ModelKind::Qnn, 1, 5, 0, 15),
        (TaskKind::Multivariate, ModelKind::Hqnn, 2, 5, 9, 30),
        (TaskKind::Multivariate, ModelKind::Hqnn, 2, 1, 9, 6),
        (TaskKind::Multivariate, ModelKind::HqnnNoCin, 2, 5, 3, 30),
        (TaskKind::Univariate, ModelKind::Nn, 0, 5, 25, 0),
        (TaskKind::Multivariate, ModelKind::Nn, 0, 10, 57, 0),
    ] {
        let spec = spec_for(task, model, q, l);
        let report = complexity_report(&spec).unwrap();
        all &= report.classical_param_count == c_expect;
        all &= report.quantum_param_count == q_expect;
        let built = hqnn_cli::experiment::build_model(&spec, 0).unwrap();
        all &= built.classical_param_count() == c_expect;
        all &= built.quantum_param_count() == q_expect;
    }

    let ok = verdict(
        "4 (parameter accounting)",
        all,
        "3nL quantum grid, 540 params / depth 260 (angle) / depth 10480 (amplitude) \
         at 9 qubits x 20 layers, all reference classical counts, build audit: \
         integer equality",
    );
    assert!(ok);
}

#[test]
fn criterion_5_gradient_audit() {
    let start = Instant::now();
    let report = gradient_audit(50, ACCEPT_SEED, 1e-5, 1e-10).unwrap();
    let elapsed = start.elapsed();
    let pass = report.passed && elapsed.as_secs() <= 60;
    let ok = verdict(
        "5 (gradient audit)",
        pass,
        &format!(
            "{} params over {} models: max FD rel err {:.3e} (tol 1e-5), \
             analytic -sin(θ) err {:.3e} (tol 1e-10), {:.1?}",
            report.params_checked,
            report.n_models,
            report.max_rel_err,
            report.analytic_max_err,
            elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_circuit_metric_trends() {
    let start = Instant::now();
    let qubits = [2usize, 4, 7, 9];
    let layers = [1usize, 5, 10, 15, 20];
    let plan = SamplingPlan {
        n_samples: 1000,
        n_bins: 75,
        n_runs: 4,
        seed: ACCEPT_SEED,
    };
    let rows = metric_sweep(&qubits, &layers, &plan, true).unwrap();
    let get = |metric: &str, q: usize, l: usize| {
        rows.iter()
            .find(|r| r.metric == metric && r.n_qubits == q && r.n_layers == l)
            .map(|r| (r.mean, r.std))
            .unwrap()
    };
    let mut all = true;
    let mut worst: f64 = 0.0;
    // Entangling capability non-decreasing in layers at each qubit count,
    // within one std of the difference of the two estimates.
    for &q in &qubits {
        for w in layers.windows(2) {
            let (m1, s1) = get("entangling_capability", q, w[0]);
            let (m2, s2) = get("entangling_capability", q, w[1]);
            let slack = (s1 * s1 + s2 * s2).sqrt();
            all &= m2 >= m1 - slack;
            worst = worst.max(m1 - m2);
        }
    }
    // Non-decreasing in qubits at >= 5 layers.
    for &l in &layers[1..] {
        for w in qubits.windows(2) {
            let (m1, s1) = get("entangling_capability", w[0], l);
            let (m2, s2) = get("entangling_capability", w[1], l);
            let slack = (s1 * s1 + s2 * s2).sqrt();
            all &= m2 >= m1 - slack;
        }
    }
    // Deeper circuits sit closer to the Haar law at 9 qubits.
    let (kl_deep, _) = get("expressibility_kl", 9, 20);
    let (kl_shallow, _) = get("expressibility_kl", 9, 1);
    all &= kl_deep < kl_shallow;
    let elapsed = start.elapsed();
    all &= elapsed.as_secs() <= 600;
    let ok = verdict(
        "6 (circuit-metric trends)",
        all,
        &format!(
            "entangling capability monotone over {}x{} grid (worst drop {:.1e}), \
             KL(9q,20L)={:.5} < KL(9q,1L)={:.5}, {:.1?}",
            qubits.len(),
            layers.len(),
            worst,
            kl_deep,
            kl_shallow,
            elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_noise_degradation() {
    // Analytic single-qubit contraction <Z> = (1 - 4p/3) cos θ to 1e-10.
    let mut analytic_ok = true;
    let z = Observable::single(1, 0).unwrap();
    for k in 0..32 {
        let theta = -3.0 + 6.0 * k as f64 / 31.0;
        let rotated = apply_gate_dm(&DensityMatrix::zero_state(1), &Gate::ry(0, theta)).unwrap();
        for p in [0.0, 0.001, 0.01, 0.1, 0.2, 0.7] {
            let out = depolarize(&rotated, 0, p).unwrap();
            let expect = (1.0 - 4.0 * p / 3.0) * theta.cos();
            analytic_ok &= (out.expectation_z(&z).unwrap() - expect).abs() < 1e-10;
        }
    }

    // Trend: mean test MSE of the noiselessly trained univariate model is
    // non-decreasing in the rate for both channels, within one pooled std
    // of the per-seed values (direction, not magnitude).
    let spec = spec_for(TaskKind::Univariate, ModelKind::Hqnn, 1, 5);
    let rates = [0.0, 0.001, 0.01, 0.1, 0.2];
    let rows = noise_sweep(
        &spec,
        &[NoiseChannel::Depolarizing, NoiseChannel::AmplitudeDamping],
        &rates,
    )
    .unwrap();
    let mut trend_ok = true;
    let mut summary = Vec::new();
    for channel in ["depolarizing", "amplitude_damping"] {
        let stats: Vec<(f64, f64)> = rates
            .iter()
            .map(|&rate| {
                let per_seed: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.channel == channel && r.rate == rate)
                    .map(|r| r.test_mse)
                    .collect();
                let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
                let var = per_seed
                    .iter()
                    .map(|v| (v - mean) * (v - mean))
                    .sum::<f64>()
                    / (per_seed.len() - 1) as f64;
                (mean, var.sqrt())
            })
            .collect();
        for w in stats.windows(2) {
            let (m1, s1) = w[0];
            let (m2, s2) = w[1];
            trend_ok &= m2 >= m1 - pooled_std(s1, s2);
        }
        summary.push(format!(
            "{channel}: {}",
            stats
                .iter()
                .map(|(m, _)| format!("{m:.5}"))
                .collect::<Vec<_>>()
                .join(" -> ")
        ));
    }
    let pass = analytic_ok && trend_ok;
    let ok = verdict(
        "7 (noise degradation)",
        pass,
        &format!(
            "analytic (1-4p/3)cosθ contraction to 1e-10: {}; mean test MSE across \
             rates {:?}: {}",
            if analytic_ok { "ok" } else { "VIOLATED" },
            rates,
            summary.join("; ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_simulator_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPT_SEED);
    let mut max_dev: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4usize);
        let l = rng.gen_range(1..=5usize);
        let r = if n == 1 {
            None
        } else {
            Some(rng.gen_range(1..n))
        };
        let mut circuit = ReuploadCircuit::new(n, l, EmbeddingKind::Angle, r).unwrap();
        circuit.randomize_theta(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let h: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let measured = Observable::singles(n);

        // Route 1: statevector kernels.
        let sv = circuit.forward(&h).unwrap().expectations;
        // Route 2: dense unitary product applied to |0...0>.
        let u = circuit.unitary(&h).unwrap();
        let d = 1usize << n;
        let dense: Vec<f64> = (0..n)
            .map(|w| {
                let stride = 1usize << (n - 1 - w);
                (0..d)
                    .map(|i| {
                        let amp = u[i * d];
                        let sign = if i & stride == 0 { 1.0 } else { -1.0 };
                        sign * amp.norm_sqr()
                    })
                    .sum()
            })
            .collect();
        // Route 3: rate-0 density-matrix pipeline.
        let dm = noisy_forward(&circuit, &h, &NoiseModel::none(), &measured)
            .unwrap()
            .expectations;

        for k in 0..n {
            max_dev = max_dev.max((sv[k] - dense[k]).abs());
            max_dev = max_dev.max((sv[k] - dm[k]).abs());
        }
    }
    let pass = max_dev < 1e-10;
    let ok = verdict(
        "8 (simulator oracle equivalence)",
        pass,
        &format!(
            "100 random circuits (≤4 qubits, ≤5 layers): statevector vs dense product \
             vs rate-0 density matrix, max deviation {max_dev:.2e} (tol 1e-10)"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_9_out_of_scope_declaration() {
    // Large-scale affinity benchmarks are not reproducible at desk scale;
    // the metrics code paths are covered instead by their property suite.
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPT_SEED);
    let mut all = true;
    for _ in 0..200 {
        let n = rng.gen_range(5..40usize);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // CI is a rank statistic: invariant under strictly increasing maps.
        let ci0 = eval::concordance_index(&y, &p).unwrap();
        let warped: Vec<f64> = p.iter().map(|v| v.exp() + 2.0 * v).collect();
        let ci1 = eval::concordance_index(&y, &warped).unwrap();
        all &= (ci0 - ci1).abs() < 1e-12;
        all &= (0.0..=1.0).contains(&ci0);
        // Regression SD absorbs affine transforms of the predictions.
        let sd0 = eval::regression_sd(&y, &p).unwrap();
        let affine: Vec<f64> = p.iter().map(|v| -2.5 * v + 0.7).collect();
        let sd1 = eval::regression_sd(&y, &affine).unwrap();
        all &= (sd0 - sd1).abs() < 1e-8 * (1.0 + sd0);
        // Pearson R stays inside [-1, 1].
        let r = eval::pearson_r(&y, &p).unwrap();
        all &= (-1.0 - 1e-12..=1.0 + 1e-12).contains(&r);
    }
    let ok = verdict(
        "9 (out-of-scope declaration)",
        all,
        "large-scale affinity benchmark magnitudes are not desk-reproducible; \
         criteria 1-8 plus this metrics property suite (CI rank invariance, SD affine \
         invariance, R bounds over 200 seeded draws) form the acceptance surface",
    );
    assert!(ok);
}
