//! The nine acceptance gates, one test per criterion. Each test prints a
//! single `criterion N: PASS` line on success (visible with --nocapture) and
//! fails loudly otherwise. Criteria 1–8 exercise the library; criterion 9
//! drives the installed binary.

use std::process::Command;
use std::time::Instant;

use bellsep_core::info::{
    cmd_report_finite, cmd_report_singlet, general_dimension_bound, log2_2pi_sqrt_e,
};
use bellsep_core::json::{density_to_json, povm_to_json, table_to_json};
use bellsep_core::matrix::ComplexMatrix;
use bellsep_core::model::{
    build_general_brans, build_signalling_model, causal_decomposition, check_properties,
    verify_reproduction, CorrelationTable,
};
use bellsep_core::montecarlo::{estimate_chsh, estimate_joint, ChshDirections, RngSpec};
use bellsep_core::pair::PairDistribution;
use bellsep_core::polytope::{
    chsh_optimal_angles, chsh_optimal_directions, chsh_value, chsh_variants, detect_signalling,
    enumerate_deterministic_strategies, full_grid, separability_feasible, strategy_mixture_table,
    ChshSettings, Separability,
};
use bellsep_core::quad::SphereRule;
use bellsep_core::quantum::{fourier_matrix, maximally_entangled_state, singlet_state, PovmFamily};
use bellsep_core::singlet::{brans_weight, random_direction_pairs, SignPair, SingletModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: [SingletModelKind; 3] =
    [SingletModelKind::Brans, SingletModelKind::Degorre, SingletModelKind::Hall];

fn grid_labels() -> (Vec<String>, Vec<String>) {
    (vec!["x0".into(), "x1".into()], vec!["y0".into(), "y1".into()])
}

/// Criterion 1: exact reproduction of the singlet joint at 50 random setting
/// pairs — 1e-12 for the four-term Brans sum, 1e-6 for the quadrature models
/// — in under ten seconds.
#[test]
fn criterion_1_exact_singlet_reproduction() {
    let start = Instant::now();
    let rule = SphereRule::new(64).unwrap();
    let pairs = random_direction_pairs(11, 50);
    for kind in MODELS {
        let tol = match kind {
            SingletModelKind::Brans => 1e-12,
            _ => 1e-6,
        };
        let mut worst = 0.0f64;
        for (x, y) in &pairs {
            let joint = bellsep_core::singlet::exact_joint(kind, x, y, &rule).unwrap();
            worst = worst.max(joint.max_abs_diff(&PairDistribution::singlet(x, y)));
        }
        assert!(worst < tol, "{}: max error {worst} ≥ {tol}", kind.name());
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.2} s, limit 10 s");
    println!("criterion 1 (exact singlet reproduction): PASS ({elapsed:.2} s)");
}

/// Criterion 2: sampled reproduction — n = 10⁶ per pair, 20 pairs per model,
/// every cell estimate within five standard errors — in under two minutes.
#[test]
fn criterion_2_sampled_singlet_reproduction() {
    let start = Instant::now();
    let rule = SphereRule::new(64).unwrap();
    let pairs = random_direction_pairs(17, 20);
    for (m, kind) in MODELS.into_iter().enumerate() {
        for (i, (x, y)) in pairs.iter().enumerate() {
            let spec = RngSpec::new(29, (m * pairs.len() + i) as u64);
            let sampled = estimate_joint(kind, x, y, 1_000_000, spec).unwrap();
            let exact = bellsep_core::singlet::exact_joint(kind, x, y, &rule).unwrap();
            for (a, b) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                let est = sampled.estimate(a, b);
                let dev = (est.value - exact.prob(a, b)).abs();
                assert!(
                    dev <= 5.0 * est.std_error,
                    "{} pair {i} outcome ({a},{b}): deviation {dev} > 5σ = {}",
                    kind.name(),
                    5.0 * est.std_error
                );
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.2} s, limit 120 s");
    println!("criterion 2 (sampled singlet reproduction): PASS ({elapsed:.2} s)");
}

/// Criterion 3: the measurement-dependence capacities — 1 bit exactly for
/// Brans, log₂(2/√e) ≈ 0.2786 for Degorre with the quadrature entropy
/// matching log₂(2π√e) to 1e-5, and the ≈ 0.0663-bit Hall bound.
#[test]
fn criterion_3_capacity_values() {
    let rule = SphereRule::new(64).unwrap();

    let brans = cmd_report_singlet(SingletModelKind::Brans, &rule).unwrap();
    assert!((brans.exact_value.unwrap() - 1.0).abs() < 1e-9);

    let degorre = cmd_report_singlet(SingletModelKind::Degorre, &rule).unwrap();
    assert!((degorre.exact_value.unwrap() - 0.2786).abs() < 1e-4);
    assert!((degorre.inf_hxy - log2_2pi_sqrt_e()).abs() < 1e-5);

    let hall = cmd_report_singlet(SingletModelKind::Hall, &rule).unwrap();
    assert!((hall.upper_bound - 0.0663).abs() < 2e-3);
    assert!(hall.exact_value.is_none());

    println!(
        "criterion 3 (capacities): PASS (brans {}, degorre {:.9}, hall ≤ {:.9})",
        brans.exact_value.unwrap(),
        degorre.exact_value.unwrap(),
        hall.upper_bound
    );
}

/// Criterion 4: Monte Carlo CHSH at the optimal coplanar settings reaches
/// 2√2 within 5σ at n = 10⁶ per correlator for every model, while 200 random
/// local mixtures never beat 2.
#[test]
fn criterion_4_chsh_quantum_value_and_local_bound() {
    let tsirelson = 2.0 * 2.0f64.sqrt();
    let dirs = ChshDirections::coplanar(chsh_optimal_angles());
    for (m, kind) in MODELS.into_iter().enumerate() {
        let est = estimate_chsh(kind, &dirs, 1_000_000, RngSpec::new(23, m as u64)).unwrap();
        let dev = (est.value - tsirelson).abs();
        assert!(
            dev <= 5.0 * est.std_error,
            "{}: Ŝ = {} is {dev} from 2√2, 5σ = {}",
            kind.name(),
            est.value,
            5.0 * est.std_error
        );
    }

    let (xs, ys) = grid_labels();
    let settings = full_grid(&xs, &ys);
    let strategies = enumerate_deterministic_strategies(&xs, &ys).unwrap();
    let s = ChshSettings::standard_2x2();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let raw: Vec<f64> = (0..strategies.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let table = strategy_mixture_table(&strategies, &weights, &settings).unwrap();
        let value = chsh_value(&table, &s).unwrap();
        assert!(value.abs() <= 2.0 + 1e-9, "mixture reached S = {value}");
    }
    println!("criterion 4 (CHSH quantum value and local bound): PASS");
}

/// Criterion 5: the generalized Brans construction reduces to the Brans
/// weights on the singlet, and its capacity bound respects the log₂(d₁d₂)
/// ceiling for qubit and qutrit pairs alike.
#[test]
fn criterion_5_general_brans_weights_and_dimension_ceiling() {
    let [x0, x1, y0, y1] = chsh_optimal_directions();
    let xs = [x0, x1];
    let ys = [y0, y1];
    let rho = singlet_state();
    let povm = PovmFamily::from_direction_grid(&xs, &ys).unwrap();
    let model = build_general_brans(&rho, &povm, "singlet").unwrap();

    // λ order in the general model is (a,b) = (1,1),(1,2),(2,1),(2,2); the
    // Brans signs are +1 for outcome 1 and −1 for outcome 2.
    for (s, _) in model.settings().iter().enumerate() {
        let (x, y) = (&xs[s / ys.len()], &ys[s % ys.len()]);
        let weights = model.weights_for_setting(s);
        for (l, &w) in weights.iter().enumerate() {
            let pair =
                SignPair::new(if l / 2 == 0 { 1 } else { -1 }, if l % 2 == 0 { 1 } else { -1 })
                    .unwrap();
            let target = brans_weight(pair, x, y);
            assert!((w - target).abs() < 1e-12, "setting {s}, λ {l}: {w} vs {target}");
        }
    }
    let qubit_bound = cmd_report_finite(&model).unwrap().upper_bound;
    let qubit_ceiling = general_dimension_bound(2, 2).unwrap();
    assert!((qubit_ceiling - 2.0).abs() < 1e-15);
    assert!(qubit_bound <= qubit_ceiling + 1e-9);

    let rho3 = maximally_entangled_state(3).unwrap();
    let id3 = ComplexMatrix::identity(3);
    let f3 = fourier_matrix(3);
    let povm3 = PovmFamily::from_local_bases(&[id3.clone(), f3.clone()], &[id3, f3]).unwrap();
    let model3 = build_general_brans(&rho3, &povm3, "two qutrits").unwrap();
    let report3 = verify_reproduction(&model3, &model3.implied_table()).unwrap();
    assert!(report3.pass);
    let qutrit_bound = cmd_report_finite(&model3).unwrap().upper_bound;
    let qutrit_ceiling = general_dimension_bound(3, 3).unwrap();
    assert!((qutrit_ceiling - 2.0 * 3.0f64.log2()).abs() < 1e-12);
    assert!(qutrit_bound <= qutrit_ceiling + 1e-9);

    println!(
        "criterion 5 (general Brans): PASS (qubit bound {qubit_bound:.6} ≤ 2, \
         qutrit bound {qutrit_bound:.6} ≤ {qutrit_ceiling:.6})"
    );
}

fn random_table(rng: &mut ChaCha8Rng) -> CorrelationTable {
    let (xs, ys) = grid_labels();
    let settings = full_grid(&xs, &ys);
    let probs = (0..settings.len())
        .map(|_| {
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / total).collect()
        })
        .collect();
    CorrelationTable::new(settings, 2, 2, probs).unwrap()
}

/// A table whose B-side marginal is forced to depend on the distant setting.
fn signalling_table(rng: &mut ChaCha8Rng) -> CorrelationTable {
    let (xs, ys) = grid_labels();
    let settings = full_grid(&xs, &ys);
    let pa = rng.gen_range(0.2..0.8);
    let pb = [rng.gen_range(0.85..0.95), rng.gen_range(0.05..0.15)];
    let probs = settings
        .iter()
        .map(|(x, _)| {
            let pb = pb[usize::from(x == "x1")];
            vec![pa * pb, pa * (1.0 - pb), (1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb)]
        })
        .collect();
    CorrelationTable::new(settings, 2, 2, probs).unwrap()
}

/// Criterion 6: the tautological model reproduces ten random tables — three
/// of them explicitly signalling — with error below 1e-12, and is always
/// statistically complete and local.
#[test]
fn criterion_6_signalling_models_reproduce_any_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut tables: Vec<CorrelationTable> = (0..7).map(|_| random_table(&mut rng)).collect();
    for _ in 0..3 {
        let table = signalling_table(&mut rng);
        assert!(!detect_signalling(&table).is_empty(), "constructed table must signal");
        tables.push(table);
    }
    for table in &tables {
        let model = build_signalling_model(table).unwrap();
        let report = verify_reproduction(&model, table).unwrap();
        assert!(report.max_abs_error < 1e-12);
        let props = check_properties(&model);
        assert!(props.outcome_independence && props.parameter_independence);
    }
    println!("criterion 6 (tautological models): PASS");
}

/// Criterion 7: causal decomposition matches the Bayes value
/// p(x,y|λ) = w(λ|x,y)p(x,y)/p₀(λ) on ten random weight tables.
#[test]
fn criterion_7_causal_decomposition_matches_bayes() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let (xs, ys) = grid_labels();
    let settings = full_grid(&xs, &ys);
    for _ in 0..10 {
        let n_lambda = rng.gen_range(2..=5);
        let lambda: Vec<String> = (0..n_lambda).map(|l| format!("l{l}")).collect();
        let weights: Vec<Vec<f64>> = (0..settings.len())
            .map(|_| {
                let raw: Vec<f64> = (0..n_lambda).map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / total).collect()
            })
            .collect();
        let raw: Vec<f64> = (0..settings.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p_xy: Vec<f64> = raw.into_iter().map(|p| p / total).collect();

        let mu = causal_decomposition(&lambda, &settings, &weights, &p_xy).unwrap();
        for (l, row) in mu.p_mu_given_lambda.iter().enumerate() {
            let p0: f64 = (0..settings.len()).map(|s| weights[s][l] * p_xy[s]).sum();
            for (s, &p) in row.iter().enumerate() {
                let bayes = weights[s][l] * p_xy[s] / p0;
                assert!((p - bayes).abs() < 1e-12, "λ {l}, setting {s}: {p} vs {bayes}");
            }
        }
    }
    println!("criterion 7 (causal decomposition): PASS");
}

/// Criterion 8: LP membership — 100 interior mixtures are feasible with a
/// reconstructing witness, the singlet table is infeasible with a certificate
/// gap above 0.1, and feasibility coincides with all eight CHSH variants
/// staying under 2.
#[test]
fn criterion_8_lp_membership_and_chsh_cross_check() {
    let (xs, ys) = grid_labels();
    let settings = full_grid(&xs, &ys);
    let strategies = enumerate_deterministic_strategies(&xs, &ys).unwrap();
    let chsh = ChshSettings::standard_2x2();
    let mut rng = ChaCha8Rng::seed_from_u64(47);

    let check_cross = |table: &CorrelationTable, feasible: bool| {
        let all_bounded =
            chsh_variants(table, &chsh).unwrap().iter().all(|v| v.value <= 2.0 + 1e-8);
        assert_eq!(
            feasible, all_bounded,
            "LP and CHSH-orbit verdicts disagree (feasible = {feasible})"
        );
    };

    for i in 0..100 {
        let raw: Vec<f64> = (0..strategies.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> =
            raw.iter().map(|w| 0.9 * w / total + 0.1 / strategies.len() as f64).collect();
        let table = strategy_mixture_table(&strategies, &weights, &settings).unwrap();
        match separability_feasible(&table).unwrap() {
            Separability::Feasible { reconstruction_error, .. } => {
                assert!(reconstruction_error < 1e-8, "mixture {i}: error {reconstruction_error}");
            }
            Separability::Infeasible { .. } => panic!("interior mixture {i} declared infeasible"),
        }
        check_cross(&table, true);
    }

    let [x0, x1, y0, y1] = chsh_optimal_directions();
    let singlet = CorrelationTable::singlet_grid(&[x0, x1], &[y0, y1]).unwrap();
    match separability_feasible(&singlet).unwrap() {
        Separability::Feasible { .. } => panic!("singlet CHSH table declared separable"),
        Separability::Infeasible { certificate } => {
            let gap = certificate.value_on_table - certificate.max_on_strategies;
            assert!(gap > 0.1, "certificate gap {gap} ≤ 0.1");
            println!("criterion 8 (LP membership): PASS (certificate gap {gap:.6})");
        }
    }
    check_cross(&singlet, false);
}

/// Criterion 9: byte-identical CLI output on repeated runs with a fixed seed
/// and thread cap, across every command.
#[test]
fn criterion_9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    let [x0, x1, y0, y1] = chsh_optimal_directions();
    let singlet = CorrelationTable::singlet_grid(&[x0, x1], &[y0, y1]).unwrap();
    std::fs::write(path("table.json"), table_to_json(&singlet).to_string()).unwrap();

    let povm = PovmFamily::from_direction_grid(&[x0, x1], &[y0, y1]).unwrap();
    std::fs::write(path("rho.json"), density_to_json(&singlet_state()).to_string()).unwrap();
    std::fs::write(path("povm.json"), povm_to_json(&povm).unwrap().to_string()).unwrap();

    std::fs::write(
        path("weights.json"),
        r#"{"lambda": ["l0", "l1"],
            "settings": [["x0", "y0"], ["x1", "y0"]],
            "weights": {"x0:y0": [0.3, 0.7], "x1:y0": [0.6, 0.4]},
            "p_xy": {"x0:y0": 0.5, "x1:y0": 0.5}}"#,
    )
    .unwrap();

    let table = path("table.json");
    let rho = path("rho.json");
    let povm_path = path("povm.json");
    let weights = path("weights.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["singlet-check", "--model", "all", "--pairs", "10", "--samples", "20000"],
        vec!["cmd-report", "--model", "degorre"],
        vec!["chsh", "--model", "brans", "--samples", "50000", "--seed", "3"],
        vec!["chsh", "--model", "hall", "--scan", "7"],
        vec!["chsh", "--table", &table],
        vec!["separability", &table],
        vec!["signalling-demo", "--builtin", "b-equals-x"],
        vec!["general-model", "--rho", &rho, "--povm", &povm_path],
        vec!["causal-decompose", &weights],
        vec!["cmd-report", "--model", "brans", "--output", "csv"],
    ];

    for args in &commands {
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_bellsep"))
                .args(args)
                .env("BELLSEP_THREADS", "2")
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            assert!(!out.stdout.is_empty(), "{args:?} printed nothing");
            out.stdout
        };
        let first = run();
        let second = run();
        assert_eq!(first, second, "{args:?} output differs between runs");
    }
    println!("criterion 9 (CLI determinism): PASS ({} commands)", commands.len());
}
