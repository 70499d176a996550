//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line per checked statement (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned in code — see `wpme_cli::experiments::tol`
//! and the constants below.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wpme::mesh::{assemble, BoundaryKind, Field, Mesh1D};
use wpme::solver::{evolve, DtPolicy, SolverConfig};
use wpme::weights::WeightSpec;

use wpme_cli::{ExperimentConfig, Report};

fn run_cfg(text: &str) -> Report {
    let cfg = ExperimentConfig::from_text(text).expect("config parses");
    let dir = tempfile::tempdir().expect("tempdir");
    wpme_cli::run(&cfg, dir.path()).expect("experiment runs")
}

fn assert_verdicts(criterion: &str, report: &Report, names: &[&str]) {
    for name in names {
        let v = report
            .verdicts
            .iter()
            .find(|v| v.name == *name)
            .unwrap_or_else(|| panic!("{criterion}: verdict `{name}` missing"));
        println!(
            "{} {criterion}/{}: value={:.6e} target={:.6e} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.target,
            v.detail
        );
        assert!(
            v.pass,
            "{criterion}: `{name}` failed with value {} vs target {}",
            v.value, v.target
        );
    }
}

#[test]
fn c01_barenblatt_exactness_radial() {
    let report = run_cfg(
        r#"
        kind = "barenblatt-verify"
        family = "radial_power"
        N = 3
        b = 1.0
        n = 2048
        m = 2.0
        datum = "barenblatt"
        barenblatt_c = 0.05
        t0 = 0.01
        levels = [512, 1024, 2048]
        "#,
    );
    assert_verdicts(
        "criterion-1",
        &report,
        &[
            "linf_error_vs_exact",
            "mass_drift",
            "self_convergence_order",
        ],
    );
}

#[test]
fn c02_weighted_barenblatt() {
    let report = run_cfg(
        r#"
        kind = "barenblatt-verify"
        family = "power"
        alpha = 0.0
        beta = 1.5
        b = 1.0
        n = 1024
        m = 2.0
        datum = "barenblatt"
        barenblatt_c = 0.16666666666666666
        t0 = 1e-3
        "#,
    );
    // ζ = 1/(m+1-β) = 2/3
    let zeta = report.predicted["decay_exponent"];
    assert!((zeta - 2.0 / 3.0).abs() < 1e-15);
    assert_verdicts(
        "criterion-2",
        &report,
        &["decay_exponent", "decay_fit_r2", "mass_drift"],
    );
}

#[test]
fn c03_smoothing_sharpness() {
    let report = run_cfg(
        r#"
        kind = "smoothing"
        family = "radial_power"
        N = 3
        b = 1.0
        n = 1024
        m = 2.0
        datum = "spike"
        spike_width = 0.05
        spike_height = 900.0
        "#,
    );
    // q0 = 1 prediction equals the Barenblatt decay exponent 3/5
    assert!((report.predicted["smoothing_exponent_q0_1"] - 0.6).abs() < 1e-15);
    assert_verdicts(
        "criterion-3",
        &report,
        &[
            "smoothing_exponent_q0_1",
            "smoothing_exponent_q0_1_r2",
            "smoothing_exponent_q0_2",
            "smoothing_exponent_q0_2_r2",
            "exponent_ordering_in_q0",
            "mass_drift",
        ],
    );
}

#[test]
fn c04_zero_mean_absolute_bound() {
    for m in [2.0, 3.0] {
        let report = run_cfg(&format!(
            r#"
            kind = "decay-zero-mean"
            family = "unit"
            n = 256
            m = {m}
            datum = "eigen-perturbation"
            mean = 0.0
            c1 = 1.0
            t_lo = 1e-2
            t_hi = 2e3
            "#
        ));
        assert!(
            (report.predicted["zero_mean_exponent"] - 1.0 / (m - 1.0)).abs() < 1e-15
        );
        assert_verdicts(
            &format!("criterion-4(m={m})"),
            &report,
            &["zero_mean_exponent", "zero_mean_fit_r2", "mass_drift"],
        );
    }
}

#[test]
fn c05_sharp_exponential_rate() {
    let report = run_cfg(
        r#"
        kind = "decay-mean"
        family = "unit"
        n = 512
        m = 2.0
        datum = "eigen-perturbation"
        mean = 1.0
        c1 = 0.02
        t_lo = 0.005
        t_hi = 0.5
        points_per_decade = 48
        "#,
    );
    // rate target is m·λ₁ with the discrete λ₁ from the spectral module
    let lambda1 = report.measured["lambda1"];
    assert!((report.predicted["exp_rate"] - 2.0 * lambda1).abs() < 1e-12);
    assert_verdicts(
        "criterion-5",
        &report,
        &["exp_rate", "exp_rate_r2", "mass_drift"],
    );
}

#[test]
fn c06_spectral_oracle() {
    let report = run_cfg(
        r#"
        kind = "spectral"
        family = "unit"
        a = 0.0
        b = 1.0
        n = 512
        "#,
    );
    assert_verdicts(
        "criterion-6",
        &report,
        &[
            "lambda1_vs_reference",
            "poincare_vs_reference",
            "eig_residual",
            "eigenvector_zero_mean",
        ],
    );
    // C_P = λ₁^{-1/2} by construction
    let l1 = report.measured["lambda1"];
    let cp = report.measured["poincare_constant"];
    assert!((cp - l1.sqrt().recip()).abs() < 1e-15);
}

#[test]
fn c07_sobolev_admissibility_scan() {
    let report = run_cfg(
        r#"
        kind = "sobolev-scan"
        family = "power"
        alpha = 2.0
        beta = 1.5
        b = 1.0
        sigma_list = [3.0, 8.0]
        levels = [64, 512, 4096]
        seed = 0
        "#,
    );
    // catalog upper endpoint (α+1)/(β-1) = 6
    assert!((report.predicted["sigma_upper"] - 6.0).abs() < 1e-12);
    assert_verdicts(
        "criterion-7",
        &report,
        &["flat_trend_sigma_3", "likely_unbounded_sigma_8"],
    );
}

/// Shared generator for the randomized paired runs of criterion 8.
struct PairedRun {
    ops: wpme::Ops64,
    cfg: SolverConfig<f64>,
    u0: Field<f64>,
    v0: Field<f64>,
    times: Vec<f64>,
    q0: f64,
}

fn paired_run(seed: u64) -> PairedRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(12..40);
    let spec = match rng.gen_range(0..4) {
        0 => WeightSpec::unit(0.0, 1.0).unwrap(),
        1 => WeightSpec::power(rng.gen_range(0.0..2.5), rng.gen_range(0.0..1.8), 1.0).unwrap(),
        2 => WeightSpec::radial_power(rng.gen_range(2..5), 1.0).unwrap(),
        _ => WeightSpec::exponential(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            -0.5,
            1.0,
        )
        .unwrap(),
    };
    let grading = if spec.singular_at_left() { 2.0 } else { 1.0 };
    let mesh = Mesh1D::build(spec.domain(), n, grading).unwrap();
    let ops = assemble(&spec, &mesh, BoundaryKind::Neumann).unwrap();
    let m = rng.gen_range(1.3..3.5);
    let dt = rng.gen_range(1e-3..6e-3);
    let cfg = SolverConfig::new(m, DtPolicy::Fixed(dt)).unwrap();
    let u0 = Field((0..n).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<f64>>());
    let v0 = Field(
        u0.0.iter()
            .map(|&x| x + rng.gen_range(0.0..1.2))
            .collect::<Vec<f64>>(),
    );
    let times: Vec<f64> = (1..=4).map(|k| k as f64 * 0.02).collect();
    let q0 = rng.gen_range(1.0..4.0);
    PairedRun {
        ops,
        cfg,
        u0,
        v0,
        times,
        q0,
    }
}

#[test]
fn c08a_l1_contraction_100_runs() {
    for seed in 0..100u64 {
        let run = paired_run(seed);
        let tu = evolve(&run.ops, &run.cfg, &run.u0, &run.times, run.q0, true).unwrap();
        let tv = evolve(&run.ops, &run.cfg, &run.v0, &run.times, run.q0, true).unwrap();
        let pos_l1 = |a: &Field<f64>, b: &Field<f64>| {
            let d = Field(
                a.0.iter()
                    .zip(&b.0)
                    .map(|(x, y)| (x - y).max(0.0))
                    .collect::<Vec<f64>>(),
            );
            run.ops.norm(&d, 1.0).unwrap()
        };
        let initial = pos_l1(&run.u0, &run.v0);
        for (su, sv) in tu.snapshots.iter().zip(&tv.snapshots) {
            assert!(
                pos_l1(&su.1, &sv.1) <= initial + 1e-9,
                "L1 contraction violated at seed {seed}"
            );
        }
    }
    println!("PASS criterion-8/l1_contraction: 100/100 paired runs within 1e-9");
}

#[test]
fn c08b_order_preservation_100_runs() {
    for seed in 1000..1100u64 {
        let run = paired_run(seed);
        let tu = evolve(&run.ops, &run.cfg, &run.u0, &run.times, run.q0, true).unwrap();
        let tv = evolve(&run.ops, &run.cfg, &run.v0, &run.times, run.q0, true).unwrap();
        for (su, sv) in tu.snapshots.iter().zip(&tv.snapshots) {
            for (a, b) in su.1 .0.iter().zip(&sv.1 .0) {
                assert!(
                    *a <= *b + 1e-10,
                    "order preservation violated at seed {seed}: {a} > {b}"
                );
            }
        }
    }
    println!("PASS criterion-8/order_preservation: 100/100 paired runs within 1e-10");
}

#[test]
fn c08c_norm_non_expansivity_100_runs() {
    for seed in 2000..2100u64 {
        let run = paired_run(seed);
        let traj = evolve(&run.ops, &run.cfg, &run.u0, &run.times, run.q0, false).unwrap();
        let mut prev = traj.records[0];
        for rec in &traj.records[1..] {
            for (now, before) in [
                (rec.l1, prev.l1),
                (rec.l2, prev.l2),
                (rec.lq0, prev.lq0),
                (rec.linf, prev.linf),
                (rec.l2_err_mean, prev.l2_err_mean),
                (rec.linf_err_mean, prev.linf_err_mean),
            ] {
                assert!(
                    now <= before + 1e-10,
                    "norm grew at seed {seed}: {before} -> {now}"
                );
            }
            prev = *rec;
        }
    }
    println!("PASS criterion-8/norm_non_expansivity: 100/100 runs within 1e-10");
}

#[test]
fn c08d_mean_preservation_100_runs() {
    for seed in 3000..3100u64 {
        let run = paired_run(seed);
        let traj = evolve(&run.ops, &run.cfg, &run.u0, &run.times, run.q0, false).unwrap();
        let mass0 = traj.records[0].mass;
        let mean0 = traj.records[0].mean;
        for rec in &traj.records {
            assert!(
                (rec.mass - mass0).abs() <= 1e-12 * (1.0 + mass0.abs()),
                "mass drifted at seed {seed}"
            );
            assert!(
                (rec.mean - mean0).abs() <= 1e-12 * (1.0 + mean0.abs()),
                "mean drifted at seed {seed}"
            );
        }
    }
    println!("PASS criterion-8/mean_preservation: 100/100 runs within 1e-12");
}

#[test]
fn c08e_scaling_invariance_100_runs() {
    for seed in 4000..4100u64 {
        let run = paired_run(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let lambda: f64 = rng.gen_range(0.5..3.0);
        let m = run.cfg.m;
        let scale = lambda.powf(m - 1.0);
        let tu = evolve(&run.ops, &run.cfg, &run.u0, &run.times, run.q0, true).unwrap();
        let scaled_u0 = run.u0.map(|x| x / lambda);
        let scaled_times: Vec<f64> = run.times.iter().map(|t| t * scale).collect();
        let mut scaled_cfg = run.cfg;
        if let DtPolicy::Fixed(dt) = run.cfg.dt_policy {
            scaled_cfg.dt_policy = DtPolicy::Fixed(dt * scale);
        }
        let tv = evolve(&run.ops, &scaled_cfg, &scaled_u0, &scaled_times, run.q0, true).unwrap();
        for (su, sv) in tu.snapshots.iter().zip(&tv.snapshots) {
            for (a, b) in su.1 .0.iter().zip(&sv.1 .0) {
                assert!(
                    (a / lambda - b).abs() <= 1e-9,
                    "scaling invariance violated at seed {seed}: {} vs {b}",
                    a / lambda
                );
            }
        }
    }
    println!("PASS criterion-8/scaling_invariance: 100/100 paired runs within 1e-9");
}

#[test]
fn c09_lemma_checks() {
    let phi = run_cfg(
        r#"
        kind = "phi-check"
        samples = 1000
        r_min = 0.5
        r_max = 50.0
        R = 2.0
        seed = 0
        "#,
    );
    assert_verdicts(
        "criterion-9",
        &phi,
        &["margins_finite_positive", "upper_chain_bound"],
    );
    let lemma = run_cfg(
        r#"
        kind = "lemma31-check"
        pairs = 5
        X = 50.0
        per_decade = 12
        seed = 0
        "#,
    );
    assert_verdicts(
        "criterion-9",
        &lemma,
        &[
            "sup_stable_under_grid_extension",
            "prior_exponent_strictly_dominated",
        ],
    );
}

#[test]
fn c10_dirichlet_variant() {
    let report = run_cfg(
        r#"
        kind = "smoothing"
        bc = "dirichlet"
        family = "unit"
        a = 0.0
        b = 1.0
        n = 1024
        m = 2.0
        q0 = 1.0
        datum = "spike"
        spike_width = 0.02
        spike_height = 500.0
        t_lo = 1e-7
        t_hi = 1e3
        fit_t_lo = 1e-4
        fit_t_hi = 1e-2
        "#,
    );
    // σ range is (1, ∞); the prediction uses the limit 1/(q0+m-1) = 1/2
    assert!((report.predicted["smoothing_exponent"] - 0.5).abs() < 1e-15);
    assert_verdicts(
        "criterion-10",
        &report,
        &["smoothing_exponent", "short_fit_r2", "late_pure_power_r2"],
    );
}
