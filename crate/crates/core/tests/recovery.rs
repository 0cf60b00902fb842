use csrx_core::recon::{assess, irls_bp_solve, omp_solve, IrlsSettings, OmpSettings};
use csrx_core::rng::rng_for;
use csrx_core::sigmodel::realize;
use csrx_core::{
    Band, Dictionary, DropPolicy, FrontendConfig, Observation, Receiver, SamplingPattern,
    SignalSpec, SolverSettings, TimeGrid, ToneSpec,
};
use nalgebra::DVector;
use rand::Rng;
use std::f64::consts::TAU;

/// Both solvers reach well past this on exact data; above it the
/// difference is float residue.
const EXACT_DB: f64 = 100.0;

fn design() -> Band {
    Band::new(0.0, 20e3)
}

fn interferers() -> Vec<Band> {
    vec![Band::new(40e3, 50e3)]
}

fn dictionary(pattern: &SamplingPattern) -> Dictionary {
    Dictionary::build(
        design(),
        &interferers(),
        pattern.grid(),
        &pattern.dense_index_vec(),
        1e3,
    )
    .unwrap()
}

struct Case {
    spec: SignalSpec,
    fd: f64,
    fi: f64,
    pattern: SamplingPattern,
}

fn case(seed: u64, keep: usize, gap: usize) -> Case {
    let mut rng = rng_for(seed, &[0xCA5E]);
    let fd = rng.random_range(1..=20) as f64 * 1e3;
    let fi = rng.random_range(40..=50) as f64 * 1e3;
    let spec = SignalSpec::new(design())
        .interferer_band(interferers()[0])
        .tone(
            ToneSpec::desired(fd, rng.random_range(0.5..2.0))
                .with_phase(rng.random_range(0.0..TAU)),
        )
        .tone(
            ToneSpec::interferer(fi, rng.random_range(1.0..5.0))
                .with_phase(rng.random_range(0.0..TAU)),
        );
    let pattern = SamplingPattern::random(TimeGrid::default(), 5, keep, gap, seed).unwrap();
    Case {
        spec,
        fd,
        fi,
        pattern,
    }
}

fn observe(c: &Case) -> (csrx_core::SignalFrame, Observation) {
    let frame = realize(&c.spec, c.pattern.grid(), 0).unwrap();
    let obs = Observation::direct(frame.samples(), c.pattern.clone()).unwrap();
    (frame, obs)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn omp_recovers_two_tones_from_sparse_patterns() {
    let mut hits = 0;
    for seed in 0..200 {
        let c = case(seed, 8, 20);
        let (_, obs) = observe(&c);
        let r = omp_solve(&obs, &dictionary(&c.pattern), &OmpSettings::default()).unwrap();
        if r.residual_norm <= 1e-6 * norm(&obs.values) {
            hits += 1;
        }
    }
    assert!(hits >= 190, "{hits}/200 exact recoveries");
}

#[test]
fn omp_matches_least_squares_on_true_support() {
    let mut agree = 0;
    for seed in 0..100 {
        let c = case(seed, 16 + (seed as usize % 32), 2);
        let (_, obs) = observe(&c);
        let dict = dictionary(&c.pattern);
        let r = omp_solve(&obs, &dict, &OmpSettings::default()).unwrap();

        let support: Vec<usize> = [c.fd, c.fi]
            .iter()
            .flat_map(|&f| dict.groups()[dict.group_of(f).unwrap()].clone())
            .collect();
        let sub = dict.matrix().select_columns(&support);
        let y = DVector::from_column_slice(&obs.values);
        let ls = sub.svd(true, true).solve(&y, 1e-12).unwrap();
        let oracle: Vec<(usize, f64)> = support.iter().copied().zip(ls.iter().copied()).collect();

        let (a0, p0) = dict.tone_estimate(&oracle, c.fd).unwrap();
        let (a1, p1) = dict.tone_estimate(&r.coefficients, c.fd).unwrap();
        let dphase = (p1 - p0 + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
            - std::f64::consts::PI;
        if (a1 - a0).abs() <= 1e-6 * a0
            && dphase.abs() <= 1e-6
            && r.residual_norm <= 1e-6 * y.norm()
        {
            agree += 1;
        }
    }
    assert!(agree >= 99, "{agree}/100 agree with the oracle");
}

#[test]
fn solvers_agree_on_exact_data() {
    for seed in 0..40 {
        let c = case(seed, 24, 2);
        let (frame, obs) = observe(&c);
        let dict = dictionary(&c.pattern);
        let snr = |r| {
            assess(r, &frame, 1.0, 40.0)
                .unwrap()
                .desired_snr_db
                .unwrap()
                .min(EXACT_DB)
        };
        let omp = snr(omp_solve(&obs, &dict, &OmpSettings::default()).unwrap());
        let irls = snr(irls_bp_solve(&obs, &dict, &IrlsSettings::default()).unwrap());
        assert!(
            (omp - irls).abs() <= 3.0,
            "seed {seed}: omp {omp} irls {irls}"
        );
    }
}

#[test]
fn irls_reconstructs_two_tones() {
    for seed in 0..20 {
        let c = case(seed, 32, 2);
        let (frame, obs) = observe(&c);
        let r = irls_bp_solve(&obs, &dictionary(&c.pattern), &IrlsSettings::default()).unwrap();
        let snr = assess(r, &frame, 1.0, 40.0)
            .unwrap()
            .desired_snr_db
            .unwrap();
        assert!(snr >= 60.0, "seed {seed}: {snr} dB");
    }
}

#[test]
fn undeclared_interferer_degrades_the_estimate() {
    let receiver = Receiver::new(
        FrontendConfig::default(),
        SamplingPattern::random(TimeGrid::default(), 5, 40, 2, 11).unwrap(),
        DropPolicy::keep_all(),
        design(),
        interferers(),
        SolverSettings::default(),
    )
    .unwrap();
    let spec = |fi: f64| {
        SignalSpec::new(design())
            .interferer_band(interferers()[0])
            .tone(ToneSpec::desired(10e3, 1.0).with_phase(0.3))
            .tone(ToneSpec::interferer(fi, 3.16).with_phase(1.1))
    };
    let declared = receiver.run(&spec(45e3), 5).unwrap();
    // 25 kHz and its 55 kHz alias on the 80 kHz clock lie outside every band
    let undeclared = receiver.run(&spec(25e3), 5).unwrap();
    assert!(declared.success);
    assert!(!undeclared.success);
    assert!(
        declared.snr_db - undeclared.snr_db > 60.0,
        "{} vs {}",
        declared.snr_db,
        undeclared.snr_db
    );
}
