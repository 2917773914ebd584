use super::*;
use crate::noise::NoiseConfig;
use crate::state::{
    basis_state, fidelity, ghz_state, maximally_mixed, random_density_matrix, werner_ghz, PureState,
};
use crate::tomography::tomograph_exact;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ideal(width: usize) -> Result<DensityMatrix> {
    Ok(ghz_state(width)?.density())
}

fn max_dev(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.entries() - b.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Explicit amplitudes `U_ab/√2` of `(U ⊗ I)|EPR>` with `U = Rz(φ)Ry(θ)`.
fn fig5_oracle(theta_deg: f64, phi_deg: f64) -> PureState {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let em = Complex64::from_polar(1.0, -p / 2.0);
    let ep = Complex64::from_polar(1.0, p / 2.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(2, vec![em * c * h, -em * s * h, ep * s * h, ep * c * h]).unwrap()
}

#[test]
fn epr_scan() {
    let rho = epr().density();
    let r = scan(&rho, &ScanConfig::default(), ideal).unwrap();
    assert_eq!(r.support, vec![0, 3]);
    assert_eq!(r.candidates.len(), 1);
    assert_eq!((r.settings_used, r.tomography_settings), (2, 9));
    assert!((fidelity(&r.reconstructed, &rho).unwrap() - 1.0).abs() < 1e-9);
    assert!(!r.psd_projected);
}

#[test]
fn ghz3_scan() {
    let rho = ghz_state(3).unwrap().density();
    let r = scan(&rho, &ScanConfig::default(), ideal).unwrap();
    assert_eq!(r.support.len(), 2);
    assert_eq!((r.settings_used, r.tomography_settings), (2, 27));
    assert!(max_dev(&r.reconstructed, &rho) < 1e-12);
}

#[test]
fn fig5_state_examples() {
    let id = prepare_fig5_state(0.0, 0.0).unwrap();
    assert!(max_dev(&id, &epr().density()) < 1e-15);
    let flat = prepare_fig5_state(90.0, 0.0).unwrap();
    assert!(flat.diagonal().iter().all(|p| (p - 0.25).abs() < 1e-15));
    let rho = prepare_fig5_state(56.0, 20.0).unwrap();
    let oracle = fig5_oracle(56.0, 20.0).density();
    assert!(max_dev(&rho, &oracle) < 1e-12);
    let r = scan(&rho, &ScanConfig::default(), ideal).unwrap();
    assert_eq!(r.support.len(), 4);
    assert_eq!(r.candidates.len(), 6);
    assert_eq!(r.settings_used, 7);
    for est in &r.estimates {
        let want = oracle.entry(est.element.m() as usize, est.element.n() as usize);
        assert!((est.value * want.conj()).arg().abs() < 1e-10, "{}", est.element);
        assert!((est.value - want).norm() < 1e-10);
    }
}

#[test]
fn scan_agrees_with_tomography() {
    let rho = prepare_fig5_state(56.0, 20.0).unwrap();
    let r = scan(&rho, &ScanConfig::default(), ideal).unwrap();
    let t = tomograph_exact(&rho).unwrap();
    assert!(max_dev(&r.reconstructed, &t.reconstructed) < 1e-10);
}

#[test]
fn accounting() {
    let a = settings_accounting(2, 2).unwrap();
    assert_eq!((a.scan, a.tomography), (2, 9));
    let b = settings_accounting(10, 4).unwrap();
    assert_eq!((b.scan, b.ordered_elements, b.tomography), (7, 12, 59049));
    let c = settings_accounting(4, 16).unwrap();
    assert_eq!((c.scan, c.tomography), (121, 81));
    assert!(settings_accounting(2, 5).is_err());
    assert!(settings_accounting(2, 0).is_err());
}

#[test]
fn ghz_support_plans_without_the_matrix() {
    for n in 2..=40usize {
        let top = (1u64 << n) - 1;
        let p = plan_scan(n, &[0, top], false).unwrap();
        assert_eq!(p.settings_used, 2);
        assert_eq!(p.tomography_settings, 3u128.pow(n as u32));
        assert_eq!(compile_plan(&p.candidates[0]).unwrap().ghz_width, n + 1);
    }
}

#[test]
fn degenerate_and_invalid() {
    let cfg = ScanConfig { population_threshold: 0.5, ..Default::default() };
    let r = scan(&maximally_mixed(2).unwrap(), &cfg, ideal);
    assert!(matches!(r, Err(Error::DegenerateState { .. })));
    assert!(scan(&epr().density(), &ScanConfig { population_threshold: 1.0, ..Default::default() }, ideal)
        .is_err());
    assert!(scan(&epr().density(), &ScanConfig { p_correction: 0.0, ..Default::default() }, ideal).is_err());
    assert!(plan_scan(2, &[], false).is_err());
    assert!(plan_scan(2, &[4], false).is_err());
}

#[test]
fn single_support_point_needs_one_setting() {
    let r = scan(&basis_state(3, 5).unwrap().density(), &ScanConfig::default(), ideal).unwrap();
    assert_eq!(r.settings_used, 1);
    assert!(r.estimates.is_empty());
}

#[test]
fn branch_reuse_matches_per_element_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rho = random_density_matrix(3, 8, &mut rng).unwrap();
    let plain = scan(&rho, &ScanConfig::default(), ideal).unwrap();
    let reuse = scan(&rho, &ScanConfig { reuse_branches: true, ..Default::default() }, ideal).unwrap();
    assert_eq!(plain.settings_used, 29);
    assert_eq!(reuse.settings_used, 8);
    assert!(max_dev(&plain.reconstructed, &reuse.reconstructed) < 1e-12);
    assert!(max_dev(&plain.reconstructed, &rho) < 1e-10);
}

#[test]
fn sampled_scan_is_close_and_reproducible() {
    let rho = prepare_fig5_state(56.0, 20.0).unwrap();
    let cfg = ScanConfig { shots_per_setting: 200_000, seed: 3, ..Default::default() };
    let a = scan(&rho, &cfg, ideal).unwrap();
    assert_eq!(a, scan(&rho, &cfg, ideal).unwrap());
    assert!(fidelity(&a.reconstructed, &rho).unwrap() > 0.99);
    let reuse = scan(&rho, &ScanConfig { reuse_branches: true, ..cfg }, ideal).unwrap();
    assert!(fidelity(&reuse.reconstructed, &rho).unwrap() > 0.99);
}

#[test]
fn noisy_resource_is_corrected() {
    let rho = ghz_state(3).unwrap().density();
    let noise = NoiseConfig { ghz_werner_p: 0.6, system_depolarizing: 0.0 };
    let raw = scan(&rho, &ScanConfig::default(), |w| noise.ghz(w)).unwrap();
    assert!((raw.estimates[0].value.re - 0.3).abs() < 1e-12);
    let fixed =
        scan(&rho, &ScanConfig { p_correction: 0.6, ..Default::default() }, |w| werner_ghz(w, 0.6)).unwrap();
    assert!(max_dev(&fixed.reconstructed, &rho) < 1e-12);
}

#[test]
fn record_export() {
    let r = scan(&epr().density(), &ScanConfig::default(), ideal).unwrap();
    let rec = r.to_record();
    assert_eq!(rec.support, vec!["00", "11"]);
    assert_eq!(rec.tomography_settings, "9");
    assert_eq!(rec.estimates[0].m, "00");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_scan_recovers_sparse_states(seed in any::<u64>(), n in 2usize..=4, s in 1usize..=4) {
        // pure state on a random s-element support
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1usize << n;
        let mut idx: Vec<usize> = (0..d).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let sub = crate::state::random_pure_state(2, &mut rng).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        for (k, &i) in idx.iter().take(s).enumerate() {
            amps[i] = sub.amplitudes()[k] + Complex64::new(0.05, 0.0);
        }
        let psi = PureState::normalized(n, amps).unwrap();
        let rho = psi.density();
        let cfg = ScanConfig { population_threshold: 0.0, ..Default::default() };
        let r = scan(&rho, &cfg, ideal).unwrap();
        prop_assert!(max_dev(&r.reconstructed, &rho) < 1e-9);
        prop_assert_eq!(r.candidates.len(), r.support.len() * (r.support.len() - 1) / 2);
        prop_assert_eq!(r.settings_used, 1 + r.candidates.len() as u64);
        prop_assert!(r.reconstructed.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn large_populations_always_in_support(seed in any::<u64>(), t in 1e-4f64..0.05) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(3, 2, &mut rng).unwrap();
        let cfg = ScanConfig { population_threshold: t, ..Default::default() };
        if let Ok(r) = scan(&rho, &cfg, ideal) {
            for (i, &p) in rho.diagonal().iter().enumerate() {
                if p >= 2.0 * t {
                    prop_assert!(r.support.contains(&(i as u64)));
                }
            }
        }
    }
}
