use visco2::configurations::{gen_periodic_pattern, PeriodicPattern, RadialPairCorrelation};
use visco2::corrector::*;
use visco2::estimate::Route;
use visco2::{Basis5, Error};

const ALPHA: f64 = 9.467481722187;
const BETA: f64 = -2.144987814791;

#[test]
fn simple_cubic_constants_agree() {
    let c = simple_cubic_constants().unwrap();
    assert!((c.alpha - ALPHA).abs() < 1e-9);
    assert!((c.beta - BETA).abs() < 1e-9);
    assert!((c.a_from_alpha - c.a_from_beta).abs() < 1e-13);
    let t = mu2_lattice_tensor(&PeriodicPattern::simple_cubic(), 1.0).unwrap();
    let m = match &t.value {
        visco2::estimate::Mu2Value::Tensor(m) => m.clone(),
        _ => panic!("tensor expected"),
    };
    let m5 = m.matrix5();
    for i in 0..5 {
        let want = if i < 2 { ALPHA } else { BETA };
        assert!((m5[i][i] - want).abs() < 1e-9);
        for j in 0..5 {
            if i != j {
                assert!(m5[i][j].abs() < 1e-9, "({i},{j}) = {}", m5[i][j]);
            }
        }
    }
}

#[test]
fn energy_route_matches_lattice_route() {
    let e = Basis5::canonical().e;
    let sc = PeriodicPattern::simple_cubic();
    let opts = EnergyOptions::default();
    let coarse = energy_route_at(&sc, 0.15, &e[0], 32, &opts).unwrap();
    let fine = energy_route_at(&sc, 0.15, &e[0], 64, &opts).unwrap();
    assert!((coarse.value - ALPHA).abs() / ALPHA < 2e-5, "{}", coarse.value);
    assert!((fine.value - ALPHA).abs() < (coarse.value - ALPHA).abs());
    assert!(fine.windowed_energy <= fine.raw_energy);

    let pat = gen_periodic_pattern(4, 0.5, 7).unwrap();
    let lat = mu2_lattice_route(&pat, &[e[2]], 1.0).unwrap().quadratic(&e[2]).unwrap();
    let est = mu2_energy_route(&pat, 0.14, &[e[2]], 64, &opts).unwrap();
    assert_eq!(est.route, Route::CorrectorEnergy);
    let v = est.quadratic(&e[2]).unwrap();
    assert!((v - lat).abs() / lat.abs() < 1e-3);
    assert!(est.error_bar > (v - lat).abs() * 0.1);
    assert_eq!(est.params["N"], 64);
}

#[test]
fn admissibility_is_checked() {
    let e = Basis5::canonical().e;
    let pat = gen_periodic_pattern(4, 0.5, 7).unwrap();
    let d = SourceDiscretization::Analytic;
    for (eta, n) in [(0.0, 64), (0.2, 64), (0.1, 32)] {
        assert!(matches!(build_corrector_source(&pat, eta, &e[0], n, d), Err(Error::Domain(_))), "{eta} {n}");
    }
    assert!(build_corrector_source(&pat, 0.1, &e[0], 64, d).is_ok());
}

#[test]
fn stokes_solution_is_divergence_free_and_parseval_holds() {
    let e = Basis5::canonical().e;
    let pat = gen_periodic_pattern(2, 0.5, 1).unwrap();
    for disc in [SourceDiscretization::Analytic, SourceDiscretization::PointSampled] {
        let src = build_corrector_source(&pat, 0.18, &(e[0] * 0.6 + e[3] * 0.8), 32, disc).unwrap();
        let (h, _) = solve_periodic_stokes(&src.field).unwrap();
        assert!(h.divergence_residual() < 1e-12, "{}", h.divergence_residual());
        assert!(h.mean().iter().all(|z| z.norm() == 0.0));
        let spectral = corrector_energy(&h, None);
        let grid = h.grid_gradient_energy();
        assert!((spectral - grid).abs() < 1e-10 * spectral, "{spectral} {grid}");
    }
}

#[test]
fn spectral_window_shape() {
    let w = SpectralWindow::for_grid(64);
    assert_eq!(w.chi(0.0), 1.0);
    assert_eq!(w.chi(0.3 * 32.0), 1.0);
    assert_eq!(w.chi(32.0), 0.0);
    let mut prev = 1.0;
    for k in 10..32 {
        let c = w.chi(k as f64);
        assert!(c <= prev && c >= 0.0);
        prev = c;
    }
}

#[test]
fn field_export_round_trip() {
    let e = Basis5::canonical().e;
    let src = build_corrector_source(&PeriodicPattern::simple_cubic(), 0.25, &e[1], 16, SourceDiscretization::Analytic).unwrap();
    let (h, _) = solve_periodic_stokes(&src.field).unwrap();
    let dir = tempfile::tempdir().unwrap();
    export_field(&h, dir.path(), "h").unwrap();
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.json")).unwrap()).unwrap();
    assert_eq!(side["N"], 16);
    assert_eq!(side["layout"], "row-major complex interleaved");
    let bytes = std::fs::read(dir.path().join("h.bin")).unwrap();
    assert_eq!(bytes.len(), 16 * 16 * 16 * 3 * 16);
    // first stored value after the zero mode is Re h_x at flat index 1
    let re = f64::from_le_bytes(bytes[48..56].try_into().unwrap());
    assert_eq!(re, h.coeffs[1][0].re);
    let back = import_field(dir.path(), "h").unwrap();
    assert_eq!(back.coeffs, h.coeffs);
    std::fs::write(dir.path().join("h.bin"), &bytes[..100]).unwrap();
    assert!(import_field(dir.path(), "h").is_err());
}

// brute-force ray quadrature of the lattice kernel against the window autocorrelation
// (40-point Gauss rules, hole of radius h/L removed), L = 0.4, M = 0.1
const BRUTE: [f64; 3] = [0.009766534785090972, -0.001555651849579904, 0.0025203333301746407];

#[test]
fn ergodic_window_matches_brute_force() {
    let e = Basis5::canonical().e;
    let r = RadialPairCorrelation::step(1.0, 0.05);
    let strains = [e[0], e[2], e[1] * 0.6 + e[4] * 0.8];
    for (s, want) in strains.iter().zip(BRUTE) {
        let v = ergodic_window_value(&r, 1.0, s, 0.4, 0.1, &ErgodicOptions::default()).unwrap();
        assert!((v - want).abs() < 1e-4 * want.abs(), "{v} {want}");
    }
    assert!(ergodic_window_value(&r, 1.0, &e[0], 0.3, 0.1, &ErgodicOptions::default()).is_err());
    assert!(ergodic_window_value(&r, 1.0, &e[0], 1.0, 0.01, &ErgodicOptions::default()).is_err());
}

#[test]
fn ergodic_route_recovers_isotropic_value() {
    let e = Basis5::canonical().e;
    let r = RadialPairCorrelation::step(1.0, 0.05);
    let est = mu2_ergodic_route(&r, 1.0, &[e[0], e[2]], &[6.4, 12.8, 25.6], 0.1, 1.0).unwrap();
    let iso = isotropic_reference(1.0);
    for s in [e[0], e[2]] {
        let v = est.quadratic(&s).unwrap();
        assert!((v - iso.contract(&s, &s)).abs() < 2.5e-2, "{v}");
    }
    assert!(mu2_ergodic_route(&r, 1.0, &[e[0]], &[6.4], 0.1, 1.0).is_err());
    // the pair correlation scales out with the intensity
    let r2 = r.scaled(4.0);
    let a = ergodic_window_value(&r, 1.0, &e[0], 6.4, 0.1, &ErgodicOptions::default()).unwrap();
    let b = ergodic_window_value(&r2, 2.0, &e[0], 6.4, 0.1, &ErgodicOptions::default()).unwrap();
    assert!((a - b).abs() < 1e-12 * a.abs());
}

#[test]
fn isotropic_reference_is_five_halves() {
    let iso = isotropic_reference(2.0);
    let s = visco2::Sym3::embed(&[0.1, 0.2, 0.3, 0.4, 0.5]);
    assert!((iso.contract(&s, &s) - 5.0 * s.norm_sq()).abs() < 1e-14);
}
