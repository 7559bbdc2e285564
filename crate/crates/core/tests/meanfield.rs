use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visco2::configurations::*;
use visco2::kernels;
use visco2::meanfield::*;
use visco2::tensor::vec3;
use visco2::{Basis5, Error, Sym3};

fn random_config(n: usize, seed: u64) -> ParticleConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| [0; 3].map(|_| rng.gen_range(-0.45..0.45))).collect();
    ParticleConfig::new(pts, Domain::UnitCube, 0.05, 0.1).unwrap()
}

#[test]
fn two_point_pair_sum() {
    // ℳ(e1) S:S = -2 + 5 = 3 for S = diag(1,-1,0); two ordered pairs over n² = 4
    let s = Sym3::diag(1.0, -1.0, 0.0).unwrap();
    let cfg = ParticleConfig::new(vec![[0.0; 3], [0.4, 0.0, 0.0]], Domain::UnitCube, 0.01, 0.1).unwrap();
    let d = discrete_pair_sum(&cfg, &PairingTestFunction::One).unwrap().contract(&s, &s);
    assert!((d * 0.4f64.powi(3) - 1.5).abs() < 1e-13);
    let c = discrete_pair_sum_contracted(&cfg, &PairingTestFunction::One, &s);
    assert!((c - d).abs() < 1e-12);
}

#[test]
fn pair_sum_over_ordered_pairs() {
    let cfg = random_config(60, 4);
    let s = Sym3::embed(&[0.4, -0.3, 0.2, 0.7, -0.1]);
    let f = PairingTestFunction::general(|x, y| 1.0 + x[0] - 2.0 * y[1] + x[2] * y[2]);
    let mut brute = 0.0;
    for (i, x) in cfg.points.iter().enumerate() {
        for (j, y) in cfg.points.iter().enumerate() {
            if i != j {
                brute += f.eval(x, y) * kernels::m_contract(&vec3::sub(x, y), &s, &s).unwrap();
            }
        }
    }
    brute /= (cfg.n() * cfg.n()) as f64;
    let fast = discrete_pair_sum_contracted(&cfg, &f, &s);
    assert!((fast - brute).abs() < 1e-11 * brute.abs().max(1.0), "{fast} {brute}");
    let t = discrete_pair_sum(&cfg, &f).unwrap().contract(&s, &s);
    assert!((t - brute).abs() < 1e-11 * brute.abs().max(1.0));

    let zero = PairingTestFunction::general(|_, _| 0.0);
    assert_eq!(discrete_pair_sum(&cfg, &zero).unwrap().max_abs(), 0.0);

    let phi = SmoothScalar::affine(1.0, [0.3, -0.2, 0.5]);
    let tp = PairingTestFunction::square(&phi);
    let p2 = phi.clone();
    let gen = PairingTestFunction::general(move |x, y| p2.value(x) * p2.value(y));
    let a = discrete_pair_sum(&cfg, &tp).unwrap();
    let b = discrete_pair_sum(&cfg, &gen).unwrap();
    assert!((a - b).max_abs() < 1e-12);
}

// background PV values from the finest resolution ladder, frozen
#[test]
fn background_oracles() {
    let e = Basis5::canonical().e;
    let res = BackgroundResolution::default();
    let ball = background_integral(&Density::indicator(Domain::UnitBall), &PairingTestFunction::One, &res).unwrap();
    assert!(ball.pv.max_abs() < 1e-10);
    assert!((ball.diagonal - 1.0).abs() < 1e-12);
    let shift = delta_term(1.0);
    assert!((ball.value.contract(&e[0], &e[0]) + shift).abs() < 1e-10);

    let cube = background_integral(&Density::indicator(Domain::UnitCube), &PairingTestFunction::One, &res).unwrap();
    let (a1, a3) = (cube.pv.contract(&e[0], &e[0]), cube.pv.contract(&e[2], &e[2]));
    assert!((a1 - 0.277864242167).abs() < 1e-9, "{a1}");
    assert!((a3 + 0.185242828111).abs() < 1e-9, "{a3}");
    // zero spherical mean of ℳ: the trace over the basis vanishes
    assert!((2.0 * a1 + 3.0 * a3).abs() < 1e-10);
    assert!(cube.certificate < 1e-8);

    let phi = SmoothScalar::affine(1.0, [0.3, -0.2, 0.5]);
    let f = PairingTestFunction::square(&phi);
    let cube = background_integral(&Density::indicator(Domain::UnitCube), &f, &res).unwrap();
    assert!((cube.pv.contract(&e[0], &e[0]) - 0.298535171426).abs() < 1e-7);
    assert!((cube.pv.contract(&e[2], &e[2]) + 0.183182522270).abs() < 1e-7);
    assert!((cube.pv.contract(&e[0], &e[3]) + 0.004153345362).abs() < 1e-7);
    assert!((cube.diagonal - 1.031666666667).abs() < 1e-10);
    let ball = background_integral(&Density::indicator(Domain::UnitBall), &f, &res).unwrap();
    assert!((ball.pv.contract(&e[0], &e[0]) - 0.006816423120).abs() < 1e-7);
    assert!((ball.pv.contract(&e[2], &e[2]) - 0.006816423120).abs() < 1e-7);
    assert!((ball.pv.contract(&e[0], &e[3]) + 0.008290244335).abs() < 1e-7);
    assert!((ball.diagonal - 1.029247439598).abs() < 1e-9);
}

#[test]
fn vanishing_test_function_gives_zero_pairing() {
    let cfg = cubic_lattice(6, 0.01);
    let zero = SmoothScalar::constant(0.0);
    let p = pairing_mu2n(&cfg, &Density::indicator(Domain::UnitBall), &PairingTestFunction::square(&zero), 1.0).unwrap();
    assert_eq!(p.tensor.max_abs(), 0.0);
    let est = pairing_estimate(&cfg, &Density::indicator(Domain::UnitCube), &PairingTestFunction::One, 1.0).unwrap();
    assert_eq!(est.route, visco2::estimate::Route::Pairing);
    assert_eq!(est.params["n"], 216);
}

#[test]
fn wn_cross_term_approaches_background() {
    let s = Basis5::canonical().e[0];
    let phi = SmoothScalar::affine(1.0, [0.2, 0.0, -0.1]);
    let mut gaps = Vec::new();
    for k in [6usize, 12] {
        let w = wn(&cubic_lattice(k, 0.01), &phi, &s).unwrap();
        assert!((w.value - PAIRING_PREFACTOR * (w.discrete - 2.0 * w.cross + w.background)).abs() < 1e-12);
        gaps.push((w.cross - w.background).abs());
    }
    assert!(gaps[1] < gaps[0], "{gaps:?}");
}

fn bump(x: &[f64; 3]) -> f64 {
    let r2 = vec3::dot(x, x) / 0.16;
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp() * (1.0 + 0.5 * x[1])
    }
}

#[test]
fn cz_convolution_conventions() {
    let s = Basis5::canonical().e[2];
    let g = GriddedDensity::sample(bump, 32, 0.6);
    let pv = cz_convolve(&g, &s, CzMode::PrincipalValue).unwrap();
    let di = cz_convolve(&g, &s, CzMode::DeltaInclusive).unwrap();
    for k in 0..pv.len() {
        assert!((di[k] - (pv[k] - 8.0 * PI / 15.0 * g.values[k])).abs() < 1e-14);
    }
    let idx = g.index(16, 12, 18);
    let o = cz_pv_oracle(bump, &s, &g.node(16, 12, 18), 1.2, 16, 20);
    let scale = pv.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((pv[idx] - o).abs() < 2e-3 * scale, "{} {o}", pv[idx]);

    assert!(matches!(cz_convolve(&GriddedDensity::sample(bump, 24, 0.6), &s, CzMode::PrincipalValue), Err(Error::Domain(_))));
    assert!(matches!(cz_convolve(&GriddedDensity::sample(bump, 32, 0.35), &s, CzMode::PrincipalValue), Err(Error::Domain(_))));
}

#[test]
fn bound_check_two_points() {
    let lam = 0.2;
    let a = Sym3::embed(&[0.5, -0.1, 0.3, 0.2, 0.4]);
    let cfg = ParticleConfig::new(vec![[0.0; 3], [0.3, 0.0, 0.0]], Domain::UnitCube, lam, 0.1).unwrap();
    let ratio = cz_discrete_bound_check(&cfg, &[a, a], 2.0).unwrap();
    let m = kernels::m_apply(&[0.3, 0.0, 0.0], &a).unwrap();
    let r3 = 3.0 * lam / (8.0 * PI);
    let want = r3 * r3 * m.norm_sq() / (lam * a.norm_sq());
    assert!((ratio - want).abs() < 1e-12 * want, "{ratio} {want}");
    assert_eq!(cz_discrete_bound_check(&cfg, &[Sym3::zero(); 2], 2.0).unwrap(), 0.0);
    assert!(cz_discrete_bound_check(&cfg, &[a], 2.0).is_err());
    assert!(cz_discrete_bound_check(&cfg, &[a, a], 1.0).is_err());
}

#[test]
fn study_tables_and_formats() {
    let e = Basis5::canonical().e;
    let spec = GeneratorSpec::Lattice { lambda: 0.01 };
    let tables = convergence_study(&spec, &[64, 216, 512], &StudyTarget::one(vec![e[0]])).unwrap();
    let t = &tables[0];
    assert_eq!(t.rows.len(), 3);
    assert!(t.rows[0].cauchy_diff.is_none() && t.rows[1].extrapolated.is_some());
    let csv = t.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,value,cauchy_diff,extrapolated");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 4);
    assert_eq!(first[0].parse::<f64>().unwrap(), 64.0);
    assert_eq!(first[1].parse::<f64>().unwrap(), t.rows[0].value);
    let dat = t.to_dat();
    assert!(dat.lines().skip(1).all(|l| l.split_whitespace().count() == 3));
    assert!(convergence_study(&spec, &[216, 64], &StudyTarget::one(vec![e[0]])).is_err());
    assert!(convergence_study(&spec, &[64, 100], &StudyTarget::one(vec![e[0]])).is_err());
    let est = study_estimate(&tables, &[64, 216, 512]);
    assert_eq!(est.quadratic(&e[0]), Some(t.limit.limit));
}

proptest! {
    #[test]
    fn pv_symbol_formula(v in prop::array::uniform5(-1.0..1.0f64), d in prop::array::uniform3(-1.0..1.0f64)) {
        let s = Sym3::embed(&v);
        let r = vec3::norm(&d);
        prop_assume!(r > 1e-2);
        let n = vec3::scale(&d, 1.0 / r);
        let sn = s.apply(&n);
        let q = vec3::dot(&n, &sn);
        let f = vec3::dot(&sn, &sn) - q * q;
        let want = 8.0 * PI / 3.0 * (s.norm_sq() / 5.0 - f);
        prop_assert!((cz_multiplier(&s, &n, f64::INFINITY) - want).abs() < 1e-12);
        prop_assert_eq!(cz_multiplier(&s, &n, 0.0), 0.0);
        let far = cz_multiplier(&s, &n, 1e4);
        prop_assert!((far - want).abs() < 1e-3 * (1.0 + want.abs()));
    }
}
