use proptest::prelude::*;
use visco2::configurations::*;
use visco2::Error;

#[test]
fn point_file_round_trip_is_bit_exact() {
    let pat = gen_periodic_pattern(4, 0.5, 3).unwrap();
    let cfg = scale_to_domain(&pat, 0.2, Domain::UnitBall, 0.05).unwrap();
    let text = write_points(&cfg);
    let header = text.lines().next().unwrap();
    assert_eq!(header, format!("# visco2 points v1 n={} lambda=0.05 c=0.5 domain=ball", cfg.n()));
    let back = read_points(&text).unwrap();
    assert_eq!(back, cfg);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.txt");
    io_write(&path, &cfg).unwrap();
    assert_eq!(io_read(&path).unwrap(), cfg);
}

#[test]
fn point_file_errors_carry_line_numbers() {
    let head = "# visco2 points v1 n=2 lambda=0.1 c=1 domain=cube\n";
    let cases = [
        ("0 0 0\n", 1),
        ("# visco2 points v1 n=2 lambda=0.1 domain=cube\n0 0 0\n0.1 0 0\n", 1),
        ("# visco2 points v1 n=2 lambda=0.1 c=1 domain=torus\n", 1),
        (&*format!("{head}0 0 0\n0.1 0\n"), 3),
        (&*format!("{head}0 0 0\n0.7 0 0\n"), 3),
        (&*format!("{head}0 0 nan\n0.1 0 0\n"), 2),
        (&*format!("{head}0 0 0\n"), 2),
    ];
    for (text, want) in cases {
        match read_points(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
            other => panic!("{text:?} gave {other:?}"),
        }
    }
}

#[test]
fn cubic_lattice_from_simple_cubic_rescaling() {
    for k in [2usize, 5, 8] {
        let lat = cubic_lattice(k, 0.01);
        assert_eq!(lat.n(), k * k * k);
        assert!((min_distance(&lat) - 1.0 / k as f64).abs() < 1e-14);
        lat.check_hardcore().unwrap();
        let sc = scale_to_domain(&PeriodicPattern::simple_cubic(), 1.0 / k as f64, Domain::UnitCube, 0.01).unwrap();
        assert_eq!(sc.n(), lat.n());
        let mut a = sc.points.clone();
        let mut b = lat.points.clone();
        let key = |p: &[f64; 3]| p.map(|v| (v * 1e9).round() as i64);
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (p, q) in a.iter().zip(&b) {
            for i in 0..3 {
                assert!((p[i] - q[i]).abs() < 1e-14);
            }
        }
    }
    let lat = cubic_lattice(4, 0.2);
    let r = (3.0 * 0.2 / (4.0 * std::f64::consts::PI * 64.0)).cbrt();
    assert!((lat.r_n - r).abs() < 1e-16);
}

#[test]
fn periodic_pattern_respects_hardcore_and_seed() {
    let p = gen_periodic_pattern(8, 0.6, 11).unwrap();
    assert_eq!(p.m(), 8);
    assert!(p.min_torus_distance() > 0.6 * 0.5);
    assert_eq!(p, gen_periodic_pattern(8, 0.6, 11).unwrap());
    assert_ne!(p, gen_periodic_pattern(8, 0.6, 12).unwrap());
    // packing beyond the simple cubic bound cannot succeed
    assert!(gen_periodic_pattern_with(8, 1.2, 1, 2000).is_err());
    assert!(PeriodicPattern::new(vec![[0.0; 3], [0.99, 0.0, 0.0]], 0.5).is_err());
    let t = p.translate(&[0.3, 0.7, 0.9]);
    assert!((t.min_torus_distance() - p.min_torus_distance()).abs() < 1e-14);
}

#[test]
fn matern_sampler_properties() {
    let (lam, h, side) = (0.1, 1.0, 25.0);
    let mut counts = 0.0;
    for seed in 0..8 {
        let s = gen_matern2(lam, h, side, seed).unwrap();
        for i in 0..s.points.len() {
            for j in 0..i {
                assert!(torus_distance(&s.points[i], &s.points[j], side) >= h);
            }
        }
        counts += s.intensity();
    }
    let m = MaternSample::expected_intensity(lam, h);
    assert!((counts / 8.0 / m - 1.0).abs() < 0.03, "{} vs {m}", counts / 8.0);
    assert_eq!(gen_matern2(lam, h, side, 3).unwrap(), gen_matern2(lam, h, side, 3).unwrap());
    assert!(gen_matern2(-1.0, h, side, 0).is_err());
}

#[test]
fn matern_pair_correlation_has_hardcore_gap() {
    let (lam, h) = (0.1, 1.0);
    let samples: Vec<_> = (0..6).map(|s| gen_matern2(lam, h, 30.0, s).unwrap()).collect();
    let r = estimate_pair_correlation(&samples, 2.0, 20).unwrap();
    let m2 = r.asymptote;
    assert!(r.values[..10].iter().all(|v| *v == 0.0));
    // beyond twice the hardcore radius the thinned process is nearly uncorrelated
    let tail = r.values[19];
    assert!((tail / m2 - 1.0).abs() < 0.25, "{tail} {m2}");
    assert_eq!(r.eval(0.5), 0.0);
    assert_eq!(r.eval(5.0), m2);
    let step = RadialPairCorrelation::step(2.0, 0.3);
    assert_eq!(step.eval(0.29), 0.0);
    assert_eq!(step.eval(0.31), 2.0);
}

#[test]
fn discrepancy_is_small_for_lattices() {
    let coarse = validate_a0(&cubic_lattice(8, 0.01), indicator(Domain::UnitCube), 4);
    let fine = validate_a0(&cubic_lattice(16, 0.01), indicator(Domain::UnitCube), 4);
    assert!(fine < 1e-12 && coarse < 1e-12, "{coarse} {fine}");
    let p = gen_periodic_pattern(4, 0.5, 2).unwrap();
    let a = validate_a0(&scale_to_domain(&p, 0.1, Domain::UnitBall, 0.01).unwrap(), indicator(Domain::UnitBall), 4);
    let b = validate_a0(&scale_to_domain(&p, 0.05, Domain::UnitBall, 0.01).unwrap(), indicator(Domain::UnitBall), 4);
    assert!(b < a);
}

#[test]
fn exit_distances() {
    let r = Domain::ball_radius();
    assert!((Domain::UnitBall.exit_distance(&[0.0; 3], &[0.0, 0.0, 1.0]) - r).abs() < 1e-15);
    assert!((Domain::UnitCube.exit_distance(&[0.25, 0.0, 0.0], &[1.0, 0.0, 0.0]) - 0.25).abs() < 1e-15);
    let s = 1.0 / 3f64.sqrt();
    assert!((Domain::UnitCube.exit_distance(&[0.0; 3], &[s, s, s]) - 0.5 / s).abs() < 1e-14);
    assert!((4.0 / 3.0 * std::f64::consts::PI * r.powi(3) - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn cell_list_matches_brute_force(pts in prop::collection::vec(prop::array::uniform3(-0.49..0.49f64), 2..120)) {
        prop_assert_eq!(min_distance_points(&pts), min_distance_brute(&pts));
    }

    #[test]
    fn torus_delta_is_minimal(a in prop::array::uniform3(0.0..1.0f64), b in prop::array::uniform3(0.0..1.0f64)) {
        let d = torus_delta(&a, &b, 1.0);
        for i in 0..3 {
            prop_assert!(d[i].abs() <= 0.5 + 1e-15);
            let w = (a[i] - b[i] - d[i]).round();
            prop_assert!((a[i] - b[i] - d[i] - w).abs() < 1e-14);
        }
    }
}
