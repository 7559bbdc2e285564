use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visco2::kernels;
use visco2::quadrature::{BallRule, SphereRule};
use visco2::regularized::{bessel_j_over_pow, self_energy_constant, RegularizedStokeslet};
use visco2::{Basis5, Sym3};

fn random_sym(rng: &mut ChaCha8Rng) -> Sym3 {
    Sym3::from_components(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

fn random_in_ball(rng: &mut ChaCha8Rng, r: f64) -> [f64; 3] {
    loop {
        let x = [rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r)];
        if x.iter().map(|v| v * v).sum::<f64>() < r * r {
            return x;
        }
    }
}

#[test]
fn interior_matches_closed_form_coefficients() {
    // sympy oracle: G = a(xSx)x + b|x|²Sx + cSx, p = d(xSx) on the unit ball
    let a = -3.0 / (8.0 * PI);
    let b = 15.0 / (16.0 * PI);
    let c = -15.0 / (16.0 * PI);
    let d = 63.0 / (16.0 * PI);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_sym(&mut rng);
    let g = RegularizedStokeslet::new(&s, 1.0).unwrap();
    for _ in 0..50 {
        let x = random_in_ball(&mut rng, 1.0);
        let sx = s.apply(&x);
        let q = s.quad(&x);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let v = g.velocity(&x);
        for i in 0..3 {
            let e = a * q * x[i] + b * r2 * sx[i] + c * sx[i];
            assert!((v[i] - e).abs() < 1e-12, "{} vs {}", v[i], e);
        }
        assert!((g.pressure(&x) - d * q).abs() < 1e-11);
    }
}

#[test]
fn scaling_and_boundary_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_sym(&mut rng);
    let eta = 0.37;
    let g1 = RegularizedStokeslet::new(&s, 1.0).unwrap();
    let ge = RegularizedStokeslet::new(&s, eta).unwrap();
    for _ in 0..100 {
        let x = random_in_ball(&mut rng, eta);
        let a = ge.velocity(&x);
        let b = g1.velocity(&[x[0] / eta, x[1] / eta, x[2] / eta]);
        for i in 0..3 {
            assert!((a[i] - b[i] / (eta * eta)).abs() < 1e-11 * b[i].abs().max(1.0));
        }
    }
    for _ in 0..200 {
        let mut n = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
        let l = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        n.iter_mut().for_each(|v| *v *= eta * (1.0 - 1e-15) / l);
        let inner = ge.velocity(&n);
        let outer = kernels::eval_gs(&s, &n).unwrap();
        let scale = outer.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for i in 0..3 {
            assert!((inner[i] - outer[i]).abs() < 1e-12 * scale.max(1.0 / (eta * eta)));
        }
    }
}

#[test]
fn interior_divergence_by_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = random_sym(&mut rng);
    let g = RegularizedStokeslet::new(&s, 0.5).unwrap();
    let h = 1e-5;
    for _ in 0..50 {
        let x = random_in_ball(&mut rng, 0.45);
        let mut div = 0.0;
        for a in 0..3 {
            let mut p = x;
            let mut m = x;
            p[a] += h;
            m[a] -= h;
            div += (g.velocity(&p)[a] - g.velocity(&m)[a]) / (2.0 * h);
        }
        assert!(div.abs() < 1e-8, "div {div}");
    }
}

#[test]
fn psi_vanishes_outside_and_integrates_to_strain() {
    let s = Basis5::canonical().e[0] + Basis5::canonical().e[3] * 0.5;
    for eta in [0.1, 0.2] {
        let g = RegularizedStokeslet::new(&s, eta).unwrap();
        assert_eq!(g.psi(&[eta * 1.01, 0.0, 0.0]), [[0.0; 3]; 3]);
        assert_eq!(g.psi(&[0.0, 0.3, 0.0]), [[0.0; 3]; 3]);
        let ball = BallRule::new(eta, 6, 6);
        for a in 0..3 {
            for b in 0..3 {
                let v = ball.integrate(|x| g.psi(x)[a][b]);
                assert!((v - s.get(a, b)).abs() < 1e-12, "{a}{b}: {v}");
            }
        }
    }
}

#[test]
fn psi_at_origin_matches_interior_formula() {
    // Ψ(0) = (3/πη⁵)(5/4)η²S − 2D(G)(0) + p(0)I with D(G)(0) = c S/η³ and p(0) = 0
    let s = Basis5::canonical().e[1];
    let eta = 0.3;
    let g = RegularizedStokeslet::new(&s, eta).unwrap();
    let c = -15.0 / (16.0 * PI * eta.powi(3));
    let p0 = g.psi(&[0.0; 3]);
    for a in 0..3 {
        for b in 0..3 {
            let e = (3.75 / (PI * eta.powi(3)) - 2.0 * c) * s.get(a, b);
            assert!((p0[a][b] - e).abs() < 1e-10 * e.abs().max(1.0));
        }
    }
}

#[test]
fn psi_hat_matches_quadrature() {
    let s = Basis5::canonical().e[0] * 0.7 + Basis5::canonical().e[4] * 0.3;
    let eta = 0.25;
    let g = RegularizedStokeslet::new(&s, eta).unwrap();
    let ball = BallRule::new(eta, 24, 24);
    for xi in [[0.0, 0.0, 0.0], [3.0, -1.0, 2.0], [10.0, 7.0, -4.0], [25.0, 0.5, 1.0]] {
        let h = g.psi_hat(&xi);
        for a in 0..3 {
            for b in 0..3 {
                let re = ball.integrate(|x| g.psi(x)[a][b] * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]).cos());
                let im = -ball.integrate(|x| g.psi(x)[a][b] * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]).sin());
                assert!((h[a][b].re - re).abs() < 1e-9, "{xi:?} {a}{b}: {} vs {re}", h[a][b].re);
                assert!((h[a][b].im - im).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn bessel_ratios_satisfy_recurrence() {
    for k in [0.3, 1.9, 2.1, 7.5] {
        assert!((bessel_j_over_pow(0, k) - f64::sin(k) / k).abs() < 1e-15);
        for l in 1..3 {
            let lhs = bessel_j_over_pow(l + 1, k);
            let rhs = ((2 * l + 1) as f64 * bessel_j_over_pow(l, k) - bessel_j_over_pow(l - 1, k)) / (k * k);
            assert!((lhs - rhs).abs() < 1e-11 * bessel_j_over_pow(l - 1, k).abs(), "l={l} k={k}");
        }
    }
    assert!((bessel_j_over_pow(1, 0.0) - 1.0 / 3.0).abs() < 1e-16);
}

#[test]
fn self_energy_constant_values() {
    let e = Basis5::canonical().e;
    assert_eq!(self_energy_constant(&Sym3::zero(), 4).unwrap(), 0.0);
    let c1 = self_energy_constant(&e[0], 4).unwrap();
    let c2 = self_energy_constant(&(e[0] * 2.0), 4).unwrap();
    assert!((c2 / c1 - 4.0).abs() < 1e-13);
    // closed form 15|S|²/(16π), frozen from the symbolic interior integral 51/(80π)
    assert!((c1 - 15.0 / (16.0 * PI)).abs() < 1e-13, "{c1}");
    let c3 = self_energy_constant(&e[3], 8).unwrap();
    assert!((c3 - c1).abs() < 1e-13);
}

#[test]
fn exterior_energy_closed_form() {
    // ∫_{|x|>1} |∇G_S|² = 3|S|²/(10π), checked by radial quadrature of the exact gradient
    let s = Basis5::canonical().e[2];
    let sph = SphereRule::product(8);
    let ang = sph.integrate(|n| {
        let d = kernels::grad_gs(&s, n).unwrap();
        d.iter().flatten().map(|v| v * v).sum()
    });
    // |∇G_S|² is homogeneous of degree −6, so ∫_1^∞ r^{-6} r² dr = 1/3
    assert!((ang / 3.0 - 3.0 / (10.0 * PI)).abs() < 1e-13);
}
