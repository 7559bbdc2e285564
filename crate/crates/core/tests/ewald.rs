use proptest::prelude::*;
use visco2::corrector::{lattice_limit_term, LatticeGreenEvaluator};
use visco2::tensor::vec3;
use visco2::{Basis5, Point3, Sym3};

// closed Ewald origin expansion, cross-checked by spherical lattice summation; frozen
const L_E1: f64 = 0.7573985377749;
const L_E3: f64 = -0.1715990251833;

#[test]
fn simple_cubic_limit_terms() {
    let e = Basis5::canonical().e;
    let l1 = lattice_limit_term(&e[0]).unwrap();
    let l3 = lattice_limit_term(&e[2]).unwrap();
    assert!((l1.value - L_E1).abs() < 1e-11, "{}", l1.value);
    assert!((l3.value - L_E3).abs() < 1e-11, "{}", l3.value);
    // cubic symmetry splits |S|² = 1 into two diagonal and three off-diagonal directions
    assert!((2.0 * l1.value + 3.0 * l3.value - 1.0).abs() < 1e-12);
    let l2 = lattice_limit_term(&e[1]).unwrap();
    assert!((l2.value - l1.value).abs() < 1e-12);
    assert!(l1.spread < 1e-8 && l1.richardson.len() == 6);
}

#[test]
fn lattice_points_are_rejected() {
    let ev = LatticeGreenEvaluator::new(&Basis5::canonical().e[0], 1.0).unwrap();
    assert!(ev.eval_gsl(&[0.0; 3]).is_err());
    assert!(ev.eval_sgrad_gsl(&[1.0, -2.0, 3.0]).is_err());
}

fn sym() -> impl Strategy<Value = Sym3> {
    prop::array::uniform5(-1.0..1.0f64).prop_filter_map("nonzero", |v| {
        let s = Sym3::embed(&v);
        (s.norm() > 0.1).then_some(s)
    })
}

fn point() -> impl Strategy<Value = Point3> {
    prop::array::uniform3(-0.5..0.5f64).prop_filter("off lattice", |y| vec3::norm(y) > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_independence(s in sym(), y in point()) {
        let a = LatticeGreenEvaluator::with_split(&s, 1.0, 2.5).unwrap();
        let b = LatticeGreenEvaluator::with_split(&s, 1.0, 4.5).unwrap();
        let (ga, gb) = (a.eval_gsl(&y).unwrap(), b.eval_gsl(&y).unwrap());
        for i in 0..3 {
            prop_assert!((ga[i] - gb[i]).abs() < 1e-10 * (1.0 + ga[i].abs()));
        }
        let (sa, sb) = (a.eval_sgrad_gsl(&y).unwrap(), b.eval_sgrad_gsl(&y).unwrap());
        prop_assert!((sa - sb).abs() < 1e-10 * (1.0 + sa.abs()));
        prop_assert!((a.origin_limit() - b.origin_limit()).abs() < 1e-12);
    }

    #[test]
    fn periodic_odd_and_scaled(s in sym(), y in point(), shift in prop::array::uniform3(-2i32..=2)) {
        let ev = LatticeGreenEvaluator::new(&s, 1.0).unwrap();
        let g = ev.eval_gsl(&y).unwrap();
        let ys = [0, 1, 2].map(|i| y[i] + shift[i] as f64);
        let gs = ev.eval_gsl(&ys).unwrap();
        let gm = ev.eval_gsl(&vec3::scale(&y, -1.0)).unwrap();
        for i in 0..3 {
            prop_assert!((gs[i] - g[i]).abs() < 1e-10 * (1.0 + g[i].abs()));
            prop_assert!((gm[i] + g[i]).abs() < 1e-10 * (1.0 + g[i].abs()));
        }
        let big = LatticeGreenEvaluator::new(&s, 2.0).unwrap();
        let g2 = big.eval_gsl(&vec3::scale(&y, 2.0)).unwrap();
        for i in 0..3 {
            prop_assert!((4.0 * g2[i] - g[i]).abs() < 1e-10 * (1.0 + g[i].abs()));
        }
        let s2 = big.eval_sgrad_gsl(&vec3::scale(&y, 2.0)).unwrap();
        prop_assert!((8.0 * s2 - ev.eval_sgrad_gsl(&y).unwrap()).abs() < 1e-10 * (1.0 + s2.abs()));
    }

    #[test]
    fn scalar_is_strain_contracted_gradient(s in sym(), y in point()) {
        let ev = LatticeGreenEvaluator::new(&s, 1.0).unwrap();
        let h = 1e-5;
        let mut acc = 0.0;
        for j in 0..3 {
            let (mut p, mut m) = (y, y);
            p[j] += h;
            m[j] -= h;
            let (gp, gm) = (ev.eval_gsl(&p).unwrap(), ev.eval_gsl(&m).unwrap());
            for i in 0..3 {
                acc += s.get(i, j) * (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let v = ev.eval_sgrad_gsl(&y).unwrap();
        prop_assert!((acc - v).abs() < 1e-5 * (1.0 + v.abs()), "{acc} {v}");
    }
}

#[test]
fn regular_part_is_smooth_at_origin() {
    let s = Sym3::embed(&[0.3, -0.2, 0.5, 0.1, -0.4]);
    let ev = LatticeGreenEvaluator::new(&s, 1.0).unwrap();
    let u = [0.6, 0.0, 0.8];
    let lim = ev.origin_limit();
    let mut prev = f64::INFINITY;
    for t in [0.1, 0.05, 0.025] {
        let d = (ev.regular_part(&vec3::scale(&u, t)).unwrap() - lim).abs();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-2);
}
