//! Gauss–Legendre rules and product rules on spheres, balls and boxes.

use std::f64::consts::PI;

use crate::tensor::Vec3;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|t| h * t).collect(),
    )
}

/// Composite Gauss–Legendre on `panels` equal pieces of [a, b].
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(n * panels);
    let mut ws = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (t, wt) in x.iter().zip(&w) {
            xs.push(lo + 0.5 * h * (t + 1.0));
            ws.push(0.5 * h * wt);
        }
    }
    (xs, ws)
}

/// Product rule on the unit sphere: Gauss–Legendre in cos θ times the trapezoid rule in φ.
/// Integrates spherical polynomials of degree < 2·order exactly; weights sum to 4π.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<Vec3<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn product(order: usize) -> Self {
        let order = order.max(1);
        let (ct, wt) = gauss_legendre(order);
        let nphi = 2 * order;
        let dphi = 2.0 * PI / nphi as f64;
        let mut points = Vec::with_capacity(order * nphi);
        let mut weights = Vec::with_capacity(order * nphi);
        for (c, w) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..nphi {
                // half-step offset keeps nodes off the coordinate planes
                let phi = (k as f64 + 0.5) * dphi;
                points.push([s * phi.cos(), s * phi.sin(), *c]);
                weights.push(w * dphi);
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(&Vec3<f64>) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Ball rule of radius `radius`: radial Gauss–Legendre (r² dr) times a sphere rule.
#[derive(Clone, Debug)]
pub struct BallRule {
    pub points: Vec<Vec3<f64>>,
    pub weights: Vec<f64>,
}

impl BallRule {
    pub fn new(radius: f64, radial: usize, sphere_order: usize) -> Self {
        let (r, wr) = gauss_legendre_on(radial, 0.0, radius);
        let sph = SphereRule::product(sphere_order);
        let mut points = Vec::with_capacity(r.len() * sph.len());
        let mut weights = Vec::with_capacity(r.len() * sph.len());
        for (ri, wi) in r.iter().zip(&wr) {
            for (n, wn) in sph.points.iter().zip(&sph.weights) {
                points.push([ri * n[0], ri * n[1], ri * n[2]]);
                weights.push(wi * ri * ri * wn);
            }
        }
        Self { points, weights }
    }

    pub fn integrate<F: Fn(&Vec3<f64>) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Tensor Gauss–Legendre rule on the box `[lo, hi]³`.
pub fn box_rule(n: usize, lo: f64, hi: f64) -> (Vec<Vec3<f64>>, Vec<f64>) {
    let (x, w) = gauss_legendre_on(n, lo, hi);
    let mut p = Vec::with_capacity(n * n * n);
    let mut wt = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                p.push([x[i], x[j], x[k]]);
                wt.push(w[i] * w[j] * w[k]);
            }
        }
    }
    (p, wt)
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }
    pub fn merge(&mut self, o: &KahanSum) {
        self.add(o.sum);
        self.add(o.c);
    }
    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Deterministic pairwise reduction of a slice.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut k = KahanSum::default();
        v.iter().for_each(|x| k.add(*x));
        return k.value();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for p in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn sphere_area() {
        let s = SphereRule::product(5);
        assert!((s.weights.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn ball_volume() {
        let b = BallRule::new(2.0, 6, 4);
        assert!((b.integrate(|_| 1.0) - 32.0 * PI / 3.0).abs() < 1e-12);
    }
}
