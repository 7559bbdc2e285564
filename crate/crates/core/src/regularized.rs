//! Regularized point stresslet: `G_S` outside a ball of radius η, the interior Stokes
//! solution with the same boundary values inside, and the associated source density Ψ^η.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels;
use crate::quadrature::{BallRule, SphereRule};
use crate::tensor::{vec3, Mat3, TraceFreeSym3, Vec3};

/// Exponents of the monomials of degree ≤ 3 in three variables, ordered by degree.
pub const MONOMIALS: [[u8; 3]; 20] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [0, 2, 0],
    [0, 0, 2],
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
    [3, 0, 0],
    [0, 3, 0],
    [0, 0, 3],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [0, 2, 1],
    [1, 0, 2],
    [0, 1, 2],
    [1, 1, 1],
];

fn monomial_index(e: [u8; 3]) -> usize {
    MONOMIALS
        .iter()
        .position(|m| *m == e)
        .expect("degree at most 3")
}

/// Polynomial of degree ≤ 3 in `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly3 {
    pub c: [f64; 20],
}

impl Poly3 {
    pub fn zero() -> Self {
        Self { c: [0.0; 20] }
    }

    pub fn unit(k: usize) -> Self {
        let mut p = Self::zero();
        p.c[k] = 1.0;
        p
    }

    pub fn eval(&self, x: &Vec3<f64>) -> f64 {
        MONOMIALS
            .iter()
            .zip(&self.c)
            .filter(|(_, c)| **c != 0.0)
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn deriv(&self, axis: usize) -> Self {
        let mut d = Self::zero();
        for (e, c) in MONOMIALS.iter().zip(&self.c) {
            if e[axis] == 0 || *c == 0.0 {
                continue;
            }
            let mut f = *e;
            f[axis] -= 1;
            d.c[monomial_index(f)] += c * e[axis] as f64;
        }
        d
    }

    pub fn laplacian(&self) -> Self {
        let mut l = Self::zero();
        for a in 0..3 {
            l = l.add(&self.deriv(a).deriv(a));
        }
        l
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = *self;
        s.c.iter_mut().zip(&o.c).for_each(|(a, b)| *a += b);
        s
    }

    pub fn scale(&self, f: f64) -> Self {
        let mut s = *self;
        s.c.iter_mut().for_each(|a| *a *= f);
        s
    }

    /// Multiplies by the coordinate `x_axis`; the degree must stay ≤ 3.
    pub fn times_coord(&self, axis: usize) -> Self {
        let mut s = Self::zero();
        for (e, c) in MONOMIALS.iter().zip(&self.c) {
            if *c == 0.0 {
                continue;
            }
            let mut f = *e;
            f[axis] += 1;
            assert!(f.iter().map(|v| *v as u32).sum::<u32>() <= 3, "degree overflow");
            s.c[monomial_index(f)] += c;
        }
        s
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Closed functions `j_l(k)/k^l` of the spherical Bessel functions.
pub fn bessel_j_over_pow(l: u32, k: f64) -> f64 {
    let k = k.abs();
    if k < 2.0 {
        // Σ_n (-k²/2)ⁿ / (n! (2l+2n+1)!!)
        let mut df = 1.0;
        for m in (1..=(2 * l + 1)).step_by(2) {
            df *= m as f64;
        }
        let mut term = 1.0 / df;
        let mut sum = term;
        let h = -0.5 * k * k;
        for n in 1..30 {
            term *= h / (n as f64 * (2 * l + 2 * n + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let (s, c) = k.sin_cos();
    let j = match l {
        0 => s / k,
        1 => s / (k * k) - c / k,
        2 => (3.0 / k.powi(3) - 1.0 / k) * s - 3.0 * c / (k * k),
        3 => (15.0 / k.powi(4) - 6.0 / (k * k)) * s - (15.0 / k.powi(3) - 1.0 / k) * c,
        _ => panic!("order {l} not needed"),
    };
    j / k.powi(l as i32)
}

/// Interior Stokes solution for boundary data `G_S` on the unit sphere, rescaled to radius η.
#[derive(Clone, Debug)]
pub struct RegularizedStokeslet {
    s: TraceFreeSym3<f64>,
    eta: f64,
    vel: [Poly3; 3],
    pres: Poly3,
    psi: [[Poly3; 3]; 3],
}

const N_VEL: usize = 60;
const N_PRES: usize = 9;

impl RegularizedStokeslet {
    pub fn new(s: &TraceFreeSym3<f64>, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::Domain(format!("regularization radius {eta} must be positive")));
        }
        let (vel, pres) = solve_unit_interior(s)?;
        let psi = psi_polynomials(s, &vel, &pres);
        let g = Self { s: *s, eta, vel, pres, psi };
        g.certify()?;
        Ok(g)
    }

    pub fn strain(&self) -> &TraceFreeSym3<f64> {
        &self.s
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Interior polynomials of the unit-radius solution (velocity and pressure).
    pub fn unit_interior(&self) -> (&[Poly3; 3], &Poly3) {
        (&self.vel, &self.pres)
    }

    fn certify(&self) -> Result<()> {
        let scale = self.s.norm().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            let mut r = self.vel[i].laplacian().scale(-1.0).add(&self.pres.deriv(i));
            r.c.iter_mut().for_each(|c| *c /= scale);
            worst = worst.max(r.max_abs_coeff());
        }
        let div = self.vel[0].deriv(0).add(&self.vel[1].deriv(1)).add(&self.vel[2].deriv(2));
        worst = worst.max(div.max_abs_coeff() / scale);
        if worst > 1e-10 {
            return Err(Error::NonConvergence(format!(
                "interior Stokes residual {worst:e} above 1e-10"
            )));
        }
        let rule = SphereRule::product(9);
        for n in &rule.points {
            let g = kernels::eval_gs(&self.s, n)?;
            for i in 0..3 {
                let d = (self.vel[i].eval(n) - g[i]).abs();
                if d > 1e-12 * scale {
                    return Err(Error::NonConvergence(format!(
                        "boundary mismatch {d:e} of the interior solution"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn velocity(&self, x: &Vec3<f64>) -> Vec3<f64> {
        let r = vec3::norm(x);
        if r >= self.eta {
            return kernels::eval_gs(&self.s, x).expect("outside the ball");
        }
        let y = vec3::scale(x, 1.0 / self.eta);
        let f = self.eta.powi(-2);
        [f * self.vel[0].eval(&y), f * self.vel[1].eval(&y), f * self.vel[2].eval(&y)]
    }

    pub fn pressure(&self, x: &Vec3<f64>) -> f64 {
        let r = vec3::norm(x);
        if r >= self.eta {
            return kernels::eval_ps(&self.s, x).expect("outside the ball");
        }
        let y = vec3::scale(x, 1.0 / self.eta);
        self.eta.powi(-3) * self.pres.eval(&y)
    }

    /// `∂_j G^η_i` as `g[i][j]`.
    pub fn grad_velocity(&self, x: &Vec3<f64>) -> Mat3<f64> {
        let r = vec3::norm(x);
        if r >= self.eta {
            return kernels::grad_gs(&self.s, x).expect("outside the ball");
        }
        let y = vec3::scale(x, 1.0 / self.eta);
        let f = self.eta.powi(-3);
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = f * self.vel[i].deriv(j).eval(&y);
            }
        }
        g
    }

    /// Source density Ψ^η; zero outside the open ball of radius η.
    pub fn psi(&self, x: &Vec3<f64>) -> Mat3<f64> {
        let r = vec3::norm(x);
        let mut p = [[0.0; 3]; 3];
        if r >= self.eta {
            return p;
        }
        let y = vec3::scale(x, 1.0 / self.eta);
        let f = self.eta.powi(-3);
        for a in 0..3 {
            for b in 0..3 {
                p[a][b] = f * self.psi[a][b].eval(&y);
            }
        }
        p
    }

    /// Fourier transform `∫ Ψ^η(x) e^{-iξ·x} dx`.
    pub fn psi_hat(&self, xi: &Vec3<f64>) -> [[Complex64; 3]; 3] {
        let z = vec3::scale(xi, self.eta);
        let k = vec3::norm(&z);
        let b0 = 4.0 * PI * bessel_j_over_pow(1, k);
        let b1 = -4.0 * PI * bessel_j_over_pow(2, k);
        let b2 = 4.0 * PI * bessel_j_over_pow(3, k);
        let mut mono = [Complex64::new(0.0, 0.0); 10];
        mono[0] = Complex64::new(b0, 0.0);
        for a in 0..3 {
            mono[1 + a] = Complex64::new(0.0, z[a] * b1);
        }
        for (idx, slot) in mono.iter_mut().enumerate().skip(4) {
            let e = MONOMIALS[idx];
            let mut ab = [0usize; 2];
            let mut n = 0;
            for axis in 0..3 {
                for _ in 0..e[axis] {
                    ab[n] = axis;
                    n += 1;
                }
            }
            let d = if ab[0] == ab[1] { b1 } else { 0.0 };
            *slot = Complex64::new(-(d + z[ab[0]] * z[ab[1]] * b2), 0.0);
        }
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, m) in self.psi[a][b].c.iter().take(10).zip(&mono) {
                    acc += m * *c;
                }
                out[a][b] = acc;
            }
        }
        out
    }

    /// Fourier transform of the velocity `G^η`: `(I - ξ̂⊗ξ̂) iΨ̂ξ / |ξ|²`.
    pub fn velocity_hat(&self, xi: &Vec3<f64>) -> [Complex64; 3] {
        let k2 = vec3::dot(xi, xi);
        if k2 == 0.0 {
            return [Complex64::new(0.0, 0.0); 3];
        }
        let p = self.psi_hat(xi);
        let mut f = [Complex64::new(0.0, 0.0); 3];
        for a in 0..3 {
            for b in 0..3 {
                f[a] += Complex64::new(0.0, 1.0) * p[a][b] * xi[b];
            }
        }
        leray(xi, &f).map(|v| v / k2)
    }
}

/// Projection `(I - ξ̂⊗ξ̂) f`.
pub fn leray(xi: &Vec3<f64>, f: &[Complex64; 3]) -> [Complex64; 3] {
    let k2 = vec3::dot(xi, xi);
    if k2 == 0.0 {
        return *f;
    }
    let d = (f[0] * xi[0] + f[1] * xi[1] + f[2] * xi[2]) / k2;
    [f[0] - d * xi[0], f[1] - d * xi[1], f[2] - d * xi[2]]
}

/// Least-squares solve of the unit-ball interior problem on the cubic ansatz.
fn solve_unit_interior(s: &TraceFreeSym3<f64>) -> Result<([Poly3; 3], Poly3)> {
    let rule = SphereRule::product(7);
    let n_bdry = rule.len();
    let rows = 12 + 10 + 3 * n_bdry;
    let cols = N_VEL + N_PRES;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);

    let column = |k: usize| -> ([Poly3; 3], Poly3) {
        let mut v = [Poly3::zero(); 3];
        let mut p = Poly3::zero();
        if k < N_VEL {
            v[k / 20] = Poly3::unit(k % 20);
        } else {
            p = Poly3::unit(1 + (k - N_VEL));
        }
        (v, p)
    };

    for k in 0..cols {
        let (v, p) = column(k);
        let mut row = 0;
        for i in 0..3 {
            let r = v[i].laplacian().scale(-1.0).add(&p.deriv(i));
            for c in r.c.iter().take(4) {
                a[(row, k)] = *c;
                row += 1;
            }
        }
        let div = v[0].deriv(0).add(&v[1].deriv(1)).add(&v[2].deriv(2));
        for c in div.c.iter().take(10) {
            a[(row, k)] = *c;
            row += 1;
        }
        for n in &rule.points {
            for vi in &v {
                a[(row, k)] = vi.eval(n);
                row += 1;
            }
        }
    }
    let mut row = 22;
    for n in &rule.points {
        let g = kernels::eval_gs(s, n)?;
        for gi in g {
            rhs[row] = gi;
            row += 1;
        }
    }

    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::Singular(format!(
            "interior ansatz rank deficient (singular values {smin:e}..{smax:e})"
        )));
    }
    let sol = svd
        .solve(&rhs, 1e-14 * smax)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let mut vel = [Poly3::zero(); 3];
    for k in 0..N_VEL {
        vel[k / 20].c[k % 20] = sol[k];
    }
    let mut pres = Poly3::zero();
    for k in 0..N_PRES {
        pres.c[1 + k] = sol[N_VEL + k];
    }
    Ok((vel, pres))
}

/// Ψ¹ as a matrix of quadratic polynomials on the unit ball.
fn psi_polynomials(s: &TraceFreeSym3<f64>, vel: &[Poly3; 3], pres: &Poly3) -> [[Poly3; 3]; 3] {
    let q = 3.0 / PI;
    let mut r2 = Poly3::zero();
    for e in [[2, 0, 0], [0, 2, 0], [0, 0, 2]] {
        r2.c[monomial_index(e)] = 1.0;
    }
    let coord = |a: usize| Poly3::unit(1 + a);
    // (Sx)_a as polynomials
    let sx: Vec<Poly3> = (0..3)
        .map(|a| {
            (0..3).fold(Poly3::zero(), |acc, b| acc.add(&coord(b).scale(s.get(a, b))))
        })
        .collect();
    let mut out = [[Poly3::zero(); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let mut p = sx[a].times_coord(b).add(&sx[b].times_coord(a));
            p = p.add(&r2.scale(-2.5 * s.get(a, b)));
            p.c[0] += 1.25 * s.get(a, b);
            p = p.scale(q);
            p = p.add(&vel[a].deriv(b).add(&vel[b].deriv(a)).scale(-1.0));
            if a == b {
                p = p.add(pres);
            }
            out[a][b] = p;
        }
    }
    out
}

/// `∫_{B₁} |∇G_S^1|² + (3/10π)|S|²`; the integrand is polynomial, so the rule is exact
/// once `quad_order ≥ 3`.
pub fn self_energy_constant(s: &TraceFreeSym3<f64>, quad_order: usize) -> Result<f64> {
    if s.norm_sq() == 0.0 {
        return Ok(0.0);
    }
    let g = RegularizedStokeslet::new(s, 1.0)?;
    let n = quad_order.max(3);
    let ball = BallRule::new(1.0, n, n + 1);
    let inner = ball.integrate(|x| {
        let d = g.grad_velocity(x);
        d.iter().flatten().map(|v| v * v).sum()
    });
    Ok(inner + 3.0 / (10.0 * PI) * s.norm_sq())
}
