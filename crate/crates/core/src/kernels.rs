//! Closed-form kernels: the Oseen tensor, the interaction kernel ℳ, the single-sphere
//! solution and the point-stresslet field.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::SphereRule;
use crate::scalar::Real;
use crate::tensor::{vec3, Mat3, OrthoBasis5, TraceFreeSym3, Vec3, ViscosityTensor4};

#[inline]
fn radius<T: Real>(x: &Vec3<T>) -> Result<T> {
    let r = vec3::norm(x);
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("kernel evaluated at {x:?}")));
    }
    Ok(r)
}

/// `ℳ(x) A : B = -2 Ax·Bx/|x|⁵ + 5 (A:x⊗x)(B:x⊗x)/|x|⁷`.
pub fn m_contract<T: Real>(x: &Vec3<T>, a: &TraceFreeSym3<T>, b: &TraceFreeSym3<T>) -> Result<T> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let ax = a.apply(x);
    let bx = b.apply(x);
    let qa = vec3::dot(x, &ax);
    let qb = vec3::dot(x, &bx);
    Ok((T::lit(-2.0) * vec3::dot(&ax, &bx) + T::lit(5.0) * qa * qb / r2) / r5)
}

/// `g_S(x) = ℳ(x) S : S`.
pub fn eval_small_gs<T: Real>(s: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<T> {
    m_contract(x, s, s)
}

/// `ℳ(x)` as a symmetric 5×5 matrix.
pub fn eval_m<T: Real>(x: &Vec3<T>) -> Result<ViscosityTensor4<T>> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let e = OrthoBasis5::<T>::canonical().e;
    let u: Vec<Vec3<T>> = e.iter().map(|ea| ea.apply(x)).collect();
    let q: Vec<T> = u.iter().map(|ua| vec3::dot(x, ua)).collect();
    let mut m = [[T::zero(); 5]; 5];
    for a in 0..5 {
        for b in a..5 {
            m[a][b] = (T::lit(-2.0) * vec3::dot(&u[a], &u[b]) + T::lit(5.0) * q[a] * q[b] / r2) / r5;
        }
    }
    Ok(ViscosityTensor4::from_upper(m))
}

/// `ℳ(x) A` as a trace-free symmetric matrix.
pub fn m_apply<T: Real>(x: &Vec3<T>, a: &TraceFreeSym3<T>) -> Result<TraceFreeSym3<T>> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let ax = a.apply(x);
    let q = vec3::dot(x, &ax);
    let c = T::lit(5.0) * q / r2;
    let ent = |i: usize, j: usize| (c * x[i] * x[j] - ax[i] * x[j] - x[i] * ax[j]) / r5;
    Ok(TraceFreeSym3::from_components(
        ent(0, 0) - q / r5,
        ent(1, 1) - q / r5,
        ent(0, 1),
        ent(0, 2),
        ent(1, 2),
    ))
}

/// Oseen tensor `𝒰(x) = (I/|x| + x⊗x/|x|³)/8π` and pressure `𝒫(x) = x/(4π|x|³)`.
pub fn eval_oseen<T: Real>(x: &Vec3<T>) -> Result<(Mat3<T>, Vec3<T>)> {
    let r = radius(x)?;
    let r3 = r * r * r;
    let c = (T::lit(8.0) * T::PI()).recip();
    let mut u = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { T::one() / r } else { T::zero() };
            u[i][j] = c * (d + x[i] * x[j] / r3);
        }
    }
    let p = vec3::scale(x, (T::lit(4.0) * T::PI() * r3).recip());
    Ok((u, p))
}

/// Exterior single-sphere velocity `V[A]`; the formula is used for any `x ≠ 0`.
pub fn eval_v<T: Real>(a: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<Vec3<T>> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let ax = a.apply(x);
    let q = vec3::dot(x, &ax);
    let f = T::lit(2.5) * q * (T::one() / r2 - T::one()) / r5;
    Ok([
        f * x[0] - ax[0] / r5,
        f * x[1] - ax[1] / r5,
        f * x[2] - ax[2] / r5,
    ])
}

/// Exterior single-sphere pressure `Q[A] = -5 (A:x⊗x)/|x|⁵`.
pub fn eval_q<T: Real>(a: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<T> {
    let r = radius(x)?;
    let r5 = r.powi(5);
    Ok(T::lit(-5.0) * a.quad(x) / r5)
}

/// `V[A]` outside the unit ball, `-Ax` inside.
pub fn eval_v_extended<T: Real>(a: &TraceFreeSym3<T>, x: &Vec3<T>) -> Vec3<T> {
    if vec3::norm(x) < T::one() {
        vec3::scale(&a.apply(x), -T::one())
    } else {
        eval_v(a, x).expect("nonzero outside the unit ball")
    }
}

/// `∂_j V[A]_i` as `g[i][j]`.
pub fn grad_v<T: Real>(a: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<Mat3<T>> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let r7 = r5 * r2;
    let ax = a.apply(x);
    let q = vec3::dot(x, &ax);
    let h = T::lit(2.5);
    let f = h * (T::one() / r7 - T::one() / r5);
    let fr = h * (T::lit(5.0) / r7 - T::lit(7.0) / (r7 * r2));
    let mut g = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { T::one() } else { T::zero() };
            g[i][j] = fr * x[j] * q * x[i] + f * (T::lit(2.0) * ax[j] * x[i] + q * d)
                - a.get(i, j) / r5
                + T::lit(5.0) * ax[i] * x[j] / r7;
        }
    }
    Ok(g)
}

/// Point-stresslet field `G_S(x) = -(3/8π)(Sx·x) x/|x|⁵`.
pub fn eval_gs<T: Real>(s: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<Vec3<T>> {
    let r = radius(x)?;
    let r5 = r.powi(5);
    let c = T::lit(-3.0) / (T::lit(8.0) * T::PI()) * s.quad(x) / r5;
    Ok(vec3::scale(x, c))
}

/// Pressure paired with `G_S`: `-(3/4π)(Sx·x)/|x|⁵`.
pub fn eval_ps<T: Real>(s: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<T> {
    let r = radius(x)?;
    Ok(T::lit(-3.0) / (T::lit(4.0) * T::PI()) * s.quad(x) / r.powi(5))
}

/// `∂_j G_S(x)_i`.
pub fn grad_gs<T: Real>(s: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<Mat3<T>> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let c = T::lit(-3.0) / (T::lit(8.0) * T::PI());
    let sx = s.apply(x);
    let q = vec3::dot(x, &sx);
    let mut g = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { T::one() } else { T::zero() };
            g[i][j] = c
                * (T::lit(2.0) * sx[j] * x[i] + q * d - T::lit(5.0) * q * x[i] * x[j] / r2)
                / r5;
        }
    }
    Ok(g)
}

/// `∇𝒰A = -(3/8π)(A:x⊗x)x/|x|⁵`, the same field as `G_A`.
pub fn grad_u_contract<T: Real>(a: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<Vec3<T>> {
    eval_gs(a, x)
}

/// Remainder `R[A] = V[A] - (20π/3)∇𝒰A`, homogeneous of degree -4.
pub fn eval_r<T: Real>(a: &TraceFreeSym3<T>, x: &Vec3<T>) -> Result<Vec3<T>> {
    let r = radius(x)?;
    let r2 = r * r;
    let r5 = r2 * r2 * r;
    let ax = a.apply(x);
    let q = vec3::dot(x, &ax);
    let f = T::lit(2.5) * q / (r5 * r2);
    Ok([
        f * x[0] - ax[0] / r5,
        f * x[1] - ax[1] / r5,
        f * x[2] - ax[2] / r5,
    ])
}

/// Net force and torque of the single-sphere solution's traction on the unit sphere.
pub fn check_noforce_notorque(a: &TraceFreeSym3<f64>, quad_order: usize) -> (f64, f64) {
    let rule = SphereRule::product(quad_order);
    let mut force = [0.0; 3];
    let mut torque = [0.0; 3];
    for (n, w) in rule.points.iter().zip(&rule.weights) {
        let g = grad_v(a, n).expect("unit sphere");
        let q = eval_q(a, n).expect("unit sphere");
        let mut t = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                t[i] += (g[i][j] + g[j][i] - q * d) * n[j];
            }
        }
        let m = vec3::cross(n, &t);
        for i in 0..3 {
            force[i] += w * t[i];
            torque[i] += w * m[i];
        }
    }
    (vec3::norm(&force), vec3::norm(&torque))
}

/// Surface average of `ℳ(radius·n)` over the unit sphere `n`.
pub fn sphere_mean_m(radius: f64, quad_order: usize) -> ViscosityTensor4<f64> {
    let rule = SphereRule::product(quad_order);
    let mut acc = [[0.0; 5]; 5];
    for (n, w) in rule.points.iter().zip(&rule.weights) {
        let m = eval_m(&vec3::scale(n, radius)).expect("nonzero radius");
        for a in 0..5 {
            for b in 0..5 {
                acc[a][b] += w * m.matrix5()[a][b];
            }
        }
    }
    ViscosityTensor4::from_upper(acc).scale(1.0 / (4.0 * PI))
}

/// `∫_{∂B₁} n_i n_j n_k n_l` by quadrature.
pub fn sphere_fourth_moment(quad_order: usize) -> [[[[f64; 3]; 3]; 3]; 3] {
    let rule = SphereRule::product(quad_order);
    let mut t = [[[[0.0; 3]; 3]; 3]; 3];
    for (n, w) in rule.points.iter().zip(&rule.weights) {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[i][j][k][l] += w * n[i] * n[j] * n[k] * n[l];
                    }
                }
            }
        }
    }
    t
}

/// `(3/8π) ∫_{∂B₁} (Sn·n)²`, equal to `|S|²/5` for trace-free `S`.
pub fn sphere_quadratic_moment(s: &TraceFreeSym3<f64>, quad_order: usize) -> f64 {
    let rule = SphereRule::product(quad_order);
    3.0 / (8.0 * PI) * rule.integrate(|n| s.quad(n).powi(2))
}
