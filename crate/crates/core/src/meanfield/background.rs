//! Mean-field background `∫∫ ℳ(x - y) F(x, y) ρ(x) ρ(y)` in the weak sense.
//!
//! ℳ is homogeneous of degree −3 with zero spherical mean, so along rays from a base point
//! `PV ∫ ℳ(n t) h(t n) t² dt dn = ∫_{S²} ℳ(n) [∫_0^e (h(tn) - h(0)) dt/t + h(0) log e] dn`
//! for `h` supported in `t < e(n)`, and every term is an ordinary integral.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{Density, PairingTestFunction};
use crate::configurations::Domain;
use crate::error::{Error, Result};
use crate::kernels;
use crate::quadrature::{gauss_legendre, pairwise_sum, SphereRule};
use crate::tensor::{Vec3, ViscosityTensor4};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackgroundResolution {
    /// Gauss nodes per panel of the outer `y` rule.
    pub outer_nodes: usize,
    /// Number of geometrically graded panels towards each boundary.
    pub grading: usize,
    pub sphere_order: usize,
    pub radial_nodes: usize,
}

impl Default for BackgroundResolution {
    fn default() -> Self {
        Self { outer_nodes: 6, grading: 3, sphere_order: 12, radial_nodes: 12 }
    }
}

impl BackgroundResolution {
    pub fn refined(&self) -> Self {
        Self {
            outer_nodes: self.outer_nodes + 2,
            grading: self.grading + 1,
            sphere_order: self.sphere_order + 4,
            radial_nodes: self.radial_nodes + 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BackgroundIntegral {
    /// δ-inclusive value: `pv - (8π/15) Id ∫ F(y,y) ρ(y)² dy`.
    pub value: ViscosityTensor4<f64>,
    pub pv: ViscosityTensor4<f64>,
    pub diagonal: f64,
    /// Max entry difference between the two resolutions.
    pub certificate: f64,
    pub resolution: BackgroundResolution,
}

/// `(8π/15) ∫ F(y,y) ρ(y)² dy`, the coefficient of `Id` separating the two conventions.
pub fn delta_term(diagonal: f64) -> f64 {
    8.0 * PI / 15.0 * diagonal
}

/// Graded composite Gauss rule on `[-h, h]`, refined towards both ends.
fn graded_axis(h: f64, nodes: usize, grading: usize) -> (Vec<f64>, Vec<f64>) {
    let mut br = vec![-h];
    for k in (1..=grading).rev() {
        br.push(-h + h * 0.25f64.powi(k as i32));
    }
    for k in 1..=grading {
        br.push(h - h * 0.25f64.powi(k as i32));
    }
    br.push(h);
    let (x, w) = gauss_legendre(nodes);
    let mut px = Vec::new();
    let mut pw = Vec::new();
    for seg in br.windows(2) {
        let half = 0.5 * (seg[1] - seg[0]);
        for (t, wt) in x.iter().zip(&w) {
            px.push(seg[0] + half * (t + 1.0));
            pw.push(half * wt);
        }
    }
    (px, pw)
}

/// Outer `y` nodes covering the domain.
fn outer_rule(domain: Domain, res: &BackgroundResolution) -> Vec<(Vec3<f64>, f64)> {
    match domain {
        Domain::UnitCube => {
            let (x, w) = graded_axis(0.5, res.outer_nodes, res.grading);
            let mut out = Vec::with_capacity(x.len().pow(3));
            for (a, wa) in x.iter().zip(&w) {
                for (b, wb) in x.iter().zip(&w) {
                    for (c, wc) in x.iter().zip(&w) {
                        out.push(([*a, *b, *c], wa * wb * wc));
                    }
                }
            }
            out
        }
        Domain::UnitBall => {
            let r = Domain::ball_radius();
            let (x, w) = graded_axis(0.5 * r, res.outer_nodes, res.grading);
            let sph = SphereRule::product(res.sphere_order / 2 + 2);
            let mut out = Vec::new();
            for (t, wt) in x.iter().zip(&w) {
                let rad = t + 0.5 * r;
                for (n, wn) in sph.points.iter().zip(&sph.weights) {
                    out.push(([rad * n[0], rad * n[1], rad * n[2]], wt * wn * rad * rad));
                }
            }
            out
        }
    }
}

/// PV value and `∫ F(y,y) ρ(y)² dy` at one resolution.
pub fn background_at(rho: &Density, f: &PairingTestFunction, res: &BackgroundResolution) -> (ViscosityTensor4<f64>, f64) {
    match rho.domain {
        Domain::UnitCube => cube_background(rho, f, res),
        Domain::UnitBall => ray_background(rho, f, res),
    }
}

fn accumulate(m5: &mut [[f64; 5]; 5], n: &Vec3<f64>, w: f64) {
    let m = kernels::eval_m(n).expect("unit direction");
    let mm = m.matrix5();
    for i in 0..5 {
        for j in i..5 {
            m5[i][j] += w * mm[i][j];
        }
    }
}

/// Cube: with `v = x - y`, `∫∫ ℳ(x-y) F ρρ = PV ∫ ℳ(v) G(v) dv` where
/// `G(v) = ∫_{𝒪 ∩ (𝒪 - v)} (ρF)(y + v, y) ρ(y) dy` is an integral over a box. On each sign
/// octant and each region where one `|n_i|` dominates, `t ↦ G(tn)` is smooth up to the
/// support edge `t = 1/max|n_i|`, so all three rules are plain Gauss–Legendre.
fn cube_background(rho: &Density, f: &PairingTestFunction, res: &BackgroundResolution) -> (ViscosityTensor4<f64>, f64) {
    let (ix, iw) = gauss_legendre(res.outer_nodes);
    let g_of = |v: &Vec3<f64>| -> f64 {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for i in 0..3 {
            lo[i] = (-0.5f64).max(-0.5 - v[i]);
            hi[i] = 0.5f64.min(0.5 - v[i]);
            if hi[i] <= lo[i] {
                return 0.0;
            }
        }
        let half = [0, 1, 2].map(|i| 0.5 * (hi[i] - lo[i]));
        let mut acc = 0.0;
        for (a, wa) in ix.iter().zip(&iw) {
            for (b, wb) in ix.iter().zip(&iw) {
                for (c, wc) in ix.iter().zip(&iw) {
                    let y = [
                        lo[0] + half[0] * (a + 1.0),
                        lo[1] + half[1] * (b + 1.0),
                        lo[2] + half[2] * (c + 1.0),
                    ];
                    let x = [y[0] + v[0], y[1] + v[1], y[2] + v[2]];
                    acc += wa * wb * wc * rho.inner(&x) * f.eval(&x, &y) * rho.inner(&y);
                }
            }
        }
        acc * half[0] * half[1] * half[2]
    };
    let g0 = g_of(&[0.0; 3]);
    let (ax, aw) = gauss_legendre(res.sphere_order);
    let (rx, rw) = gauss_legendre(res.radial_nodes);
    // directions n ∝ (1, a, b) with a, b ∈ [0, 1], then permuted and reflected
    let mut dirs = Vec::new();
    for (a, wa) in ax.iter().zip(&aw) {
        for (b, wb) in ax.iter().zip(&aw) {
            let (a, b) = (0.5 * (a + 1.0), 0.5 * (b + 1.0));
            let l = (1.0 + a * a + b * b).sqrt();
            dirs.push(([1.0 / l, a / l, b / l], 0.25 * wa * wb / (l * l * l), l));
        }
    }
    let mut jobs = Vec::with_capacity(dirs.len() * 24);
    for (d, w, edge) in &dirs {
        // dominant component moved to position 0, 1, 2
        for base in [*d, [d[2], d[0], d[1]], [d[1], d[2], d[0]]] {
            for sg in 0..8 {
                let n = [0, 1, 2].map(|i| if sg >> i & 1 == 1 { -base[i] } else { base[i] });
                jobs.push((n, *w, *edge));
            }
        }
    }
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|(n, _, edge)| {
            let half = 0.5 * edge;
            let mut ray = g0 * edge.ln();
            for (t, w) in rx.iter().zip(&rw) {
                let s = half * (t + 1.0);
                ray += half * w * (g_of(&[s * n[0], s * n[1], s * n[2]]) - g0) / s;
            }
            ray
        })
        .collect();
    let mut m5 = [[0.0; 5]; 5];
    for ((n, w, _), v) in jobs.iter().zip(&vals) {
        accumulate(&mut m5, n, w * v);
    }
    (ViscosityTensor4::from_upper(m5), g0)
}

/// Ball: rays from each `y`; the exit distance is smooth in the direction.
fn ray_background(rho: &Density, f: &PairingTestFunction, res: &BackgroundResolution) -> (ViscosityTensor4<f64>, f64) {
    let sph = SphereRule::product(res.sphere_order);
    let outer = outer_rule(rho.domain, res);
    let (rx, rw) = gauss_legendre(res.radial_nodes);
    let radial = !(rho.is_indicator() && f.as_constant().is_some());
    let dirs = &sph.points;
    // A_n = Σ_y w_y ρ(y) [ray integral along n]
    let per_dir: Vec<f64> = dirs
        .par_iter()
        .map(|n| {
            let vals: Vec<f64> = outer
                .iter()
                .map(|(y, wy)| {
                    let ry = rho.inner(y);
                    if ry == 0.0 {
                        return 0.0;
                    }
                    let h0 = ry * f.eval(y, y);
                    let e = rho.domain.exit_distance(y, n);
                    let mut ray = h0 * e.ln();
                    if radial {
                        let half = 0.5 * e;
                        for (t, w) in rx.iter().zip(&rw) {
                            let s = half * (t + 1.0);
                            let x = [y[0] + s * n[0], y[1] + s * n[1], y[2] + s * n[2]];
                            ray += half * w * (rho.inner(&x) * f.eval(&x, y) - h0) / s;
                        }
                    }
                    wy * ry * ray
                })
                .collect();
            pairwise_sum(&vals)
        })
        .collect();
    let mut m5 = [[0.0; 5]; 5];
    for ((n, wn), a) in dirs.iter().zip(&sph.weights).zip(&per_dir) {
        accumulate(&mut m5, n, wn * a);
    }
    let diag: Vec<f64> = outer
        .iter()
        .map(|(y, wy)| {
            let r = rho.inner(y);
            wy * r * r * f.eval(y, y)
        })
        .collect();
    (ViscosityTensor4::from_upper(m5), pairwise_sum(&diag))
}

/// Background at `res` and at `res.refined()`; fails if the two differ by more than
/// `1e-3 · max(1, |entries|)`.
pub fn background_integral(
    rho: &Density,
    f: &PairingTestFunction,
    res: &BackgroundResolution,
) -> Result<BackgroundIntegral> {
    let (coarse, _) = background_at(rho, f, res);
    let fine_res = res.refined();
    let (pv, diagonal) = background_at(rho, f, &fine_res);
    let cert = (pv.clone() - coarse).max_abs();
    let scale = pv.max_abs().max(1.0);
    if cert > 1e-3 * scale {
        return Err(Error::NonConvergence(format!(
            "background integral changed by {cert:e} under refinement"
        )));
    }
    let value = pv.clone() - ViscosityTensor4::scaled_identity(delta_term(diagonal));
    Ok(BackgroundIntegral { value, pv, diagonal, certificate: cert, resolution: fine_res })
}
