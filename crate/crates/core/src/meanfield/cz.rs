//! Convolution with the contracted kernel `g_S = ℳ S : S` on a zero-padded FFT grid.
//!
//! The PV symbol of `g_S` splits into degree-2 and degree-4 spherical harmonics,
//! `σ(ξ̂) = (8π/3)[-(3/7) ξ̂·(S²)'ξ̂ + Y₄(ξ̂)]`. Truncating the kernel at radius `R`
//! multiplies the degree-l part by `J_l(|ξ|R)/J_l(∞)` with `J_l(x) = ∫_0^x j_l(t) dt/t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::corrector::spectral::{fft3, wavenumber};
use crate::error::{Error, Result};
use crate::kernels;
use crate::quadrature::{composite_gauss_legendre, SphereRule};
use crate::regularized::bessel_j_over_pow;
use crate::tensor::{vec3, TraceFreeSym3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CzMode {
    PrincipalValue,
    /// `PV - (8π/15)|S|² h`, the convention of the background integral.
    DeltaInclusive,
}

/// Scalar density on the cell-centred grid `x_i = -a + (i + 1/2) 2a/N` of `[-a, a]³`.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedDensity {
    pub n: usize,
    pub half_side: f64,
    pub values: Vec<f64>,
}

impl GriddedDensity {
    pub fn sample<F: Fn(&Vec3<f64>) -> f64>(f: F, n: usize, half_side: f64) -> Self {
        let mut values = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    values.push(f(&Self::node_of(n, half_side, i, j, l)));
                }
            }
        }
        Self { n, half_side, values }
    }

    fn node_of(n: usize, a: f64, i: usize, j: usize, l: usize) -> Vec3<f64> {
        let h = 2.0 * a / n as f64;
        [-a + (i as f64 + 0.5) * h, -a + (j as f64 + 0.5) * h, -a + (l as f64 + 0.5) * h]
    }

    pub fn node(&self, i: usize, j: usize, l: usize) -> Vec3<f64> {
        Self::node_of(self.n, self.half_side, i, j, l)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    fn check(&self) -> Result<()> {
        let n = self.n;
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("grid size {n} is not a power of two ≥ 8")));
        }
        let max = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if max == 0.0 {
            return Ok(());
        }
        let mut ranges = [(n, 0usize); 3];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = self.values[self.index(i, j, l)].abs();
                    let edge = [i, j, l].iter().any(|&c| c == 0 || c == n - 1);
                    if edge && v > 1e-10 * max {
                        return Err(Error::Domain("density does not vanish at the grid boundary".into()));
                    }
                    if v > 1e-3 * max {
                        for (a, c) in [i, j, l].iter().enumerate() {
                            ranges[a].0 = ranges[a].0.min(*c);
                            ranges[a].1 = ranges[a].1.max(*c);
                        }
                    }
                }
            }
        }
        let wide = ranges.map(|(lo, hi)| hi + 1 - lo);
        if wide.iter().any(|w| *w < 8) {
            return Err(Error::Domain(format!("support spans only {wide:?} cells; grid too coarse")));
        }
        Ok(())
    }
}

/// Symbol of `g_S` truncated at radius `R`, at unit direction `n` and `kr = |ξ|R`
/// (`kr = ∞` gives the PV symbol).
pub fn cz_multiplier(s: &TraceFreeSym3<f64>, n: &Vec3<f64>, kr: f64) -> f64 {
    let s2 = s.norm_sq();
    let sn = s.apply(n);
    let q = vec3::dot(n, &sn);
    let quad = vec3::dot(&sn, &sn) - s2 / 3.0;
    let y4 = q * q - 2.0 * s2 / 15.0 - 4.0 / 7.0 * quad;
    let (r2, r4) = if kr.is_infinite() {
        (1.0, 1.0)
    } else if kr == 0.0 {
        (0.0, 0.0)
    } else {
        let j1 = bessel_j_over_pow(1, kr);
        let j2 = bessel_j_over_pow(2, kr);
        (3.0 * (1.0 / 3.0 - j1), 7.5 * (2.0 / 15.0 - 7.0 * j2 + j1))
    };
    8.0 * PI / 3.0 * (-3.0 / 7.0 * quad * r2 + y4 * r4)
}

/// `(g_S ⋆ h)` at the grid nodes.
pub fn cz_convolve(h: &GriddedDensity, s: &TraceFreeSym3<f64>, mode: CzMode) -> Result<Vec<f64>> {
    h.check()?;
    let n = h.n;
    let p = 4 * n;
    let side = 4.0 * 2.0 * h.half_side;
    let radius = 3f64.sqrt() * 2.0 * h.half_side;
    let mut buf = vec![Complex64::new(0.0, 0.0); p * p * p];
    let pidx = |i: usize, j: usize, l: usize| (i * p + j) * p + l;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                buf[pidx(i, j, l)] = Complex64::new(h.values[h.index(i, j, l)], 0.0);
            }
        }
    }
    let mut planner = FftPlanner::new();
    fft3(&mut planner, &mut buf, p, false);
    for i in 0..p {
        for j in 0..p {
            for l in 0..p {
                let k = [wavenumber(i, p), wavenumber(j, p), wavenumber(l, p)];
                let idx = pidx(i, j, l);
                if k == [0, 0, 0] {
                    buf[idx] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let xi = k.map(|v| 2.0 * PI * v as f64 / side);
                let kk = vec3::norm(&xi);
                let m = cz_multiplier(s, &vec3::scale(&xi, 1.0 / kk), kk * radius);
                buf[idx] *= m;
            }
        }
    }
    fft3(&mut planner, &mut buf, p, true);
    let norm = 1.0 / (p * p * p) as f64;
    let shift = match mode {
        CzMode::PrincipalValue => 0.0,
        CzMode::DeltaInclusive => 8.0 * PI / 15.0 * s.norm_sq(),
    };
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                out.push(buf[pidx(i, j, l)].re * norm - shift * h.values[h.index(i, j, l)]);
            }
        }
    }
    Ok(out)
}

/// Direct PV quadrature `∫_{S²} g_S(n) ∫_0^{rmax} (h(x + tn) - h(x)) dt/t dn`; `rmax` must
/// reach past the support of `h` from `x`.
pub fn cz_pv_oracle<F: Fn(&Vec3<f64>) -> f64>(
    h: F,
    s: &TraceFreeSym3<f64>,
    x: &Vec3<f64>,
    rmax: f64,
    panels: usize,
    sphere_order: usize,
) -> f64 {
    let sph = SphereRule::product(sphere_order);
    let (t, wt) = composite_gauss_legendre(12, panels, 0.0, rmax);
    let h0 = h(x);
    let mut acc = 0.0;
    for (n, wn) in sph.points.iter().zip(&sph.weights) {
        let g = kernels::eval_small_gs(s, n).expect("unit direction");
        let mut ray = 0.0;
        for (r, w) in t.iter().zip(&wt) {
            let y = [x[0] + r * n[0], x[1] + r * n[1], x[2] + r * n[2]];
            ray += w * (h(&y) - h0) / r;
        }
        acc += wn * g * ray;
    }
    acc
}
