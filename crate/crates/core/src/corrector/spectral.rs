//! Fourier-space periodic Stokes solver on the unit torus and the corrector energy.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::configurations::{torus_delta, PeriodicPattern};
use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss_legendre, SphereRule};
use crate::regularized::{leray, RegularizedStokeslet};
use crate::tensor::{vec3, Mat3, TraceFreeSym3, Vec3};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Integer wavenumber of FFT index `i` on an `n`-point axis.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
fn flat(i: usize, j: usize, l: usize, n: usize) -> usize {
    (i * n + j) * n + l
}

/// Vector field on the unit torus stored as Fourier coefficients on an `N³` grid
/// (FFT ordering, coefficient of `e^{2πi k·x}`).
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicVectorField {
    pub n: usize,
    pub coeffs: Vec<[Complex64; 3]>,
}

impl PeriodicVectorField {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: vec![[ZERO; 3]; n * n * n] }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        flat(i, j, l, self.n)
    }

    /// `ξ = 2πk` for the mode at flat index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> Vec3<f64> {
        mode_vector(idx, self.n)
    }

    /// Largest `|ξ·ĥ| / |ξ|` over the modes, relative to the largest `|ĥ|`.
    pub fn divergence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate().skip(1) {
            let xi = self.wavevector(idx);
            scale = scale.max((c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr()).sqrt());
            let d = (c[0] * xi[0] + c[1] * xi[1] + c[2] * xi[2]).norm();
            worst = worst.max(d / vec3::norm(&xi));
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn mean(&self) -> [Complex64; 3] {
        self.coeffs[0]
    }

    /// Real-space `|∇H|²` averaged over the grid points (inverse FFT of `iξ⊗Ĥ`).
    pub fn grid_gradient_energy(&self) -> f64 {
        let n = self.n;
        let mut planner = FftPlanner::new();
        let mut total = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let mut buf: Vec<Complex64> = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| I * mode_vector(idx, n)[b] * c[a])
                    .collect();
                fft3(&mut planner, &mut buf, n, true);
                total += buf.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        total / (n * n * n) as f64
    }

    /// Little-endian `f64` array, row-major over the grid, then components, `re, im` interleaved.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.coeffs.len() * 48);
        for c in &self.coeffs {
            for z in c {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "components": 3,
            "dtype": "f64",
            "layout": "row-major complex interleaved",
        })
    }
}

#[inline]
fn mode_vector(idx: usize, n: usize) -> Vec3<f64> {
    let l = idx % n;
    let j = (idx / n) % n;
    let i = idx / (n * n);
    [
        2.0 * PI * wavenumber(i, n) as f64,
        2.0 * PI * wavenumber(j, n) as f64,
        2.0 * PI * wavenumber(l, n) as f64,
    ]
}

/// In-place 3D FFT (unnormalized); `inverse` uses `e^{+i}`.
pub fn fft3(planner: &mut FftPlanner<f64>, data: &mut [Complex64], n: usize, inverse: bool) {
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    // last axis: contiguous rows
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut line = vec![ZERO; n];
    for i in 0..n {
        for l in 0..n {
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[flat(i, j, l, n)];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[flat(i, j, l, n)] = *v;
            }
        }
    }
    for j in 0..n {
        for l in 0..n {
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[flat(i, j, l, n)];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[flat(i, j, l, n)] = *v;
            }
        }
    }
}

/// How Ψ^η̄ enters the discrete source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDiscretization {
    /// Exact Fourier coefficients of the piecewise polynomial Ψ^η̄.
    Analytic,
    /// Ψ^η̄ sampled at grid points and transformed by FFT.
    PointSampled,
}

/// Fourier coefficients of `div Σ_z Ψ^η̄(· - z)` on the grid.
#[derive(Clone, Debug)]
pub struct CorrectorSource {
    pub field: PeriodicVectorField,
    pub eta_bar: f64,
    pub discretization: SourceDiscretization,
}

fn check_admissible(pattern: &PeriodicPattern, eta_bar: f64, n: usize) -> Result<()> {
    let m = pattern.m() as f64;
    if !(eta_bar > 0.0) {
        return Err(Error::Domain("η̄ must be positive".into()));
    }
    if pattern.m() > 1 && eta_bar >= 0.5 * pattern.hardcore_c * m.powf(-1.0 / 3.0) {
        return Err(Error::Domain(format!(
            "η̄ = {eta_bar} not below (c/2) m^(-1/3) = {}",
            0.5 * pattern.hardcore_c * m.powf(-1.0 / 3.0)
        )));
    }
    if 2.0 * eta_bar >= pattern.min_torus_distance() {
        return Err(Error::Domain(format!("regularization balls of radius {eta_bar} overlap")));
    }
    if (n as f64) * 2.0 * eta_bar < 8.0 {
        return Err(Error::Domain(format!(
            "grid N = {n} gives fewer than 8 cells across the ball of radius {eta_bar}"
        )));
    }
    Ok(())
}

/// Samples `Σ_z Ψ^η̄(x - z)` at the grid points `x = j/N` (minimum-image convention).
pub fn sample_psi_grid(pattern: &PeriodicPattern, reg: &RegularizedStokeslet, n: usize) -> Vec<Mat3<f64>> {
    let mut out = vec![[[0.0; 3]; 3]; n * n * n];
    let h = 1.0 / n as f64;
    let eta = reg.eta();
    for z in &pattern.cell_points {
        // only grid points within η of z can be nonzero
        let span = (eta / h).ceil() as i64 + 1;
        let c = z.map(|v| (v / h).round() as i64);
        for a in -span..=span {
            for b in -span..=span {
                for d in -span..=span {
                    let g = [c[0] + a, c[1] + b, c[2] + d].map(|v| v.rem_euclid(n as i64) as usize);
                    let x = [g[0] as f64 * h, g[1] as f64 * h, g[2] as f64 * h];
                    let dx = torus_delta(&x, z, 1.0);
                    let p = reg.psi(&dx);
                    let slot = &mut out[flat(g[0], g[1], g[2], n)];
                    for i in 0..3 {
                        for j in 0..3 {
                            slot[i][j] += p[i][j];
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn build_corrector_source(
    pattern: &PeriodicPattern,
    eta_bar: f64,
    s: &TraceFreeSym3<f64>,
    n: usize,
    disc: SourceDiscretization,
) -> Result<CorrectorSource> {
    check_admissible(pattern, eta_bar, n)?;
    let reg = RegularizedStokeslet::new(s, eta_bar)?;
    let mut field = PeriodicVectorField::zero(n);
    match disc {
        SourceDiscretization::Analytic => {
            // per-axis phase tables e^{-2πi k z_a}
            let phases: Vec<[Vec<Complex64>; 3]> = pattern
                .cell_points
                .iter()
                .map(|z| {
                    [0, 1, 2].map(|a| {
                        (0..n)
                            .map(|i| Complex64::from_polar(1.0, -2.0 * PI * wavenumber(i, n) as f64 * z[a]))
                            .collect()
                    })
                })
                .collect();
            for idx in 1..n * n * n {
                let xi = mode_vector(idx, n);
                let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
                let mut sf = ZERO;
                for ph in &phases {
                    sf += ph[0][i] * ph[1][j] * ph[2][l];
                }
                let p = reg.psi_hat(&xi);
                let mut c = [ZERO; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        c[a] += I * p[a][b] * xi[b];
                    }
                    c[a] *= sf;
                }
                field.coeffs[idx] = c;
            }
        }
        SourceDiscretization::PointSampled => {
            let grid = sample_psi_grid(pattern, &reg, n);
            let mut planner = FftPlanner::new();
            let norm = 1.0 / (n * n * n) as f64;
            let mut hat = vec![[[ZERO; 3]; 3]; n * n * n];
            for a in 0..3 {
                for b in a..3 {
                    let mut buf: Vec<Complex64> =
                        grid.iter().map(|m| Complex64::new(m[a][b], 0.0)).collect();
                    fft3(&mut planner, &mut buf, n, false);
                    for (k, v) in buf.iter().enumerate() {
                        hat[k][a][b] = v * norm;
                        hat[k][b][a] = v * norm;
                    }
                }
            }
            for idx in 1..n * n * n {
                let xi = mode_vector(idx, n);
                let mut c = [ZERO; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        c[a] += I * hat[idx][a][b] * xi[b];
                    }
                }
                field.coeffs[idx] = c;
            }
        }
    }
    field.coeffs[0] = [ZERO; 3];
    Ok(CorrectorSource { field, eta_bar, discretization: disc })
}

/// Per-mode Stokes solve `|ξ|²Ĥ + iξP̂ = f̂`, `ξ·Ĥ = 0`, zero mean.
pub fn solve_periodic_stokes(source: &PeriodicVectorField) -> Result<(PeriodicVectorField, Vec<Complex64>)> {
    let n = source.n;
    let mut h = PeriodicVectorField::zero(n);
    let mut p = vec![ZERO; n * n * n];
    for idx in 1..n * n * n {
        let xi = mode_vector(idx, n);
        let k2 = vec3::dot(&xi, &xi);
        let f = source.coeffs[idx];
        let proj = leray(&xi, &f);
        let hv = proj.map(|v| v / k2);
        let pv = -I * (f[0] * xi[0] + f[1] * xi[1] + f[2] * xi[2]) / k2;
        let fn2 = (f[0].norm_sqr() + f[1].norm_sqr() + f[2].norm_sqr()).sqrt();
        for a in 0..3 {
            let r = hv[a] * k2 + I * xi[a] * pv - f[a];
            if r.norm() > 1e-12 * fn2.max(f64::MIN_POSITIVE) {
                return Err(Error::NonConvergence(format!("Stokes residual {} at mode {idx}", r.norm())));
            }
        }
        h.coeffs[idx] = hv;
        p[idx] = pv;
    }
    Ok((h, p))
}

/// Smooth radial cutoff `χ(|k|/K)`: one below `t0·K`, zero from `K` on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub cutoff: f64,
    pub t0: f64,
}

impl SpectralWindow {
    /// Window matched to an `N³` grid: `K = N/2`, `t0 = 0.3`.
    pub fn for_grid(n: usize) -> Self {
        Self { cutoff: n as f64 / 2.0, t0: 0.3 }
    }

    /// `χ` at integer wavenumber magnitude `k`.
    pub fn chi(&self, k: f64) -> f64 {
        let t = k / self.cutoff;
        if t <= self.t0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let s = (t - self.t0) / (1.0 - self.t0);
        let psi = |u: f64| if u <= 0.0 { 0.0 } else { (-1.0 / u).exp() };
        let a = psi(1.0 - s);
        a / (a + psi(s))
    }
}

/// `Σ_ξ χ |ξ|² |Ĥ(ξ)|²` (the plain Parseval sum when `window` is `None`).
pub fn corrector_energy(h: &PeriodicVectorField, window: Option<&SpectralWindow>) -> f64 {
    let mut acc = 0.0;
    for (idx, c) in h.coeffs.iter().enumerate().skip(1) {
        let xi = h.wavevector(idx);
        let k2 = vec3::dot(&xi, &xi);
        let w = match window {
            Some(win) => win.chi(k2.sqrt() / (2.0 * PI)),
            None => 1.0,
        };
        if w == 0.0 {
            continue;
        }
        acc += w * k2 * (c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr());
    }
    acc
}

/// `(2π)⁻³ ∫ χ(|ξ|/2π) |ξ|² |Ĝ^η(ξ)|² dξ`: the free-space energy of one regularized stresslet
/// seen through the same window.
pub fn windowed_self_energy(reg: &RegularizedStokeslet, window: &SpectralWindow) -> f64 {
    let kmax = 2.0 * PI * window.cutoff;
    let eta = reg.eta();
    let panels = ((kmax * eta / (0.5 * PI)).ceil() as usize).max(8);
    let (r, wr) = composite_gauss_legendre(16, panels, 0.0, kmax);
    let sph = SphereRule::product(12);
    let mut acc = 0.0;
    for (k, w) in r.iter().zip(&wr) {
        let chi = window.chi(k / (2.0 * PI));
        if chi == 0.0 {
            continue;
        }
        let mut shell = 0.0;
        for (n, wn) in sph.points.iter().zip(&sph.weights) {
            let g = reg.velocity_hat(&vec3::scale(n, *k));
            shell += wn * (g[0].norm_sqr() + g[1].norm_sqr() + g[2].norm_sqr());
        }
        acc += w * chi * k.powi(4) * shell;
    }
    acc / (8.0 * PI * PI * PI)
}
