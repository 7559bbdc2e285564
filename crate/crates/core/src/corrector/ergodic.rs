//! Ergodic route: the lattice kernel `K_1 = S∇·G_{S,1}` integrated against a radial pair
//! correlation inside an observation window of side `L - 2M` of the periodic box of side `L`.
//!
//! In unit-cell coordinates the window autocorrelation is the product of periodized tents
//! `τ_a(t) = (2a - 1) + (δ - |t|)₊` with `δ = 2M/L` and `a = 1 - δ`. The pairing of the
//! pointwise kernel with that product is done in closed form on the Fourier side for the
//! smooth Ewald part and by ray quadrature for the short part; the bins of `r` below the
//! decorrelation radius enter as a correction near the origin.

use std::f64::consts::PI;

use super::ewald::{short_scalar, symbol_f, LatticeGreenEvaluator};
use crate::configurations::RadialPairCorrelation;
use crate::error::{Error, Result};
use crate::estimate::{Mu2Estimate, Route, Sample};
use crate::extrapolate::extrapolate;
use crate::quadrature::gauss_legendre;
use crate::tensor::{vec3, TraceFreeSym3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErgodicOptions {
    /// Ewald split parameter of the windowed pairing.
    pub kappa: f64,
    /// Gauss–Legendre nodes per angular axis of each octant.
    pub angular: usize,
    /// Gauss–Legendre nodes per radial panel.
    pub radial: usize,
}

impl Default for ErgodicOptions {
    fn default() -> Self {
        Self { kappa: 12.0, angular: 24, radial: 16 }
    }
}

#[inline]
fn tent(a: f64, delta: f64, t: f64) -> f64 {
    (2.0 * a - 1.0) + (delta - t.abs()).max(0.0)
}

/// Directions and weights covering one octant (positive components).
fn octant_rule(order: usize) -> Vec<(Vec3<f64>, f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * order);
    for (ci, wi) in x.iter().zip(&w) {
        let c = 0.5 * (ci + 1.0);
        let s = (1.0 - c * c).max(0.0).sqrt();
        for (pj, wj) in x.iter().zip(&w) {
            let phi = 0.25 * PI * (pj + 1.0);
            out.push(([s * phi.cos(), s * phi.sin(), c], 0.5 * wi * 0.25 * PI * wj));
        }
    }
    out
}

const SIGNS: [[f64; 3]; 8] = [
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0],
    [-1.0, -1.0, -1.0],
];

/// `⟨K_1, Π τ_a⟩` for the pointwise kernel (principal value at the origin).
pub fn windowed_kernel_pairing(s: &TraceFreeSym3<f64>, delta: f64, opts: &ErgodicOptions) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain(format!("window margin 2M/L = {delta} outside (0, 1/2]")));
    }
    let a = 1.0 - delta;
    let kappa = opts.kappa;
    let s2 = s.norm_sq();

    let kmax = 2.01 * kappa;
    let kb = kmax.ceil() as i64;
    let tau_hat = |k: i64| {
        if k == 0 {
            a * a
        } else {
            let x = PI * k as f64;
            (x * a).sin().powi(2) / (x * x)
        }
    };
    let mut long = 0.0;
    for i in -kb..=kb {
        for j in -kb..=kb {
            for l in -kb..=kb {
                if (i, j, l) <= (0, 0, 0) {
                    continue;
                }
                let kv = [i as f64, j as f64, l as f64];
                let kk = vec3::norm(&kv);
                if kk > kmax {
                    continue;
                }
                let u = PI * PI * kk * kk / (kappa * kappa);
                let w = (1.0 + u) * (-u).exp();
                let n = vec3::scale(&kv, 1.0 / kk);
                long -= 2.0 * symbol_f(s, &n) * w * tau_hat(i) * tau_hat(j) * tau_hat(l);
            }
        }
    }

    let phi0 = a * a * a;
    let mut short = phi0 * s2 / 5.0;
    let (gx, gw) = gauss_legendre(opts.radial);
    for (n0, wn) in octant_rule(opts.angular) {
        let nmax = n0.iter().cloned().fold(0.0, f64::max);
        let end = 0.5 / nmax;
        let mut cuts: Vec<f64> = n0.iter().map(|c| delta / c).filter(|r| *r < end).collect();
        cuts.push(0.0);
        cuts.push(end);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut fine = Vec::new();
        for w in cuts.windows(2) {
            let pieces = ((w[1] - w[0]) / 0.05).ceil().max(1.0) as usize;
            for k in 0..pieces {
                fine.push((
                    w[0] + (w[1] - w[0]) * k as f64 / pieces as f64,
                    w[0] + (w[1] - w[0]) * (k + 1) as f64 / pieces as f64,
                ));
            }
        }
        for sg in &SIGNS {
            let n = [n0[0] * sg[0], n0[1] * sg[1], n0[2] * sg[2]];
            let mut ray = 0.0;
            for (lo, hi) in &fine {
                let half = 0.5 * (hi - lo);
                for (x, w) in gx.iter().zip(&gw) {
                    let rho = lo + half * (x + 1.0);
                    let v = vec3::scale(&n, rho);
                    let phi = tent(a, delta, v[0]) * tent(a, delta, v[1]) * tent(a, delta, v[2]);
                    ray += half * w * short_scalar(s, s2, kappa, &v) * rho * rho * (phi - phi0);
                }
            }
            short += wn * ray;
        }
    }
    Ok(long + short)
}

/// Contribution of `q - q∞` inside the decorrelation hole of radius `rho_h` (unit-cell units).
fn hole_correction(
    s: &TraceFreeSym3<f64>,
    bins: &[(f64, f64, f64)],
    rho_h: f64,
    delta: f64,
    opts: &ErgodicOptions,
) -> Result<f64> {
    if bins.iter().all(|b| b.2 == 0.0) || rho_h == 0.0 {
        return Ok(0.0);
    }
    let a = 1.0 - delta;
    let octant = octant_rule(opts.angular);
    // singular part (3/8π) g(n) ρ⁻³: Φ(ρn) - Φ(0) = -a²e1 ρ + a e2 ρ² - e3 ρ³ per octant
    // (e_k elementary symmetric in |n_i|); the Φ(0) term has zero angular mean
    let mut moments = [0.0; 3];
    for (n0, wn) in &octant {
        let e1 = n0[0] + n0[1] + n0[2];
        let e2 = n0[0] * n0[1] + n0[0] * n0[2] + n0[1] * n0[2];
        let e3 = n0[0] * n0[1] * n0[2];
        for sg in &SIGNS {
            let n = [n0[0] * sg[0], n0[1] * sg[1], n0[2] * sg[2]];
            let g = crate::kernels::eval_small_gs(s, &n)?;
            moments[0] += wn * g * e1;
            moments[1] += wn * g * e2;
            moments[2] += wn * g * e3;
        }
    }
    let pref = 3.0 / (8.0 * PI);
    let mut sing = 0.0;
    for &(lo, hi, dq) in bins {
        if dq == 0.0 {
            continue;
        }
        let i1 = hi - lo;
        let i2 = (hi * hi - lo * lo) / 2.0;
        let i3 = (hi.powi(3) - lo.powi(3)) / 3.0;
        sing += pref * dq * (-a * a * moments[0] * i1 + a * moments[1] * i2 - moments[2] * i3);
    }

    // regular part R_1 = K_1 - (3/8π)g_S: its angular average against Φ is smooth in ρ,
    // so sample it at Gauss nodes and integrate the interpolant per bin
    let ev = LatticeGreenEvaluator::new(s, 1.0)?;
    let limit = ev.origin_limit();
    let nodes = 8;
    let (rx, _) = gauss_legendre(nodes);
    let rn: Vec<f64> = rx.iter().map(|x| 0.5 * rho_h * (x + 1.0)).collect();
    let coarse = octant_rule(6);
    let mut avg = vec![0.0; nodes];
    for (k, rho) in rn.iter().enumerate() {
        for (n0, wn) in &coarse {
            for sg in &SIGNS {
                let n = [n0[0] * sg[0], n0[1] * sg[1], n0[2] * sg[2]];
                let v = vec3::scale(&n, *rho);
                let phi = tent(a, delta, v[0]) * tent(a, delta, v[1]) * tent(a, delta, v[2]);
                avg[k] += wn * ev.regular_part(&v).unwrap_or(limit) * phi;
            }
        }
    }
    let lagrange = |rho: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..nodes {
            let mut li = 1.0;
            for j in 0..nodes {
                if i != j {
                    li *= (rho - rn[j]) / (rn[i] - rn[j]);
                }
            }
            acc += li * avg[i];
        }
        acc
    };
    let (bx, bw) = gauss_legendre(4);
    let mut reg = 0.0;
    for &(lo, hi, dq) in bins {
        if dq == 0.0 {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mut part = 0.0;
        for (x, w) in bx.iter().zip(&bw) {
            let rho = lo + half * (x + 1.0);
            part += half * w * rho * rho * lagrange(rho);
        }
        reg += dq * part;
    }
    Ok(sing + reg)
}

fn deviation_bins(r: &RadialPairCorrelation, m: f64, side: f64) -> (Vec<(f64, f64, f64)>, f64) {
    let m2 = m * m;
    let q_inf = r.asymptote / m2;
    let mut out = Vec::new();
    let mut push = |lo: f64, hi: f64, q: f64| {
        if hi > lo {
            out.push((lo / side, hi / side, q - q_inf));
        }
    };
    for k in 0..r.values.len() {
        let (lo, hi) = (r.edges[k], r.edges[k + 1]);
        let h = r.hardcore_radius;
        if hi <= h {
            push(lo, hi, 0.0);
        } else if lo < h {
            push(lo, h, 0.0);
            push(h, hi, r.values[k] / m2);
        } else {
            push(lo, hi, r.values[k] / m2);
        }
    }
    (out, q_inf)
}

/// `∫ K_1(v) q(L|v|) W(v) dv` for one box side `side` and margin `margin`, with `q = r/m²`.
pub fn ergodic_window_value(
    r: &RadialPairCorrelation,
    m: f64,
    s: &TraceFreeSym3<f64>,
    side: f64,
    margin: f64,
    opts: &ErgodicOptions,
) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain("intensity must be positive".into()));
    }
    if margin < r.decorrelation_radius {
        return Err(Error::Domain(format!(
            "margin M = {margin} below the decorrelation radius {}",
            r.decorrelation_radius
        )));
    }
    if side < 4.0 * margin {
        return Err(Error::Domain(format!("box side {side} below 4M = {}", 4.0 * margin)));
    }
    let delta = 2.0 * margin / side;
    let (bins, q_inf) = deviation_bins(r, m, side);
    let base = if q_inf == 0.0 { 0.0 } else { q_inf * windowed_kernel_pairing(s, delta, opts)? };
    let hole = hole_correction(s, &bins, r.decorrelation_radius / side, delta, opts)?;
    Ok(base + hole)
}

/// `μ₂ S : S = (25μ/2) lim_{L→∞} ∫ K_1 q W`, extrapolated linearly in `1/L`.
pub fn mu2_ergodic_route(
    r: &RadialPairCorrelation,
    m: f64,
    strains: &[TraceFreeSym3<f64>],
    sides: &[f64],
    margin: f64,
    mu: f64,
) -> Result<Mu2Estimate> {
    if sides.len() < 2 {
        return Err(Error::Domain("need at least two box sides to extrapolate".into()));
    }
    let opts = ErgodicOptions::default();
    let h: Vec<f64> = sides.iter().map(|l| 1.0 / l).collect();
    let mut samples = Vec::new();
    let mut err: f64 = 0.0;
    let mut raw = Vec::new();
    for s in strains {
        let v: Vec<f64> = sides
            .iter()
            .map(|l| ergodic_window_value(r, m, s, *l, margin, &opts))
            .collect::<Result<_>>()?;
        let pref = 12.5 * mu;
        let value = if v.iter().all(|x| *x == 0.0) {
            0.0
        } else if sides.len() == 2 {
            let e = extrapolate(&h, &v, None, 1)?;
            err = err.max(pref * (e.limit - v[v.len() - 1]).abs());
            e.limit
        } else {
            let e = extrapolate(&h, &v, None, 1)?;
            err = err.max(pref * e.error_bar().max((e.limit - v[v.len() - 1]).abs() * 0.1));
            e.limit
        };
        raw.push(serde_json::json!(v.iter().map(|x| pref * x).collect::<Vec<_>>()));
        samples.push(Sample { s: *s, value: pref * value });
    }
    Ok(Mu2Estimate::samples(Route::ErgodicIntegral, samples, err)
        .with_param("sides", serde_json::json!(sides))
        .with_param("margin", margin)
        .with_param("intensity", m)
        .with_param("mu", mu)
        .with_param("raw", serde_json::Value::Array(raw)))
}
