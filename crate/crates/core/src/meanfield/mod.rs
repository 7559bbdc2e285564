//! Renormalized pairing `⟨μ₂,ₙ, F⟩`: discrete double sum over the particles minus the
//! mean-field background, plus `W_n[φ]`, the CZ convolution and convergence studies.

pub mod background;
pub mod cz;
pub mod study;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::configurations::{Domain, ParticleConfig};
use crate::error::Result;
use crate::estimate::{Mu2Estimate, Route};
use crate::kernels;
use crate::quadrature::{pairwise_sum, KahanSum};
use crate::tensor::{vec3, TraceFreeSym3, Vec3, ViscosityTensor4};

pub use background::{background_integral, delta_term, BackgroundIntegral, BackgroundResolution};
pub use cz::{cz_convolve, cz_multiplier, cz_pv_oracle, CzMode, GriddedDensity};
pub use study::{convergence_study, matern_to_cube, study_estimate, ConvergenceRow, ConvergenceTable, GeneratorSpec, StudyTarget};

/// `75/16π`.
pub const PAIRING_PREFACTOR: f64 = 75.0 / (16.0 * PI);

type ScalarFn = Arc<dyn Fn(&Vec3<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vec3<f64>) -> Vec3<f64> + Send + Sync>;
type PairFn = Arc<dyn Fn(&Vec3<f64>, &Vec3<f64>) -> f64 + Send + Sync>;

/// A C¹ scalar function with its gradient.
#[derive(Clone)]
pub struct SmoothScalar {
    value: ScalarFn,
    gradient: GradFn,
    constant: Option<f64>,
}

impl std::fmt::Debug for SmoothScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.constant {
            Some(c) => write!(f, "SmoothScalar::constant({c})"),
            None => write!(f, "SmoothScalar(..)"),
        }
    }
}

impl SmoothScalar {
    pub fn new<F, G>(value: F, gradient: G) -> Self
    where
        F: Fn(&Vec3<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&Vec3<f64>) -> Vec3<f64> + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), gradient: Arc::new(gradient), constant: None }
    }

    pub fn constant(c: f64) -> Self {
        Self { value: Arc::new(move |_| c), gradient: Arc::new(|_| [0.0; 3]), constant: Some(c) }
    }

    /// `a + b·x`.
    pub fn affine(a: f64, b: Vec3<f64>) -> Self {
        Self::new(move |x| a + vec3::dot(&b, x), move |_| b)
    }

    /// `(1 + x·Qx)` for a symmetric matrix `Q`.
    pub fn quadratic(q: [[f64; 3]; 3]) -> Self {
        let qv = q;
        Self::new(
            move |x| 1.0 + vec3::dot(x, &vec3::mat_vec(&qv, x)),
            move |x| vec3::scale(&vec3::mat_vec(&q, x), 2.0),
        )
    }

    /// `p(x) = Σ_k c_k x^{α_k}`.
    pub fn polynomial(terms: Vec<(f64, [u8; 3])>) -> Self {
        let t2 = terms.clone();
        Self::new(
            move |x| terms.iter().map(|(c, e)| c * monomial(x, e)).sum(),
            move |x| {
                let mut g = [0.0; 3];
                for (c, e) in &t2 {
                    for a in 0..3 {
                        if e[a] > 0 {
                            let mut d = *e;
                            d[a] -= 1;
                            g[a] += c * e[a] as f64 * monomial(x, &d);
                        }
                    }
                }
                g
            },
        )
    }

    #[inline]
    pub fn value(&self, x: &Vec3<f64>) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn gradient(&self, x: &Vec3<f64>) -> Vec3<f64> {
        (self.gradient)(x)
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    /// `self + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let v = self.value.clone();
        Self {
            value: Arc::new(move |x| v(x) + c),
            gradient: self.gradient.clone(),
            constant: self.constant.map(|k| k + c),
        }
    }
}

fn monomial(x: &Vec3<f64>, e: &[u8; 3]) -> f64 {
    x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32)
}

/// Test function `F(x, y)` of the pairing.
#[derive(Clone)]
pub enum PairingTestFunction {
    /// `F ≡ 1`.
    One,
    /// `F(x, y) = f(x) g(y)`.
    TensorProduct(SmoothScalar, SmoothScalar),
    /// Arbitrary C¹ `F(x, y)`.
    General(PairFn),
}

impl std::fmt::Debug for PairingTestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::One => write!(f, "One"),
            Self::TensorProduct(a, b) => write!(f, "TensorProduct({a:?}, {b:?})"),
            Self::General(_) => write!(f, "General(..)"),
        }
    }
}

impl PairingTestFunction {
    pub fn general<F: Fn(&Vec3<f64>, &Vec3<f64>) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::General(Arc::new(f))
    }

    pub fn square(phi: &SmoothScalar) -> Self {
        Self::TensorProduct(phi.clone(), phi.clone())
    }

    #[inline]
    pub fn eval(&self, x: &Vec3<f64>, y: &Vec3<f64>) -> f64 {
        match self {
            Self::One => 1.0,
            Self::TensorProduct(f, g) => f.value(x) * g.value(y),
            Self::General(f) => f(x, y),
        }
    }

    /// `Some(c)` when `F ≡ c`.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::One => Some(1.0),
            Self::TensorProduct(f, g) => Some(f.as_constant()? * g.as_constant()?),
            Self::General(_) => None,
        }
    }

    /// `F(x_i, x_j) + F(x_j, x_i)`.
    #[inline]
    fn symmetric(&self, x: &Vec3<f64>, y: &Vec3<f64>) -> f64 {
        match self {
            Self::One => 2.0,
            _ => self.eval(x, y) + self.eval(y, x),
        }
    }
}

/// Density `ρ = w 1_𝒪` of the limiting empirical measure.
#[derive(Clone, Debug)]
pub struct Density {
    pub domain: Domain,
    pub weight: Option<SmoothScalar>,
}

impl Density {
    pub fn indicator(domain: Domain) -> Self {
        Self { domain, weight: None }
    }

    #[inline]
    pub fn eval(&self, x: &Vec3<f64>) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        self.weight.as_ref().map_or(1.0, |w| w.value(x))
    }

    /// Weight inside `𝒪` (no indicator).
    #[inline]
    pub(crate) fn inner(&self, x: &Vec3<f64>) -> f64 {
        self.weight.as_ref().map_or(1.0, |w| w.value(x))
    }

    pub(crate) fn is_indicator(&self) -> bool {
        self.weight.as_ref().map_or(true, |w| w.as_constant() == Some(1.0))
    }
}

/// Sums a per-row quantity deterministically: Neumaier within rows, pairwise across rows.
fn row_reduce<F: Fn(usize) -> [f64; 15] + Sync + Send>(n: usize, row: F) -> [f64; 15] {
    let rows: Vec<[f64; 15]> = (0..n).into_par_iter().map(row).collect();
    let mut out = [0.0; 15];
    let mut col = vec![0.0; n];
    for k in 0..15 {
        for (i, r) in rows.iter().enumerate() {
            col[i] = r[k];
        }
        out[k] = pairwise_sum(&col);
    }
    out
}

/// `(1/n²) Σ_{i≠j} ℳ(x_i - x_j) F(x_i, x_j)` over ordered pairs.
pub fn discrete_pair_sum(config: &ParticleConfig, f: &PairingTestFunction) -> Result<ViscosityTensor4<f64>> {
    let n = config.n();
    if n < 2 {
        return Ok(ViscosityTensor4::zero());
    }
    let pts = &config.points;
    let sums = row_reduce(n, |i| {
        let mut acc: [KahanSum; 15] = Default::default();
        for j in i + 1..n {
            let d = vec3::sub(&pts[i], &pts[j]);
            let w = f.symmetric(&pts[i], &pts[j]);
            if w == 0.0 {
                continue;
            }
            let m = kernels::eval_m(&d).expect("distinct points");
            let mm = m.matrix5();
            let mut k = 0;
            for a in 0..5 {
                for b in a..5 {
                    acc[k].add(w * mm[a][b]);
                    k += 1;
                }
            }
        }
        let mut out = [0.0; 15];
        for k in 0..15 {
            out[k] = acc[k].value();
        }
        out
    });
    let mut m5 = [[0.0; 5]; 5];
    let mut k = 0;
    let norm = 1.0 / (n as f64 * n as f64);
    for a in 0..5 {
        for b in a..5 {
            m5[a][b] = sums[k] * norm;
            k += 1;
        }
    }
    Ok(ViscosityTensor4::from_upper(m5))
}

/// `(1/n²) Σ_{i≠j} g_S(x_i - x_j) F(x_i, x_j)`, the contraction of [`discrete_pair_sum`] with `S`.
pub fn discrete_pair_sum_contracted(config: &ParticleConfig, f: &PairingTestFunction, s: &TraceFreeSym3<f64>) -> f64 {
    let n = config.n();
    if n < 2 {
        return 0.0;
    }
    let pts = &config.points;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = KahanSum::default();
            for j in i + 1..n {
                let w = f.symmetric(&pts[i], &pts[j]);
                if w != 0.0 {
                    let d = vec3::sub(&pts[i], &pts[j]);
                    acc.add(w * kernels::eval_small_gs(s, &d).expect("distinct points"));
                }
            }
            acc.value()
        })
        .collect();
    pairwise_sum(&rows) / (n as f64 * n as f64)
}

/// Pairing value with its two parts (δ-inclusive background).
#[derive(Clone, Debug)]
pub struct PairingValue {
    pub tensor: ViscosityTensor4<f64>,
    pub discrete: ViscosityTensor4<f64>,
    pub background: BackgroundIntegral,
}

/// `⟨μ₂,ₙ, F⟩ = (75μ/16π)(discrete_pair_sum - background_integral)`.
pub fn pairing_mu2n(config: &ParticleConfig, rho: &Density, f: &PairingTestFunction, mu: f64) -> Result<PairingValue> {
    let bg = background_integral(rho, f, &BackgroundResolution::default())?;
    pairing_with_background(config, f, mu, bg)
}

/// As [`pairing_mu2n`] with a precomputed background (reused across samples).
pub fn pairing_with_background(
    config: &ParticleConfig,
    f: &PairingTestFunction,
    mu: f64,
    bg: BackgroundIntegral,
) -> Result<PairingValue> {
    let d = discrete_pair_sum(config, f)?;
    let tensor = (d.clone() - bg.value.clone()).scale(PAIRING_PREFACTOR * mu);
    Ok(PairingValue { tensor, discrete: d, background: bg })
}

/// Contracted pairing `⟨μ₂,ₙ, F⟩ S : S` with a precomputed background.
pub fn pairing_contracted(
    config: &ParticleConfig,
    f: &PairingTestFunction,
    s: &TraceFreeSym3<f64>,
    mu: f64,
    bg: &BackgroundIntegral,
) -> f64 {
    PAIRING_PREFACTOR * mu * (discrete_pair_sum_contracted(config, f, s) - bg.value.contract(s, s))
}

pub fn pairing_estimate(config: &ParticleConfig, rho: &Density, f: &PairingTestFunction, mu: f64) -> Result<Mu2Estimate> {
    let p = pairing_mu2n(config, rho, f, mu)?;
    let err = PAIRING_PREFACTOR * mu * p.background.certificate;
    Ok(Mu2Estimate::tensor(Route::Pairing, p.tensor, err)
        .with_param("n", config.n())
        .with_param("domain", config.domain.id())
        .with_param("mu", mu))
}

/// `PV ∫ g_S(x - y) φ(y) ρ(y) dy` at `x ∈ 𝒪` by rays from `x`.
pub fn pv_field_at(rho: &Density, phi: &SmoothScalar, s: &TraceFreeSym3<f64>, x: &Vec3<f64>, res: &BackgroundResolution) -> f64 {
    let sph = crate::quadrature::SphereRule::product(res.sphere_order);
    let (rx, rw) = crate::quadrature::gauss_legendre(res.radial_nodes);
    let h0 = rho.inner(x) * phi.value(x);
    let radial = !(rho.is_indicator() && phi.as_constant().is_some());
    let mut acc = 0.0;
    for (n, wn) in sph.points.iter().zip(&sph.weights) {
        let e = rho.domain.exit_distance(x, n);
        let g = kernels::eval_small_gs(s, n).expect("unit direction");
        let mut ray = h0 * e.ln();
        if radial {
            let half = 0.5 * e;
            for (t, w) in rx.iter().zip(&rw) {
                let r = half * (t + 1.0);
                let y = [x[0] + r * n[0], x[1] + r * n[1], x[2] + r * n[2]];
                ray += half * w * (rho.inner(&y) * phi.value(&y) - h0) / r;
            }
        }
        acc += wn * g * ray;
    }
    acc
}

/// Parts of `W_n[φ]` (before the `75/16π` factor).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WnParts {
    pub discrete: f64,
    pub cross: f64,
    pub background: f64,
    pub value: f64,
}

/// `W_n[φ] = (75/16π)(D - 2C + B)` with all three terms in the δ-inclusive convention.
pub fn wn(config: &ParticleConfig, phi: &SmoothScalar, s: &TraceFreeSym3<f64>) -> Result<WnParts> {
    let rho = Density::indicator(config.domain);
    let f = PairingTestFunction::square(phi);
    let res = BackgroundResolution::default();
    let d = discrete_pair_sum_contracted(config, &f, s);
    let s2 = s.norm_sq();
    let n = config.n().max(1) as f64;
    let rows: Vec<f64> = config
        .points
        .par_iter()
        .map(|x| {
            let p = phi.value(x);
            if p == 0.0 {
                return 0.0;
            }
            p * (pv_field_at(&rho, phi, s, x, &res) - 8.0 * PI / 15.0 * s2 * p * rho.inner(x))
        })
        .collect();
    let c = pairwise_sum(&rows) / n;
    let b = background_integral(&rho, &f, &res)?.value.contract(s, s);
    Ok(WnParts { discrete: d, cross: c, background: b, value: PAIRING_PREFACTOR * (d - 2.0 * c + b) })
}

/// `Σ_i |Σ_{j≠i} r_n³ ℳ(x_i - x_j) A_j|^q / (λ^{q-1} Σ_i |A_i|^q)`; `0/0` is reported as 0.
pub fn cz_discrete_bound_check(config: &ParticleConfig, coeffs: &[TraceFreeSym3<f64>], q: f64) -> Result<f64> {
    if coeffs.len() != config.n() {
        return Err(crate::Error::Domain("one coefficient per particle required".into()));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(crate::Error::Domain(format!("exponent q = {q} outside (1, ∞)")));
    }
    let den: f64 = pairwise_sum(&coeffs.iter().map(|a| a.norm().powf(q)).collect::<Vec<_>>());
    if den == 0.0 {
        return Ok(0.0);
    }
    let r3 = config.r_n.powi(3);
    let pts = &config.points;
    let n = config.n();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = [KahanSum::default(), KahanSum::default(), KahanSum::default(), KahanSum::default(), KahanSum::default()];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let m = kernels::m_apply(&vec3::sub(&pts[i], &pts[j]), &coeffs[j]).expect("distinct points");
                for (k, v) in m.project().iter().enumerate() {
                    acc[k].add(*v);
                }
            }
            let norm2: f64 = acc.iter().map(|a| (r3 * a.value()).powi(2)).sum();
            norm2.sqrt().powf(q)
        })
        .collect();
    Ok(pairwise_sum(&rows) / (config.lambda.powf(q - 1.0) * den))
}
