//! Periodic correctors and the μ₂ routes built on them.

pub mod ergodic;
pub mod ewald;
pub mod spectral;

use std::path::Path;

use crate::configurations::{torus_delta, PeriodicPattern};
use crate::error::{Error, Result};
use crate::estimate::{Mu2Estimate, Route, Sample};
use crate::regularized::RegularizedStokeslet;
use crate::tensor::{OrthoBasis5, TraceFreeSym3, ViscosityTensor4};

pub use ergodic::{ergodic_window_value, mu2_ergodic_route, ErgodicOptions};
pub use ewald::{lattice_limit_term, LatticeGreenEvaluator, LimitTerm};
pub use spectral::{
    build_corrector_source, corrector_energy, solve_periodic_stokes, windowed_self_energy, CorrectorSource,
    PeriodicVectorField, SourceDiscretization, SpectralWindow,
};

/// `μ₂ = (5/2) Id`, scaled by `μ`.
pub fn isotropic_reference(mu: f64) -> ViscosityTensor4<f64> {
    ViscosityTensor4::scaled_identity(2.5 * mu)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyOptions {
    pub discretization: SourceDiscretization,
    pub mu: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self { discretization: SourceDiscretization::Analytic, mu: 1.0 }
    }
}

/// One energy-route evaluation on an `N³` grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyEvaluation {
    pub n: usize,
    pub windowed_energy: f64,
    pub windowed_self_energy: f64,
    pub raw_energy: f64,
    pub value: f64,
}

/// `μ₂ S:S = (25μ/2m²)(m E_self,χ - E_χ)` from the windowed corrector energy.
pub fn energy_route_at(
    pattern: &PeriodicPattern,
    eta_bar: f64,
    s: &TraceFreeSym3<f64>,
    n: usize,
    opts: &EnergyOptions,
) -> Result<EnergyEvaluation> {
    let src = build_corrector_source(pattern, eta_bar, s, n, opts.discretization)?;
    let (h, _) = solve_periodic_stokes(&src.field)?;
    let win = SpectralWindow::for_grid(n);
    let e = corrector_energy(&h, Some(&win));
    let raw = corrector_energy(&h, None);
    drop(h);
    let reg = RegularizedStokeslet::new(s, eta_bar)?;
    let ef = windowed_self_energy(&reg, &win);
    let m = pattern.m() as f64;
    let value = 12.5 * opts.mu / (m * m) * (m * ef - e);
    Ok(EnergyEvaluation { n, windowed_energy: e, windowed_self_energy: ef, raw_energy: raw, value })
}

/// Energy route for each strain; the error bar is the change from `N/2` to `N`.
pub fn mu2_energy_route(
    pattern: &PeriodicPattern,
    eta_bar: f64,
    strains: &[TraceFreeSym3<f64>],
    n: usize,
    opts: &EnergyOptions,
) -> Result<Mu2Estimate> {
    let mut samples = Vec::new();
    let mut err: f64 = 0.0;
    let mut coarse_vals = Vec::new();
    for s in strains {
        let fine = energy_route_at(pattern, eta_bar, s, n, opts)?;
        let coarse = energy_route_at(pattern, eta_bar, s, n / 2, opts)?;
        err = err.max((fine.value - coarse.value).abs());
        coarse_vals.push(coarse.value);
        samples.push(Sample { s: *s, value: fine.value });
    }
    Ok(Mu2Estimate::samples(Route::CorrectorEnergy, samples, err)
        .with_param("eta_bar", eta_bar)
        .with_param("N", n)
        .with_param("m", pattern.m())
        .with_param("mu", opts.mu)
        .with_param("coarse_N", n / 2)
        .with_param("coarse_values", serde_json::json!(coarse_vals)))
}

/// `Σ_{i≠j} K_1(z_i - z_j) + m L(S)` for the pattern.
pub fn lattice_pair_sum(pattern: &PeriodicPattern, s: &TraceFreeSym3<f64>) -> Result<(f64, LimitTerm)> {
    let limit = lattice_limit_term(s)?;
    let ev = LatticeGreenEvaluator::new(s, 1.0)?;
    let mut acc = pattern.m() as f64 * limit.value;
    for (i, zi) in pattern.cell_points.iter().enumerate() {
        for (j, zj) in pattern.cell_points.iter().enumerate() {
            if i != j {
                acc += ev.eval_sgrad_gsl(&torus_delta(zi, zj, 1.0))?;
            }
        }
    }
    Ok((acc, limit))
}

/// Lattice route: `μ₂ S:S = (25μ/2m²)(Σ_{i≠j} K_1(z_i - z_j) + m L(S))`.
pub fn mu2_lattice_route(pattern: &PeriodicPattern, strains: &[TraceFreeSym3<f64>], mu: f64) -> Result<Mu2Estimate> {
    let m = pattern.m() as f64;
    let pref = 12.5 * mu / (m * m);
    let mut samples = Vec::new();
    let mut err: f64 = 0.0;
    for s in strains {
        let (v, lim) = lattice_pair_sum(pattern, s)?;
        err = err.max(pref * m * lim.spread);
        samples.push(Sample { s: *s, value: pref * v });
    }
    Ok(Mu2Estimate::samples(Route::LatticeSum, samples, err).with_param("m", pattern.m()).with_param("mu", mu))
}

/// Full lattice-route tensor by polarization over the canonical basis.
pub fn mu2_lattice_tensor(pattern: &PeriodicPattern, mu: f64) -> Result<Mu2Estimate> {
    let e = OrthoBasis5::<f64>::canonical().e;
    let mut strains: Vec<TraceFreeSym3<f64>> = e.to_vec();
    for i in 0..5 {
        for j in i + 1..5 {
            strains.push(e[i] + e[j]);
        }
    }
    let est = mu2_lattice_route(pattern, &strains, mu)?;
    let vals: Vec<f64> = match &est.value {
        crate::estimate::Mu2Value::Samples(v) => v.iter().map(|x| x.value).collect(),
        _ => unreachable!(),
    };
    let mut m5 = [[0.0; 5]; 5];
    for i in 0..5 {
        m5[i][i] = vals[i];
    }
    let mut k = 5;
    for i in 0..5 {
        for j in i + 1..5 {
            let b = 0.5 * (vals[k] - vals[i] - vals[j]);
            m5[i][j] = b;
            m5[j][i] = b;
            k += 1;
        }
    }
    let t = ViscosityTensor4::from_matrix5(m5)?;
    Ok(Mu2Estimate::tensor(Route::LatticeSum, t, est.error_bar)
        .with_param("m", pattern.m())
        .with_param("mu", mu))
}

/// Cubic constants of the simple cubic lattice: `μ₂ S:S = α Σ S_ii² + β Σ_{i≠j} S_ij²`, and
/// the derived `a` from either constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicConstants {
    pub alpha: f64,
    pub beta: f64,
    pub a_from_alpha: f64,
    pub a_from_beta: f64,
}

pub fn simple_cubic_constants() -> Result<CubicConstants> {
    let e = OrthoBasis5::<f64>::canonical().e;
    let pat = PeriodicPattern::simple_cubic();
    let est = mu2_lattice_route(&pat, &[e[0], e[2]], 1.0)?;
    let alpha = est.quadratic(&e[0]).unwrap();
    let beta = est.quadratic(&e[2]).unwrap();
    Ok(CubicConstants {
        alpha,
        beta,
        a_from_alpha: (1.0 - 0.4 * alpha) / 60.0,
        a_from_beta: (0.4 * beta - 1.0) / 40.0,
    })
}

/// Writes `<stem>.bin` (little-endian coefficients) and `<stem>.json` (sidecar).
pub fn export_field(field: &PeriodicVectorField, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.bin")), field.to_le_bytes())?;
    let side = serde_json::to_string_pretty(&field.sidecar())?;
    std::fs::write(dir.join(format!("{stem}.json")), side)?;
    Ok(())
}

/// Reads a field written by [`export_field`].
pub fn import_field(dir: &Path, stem: &str) -> Result<PeriodicVectorField> {
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let n = side["N"].as_u64().ok_or_else(|| Error::Config("sidecar without N".into()))? as usize;
    let bytes = std::fs::read(dir.join(format!("{stem}.bin")))?;
    if bytes.len() != n * n * n * 48 {
        return Err(Error::Config(format!("field size {} does not match N = {n}", bytes.len())));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let coeffs = (0..n * n * n)
        .map(|i| [0, 1, 2].map(|a| num_complex::Complex64::new(f(6 * i + 2 * a), f(6 * i + 2 * a + 1))))
        .collect();
    Ok(PeriodicVectorField { n, coeffs })
}
