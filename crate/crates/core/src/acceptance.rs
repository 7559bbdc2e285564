//! Acceptance criteria as runnable checks. Each returns a measured value against a pinned
//! tolerance; `quick` shrinks the problem sizes for smoke runs (quick results are not
//! expected to meet every tolerance).

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::configurations::{
    cubic_lattice, estimate_pair_correlation, gen_matern2, gen_periodic_pattern, MaternSample, PeriodicPattern,
};
use crate::corrector::{
    energy_route_at, isotropic_reference, mu2_ergodic_route, mu2_lattice_route, simple_cubic_constants, EnergyOptions,
};
use crate::error::{Error, Result};
use crate::kernels;
use crate::meanfield::{
    convergence_study, cz_convolve, cz_discrete_bound_check, cz_pv_oracle, CzMode, GeneratorSpec, GriddedDensity,
    StudyTarget,
};
use crate::tensor::{vec3, OrthoBasis5, TraceFreeSym3, Vec3};

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AcceptanceOptions {
    pub quick: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} [{}] {}: measured {:.6e} tol {:.1e}; {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

fn report(id: u8, title: &str, measured: f64, tolerance: f64, detail: String) -> CriterionReport {
    CriterionReport {
        id,
        title: title.to_string(),
        measured,
        tolerance,
        passed: measured.is_finite() && measured < tolerance,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run_criterion(id: u8, opts: &AcceptanceOptions) -> Result<CriterionReport> {
    match id {
        1 => cubic_constant(),
        2 => energy_vs_lattice(opts),
        3 => eta_independence(opts),
        4 => isotropic_routes(opts),
        5 => lattice_pairing(opts),
        6 => kernel_suite(),
        7 => cz_oracle(opts),
        8 => bound_slope(opts),
        _ => Err(Error::Config(format!("unknown criterion {id}"))),
    }
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<Result<CriterionReport>> {
    CRITERIA.iter().map(|id| run_criterion(*id, opts)).collect()
}

fn basis() -> [TraceFreeSym3<f64>; 5] {
    OrthoBasis5::<f64>::canonical().e
}

fn cubic_constant() -> Result<CriterionReport> {
    let c = simple_cubic_constants()?;
    let target = -0.04655;
    Ok(report(
        1,
        "simple cubic a",
        (c.a_from_alpha - target).abs(),
        5e-5,
        format!("a = {:.10} (from beta {:.10}), target {target}", c.a_from_alpha, c.a_from_beta),
    ))
}

/// Patterns with the grid parameters: `(pattern, eta_bar)`.
fn corrector_patterns(quick: bool) -> Result<Vec<(PeriodicPattern, f64)>> {
    Ok(vec![
        (PeriodicPattern::simple_cubic(), 0.15),
        (gen_periodic_pattern(4, 0.5, 7)?, if quick { 0.14 } else { 0.1 }),
    ])
}

fn energy_vs_lattice(opts: &AcceptanceOptions) -> Result<CriterionReport> {
    let e = basis();
    let (coarse, fine) = if opts.quick { (32, 64) } else { (64, 128) };
    let eo = EnergyOptions::default();
    let mut worst: f64 = 0.0;
    let mut improving = true;
    let mut parts = Vec::new();
    for (pat, eta) in corrector_patterns(opts.quick)? {
        let strains = [e[0], e[2]];
        let lat = mu2_lattice_route(&pat, &strains, 1.0)?;
        for (s, name) in strains.iter().zip(["E1", "E3"]) {
            let l = lat.quadratic(s).expect("strain present");
            let rc = rel(energy_route_at(&pat, eta, s, coarse, &eo)?.value, l);
            let rf = rel(energy_route_at(&pat, eta, s, fine, &eo)?.value, l);
            // both already at round-off counts as improving
            improving &= rf <= rc || rf < 1e-9;
            worst = worst.max(rf);
            parts.push(format!("m={} {name} {rc:.1e}->{rf:.1e}", pat.m()));
        }
    }
    let mut r = report(2, "energy vs lattice route", worst, 1e-2, format!("N {coarse}->{fine}: {}", parts.join(", ")));
    r.passed &= improving;
    if !improving {
        r.detail.push_str("; not improving under N-doubling");
    }
    Ok(r)
}

fn eta_independence(opts: &AcceptanceOptions) -> Result<CriterionReport> {
    let e = basis();
    let n = if opts.quick { 64 } else { 128 };
    let eo = EnergyOptions::default();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (pat, eta) in corrector_patterns(opts.quick)? {
        for (s, name) in [(e[0], "E1"), (e[2], "E3")] {
            let a = energy_route_at(&pat, eta, &s, n, &eo)?.value;
            let b = energy_route_at(&pat, 0.5 * eta, &s, n, &eo)?.value;
            let d = rel(b, a);
            worst = worst.max(d);
            parts.push(format!("m={} {name} eta={eta}: {d:.1e}", pat.m()));
        }
    }
    Ok(report(3, "eta_bar independence", worst, 1e-2, format!("N={n}: {}", parts.join(", "))))
}

fn isotropic_routes(opts: &AcceptanceOptions) -> Result<CriterionReport> {
    let e = basis();
    let strains = vec![e[0], e[2]];
    let (primary, hardcore) = (0.1, 1.0);
    let seeds: Vec<u64> = if opts.quick { (0..4).collect() } else { (0..20).collect() };
    let n_list: Vec<usize> = if opts.quick { vec![1250, 2500] } else { vec![1250, 2500, 5000, 10000] };
    let spec = GeneratorSpec::Matern { primary_intensity: primary, hardcore, lambda: 0.01, seeds: seeds.clone() };
    let tables = convergence_study(&spec, &n_list, &StudyTarget::one(strains.clone()))?;

    let n_max = *n_list.last().unwrap() as f64;
    let side = (n_max / MaternSample::expected_intensity(primary, hardcore)).cbrt();
    let samples: Vec<MaternSample> =
        seeds.iter().map(|s| gen_matern2(primary, hardcore, side, *s)).collect::<Result<_>>()?;
    let r = estimate_pair_correlation(&samples, 2.0, 20)?;
    let m_hat = samples.iter().map(|s| s.intensity()).sum::<f64>() / samples.len() as f64;
    let ergodic = mu2_ergodic_route(&r, m_hat, &strains, &[256.0, 512.0, 1024.0, 2048.0], 2.0, 1.0)?;

    let iso = isotropic_reference(1.0);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, s) in strains.iter().enumerate() {
        let target = iso.contract(s, s);
        let p = tables[k].limit.limit;
        let g = ergodic.quadratic(s).expect("strain present");
        worst = worst.max(rel(p, target)).max(rel(g, target));
        parts.push(format!("E{}: pairing {p:.4} (se {:.3}) ergodic {g:.4}", [1, 3][k], tables[k].limit.std_error));
    }
    Ok(report(
        4,
        "Matern pairing and ergodic route vs isotropic",
        worst,
        0.05,
        format!("{} seeds, n<={n_max}: {}", seeds.len(), parts.join(", ")),
    ))
}

fn lattice_pairing(opts: &AcceptanceOptions) -> Result<CriterionReport> {
    let e = basis();
    let strains = vec![e[0], e[2]];
    let n_list: Vec<usize> = if opts.quick { vec![512, 1728, 4096] } else { vec![512, 1728, 4096, 8000] };
    let tables = convergence_study(&GeneratorSpec::Lattice { lambda: 0.01 }, &n_list, &StudyTarget::one(strains.clone()))?;
    let lat = mu2_lattice_route(&PeriodicPattern::simple_cubic(), &strains, 1.0)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, s) in strains.iter().enumerate() {
        let l = lat.quadratic(s).expect("strain present");
        let p = tables[k].limit.limit;
        worst = worst.max(rel(p, l));
        parts.push(format!("E{}: pairing {p:.5} lattice {l:.5}", [1, 3][k]));
    }
    Ok(report(5, "extrapolated lattice pairing vs lattice route", worst, 2e-2, parts.join(", ")))
}

fn unit_sym(rng: &mut ChaCha8Rng) -> TraceFreeSym3<f64> {
    let v = [0; 5].map(|_| rng.gen_range(-1.0..1.0f64));
    let s = TraceFreeSym3::embed(&v);
    s.scale(1.0 / s.norm())
}

fn unit_vec(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let v = [0; 3].map(|_| rng.gen_range(-1.0..1.0f64));
        let r = vec3::norm(&v);
        if r > 0.1 && r <= 1.0 {
            return vec3::scale(&v, 1.0 / r);
        }
    }
}

/// Sub-checks as `(name, error, tolerance)`.
fn kernel_checks() -> Vec<(&'static str, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut out = Vec::new();

    out.push(("sphere mean of M", kernels::sphere_mean_m(0.7, 12).max_abs(), 1e-10));

    let mut hom: f64 = 0.0;
    for _ in 0..20 {
        let x = vec3::scale(&unit_vec(&mut rng), rng.gen_range(0.3..2.0));
        let t = rng.gen_range(0.2..5.0f64);
        let a = kernels::eval_m(&x).unwrap();
        let b = kernels::eval_m(&vec3::scale(&x, t)).unwrap().scale(t.powi(3));
        hom = hom.max((b - a.clone()).max_abs() / a.max_abs());
    }
    out.push(("homogeneity of M", hom, 1e-12));

    // D(∇𝒰A) : B = (3/8π) ℳ A : B by central differences
    let mut dd: f64 = 0.0;
    let h = 1e-5;
    for _ in 0..10 {
        let x = vec3::scale(&unit_vec(&mut rng), rng.gen_range(0.8..1.5));
        let (a, b) = (unit_sym(&mut rng), unit_sym(&mut rng));
        let mut grad = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let up = kernels::grad_u_contract(&a, &xp).unwrap();
            let um = kernels::grad_u_contract(&a, &xm).unwrap();
            for i in 0..3 {
                grad[i][j] = (up[i] - um[i]) / (2.0 * h);
            }
        }
        let mut lhs = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                lhs += 0.5 * (grad[i][j] + grad[j][i]) * b.get(i, j);
            }
        }
        let rhs = 3.0 / (8.0 * PI) * kernels::m_contract(&x, &a, &b).unwrap();
        dd = dd.max((lhs - rhs).abs());
    }
    out.push(("D(grad U A):B identity", dd, 1e-6));

    let mut bc: f64 = 0.0;
    for _ in 0..20 {
        let (a, n) = (unit_sym(&mut rng), unit_vec(&mut rng));
        let v = kernels::eval_v(&a, &n).unwrap();
        let ax = a.apply(&n);
        bc = bc.max((0..3).map(|i| (v[i] + ax[i]).abs()).fold(0.0, f64::max));
    }
    out.push(("V = -Ax on the unit sphere", bc, 1e-14));

    let mut ft: f64 = 0.0;
    for _ in 0..5 {
        let (f, t) = kernels::check_noforce_notorque(&unit_sym(&mut rng), 16);
        ft = ft.max(f).max(t);
    }
    out.push(("no force, no torque", ft, 1e-9));

    let m4 = kernels::sphere_fourth_moment(8);
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut fm: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let exact = 4.0 * PI / 15.0 * (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    fm = fm.max((m4[i][j][k][l] - exact).abs());
                }
            }
        }
    }
    out.push(("fourth moment", fm, 1e-12));

    let mut qm: f64 = 0.0;
    for _ in 0..10 {
        let s = unit_sym(&mut rng).scale(rng.gen_range(0.5..2.0));
        qm = qm.max((kernels::sphere_quadratic_moment(&s, 8) - s.norm_sq() / 5.0).abs());
    }
    out.push(("(3/8pi) int (Sn.n)^2 = |S|^2/5", qm, 1e-10));
    out
}

fn kernel_suite() -> Result<CriterionReport> {
    let checks = kernel_checks();
    let worst = checks.iter().map(|(_, e, t)| e / t).fold(0.0, f64::max);
    let detail = checks
        .iter()
        .map(|(n, e, t)| format!("{n} {e:.1e}/{t:.0e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(report(6, "kernel property suite (worst error/tol)", worst, 1.0, detail))
}

fn bump(x: &Vec3<f64>) -> f64 {
    let c = [0.05, -0.1, 0.02];
    let r2 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>() / 0.16;
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp() * (1.0 + x[0] + x[1] * x[2])
    }
}

fn cz_oracle(opts: &AcceptanceOptions) -> Result<CriterionReport> {
    let n = 64;
    let probes = if opts.quick { 5 } else { 20 };
    let s = TraceFreeSym3::embed(&[0.8, 0.1, 0.0, 0.5, -0.3]);
    let g = GriddedDensity::sample(bump, n, 0.6);
    let out = cz_convolve(&g, &s, CzMode::PrincipalValue)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
    for _ in 0..probes {
        let idx = [0; 3].map(|_| rng.gen_range(n / 4..3 * n / 4));
        let x = g.node(idx[0], idx[1], idx[2]);
        let o = cz_pv_oracle(bump, &s, &x, 1.2, 24, 24);
        diff = diff.max((out[g.index(idx[0], idx[1], idx[2])] - o).abs());
        scale = scale.max(o.abs());
    }
    Ok(report(
        7,
        "cz_convolve vs PV quadrature",
        diff / scale,
        1e-3,
        format!("N={n}, {probes} probes, max |diff| {diff:.2e}, max |oracle| {scale:.3e}"),
    ))
}

fn bound_slope(opts: &AcceptanceOptions) -> Result<CriterionReport> {
    let ks: &[usize] = if opts.quick { &[8, 12, 16] } else { &[8, 12, 16, 24, 32] };
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut parts = Vec::new();
    for &k in ks {
        let cfg = cubic_lattice(k, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let a: Vec<_> = (0..cfg.n()).map(|_| unit_sym(&mut rng)).collect();
        let ratio = cz_discrete_bound_check(&cfg, &a, 2.0)?;
        lx.push((cfg.n() as f64).ln());
        ly.push(ratio.ln());
        parts.push(format!("{k}^3: {ratio:.5}"));
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(report(
        8,
        "log-log slope of discrete CZ ratio",
        slope.abs(),
        0.05,
        format!("slope {slope:.4}, q=2, ratios {}", parts.join(", ")),
    ))
}
