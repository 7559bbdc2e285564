//! One function per subcommand. Everything written is a pure function of the config.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use visco2::acceptance::{run_criterion, AcceptanceOptions, CRITERIA};
use visco2::configurations::{
    cubic_lattice, estimate_pair_correlation, gen_matern2, io_write, min_distance, scale_to_domain, validate_a0,
    indicator, MaternSample, ParticleConfig,
};
use visco2::corrector::{
    build_corrector_source, energy_route_at, export_field, isotropic_reference, mu2_energy_route, mu2_ergodic_route,
    mu2_lattice_route, mu2_lattice_tensor, simple_cubic_constants, solve_periodic_stokes, EnergyOptions,
    SourceDiscretization,
};
use visco2::estimate::Mu2Estimate;
use visco2::meanfield::{
    convergence_study, matern_to_cube, pairing_estimate, study_estimate, ConvergenceTable, Density, GeneratorSpec,
    PairingTestFunction, StudyTarget,
};
use visco2::configurations::io_read;
use visco2::Sym3;

use crate::config::{resolve_strains, GenConfig, RunConfig};
use crate::CliError;

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_text(out: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::write(out.join(name), text).map_err(|e| CliError::Core(e.into()))
}

fn write_json(out: &Path, name: &str, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Core(e.into()))?;
    s.push('\n');
    write_text(out, name, &s)
}

fn write_estimate(out: &Path, name: &str, est: &Mu2Estimate) -> Result<(), CliError> {
    write_json(out, name, &est.to_json())
}

/// `min_distance · n^{1/3}` against the hardcore constant, plus the intensity discrepancy.
fn point_report(cfg: &ParticleConfig) -> Value {
    let d = if cfg.n() > 1 { min_distance(cfg) } else { f64::INFINITY };
    let scaled = d * (cfg.n() as f64).cbrt();
    json!({
        "n": cfg.n(),
        "domain": cfg.domain.id(),
        "lambda": cfg.lambda,
        "min_distance": if d.is_finite() { json!(d) } else { Value::Null },
        "min_distance_scaled": if scaled.is_finite() { json!(scaled) } else { Value::Null },
        "hardcore_c": cfg.hardcore_c,
        "hardcore_ok": !(scaled < cfg.hardcore_c),
        "a0_discrepancy": validate_a0(cfg, indicator(cfg.domain), 4),
    })
}

pub fn gen(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let g = RunConfig::section(&cfg.gen, "gen")?;
    let mut files = Vec::new();
    let mut emit = |stem: String, pc: &ParticleConfig, extra: Value| -> Result<(), CliError> {
        let name = format!("{stem}.txt");
        io_write(&out.join(&name), pc)?;
        let mut rep = point_report(pc);
        rep["file"] = json!(name);
        if let (Some(r), Some(e)) = (rep.as_object_mut(), extra.as_object()) {
            r.extend(e.clone());
        }
        files.push(rep);
        Ok(())
    };
    let params = match g {
        GenConfig::Lattice { k, lambda } => {
            if *k == 0 {
                return Err(CliError::Config("lattice needs k ≥ 1".into()));
            }
            emit(format!("lattice_{k}"), &cubic_lattice(*k, *lambda), json!({}))?;
            json!({"kind": "lattice", "k": k, "lambda": lambda})
        }
        GenConfig::Periodic { pattern, epsilon, domain, lambda } => {
            let pat = pattern.build()?;
            let pc = scale_to_domain(&pat, *epsilon, *domain, *lambda)?;
            emit(format!("periodic_m{}", pat.m()), &pc, json!({"pattern_min_torus_distance": pat.min_torus_distance()}))?;
            json!({
                "kind": "periodic",
                "pattern": serde_json::to_value(&pat).map_err(|e| CliError::Core(e.into()))?,
                "epsilon": epsilon,
                "domain": domain.id(),
                "lambda": lambda,
            })
        }
        GenConfig::Matern { primary_intensity, hardcore, n, seeds, lambda } => {
            if seeds.is_empty() {
                return Err(CliError::Config("matern needs at least one seed".into()));
            }
            let side = matern_side(*primary_intensity, *hardcore, *n)?;
            for seed in seeds {
                let smp = gen_matern2(*primary_intensity, *hardcore, side, *seed)?;
                let pc = matern_to_cube(&smp, *lambda)?;
                emit(format!("matern_seed{seed}"), &pc, json!({"seed": seed, "box_side": side}))?;
            }
            json!({
                "kind": "matern",
                "primary_intensity": primary_intensity,
                "hardcore": hardcore,
                "n": n,
                "seeds": seeds,
                "lambda": lambda,
                "box_side": side,
            })
        }
    };
    write_json(out, "provenance.json", &json!({"params": params, "files": files}))
}

fn matern_side(primary: f64, hardcore: f64, n: usize) -> Result<f64, CliError> {
    let m = MaternSample::expected_intensity(primary, hardcore);
    if !(m > 0.0) || n == 0 {
        return Err(CliError::Config("matern needs positive intensity and n".into()));
    }
    Ok((n as f64 / m).cbrt())
}

fn write_tables(out: &Path, prefix: &str, names: &[String], tables: &[ConvergenceTable]) -> Result<(), CliError> {
    for (name, t) in names.iter().zip(tables) {
        write_text(out, &format!("{prefix}_{name}.csv"), &t.to_csv())?;
        write_text(out, &format!("{prefix}_{name}.dat"), &t.to_dat())?;
    }
    Ok(())
}

pub fn pairing(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = RunConfig::section(&cfg.pairing, "pairing")?;
    let strains = resolve_strains(&p.strains)?;
    let f = match &p.phi {
        None => PairingTestFunction::One,
        Some(phi) => PairingTestFunction::square(&phi.build()),
    };
    match (&p.generator, &p.points) {
        (Some(g), None) => {
            if p.n_list.is_empty() {
                return Err(CliError::Config("pairing: n_list is empty".into()));
            }
            let spec = g.build()?;
            let target = StudyTarget {
                strains: strains.iter().map(|(_, s)| *s).collect(),
                phi: p.phi.as_ref().map(|x| x.build()),
                mu: p.mu,
                order: p.order,
            };
            let tables = convergence_study(&spec, &p.n_list, &target)?;
            let names: Vec<String> = strains.iter().map(|(n, _)| n.clone()).collect();
            write_tables(out, "pairing", &names, &tables)?;
            let est = study_estimate(&tables, &p.n_list)
                .with_param("generator", serde_json::to_value(&spec).map_err(|e| CliError::Core(e.into()))?)
                .with_param("order", p.order)
                .with_param("mu", p.mu)
                .with_param("strain_names", json!(names))
                .with_param("converging", json!(tables.iter().map(|t| t.converging).collect::<Vec<_>>()));
            write_estimate(out, "pairing.json", &est)
        }
        (None, Some(path)) => {
            let pc = io_read(Path::new(path))?;
            let rho = Density::indicator(pc.domain);
            let est = pairing_estimate(&pc, &rho, &f, p.mu)?.with_param("points", path.as_str());
            write_estimate(out, "pairing.json", &est)
        }
        _ => Err(CliError::Config("pairing: give exactly one of \"generator\" and \"points\"".into())),
    }
}

pub fn corrector(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let c = RunConfig::section(&cfg.corrector, "corrector")?;
    let strains = resolve_strains(&c.strains)?;
    let pat = c.pattern.build()?;
    let opts = EnergyOptions { discretization: c.discretization.unwrap_or(SourceDiscretization::Analytic), mu: c.mu };
    let s: Vec<Sym3> = strains.iter().map(|(_, s)| *s).collect();
    let names: Vec<String> = strains.iter().map(|(n, _)| n.clone()).collect();
    let est = mu2_energy_route(&pat, c.eta_bar, &s, c.n, &opts)?.with_param("strain_names", json!(names));
    write_estimate(out, "corrector.json", &est)?;

    if !c.eta_sweep.is_empty() {
        let mut csv = String::from("eta_bar,strain,value\n");
        let mut dat = String::from("# eta_bar");
        for n in &names {
            let _ = write!(dat, " {n}");
        }
        dat.push('\n');
        for eta in &c.eta_sweep {
            let _ = write!(dat, "{}", fmt17(*eta));
            for (name, st) in &strains {
                let v = energy_route_at(&pat, *eta, st, c.n, &opts)?.value;
                let _ = writeln!(csv, "{},{},{}", fmt17(*eta), name, fmt17(v));
                let _ = write!(dat, " {}", fmt17(v));
            }
            dat.push('\n');
        }
        write_text(out, "corrector_sweep.csv", &csv)?;
        write_text(out, "corrector_sweep.dat", &dat)?;
    }
    if c.export_field {
        let src = build_corrector_source(&pat, c.eta_bar, &s[0], c.n, opts.discretization)?;
        let (h, _) = solve_periodic_stokes(&src.field)?;
        export_field(&h, out, &format!("corrector_field_{}", names[0]))?;
    }
    Ok(())
}

pub fn lattice(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let l = RunConfig::section(&cfg.lattice, "lattice")?;
    let pat = l.pattern.build()?;
    let mut est = match &l.strains {
        None => mu2_lattice_tensor(&pat, l.mu)?,
        Some(list) => {
            let strains = resolve_strains(list)?;
            let s: Vec<Sym3> = strains.iter().map(|(_, s)| *s).collect();
            mu2_lattice_route(&pat, &s, l.mu)?
                .with_param("strain_names", json!(strains.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()))
        }
    };
    if pat.m() == 1 {
        // one point per cell is the simple cubic lattice whatever its position
        let k = simple_cubic_constants()?;
        est = est
            .with_param("alpha", l.mu * k.alpha)
            .with_param("beta", l.mu * k.beta)
            .with_param("a", k.a_from_alpha)
            .with_param("a_from_beta", k.a_from_beta);
    }
    write_estimate(out, "lattice.json", &est)
}

pub fn isotropic(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let c = RunConfig::section(&cfg.isotropic, "isotropic")?;
    if c.seeds.is_empty() {
        return Err(CliError::Config("isotropic: seeds is empty".into()));
    }
    if c.ergodic.is_none() && c.pairing.is_none() {
        return Err(CliError::Config("isotropic: needs an \"ergodic\" or \"pairing\" section".into()));
    }
    let strains = resolve_strains(&c.strains)?;
    let s: Vec<Sym3> = strains.iter().map(|(_, s)| *s).collect();
    let iso = isotropic_reference(c.mu);
    let mut routes = Vec::new();
    let mut comparison = Vec::new();
    let mut compare = |route: &str, est: &Mu2Estimate| {
        for (name, st) in &strains {
            let v = est.quadratic(st).expect("strain evaluated");
            let reference = iso.contract(st, st);
            comparison.push(json!({
                "route": route,
                "strain": name,
                "value": v,
                "reference": reference,
                "abs_diff": (v - reference).abs(),
                "rel_diff": (v - reference).abs() / reference.abs(),
                "error_bar": est.error_bar,
            }));
        }
    };
    if let Some(e) = &c.ergodic {
        let side = matern_side(c.primary_intensity, c.hardcore, e.n)?;
        let samples: Vec<MaternSample> = c
            .seeds
            .iter()
            .map(|seed| gen_matern2(c.primary_intensity, c.hardcore, side, *seed))
            .collect::<visco2::Result<_>>()?;
        let r = estimate_pair_correlation(&samples, e.decorrelation, e.bins)?;
        let m_hat = samples.iter().map(|x| x.intensity()).sum::<f64>() / samples.len() as f64;
        let est = mu2_ergodic_route(&r, m_hat, &s, &e.sides, e.margin, c.mu)?
            .with_param("intensity", m_hat)
            .with_param("sample_box_side", side);
        compare("ergodic_integral", &est);
        routes.push(est.to_json());
    }
    if let Some(p) = &c.pairing {
        if p.n_list.is_empty() {
            return Err(CliError::Config("isotropic: pairing n_list is empty".into()));
        }
        let spec = GeneratorSpec::Matern {
            primary_intensity: c.primary_intensity,
            hardcore: c.hardcore,
            lambda: p.lambda,
            seeds: c.seeds.clone(),
        };
        let target = StudyTarget { strains: s.clone(), phi: None, mu: c.mu, order: 1 };
        let tables = convergence_study(&spec, &p.n_list, &target)?;
        let names: Vec<String> = strains.iter().map(|(n, _)| n.clone()).collect();
        write_tables(out, "isotropic_pairing", &names, &tables)?;
        let est = study_estimate(&tables, &p.n_list);
        compare("pairing", &est);
        routes.push(est.to_json());
    }
    let report = json!({
        "params": {
            "primary_intensity": c.primary_intensity,
            "hardcore": c.hardcore,
            "seeds": c.seeds,
            "mu": c.mu,
        },
        "routes": routes,
        "comparison": comparison,
    });
    write_json(out, "isotropic.json", &report)
}

/// Returns whether every selected criterion passed.
pub fn accept(cfg: &RunConfig, quick: bool, out: &Path) -> Result<bool, CliError> {
    let ids = match cfg.accept.as_ref().and_then(|a| a.criteria.clone()) {
        Some(v) if v.is_empty() => return Err(CliError::Config("accept: criteria list is empty".into())),
        Some(v) => v,
        None => CRITERIA.to_vec(),
    };
    let opts = AcceptanceOptions { quick };
    let mut rows = Vec::new();
    let mut all = true;
    for id in ids {
        let r = run_criterion(id, &opts)?;
        println!("{r}");
        all &= r.passed;
        let status = match (r.passed, quick) {
            (true, true) => "quick-pass",
            (true, false) => "pass",
            (false, _) => "fail",
        };
        let mut v = serde_json::to_value(&r).map_err(|e| CliError::Core(e.into()))?;
        v["status"] = json!(status);
        rows.push(v);
    }
    write_json(out, "accept.json", &json!({"quick": quick, "passed": all, "criteria": rows}))?;
    Ok(all)
}
