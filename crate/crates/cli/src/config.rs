//! Run configuration: one JSON document per invocation.

use std::path::Path;

use serde::Deserialize;
use visco2::configurations::{gen_periodic_pattern_with, Domain, PeriodicPattern};
use visco2::meanfield::{GeneratorSpec, SmoothScalar};
use visco2::{Basis5, Sym3};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; all cores when absent.
    pub threads: Option<usize>,
    pub gen: Option<GenConfig>,
    pub pairing: Option<PairingConfig>,
    pub corrector: Option<CorrectorConfig>,
    pub lattice: Option<LatticeConfig>,
    pub isotropic: Option<IsotropicConfig>,
    pub accept: Option<AcceptConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn section<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        v.as_ref().ok_or_else(|| CliError::Config(format!("config has no \"{name}\" section")))
    }
}

/// `"E1"` .. `"E5"`, or coordinates in the canonical basis.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StrainSpec {
    Name(String),
    Coords([f64; 5]),
}

impl StrainSpec {
    pub fn resolve(&self) -> Result<(String, Sym3), CliError> {
        match self {
            StrainSpec::Name(n) => {
                let k: usize = n
                    .strip_prefix('E')
                    .and_then(|d| d.parse().ok())
                    .filter(|k| (1..=5).contains(k))
                    .ok_or_else(|| CliError::Config(format!("unknown strain {n:?}; use E1..E5")))?;
                Ok((n.clone(), Basis5::canonical().e[k - 1]))
            }
            StrainSpec::Coords(c) => {
                let s = Sym3::embed(c);
                if s.norm() == 0.0 {
                    return Err(CliError::Config("zero strain".into()));
                }
                let name = c.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join("_");
                Ok((format!("S_{name}"), s))
            }
        }
    }
}

pub fn resolve_strains(list: &[StrainSpec]) -> Result<Vec<(String, Sym3)>, CliError> {
    if list.is_empty() {
        return Err(CliError::Config("empty strain list".into()));
    }
    list.iter().map(StrainSpec::resolve).collect()
}

fn default_strains() -> Vec<StrainSpec> {
    vec![StrainSpec::Name("E1".into()), StrainSpec::Name("E3".into())]
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatternSpec {
    SimpleCubic,
    Random {
        m: usize,
        c: f64,
        seed: u64,
        #[serde(default = "default_rejections")]
        max_rejections: usize,
    },
    Explicit { cell_points: Vec<[f64; 3]>, hardcore_c: f64 },
}

fn default_rejections() -> usize {
    100_000
}

impl PatternSpec {
    pub fn build(&self) -> visco2::Result<PeriodicPattern> {
        match self {
            PatternSpec::SimpleCubic => Ok(PeriodicPattern::simple_cubic()),
            PatternSpec::Random { m, c, seed, max_rejections } => gen_periodic_pattern_with(*m, *c, *seed, *max_rejections),
            PatternSpec::Explicit { cell_points, hardcore_c } => PeriodicPattern::new(cell_points.clone(), *hardcore_c),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GenConfig {
    /// `k³` cell-centred points in the unit cube.
    Lattice { k: usize, lambda: f64 },
    /// Periodic pattern rescaled by `epsilon` into the domain.
    Periodic { pattern: PatternSpec, epsilon: f64, domain: Domain, lambda: f64 },
    /// One file per seed of a Matérn II process with about `n` points, mapped into the cube.
    Matern { primary_intensity: f64, hardcore: f64, n: usize, seeds: Vec<u64>, lambda: f64 },
}

/// Configuration sequence for a convergence study; `n` comes from `n_list`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Lattice { lambda: f64 },
    Periodic { pattern: PatternSpec, domain: Domain, lambda: f64 },
    Matern { primary_intensity: f64, hardcore: f64, lambda: f64, seeds: Vec<u64> },
}

impl GeneratorConfig {
    pub fn build(&self) -> visco2::Result<GeneratorSpec> {
        Ok(match self {
            GeneratorConfig::Lattice { lambda } => GeneratorSpec::Lattice { lambda: *lambda },
            GeneratorConfig::Periodic { pattern, domain, lambda } => {
                GeneratorSpec::Periodic { pattern: pattern.build()?, domain: *domain, lambda: *lambda }
            }
            GeneratorConfig::Matern { primary_intensity, hardcore, lambda, seeds } => GeneratorSpec::Matern {
                primary_intensity: *primary_intensity,
                hardcore: *hardcore,
                lambda: *lambda,
                seeds: seeds.clone(),
            },
        })
    }
}

/// `φ` for `F = φ ⊗ φ`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Constant { value: f64 },
    Affine { a: f64, b: [f64; 3] },
}

impl PhiSpec {
    pub fn build(&self) -> SmoothScalar {
        match self {
            PhiSpec::Constant { value } => SmoothScalar::constant(*value),
            PhiSpec::Affine { a, b } => SmoothScalar::affine(*a, *b),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingConfig {
    /// Study over generated configurations...
    pub generator: Option<GeneratorConfig>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// ...or a single configuration read from a point file.
    pub points: Option<String>,
    #[serde(default = "default_strains")]
    pub strains: Vec<StrainSpec>,
    pub phi: Option<PhiSpec>,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one_usize")]
    pub order: usize,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectorConfig {
    pub pattern: PatternSpec,
    pub eta_bar: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_strains")]
    pub strains: Vec<StrainSpec>,
    #[serde(default)]
    pub discretization: Option<visco2::corrector::SourceDiscretization>,
    /// Extra `η̄` values evaluated at the same grid for a sweep table.
    #[serde(default)]
    pub eta_sweep: Vec<f64>,
    /// Write the corrector of the first strain as `.bin` + `.json`.
    #[serde(default)]
    pub export_field: bool,
    #[serde(default = "one")]
    pub mu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub pattern: PatternSpec,
    /// Full tensor when absent.
    pub strains: Option<Vec<StrainSpec>>,
    #[serde(default = "one")]
    pub mu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicConfig {
    pub primary_intensity: f64,
    pub hardcore: f64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_strains")]
    pub strains: Vec<StrainSpec>,
    #[serde(default = "one")]
    pub mu: f64,
    pub ergodic: Option<ErgodicSection>,
    pub pairing: Option<IsoPairingSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicSection {
    /// Points per sample used to estimate the pair correlation.
    pub n: usize,
    pub decorrelation: f64,
    pub bins: usize,
    pub sides: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoPairingSection {
    pub n_list: Vec<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    0.01
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptConfig {
    /// Subset of criteria; all when absent.
    pub criteria: Option<Vec<u8>>,
}
