//! Particle configurations: periodic patterns, Matérn II samples, rescaling into the
//! domain, and the checks on equidistribution and hardcore separation.

mod io;
mod matern;
mod pair_correlation;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{vec3, Vec3};

pub use io::{io_read, io_write, read_points, write_points};
pub use matern::{gen_matern2, MaternSample};
pub use pair_correlation::{estimate_pair_correlation, RadialPairCorrelation};

/// Unit-volume domain 𝒪.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `(-1/2, 1/2)³`.
    #[serde(alias = "cube")]
    UnitCube,
    /// Ball of volume one centred at the origin.
    #[serde(alias = "ball")]
    UnitBall,
}

impl Domain {
    pub fn id(&self) -> &'static str {
        match self {
            Domain::UnitCube => "cube",
            Domain::UnitBall => "ball",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        match s {
            "cube" => Ok(Domain::UnitCube),
            "ball" => Ok(Domain::UnitBall),
            _ => Err(Error::Config(format!("unknown domain {s:?}"))),
        }
    }

    pub fn ball_radius() -> f64 {
        (3.0 / (4.0 * PI)).cbrt()
    }

    pub fn contains(&self, x: &Vec3<f64>) -> bool {
        match self {
            Domain::UnitCube => x.iter().all(|v| *v > -0.5 && *v < 0.5),
            Domain::UnitBall => vec3::norm(x) < Self::ball_radius(),
        }
    }

    /// Half side of the smallest centred box containing the domain.
    pub fn half_extent(&self) -> f64 {
        match self {
            Domain::UnitCube => 0.5,
            Domain::UnitBall => Self::ball_radius(),
        }
    }

    /// Distance from `y` (inside) to the boundary along the unit direction `n`.
    pub fn exit_distance(&self, y: &Vec3<f64>, n: &Vec3<f64>) -> f64 {
        match self {
            Domain::UnitCube => {
                let mut t = f64::INFINITY;
                for i in 0..3 {
                    if n[i] > 0.0 {
                        t = t.min((0.5 - y[i]) / n[i]);
                    } else if n[i] < 0.0 {
                        t = t.min((-0.5 - y[i]) / n[i]);
                    }
                }
                t
            }
            Domain::UnitBall => {
                let r = Self::ball_radius();
                let b = vec3::dot(y, n);
                let c = vec3::dot(y, y) - r * r;
                -b + (b * b - c).max(0.0).sqrt()
            }
        }
    }
}

/// `n` points in 𝒪 with volume fraction λ = (4π/3) n r_n³ and hardcore constant c.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleConfig {
    pub points: Vec<Vec3<f64>>,
    pub domain: Domain,
    pub lambda: f64,
    pub r_n: f64,
    pub hardcore_c: f64,
}

impl ParticleConfig {
    pub fn new(points: Vec<Vec3<f64>>, domain: Domain, lambda: f64, hardcore_c: f64) -> Result<Self> {
        let mut c = Self {
            points,
            domain,
            lambda: 0.0,
            r_n: 0.0,
            hardcore_c,
        };
        if let Some(p) = c.points.iter().find(|p| !domain.contains(p)) {
            return Err(Error::Domain(format!("point {p:?} outside the domain")));
        }
        c.set_lambda(lambda);
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Sets λ and the matching radius `r_n = (3λ/(4πn))^{1/3}`.
    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda;
        let n = self.points.len().max(1) as f64;
        self.r_n = (3.0 * lambda / (4.0 * PI * n)).cbrt();
    }

    /// `min|x_i - x_j| ≥ c n^{-1/3}`.
    pub fn check_hardcore(&self) -> Result<f64> {
        let d = min_distance(self);
        let bound = self.hardcore_c * (self.n() as f64).powf(-1.0 / 3.0);
        if self.n() > 1 && d < bound * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "minimum distance {d} below the hardcore bound {bound}"
            )));
        }
        Ok(d)
    }
}

/// `m` points in the unit torus `[0,1)³`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPattern {
    pub cell_points: Vec<Vec3<f64>>,
    pub hardcore_c: f64,
}

impl PeriodicPattern {
    /// Checks the torus hardcore condition `|z - z'| > c m^{-1/3}`.
    pub fn new(cell_points: Vec<Vec3<f64>>, hardcore_c: f64) -> Result<Self> {
        if cell_points.is_empty() {
            return Err(Error::Domain("empty pattern".into()));
        }
        let cell_points: Vec<Vec3<f64>> = cell_points
            .into_iter()
            .map(|p| p.map(|v| v - v.floor()))
            .collect();
        let pat = Self { cell_points, hardcore_c };
        let d = pat.min_torus_distance();
        let bound = hardcore_c * (pat.m() as f64).powf(-1.0 / 3.0);
        if pat.m() > 1 && d <= bound {
            return Err(Error::Domain(format!(
                "torus distance {d} violates the hardcore bound {bound}"
            )));
        }
        Ok(pat)
    }

    /// The simple cubic pattern: one point per cell, at the cell centre.
    pub fn simple_cubic() -> Self {
        Self { cell_points: vec![[0.5; 3]], hardcore_c: 1.0 }
    }

    pub fn m(&self) -> usize {
        self.cell_points.len()
    }

    pub fn min_torus_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.m() {
            for j in 0..i {
                d = d.min(torus_distance(&self.cell_points[i], &self.cell_points[j], 1.0));
            }
        }
        // distance to its own images
        d.min(1.0)
    }

    pub fn translate(&self, tau: &Vec3<f64>) -> Self {
        Self {
            cell_points: self
                .cell_points
                .iter()
                .map(|p| [0, 1, 2].map(|i| (p[i] + tau[i]) - (p[i] + tau[i]).floor()))
                .collect(),
            hardcore_c: self.hardcore_c,
        }
    }
}

pub fn torus_delta(a: &Vec3<f64>, b: &Vec3<f64>, side: f64) -> Vec3<f64> {
    [0, 1, 2].map(|i| {
        let d = a[i] - b[i];
        d - side * (d / side).round()
    })
}

pub fn torus_distance(a: &Vec3<f64>, b: &Vec3<f64>, side: f64) -> f64 {
    vec3::norm(&torus_delta(a, b, side))
}

/// Seeded random sequential placement under the torus hardcore constraint.
pub fn gen_periodic_pattern(m: usize, c: f64, seed: u64) -> Result<PeriodicPattern> {
    gen_periodic_pattern_with(m, c, seed, 100_000)
}

pub fn gen_periodic_pattern_with(
    m: usize,
    c: f64,
    seed: u64,
    max_rejections: usize,
) -> Result<PeriodicPattern> {
    if m == 0 {
        return Err(Error::Config("pattern needs m ≥ 1".into()));
    }
    let dmin = c * (m as f64).powf(-1.0 / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Vec3<f64>> = Vec::with_capacity(m);
    let mut rejections = 0usize;
    while pts.len() < m {
        let p = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        if pts.iter().all(|q| torus_distance(&p, q, 1.0) > dmin) {
            pts.push(p);
        } else {
            rejections += 1;
            if rejections > max_rejections {
                return Err(Error::Infeasible(format!(
                    "placed {} of {m} points with c = {c} after {max_rejections} rejections",
                    pts.len()
                )));
            }
        }
    }
    PeriodicPattern::new(pts, c)
}

/// `εω ∩ 𝒪` for the periodic point set `ω = pattern + period·Z³`.
pub fn scale_points_to_domain(
    cell_points: &[Vec3<f64>],
    period: f64,
    epsilon: f64,
    domain: Domain,
    lambda: f64,
    hardcore_c: f64,
) -> Result<ParticleConfig> {
    if !(epsilon > 0.0) || !(period > 0.0) {
        return Err(Error::Domain("epsilon and period must be positive".into()));
    }
    let h = domain.half_extent();
    // the cube is anchored at its corner so that ε = 1/k on the unit cell gives k³ points
    let o = match domain {
        Domain::UnitCube => 0.5,
        Domain::UnitBall => 0.0,
    };
    let cell = epsilon * period;
    let lo = ((o - h) / cell).floor() as i64 - 1;
    let hi = ((o + h) / cell).ceil() as i64 + 1;
    let mut pts = Vec::new();
    for a in lo..=hi {
        for b in lo..=hi {
            for c in lo..=hi {
                for z in cell_points {
                    let x = [
                        epsilon * (z[0] + period * a as f64) - o,
                        epsilon * (z[1] + period * b as f64) - o,
                        epsilon * (z[2] + period * c as f64) - o,
                    ];
                    if domain.contains(&x) {
                        pts.push(x);
                    }
                }
            }
        }
    }
    ParticleConfig::new(pts, domain, lambda, hardcore_c)
}

/// Rescales a periodic pattern into 𝒪.
pub fn scale_to_domain(
    pattern: &PeriodicPattern,
    epsilon: f64,
    domain: Domain,
    lambda: f64,
) -> Result<ParticleConfig> {
    scale_points_to_domain(&pattern.cell_points, 1.0, epsilon, domain, lambda, pattern.hardcore_c)
}

/// Lattice pattern `(i + 1/2)/k - 1/2` filling the unit cube with `k³` points.
pub fn cubic_lattice(k: usize, lambda: f64) -> ParticleConfig {
    let mut pts = Vec::with_capacity(k * k * k);
    let h = 1.0 / k as f64;
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                pts.push([
                    (i as f64 + 0.5) * h - 0.5,
                    (j as f64 + 0.5) * h - 0.5,
                    (l as f64 + 0.5) * h - 0.5,
                ]);
            }
        }
    }
    ParticleConfig::new(pts, Domain::UnitCube, lambda, 1.0).expect("interior lattice")
}

/// Histogram L¹ discrepancy between `ρ_n` and a density on `bins³` cells of the bounding box.
pub fn validate_a0<F: Fn(&Vec3<f64>) -> f64>(config: &ParticleConfig, rho: F, bins: usize) -> f64 {
    let h = config.domain.half_extent();
    let w = 2.0 * h / bins as f64;
    let mut counts = vec![0.0; bins * bins * bins];
    let n = config.n().max(1) as f64;
    let idx = |v: f64| (((v + h) / w).floor() as isize).clamp(0, bins as isize - 1) as usize;
    for p in &config.points {
        counts[(idx(p[0]) * bins + idx(p[1])) * bins + idx(p[2])] += 1.0 / n;
    }
    let (gx, gw) = crate::quadrature::gauss_legendre_on(4, 0.0, w);
    let mut disc = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            for c in 0..bins {
                let o = [-h + a as f64 * w, -h + b as f64 * w, -h + c as f64 * w];
                let mut mass = 0.0;
                for (x, wx) in gx.iter().zip(&gw) {
                    for (y, wy) in gx.iter().zip(&gw) {
                        for (z, wz) in gx.iter().zip(&gw) {
                            mass += wx * wy * wz * rho(&[o[0] + x, o[1] + y, o[2] + z]);
                        }
                    }
                }
                disc += (counts[(a * bins + b) * bins + c] - mass).abs();
            }
        }
    }
    disc
}

/// Indicator density of the domain.
pub fn indicator(domain: Domain) -> impl Fn(&Vec3<f64>) -> f64 {
    move |x| if domain.contains(x) { 1.0 } else { 0.0 }
}

/// Minimum pairwise distance by a cell list with adaptive cell size.
pub fn min_distance(config: &ParticleConfig) -> f64 {
    min_distance_points(&config.points)
}

pub fn min_distance_points(points: &[Vec3<f64>]) -> f64 {
    let n = points.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let vol = (0..3).map(|i| (hi[i] - lo[i]).max(1e-300)).product::<f64>();
    let mut cell = (vol / n as f64).cbrt().max(1e-300);
    loop {
        let d = cell_list_min(points, &lo, &hi, cell);
        if d <= cell {
            return d;
        }
        cell *= 2.0;
    }
}

fn cell_list_min(points: &[Vec3<f64>], lo: &Vec3<f64>, hi: &Vec3<f64>, cell: f64) -> f64 {
    let dims: Vec<usize> = (0..3)
        .map(|i| (((hi[i] - lo[i]) / cell).floor() as usize + 1).min(1 << 10))
        .collect();
    let cell_of = |p: &Vec3<f64>| -> [usize; 3] {
        [0, 1, 2].map(|i| (((p[i] - lo[i]) / cell) as usize).min(dims[i] - 1))
    };
    let mut map: std::collections::HashMap<[usize; 3], Vec<usize>> = std::collections::HashMap::new();
    for (k, p) in points.iter().enumerate() {
        map.entry(cell_of(p)).or_default().push(k);
    }
    let mut best = f64::INFINITY;
    for (k, p) in points.iter().enumerate() {
        let c = cell_of(p);
        for da in -1i64..=1 {
            for db in -1i64..=1 {
                for dc in -1i64..=1 {
                    let q = [c[0] as i64 + da, c[1] as i64 + db, c[2] as i64 + dc];
                    if q.iter().any(|v| *v < 0) {
                        continue;
                    }
                    let key = [q[0] as usize, q[1] as usize, q[2] as usize];
                    if let Some(v) = map.get(&key) {
                        for &j in v {
                            if j > k {
                                best = best.min(vec3::norm(&vec3::sub(p, &points[j])));
                            }
                        }
                    }
                }
            }
        }
    }
    best
}

/// Brute-force minimum distance, for cross-checking.
pub fn min_distance_brute(points: &[Vec3<f64>]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            d = d.min(vec3::norm(&vec3::sub(&points[i], &points[j])));
        }
    }
    d
}
