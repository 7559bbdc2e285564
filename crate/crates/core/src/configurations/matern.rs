use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::torus_distance;
use crate::error::{Error, Result};
use crate::tensor::Vec3;

/// One realization of a Matérn type-II process on the periodic box `[0, box_side)³`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaternSample {
    pub points: Vec<Vec3<f64>>,
    pub box_side: f64,
    pub hardcore: f64,
    pub primary_intensity: f64,
}

impl MaternSample {
    pub fn intensity(&self) -> f64 {
        self.points.len() as f64 / self.box_side.powi(3)
    }

    /// Intensity of the thinned process, `(1 - e^{-λv})/v` with `v = (4π/3)h³`.
    pub fn expected_intensity(primary_intensity: f64, hardcore: f64) -> f64 {
        let v = 4.0 * std::f64::consts::PI / 3.0 * hardcore.powi(3);
        if v == 0.0 {
            primary_intensity
        } else {
            (1.0 - (-primary_intensity * v).exp()) / v
        }
    }
}

/// Poisson process of the given intensity, thinned so that a point survives only if no
/// older point (smaller birth mark) lies within `hardcore` in the torus metric.
pub fn gen_matern2(primary_intensity: f64, hardcore: f64, box_side: f64, seed: u64) -> Result<MaternSample> {
    if !(primary_intensity >= 0.0) || !(hardcore >= 0.0) || !(box_side > 0.0) {
        return Err(Error::Config("Matérn parameters must be non-negative with positive box".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = primary_intensity * box_side.powi(3);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Config(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut pts = Vec::with_capacity(count);
    let mut marks = Vec::with_capacity(count);
    for _ in 0..count {
        pts.push([
            rng.gen::<f64>() * box_side,
            rng.gen::<f64>() * box_side,
            rng.gen::<f64>() * box_side,
        ]);
        marks.push(rng.gen::<f64>());
    }
    if hardcore == 0.0 {
        return Ok(MaternSample { points: pts, box_side, hardcore, primary_intensity });
    }
    let keep = survivors(&pts, &marks, hardcore, box_side);
    let points = pts
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    Ok(MaternSample { points, box_side, hardcore, primary_intensity })
}

fn survivors(pts: &[Vec3<f64>], marks: &[f64], h: f64, side: f64) -> Vec<bool> {
    let mut keep = vec![true; pts.len()];
    for_each_close_pair(pts, h, side, |i, j, d| {
        if d < h {
            if marks[i] < marks[j] {
                keep[j] = false;
            } else {
                keep[i] = false;
            }
        }
    });
    keep
}

/// Calls `f(i, j, d)` once for every unordered pair at torus distance `d < radius`.
pub(crate) fn for_each_close_pair<F: FnMut(usize, usize, f64)>(
    pts: &[Vec3<f64>],
    radius: f64,
    side: f64,
    mut f: F,
) {
    let nc = (side / radius).floor() as usize;
    if nc < 3 {
        for i in 0..pts.len() {
            for j in 0..i {
                let d = torus_distance(&pts[i], &pts[j], side);
                if d < radius {
                    f(j, i, d);
                }
            }
        }
        return;
    }
    let w = side / nc as f64;
    let cell = |p: &Vec3<f64>| p.map(|v| ((v / w) as usize).min(nc - 1));
    let mut heads: Vec<Vec<usize>> = vec![Vec::new(); nc * nc * nc];
    let flat = |c: [usize; 3]| (c[0] * nc + c[1]) * nc + c[2];
    for (k, p) in pts.iter().enumerate() {
        heads[flat(cell(p))].push(k);
    }
    for (i, p) in pts.iter().enumerate() {
        let c = cell(p);
        for da in 0..3 {
            for db in 0..3 {
                for dc in 0..3 {
                    let q = [
                        (c[0] + nc + da - 1) % nc,
                        (c[1] + nc + db - 1) % nc,
                        (c[2] + nc + dc - 1) % nc,
                    ];
                    for &j in &heads[flat(q)] {
                        if j > i {
                            let d = torus_distance(p, &pts[j], side);
                            if d < radius {
                                f(i, j, d);
                            }
                        }
                    }
                }
            }
        }
    }
}
