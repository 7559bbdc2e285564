//! Point files: a header line `# visco2 points v1 n=.. lambda=.. c=.. domain=..`, then
//! one `x y z` line per point with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::{Domain, ParticleConfig};
use crate::error::{Error, Result};

pub fn write_points(config: &ParticleConfig) -> String {
    let mut s = String::with_capacity(64 * (config.n() + 1));
    let _ = writeln!(
        s,
        "# visco2 points v1 n={} lambda={} c={} domain={}",
        config.n(),
        config.lambda,
        config.hardcore_c,
        config.domain.id()
    );
    for p in &config.points {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    s
}

pub fn read_points(text: &str) -> Result<ParticleConfig> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let rest = header
        .strip_prefix("# visco2 points v1")
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing visco2 points v1 header".into() })?;
    let mut n = None;
    let mut lambda = None;
    let mut c = None;
    let mut domain = None;
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("bad header field {tok:?}") })?;
        let bad = |e: String| Error::Parse { line: 1, msg: format!("{k}: {e}") };
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "lambda" => lambda = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "c" => c = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "domain" => domain = Some(Domain::from_id(v).map_err(|e| bad(e.to_string()))?),
            _ => return Err(bad("unknown field".into())),
        }
    }
    let missing = |f: &str| Error::Parse { line: 1, msg: format!("header lacks {f}") };
    let n = n.ok_or_else(|| missing("n"))?;
    let lambda = lambda.ok_or_else(|| missing("lambda"))?;
    let c = c.ok_or_else(|| missing("c"))?;
    let domain = domain.ok_or_else(|| missing("domain"))?;
    let mut pts = Vec::with_capacity(n);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 3 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected 3 coordinates, got {}", vals.len()) });
        }
        let mut p = [0.0; 3];
        for (k, v) in vals.iter().enumerate() {
            p[k] = v
                .parse::<f64>()
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("{v:?}: {e}") })?;
            if !p[k].is_finite() {
                return Err(Error::Parse { line: i + 1, msg: "non-finite coordinate".into() });
            }
        }
        if !domain.contains(&p) {
            return Err(Error::Parse { line: i + 1, msg: "point outside the domain".into() });
        }
        pts.push(p);
    }
    if pts.len() != n {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("header announces {n} points, found {}", pts.len()),
        });
    }
    ParticleConfig::new(pts, domain, lambda, c)
}

pub fn io_write(path: &Path, config: &ParticleConfig) -> Result<()> {
    std::fs::write(path, write_points(config))?;
    Ok(())
}

pub fn io_read(path: &Path) -> Result<ParticleConfig> {
    read_points(&std::fs::read_to_string(path)?)
}
