//! Flat `key = value` config files, flag merging, and the effective-config
//! echo that goes into every output header.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use purcell::{Error, Result};

/// 17-significant-digit float formatting, the fixed precision of every
/// numeric value in output files.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Resolves each setting as flag value > config-file value > default, and
/// records the effective value for the output header.
pub struct Resolver {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(path: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Config(format!(
                        "config line {} is not `key = value`: {line}",
                        lineno + 1
                    ))
                })?;
                file.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Resolver { file, echo: BTreeMap::new() })
    }

    fn lookup<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config value for {key} is invalid: {raw}"))),
        }
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let v = match flag {
            Some(v) => v,
            None => self.lookup::<f64>(key)?.unwrap_or(default),
        };
        self.echo.insert(key.into(), fmt_float(v));
        Ok(v)
    }

    pub fn opt_f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.lookup::<f64>(key)?,
        };
        if let Some(v) = v {
            self.echo.insert(key.into(), fmt_float(v));
        }
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        let v = match flag {
            Some(v) => v,
            None => self.lookup::<usize>(key)?.unwrap_or(default),
        };
        self.echo.insert(key.into(), v.to_string());
        Ok(v)
    }

    pub fn string(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<String> {
        let v = match flag {
            Some(v) => v,
            None => self.lookup::<String>(key)?.unwrap_or_else(|| default.to_string()),
        };
        self.echo.insert(key.into(), v.clone());
        Ok(v)
    }

    pub fn opt_string(&mut self, key: &str, flag: Option<String>) -> Result<Option<String>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.lookup::<String>(key)?,
        };
        if let Some(v) = &v {
            self.echo.insert(key.into(), v.clone());
        }
        Ok(v)
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.echo.insert(key.into(), value.into());
    }

    /// Effective merged configuration, sorted by key.
    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.echo
    }
}

/// Inclusive `start:stop:count` grid; a bare number is a one-point grid.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| {
                self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected start:stop:count or a single number, got {s}");
        match parts.as_slice() {
            [one] => {
                let v: f64 = one.parse().map_err(|_| bad())?;
                Ok(Grid { start: v, stop: v, count: 1 })
            }
            [start, stop, count] => {
                let start: f64 = start.parse().map_err(|_| bad())?;
                let stop: f64 = stop.parse().map_err(|_| bad())?;
                let count: usize = count.parse().map_err(|_| bad())?;
                if count == 0 {
                    return Err("grid count must be at least 1".into());
                }
                Ok(Grid { start, stop, count })
            }
            _ => Err(bad()),
        }
    }
}

/// A duration that may carry a `pi` suffix, e.g. `8pi` or `12.5`.
pub fn parse_window(s: &str) -> Result<f64> {
    let t = s.trim();
    let parse = |v: &str, scale: f64| -> Result<f64> {
        v.trim()
            .parse::<f64>()
            .map(|x| x * scale)
            .map_err(|_| Error::Config(format!("cannot parse window: {s}")))
    };
    let v = if let Some(prefix) = t.strip_suffix("pi") {
        if prefix.is_empty() {
            std::f64::consts::PI
        } else {
            parse(prefix, std::f64::consts::PI)?
        }
    } else {
        parse(t, 1.0)?
    };
    if v <= 0.0 {
        return Err(Error::Config("window must be positive".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses_and_is_inclusive() {
        let g: Grid = "300:900:61".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 61);
        assert_eq!(pts[0], 300.0);
        assert_eq!(pts[60], 900.0);
        let single: Grid = "370".parse().unwrap();
        assert_eq!(single.points(), vec![370.0]);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("1:2:0".parse::<Grid>().is_err());
    }

    #[test]
    fn window_accepts_pi_suffix() {
        assert!((parse_window("8pi").unwrap() - 8.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!((parse_window("2.5").unwrap() - 2.5).abs() < 1e-15);
        assert!(parse_window("-1").is_err());
        assert!(parse_window("abc").is_err());
    }

    #[test]
    fn flags_win_over_config_values() {
        let dir = std::env::temp_dir().join(format!("purcell-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "g = 2.0\nkappa = 0.5\n# comment\n").unwrap();
        let mut r = Resolver::new(Some(&path)).unwrap();
        assert_eq!(r.f64("g", Some(3.0), 1.0).unwrap(), 3.0);
        assert_eq!(r.f64("kappa", None, 1.0).unwrap(), 0.5);
        assert_eq!(r.f64("gamma", None, 1.0).unwrap(), 1.0);
        assert_eq!(r.echo().get("g").unwrap(), &fmt_float(3.0));
        std::fs::remove_dir_all(&dir).ok();
    }
}
