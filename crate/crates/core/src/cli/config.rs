//! Grids and the flat `key = value` sweep configuration.
//!
//! Recognised keys (unknown keys are rejected):
//!
//! ```text
//! dataset        synthetic | csv | mnist
//! path           csv file                              (csv)
//! label_column   label column name                     (csv, default "label")
//! features       comma-separated feature columns       (csv, default: all others)
//! label_map      e.g. s:1,b:-1                         (csv)
//! higgs_filter   true | false                          (csv, default false)
//! images         IDX image file                        (mnist)
//! labels         IDX label file                        (mnist)
//! digits         e.g. 7,9; first maps to +1            (mnist, default 7,9)
//! synthetic_dim  input dimension                       (synthetic, default 5)
//! synthetic_noise label noise                          (synthetic, default 0.1)
//! preprocess     none | maxabs | mnist                 (default none)
//! n              training samples
//! n_test         held-out samples (default 0: no test risk)
//! seed           u64 (default 0)
//! kernel         rbf | laplacian | l1exp
//! lengthscale    grid of ℓ/d multiples, e.g. -4:4:12:log2
//! ridge          grid, e.g. -6:0:12:log10
//! cv_folds       0 disables cross-validation (default 0)
//! loglik         true | false (default true)
//! alignment      true | false (default true)
//! out            output CSV path
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::KernelFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    /// Values `2^t` for `t` evenly spaced in `[start, stop]`.
    Log2,
    /// Values `10^t` for `t` evenly spaced in `[start, stop]`.
    Log10,
    /// Evenly spaced values in `[start, stop]`.
    Linear,
}

/// A one-dimensional grid written `start:stop:count:scale`. For the log
/// scales `start` and `stop` are exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                let t = if self.count == 1 {
                    self.start
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
                };
                match self.scale {
                    GridScale::Log2 => t.exp2(),
                    GridScale::Log10 => 10f64.powf(t),
                    GridScale::Linear => t,
                }
            })
            .collect()
    }

    /// Parses the grid and checks that every value is positive and finite.
    pub fn parse_positive(text: &str) -> Result<Self> {
        let g: Grid = text.parse()?;
        if let Some(v) = g.values().into_iter().find(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("grid '{text}' contains non-positive value {v}")));
        }
        Ok(g)
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("grid '{s}': {why} (expected start:stop:count:log2|log10|lin)"));
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let [start, stop, count, scale] = parts[..] else {
            return Err(bad("wrong number of fields"));
        };
        let start: f64 = start.parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = stop.parse().map_err(|_| bad("bad stop"))?;
        let count: usize = count.parse().map_err(|_| bad("bad count"))?;
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        let scale = match scale {
            "log2" => GridScale::Log2,
            "log10" => GridScale::Log10,
            "lin" | "linear" => GridScale::Linear,
            _ => return Err(bad("unknown scale")),
        };
        Ok(Grid {
            start,
            stop,
            count,
            scale,
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            GridScale::Log2 => "log2",
            GridScale::Log10 => "log10",
            GridScale::Linear => "lin",
        };
        write!(f, "{}:{}:{}:{}", self.start, self.stop, self.count, scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic {
        dim: usize,
        noise: f64,
    },
    Csv {
        path: PathBuf,
        label_column: String,
        features: Option<Vec<String>>,
        label_map: Option<String>,
        higgs_filter: bool,
    },
    Mnist {
        images: PathBuf,
        labels: PathBuf,
        digits: (u8, u8),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preprocess {
    None,
    MaxAbs,
    Mnist,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dataset: DatasetSource,
    pub preprocess: Preprocess,
    pub n: usize,
    pub n_test: usize,
    pub seed: u64,
    pub kernel: KernelFamily,
    /// Lengthscales as multiples of the input dimension.
    pub lengthscale: Grid,
    pub ridge: Grid,
    pub cv_folds: usize,
    pub loglik: bool,
    pub alignment: bool,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "dataset",
    "path",
    "label_column",
    "features",
    "label_map",
    "higgs_filter",
    "images",
    "labels",
    "digits",
    "synthetic_dim",
    "synthetic_noise",
    "preprocess",
    "n",
    "n_test",
    "seed",
    "kernel",
    "lengthscale",
    "ridge",
    "cv_folds",
    "loglik",
    "alignment",
    "out",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    fn parsed<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| Error::Config(format!("line {line}: bad value '{v}' for '{key}'"))),
        }
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some((line, v)) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::Config(format!("line {line}: '{key}' must be true or false"))),
            },
        }
    }
}

impl SweepConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // relative data and output paths are taken relative to the config file
        if let Some(dir) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            match &mut cfg.dataset {
                DatasetSource::Csv { path, .. } => fix(path),
                DatasetSource::Mnist { images, labels, .. } => {
                    fix(images);
                    fix(labels);
                }
                DatasetSource::Synthetic { .. } => {}
            }
            if let Some(out) = cfg.out.as_mut() {
                fix(out);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected key = value")))?;
            let k = k.trim().to_string();
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("line {line_no}: unknown key '{k}'")));
            }
            if map.insert(k.clone(), (line_no, v.trim().to_string())).is_some() {
                return Err(Error::Config(format!("line {line_no}: duplicate key '{k}'")));
            }
        }
        let mut e = Entries { map };

        let (_, kind) = e.required("dataset")?;
        let dataset = match kind.as_str() {
            "synthetic" => DatasetSource::Synthetic {
                dim: e.parsed("synthetic_dim", 5)?,
                noise: e.parsed("synthetic_noise", 0.1)?,
            },
            "csv" => DatasetSource::Csv {
                path: e.required("path")?.1.into(),
                label_column: e.take("label_column").map(|v| v.1).unwrap_or_else(|| "label".into()),
                features: e
                    .take("features")
                    .map(|(_, v)| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
                label_map: e.take("label_map").map(|v| v.1),
                higgs_filter: e.flag("higgs_filter", false)?,
            },
            "mnist" => {
                let digits = match e.take("digits") {
                    None => (7, 9),
                    Some((line, v)) => {
                        let parts: Vec<u8> = v
                            .split(',')
                            .map(|s| s.trim().parse())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| Error::Config(format!("line {line}: digits must be two integers")))?;
                        match parts[..] {
                            [a, b] if a != b && a <= 9 && b <= 9 => (a, b),
                            _ => return Err(Error::Config(format!("line {line}: digits must be two distinct digits"))),
                        }
                    }
                };
                DatasetSource::Mnist {
                    images: e.required("images")?.1.into(),
                    labels: e.required("labels")?.1.into(),
                    digits,
                }
            }
            other => return Err(Error::Config(format!("unknown dataset '{other}'"))),
        };
        if let DatasetSource::Synthetic { dim, noise } = dataset {
            if dim == 0 || !(noise >= 0.0 && noise.is_finite()) {
                return Err(Error::Config("synthetic_dim must be positive and synthetic_noise nonnegative".into()));
            }
        }

        let preprocess = match e.take("preprocess").map(|v| v.1).as_deref() {
            None | Some("none") => Preprocess::None,
            Some("maxabs") => Preprocess::MaxAbs,
            Some("mnist") => Preprocess::Mnist,
            Some(other) => return Err(Error::Config(format!("unknown preprocess '{other}'"))),
        };
        let (line, n) = e.required("n")?;
        let n: usize = n
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("line {line}: n must be a positive integer")))?;
        let n_test = e.parsed("n_test", 0usize)?;
        let seed = e.parsed("seed", 0u64)?;
        let (line, k) = e.required("kernel")?;
        let kernel: KernelFamily = k
            .parse()
            .map_err(|_| Error::Config(format!("line {line}: unknown kernel '{k}'")))?;
        let lengthscale = Grid::parse_positive(&e.required("lengthscale")?.1)?;
        let ridge = Grid::parse_positive(&e.required("ridge")?.1)?;
        let cv_folds = e.parsed("cv_folds", 0usize)?;
        if cv_folds == 1 || cv_folds > n {
            return Err(Error::Config(format!("cv_folds must be 0 or in [2, {n}]")));
        }
        let loglik = e.flag("loglik", true)?;
        let alignment = e.flag("alignment", true)?;
        let out = e.take("out").map(|v| PathBuf::from(v.1));

        if let Some((key, (line, _))) = e.map.into_iter().next() {
            return Err(Error::Config(format!("line {line}: key '{key}' does not apply to this dataset")));
        }
        Ok(SweepConfig {
            dataset,
            preprocess,
            n,
            n_test,
            seed,
            kernel,
            lengthscale,
            ridge,
            cv_folds,
            loglik,
            alignment,
            out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        let g: Grid = "-3:1:5:log10".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 5);
        assert!((v[0] - 1e-3).abs() < 1e-18 && (v[4] - 10.0).abs() < 1e-12);
        let g: Grid = "-1:1:3:log2".parse().unwrap();
        assert_eq!(g.values(), vec![0.5, 1.0, 2.0]);
        let g: Grid = "2:9:1:lin".parse().unwrap();
        assert_eq!(g.values(), vec![2.0]);
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }

    #[test]
    fn grid_errors() {
        for bad in ["1:2:3", "1:2:0:log2", "a:2:3:log2", "1:2:3:ln"] {
            assert!(matches!(bad.parse::<Grid>(), Err(Error::Config(_))), "{bad}");
        }
        assert!(Grid::parse_positive("-1:1:3:lin").is_err());
    }

    const MINIMAL: &str = "dataset = synthetic\nn = 10\nkernel = rbf\nlengthscale = 0:0:1:log2\nridge = -2:-2:1:log10\n";

    #[test]
    fn parses_minimal_config() {
        let c = SweepConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.n, 10);
        assert_eq!(c.kernel, KernelFamily::Rbf);
        assert_eq!(c.dataset, DatasetSource::Synthetic { dim: 5, noise: 0.1 });
        assert!(c.loglik && c.alignment);
        assert_eq!(c.cv_folds, 0);
    }

    #[test]
    fn config_errors() {
        assert!(SweepConfig::parse(&format!("{MINIMAL}bogus = 1\n")).is_err());
        assert!(SweepConfig::parse(&format!("{MINIMAL}n = 4\n")).is_err());
        assert!(SweepConfig::parse(&format!("{MINIMAL}path = x.csv\n")).is_err());
        assert!(SweepConfig::parse(&MINIMAL.replace("rbf", "cosine")).is_err());
        assert!(SweepConfig::parse(&format!("{MINIMAL}cv_folds = 1\n")).is_err());
        assert!(SweepConfig::parse("dataset = synthetic\n").is_err());
    }
}
