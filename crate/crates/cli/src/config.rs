//! Experiment configuration files.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use debranges_core::{EntireSolution, Potential, PotentialFn, RescalingFunction, Table, Tolerances};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{config_err, CliError, CliResult};

pub const SCHEMA: &str = "v1";

/// A real number given either as a JSON number or as an expression such as
/// `"pi"`, `"-pi/2"` or `"3*pi/4"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Real(x)),
            Raw::Text(s) => parse_real(&s).map(Real).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bytes = t.as_bytes();
    if let Some(i) = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'*' | b'/'))
    {
        let rhs = parse_real(&t[i + 1..])?;
        let lhs = parse_real(&t[..i])?;
        return Ok(if bytes[i] == b'+' { lhs + rhs } else { lhs - rhs });
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.as_str()),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let factor = |p: &str| -> Result<f64, String> {
        if p == "pi" {
            return Ok(PI);
        }
        if let Some(c) = p.strip_suffix("*pi").or_else(|| p.strip_suffix("pi")) {
            return c.parse::<f64>().map(|v| v * PI).map_err(|_| format!("cannot parse {s:?}"));
        }
        p.parse::<f64>().map_err(|_| format!("cannot parse {s:?}"))
    };
    let mut v = factor(num)?;
    if let Some(d) = den {
        let dv: f64 = d.parse().map_err(|_| format!("cannot parse {s:?}"))?;
        if dv == 0.0 {
            return Err(format!("division by zero in {s:?}"));
        }
        v /= dv;
    }
    Ok(sign * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Regular,
    Bessel,
}

/// Source of the potential `q`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum QSpec {
    #[default]
    Zero,
    Constant { value: f64 },
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude cos(frequency x + phase)`.
    Cosine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `coefficient x^exponent`.
    Power { coefficient: f64, exponent: f64 },
    /// Linear interpolation of `(x, q)` rows, inline or from a two-column CSV.
    Table {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        x: Vec<f64>,
        #[serde(default)]
        q: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub kind: Kind,
    #[serde(default)]
    pub l: f64,
    #[serde(default = "zero_real")]
    pub a: Real,
    pub b: Real,
    #[serde(default = "zero_real")]
    pub left_angle: Real,
    #[serde(default = "zero_real")]
    pub right_angle: Real,
    #[serde(default)]
    pub q: QSpec,
    /// Evaluates `q(x - shift)` instead of `q(x)`.
    #[serde(default = "zero_real")]
    pub shift: Real,
    /// Coefficients of a polynomial gauge `g`.
    #[serde(default)]
    pub gauge: Vec<f64>,
}

fn zero_real() -> Real {
    Real(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub rel: f64,
    pub abs: f64,
}

impl Default for TolSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        TolSpec { rel: t.rel, abs: t.abs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelGrid {
    Diagonal,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    /// Defaults to the right endpoint.
    #[serde(default)]
    pub c: Option<Real>,
    #[serde(default = "kernel_grid")]
    pub grid: KernelGrid,
    #[serde(default = "twenty")]
    pub points: usize,
    #[serde(default = "fifty")]
    pub radius: f64,
}

fn kernel_grid() -> KernelGrid {
    KernelGrid::Random
}

fn twenty() -> usize {
    20
}

fn fifty() -> f64 {
    50.0
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec { c: None, grid: kernel_grid(), points: 20, radius: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    pub operator: OperatorSpec,
    #[serde(default)]
    pub second_operator: Option<OperatorSpec>,
    #[serde(default = "lambda_max")]
    pub lambda_max: f64,
    #[serde(default)]
    pub tolerances: TolSpec,
    /// Measure used by `verify` instead of a freshly computed one.
    #[serde(default)]
    pub measure_file: Option<PathBuf>,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default = "ten")]
    pub probes: usize,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn lambda_max() -> f64 {
    400.0
}

fn ten() -> usize {
    10
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema != SCHEMA {
            return Err(config_err(format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(config_err("name must be a non-empty file stem"));
        }
        if !(self.tolerances.rel > 0.0 && self.tolerances.abs > 0.0) {
            return Err(config_err("tolerances must be positive"));
        }
        if !self.lambda_max.is_finite() {
            return Err(config_err("lambda_max must be finite"));
        }
        if self.probes == 0 {
            return Err(config_err("probes must be positive"));
        }
        if let Some(p) = &self.measure_file {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(config_err(format!("measure file {} does not exist", full.display())));
            }
        }
        for op in std::iter::once(&self.operator).chain(&self.second_operator) {
            if let QSpec::Table { path: Some(p), .. } = &op.q {
                let full = self.resolve(p);
                if !full.is_file() {
                    return Err(config_err(format!("potential table {} does not exist", full.display())));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rel: self.tolerances.rel, abs: self.tolerances.abs }
    }

    pub fn solution(&self, op: &OperatorSpec) -> CliResult<EntireSolution> {
        let q = self.potential_fn(&op.q)?;
        let q = if op.shift.0 != 0.0 { q.shifted(op.shift.0) } else { q };
        let sol = match op.kind {
            Kind::Regular => {
                let p = Potential::regular(op.a.0, op.b.0, q).map_err(config_err)?;
                EntireSolution::regular(p, op.left_angle.0).map_err(config_err)?
            }
            Kind::Bessel => {
                if op.a.0 != 0.0 {
                    return Err(config_err("a Bessel operator lives on (0, b)"));
                }
                let p = Potential::bessel(op.l, op.b.0, q).map_err(config_err)?;
                EntireSolution::bessel(p).map_err(config_err)?
            }
        };
        let sol = sol.with_tolerances(self.tolerances());
        if op.gauge.iter().any(|&c| c != 0.0) {
            let g = RescalingFunction::polynomial(op.gauge.clone()).map_err(config_err)?;
            Ok(sol.rescaled(g))
        } else {
            Ok(sol)
        }
    }

    fn potential_fn(&self, q: &QSpec) -> CliResult<PotentialFn> {
        Ok(match q {
            QSpec::Zero => PotentialFn::Zero,
            QSpec::Constant { value } => PotentialFn::Constant(*value),
            QSpec::Polynomial { coeffs } => PotentialFn::polynomial(coeffs),
            QSpec::Cosine { amplitude, frequency, phase } => {
                let (a, w, p) = (*amplitude, *frequency, *phase);
                PotentialFn::custom(move |x| a * (w * x + p).cos())
            }
            QSpec::Power { coefficient, exponent } => {
                let (c, e) = (*coefficient, *exponent);
                PotentialFn::custom(move |x| c * x.powf(e))
            }
            QSpec::Table { path, x, q } => {
                let (xs, ys) = match path {
                    Some(p) => read_table(&self.resolve(p))?,
                    None => (x.clone(), q.clone()),
                };
                PotentialFn::Tabulated(Table::new(xs, ys).map_err(config_err)?)
            }
        })
    }
}

fn read_table(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let cell = |j: usize| -> CliResult<f64> {
            rec.get(j)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| config_err(format!("{} row {}: expected two numbers", path.display(), i + 1)))
        };
        if i == 0 && rec.get(0).is_some_and(|s| s.parse::<f64>().is_err()) {
            continue;
        }
        xs.push(cell(0)?);
        ys.push(cell(1)?);
    }
    Ok((xs, ys))
}
