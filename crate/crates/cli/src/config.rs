//! Run configuration: a JSON document, optionally overridden by flags.

use serde::{Deserialize, Serialize};

use padic_frames::affine::AffineElement;
use padic_frames::{Coefficient, PrimeContext, TestFunction, WaveletIndex, WaveletRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub prime: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub function: Vec<WaveletRecord>,
    /// Genericity enumeration depth; derived from the stabilizer when absent.
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default = "default_gamma_min")]
    pub gamma_min: i64,
    #[serde(default = "default_gamma_max")]
    pub gamma_max: i64,
    /// Orbit and MRA translations have denominators dividing `p^n_depth`.
    #[serde(default = "default_n_depth")]
    pub n_depth: i64,
    #[serde(default)]
    pub random_g: usize,
    #[serde(default)]
    pub seed: u64,
    /// Explicit test functions `g` for frame checks.
    #[serde(default)]
    pub g: Vec<Vec<WaveletRecord>>,
    /// Explicit group elements for orbit and oracle commands.
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    #[serde(default = "default_truncation")]
    pub truncation: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub a: String,
    pub b: String,
}

fn default_mode() -> Mode {
    Mode::Exact
}

fn default_gamma_min() -> i64 {
    -3
}

fn default_gamma_max() -> i64 {
    3
}

fn default_n_depth() -> i64 {
    3
}

fn default_truncation() -> i64 {
    1
}

/// A configuration problem, reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| {
        ConfigError(format!("config line {} column {}: {}", e.line(), e.column(), strip_position(&e.to_string())))
    })
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

impl RunConfig {
    pub fn context(&self) -> Result<PrimeContext, ConfigError> {
        PrimeContext::new(self.prime).map_err(|e| ConfigError(format!("prime: {e}")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let ctx = self.context()?;
        if self.function.is_empty() {
            return Err(ConfigError("function: at least one wavelet term is required".into()));
        }
        if self.gamma_min > self.gamma_max {
            return Err(ConfigError(format!(
                "gamma_min: {} exceeds gamma_max {}",
                self.gamma_min, self.gamma_max
            )));
        }
        if self.n_depth < 0 {
            return Err(ConfigError(format!("n_depth: {} must be nonnegative", self.n_depth)));
        }
        if self.truncation < 0 {
            return Err(ConfigError(format!("truncation: {} must be nonnegative", self.truncation)));
        }
        check_terms(ctx, "function", &self.function)?;
        for (i, g) in self.g.iter().enumerate() {
            check_terms(ctx, &format!("g[{i}]"), g)?;
        }
        for (i, e) in self.elements.iter().enumerate() {
            element(ctx, e).map_err(|msg| ConfigError(format!("elements[{i}].{msg}")))?;
        }
        Ok(())
    }
}

fn check_terms(ctx: PrimeContext, path: &str, records: &[WaveletRecord]) -> Result<(), ConfigError> {
    for (i, r) in records.iter().enumerate() {
        let at = |field: &str, msg: String| ConfigError(format!("{path}[{i}].{field}: {msg}"));
        let n = ctx.parse(&r.n).map_err(|e| at("n", e.to_string()))?;
        if r.j == 0 || r.j >= ctx.p() {
            return Err(at("j", format!("{} is outside 1..{}", r.j, ctx.p() - 1)));
        }
        WaveletIndex::new(r.gamma, &n, r.j).map_err(|e| at("n", e.to_string()))?;
    }
    Ok(())
}

pub fn element(ctx: PrimeContext, e: &ElementSpec) -> Result<AffineElement, String> {
    let a = ctx.parse(&e.a).map_err(|err| format!("a: {err}"))?;
    let b = ctx.parse(&e.b).map_err(|err| format!("b: {err}"))?;
    AffineElement::new(a, b).map_err(|err| format!("a: {err}"))
}

pub fn function<C: Coefficient>(
    ctx: PrimeContext,
    path: &str,
    records: &[WaveletRecord],
) -> Result<TestFunction<C>, ConfigError> {
    let mut f = TestFunction::new(ctx);
    for (i, r) in records.iter().enumerate() {
        let n = ctx.parse(&r.n).map_err(|e| ConfigError(format!("{path}[{i}].n: {e}")))?;
        let idx = WaveletIndex::new(r.gamma, &n, r.j).map_err(|e| ConfigError(format!("{path}[{i}].n: {e}")))?;
        let c = C::from_literal(&r.coeff, ctx).map_err(|e| ConfigError(format!("{path}[{i}].coeff: {e}")))?;
        f.add_term(idx, c);
    }
    if f.is_empty() {
        return Err(ConfigError(format!("{path}: all coefficients cancel")));
    }
    Ok(f)
}
