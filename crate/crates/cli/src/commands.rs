use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use padic_frames::affine::{
    act_on_function, complete_genericity_depth, default_genericity_depth, genericity_check, minimum_genericity_depth,
    stabilizer_spec, AffineElement, StabilizerSpec,
};
use padic_frames::frame::{
    frame_bound, frame_report, orbit_element, orbit_index_in, orbit_index_of, OrbitConvention, OrbitIndex,
};
use padic_frames::mra::mra_report;
use padic_frames::sampling::{random_affine, random_function, RandomGrid};
use padic_frames::{Coefficient, Error, PrimeContext, SampledFunction, TestFunction};

use crate::config::{self, ConfigError, RunConfig};

const ORACLE_TOLERANCE: f64 = 1e-9;
const ORACLE_MAX_POINTS: usize = 1 << 18;
const DEFAULT_ORACLE_ELEMENTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Stabilizer,
    Genericity,
    Orbit,
    FrameBound,
    FrameCheck,
    OracleCheck,
    MraDemo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Stabilizer => "stabilizer",
            Command::Genericity => "genericity",
            Command::Orbit => "orbit",
            Command::FrameBound => "frame-bound",
            Command::FrameCheck => "frame-check",
            Command::OracleCheck => "oracle-check",
            Command::MraDemo => "mra-demo",
        }
    }
}

/// Why a run did not produce a passing report.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Analysis(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e.to_string())
    }
}

/// A finished report and whether every check in it passed.
pub struct Report {
    pub body: Value,
    pub passed: bool,
}

pub fn run<C: Coefficient>(cfg: &RunConfig, command: Command) -> Result<Report, Failure> {
    let ctx = cfg.context()?;
    let f: TestFunction<C> = config::function(ctx, "function", &cfg.function)?;
    let spec = stabilizer_spec(&f)?;
    let (body, passed) = match command {
        Command::Stabilizer => (stabilizer(&f, &spec)?, true),
        Command::Genericity => genericity(cfg, &f, &spec)?,
        Command::Orbit => orbit(cfg, ctx, &f, &spec)?,
        Command::FrameBound => (bound(&f, &spec)?, true),
        Command::FrameCheck => frame_check(cfg, ctx, &f, &spec)?,
        Command::OracleCheck => oracle_check(cfg, ctx, &f)?,
        Command::MraDemo => mra(cfg, &f, &spec)?,
    };
    let header = json!({
        "command": command.name(),
        "prime": cfg.prime,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "function": f.to_records(),
        "status": if passed { "pass" } else { "fail" },
    });
    let mut out = header;
    merge(&mut out, body);
    Ok(Report { body: out, passed })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn stabilizer<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec) -> Result<Value, Failure> {
    Ok(json!({
        "stabilizer": {
            "gamma_a": spec.gamma_a(),
            "gamma_0": spec.gamma_0(),
            "n_0": spec.n_0().to_string(),
            "anchor": spec.anchor().to_string(),
        },
        "genericity_depth": {
            "minimum": minimum_genericity_depth(spec),
            "complete": complete_genericity_depth(f, spec),
            "default": default_genericity_depth(f, spec),
        },
    }))
}

fn genericity<C: Coefficient>(
    cfg: &RunConfig,
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
) -> Result<(Value, bool), Failure> {
    let depth = cfg.depth.unwrap_or_else(|| default_genericity_depth(f, spec));
    let verdict = genericity_check(f, depth).map_err(|e| match e {
        Error::DepthTooSmall { .. } => Failure::Config(ConfigError(format!("depth: {e}"))),
        other => other.into(),
    })?;
    let passed = verdict.contradiction_count == 0;
    Ok((json!({ "genericity": verdict }), passed))
}

fn label(idx: &OrbitIndex) -> Value {
    json!({ "gamma": idx.gamma(), "n": idx.n().to_string(), "J": idx.big_j() })
}

fn elements(cfg: &RunConfig, ctx: PrimeContext, fallback: usize) -> Result<Vec<AffineElement>, Failure> {
    let mut out = Vec::new();
    for (i, e) in cfg.elements.iter().enumerate() {
        out.push(config::element(ctx, e).map_err(|msg| ConfigError(format!("elements[{i}].{msg}")))?);
    }
    let count = if cfg.random_g == 0 && out.is_empty() { fallback } else { cfg.random_g };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    out.extend((0..count).map(|_| random_affine(&mut rng, ctx)));
    Ok(out)
}

fn orbit<C: Coefficient>(
    cfg: &RunConfig,
    ctx: PrimeContext,
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
) -> Result<(Value, bool), Failure> {
    let gs = elements(cfg, ctx, DEFAULT_ORACLE_ELEMENTS)?;
    let p = ctx.p() as f64;
    let width = (1 - spec.gamma_0() + cfg.n_depth).max(0);
    if (spec.gamma_a() + width) as f64 * p.log2() > 60.0 {
        return Err(Failure::Analysis(format!(
            "orbit window with gamma_A = {} and n_depth = {} is too large to label",
            spec.gamma_a(),
            cfg.n_depth
        )));
    }
    let units = (p.powi(spec.gamma_a() as i32) * (1.0 - 1.0 / p)) as u64;
    let translations = p.powi(width as i32) as u64;
    let scales = (cfg.gamma_max - cfg.gamma_min + 1) as u64;
    let mut passed = true;
    let mut rows = Vec::new();
    for g in &gs {
        let idx = orbit_index_of(g, spec);
        let plain = orbit_index_in(g, spec, OrbitConvention::Plain);
        let consistent = orbit_element(f, spec, &idx)? == act_on_function(g, f);
        passed &= consistent;
        let in_window = (cfg.gamma_min..=cfg.gamma_max).contains(&idx.gamma()) && idx.n().depth() <= cfg.n_depth;
        rows.push(json!({
            "element": g,
            "label": label(&idx),
            "plain_label": label(&plain),
            "in_window": in_window,
            "consistent": consistent,
        }));
    }
    Ok((
        json!({
            "orbit": {
                "window": {
                    "gamma_min": cfg.gamma_min,
                    "gamma_max": cfg.gamma_max,
                    "n_depth": cfg.n_depth,
                    "labels": scales * units * translations,
                },
                "identity": label(&OrbitIndex::identity(spec)),
                "elements": rows,
            }
        }),
        passed,
    ))
}

fn bound<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec) -> Result<Value, Failure> {
    Ok(json!({
        "frame_bound": frame_bound(f, spec)?.render(),
        "gamma_a": spec.gamma_a(),
        "gamma_0": spec.gamma_0(),
        "norm_sq": f.norm_sq().render(),
    }))
}

fn frame_check<C: Coefficient>(
    cfg: &RunConfig,
    ctx: PrimeContext,
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
) -> Result<(Value, bool), Failure> {
    let mut gs = Vec::new();
    for (i, g) in cfg.g.iter().enumerate() {
        gs.push(config::function::<C>(ctx, &format!("g[{i}]"), g)?);
    }
    let grid = RandomGrid::probe();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.random_g {
        let g = random_function(&mut rng, ctx, &grid);
        gs.push(g.map_coeffs(|c| C::from_literal(&c.to_literal(), ctx).expect("exact literal")));
    }
    if gs.is_empty() {
        return Err(ConfigError("random_g: frame-check needs explicit g or --random-g > 0".into()).into());
    }
    let depth = cfg.depth.unwrap_or_else(|| default_genericity_depth(f, spec));
    let generic = genericity_check(f, depth)?.generic_up_to_depth;
    let report = frame_report(f, &gs)?;
    let passed = report.status == "pass";
    Ok((json!({ "generic": generic, "random_grid": grid, "frame": report }), passed))
}

fn oracle_check<C: Coefficient>(cfg: &RunConfig, ctx: PrimeContext, f: &TestFunction<C>) -> Result<(Value, bool), Failure> {
    let (k, l) = f.default_lattice();
    let sampled = f.sample(k, l)?;
    let norm_sampled = sampled.inner_product(&sampled)?.re;
    let norm_symbolic = f.norm_sq().to_complex().re;
    let norm_error = (norm_sampled - norm_symbolic).abs();
    let mut passed = norm_error <= ORACLE_TOLERANCE * norm_symbolic.max(1.0);
    let mut rows = Vec::new();
    for g in elements(cfg, ctx, DEFAULT_ORACLE_ELEMENTS)? {
        let image = act_on_function(&g, f);
        let (k, l) = image.default_lattice();
        let points = (ctx.p() as f64).powi((k + l) as i32);
        if points > ORACLE_MAX_POINTS as f64 {
            rows.push(json!({ "element": g, "skipped": "lattice too large", "lattice": { "k": k, "l": l } }));
            continue;
        }
        let symbolic = image.sample(k, l)?;
        let pointwise = SampledFunction::from_fn(ctx, k, l, |x| g.amplitude() * f.eval(&g.pullback(x)))?;
        let error = symbolic.max_abs_diff(&pointwise)?;
        let ok = error <= ORACLE_TOLERANCE;
        passed &= ok;
        rows.push(json!({
            "element": g,
            "lattice": { "k": k, "l": l },
            "max_abs_error": error,
            "agrees": ok,
        }));
    }
    Ok((
        json!({
            "oracle": {
                "tolerance": ORACLE_TOLERANCE,
                "lattice": { "k": k, "l": l },
                "norm_symbolic": norm_symbolic,
                "norm_sampled": norm_sampled,
                "norm_agrees": norm_error <= ORACLE_TOLERANCE * norm_symbolic.max(1.0),
                "actions": rows,
            }
        }),
        passed,
    ))
}

fn mra<C: Coefficient>(cfg: &RunConfig, f: &TestFunction<C>, spec: &StabilizerSpec) -> Result<(Value, bool), Failure> {
    let report = mra_report(f, spec, cfg.truncation)?;
    let passed = report.gram_identity
        && report.dilation_maps_generators
        && report.orthogonality_threshold_observed <= report.scale_spread + 1;
    Ok((json!({ "mra": report }), passed))
}
