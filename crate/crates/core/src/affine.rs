//! The p-adic affine group `G(a, b) f(x) = |a|_p^{-1/2} f((x - b) / a)` acting
//! on wavelets and finite expansions, with closed-form stabilizers.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::padic::{CosetRepresentative, PadicScalar, PrimeContext, Valuation};
use crate::wavelet::{TestFunction, WaveletIndex};

/// Tolerance used to compare float-mode coefficients.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// A group element `(a, b)` with `a != 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineElement {
    a: PadicScalar,
    b: PadicScalar,
}

impl AffineElement {
    pub fn new(a: PadicScalar, b: PadicScalar) -> Result<Self> {
        if a.ctx() != b.ctx() {
            return Err(Error::PrimeMismatch(a.ctx().p(), b.ctx().p()));
        }
        if a.is_zero() {
            return Err(Error::ZeroDilation);
        }
        Ok(AffineElement { a, b })
    }

    pub fn identity(ctx: PrimeContext) -> Self {
        AffineElement { a: ctx.one(), b: ctx.zero() }
    }

    /// Parses `a` and `b` from rational literals.
    pub fn parse(ctx: PrimeContext, a: &str, b: &str) -> Result<Self> {
        Self::new(ctx.parse(a)?, ctx.parse(b)?)
    }

    pub fn ctx(&self) -> PrimeContext {
        self.a.ctx()
    }

    pub fn a(&self) -> &PadicScalar {
        &self.a
    }

    pub fn b(&self) -> &PadicScalar {
        &self.b
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// `G(a,b) G(a',b') = G(a a', b + a b')`.
    pub fn compose(&self, other: &AffineElement) -> AffineElement {
        AffineElement { a: &self.a * &other.a, b: &self.b + &(&self.a * &other.b) }
    }

    /// `(a, b)^{-1} = (a^{-1}, -b a^{-1})`.
    pub fn inverse(&self) -> AffineElement {
        let inv = self.a.recip();
        AffineElement { b: -(&self.b * &inv), a: inv }
    }

    /// `(a, b)^k = (a^k, b [k]_a)` with `[k]_a = (1 - a^k) / (1 - a)`.
    pub fn power(&self, k: i64) -> AffineElement {
        if k < 0 {
            return self.inverse().power(-k);
        }
        let ctx = self.ctx();
        let ak = self.a.powi(k);
        let bracket = if self.a.is_one() {
            ctx.int(k)
        } else {
            &(&ctx.one() - &ak) / &(&ctx.one() - &self.a)
        };
        AffineElement { b: &self.b * &bracket, a: ak }
    }

    /// The point `(x - b) / a` at which `G(a, b) f` reads `f`.
    pub fn pullback(&self, x: &PadicScalar) -> PadicScalar {
        &(x - &self.b) / &self.a
    }

    /// The normalisation `|a|_p^{-1/2}`.
    pub fn amplitude(&self) -> f64 {
        let v = self.a.valuation().finite().expect("a is nonzero");
        (self.ctx().p() as f64).powf(v as f64 / 2.0)
    }

    pub fn to_record(&self) -> AffineRecord {
        AffineRecord { a: self.a.to_string(), b: self.b.to_string() }
    }

    pub fn from_record(ctx: PrimeContext, r: &AffineRecord) -> Result<Self> {
        Self::parse(ctx, &r.a, &r.b)
    }
}

impl fmt::Debug for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl fmt::Display for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for AffineElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

/// Serialized group element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRecord {
    pub a: String,
    pub b: String,
}

/// `exp(2 pi i phase / p) psi_index`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasedWavelet {
    pub index: WaveletIndex,
    pub phase: u64,
}

/// The element `(p^{-gamma} / j, p^{-gamma} n)` carrying `psi_{0,0,1}` to `psi_{gamma,n,j}`.
pub fn representative(idx: &WaveletIndex) -> AffineElement {
    let ctx = idx.ctx();
    let scale = ctx.pow_scalar(-idx.gamma());
    AffineElement {
        a: &scale / &ctx.int(idx.j() as i64),
        b: &scale * &idx.n_scalar(),
    }
}

/// Reads off `G(a, b) psi_{0,0,1}` as a phased basis element.
pub fn classify(g: &AffineElement) -> PhasedWavelet {
    let ctx = g.ctx();
    let v = g.a.valuation().finite().expect("a is nonzero");
    let gamma = -v;
    let size = ctx.pow_scalar(gamma);
    let unit = &g.a * &size;
    let j = unit.invert_mod_pk(1).expect("unit part is a unit").to_u64().expect("below p");
    let t = &size * &g.b;
    let n = t.fractional_part();
    let carry = &n.to_scalar() - &t;
    let digit = carry.mod_p().expect("n - t is a p-adic integer");
    let phase = (j * digit) % ctx.p();
    PhasedWavelet { index: WaveletIndex::from_parts(gamma, n, j), phase }
}

/// `G(g) psi_idx = exp(2 pi i m / p) psi_{gamma', n', j'}`.
pub fn act_on_wavelet(g: &AffineElement, idx: &WaveletIndex) -> PhasedWavelet {
    assert_eq!(g.ctx(), idx.ctx(), "group element and wavelet over different primes");
    classify(&g.compose(&representative(idx)))
}

/// Termwise action on a finite expansion; phases fold into the coefficients.
pub fn act_on_function<C: Coefficient>(g: &AffineElement, f: &TestFunction<C>) -> TestFunction<C> {
    let ctx = f.ctx();
    let mut out = TestFunction::new(ctx);
    for (idx, c) in f.terms() {
        let pw = act_on_wavelet(g, idx);
        let coeff = if pw.phase == 0 {
            c.clone()
        } else {
            c.clone() * C::root_of_unity(pw.phase as i64, ctx)
        };
        out.add_term(pw.index, coeff);
    }
    out
}

/// True when `g` maps the ball `|p^gamma x - n|_p <= 1` onto itself.
pub fn ball_stabilizer_membership(g: &AffineElement, gamma: i64, n: &PadicScalar) -> bool {
    let ctx = g.ctx();
    if !g.a.is_unit() {
        return false;
    }
    let shift = &(&ctx.pow_scalar(-gamma) * n) * &(&ctx.one() - &g.a);
    (&g.b - &shift).valuation() >= Valuation::Finite(-gamma)
}

/// True when `g` fixes `psi_idx`: `a = 1 mod p` and `p^gamma b = n (1 - a) mod p`.
pub fn wavelet_stabilizer_membership(g: &AffineElement, idx: &WaveletIndex) -> bool {
    let ctx = g.ctx();
    let one_minus_a = &ctx.one() - &g.a;
    if one_minus_a.valuation() < Valuation::Finite(1) {
        return false;
    }
    let lhs = &ctx.pow_scalar(idx.gamma()) * &g.b;
    let rhs = &idx.n_scalar() * &one_minus_a;
    (&lhs - &rhs).valuation() >= Valuation::Finite(1)
}

/// Closed form of the stabilizer of a test function:
/// `|1 - a|_p <= p^{-gamma_A}` and `|b - p^{-gamma_0} n_0 (1 - a)|_p <= p^{gamma_0 - 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StabilizerSpec {
    gamma_a: i64,
    gamma_0: i64,
    n_0: CosetRepresentative,
}

impl StabilizerSpec {
    pub fn new(gamma_a: i64, gamma_0: i64, n_0: CosetRepresentative) -> Result<Self> {
        if gamma_a < 1 {
            return Err(Error::Precondition(format!("gamma_A = {gamma_a} must be at least 1")));
        }
        if n_0.modulus_exponent() != 0 {
            return Err(Error::Precondition("n_0 must be a representative of Q_p/Z_p".into()));
        }
        Ok(StabilizerSpec { gamma_a, gamma_0, n_0 })
    }

    pub fn ctx(&self) -> PrimeContext {
        self.n_0.ctx()
    }

    pub fn gamma_a(&self) -> i64 {
        self.gamma_a
    }

    pub fn gamma_0(&self) -> i64 {
        self.gamma_0
    }

    pub fn n_0(&self) -> &CosetRepresentative {
        &self.n_0
    }

    /// The translation anchor `p^{-gamma_0} n_0`.
    pub fn anchor(&self) -> PadicScalar {
        &self.ctx().pow_scalar(-self.gamma_0) * &self.n_0.to_scalar()
    }

    /// Same `gamma_A` and `gamma_0` with a different admissible `n_0`.
    pub fn with_anchor(&self, n_0: CosetRepresentative) -> Self {
        StabilizerSpec { n_0, ..self.clone() }
    }

    /// The canonical translation class `b` predicted for dilation `a`, if `a`
    /// passes the dilation condition.
    pub fn predicted_translation(&self, a: &PadicScalar) -> Option<CosetRepresentative> {
        let one_minus_a = &self.ctx().one() - a;
        if one_minus_a.valuation() < Valuation::Finite(self.gamma_a) {
            return None;
        }
        Some((&self.anchor() * &one_minus_a).coset_representative(1 - self.gamma_0))
    }
}

/// Computes `gamma_A`, `gamma_0` and `n_0` for a nonempty test function.
pub fn stabilizer_spec<C: Coefficient>(f: &TestFunction<C>) -> Result<StabilizerSpec> {
    let ctx = f.ctx();
    let gamma_0 = f.gamma_min().ok_or(Error::EmptyFunction)?;
    let keys: Vec<&WaveletIndex> = f.terms().keys().collect();
    let centers: Vec<PadicScalar> = keys
        .iter()
        .map(|idx| &ctx.pow_scalar(-idx.gamma()) * &idx.n_scalar())
        .collect();
    let mut gamma_a = 1;
    for i in 0..keys.len() {
        for k in i + 1..keys.len() {
            if let Valuation::Finite(v) = (&centers[i] - &centers[k]).valuation() {
                let top = keys[i].gamma().max(keys[k].gamma());
                gamma_a = gamma_a.max(1 - top - v);
            }
        }
    }
    let n_0 = keys
        .iter()
        .filter(|idx| idx.gamma() == gamma_0)
        .map(|idx| idx.n().clone())
        .min_by(|x, y| anchor_key(x).cmp(&anchor_key(y)))
        .expect("some term sits at the minimal scale");
    StabilizerSpec::new(gamma_a, gamma_0, n_0)
}

/// Smallest norm first, then digits read from position `-1` outward.
fn anchor_key(n: &CosetRepresentative) -> (i64, Vec<u64>) {
    let digits = n.digits().into_iter().rev().map(|(_, d)| d).collect();
    (n.depth(), digits)
}

/// Evaluates the two stabilizer inequalities.
pub fn in_stabilizer(g: &AffineElement, spec: &StabilizerSpec) -> bool {
    let ctx = spec.ctx();
    let one_minus_a = &ctx.one() - g.a();
    if one_minus_a.valuation() < Valuation::Finite(spec.gamma_a) {
        return false;
    }
    let shifted = g.b() - &(&spec.anchor() * &one_minus_a);
    shifted.valuation() >= Valuation::Finite(1 - spec.gamma_0)
}

/// Smallest depth at which `genericity_check` runs.
pub fn minimum_genericity_depth(spec: &StabilizerSpec) -> u32 {
    (spec.gamma_a + 1) as u32
}

/// Depth from which the invariance set on unit classes is fully determined:
/// invariance depends on `a mod p^{1 + delta_max}` and the predicted set on
/// `a mod p^{gamma_A}` and `a mod p^{1 + delta(n_0)}`.
pub fn complete_genericity_depth<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec) -> u32 {
    spec.gamma_a.max(1 + f.max_depth()) as u32
}

/// Default enumeration depth: the minimum, raised to the complete depth.
pub fn default_genericity_depth<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec) -> u32 {
    minimum_genericity_depth(spec).max(complete_genericity_depth(f, spec))
}

const MAX_LISTED: usize = 32;
const MAX_UNIT_BITS: f64 = 24.0;

/// Result of a depth-bounded genericity certification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityVerdict {
    pub depth: u32,
    /// True when the depth is large enough that the verdict covers every
    /// group element, not just the enumerated quotient.
    pub complete: bool,
    pub generic_up_to_depth: bool,
    pub units_enumerated: usize,
    pub invariant_count: usize,
    pub predicted_count: usize,
    /// Elements fixing `f` outside the predicted stabilizer (first few).
    pub witnesses: Vec<AffineElement>,
    pub witness_count: usize,
    /// Predicted elements that fail to fix `f` (first few); never expected.
    pub contradictions: Vec<AffineElement>,
    pub contradiction_count: usize,
}

/// Units `a` mod `p^depth` in the balanced range `(-p^depth/2, p^depth/2]`.
pub fn balanced_units(ctx: PrimeContext, depth: u32) -> Vec<PadicScalar> {
    let modulus = ctx.pow(depth).to_i64().expect("depth fits in i64");
    let p = ctx.p() as i64;
    let lo = -(modulus - 1) / 2;
    (lo..lo + modulus)
        .filter(|a| a.rem_euclid(p) != 0)
        .map(|a| ctx.int(a))
        .collect()
}

/// Compares the invariance set of `f` with the closed-form stabilizer on the
/// quotient `a mod p^depth` (units) times `b mod p^{1 - gamma_0}`.
///
/// Non-units never fix `f` because they move the minimal scale. For each unit
/// `a` the translations that can fix `f` are solved from the minimal-scale
/// terms and then confirmed by the exact action.
pub fn genericity_check<C: Coefficient>(f: &TestFunction<C>, depth: u32) -> Result<GenericityVerdict> {
    let spec = stabilizer_spec(f)?;
    let required = minimum_genericity_depth(&spec);
    if depth < required {
        return Err(Error::DepthTooSmall { got: depth, required });
    }
    let ctx = f.ctx();
    let p = ctx.p() as i64;
    if (depth as f64) * (p as f64).log2() > MAX_UNIT_BITS {
        return Err(Error::Precondition(format!(
            "enumerating units modulo {p}^{depth} exceeds 2^{MAX_UNIT_BITS} classes"
        )));
    }
    let gamma_0 = spec.gamma_0();
    let bottom: Vec<(&WaveletIndex, &C)> =
        f.terms().iter().filter(|(idx, _)| idx.gamma() == gamma_0).collect();
    let (first, first_coeff) = bottom[0];
    // (target term, phase m) with C_target = zeta^m C_first
    let mut targets = Vec::new();
    for (idx, c) in &bottom {
        for m in 0..p {
            let rotated = first_coeff.clone() * C::root_of_unity(m, ctx);
            if rotated.approx_eq(c, FLOAT_TOLERANCE) {
                targets.push((*idx, m));
            }
        }
    }
    let units = balanced_units(ctx, depth);
    let lift = ctx.pow_scalar(-gamma_0);
    let per_unit: Vec<(Vec<AffineElement>, Vec<AffineElement>, usize, usize)> = units
        .par_iter()
        .map(|a| {
            let a_inv_mod_p = a.invert_mod_pk(1).expect("unit").to_i64().expect("below p");
            let mut invariant = BTreeSet::new();
            for (target, m) in &targets {
                if (first.j() as i64 * a_inv_mod_p - target.j() as i64).rem_euclid(p) != 0 {
                    continue;
                }
                let j_inv = ctx.int(target.j() as i64).invert_mod_pk(1).expect("unit");
                let correction = ctx.scalar(num_rational::BigRational::from_integer(
                    (BigInt::from(*m) * j_inv).mod_floor(&ctx.big()),
                ));
                let x = &(&target.n_scalar() - &correction) - &(&first.n_scalar() * a);
                let b = (&lift * &x).coset_representative(1 - gamma_0).to_scalar();
                let g = AffineElement { a: a.clone(), b };
                if act_on_function(&g, f).approx_eq(f, FLOAT_TOLERANCE) {
                    invariant.insert(g);
                }
            }
            let predicted = spec
                .predicted_translation(a)
                .map(|b| AffineElement { a: a.clone(), b: b.to_scalar() });
            let inv_count = invariant.len();
            let witnesses: Vec<AffineElement> = invariant
                .iter()
                .filter(|g| Some(*g) != predicted.as_ref())
                .cloned()
                .collect();
            let contradictions: Vec<AffineElement> =
                predicted.iter().filter(|g| !invariant.contains(*g)).cloned().collect();
            (witnesses, contradictions, inv_count, predicted.is_some() as usize)
        })
        .collect();
    let mut verdict = GenericityVerdict {
        depth,
        complete: depth >= complete_genericity_depth(f, &spec),
        generic_up_to_depth: true,
        units_enumerated: units.len(),
        invariant_count: 0,
        predicted_count: 0,
        witnesses: Vec::new(),
        witness_count: 0,
        contradictions: Vec::new(),
        contradiction_count: 0,
    };
    for (w, c, inv, pred) in per_unit {
        verdict.invariant_count += inv;
        verdict.predicted_count += pred;
        verdict.witness_count += w.len();
        verdict.contradiction_count += c.len();
        verdict.witnesses.extend(w);
        verdict.contradictions.extend(c);
    }
    verdict.witnesses.sort_by_key(simplicity);
    verdict.witnesses.truncate(MAX_LISTED);
    verdict.contradictions.truncate(MAX_LISTED);
    verdict.generic_up_to_depth = verdict.witness_count == 0 && verdict.contradiction_count == 0;
    Ok(verdict)
}

/// Orders elements by the size of their rational entries, smallest first.
fn simplicity(g: &AffineElement) -> (BigInt, BigInt, AffineElement) {
    let size = |x: &PadicScalar| x.value().numer().abs() + x.value().denom();
    (size(&g.a), size(&g.b), g.clone())
}

/// True when the function passes the genericity check at its default depth.
pub fn is_generic<C: Coefficient>(f: &TestFunction<C>) -> Result<bool> {
    let spec = stabilizer_spec(f)?;
    Ok(genericity_check(f, default_genericity_depth(f, &spec))?.generic_up_to_depth)
}
