//! The p-adic wavelet basis, finite wavelet expansions and a pointwise
//! Haar-measure oracle.
//!
//! `psi_{gamma,n,j}(x) = p^{-gamma/2} chi(p^{-1} j (p^gamma x - n)) Omega(|p^gamma x - n|_p)`
//! with `chi(y) = exp(2 pi i {y})`. The basis is orthonormal, so symbolic inner
//! products of expansions never touch the irrational normalisation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::coefficient::{CoeffLiteral, Coefficient};
use crate::error::{Error, Result};
use crate::padic::{is_canonical, CosetRepresentative, PadicScalar, PrimeContext};

/// A basis label `(gamma, n, j)`: scale, translation in `Q_p / Z_p`, and
/// character twist `j` in `1..p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletIndex {
    gamma: i64,
    n: CosetRepresentative,
    j: u64,
}

impl WaveletIndex {
    /// Validates that `n` is a canonical representative of `Q_p / Z_p` and `1 <= j < p`.
    pub fn new(gamma: i64, n: &PadicScalar, j: u64) -> Result<Self> {
        let p = n.ctx().p();
        if j == 0 || j >= p {
            return Err(Error::InvalidWaveletIndex(format!("j = {j} outside 1..{p}")));
        }
        if !is_canonical(n, 0) {
            return Err(Error::InvalidWaveletIndex(format!(
                "n = {n} is not a canonical representative of Q_{p}/Z_{p}"
            )));
        }
        Ok(WaveletIndex { gamma, n: n.fractional_part(), j })
    }

    /// Reduces `n` into `Q_p / Z_p` and `j` mod `p` instead of rejecting them.
    pub fn reduced(gamma: i64, n: &PadicScalar, j: i64) -> Result<Self> {
        let p = n.ctx().p() as i64;
        let j = j.rem_euclid(p) as u64;
        if j == 0 {
            return Err(Error::InvalidWaveletIndex("j = 0 mod p".to_string()));
        }
        Ok(WaveletIndex { gamma, n: n.fractional_part(), j })
    }

    pub(crate) fn from_parts(gamma: i64, n: CosetRepresentative, j: u64) -> Self {
        debug_assert!(n.modulus_exponent() == 0 && j >= 1 && j < n.ctx().p());
        WaveletIndex { gamma, n, j }
    }

    pub fn ctx(&self) -> PrimeContext {
        self.n.ctx()
    }

    pub fn gamma(&self) -> i64 {
        self.gamma
    }

    pub fn n(&self) -> &CosetRepresentative {
        &self.n
    }

    pub fn n_scalar(&self) -> PadicScalar {
        self.n.to_scalar()
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    /// `delta(n)`: the number of fractional digits of `n`.
    pub fn depth(&self) -> i64 {
        self.n.depth()
    }

    /// The support of `psi` is the ball `|x|_p <= p^{gamma + delta(n)}`.
    pub fn support_exponent(&self) -> i64 {
        self.gamma + self.depth()
    }
}

impl fmt::Debug for WaveletIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi({}, {}, {})", self.gamma, self.n, self.j)
    }
}

impl fmt::Display for WaveletIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Evaluates `psi_idx(x)` with exact support and character tests.
pub fn wavelet_eval(idx: &WaveletIndex, x: &PadicScalar) -> Complex64 {
    let ctx = idx.ctx();
    let z = &(&ctx.pow_scalar(idx.gamma) * x) - &idx.n_scalar();
    if !z.is_padic_integer() {
        return Complex64::new(0.0, 0.0);
    }
    let arg = &z * &ctx.ratio(idx.j as i64, ctx.p() as i64);
    let frac = arg.fractional_part().into_value().to_f64().unwrap_or(f64::NAN);
    let amp = (ctx.p() as f64).powf(-(idx.gamma as f64) / 2.0);
    Complex64::from_polar(amp, 2.0 * PI * frac)
}

/// A finite wavelet expansion `sum C_idx psi_idx`; zero coefficients are dropped.
#[derive(Clone, PartialEq)]
pub struct TestFunction<C> {
    ctx: PrimeContext,
    terms: BTreeMap<WaveletIndex, C>,
}

impl<C: Coefficient> TestFunction<C> {
    pub fn new(ctx: PrimeContext) -> Self {
        TestFunction { ctx, terms: BTreeMap::new() }
    }

    /// A single basis function.
    pub fn wavelet(idx: WaveletIndex) -> Self {
        let ctx = idx.ctx();
        let mut f = Self::new(ctx);
        f.add_term(idx, C::one(ctx));
        f
    }

    pub fn from_terms<I>(ctx: PrimeContext, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WaveletIndex, C)>,
    {
        let mut f = Self::new(ctx);
        for (idx, c) in terms {
            if idx.ctx() != ctx {
                return Err(Error::PrimeMismatch(ctx.p(), idx.ctx().p()));
            }
            f.add_term(idx, c);
        }
        Ok(f)
    }

    /// Adds `c * psi_idx`, removing the term if it cancels.
    pub fn add_term(&mut self, idx: WaveletIndex, c: C) {
        assert_eq!(idx.ctx(), self.ctx, "wavelet index over a different prime");
        match self.terms.remove(&idx) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(idx, sum);
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(idx, c);
                }
            }
        }
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<WaveletIndex, C> {
        &self.terms
    }

    pub fn coeff(&self, idx: &WaveletIndex) -> Option<&C> {
        self.terms.get(idx)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn gamma_min(&self) -> Option<i64> {
        self.terms.keys().map(WaveletIndex::gamma).min()
    }

    pub fn gamma_max(&self) -> Option<i64> {
        self.terms.keys().map(WaveletIndex::gamma).max()
    }

    /// `gamma_max - gamma_min`, zero for the empty function.
    pub fn scale_spread(&self) -> i64 {
        match (self.gamma_min(), self.gamma_max()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    /// Largest number of fractional digits among the translations.
    pub fn max_depth(&self) -> i64 {
        self.terms.keys().map(WaveletIndex::depth).max().unwrap_or(0)
    }

    /// `||f||^2 = sum |C|^2`.
    pub fn norm_sq(&self) -> C {
        let mut acc = C::zero(self.ctx);
        for c in self.terms.values() {
            acc += c.norm_sq();
        }
        acc
    }

    /// `<self, other>`, linear in `self` and conjugate-linear in `other`.
    pub fn inner_product(&self, other: &TestFunction<C>) -> C {
        let (small, large, swap) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = C::zero(self.ctx);
        for (idx, c) in &small.terms {
            if let Some(d) = large.terms.get(idx) {
                acc += if swap { d.clone() * c.conj() } else { c.clone() * d.conj() };
            }
        }
        acc
    }

    pub fn scaled(&self, s: &C) -> Self {
        let mut out = Self::new(self.ctx);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn plus(&self, other: &TestFunction<C>) -> Self {
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &TestFunction<C>) -> Self {
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), -c.clone());
        }
        out
    }

    /// Termwise comparison: exact in exact mode, `tol`-relative otherwise.
    pub fn approx_eq(&self, other: &TestFunction<C>, tol: f64) -> bool {
        if C::EXACT {
            return self == other;
        }
        let zero = C::zero(self.ctx);
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.into_iter().all(|idx| {
            let a = self.terms.get(idx).unwrap_or(&zero);
            let b = other.terms.get(idx).unwrap_or(&zero);
            a.approx_eq(b, tol)
        })
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> TestFunction<D> {
        let mut out = TestFunction::new(self.ctx);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), f(c));
        }
        out
    }

    pub fn to_complex(&self) -> TestFunction<Complex64> {
        self.map_coeffs(|c| c.to_complex())
    }

    /// Pointwise value `f(x)`.
    pub fn eval(&self, x: &PadicScalar) -> Complex64 {
        self.terms
            .iter()
            .map(|(idx, c)| c.to_complex() * wavelet_eval(idx, x))
            .sum()
    }

    /// Smallest `K` such that `f` is constant on cosets of `p^K Z_p`.
    pub fn required_resolution(&self) -> i64 {
        1 - self.gamma_min().unwrap_or(1)
    }

    /// Smallest `L` such that `f` vanishes outside `|x|_p <= p^L`.
    pub fn required_support(&self) -> i64 {
        self.terms.keys().map(WaveletIndex::support_exponent).max().unwrap_or(0)
    }

    /// Default lattice `(K, L)`: one extra digit of resolution beyond the
    /// minimum and the tight support exponent.
    pub fn default_lattice(&self) -> (i64, i64) {
        (self.required_resolution() + 1, self.required_support())
    }

    /// Materialises `f` on the coset lattice `p^{-L} Z_p / p^K Z_p`.
    pub fn sample(&self, k: i64, l: i64) -> Result<SampledFunction> {
        if !self.is_empty() {
            let need_k = self.required_resolution();
            if k < need_k {
                return Err(Error::ResolutionTooCoarse { got: k, required: need_k });
            }
            let need_l = self.required_support();
            if l < need_l {
                return Err(Error::SupportTooSmall { got: l, required: need_l });
            }
        }
        let mut out = SampledFunction::zeros(self.ctx, k, l)?;
        for (idx, c) in &self.terms {
            let coeff = c.to_complex();
            accumulate_term(&mut out, idx, coeff);
        }
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<WaveletRecord> {
        self.terms
            .iter()
            .map(|(idx, c)| WaveletRecord {
                gamma: idx.gamma,
                n: idx.n.to_string(),
                j: idx.j,
                coeff: c.to_literal(),
            })
            .collect()
    }

    pub fn from_records(ctx: PrimeContext, records: &[WaveletRecord]) -> Result<Self> {
        let mut f = Self::new(ctx);
        for r in records {
            let n = ctx.parse(&r.n)?;
            let idx = WaveletIndex::new(r.gamma, &n, r.j)?;
            f.add_term(idx, C::from_literal(&r.coeff, ctx)?);
        }
        Ok(f)
    }
}

impl<C: fmt::Debug> fmt::Debug for TestFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Serialized form of one term of a test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletRecord {
    pub gamma: i64,
    pub n: String,
    pub j: u64,
    #[serde(default = "CoeffLiteral::one")]
    pub coeff: CoeffLiteral,
}

/// Adds `coeff * psi_idx` into a sampled lattice.
fn accumulate_term(out: &mut SampledFunction, idx: &WaveletIndex, coeff: Complex64) {
    let ctx = out.ctx;
    let p = ctx.p() as i128;
    let (k, l) = (out.k, out.l);
    let gamma = idx.gamma;
    let delta = idx.depth();
    // scaled offset Z = p^M (p^gamma x - n) with x = t / p^L
    let m_exp = (l - gamma).max(delta).max(0);
    let shift = gamma - l + m_exp;
    let n_num = (idx.n.value() * ctx.pow_rational(delta)).to_integer();
    let amp = (ctx.p() as f64).powf(-(gamma as f64) / 2.0) * coeff.norm();
    let base_arg = coeff.arg();
    let bits_needed = ((k + gamma + m_exp + 2) as f64) * (ctx.p() as f64).log2();
    let fast = bits_needed < 120.0 && n_num.to_i128().is_some();
    if !fast {
        for t in 0..out.values.len() {
            let x = ctx.scalar(out.point(t));
            out.values[t] += coeff * wavelet_eval(idx, &x);
        }
        return;
    }
    let step = p.pow(shift as u32);
    let offset = n_num.to_i128().unwrap() * p.pow((m_exp - delta) as u32);
    let modulus = p.pow(m_exp as u32);
    let j = idx.j as i128;
    for (t, v) in out.values.iter_mut().enumerate() {
        let z = t as i128 * step - offset;
        if z.rem_euclid(modulus) != 0 {
            continue;
        }
        let digit = (z / modulus).rem_euclid(p);
        let phase = (j * digit).rem_euclid(p) as f64 / p as f64;
        *v += Complex64::from_polar(amp, base_arg + 2.0 * PI * phase);
    }
}

/// Values of a function on the representatives `t / p^L`, `0 <= t < p^{L+K}`,
/// of the cosets of `p^K Z_p` inside the ball `|x|_p <= p^L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    ctx: PrimeContext,
    k: i64,
    l: i64,
    values: Vec<Complex64>,
}

const MAX_LATTICE_POINTS: u64 = 1 << 26;

impl SampledFunction {
    pub fn zeros(ctx: PrimeContext, k: i64, l: i64) -> Result<Self> {
        let count = lattice_size(ctx, k, l)?;
        Ok(SampledFunction { ctx, k, l, values: vec![Complex64::new(0.0, 0.0); count] })
    }

    /// Samples an arbitrary function at the lattice representatives.
    pub fn from_fn(
        ctx: PrimeContext,
        k: i64,
        l: i64,
        f: impl Fn(&PadicScalar) -> Complex64,
    ) -> Result<Self> {
        let mut out = Self::zeros(ctx, k, l)?;
        for t in 0..out.values.len() {
            let x = ctx.scalar(out.point(t));
            out.values[t] = f(&x);
        }
        Ok(out)
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn resolution(&self) -> i64 {
        self.k
    }

    pub fn support_exponent(&self) -> i64 {
        self.l
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// The representative `t / p^L` of lattice point `t`.
    pub fn point(&self, t: usize) -> BigRational {
        BigRational::from_integer(BigInt::from(t)) * self.ctx.pow_rational(-self.l)
    }

    /// Lattice position of the coset containing `x`, if inside the ball.
    pub fn position(&self, x: &PadicScalar) -> Option<usize> {
        if !x.norm_at_most(self.l) {
            return None;
        }
        let rep = x.coset_representative(self.k);
        let t = (rep.value() * self.ctx.pow_rational(self.l)).to_integer();
        t.to_usize()
    }

    /// `f(x)`; zero outside the ball.
    pub fn value_at(&self, x: &PadicScalar) -> Complex64 {
        self.position(x).map_or(Complex64::new(0.0, 0.0), |t| self.values[t])
    }

    /// `sum f(x) conj(g(x)) p^{-K}` over the lattice.
    pub fn inner_product(&self, other: &SampledFunction) -> Result<Complex64> {
        if self.ctx != other.ctx || self.k != other.k || self.l != other.l {
            return Err(Error::LatticeMismatch(
                format!("p={}, K={}, L={}", self.ctx.p(), self.k, self.l),
                format!("p={}, K={}, L={}", other.ctx.p(), other.k, other.l),
            ));
        }
        let measure = (self.ctx.p() as f64).powi(-(self.k as i32));
        let sum: Complex64 =
            self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(sum * measure)
    }

    /// Largest pointwise distance to another sample on the same lattice.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> Result<f64> {
        if self.ctx != other.ctx || self.k != other.k || self.l != other.l {
            return Err(Error::LatticeMismatch(
                format!("K={}, L={}", self.k, self.l),
                format!("K={}, L={}", other.k, other.l),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn lattice_size(ctx: PrimeContext, k: i64, l: i64) -> Result<usize> {
    let e = k + l;
    if e < 0 {
        return Err(Error::Precondition(format!("empty lattice: K + L = {e} < 0")));
    }
    let count = (ctx.p() as u128).checked_pow(e as u32).filter(|&c| c <= MAX_LATTICE_POINTS as u128);
    count.map(|c| c as usize).ok_or_else(|| {
        Error::Precondition(format!(
            "lattice p^(K+L) = {}^{e} exceeds {MAX_LATTICE_POINTS} points",
            ctx.p()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::CycloNumber;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn idx(c: PrimeContext, gamma: i64, n: &str, j: u64) -> WaveletIndex {
        WaveletIndex::new(gamma, &c.parse(n).unwrap(), j).unwrap()
    }

    #[test]
    fn index_validation() {
        let c = ctx(3);
        assert!(WaveletIndex::new(0, &c.int(0), 0).is_err());
        assert!(WaveletIndex::new(0, &c.int(0), 3).is_err());
        assert!(WaveletIndex::new(0, &c.int(1), 1).is_err());
        assert!(WaveletIndex::new(0, &c.ratio(4, 3), 1).is_err());
        assert!(WaveletIndex::new(0, &c.ratio(5, 9), 2).is_ok());
        let r = WaveletIndex::reduced(1, &c.ratio(4, 3), 4).unwrap();
        assert_eq!(r, idx(c, 1, "1/3", 1));
    }

    #[test]
    fn eval_examples() {
        let c = ctx(3);
        let psi = idx(c, 0, "0", 1);
        let v = wavelet_eval(&psi, &c.int(0));
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = wavelet_eval(&psi, &c.int(1));
        assert!((v - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
        assert_eq!(wavelet_eval(&psi, &c.ratio(1, 3)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sample_single_wavelet() {
        let c = ctx(3);
        let f = TestFunction::<CycloNumber>::wavelet(idx(c, 0, "0", 1));
        let s = f.sample(1, 0).unwrap();
        assert_eq!(s.values().len(), 3);
        for (t, v) in s.values().iter().enumerate() {
            let w = Complex64::from_polar(1.0, 2.0 * PI * t as f64 / 3.0);
            assert!((v - w).norm() < 1e-12);
        }
        let c2 = ctx(2);
        let s = TestFunction::<CycloNumber>::wavelet(idx(c2, 0, "0", 1)).sample(1, 0).unwrap();
        assert!((s.values()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s.values()[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sample_empty_and_bounds() {
        let c = ctx(5);
        let zero = TestFunction::<CycloNumber>::new(c).sample(1, 0).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
        let f = TestFunction::<CycloNumber>::wavelet(idx(c, -1, "1/5", 2));
        assert_eq!(f.sample(1, 0), Err(Error::ResolutionTooCoarse { got: 1, required: 2 }));
        assert_eq!(f.sample(2, -1), Err(Error::SupportTooSmall { got: -1, required: 0 }));
    }

    #[test]
    fn fast_sampling_matches_pointwise_evaluation() {
        let c = ctx(3);
        let f = TestFunction::from_terms(
            c,
            [
                (idx(c, -1, "2/9", 1), CycloNumber::root_of_unity(c, 1)),
                (idx(c, 1, "1/3", 2), CycloNumber::from_i64(c, -2)),
                (idx(c, 0, "0", 1), CycloNumber::one(c)),
            ],
        )
        .unwrap();
        let (k, l) = f.default_lattice();
        let s = f.sample(k, l).unwrap();
        let direct = SampledFunction::from_fn(c, k, l, |x| f.eval(x)).unwrap();
        assert!(s.max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn symbolic_inner_product_conventions() {
        let c = ctx(5);
        let (a, b) = (idx(c, 0, "0", 1), idx(c, 1, "2/5", 3));
        let z = CycloNumber::root_of_unity(c, 1);
        let f = TestFunction::from_terms(c, [(a.clone(), CycloNumber::from_i64(c, 2)), (b.clone(), z.clone())]).unwrap();
        let g = TestFunction::<CycloNumber>::wavelet(b);
        assert_eq!(f.inner_product(&g), z);
        assert_eq!(g.inner_product(&f), z.conj());
        let psi = TestFunction::<CycloNumber>::wavelet(a);
        assert_eq!(psi.inner_product(&psi), CycloNumber::one(c));
        let other = TestFunction::<CycloNumber>::wavelet(idx(c, 1, "0", 1));
        assert!(psi.inner_product(&other).is_zero());
    }

    #[test]
    fn norms() {
        let c = ctx(3);
        let (a, b) = (idx(c, 0, "0", 1), idx(c, 0, "1/3", 1));
        assert_eq!(TestFunction::<CycloNumber>::wavelet(a.clone()).norm_sq(), CycloNumber::one(c));
        assert!(TestFunction::<CycloNumber>::new(c).norm_sq().is_zero());
        let f = TestFunction::from_terms(c, [(a, CycloNumber::one(c)), (b, CycloNumber::one(c))]).unwrap();
        assert_eq!(f.norm_sq(), CycloNumber::from_i64(c, 2));
    }

    #[test]
    fn zero_terms_are_removed() {
        let c = ctx(3);
        let a = idx(c, 0, "0", 1);
        let mut f = TestFunction::<CycloNumber>::wavelet(a.clone());
        f.add_term(a, CycloNumber::from_i64(c, -1));
        assert!(f.is_empty());
    }

    #[test]
    fn lattice_mismatch() {
        let c = ctx(3);
        let a = SampledFunction::zeros(c, 1, 0).unwrap();
        let b = SampledFunction::zeros(c, 2, 0).unwrap();
        assert!(matches!(a.inner_product(&b), Err(Error::LatticeMismatch(_, _))));
        assert_eq!(a.inner_product(&a).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn records_roundtrip() {
        let c = ctx(5);
        let f = TestFunction::from_terms(
            c,
            [
                (idx(c, 0, "3/25", 4), CycloNumber::root_of_unity(c, 2)),
                (idx(c, -2, "0", 1), CycloNumber::from_i64(c, 3)),
            ],
        )
        .unwrap();
        let g = TestFunction::<CycloNumber>::from_records(c, &f.to_records()).unwrap();
        assert_eq!(f, g);
    }
}
