//! Exact p-adic arithmetic on rational numbers.
//!
//! Every scalar is an exact rational read inside `Q_p` for a fixed prime.
//! Rationals are dense in `Q_p` and every parameter appearing in the frame
//! constructions (translations, dilations, wavelet indices) is rational, so
//! nothing here truncates a digit stream.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A prime `p >= 2`, checked by trial division at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeContext {
    p: u64,
}

impl PrimeContext {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(PrimeContext { p })
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn big(&self) -> BigInt {
        BigInt::from(self.p)
    }

    /// `p^k` as an integer.
    pub fn pow(&self, k: u32) -> BigInt {
        num_traits::pow(self.big(), k as usize)
    }

    /// `p^k` as a rational, `k` of either sign.
    pub fn pow_rational(&self, k: i64) -> BigRational {
        let m = self.pow(k.unsigned_abs() as u32);
        if k >= 0 {
            BigRational::from_integer(m)
        } else {
            BigRational::new(BigInt::one(), m)
        }
    }

    /// `p^k` as a scalar.
    pub fn pow_scalar(&self, k: i64) -> PadicScalar {
        self.scalar(self.pow_rational(k))
    }

    pub fn scalar(&self, value: BigRational) -> PadicScalar {
        PadicScalar { value, ctx: *self }
    }

    pub fn int(&self, v: i64) -> PadicScalar {
        self.scalar(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num/den`; panics when `den == 0`.
    pub fn ratio(&self, num: i64, den: i64) -> PadicScalar {
        self.scalar(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero(&self) -> PadicScalar {
        self.int(0)
    }

    pub fn one(&self) -> PadicScalar {
        self.int(1)
    }

    /// Parses `"a/b"` or `"a"`, optional leading minus.
    pub fn parse(&self, s: &str) -> Result<PadicScalar> {
        parse_rational(s).map(|v| self.scalar(v))
    }

    /// Splits a nonzero integer as `p^e * rest` with `p` not dividing `rest`.
    pub(crate) fn split_power(&self, n: &BigInt) -> (i64, BigInt) {
        debug_assert!(!n.is_zero());
        let p = self.big();
        let mut e = 0i64;
        let mut rest = n.clone();
        loop {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                return (e, rest);
            }
            rest = q;
            e += 1;
        }
    }
}

impl fmt::Display for PrimeContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Parses a rational literal of the form `"a/b"` or `"a"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::ParseRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// The p-adic valuation; `Infinite` only for zero. Orders with `Infinite`
/// above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// True when `p^{-self} <= p^{k}`, i.e. the norm is at most `p^k`.
    pub fn norm_at_most(self, k: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= -k,
            Valuation::Infinite => true,
        }
    }
}

/// An exact rational interpreted in `Q_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PadicScalar {
    value: BigRational,
    ctx: PrimeContext,
}

impl PadicScalar {
    pub fn new(ctx: PrimeContext, value: BigRational) -> Self {
        PadicScalar { value, ctx }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    pub fn valuation(&self) -> Valuation {
        if self.value.is_zero() {
            return Valuation::Infinite;
        }
        let (vn, _) = self.ctx.split_power(self.value.numer());
        let (vd, _) = self.ctx.split_power(self.value.denom());
        Valuation::Finite(vn - vd)
    }

    /// `|x|_p = p^{-v(x)}`, and `0` for zero.
    pub fn norm(&self) -> BigRational {
        match self.valuation() {
            Valuation::Infinite => BigRational::zero(),
            Valuation::Finite(v) => self.ctx.pow_rational(-v),
        }
    }

    /// `|x|_p <= p^k`.
    pub fn norm_at_most(&self, k: i64) -> bool {
        self.valuation().norm_at_most(k)
    }

    pub fn is_padic_integer(&self) -> bool {
        self.norm_at_most(0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// `x |x|_p`, which always has norm one.
    pub fn unit_part(&self) -> Result<PadicScalar> {
        match self.valuation() {
            Valuation::Infinite => Err(Error::ZeroUnitPart),
            Valuation::Finite(v) => Ok(self.ctx.scalar(&self.value * self.ctx.pow_rational(-v))),
        }
    }

    /// Exponent of `p` in the reduced denominator (zero for p-adic integers).
    pub fn denominator_exponent(&self) -> i64 {
        self.ctx.split_power(self.value.denom()).0
    }

    /// The canonical representative of `x mod Z_p`.
    pub fn fractional_part(&self) -> CosetRepresentative {
        self.coset_representative(0)
    }

    /// The canonical transversal element `sum_{l<k} n_l p^l` congruent to
    /// `x` modulo `p^k Z_p`.
    ///
    /// With `x = N / (p^e d)` and `p` not dividing `d`, the representative
    /// is `R / p^e` where `R = N d^{-1} mod p^{e+k}`.
    pub fn coset_representative(&self, k: i64) -> CosetRepresentative {
        let value = if self.value.is_zero() {
            BigRational::zero()
        } else {
            let (e, d) = self.ctx.split_power(self.value.denom());
            let total = e + k;
            if total <= 0 {
                BigRational::zero()
            } else {
                let modulus = self.ctx.pow(total as u32);
                let d_inv = d
                    .modinv(&modulus)
                    .expect("cofactor of the denominator is prime to p");
                let r = (self.value.numer() * d_inv).mod_floor(&modulus);
                BigRational::new(r, self.ctx.pow(e as u32))
            }
        };
        CosetRepresentative { value, modulus_exponent: k, ctx: self.ctx }
    }

    /// Residue of a p-adic integer in `Z_p / p^k Z_p`, as an integer in `[0, p^k)`.
    pub fn residue_mod_pk(&self, k: u32) -> Result<BigInt> {
        if !self.is_padic_integer() {
            return Err(Error::NotPadicInteger(self.value.to_string()));
        }
        let modulus = self.ctx.pow(k);
        if self.value.is_zero() {
            return Ok(BigInt::zero());
        }
        let d_inv = self
            .value
            .denom()
            .modinv(&modulus)
            .unwrap_or_else(BigInt::zero);
        Ok((self.value.numer() * d_inv).mod_floor(&modulus))
    }

    /// The digit `n_0`, i.e. the residue in `Z_p / p Z_p`.
    pub fn mod_p(&self) -> Result<u64> {
        let r = self.residue_mod_pk(1)?;
        Ok(r.to_u64().expect("residue below p"))
    }

    /// Integer `y` in `[0, p^k)` with `x y = 1 mod p^k`.
    pub fn invert_mod_pk(&self, k: u32) -> Result<BigInt> {
        if !self.is_unit() {
            return Err(Error::NotUnit(self.value.to_string()));
        }
        let modulus = self.ctx.pow(k);
        if modulus.is_one() {
            return Ok(BigInt::zero());
        }
        let num_inv = self
            .value
            .numer()
            .modinv(&modulus)
            .expect("unit numerator is invertible");
        Ok((self.value.denom() * num_inv).mod_floor(&modulus))
    }

    pub fn recip(&self) -> PadicScalar {
        self.ctx.scalar(self.value.recip())
    }

    /// Integer power, negative exponents allowed for nonzero `x`.
    pub fn powi(&self, k: i64) -> PadicScalar {
        let base = if k < 0 { self.value.recip() } else { self.value.clone() };
        self.ctx.scalar(num_traits::pow(base, k.unsigned_abs() as usize))
    }

    fn same_ctx(&self, other: &PadicScalar) {
        assert_eq!(
            self.ctx, other.ctx,
            "p-adic scalars over different primes cannot be combined"
        );
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a PadicScalar> for &'a PadicScalar {
            type Output = PadicScalar;
            fn $method(self, rhs: &'a PadicScalar) -> PadicScalar {
                self.same_ctx(rhs);
                PadicScalar { value: &self.value $op &rhs.value, ctx: self.ctx }
            }
        }
        impl $tr<PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $method(self, rhs: PadicScalar) -> PadicScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $method(self, rhs: &'a PadicScalar) -> PadicScalar {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar { value: -self.value, ctx: self.ctx }
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar { value: -&self.value, ctx: self.ctx }
    }
}

/// A canonical representative of `Q_p / p^k Z_p`: a finite digit sum
/// `sum_{l=-delta}^{k-1} n_l p^l` with digits in `0..p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetRepresentative {
    value: BigRational,
    modulus_exponent: i64,
    ctx: PrimeContext,
}

impl CosetRepresentative {
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn modulus_exponent(&self) -> i64 {
        self.modulus_exponent
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn to_scalar(&self) -> PadicScalar {
        self.ctx.scalar(self.value.clone())
    }

    /// `delta`: the number of negative-exponent digit positions in use.
    pub fn depth(&self) -> i64 {
        if self.value.is_zero() {
            0
        } else {
            self.ctx.split_power(self.value.denom()).0
        }
    }

    /// Digits `(l, n_l)` for `l` from `-depth` up to `k - 1`, zeros included.
    pub fn digits(&self) -> Vec<(i64, u64)> {
        let low = -self.depth().max(0);
        let high = self.modulus_exponent;
        if high <= low {
            return Vec::new();
        }
        // value * p^depth is an integer in [0, p^{high - low})
        let scaled = (&self.value * self.ctx.pow_rational(-low)).to_integer();
        let p = self.ctx.big();
        let mut rest = scaled;
        let mut out = Vec::with_capacity((high - low) as usize);
        for l in low..high {
            let (q, r) = rest.div_rem(&p);
            out.push((l, r.to_u64().expect("digit below p")));
            rest = q;
        }
        out
    }
}

impl fmt::Display for CosetRepresentative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// True when `x` is already the canonical representative of its class mod `p^k Z_p`.
pub fn is_canonical(x: &PadicScalar, k: i64) -> bool {
    x.coset_representative(k).value() == x.value()
}

/// All canonical representatives of `p^{-depth} Z_p / p^k Z_p`, i.e. digit sums
/// over positions `-depth..k`, in increasing numeric order.
pub fn transversal(ctx: PrimeContext, depth: i64, k: i64) -> Vec<BigRational> {
    if k + depth <= 0 {
        return vec![BigRational::zero()];
    }
    let count = ctx.pow((k + depth) as u32).to_u64().expect("transversal fits in memory");
    let den = ctx.pow_rational(-depth);
    (0..count)
        .map(|t| BigRational::from_integer(BigInt::from(t)) * &den)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn prime_checked() {
        assert!(PrimeContext::new(2).is_ok());
        assert!(PrimeContext::new(7).is_ok());
        assert_eq!(PrimeContext::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PrimeContext::new(9), Err(Error::NotPrime(9)));
        assert_eq!(PrimeContext::new(0), Err(Error::NotPrime(0)));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(ctx(2).int(12).valuation(), Valuation::Finite(2));
        assert_eq!(ctx(5).int(0).valuation(), Valuation::Infinite);
        assert_eq!(ctx(3).ratio(7, 9).valuation(), Valuation::Finite(-2));
        assert!(Valuation::Finite(100) < Valuation::Infinite);
    }

    #[test]
    fn norm_examples() {
        let c = ctx(5);
        assert_eq!(c.int(5).norm(), BigRational::new(1.into(), 5.into()));
        assert_eq!(c.int(0).norm(), BigRational::zero());
        assert_eq!(ctx(2).ratio(3, 4).norm(), BigRational::from_integer(4.into()));
    }

    #[test]
    fn unit_part_examples() {
        assert!(ctx(3).int(9).unit_part().unwrap().is_one());
        assert_eq!(ctx(3).ratio(2, 3).unit_part().unwrap(), ctx(3).int(2));
        assert_eq!(ctx(3).int(18).unit_part().unwrap(), ctx(3).int(2));
        assert_eq!(ctx(3).int(0).unit_part(), Err(Error::ZeroUnitPart));
    }

    #[test]
    fn fractional_part_examples() {
        assert_eq!(ctx(2).ratio(7, 4).fractional_part().value(), ctx(2).ratio(3, 4).value());
        assert!(ctx(5).int(5).fractional_part().value().is_zero());
        assert_eq!(ctx(3).ratio(1, 3).fractional_part().value(), ctx(3).ratio(1, 3).value());
        // non p-power denominators still have a finite fractional part: 1/6 = 1/3 * 1/2
        // and 1/2 = -1 mod 3, so {1/6}_3 = 2/3
        assert_eq!(ctx(3).ratio(1, 6).fractional_part().value(), ctx(3).ratio(2, 3).value());
        assert_eq!(ctx(3).ratio(-1, 3).fractional_part().value(), ctx(3).ratio(2, 3).value());
    }

    #[test]
    fn coset_representative_examples() {
        let c = ctx(3);
        let x = c.ratio(1, 3) + c.int(3) + c.int(9);
        assert_eq!(x.coset_representative(1).value(), c.ratio(1, 3).value());
        assert_eq!(ctx(2).int(4).coset_representative(3).value(), ctx(2).int(4).value());
        assert!(c.int(0).coset_representative(4).value().is_zero());
        assert!(c.int(0).coset_representative(-4).value().is_zero());
        // modulus below Z_p: 1/3 + 1/9 mod 3^{-1} Z_3 keeps only the 1/9 digit
        let y = c.ratio(1, 3) + c.ratio(1, 9);
        assert_eq!(y.coset_representative(-1).value(), c.ratio(1, 9).value());
    }

    #[test]
    fn digits_roundtrip() {
        let c = ctx(3);
        let r = c.ratio(16, 9).coset_representative(2);
        // 16/9 = 1/9 + 2/3 + 1 + 0*3
        assert_eq!(r.digits(), vec![(-2, 1), (-1, 2), (0, 1), (1, 0)]);
        assert_eq!(r.depth(), 2);
    }

    #[test]
    fn mod_p_examples() {
        assert_eq!(ctx(3).int(7).mod_p().unwrap(), 1);
        assert_eq!(ctx(3).ratio(1, 2).mod_p().unwrap(), 2);
        assert_eq!(ctx(3).ratio(3, 4).mod_p().unwrap(), 0);
        assert!(matches!(ctx(3).ratio(1, 3).mod_p(), Err(Error::NotPadicInteger(_))));
    }

    #[test]
    fn invert_mod_pk_examples() {
        assert_eq!(ctx(5).int(1).invert_mod_pk(3).unwrap(), BigInt::from(1));
        assert_eq!(ctx(3).int(2).invert_mod_pk(2).unwrap(), BigInt::from(5));
        assert_eq!(ctx(3).int(4).invert_mod_pk(1).unwrap(), BigInt::from(1));
        assert_eq!(ctx(3).ratio(1, 2).invert_mod_pk(2).unwrap(), BigInt::from(2));
        assert!(matches!(ctx(3).int(3).invert_mod_pk(1), Err(Error::NotUnit(_))));
    }

    #[test]
    fn parse_literals() {
        let c = ctx(3);
        assert_eq!(c.parse("-3/4").unwrap(), c.ratio(-3, 4));
        assert_eq!(c.parse("12").unwrap(), c.int(12));
        assert_eq!(c.parse(" 2/6 ").unwrap(), c.ratio(1, 3));
        assert!(c.parse("1/0").is_err());
        assert!(c.parse("x").is_err());
        assert!(c.parse("1/2/3").is_err());
    }

    #[test]
    fn transversal_counts() {
        let c = ctx(3);
        let t = transversal(c, 2, 0);
        assert_eq!(t.len(), 9);
        assert!(t.iter().all(|v| is_canonical(&c.scalar(v.clone()), 0)));
        assert_eq!(transversal(c, 1, 1).len(), 9);
    }

    fn small_rational() -> impl Strategy<Value = (i64, u32, i64)> {
        // numerator, p-power in denominator, unit cofactor in denominator
        (-500i64..500, 0u32..4, prop_oneof![Just(1i64), Just(2), Just(5), Just(7)])
    }

    fn build(c: PrimeContext, (n, e, d): (i64, u32, i64)) -> PadicScalar {
        let den = BigInt::from(d) * c.pow(e);
        c.scalar(BigRational::new(BigInt::from(n), den))
    }

    proptest! {
        #[test]
        fn ultrametric(x in small_rational(), y in small_rational()) {
            let c = ctx(3);
            let (x, y) = (build(c, x), build(c, y));
            let s = &x + &y;
            let (nx, ny, ns) = (x.norm(), y.norm(), s.norm());
            let m = nx.clone().max(ny.clone());
            prop_assert!(ns <= m);
            if nx != ny {
                prop_assert_eq!(ns, m);
            }
        }

        #[test]
        fn norm_multiplicative(x in small_rational(), y in small_rational()) {
            let c = ctx(3);
            let (x, y) = (build(c, x), build(c, y));
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
        }

        #[test]
        fn fractional_part_laws(x in small_rational(), k in -3i64..4) {
            let c = ctx(3);
            let x = build(c, x);
            let fr = x.fractional_part();
            prop_assert!((fr.to_scalar() - &x).is_padic_integer());
            prop_assert_eq!(fr.to_scalar().fractional_part(), fr.clone());
            let rep = x.coset_representative(k);
            prop_assert!((rep.to_scalar() - &x).norm_at_most(-k));
            prop_assert!(is_canonical(&rep.to_scalar(), k));
        }

        #[test]
        fn unit_decomposition(x in small_rational()) {
            let c = ctx(5);
            let x = build(c, x);
            prop_assume!(!x.is_zero());
            let u = x.unit_part().unwrap();
            prop_assert!(u.is_unit());
            let v = x.valuation().finite().unwrap();
            prop_assert_eq!(c.pow_scalar(v) * u, x);
        }

        #[test]
        fn inverse_mod_pk(x in small_rational(), k in 1u32..5) {
            let c = ctx(3);
            let x = build(c, x);
            prop_assume!(x.is_unit());
            let y = x.invert_mod_pk(k).unwrap();
            let prod = &x * &c.scalar(BigRational::from_integer(y));
            prop_assert_eq!(prod.residue_mod_pk(k).unwrap(), BigInt::from(1));
        }
    }
}
