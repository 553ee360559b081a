//! Exact arithmetic in the cyclotomic field `Q(zeta_p)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::PrimeContext;

/// An element `sum_k c_k zeta^k` of `Q(zeta_p)` in the power basis
/// `1, zeta, ..., zeta^{p-2}`.
///
/// For `p = 2` the basis is just `1` and `zeta = -1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloNumber {
    ctx: PrimeContext,
    coeffs: Vec<BigRational>,
}

impl CycloNumber {
    pub fn zero(ctx: PrimeContext) -> Self {
        CycloNumber { ctx, coeffs: vec![BigRational::zero(); basis_len(ctx)] }
    }

    pub fn one(ctx: PrimeContext) -> Self {
        Self::from_rational(ctx, BigRational::from_integer(BigInt::from(1)))
    }

    pub fn from_rational(ctx: PrimeContext, q: BigRational) -> Self {
        let mut out = Self::zero(ctx);
        out.coeffs[0] = q;
        out
    }

    pub fn from_i64(ctx: PrimeContext, v: i64) -> Self {
        Self::from_rational(ctx, BigRational::from_integer(BigInt::from(v)))
    }

    /// `zeta^{m mod p}`.
    pub fn root_of_unity(ctx: PrimeContext, m: i64) -> Self {
        let p = ctx.p() as i64;
        let mut wide = vec![BigRational::zero(); p as usize];
        wide[m.rem_euclid(p) as usize] = BigRational::from_integer(BigInt::from(1));
        Self::reduce(ctx, wide)
    }

    /// Builds `sum c * zeta^m` from `(m, c)` pairs; powers are taken mod `p`.
    pub fn from_zeta_powers<I>(ctx: PrimeContext, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let p = ctx.p() as i64;
        let mut wide = vec![BigRational::zero(); p as usize];
        for (m, c) in terms {
            wide[m.rem_euclid(p) as usize] += c;
        }
        Self::reduce(ctx, wide)
    }

    /// Builds the element from power-basis coefficients, padding with zeros.
    pub fn from_coeffs(ctx: PrimeContext, coeffs: Vec<BigRational>) -> Result<Self> {
        let len = basis_len(ctx);
        if coeffs.len() > len {
            return Err(Error::Precondition(format!(
                "expected at most {len} power-basis coefficients, got {}",
                coeffs.len()
            )));
        }
        let mut c = coeffs;
        c.resize(len, BigRational::zero());
        Ok(CycloNumber { ctx, coeffs: c })
    }

    /// Rewrites a coefficient vector over `1, zeta, ..., zeta^{p-1}` using
    /// `zeta^{p-1} = -(1 + zeta + ... + zeta^{p-2})`.
    fn reduce(ctx: PrimeContext, mut wide: Vec<BigRational>) -> Self {
        debug_assert_eq!(wide.len(), ctx.p() as usize);
        let top = wide.pop().expect("p >= 2");
        if !top.is_zero() {
            for c in wide.iter_mut() {
                *c -= &top;
            }
        }
        CycloNumber { ctx, coeffs: wide }
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// Sparse `(power, coefficient)` pairs of the canonical form.
    pub fn zeta_powers(&self) -> Vec<(i64, BigRational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as i64, c.clone()))
            .collect()
    }

    /// The Galois automorphism `zeta -> zeta^k`, `k` prime to `p`.
    pub fn galois(&self, k: i64) -> Self {
        let p = self.ctx.p() as i64;
        debug_assert!(k.rem_euclid(p) != 0, "galois exponent must be prime to p");
        let mut wide = vec![BigRational::zero(); p as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                wide[((i as i64) * k).rem_euclid(p) as usize] += c;
            }
        }
        Self::reduce(self.ctx, wide)
    }

    /// Complex conjugation, `zeta -> zeta^{p-1}`.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// `x * conj(x)`, an element of the real subfield.
    pub fn norm_sq(&self) -> Self {
        self * &self.conj()
    }

    /// The field norm down to `Q`: the product of all Galois conjugates.
    pub fn field_norm(&self) -> BigRational {
        let p = self.ctx.p() as i64;
        let mut acc = self.clone();
        for k in 2..p {
            acc = &acc * &self.galois(k);
        }
        debug_assert!(acc.as_rational().is_some());
        acc.coeffs[0].clone()
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        let norm = self.field_norm();
        if norm.is_zero() {
            return None;
        }
        let p = self.ctx.p() as i64;
        let mut acc = Self::one(self.ctx);
        for k in 2..p {
            acc = &acc * &self.galois(k);
        }
        Some(acc.scale(&norm.recip()))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        CycloNumber { ctx: self.ctx, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    /// `sum c_k exp(2 pi i k / p)` in double precision.
    pub fn to_complex(&self) -> Complex64 {
        let p = self.ctx.p() as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let w = c.to_f64().unwrap_or(f64::NAN);
                Complex64::from_polar(w, 2.0 * PI * k as f64 / p)
            })
            .sum()
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        Ok(self + rhs)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        Ok(self * rhs)
    }

    fn check(&self, rhs: &Self) -> Result<()> {
        if self.ctx == rhs.ctx {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.ctx.p(), rhs.ctx.p()))
        }
    }

    fn assert_same(&self, rhs: &Self) {
        if let Err(e) = self.check(rhs) {
            panic!("{e}");
        }
    }
}

fn basis_len(ctx: PrimeContext) -> usize {
    (ctx.p() - 1) as usize
}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclo<{}>({})", self.ctx.p(), self)
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.zeta_powers();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: &'a CycloNumber) -> CycloNumber {
        self.assert_same(rhs);
        CycloNumber {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: &'a CycloNumber) -> CycloNumber {
        self.assert_same(rhs);
        CycloNumber {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: &'a CycloNumber) -> CycloNumber {
        self.assert_same(rhs);
        let p = self.ctx.p() as usize;
        let mut wide = vec![BigRational::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    wide[(i + k) % p] += a * b;
                }
            }
        }
        CycloNumber::reduce(self.ctx, wide)
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber { ctx: self.ctx, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<CycloNumber> for CycloNumber {
            type Output = CycloNumber;
            fn $method(self, rhs: CycloNumber) -> CycloNumber {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a CycloNumber> for CycloNumber {
            type Output = CycloNumber;
            fn $method(self, rhs: &'a CycloNumber) -> CycloNumber {
                (&self).$method(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl AddAssign<&CycloNumber> for CycloNumber {
    fn add_assign(&mut self, rhs: &CycloNumber) {
        self.assert_same(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl AddAssign<CycloNumber> for CycloNumber {
    fn add_assign(&mut self, rhs: CycloNumber) {
        *self += &rhs;
    }
}
