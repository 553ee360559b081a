//! Coefficient fields for wavelet expansions.
//!
//! Exact mode uses [`CycloNumber`]; float mode uses [`Complex64`]. Every
//! generic routine in the crate is written against [`Coefficient`], so the two
//! modes cannot be mixed by accident.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycloNumber;
use crate::error::{Error, Result};
use crate::padic::{parse_rational, PrimeContext};

pub trait Coefficient:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    /// True when arithmetic is exact and equality is meaningful.
    const EXACT: bool;

    fn zero(ctx: PrimeContext) -> Self;
    fn one(ctx: PrimeContext) -> Self;
    /// `exp(2 pi i m / p)`.
    fn root_of_unity(m: i64, ctx: PrimeContext) -> Self;
    fn from_rational(q: &BigRational, ctx: PrimeContext) -> Self;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
    fn to_complex(&self) -> Complex64;
    /// Exact equality in exact mode; relative closeness otherwise.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
    fn from_literal(lit: &CoeffLiteral, ctx: PrimeContext) -> Result<Self>;
    fn to_literal(&self) -> CoeffLiteral;
    /// Human-readable form used in reports.
    fn render(&self) -> String;

    fn from_i64(v: i64, ctx: PrimeContext) -> Self {
        Self::from_rational(&BigRational::from_integer(v.into()), ctx)
    }

    fn norm_sq(&self) -> Self {
        self.clone() * self.conj()
    }
}

/// Serialized coefficient: a sparse cyclotomic combination or a complex pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffLiteral {
    Cyclo { zeta_powers: Vec<(i64, String)> },
    Complex { re: f64, im: f64 },
}

impl CoeffLiteral {
    pub fn one() -> Self {
        CoeffLiteral::Cyclo { zeta_powers: vec![(0, "1".to_string())] }
    }
}

impl Coefficient for CycloNumber {
    const EXACT: bool = true;

    fn zero(ctx: PrimeContext) -> Self {
        CycloNumber::zero(ctx)
    }

    fn one(ctx: PrimeContext) -> Self {
        CycloNumber::one(ctx)
    }

    fn root_of_unity(m: i64, ctx: PrimeContext) -> Self {
        CycloNumber::root_of_unity(ctx, m)
    }

    fn from_rational(q: &BigRational, ctx: PrimeContext) -> Self {
        CycloNumber::from_rational(ctx, q.clone())
    }

    fn is_zero(&self) -> bool {
        CycloNumber::is_zero(self)
    }

    fn conj(&self) -> Self {
        CycloNumber::conj(self)
    }

    fn inverse(&self) -> Option<Self> {
        CycloNumber::inverse(self)
    }

    fn to_complex(&self) -> Complex64 {
        CycloNumber::to_complex(self)
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn from_literal(lit: &CoeffLiteral, ctx: PrimeContext) -> Result<Self> {
        match lit {
            CoeffLiteral::Cyclo { zeta_powers } => {
                let terms = zeta_powers
                    .iter()
                    .map(|(m, s)| parse_rational(s).map(|q| (*m, q)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(CycloNumber::from_zeta_powers(ctx, terms))
            }
            CoeffLiteral::Complex { .. } => Err(Error::ModeMismatch(
                "complex coefficient given in exact mode".to_string(),
            )),
        }
    }

    fn to_literal(&self) -> CoeffLiteral {
        CoeffLiteral::Cyclo {
            zeta_powers: self.zeta_powers().into_iter().map(|(m, c)| (m, c.to_string())).collect(),
        }
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn norm_sq(&self) -> Self {
        CycloNumber::norm_sq(self)
    }
}

impl Coefficient for Complex64 {
    const EXACT: bool = false;

    fn zero(_ctx: PrimeContext) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one(_ctx: PrimeContext) -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn root_of_unity(m: i64, ctx: PrimeContext) -> Self {
        let p = ctx.p() as i64;
        Complex64::from_polar(1.0, 2.0 * PI * m.rem_euclid(p) as f64 / p as f64)
    }

    fn from_rational(q: &BigRational, _ctx: PrimeContext) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(Complex64::inv(self))
        }
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.norm()).max(other.norm());
        (self - other).norm() <= tol * scale
    }

    fn from_literal(lit: &CoeffLiteral, ctx: PrimeContext) -> Result<Self> {
        match lit {
            CoeffLiteral::Complex { re, im } => Ok(Complex64::new(*re, *im)),
            cyclo => CycloNumber::from_literal(cyclo, ctx).map(|c| c.to_complex()),
        }
    }

    fn to_literal(&self) -> CoeffLiteral {
        CoeffLiteral::Complex { re: self.re, im: self.im }
    }

    fn render(&self) -> String {
        format!("{:.12e}{:+.12e}i", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn literal_roundtrip() {
        let c = ctx(5);
        let lit: CoeffLiteral =
            serde_json::from_str(r#"{"zeta_powers": [[0, "1/2"], [3, "-2"], [5, "1"]]}"#).unwrap();
        let x = CycloNumber::from_literal(&lit, c).unwrap();
        // zeta^5 = 1 folds into the constant term
        assert_eq!(x, CycloNumber::from_zeta_powers(c, [(0, BigRational::new(3.into(), 2.into())), (3, BigRational::from_integer((-2).into()))]));
        assert_eq!(CycloNumber::from_literal(&x.to_literal(), c).unwrap(), x);
    }

    #[test]
    fn complex_literal_rejected_in_exact_mode() {
        let lit: CoeffLiteral = serde_json::from_str(r#"{"re": 1.0, "im": 0.5}"#).unwrap();
        assert!(matches!(CycloNumber::from_literal(&lit, ctx(3)), Err(Error::ModeMismatch(_))));
        assert_eq!(Complex64::from_literal(&lit, ctx(3)).unwrap(), Complex64::new(1.0, 0.5));
    }

    #[test]
    fn float_roots_match_exact_roots() {
        for p in [2u64, 3, 5, 7] {
            for m in -3..10 {
                let e = <CycloNumber as Coefficient>::root_of_unity(m, ctx(p)).to_complex();
                let f = <Complex64 as Coefficient>::root_of_unity(m, ctx(p));
                assert!((e - f).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn float_approx_eq_is_relative() {
        let a = Complex64::new(1e6, 0.0);
        let b = Complex64::new(1e6 + 1e-4, 0.0);
        assert!(a.approx_eq(&b, 1e-9));
        assert!(!a.approx_eq(&Complex64::new(1e6 + 1.0, 0.0), 1e-9));
    }
}
