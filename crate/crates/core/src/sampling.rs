//! Seeded generators for test functions and group elements.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{act_on_function, is_generic, AffineElement};
use crate::cyclotomic::CycloNumber;
use crate::padic::{transversal, PrimeContext};
use crate::wavelet::{TestFunction, WaveletIndex};

/// The finite grid random wavelet expansions are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomGrid {
    pub gamma_min: i64,
    pub gamma_max: i64,
    /// Translations have denominators dividing `p^max_depth`.
    pub max_depth: i64,
    pub min_terms: usize,
    pub max_terms: usize,
}

impl RandomGrid {
    /// `|gamma| <= 2`, denominators up to `p^2`, one to three terms.
    pub fn probe() -> Self {
        RandomGrid { gamma_min: -2, gamma_max: 2, max_depth: 2, min_terms: 1, max_terms: 3 }
    }
}

pub fn random_index<R: Rng + ?Sized>(rng: &mut R, ctx: PrimeContext, grid: &RandomGrid) -> WaveletIndex {
    let gamma = rng.gen_range(grid.gamma_min..=grid.gamma_max);
    let translations = transversal(ctx, grid.max_depth, 0);
    let n = translations.choose(rng).expect("nonempty transversal").clone();
    let j = rng.gen_range(1..ctx.p());
    WaveletIndex::new(gamma, &ctx.scalar(n), j).expect("grid points are canonical")
}

/// A nonzero `sum c_k zeta^k` with `c_k` in `-2..=2`.
pub fn random_cyclo<R: Rng + ?Sized>(rng: &mut R, ctx: PrimeContext) -> CycloNumber {
    loop {
        let terms = (0..ctx.p() as i64 - 1)
            .map(|k| (k, BigRational::from_integer(BigInt::from(rng.gen_range(-2i64..=2)))))
            .collect::<Vec<_>>();
        let c = CycloNumber::from_zeta_powers(ctx, terms);
        if !c.is_zero() {
            return c;
        }
    }
}

/// A nonempty random expansion on the grid.
pub fn random_function<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: PrimeContext,
    grid: &RandomGrid,
) -> TestFunction<CycloNumber> {
    loop {
        let count = rng.gen_range(grid.min_terms.max(1)..=grid.max_terms.max(1));
        let mut f = TestFunction::new(ctx);
        for _ in 0..count {
            let idx = random_index(rng, ctx, grid);
            let c = random_cyclo(rng, ctx);
            f.add_term(idx, c);
        }
        if !f.is_empty() {
            return f;
        }
    }
}

/// Resamples until the function passes the genericity check at its default depth.
pub fn random_generic_function<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: PrimeContext,
    grid: &RandomGrid,
) -> TestFunction<CycloNumber> {
    loop {
        let f = random_function(rng, ctx, grid);
        if is_generic(&f).unwrap_or(false) {
            return f;
        }
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, ctx: PrimeContext, bound: i64) -> i64 {
    let p = ctx.p() as i64;
    loop {
        let u = rng.gen_range(1..=bound);
        if u % p != 0 {
            return u;
        }
    }
}

/// `a = +-p^k u_1 / u_2` with `|k| <= 2`, and `b` a rational whose denominator
/// mixes a power of `p` with a small unit.
pub fn random_affine<R: Rng + ?Sized>(rng: &mut R, ctx: PrimeContext) -> AffineElement {
    let p = ctx.p() as i64;
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let k = rng.gen_range(-2i64..=2);
    let a = &ctx.pow_scalar(k) * &ctx.ratio(sign * random_unit(rng, ctx, p * p + 4), random_unit(rng, ctx, p + 3));
    let e = rng.gen_range(0i64..=3);
    let num = rng.gen_range(-p.pow(3)..=p.pow(3));
    let den = if rng.gen_bool(0.7) { 1 } else { random_unit(rng, ctx, 4) };
    let b = &ctx.pow_scalar(-e) * &ctx.ratio(num, den);
    AffineElement::new(a, b).expect("a is nonzero")
}

/// `c_1 psi(j p^{-1}(x - 1)) + c_2 psi(j p^{-1}(-x - 1))` up to a common
/// normalisation: the images of `psi_{0,0,1}` under `(p/j, 1)` and `(-p/j, -1)`.
pub fn reflection_pair(ctx: PrimeContext, j: i64, c_1: CycloNumber, c_2: CycloNumber) -> TestFunction<CycloNumber> {
    let psi = TestFunction::wavelet(
        WaveletIndex::new(0, &ctx.zero(), 1).expect("mother wavelet index"),
    );
    let p = ctx.p() as i64;
    let left = AffineElement::new(ctx.ratio(p, j), ctx.one()).expect("nonzero");
    let right = AffineElement::new(ctx.ratio(-p, j), ctx.int(-1)).expect("nonzero");
    act_on_function(&left, &psi)
        .scaled(&c_1)
        .plus(&act_on_function(&right, &psi).scaled(&c_2))
}
