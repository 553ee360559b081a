//! Multiresolution checks: shifts of the unit-ball indicator and the wavelet
//! spaces spanned by orbit elements at a fixed dilation exponent.
//!
//! Labels follow the orbit exponent: the space built from orbit elements with
//! dilation `p^gamma` holds wavelets at scales `gamma_t - gamma`, i.e. it is the
//! space usually written `W_{-gamma}`. Reports carry [`SCALE_CONVENTION`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::affine::{act_on_function, AffineElement, StabilizerSpec, FLOAT_TOLERANCE};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::frame::{orbit_element, OrbitIndex};
use crate::padic::{transversal, CosetRepresentative, PrimeContext};
use crate::wavelet::{TestFunction, WaveletIndex};

pub const SCALE_CONVENTION: &str = "orbit-exponent: label gamma spans W_{-gamma}";

/// Gram matrix of `Omega(|x - n|_p)` over the given shifts.
///
/// Two unit balls either coincide or are disjoint, so every entry is 0 or 1.
pub fn scaling_shift_gram(ctx: PrimeContext, shifts: &[CosetRepresentative]) -> Result<Vec<Vec<BigRational>>> {
    for s in shifts {
        if s.ctx().p() != ctx.p() {
            return Err(Error::PrimeMismatch(ctx.p(), s.ctx().p()));
        }
    }
    Ok(shifts
        .iter()
        .map(|a| {
            shifts
                .iter()
                .map(|b| {
                    if (&a.to_scalar() - &b.to_scalar()).norm_at_most(0) {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect())
}

/// All canonical shifts with denominator dividing `p^depth`.
pub fn canonical_shifts(ctx: PrimeContext, depth: i64) -> Vec<CosetRepresentative> {
    transversal(ctx, depth, 0)
        .into_iter()
        .map(|n| ctx.scalar(n).coset_representative(0))
        .collect()
}

pub fn is_identity_matrix(m: &[Vec<BigRational>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.len() == m.len()
            && row
                .iter()
                .enumerate()
                .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
    })
}

/// Generators of one wavelet space on a truncated grid.
#[derive(Clone, Debug)]
pub struct SpanProbe<C> {
    pub gamma: i64,
    pub labels: Vec<OrbitIndex>,
    pub generators: Vec<TestFunction<C>>,
}

impl<C: Coefficient> SpanProbe<C> {
    /// Orbit elements `(gamma, n, J)` for every unit `J < p^{gamma_A}` and every
    /// translation `n` with denominator dividing `p^truncation`.
    pub fn new(f: &TestFunction<C>, spec: &StabilizerSpec, gamma: i64, truncation: i64) -> Result<Self> {
        let ctx = spec.ctx();
        let p = ctx.p();
        let bound = p
            .checked_pow(spec.gamma_a() as u32)
            .ok_or_else(|| Error::Precondition("p^gamma_A does not fit in 64 bits".to_string()))?;
        let translations = transversal(ctx, truncation, 1 - spec.gamma_0());
        let mut labels = Vec::new();
        let mut generators = Vec::new();
        for big_j in (1..bound).filter(|j| j % p != 0) {
            for n in &translations {
                let idx = OrbitIndex::new(spec, gamma, &ctx.scalar(n.clone()), big_j)?;
                generators.push(orbit_element(f, spec, &idx)?);
                labels.push(idx);
            }
        }
        Ok(SpanProbe { gamma, labels, generators })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Cross-Gram summary of two wavelet spaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramSummary {
    pub gamma_1: i64,
    pub gamma_2: i64,
    pub truncation: i64,
    pub generators_1: usize,
    pub generators_2: usize,
    pub orthogonal: bool,
    pub nonzero_entries: usize,
    pub max_abs_entry: f64,
    pub convention: &'static str,
}

fn vanishes<C: Coefficient>(c: &C) -> bool {
    if C::EXACT {
        c.is_zero()
    } else {
        c.to_complex().norm() <= FLOAT_TOLERANCE
    }
}

/// Inner products between every generator of the two spaces. Entries are
/// accumulated through an index of shared wavelet terms, so pairs without a
/// common term are never visited.
pub fn wavelet_space_gram<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    gamma_1: i64,
    gamma_2: i64,
    truncation: i64,
) -> Result<GramSummary> {
    let first = SpanProbe::new(f, spec, gamma_1, truncation)?;
    let second = SpanProbe::new(f, spec, gamma_2, truncation)?;
    let mut by_index: HashMap<&WaveletIndex, Vec<(usize, &C)>> = HashMap::new();
    for (k, h) in second.generators.iter().enumerate() {
        for (idx, c) in h.terms() {
            by_index.entry(idx).or_default().push((k, c));
        }
    }
    let ctx = spec.ctx();
    let mut nonzero_entries = 0;
    let mut max_abs_entry = 0f64;
    for g in &first.generators {
        let mut row: BTreeMap<usize, C> = BTreeMap::new();
        for (idx, c) in g.terms() {
            for (k, d) in by_index.get(idx).into_iter().flatten() {
                let entry = row.entry(*k).or_insert_with(|| C::zero(ctx));
                *entry += c.clone() * d.conj();
            }
        }
        for v in row.values().filter(|v| !vanishes(*v)) {
            nonzero_entries += 1;
            max_abs_entry = max_abs_entry.max(v.to_complex().norm());
        }
    }
    Ok(GramSummary {
        gamma_1,
        gamma_2,
        truncation,
        generators_1: first.len(),
        generators_2: second.len(),
        orthogonal: nonzero_entries == 0,
        nonzero_entries,
        max_abs_entry,
        convention: SCALE_CONVENTION,
    })
}

/// Coefficients `x` with `target = sum x_k generators[k]`, or `None` when the
/// target is outside the span. Only generators connected to the target through
/// shared wavelet terms enter the elimination.
pub fn solve_in_span<C: Coefficient>(generators: &[TestFunction<C>], target: &TestFunction<C>) -> Option<Vec<C>> {
    let ctx = target.ctx();
    let mut touching: HashMap<&WaveletIndex, Vec<usize>> = HashMap::new();
    for (k, g) in generators.iter().enumerate() {
        for idx in g.terms().keys() {
            touching.entry(idx).or_default().push(k);
        }
    }
    let mut rows: BTreeSet<&WaveletIndex> = target.terms().keys().collect();
    let mut cols: BTreeSet<usize> = BTreeSet::new();
    let mut frontier: Vec<&WaveletIndex> = rows.iter().copied().collect();
    while let Some(idx) = frontier.pop() {
        for &k in touching.get(idx).into_iter().flatten() {
            if cols.insert(k) {
                for other in generators[k].terms().keys() {
                    if rows.insert(other) {
                        frontier.push(other);
                    }
                }
            }
        }
    }
    let rows: Vec<&WaveletIndex> = rows.into_iter().collect();
    let cols: Vec<usize> = cols.into_iter().collect();
    let zero = C::zero(ctx);
    let mut m: Vec<Vec<C>> = rows
        .iter()
        .map(|idx| {
            let mut row: Vec<C> = cols
                .iter()
                .map(|&k| generators[k].coeff(idx).cloned().unwrap_or_else(|| zero.clone()))
                .collect();
            row.push(target.coeff(idx).cloned().unwrap_or_else(|| zero.clone()));
            row
        })
        .collect();

    let width = cols.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let pivot = if C::EXACT {
            (r..m.len()).find(|&i| !m[i][c].is_zero())
        } else {
            (r..m.len())
                .filter(|&i| m[i][c].to_complex().norm() > FLOAT_TOLERANCE)
                .max_by(|&a, &b| m[a][c].to_complex().norm().total_cmp(&m[b][c].to_complex().norm()))
        };
        let Some(pr) = pivot else { continue };
        m.swap(r, pr);
        let inv = m[r][c].inverse()?;
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = x.clone() - factor.clone() * y.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !vanishes(&row[width])) {
        return None;
    }
    let mut x = vec![zero; generators.len()];
    for (i, &c) in pivots.iter().enumerate() {
        x[cols[c]] = m[i][width].clone();
    }
    Some(x)
}

/// Checks that the dilation `G(p, 0)` carries `h`, a member of the space at
/// orbit exponent `gamma`, into the space at `gamma + 1`.
///
/// Returns a precondition error when `h` is not in the truncated span at `gamma`.
pub fn scaling_relation_check<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    h: &TestFunction<C>,
    gamma: i64,
    truncation: i64,
) -> Result<bool> {
    let here = SpanProbe::new(f, spec, gamma, truncation)?;
    if solve_in_span(&here.generators, h).is_none() {
        return Err(Error::Precondition(format!(
            "function is not in the span of the orbit generators at gamma = {gamma}"
        )));
    }
    let there = SpanProbe::new(f, spec, gamma + 1, truncation)?;
    let dilated = act_on_function(&dilation(spec.ctx()), h);
    Ok(solve_in_span(&there.generators, &dilated).is_some())
}

fn dilation(ctx: PrimeContext) -> AffineElement {
    AffineElement::new(ctx.int(ctx.p() as i64), ctx.zero()).expect("p is nonzero")
}

/// True when `G(p, 0)` sends the generator labelled `(gamma, n, J)` to the one
/// labelled `(gamma + 1, n, J)` for every label on the grid.
pub fn dilation_maps_generators<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    gamma: i64,
    truncation: i64,
) -> Result<bool> {
    let here = SpanProbe::new(f, spec, gamma, truncation)?;
    let there = SpanProbe::new(f, spec, gamma + 1, truncation)?;
    let d = dilation(spec.ctx());
    Ok(here.len() == there.len()
        && here.generators.iter().zip(&there.generators).zip(here.labels.iter().zip(&there.labels)).all(
            |((g, h), (a, b))| {
                a.n() == b.n() && a.big_j() == b.big_j() && act_on_function(&d, g).approx_eq(h, FLOAT_TOLERANCE)
            },
        ))
}

/// Smallest `k <= max_gap + 1` such that every gap `k..=max_gap` between
/// orbit exponents gave an orthogonal cross-Gram.
pub fn observed_orthogonality_threshold<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    truncation: i64,
    max_gap: i64,
) -> Result<i64> {
    let mut threshold = 0;
    for gap in 1..=max_gap {
        if !wavelet_space_gram(f, spec, 0, gap, truncation)?.orthogonal {
            threshold = gap + 1;
        }
    }
    Ok(threshold)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MraReport {
    pub gram_identity: bool,
    pub gram_shifts: usize,
    pub scale_spread: i64,
    pub orthogonality_threshold_observed: i64,
    pub gaps_checked: i64,
    pub truncation: i64,
    pub dilation_maps_generators: bool,
    pub convention: &'static str,
    pub scope: &'static str,
}

/// Shift Gram over denominators up to `p^3`, orthogonality threshold over gaps
/// up to `scale_spread + 2`, and the dilation check at `gamma = 0`.
pub fn mra_report<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec, truncation: i64) -> Result<MraReport> {
    let ctx = spec.ctx();
    let shifts = canonical_shifts(ctx, 3);
    let gram = scaling_shift_gram(ctx, &shifts)?;
    let spread = f.scale_spread();
    let gaps = spread + 2;
    Ok(MraReport {
        gram_identity: is_identity_matrix(&gram),
        gram_shifts: shifts.len(),
        scale_spread: spread,
        orthogonality_threshold_observed: observed_orthogonality_threshold(f, spec, truncation, gaps)?,
        gaps_checked: gaps,
        truncation,
        dilation_maps_generators: dilation_maps_generators(f, spec, 0, truncation)?,
        convention: SCALE_CONVENTION,
        scope: "truncated grids; density and trivial intersection are not checked",
    })
}

/// The canonical shift `num / p^den_exp mod 1`.
pub fn shift(ctx: PrimeContext, num: i64, den_exp: u32) -> CosetRepresentative {
    ctx.scalar(BigRational::new(BigInt::from(num), ctx.pow(den_exp))).coset_representative(0)
}
