//! Orbits of a test function under the affine group and the tight-frame
//! identity `sum_idx |<g, f^(idx)>|^2 = A ||g||^2`.
//!
//! Orbit elements are `f^(gamma,n,J) = G(p^gamma J, p^gamma J n) f` with
//! `n` in `Q_p / p^{1-gamma_0} Z_p` and `J` a unit mod `p^{gamma_A}`; the
//! closed-form bound is `A = sum_t |C_t|^2 p^{gamma_A - gamma_0 + gamma_t}`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::affine::{
    act_on_function, default_genericity_depth, genericity_check, stabilizer_spec, AffineElement,
    StabilizerSpec, FLOAT_TOLERANCE,
};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::kernel;
use crate::padic::{transversal, CosetRepresentative, PadicScalar, Valuation};
use crate::wavelet::TestFunction;

/// Orbit label `(gamma, n, J)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitIndex {
    gamma: i64,
    n: CosetRepresentative,
    big_j: u64,
}

impl OrbitIndex {
    /// Validates `n` as canonical mod `p^{1-gamma_0}` and `J` as a unit below `p^{gamma_A}`.
    pub fn new(spec: &StabilizerSpec, gamma: i64, n: &PadicScalar, big_j: u64) -> Result<Self> {
        let ctx = spec.ctx();
        let bound = dilation_bound(spec)?;
        if big_j == 0 || big_j >= bound || big_j.is_multiple_of(ctx.p()) {
            return Err(Error::InvalidOrbitIndex(format!(
                "J = {big_j} is not a unit in 1..{bound}"
            )));
        }
        let k = 1 - spec.gamma_0();
        let rep = n.coset_representative(k);
        if rep.value() != n.value() {
            return Err(Error::InvalidOrbitIndex(format!(
                "n = {n} is not canonical modulo p^{k}"
            )));
        }
        Ok(OrbitIndex { gamma, n: rep, big_j })
    }

    /// The identity label `(0, 0, 1)`.
    pub fn identity(spec: &StabilizerSpec) -> Self {
        OrbitIndex { gamma: 0, n: spec.ctx().zero().coset_representative(1 - spec.gamma_0()), big_j: 1 }
    }

    pub fn gamma(&self) -> i64 {
        self.gamma
    }

    pub fn n(&self) -> &CosetRepresentative {
        &self.n
    }

    pub fn big_j(&self) -> u64 {
        self.big_j
    }

    /// The group element `(p^gamma J, p^gamma J n)`.
    pub fn group_element(&self) -> AffineElement {
        let ctx = self.n.ctx();
        let a = &ctx.pow_scalar(self.gamma) * &ctx.int(self.big_j as i64);
        let b = &a * &self.n.to_scalar();
        AffineElement::new(a, b).expect("p^gamma J is nonzero")
    }
}

impl fmt::Debug for OrbitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "orbit({}, {}, {})", self.gamma, self.n, self.big_j)
    }
}

/// How an orbit label is turned into a group element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitConvention {
    /// `G(p^gamma J, p^gamma J n)`, the canonical form.
    Scaled,
    /// `G(p^gamma J, p^gamma n)`.
    Plain,
}

/// `p^{gamma_A}` as a machine integer.
fn dilation_bound(spec: &StabilizerSpec) -> Result<u64> {
    let p = spec.ctx().p();
    p.checked_pow(spec.gamma_a() as u32).ok_or_else(|| {
        Error::Precondition(format!("p^gamma_A = {p}^{} does not fit in 64 bits", spec.gamma_a()))
    })
}

/// `f^(idx) = G(p^gamma J, p^gamma J n) f`.
pub fn orbit_element<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    idx: &OrbitIndex,
) -> Result<TestFunction<C>> {
    OrbitIndex::new(spec, idx.gamma, &idx.n.to_scalar(), idx.big_j)?;
    Ok(act_on_function(&idx.group_element(), f))
}

/// The label of the coset `g G_f`, so that `orbit_element(f, idx) = g f`.
///
/// `gamma = v(a)`, `J = a |a|_p mod p^{gamma_A}` and, with `a_1 = p^gamma J`
/// and `c = p^{-gamma_0} n_0`, `n = (b + a c) / a_1 - c mod p^{1-gamma_0}`.
pub fn orbit_index_of(g: &AffineElement, spec: &StabilizerSpec) -> OrbitIndex {
    let ctx = spec.ctx();
    let gamma = g.a().valuation().finite().expect("a is nonzero");
    let unit = g.a().unit_part().expect("a is nonzero");
    let big_j = unit
        .residue_mod_pk(spec.gamma_a() as u32)
        .expect("unit is a p-adic integer")
        .to_u64()
        .expect("p^gamma_A fits in 64 bits");
    let a1 = &ctx.pow_scalar(gamma) * &ctx.int(big_j as i64);
    let c = spec.anchor();
    let n = &(&(g.b() + &(g.a() * &c)) / &a1) - &c;
    OrbitIndex { gamma, n: n.coset_representative(1 - spec.gamma_0()), big_j }
}

/// `orbit_index_of` expressed in the requested convention.
pub fn orbit_index_in(g: &AffineElement, spec: &StabilizerSpec, convention: OrbitConvention) -> OrbitIndex {
    let idx = orbit_index_of(g, spec);
    match convention {
        OrbitConvention::Scaled => idx,
        OrbitConvention::Plain => {
            let ctx = spec.ctx();
            let n = &idx.n.to_scalar() * &ctx.int(idx.big_j as i64);
            OrbitIndex { n: n.coset_representative(1 - spec.gamma_0()), ..idx }
        }
    }
}

/// The group element for a label given in either convention.
pub fn orbit_group_element(idx: &OrbitIndex, convention: OrbitConvention) -> AffineElement {
    match convention {
        OrbitConvention::Scaled => idx.group_element(),
        OrbitConvention::Plain => {
            let ctx = idx.n.ctx();
            let a = &ctx.pow_scalar(idx.gamma) * &ctx.int(idx.big_j as i64);
            let b = &ctx.pow_scalar(idx.gamma) * &idx.n.to_scalar();
            AffineElement::new(a, b).expect("nonzero dilation")
        }
    }
}

/// Every orbit label whose element can overlap `g`.
///
/// For a term `t` of `f` and a term `s` of `g`, the image of `t` under
/// `(gamma, n, J)` is `s` exactly when `gamma = gamma_t - gamma_s`,
/// `J = j_t / j_s mod p` and `n = p^{-gamma_t}(n_s / J - n_t) mod p^{-gamma_t}`;
/// the remaining digits of `J` and `n` are free. Labels outside the union of
/// these solution sets give an exactly zero inner product.
pub fn relevant_orbit_indices<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    g: &TestFunction<C>,
) -> BTreeSet<OrbitIndex> {
    let ctx = spec.ctx();
    let p = ctx.p();
    let lifts = p.pow((spec.gamma_a() - 1) as u32);
    let k = 1 - spec.gamma_0();
    let mut out = BTreeSet::new();
    for t in f.terms().keys() {
        let free = transversal(ctx, 0, k + t.gamma());
        let step = ctx.pow_scalar(-t.gamma());
        for s in g.terms().keys() {
            let gamma = t.gamma() - s.gamma();
            let j_s_inv = ctx.int(s.j() as i64).invert_mod_pk(1).expect("unit");
            let j0 = (BigInt::from(t.j()) * j_s_inv).to_u64().expect("small") % p;
            for lift in 0..lifts {
                let big_j = j0 + p * lift;
                let j_scalar = ctx.int(big_j as i64);
                let base = &step * &(&(&s.n_scalar() / &j_scalar) - &t.n_scalar());
                let base = base.coset_representative(-t.gamma()).to_scalar();
                for r in &free {
                    let n = &base + &(&step * &ctx.scalar(r.clone()));
                    out.insert(OrbitIndex { gamma, n: n.coset_representative(k), big_j });
                }
            }
        }
    }
    out
}

/// Closed-form frame bound `A = sum_t |C_t|^2 p^{gamma_A - gamma_0 + gamma_t}`.
pub fn frame_bound<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec) -> Result<C> {
    if f.is_empty() {
        return Err(Error::EmptyFunction);
    }
    let ctx = f.ctx();
    let mut acc = C::zero(ctx);
    for (idx, c) in f.terms() {
        let weight = ctx.pow_rational(spec.gamma_a() - spec.gamma_0() + idx.gamma());
        acc += c.norm_sq() * C::from_rational(&weight, ctx);
    }
    Ok(acc)
}

/// `sum_idx |<g, f^(idx)>|^2` by explicit enumeration of the relevant labels.
pub fn orbit_sum_by_enumeration<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    g: &TestFunction<C>,
) -> (C, usize) {
    let ctx = f.ctx();
    let indices = relevant_orbit_indices(f, spec, g);
    let mut acc = C::zero(ctx);
    for idx in &indices {
        let fi = act_on_function(&idx.group_element(), f);
        acc += g.inner_product(&fi).norm_sq();
    }
    (acc, indices.len())
}

const MAX_ENUMERATED_LABELS: f64 = 1e8;

/// Upper bound on the number of labels `relevant_orbit_indices` would produce.
fn enumeration_size<C: Coefficient>(f: &TestFunction<C>, spec: &StabilizerSpec, g: &TestFunction<C>) -> f64 {
    let p = spec.ctx().p() as f64;
    let per_pair: f64 = f
        .terms()
        .keys()
        .map(|t| p.powi((spec.gamma_a() - 1 + (1 - spec.gamma_0() + t.gamma()).max(0)) as i32))
        .sum();
    per_pair * g.len() as f64
}

/// One evaluation of the frame identity for a fixed `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCheck<C> {
    pub lhs: C,
    pub expected: C,
    pub residual: C,
    /// Exact zero in exact mode; within `1e-9` of `A ||g||^2` in float mode.
    pub vanishes: bool,
    pub orbit_terms: u64,
}

/// Evaluates `sum_idx |<g, f^(idx)>|^2 - A ||g||^2`.
pub fn verify_tight_frame<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    g: &TestFunction<C>,
) -> Result<FrameCheck<C>> {
    let bound = frame_bound(f, spec)?;
    let (lhs, orbit_terms) = match kernel::orbit_sum(f, spec, g) {
        Some(sum) => (sum.lhs, sum.orbit_terms),
        None => {
            let estimate = enumeration_size(f, spec, g);
            if estimate > MAX_ENUMERATED_LABELS {
                return Err(Error::Precondition(format!(
                    "about {estimate:.3e} orbit labels to enumerate exceeds the limit {MAX_ENUMERATED_LABELS:.0e}"
                )));
            }
            let (lhs, count) = orbit_sum_by_enumeration(f, spec, g);
            (lhs, count as u64)
        }
    };
    let expected = bound * g.norm_sq();
    let residual = lhs.clone() - expected.clone();
    let vanishes = if C::EXACT {
        residual.is_zero()
    } else {
        residual.to_complex().norm() <= FLOAT_TOLERANCE * expected.to_complex().norm().max(1.0)
    };
    Ok(FrameCheck { lhs, expected, residual, vanishes, orbit_terms })
}

/// Counts `(J, n)` with `J = 1 mod p`, `J` mod `p^{gamma_A}`, `n` mod
/// `p^{1-gamma_0}` and `|J p^{gamma_1} n - (1 - J) n_1|_p <= 1`, by exhaustive
/// enumeration with exact arithmetic.
pub fn phase_fix_multiplicity(gamma_1: i64, n_1: &PadicScalar, spec: &StabilizerSpec) -> u64 {
    let ctx = spec.ctx();
    let p = ctx.p();
    let delta_1 = n_1.fractional_part().depth();
    let depth = 0.max(gamma_1).max(gamma_1 + delta_1) + 1;
    let grid = transversal(ctx, depth, 1 - spec.gamma_0());
    let lifts = p.pow((spec.gamma_a() - 1) as u32);
    let scale = ctx.pow_scalar(gamma_1);
    let mut count = 0;
    for lift in 0..lifts {
        let big_j = ctx.int((1 + p * lift) as i64);
        let drift = &(&ctx.one() - &big_j) * n_1;
        let lead = &big_j * &scale;
        for n in &grid {
            let v = &(&lead * &ctx.scalar(n.clone())) - &drift;
            if v.valuation() >= Valuation::Finite(0) {
                count += 1;
            }
        }
    }
    count
}

/// `p^{gamma_A - gamma_0 + gamma_1}` when it is an integer.
pub fn expected_multiplicity(gamma_1: i64, spec: &StabilizerSpec) -> Option<u64> {
    let e = spec.gamma_a() - spec.gamma_0() + gamma_1;
    if e < 0 {
        None
    } else {
        spec.ctx().p().checked_pow(e as u32)
    }
}

/// Which branch of the reparametrisation applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReparametrizationCase {
    /// `gamma_0 <= 1`: translates `f((x - m)/J)` with `m` in `Z_p / p^{1-gamma_0} Z_p`.
    Translates,
    /// `gamma_0 >= 2`: dilates `f(x / J)`, the orbit counted `p^{gamma_0 - 1}` times.
    Dilates,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember<C> {
    pub big_j: u64,
    pub shift: u64,
    pub function: TestFunction<C>,
}

/// A finite family whose dilates by `p^gamma` and translates by `Q_p / Z_p`
/// recover the orbit, with the given copy multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparametrization<C> {
    pub case: ReparametrizationCase,
    pub multiplicity: u64,
    pub members: Vec<FamilyMember<C>>,
}

/// Rewrites the orbit of a generic `f` in wavelet-frame form.
pub fn reparametrize_wavelet_frame<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
) -> Result<Reparametrization<C>> {
    let depth = default_genericity_depth(f, spec);
    let verdict = genericity_check(f, depth)?;
    if !verdict.generic_up_to_depth {
        return Err(Error::NotGeneric { depth, witnesses: verdict.witness_count });
    }
    let ctx = f.ctx();
    let p = ctx.p();
    let bound = dilation_bound(spec)?;
    let units: Vec<u64> = (1..bound).filter(|j| j % p != 0).collect();
    let gamma_0 = spec.gamma_0();
    let (case, shifts, multiplicity) = if gamma_0 <= 1 {
        (ReparametrizationCase::Translates, p.pow((1 - gamma_0) as u32), 1)
    } else {
        (ReparametrizationCase::Dilates, 1, p.pow((gamma_0 - 1) as u32))
    };
    let mut members = Vec::with_capacity(units.len() * shifts as usize);
    for &big_j in &units {
        for shift in 0..shifts {
            let g = AffineElement::new(ctx.int(big_j as i64), ctx.int(shift as i64))?;
            members.push(FamilyMember { big_j, shift, function: act_on_function(&g, f) });
        }
    }
    Ok(Reparametrization { case, multiplicity, members })
}

/// Serialized residual of one frame check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub lhs: String,
    pub expected: String,
    pub residual: String,
    pub zero: bool,
    pub orbit_terms: u64,
}

/// Serialized multiplicity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicityCheck {
    pub gamma_1: i64,
    pub n_1: String,
    pub expected: Option<u64>,
    pub observed: u64,
    pub ok: bool,
}

/// Result record of a frame verification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameReport {
    pub frame_bound: String,
    pub exact: bool,
    pub g_count: usize,
    pub all_zero_residuals: bool,
    pub residuals: Vec<ResidualRecord>,
    pub multiplicity_checks: Vec<MultiplicityCheck>,
    pub status: String,
}

/// Runs the frame identity for every `g` and the multiplicity law for every term of `f`.
pub fn frame_report<C: Coefficient>(
    f: &TestFunction<C>,
    gs: &[TestFunction<C>],
) -> Result<FrameReport> {
    let spec = stabilizer_spec(f)?;
    let bound = frame_bound(f, &spec)?;
    let mut residuals = Vec::with_capacity(gs.len());
    for g in gs {
        let check = verify_tight_frame(f, &spec, g)?;
        residuals.push(ResidualRecord {
            lhs: check.lhs.render(),
            expected: check.expected.render(),
            residual: check.residual.render(),
            zero: check.vanishes,
            orbit_terms: check.orbit_terms,
        });
    }
    let mut multiplicity_checks = Vec::new();
    for idx in f.terms().keys() {
        let observed = phase_fix_multiplicity(idx.gamma(), &idx.n_scalar(), &spec);
        let expected = expected_multiplicity(idx.gamma(), &spec);
        multiplicity_checks.push(MultiplicityCheck {
            gamma_1: idx.gamma(),
            n_1: idx.n().to_string(),
            expected,
            observed,
            ok: expected == Some(observed),
        });
    }
    let all_zero = residuals.iter().all(|r| r.zero);
    let all_ok = multiplicity_checks.iter().all(|m| m.ok);
    Ok(FrameReport {
        frame_bound: bound.render(),
        exact: C::EXACT,
        g_count: gs.len(),
        all_zero_residuals: all_zero,
        residuals,
        multiplicity_checks,
        status: if all_zero && all_ok { "pass" } else { "fail" }.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::CycloNumber;
    use crate::padic::PrimeContext;
    use crate::wavelet::WaveletIndex;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn idx(c: PrimeContext, gamma: i64, n: &str, j: u64) -> WaveletIndex {
        WaveletIndex::new(gamma, &c.parse(n).unwrap(), j).unwrap()
    }

    fn func(c: PrimeContext, terms: &[(i64, &str, u64, i64)]) -> TestFunction<CycloNumber> {
        TestFunction::from_terms(
            c,
            terms.iter().map(|&(g, n, j, k)| (idx(c, g, n, j), CycloNumber::from_i64(c, k))),
        )
        .unwrap()
    }

    #[test]
    fn bound_of_single_wavelet_is_p() {
        for p in [2, 3, 5, 7] {
            let c = ctx(p);
            let psi = func(c, &[(0, "0", 1, 1)]);
            let spec = stabilizer_spec(&psi).unwrap();
            assert_eq!(frame_bound(&psi, &spec).unwrap(), CycloNumber::from_i64(c, p as i64));
            let check = verify_tight_frame(&psi, &spec, &psi).unwrap();
            assert!(check.vanishes);
            assert_eq!(check.lhs, CycloNumber::from_i64(c, p as i64));
        }
    }

    #[test]
    fn bound_of_two_term_function() {
        let c = ctx(3);
        let f = func(c, &[(0, "0", 1, 1), (0, "1/3", 1, 1)]);
        let spec = stabilizer_spec(&f).unwrap();
        assert_eq!(frame_bound(&f, &spec).unwrap(), CycloNumber::from_i64(c, 18));
        assert_eq!(frame_bound(&TestFunction::<CycloNumber>::new(c), &spec), Err(Error::EmptyFunction));
    }

    #[test]
    fn kernel_agrees_with_enumeration() {
        let c = ctx(3);
        let f = func(c, &[(0, "0", 1, 1), (1, "1/3", 2, -1), (-1, "2/9", 1, 2)]);
        let g = func(c, &[(0, "1/3", 2, 1), (2, "0", 1, 3), (-1, "0", 1, 1)]);
        let spec = stabilizer_spec(&f).unwrap();
        let fast = kernel::orbit_sum(&f, &spec, &g).unwrap();
        let (slow, count) = orbit_sum_by_enumeration(&f, &spec, &g);
        assert_eq!(fast.lhs, slow);
        assert_eq!(fast.orbit_terms, count as u64);
        let expected = frame_bound(&f, &spec).unwrap() * g.norm_sq();
        assert_eq!(slow, expected);
    }

    #[test]
    fn orbit_index_examples() {
        let c = ctx(3);
        let f = func(c, &[(0, "0", 1, 1), (0, "1/3", 1, 1)]);
        let spec = stabilizer_spec(&f).unwrap();
        assert_eq!(orbit_index_of(&AffineElement::identity(c), &spec), OrbitIndex::identity(&spec));
        let g = AffineElement::parse(c, "5", "0").unwrap();
        let i = orbit_index_of(&g, &spec);
        assert_eq!((i.gamma(), i.big_j()), (0, 5));
        assert_eq!(i.n().value(), c.zero().value());
        assert_eq!(orbit_element(&f, &spec, &i).unwrap(), act_on_function(&g, &f));
        let stab = AffineElement::parse(c, "10", "9").unwrap();
        assert_eq!(orbit_index_of(&stab, &spec), OrbitIndex::identity(&spec));
    }

    #[test]
    fn orbit_index_with_deep_anchor() {
        let c = ctx(3);
        let f = func(c, &[(0, "1/9", 1, 1)]);
        let spec = stabilizer_spec(&f).unwrap();
        let g = AffineElement::parse(c, "4", "0").unwrap();
        let i = orbit_index_of(&g, &spec);
        assert_eq!(orbit_element(&f, &spec, &i).unwrap(), act_on_function(&g, &f));
    }

    #[test]
    fn plain_convention_roundtrip() {
        let c = ctx(5);
        let f = func(c, &[(0, "2/5", 3, 1), (1, "0", 1, 1)]);
        let spec = stabilizer_spec(&f).unwrap();
        let g = AffineElement::parse(c, "-7/5", "3/25").unwrap();
        let plain = orbit_index_in(&g, &spec, OrbitConvention::Plain);
        let h = orbit_group_element(&plain, OrbitConvention::Plain);
        assert_eq!(act_on_function(&h, &f), act_on_function(&g, &f));
    }

    #[test]
    fn invalid_orbit_index() {
        let c = ctx(3);
        let spec = stabilizer_spec(&func(c, &[(0, "0", 1, 1)])).unwrap();
        assert!(OrbitIndex::new(&spec, 0, &c.zero(), 3).is_err());
        assert!(OrbitIndex::new(&spec, 0, &c.zero(), 0).is_err());
        assert!(OrbitIndex::new(&spec, 0, &c.int(4), 1).is_err());
        assert!(OrbitIndex::new(&spec, 0, &c.ratio(7, 3), 2).is_ok());
    }

    #[test]
    fn multiplicity_examples() {
        let c = ctx(3);
        let s = |ga: i64, g0: i64| StabilizerSpec::new(ga, g0, c.zero().fractional_part()).unwrap();
        assert_eq!(phase_fix_multiplicity(0, &c.zero(), &s(1, 0)), 3);
        assert_eq!(phase_fix_multiplicity(0, &c.zero(), &s(2, 0)), 9);
        assert_eq!(phase_fix_multiplicity(0, &c.zero(), &s(1, -1)), 9);
        assert_eq!(expected_multiplicity(0, &s(1, -1)), Some(9));
    }

    #[test]
    fn reparametrization_of_single_wavelet() {
        let c = ctx(3);
        let psi = func(c, &[(0, "0", 1, 1)]);
        let spec = stabilizer_spec(&psi).unwrap();
        let r = reparametrize_wavelet_frame(&psi, &spec).unwrap();
        assert_eq!(r.case, ReparametrizationCase::Translates);
        assert_eq!(r.multiplicity, 1);
        assert_eq!(r.members.len(), 6);
        for m in &r.members {
            assert_eq!(m.function.norm_sq(), psi.norm_sq());
        }
    }
}
