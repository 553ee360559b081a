//! Residue arithmetic for the orbit sum `sum_idx |<g, f^(idx)>|^2`.
//!
//! All translations are scaled to integers: orbit translations as
//! `N / p^{E'}` and wavelet translations (of `f`, `g` and images) as
//! `S / p^E`. The image of a term of `f` under an orbit element then only
//! needs `J * Y mod p^{E+1}`: its low `E` digits are the new translation and
//! the next digit fixes the phase.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::affine::StabilizerSpec;
use crate::coefficient::Coefficient;
use crate::wavelet::{TestFunction, WaveletIndex};

pub(crate) struct OrbitSum<C> {
    pub lhs: C,
    pub orbit_terms: u64,
}

struct Term {
    gamma: i64,
    scaled_n: u128,
    j: u64,
}

fn scaled(idx: &WaveletIndex, e: i64) -> Option<u128> {
    let ctx = idx.ctx();
    (idx.n().value() * ctx.pow_rational(e)).to_integer().to_u128()
}

fn mod_inverse(a: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    s0.rem_euclid(m as i128) as u128
}

/// Returns `None` when the residues would not fit in 128 bits.
pub(crate) fn orbit_sum<C: Coefficient>(
    f: &TestFunction<C>,
    spec: &StabilizerSpec,
    g: &TestFunction<C>,
) -> Option<OrbitSum<C>> {
    let ctx = f.ctx();
    if f.is_empty() || g.is_empty() {
        return Some(OrbitSum { lhs: C::zero(ctx), orbit_terms: 0 });
    }
    let p = ctx.p() as u128;
    let gamma_min = f.gamma_min()?;
    let gamma_max = f.gamma_max()?;
    let gamma_0 = spec.gamma_0();
    let gamma_a = spec.gamma_a();
    let depth = f.max_depth().max(g.max_depth());
    let e_orbit = (gamma_max + depth).max(0);
    let e = depth.max(e_orbit - gamma_min);
    let top = (2 * e).max(gamma_a + e + 1).max(e + 2 + gamma_max - gamma_min);
    if (top as f64) * (p as f64).log2() > 126.0 {
        return None;
    }
    let pw: Vec<u128> = (0..=top as u32).map(|k| p.pow(k)).collect();
    let pe = pw[e as usize];
    let modulus = pw[(e + 1) as usize];

    let f_terms: Vec<(Term, C)> = f
        .terms()
        .iter()
        .map(|(idx, c)| {
            let t = Term { gamma: idx.gamma(), scaled_n: scaled(idx, e)?, j: idx.j() };
            Some((t, c.clone()))
        })
        .collect::<Option<_>>()?;
    let g_terms: Vec<(Term, C)> = g
        .terms()
        .iter()
        .map(|(idx, c)| {
            let t = Term { gamma: idx.gamma(), scaled_n: scaled(idx, e)?, j: idx.j() };
            Some((t, c.clone()))
        })
        .collect::<Option<_>>()?;
    let lookup: HashMap<(i64, u128, u64), usize> = g_terms
        .iter()
        .enumerate()
        .map(|(i, (t, _))| ((t.gamma, t.scaled_n, t.j), i))
        .collect();
    let inv_p: Vec<u64> = (0..p as u64)
        .map(|j| if j == 0 { 0 } else { mod_inverse(j as u128, p) as u64 })
        .collect();

    let nf = f_terms.len();
    let ng = g_terms.len();
    let np = nf * ng;
    let pu = p as u64;
    let lifts = pw[(gamma_a - 1) as usize];

    let pairs: Vec<(usize, usize)> = (0..nf).flat_map(|t| (0..ng).map(move |s| (t, s))).collect();
    let (hist, visited) = pairs
        .par_iter()
        .map(|&(ti, si)| {
            let mut hist = vec![0u64; np * np * pu as usize];
            let mut visited = 0u64;
            let (ft, _) = &f_terms[ti];
            let (gs, _) = &g_terms[si];
            let gamma = ft.gamma - gs.gamma;
            let j0 = (ft.j * inv_p[gs.j as usize]) % pu;
            let e1 = (ft.gamma + e - e_orbit) as usize;
            let quot = pw[(e_orbit - ft.gamma) as usize];
            let free = pw[(1 - gamma_0 + ft.gamma) as usize];
            let mut active: Vec<(usize, u64)> = Vec::with_capacity(nf);
            for k in 0..lifts {
                let big_j = j0 as u128 + p * k;
                let j_inv = mod_inverse(big_j, pe);
                let r = ((j_inv * gs.scaled_n) % pe + pe - ft.scaled_n % pe) % pe;
                assert_eq!(r % pw[e1], 0, "translation equation has no solution");
                let base = (r / pw[e1]) % quot;
                let j_inv_p = inv_p[(big_j % p) as usize];
                'orbit: for free_digits in 0..free {
                    let n_scaled = base + quot * free_digits;
                    active.clear();
                    for (tj, (t, _)) in f_terms.iter().enumerate() {
                        let y = (n_scaled * pw[(t.gamma + e - e_orbit) as usize] + t.scaled_n) % modulus;
                        let x = (big_j % modulus) * y % modulus;
                        let image_n = x % pe;
                        let digit = (x / pe) as u64;
                        let image_j = (t.j * j_inv_p) % pu;
                        if let Some(&sj) = lookup.get(&(t.gamma - gamma, image_n, image_j)) {
                            if tj < ti {
                                continue 'orbit;
                            }
                            let m = (image_j * ((pu - digit) % pu)) % pu;
                            active.push((tj * ng + sj, m));
                        }
                    }
                    debug_assert!(active.iter().any(|&(q, _)| q == ti * ng + si));
                    visited += 1;
                    for &(qa, ma) in &active {
                        for &(qb, mb) in &active {
                            let r = ((mb + pu - ma) % pu) as usize;
                            hist[(qa * np + qb) * pu as usize + r] += 1;
                        }
                    }
                }
            }
            (hist, visited)
        })
        .reduce(
            || (vec![0u64; np * np * pu as usize], 0u64),
            |(mut h1, v1), (h2, v2)| {
                for (a, b) in h1.iter_mut().zip(h2) {
                    *a += b;
                }
                (h1, v1 + v2)
            },
        );

    let weights: Vec<C> = (0..np)
        .map(|q| {
            let (t, s) = (q / ng, q % ng);
            g_terms[s].1.clone() * f_terms[t].1.conj()
        })
        .collect();
    let roots: Vec<C> = (0..pu as i64).map(|r| C::root_of_unity(r, ctx)).collect();
    let mut lhs = C::zero(ctx);
    for qa in 0..np {
        for qb in 0..np {
            let base = (qa * np + qb) * pu as usize;
            let mut phase_sum = C::zero(ctx);
            let mut any = false;
            for r in 0..pu as usize {
                let count = hist[base + r];
                if count != 0 {
                    any = true;
                    phase_sum += C::from_i64(count as i64, ctx) * roots[r].clone();
                }
            }
            if any {
                lhs += weights[qa].clone() * weights[qb].conj() * phase_sum;
            }
        }
    }
    Some(OrbitSum { lhs, orbit_terms: visited })
}
