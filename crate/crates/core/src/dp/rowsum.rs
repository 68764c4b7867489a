//! Integer row accumulation for the exact engines.
//!
//! Rational arithmetic reduces after every operation, and on binomially
//! weighted rows those reductions are gcds between numbers the size of the
//! whole row; they dominate the runtime once depths reach the hundreds.
//! Every inner sum the exact engines evaluate has the shape
//!
//!   row(t) = sum_j w(t, j) x^j g[j]            (one weight family)
//!   row(t) = sum_j w(t, j) x^j y^(t-j) g[j] h[t-j]   (slice families)
//!
//! with fixed bases and a binomial weight family w. Scaling g to integer
//! numerators over one common denominator and folding the base powers into
//! the table turns the inner loops into integer multiply-adds. One
//! `Rat::new` per row restores the canonical reduced form at the end, so
//! results are bit-identical to per-term rational evaluation: equal values
//! have equal canonical representations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::numeric::Rat;

/// Least common multiple of the denominators of the nonzero entries of
/// `g[lo..=hi]` (one if there are none). Entries produced by the engines
/// share structured denominators, so the divisibility fast path usually
/// skips the gcd.
fn lcm_den(g: &[Rat], lo: usize, hi: usize) -> BigInt {
    let mut l = BigInt::one();
    if hi < lo {
        return l;
    }
    for v in g[lo..=hi].iter() {
        if v.is_zero() {
            continue;
        }
        let d = v.denom();
        if !(&l % d).is_zero() {
            l = l.lcm(d);
        }
    }
    l
}

/// A rational vector scaled for integer row sums.
pub(super) struct ScaledVec {
    /// Highest meaningful index; entries beyond are absent.
    pub hi: usize,
    /// Scaled numerators, index 0..=hi (zero where the input was zero or
    /// below the requested window).
    pub e: Vec<BigInt>,
    /// Common denominator all entries are scaled against.
    pub den: BigInt,
}

impl ScaledVec {
    /// Scaling for negative-binomial rows: with x = xn/xd,
    /// e[j] = num(g[j]) (L / den(g[j])) xn^j xd^(hi-j), den = xd^hi L,
    /// so that x^j g[j] = e[j] / den for every j in lo..=hi.
    pub fn nb(g: &[Rat], lo: usize, hi: usize, x: &Rat) -> ScaledVec {
        let l = lcm_den(g, lo, hi);
        let xn = x.numer();
        let xd = x.denom();
        let mut e = vec![BigInt::zero(); hi + 1];
        // running xn^j forward, then xd^(hi-j) folded in a backward pass
        let mut xnp = BigInt::one();
        for j in 0..=hi {
            if j > 0 {
                xnp *= xn;
            }
            if j >= lo && !g[j].is_zero() {
                e[j] = g[j].numer() * (&l / g[j].denom()) * &xnp;
            }
        }
        let mut xdp = BigInt::one();
        for j in (0..=hi).rev() {
            if j < hi {
                xdp *= xd;
            }
            if !e[j].is_zero() {
                e[j] *= &xdp;
            }
        }
        // after the loop xdp = xd^hi
        ScaledVec { hi, e, den: xdp * l }
    }

    /// Power-only scaling for slice rows: e[j] = num(g[j]) (L / den(g[j]))
    /// xn^j with den = L; the caller supplies the slice denominator.
    pub fn powers(g: &[Rat], lo: usize, hi: usize, xn: &BigInt) -> ScaledVec {
        let l = lcm_den(g, lo, hi);
        let mut e = vec![BigInt::zero(); hi + 1];
        let mut xnp = BigInt::one();
        for j in 0..=hi {
            if j > 0 {
                xnp *= xn;
            }
            if j >= lo && !g[j].is_zero() {
                e[j] = g[j].numer() * (&l / g[j].denom()) * &xnp;
            }
        }
        ScaledVec { hi, e, den: l }
    }
}

/// sum_{j=0..hi} C(t+j-1, j) e[j] for one row t >= 1 (the j = 0 weight is
/// one). The running binomial advances by exact integer steps.
pub(super) fn nb_row(t: usize, sv: &ScaledVec) -> BigInt {
    let mut acc = sv.e[0].clone();
    if sv.hi == 0 {
        return acc;
    }
    let mut binom = BigInt::from(t); // C(t, 1)
    for j in 1..=sv.hi {
        if j > 1 {
            binom = binom * BigInt::from(t + j - 1) / BigInt::from(j);
        }
        if !sv.e[j].is_zero() {
            acc += &binom * &sv.e[j];
        }
    }
    acc
}

/// sum_{j=j0..j1} C(m, j) el[j] er[m-j] for one window row m.
pub(super) fn window_row(m: usize, j0: usize, j1: usize, el: &ScaledVec, er: &ScaledVec) -> BigInt {
    let mut acc = BigInt::zero();
    if j0 > j1 {
        return acc;
    }
    let mut binom = num_integer::binomial(BigInt::from(m), BigInt::from(j0));
    for j in j0..=j1 {
        if j > j0 {
            binom = binom * BigInt::from(m - j + 1) / BigInt::from(j);
        }
        if !el.e[j].is_zero() && !er.e[m - j].is_zero() {
            acc += &binom * &el.e[j] * &er.e[m - j];
        }
    }
    acc
}

/// base^0..=base^hi.
pub(super) fn power_table(base: &BigInt, hi: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(hi + 1);
    out.push(BigInt::one());
    for i in 1..=hi {
        out.push(&out[i - 1] * base);
    }
    out
}

/// Numerator pair (xn', yn') and common denominator w for two rationals,
/// so x = xn'/w and y = yn'/w exactly.
pub(super) fn common_den(x: &Rat, y: &Rat) -> (BigInt, BigInt, BigInt) {
    let w = x.denom().lcm(y.denom());
    let xn = x.numer() * (&w / x.denom());
    let yn = y.numer() * (&w / y.denom());
    (xn, yn, w)
}
