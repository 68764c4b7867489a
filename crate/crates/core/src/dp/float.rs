//! Deterministic floating-point propagation for large truncation depths.
//!
//! Same rearranged sums as [`super::exact`], evaluated in f64. Weight
//! families (negative-binomial rows, binomial slices) are walked outward
//! from a running anchor kept at the row mode, so no individual weight is
//! ever materialized through an overflowing or underflowing intermediate.
//! Each row is truncated once the provable remainder drops below a fixed
//! tail budget; rows whose whole value sits below the budget are skipped,
//! and a run of skipped rows ends the pass (gap rows are non-increasing).
//!
//! Everything is sequential with a fixed evaluation order and uses only
//! arithmetic with exactly rounded IEEE semantics (no transcendental
//! functions), so results are identical across runs, machines and thread
//! counts. Tail truncation makes the output an under-approximation of the
//! exact-rational gaps by at most a few ulps plus the tail budget per
//! entry; the estimator consumes gaps additively, so the induced error on
//! expected traversals stays below depth times budget. Pessimistic runs
//! (see [`super::DpOptions`]) inherit the same budget; there the
//! truncation slack counts against the certificate rather than for it,
//! which is one of the two reasons float results carry an explicit guard
//! factor at the reporting layer.

use crate::error::Result;
use crate::gadget::{GadgetTree, NodeClass};
use crate::numeric::rat_to_f64;
use crate::profile::CoverageProfile;

use super::{DpContext, DpOptions, DpRun};

/// Per-entry tail budget for a single weighted sum.
pub(super) const ETA: f64 = 1e-18;
/// Rows (whole entries) below this are treated as zero.
pub(super) const ROW_CUT: f64 = 1e-19;
/// Consecutive below-cut rows before a pass stops early.
pub(super) const BREAK_AFTER: u32 = 16;

/// Value m * 2^e kept normalized so long running products of ratios never
/// leave f64 range. Only multiplications are needed.
#[derive(Debug, Clone, Copy)]
pub(super) struct ExpFloat {
    m: f64,
    e: i64,
}

const EXP_MASK: u64 = 0x7ff0_0000_0000_0000;
const MANT_ONE: u64 = 1023u64 << 52;

impl ExpFloat {
    pub(super) fn new(x: f64) -> Self {
        let mut v = ExpFloat { m: x, e: 0 };
        v.norm();
        v
    }

    fn norm(&mut self) {
        if self.m == 0.0 {
            self.e = 0;
            return;
        }
        // lift subnormals into range before reading the exponent field
        while self.m.to_bits() & EXP_MASK == 0 {
            self.m *= 9007199254740992.0; // 2^53
            self.e -= 53;
        }
        let bits = self.m.to_bits();
        self.e += (((bits & EXP_MASK) >> 52) as i64) - 1023;
        self.m = f64::from_bits((bits & !EXP_MASK) | MANT_ONE);
    }

    pub(super) fn mul(&mut self, x: f64) {
        self.m *= x;
        self.norm();
    }

    /// Collapse to f64; values outside normal range become 0 (they are far
    /// below every budget used here).
    pub(super) fn to_f64(self) -> f64 {
        if self.m == 0.0 || self.e < -1022 {
            return 0.0;
        }
        assert!(self.e <= 1023, "weight left unit range");
        self.m * f64::from_bits(((self.e + 1023) as u64) << 52)
    }
}

/// Last index in 1..len-1 with a positive gap.
pub(super) fn support(gaps: &[f64]) -> usize {
    (1..gaps.len() - 1)
        .rev()
        .find(|&j| gaps[j] > 0.0)
        .unwrap_or(0)
}

/// out[t] += coef * p^t for all t (stops once the power underflows).
pub(super) fn add_power(out: &mut [f64], p: f64, coef: f64) {
    let mut pw = 1.0f64;
    for slot in out.iter_mut().skip(1) {
        pw *= p;
        if pw == 0.0 {
            break;
        }
        *slot += coef * pw;
    }
}

/// Adds `coef * sum_{j=1..hi} C(t+j-1, j) s^t x^j d[j]` to out[t] for
/// t = 1..=n. Requires 0 < s, 0 < x < 1, s + x <= 1, and d[1..=hi] within
/// [0, 1]; d need not be monotone (the stop rules bound remainders by the
/// observed maximum). The row family is walked from a running anchor at
/// the (support-clamped) mode.
pub(super) fn nb_mix(
    s: f64,
    x: f64,
    d: &[f64],
    hi: usize,
    coef: f64,
    out: &mut [f64],
    inv: &[f64],
    ctx: &DpContext,
) -> Result<()> {
    if hi == 0 {
        return Ok(());
    }
    let n = out.len() - 1;
    let x_inv = 1.0 / x;
    let d_cap = d[1..=hi].iter().cloned().fold(0.0f64, f64::max);
    if d_cap == 0.0 {
        return Ok(());
    }
    // anchor: C(t+j-1, j) s^t x^j at j = j_a, starting from t = 1, j = 1.
    let mut anchor = ExpFloat::new(s * x);
    let mut j_a = 1usize;
    let mut below = 0u32;
    for t in 1..=n {
        if t.trailing_zeros() >= 10 {
            ctx.check()?;
        }
        if t > 1 {
            anchor.mul(s * (t - 1 + j_a) as f64 * inv[t - 1]);
        }
        while j_a < hi {
            let r = x * (t + j_a) as f64 * inv[j_a + 1];
            if r <= 1.0 {
                break;
            }
            anchor.mul(r);
            j_a += 1;
        }
        let a0 = anchor.to_f64();
        if a0 * (hi + 1) as f64 * d_cap < ROW_CUT {
            below += 1;
            if below >= BREAK_AFTER {
                break;
            }
            continue;
        }
        let mut acc = 0.0f64;
        let mut term = a0;
        let mut j = j_a;
        loop {
            acc += term * d[j];
            if j >= hi {
                break;
            }
            let r = x * (t + j) as f64 * inv[j + 1];
            let next = term * r;
            // geometric remainder bound: ratios only shrink above the mode
            if r < 0.9999 && next * d_cap < ETA * (1.0 - r) {
                break;
            }
            term = next;
            j += 1;
        }
        term = a0;
        j = j_a;
        while j > 1 {
            let next = term * j as f64 * inv[t + j - 1] * x_inv;
            // at most j-1 further terms, none larger than `next`
            if next * (j as f64) * d_cap < ETA {
                break;
            }
            term = next;
            j -= 1;
            acc += term * d[j];
        }
        out[t] += coef * acc;
        if acc < ROW_CUT {
            below += 1;
            if below >= BREAK_AFTER {
                break;
            }
        } else {
            below = 0;
        }
    }
    Ok(())
}

/// H(m) = sum_j C(m, j) alpha^j beta^(m-j) G_l(j) G_r(m-j) for m up to
/// hi_l + hi_r, the coupling mixture of the two-child inclusion-exclusion.
/// Inputs need not be monotone; `clamp_monotone` restores the
/// non-increasing shape (provable when both inputs are gap vectors) that
/// rounding noise may break, and must be off for other weight vectors.
pub(super) fn build_h(
    alpha: f64,
    beta: f64,
    l: &[f64],
    hi_l: usize,
    r: &[f64],
    hi_r: usize,
    inv: &[f64],
    ctx: &DpContext,
    clamp_monotone: bool,
) -> Result<Vec<f64>> {
    let m_hi = hi_l + hi_r;
    let mut h = vec![0.0f64; m_hi + 1];
    if hi_l == 0 || hi_r == 0 {
        return Ok(h);
    }
    let ab = alpha / beta;
    let ba = beta / alpha;
    let l_cap = l[1..=hi_l].iter().cloned().fold(0.0f64, f64::max);
    let r_cap = r[1..=hi_r].iter().cloned().fold(0.0f64, f64::max);
    let lr_cap = l_cap * r_cap;
    if lr_cap == 0.0 {
        return Ok(h);
    }
    // anchor: C(m, j) alpha^j beta^(m-j) at j = j_a, from m = 2, j = 1.
    let mut anchor = ExpFloat::new(2.0 * alpha * beta);
    let mut j_a = 1usize;
    let mut below = 0u32;
    for m in 2..=m_hi {
        if m.trailing_zeros() >= 10 {
            ctx.check()?;
        }
        if m > 2 {
            anchor.mul(beta * m as f64 * inv[m - j_a]);
        }
        let j_top = hi_l.min(m - 1);
        let j_bot = 1.max(m.saturating_sub(hi_r));
        while j_a < j_top {
            if j_a < j_bot || alpha * (m - j_a) as f64 > beta * (j_a + 1) as f64 {
                anchor.mul((m - j_a) as f64 * inv[j_a + 1] * ab);
                j_a += 1;
            } else {
                break;
            }
        }
        let a0 = anchor.to_f64();
        let width = (j_top - j_bot + 1) as f64;
        if a0 * width * lr_cap < ROW_CUT {
            below += 1;
            if below >= BREAK_AFTER {
                break;
            }
            continue;
        }
        let mut acc = 0.0f64;
        let mut term = a0;
        let mut j = j_a;
        loop {
            acc += term * l[j] * r[m - j];
            if j >= j_top {
                break;
            }
            let rr = (m - j) as f64 * inv[j + 1] * ab;
            let next = term * rr;
            if rr < 0.9999 && next * lr_cap < ETA * (1.0 - rr) {
                break;
            }
            term = next;
            j += 1;
        }
        term = a0;
        j = j_a;
        while j > j_bot {
            let next = term * j as f64 * inv[m - j + 1] * ba;
            if next * (j as f64) * lr_cap < ETA {
                break;
            }
            term = next;
            j -= 1;
            acc += term * l[j] * r[m - j];
        }
        h[m] = acc;
        if acc < ROW_CUT {
            below += 1;
            if below >= BREAK_AFTER {
                break;
            }
        } else {
            below = 0;
        }
    }
    if clamp_monotone {
        // enforce the provable monotonicity lost to rounding
        let mut prev = 1.0f64;
        for v in h.iter_mut().skip(1) {
            *v = v.clamp(0.0, prev);
            prev = *v;
        }
    } else {
        for v in h.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }
    Ok(h)
}

/// Relay gap: out[t] = pl^t + pr^t
/// + sum_{j=1..t-1} C(t, j) pl^j pr^(t-j) (G_l(j) + G_r(t-j) - product).
///
/// With pessimistic child extensions cl, cr the slice cross term gains a
/// constant floor g = cl + cr - cl cr. That part is accumulated in closed
/// form (the binomial slice sums to one) and the banded walk only handles
/// the remaining finite-support part, so the pass still bands out; once
/// rows of the variable part go quiet only the closed form keeps filling.
#[allow(clippy::too_many_arguments)]
fn relay_mix(
    pl: f64,
    pr: f64,
    l: &[f64],
    hi_l: usize,
    r: &[f64],
    hi_r: usize,
    cl: f64,
    cr: f64,
    out: &mut [f64],
    inv: &[f64],
    ctx: &DpContext,
) -> Result<()> {
    let n = out.len() - 1;
    let lp = pl / pr;
    let rp = pr / pl;
    let gamma = cl + cr - cl * cr;
    let keep = 1.0 - gamma;
    let mut plt = pl;
    let mut prt = pr;
    // anchor: C(t, j) pl^j pr^(t-j) at j = j_a, from t = 2, j = 1.
    let mut anchor = ExpFloat::new(2.0 * pl * pr);
    let mut j_a = 1usize;
    let mut below = 0u32;
    let mut interior_dead = false;
    out[1] = gamma + keep * (pl + pr);
    for t in 2..=n {
        if t.trailing_zeros() >= 10 {
            ctx.check()?;
        }
        plt *= pl;
        prt *= pr;
        let boundary = keep * (plt + prt);
        if interior_dead {
            out[t] = gamma + boundary;
            continue;
        }
        if t > 2 {
            anchor.mul(pr * t as f64 * inv[t - j_a]);
        }
        while j_a < t - 1 && pl * (t - j_a) as f64 > pr * (j_a + 1) as f64 {
            anchor.mul((t - j_a) as f64 * inv[j_a + 1] * lp);
            j_a += 1;
        }
        let a0 = anchor.to_f64();
        let mut acc = 0.0f64;
        if a0 * (t - 1) as f64 >= ROW_CUT {
            // variable part of the cross term: full cross minus its floor,
            // still within [0, 1]
            let cross = |j: usize| -> f64 {
                let gl = if j <= hi_l { l[j] } else { 0.0 };
                let gr = if t - j <= hi_r { r[t - j] } else { 0.0 };
                gl * (1.0 - cr) + gr * (1.0 - cl) - gl * gr
            };
            let mut term = a0;
            let mut j = j_a;
            loop {
                acc += term * cross(j);
                if j >= t - 1 {
                    break;
                }
                let rr = (t - j) as f64 * inv[j + 1] * lp;
                let next = term * rr;
                if rr < 0.9999 && next < ETA * (1.0 - rr) {
                    break;
                }
                term = next;
                j += 1;
            }
            term = a0;
            j = j_a;
            while j > 1 {
                let next = term * j as f64 * inv[t - j + 1] * rp;
                if next * (j as f64) < ETA {
                    break;
                }
                term = next;
                j -= 1;
                acc += term * cross(j);
            }
        }
        let row = boundary + acc;
        out[t] = gamma + row;
        if row < ROW_CUT {
            below += 1;
            if below >= BREAK_AFTER {
                interior_dead = true;
            }
        } else {
            below = 0;
        }
    }
    Ok(())
}

fn propagate_float(
    class: &NodeClass,
    left: &CoverageProfile<f64>,
    right: Option<&CoverageProfile<f64>>,
    n: usize,
    inv: &[f64],
    ctx: &DpContext,
    pessimistic: bool,
) -> Result<(Vec<f64>, f64)> {
    let mut gaps = vec![0.0f64; n + 1];
    gaps[0] = 1.0;
    match class {
        NodeClass::OneChild { pp, pl } => {
            let lg = &left.gaps;
            let cl = left.precap_gap;
            let (pp, pl) = (rat_to_f64(pp), rat_to_f64(pl));
            add_power(&mut gaps, pp, 1.0);
            nb_mix(pp, pl, lg, support(lg), 1.0, &mut gaps, inv, ctx)?;
            if pessimistic && cl > 0.0 {
                // + cl (1 - pp^t)
                for g in gaps.iter_mut().skip(1) {
                    *g += cl;
                }
                add_power(&mut gaps, pp, -cl);
            }
        }
        NodeClass::TwoChild { pp, pl, pr } => {
            let right = right.expect("two-child node needs a right profile");
            let lg = &left.gaps;
            let rg = &right.gaps;
            let (cl, cr) = (left.precap_gap, right.precap_gap);
            let (pp, pl, pr) = (rat_to_f64(pp), rat_to_f64(pl), rat_to_f64(pr));
            let hi_l = support(lg);
            let hi_r = support(rg);
            let (sl, sr) = (pp + pl, pp + pr);
            let (al, ar) = (pp / sl, pp / sr);
            let q = pl + pr;
            add_power(&mut gaps, al, 1.0);
            add_power(&mut gaps, ar, 1.0);
            add_power(&mut gaps, pp, -1.0);
            nb_mix(al, pl / sl, lg, hi_l, 1.0, &mut gaps, inv, ctx)?;
            nb_mix(pp, pl, lg, hi_l, -1.0, &mut gaps, inv, ctx)?;
            nb_mix(ar, pr / sr, rg, hi_r, 1.0, &mut gaps, inv, ctx)?;
            nb_mix(pp, pr, rg, hi_r, -1.0, &mut gaps, inv, ctx)?;
            if hi_l > 0 && hi_r > 0 {
                let h = build_h(pl / q, pr / q, lg, hi_l, rg, hi_r, inv, ctx, true)?;
                nb_mix(pp, q, &h, support_h(&h), -1.0, &mut gaps, inv, ctx)?;
            }
            if pessimistic && (cl > 0.0 || cr > 0.0) {
                // + g (1 - al^t - ar^t + pp^t) - cl T_r - cr T_l
                let gamma = cl + cr - cl * cr;
                for g in gaps.iter_mut().skip(1) {
                    *g += gamma;
                }
                add_power(&mut gaps, al, -gamma);
                add_power(&mut gaps, ar, -gamma);
                add_power(&mut gaps, pp, gamma);
                if cl > 0.0 && hi_r > 0 {
                    nb_mix(ar, pr / sr, rg, hi_r, -cl, &mut gaps, inv, ctx)?;
                    nb_mix(pp, pr, rg, hi_r, cl, &mut gaps, inv, ctx)?;
                }
                if cr > 0.0 && hi_l > 0 {
                    nb_mix(al, pl / sl, lg, hi_l, -cr, &mut gaps, inv, ctx)?;
                    nb_mix(pp, pl, lg, hi_l, cr, &mut gaps, inv, ctx)?;
                }
            }
        }
        NodeClass::Gadget { pl, pr } => {
            let right = right.expect("relay node needs a right profile");
            let lg = &left.gaps;
            let rg = &right.gaps;
            let (cl, cr) = if pessimistic {
                (left.precap_gap, right.precap_gap)
            } else {
                (0.0, 0.0)
            };
            let (pl, pr) = (rat_to_f64(pl), rat_to_f64(pr));
            relay_mix(
                pl,
                pr,
                lg,
                support(lg),
                rg,
                support(rg),
                cl,
                cr,
                &mut gaps,
                inv,
                ctx,
            )?;
        }
        NodeClass::Leaf => unreachable!("leaves are constructed directly"),
    }
    // gaps are mathematically non-increasing in [0, 1]; restore what
    // cancellation noise took and zero the sub-noise tail
    let mut prev = 1.0f64;
    for g in gaps.iter_mut().skip(1) {
        *g = g.clamp(0.0, prev);
        prev = *g;
    }
    let precap = std::mem::replace(&mut gaps[n], 0.0);
    if pessimistic && precap > 0.0 {
        for g in gaps[1..n].iter_mut() {
            *g = (*g - precap).max(0.0);
        }
    }
    Ok((gaps, precap))
}

/// H vectors do not carry the gaps[0] = 1 convention; their support scan
/// must not treat index len-1 as forced.
pub(super) fn support_h(h: &[f64]) -> usize {
    (1..h.len()).rev().find(|&m| h[m] > 0.0).unwrap_or(0)
}

/// Reciprocal table 1/i for i up to 2n + 2, shared by the banded walkers.
pub(crate) fn inv_table(n: usize) -> Vec<f64> {
    let mut inv = vec![0.0f64; 2 * n + 3];
    for (i, v) in inv.iter_mut().enumerate().skip(1) {
        *v = 1.0 / i as f64;
    }
    inv
}

/// Bottom-up floating-point run; mirrors [`super::exact::run_dp_exact`].
pub fn run_dp_float(
    gt: &GadgetTree,
    n: usize,
    ctx: &DpContext,
    opts: DpOptions,
) -> Result<DpRun<f64>> {
    assert!(n >= 1);
    let inv = inv_table(n);
    let mut profiles: Vec<Option<CoverageProfile<f64>>> = vec![None; gt.len()];
    let mut max_gap = 0.0f64;
    for &v in &gt.post_order {
        ctx.check()?;
        let prof = match &gt.class[v] {
            NodeClass::Leaf => CoverageProfile::<f64>::leaf(n),
            class => {
                let kids = &gt.children[v];
                let (gaps, precap) = {
                    let left = profiles[kids[0]].as_ref().unwrap();
                    let right = kids.get(1).map(|&r| profiles[r].as_ref().unwrap());
                    propagate_float(class, left, right, n, &inv, ctx, opts.pessimistic)?
                };
                if !opts.keep_all {
                    for &c in kids {
                        profiles[c] = None;
                    }
                }
                CoverageProfile {
                    cap: n,
                    gaps,
                    precap_gap: precap,
                }
            }
        };
        if prof.precap_gap > max_gap {
            max_gap = prof.precap_gap;
        }
        profiles[v] = Some(prof);
    }
    Ok(DpRun {
        profiles,
        max_precap_gap: max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::exact::run_dp_exact;
    use crate::gadget::binarize;
    use crate::profile::expected_traversals_f64;
    use crate::tree::{attach_super_root, WeightedTree};

    #[test]
    fn expfloat_survives_extreme_products() {
        let mut v = ExpFloat::new(1.0);
        for _ in 0..100_000 {
            v.mul(1e-100);
        }
        for _ in 0..100_000 {
            v.mul(1e100);
        }
        assert!((v.to_f64() - 1.0).abs() < 1e-9);
        assert_eq!(ExpFloat::new(0.0).to_f64(), 0.0);
        // subnormal seeds are normalized internally, and collapsing a value
        // below the normal range flushes it to zero
        let mut tiny = ExpFloat::new(f64::MIN_POSITIVE / 1024.0);
        assert_eq!(tiny.to_f64(), 0.0);
        tiny.mul(2f64.powi(100));
        assert!((tiny.to_f64() / 2f64.powi(-932) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_exact_engine_closely() {
        let cases = [
            ("a b\n", "a"),
            ("a b\nb c\n", "a"),
            ("a b\nb c\n", "b"),
            ("c x0\nc x1\nc x2\n", "c"),
            ("c x0\nc x1\nc x2\nc x3\nx3 y\n", "x0"),
            ("a b\nb c\nb d\nd e\nd f\na g\n", "a"),
            ("a b 2\nb c 1/3\n", "a"),
            ("s a 1/2\ns b 2\ns c 1\nc d 3\n", "s"),
        ];
        for (text, start) in cases {
            let t = WeightedTree::parse(text).unwrap();
            let s = t.vertex(start).unwrap();
            let gt = binarize(&attach_super_root(&t, s));
            for n in [1usize, 2, 4, 9, 16, 48, 96] {
                for pessimistic in [false, true] {
                    let ctx = DpContext::default();
                    let opts = DpOptions {
                        keep_all: true,
                        pessimistic,
                    };
                    let want = run_dp_exact(&gt, n, &ctx, opts).unwrap();
                    let got = run_dp_float(&gt, n, &ctx, opts).unwrap();
                    for v in 1..gt.len() {
                        let a = want.profiles[v].as_ref().unwrap();
                        let b = got.profiles[v].as_ref().unwrap();
                        for t_idx in 0..=n {
                            let w = rat_to_f64(&a.gaps[t_idx]);
                            assert!(
                                (w - b.gaps[t_idx]).abs() <= 1e-12,
                                "{text:?} start {start} node {v} N={n} t={t_idx} \
                                 pess={pessimistic}: {w} vs {}",
                                b.gaps[t_idx]
                            );
                        }
                        assert!((rat_to_f64(&a.precap_gap) - b.precap_gap).abs() <= 1e-12);
                    }
                    assert!(
                        (rat_to_f64(&want.max_precap_gap) - got.max_precap_gap).abs() <= 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn deep_path_reaches_its_expected_traversals() {
        // Path on 10 vertices from an endpoint: E(1) = n-1 = 9, and the
        // truncated sum must approach it from below.
        let text = "v0 v1\nv1 v2\nv2 v3\nv3 v4\nv4 v5\nv5 v6\nv6 v7\nv7 v8\nv8 v9\n";
        let t = WeightedTree::parse(text).unwrap();
        let gt = binarize(&attach_super_root(&t, 0));
        let run = run_dp_float(&gt, 4096, &DpContext::default(), DpOptions::default()).unwrap();
        let e1 = expected_traversals_f64(run.root());
        assert!(e1 <= 9.0 + 1e-9, "estimate must stay a lower bound: {e1}");
        assert!(e1 > 8.99, "truncation too lossy: {e1}");
    }

    #[test]
    fn wide_star_reaches_coupon_collector_value() {
        // Star with 24 leaves from the center: E(1) = H_24.
        let mut text = String::new();
        for i in 0..24 {
            text.push_str(&format!("hub leaf{i}\n"));
        }
        let t = WeightedTree::parse(&text).unwrap();
        let s = t.vertex("hub").unwrap();
        let gt = binarize(&attach_super_root(&t, s));
        let run = run_dp_float(&gt, 32768, &DpContext::default(), DpOptions::default()).unwrap();
        let e1 = expected_traversals_f64(run.root());
        let h24: f64 = (1..=24).map(|k| 1.0 / k as f64).sum();
        assert!(e1 <= h24 + 1e-9);
        assert!(e1 > h24 - 1e-6, "{e1} vs {h24}");
    }
}

#[cfg(test)]
mod perf_probe {
    //! Wallclock probes for the depths the estimator actually requests at
    //! tight epsilon; run with --ignored.
    use super::*;
    use crate::gadget::binarize;
    use crate::profile::expected_traversals_f64;
    use crate::tree::{attach_super_root, WeightedTree};

    fn timed(text: &str, start: &str, n: usize) -> (f64, std::time::Duration) {
        let t = WeightedTree::parse(text).unwrap();
        let s = t.vertex(start).unwrap();
        let gt = binarize(&attach_super_root(&t, s));
        let clock = std::time::Instant::now();
        let run = run_dp_float(&gt, n, &DpContext::default(), DpOptions::default()).unwrap();
        (expected_traversals_f64(run.root()), clock.elapsed())
    }

    #[test]
    #[ignore]
    fn pessimistic_full_depth_stays_fast() {
        // The pessimistic pass adds constant-floor corrections everywhere;
        // make sure the relay chain still bands out instead of walking the
        // whole slice at every t.
        let mut star = String::new();
        for i in 0..49 {
            star.push_str(&format!("hub leaf{i}\n"));
        }
        let t = WeightedTree::parse(&star).unwrap();
        let s = t.vertex("hub").unwrap();
        let gt = binarize(&attach_super_root(&t, s));
        let opts = DpOptions {
            keep_all: true,
            pessimistic: true,
        };
        let clock = std::time::Instant::now();
        let run = run_dp_float(&gt, 370_000, &DpContext::default(), opts).unwrap();
        eprintln!(
            "star50 pessimistic: root precap {} in {:?}",
            run.root().precap_gap,
            clock.elapsed()
        );
    }

    #[test]
    #[ignore]
    fn full_depth_shapes_stay_fast() {
        let mut path = String::new();
        for i in 0..49 {
            path.push_str(&format!("v{i} v{}\n", i + 1));
        }
        let (e1, d) = timed(&path, "v0", 370_000);
        eprintln!("path50: E1={e1:.9} in {d:?}");
        assert!(e1 <= 49.0 && e1 > 48.99, "{e1}");

        let mut binary = String::new();
        for i in 1..50 {
            binary.push_str(&format!("b{} b{i}\n", (i - 1) / 2));
        }
        let (e1, d) = timed(&binary, "b0", 370_000);
        eprintln!("binary50: E1={e1:.9} in {d:?}");

        let mut star = String::new();
        for i in 0..49 {
            star.push_str(&format!("hub leaf{i}\n"));
        }
        let (e1, d) = timed(&star, "hub", 370_000);
        let h49: f64 = (1..=49).map(|k| 1.0 / k as f64).sum();
        eprintln!("star50: E1={e1:.9} in {d:?}");
        assert!((e1 - h49).abs() < 1e-6);
    }
}
