//! Last-vertex recursion: certified lower bounds on the probability that a
//! given leaf is the final vertex covered.
//!
//! For a node x on the gadget-tree path from the start to a target leaf u,
//! define A_x(t) as the probability that u is first visited during x's t-th
//! stay (the interval between its (t-1)-th and t-th parent-edge returns)
//! and that every subtree hanging off the path strictly below x is fully
//! covered by that moment. At the target leaf itself A(t) = [t == 1]. One
//! step up the path,
//!
//!   A_parent(t) = sum over tl, tr of W(tl, tr; t) A_child(tl) q_off(tr)
//!
//! where W is the last-vertex kernel (the joint law of the child-edge
//! traversal counts at the moment of the tl-th target-edge descent, given
//! t - 1 prior parent returns) and q_off(tr) is a lower bound on the
//! off-child's coverage probability after tr entries, taken from a
//! pessimistic profile: q_off(tr) = (1 - c) - G(tr) for tr >= 1 with G the
//! stored shifted gap and c the pre-cap value, and q_off(0) = 0. Excursions
//! into distinct children are independent given the counts, which is what
//! makes the product form exact.
//!
//! Summing A at the start node over t = 1..=N gives the bound: every
//! vertex other than the start lies in some subtree below the start, so
//! the event underlying the sum is exactly "u is covered last", minus the
//! mass beyond the cap and the pessimism in q_off, both of which only
//! shrink it.
//!
//! As in the coverage propagation, the double sum is rearranged into
//! closed-form negative-binomial passes; the literal kernel consumption is
//! kept in the test module and the rearrangement is checked against it bit
//! for bit.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Result;
use crate::gadget::{GadgetTree, NodeClass};
use crate::numeric::{rat_to_f64, Rat};
use crate::profile::CoverageProfile;

use super::float::{
    add_power, build_h, nb_mix, support, support_h, ExpFloat, BREAK_AFTER, ETA, ROW_CUT,
};
use super::rowsum::{common_den, nb_row, window_row, ScaledVec};
use super::{DpContext, DpRun};

/// Last index with a positive entry; A vectors have no forced endpoints.
fn support_a(a: &[Rat]) -> usize {
    (1..a.len()).rev().find(|&j| !a[j].is_zero()).unwrap_or(0)
}

fn support_a_f64(a: &[f64]) -> usize {
    (1..a.len()).rev().find(|&j| a[j] > 0.0).unwrap_or(0)
}

/// Branch probabilities seen from a path step: parent, target side, off
/// side (None when the node has a single child).
fn split_class<'c>(
    class: &'c NodeClass,
    target_right: bool,
) -> (Option<&'c Rat>, &'c Rat, Option<&'c Rat>) {
    match class {
        NodeClass::OneChild { pp, pl } => {
            assert!(!target_right, "one-child node has no right branch");
            (Some(pp), pl, None)
        }
        NodeClass::TwoChild { pp, pl, pr } => {
            if target_right {
                (Some(pp), pr, Some(pl))
            } else {
                (Some(pp), pl, Some(pr))
            }
        }
        NodeClass::Gadget { pl, pr } => {
            if target_right {
                (None, pr, Some(pl))
            } else {
                (None, pl, Some(pr))
            }
        }
        NodeClass::Leaf => unreachable!("a leaf cannot sit on a path interior"),
    }
}

/// One exact step of the last-vertex recursion. `a` is indexed 1..=n with
/// a[0] unused; `off` must be a pessimistic profile (or None for a
/// one-child step). Output is indexed the same way.
///
/// The rearrangement mirrors the coverage engine. With b(j) = a[j+1],
/// s = pp + pt, sigma = pp/s, x = pt/s, q = pt + po, alpha = pt/q,
/// beta = po/q, k = pt/pp and the off profile (G, c):
///
///   A(t) = k [ (1-c) (P12(t) - P34(t)) - P5(t) - P6(t) ]
///   P12 = sum_j C(t+j-1, j) sigma^t x^j b(j)
///   P34 = sum_m C(t+m-1, m) pp^t pt^m b(m)
///   P5  = b(0) pp^t sum_m C(t+m-1, m) po^m G(m)
///   P6  = pp^t sum_m C(t+m-1, m) q^m Ht(m),
///   Ht(m) = sum_j C(m, j) alpha^j beta^(m-j) b(j) G(m-j)
///
/// (one-child steps keep only k P12 with s = 1). Relay steps are a plain
/// binomial slice: A(t) = sum_tr C(t-1, tr) pt^(t-tr) po^tr a[t-tr]
/// q_off(tr).
pub(crate) fn last_step_exact(
    class: &NodeClass,
    target_right: bool,
    a: &[Rat],
    off: Option<&CoverageProfile<Rat>>,
    ctx: &DpContext,
) -> Result<Vec<Rat>> {
    let n = a.len() - 1;
    let mut out = vec![Rat::zero(); n + 1];
    let hi_a = support_a(a);
    if hi_a == 0 {
        return Ok(out);
    }
    let (pp, pt, po) = split_class(class, target_right);
    match pp {
        None => {
            // relay step
            let po = po.expect("relay nodes have two children");
            let off = off.expect("relay step needs the off-child profile");
            let rg = &off.gaps;
            let cr = &off.precap_gap;
            let hi_r = rg.len() - 2;
            let one_minus_c = &Rat::one() - cr;
            // q_off(tr) = (1 - c) - G(tr), dense up to n - 1
            let mut qv = vec![Rat::zero(); n];
            for (tr, slot) in qv.iter_mut().enumerate().skip(1) {
                *slot = if tr <= hi_r {
                    &one_minus_c - &rg[tr]
                } else {
                    one_minus_c.clone()
                };
            }
            // out[t] = sum_tr C(t-1, tr) pt^(t-tr) po^tr a[t-tr] qv[tr],
            // accumulated over the common denominator w^t La Lq.
            let (ptn, pon, w) = common_den(pt, po);
            let sva = ScaledVec::powers(a, 1, hi_a, &ptn);
            let svq = ScaledVec::powers(&qv, 1, n - 1, &pon);
            let den_aq = &sva.den * &svq.den;
            let mut wt = &w * &w; // w^t, starting at t = 2
            for t in 2..=n {
                ctx.check()?;
                if t > 2 {
                    wt *= &w;
                }
                let mut acc = BigInt::zero();
                let mut binom = BigInt::one();
                for tr in 1..t {
                    binom = binom * BigInt::from(t - tr) / BigInt::from(tr);
                    let tl = t - tr;
                    if tl > sva.hi || tr > svq.hi {
                        continue;
                    }
                    if !sva.e[tl].is_zero() && !svq.e[tr].is_zero() {
                        acc += &binom * &sva.e[tl] * &svq.e[tr];
                    }
                }
                out[t] = Rat::new(acc, &wt * &den_aq);
            }
        }
        Some(pp) => {
            let hi_b = hi_a - 1;
            let bv: Vec<Rat> = a[1..=hi_a].to_vec(); // bv[j] = a[j + 1]
            let k = pt / pp;
            match off {
                None => {
                    // one-child step, s = pp + pt = 1:
                    // out[t] = k pp^t sum_j C(t+j-1, j) pt^j b(j)
                    let svb = ScaledVec::nb(&bv, 0, hi_b, pt);
                    let kd_den = k.denom() * &svb.den;
                    let mut ppn = BigInt::one();
                    let mut ppd = BigInt::one();
                    for t in 1..=n {
                        ctx.check()?;
                        ppn *= pp.numer();
                        ppd *= pp.denom();
                        let row = nb_row(t, &svb);
                        out[t] = Rat::new(k.numer() * &ppn * row, &ppd * &kd_den);
                    }
                }
                Some(off) => {
                    let rg = &off.gaps;
                    let cr = &off.precap_gap;
                    let hi_r = {
                        let mut h = 0;
                        for j in (1..rg.len() - 1).rev() {
                            if !rg[j].is_zero() {
                                h = j;
                                break;
                            }
                        }
                        h
                    };
                    let po = po.expect("two-child step needs the off probability");
                    let s = pp + pt;
                    let sigma = pp / &s;
                    let x = pt / &s;
                    let q = pt + po;
                    let alpha = pt / &q;
                    let beta = po / &q;
                    let one_minus_c = &Rat::one() - cr;
                    // Ht(m): windowed coupling of b and the off gaps.
                    let m_hi = hi_b + hi_r;
                    let mut ht = vec![Rat::zero(); m_hi + 1];
                    let wb = ScaledVec::nb(&bv, 1, hi_b, &alpha);
                    let wr = ScaledVec::nb(rg, 1, hi_r, &beta);
                    let hden = &wb.den * &wr.den;
                    for m in 2..=m_hi {
                        ctx.check()?;
                        let j0 = 1.max(m.saturating_sub(hi_r));
                        let j1 = hi_b.min(m - 1);
                        if j0 > j1 {
                            continue;
                        }
                        let row = window_row(m, j0, j1, &wb, &wr);
                        if !row.is_zero() {
                            ht[m] = Rat::new(row, hden.clone());
                        }
                    }
                    let sv12 = ScaledVec::nb(&bv, 0, hi_b, &x);
                    let sv34 = ScaledVec::nb(&bv, 0, hi_b, pt);
                    let sv5 = ScaledVec::nb(rg, 1, hi_r, po);
                    let sv6 = ScaledVec::nb(&ht, 1, m_hi, &q);
                    let b0 = bv[0].clone();
                    let mut sgt = Rat::one();
                    let mut ppt = Rat::one();
                    for t in 1..=n {
                        ctx.check()?;
                        sgt *= &sigma;
                        ppt *= pp;
                        let p12 = &sgt * &Rat::new(nb_row(t, &sv12), sv12.den.clone());
                        let p34 = &ppt * &Rat::new(nb_row(t, &sv34), sv34.den.clone());
                        let p5 = if b0.is_zero() {
                            Rat::zero()
                        } else {
                            &(&b0 * &ppt) * &Rat::new(nb_row(t, &sv5), sv5.den.clone())
                        };
                        let p6 = &ppt * &Rat::new(nb_row(t, &sv6), sv6.den.clone());
                        let val = &(&one_minus_c * &(&p12 - &p34)) - &(&p5 + &p6);
                        out[t] = &k * &val;
                        debug_assert!(
                            !out[t].is_negative() && out[t] <= Rat::one(),
                            "last-vertex step left [0, 1]"
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Relay step of the float recursion: banded walk over the binomial family
/// F(m, j) = C(m, j) pt^(m-j) po^j at m = t - 1, emitting
/// out[t] = pt * sum_j F(t-1, j) a[t-j] q_off(j).
#[allow(clippy::too_many_arguments)]
fn relay_last(
    pt: f64,
    po: f64,
    a: &[f64],
    hi_a: usize,
    rg: &[f64],
    hi_r: usize,
    cr: f64,
    out: &mut [f64],
    inv: &[f64],
    ctx: &DpContext,
) -> Result<()> {
    let n = out.len() - 1;
    if hi_a == 0 {
        return Ok(());
    }
    let a_cap = a[1..=hi_a].iter().cloned().fold(0.0f64, f64::max);
    if a_cap == 0.0 {
        return Ok(());
    }
    let q_off = |j: usize| -> f64 {
        let g = if j <= hi_r { rg[j] } else { 0.0 };
        ((1.0 - cr) - g).max(0.0)
    };
    let tp = pt / po;
    let pt_ratio = po / pt;
    // anchor: F(m, j) at j = j_a, from m = 1, j = 1 (value po).
    let mut anchor = ExpFloat::new(po);
    let mut j_a = 1usize;
    let mut below = 0u32;
    for t in 2..=n {
        if t.trailing_zeros() >= 10 {
            ctx.check()?;
        }
        let m = t - 1;
        if t > 2 {
            anchor.mul(pt * m as f64 * inv[m - j_a]);
        }
        let j_top = m;
        let j_bot = 1.max((m + 1).saturating_sub(hi_a));
        while j_a < j_top {
            if j_a < j_bot || po * (m - j_a) as f64 > pt * (j_a + 1) as f64 {
                anchor.mul((m - j_a) as f64 * inv[j_a + 1] * pt_ratio);
                j_a += 1;
            } else {
                break;
            }
        }
        let a0 = anchor.to_f64();
        let width = (j_top - j_bot + 1) as f64;
        if a0 * width * a_cap < ROW_CUT {
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
            if m + 1 - j <= hi_a {
                acc += term * a[m + 1 - j] * q_off(j);
            }
            if j >= j_top {
                break;
            }
            let rr = (m - j) as f64 * inv[j + 1] * pt_ratio;
            let next = term * rr;
            if rr < 0.9999 && next * a_cap < ETA * (1.0 - rr) {
                break;
            }
            term = next;
            j += 1;
        }
        term = a0;
        j = j_a;
        while j > j_bot {
            let next = term * j as f64 * inv[m - j + 1] * tp;
            if next * (j as f64) * a_cap < ETA {
                break;
            }
            term = next;
            j -= 1;
            if m + 1 - j <= hi_a {
                acc += term * a[m + 1 - j] * q_off(j);
            }
        }
        out[t] = pt * acc;
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

/// One float step of the last-vertex recursion; mirrors
/// [`last_step_exact`] with banded passes.
pub(crate) fn last_step_float(
    class: &NodeClass,
    target_right: bool,
    a: &[f64],
    off: Option<&CoverageProfile<f64>>,
    inv: &[f64],
    ctx: &DpContext,
) -> Result<Vec<f64>> {
    let n = a.len() - 1;
    let mut out = vec![0.0f64; n + 1];
    let hi_a = support_a_f64(a);
    if hi_a == 0 {
        return Ok(out);
    }
    let (pp, pt, po) = split_class(class, target_right);
    match pp {
        None => {
            let po = rat_to_f64(po.expect("relay nodes have two children"));
            let pt = rat_to_f64(pt);
            let off = off.expect("relay step needs the off-child profile");
            let hi_r = support(&off.gaps);
            relay_last(
                pt,
                po,
                a,
                hi_a,
                &off.gaps,
                hi_r,
                off.precap_gap,
                &mut out,
                inv,
                ctx,
            )?;
        }
        Some(pp) => {
            let hi_b = hi_a - 1;
            let pp = rat_to_f64(pp);
            let ptf = rat_to_f64(pt);
            let k = ptf / pp;
            // shifted weights b(j) = a[j+1], stored at index j for the
            // banded passes (index 0 handled by closed-form power terms)
            let mut bv = vec![0.0f64; hi_b + 2];
            for (j, slot) in bv.iter_mut().enumerate().take(hi_b + 1) {
                *slot = a[j + 1];
            }
            let b0 = bv[0];
            match off {
                None => {
                    // s = pp + pt = 1
                    if b0 > 0.0 {
                        add_power(&mut out, pp, k * b0);
                    }
                    nb_mix(pp, ptf, &bv, hi_b, k, &mut out, inv, ctx)?;
                }
                Some(off) => {
                    let po = rat_to_f64(po.expect("two-child step needs the off probability"));
                    let rg = &off.gaps;
                    let cr = off.precap_gap;
                    let hi_r = support(rg);
                    let s = pp + ptf;
                    let (sigma, x) = (pp / s, ptf / s);
                    let q = ptf + po;
                    let k1 = k * (1.0 - cr);
                    if b0 > 0.0 {
                        add_power(&mut out, sigma, k1 * b0);
                        add_power(&mut out, pp, -k1 * b0);
                    }
                    nb_mix(sigma, x, &bv, hi_b, k1, &mut out, inv, ctx)?;
                    nb_mix(pp, ptf, &bv, hi_b, -k1, &mut out, inv, ctx)?;
                    if b0 > 0.0 && hi_r > 0 {
                        nb_mix(pp, po, rg, hi_r, -k * b0, &mut out, inv, ctx)?;
                    }
                    if hi_b > 0 && hi_r > 0 {
                        let ht = build_h(ptf / q, po / q, &bv, hi_b, rg, hi_r, inv, ctx, false)?;
                        nb_mix(pp, q, &ht, support_h(&ht), -k, &mut out, inv, ctx)?;
                    }
                }
            }
            for v in out.iter_mut().skip(1) {
                *v = v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

/// Finds the gadget node of each original vertex.
pub(crate) fn original_nodes(gt: &GadgetTree) -> Vec<usize> {
    let mut node_of = vec![usize::MAX; gt.n_original];
    for (g, role) in gt.role.iter().enumerate() {
        if let crate::gadget::Role::Original(v) = role {
            node_of[*v] = g;
        }
    }
    node_of
}

/// Walks the path from an original leaf's gadget node up to the start,
/// applying the last-vertex step at every ancestor, and returns the
/// truncated sum: a certified lower bound on the probability that this
/// leaf is covered last. `run` must be a pessimistic keep-all run.
pub(crate) fn leaf_last_bound_exact(
    gt: &GadgetTree,
    run: &DpRun<Rat>,
    leaf_node: usize,
    ctx: &DpContext,
) -> Result<Rat> {
    let n = run.root().cap;
    let mut a = vec![Rat::zero(); n + 1];
    a[1] = Rat::one();
    let mut child = leaf_node;
    let mut parent = gt.parent[child].expect("start cannot be the target leaf");
    while parent != 0 {
        let kids = &gt.children[parent];
        let target_right = kids.len() == 2 && kids[1] == child;
        let off = if kids.len() == 2 {
            let o = if target_right { kids[0] } else { kids[1] };
            Some(
                run.profiles[o]
                    .as_ref()
                    .expect("last-vertex walk needs a keep-all run"),
            )
        } else {
            None
        };
        a = last_step_exact(&gt.class[parent], target_right, &a, off, ctx)?;
        child = parent;
        parent = gt.parent[child].expect("walk escaped the root");
    }
    let mut total = Rat::zero();
    for v in &a[1..] {
        if !v.is_zero() {
            total += v;
        }
    }
    debug_assert!(total <= Rat::one());
    Ok(total)
}

/// Float twin of [`leaf_last_bound_exact`].
pub(crate) fn leaf_last_bound_float(
    gt: &GadgetTree,
    run: &DpRun<f64>,
    leaf_node: usize,
    inv: &[f64],
    ctx: &DpContext,
) -> Result<f64> {
    let n = run.root().cap;
    let mut a = vec![0.0f64; n + 1];
    a[1] = 1.0;
    let mut child = leaf_node;
    let mut parent = gt.parent[child].expect("start cannot be the target leaf");
    while parent != 0 {
        let kids = &gt.children[parent];
        let target_right = kids.len() == 2 && kids[1] == child;
        let off = if kids.len() == 2 {
            let o = if target_right { kids[0] } else { kids[1] };
            Some(
                run.profiles[o]
                    .as_ref()
                    .expect("last-vertex walk needs a keep-all run"),
            )
        } else {
            None
        };
        a = last_step_float(&gt.class[parent], target_right, &a, off, inv, ctx)?;
        child = parent;
        parent = gt.parent[child].expect("walk escaped the root");
    }
    Ok(a[1..].iter().sum())
}
