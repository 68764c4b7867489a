//! Exact-rational propagation without materialized tables.
//!
//! The table-based double sum is rearranged into gap space. Writing
//! G = 1 - P for each profile and extending child profiles by G = 0 beyond
//! the cap (exactly what the folded kernel columns implement), the
//! propagated gap decomposes by inclusion-exclusion into closed-form base
//! terms plus negative-binomial-weighted sums of child gaps:
//!
//! * one child:  G_i(t) = pp^t + sum_j C(t+j-1, j) pl^j pp^t G_l(j)
//! * two children:
//!   G_i(t) = al^t + ar^t - pp^t + T_l(t) + T_r(t) - T_lr(t),
//!   al = pp/(pp+pl), ar = pp/(pp+pr), where T_l weighs G_l by the
//!   difference between the thinned marginal and the joint zero-right
//!   column, and T_lr couples both gap vectors through a binomial mixture
//!   H(m) over the total child count m.
//! * relay: a single binomial slice per t.
//!
//! Every step is a finite rational rearrangement of the defining sums, so
//! the output equals the reference implementation cell for cell; the test
//! suite asserts bitwise equality.
//!
//! Pessimistic runs extend each child gap by its pre-cap constant c instead
//! of by zero. Substituting G + c for G in the defining sums adds closed
//! forms on top of the optimistic value V_opt:
//!
//! * one child:  V = V_opt + c (1 - pp^t)
//! * two children: V = V_opt + g (1 - al^t - ar^t + pp^t)
//!   - cl T_r(t) - cr T_l(t), with g = cl + cr - cl cr and T_l, T_r the
//!   thinned-minus-zero child sums already computed for V_opt,
//! * relay: add cl, cr to the child gaps inside the binomial slice.
//!
//! The result is then shift-stored (see [`super::DpOptions`]).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Result;
use crate::gadget::{GadgetTree, NodeClass};
use crate::numeric::Rat;
use crate::profile::CoverageProfile;

use super::rowsum::{common_den, nb_row, power_table, window_row, ScaledVec};
use super::{DpContext, DpOptions, DpRun};

/// Highest index with a nonzero gap (0 when none): loops only need to run
/// over the true support of a child profile.
fn support(gaps: &[Rat]) -> usize {
    (1..gaps.len() - 1)
        .rev()
        .find(|&j| !gaps[j].is_zero())
        .unwrap_or(0)
}

fn propagate_exact(
    class: &NodeClass,
    left: &CoverageProfile<Rat>,
    right: Option<&CoverageProfile<Rat>>,
    n: usize,
    ctx: &DpContext,
    pessimistic: bool,
) -> Result<(Vec<Rat>, Rat)> {
    let mut gaps = vec![Rat::zero(); n + 1];
    gaps[0] = Rat::one();
    match class {
        NodeClass::OneChild { pp, pl } => {
            let lg = &left.gaps;
            let cl = &left.precap_gap;
            let hi = support(lg);
            let sv = ScaledVec::nb(lg, 1, hi, pl);
            let pess = pessimistic && !cl.is_zero();
            let mut ppn = BigInt::one();
            let mut ppd = BigInt::one();
            for t in 1..=n {
                ctx.check()?;
                ppn *= pp.numer();
                ppd *= pp.denom();
                // pp^t (1 + sum_j C(t+j-1, j) pl^j G_l(j)), plus the
                // pessimistic extension cl (1 - pp^t), assembled over one
                // common denominator so the row costs one reduction.
                let row = nb_row(t, &sv);
                let num = &ppn * &(&sv.den + &row);
                gaps[t] = if pess {
                    Rat::new(
                        num * cl.denom() + cl.numer() * (&ppd - &ppn) * &sv.den,
                        cl.denom() * &ppd * &sv.den,
                    )
                } else {
                    Rat::new(num, &ppd * &sv.den)
                };
            }
        }
        NodeClass::TwoChild { pp, pl, pr } => {
            let right = right.expect("two-child node needs a right profile");
            let lg = &left.gaps;
            let rg = &right.gaps;
            let cl = &left.precap_gap;
            let cr = &right.precap_gap;
            let hi_l = support(lg);
            let hi_r = support(rg);
            let sl = pp + pl;
            let sr = pp + pr;
            let al = pp / &sl;
            let ar = pp / &sr;
            let sig_l = pl / &sl;
            let sig_r = pr / &sr;
            let q = pl + pr;
            let alpha = pl / &q;
            let beta = pr / &q;
            // H(m) = sum_j C(m,j) alpha^j beta^(m-j) G_l(j) G_r(m-j).
            let m_hi = hi_l + hi_r;
            let mut h = vec![Rat::zero(); m_hi + 1];
            let wl = ScaledVec::nb(lg, 1, hi_l, &alpha);
            let wr = ScaledVec::nb(rg, 1, hi_r, &beta);
            let hden = &wl.den * &wr.den;
            for m in 2..=m_hi {
                ctx.check()?;
                let j0 = 1.max(m.saturating_sub(hi_r));
                let j1 = hi_l.min(m - 1);
                if j0 > j1 {
                    continue;
                }
                let row = window_row(m, j0, j1, &wl, &wr);
                if !row.is_zero() {
                    h[m] = Rat::new(row, hden.clone());
                }
            }
            // scaled tables for the four per-row child sums and the H mix
            let sv_tl = ScaledVec::nb(lg, 1, hi_l, &sig_l);
            let sv_zl = ScaledVec::nb(lg, 1, hi_l, pl);
            let sv_tr = ScaledVec::nb(rg, 1, hi_r, &sig_r);
            let sv_zr = ScaledVec::nb(rg, 1, hi_r, pr);
            let sv_h = ScaledVec::nb(&h, 1, m_hi, &q);
            let pess = pessimistic && (!cl.is_zero() || !cr.is_zero());
            let gamma = if pess {
                &(cl + cr) - &(cl * cr)
            } else {
                Rat::zero()
            };
            let mut alt = Rat::one();
            let mut art = Rat::one();
            let mut ppt = Rat::one();
            for t in 1..=n {
                ctx.check()?;
                alt *= &al;
                art *= &ar;
                ppt *= pp;
                // T_l: thinned marginal minus explicit zero-right column.
                let thin = Rat::new(nb_row(t, &sv_tl), sv_tl.den.clone());
                let zero = Rat::new(nb_row(t, &sv_zl), sv_zl.den.clone());
                let tsum_l = &(&alt * &thin) - &(&ppt * &zero);
                let thin = Rat::new(nb_row(t, &sv_tr), sv_tr.den.clone());
                let zero = Rat::new(nb_row(t, &sv_zr), sv_zr.den.clone());
                let tsum_r = &(&art * &thin) - &(&ppt * &zero);
                // T_lr, subtracted: pp^t sum_m C(t+m-1, m) q^m H(m).
                let t_lr = &ppt * &Rat::new(nb_row(t, &sv_h), sv_h.den.clone());
                let mut gap = &(&(&(&alt + &art) - &ppt) + &(&tsum_l + &tsum_r)) - &t_lr;
                if pess {
                    // Both-children-visited probability, weighted by gamma.
                    let both = &(&Rat::one() - &(&alt + &art)) + &ppt;
                    gap += &(&gamma * &both);
                    if !cl.is_zero() && !tsum_r.is_zero() {
                        gap -= &(cl * &tsum_r);
                    }
                    if !cr.is_zero() && !tsum_l.is_zero() {
                        gap -= &(cr * &tsum_l);
                    }
                }
                gaps[t] = gap;
            }
        }
        NodeClass::Gadget { pl, pr } => {
            let right = right.expect("relay node needs a right profile");
            let lg = &left.gaps;
            let rg = &right.gaps;
            let cl = &left.precap_gap;
            let cr = &right.precap_gap;
            let hi_l = support(lg);
            let hi_r = support(rg);
            let pess_l = pessimistic && !cl.is_zero();
            let pess_r = pessimistic && !cr.is_zero();
            // Pessimistic runs extend the child gaps by their pre-cap
            // constants, which makes them dense up to n - 1; materialize the
            // extended vectors so one scaling covers both cases.
            let shift = |g: &[Rat], hi: usize, c: &Rat| -> Vec<Rat> {
                let mut v = vec![Rat::zero(); n];
                for (j, slot) in v.iter_mut().enumerate().take(n).skip(1) {
                    *slot = if j <= hi { &g[j] + c } else { c.clone() };
                }
                v
            };
            let shifted_l;
            let (gl_src, eff_hi_l) = if pess_l {
                shifted_l = shift(lg, hi_l, cl);
                (shifted_l.as_slice(), n - 1)
            } else {
                (lg.as_slice(), hi_l)
            };
            let shifted_r;
            let (gr_src, eff_hi_r) = if pess_r {
                shifted_r = shift(rg, hi_r, cr);
                (shifted_r.as_slice(), n - 1)
            } else {
                (rg.as_slice(), hi_r)
            };
            // binomial slice over a common denominator w for both rates:
            // C(t,j) pl^j pr^(t-j) cross(G_l(j), G_r(t-j)), j in 1..t-1,
            // plus the j = 0 and j = t boundary powers.
            let (pln, prn, w) = common_den(pl, pr);
            let svl = ScaledVec::powers(gl_src, 1, eff_hi_l, &pln);
            let svr = ScaledVec::powers(gr_src, 1, eff_hi_r, &prn);
            let pltab = power_table(&pln, n);
            let prtab = power_table(&prn, n);
            let ll_lr = &svl.den * &svr.den;
            let zero = BigInt::zero();
            let mut wt = BigInt::one();
            for t in 1..=n {
                ctx.check()?;
                wt *= &w;
                let mut acc = (&pltab[t] + &prtab[t]) * &ll_lr;
                let mut binom = BigInt::one();
                for j in 1..t {
                    binom = binom * BigInt::from(t - j + 1) / BigInt::from(j);
                    let el = if j <= svl.hi { &svl.e[j] } else { &zero };
                    let er = if t - j <= svr.hi { &svr.e[t - j] } else { &zero };
                    let el_z = el.is_zero();
                    let er_z = er.is_zero();
                    if el_z && er_z {
                        continue;
                    }
                    // cross(gl, gr) = gl + gr - gl gr, each part scaled to
                    // the shared denominator w^t svl.den svr.den
                    let mut cross = BigInt::zero();
                    if !el_z {
                        cross += el * &prtab[t - j] * &svr.den;
                    }
                    if !er_z {
                        cross += er * &pltab[j] * &svl.den;
                    }
                    if !el_z && !er_z {
                        cross -= el * er;
                    }
                    acc += &binom * &cross;
                }
                gaps[t] = Rat::new(acc, &wt * &ll_lr);
            }
        }
        NodeClass::Leaf => unreachable!("leaves are constructed directly"),
    }
    let precap = if pessimistic {
        // Shift storage: keep the cap value aside and store gaps relative to
        // it, restoring the gaps[cap] == 0 invariant the loops above assume
        // of their inputs. Raw pessimistic gaps are monotone in t, so the
        // shifted values stay nonnegative.
        let cap_val = std::mem::replace(&mut gaps[n], Rat::zero());
        if !cap_val.is_zero() {
            for g in gaps[1..n].iter_mut() {
                *g -= &cap_val;
                debug_assert!(!g.is_negative(), "pessimistic gap below its cap value");
            }
        }
        cap_val
    } else {
        std::mem::replace(&mut gaps[n], Rat::zero())
    };
    Ok((gaps, precap))
}

/// Bottom-up exact run. With `opts.keep_all` false, child profiles are
/// dropped as soon as their parent is finished (the start node's is always
/// kept).
pub fn run_dp_exact(
    gt: &GadgetTree,
    n: usize,
    ctx: &DpContext,
    opts: DpOptions,
) -> Result<DpRun<Rat>> {
    assert!(n >= 1);
    let mut profiles: Vec<Option<CoverageProfile<Rat>>> = vec![None; gt.len()];
    let mut max_gap = Rat::zero();
    for &v in &gt.post_order {
        ctx.check()?;
        let prof = match &gt.class[v] {
            NodeClass::Leaf => CoverageProfile::<Rat>::leaf(n),
            class => {
                let kids = &gt.children[v];
                let (gaps, precap) = {
                    let left = profiles[kids[0]].as_ref().unwrap();
                    let right = kids.get(1).map(|&r| profiles[r].as_ref().unwrap());
                    propagate_exact(class, left, right, n, ctx, opts.pessimistic)?
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
            max_gap = prof.precap_gap.clone();
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
    use crate::dp::reference::run_dp_reference;
    use crate::gadget::binarize;
    use crate::tree::{attach_super_root, WeightedTree};

    #[test]
    fn matches_reference_bit_for_bit() {
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
            for n in [1usize, 2, 4, 9, 16] {
                for pessimistic in [false, true] {
                    let ctx = DpContext::default();
                    let refr = run_dp_reference(&gt, n, &ctx, pessimistic).unwrap();
                    let opts = DpOptions {
                        keep_all: true,
                        pessimistic,
                    };
                    let fast = run_dp_exact(&gt, n, &ctx, opts).unwrap();
                    for v in 1..gt.len() {
                        let a = refr.profiles[v].as_ref().unwrap();
                        let b = fast.profiles[v].as_ref().unwrap();
                        assert_eq!(
                            a.gaps, b.gaps,
                            "{text:?} start {start} node {v} N={n} pess={pessimistic}"
                        );
                        assert_eq!(
                            a.precap_gap, b.precap_gap,
                            "{text:?} start {start} node {v} N={n} pess={pessimistic} precap"
                        );
                    }
                    assert_eq!(refr.max_precap_gap, fast.max_precap_gap);
                }
            }
        }
    }

    #[test]
    fn drops_interior_profiles_when_asked() {
        let t = WeightedTree::parse("a b\nb c\nc d\n").unwrap();
        let gt = binarize(&attach_super_root(&t, 0));
        let run = run_dp_exact(&gt, 8, &DpContext::default(), DpOptions::default()).unwrap();
        assert!(run.profiles[1].is_some());
        assert!(run.profiles[2..].iter().all(|p| p.is_none()));
    }
}
