//! The certified estimator for expected cover-and-return time.
//!
//! Pipeline: hang the walk's start under a unit super-root edge, binarize,
//! pick a truncation depth, run the coverage dynamic program, and sum the
//! start node's gap profile. Forcing coverage at the cap biases every
//! profile optimistically, so the scaled sum is a true lower bound; adding
//! the a-priori truncation bound gives the upper endpoint.

use num_traits::Zero;

use crate::dp::{exact::run_dp_exact, float::run_dp_float, DpContext, DpOptions};
use crate::error::{Error, Result};
use crate::gadget::{binarize, GadgetTree};
use crate::numeric::{rat_to_f64, rat_u, Rat};
use crate::params::{choose_truncation, TruncationParams};
use crate::profile::{expected_traversals, expected_traversals_f64};
use crate::tree::{attach_super_root, WeightedTree};

/// Arithmetic used by the dynamic program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Rational,
    Float,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Rational => "rational",
            Backend::Float => "float",
        }
    }
}

/// How deep to run the truncated recursion.
#[derive(Debug, Clone)]
pub enum Depth {
    /// Derive the depth from a certified additive error target.
    Epsilon(Rat),
    /// Use this depth as given; the certificate degrades accordingly.
    Explicit(usize),
}

/// Knobs shared by every estimating operation.
#[derive(Debug, Clone)]
pub struct EstimateRequest {
    pub depth: Depth,
    /// `None` selects by cost: rational while the gap tables stay cheap,
    /// floating point beyond.
    pub backend: Option<Backend>,
    pub ctx: DpContext,
}

impl EstimateRequest {
    pub fn with_epsilon(eps: Rat) -> Self {
        EstimateRequest {
            depth: Depth::Epsilon(eps),
            backend: None,
            ctx: DpContext::default(),
        }
    }

    pub fn with_depth(n_trunc: usize) -> Self {
        EstimateRequest {
            depth: Depth::Explicit(n_trunc),
            backend: None,
            ctx: DpContext::default(),
        }
    }
}

/// Numeric results in the arithmetic that produced them. The point
/// estimate doubles as the certified lower endpoint. `upper` is absent
/// when the requested depth is too shallow for the tail analysis to
/// certify anything (a-priori gap >= 1/2).
#[derive(Debug, Clone)]
pub enum EstimateValues {
    Rational {
        estimate: Rat,
        upper: Option<Rat>,
        delta_empirical: Rat,
    },
    Float {
        estimate: f64,
        upper: Option<f64>,
        delta_empirical: f64,
    },
}

/// Outcome of one estimating operation.
#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    /// Vertex count of the full input tree (scales the estimate).
    pub n: usize,
    pub trunc: TruncationParams,
    pub backend: Backend,
    pub values: EstimateValues,
}

impl EstimateOutcome {
    pub(crate) fn trivial(n: usize) -> Self {
        EstimateOutcome {
            n,
            trunc: TruncationParams {
                n_trunc: 0,
                delta: Rat::zero(),
                err_bound: Rat::zero(),
            },
            backend: Backend::Rational,
            values: EstimateValues::Rational {
                estimate: Rat::zero(),
                upper: Some(Rat::zero()),
                delta_empirical: Rat::zero(),
            },
        }
    }

    /// Lower endpoint as f64, for quick comparisons.
    pub fn lower_f64(&self) -> f64 {
        match &self.values {
            EstimateValues::Rational { estimate, .. } => rat_to_f64(estimate),
            EstimateValues::Float { estimate, .. } => *estimate,
        }
    }

    /// Upper endpoint as f64; infinity when uncertified.
    pub fn upper_f64(&self) -> f64 {
        match &self.values {
            EstimateValues::Rational { upper, .. } => {
                upper.as_ref().map_or(f64::INFINITY, rat_to_f64)
            }
            EstimateValues::Float { upper, .. } => upper.unwrap_or(f64::INFINITY),
        }
    }
}

/// Rational cost grows with both the number of gap cells and the bit
/// length of each cell (proportional to depth), so the default backend
/// caps both before falling back to floating point.
pub(crate) fn auto_backend(gadget_nodes: usize, n_trunc: usize) -> Backend {
    if n_trunc <= 1024 && gadget_nodes * n_trunc <= 1_000_000 {
        Backend::Rational
    } else {
        Backend::Float
    }
}

/// Largest accepted truncation depth. Working tables grow linearly with
/// the depth, so this bounds memory at a few hundred megabytes.
pub const MAX_TRUNC: usize = 2_000_000;

/// Relative slack absorbed into floating point endpoints. The float
/// recursion tracks the rational one to better than 1e-12 over every
/// tree class and depth in the test matrix; one spare decade covers the
/// final scaling too.
pub const FLOAT_GUARD: f64 = 1e-11;

pub(crate) fn resolve_depth(depth: &Depth, n_eff: usize) -> Result<TruncationParams> {
    let params = match depth {
        Depth::Epsilon(eps) => choose_truncation(n_eff, eps)?,
        Depth::Explicit(n_trunc) => {
            if *n_trunc == 0 {
                return Err(Error::input("truncation depth must be at least 1"));
            }
            TruncationParams::explicit(n_eff, *n_trunc)
        }
    };
    if params.n_trunc > MAX_TRUNC {
        return Err(Error::resource(format!(
            "truncation depth {} exceeds the engine limit {MAX_TRUNC}",
            params.n_trunc
        )));
    }
    Ok(params)
}

/// Shared tail of every estimating operation: run the DP on an already
/// binarized tree and scale expected traversals by `scale`.
/// `n_eff` is the vertex count governing the tail bound (the unit-chain
/// vertex count for weighted inputs), `n_report` the one reported.
pub(crate) fn estimate_on_gadget(
    gt: &GadgetTree,
    n_eff: usize,
    n_report: usize,
    scale: &Rat,
    req: &EstimateRequest,
) -> Result<EstimateOutcome> {
    let trunc = resolve_depth(&req.depth, n_eff)?;
    let backend = req.backend.unwrap_or_else(|| auto_backend(gt.len(), trunc.n_trunc));
    let uncert = trunc.uncertifiable();
    let values = match backend {
        Backend::Rational => {
            let run = run_dp_exact(gt, trunc.n_trunc, &req.ctx, DpOptions::default())?;
            let e1 = expected_traversals(run.root());
            let estimate = scale * &e1;
            let upper = (!uncert).then(|| scale * &(&e1 + &trunc.err_bound));
            EstimateValues::Rational {
                estimate,
                upper,
                delta_empirical: &rat_u(2) * &run.max_precap_gap,
            }
        }
        Backend::Float => {
            let run = run_dp_float(gt, trunc.n_trunc, &req.ctx, DpOptions::default())?;
            let e1 = expected_traversals_f64(run.root());
            let scale = rat_to_f64(scale);
            // widen both endpoints by FLOAT_GUARD so the interval stays
            // valid despite rounding; without it a fully converged run can
            // land a few ulps above the true value
            let estimate = scale * e1 * (1.0 - FLOAT_GUARD);
            let upper = (!uncert)
                .then(|| scale * (e1 + rat_to_f64(&trunc.err_bound)) * (1.0 + FLOAT_GUARD));
            EstimateValues::Float {
                estimate,
                upper,
                delta_empirical: 2.0 * run.max_precap_gap,
            }
        }
    };
    Ok(EstimateOutcome {
        n: n_report,
        trunc,
        backend,
        values,
    })
}

/// Certified interval for the expected cover-and-return time of the walk
/// on a unit-resistance tree started at vertex `start`.
pub fn cover_return_time(
    tree: &WeightedTree,
    start: usize,
    req: &EstimateRequest,
) -> Result<EstimateOutcome> {
    if !tree.is_unit() {
        return Err(Error::input(
            "tree has non-unit resistances; use the weighted estimator",
        ));
    }
    let n = tree.n();
    if n == 1 {
        return Ok(EstimateOutcome::trivial(1));
    }
    let gt = binarize(&attach_super_root(tree, start));
    let scale = rat_u(2 * (n as u64 - 1));
    estimate_on_gadget(&gt, n, n, &scale, req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat_i64;
    use crate::oracles::exact::oracle_exact;

    fn parse(text: &str) -> WeightedTree {
        WeightedTree::parse(text).unwrap()
    }

    #[test]
    fn single_vertex_is_zero() {
        let t = parse("lonely\n");
        let out = cover_return_time(&t, 0, &EstimateRequest::with_epsilon(rat_i64(1, 1000)))
            .unwrap();
        assert_eq!(out.lower_f64(), 0.0);
        assert_eq!(out.upper_f64(), 0.0);
        assert_eq!(out.n, 1);
    }

    #[test]
    fn single_edge_interval_contains_two() {
        let t = parse("a b\n");
        let req = EstimateRequest::with_epsilon(rat_i64(1, 1000));
        let out = cover_return_time(&t, 0, &req).unwrap();
        assert_eq!(out.backend, Backend::Rational);
        let (lo, hi) = (out.lower_f64(), out.upper_f64());
        assert!(lo <= 2.0 && 2.0 <= hi, "[{lo}, {hi}]");
        assert!(hi - lo <= 2e-3);
        // frozen minimal depth for (n=2, eps=1/1000)
        assert_eq!(out.trunc.n_trunc, 368);
    }

    #[test]
    fn path_interval_contains_exact_value_under_both_backends() {
        let t = parse("a b\nb c\n");
        let exact = oracle_exact(&t, 0).unwrap();
        let truth = rat_to_f64(&exact.cover_return);
        assert_eq!(truth, 8.0);
        for backend in [Backend::Rational, Backend::Float] {
            let req = EstimateRequest {
                depth: Depth::Explicit(512),
                backend: Some(backend),
                ctx: DpContext::default(),
            };
            let out = cover_return_time(&t, 0, &req).unwrap();
            assert!(out.lower_f64() <= truth && truth <= out.upper_f64());
            assert!(truth - out.lower_f64() < 1e-6, "{}", out.lower_f64());
        }
    }

    #[test]
    fn star_interval_contains_coupon_collector_value() {
        let t = parse("hub a\nhub b\nhub c\n");
        let s = t.vertex("hub").unwrap();
        let req = EstimateRequest::with_epsilon(rat_i64(1, 1000));
        let out = cover_return_time(&t, s, &req).unwrap();
        assert_eq!(out.backend, Backend::Float, "auto depth exceeds rational cap");
        let (lo, hi) = (out.lower_f64(), out.upper_f64());
        assert!(lo <= 11.0 && 11.0 <= hi, "[{lo}, {hi}]");
        assert!((hi - lo) / lo <= 1e-3);
    }

    #[test]
    fn global_bounds_hold_on_small_trees() {
        // 2(n-1) <= upper and lower <= 2(n-1)^2 for unit trees
        for (text, start) in [
            ("a b\nb c\nc d\n", 0),
            ("hub a\nhub b\nhub c\nc d\n", 1),
            ("a b\nb c\nb d\nd e\n", 4),
        ] {
            let t = parse(text);
            let n = t.n() as f64;
            let out =
                cover_return_time(&t, start, &EstimateRequest::with_epsilon(rat_i64(1, 100)))
                    .unwrap();
            assert!(out.upper_f64() >= 2.0 * (n - 1.0));
            assert!(out.lower_f64() <= 2.0 * (n - 1.0) * (n - 1.0));
        }
    }

    #[test]
    fn lower_bound_never_exceeds_oracle() {
        for (text, start) in [
            ("a b\nb c\nc d\n", 1),
            ("hub a\nhub b\nhub c\n", 0),
            ("a b\nb c\nb d\nd e\nd f\n", 0),
        ] {
            let t = parse(text);
            let truth = rat_to_f64(&oracle_exact(&t, start).unwrap().cover_return);
            for n_trunc in [4usize, 16, 64] {
                let req = EstimateRequest {
                    depth: Depth::Explicit(n_trunc),
                    backend: Some(Backend::Rational),
                    ctx: DpContext::default(),
                };
                let out = cover_return_time(&t, start, &req).unwrap();
                assert!(
                    out.lower_f64() <= truth + 1e-12,
                    "{text:?} N={n_trunc}: {} > {truth}",
                    out.lower_f64()
                );
            }
        }
    }

    #[test]
    fn expected_traversals_nondecreasing_in_depth() {
        let t = parse("a b\nb c\nb d\nd e\na f\nf g\n");
        let gt = binarize(&attach_super_root(&t, 0));
        let mut prev = Rat::zero();
        for n_trunc in [8usize, 16, 32, 64] {
            let run = run_dp_exact(&gt, n_trunc, &DpContext::default(), DpOptions::default())
                .unwrap();
            let e1 = expected_traversals(run.root());
            assert!(e1 >= prev, "E(1) fell between depths");
            prev = e1;
        }
    }

    #[test]
    fn shallow_depth_loses_the_certificate() {
        let t = parse("a b\n");
        let req = EstimateRequest::with_depth(4);
        let out = cover_return_time(&t, 0, &req).unwrap();
        assert!(out.trunc.uncertifiable());
        match &out.values {
            EstimateValues::Rational { upper, .. } => assert!(upper.is_none()),
            _ => panic!("small depth should stay rational"),
        }
        assert!(out.upper_f64().is_infinite());
    }

    #[test]
    fn weighted_input_is_rejected() {
        let t = parse("a b 2\n");
        let err = cover_return_time(&t, 0, &EstimateRequest::with_depth(8)).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn empirical_delta_tracks_worst_precap_gap() {
        let t = parse("a b\nb c\n");
        let gt = binarize(&attach_super_root(&t, 0));
        let run = run_dp_exact(&gt, 32, &DpContext::default(), DpOptions::default()).unwrap();
        let req = EstimateRequest {
            depth: Depth::Explicit(32),
            backend: Some(Backend::Rational),
            ctx: DpContext::default(),
        };
        let out = cover_return_time(&t, 0, &req).unwrap();
        match &out.values {
            EstimateValues::Rational {
                delta_empirical, ..
            } => {
                assert_eq!(delta_empirical, &(&rat_u(2) * &run.max_precap_gap));
            }
            _ => panic!(),
        }
    }
}
