//! Checking `|∂_α f(x)| ≤ ½ c^k (k!)^σ` on sampled multi-indices and points.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

use super::{Domain, ObjectiveFunction};

/// Highest order the finite-difference mode will attempt.
pub const GEVREY_FD_MAX_ORDER: usize = 4;

/// Random multi-indices drawn per order above 2.
const RANDOM_INDICES_PER_ORDER: usize = 50;

/// Ratio tolerance for declared memberships backed by proof.
const STRICT_TOLERANCE: f64 = 1e-9;

/// Ratio tolerance for memberships backed only by numerical evidence.
const EVIDENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GevreyMode {
    /// Use the function's closed-form partials (any order).
    ClosedForm,
    /// Nested O(h²) central differences, order ≤ 4.
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct GevreyRow {
    pub alpha: Vec<usize>,
    pub point: Vec<f64>,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Estimated absolute error of `value` (0 in closed-form mode).
    pub error_estimate: f64,
    /// False when the error estimate exceeds 10% of the bound.
    pub reliable: bool,
}

impl GevreyRow {
    pub fn order(&self) -> usize {
        self.alpha.len()
    }
}

#[derive(Debug, Clone)]
pub struct GevreyReport {
    pub c: f64,
    pub sigma: f64,
    pub tolerance: f64,
    pub rows: Vec<GevreyRow>,
}

impl GevreyReport {
    pub fn worst_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn worst_row(&self) -> Option<&GevreyRow> {
        self.rows.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    pub fn unreliable(&self) -> usize {
        self.rows.iter().filter(|r| !r.reliable).count()
    }

    /// All reliable ratios within `1 + tolerance`.
    pub fn pass(&self) -> bool {
        self.rows.iter().filter(|r| r.reliable).all(|r| r.ratio <= 1.0 + self.tolerance)
    }
}

/// `½ c^k (k!)^σ`.
pub fn gevrey_bound(c: f64, sigma: f64, k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    0.5 * c.powi(k as i32) * fact.powf(sigma)
}

fn push_nondecreasing(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
    if cur.len() == k {
        out.insert(cur.clone());
        return;
    }
    for a in start..d {
        cur.push(a);
        push_nondecreasing(d, k, a, cur, out);
        cur.pop();
    }
}

/// Every multi-index of order ≤ 2, plus up to 50 random ones per order 3..=max_order.
/// Partials commute, so multi-indices are stored sorted and deduplicated.
pub fn sample_multi_indices(d: usize, max_order: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut out = BTreeSet::new();
    for k in 0..=max_order.min(2) {
        push_nondecreasing(d, k, 0, &mut Vec::new(), &mut out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 3..=max_order {
        for _ in 0..RANDOM_INDICES_PER_ORDER {
            let mut a: Vec<usize> = (0..k).map(|_| rng.gen_range(0..d)).collect();
            a.sort_unstable();
            out.insert(a);
        }
    }
    let mut v: Vec<Vec<usize>> = out.into_iter().collect();
    v.sort_by_key(|a| a.len());
    v
}

/// Uniform points in `[-width, width]^d` intersected with the function's domain.
pub fn sample_domain_points(f: &ObjectiveFunction, count: usize, width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = f.dim();
    let ranges: Vec<(f64, f64)> = match f.domain() {
        Domain::Everywhere => vec![(-width, width); d],
        Domain::Box(b) => b
            .iter()
            .map(|&(lo, hi)| {
                let lo = lo.max(-width);
                let hi = hi.min(width);
                // Stay strictly inside an open box.
                let pad = 1e-9 * (hi - lo).abs().max(1.0);
                (lo + pad, hi - pad)
            })
            .collect(),
    };
    (0..count).map(|_| ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()).collect()
}

/// Weights of the O(h²) central stencil for the a-th derivative, as (offset, weight).
fn stencil(a: usize) -> &'static [(i32, f64)] {
    match a {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("finite-difference order capped at {GEVREY_FD_MAX_ORDER}"),
    }
}

/// Tensor-product stencil evaluation. Returns (estimate, Σ|w·f| for rounding).
fn fd_partial(f: &ObjectiveFunction, counts: &[usize], x: &[f64], h: f64) -> Result<(f64, f64)> {
    fn rec(
        f: &ObjectiveFunction,
        counts: &[usize],
        axis: usize,
        y: &mut Vec<f64>,
        h: f64,
        w: f64,
        acc: &mut (f64, f64),
    ) -> Result<()> {
        if axis == counts.len() {
            let v = f.evaluate(y)?;
            acc.0 += w * v;
            acc.1 += (w * v).abs();
            return Ok(());
        }
        let base = y[axis];
        for &(off, wt) in stencil(counts[axis]) {
            y[axis] = base + off as f64 * h;
            rec(f, counts, axis + 1, y, h, w * wt, acc)?;
        }
        y[axis] = base;
        Ok(())
    }
    let k: usize = counts.iter().sum();
    let mut acc = (0.0, 0.0);
    rec(f, counts, 0, &mut x.to_vec(), h, 1.0, &mut acc)?;
    let scale = h.powi(k as i32);
    Ok((acc.0 / scale, acc.1 / scale))
}

/// Checks the Gevrey derivative bound with parameters `(c, sigma)` (defaults:
/// the function's declared values) over sampled multi-indices up to `max_order`
/// and the given points.
pub fn gevrey_check(
    f: &ObjectiveFunction,
    max_order: usize,
    points: &[Vec<f64>],
    mode: GevreyMode,
    params: Option<(f64, f64)>,
    seed: u64,
) -> Result<GevreyReport> {
    let (c, sigma) = params.unwrap_or((f.c(), f.sigma()));
    if mode == GevreyMode::FiniteDifference && max_order > GEVREY_FD_MAX_ORDER {
        return Err(invalid(format!(
            "finite-difference Gevrey checks are limited to order {GEVREY_FD_MAX_ORDER}, got {max_order}"
        )));
    }
    if mode == GevreyMode::ClosedForm && !f.has_closed_form_partials() {
        return Err(invalid(format!("{} has no closed-form partial derivatives", f.name())));
    }
    for p in points {
        if p.len() != f.dim() {
            return Err(invalid("sample point dimension does not match the function"));
        }
        if !f.domain().contains(p) {
            return Err(Error::OutsideDomain(format!("{} at {:?}", f.name(), p)));
        }
    }
    let tolerance = if f.numerical_evidence() { EVIDENCE_TOLERANCE } else { STRICT_TOLERANCE };
    let alphas = sample_multi_indices(f.dim(), max_order, seed);
    let rows: Result<Vec<Vec<GevreyRow>>> = alphas
        .par_iter()
        .map(|alpha| {
            let k = alpha.len();
            let bound = gevrey_bound(c, sigma, k);
            let mut counts = vec![0usize; f.dim()];
            for &a in alpha {
                counts[a] += 1;
            }
            points
                .iter()
                .map(|x| {
                    let (value, err) = match mode {
                        GevreyMode::ClosedForm => (f.partial(alpha, x).expect("checked above"), 0.0),
                        GevreyMode::FiniteDifference if k == 0 => (f.evaluate(x)?, 0.0),
                        GevreyMode::FiniteDifference => {
                            let h = f64::EPSILON.powf(1.0 / (k as f64 + 2.0)) / c;
                            let (d1, mag) = fd_partial(f, &counts, x, h)?;
                            let (d2, _) = fd_partial(f, &counts, x, 2.0 * h)?;
                            // D(2h) - D(h) ≈ 3·(truncation error of D(h)).
                            (d1, (d2 - d1).abs() / 3.0 + f64::EPSILON * mag)
                        }
                    };
                    let ratio = value.abs() / bound;
                    Ok(GevreyRow {
                        alpha: alpha.clone(),
                        point: x.clone(),
                        value,
                        bound,
                        ratio,
                        error_estimate: err,
                        reliable: err <= 0.1 * bound,
                    })
                })
                .collect()
        })
        .collect();
    Ok(GevreyReport { c, sigma, tolerance, rows: rows?.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{catalog_entry, TestFunctionInstance};

    #[test]
    fn multi_index_enumeration() {
        let a = sample_multi_indices(3, 2, 0);
        // 1 + 3 + 6 sorted multi-indices.
        assert_eq!(a.len(), 10);
        let b = sample_multi_indices(1, 8, 0);
        assert_eq!(b.len(), 9);
        let c = sample_multi_indices(4, 4, 9);
        assert!(c.iter().filter(|a| a.len() == 3).count() <= 20);
        assert!(c.iter().all(|a| a.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn bound_values() {
        assert_eq!(gevrey_bound(2.0, 0.0, 3), 4.0);
        assert!((gevrey_bound(1.0, 0.5, 4) - 0.5 * 24f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn test_function_ratios_bounded_by_amplitude() {
        let t = TestFunctionInstance::new(3, 1.0, 0.005, vec![1, -1, 1]).unwrap();
        let f = t.to_objective();
        let pts = sample_domain_points(&f, 40, 5.0, 1);
        let r = gevrey_check(&f, 8, &pts, GevreyMode::ClosedForm, None, 2).unwrap();
        assert!(r.pass());
        assert!(r.worst_ratio() <= 146.0 * 0.005 + 1e-12);
    }

    #[test]
    fn half_sine_passes_both_modes() {
        let f = catalog_entry("half-sine", 1.5).unwrap();
        let pts = sample_domain_points(&f, 50, 4.0, 3);
        let cf = gevrey_check(&f, 12, &pts, GevreyMode::ClosedForm, None, 0).unwrap();
        assert!(cf.pass(), "worst {}", cf.worst_ratio());
        let fd = gevrey_check(&f, 4, &pts, GevreyMode::FiniteDifference, None, 0).unwrap();
        assert!(fd.pass());
        assert_eq!(fd.unreliable(), 0);
        for (a, b) in cf.rows.iter().zip(&fd.rows) {
            assert!((a.value - b.value).abs() <= 1e-3 * a.bound);
        }
    }

    #[test]
    fn gaussian_fails_at_sigma_zero() {
        let f = catalog_entry("gaussian", 1.0).unwrap();
        let pts = sample_domain_points(&f, 200, 4.0, 5);
        let r = gevrey_check(&f, 12, &pts, GevreyMode::ClosedForm, Some((1.0, 0.0)), 0).unwrap();
        assert!(!r.pass());
        assert!(r.worst_ratio() > 1.0);
        let ok = gevrey_check(&f, 12, &pts, GevreyMode::ClosedForm, None, 0).unwrap();
        assert!(ok.pass(), "worst {}", ok.worst_ratio());
    }

    #[test]
    fn fd_order_cap_enforced() {
        let f = catalog_entry("half-cosine", 1.0).unwrap();
        assert!(gevrey_check(&f, 5, &[vec![0.0]], GevreyMode::FiniteDifference, None, 0).is_err());
    }

    #[test]
    fn outside_domain_points_rejected() {
        let f = catalog_entry("shifted-exponential", 1.0).unwrap();
        assert!(matches!(
            gevrey_check(&f, 2, &[vec![-1.5]], GevreyMode::ClosedForm, None, 0),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn noisy_high_order_fd_flagged_unreliable() {
        // A tiny c makes h large relative to the curvature scale of a fast function.
        let f = ObjectiveFunction::new(1, 1e-3, 0.0, |x| 0.5 * (40.0 * x[0]).sin()).unwrap();
        let r = gevrey_check(&f, 4, &[vec![0.3]], GevreyMode::FiniteDifference, None, 0).unwrap();
        assert!(r.unreliable() > 0);
    }
}
