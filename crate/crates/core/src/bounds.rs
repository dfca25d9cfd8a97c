//! Lower-bound formulas and the checkable numerical ingredients behind them:
//! the hybrid bound for diagonal oracles, the oracle-distance supremum of the
//! test family, moment bounds for sums of bounded variables and a marking
//! survey over Hamming-cube vertices.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::functions::{ObjectiveFunction, TestFunctionInstance};
use crate::grid::GridSpec;
use crate::qge::NormOrder;
use crate::stats::{derive_seed, mean_stderr};

/// `⌈x⌉`, tolerant of rounding just above an integer.
fn ceil_tolerant(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// `c d^{3/2} / (876 ε)`, for `ε ∈ (0, c/146)`.
pub fn lower_bound_p1(d: usize, c: f64, eps: f64) -> Result<f64> {
    if d == 0 || !(c > 0.0) {
        return Err(invalid("d and c must be positive"));
    }
    if !(eps > 0.0 && eps < c / 146.0) {
        return Err(invalid(format!("eps = {eps} must lie in (0, c/146) = (0, {})", c / 146.0)));
    }
    Ok(c * (d as f64).powf(1.5) / (876.0 * eps))
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    pub d: usize,
    pub c: f64,
    pub eps: f64,
    pub p: NormOrder,
    #[serde(rename = "P")]
    pub success_probability: f64,
    pub bound_value: f64,
    /// Repetitions used by the boosting argument, `⌈18(1−P)/(P−½)²⌉`, at least 1.
    pub n_boost: u64,
    /// Set when P = 1, where the formula gives N = 0 and is raised to 1.
    pub p_equals_one_guard: bool,
}

/// `⌈18(1−P)/(P−½)²⌉`, raised to 1 when it would be 0.
pub fn boost_repetitions(big_p: f64) -> Result<(u64, bool)> {
    if !(big_p > 0.5 && big_p <= 1.0) {
        return Err(invalid(format!("success probability P = {big_p} must lie in (1/2, 1]")));
    }
    let raw = ceil_tolerant(18.0 * (1.0 - big_p) / ((big_p - 0.5) * (big_p - 0.5)));
    if raw < 1.0 {
        Ok((1, true))
    } else {
        Ok((raw as u64, false))
    }
}

/// Upper end of the admissible ε range, `c / (292 d^{1−1/p})`.
pub fn general_eps_limit(d: usize, c: f64, p: NormOrder) -> f64 {
    c / (292.0 * (d as f64).powf(1.0 - p.reciprocal()))
}

/// `c d^{½+1/p} / (1752 N ε)`.
pub fn lower_bound_general(d: usize, c: f64, eps: f64, p: NormOrder, big_p: f64) -> Result<LowerBoundReport> {
    if d == 0 || !(c > 0.0) {
        return Err(invalid("d and c must be positive"));
    }
    let limit = general_eps_limit(d, c, p);
    if !(eps > 0.0 && eps < limit) {
        return Err(invalid(format!("eps = {eps} must lie in (0, c/(292 d^(1-1/p))) = (0, {limit})")));
    }
    let (n_boost, guard) = boost_repetitions(big_p)?;
    let bound_value = c * (d as f64).powf(0.5 + p.reciprocal()) / (1752.0 * n_boost as f64 * eps);
    Ok(LowerBoundReport { d, c, eps, p, success_probability: big_p, bound_value, n_boost, p_equals_one_guard: guard })
}

/// `√(N / (9 max_x Σ_j |e^{i f_0(x)} − e^{i f_j(x)}|²))` over the grid, with N
/// the number of peripheral functions. All oracles are diagonal, so the
/// maximum over unit states is attained on a single grid point. Returns +∞
/// when every peripheral agrees with `f0` on the grid.
pub fn hybrid_bound(f0: &ObjectiveFunction, peripherals: &[ObjectiveFunction], grid: &GridSpec) -> Result<f64> {
    if peripherals.is_empty() {
        return Err(invalid("hybrid bound needs at least one peripheral function"));
    }
    if f0.dim() != grid.d() || peripherals.iter().any(|f| f.dim() != grid.d()) {
        return Err(invalid("function and grid dimensions differ"));
    }
    let d = grid.d();
    let worst = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |x, i| -> Result<f64> {
                grid.point_at(i, x);
                let a = Complex64::from_polar(1.0, f0.evaluate(x)?);
                let mut s = 0.0;
                for f in peripherals {
                    s += (a - Complex64::from_polar(1.0, f.evaluate(x)?)).norm_sqr();
                }
                Ok(s)
            },
        )
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    if worst == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((peripherals.len() as f64 / (9.0 * worst)).sqrt())
}

/// `max_x Σ_j |f_{b*}(x) − f_{b^{(j)}}(x)|²` over the given points, where
/// `b^{(j)}` flips coordinate j of `b*`.
pub fn oracle_distance_sup(bstar: &[i8], c: f64, eps: f64, samples: &[Vec<f64>]) -> Result<f64> {
    let d = bstar.len();
    let centre = TestFunctionInstance::new(d, c, eps, bstar.to_vec())?;
    if !centre.in_gevrey_range() {
        return Err(invalid(format!("eps = {eps} must be below c/146 = {}", c / 146.0)));
    }
    let flips: Vec<TestFunctionInstance> = (0..d).map(|j| centre.flipped(j)).collect();
    if samples.iter().any(|x| x.len() != d) {
        return Err(invalid("sample dimension does not match the sign vector"));
    }
    Ok(samples
        .par_iter()
        .map(|x| {
            let f0 = centre.eval(x);
            flips.iter().map(|g| (f0 - g.eval(x)).powi(2)).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max))
}

/// `(146 ε / (c d))²`.
pub fn oracle_distance_bound(d: usize, c: f64, eps: f64) -> f64 {
    (146.0 * eps / (c * d as f64)).powi(2)
}

/// Uniform points in `[-width, width]^d`.
pub fn uniform_points(d: usize, count: usize, width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..d).map(|_| rng.gen_range(-width..=width)).collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub d: usize,
    pub k: u32,
    pub q: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `empirical ≤ bound + 3·stderr`.
    pub pass: bool,
}

/// `[2 (d/2)^k k!]^q · [(d/2)^{2k}]^{1−q}`.
pub fn moment_bound(d: usize, k: u32, q: f64) -> f64 {
    let h = d as f64 / 2.0;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    (2.0 * h.powi(k as i32) * fact).powf(q) * h.powi(2 * k as i32).powf(1.0 - q)
}

/// Monte Carlo estimate of `E[(Σ_j x_j)^{2k}]` with `x_j` i.i.d. from the
/// marginal of a side-1 grid with `n` qubits per axis (uniform over the points
/// `(u + ½)/2^n − ½`, so mean zero and support in `[−½, ½]`).
pub fn moment_bound_check(d: usize, k: u32, q: f64, n: u32, trials: usize, seed: u64) -> Result<MomentCheck> {
    if d == 0 || trials < 2 {
        return Err(invalid("moment check needs d ≥ 1 and at least 2 trials"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("interpolation exponent q = {q} must lie in [0, 1]")));
    }
    let axis = GridSpec::with_guard(1, n, 1.0, u64::MAX)?.axis_coordinates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..trials)
        .map(|_| {
            let s: f64 = (0..d).map(|_| axis[rng.gen_range(0..axis.len())]).sum();
            s.powi(2 * k as i32)
        })
        .collect();
    let (empirical, stderr) = mean_stderr(&values);
    let bound = moment_bound(d, k, q);
    Ok(MomentCheck { d, k, q, empirical, stderr, bound, pass: empirical <= bound + 3.0 * stderr })
}

/// Signature of an estimator under survey: maps a test function and a seed to
/// a gradient estimate.
pub type Estimator<'a> = dyn Fn(&TestFunctionInstance, u64) -> Result<Vec<f64>> + Sync + 'a;

#[derive(Debug, Clone, Serialize)]
pub struct VertexStats {
    pub b: Vec<i8>,
    /// Per coordinate j: observed P[|A_j − ∇_j| ≤ 72ε/d].
    pub hit_rate: Vec<f64>,
    pub marked: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkingSurvey {
    pub d: usize,
    pub full_cube: bool,
    pub vertices: Vec<VertexStats>,
    /// Per coordinate: fraction of surveyed vertices it marks.
    pub marked_fraction_per_coordinate: Vec<f64>,
    /// Coordinates marking at least ⅔ of surveyed vertices (compare with ¾·d).
    pub coordinates_marking_two_thirds: usize,
    /// Marked fraction of the surveyed edges (compare with ¼).
    pub marked_edge_fraction: f64,
    pub surveyed_edges: usize,
    /// The surveyed vertex with the most marked incident edges, and their directions.
    pub best_vertex: Vec<i8>,
    pub best_vertex_directions: Vec<usize>,
}

fn vertex_from_code(d: usize, code: u64) -> Vec<i8> {
    (0..d).map(|j| if (code >> j) & 1 == 1 { 1 } else { -1 }).collect()
}

/// Estimates, for surveyed vertices `b` and coordinates `j`, how often the
/// estimator gets coordinate j of `∇f_b(0)` within `72ε/d`. A vertex is marked
/// by j when that rate is at least ⅔; an edge along j is marked when both
/// endpoints are marked by j. The full cube is used for `d ≤ 4`; beyond that
/// `vertex_budget` random vertices and the edges incident to them.
pub fn empirical_marking_survey(
    estimator: &Estimator<'_>,
    d: usize,
    c: f64,
    eps: f64,
    trials_per_vertex: usize,
    vertex_budget: usize,
    seed: u64,
) -> Result<MarkingSurvey> {
    if d == 0 || d > 63 || trials_per_vertex == 0 {
        return Err(invalid("survey needs 1 ≤ d ≤ 63 and at least one trial per vertex"));
    }
    let full_cube = d <= 4;
    let centres: Vec<u64> = if full_cube {
        (0..1u64 << d).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
        let mut v: Vec<u64> = (0..vertex_budget.max(1)).map(|_| rng.gen::<u64>() & ((1u64 << d) - 1)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut needed: Vec<u64> = centres.clone();
    if !full_cube {
        for &code in &centres {
            needed.extend((0..d).map(|j| code ^ (1 << j)));
        }
        needed.sort_unstable();
        needed.dedup();
    }
    let tol = 72.0 * eps / d as f64;
    let stats: Result<Vec<(u64, VertexStats)>> = needed
        .par_iter()
        .map(|&code| {
            let b = vertex_from_code(d, code);
            let inst = TestFunctionInstance::new(d, c, eps, b.clone())?;
            let grad = inst.gradient_at_origin();
            let mut hits = vec![0usize; d];
            for t in 0..trials_per_vertex {
                let est = estimator(&inst, derive_seed(derive_seed(seed, code), t as u64))?;
                for j in 0..d {
                    if (est[j] - grad[j]).abs() <= tol {
                        hits[j] += 1;
                    }
                }
            }
            let hit_rate: Vec<f64> = hits.iter().map(|&h| h as f64 / trials_per_vertex as f64).collect();
            let marked = hit_rate.iter().map(|&r| r >= 2.0 / 3.0).collect();
            Ok((code, VertexStats { b, hit_rate, marked }))
        })
        .collect();
    let table: HashMap<u64, VertexStats> = stats?.into_iter().collect();
    let vertices: Vec<VertexStats> = centres.iter().map(|c| table[c].clone()).collect();
    let marked_fraction_per_coordinate: Vec<f64> =
        (0..d).map(|j| vertices.iter().filter(|v| v.marked[j]).count() as f64 / vertices.len() as f64).collect();
    let coordinates_marking_two_thirds = marked_fraction_per_coordinate.iter().filter(|&&f| f >= 2.0 / 3.0).count();
    let mut edges = 0usize;
    let mut marked_edges = 0usize;
    let mut best: (usize, u64, Vec<usize>) = (0, centres[0], Vec::new());
    for &code in &centres {
        let mut dirs = Vec::new();
        for j in 0..d {
            let other = code ^ (1 << j);
            // In the full cube each edge is counted once, from its lower end.
            if !full_cube || code < other {
                edges += 1;
                if table[&code].marked[j] && table[&other].marked[j] {
                    marked_edges += 1;
                }
            }
            if table[&code].marked[j] && table[&other].marked[j] {
                dirs.push(j);
            }
        }
        if dirs.len() > best.0 {
            best = (dirs.len(), code, dirs);
        }
    }
    Ok(MarkingSurvey {
        d,
        full_cube,
        vertices,
        marked_fraction_per_coordinate,
        coordinates_marking_two_thirds,
        marked_edge_fraction: marked_edges as f64 / edges.max(1) as f64,
        surveyed_edges: edges,
        best_vertex: vertex_from_code(d, best.1),
        best_vertex_directions: best.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p1_examples() {
        assert!((lower_bound_p1(1, 876.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let v = lower_bound_p1(4, 1.0, 0.005).unwrap();
        assert!((v - 8.0 / (876.0 * 0.005)).abs() < 1e-12);
        assert!((v - 1.826_484_018_264_840_3).abs() < 1e-15);
        let ratio = lower_bound_p1(8, 1.0, 0.005).unwrap() / v;
        assert!((ratio - 2f64.powf(1.5)).abs() < 1e-12);
        assert!(lower_bound_p1(1, 1.0, 1.0 / 146.0).is_err());
    }

    #[test]
    fn general_examples() {
        let r = lower_bound_general(3, 1.0, 0.001, NormOrder::Finite(1.0), 17.0 / 18.0).unwrap();
        assert_eq!(r.n_boost, 6);
        assert!(!r.p_equals_one_guard);
        assert!((r.bound_value - 3f64.powf(1.5) / (1752.0 * 6.0 * 0.001)).abs() < 1e-12);
        let inf = lower_bound_general(4, 1.0, 0.0005, NormOrder::Infinity, 0.9).unwrap();
        let (n, _) = boost_repetitions(0.9).unwrap();
        assert_eq!(n, 12);
        assert!((inf.bound_value - 2.0 / (1752.0 * n as f64 * 0.0005)).abs() < 1e-12);
        let one = lower_bound_general(1, 2.0, 0.001, NormOrder::Finite(1.0), 0.8).unwrap();
        assert!((one.bound_value - 2.0 / (1752.0 * one.n_boost as f64 * 0.001)).abs() < 1e-12);
        let edge = lower_bound_general(2, 1.0, 0.001, NormOrder::Finite(2.0), 1.0).unwrap();
        assert_eq!(edge.n_boost, 1);
        assert!(edge.p_equals_one_guard);
        assert!(lower_bound_general(2, 1.0, 0.001, NormOrder::Finite(2.0), 0.5).is_err());
        assert!(lower_bound_general(4, 1.0, 0.01, NormOrder::Finite(1.0), 0.9).is_err());
    }

    #[test]
    fn exact_integer_repetitions_not_rounded_up() {
        // 18·0.2 / 0.3² = 40 exactly in real arithmetic.
        assert_eq!(boost_repetitions(0.8).unwrap().0, 40);
    }

    #[test]
    fn hybrid_identical_peripherals_unbounded() {
        let g = GridSpec::with_guard(1, 3, 1.0, 24).unwrap();
        let f = TestFunctionInstance::all_positive(1, 1.0, 0.005).unwrap().to_objective();
        assert_eq!(hybrid_bound(&f, &[f.clone(), f.clone()], &g).unwrap(), f64::INFINITY);
        assert!(hybrid_bound(&f, &[], &g).is_err());
    }

    #[test]
    fn hybrid_single_peripheral_chord_bound() {
        let g = GridSpec::with_guard(1, 6, 3.0, 24).unwrap();
        let f0 = ObjectiveFunction::new(1, 1.0, 0.0, |x| 0.4 * x[0].sin()).unwrap();
        let f1 = ObjectiveFunction::new(1, 1.0, 0.0, |x| -0.3 * x[0].cos()).unwrap();
        let b = hybrid_bound(&f0, &[f1], &g).unwrap();
        // max |e^{ia}−e^{ib}|² ≤ max |a−b|², so the bound is at least √(1/(9·max|a−b|²)).
        let axis = g.axis_coordinates();
        let gap = axis.iter().map(|&x| (0.4 * x.sin() + 0.3 * x.cos()).powi(2)).fold(0.0, f64::max);
        assert!(b >= (1.0 / (9.0 * gap)).sqrt() - 1e-12);
    }

    #[test]
    fn hybrid_on_test_family_consistent_with_distance_sup() {
        let (d, c, eps) = (3usize, 1.0, 0.004);
        let bstar = vec![1i8, -1, 1];
        let centre = TestFunctionInstance::new(d, c, eps, bstar.clone()).unwrap();
        let peripherals: Vec<ObjectiveFunction> = (0..d).map(|j| centre.flipped(j).to_objective()).collect();
        let g = GridSpec::with_guard(d, 4, 6.0, 24).unwrap();
        let b = hybrid_bound(&centre.to_objective(), &peripherals, &g).unwrap();
        // Chord ≤ arc and the distance supremum give b ≥ √(d/9) · cd/(146ε).
        let floor = (d as f64 / 9.0).sqrt() * c * d as f64 / (146.0 * eps);
        assert!(b >= floor * (1.0 - 1e-12), "{b} < {floor}");
    }

    #[test]
    fn distance_sup_examples() {
        assert_eq!(oracle_distance_sup(&[1, -1], 1.0, 0.005, &[vec![0.0, 0.0]]).unwrap(), 0.0);
        let c = 2.0;
        let v = oracle_distance_sup(&[1], c, 0.005, &[vec![std::f64::consts::PI / (2.0 * c)]]).unwrap();
        assert!((v - oracle_distance_bound(1, c, 0.005)).abs() < 1e-15);
        assert!(oracle_distance_sup(&[1], 1.0, 0.01, &[vec![0.0]]).is_err());
    }

    #[test]
    fn moment_small_case_exact() {
        // n = 1 marginal is ±¼: E[(x₁+x₂)²] = 1/8.
        let m = moment_bound_check(2, 1, 1.0, 1, 200_000, 3).unwrap();
        assert!((m.empirical - 0.125).abs() < 4.0 * m.stderr + 1e-12);
        assert_eq!(m.bound, 2.0);
        assert!(m.pass);
        assert_eq!(moment_bound(2, 3, 0.0), 1.0);
        assert!((moment_bound(1, 2, 0.0) - 1.0 / 16.0).abs() < 1e-18);
    }

    #[test]
    fn survey_extremes() {
        let (d, c, eps) = (3usize, 1.0, 0.005);
        let perfect = |inst: &TestFunctionInstance, _s: u64| Ok(inst.gradient_at_origin());
        let s = empirical_marking_survey(&perfect, d, c, eps, 3, 0, 1).unwrap();
        assert!(s.full_cube);
        assert_eq!(s.vertices.len(), 8);
        assert_eq!(s.marked_edge_fraction, 1.0);
        assert_eq!(s.coordinates_marking_two_thirds, 3);
        assert_eq!(s.surveyed_edges, 12);
        let zero = |_: &TestFunctionInstance, _s: u64| Ok(vec![0.0; 3]);
        let z = empirical_marking_survey(&zero, d, c, eps, 3, 0, 1).unwrap();
        assert_eq!(z.marked_edge_fraction, 0.0);
        assert!(z.vertices.iter().all(|v| v.marked.iter().all(|m| !m)));
        let big =
            empirical_marking_survey(&|_: &TestFunctionInstance, _| Ok(vec![0.0; 6]), 6, c, eps, 1, 5, 2).unwrap();
        assert!(!big.full_cube);
        assert!(big.vertices.len() <= 5);
    }

    proptest! {
        #[test]
        fn distance_sup_never_exceeds_bound(seed in any::<u64>(), d in 1usize..6, c in 0.2f64..5.0) {
            let eps = c / 150.0;
            let b: Vec<i8> = (0..d).map(|j| if (seed >> j) & 1 == 0 { 1 } else { -1 }).collect();
            let pts = uniform_points(d, 200, 10.0 / c, seed);
            let v = oracle_distance_sup(&b, c, eps, &pts).unwrap();
            prop_assert!(v <= oracle_distance_bound(d, c, eps) + 1e-12);
        }

        #[test]
        fn bounds_homogeneous(d in 1usize..10, c in 0.5f64..5.0, t in 0.1f64..10.0, big_p in 0.55f64..1.0) {
            let eps = c / 2000.0;
            let a = lower_bound_p1(d, c, eps).unwrap();
            let b = lower_bound_p1(d, t * c, t * eps).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
            let g1 = lower_bound_general(d, c, eps / d as f64, NormOrder::Finite(2.0), big_p).unwrap();
            let g2 = lower_bound_general(d, t * c, t * eps / d as f64, NormOrder::Finite(2.0), big_p).unwrap();
            prop_assert!((g1.bound_value - g2.bound_value).abs() <= 1e-9 * g1.bound_value);
        }

        #[test]
        fn hybrid_monotone_in_gap(s1 in 0.0f64..0.4, s2 in 0.0f64..0.4) {
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            prop_assume!(lo > 1e-6);
            let g = GridSpec::with_guard(1, 4, 2.0, 24).unwrap();
            let f0 = ObjectiveFunction::zero(1).unwrap();
            let p = |a: f64| ObjectiveFunction::new(1, 1.0, 0.0, move |x| a * x[0].sin()).unwrap();
            let b_lo = hybrid_bound(&f0, &[p(lo)], &g).unwrap();
            let b_hi = hybrid_bound(&f0, &[p(hi)], &g).unwrap();
            prop_assert!(b_hi <= b_lo * (1.0 + 1e-12));
        }
    }
}
