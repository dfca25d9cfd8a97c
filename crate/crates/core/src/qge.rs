//! The gradient-estimation algorithm end to end.
//!
//! One inner loop prepares the uniform superposition over the grid, applies
//! the smoothing oracle S times, runs the inverse QFT on every axis and
//! measures an outcome `h`, giving the estimate `g = 2πh / (S r)`. The outer
//! loop repeats this N times and aggregates coordinate-wise.

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::functions::ObjectiveFunction;
use crate::grid::{check_guard, memory_guard, GridSpec};
use crate::numerics::CentralDifferenceScheme;
use crate::oracle::{apply_smoothing_oracle_repeated, query_cost, CostModel, Perturbation, QueryLedger};
use crate::state::{OutcomeDistribution, QftMethod, State};
use crate::stats::{binomial_upper_tail, derive_seed, median, wilson_interval, Z95};

/// Order of an ℓ^p norm, `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(NormOrder::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(NormOrder::Finite(p))
        } else {
            Err(invalid(format!("norm order p must lie in [1, ∞], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            NormOrder::Finite(p) => p,
            NormOrder::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero at infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            NormOrder::Finite(p) => 1.0 / p,
            NormOrder::Infinity => 0.0,
        }
    }

    /// `d^{1/p}` with `d^{1/∞} = 1`.
    pub fn dim_factor(self, d: usize) -> f64 {
        match self {
            NormOrder::Finite(p) => (d as f64).powf(1.0 / p),
            NormOrder::Infinity => 1.0,
        }
    }

    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormOrder::Infinity => v.iter().fold(0.0, |a, x| a.max(x.abs())),
            NormOrder::Finite(1.0) => v.iter().map(|x| x.abs()).sum(),
            NormOrder::Finite(2.0) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormOrder::Finite(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }
}

impl FromStr for NormOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" | "max" => Ok(NormOrder::Infinity),
            t => NormOrder::new(t.parse::<f64>().map_err(|_| invalid(format!("cannot parse norm order '{s}'")))?),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormOrder::Finite(p) => write!(f, "{p}"),
            NormOrder::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for NormOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgorithmParams {
    pub sigma: f64,
    pub c: f64,
    pub p: NormOrder,
    pub d: usize,
    pub eps: f64,
}

impl AlgorithmParams {
    pub fn new(sigma: f64, c: f64, p: NormOrder, d: usize, eps: f64) -> Self {
        Self { sigma, c, p, d, eps }
    }

    /// Checks everything except the σ range.
    fn check_basic(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("dimension d must be positive"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(invalid(format!("c must be positive, got {}", self.c)));
        }
        if !(self.eps > 0.0 && self.eps < self.c) {
            return Err(invalid(format!("eps must lie in (0, c) = (0, {}), got {}", self.c, self.eps)));
        }
        if !self.sigma.is_finite() {
            return Err(invalid("sigma must be finite"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_basic()?;
        if !(0.5..=1.0).contains(&self.sigma) {
            return Err(invalid(format!("sigma must lie in [1/2, 1], got {}", self.sigma)));
        }
        Ok(())
    }

    /// Raises σ < ½ to ½ (a smaller-σ Gevrey class is contained in the larger
    /// one). Returns the notice to show the user, if any.
    pub fn clamped(mut self) -> (Self, Option<String>) {
        if self.sigma < 0.5 {
            let note = format!("notice: sigma = {} is below 1/2; running with sigma = 1/2", self.sigma);
            self.sigma = 0.5;
            (self, Some(note))
        } else {
            (self, None)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub eps_prime: f64,
    pub m: usize,
    pub r: f64,
    #[serde(rename = "S")]
    pub s: u64,
    pub n: u32,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub delta: f64,
}

impl DerivedConstants {
    /// Constants from the parameter block, without the memory guard. Used
    /// for sweeps and query-count formulas where no statevector is built.
    pub fn compute(params: &AlgorithmParams) -> Result<Self> {
        params.validate()?;
        let AlgorithmParams { sigma, c, p, d, eps } = *params;
        let df = d as f64;
        let eps_prime = eps / p.dim_factor(d);
        let cds = c * df.powf(sigma);
        let m = ((cds / eps_prime).log2().ceil() as i64).max(2) as usize;
        let mf = m as f64;
        let two_s = 2f64.powf(sigma);
        let r =
            (two_s / (2.0 * E * mf * cds)) * (two_s * eps_prime / (272.0 * PI * E * mf * cds)).powf(1.0 / (2.0 * mf));
        let s_real = (8.0 * PI / (r * eps_prime)).ceil();
        if !(s_real.is_finite() && s_real >= 1.0 && s_real < 2f64.powi(62)) {
            return Err(invalid(format!("derived step count S = {s_real} is out of range")));
        }
        let s = s_real as u64;
        let n = (12.0 * c / eps_prime).log2().ceil().max(1.0) as u32;
        let big_n = (18.0 * (3.0 * df).log2()).ceil() as usize;
        let delta = 1.0 / (12.0 * SQRT_2 * s as f64);
        Ok(Self { eps_prime, m, r, s, n, big_n, delta })
    }

    /// Base calls for a full run: `N · S · query_cost(m, δ)`.
    pub fn total_queries(&self, model: CostModel) -> u64 {
        self.big_n as u64 * self.s * query_cost(self.m, self.delta, model)
    }

    /// Total qubits `n·d` of the grid register.
    pub fn qubits(&self, d: usize) -> u64 {
        self.n as u64 * d as u64
    }
}

/// Derived constants, refusing parameters whose grid exceeds the memory guard.
pub fn derive_constants(params: &AlgorithmParams) -> Result<DerivedConstants> {
    let dc = DerivedConstants::compute(params)?;
    check_guard(dc.n, params.d, memory_guard())?;
    Ok(dc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Aggregation {
    /// Coordinate-wise median: the form the success argument relies on.
    #[default]
    Median,
    /// Coordinate-wise arithmetic mean, for comparison.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub cost_model: CostModel,
    pub aggregation: Aggregation,
    /// Model imperfect fractional oracles as bounded phase noise at precision δ.
    pub perturb: bool,
    pub qft: QftMethod,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { cost_model: CostModel::ExactSim, aggregation: Aggregation::Median, perturb: false, qft: QftMethod::Fft }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub estimate: Vec<f64>,
    pub ledger: QueryLedger,
    pub per_loop_estimates: Vec<Vec<f64>>,
    pub seed: u64,
    pub constants: DerivedConstants,
    pub notices: Vec<String>,
}

/// Everything fixed across runs for one function and parameter set.
pub struct QgePlan {
    f: ObjectiveFunction,
    params: AlgorithmParams,
    constants: DerivedConstants,
    spec: GridSpec,
    scheme: CentralDifferenceScheme,
    options: RunOptions,
    notices: Vec<String>,
    /// Outcome distribution of an unperturbed inner loop.
    exact: Option<OutcomeDistribution>,
}

impl QgePlan {
    /// Plans a run with constants derived from `params` (σ clamped up to ½).
    pub fn new(f: &ObjectiveFunction, params: &AlgorithmParams, options: RunOptions) -> Result<Self> {
        params.check_basic()?;
        let (params, notice) = params.clamped();
        let constants = derive_constants(&params)?;
        let mut plan = Self::with_constants(f, &params, constants, options)?;
        plan.notices.extend(notice);
        Ok(plan)
    }

    /// Plans a run with explicit constants.
    pub fn with_constants(
        f: &ObjectiveFunction,
        params: &AlgorithmParams,
        constants: DerivedConstants,
        options: RunOptions,
    ) -> Result<Self> {
        if f.dim() != params.d {
            return Err(invalid(format!("function has dimension {}, parameters say d = {}", f.dim(), params.d)));
        }
        let spec = GridSpec::new(params.d, constants.n, constants.r)?;
        let scheme = CentralDifferenceScheme::new(constants.m)?;
        let exact = if options.perturb {
            None
        } else {
            let st = inner_loop_state(f, &constants, &spec, &scheme, None, options.qft, &QueryLedger::default())?;
            Some(st.outcome_distribution())
        };
        Ok(Self { f: f.clone(), params: *params, constants, spec, scheme, options, notices: Vec::new(), exact })
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    pub fn params(&self) -> &AlgorithmParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.spec
    }

    pub fn notices(&self) -> &[String] {
        &self.notices
    }

    /// Exact per-loop outcome distribution (unperturbed plans only).
    pub fn exact_distribution(&self) -> Option<&OutcomeDistribution> {
        self.exact.as_ref()
    }

    /// Estimate `g = 2πh/(S r)` for outcome `h`.
    pub fn outcome_to_gradient(&self, h: &[i64]) -> Vec<f64> {
        let scale = 2.0 * PI / (self.constants.s as f64 * self.constants.r);
        h.iter().map(|&hj| scale * hj as f64).collect()
    }

    /// One inner loop with its own ledger. `seed` drives sampling and noise.
    pub fn inner_loop(&self, seed: u64, ledger: &QueryLedger) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        let h = match &self.exact {
            Some(dist) => {
                ledger.record_smoothing(self.constants.m, self.constants.delta, self.constants.s);
                dist.sample(&mut rng)
            }
            None => {
                let noise = Perturbation { seed: derive_seed(seed, 1) };
                let st = inner_loop_state(
                    &self.f,
                    &self.constants,
                    &self.spec,
                    &self.scheme,
                    Some(noise),
                    self.options.qft,
                    ledger,
                )?;
                st.sample_outcome(&mut rng)
            }
        };
        Ok(self.outcome_to_gradient(&h))
    }

    /// N inner loops with streams `derive_seed(master, i)`, aggregated.
    pub fn run(&self, master_seed: u64) -> Result<RunResult> {
        let big_n = self.constants.big_n;
        let loops: Result<Vec<(Vec<f64>, QueryLedger)>> = (0..big_n)
            .into_par_iter()
            .map(|i| {
                let ledger = QueryLedger::new(self.options.cost_model);
                let g = self.inner_loop(derive_seed(master_seed, i as u64), &ledger)?;
                Ok((g, ledger))
            })
            .collect();
        let ledger = QueryLedger::new(self.options.cost_model);
        let mut per_loop = Vec::with_capacity(big_n);
        for (g, l) in loops? {
            ledger.merge(&l)?;
            per_loop.push(g);
        }
        let expected = self.constants.total_queries(self.options.cost_model);
        assert_eq!(ledger.base_calls(), expected, "query ledger disagrees with N·S·cost");
        Ok(RunResult {
            estimate: aggregate(&per_loop, self.options.aggregation),
            ledger,
            per_loop_estimates: per_loop,
            seed: master_seed,
            constants: self.constants,
            notices: self.notices.clone(),
        })
    }
}

/// Coordinate-wise median or mean of equal-length vectors.
pub fn aggregate(vectors: &[Vec<f64>], how: Aggregation) -> Vec<f64> {
    let d = vectors.first().map_or(0, |v| v.len());
    (0..d)
        .map(|j| {
            let col: Vec<f64> = vectors.iter().map(|v| v[j]).collect();
            match how {
                Aggregation::Median => median(&col),
                Aggregation::Mean => col.iter().sum::<f64>() / col.len() as f64,
            }
        })
        .collect()
}

/// Pre-measurement state of one inner loop after the inverse QFT.
pub fn inner_loop_state(
    f: &ObjectiveFunction,
    dc: &DerivedConstants,
    spec: &GridSpec,
    scheme: &CentralDifferenceScheme,
    perturb: Option<Perturbation>,
    qft: QftMethod,
    ledger: &QueryLedger,
) -> Result<State> {
    let mut st = State::uniform_superposition(spec);
    apply_smoothing_oracle_repeated(&mut st, f, scheme, dc.delta, dc.s, perturb, ledger)?;
    st.inverse_qft_all_axes(qft);
    Ok(st)
}

/// Uniform superposition carrying the phase `S (f(0) + ∇f(0)·x)`, after the
/// inverse QFT: what an exactly linear objective would produce.
pub fn ideal_linear_state(
    f: &ObjectiveFunction,
    dc: &DerivedConstants,
    spec: &GridSpec,
    qft: QftMethod,
) -> Result<State> {
    let grad = f.reference_gradient().ok_or(Error::MissingReferenceGradient)?;
    let f0 = f.evaluate(&vec![0.0; spec.d()])?;
    let s = dc.s as f64;
    let phases: Vec<f64> = (0..spec.len())
        .map(|i| {
            let mut x = vec![0.0; spec.d()];
            spec.point_at(i, &mut x);
            s * (f0 + grad.iter().zip(&x).map(|(g, xi)| g * xi).sum::<f64>())
        })
        .collect();
    let mut st = State::uniform_superposition(spec);
    st.apply_phase(|i| phases[i]);
    st.inverse_qft_all_axes(qft);
    Ok(st)
}

/// Distance, minimised over global phase, between the perturbed inner-loop
/// state and [`ideal_linear_state`].
pub fn state_closeness(
    f: &ObjectiveFunction,
    dc: &DerivedConstants,
    spec: &GridSpec,
    scheme: &CentralDifferenceScheme,
    perturb: Perturbation,
) -> Result<f64> {
    let ledger = QueryLedger::default();
    let noisy = inner_loop_state(f, dc, spec, scheme, Some(perturb), QftMethod::Fft, &ledger)?;
    let ideal = ideal_linear_state(f, dc, spec, QftMethod::Fft)?;
    noisy.distance_up_to_phase(&ideal)
}

/// One inner loop: returns `g = 2πh/(S r)` for a sampled outcome `h`.
pub fn run_inner_loop(
    f: &ObjectiveFunction,
    dc: &DerivedConstants,
    spec: &GridSpec,
    scheme: &CentralDifferenceScheme,
    rng: &mut ChaCha8Rng,
    perturb: Option<Perturbation>,
    ledger: &QueryLedger,
) -> Result<Vec<f64>> {
    let st = inner_loop_state(f, dc, spec, scheme, perturb, QftMethod::Fft, ledger)?;
    let h = st.sample_outcome(rng);
    let scale = 2.0 * PI / (dc.s as f64 * dc.r);
    Ok(h.iter().map(|&hj| scale * hj as f64).collect())
}

/// Full run with constants derived from `params`.
pub fn run_qge(f: &ObjectiveFunction, params: &AlgorithmParams, seed: u64, options: RunOptions) -> Result<RunResult> {
    QgePlan::new(f, params, options)?.run(seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuccessEstimate {
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Whether every trial's ledger matched N·S·cost exactly.
    pub ledger_consistent: bool,
    pub base_calls_per_run: u64,
}

/// Exact-distribution summary for one-dimensional inputs.
#[derive(Debug, Clone, Serialize)]
pub struct ExactSuccess {
    /// P[|g − ∇f(0)| ≤ ε′] for one inner loop.
    pub per_loop: f64,
    /// P[Bin(N, p) > N/2] with p = P[|g − ∇f(0)| ≤ ε]: a lower bound on the
    /// probability that the median lands within ε.
    pub majority_lower_bound: f64,
    /// Exact probability that the median of N loops is within ε (odd N only).
    pub median_exact: Option<f64>,
}

/// Repeats full runs with seeds `derive_seed(master, t)` and counts
/// `‖v − ∇f(0)‖_p ≤ ε`.
pub fn estimate_success_probability(
    f: &ObjectiveFunction,
    params: &AlgorithmParams,
    trials: u64,
    master_seed: u64,
    options: RunOptions,
) -> Result<SuccessEstimate> {
    let grad = f.reference_gradient().ok_or(Error::MissingReferenceGradient)?.to_vec();
    let plan = QgePlan::new(f, params, options)?;
    let per_run = plan.constants().total_queries(options.cost_model);
    let outcomes: Result<Vec<(bool, bool)>> = (0..trials)
        .map(|t| {
            let run = plan.run(derive_seed(master_seed, t))?;
            let ok = params.p.distance(&run.estimate, &grad) <= params.eps;
            Ok((ok, run.ledger.base_calls() == per_run))
        })
        .collect();
    let outcomes = outcomes?;
    let successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let (lo, hi) = wilson_interval(successes, trials, Z95);
    Ok(SuccessEstimate {
        trials,
        successes,
        fraction: successes as f64 / trials.max(1) as f64,
        wilson_low: lo,
        wilson_high: hi,
        ledger_consistent: outcomes.iter().all(|o| o.1),
        base_calls_per_run: per_run,
    })
}

/// Integrates the exact inner-loop distribution for a one-dimensional input.
pub fn exact_success_1d(f: &ObjectiveFunction, params: &AlgorithmParams) -> Result<ExactSuccess> {
    if params.d != 1 {
        return Err(invalid("exact success mode is available for d = 1 only"));
    }
    let grad = f.reference_gradient().ok_or(Error::MissingReferenceGradient)?[0];
    let plan = QgePlan::new(f, params, RunOptions::default())?;
    let dist = plan.exact_distribution().expect("unperturbed plan");
    let dc = *plan.constants();
    let (mut within_eps_prime, mut within, mut below, mut above) = (0.0, 0.0, 0.0, 0.0);
    for (h, p) in dist.iter() {
        let g = plan.outcome_to_gradient(&h)[0];
        if (g - grad).abs() <= dc.eps_prime {
            within_eps_prime += p;
        }
        if (g - grad).abs() <= params.eps {
            within += p;
        } else if g < grad {
            below += p;
        } else {
            above += p;
        }
    }
    let n = dc.big_n as u64;
    let median_exact = (n % 2 == 1).then(|| median_within_probability(n, below, above));
    Ok(ExactSuccess {
        per_loop: within_eps_prime,
        majority_lower_bound: binomial_upper_tail(n, within, n / 2),
        median_exact,
    })
}

/// For odd `n`: P[the median of n i.i.d. draws falls in the middle cell] when
/// cells below/above carry `below`/`above`. Holds iff at most (n−1)/2 draws
/// land in each outer cell.
fn median_within_probability(n: u64, below: f64, above: f64) -> f64 {
    let half = (n - 1) / 2;
    let mid = (1.0 - below - above).max(0.0);
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let lg = |p: f64, k: u64| {
        if k == 0 {
            0.0
        } else if p <= 0.0 {
            f64::NEG_INFINITY
        } else {
            k as f64 * p.ln()
        }
    };
    let mut total = 0.0;
    for a in 0..=half {
        for b in 0..=half {
            let c = n - a - b;
            let lp = ln_fact[n as usize] - ln_fact[a as usize] - ln_fact[b as usize] - ln_fact[c as usize]
                + lg(below, a)
                + lg(above, b)
                + lg(mid, c);
            total += lp.exp();
        }
    }
    total.min(1.0)
}

/// Forward-difference baseline with step `r = 4ε / (c² 2^σ)`.
/// Returns the estimate and the number of evaluations (d + 1).
pub fn naive_gradient(f: &ObjectiveFunction, eps: f64, c: f64, sigma: f64) -> Result<(Vec<f64>, usize)> {
    if !(eps > 0.0 && c > 0.0) {
        return Err(invalid("eps and c must be positive"));
    }
    let d = f.dim();
    let r = 4.0 * eps / (c * c * 2f64.powf(sigma));
    let mut x = vec![0.0; d];
    let f0 = f.evaluate(&x)?;
    let mut g = Vec::with_capacity(d);
    for j in 0..d {
        x[j] = r;
        g.push((f.evaluate(&x)? - f0) / r);
        x[j] = 0.0;
    }
    Ok((g, d + 1))
}

/// Picks a vector that a strict majority of samples lie within 2ε of (in ℓ^p),
/// searching over the samples themselves as centres: the one with the most
/// neighbours wins, ties to the lowest index. Returns the zero vector when no
/// sample qualifies. If a strict majority is within ε of some target, the
/// result is within 3ε of it.
pub fn boost_samples(samples: &[Vec<f64>], eps: f64, p: NormOrder) -> Vec<f64> {
    assert!(!samples.is_empty(), "boost_samples needs at least one sample");
    let n = samples.len();
    let counts: Vec<usize> =
        samples.par_iter().map(|c| samples.iter().filter(|s| p.distance(c, s) <= 2.0 * eps).count()).collect();
    let mut best: Option<usize> = None;
    for (i, &k) in counts.iter().enumerate() {
        if 2 * k > n && best.is_none_or(|b| k > counts[b]) {
            best = Some(i);
        }
    }
    best.map_or_else(|| vec![0.0; samples[0].len()], |i| samples[i].clone())
}

/// Exact ℓ^∞ search: a point that a strict majority of samples lie within ε
/// of, found by per-coordinate interval stabbing. Returns the zero vector
/// when none exists. Under the majority hypothesis the result is within 2ε
/// of the target.
pub fn boost_samples_linf_exact(samples: &[Vec<f64>], eps: f64) -> Vec<f64> {
    assert!(!samples.is_empty(), "boost_samples needs at least one sample");
    let n = samples.len();
    let d = samples[0].len();
    let slack = 1e-12 * (1.0 + eps.abs());

    fn search(
        samples: &[Vec<f64>],
        active: &[usize],
        axis: usize,
        eps: f64,
        slack: f64,
        need: usize,
        point: &mut Vec<f64>,
    ) -> bool {
        if axis == point.len() {
            return true;
        }
        // Any maximal stabbed set is the content of a width-2ε window starting at a sample.
        let mut cands: Vec<f64> = active.iter().map(|&i| samples[i][axis]).collect();
        cands.sort_by(|a, b| a.total_cmp(b));
        cands.dedup();
        for t in cands {
            let next: Vec<usize> =
                active.iter().copied().filter(|&i| (samples[i][axis] - t - eps).abs() <= eps + slack).collect();
            if next.len() >= need {
                // Centre of the stabbed samples keeps the point within ε of each.
                let lo = next.iter().map(|&i| samples[i][axis]).fold(f64::INFINITY, f64::min);
                let hi = next.iter().map(|&i| samples[i][axis]).fold(f64::NEG_INFINITY, f64::max);
                point[axis] = 0.5 * (lo + hi);
                if search(samples, &next, axis + 1, eps, slack, need, point) {
                    return true;
                }
            }
        }
        false
    }

    let mut point = vec![0.0; d];
    let all: Vec<usize> = (0..n).collect();
    if search(samples, &all, 0, eps, slack, n / 2 + 1, &mut point) {
        point
    } else {
        vec![0.0; d]
    }
}
