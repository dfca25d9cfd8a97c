//! Simulated phase oracles as diagonal phase maps, the smoothing oracle built
//! from them, and query accounting.
//!
//! Imperfect fractional oracles are modelled as bounded phase noise: each
//! fractional factor of a smoothing application gets an independent error,
//! uniform in `[-δ/2m, δ/2m]` per grid point, so one application deviates from
//! the ideal diagonal map by at most δ in operator norm.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::functions::ObjectiveFunction;
use crate::numerics::{check_extended_domain, CentralDifferenceScheme};
use crate::state::State;
use crate::stats::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CostModel {
    /// One base call per oracle factor: 2m+1 per smoothing application.
    #[default]
    ExactSim,
    /// Fractional factors at precision δ_f cost ⌈log₂(1/δ_f)⌉ base calls.
    PaperModel,
}

impl std::str::FromStr for CostModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exactsim" | "exact" => Ok(CostModel::ExactSim),
            "papermodel" | "paper" | "model" => Ok(CostModel::PaperModel),
            _ => Err(invalid(format!("unknown cost model '{s}' (use exact-sim or paper-model)"))),
        }
    }
}

impl std::fmt::Display for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CostModel::ExactSim => "exact-sim",
            CostModel::PaperModel => "paper-model",
        })
    }
}

/// Base-oracle calls charged for one fractional factor at precision `precision`.
pub fn fractional_cost(precision: f64, model: CostModel) -> u64 {
    match model {
        CostModel::ExactSim => 1,
        CostModel::PaperModel => (1.0 / precision).log2().ceil().max(1.0) as u64,
    }
}

/// Base calls charged for one smoothing-oracle application: 2m+1 under
/// `ExactSim`, `2m·⌈log₂(2m/δ)⌉ + 1` under `PaperModel`.
pub fn query_cost(m: usize, delta: f64, model: CostModel) -> u64 {
    2 * m as u64 * fractional_cost(delta / (2 * m) as f64, model) + 1
}

/// Oracle-call counters. Updates are atomic, so a ledger can be shared
/// across threads by reference.
#[derive(Debug, Default)]
pub struct QueryLedger {
    model: CostModel,
    base_calls: AtomicU64,
    smoothing_calls: AtomicU64,
}

impl Clone for QueryLedger {
    fn clone(&self) -> Self {
        Self {
            model: self.model,
            base_calls: AtomicU64::new(self.base_calls()),
            smoothing_calls: AtomicU64::new(self.smoothing_calls()),
        }
    }
}

impl PartialEq for QueryLedger {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model
            && self.base_calls() == other.base_calls()
            && self.smoothing_calls() == other.smoothing_calls()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LedgerTotals {
    pub cost_model: CostModel,
    pub base_calls: u64,
    pub smoothing_calls: u64,
}

impl QueryLedger {
    pub fn new(model: CostModel) -> Self {
        Self { model, ..Default::default() }
    }

    pub fn model(&self) -> CostModel {
        self.model
    }

    pub fn base_calls(&self) -> u64 {
        self.base_calls.load(Ordering::Relaxed)
    }

    pub fn smoothing_calls(&self) -> u64 {
        self.smoothing_calls.load(Ordering::Relaxed)
    }

    pub fn totals(&self) -> LedgerTotals {
        LedgerTotals { cost_model: self.model, base_calls: self.base_calls(), smoothing_calls: self.smoothing_calls() }
    }

    /// One call to the plain oracle.
    pub fn record_plain(&self, count: u64) {
        self.base_calls.fetch_add(count, Ordering::Relaxed);
    }

    /// `count` fractional factors at precision `precision`.
    pub fn record_fractional(&self, precision: f64, count: u64) {
        self.base_calls.fetch_add(count * fractional_cost(precision, self.model), Ordering::Relaxed);
    }

    /// `count` smoothing applications: 2m fractional factors at δ/2m plus one plain call each.
    pub fn record_smoothing(&self, m: usize, delta: f64, count: u64) {
        self.record_fractional(delta / (2 * m) as f64, 2 * m as u64 * count);
        self.record_plain(count);
        self.smoothing_calls.fetch_add(count, Ordering::Relaxed);
    }

    /// Adds another ledger's counts. Models must agree.
    pub fn merge(&self, other: &QueryLedger) -> Result<()> {
        if self.model != other.model {
            return Err(invalid("cannot merge ledgers with different cost models"));
        }
        self.base_calls.fetch_add(other.base_calls(), Ordering::Relaxed);
        self.smoothing_calls.fetch_add(other.smoothing_calls(), Ordering::Relaxed);
        Ok(())
    }
}

fn range_error(value: f64, point: &[f64]) -> Error {
    Error::OracleRange { value, point: point.to_vec() }
}

/// Evaluates `f` at `scale·x` for every grid point, rejecting |f| > ½.
fn checked_values(state: &State, f: &ObjectiveFunction, scale: f64) -> Result<Vec<f64>> {
    let spec = state.spec();
    if spec.d() != f.dim() {
        return Err(invalid("state and function dimensions differ"));
    }
    let d = spec.d();
    (0..spec.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |x, i| {
                spec.point_at(i, x);
                x.iter_mut().for_each(|v| *v *= scale);
                let v = f.evaluate(x)?;
                if !(v.abs() <= 0.5) {
                    return Err(range_error(v, x));
                }
                Ok(v)
            },
        )
        .collect()
}

/// Multiplies each amplitude by `e^{i ξ f(x)}`. `ξ = 1` uses the plain
/// oracle (one base call); other powers are fractional at `precision`.
pub fn apply_fractional_phase(
    state: &mut State,
    f: &ObjectiveFunction,
    xi: f64,
    precision: f64,
    ledger: &QueryLedger,
) -> Result<()> {
    if !(xi > -1.0 && xi <= 1.0) {
        return Err(invalid(format!("fractional power {xi} outside (-1, 1]")));
    }
    let values = checked_values(state, f, 1.0)?;
    state.apply_phase(|i| xi * values[i]);
    if xi == 1.0 {
        ledger.record_plain(1);
    } else {
        if !(precision > 0.0 && precision < 1.0) {
            return Err(invalid("fractional oracle precision must lie in (0, 1)"));
        }
        ledger.record_fractional(precision, 1);
    }
    Ok(())
}

/// Noise configuration for smoothing applications.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perturbation {
    pub seed: u64,
}

/// Per-grid-point phase angles `f_(2m)(x) = Σ a_ℓ f(ℓx)`, checking that every
/// `f(ℓx)` lies in `[-½, ½]` and in the domain.
pub fn smoothing_phases(state: &State, f: &ObjectiveFunction, scheme: &CentralDifferenceScheme) -> Result<Vec<f64>> {
    let spec = state.spec();
    if spec.d() != f.dim() {
        return Err(invalid("state and function dimensions differ"));
    }
    check_extended_domain(f, scheme, spec)?;
    let d = spec.d();
    (0..spec.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; d], vec![0.0; d]),
            |(x, y), i| {
                spec.point_at(i, x);
                let mut acc = 0.0;
                for (l, a) in scheme.offsets().zip(scheme.floats()) {
                    for (yj, xj) in y.iter_mut().zip(x.iter()) {
                        *yj = l as f64 * xj;
                    }
                    let v = f.eval_unchecked(y);
                    if !(v.abs() <= 0.5) {
                        return Err(range_error(v, y));
                    }
                    acc += a * v;
                }
                Ok(acc)
            },
        )
        .collect()
}

/// Total phase error at grid point `i` after `repeats` noisy applications.
/// Each grid point draws from its own stream, so the result does not depend
/// on how the work is split across threads.
///
/// Draws are 32-bit uniforms `u/2³²` mapped affinely onto `[-w, w)`; their
/// integer sum is exact, so only the final scaling rounds.
fn accumulated_noise(seed: u64, i: usize, draws: u64, half_width: f64) -> f64 {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(derive_seed(seed, i as u64));
    let mut total: u128 = 0;
    let mut acc: u64 = 0;
    for k in 0..draws / 2 {
        let x = rng.next_u64();
        acc += (x & 0xffff_ffff) + (x >> 32);
        // Flush well before the 64-bit accumulator could overflow.
        if k & 0x3fff_ffff == 0x3fff_ffff {
            total += acc as u128;
            acc = 0;
        }
    }
    if draws % 2 == 1 {
        acc += rng.next_u64() >> 32;
    }
    total += acc as u128;
    let unit = total as f64 / 4_294_967_296.0;
    half_width * (2.0 * unit - draws as f64)
}

/// Applies the smoothing oracle `repeats` times: phase `repeats·f_(2m)(x)`,
/// composed from 2m fractional factors with powers `a_ℓ` (ℓ ≠ 0) and one
/// plain factor (ℓ = 0) per application. Diagonal maps commute, so the
/// repeats collapse to one multiplication; with `perturb`, every fractional
/// factor of every repeat still contributes its own noise draw.
pub fn apply_smoothing_oracle_repeated(
    state: &mut State,
    f: &ObjectiveFunction,
    scheme: &CentralDifferenceScheme,
    delta: f64,
    repeats: u64,
    perturb: Option<Perturbation>,
    ledger: &QueryLedger,
) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("smoothing precision δ = {delta} outside (0, 1)")));
    }
    let phases = smoothing_phases(state, f, scheme)?;
    let s = repeats as f64;
    match perturb {
        None => state.apply_phase(|i| s * phases[i]),
        Some(p) => {
            let m = scheme.m();
            let half = delta / (2 * m) as f64;
            let draws = 2 * m as u64 * repeats;
            let noise: Vec<f64> =
                (0..phases.len()).into_par_iter().map(|i| accumulated_noise(p.seed, i, draws, half)).collect();
            state.apply_phase(|i| s * phases[i] + noise[i]);
        }
    }
    ledger.record_smoothing(scheme.m(), delta, repeats);
    Ok(())
}

/// One smoothing-oracle application.
pub fn apply_smoothing_oracle(
    state: &mut State,
    f: &ObjectiveFunction,
    scheme: &CentralDifferenceScheme,
    delta: f64,
    perturb: Option<Perturbation>,
    ledger: &QueryLedger,
) -> Result<()> {
    apply_smoothing_oracle_repeated(state, f, scheme, delta, 1, perturb, ledger)
}
