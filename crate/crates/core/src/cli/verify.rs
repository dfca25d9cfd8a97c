//! The `verify` suites: quick structural checks, and a fuller pass that adds
//! the Monte Carlo and statevector checks.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{moment_bound_check, oracle_distance_bound, oracle_distance_sup, uniform_points};
use crate::error::Result;
use crate::functions::TestFunctionInstance;
use crate::grid::GridSpec;
use crate::numerics::{linearity_defect, CentralDifferenceScheme};
use crate::oracle::{query_cost, CostModel, Perturbation};
use crate::qge::{
    derive_constants, estimate_success_probability, exact_success_1d, state_closeness, AlgorithmParams, NormOrder,
    RunOptions,
};
use crate::state::{QftMethod, State};

use crate::stats::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(crate::error::invalid(format!("unknown verify level '{s}' (fast or full)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult { name: name.to_string(), pass, detail: detail.into() }
}

fn coefficient_identities(corrupt: bool) -> Result<CheckResult> {
    for m in 1..=12 {
        let mut s = CentralDifferenceScheme::new(m)?;
        if corrupt && m == 3 {
            let mut c = s.coefficients().to_vec();
            c[1] += BigRational::new(BigInt::from(1), BigInt::from(1_000_000));
            s = CentralDifferenceScheme::from_coefficients(m, c)?;
        }
        if let Err(e) = s.verify_identities(10) {
            return Ok(check("coefficient-identities", false, format!("m = {m}: {e}")));
        }
    }
    Ok(check("coefficient-identities", true, "m = 1..12, exact"))
}

fn qft_unitarity(seed: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for (d, n) in [(1usize, 6u32), (2, 4), (3, 2)] {
        let spec = GridSpec::with_guard(d, n, 1.0, u64::MAX)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64));
        let mut v: Vec<Complex64> =
            (0..spec.len()).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let nrm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
        let st = State::from_amplitudes(&spec, v)?;
        let mut dense = st.clone();
        let mut fast = st.clone();
        dense.inverse_qft_all_axes(QftMethod::Dense);
        fast.inverse_qft_all_axes(QftMethod::Fft);
        worst = worst.max((dense.norm() - 1.0).abs());
        worst = worst.max(dense.distance_up_to_phase(&fast)?);
        dense.forward_qft_all_axes(QftMethod::Dense);
        worst =
            worst.max(dense.amplitudes().iter().zip(st.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    Ok(check("qft-unitarity", worst < 1e-9, format!("max deviation {worst:.3e}")))
}

fn grid_symmetry() -> Result<CheckResult> {
    let g = GridSpec::with_guard(2, 3, 0.8, u64::MAX)?;
    let mut ok = true;
    let mut mean = [0.0f64; 2];
    for i in 0..g.len() {
        let k = g.signed_index(i);
        let p = g.point(&k)?;
        let q = g.point(&[-k[0] - 1, -k[1] - 1])?;
        ok &= p[0] == -q[0] && p[1] == -q[1] && p.iter().all(|x| x.abs() <= 0.4);
        mean[0] += p[0];
        mean[1] += p[1];
    }
    ok &= mean.iter().all(|m| m.abs() < 1e-12);
    Ok(check("grid-symmetry", ok, "d = 2, n = 3"))
}

fn query_costs() -> CheckResult {
    let ok = query_cost(2, 0.5, CostModel::ExactSim) == 5
        && query_cost(2, 1.0 / 64.0, CostModel::PaperModel) == 33
        && query_cost(1, 0.5, CostModel::PaperModel) == 5;
    check("query-cost-formulas", ok, "ExactSim 2m+1, PaperModel 2m·⌈log2(2m/δ)⌉+1")
}

fn instance(d: usize) -> Result<TestFunctionInstance> {
    let b = (0..d).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect();
    TestFunctionInstance::new(d, 1.0, 0.005, b)
}

fn linearity_and_closeness(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (d, eps) in [(1usize, 0.2), (2, 0.3)] {
        let params = AlgorithmParams::new(0.5, 1.0, NormOrder::Infinity, d, eps);
        let dc = derive_constants(&params)?;
        let f = instance(d)?.to_objective();
        let grid = GridSpec::new(d, dc.n, dc.r)?;
        let scheme = CentralDifferenceScheme::new(dc.m)?;
        let defect = linearity_defect(&f, &scheme, &grid)?;
        let limit = 1.0 / (144.0 * (dc.s as f64).powi(2));
        out.push(check(&format!("linearity-defect[d={d}]"), defect <= limit, format!("{defect:.3e} <= {limit:.3e}")));
        let dist = state_closeness(&f, &dc, &grid, &scheme, Perturbation { seed: derive_seed(seed, d as u64) })?;
        out.push(check(&format!("state-closeness[d={d}]"), dist <= 1.0 / 6.0, format!("{dist:.3e} <= 1/6")));
    }
    Ok(out)
}

fn success(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let p1 = AlgorithmParams::new(0.5, 1.0, NormOrder::Infinity, 1, 0.2);
    let ex = exact_success_1d(&instance(1)?.to_objective(), &p1)?;
    out.push(check(
        "inner-loop-success[d=1,exact]",
        ex.per_loop >= 2.0 / 3.0,
        format!("per-loop {:.4}, majority bound {:.6}", ex.per_loop, ex.majority_lower_bound),
    ));
    let p2 = AlgorithmParams::new(0.5, 1.0, NormOrder::Infinity, 2, 0.3);
    let est = estimate_success_probability(&instance(2)?.to_objective(), &p2, 100, seed, RunOptions::default())?;
    out.push(check(
        "success-probability[d=2]",
        est.wilson_low >= 0.60 && est.ledger_consistent,
        format!("{}/{} successes, Wilson lower {:.4}", est.successes, est.trials, est.wilson_low),
    ));
    Ok(out)
}

fn distance_and_moments(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [1usize, 2, 3] {
        let b: Vec<i8> = (0..d).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect();
        let pts = uniform_points(d, 10_000, 8.0, derive_seed(seed, 100 + d as u64));
        let sup = oracle_distance_sup(&b, 1.0, 0.005, &pts)?;
        let bound = oracle_distance_bound(d, 1.0, 0.005);
        ok &= sup <= bound + 1e-12;
        detail.push(format!("d={d}: {sup:.3e}/{bound:.3e}"));
    }
    out.push(check("oracle-distance-sup", ok, detail.join(", ")));
    let mut ok = true;
    for d in [1usize, 2, 4] {
        for k in [1u32, 2] {
            for q in [0.0, 0.5, 1.0] {
                ok &= moment_bound_check(d, k, q, 4, 20_000, derive_seed(seed, 1000 + d as u64 * 10 + k as u64))?.pass;
            }
        }
    }
    out.push(check("moment-bounds", ok, "d ∈ {1,2,4}, k ∈ {1,2}, q ∈ {0,½,1}"));
    Ok(out)
}

/// Runs the suite. `seed` is required at the full level.
pub fn run_suite(level: Level, seed: Option<u64>, corrupt_coefficients: bool) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        coefficient_identities(corrupt_coefficients)?,
        qft_unitarity(seed.unwrap_or(0))?,
        grid_symmetry()?,
        query_costs(),
    ];
    if level == Level::Full {
        let seed = seed.ok_or_else(|| crate::error::invalid("verify --level full needs --seed"))?;
        out.extend(linearity_and_closeness(seed)?);
        out.extend(success(seed)?);
        out.extend(distance_and_moments(seed)?);
    }
    Ok(out)
}
