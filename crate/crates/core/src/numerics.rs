//! Central-difference schemes in exact rational arithmetic and the smoothing
//! `f_(2m)(x) = Σ_ℓ a_ℓ f(ℓx)` they define.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functions::ObjectiveFunction;
use crate::grid::GridSpec;
use crate::stats::NeumaierSum;

/// Coefficients `a_ℓ`, `ℓ ∈ {-m, …, m}`, with
/// `a_ℓ = (-1)^(ℓ+1) (m!)² / (ℓ (m+ℓ)! (m-ℓ)!)` for `ℓ ≠ 0` and `a_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralDifferenceScheme {
    m: usize,
    coefficients: Vec<BigRational>,
    float_cache: Vec<f64>,
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = BigInt::one();
    out.push(acc.clone());
    for i in 1..=n {
        acc *= BigInt::from(i);
        out.push(acc.clone());
    }
    out
}

/// Nearest double to a rational, robust to huge numerators and denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides into range first.
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

impl CentralDifferenceScheme {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("central difference order m must be at least 1"));
        }
        let fact = factorials(2 * m);
        let mm = &fact[m] * &fact[m];
        let coefficients: Vec<BigRational> = (-(m as i64)..=m as i64)
            .map(|l| {
                if l == 0 {
                    return BigRational::one();
                }
                let sign = if (l + 1).rem_euclid(2) == 0 { 1 } else { -1 };
                let num = BigInt::from(sign) * &mm;
                let den = BigInt::from(l) * &fact[(m as i64 + l) as usize] * &fact[(m as i64 - l) as usize];
                BigRational::new(num, den)
            })
            .collect();
        Ok(Self::from_parts(m, coefficients))
    }

    /// Builds a scheme from explicit coefficients (indexed `-m..=m`) without
    /// checking any identity. Used by the verification suite to inject faults.
    pub fn from_coefficients(m: usize, coefficients: Vec<BigRational>) -> Result<Self> {
        if m == 0 || coefficients.len() != 2 * m + 1 {
            return Err(invalid(format!("expected {} coefficients for m = {m}", 2 * m + 1)));
        }
        Ok(Self::from_parts(m, coefficients))
    }

    fn from_parts(m: usize, coefficients: Vec<BigRational>) -> Self {
        let float_cache = coefficients.iter().map(rational_to_f64).collect();
        Self { m, coefficients, float_cache }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of coefficients, `2m + 1`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The ℓ values in storage order.
    pub fn offsets(&self) -> impl Iterator<Item = i64> + Clone {
        -(self.m as i64)..=self.m as i64
    }

    pub fn coefficient(&self, l: i64) -> Result<&BigRational> {
        self.index(l).map(|i| &self.coefficients[i])
    }

    pub fn coefficient_f64(&self, l: i64) -> Result<f64> {
        self.index(l).map(|i| self.float_cache[i])
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn floats(&self) -> &[f64] {
        &self.float_cache
    }

    fn index(&self, l: i64) -> Result<usize> {
        let m = self.m as i64;
        if l < -m || l > m {
            return Err(Error::IndexOutOfRange(format!("coefficient index {l} not in [-{m}, {m}]")));
        }
        Ok((l + m) as usize)
    }

    /// Exact `Σ_ℓ a_ℓ ℓ^k` with `0^0 = 1`.
    pub fn moment_sum(&self, k: u32) -> BigRational {
        self.offsets()
            .zip(&self.coefficients)
            .fold(BigRational::zero(), |acc, (l, a)| acc + a * BigRational::from_integer(BigInt::from(l).pow(k)))
    }

    /// Checks the moment identities for `k ≤ 2m`, the magnitude bound
    /// `|a_ℓ| < 1/|ℓ|`, antisymmetry and `|moment_sum(k)| ≤ 2 m^k` for
    /// `2m < k ≤ 2m + extra`. Returns a description of the first violation.
    pub fn verify_identities(&self, extra: u32) -> std::result::Result<(), String> {
        let m = self.m as i64;
        if !self.coefficient(0).map(|a| a.is_one()).unwrap_or(false) {
            return Err("a_0 != 1".into());
        }
        for l in 1..=m {
            let a = self.coefficient(l).unwrap();
            let b = self.coefficient(-l).unwrap();
            if *b != -a.clone() {
                return Err(format!("a_{{-{l}}} != -a_{l}"));
            }
            if a.abs() >= BigRational::new(BigInt::one(), BigInt::from(l)) {
                return Err(format!("|a_{l}| >= 1/{l}"));
            }
        }
        for k in 0..=(2 * m as u32) {
            let want = if k <= 1 { BigRational::one() } else { BigRational::zero() };
            if self.moment_sum(k) != want {
                return Err(format!("moment k={k} is {} (expected {want})", self.moment_sum(k)));
            }
        }
        for k in (2 * m as u32 + 1)..=(2 * m as u32 + extra) {
            let bound = BigRational::from_integer(BigInt::from(2) * BigInt::from(m).pow(k));
            if self.moment_sum(k).abs() > bound {
                return Err(format!("|moment k={k}| exceeds 2m^k"));
            }
        }
        Ok(())
    }

    /// `f_(2m)(x) = Σ_ℓ a_ℓ f(ℓx)` with domain checks on every ℓx.
    pub fn smoothing_eval(&self, f: &ObjectiveFunction, x: &[f64]) -> Result<f64> {
        let mut y = vec![0.0; x.len()];
        let mut acc = 0.0;
        for (l, a) in self.offsets().zip(&self.float_cache) {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = l as f64 * xi;
            }
            acc += a * f.evaluate(&y)?;
        }
        Ok(acc)
    }

    /// Unchecked variant for hot loops; `scratch` must have length `x.len()`.
    pub(crate) fn smoothing_eval_unchecked(&self, f: &ObjectiveFunction, x: &[f64], scratch: &mut [f64]) -> f64 {
        let mut acc = 0.0;
        for (l, a) in self.offsets().zip(&self.float_cache) {
            for (yi, xi) in scratch.iter_mut().zip(x) {
                *yi = l as f64 * xi;
            }
            acc += a * f.eval_unchecked(scratch);
        }
        acc
    }
}

/// Fixed chunk size for grid reductions: results do not depend on the thread count.
pub(crate) const REDUCTION_CHUNK: usize = 4096;

/// Deterministic parallel sum of `term(i)` for `i < len`.
pub(crate) fn grid_sum<F>(len: usize, term: F) -> Result<f64>
where
    F: Fn(usize, &mut Vec<f64>) -> Result<f64> + Sync,
{
    let chunks = len.div_ceil(REDUCTION_CHUNK);
    let partials: Result<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut scratch = Vec::new();
            let mut s = NeumaierSum::new();
            for i in c * REDUCTION_CHUNK..((c + 1) * REDUCTION_CHUNK).min(len) {
                s.add(term(i, &mut scratch)?);
            }
            Ok(s.total())
        })
        .collect();
    Ok(partials?.into_iter().collect::<NeumaierSum>().total())
}

/// Mean over every grid point of `|f_(2m)(x) - f(0) - ∇f(0)·x|²`.
pub fn linearity_defect(f: &ObjectiveFunction, scheme: &CentralDifferenceScheme, grid: &GridSpec) -> Result<f64> {
    let grad = f.reference_gradient().ok_or(Error::MissingReferenceGradient)?;
    if grid.d() != f.dim() {
        return Err(invalid("grid and function dimensions differ"));
    }
    let d = grid.d();
    let f0 = f.evaluate(&vec![0.0; d])?;
    // Check the domain once along the extreme rescaled points of every axis.
    check_extended_domain(f, scheme, grid)?;
    let total = grid_sum(grid.len(), |i, scratch| {
        scratch.resize(2 * d, 0.0);
        let (x, y) = scratch.split_at_mut(d);
        grid.point_at(i, x);
        let s = scheme.smoothing_eval_unchecked(f, x, y);
        let lin = f0 + grad.iter().zip(x.iter()).map(|(g, xi)| g * xi).sum::<f64>();
        Ok((s - lin) * (s - lin))
    })?;
    Ok(total / grid.len() as f64)
}

/// Verifies that `f` is defined on `{ℓx : x ∈ G, |ℓ| ≤ m}`. For box domains the
/// set's bounding box is tested, which suffices since boxes are convex.
pub(crate) fn check_extended_domain(
    f: &ObjectiveFunction,
    scheme: &CentralDifferenceScheme,
    grid: &GridSpec,
) -> Result<()> {
    use crate::functions::Domain;
    if let Domain::Box(b) = f.domain() {
        let reach = scheme.m() as f64 * grid.coordinate(grid.side() - 1);
        for (j, &(lo, hi)) in b.iter().enumerate() {
            if !(lo < -reach && reach < hi) {
                return Err(Error::OutsideDomain(format!(
                    "{}: rescaled grid reaches ±{reach} on axis {j}, domain is ({lo}, {hi})",
                    f.name()
                )));
            }
        }
    }
    Ok(())
}
