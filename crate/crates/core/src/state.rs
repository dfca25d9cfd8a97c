//! Dense statevector over the grid, per-axis inverse QFT with signed indices,
//! exact outcome distributions and sampling.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::grid::GridSpec;

/// How the per-axis transform is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QftMethod {
    /// Explicit 2^n × 2^n matrix per axis. Reference implementation.
    Dense,
    /// FFT with index-shift sign twiddles.
    #[default]
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// Kernel e^{-2πi k h / 2^n}.
    Inverse,
    /// Kernel e^{+2πi k h / 2^n}, the adjoint.
    Forward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    spec: GridSpec,
    amps: Vec<Complex64>,
}

impl State {
    /// Equal amplitude `2^{-nd/2}` on every grid point.
    pub fn uniform_superposition(spec: &GridSpec) -> Self {
        let len = spec.len();
        let a = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Self { spec: spec.clone(), amps: vec![a; len] }
    }

    /// Wraps explicit amplitudes; they must have unit norm within 1e-9.
    pub fn from_amplitudes(spec: &GridSpec, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != spec.len() {
            return Err(invalid(format!("expected {} amplitudes, got {}", spec.len(), amps.len())));
        }
        let s = Self { spec: spec.clone(), amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        crate::stats::sum(&self.amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()).sqrt()
    }

    /// Multiplies amplitude `i` by `e^{i phase(i)}`, in parallel.
    pub fn apply_phase<F>(&mut self, phase: F)
    where
        F: Fn(usize) -> f64 + Sync,
    {
        self.amps.par_iter_mut().enumerate().for_each(|(i, a)| {
            *a *= Complex64::from_polar(1.0, phase(i));
        });
    }

    /// Applies the inverse QFT along every axis.
    pub fn inverse_qft_all_axes(&mut self, method: QftMethod) {
        for axis in 0..self.spec.d() {
            self.transform_axis(axis, method, Direction::Inverse);
        }
    }

    /// Adjoint of [`State::inverse_qft_all_axes`].
    pub fn forward_qft_all_axes(&mut self, method: QftMethod) {
        for axis in 0..self.spec.d() {
            self.transform_axis(axis, method, Direction::Forward);
        }
    }

    pub fn inverse_qft_axis(&mut self, axis: usize, method: QftMethod) -> Result<()> {
        if axis >= self.spec.d() {
            return Err(invalid(format!("axis {axis} out of range for d = {}", self.spec.d())));
        }
        self.transform_axis(axis, method, Direction::Inverse);
        Ok(())
    }

    fn transform_axis(&mut self, axis: usize, method: QftMethod, dir: Direction) {
        let m = self.spec.side();
        let stride = 1usize << (self.spec.n() as usize * (self.spec.d() - 1 - axis));
        let outer = self.amps.len() / (m * stride);
        let kernel = AxisKernel::new(self.spec.n(), method, dir);
        let amps = &self.amps;
        let columns: Vec<Vec<Complex64>> = (0..outer * stride)
            .into_par_iter()
            .map_init(
                || vec![Complex64::default(); kernel.scratch_len()],
                |scratch, c| {
                    let base = (c / stride) * m * stride + c % stride;
                    let mut col: Vec<Complex64> = (0..m).map(|u| amps[base + u * stride]).collect();
                    kernel.apply(&mut col, scratch);
                    col
                },
            )
            .collect();
        for (c, col) in columns.into_iter().enumerate() {
            let base = (c / stride) * m * stride + c % stride;
            for (u, v) in col.into_iter().enumerate() {
                self.amps[base + u * stride] = v;
            }
        }
    }

    /// Exact measurement distribution in the computational basis.
    pub fn outcome_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution::new(self.spec.clone(), self.amps.iter().map(|a| a.norm_sqr()).collect())
    }

    /// One measurement outcome as a signed index vector.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        self.outcome_distribution().sample(rng)
    }

    /// `min_φ ‖e^{iφ} self − other‖`, computed directly with φ aligned to the overlap.
    pub fn distance_up_to_phase(&self, other: &State) -> Result<f64> {
        distance_up_to_phase(&self.amps, &other.amps)
    }
}

/// `min_φ ‖e^{iφ} a − b‖` for equal-length amplitude vectors.
pub fn distance_up_to_phase(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(invalid("states have different dimensions"));
    }
    let ov: Complex64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let rot = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { Complex64::new(1.0, 0.0) };
    let terms: Vec<f64> = a.iter().zip(b).map(|(x, y)| (rot * x - y).norm_sqr()).collect();
    Ok(crate::stats::sum(&terms).sqrt())
}

struct AxisKernel {
    m: usize,
    dense: Option<Vec<Complex64>>,
    fft: Option<Arc<dyn Fft<f64>>>,
    /// Global factor e^{∓iπM/2}/√M of the shifted FFT.
    global: f64,
}

impl AxisKernel {
    fn new(n: u32, method: QftMethod, dir: Direction) -> Self {
        let m = 1usize << n;
        let sign = match dir {
            Direction::Inverse => -1.0,
            Direction::Forward => 1.0,
        };
        let scale = 1.0 / (m as f64).sqrt();
        match method {
            QftMethod::Dense => {
                let half = (m / 2) as i64;
                let mut mat = vec![Complex64::default(); m * m];
                for h in 0..m {
                    for k in 0..m {
                        // Reduce k·h mod M in integers before taking the angle.
                        let kh = ((k as i64 - half) * (h as i64 - half)).rem_euclid(m as i64);
                        let ang = sign * 2.0 * PI * kh as f64 / m as f64;
                        mat[h * m + k] = Complex64::from_polar(scale, ang);
                    }
                }
                Self { m, dense: Some(mat), fft: None, global: 1.0 }
            }
            QftMethod::Fft => {
                let mut planner = FftPlanner::new();
                let fft = match dir {
                    Direction::Inverse => planner.plan_fft_forward(m),
                    Direction::Forward => planner.plan_fft_inverse(m),
                };
                // e^{∓iπM/2} is −1 for M = 2 and 1 for M ≥ 4.
                let global = if m == 2 { -scale } else { scale };
                Self { m, dense: None, fft: Some(fft), global }
            }
        }
    }

    fn scratch_len(&self) -> usize {
        match &self.fft {
            Some(f) => f.get_inplace_scratch_len().max(self.m),
            None => self.m,
        }
    }

    fn apply(&self, col: &mut [Complex64], scratch: &mut [Complex64]) {
        let m = self.m;
        if let Some(mat) = &self.dense {
            let out = &mut scratch[..m];
            for (h, o) in out.iter_mut().enumerate() {
                *o = mat[h * m..(h + 1) * m].iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            }
            col.copy_from_slice(out);
            return;
        }
        let fft = self.fft.as_ref().expect("fft kernel");
        for (u, a) in col.iter_mut().enumerate() {
            if u % 2 == 1 {
                *a = -*a;
            }
        }
        fft.process_with_scratch(col, scratch);
        for (v, a) in col.iter_mut().enumerate() {
            let s = if v % 2 == 1 { -self.global } else { self.global };
            *a *= s;
        }
    }
}

/// Probabilities over signed outcome tuples, indexed like the grid.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    spec: GridSpec,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(spec: GridSpec, probs: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { spec, probs, cumulative }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        crate::stats::sum(&self.probs)
    }

    /// Probability of signed outcome `h` (0 if out of range).
    pub fn probability(&self, h: &[i64]) -> f64 {
        self.spec.flat_index(h).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    /// `(h, p)` pairs in flat-index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (self.spec.signed_index(i), p))
    }

    /// Per-axis marginal over the signed index `-2^{n-1} + u`, in offset order.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.side()];
        let mut u = vec![0usize; self.spec.d()];
        for (i, &p) in self.probs.iter().enumerate() {
            self.spec.offsets(i, &mut u);
            out[u[axis]] += p;
        }
        out
    }

    /// Inverse-CDF sample. Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let t = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= t).min(self.probs.len() - 1);
        // Skip zero-probability cells reached through rounding.
        let i = if self.probs[i] == 0.0 { (0..=i).rev().find(|&j| self.probs[j] > 0.0).unwrap_or(i) } else { i };
        self.spec.signed_index(i)
    }
}

/// Probability that the single-axis outcome `b` of the inverse QFT applied to
/// `2^{-n/2} Σ_k e^{iak} |k⟩` satisfies `|b − 2^n a / 2π| ≤ 4`.
pub fn qft_peak_probability(n: u32, a: f64) -> Result<f64> {
    qft_peak_probability_with(n, a, QftMethod::Dense)
}

pub fn qft_peak_probability_with(n: u32, a: f64, method: QftMethod) -> Result<f64> {
    if n < 4 {
        return Err(invalid(format!("qft_peak_probability needs n >= 4, got {n}")));
    }
    if !(a.abs() <= 2.0 * PI / 3.0 + 1e-12) {
        return Err(invalid(format!("phase slope a = {a} outside [-2π/3, 2π/3]")));
    }
    let spec = GridSpec::with_guard(1, n, 1.0, u64::MAX)?;
    let m = spec.side();
    let amp = 1.0 / (m as f64).sqrt();
    let amps = (0..m).map(|u| Complex64::from_polar(amp, a * spec.signed(u) as f64)).collect();
    let mut st = State { spec: spec.clone(), amps };
    st.inverse_qft_all_axes(method);
    let centre = m as f64 * a / (2.0 * PI);
    let probs: Vec<f64> = st
        .amps
        .iter()
        .enumerate()
        .filter(|(u, _)| (spec.signed(*u) as f64 - centre).abs() <= 4.0)
        .map(|(_, z)| z.norm_sqr())
        .collect();
    Ok(crate::stats::sum(&probs))
}
