//! The symmetric evaluation grid.
//!
//! Each axis carries 2^n points `(r / 2^n) (k + 1/2)` for signed indices
//! `k ∈ {-2^(n-1), …, 2^(n-1) - 1}`. Flat indices are row-major with axis 0
//! most significant; along an axis the unsigned offset is `u = k + 2^(n-1)`.

use crate::error::{invalid, Error, Result};

/// Default cap on total qubits `n·d`.
pub const DEFAULT_MEMORY_GUARD: u64 = 24;

/// Environment variable overriding [`DEFAULT_MEMORY_GUARD`].
pub const MEMORY_GUARD_ENV: &str = "QGRAD_MEMORY_GUARD";

/// Current qubit cap: `QGRAD_MEMORY_GUARD` if set and parseable, else 24.
pub fn memory_guard() -> u64 {
    std::env::var(MEMORY_GUARD_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MEMORY_GUARD)
}

/// Fail with [`Error::ResourceGuard`] if `n·d` exceeds `limit`.
pub fn check_guard(n: u32, d: usize, limit: u64) -> Result<()> {
    let required = n as u64 * d as u64;
    if required > limit {
        return Err(Error::ResourceGuard { required, limit });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    d: usize,
    n: u32,
    r: f64,
}

impl GridSpec {
    /// Grid under the process-wide memory guard.
    pub fn new(d: usize, n: u32, r: f64) -> Result<Self> {
        Self::with_guard(d, n, r, memory_guard())
    }

    pub fn with_guard(d: usize, n: u32, r: f64, limit: u64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("grid dimension d must be positive"));
        }
        if n == 0 {
            return Err(invalid("qubits per axis n must be positive"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid(format!("grid side r must be positive and finite, got {r}")));
        }
        check_guard(n, d, limit)?;
        Ok(Self { d, n, r })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Points per axis, `2^n`.
    pub fn side(&self) -> usize {
        1usize << self.n
    }

    /// Total number of grid points, `2^(n d)`.
    pub fn len(&self) -> usize {
        1usize << (self.n as usize * self.d)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing between neighbouring points, `r / 2^n`.
    pub fn spacing(&self) -> f64 {
        self.r / self.side() as f64
    }

    pub fn min_index(&self) -> i64 {
        -(1i64 << (self.n - 1))
    }

    pub fn max_index(&self) -> i64 {
        (1i64 << (self.n - 1)) - 1
    }

    /// Signed index for unsigned axis offset `u`.
    pub fn signed(&self, u: usize) -> i64 {
        u as i64 + self.min_index()
    }

    /// Coordinate of unsigned axis offset `u`.
    pub fn coordinate(&self, u: usize) -> f64 {
        self.spacing() * (self.signed(u) as f64 + 0.5)
    }

    /// The 2^n coordinates along one axis, in offset order.
    pub fn axis_coordinates(&self) -> Vec<f64> {
        (0..self.side()).map(|u| self.coordinate(u)).collect()
    }

    /// Grid point for signed index vector `k`.
    pub fn point(&self, k: &[i64]) -> Result<Vec<f64>> {
        if k.len() != self.d {
            return Err(Error::IndexOutOfRange(format!("index has {} components, grid has d = {}", k.len(), self.d)));
        }
        let (lo, hi) = (self.min_index(), self.max_index());
        k.iter()
            .map(|&kj| {
                if kj < lo || kj > hi {
                    Err(Error::IndexOutOfRange(format!("component {kj} not in [{lo}, {hi}]")))
                } else {
                    Ok(self.spacing() * (kj as f64 + 0.5))
                }
            })
            .collect()
    }

    /// Per-axis unsigned offsets of a flat index.
    pub fn offsets(&self, mut flat: usize, out: &mut [usize]) {
        let mask = self.side() - 1;
        for j in (0..self.d).rev() {
            out[j] = flat & mask;
            flat >>= self.n;
        }
    }

    /// Signed index vector of a flat index.
    pub fn signed_index(&self, flat: usize) -> Vec<i64> {
        let mut u = vec![0usize; self.d];
        self.offsets(flat, &mut u);
        u.into_iter().map(|uj| self.signed(uj)).collect()
    }

    /// Writes the grid point of a flat index into `out`.
    pub fn point_at(&self, flat: usize, out: &mut [f64]) {
        let mask = self.side() - 1;
        let mut f = flat;
        for j in (0..self.d).rev() {
            out[j] = self.coordinate(f & mask);
            f >>= self.n;
        }
    }

    /// Flat index of a signed index vector.
    pub fn flat_index(&self, k: &[i64]) -> Result<usize> {
        self.point(k)?;
        Ok(k.iter().fold(0usize, |acc, &kj| (acc << self.n) | (kj - self.min_index()) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_qubit_points() {
        let g = GridSpec::with_guard(1, 1, 1.0, 24).unwrap();
        assert_eq!(g.point(&[0]).unwrap(), vec![0.25]);
        assert_eq!(g.point(&[-1]).unwrap(), vec![-0.25]);
    }

    #[test]
    fn corner_point_2d() {
        let g = GridSpec::with_guard(2, 3, 0.8, 24).unwrap();
        let p = g.point(&[-4, 3]).unwrap();
        assert!((p[0] + 0.35).abs() < 1e-15 && (p[1] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        let g = GridSpec::with_guard(2, 3, 0.8, 24).unwrap();
        assert!(matches!(g.point(&[4, 0]), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(g.point(&[0]), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn guard_reports_requirement() {
        match GridSpec::with_guard(5, 6, 1.0, 24) {
            Err(Error::ResourceGuard { required, limit }) => assert_eq!((required, limit), (30, 24)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flat_roundtrip_and_symmetry() {
        let g = GridSpec::with_guard(3, 2, 1.3, 24).unwrap();
        let mut p = vec![0.0; 3];
        let mut mean = [0.0; 3];
        for i in 0..g.len() {
            let k = g.signed_index(i);
            assert_eq!(g.flat_index(&k).unwrap(), i);
            g.point_at(i, &mut p);
            assert_eq!(p, g.point(&k).unwrap());
            let neg: Vec<i64> = k.iter().map(|&kj| -kj - 1).collect();
            let q = g.point(&neg).unwrap();
            for j in 0..3 {
                assert_eq!(q[j], -p[j]);
                assert!(p[j].abs() <= g.r() / 2.0);
                mean[j] += p[j];
            }
        }
        assert!(mean.iter().all(|m| m.abs() < 1e-12));
    }
}
