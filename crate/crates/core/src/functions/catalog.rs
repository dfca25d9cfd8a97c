//! One-dimensional functions with known Gevrey membership.
//!
//! Every entry ships closed-form derivatives of all orders so that the Gevrey
//! checker can go beyond the finite-difference noise floor.

use num_complex::Complex64;

use crate::error::{invalid, Result};

use super::{Domain, ObjectiveFunction};

pub const CATALOG_NAMES: [&str; 7] =
    ["half-sine", "half-cosine", "shifted-exponential", "gaussian", "lorentzian", "half-arctan", "logistic"];

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Probabilists' Hermite polynomial He_k(y).
fn hermite_he(k: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, y);
    if k == 0 {
        return prev;
    }
    for i in 1..k {
        let next = y * cur - i as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// k-th derivative of 1/(1+y²), via 1/(1+y²) = Im[1/(y - i)].
fn lorentz_deriv(k: usize, y: f64) -> f64 {
    let z = Complex64::new(y, -1.0);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * factorial(k) * z.powi(-(k as i32 + 1)).im
}

/// Coefficients (ascending powers of s) of P_k with d^k s/dy^k = P_k(s) for the
/// logistic s(y) = 1/(1+e^{-y}), using s' = s - s².
fn logistic_poly(k: usize) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..k {
        let dp: Vec<f64> = (1..p.len()).map(|i| i as f64 * p[i]).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (i, &a) in dp.iter().enumerate() {
            next[i + 1] += a;
            next[i + 2] -= a;
        }
        p = next;
    }
    p
}

fn horner(p: &[f64], s: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

/// Looks up a catalog entry by name with scale parameter `c`.
pub fn catalog_entry(name: &str, c: f64) -> Result<ObjectiveFunction> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    let f = match name {
        "half-sine" => ObjectiveFunction::new(1, c, 0.0, move |x| 0.5 * (c * x[0]).sin())?.with_partial(move |a, x| {
            let k = a.len();
            let y = c * x[0];
            let v = match k % 4 {
                0 => y.sin(),
                1 => y.cos(),
                2 => -y.sin(),
                _ => -y.cos(),
            };
            0.5 * c.powi(k as i32) * v
        }),
        "half-cosine" => {
            ObjectiveFunction::new(1, c, 0.0, move |x| 0.5 * (c * x[0]).cos())?.with_partial(move |a, x| {
                let k = a.len();
                let y = c * x[0];
                let v = match k % 4 {
                    0 => y.cos(),
                    1 => -y.sin(),
                    2 => -y.cos(),
                    _ => y.sin(),
                };
                0.5 * c.powi(k as i32) * v
            })
        }
        "shifted-exponential" => ObjectiveFunction::new(1, c, 0.0, move |x| 0.5 * (-c * (x[0] + 1.0)).exp())?
            .with_domain(Domain::Box(vec![(-1.0, f64::INFINITY)]))?
            .with_partial(move |a, x| 0.5 * (-c).powi(a.len() as i32) * (-c * (x[0] + 1.0)).exp()),
        "gaussian" => ObjectiveFunction::new(1, c, 0.5, move |x| 0.5 * (-0.5 * (c * x[0]).powi(2)).exp())?
            .with_numerical_evidence(true)
            .with_partial(move |a, x| {
                let k = a.len();
                let y = c * x[0];
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                0.5 * sign * c.powi(k as i32) * hermite_he(k, y) * (-0.5 * y * y).exp()
            }),
        "lorentzian" => ObjectiveFunction::new(1, c, 1.0, move |x| 0.5 / (1.0 + (c * x[0]).powi(2)))?
            .with_numerical_evidence(true)
            .with_partial(move |a, x| 0.5 * c.powi(a.len() as i32) * lorentz_deriv(a.len(), c * x[0])),
        "half-arctan" => ObjectiveFunction::new(1, c, 1.0, move |x| 0.5 * (c * x[0]).atan())?
            .with_numerical_evidence(true)
            .with_partial(move |a, x| {
                let k = a.len();
                if k == 0 {
                    0.5 * (c * x[0]).atan()
                } else {
                    0.5 * c.powi(k as i32) * lorentz_deriv(k - 1, c * x[0])
                }
            }),
        "logistic" => ObjectiveFunction::new(1, c, 1.0, move |x| 0.5 / (1.0 + (-c * x[0]).exp()))?
            .with_numerical_evidence(true)
            .with_partial(move |a, x| {
                let k = a.len();
                let s = 1.0 / (1.0 + (-c * x[0]).exp());
                0.5 * c.powi(k as i32) * horner(&logistic_poly(k), s)
            }),
        other => {
            return Err(invalid(format!("unknown catalog function '{other}' (known: {})", CATALOG_NAMES.join(", "))))
        }
    };
    Ok(f.with_name(name))
}

/// All catalog entries at scale `c`, in table order.
pub fn catalog(c: f64) -> Result<Vec<ObjectiveFunction>> {
    CATALOG_NAMES.iter().map(|n| catalog_entry(n, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_central(f: &ObjectiveFunction, k: usize, x: f64) -> f64 {
        // k-th derivative by differentiating the (k-1)-th closed form once.
        let h = 1e-5;
        let a: Vec<usize> = vec![0; k - 1];
        (f.partial(&a, &[x + h]).unwrap() - f.partial(&a, &[x - h]).unwrap()) / (2.0 * h)
    }

    #[test]
    fn declared_parameters() {
        let s = catalog_entry("half-sine", 1.0).unwrap();
        assert_eq!(s.sigma(), 0.0);
        assert!(s.domain().is_everywhere());
        let e = catalog_entry("shifted-exponential", 1.0).unwrap();
        assert_eq!(e.domain(), &Domain::Box(vec![(-1.0, f64::INFINITY)]));
        assert!(!e.domain().contains(&[-2.0]));
        let g = catalog_entry("gaussian", 1.0).unwrap();
        assert_eq!(g.sigma(), 0.5);
        assert!(g.numerical_evidence());
        for n in ["lorentzian", "half-arctan", "logistic"] {
            let f = catalog_entry(n, 2.0).unwrap();
            assert_eq!(f.sigma(), 1.0);
            assert!(f.numerical_evidence());
        }
        assert!(catalog_entry("tanh", 1.0).is_err());
        assert_eq!(catalog(1.0).unwrap().len(), 7);
    }

    #[test]
    fn zero_order_partial_is_value() {
        for f in catalog(1.3).unwrap() {
            for x in [-0.7, 0.0, 0.4, 2.5] {
                let v = f.eval_unchecked(&[x]);
                assert!((f.partial(&[], &[x]).unwrap() - v).abs() < 1e-14, "{}", f.name());
            }
        }
    }

    #[test]
    fn closed_forms_chain_consistently() {
        for f in catalog(1.3).unwrap() {
            for k in 1..=6 {
                for x in [-0.7, 0.1, 0.9, 2.5] {
                    let exact = f.partial(&vec![0; k], &[x]).unwrap();
                    let approx = fd_central(&f, k, x);
                    let scale = 0.5 * 1.3f64.powi(k as i32) * factorial(k);
                    assert!((exact - approx).abs() < 1e-6 * scale, "{} k={k} x={x}: {exact} vs {approx}", f.name());
                }
            }
        }
    }

    #[test]
    fn hermite_and_logistic_polynomials() {
        assert_eq!(hermite_he(3, 2.0), 2.0);
        assert_eq!(hermite_he(4, 1.0), -2.0);
        assert_eq!(logistic_poly(1), vec![0.0, 1.0, -1.0]);
        assert_eq!(logistic_poly(2), vec![0.0, 1.0, -3.0, 2.0]);
    }

    #[test]
    fn arctan_exceeds_half_far_out() {
        // The k = 0 bound |f| ≤ 1/2 fails for ½·arctan once |cx| > tan(1).
        let f = catalog_entry("half-arctan", 1.0).unwrap();
        assert!(f.eval_unchecked(&[1.5]).abs() < 0.5);
        assert!(f.eval_unchecked(&[1.6]).abs() > 0.5);
    }
}
