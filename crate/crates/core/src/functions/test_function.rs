use crate::error::{invalid, Result};

use super::ObjectiveFunction;

/// A member of the sine/cosine test family
/// `f_b(x) = Σ_j (73 ε b_j)/(c d) · sin(c x_j) · Π_{k≠j} cos(c x_k)`.
///
/// Its gradient at the origin is `(73 ε / d) b`, a vertex of a scaled Hamming cube.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionInstance {
    pub d: usize,
    pub c: f64,
    pub eps: f64,
    pub b: Vec<i8>,
}

/// `a`-th derivative of sin at `y`.
fn sin_deriv(a: usize, y: f64) -> f64 {
    match a % 4 {
        0 => y.sin(),
        1 => y.cos(),
        2 => -y.sin(),
        _ => -y.cos(),
    }
}

/// `a`-th derivative of cos at `y`.
fn cos_deriv(a: usize, y: f64) -> f64 {
    match a % 4 {
        0 => y.cos(),
        1 => -y.sin(),
        2 => -y.cos(),
        _ => y.sin(),
    }
}

impl TestFunctionInstance {
    pub fn new(d: usize, c: f64, eps: f64, b: Vec<i8>) -> Result<Self> {
        if d == 0 || b.len() != d {
            return Err(invalid(format!("sign vector must have length d = {d}")));
        }
        if b.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("sign vector entries must be +1 or -1"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("c must be positive"));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(invalid("eps must be positive"));
        }
        Ok(Self { d, c, eps, b })
    }

    /// Instance with all signs +1.
    pub fn all_positive(d: usize, c: f64, eps: f64) -> Result<Self> {
        Self::new(d, c, eps, vec![1; d])
    }

    /// Whether `eps < c/146`, the range where the family is Gevrey with σ = 0.
    pub fn in_gevrey_range(&self) -> bool {
        self.eps < self.c / 146.0
    }

    /// Amplitude `73 ε / (c d)` of each summand.
    pub fn amplitude(&self) -> f64 {
        73.0 * self.eps / (self.c * self.d as f64)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.partial(&[], x)
    }

    /// Closed-form `∂_α f(x)`. Each axis `k` that appears `a_k` times in `alpha`
    /// contributes `c^{a_k}` times the `a_k`-th derivative of its sin or cos factor.
    pub fn partial(&self, alpha: &[usize], x: &[f64]) -> f64 {
        let d = self.d;
        let mut counts = vec![0usize; d];
        for &a in alpha {
            counts[a] += 1;
        }
        let mut s = vec![0.0; d];
        let mut co = vec![0.0; d];
        for k in 0..d {
            let y = self.c * x[k];
            let scale = self.c.powi(counts[k] as i32);
            s[k] = scale * sin_deriv(counts[k], y);
            co[k] = scale * cos_deriv(counts[k], y);
        }
        // Products of the cos factors excluding index j via prefix/suffix products.
        let mut suffix = vec![1.0; d + 1];
        for k in (0..d).rev() {
            suffix[k] = suffix[k + 1] * co[k];
        }
        let mut prefix = 1.0;
        let mut total = 0.0;
        for j in 0..d {
            total += self.b[j] as f64 * s[j] * prefix * suffix[j + 1];
            prefix *= co[j];
        }
        self.amplitude() * total
    }

    /// `(73 ε / d) b`.
    pub fn gradient_at_origin(&self) -> Vec<f64> {
        let g = 73.0 * self.eps / self.d as f64;
        self.b.iter().map(|&s| g * s as f64).collect()
    }

    /// The same function with sign `j` flipped.
    pub fn flipped(&self, j: usize) -> Self {
        let mut b = self.b.clone();
        b[j] = -b[j];
        Self { b, ..self.clone() }
    }

    /// Wraps the instance as an objective declared Gevrey with parameters (c, 0)
    /// on all of space, carrying its reference gradient and closed-form partials.
    pub fn to_objective(&self) -> ObjectiveFunction {
        let ev = self.clone();
        let pa = self.clone();
        let signs: String = self.b.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
        ObjectiveFunction::new(self.d, self.c, 0.0, move |x| ev.eval(x))
            .expect("validated instance")
            .with_name(format!("test-function[d={},c={},eps={},b={}]", self.d, self.c, self.eps, signs))
            .with_reference_gradient(self.gradient_at_origin())
            .expect("dimension matches")
            .with_partial(move |alpha, x| pa.partial(alpha, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Fourth-order central difference along axis `j`.
    fn fd4(f: &dyn Fn(&[f64]) -> f64, x: &[f64], j: usize, h: f64) -> f64 {
        let at = |t: f64| {
            let mut y = x.to_vec();
            y[j] += t;
            f(&y)
        };
        (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn vanishes_at_origin() {
        let t = TestFunctionInstance::new(3, 1.3, 0.004, vec![1, -1, 1]).unwrap();
        assert_eq!(t.eval(&[0.0; 3]), 0.0);
    }

    #[test]
    fn one_dimensional_peak() {
        let t = TestFunctionInstance::new(1, 2.0, 0.005, vec![1]).unwrap();
        let v = t.eval(&[PI / 4.0]);
        assert!((v - 73.0 * 0.005 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_point_2d() {
        // (73 ε / 2) · 2 sin(0.3) cos(0.3) with c = 1, ε = 0.005, reference from an independent evaluation.
        let t = TestFunctionInstance::new(2, 1.0, 0.005, vec![1, 1]).unwrap();
        let v = t.eval(&[0.3, 0.3]);
        assert!((v - 0.103_047_251_394_593_95).abs() < 1e-15, "{v}");
    }

    #[test]
    fn gradient_example() {
        let t = TestFunctionInstance::new(4, 1.0, 0.004, vec![1, -1, 1, 1]).unwrap();
        let g = t.gradient_at_origin();
        let e = [0.073, -0.073, 0.073, 0.073];
        for (a, b) in g.iter().zip(e) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((g.iter().map(|x| x.abs()).sum::<f64>() - 73.0 * 0.004).abs() < 1e-15);
    }

    #[test]
    fn second_derivative_of_sine_at_zero() {
        let t = TestFunctionInstance::new(1, 1.0, 0.005, vec![1]).unwrap();
        assert_eq!(t.partial(&[0, 0], &[0.0]), 0.0);
    }

    proptest! {
        #[test]
        fn gradient_matches_first_partials(d in 1usize..6, c in 0.2f64..3.0, seed in any::<u64>()) {
            let b: Vec<i8> = (0..d).map(|j| if (seed >> j) & 1 == 1 { 1 } else { -1 }).collect();
            let t = TestFunctionInstance::new(d, c, 0.001, b).unwrap();
            let g = t.gradient_at_origin();
            for (j, gj) in g.iter().enumerate() {
                let p = t.partial(&[j], &vec![0.0; d]);
                prop_assert!((p - gj).abs() <= 1e-15 * gj.abs().max(1.0));
            }
        }

        #[test]
        fn zero_order_partial_is_eval(x in proptest::collection::vec(-5.0f64..5.0, 3)) {
            let t = TestFunctionInstance::new(3, 0.7, 0.002, vec![1, -1, -1]).unwrap();
            prop_assert_eq!(t.partial(&[], &x), t.eval(&x));
        }

        #[test]
        fn sup_norm_bound(x in proptest::collection::vec(-20.0f64..20.0, 1..6), c in 0.1f64..4.0) {
            let d = x.len();
            let t = TestFunctionInstance::all_positive(d, c, 0.003).unwrap();
            prop_assert!(t.eval(&x).abs() <= 73.0 * 0.003 / c * (1.0 + 1e-12));
        }

        #[test]
        fn closed_form_matches_finite_differences(
            x in proptest::collection::vec(-2.0f64..2.0, 3),
            i in 0usize..3,
            j in 0usize..3,
            order in 0usize..3,
        ) {
            let t = TestFunctionInstance::new(3, 1.7, 0.005, vec![1, 1, -1]).unwrap();
            let h = 1e-3;
            // Derivative scale: the largest an order-|α| partial can be.
            let scale = t.amplitude() * t.c.powi(order as i32) * 3.0;
            let (exact, approx) = match order {
                0 => (t.eval(&x), t.eval(&x)),
                1 => (t.partial(&[i], &x), fd4(&|y| t.eval(y), &x, i, h)),
                _ => (t.partial(&[i, j], &x), fd4(&|y| t.partial(&[j], y), &x, i, h)),
            };
            let rel = (exact - approx).abs() / exact.abs().max(scale);
            prop_assert!(rel < 1e-6, "rel error {rel}");
        }
    }
}
