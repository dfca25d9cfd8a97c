//! Objective functions: the evaluation interface, the sine/cosine test family
//! used by the lower bounds, a catalog of one-dimensional Gevrey examples and
//! a derivative-bound checker.

mod catalog;
mod gevrey;
mod test_function;

pub use catalog::{catalog, catalog_entry, CATALOG_NAMES};
pub use gevrey::{
    gevrey_bound, gevrey_check, sample_domain_points, sample_multi_indices, GevreyMode, GevreyReport, GevreyRow,
    GEVREY_FD_MAX_ORDER,
};
pub use test_function::TestFunctionInstance;

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

pub type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Closed-form partial derivative. `alpha` lists axis indices (0-based), so
/// its length is the derivative order and repeats mean repeated differentiation.
pub type PartialFn = dyn Fn(&[usize], &[f64]) -> f64 + Send + Sync;

/// Declared domain of an objective: all of space, or an open axis-aligned box
/// (bounds may be infinite).
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Everywhere,
    Box(Vec<(f64, f64)>),
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Everywhere => true,
            Domain::Box(b) => b.len() == x.len() && b.iter().zip(x).all(|(&(lo, hi), &xi)| lo < xi && xi < hi),
        }
    }

    pub fn is_everywhere(&self) -> bool {
        matches!(self, Domain::Everywhere)
    }
}

#[derive(Clone)]
pub struct ObjectiveFunction {
    name: String,
    dim: usize,
    eval: Arc<EvalFn>,
    c: f64,
    sigma: f64,
    domain: Domain,
    reference_gradient: Option<Vec<f64>>,
    partial: Option<Arc<PartialFn>>,
    numerical_evidence: bool,
}

impl fmt::Debug for ObjectiveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("c", &self.c)
            .field("sigma", &self.sigma)
            .field("domain", &self.domain)
            .field("reference_gradient", &self.reference_gradient)
            .field("closed_form_partials", &self.partial.is_some())
            .field("numerical_evidence", &self.numerical_evidence)
            .finish()
    }
}

impl ObjectiveFunction {
    pub fn new<F>(dim: usize, c: f64, sigma: f64, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(invalid("objective dimension must be positive"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("declared c must be positive, got {c}")));
        }
        if !sigma.is_finite() {
            return Err(invalid("declared sigma must be finite"));
        }
        Ok(Self {
            name: "custom".into(),
            dim,
            eval: Arc::new(eval),
            c,
            sigma,
            domain: Domain::Everywhere,
            reference_gradient: None,
            partial: None,
            numerical_evidence: false,
        })
    }

    /// The zero function in `dim` dimensions, gradient 0.
    pub fn zero(dim: usize) -> Result<Self> {
        Ok(Self::new(dim, 1.0, 0.0, |_| 0.0)?
            .with_name("zero")
            .with_reference_gradient(vec![0.0; dim])?
            .with_partial(|_, _| 0.0))
    }

    /// `x ↦ offset + slope·x`.
    pub fn linear(offset: f64, slope: Vec<f64>) -> Result<Self> {
        let dim = slope.len();
        let s = slope.clone();
        let s2 = slope.clone();
        let f = Self::new(dim, 1.0, 0.0, move |x| offset + s.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())?
            .with_name("linear")
            .with_reference_gradient(slope)?
            .with_partial(move |alpha, x| match alpha.len() {
                0 => offset + s2.iter().zip(x).map(|(a, b)| a * b).sum::<f64>(),
                1 => s2[alpha[0]],
                _ => 0.0,
            });
        Ok(f)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        if let Domain::Box(b) = &domain {
            if b.len() != self.dim {
                return Err(invalid("domain box dimension does not match the function"));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_reference_gradient(mut self, g: Vec<f64>) -> Result<Self> {
        if g.len() != self.dim {
            return Err(invalid("reference gradient dimension does not match the function"));
        }
        self.reference_gradient = Some(g);
        Ok(self)
    }

    pub fn with_partial<F>(mut self, partial: F) -> Self
    where
        F: Fn(&[usize], &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.partial = Some(Arc::new(partial));
        self
    }

    pub fn with_numerical_evidence(mut self, flag: bool) -> Self {
        self.numerical_evidence = flag;
        self
    }

    /// Evaluate with dimension and domain checks.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(invalid(format!("point has {} components, function expects {}", x.len(), self.dim)));
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(format!("{} at {:?}", self.name, x)));
        }
        Ok((self.eval)(x))
    }

    /// Evaluate without checks. Callers guarantee `x` is in range.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Closed-form partial derivative, if one was supplied.
    pub fn partial(&self, alpha: &[usize], x: &[f64]) -> Option<f64> {
        self.partial.as_ref().map(|p| p(alpha, x))
    }

    pub fn has_closed_form_partials(&self) -> bool {
        self.partial.is_some()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn reference_gradient(&self) -> Option<&[f64]> {
        self.reference_gradient.as_deref()
    }

    pub fn numerical_evidence(&self) -> bool {
        self.numerical_evidence
    }
}
