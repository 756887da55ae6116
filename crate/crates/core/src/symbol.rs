//! Multiplier symbols `m: ℝⁿ → ℂ`.

use alloc::boxed::Box;
use alloc::string::String;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::grid::{GridFunction, Side};
use crate::{Error, Result};

/// A symbol evaluable at arbitrary frequency points.
///
/// Symbols singular at the origin return `0` there.
pub trait Symbol: Send + Sync {
    fn label(&self) -> String;

    fn eval(&self, xi: &[f64]) -> Complex64;

    /// Whether `eval` is meaningful at `xi`. Sampled symbols refuse to
    /// extrapolate beyond their sample range.
    fn is_evaluable(&self, xi: &[f64]) -> bool {
        xi.iter().all(|v| v.is_finite())
    }

    /// Closed-form `∂^α m(ξ)`, when the symbol knows it.
    fn partial(&self, _xi: &[f64], _alpha: &[u8]) -> Option<Complex64> {
        None
    }
}

impl<S: Symbol + ?Sized> Symbol for &S {
    fn label(&self) -> String {
        (**self).label()
    }
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (**self).eval(xi)
    }
    fn is_evaluable(&self, xi: &[f64]) -> bool {
        (**self).is_evaluable(xi)
    }
    fn partial(&self, xi: &[f64], alpha: &[u8]) -> Option<Complex64> {
        (**self).partial(xi, alpha)
    }
}

impl<S: Symbol + ?Sized> Symbol for Box<S> {
    fn label(&self) -> String {
        (**self).label()
    }
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (**self).eval(xi)
    }
    fn is_evaluable(&self, xi: &[f64]) -> bool {
        (**self).is_evaluable(xi)
    }
    fn partial(&self, xi: &[f64], alpha: &[u8]) -> Option<Complex64> {
        (**self).partial(xi, alpha)
    }
}

/// A closure symbol without closed-form derivatives.
pub struct FnSymbol<F> {
    label: String,
    f: F,
}

impl<F> FnSymbol<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        FnSymbol {
            label: label.into(),
            f,
        }
    }
}

impl<F> Symbol for FnSymbol<F>
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    fn label(&self) -> String {
        self.label.clone()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.f)(xi)
    }
}

/// A symbol given by frequency-side samples, interpolated (bi)linearly
/// between nodes. Points outside the sampled range are not evaluable.
#[derive(Debug, Clone)]
pub struct SampledSymbol {
    label: String,
    samples: GridFunction,
}

impl SampledSymbol {
    pub fn new(label: impl Into<String>, samples: GridFunction) -> Result<Self> {
        if samples.side() != Side::Frequency {
            return Err(Error::SideMismatch {
                expected: Side::Frequency,
                found: samples.side(),
            });
        }
        Ok(SampledSymbol {
            label: label.into(),
            samples,
        })
    }

    /// Fractional node position along one axis, if inside the sampled hull.
    fn locate(&self, coord: f64) -> Option<(usize, f64)> {
        let grid = self.samples.grid();
        let n = grid.points();
        let d = grid.freq_spacing();
        let pos = coord / d + (n / 2) as f64;
        if !(pos >= 0.0 && pos <= (n - 1) as f64) {
            return None;
        }
        let base = (pos.floor() as usize).min(n - 2);
        Some((base, pos - base as f64))
    }
}

impl Symbol for SampledSymbol {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn is_evaluable(&self, xi: &[f64]) -> bool {
        xi.len() == self.samples.grid().dim() && xi.iter().all(|&c| self.locate(c).is_some())
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let grid = self.samples.grid();
        let s = self.samples.samples();
        let zero = Complex64::new(0.0, 0.0);
        match grid.dim() {
            1 => match self.locate(xi[0]) {
                Some((i, t)) => s[i] * (1.0 - t) + s[i + 1] * t,
                None => zero,
            },
            _ => match (self.locate(xi[0]), self.locate(xi[1])) {
                (Some((i, t)), Some((k, u))) => {
                    let at = |a: usize, b: usize| s[grid.flatten([a, b])];
                    at(i, k) * ((1.0 - t) * (1.0 - u))
                        + at(i + 1, k) * (t * (1.0 - u))
                        + at(i, k + 1) * ((1.0 - t) * u)
                        + at(i + 1, k + 1) * (t * u)
                }
                _ => zero,
            },
        }
    }
}
