//! Special functions, bracketed root finding and semi-infinite quadrature.
//!
//! Only what the Rayleigh closed forms need: the exponential integral
//! `E1`, a derivative-free bracketed solver for the monotone power
//! constraints, and an adaptive Gauss-Kronrod rule on `[a, ∞)` that serves
//! as the independent quadrature oracle for every closed form.

mod e1;
mod quad;
mod root;

pub(crate) use e1::e1;
pub use e1::{exp_integral_e1, E1_SERIES_CROSSOVER};
pub use quad::{integrate, integrate_semi_infinite};
pub use root::find_root;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Argument(format!(
                "interval requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Stopping rule shared by the root finder and the quadrature.
///
/// `max_iter` counts bisection steps for [`find_root`] and the maximum
/// number of subintervals for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
    rel_tol: f64,
    max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter == 0 {
            return Err(Error::Argument(format!(
                "tolerance requires abs_tol > 0, rel_tol > 0, max_iter >= 1 (got {abs_tol}, {rel_tol}, {max_iter})"
            )));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    pub fn with_max_iter(self, max_iter: usize) -> Result<Self> {
        Self::new(self.abs_tol, self.rel_tol, max_iter)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 200,
        }
    }
}
