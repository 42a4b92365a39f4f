//! Schrodinger groups from a single self-adjoint Chernoff function:
//! R(t) = exp(i a (S(t) - I)) evaluated as a power series. When S(t) is
//! self-adjoint the exponent is skew, so R(t) is unitary for every t, and
//! when S is tangent to -H the iterated products R(t/n)^n converge to
//! exp(-i a t H).

use crate::chernoff::ChernoffScheme;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid};
use num_complex::Complex64;

/// Hard cap on series length; hitting it means the scheme is mis-scaled
/// (the exponent has norm far above 1) rather than a tolerance issue.
pub const SERIES_TERM_CAP: usize = 200;

/// A Chernoff function that is self-adjoint in the discrete L2 inner product,
/// carrying the real potential it was built from.
pub struct SymmetricScheme {
    scheme: ChernoffScheme,
    potential: GridFunction,
}

impl SymmetricScheme {
    /// Strang-symmetrized heat-plus-potential step for H = -d^2/dx^2 + V:
    /// `exp(-tV/2) . exp(t d^2/dx^2) . exp(-tV/2)`, a product of self-adjoint
    /// factors arranged symmetrically, tangent to -H at second order.
    pub fn strang_heat_potential(potential: &GridFunction) -> Result<Self> {
        let v: Vec<f64> = {
            // reuse the coefficient realness contract: |Im| <= 1e-12 slack
            let as_coeff = crate::operators::OperatorCoefficients::new(
                potential, potential, potential,
            )?;
            as_coeff.c().to_vec()
        };
        let grid = potential.grid();
        let min_v = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hint = (-min_v).max(0.0);
        let xi = grid.wavenumbers();
        let apply = move |t: f64, f: &GridFunction| -> Result<GridFunction> {
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let half: Vec<f64> = v.iter().map(|&vj| (-0.5 * t * vj).exp()).collect();
            let staged: Vec<Complex64> = f
                .samples()
                .iter()
                .zip(&half)
                .map(|(s, &h)| s * h)
                .collect();
            let mut modes = GridFunction::new(grid, staged)?.dft();
            for (m, &x) in modes.iter_mut().zip(&xi) {
                *m *= (-t * x * x).exp();
            }
            let smoothed = GridFunction::idft(grid, &modes)?;
            let samples: Vec<Complex64> = smoothed
                .samples()
                .iter()
                .zip(&half)
                .map(|(s, &h)| s * h)
                .collect();
            GridFunction::new(grid, samples)
        };
        Ok(Self {
            scheme: ChernoffScheme::from_parts("strang", hint, true, apply),
            potential: potential.clone(),
        })
    }

    pub fn apply(&self, t: f64, f: &GridFunction) -> Result<GridFunction> {
        self.scheme.apply(t, f)
    }

    pub fn scheme(&self) -> &ChernoffScheme {
        &self.scheme
    }

    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }

    pub fn grid(&self) -> SpatialGrid {
        self.potential.grid()
    }
}

/// Evaluate `R(t) f = exp(i a (S(t) - I)) f` by summing the power series
/// `sum_k (i a)^k / k! (S(t) - I)^k f`. Terms are added until the first
/// omitted term has L2 norm below `tol * ||f||`; the series for a bounded
/// exponent converges factorially, so the cap only trips on mis-scaled input.
pub fn remizov_exponential(
    s: &SymmetricScheme,
    t: f64,
    a: f64,
    f: &GridFunction,
    tol: f64,
) -> Result<GridFunction> {
    if !(a.is_finite() && a != 0.0) {
        return Err(Error::InvalidSeriesWeight);
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let f_norm = f.l2_norm();
    if f_norm == 0.0 {
        return Ok(f.clone());
    }
    let ia = Complex64::new(0.0, a);
    let mut sum = f.clone();
    let mut term = f.clone();
    for k in 1..=SERIES_TERM_CAP {
        let s_term = s.apply(t, &term)?;
        term = s_term.try_sub(&term)?.scale(ia / k as f64);
        if term.l2_norm() < tol * f_norm {
            return Ok(sum);
        }
        sum = sum.try_add(&term)?;
    }
    Err(Error::SeriesCapExceeded {
        cap: SERIES_TERM_CAP,
    })
}

/// n-fold product R(t/n)^n applied to u0. Each factor is unitary up to the
/// series tolerance, so the L2 norm drifts by at most O(n tol).
pub fn quasi_feynman_propagate(
    s: &SymmetricScheme,
    a: f64,
    t: f64,
    n: usize,
    u0: &GridFunction,
    tol: f64,
) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::ZeroIterations);
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let step = t / n as f64;
    let mut state = u0.clone();
    for _ in 0..n {
        state = remizov_exponential(s, step, a, &state, tol)?;
    }
    Ok(state)
}
