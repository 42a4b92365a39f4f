//! One-step Chernoff functions C(t) and their iterated products
//! C(t/n)^n -> exp(tL), plus tangency and growth-bound diagnostics.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TrigInterpolant};
use crate::operators::{apply_l, multiplier_semigroup, ConstantSymbols, OperatorCoefficients};
use crate::quadrature::gauss_hermite_normal;
use num_complex::Complex64;

pub const DEFAULT_HERMITE_ORDER: usize = 20;

/// A one-step map C(t) together with the metadata iteration and resolvent
/// code needs: a sup-norm growth hint `||C(t)|| <= exp(t w)` and whether the
/// map is self-adjoint.
pub struct ChernoffScheme {
    label: String,
    growth_bound_hint: f64,
    is_symmetric: bool,
    apply_fn: Box<dyn Fn(f64, &GridFunction) -> Result<GridFunction> + Send + Sync>,
}

impl std::fmt::Debug for ChernoffScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChernoffScheme")
            .field("label", &self.label)
            .field("growth_bound_hint", &self.growth_bound_hint)
            .field("is_symmetric", &self.is_symmetric)
            .finish_non_exhaustive()
    }
}

impl ChernoffScheme {
    /// Wrap a raw one-step map. `apply` is only ever called with validated
    /// t >= 0; C(0) = identity is handled before it is consulted.
    pub fn from_parts(
        label: impl Into<String>,
        growth_bound_hint: f64,
        is_symmetric: bool,
        apply: impl Fn(f64, &GridFunction) -> Result<GridFunction> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            growth_bound_hint: growth_bound_hint.max(0.0),
            is_symmetric,
            apply_fn: Box::new(apply),
        }
    }

    pub fn apply(&self, t: f64, f: &GridFunction) -> Result<GridFunction> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime(t));
        }
        if t == 0.0 {
            return Ok(f.clone());
        }
        (self.apply_fn)(t, f)
    }

    pub fn growth_bound_hint(&self) -> f64 {
        self.growth_bound_hint
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_symmetric
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn coefficient_arrays(coeffs: &OperatorCoefficients) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (coeffs.a().to_vec(), coeffs.b().to_vec(), coeffs.c().to_vec())
}

/// Two-point averaging scheme: reaction factor times the mean of the
/// interpolant at `x + t b(x) +- sqrt(2 t a(x))`. The symmetric average
/// cancels the odd Taylor terms, leaving second-order tangency to L, and the
/// mean of two values keeps the step a sup-norm contraction up to exp(t max c).
pub fn shift_scheme(coeffs: &OperatorCoefficients) -> Result<ChernoffScheme> {
    coeffs.require_nonnegative_diffusion()?;
    let grid = coeffs.grid();
    let (a, b, c) = coefficient_arrays(coeffs);
    let hint = coeffs.max_reaction().max(0.0);
    let apply = move |t: f64, f: &GridFunction| -> Result<GridFunction> {
        if f.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let n = grid.n_points();
        let interp = TrigInterpolant::new(f);
        let mut targets = Vec::with_capacity(2 * n);
        for j in 0..n {
            let base = grid.node(j) + t * b[j];
            let offset = (2.0 * t * a[j]).sqrt();
            targets.push(base + offset);
            targets.push(base - offset);
        }
        let values = interp.eval_many(&targets)?;
        let samples: Vec<Complex64> = (0..n)
            .map(|j| 0.5 * (values[2 * j] + values[2 * j + 1]) * (t * c[j]).exp())
            .collect();
        GridFunction::new(grid, samples)
    };
    Ok(ChernoffScheme::from_parts("shift", hint, false, apply))
}

/// Gaussian-averaging scheme: the two-point mean is replaced by an M-point
/// quadrature exact against the standard normal weight, evaluating the
/// interpolant at `x + t b(x) + sqrt(2 t a(x)) s_m`.
pub fn integral_scheme(coeffs: &OperatorCoefficients, hermite_order: usize) -> Result<ChernoffScheme> {
    if hermite_order < 2 {
        return Err(Error::QuadratureOrderTooSmall(hermite_order));
    }
    coeffs.require_nonnegative_diffusion()?;
    let grid = coeffs.grid();
    let (a, b, c) = coefficient_arrays(coeffs);
    let hint = coeffs.max_reaction().max(0.0);
    let (nodes, weights) = gauss_hermite_normal(hermite_order)?;
    let apply = move |t: f64, f: &GridFunction| -> Result<GridFunction> {
        if f.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let n = grid.n_points();
        let m = nodes.len();
        let interp = TrigInterpolant::new(f);
        let mut targets = Vec::with_capacity(m * n);
        for j in 0..n {
            let base = grid.node(j) + t * b[j];
            let offset = (2.0 * t * a[j]).sqrt();
            for &s in &nodes {
                targets.push(base + offset * s);
            }
        }
        let values = interp.eval_many(&targets)?;
        let samples: Vec<Complex64> = (0..n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, &w) in weights.iter().enumerate() {
                    acc += w * values[j * m + idx];
                }
                acc * (t * c[j]).exp()
            })
            .collect();
        GridFunction::new(grid, samples)
    };
    Ok(ChernoffScheme::from_parts("integral", hint, false, apply))
}

/// The exact constant-coefficient semigroup packaged as a scheme; iterating
/// it reproduces itself, which pins the accuracy floor of everything else.
pub fn exact_scheme(sym: &ConstantSymbols) -> Result<ChernoffScheme> {
    let hint = sym.growth_exponent().ok_or(Error::UnboundedSymbol)?;
    // the multiplier is self-adjoint iff the symbol is real for every
    // frequency: Im(a0) = 0, Re(b0) = 0, Im(c0) = 0
    let symmetric = sym.a0().im == 0.0 && sym.b0().re == 0.0 && sym.c0().im == 0.0;
    let sym = *sym;
    Ok(ChernoffScheme::from_parts(
        "exact",
        hint.max(0.0),
        symmetric,
        move |t, f| multiplier_semigroup(&sym, t, f),
    ))
}

/// n-fold product C(t/n)^n applied to f. The step is computed once, so equal
/// step sequences give bitwise equal results.
pub fn chernoff_iterate(
    scheme: &ChernoffScheme,
    t: f64,
    n: usize,
    f: &GridFunction,
) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::ZeroIterations);
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let step = t / n as f64;
    let mut state = f.clone();
    for _ in 0..n {
        state = scheme.apply(step, &state)?;
    }
    Ok(state)
}

/// Scalar model of the product formula: (1 + t l / n)^n -> exp(t l).
pub fn scalar_chernoff(l: f64, t: f64, n: u64) -> f64 {
    let base = 1.0 + t * l / n as f64;
    if n <= i32::MAX as u64 {
        base.powi(n as i32)
    } else {
        base.powf(n as f64)
    }
}

/// Residuals r(t) = sup|C(t)f - f - t Lf| and their log-log slope. Slope
/// near 2 certifies the o(t) tangency with an O(t^2) margin.
#[derive(Debug, Clone)]
pub struct TangencyReport {
    pub residuals: Vec<(f64, f64)>,
    pub fitted_order: Option<f64>,
    pub degenerate: bool,
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

fn validate_t_values(t_values: &[f64], need: usize) -> Result<()> {
    if t_values.len() < need {
        return Err(Error::TooFewTimeValues {
            need,
            got: t_values.len(),
        });
    }
    if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidTimeValue);
    }
    Ok(())
}

/// Check first-order tangency of the scheme to L on f over the given times.
/// Times must span at least two decades so the slope fit is meaningful.
pub fn verify_tangency(
    scheme: &ChernoffScheme,
    coeffs: &OperatorCoefficients,
    f: &GridFunction,
    t_values: &[f64],
) -> Result<TangencyReport> {
    let lf = apply_l(coeffs, f)?;
    verify_tangency_against(scheme, &lf, f, t_values)
}

/// Same as [`verify_tangency`] with the generator action supplied directly.
pub fn verify_tangency_against(
    scheme: &ChernoffScheme,
    lf: &GridFunction,
    f: &GridFunction,
    t_values: &[f64],
) -> Result<TangencyReport> {
    validate_t_values(t_values, 4)?;
    let (min, max) = t_values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    if max / min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::NarrowTimeSpan);
    }
    let mut residuals = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let linear = f.try_add(&lf.scale(Complex64::new(t, 0.0)))?;
        let r = scheme.apply(t, f)?.try_sub(&linear)?.sup_norm();
        residuals.push((t, r));
    }
    // residuals at roundoff level carry no slope information
    let floor = 1e-14 * f.sup_norm().max(1.0);
    let usable: Vec<(f64, f64)> = residuals
        .iter()
        .filter(|(_, r)| *r > floor)
        .map(|&(t, r)| (t.ln(), r.ln()))
        .collect();
    if usable.len() < 2 {
        return Ok(TangencyReport {
            residuals,
            fitted_order: None,
            degenerate: true,
        });
    }
    let slope = least_squares_slope(&usable);
    Ok(TangencyReport {
        residuals,
        fitted_order: Some(slope),
        degenerate: false,
    })
}

/// Empirical growth exponent: max over trials and times of
/// `log(sup|C(t)f| / sup|f|) / t`, clamped at zero. For an honest scheme this
/// stays within a whisker of `growth_bound_hint`.
pub fn verify_growth_bound(
    scheme: &ChernoffScheme,
    trials: &[GridFunction],
    t_values: &[f64],
) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::NoTrials);
    }
    validate_t_values(t_values, 1)?;
    let mut w_est = 0.0f64;
    for f in trials {
        let norm = f.sup_norm();
        if norm == 0.0 {
            return Err(Error::ZeroNormTrial);
        }
        for &t in t_values {
            let grown = scheme.apply(t, f)?.sup_norm();
            w_est = w_est.max((grown / norm).ln() / t);
        }
    }
    Ok(w_est)
}
