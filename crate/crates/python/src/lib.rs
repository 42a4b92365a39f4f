//! Python bindings: grids, grid functions, operator coefficients, Chernoff
//! schemes, the unitary Schrodinger construction, rate fits, and resolvent
//! solves. Thin wrappers; all numerics live in semikit-core.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use semikit_core::chernoff::{
    chernoff_iterate, exact_scheme, integral_scheme, shift_scheme, verify_tangency,
    ChernoffScheme, DEFAULT_HERMITE_ORDER,
};
use semikit_core::expr::Expression;
use semikit_core::grid::{GridFunction, SpatialGrid};
use semikit_core::operators::{
    apply_l, oracle_evolve_prefactored, ConstantSymbols, OperatorCoefficients,
};
use semikit_core::quasifeynman::{quasi_feynman_propagate, remizov_exponential, SymmetricScheme};
use semikit_core::rates::{fit_order, ErrorCurve, NormKind};
use semikit_core::resolvent::{
    elliptic_residual, resolvent_solve, QuadratureSpec, ResolventRequest,
    DEFAULT_NODES_PER_PANEL, DEFAULT_PANELS,
};

fn err(e: semikit_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Grid {
    inner: SpatialGrid,
}

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (period, n_points, x0 = 0.0))]
    fn new(period: f64, n_points: usize, x0: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SpatialGrid::new(x0, period, n_points).map_err(err)?,
        })
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(period={}, n_points={}, x0={})",
            self.inner.period(),
            self.inner.n_points(),
            self.inner.x0()
        )
    }
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Function {
    inner: GridFunction,
}

#[pymethods]
impl Function {
    #[staticmethod]
    fn from_expression(grid: &Grid, source: &str) -> PyResult<Self> {
        let expr = Expression::parse(source).map_err(err)?;
        Ok(Self {
            inner: GridFunction::sample_real(grid.inner, |x| expr.eval(x)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_samples(grid: &Grid, samples: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: GridFunction::new(grid.inner, samples).map_err(err)?,
        })
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid {
            inner: self.inner.grid(),
        }
    }

    fn samples(&self) -> Vec<Complex64> {
        self.inner.samples().to_vec()
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn eval(&self, x: f64) -> PyResult<Complex64> {
        self.inner.eval_interpolant(x).map_err(err)
    }

    fn add(&self, other: &Function) -> PyResult<Function> {
        Ok(Function {
            inner: self.inner.try_add(&other.inner).map_err(err)?,
        })
    }

    fn sub(&self, other: &Function) -> PyResult<Function> {
        Ok(Function {
            inner: self.inner.try_sub(&other.inner).map_err(err)?,
        })
    }

    fn scale(&self, alpha: Complex64) -> Function {
        Function {
            inner: self.inner.scale(alpha),
        }
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

#[pyclass(frozen)]
struct Coefficients {
    inner: OperatorCoefficients,
}

#[pymethods]
impl Coefficients {
    #[new]
    fn new(a: &Function, b: &Function, c: &Function) -> PyResult<Self> {
        Ok(Self {
            inner: OperatorCoefficients::new(&a.inner, &b.inner, &c.inner).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_expressions(grid: &Grid, a: &str, b: &str, c: &str) -> PyResult<Self> {
        let build = |src| Function::from_expression(grid, src);
        Self::new(&build(a)?, &build(b)?, &build(c)?)
    }

    /// Apply L f = a f'' + b f' + c f spectrally.
    fn apply(&self, f: &Function) -> PyResult<Function> {
        Ok(Function {
            inner: apply_l(&self.inner, &f.inner).map_err(err)?,
        })
    }

    fn max_reaction(&self) -> f64 {
        self.inner.max_reaction()
    }
}

#[pyclass(frozen)]
struct Scheme {
    inner: ChernoffScheme,
}

#[pymethods]
impl Scheme {
    #[staticmethod]
    fn shift(coeffs: &Coefficients) -> PyResult<Self> {
        Ok(Self {
            inner: shift_scheme(&coeffs.inner).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (coeffs, hermite_order = DEFAULT_HERMITE_ORDER))]
    fn integral(coeffs: &Coefficients, hermite_order: usize) -> PyResult<Self> {
        Ok(Self {
            inner: integral_scheme(&coeffs.inner, hermite_order).map_err(err)?,
        })
    }

    #[staticmethod]
    fn exact(a0: Complex64, b0: Complex64, c0: Complex64) -> PyResult<Self> {
        let symbols = ConstantSymbols::new(a0, b0, c0).map_err(err)?;
        Ok(Self {
            inner: exact_scheme(&symbols).map_err(err)?,
        })
    }

    fn apply(&self, t: f64, f: &Function) -> PyResult<Function> {
        Ok(Function {
            inner: self.inner.apply(t, &f.inner).map_err(err)?,
        })
    }

    /// C(t/n)^n f, the iterated product at time t.
    fn iterate(&self, t: f64, n: usize, f: &Function) -> PyResult<Function> {
        Ok(Function {
            inner: chernoff_iterate(&self.inner, t, n, &f.inner).map_err(err)?,
        })
    }

    #[getter]
    fn growth_bound_hint(&self) -> f64 {
        self.inner.growth_bound_hint()
    }

    #[getter]
    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    /// Fitted slope of sup|C(t)f - f - tLf| against t; None when the
    /// residuals sit at roundoff.
    fn tangency_order(
        &self,
        coeffs: &Coefficients,
        f: &Function,
        ts: Vec<f64>,
    ) -> PyResult<Option<f64>> {
        let report = verify_tangency(&self.inner, &coeffs.inner, &f.inner, &ts).map_err(err)?;
        Ok(report.fitted_order)
    }
}

/// Strang-symmetrized heat-plus-potential step and its unitary exponential.
#[pyclass(frozen)]
struct Schrodinger {
    inner: SymmetricScheme,
}

#[pymethods]
impl Schrodinger {
    #[new]
    fn new(potential: &Function) -> PyResult<Self> {
        Ok(Self {
            inner: SymmetricScheme::strang_heat_potential(&potential.inner).map_err(err)?,
        })
    }

    fn apply(&self, t: f64, f: &Function) -> PyResult<Function> {
        Ok(Function {
            inner: self.inner.apply(t, &f.inner).map_err(err)?,
        })
    }

    /// One factor R(t) f = exp(i a (S(t) - I)) f summed to tolerance.
    #[pyo3(signature = (t, f, a = 1.0, tol = 1e-12))]
    fn step(&self, t: f64, f: &Function, a: f64, tol: f64) -> PyResult<Function> {
        Ok(Function {
            inner: remizov_exponential(&self.inner, t, a, &f.inner, tol).map_err(err)?,
        })
    }

    /// R(t/n)^n u0, converging to exp(-i a t H) u0 for H = -d^2/dx^2 + V.
    #[pyo3(signature = (t, n, u0, a = 1.0, tol = 1e-12))]
    fn propagate(&self, t: f64, n: usize, u0: &Function, a: f64, tol: f64) -> PyResult<Function> {
        Ok(Function {
            inner: quasi_feynman_propagate(&self.inner, a, t, n, &u0.inner, tol).map_err(err)?,
        })
    }
}

#[pyfunction]
fn scalar_chernoff(l: f64, t: f64, n: u64) -> f64 {
    semikit_core::chernoff::scalar_chernoff(l, t, n)
}

/// Reference evolution exp(prefactor * t * L) u0 via the dense matrix
/// exponential of the sampled operator.
#[pyfunction]
#[pyo3(signature = (coeffs, t, u0, prefactor = Complex64::new(1.0, 0.0)))]
fn evolve_dense(
    coeffs: &Coefficients,
    t: f64,
    u0: &Function,
    prefactor: Complex64,
) -> PyResult<Function> {
    Ok(Function {
        inner: oracle_evolve_prefactored(&coeffs.inner, prefactor, t, &u0.inner).map_err(err)?,
    })
}

/// Reference evolution for constant coefficients via the Fourier multiplier.
#[pyfunction]
fn evolve_constant(
    a0: Complex64,
    b0: Complex64,
    c0: Complex64,
    t: f64,
    u0: &Function,
) -> PyResult<Function> {
    let symbols = ConstantSymbols::new(a0, b0, c0).map_err(err)?;
    Ok(Function {
        inner: semikit_core::operators::multiplier_semigroup(&symbols, t, &u0.inner)
            .map_err(err)?,
    })
}

/// Least-squares order fit of an error ladder; returns
/// (order, quality, classification, floor_reached).
#[pyfunction]
#[pyo3(signature = (t, ns, errors, norm = "sup", scale = 1.0))]
fn fit_rate(
    t: f64,
    ns: Vec<usize>,
    errors: Vec<f64>,
    norm: &str,
    scale: f64,
) -> PyResult<(Option<f64>, Option<f64>, String, bool)> {
    let kind = match norm {
        "sup" => NormKind::Sup,
        "l2" => NormKind::L2,
        other => return Err(PyValueError::new_err(format!("unknown norm '{other}'"))),
    };
    let curve = ErrorCurve::new(t, ns, errors, kind, scale).map_err(err)?;
    let report = fit_order(&curve);
    Ok((
        report.fitted_order,
        report.fit_quality,
        report.classification.to_string(),
        report.floor_reached,
    ))
}

/// (lambda - L)^{-1} g through the Laplace transform of the iterated scheme.
#[pyfunction]
#[pyo3(signature = (scheme, lam, g, iterations = 64, t_max = None,
                    panels = DEFAULT_PANELS, nodes_per_panel = DEFAULT_NODES_PER_PANEL))]
#[allow(clippy::too_many_arguments)]
fn resolve(
    scheme: &Scheme,
    lam: Complex64,
    g: &Function,
    iterations: usize,
    t_max: Option<f64>,
    panels: usize,
    nodes_per_panel: usize,
) -> PyResult<Function> {
    let spec = match t_max {
        Some(t) => QuadratureSpec::new(t, panels, nodes_per_panel),
        None => QuadratureSpec::auto(lam, scheme.inner.growth_bound_hint())
            .and_then(|s| QuadratureSpec::new(s.t_max(), panels, nodes_per_panel)),
    }
    .map_err(err)?;
    let req = ResolventRequest::new(lam, g.inner.clone(), iterations, spec).map_err(err)?;
    Ok(Function {
        inner: resolvent_solve(&scheme.inner, &req).map_err(err)?,
    })
}

/// Relative elliptic residual ||lambda f - L f - g|| / ||g||.
#[pyfunction]
fn residual(coeffs: &Coefficients, lam: Complex64, f: &Function, g: &Function) -> PyResult<f64> {
    elliptic_residual(&coeffs.inner, lam, &f.inner, &g.inner).map_err(err)
}

#[pymodule]
fn semikit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Function>()?;
    m.add_class::<Coefficients>()?;
    m.add_class::<Scheme>()?;
    m.add_class::<Schrodinger>()?;
    m.add_function(wrap_pyfunction!(scalar_chernoff, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_dense, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_constant, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(resolve, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    Ok(())
}
