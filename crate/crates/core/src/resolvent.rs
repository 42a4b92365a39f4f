//! Resolvents from iterated Chernoff products via the Laplace transform
//! (lambda - L)^{-1} g = integral_0^inf exp(-lambda t) exp(tL) g dt,
//! discretized with composite Gauss-Legendre on [0, t_max] and the
//! semigroup replaced by C(t/n)^n.

use crate::chernoff::{chernoff_iterate, ChernoffScheme};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operators::{apply_l, ConstantSymbols, OperatorCoefficients};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;

pub const DEFAULT_PANELS: usize = 16;
pub const DEFAULT_NODES_PER_PANEL: usize = 8;
pub const DEFAULT_ITERATIONS: usize = 64;
/// Bound demanded of the dropped tail exp(-(Re lambda - w) t_max).
pub const TRUNCATION_TOL: f64 = 1e-10;

/// Composite Gauss-Legendre layout for the Laplace integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    t_max: f64,
    panels: usize,
    nodes_per_panel: usize,
}

impl QuadratureSpec {
    pub fn new(t_max: f64, panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidQuadratureWindow("t_max must be positive and finite"));
        }
        if panels == 0 {
            return Err(Error::InvalidQuadratureWindow("panels must be at least 1"));
        }
        if nodes_per_panel == 0 {
            return Err(Error::InvalidQuadratureWindow(
                "nodes_per_panel must be at least 1",
            ));
        }
        Ok(Self {
            t_max,
            panels,
            nodes_per_panel,
        })
    }

    /// Pick t_max so the dropped tail is ~1e-10 of the integrand envelope,
    /// with a hair of headroom so the tail check cannot fail on roundoff.
    pub fn auto(lambda: Complex64, growth_bound: f64) -> Result<Self> {
        let gap = lambda.re - growth_bound;
        if !(gap.is_finite() && gap > 0.0) {
            return Err(Error::SpectralBound {
                re_lambda: lambda.re,
                bound: growth_bound,
            });
        }
        let t_max = -TRUNCATION_TOL.ln() / gap * (1.0 + 1e-7);
        Self::new(t_max, DEFAULT_PANELS, DEFAULT_NODES_PER_PANEL)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }
}

/// One resolvent solve: right-hand side g, spectral point lambda, Chernoff
/// iteration depth n for each semigroup evaluation.
#[derive(Debug, Clone)]
pub struct ResolventRequest {
    lambda: Complex64,
    g: GridFunction,
    n: usize,
    quadrature: QuadratureSpec,
}

impl ResolventRequest {
    pub fn new(
        lambda: Complex64,
        g: GridFunction,
        n: usize,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::InvalidTimeValue);
        }
        if n == 0 {
            return Err(Error::ZeroIterations);
        }
        Ok(Self {
            lambda,
            g,
            n,
            quadrature,
        })
    }

    /// Request with the window chosen from lambda and the scheme's bound.
    pub fn auto(lambda: Complex64, g: GridFunction, scheme: &ChernoffScheme) -> Result<Self> {
        let quadrature = QuadratureSpec::auto(lambda, scheme.growth_bound_hint())?;
        Self::new(lambda, g, DEFAULT_ITERATIONS, quadrature)
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature
    }
}

/// Approximate (lambda - L)^{-1} g. Demands Re lambda strictly above the
/// scheme's growth hint and a quadrature window long enough that the
/// truncated tail is below TRUNCATION_TOL. Nodes are visited in ascending t
/// so the summation order is deterministic.
pub fn resolvent_solve(scheme: &ChernoffScheme, req: &ResolventRequest) -> Result<GridFunction> {
    let w = scheme.growth_bound_hint();
    let gap = req.lambda.re - w;
    if gap <= 0.0 {
        return Err(Error::SpectralBound {
            re_lambda: req.lambda.re,
            bound: w,
        });
    }
    let spec = req.quadrature;
    let estimate = (-gap * spec.t_max()).exp();
    if estimate > TRUNCATION_TOL {
        return Err(Error::TruncationTooLarge {
            estimate,
            tol: TRUNCATION_TOL,
        });
    }
    let (nodes, weights) = gauss_legendre(spec.nodes_per_panel())?;
    let width = spec.t_max() / spec.panels() as f64;
    let mut acc = GridFunction::zero(req.g.grid());
    for p in 0..spec.panels() {
        let left = p as f64 * width;
        for (&node, &weight) in nodes.iter().zip(&weights) {
            // map [-1, 1] onto this panel
            let t_q = left + 0.5 * width * (node + 1.0);
            let omega = 0.5 * width * weight;
            let evolved = chernoff_iterate(scheme, t_q, req.n, &req.g)?;
            let factor = (-req.lambda * t_q).exp() * omega;
            acc = acc.try_add(&evolved.scale(factor))?;
        }
    }
    Ok(acc)
}

/// Relative elliptic residual ||lambda f - L f - g||_2 / ||g||_2 measuring
/// how well f solves the resolvent equation (absolute when g = 0).
pub fn elliptic_residual(
    coeffs: &OperatorCoefficients,
    lambda: Complex64,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<f64> {
    let lf = apply_l(coeffs, f)?;
    let residual = f.scale(lambda).try_sub(&lf)?.try_sub(g)?.l2_norm();
    let g_norm = g.l2_norm();
    Ok(if g_norm > 0.0 { residual / g_norm } else { residual })
}

/// Closed-form resolvent for constant coefficients: divide each Fourier mode
/// by lambda - symbol(xi). Fails if lambda grazes the symbol curve.
pub fn fourier_resolvent(
    sym: &ConstantSymbols,
    lambda: Complex64,
    g: &GridFunction,
) -> Result<GridFunction> {
    let grid = g.grid();
    let mut modes = g.dft();
    for (j, (m, &xi)) in modes.iter_mut().zip(&grid.wavenumbers()).enumerate() {
        let denom = lambda - sym.symbol(xi);
        if denom.norm() < 1e-14 {
            return Err(Error::ResolventSingular {
                mode: grid.mode_number(j),
            });
        }
        *m /= denom;
    }
    GridFunction::idft(grid, &modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chernoff::{exact_scheme, shift_scheme};
    use crate::grid::SpatialGrid;
    use std::f64::consts::TAU;

    fn grid(n: usize) -> SpatialGrid {
        SpatialGrid::new(0.0, TAU, n).unwrap()
    }

    #[test]
    fn quadrature_spec_is_validated() {
        assert!(matches!(
            QuadratureSpec::new(0.0, 4, 4),
            Err(Error::InvalidQuadratureWindow(_))
        ));
        assert!(matches!(
            QuadratureSpec::new(1.0, 0, 4),
            Err(Error::InvalidQuadratureWindow(_))
        ));
        assert!(matches!(
            QuadratureSpec::new(1.0, 4, 0),
            Err(Error::InvalidQuadratureWindow(_))
        ));
        let auto = QuadratureSpec::auto(Complex64::new(2.0, 0.0), 1.0).unwrap();
        // gap 1 needs ln(1e10) ~ 23.03 time units
        assert!((auto.t_max() - 23.0259).abs() < 1e-2);
        assert!(matches!(
            QuadratureSpec::auto(Complex64::new(1.0, 0.0), 1.0),
            Err(Error::SpectralBound { .. })
        ));
    }

    #[test]
    fn spectral_bound_and_truncation_are_enforced() {
        let g = grid(16);
        let coeffs = OperatorCoefficients::from_fns(g, |_| 1.0, |_| 0.0, |_| 1.0).unwrap();
        let scheme = shift_scheme(&coeffs).unwrap();
        let rhs = GridFunction::sample_real(g, f64::cos).unwrap();
        // hint is max c = 1, so lambda = 0.5 sits below the bound
        let spec = QuadratureSpec::new(10.0, 4, 4).unwrap();
        let req = ResolventRequest::new(Complex64::new(0.5, 0.0), rhs.clone(), 8, spec).unwrap();
        assert!(matches!(
            resolvent_solve(&scheme, &req),
            Err(Error::SpectralBound { .. })
        ));
        // lambda = 2 is fine but t_max = 1 leaves an exp(-1) tail
        let spec = QuadratureSpec::new(1.0, 4, 4).unwrap();
        let req = ResolventRequest::new(Complex64::new(2.0, 0.0), rhs, 8, spec).unwrap();
        assert!(matches!(
            resolvent_solve(&scheme, &req),
            Err(Error::TruncationTooLarge { .. })
        ));
    }

    #[test]
    fn zero_operator_reduces_to_the_laplace_transform_of_one() {
        // L = 0 keeps g fixed, so the solve returns g * (1 - e^{-lambda T}) / lambda
        let g = grid(16);
        let coeffs = OperatorCoefficients::from_fns(g, |_| 0.0, |_| 0.0, |_| 0.0).unwrap();
        let scheme = shift_scheme(&coeffs).unwrap();
        let rhs = GridFunction::sample_real(g, f64::cos).unwrap();
        let t_max = 25.0;
        let spec = QuadratureSpec::new(t_max, 16, 8).unwrap();
        let lambda = Complex64::new(1.0, 0.0);
        let req = ResolventRequest::new(lambda, rhs.clone(), 4, spec).unwrap();
        let f = resolvent_solve(&scheme, &req).unwrap();
        let expected = rhs.scale(((1.0 - (-t_max).exp()) / 1.0).into());
        assert!(f.try_sub(&expected).unwrap().sup_norm() <= 1e-10);
    }

    #[test]
    fn solve_is_linear_in_the_right_hand_side() {
        let g = grid(32);
        let coeffs = OperatorCoefficients::from_fns(g, |_| 1.0, |_| 0.0, |_| 0.0).unwrap();
        let scheme = shift_scheme(&coeffs).unwrap();
        let lambda = Complex64::new(2.0, 0.0);
        let spec = QuadratureSpec::auto(lambda, 0.0).unwrap();
        let g1 = GridFunction::sample_real(g, f64::cos).unwrap();
        let g2 = GridFunction::sample_real(g, |x| (2.0 * x).sin()).unwrap();
        let alpha = Complex64::new(0.7, -0.3);
        let combo = g1.scale(alpha).try_add(&g2).unwrap();
        let solve = |rhs: &GridFunction| {
            let req = ResolventRequest::new(lambda, rhs.clone(), 16, spec).unwrap();
            resolvent_solve(&scheme, &req).unwrap()
        };
        let lhs = solve(&combo);
        let rhs = solve(&g1).scale(alpha).try_add(&solve(&g2)).unwrap();
        assert!(lhs.try_sub(&rhs).unwrap().sup_norm() <= 1e-9);
    }

    #[test]
    fn heat_resolvent_matches_the_closed_form() {
        // (2 - d^2/dx^2)^{-1} cos = cos / 3
        let g = grid(64);
        let sym = ConstantSymbols::real(1.0, 0.0, 0.0).unwrap();
        let scheme = exact_scheme(&sym).unwrap();
        let rhs = GridFunction::sample_real(g, f64::cos).unwrap();
        let lambda = Complex64::new(2.0, 0.0);
        let req = ResolventRequest::auto(lambda, rhs.clone(), &scheme).unwrap();
        let f = resolvent_solve(&scheme, &req).unwrap();
        let closed = rhs.scale(Complex64::new(1.0 / 3.0, 0.0));
        assert!(f.try_sub(&closed).unwrap().sup_norm() <= 1e-6);
        let spectral = fourier_resolvent(&sym, lambda, &rhs).unwrap();
        assert!(f.try_sub(&spectral).unwrap().sup_norm() <= 1e-6);
        assert!(spectral.try_sub(&closed).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn residual_falls_along_the_refinement_ladder() {
        let g = grid(64);
        let coeffs =
            OperatorCoefficients::from_fns(g, |x| 1.0 + 0.5 * x.sin(), |x| x.cos(), |x| x.sin())
                .unwrap();
        let scheme = shift_scheme(&coeffs).unwrap();
        let rhs = GridFunction::sample_real(g, f64::cos).unwrap();
        let lambda = Complex64::new(4.0, 0.0);
        let spec = QuadratureSpec::auto(lambda, scheme.growth_bound_hint()).unwrap();
        let mut residuals = Vec::new();
        for &(panels, n) in &[(4usize, 8usize), (8, 32), (16, 128)] {
            let spec = QuadratureSpec::new(spec.t_max(), panels, 8).unwrap();
            let req = ResolventRequest::new(lambda, rhs.clone(), n, spec).unwrap();
            let f = resolvent_solve(&scheme, &req).unwrap();
            residuals.push(elliptic_residual(&coeffs, lambda, &f, &rhs).unwrap());
        }
        assert!(
            residuals.windows(2).all(|w| w[1] < w[0]),
            "residuals {residuals:?}"
        );
        assert!(residuals[2] <= 1e-3, "final residual {}", residuals[2]);
    }

    #[test]
    fn panel_refinement_converges_with_the_exact_scheme() {
        // with C(t) = e^{tL} the only error is quadrature, so doubling
        // panels must drive the solve toward the Fourier answer
        let g = grid(32);
        let sym = ConstantSymbols::real(1.0, 0.0, 0.0).unwrap();
        let scheme = exact_scheme(&sym).unwrap();
        let rhs = GridFunction::sample_real(g, |x| x.cos() + 0.3 * (3.0 * x).sin()).unwrap();
        let lambda = Complex64::new(1.5, 0.5);
        let truth = fourier_resolvent(&sym, lambda, &rhs).unwrap();
        let t_max = QuadratureSpec::auto(lambda, 0.0).unwrap().t_max();
        let mut errs = Vec::new();
        for &panels in &[2usize, 4, 8, 16] {
            let spec = QuadratureSpec::new(t_max, panels, 8).unwrap();
            let req = ResolventRequest::new(lambda, rhs.clone(), 1, spec).unwrap();
            let f = resolvent_solve(&scheme, &req).unwrap();
            errs.push(f.try_sub(&truth).unwrap().sup_norm());
        }
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "errors {errs:?}");
        assert!(errs[3] <= 1e-8, "finest error {}", errs[3]);
    }

    #[test]
    fn singular_spectral_point_is_reported() {
        let g = grid(16);
        let sym = ConstantSymbols::real(1.0, 0.0, 0.0).unwrap();
        let rhs = GridFunction::sample_real(g, f64::cos).unwrap();
        // symbol at xi = 1 is -1, so lambda = -1 is on the curve
        assert!(matches!(
            fourier_resolvent(&sym, Complex64::new(-1.0, 0.0), &rhs),
            Err(Error::ResolventSingular { .. })
        ));
    }

    #[test]
    fn residual_of_the_exact_solution_vanishes() {
        let g = grid(64);
        let coeffs = OperatorCoefficients::from_fns(g, |_| 1.0, |_| 0.0, |_| 0.0).unwrap();
        let rhs = GridFunction::sample_real(g, f64::cos).unwrap();
        let f = rhs.scale(Complex64::new(1.0 / 3.0, 0.0));
        let r = elliptic_residual(&coeffs, Complex64::new(2.0, 0.0), &f, &rhs).unwrap();
        assert!(r <= 1e-13, "residual {r}");
    }
}
