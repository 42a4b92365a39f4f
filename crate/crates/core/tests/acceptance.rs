//! Acceptance gate. One test per criterion; each prints a single
//! bracketed line with the measured quantities when run with --nocapture,
//! and the test verdict itself is the pass/fail record.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semikit_core::chernoff::{
    chernoff_iterate, exact_scheme, integral_scheme, scalar_chernoff, shift_scheme,
    verify_growth_bound, verify_tangency, DEFAULT_HERMITE_ORDER,
};
use semikit_core::grid::{GridFunction, SpatialGrid};
use semikit_core::operators::{
    ConstantSymbols, DenseOracle, EvolutionOracle, MultiplierOracle, OperatorCoefficients,
};
use semikit_core::quasifeynman::{quasi_feynman_propagate, SymmetricScheme};
use semikit_core::rates::{error_curve, fit_order, ErrorCurve, NormKind, RateClass, DEFAULT_LADDER};
use semikit_core::resolvent::{
    elliptic_residual, fourier_resolvent, resolvent_solve, QuadratureSpec, ResolventRequest,
};
use std::f64::consts::TAU;

fn grid(n: usize) -> SpatialGrid {
    SpatialGrid::new(0.0, TAU, n).unwrap()
}

fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

fn random_smooth(g: SpatialGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n_points();
    let mut modes = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..=6usize.min(n / 2 - 1) {
        let amp = 0.5f64.powi(k as i32);
        modes[k] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        if k > 0 {
            modes[n - k] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        }
    }
    GridFunction::idft(g, &modes).unwrap()
}

fn variable_coefficients(g: SpatialGrid) -> OperatorCoefficients {
    OperatorCoefficients::from_fns(g, |x| 1.0 + 0.5 * x.sin(), |x| x.cos(), |x| x.sin()).unwrap()
}

#[test]
fn a01_scalar_product_formula_converges_at_rate_one_over_n() {
    let e = std::f64::consts::E;
    let mut worst_ratio = 0.0f64;
    let mut n = 10u64;
    while n <= 1_000_000 {
        let err = (scalar_chernoff(1.0, 1.0, n) - e).abs();
        let bound = 2.0 / n as f64;
        assert!(err <= bound, "n={n}: error {err} above {bound}");
        worst_ratio = worst_ratio.max(err / bound);
        n *= 10;
    }
    println!("[PASS] criterion 01: scalar error <= 2/n for n in 10..1e6 (worst err/bound {worst_ratio:.3})");
}

#[test]
fn a02_scheme_preconditions_identity_growth_and_tangency() {
    let g = grid(128);
    let coeffs =
        OperatorCoefficients::from_fns(g, |x| 1.0 + 0.5 * x.sin(), |x| x.cos(), |_| 0.0).unwrap();
    let schemes = [
        shift_scheme(&coeffs).unwrap(),
        integral_scheme(&coeffs, DEFAULT_HERMITE_ORDER).unwrap(),
    ];
    let trials = [
        GridFunction::sample_real(g, f64::cos).unwrap(),
        GridFunction::sample_real(g, f64::sin).unwrap(),
        GridFunction::sample_real(g, |_| 1.0).unwrap(),
        GridFunction::sample_real(g, |x| x.sin().exp()).unwrap(),
    ];
    let f = GridFunction::sample_real(g, f64::sin).unwrap();
    let tangency_ts = logspace(1e-4, 1e-1, 10);
    let growth_ts = [0.1, 0.25, 0.5, 1.0];
    let w_cap = coeffs.max_reaction().max(0.0) + 0.1;
    let mut measured = Vec::new();
    for scheme in &schemes {
        let probe = random_smooth(g, 5);
        assert_eq!(scheme.apply(0.0, &probe).unwrap(), probe, "C(0) != I");
        let w_est = verify_growth_bound(scheme, &trials, &growth_ts).unwrap();
        assert!(w_est <= w_cap, "{}: w_est {w_est} above {w_cap}", scheme.label());
        let report = verify_tangency(scheme, &coeffs, &f, &tangency_ts).unwrap();
        let order = report.fitted_order.expect("tangency fit degenerate");
        assert!(
            (1.8..=2.2).contains(&order),
            "{}: tangency order {order}",
            scheme.label()
        );
        measured.push(format!("{}: w_est {w_est:.2e}, order {order:.3}", scheme.label()));
    }
    println!("[PASS] criterion 02: C(0)=I, growth, tangency ({})", measured.join("; "));
}

#[test]
fn a03_heat_iteration_converges_to_the_semigroup() {
    let g = grid(256);
    let coeffs = OperatorCoefficients::from_fns(g, |_| 1.0, |_| 0.0, |_| 0.0).unwrap();
    let scheme = shift_scheme(&coeffs).unwrap();
    let oracle = MultiplierOracle(ConstantSymbols::real(1.0, 0.0, 0.0).unwrap());
    let u0 = GridFunction::sample_real(g, f64::cos).unwrap();
    let curve = error_curve(&scheme, &oracle, 1.0, &DEFAULT_LADDER, &u0, NormKind::Sup).unwrap();
    let final_err = *curve.errors().last().unwrap();
    assert!(final_err <= 5e-3, "sup error at n=1024 is {final_err}");
    let report = fit_order(&curve);
    let order = report.fitted_order.expect("too few above-floor points");
    assert!((0.8..=1.2).contains(&order), "fitted order {order}");
    println!("[PASS] criterion 03: heat err(n=1024) {final_err:.3e}, order {order:.3}");
}

#[test]
fn a04_transport_and_reaction_closed_forms() {
    let g = grid(128);
    let t = 1.0;
    let u0 = GridFunction::sample_real(g, f64::cos).unwrap();

    let transport = OperatorCoefficients::from_fns(g, |_| 0.0, |_| 1.0, |_| 0.0).unwrap();
    let scheme = shift_scheme(&transport).unwrap();
    let shifted = GridFunction::sample_real(g, |x| (x + t).cos()).unwrap();
    let approx = chernoff_iterate(&scheme, t, 1024, &u0).unwrap();
    let transport_err = approx.try_sub(&shifted).unwrap().sup_norm();
    assert!(transport_err <= 1e-8, "transport error {transport_err}");

    let reaction = OperatorCoefficients::from_fns(g, |_| 0.0, |_| 0.0, |x| x.sin()).unwrap();
    let scheme = shift_scheme(&reaction).unwrap();
    let target = GridFunction::sample(g, |x| {
        Complex64::from(x.cos()) * Complex64::from((t * x.sin()).exp())
    })
    .unwrap();
    let mut reaction_err = 0.0f64;
    for n in [1usize, 4, 32, 1024] {
        let approx = chernoff_iterate(&scheme, t, n, &u0).unwrap();
        let err = approx.try_sub(&target).unwrap().sup_norm();
        assert!(err <= 1e-12, "reaction error {err} at n={n}");
        reaction_err = reaction_err.max(err);
    }
    println!(
        "[PASS] criterion 04: transport {transport_err:.3e}, reaction worst {reaction_err:.3e}"
    );
}

#[test]
fn a05_variable_coefficients_match_the_dense_oracle() {
    let g = grid(128);
    let coeffs = variable_coefficients(g);
    let scheme = shift_scheme(&coeffs).unwrap();
    let oracle = DenseOracle::new(&coeffs, Complex64::new(1.0, 0.0)).unwrap();
    let u0 = GridFunction::sample_real(g, f64::cos).unwrap();
    let ns = [16usize, 64, 256, 1024];
    let curve = error_curve(&scheme, &oracle, 0.5, &ns, &u0, NormKind::Sup).unwrap();
    let errs = curve.errors();
    assert!(
        errs.windows(2).all(|w| w[1] < w[0]),
        "errors not decreasing: {errs:?}"
    );
    let order = fit_order(&curve).fitted_order.expect("fit degenerate");
    assert!(order >= 0.8, "fitted order {order}");
    println!(
        "[PASS] criterion 05: errors {:?} order {order:.3}",
        errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()
    );
}

#[test]
fn a06_quasi_feynman_unitarity_phase_and_convergence() {
    // (i) unitarity
    let g64 = grid(64);
    let v = GridFunction::sample_real(g64, |x| 1.0 + x.cos()).unwrap();
    let s = SymmetricScheme::strang_heat_potential(&v).unwrap();
    let u0 = GridFunction::sample_real(g64, |x| (x.cos() - 1.0).exp()).unwrap();
    let out = quasi_feynman_propagate(&s, 1.0, 1.0, 256, &u0, 1e-12).unwrap();
    let drift = (out.l2_norm() - u0.l2_norm()).abs() / u0.l2_norm();
    assert!(drift <= 1e-8, "norm drift {drift}");

    // (ii) free eigenmode phase
    let g32 = grid(32);
    let v0 = GridFunction::sample_real(g32, |_| 0.0).unwrap();
    let s0 = SymmetricScheme::strang_heat_potential(&v0).unwrap();
    let mode = GridFunction::sample_real(g32, f64::cos).unwrap();
    let evolved = quasi_feynman_propagate(&s0, 1.0, 1.0, 256, &mode, 1e-12).unwrap();
    let target = mode.scale(Complex64::new(0.0, -1.0).exp());
    let phase_err = evolved.try_sub(&target).unwrap().sup_norm();
    assert!(phase_err <= 3e-3, "phase error {phase_err}");

    // (iii) convergence to exp(-itH) for H = -d^2/dx^2 + V
    let h = OperatorCoefficients::from_fns(g64, |_| -1.0, |_| 0.0, |x| 1.0 + x.cos()).unwrap();
    let oracle = DenseOracle::new(&h, Complex64::new(0.0, -1.0)).unwrap();
    let truth = oracle.evolve(0.5, &u0).unwrap();
    let mut errs = Vec::new();
    for n in [16usize, 64, 256] {
        let approx = quasi_feynman_propagate(&s, 1.0, 0.5, n, &u0, 1e-12).unwrap();
        errs.push(approx.try_sub(&truth).unwrap().l2_norm());
    }
    assert!(
        errs.windows(2).all(|w| w[1] < w[0]),
        "errors not decreasing: {errs:?}"
    );
    println!(
        "[PASS] criterion 06: drift {drift:.3e}, phase {phase_err:.3e}, errors {:?}",
        errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()
    );
}

#[test]
fn a07_rate_fits_recover_synthetic_power_laws() {
    let mut fits = Vec::new();
    for &k in &[0.5f64, 1.0, 2.0, 3.0] {
        let ns = DEFAULT_LADDER.to_vec();
        let errors: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-k)).collect();
        let curve = ErrorCurve::new(1.0, ns, errors, NormKind::Sup, 1.0).unwrap();
        let report = fit_order(&curve);
        let order = report.fitted_order.unwrap();
        assert!((order - k).abs() <= 0.01, "k={k}: fitted {order}");
        let expected = if k > 1.15 { RateClass::Fast } else { RateClass::Standard };
        assert_eq!(report.classification, expected, "k={k}");
        // mapping is a pure function of the report
        assert_eq!(fit_order(&curve).classification, report.classification);
        fits.push(format!("{k}->{order:.4}"));
    }
    let ns = DEFAULT_LADDER.to_vec();
    let steep: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-4.0)).collect();
    let curve = ErrorCurve::new(1.0, ns, steep, NormKind::Sup, 1.0).unwrap();
    assert_eq!(
        fit_order(&curve).classification,
        RateClass::SuperfastCandidate
    );
    println!("[PASS] criterion 07: orders {} and threshold mapping exact", fits.join(", "));
}

#[test]
fn a08_resolvent_oracles_and_refinement() {
    // zero generator: (lambda - 0)^{-1} g = g / lambda
    let g16 = grid(64);
    let zero_coeffs = OperatorCoefficients::from_fns(g16, |_| 0.0, |_| 0.0, |_| 0.0).unwrap();
    let zero_scheme = shift_scheme(&zero_coeffs).unwrap();
    let rhs = GridFunction::sample_real(g16, f64::cos).unwrap();
    let lambda = Complex64::new(2.0, 0.0);
    let spec = QuadratureSpec::auto(lambda, zero_scheme.growth_bound_hint()).unwrap();
    let req = ResolventRequest::new(lambda, rhs.clone(), 4, spec).unwrap();
    let f = resolvent_solve(&zero_scheme, &req).unwrap();
    let scalar_err = f
        .try_sub(&rhs.scale(1.0 / lambda))
        .unwrap()
        .sup_norm();
    assert!(scalar_err <= 1e-10, "scalar case error {scalar_err}");

    // constant coefficients: agree with the Fourier-space resolvent
    let sym = ConstantSymbols::real(1.0, 0.0, 0.0).unwrap();
    let heat = exact_scheme(&sym).unwrap();
    let req = ResolventRequest::auto(lambda, rhs.clone(), &heat).unwrap();
    let f = resolvent_solve(&heat, &req).unwrap();
    let spectral = fourier_resolvent(&sym, lambda, &rhs).unwrap();
    let const_err = f.try_sub(&spectral).unwrap().sup_norm();
    assert!(const_err <= 1e-6, "constant-coefficient error {const_err}");
    let closed = rhs.scale(Complex64::from(1.0 / 3.0));
    assert!(f.try_sub(&closed).unwrap().sup_norm() <= 1e-6);

    // variable coefficients: residual falls along the refinement ladder
    let g64 = grid(64);
    let coeffs = variable_coefficients(g64);
    let scheme = shift_scheme(&coeffs).unwrap();
    let rhs = GridFunction::sample_real(g64, f64::cos).unwrap();
    let lambda = Complex64::new(4.0, 0.0);
    let base = QuadratureSpec::auto(lambda, scheme.growth_bound_hint()).unwrap();
    let mut residuals = Vec::new();
    for &(panels, n) in &[(4usize, 8usize), (8, 32), (16, 128)] {
        let spec = QuadratureSpec::new(base.t_max(), panels, 8).unwrap();
        let req = ResolventRequest::new(lambda, rhs.clone(), n, spec).unwrap();
        let f = resolvent_solve(&scheme, &req).unwrap();
        residuals.push(elliptic_residual(&coeffs, lambda, &f, &rhs).unwrap());
    }
    assert!(
        residuals.windows(2).all(|w| w[1] < w[0]),
        "residuals not decreasing: {residuals:?}"
    );
    assert!(residuals[2] <= 1e-3, "finest residual {}", residuals[2]);
    println!(
        "[PASS] criterion 08: scalar {scalar_err:.3e}, constant {const_err:.3e}, residuals {:?}",
        residuals.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()
    );
}

#[test]
fn a09_oracles_satisfy_the_semigroup_law() {
    let g = grid(64);
    let f = random_smooth(g, 42);
    let pairs = [(0.1f64, 0.3f64), (0.3, 0.7), (0.1, 0.7)];
    let multiplier = MultiplierOracle(ConstantSymbols::real(1.0, 0.5, -0.2).unwrap());
    let dense = DenseOracle::new(&variable_coefficients(g), Complex64::from(1.0)).unwrap();
    let oracles: [(&str, &dyn EvolutionOracle); 2] = [("multiplier", &multiplier), ("dense", &dense)];
    let mut worst = 0.0f64;
    for (name, oracle) in oracles {
        for &(t, s) in &pairs {
            let two_step = oracle.evolve(s, &oracle.evolve(t, &f).unwrap()).unwrap();
            let one_step = oracle.evolve(t + s, &f).unwrap();
            let dev = two_step.try_sub(&one_step).unwrap().l2_norm() / one_step.l2_norm();
            assert!(dev <= 1e-8, "{name} at (t,s)=({t},{s}): deviation {dev}");
            worst = worst.max(dev);
        }
    }
    println!("[PASS] criterion 09: semigroup law, worst relative deviation {worst:.3e}");
}
