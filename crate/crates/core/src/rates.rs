//! Empirical convergence-rate measurement for iterated Chernoff products:
//! error ladders against a reference evolution, log-log order fits, a
//! coarse speed classification, and a ratio test for subspace-restricted
//! speedup claims. Everything here is finite-sample evidence, not proof.

use crate::chernoff::{chernoff_iterate, ChernoffScheme};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operators::EvolutionOracle;
use serde_json::json;
use std::fmt;

/// Default iteration ladder for error curves.
pub const DEFAULT_LADDER: [usize; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];

/// Errors below `ACCURACY_FLOOR_FACTOR * scale` are treated as roundoff
/// noise and excluded from order fits.
pub const ACCURACY_FLOOR_FACTOR: f64 = 1e-11;

/// Minimum number of above-floor points for a trustworthy order fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Sup,
    L2,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Sup => write!(f, "sup"),
            NormKind::L2 => write!(f, "l2"),
        }
    }
}

fn measure(f: &GridFunction, kind: NormKind) -> f64 {
    match kind {
        NormKind::Sup => f.sup_norm(),
        NormKind::L2 => f.l2_norm(),
    }
}

/// Errors of C(t/n)^n u0 against a reference, indexed by n. `scale` is the
/// size of the reference solution in the same norm; it anchors the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    t: f64,
    ns: Vec<usize>,
    errors: Vec<f64>,
    norm_kind: NormKind,
    scale: f64,
}

impl ErrorCurve {
    pub fn new(
        t: f64,
        ns: Vec<usize>,
        errors: Vec<f64>,
        norm_kind: NormKind,
        scale: f64,
    ) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidTime(t));
        }
        if ns.len() != errors.len() {
            return Err(Error::CurveLengthMismatch {
                ns: ns.len(),
                errors: errors.len(),
            });
        }
        if ns.is_empty() {
            return Err(Error::CurveLengthMismatch { ns: 0, errors: 0 });
        }
        if ns[0] == 0 || !ns.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidLadder);
        }
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidErrorValue);
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidScale);
        }
        Ok(Self {
            t,
            ns,
            errors,
            norm_kind,
            scale,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn ns(&self) -> &[usize] {
        &self.ns
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn floor(&self) -> f64 {
        ACCURACY_FLOOR_FACTOR * self.scale
    }
}

/// Run the iteration ladder and measure errors against `reference.evolve(t, u0)`.
pub fn error_curve(
    scheme: &ChernoffScheme,
    reference: &dyn EvolutionOracle,
    t: f64,
    ns: &[usize],
    u0: &GridFunction,
    norm_kind: NormKind,
) -> Result<ErrorCurve> {
    let target = reference.evolve(t, u0)?;
    let scale = measure(&target, norm_kind).max(measure(u0, norm_kind));
    if scale == 0.0 {
        return Err(Error::ZeroNormTrial);
    }
    let mut errors = Vec::with_capacity(ns.len());
    for &n in ns {
        let approx = chernoff_iterate(scheme, t, n, u0)?;
        errors.push(measure(&approx.try_sub(&target)?, norm_kind));
    }
    ErrorCurve::new(t, ns.to_vec(), errors, norm_kind, scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    /// Order compatible with the generic 1/n Chernoff bound.
    Standard,
    /// Distinctly faster than 1/n on this ladder.
    Fast,
    /// Fit so steep, with the roundoff floor reached, that the data cannot
    /// distinguish the decay from faster-than-any-power.
    SuperfastCandidate,
    /// Too few above-floor points to fit anything.
    FloorLimited,
}

impl fmt::Display for RateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateClass::Standard => write!(f, "standard"),
            RateClass::Fast => write!(f, "fast"),
            RateClass::SuperfastCandidate => write!(f, "superfast-candidate"),
            RateClass::FloorLimited => write!(f, "floor-limited"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub curve: ErrorCurve,
    /// Least-squares slope of log(error) against log(n), sign-flipped so
    /// larger is faster; None when fewer than MIN_FIT_POINTS sit above floor.
    pub fitted_order: Option<f64>,
    /// R^2 of that fit, clamped to [0, 1].
    pub fit_quality: Option<f64>,
    pub floor: f64,
    pub floor_reached: bool,
    pub classification: RateClass,
}

fn fit_points(curve: &ErrorCurve) -> Vec<(f64, f64)> {
    let floor = curve.floor();
    curve
        .ns()
        .iter()
        .zip(curve.errors())
        .filter(|(_, &e)| e > floor)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect()
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let pred = my + slope * (p.0 - mx);
            (p.1 - pred) * (p.1 - pred)
        })
        .sum();
    // SS_tot ~ 0 means the data is constant; the flat fit is then exact
    let quality = if ss_tot <= 1e-30 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, quality)
}

/// Fit an order to the above-floor part of the curve and classify it.
pub fn fit_order(curve: &ErrorCurve) -> RateReport {
    let floor = curve.floor();
    let floor_reached = curve.errors().iter().any(|&e| e <= floor);
    let pts = fit_points(curve);
    let (fitted_order, fit_quality) = if pts.len() >= MIN_FIT_POINTS {
        let (slope, quality) = least_squares(&pts);
        (Some(-slope), Some(quality))
    } else {
        (None, None)
    };
    let mut report = RateReport {
        curve: curve.clone(),
        fitted_order,
        fit_quality,
        floor,
        floor_reached,
        classification: RateClass::FloorLimited,
    };
    report.classification = classify_rate(&report);
    report
}

/// Classification thresholds. The catch-all is Standard: an order fit near 1
/// (or below, from preasymptotic ladders) is what the generic bound predicts.
pub fn classify_rate(report: &RateReport) -> RateClass {
    match report.fitted_order {
        None => RateClass::FloorLimited,
        Some(order) => {
            if order > 3.0 && report.floor_reached {
                RateClass::SuperfastCandidate
            } else if order > 1.15 {
                RateClass::Fast
            } else {
                RateClass::Standard
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceVerdict {
    ConsistentWithMembership,
    NotConsistent,
    Inconclusive,
}

impl fmt::Display for SubspaceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubspaceVerdict::ConsistentWithMembership => write!(f, "consistent-with-membership"),
            SubspaceVerdict::NotConsistent => write!(f, "not-consistent"),
            SubspaceVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceReport {
    /// error / comparison at each ladder point, None where either side is
    /// at/below the error floor.
    pub ratios: Vec<Option<f64>>,
    pub verdict: SubspaceVerdict,
    pub note: &'static str,
}

/// Ratio test: if u0 lies in the subspace where convergence beats the
/// comparison sequence a_n, then E_n / a_n should fall toward zero along the
/// ladder. The converse direction is NOT valid, hence the fixed note.
pub fn subspace_test(curve: &ErrorCurve, comparison: &[f64]) -> Result<SubspaceReport> {
    if comparison.len() != curve.ns().len() {
        return Err(Error::CurveLengthMismatch {
            ns: curve.ns().len(),
            errors: comparison.len(),
        });
    }
    if comparison.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(Error::NonPositiveComparison);
    }
    let floor = curve.floor();
    let ratios: Vec<Option<f64>> = curve
        .errors()
        .iter()
        .zip(comparison)
        .map(|(&e, &a)| if e > floor { Some(e / a) } else { None })
        .collect();
    let usable: Vec<f64> = ratios.iter().flatten().copied().collect();
    let verdict = if usable.len() < MIN_FIT_POINTS {
        SubspaceVerdict::Inconclusive
    } else {
        let first = usable[0];
        let last = usable[usable.len() - 1];
        let tail = &usable[usable.len() - 3..];
        let tail_nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        if last <= 0.5 * first && tail_nonincreasing {
            SubspaceVerdict::ConsistentWithMembership
        } else {
            SubspaceVerdict::NotConsistent
        }
    };
    Ok(SubspaceReport {
        ratios,
        verdict,
        note: "empirical evidence only; finite ladders cannot certify subspace membership",
    })
}

/// CSV rendering of an error curve, full double precision.
pub fn rate_csv(curve: &ErrorCurve) -> String {
    let mut out = String::from("n,error\n");
    for (&n, &e) in curve.ns().iter().zip(curve.errors()) {
        out.push_str(&format!("{n},{e:.17e}\n"));
    }
    out
}

/// JSON summary of a rate report.
pub fn report_json(report: &RateReport) -> serde_json::Value {
    json!({
        "t": report.curve.t(),
        "norm": report.curve.norm_kind().to_string(),
        "ns": report.curve.ns(),
        "errors": report.curve.errors(),
        "scale": report.curve.scale(),
        "floor": report.floor,
        "floor_reached": report.floor_reached,
        "order": report.fitted_order,
        "quality": report.fit_quality,
        "classification": report.classification.to_string(),
    })
}
