//! Uniform periodic grids, sampled functions, and band-limited interpolation.
//!
//! The forward transform carries the 1/N factor, so `dft` returns honest
//! Fourier-series coefficients and `idft` reconstructs without rescaling.
//! Mode `j` of the transform is the signed wavenumber `j` for `j <= (N-1)/2`
//! and `j - N` above that.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::TAU;
use std::fmt::Write as _;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], forward: bool) {
    let fft = PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if forward {
            planner.plan_fft_forward(buf.len())
        } else {
            planner.plan_fft_inverse(buf.len())
        }
    });
    fft.process(buf);
}

/// Uniform grid on `[x0, x0 + period)` with nodes `x_j = x0 + j * period / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x0: f64,
    period: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x0: f64, period: f64, n_points: usize) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::InvalidOrigin(x0));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidPeriod(period));
        }
        if n_points < 4 {
            return Err(Error::TooFewPoints(n_points));
        }
        Ok(Self {
            x0,
            period,
            n_points,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.x0 + self.period * (j as f64) / (self.n_points as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Signed integer mode for transform index `j`.
    pub fn mode_number(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= (n - 1) / 2 {
            j
        } else {
            j - n
        }
    }

    /// Angular wavenumbers `2 pi k / period` in transform order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let scale = TAU / self.period;
        (0..self.n_points)
            .map(|j| scale * self.mode_number(j) as f64)
            .collect()
    }
}

/// Complex samples of a function at the grid nodes. Finiteness is checked at
/// every construction boundary, so a value of this type always holds finite data.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: SpatialGrid,
    samples: Vec<Complex64>,
}

fn check_finite(samples: &[Complex64]) -> Result<()> {
    for (index, s) in samples.iter().enumerate() {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
    }
    Ok(())
}

impl GridFunction {
    pub fn new(grid: SpatialGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::SampleCountMismatch {
                expected: grid.n_points(),
                got: samples.len(),
            });
        }
        check_finite(&samples)?;
        Ok(Self { grid, samples })
    }

    /// Sample a pointwise rule at the grid nodes.
    pub fn sample(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn sample_real(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::sample(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zero(grid: SpatialGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Forward transform with the 1/N factor: coefficient of mode k is
    /// `(1/N) sum_j samples[j] exp(-2 pi i k j / N)`.
    pub fn dft(&self) -> Vec<Complex64> {
        let n = self.samples.len();
        let mut buf = self.samples.clone();
        fft_in_place(&mut buf, true);
        let scale = 1.0 / n as f64;
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    /// Inverse of [`dft`](Self::dft); `idft(grid, f.dft())` reproduces `f`
    /// to roundoff.
    pub fn idft(grid: SpatialGrid, modes: &[Complex64]) -> Result<Self> {
        if modes.len() != grid.n_points() {
            return Err(Error::SampleCountMismatch {
                expected: grid.n_points(),
                got: modes.len(),
            });
        }
        check_finite(modes)?;
        let mut buf = modes.to_vec();
        fft_in_place(&mut buf, false);
        Self::new(grid, buf)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Discrete L2 norm: sqrt(mean |samples|^2 * period).
    pub fn l2_norm(&self) -> f64 {
        let mean: f64 =
            self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64;
        (mean * self.grid.period()).sqrt()
    }

    /// Evaluate the band-limited interpolant at one point. For many targets
    /// build a [`TrigInterpolant`] once.
    pub fn eval_interpolant(&self, x: f64) -> Result<Complex64> {
        let interp = TrigInterpolant::new(self);
        interp.eval(x)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * factor).collect(),
        }
    }

    /// Pointwise product with another function on the same grid.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// CSV serialization: header `x,re,im`, one row per node, 18 significant
    /// digits so values round-trip exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * self.samples.len() + 16);
        out.push_str("x,re,im\n");
        for (j, s) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", self.grid.node(j), s.re, s.im);
        }
        out
    }
}

/// Discrete inner product `(period / N) sum_j conj(f_j) g_j`, compatible with
/// [`GridFunction::l2_norm`].
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let weight = f.grid().period() / f.grid().n_points() as f64;
    Ok(f.samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        * weight)
}

/// Trigonometric interpolant of a grid function, evaluated by direct
/// summation of the Fourier series: O(N) per target.
pub struct TrigInterpolant {
    grid: SpatialGrid,
    modes: Vec<Complex64>,
    xi: Vec<f64>,
}

impl TrigInterpolant {
    pub fn new(f: &GridFunction) -> Self {
        Self {
            grid: f.grid(),
            modes: f.dft(),
            xi: f.grid().wavenumbers(),
        }
    }

    /// Self-reported periodic evaluation: the target is wrapped into one
    /// period before phases are formed, so `eval(x + period) == eval(x)`.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteTarget);
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> Complex64 {
        let u = (x - self.grid.x0()).rem_euclid(self.grid.period());
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, &xi) in self.modes.iter().zip(&self.xi) {
            let (s, cos) = (xi * u).sin_cos();
            acc += c * Complex64::new(cos, s);
        }
        acc
    }

    /// Evaluate at many targets. Splits the target list across the configured
    /// thread count; per-target summation order is fixed, so the result is
    /// bit-identical for any thread count.
    pub fn eval_many(&self, targets: &[f64]) -> Result<Vec<Complex64>> {
        for &x in targets {
            if !x.is_finite() {
                return Err(Error::NonFiniteTarget);
            }
        }
        let workers = crate::threads().min(targets.len().max(1));
        if workers <= 1 || targets.len() < 2 * workers {
            return Ok(targets.iter().map(|&x| self.eval_unchecked(x)).collect());
        }
        let chunk = targets.len().div_ceil(workers);
        let mut out = vec![Complex64::new(0.0, 0.0); targets.len()];
        std::thread::scope(|scope| {
            for (ts, os) in targets.chunks(chunk).zip(out.chunks_mut(chunk)) {
                scope.spawn(move || {
                    for (o, &x) in os.iter_mut().zip(ts) {
                        *o = self.eval_unchecked(x);
                    }
                });
            }
        });
        Ok(out)
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_grid(n: usize) -> SpatialGrid {
        SpatialGrid::new(0.0, TAU, n).unwrap()
    }

    #[test]
    fn grid_construction_validates() {
        assert!(matches!(
            SpatialGrid::new(0.0, -1.0, 8),
            Err(Error::InvalidPeriod(_))
        ));
        assert!(matches!(
            SpatialGrid::new(0.0, 0.0, 8),
            Err(Error::InvalidPeriod(_))
        ));
        assert!(matches!(
            SpatialGrid::new(0.0, f64::INFINITY, 8),
            Err(Error::InvalidPeriod(_))
        ));
        assert!(matches!(
            SpatialGrid::new(0.0, 1.0, 3),
            Err(Error::TooFewPoints(3))
        ));
        assert!(matches!(
            SpatialGrid::new(f64::NAN, 1.0, 8),
            Err(Error::InvalidOrigin(_))
        ));
        let g = SpatialGrid::new(-1.0, 4.0, 8).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.node(0), -1.0);
        assert_eq!(g.node(4), 1.0);
    }

    #[test]
    fn mode_numbers_follow_signed_layout() {
        let g = unit_grid(8);
        let ks: Vec<i64> = (0..8).map(|j| g.mode_number(j)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn samples_are_validated() {
        let g = unit_grid(8);
        assert!(matches!(
            GridFunction::new(g, vec![Complex64::new(0.0, 0.0); 7]),
            Err(Error::SampleCountMismatch { expected: 8, got: 7 })
        ));
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            GridFunction::new(g, v),
            Err(Error::NonFiniteSample { index: 3 })
        ));
    }

    #[test]
    fn dft_of_cosine_puts_half_in_each_sideband() {
        let g = unit_grid(16);
        let f = GridFunction::sample_real(g, f64::cos).unwrap();
        let modes = f.dft();
        assert_abs_diff_eq!(modes[1].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(modes[15].re, 0.5, epsilon = 1e-15);
        for (j, m) in modes.iter().enumerate() {
            if j != 1 && j != 15 {
                assert!(m.norm() <= 1e-15, "mode {j} = {m}");
            }
        }
    }

    #[test]
    fn dft_idft_round_trip() {
        let g = unit_grid(48);
        let f = GridFunction::sample(g, |x| {
            Complex64::new((3.0 * x).sin() + 0.2 * x.cos(), (2.0 * x).cos())
        })
        .unwrap();
        let back = GridFunction::idft(g, &f.dft()).unwrap();
        let err = f.try_sub(&back).unwrap().sup_norm();
        assert!(err <= 1e-12, "round trip error {err}");
    }

    #[test]
    fn l2_norm_of_ones_is_sqrt_period() {
        let g = unit_grid(32);
        let ones = GridFunction::sample_real(g, |_| 1.0).unwrap();
        assert_abs_diff_eq!(ones.l2_norm(), TAU.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(ones.sup_norm(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn interpolant_reproduces_nodes() {
        let g = unit_grid(32);
        let f = GridFunction::sample(g, |x| Complex64::new(x.sin() + (4.0 * x).cos(), x.cos()))
            .unwrap();
        let interp = TrigInterpolant::new(&f);
        for j in 0..g.n_points() {
            let v = interp.eval(g.node(j)).unwrap();
            assert!((v - f.samples()[j]).norm() <= 1e-13);
        }
    }

    #[test]
    fn interpolant_is_exact_for_low_degree_trig_polynomials() {
        let g = unit_grid(16);
        // degree 5 < N/2 = 8
        let rule = |x: f64| Complex64::new((5.0 * x).cos() - 2.0 * x.sin(), (3.0 * x).sin());
        let f = GridFunction::sample(g, rule).unwrap();
        let interp = TrigInterpolant::new(&f);
        for &x in &[0.1, 0.7, 2.31, 4.9, 6.1] {
            let v = interp.eval(x).unwrap();
            assert!((v - rule(x)).norm() <= 1e-12, "at x={x}");
        }
    }

    #[test]
    fn interpolant_is_periodic() {
        let g = unit_grid(16);
        let f = GridFunction::sample_real(g, |x| (2.0 * x).sin()).unwrap();
        let interp = TrigInterpolant::new(&f);
        for &x in &[0.3, 1.234, 5.5] {
            let a = interp.eval(x).unwrap();
            let b = interp.eval(x + TAU).unwrap();
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn interpolation_is_linear() {
        let g = unit_grid(24);
        let f = GridFunction::sample_real(g, |x| x.sin()).unwrap();
        let h = GridFunction::sample_real(g, |x| (2.0 * x).cos()).unwrap();
        let alpha = Complex64::new(0.7, -0.2);
        let combo = f.scale(alpha).try_add(&h).unwrap();
        let x = 1.37;
        let direct = TrigInterpolant::new(&combo).eval(x).unwrap();
        let split = TrigInterpolant::new(&f).eval(x).unwrap() * alpha
            + TrigInterpolant::new(&h).eval(x).unwrap();
        assert!((direct - split).norm() <= 1e-12);
    }

    #[test]
    fn eval_many_matches_eval_and_any_thread_count() {
        let g = unit_grid(32);
        let f = GridFunction::sample_real(g, |x| x.sin() + (3.0 * x).cos()).unwrap();
        let interp = TrigInterpolant::new(&f);
        let targets: Vec<f64> = (0..97).map(|i| 0.063 * i as f64).collect();
        let seq = interp.eval_many(&targets).unwrap();
        crate::set_threads(4);
        let par = interp.eval_many(&targets).unwrap();
        crate::set_threads(1);
        assert_eq!(seq, par);
        for (i, &x) in targets.iter().enumerate() {
            assert_eq!(seq[i], interp.eval(x).unwrap());
        }
    }

    #[test]
    fn non_finite_targets_are_rejected() {
        let g = unit_grid(8);
        let f = GridFunction::sample_real(g, |x| x.sin()).unwrap();
        assert!(matches!(
            f.eval_interpolant(f64::NAN),
            Err(Error::NonFiniteTarget)
        ));
        let interp = TrigInterpolant::new(&f);
        assert!(interp.eval_many(&[0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let g = SpatialGrid::new(0.0, 2.0, 4).unwrap();
        let f = GridFunction::sample(g, |x| Complex64::new(x / 3.0, -x)).unwrap();
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,re,im"));
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 3);
        // 17 digits after the point = 18 significant digits
        assert!(fields[0].contains('.'));
        assert_eq!(fields[0].split('.').nth(1).unwrap().split('e').next().unwrap().len(), 17);
        // deterministic: same input, same bytes
        assert_eq!(csv, f.to_csv());
        // row for node 1: x=0.5, re=1/6
        let row1: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
        let re: f64 = row1[1].parse().unwrap();
        assert_abs_diff_eq!(re, 0.5 / 3.0, epsilon = 1e-16);
    }

    #[test]
    fn inner_product_matches_l2_norm() {
        let g = unit_grid(16);
        let f = GridFunction::sample(g, |x| Complex64::new(x.sin(), 0.3 * x.cos())).unwrap();
        let ip = inner_product(&f, &f).unwrap();
        assert_abs_diff_eq!(ip.re, f.l2_norm().powi(2), epsilon = 1e-13);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-15);
        let ones = GridFunction::sample_real(g, |_| 1.0).unwrap();
        assert_abs_diff_eq!(inner_product(&ones, &ones).unwrap().re, TAU, epsilon = 1e-13);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let f = GridFunction::zero(unit_grid(8));
        let h = GridFunction::zero(unit_grid(16));
        assert!(matches!(f.try_add(&h), Err(Error::GridMismatch)));
        assert!(matches!(inner_product(&f, &h), Err(Error::GridMismatch)));
    }
}
