//! Second-order operators `Lf = a f'' + b f' + c f` with periodic
//! coefficients, their dense matrix form, and reference semigroups used as
//! oracles: a Fourier multiplier family for constant coefficients and a dense
//! matrix exponential for variable ones.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense paths refuse anything bigger than this.
pub const MAX_DENSE_POINTS: usize = 1024;

const REAL_SLACK: f64 = 1e-12;

fn require_real(f: &GridFunction, name: &'static str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(f.samples().len());
    for (index, s) in f.samples().iter().enumerate() {
        if s.im.abs() > REAL_SLACK * (1.0 + s.re.abs()) {
            return Err(Error::ComplexCoefficient {
                name,
                index,
                im: s.im,
            });
        }
        out.push(s.re);
    }
    Ok(out)
}

/// Real coefficient triple (a, b, c) on a shared grid. Construction does not
/// restrict the sign of `a`; parabolic schemes check `a >= 0` themselves, so
/// the type also serves operators like `-d^2/dx^2 + V` used as oracles.
#[derive(Debug, Clone)]
pub struct OperatorCoefficients {
    grid: SpatialGrid,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl OperatorCoefficients {
    pub fn new(a: &GridFunction, b: &GridFunction, c: &GridFunction) -> Result<Self> {
        if a.grid() != b.grid() || a.grid() != c.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: a.grid(),
            a: require_real(a, "a")?,
            b: require_real(b, "b")?,
            c: require_real(c, "c")?,
        })
    }

    pub fn from_fns(
        grid: SpatialGrid,
        a: impl Fn(f64) -> f64,
        b: impl Fn(f64) -> f64,
        c: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        Self::new(
            &GridFunction::sample_real(grid, a)?,
            &GridFunction::sample_real(grid, b)?,
            &GridFunction::sample_real(grid, c)?,
        )
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn max_reaction(&self) -> f64 {
        self.c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Errors at the first node where the diffusion coefficient is negative.
    pub fn require_nonnegative_diffusion(&self) -> Result<()> {
        for (index, &value) in self.a.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeDiffusion { index, value });
            }
        }
        Ok(())
    }
}

/// Constant symbols (a0, b0, c0) for `L = a0 d^2 + b0 d + c0`; the associated
/// multiplier on mode xi is `exp(t(-a0 xi^2 + i b0 xi + c0))`. Re(a0) >= 0
/// keeps the family bounded for t >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSymbols {
    a0: Complex64,
    b0: Complex64,
    c0: Complex64,
}

impl ConstantSymbols {
    pub fn new(a0: Complex64, b0: Complex64, c0: Complex64) -> Result<Self> {
        for z in [a0, b0, c0] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFiniteMatrix);
            }
        }
        if a0.re < 0.0 {
            return Err(Error::NegativeDiffusionSymbol(a0.re));
        }
        Ok(Self { a0, b0, c0 })
    }

    pub fn real(a0: f64, b0: f64, c0: f64) -> Result<Self> {
        Self::new(
            Complex64::new(a0, 0.0),
            Complex64::new(b0, 0.0),
            Complex64::new(c0, 0.0),
        )
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn b0(&self) -> Complex64 {
        self.b0
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn symbol(&self, xi: f64) -> Complex64 {
        -self.a0 * xi * xi + Complex64::new(0.0, 1.0) * self.b0 * xi + self.c0
    }

    /// Supremum over all real frequencies of Re(symbol); None when unbounded
    /// (Re(a0)=0 with Im(b0)!=0).
    pub fn growth_exponent(&self) -> Option<f64> {
        // Re(symbol) = -Re(a0) xi^2 - Im(b0) xi + Re(c0)
        if self.a0.re > 0.0 {
            Some(self.c0.re + self.b0.im * self.b0.im / (4.0 * self.a0.re))
        } else if self.b0.im == 0.0 {
            Some(self.c0.re)
        } else {
            None
        }
    }
}

/// Apply L with spectral derivatives, so the discrete operator agrees exactly
/// with the constant-coefficient multiplier family on the same grid.
pub fn apply_l(coeffs: &OperatorCoefficients, f: &GridFunction) -> Result<GridFunction> {
    if coeffs.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let modes = f.dft();
    let xi = f.grid().wavenumbers();
    let i = Complex64::new(0.0, 1.0);
    let d1_modes: Vec<Complex64> = modes
        .iter()
        .zip(&xi)
        .map(|(m, &x)| m * i * x)
        .collect();
    let d2_modes: Vec<Complex64> = modes
        .iter()
        .zip(&xi)
        .map(|(m, &x)| -m * x * x)
        .collect();
    let d1 = GridFunction::idft(f.grid(), &d1_modes)?;
    let d2 = GridFunction::idft(f.grid(), &d2_modes)?;
    let samples: Vec<Complex64> = (0..f.grid().n_points())
        .map(|j| {
            coeffs.a[j] * d2.samples()[j] + coeffs.b[j] * d1.samples()[j]
                + coeffs.c[j] * f.samples()[j]
        })
        .collect();
    GridFunction::new(f.grid(), samples)
}

/// Dense N x N matrix of L: column j is L applied to the j-th basis vector.
pub fn build_matrix(coeffs: &OperatorCoefficients) -> Result<DMatrix<Complex64>> {
    let n = coeffs.grid().n_points();
    if n > MAX_DENSE_POINTS {
        return Err(Error::MatrixTooLarge {
            got: n,
            max: MAX_DENSE_POINTS,
        });
    }
    let mut m = DMatrix::zeros(n, n);
    let mut basis = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        basis[j] = Complex64::new(1.0, 0.0);
        let e = GridFunction::new(coeffs.grid(), basis.clone())?;
        let col = apply_l(coeffs, &e)?;
        for (i, v) in col.samples().iter().enumerate() {
            m[(i, j)] = *v;
        }
        basis[j] = Complex64::new(0.0, 0.0);
    }
    Ok(m)
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// exp(M) by scaling-and-squaring with a truncated Taylor series: scale M
/// down to 1-norm <= 0.25, sum the series to machine precision, square back.
pub fn matrix_exponential(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonFiniteMatrix);
    }
    if m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFiniteMatrix);
    }
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.map(|v| v / 2.0f64.powi(squarings as i32));

    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    // ||scaled|| <= 1/4, so terms shrink at least as 4^-k / k!; 40 terms is
    // far past double precision
    for k in 1..=40u32 {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        result += &term;
        if one_norm(&term) <= f64::EPSILON * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

fn to_vector(f: &GridFunction) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(f.samples())
}

fn from_vector(grid: SpatialGrid, v: &nalgebra::DVector<Complex64>) -> Result<GridFunction> {
    GridFunction::new(grid, v.iter().copied().collect())
}

/// Evolve u0 by the constant-coefficient semigroup: multiply mode k by
/// `exp(t * symbol(xi_k))`.
pub fn multiplier_semigroup(
    sym: &ConstantSymbols,
    t: f64,
    u0: &GridFunction,
) -> Result<GridFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let mut modes = u0.dft();
    for (m, &xi) in modes.iter_mut().zip(&u0.grid().wavenumbers()) {
        *m *= (sym.symbol(xi) * t).exp();
    }
    GridFunction::idft(u0.grid(), &modes)
}

/// Evolve u0 by exp(t L) with L in dense form. `prefactor` scales the
/// generator, so `prefactor = -i` yields Schrodinger groups exp(-i t L).
pub fn oracle_evolve_prefactored(
    coeffs: &OperatorCoefficients,
    prefactor: Complex64,
    t: f64,
    u0: &GridFunction,
) -> Result<GridFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if coeffs.grid() != u0.grid() {
        return Err(Error::GridMismatch);
    }
    let m = build_matrix(coeffs)?;
    let e = matrix_exponential(&m.map(|v| v * prefactor * t))?;
    from_vector(u0.grid(), &(&e * to_vector(u0)))
}

pub fn oracle_evolve(coeffs: &OperatorCoefficients, t: f64, u0: &GridFunction) -> Result<GridFunction> {
    oracle_evolve_prefactored(coeffs, Complex64::new(1.0, 0.0), t, u0)
}

/// A reference evolution `u0 -> exp(tL) u0` that convergence studies compare
/// against.
pub trait EvolutionOracle {
    fn evolve(&self, t: f64, u0: &GridFunction) -> Result<GridFunction>;
}

impl<F> EvolutionOracle for F
where
    F: Fn(f64, &GridFunction) -> Result<GridFunction>,
{
    fn evolve(&self, t: f64, u0: &GridFunction) -> Result<GridFunction> {
        self(t, u0)
    }
}

/// Constant-coefficient oracle backed by the multiplier family.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierOracle(pub ConstantSymbols);

impl EvolutionOracle for MultiplierOracle {
    fn evolve(&self, t: f64, u0: &GridFunction) -> Result<GridFunction> {
        multiplier_semigroup(&self.0, t, u0)
    }
}

/// Variable-coefficient oracle backed by the dense matrix exponential. The
/// matrix is built once at construction.
pub struct DenseOracle {
    grid: SpatialGrid,
    matrix: DMatrix<Complex64>,
    prefactor: Complex64,
}

impl DenseOracle {
    pub fn new(coeffs: &OperatorCoefficients, prefactor: Complex64) -> Result<Self> {
        Ok(Self {
            grid: coeffs.grid(),
            matrix: build_matrix(coeffs)?,
            prefactor,
        })
    }
}

impl EvolutionOracle for DenseOracle {
    fn evolve(&self, t: f64, u0: &GridFunction) -> Result<GridFunction> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime(t));
        }
        if self.grid != u0.grid() {
            return Err(Error::GridMismatch);
        }
        let e = matrix_exponential(&self.matrix.map(|v| v * self.prefactor * t))?;
        from_vector(self.grid, &(&e * to_vector(u0)))
    }
}
