//! Gauss quadrature rules via Golub-Welsch: eigenvalues of the symmetric
//! tridiagonal Jacobi matrix are the nodes, squared first eigenvector
//! components scaled by the weight-function mass are the weights.

use crate::error::{Error, Result};

/// Implicit-QL eigensolve of a symmetric tridiagonal matrix, accumulating
/// only the first component of each eigenvector. `d` is the diagonal, `e`
/// the subdiagonal (length n-1). Returns (eigenvalue, first component) pairs
/// sorted by eigenvalue.
fn tridiagonal_eigen_first_components(mut d: Vec<f64>, mut e: Vec<f64>) -> Vec<(f64, f64)> {
    let n = d.len();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            // tridiagonal QL converges in a handful of sweeps; 50 is a hard
            // safety stop that in practice is never reached
            assert!(iter <= 50, "tridiagonal QL did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn golub_welsch(diag: Vec<f64>, off: Vec<f64>, mass: f64) -> (Vec<f64>, Vec<f64>) {
    let pairs = tridiagonal_eigen_first_components(diag, off);
    let nodes = pairs.iter().map(|p| p.0).collect();
    let weights = pairs.iter().map(|p| mass * p.1 * p.1).collect();
    (nodes, weights)
}

/// n-point Gauss-Legendre rule on [-1, 1]; weights sum to 2.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::EmptyQuadrature);
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    Ok(golub_welsch(diag, off, 2.0))
}

/// n-point rule exact for polynomials against the standard normal weight
/// (probabilists' Gauss-Hermite); weights sum to 1.
pub fn gauss_hermite_normal(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::EmptyQuadrature);
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    Ok(golub_welsch(diag, off, 1.0))
}
