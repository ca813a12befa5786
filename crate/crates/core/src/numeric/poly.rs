use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 8;

const TRIM_RELATIVE: f64 = 1e-13;
const REAL_IMAG_TOLERANCE: f64 = 1e-8;
const DUPLICATE_TOLERANCE: f64 = 1e-9;

/// Real polynomial with coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, dropping high-order coefficients smaller than
    /// `1e-13 * max|c|`.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("polynomial coefficients must be finite".into()));
        }
        let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            return Err(Error::DegenerateAllZero);
        }
        while coeffs.last().is_some_and(|c| c.abs() < TRIM_RELATIVE * max) {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::Domain(format!(
                "polynomial degree {} exceeds {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Polynomial { coeffs })
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[f64]) -> Result<Self> {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= r * ci;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value and first derivative at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }
}

/// All real roots of `p`, ascending, with near-duplicates collapsed.
///
/// Roots are eigenvalues of the balanced companion matrix, accepted as real
/// when `|Im| <= 1e-8 (1 + |Re|)`, then polished with one Newton step.
pub fn real_roots(p: &Polynomial) -> Vec<f64> {
    let c = p.coefficients();
    let n = p.degree();
    let mut roots = match n {
        0 => Vec::new(),
        1 => vec![-c[0] / c[1]],
        _ => {
            let lead = c[n];
            let mut companion = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                companion[(0, j)] = -c[n - 1 - j] / lead;
            }
            for i in 1..n {
                companion[(i, i - 1)] = 1.0;
            }
            balance(&mut companion);
            companion
                .complex_eigenvalues()
                .iter()
                .filter(|z| z.im.abs() <= REAL_IMAG_TOLERANCE * (1.0 + z.re.abs()))
                .map(|z| z.re)
                .collect()
        }
    };

    for r in roots.iter_mut() {
        let (v, dv) = p.eval_with_derivative(*r);
        if dv != 0.0 {
            let polished = *r - v / dv;
            if polished.is_finite() && p.eval(polished).abs() <= v.abs() {
                *r = polished;
            }
        }
    }

    roots.retain(|r| r.is_finite());
    roots.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&last) if r - last <= DUPLICATE_TOLERANCE => {}
            _ => out.push(r),
        }
    }
    out
}

/// Parlett–Reinsch balancing by powers of two; similarity-preserving.
fn balance(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}
