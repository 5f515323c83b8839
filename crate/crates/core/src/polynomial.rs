//! Dense real polynomials and real roots through the companion matrix.

use nalgebra::DMatrix;

/// Coefficients in increasing degree order: `c[0] + c[1] x + …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(v: f64) -> Self {
        Poly(vec![v])
    }

    /// `a + b x`.
    pub fn linear(a: f64, b: f64) -> Self {
        Poly(vec![a, b])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        let get = |p: &Poly, i: usize| p.0.get(i).copied().unwrap_or(0.0);
        Poly((0..len).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Eigenvalues of the companion matrix, as `(re, im)` pairs.
    pub fn complex_roots(&self) -> Vec<(f64, f64)> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.0[deg];
        let mut comp = DMatrix::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -self.0[i] / lead;
        }
        comp.complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect()
    }

    /// Real roots, ascending. A companion eigenvalue counts as real when its
    /// imaginary part is at most `imag_tol · (1 + |z|)`.
    pub fn real_roots(&self, imag_tol: f64) -> Vec<f64> {
        let mut roots: Vec<f64> = self
            .complex_roots()
            .into_iter()
            .filter(|&(re, im)| im.abs() <= imag_tol * (1.0 + re.hypot(im)))
            .map(|(re, _)| re)
            .collect();
        roots.sort_by(f64::total_cmp);
        roots
    }
}
