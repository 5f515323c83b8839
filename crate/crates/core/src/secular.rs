//! The secular function
//!
//! ```text
//! h(t) = Σᵢ c̃ᵢ² / (σt + αᵢ)² − t^{2/(p−2)}
//! ```
//!
//! whose roots `t = ‖x‖^{p−2}` generate every stationary point of the
//! regularized model through `xᵢ = −c̃ᵢ / (σt + αᵢ)`, together with the
//! log-transformed surrogate `p(t) = ln φ(t) − (2/(p−2)) ln t`
//! (`φ` being the sum above). `h` is strictly decreasing to the right of
//! the smallest pole and `p` is strictly convex between the two smallest
//! poles, which is what the two root finders below rely on.

use nalgebra::DVector;

use crate::error::{PrsError, Result};
use crate::spectra::Spectrum;
use crate::tolerances::Tolerances;

const MAX_ITER: usize = 500;

/// Secular data in the eigen frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularContext {
    pub alphas: DVector<f64>,
    pub c_rot: DVector<f64>,
    pub sigma: f64,
    pub p_exp: f64,
    /// Coefficients with `|c̃ᵢ|` at or below this count as zero.
    pub coeff_cut: f64,
    root_tol: f64,
}

/// A root of `h` together with `h′` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRoot {
    pub t: f64,
    pub h_prime: f64,
}

impl SecularRoot {
    pub fn h_prime_sign(&self) -> f64 {
        if self.h_prime == 0.0 {
            0.0
        } else {
            self.h_prime.signum()
        }
    }
}

impl SecularContext {
    pub fn new(alphas: DVector<f64>, c_rot: DVector<f64>, sigma: f64, p_exp: f64) -> Result<Self> {
        Self::with_tolerances(alphas, c_rot, sigma, p_exp, &Tolerances::default())
    }

    pub fn with_tolerances(
        alphas: DVector<f64>,
        c_rot: DVector<f64>,
        sigma: f64,
        p_exp: f64,
        tol: &Tolerances,
    ) -> Result<Self> {
        if alphas.len() != c_rot.len() {
            return Err(PrsError::DimensionMismatch {
                expected: alphas.len(),
                got: c_rot.len(),
            });
        }
        if alphas.is_empty() || !(sigma > 0.0) || !(p_exp > 2.0) {
            return Err(PrsError::InvalidInstance(
                "secular context needs n ≥ 1, sigma > 0, p > 2".into(),
            ));
        }
        let coeff_cut = tol.coeff * c_rot.norm();
        Ok(Self {
            alphas,
            c_rot,
            sigma,
            p_exp,
            coeff_cut,
            root_tol: tol.root,
        })
    }

    pub fn from_spectrum(spec: &Spectrum, tol: &Tolerances) -> Self {
        Self {
            alphas: spec.alphas.clone(),
            c_rot: spec.c_rot.clone(),
            sigma: spec.sigma,
            p_exp: spec.p,
            coeff_cut: tol.coeff * spec.c_rot.norm(),
            root_tol: tol.root,
        }
    }

    /// Same context with the first `k` coefficients set to zero (the
    /// reduced secular function used when `c` is orthogonal to the
    /// leading eigenspace).
    pub fn without_leading(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.c_rot.rows_mut(0, k).fill(0.0);
        out
    }

    /// `2/(p−2)`.
    pub fn exponent(&self) -> f64 {
        2.0 / (self.p_exp - 2.0)
    }

    /// `t^{2/(p−2)}` for `t ≥ 0`.
    pub fn t_power(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else if self.p_exp == 4.0 {
            t
        } else if self.p_exp == 3.0 {
            t * t
        } else {
            (self.exponent() * t.ln()).exp()
        }
    }

    fn active(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let cut = self.coeff_cut;
        self.alphas
            .iter()
            .zip(self.c_rot.iter())
            .filter(move |(_, c)| c.abs() > cut)
            .map(|(&a, &c)| (a, c))
    }

    /// `φ(t) = Σ c̃ᵢ²/(σt+αᵢ)²` and its first two derivatives.
    fn phi(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (mut f, mut df, mut d2f) = (0.0, 0.0, 0.0);
        for (a, c) in self.active() {
            let d = self.sigma * t + a;
            if d == 0.0 {
                return Err(PrsError::PoleHit { t });
            }
            let c2 = c * c;
            let inv = 1.0 / d;
            let inv2 = inv * inv;
            f += c2 * inv2;
            df -= 2.0 * self.sigma * c2 * inv2 * inv;
            d2f += 6.0 * self.sigma * self.sigma * c2 * inv2 * inv2;
        }
        Ok((f, df, d2f))
    }

    pub fn eval_h(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(PrsError::NegativeT { t });
        }
        let (f, _, _) = self.phi(t)?;
        Ok(f - self.t_power(t))
    }

    pub fn eval_h_prime(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(PrsError::NegativeT { t });
        }
        let q = self.exponent();
        let power_term = if t == 0.0 {
            if self.p_exp > 4.0 {
                return Err(PrsError::ZeroT);
            } else if self.p_exp == 4.0 {
                q
            } else {
                0.0
            }
        } else if self.p_exp == 4.0 {
            q
        } else {
            q * ((q - 1.0) * t.ln()).exp()
        };
        let (_, df, _) = self.phi(t)?;
        Ok(df - power_term)
    }

    /// `p(t) = ln φ(t) − (2/(p−2)) ln t`, defined for `t > 0`.
    pub fn eval_log_surrogate(&self, t: f64) -> Result<f64> {
        let (f, _, _) = self.phi(t)?;
        Ok(f.ln() - self.exponent() * t.ln())
    }

    /// `p′(t)` and `p″(t)`.
    pub fn eval_log_surrogate_derivs(&self, t: f64) -> Result<(f64, f64)> {
        let (f, df, d2f) = self.phi(t)?;
        let q = self.exponent();
        let r = df / f;
        Ok((r - q / t, d2f / f - r * r + q / (t * t)))
    }

    fn accepted(&self, t: f64, h: f64) -> bool {
        h.abs() <= self.root_tol * (1.0 + t)
    }

    /// The unique root of `h` on `(max{−α₁/σ, 0}, ∞)`.
    ///
    /// Fails with [`PrsError::NoRoot`] when `h` is not positive just right of
    /// the left end, which is the hard case and must be handled by the
    /// caller.
    pub fn global_root(&self) -> Result<f64> {
        let alpha_min = self.alphas.iter().copied().fold(f64::INFINITY, f64::min);
        let left = (-alpha_min / self.sigma).max(0.0);

        // h at the left end is either a pole (+∞) or finite.
        let pole_at_left = self
            .active()
            .any(|(a, _)| self.sigma * left + a == 0.0);
        if !pole_at_left {
            let h_left = self.eval_h(left)?;
            if !(h_left > 0.0) {
                return Err(PrsError::NoRoot);
            }
        }

        let mut lo = left;
        let mut hi = if left > 0.0 { 2.0 * left } else { 1.0 };
        let mut h_hi = self.eval_h(hi)?;
        let mut grow = 0;
        while h_hi >= 0.0 {
            if self.accepted(hi, h_hi) {
                return Ok(hi);
            }
            lo = hi;
            hi *= 2.0;
            h_hi = self.eval_h(hi)?;
            grow += 1;
            if grow > 2000 || !hi.is_finite() {
                return Err(PrsError::NoRoot);
            }
        }
        self.bracketed_root(lo, hi, true)
    }

    /// Safeguarded Newton on `h` inside `(lo, hi)` where `h` changes sign;
    /// `decreasing` says whether `h(lo) > 0 > h(hi)` or the reverse.
    fn bracketed_root(&self, mut lo: f64, mut hi: f64, decreasing: bool) -> Result<f64> {
        let mut t = 0.5 * (lo + hi);
        let mut step_old = hi - lo;
        let mut best = (f64::INFINITY, t);
        for _ in 0..MAX_ITER {
            let h = self.eval_h(t)?;
            if h.abs() < best.0 {
                best = (h.abs(), t);
            }
            if self.accepted(t, h) {
                return Ok(t);
            }
            if (h > 0.0) == decreasing {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            let dh = self.eval_h_prime(t)?;
            let newton = t - h / dh;
            // bisect when Newton leaves the bracket or stalls
            let next = if dh != 0.0
                && newton > lo
                && newton < hi
                && (2.0 * h).abs() <= (step_old * dh).abs()
            {
                newton
            } else {
                0.5 * (lo + hi)
            };
            step_old = (next - t).abs();
            if next == t {
                break;
            }
            t = next;
        }
        Ok(best.1)
    }

    /// Roots of `h` on `(max{−α₂/σ, 0}, −α₁/σ)` with the sign of `h′` at each.
    ///
    /// Requires a simple smallest eigenvalue `α₁ < 0` with `c̃₁ ≠ 0`; returns an
    /// empty list otherwise, or when the interval is empty.
    pub fn local_roots(&self) -> Result<Vec<SecularRoot>> {
        let n = self.alphas.len();
        let a1 = self.alphas[0];
        if a1 >= 0.0 || self.c_rot[0].abs() <= self.coeff_cut {
            return Ok(Vec::new());
        }
        if n > 1 && self.alphas[1] <= a1 {
            return Ok(Vec::new());
        }
        let right = -a1 / self.sigma;
        let left = if n > 1 {
            (-self.alphas[1] / self.sigma).max(0.0)
        } else {
            0.0
        };
        let eps = 1e-12 * right.max(1.0);
        let (a, b) = (left + eps, right - eps);
        if a >= b {
            return Ok(Vec::new());
        }

        let t_min = self.minimize_surrogate(a, b)?;
        let p_min = self.eval_log_surrogate(t_min)?;
        let mut roots = Vec::new();
        if p_min > 0.0 {
            return Ok(roots);
        }
        if p_min == 0.0 {
            roots.push(self.root_at(t_min)?);
            return Ok(roots);
        }
        if self.eval_log_surrogate(a)? > 0.0 {
            let t = self.bracketed_root(a, t_min, true)?;
            roots.push(self.root_at(t)?);
        }
        if self.eval_log_surrogate(b)? > 0.0 {
            let t = self.bracketed_root(t_min, b, false)?;
            roots.push(self.root_at(t)?);
        }
        Ok(roots)
    }

    fn root_at(&self, t: f64) -> Result<SecularRoot> {
        Ok(SecularRoot {
            t,
            h_prime: self.eval_h_prime(t)?,
        })
    }

    /// Minimizer of the strictly convex `p` on `[a, b]`: golden section,
    /// then Newton on `p′` inside the final bracket.
    fn minimize_surrogate(&self, mut a: f64, mut b: f64) -> Result<f64> {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = self.eval_log_surrogate(x1)?;
        let mut f2 = self.eval_log_surrogate(x2)?;
        for _ in 0..200 {
            if b - a <= 1e-9 * b.abs().max(1e-300) {
                break;
            }
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = self.eval_log_surrogate(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = self.eval_log_surrogate(x2)?;
            }
        }
        // p′ is increasing; polish its zero by bracketed Newton.
        let (mut lo, mut hi) = (a, b);
        let mut t = if f1 < f2 { x1 } else { x2 };
        for _ in 0..100 {
            let (d1, d2) = self.eval_log_surrogate_derivs(t)?;
            if d1 == 0.0 {
                return Ok(t);
            }
            if d1 > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = if d2 > 0.0 { t - d1 / d2 } else { f64::NAN };
            let next = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 2.0 * f64::EPSILON * t.abs() {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(alphas: &[f64], c: &[f64], sigma: f64, p: f64) -> SecularContext {
        SecularContext::new(
            DVector::from_column_slice(alphas),
            DVector::from_column_slice(c),
            sigma,
            p,
        )
        .unwrap()
    }

    #[test]
    fn h_direct_arithmetic() {
        let s = ctx(&[-1.0], &[1.0], 1.0, 4.0);
        assert_eq!(s.eval_h(2.0).unwrap(), -1.0);
        assert_eq!(s.eval_h_prime(2.0).unwrap(), -3.0);
    }

    #[test]
    fn zero_gradient_gives_negative_power() {
        let s = ctx(&[1.0, -2.0], &[0.0, 0.0], 1.0, 4.0);
        assert_eq!(s.eval_h(5.0).unwrap(), -5.0);
        assert_eq!(s.eval_h_prime(5.0).unwrap(), -1.0);
        let s3 = ctx(&[1.0], &[0.0], 2.0, 5.5);
        let t: f64 = 1.7;
        let expected = -t.powf(2.0 / 3.5);
        assert!((s3.eval_h(t).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn error_paths() {
        let s = ctx(&[-1.0], &[1.0], 1.0, 4.0);
        assert!(matches!(s.eval_h(1.0), Err(PrsError::PoleHit { .. })));
        assert!(matches!(s.eval_h(-0.5), Err(PrsError::NegativeT { .. })));
        let s6 = ctx(&[1.0], &[1.0], 1.0, 6.0);
        assert!(matches!(s6.eval_h_prime(0.0), Err(PrsError::ZeroT)));
        // zero coefficient at the pole contributes nothing
        let z = ctx(&[-1.0, 2.0], &[0.0, 1.0], 1.0, 4.0);
        assert!(z.eval_h(1.0).is_ok());
    }

    #[test]
    fn global_root_closed_forms() {
        // t(t+1)² = 4 → t = 1
        let s = ctx(&[1.0], &[2.0], 1.0, 4.0);
        assert!((s.global_root().unwrap() - 1.0).abs() < 1e-12);
        // 1/(2t)² = t → t = 4^{-1/3}
        let s = ctx(&[0.0, 1.0], &[1.0, 0.0], 2.0, 4.0);
        let expected = 0.25f64.powf(1.0 / 3.0);
        assert!((s.global_root().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn global_root_reports_hard_case() {
        let s = ctx(&[1.0], &[0.0], 1.0, 4.0);
        assert_eq!(s.global_root(), Err(PrsError::NoRoot));
        let s = ctx(&[-1.0, -1.0, 1.0], &[0.0, 0.0, 0.0], 1.0, 4.0);
        assert_eq!(s.global_root(), Err(PrsError::NoRoot));
    }

    #[test]
    fn local_roots_guards() {
        // c̃₁ = 0
        let s = ctx(&[-1.0, 1.0], &[0.0, 1.0], 1.0, 3.0);
        assert!(s.local_roots().unwrap().is_empty());
        // α₁ ≥ 0
        let s = ctx(&[0.5, 1.0], &[1.0, 1.0], 1.0, 3.0);
        assert!(s.local_roots().unwrap().is_empty());
        // repeated α₁
        let s = ctx(&[-1.0, -1.0], &[1.0, 1.0], 1.0, 3.0);
        assert!(s.local_roots().unwrap().is_empty());
        // degenerate interval: −α₂/σ ≥ −α₁/σ cannot happen with α₁ < α₂, but a
        // huge σ squeezes the interval below the clamping width
        let s = ctx(&[-1e-13, 1.0], &[1.0, 1.0], 1.0, 4.0);
        assert!(s.local_roots().unwrap().is_empty());
    }
}
