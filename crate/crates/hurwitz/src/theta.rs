//! Jacobi theta function `θ₁` and the Weierstrass functions built from it.
//!
//! Everything on the torus with periods `(1, σ)`, `Im σ > 0`, comes from the
//! odd theta function
//!
//! `θ₁(u|σ) = 2 Σ_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1)πu)`, `q = e^{iπσ}`.
//!
//! The cache precomputes the `q`-coefficients once per modulus.  Local Taylor
//! windows of `θ₁` feed the series kernel, which yields `ln θ₁` expansions
//! and from them `℘ = -∂_u² ln θ₁ + θ₁'''(0)/(3θ₁'(0))` with all derivatives,
//! Laurent data at the lattice, and exact `∂_σ` values via the heat equation
//! `∂_σ θ₁ = (1/4πi) ∂_u² θ₁`.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Minimum `Im σ` accepted by the q-series evaluator.
pub const MIN_IM_SIGMA: f64 = 0.05;

/// Points closer than this to the lattice count as poles of `℘`.
pub const POLE_TOL: f64 = 1e-10;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const I: C64 = C64::new(0.0, 1.0);

/// Precomputed `θ₁` series data for one modulus.
#[derive(Clone, Debug)]
pub struct ThetaCache {
    sigma: C64,
    /// `(2n+1, 2 (-1)^n q^{(n+1/2)^2})` through the tail bound.
    terms: Vec<(f64, C64)>,
    /// `θ₁^{(j)}(0)` for `j = 0..=9`.
    derivs0: Vec<C64>,
}

impl ThetaCache {
    pub fn new(sigma: C64) -> Result<Self> {
        if sigma.im < MIN_IM_SIGMA {
            return Err(Error::Domain(format!(
                "theta series needs Im sigma >= {MIN_IM_SIGMA}, got {}",
                sigma.im
            )));
        }
        // Margin for arguments with |Im u| up to ~1.1 Im σ: terms carry
        // q^{(n+1/2)^2} e^{(2n+1) π |Im u|}; stop when the bound drops below
        // 1e-18 of the leading term.
        let umax = 1.1 * sigma.im + 0.1;
        let t = sigma.im;
        let lead_log = -PI * t * 0.25 + PI * umax;
        let mut terms = Vec::new();
        let mut n = 0u32;
        loop {
            let m = n as f64 + 0.5;
            let bound_log = -PI * t * m * m + (2.0 * n as f64 + 1.0) * PI * umax;
            if bound_log < lead_log + (1e-18f64).ln() && n > 1 {
                break;
            }
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            let coeff = c(2.0 * sign) * (I * PI * sigma * m * m).exp();
            terms.push(((2 * n + 1) as f64, coeff));
            n += 1;
            if n > 4000 {
                return Err(Error::Domain("theta series did not reach its tail bound".into()));
            }
        }
        let mut cache = Self { sigma, terms, derivs0: Vec::new() };
        cache.derivs0 = (0..=9).map(|j| cache.theta1_deriv_any(C64::new(0.0, 0.0), j)).collect();
        Ok(cache)
    }

    pub fn sigma(&self) -> C64 {
        self.sigma
    }

    pub fn q(&self) -> C64 {
        (I * PI * self.sigma).exp()
    }

    fn theta1_deriv_any(&self, u: C64, j: u32) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(m, coeff) in &self.terms {
            let arg = c(m) * PI * u + c(j as f64) * PI / 2.0;
            acc += coeff * (m * PI).powi(j as i32) * arg.sin();
        }
        acc
    }

    /// `θ₁(u|σ)` or its `u`-derivative of order `0..=3`.
    pub fn theta1(&self, u: C64, deriv_order: u32) -> Result<C64> {
        if deriv_order > 3 {
            return Err(Error::Domain("theta1 exposes derivatives up to order 3".into()));
        }
        Ok(self.theta1_deriv_any(u, deriv_order))
    }

    /// `θ₁^{(j)}(0)`, exact odd/even structure included.
    pub fn theta1_deriv0(&self, j: usize) -> C64 {
        self.derivs0[j]
    }

    /// Taylor window of `θ₁` at `z`: coefficients of `u^0..u^{order-1}`.
    pub fn theta1_taylor(&self, z: C64, order: i64) -> TruncatedSeries {
        let ord = order as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); ord];
        for &(m, coeff) in &self.terms {
            let base = c(m) * PI * z;
            let (s, co) = (base.sin(), base.cos());
            let step = m * PI;
            let mut pow = 1.0;
            let mut fact = 1.0;
            for (j, cf) in coeffs.iter_mut().enumerate() {
                // d^j sin = step^j * sin(arg + j π/2), cycling s, c, -s, -c
                let trig = match j % 4 {
                    0 => s,
                    1 => co,
                    2 => -s,
                    _ => -co,
                };
                *cf += coeff * trig * (pow / fact);
                pow *= step;
                fact *= (j + 1) as f64;
            }
        }
        TruncatedSeries::from_coeffs(0, &coeffs)
    }

    /// Reduces `u` modulo the lattice `Z + σZ` into `|Im| <= Im σ / 2`,
    /// `|Re(u - nσ) - m| <= 1/2`.
    pub fn reduce(&self, u: C64) -> C64 {
        let n = (u.im / self.sigma.im).round();
        let shifted = u - self.sigma * n;
        let m = shifted.re.round();
        shifted - m
    }

    /// Taylor window of `ln θ₁(z + u)` in `u`; `z` must avoid the lattice.
    /// The constant term is the principal log of `θ₁(z)`.
    pub fn log_theta1_taylor(&self, z: C64, order: i64) -> Result<TruncatedSeries> {
        let t = self.theta1_taylor(z, order);
        let t0 = t.coeff(0).unwrap();
        if t0.norm() < 1e-290 {
            return Err(Error::Domain("log theta1 at a lattice zero".into()));
        }
        let rest = t.scale(c(1.0) / t0).sub(&TruncatedSeries::constant(c(1.0), order));
        let log = rest.log_one_plus()?;
        Ok(TruncatedSeries::constant(t0.ln(), order).add(&log))
    }

    /// `∂_u² ln θ₁` at `u`, reduced modulo the lattice (the second log
    /// derivative is elliptic).  `u` must not be a lattice point.
    pub fn log_theta1_dd(&self, u: C64) -> Result<C64> {
        let ur = self.reduce(u);
        if ur.norm() < POLE_TOL {
            return Err(Error::Domain("second log derivative at a lattice point".into()));
        }
        let th = self.theta1_deriv_any(ur, 0);
        let d1 = self.theta1_deriv_any(ur, 1);
        let d2 = self.theta1_deriv_any(ur, 2);
        Ok(d2 / th - (d1 / th) * (d1 / th))
    }

    /// The additive constant in `℘ = -∂_u² ln θ₁ + c_wp` that removes the
    /// constant term of the Laurent expansion at the lattice.
    pub fn wp_constant(&self) -> C64 {
        self.derivs0[3] / (c(3.0) * self.derivs0[1])
    }

    /// `η₁ = ζ(1/2)`; the a-period of `℘` is `-2η₁`.
    pub fn eta1(&self) -> C64 {
        -self.derivs0[3] / (c(6.0) * self.derivs0[1])
    }

    /// Constant value of the Bergmann projective connection in the flat
    /// chart: `S_B(z) = -2 θ₁'''(0)/θ₁'(0)`.
    pub fn sb_flat_chart(&self) -> C64 {
        -c(2.0) * self.derivs0[3] / self.derivs0[1]
    }

    /// The Dedekind eta used throughout: `{θ₁'(0|σ)}^{1/3}`, principal root
    /// (equals `(2π)^{1/3}` times the standard eta).
    pub fn dedekind_eta(&self) -> C64 {
        self.derivs0[1].powf(1.0 / 3.0)
    }

    /// Taylor window of `℘(z + u)` in `u`; `z` must avoid the lattice.
    pub fn wp_series_at(&self, z: C64, order: i64) -> Result<TruncatedSeries> {
        let log = self.log_theta1_taylor(z, order + 2)?;
        let dd = log.derivative().derivative();
        Ok(dd
            .neg()
            .add(&TruncatedSeries::constant(self.wp_constant(), dd.trunc_order()))
            .truncate_to(order))
    }

    /// Laurent window of `℘(u)` at the lattice point `u = 0`:
    /// `u^{-2} + O(u^2)`.
    pub fn wp_laurent_at_zero(&self, order: i64) -> Result<TruncatedSeries> {
        // θ₁(u) = u g(u) with g(0) = θ₁'(0); ℘ = u^{-2} - (ln g)'' + c_wp
        let window = order + 4;
        let t = self.theta1_taylor(C64::new(0.0, 0.0), window + 1);
        let g = t.shift(-1); // exact: θ₁ is odd with a simple zero
        let g0 = g.coeff(0).unwrap();
        let rest = g.scale(c(1.0) / g0).sub(&TruncatedSeries::constant(c(1.0), window + 1));
        let logg = rest.log_one_plus()?;
        let dd = logg.derivative().derivative();
        Ok(TruncatedSeries::monomial(-2, c(1.0), dd.trunc_order())
            .add(&dd.neg())
            .add(&TruncatedSeries::constant(self.wp_constant(), dd.trunc_order()))
            .truncate_to(order))
    }

    /// `℘^{(deriv)}(z)`.
    pub fn wp(&self, z: C64, deriv_order: u32) -> Result<C64> {
        let zr = self.reduce(z);
        if zr.norm() < POLE_TOL {
            return Err(Error::Domain("wp evaluated at a lattice pole".into()));
        }
        let ser = self.wp_series_at(zr, deriv_order as i64 + 1)?;
        let mut fact = 1.0;
        for j in 1..=deriv_order {
            fact *= j as f64;
        }
        Ok(ser.coeff(deriv_order as i64).unwrap() * fact)
    }

    /// Taylor window of `∂_σ ℘(z + u)` in `u` at fixed `z`, from the heat
    /// equation (exact, no finite differences).
    pub fn dsigma_wp_series_at(&self, z: C64, order: i64) -> Result<TruncatedSeries> {
        let log = self.log_theta1_taylor(z, order + 4)?;
        let d1 = log.derivative();
        let d2 = d1.derivative();
        // ∂_σ ln θ₁ = (1/4πi)(T'' + (T')²)
        let hs = d2.add(&d1.mul(&d1)).scale(c(1.0) / (c(4.0) * PI * I));
        let dd = hs.derivative().derivative();
        Ok(dd
            .neg()
            .add(&TruncatedSeries::constant(self.dsigma_wp_constant(), dd.trunc_order()))
            .truncate_to(order))
    }

    /// `∂_σ` of the `℘` additive constant `θ₁'''(0)/(3θ₁'(0))`.
    pub fn dsigma_wp_constant(&self) -> C64 {
        let d1 = self.derivs0[1];
        let d3 = self.derivs0[3];
        let d5 = self.derivs0[5];
        (d5 / d1 - (d3 / d1) * (d3 / d1)) / (c(12.0) * PI * I)
    }
}

/// Eisenstein invariants `g₂, g₃` of the lattice `(1, σ)` by q-series
/// (independent of the theta machinery; used as an oracle).
#[allow(dead_code)]
pub(crate) fn eisenstein_g2_g3(sigma: C64) -> (C64, C64) {
    let qt = (c(2.0) * PI * I * sigma).exp();
    let mut e4 = C64::new(1.0, 0.0);
    let mut e6 = C64::new(1.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    for n in 1..400 {
        qn *= qt;
        if qn.norm() < 1e-22 {
            break;
        }
        let nf = c(n as f64);
        e4 += c(240.0) * nf.powi(3) * qn / (c(1.0) - qn);
        e6 -= c(504.0) * nf.powi(5) * qn / (c(1.0) - qn);
    }
    let pi2 = PI * PI;
    (c(4.0 / 3.0 * pi2 * pi2) * e4, c(8.0 / 27.0 * pi2 * pi2 * pi2) * e6)
}
