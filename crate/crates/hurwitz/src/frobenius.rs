//! Frobenius-manifold data attached to a covering.
//!
//! Canonical coordinates are the finite critical values `λ_m`.  A primary
//! differential `φ` induces the diagonal metric `η_mm = Res_{P_m}(φ²/dλ)`;
//! the rotation coefficients are half the Bergmann-kernel values at pairs of
//! branch points, the Hamiltonians are the quadratic combinations
//! `H_m = (1/2) Σ_{n≠m} γ_mn² (λ_m - λ_n)`, and the Bergmann tau-function
//! has the closed form
//!
//! `12 ln τ_B = Σ_{s} (k_s+1) ln h_s - Σ_m ln f_m`  (+ `24 ln η(σ)` in genus 1)
//!
//! with `f_m = dz/dx_m|_0`, `h_s = dz/dζ_s|_0`.  The isomonodromic
//! tau-function is `τ_I = τ_B^{-1/2}` and the G-function is
//! `G = ln τ_I - (1/24) ln J`, `J = (Π η_mm)^{1/2}`.
//!
//! Tau- and G-level quantities are only pinned by the theory up to constant
//! branch offsets, so they are assembled from per-factor principal logs; the
//! same `ln f_m` values enter `ln τ_B` and `ln J`, which keeps every tested
//! combination free of spurious `2πi` jumps across parameter points.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::genus0::{bergmann_value, proj_connection_at_branch, BranchData, CoveringG0};
use crate::genus1::{bergmann_value_g1, proj_connection_g1, CoveringG1};
use crate::series::TruncatedSeries;
use crate::theta::ThetaCache;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const I: C64 = C64::new(0.0, 1.0);

/// The primary differentials in scope: `dz` on the polynomial family,
/// `dz/z` on the Laurent family, the normalized holomorphic differential
/// on the genus-1 family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimaryDifferential {
    Dz,
    DzOverZ,
    Omega,
}

impl PrimaryDifferential {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Dz => "dz",
            Self::DzOverZ => "dz_over_z",
            Self::Omega => "omega",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dz" => Ok(Self::Dz),
            "dz_over_z" => Ok(Self::DzOverZ),
            "omega" => Ok(Self::Omega),
            other => Err(Error::Descriptor(format!("unknown primary differential '{other}'"))),
        }
    }
}

/// A covering of either genus.
#[derive(Clone, Debug)]
pub enum Covering {
    G0(CoveringG0),
    G1(CoveringG1),
}

impl Covering {
    pub fn genus(&self) -> u8 {
        match self {
            Self::G0(_) => 0,
            Self::G1(_) => 1,
        }
    }

    /// The primary differential designated for this family.
    pub fn designated_phi(&self) -> PrimaryDifferential {
        match self {
            Self::G0(CoveringG0::Laurent { .. }) => PrimaryDifferential::DzOverZ,
            Self::G0(_) => PrimaryDifferential::Dz,
            Self::G1(_) => PrimaryDifferential::Omega,
        }
    }

    /// Whether `phi` defines a metric on this covering.  `dz` is also a
    /// primary differential on the Laurent family (used by the
    /// φ-independence check); the G-function uses the designated one.
    pub fn phi_compatible(&self, phi: PrimaryDifferential) -> bool {
        match (self, phi) {
            (Self::G0(CoveringG0::Laurent { .. }), PrimaryDifferential::Dz) => true,
            (Self::G0(CoveringG0::Laurent { .. }), PrimaryDifferential::DzOverZ) => true,
            (Self::G0(CoveringG0::Rational { .. }), _) => false,
            (Self::G0(_), PrimaryDifferential::Dz) => true,
            (Self::G1(_), PrimaryDifferential::Omega) => true,
            _ => false,
        }
    }
}

/// Assembled, immutable snapshot of everything the tau/G formulas need.
pub struct Frobenius {
    covering: Covering,
    theta: Option<ThetaCache>,
    branches: Vec<BranchData>,
    /// `(k_s, h_s)`: genus 0 lists `s >= 2`, genus 1 lists `s = 1`.
    h_factors: Vec<(usize, C64)>,
}

impl Frobenius {
    pub fn new(covering: Covering) -> Result<Self> {
        match covering {
            Covering::G0(cov) => {
                let branches = cov.critical_data()?;
                let h_factors = cov.h_factors()?;
                Ok(Self { covering: Covering::G0(cov), theta: None, branches, h_factors })
            }
            Covering::G1(cov) => {
                let cache = cov.theta_cache()?;
                let branches = cov.critical_data(&cache)?;
                let h1 = cov.h1(&cache)?;
                let n = cov.degree();
                Ok(Self {
                    covering: Covering::G1(cov),
                    theta: Some(cache),
                    branches,
                    h_factors: vec![(n, h1)],
                })
            }
        }
    }

    /// Rebuilds the snapshot for a nearby covering, keeping branch order and
    /// square-root sheets matched to `self` (for finite-difference oracles).
    pub fn refined_to(&self, covering: Covering) -> Result<Self> {
        match covering {
            Covering::G0(cov) => {
                let branches = cov.refine_critical_data(&self.branches)?;
                let h_factors = cov.h_factors()?;
                Ok(Self { covering: Covering::G0(cov), theta: None, branches, h_factors })
            }
            Covering::G1(cov) => {
                let cache = cov.theta_cache()?;
                let branches = cov.refine_critical_data(&cache, &self.branches)?;
                let h1 = cov.h1(&cache)?;
                let n = cov.degree();
                Ok(Self {
                    covering: Covering::G1(cov),
                    theta: Some(cache),
                    branches,
                    h_factors: vec![(n, h1)],
                })
            }
        }
    }

    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    pub fn branches(&self) -> &[BranchData] {
        &self.branches
    }

    pub fn theta(&self) -> Option<&ThetaCache> {
        self.theta.as_ref()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Canonical coordinates `λ_1, ..., λ_M`.
    pub fn lambdas(&self) -> Vec<C64> {
        self.branches.iter().map(|b| b.lambda).collect()
    }

    /// `(k_s, h_s)` factors entering the tau-function.
    pub fn h_factors(&self) -> &[(usize, C64)] {
        &self.h_factors
    }

    /// `f_m = dz/dx_m` (or `ω/dx_m` in genus 1).
    pub fn f_factors(&self) -> Vec<C64> {
        self.branches.iter().map(|b| b.dz_dx).collect()
    }

    fn require_phi(&self, phi: PrimaryDifferential) -> Result<()> {
        if self.covering.phi_compatible(phi) {
            Ok(())
        } else {
            Err(Error::IncompatiblePhi(format!(
                "{} is not a primary differential of this covering",
                phi.tag()
            )))
        }
    }

    /// Weight of `φ/dz` at the branch point `m`: 1 for `dz` and `ω`,
    /// `1/z_m` for `dz/z`.
    fn phi_weight(&self, phi: PrimaryDifferential, m: usize) -> C64 {
        match phi {
            PrimaryDifferential::DzOverZ => c(1.0) / self.branches[m].z,
            _ => c(1.0),
        }
    }

    /// `η_mm = Res_{P_m}(φ²/dλ) = (1/2)(φ/dx_m)²` at `x_m = 0`.
    pub fn metric_coeffs(&self, phi: PrimaryDifferential) -> Result<Vec<C64>> {
        self.require_phi(phi)?;
        let mut out = Vec::with_capacity(self.branches.len());
        for m in 0..self.branches.len() {
            let v = self.sqrt_eta(phi, m);
            let eta = v * v;
            if eta.norm() < 1e-12 {
                return Err(Error::Singular(format!("metric coefficient η_{m}{m} vanishes")));
            }
            out.push(eta);
        }
        Ok(out)
    }

    /// `(η_mm)^{1/2}` with the sign convention inherited from the frame
    /// sheet: `(1/2)^{1/2} f_m (φ/dz)(z_m)`.  Squares to `metric_coeffs`.
    pub fn sqrt_eta(&self, phi: PrimaryDifferential, m: usize) -> C64 {
        c(0.5f64.sqrt()) * self.branches[m].dz_dx * self.phi_weight(phi, m)
    }

    /// `η_mm` by the literal series residue of `(φ/dx_m)²/(2 x_m)`;
    /// independent route used by tests.
    pub fn metric_coeff_by_residue(&self, phi: PrimaryDifferential, m: usize) -> Result<C64> {
        self.require_phi(phi)?;
        let rec = &self.branches[m];
        let t = rec.frame.trunc_order();
        // φ/dx_m = w(z(x)) z'(x) with w = 1 or 1/z
        let zprime = rec.frame.derivative();
        let phi_over_dx = match phi {
            PrimaryDifferential::DzOverZ => {
                let one = TruncatedSeries::constant(c(1.0), t);
                zprime.mul(&one.div(&rec.frame)?)
            }
            _ => zprime,
        };
        let integrand = phi_over_dx
            .mul(&phi_over_dx)
            .mul(&TruncatedSeries::monomial(-1, c(0.5), t));
        integrand.residue()
    }

    /// Kernel value `b_mn(P_m, P_n)`, `m != n`.
    pub fn kernel_value(&self, m: usize, n: usize) -> Result<C64> {
        match &self.covering {
            Covering::G0(_) => bergmann_value(&self.branches, m, n),
            Covering::G1(_) => {
                bergmann_value_g1(self.theta.as_ref().unwrap(), &self.branches, m, n)
            }
        }
    }

    /// `S_B(x_m)` at `x_m = 0`.
    pub fn proj_connection(&self, m: usize) -> Result<C64> {
        match &self.covering {
            Covering::G0(_) => proj_connection_at_branch(&self.branches, m),
            Covering::G1(_) => proj_connection_g1(self.theta.as_ref().unwrap(), &self.branches, m),
        }
    }

    /// Rotation coefficients `γ_mn = (1/2) b_mn(P_m, P_n)`; the diagonal is
    /// not defined and stored as zero.
    pub fn rotation_coeffs(&self) -> Result<DMatrix<C64>> {
        let m = self.branches.len();
        let mut g = DMatrix::<C64>::zeros(m, m);
        for i in 0..m {
            for j in (i + 1)..m {
                let v = self.kernel_value(i, j)? / 2.0;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// `V = [Γ, U]`: `V_mn = γ_mn (λ_n - λ_m)`, antisymmetric.
    pub fn v_matrix(&self, gamma: &DMatrix<C64>) -> DMatrix<C64> {
        let m = self.branches.len();
        DMatrix::from_fn(m, m, |i, j| gamma[(i, j)] * (self.branches[j].lambda - self.branches[i].lambda))
    }

    /// Hamiltonians `H_m = (1/2) Σ_{n≠m} γ_mn² (λ_m - λ_n)`.
    pub fn hamiltonians(&self, gamma: &DMatrix<C64>) -> Vec<C64> {
        let m = self.branches.len();
        (0..m)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..m {
                    if j != i {
                        let g = gamma[(i, j)];
                        acc += g * g * (self.branches[i].lambda - self.branches[j].lambda);
                    }
                }
                acc / 2.0
            })
            .collect()
    }

    /// `𝓑_m = -(1/12) S_B(x_m)` at `x_m = 0`.
    pub fn bergmann_quantities(&self) -> Result<Vec<C64>> {
        (0..self.branches.len())
            .map(|m| Ok(-self.proj_connection(m)? / 12.0))
            .collect()
    }

    /// `ln τ_B` from the closed form, assembled from per-factor principal
    /// logs (each factor's log taken separately, never log-of-product).
    pub fn log_tau_bergmann(&self) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for &(ks, h) in &self.h_factors {
            if h.norm() < 1e-13 {
                return Err(Error::Singular("vanishing pole frame factor h_s".into()));
            }
            acc += c((ks + 1) as f64) * h.ln();
        }
        for b in &self.branches {
            if b.dz_dx.norm() < 1e-13 {
                return Err(Error::Singular("vanishing branch frame factor f_m".into()));
            }
            acc -= b.dz_dx.ln();
        }
        let mut log_tau = acc / 12.0;
        if let Some(cache) = &self.theta {
            log_tau += c(2.0) * self.log_dedekind_eta(cache);
        }
        Ok(log_tau)
    }

    /// `ln η(σ) = (1/3) Ln θ₁'(0|σ)`.
    fn log_dedekind_eta(&self, cache: &ThetaCache) -> C64 {
        cache.theta1_deriv0(1).ln() / 3.0
    }

    /// `ln τ_I = -(1/2) ln τ_B`.
    pub fn log_tau_iso(&self) -> Result<C64> {
        Ok(-self.log_tau_bergmann()? / 2.0)
    }

    /// `ln J = (1/2) Σ_m ln η_mm`, assembled from the same per-factor logs
    /// as `ln τ_B` so that branch offsets cancel in `G`.  For `dz/z` the
    /// critical-point product is folded through the coefficient identity
    /// `k Π z_m = (-1)^{N+1} (N-k) b_N` to keep the branch coherent with
    /// the flat coordinate `t_N`.
    pub fn log_j(&self, phi: PrimaryDifferential) -> Result<C64> {
        self.require_phi(phi)?;
        let m = self.branches.len() as f64;
        let mut acc = c(m) * c(0.5).ln();
        for b in &self.branches {
            acc += c(2.0) * b.dz_dx.ln();
        }
        if phi == PrimaryDifferential::DzOverZ {
            acc -= c(2.0) * self.log_prod_crit_points()?;
        }
        Ok(acc / 2.0)
    }

    /// Branch-coherent `ln Π z_m` for the Laurent family: the product of the
    /// critical points is computed numerically from the roots, validated
    /// against `(-1)^{N+1}(N-k) b_N / k`, and its log is pinned to the
    /// branch that differs from `Ln b_N` by a real constant.
    fn log_prod_crit_points(&self) -> Result<C64> {
        let Covering::G0(CoveringG0::Laurent { k, b }) = &self.covering else {
            return Err(Error::Domain("critical-point product needs the Laurent family".into()));
        };
        let n = b.len();
        let prod: C64 = self.branches.iter().map(|r| r.z).product();
        // Vieta on the critical polynomial: Π z_m = (-1)^{N+1} (N-k) b_N / k,
        // so (-1)^{N+1} Π is a positive real multiple of b_N and its
        // principal log carries no winding relative to Ln b_N.
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        let adjusted = c(sign) * prod;
        let expected = c((n - *k) as f64 / *k as f64) * b[n - 1];
        if (adjusted - expected).norm() > 1e-7 * expected.norm().max(1e-300) {
            return Err(Error::Precision(format!(
                "critical-point product {prod} disagrees with the coefficient identity"
            )));
        }
        // restore the sign as a fixed constant: ln Π = Ln(adjusted) + iπ(N+1 mod 2)
        let offset = if n % 2 == 0 { PI } else { 0.0 };
        Ok(adjusted.ln() + I * offset)
    }

    /// The G-function `G = -(1/2) ln τ_B - (1/48) Σ ln η_mm`, by the
    /// per-factor assembly (first) and by the literal closed form with a
    /// single principal log (second).  The two agree modulo `iπ/24`.
    pub fn g_function(&self, phi: PrimaryDifferential) -> Result<(C64, C64)> {
        self.require_phi(phi)?;
        let assembled = -self.log_tau_bergmann()? / 2.0 - self.log_j(phi)? / 24.0;

        // literal closed form
        let eta: Vec<C64> = self.metric_coeffs(phi)?;
        let prod_eta: C64 = eta.iter().product();
        let prod_f: C64 = self.branches.iter().map(|b| b.dz_dx).product();
        let mut denom = prod_eta.sqrt();
        for &(ks, h) in &self.h_factors {
            denom *= h.powi(ks as i32 + 1);
        }
        let mut literal = (prod_f / denom).ln() / 24.0;
        if let Some(cache) = &self.theta {
            literal -= self.log_dedekind_eta(cache);
        }
        Ok((assembled, literal))
    }

    /// Normalization used for the genus-1 flat coordinate `t_N`: the raw
    /// residue equals `-N h_1`; scaled by `-1/N` it is `h_1` itself.
    pub fn flat_coordinates(&self) -> Result<Vec<C64>> {
        match &self.covering {
            Covering::G0(CoveringG0::Laurent { k, b }) => self.flat_laurent(*k, b),
            Covering::G0(_) => Err(Error::Domain(
                "flat chart not implemented for this family".into(),
            )),
            Covering::G1(cov) => self.flat_genus1(cov),
        }
    }

    fn flat_laurent(&self, k: usize, b: &[C64]) -> Result<Vec<C64>> {
        let n = b.len();
        let nk = n - k;
        let mut t = Vec::with_capacity(n);
        // t_mu = (-1)^mu (k/mu) [w^mu] (1 + b_1 w + ... + b_N w^N)^{mu/k},
        // from the residue at z = infinity, w = 1/z
        let mut poly = vec![c(1.0)];
        poly.extend_from_slice(b);
        for mu in 1..k {
            let base = TruncatedSeries::from_coeffs(0, &poly).pad_to(mu as i64 + 2);
            let powed = base.pow_rational(mu as i64, k as i64)?;
            let sign = if mu.is_multiple_of(2) { 1.0 } else { -1.0 };
            t.push(c(sign * k as f64 / mu as f64) * powed.coeff(mu as i64).unwrap());
        }
        // t_{N-mu} = (-1)^mu ((N-k)/mu) [z^0] ((-1)^N λ)^{mu/(N-k)},
        // from the residue at z = 0
        let Covering::G0(cov) = &self.covering else { unreachable!() };
        let mut middle = Vec::with_capacity(nk);
        for mu in 1..=nk {
            let lam = cov_laurent_series_at_zero(cov, (mu + 2) as i64)?;
            let signed = if n.is_multiple_of(2) { lam } else { lam.neg() };
            let powed = signed.pow_rational(mu as i64, nk as i64)?;
            let sign = if mu.is_multiple_of(2) { 1.0 } else { -1.0 };
            middle.push(c(sign * nk as f64 / mu as f64) * powed.coeff(0).unwrap());
        }
        // middle holds t_{N-1}, t_{N-2}, ..., t_k in the order mu = 1..N-k
        middle.reverse();
        t.extend_from_slice(&middle);
        // t_N from b_N = (-1)^N exp((N-k) t_N), branch fixed once
        let bn = b[n - 1];
        let t_n = (bn.ln() - I * PI * ((n % 2) as f64)) / c(nk as f64);
        t.push(t_n);
        Ok(t)
    }

    fn flat_genus1(&self, cov: &CoveringG1) -> Result<Vec<C64>> {
        let cache = self.theta.as_ref().unwrap();
        let n = cov.degree();
        let mut t = Vec::with_capacity(n + 1);
        t.push(cov.sigma());
        t.push(cov.t1(cache)?);
        let lam = cov.lambda_laurent_at_pole(cache, n as i64 + 4)?;
        let dlam = lam.derivative();
        for mu in 2..=n {
            // Res_{z=0} z λ^{-(mu-1)/N} λ'(z) dz
            let powed = lam.pow_rational(-((mu - 1) as i64), n as i64)?;
            let integrand = powed.mul(&dlam).shift(1);
            let mut val = integrand.residue()?;
            if mu == n {
                // raw residue is -N h_1; normalize so t_N = h_1
                val /= c(-(n as f64));
            }
            t.push(val);
        }
        Ok(t)
    }

    /// Compares `|det ∂t/∂λ|` with `|Π η_mm|^{1/2}` through finite
    /// differences of the flat coordinates in the coefficient chart.
    pub fn jacobian_consistency(
        &self,
        phi: PrimaryDifferential,
        fd_step: f64,
    ) -> Result<JacobianReport> {
        let base_params = match &self.covering {
            Covering::G0(cov) => cov.params()?,
            Covering::G1(cov) => cov.params(),
        };
        let m = self.branches.len();
        if base_params.len() != m {
            return Err(Error::Singular("parameter count does not match dimension".into()));
        }
        let mut dt_dp = DMatrix::<C64>::zeros(m, m);
        for j in 0..m {
            let mut plus = base_params.clone();
            let mut minus = base_params.clone();
            plus[j] += c(fd_step);
            minus[j] -= c(fd_step);
            let tp = self.refined_to(self.with_params(&plus)?)?.flat_coordinates()?;
            let tm = self.refined_to(self.with_params(&minus)?)?.flat_coordinates()?;
            for i in 0..m {
                dt_dp[(i, j)] = (tp[i] - tm[i]) / c(2.0 * fd_step);
            }
        }
        let dl_dp = match &self.covering {
            Covering::G0(cov) => cov.param_jacobian(&self.branches)?,
            Covering::G1(cov) => cov.param_jacobian(self.theta.as_ref().unwrap(), &self.branches)?,
        };
        let det_t = dt_dp.determinant();
        let det_l = dl_dp.determinant();
        if det_l.norm() < 1e-290 {
            return Err(Error::Singular("singular λ-Jacobian".into()));
        }
        let jac = det_t / det_l * c(self.flat_det_normalization()?);
        let eta = self.metric_coeffs(phi)?;
        let prod_eta: C64 = eta.iter().product();
        let target = prod_eta.sqrt().norm();
        let residual = (jac.norm() - target).abs() / target;
        Ok(JacobianReport {
            det_dt_dlambda: jac,
            sqrt_prod_eta_abs: target,
            residual,
            range_note: "literal range 1 <= mu < k-1 yields N-1 coordinates \
                               (non-square Jacobian); using 1 <= mu <= k-1"
                .into(),
        })
    }

    /// Constant taking the literal flat tuple to the unit-normalized chart:
    /// `|det η_flat|^{1/2}` for the canonical pairings
    /// `η(t_μ, t_ν) = (1/k_i) δ_{μ+ν, k_i}` per pole family,
    /// `η(σ, t_1) = 1/(2πi)` and the genus-1 residue pairing
    /// `(1/N) δ_{μ+ν, N+2}` (verified numerically in the test suite).
    fn flat_det_normalization(&self) -> Result<f64> {
        match &self.covering {
            Covering::G0(CoveringG0::Laurent { k, b }) => {
                let n = b.len();
                let nk = (n - *k) as f64;
                let kk = *k as f64;
                Ok(kk.powf(-(kk - 1.0) / 2.0) * nk.powf(-(nk - 1.0) / 2.0))
            }
            Covering::G1(cov) => {
                let n = cov.degree() as f64;
                Ok(n.powf((3.0 - n) / 2.0) / (2.0 * PI))
            }
            _ => Err(Error::Domain("flat chart not implemented for this family".into())),
        }
    }

    /// Coefficient-chart parameter vector (order matches `param_jacobian`).
    pub fn params(&self) -> Result<Vec<C64>> {
        match &self.covering {
            Covering::G0(cov) => cov.params(),
            Covering::G1(cov) => Ok(cov.params()),
        }
    }

    /// `∂λ_m/∂p_j` in the coefficient chart.
    pub fn param_jacobian(&self) -> Result<DMatrix<C64>> {
        match &self.covering {
            Covering::G0(cov) => cov.param_jacobian(&self.branches),
            Covering::G1(cov) => cov.param_jacobian(self.theta.as_ref().unwrap(), &self.branches),
        }
    }

    pub fn with_params(&self, params: &[C64]) -> Result<Covering> {
        Ok(match &self.covering {
            Covering::G0(cov) => Covering::G0(cov.with_params(params)?),
            Covering::G1(cov) => Covering::G1(cov.with_params(params)?),
        })
    }

    /// Full data snapshot at this covering for the designated `φ`.
    pub fn assemble(&self, phi: PrimaryDifferential) -> Result<FrobeniusData> {
        self.require_phi(phi)?;
        let gamma = self.rotation_coeffs()?;
        let eta = self.metric_coeffs(phi)?;
        let h = self.hamiltonians(&gamma);
        let bq = self.bergmann_quantities()?;
        let log_tau_b = self.log_tau_bergmann()?;
        let log_tau_i = -log_tau_b / 2.0;
        let log_j = self.log_j(phi)?;
        let (g, g_literal) = self.g_function(phi)?;
        let flat = self.flat_coordinates().ok();
        Ok(FrobeniusData {
            phi,
            lambdas: self.lambdas(),
            eta_diag: eta,
            gamma: gamma.clone(),
            v: self.v_matrix(&gamma),
            hamiltonians: h,
            bergmann_quantities: bq,
            log_tau_bergmann: log_tau_b,
            log_tau_iso: log_tau_i,
            log_j,
            g,
            g_literal,
            h_factors: self.h_factors.clone(),
            f_factors: self.f_factors(),
            flat_coordinates: flat,
        })
    }
}

fn cov_laurent_series_at_zero(cov: &CoveringG0, order: i64) -> Result<TruncatedSeries> {
    let CoveringG0::Laurent { k, b } = cov else {
        return Err(Error::Domain("Laurent expansion needs the Laurent family".into()));
    };
    // λ = z^{-(N-k)} (b_N + b_{N-1} z + ... + b_1 z^{N-1} + z^N)
    let n = b.len();
    let mut coeffs: Vec<C64> = b.iter().rev().copied().collect();
    coeffs.push(c(1.0));
    Ok(TruncatedSeries::from_coeffs(0, &coeffs)
        .pad_to(order + (n - k) as i64 + 1)
        .shift(-((n - k) as i64)))
}

/// Result of the flat-coordinate Jacobian identity check.
#[derive(Clone, Debug)]
pub struct JacobianReport {
    pub det_dt_dlambda: C64,
    pub sqrt_prod_eta_abs: f64,
    pub residual: f64,
    pub range_note: String,
}

/// Immutable snapshot of the Frobenius data at one covering.
#[derive(Clone, Debug)]
pub struct FrobeniusData {
    pub phi: PrimaryDifferential,
    pub lambdas: Vec<C64>,
    pub eta_diag: Vec<C64>,
    pub gamma: DMatrix<C64>,
    pub v: DMatrix<C64>,
    pub hamiltonians: Vec<C64>,
    pub bergmann_quantities: Vec<C64>,
    pub log_tau_bergmann: C64,
    pub log_tau_iso: C64,
    pub log_j: C64,
    pub g: C64,
    pub g_literal: C64,
    pub h_factors: Vec<(usize, C64)>,
    pub f_factors: Vec<C64>,
    pub flat_coordinates: Option<Vec<C64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b} (|diff| = {:.3e})", (a - b).norm());
    }

    fn anchor() -> Frobenius {
        Frobenius::new(Covering::G0(
            CoveringG0::polynomial(vec![cx(-3.0, 0.0), cx(0.0, 0.0)]).unwrap(),
        ))
        .unwrap()
    }

    #[test]
    fn metric_examples() {
        // N=2 polynomial, φ = dz: η = 1/2
        let f = Frobenius::new(Covering::G0(
            CoveringG0::polynomial(vec![cx(5.0, 0.0)]).unwrap(),
        ))
        .unwrap();
        let eta = f.metric_coeffs(PrimaryDifferential::Dz).unwrap();
        assert_close(eta[0], cx(0.5, 0.0), 1e-13);

        // anchor: η_mm = 1/λ''(z_m) = ±1/6 (λ-sorted: +1/6 first)
        let eta = anchor().metric_coeffs(PrimaryDifferential::Dz).unwrap();
        assert_close(eta[0], cx(1.0 / 6.0, 0.0), 1e-12);
        assert_close(eta[1], cx(-1.0 / 6.0, 0.0), 1e-12);

        // laurent λ = z + 1/z, φ = dz/z: η at z = ±1
        let f = Frobenius::new(Covering::G0(
            CoveringG0::laurent(1, vec![cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap(),
        ))
        .unwrap();
        let eta = f.metric_coeffs(PrimaryDifferential::DzOverZ).unwrap();
        // λ-sorted: λ = -2 (z = -1) first: η = -1/2, then +1/2
        assert_close(eta[0], cx(-0.5, 0.0), 1e-12);
        assert_close(eta[1], cx(0.5, 0.0), 1e-12);

        // residue route agrees with the closed form on both φ
        for phi in [PrimaryDifferential::Dz, PrimaryDifferential::DzOverZ] {
            let eta = f.metric_coeffs(phi).unwrap();
            for (m, want) in eta.iter().enumerate() {
                let by_res = f.metric_coeff_by_residue(phi, m).unwrap();
                assert_close(by_res, *want, 1e-11);
            }
        }
    }

    #[test]
    fn rotation_and_hamiltonians_anchor() {
        let f = anchor();
        let gamma = f.rotation_coeffs().unwrap();
        let g2 = gamma[(0, 1)] * gamma[(0, 1)];
        assert_close(g2, cx(-1.0 / 576.0, 0.0), 1e-14);
        let h = f.hamiltonians(&gamma);
        assert_close(h[0], cx(1.0 / 288.0, 0.0), 1e-13);
        assert_close(h[1], cx(-1.0 / 288.0, 0.0), 1e-13);
        let sum: C64 = h.iter().sum();
        assert!(sum.norm() < 1e-15);

        // single-branch covering: empty sum
        let f2 = Frobenius::new(Covering::G0(
            CoveringG0::polynomial(vec![cx(5.0, 0.0)]).unwrap(),
        ))
        .unwrap();
        let gamma2 = f2.rotation_coeffs().unwrap();
        assert!(f2.hamiltonians(&gamma2)[0].norm() < 1e-15);
    }

    #[test]
    fn v_matrix_antisymmetric() {
        let f = anchor();
        let gamma = f.rotation_coeffs().unwrap();
        let v = f.v_matrix(&gamma);
        for i in 0..2 {
            for j in 0..2 {
                assert_close(v[(i, j)], -v[(j, i)], 1e-15);
            }
        }
    }

    #[test]
    fn bergmann_quantities_anchor() {
        let f = anchor();
        let bq = f.bergmann_quantities().unwrap();
        assert_close(bq[0], cx(-1.0 / 144.0, 0.0), 1e-12);
        assert_close(bq[1], cx(1.0 / 144.0, 0.0), 1e-12);
        // central identity H_m = -B_m/2 at the anchor
        let gamma = f.rotation_coeffs().unwrap();
        let h = f.hamiltonians(&gamma);
        for m in 0..2 {
            assert_close(h[m], -bq[m] / 2.0, 1e-12);
        }
    }

    #[test]
    fn log_tau_values() {
        // N=2 polynomial: single factor dz/dx = 1, no poles beyond s=1
        let f = Frobenius::new(Covering::G0(
            CoveringG0::polynomial(vec![cx(5.0, 0.0)]).unwrap(),
        ))
        .unwrap();
        assert!(f.log_tau_bergmann().unwrap().norm() < 1e-13);

        // anchor: ln τ_B = -(1/24) Ln(-1/9) with the per-factor assembly
        let f = anchor();
        let lt = f.log_tau_bergmann().unwrap();
        let want = cx((3.0f64).ln() / 12.0, -PI / 24.0);
        assert_close(lt, want, 1e-12);
        assert_close(f.log_tau_iso().unwrap(), -lt / 2.0, 1e-15);

        // branch sanity: exp(12 ln τ_B) equals the literal factor product
        let prod_f: C64 = f.f_factors().iter().product();
        assert_close((lt * 12.0).exp(), cx(1.0, 0.0) / prod_f, 1e-12);

        // same sanity on a covering with pole factors
        let f = Frobenius::new(Covering::G0(
            CoveringG0::laurent(2, vec![cx(0.4, 0.3), cx(-0.8, 0.1), cx(0.2, -0.6), cx(1.1, 0.4)])
                .unwrap(),
        ))
        .unwrap();
        let lt = f.log_tau_bergmann().unwrap();
        let mut literal = cx(1.0, 0.0);
        for &(ks, h) in f.h_factors() {
            literal *= h.powi(ks as i32 + 1);
        }
        let prod_f: C64 = f.f_factors().iter().product();
        literal /= prod_f;
        assert_close((lt * 12.0).exp(), literal, 1e-12 * literal.norm());
    }

    #[test]
    fn genus1_n2_closed_form_tau() {
        // σ = i, c0 = 0, c2 = 1: h1 = 1, f_m = (2/℘''(ω_m))^{1/2}
        let cov = CoveringG1::new(cx(0.0, 1.0), cx(0.0, 0.0), vec![cx(1.0, 0.0)]).unwrap();
        let f = Frobenius::new(Covering::G1(cov)).unwrap();
        let lt = f.log_tau_bergmann().unwrap();
        let cache = f.theta().unwrap();
        let mut want = cache.theta1_deriv0(1).ln() * 2.0 / 3.0;
        let h1 = f.h_factors()[0].1;
        want += (c(3.0) * h1.ln() - f.f_factors().iter().map(|z| z.ln()).sum::<C64>()) / 12.0;
        assert_close(lt, want, 1e-12);
        assert_close(h1, cx(1.0, 0.0), 1e-10);
    }

    #[test]
    fn flat_coordinates_laurent() {
        // N=2, k=1: t = (-b_1, ln b_2)
        let b1 = cx(0.4, -0.7);
        let b2 = cx(1.3, 0.8);
        let f = Frobenius::new(Covering::G0(CoveringG0::laurent(1, vec![b1, b2]).unwrap()))
            .unwrap();
        let t = f.flat_coordinates().unwrap();
        assert_eq!(t.len(), 2);
        assert_close(t[0], -b1, 1e-12);
        assert_close(t[1], b2.ln(), 1e-12);
    }

    #[test]
    fn flat_coordinates_genus1() {
        // σ = i, c2 = 1: t = (σ, t1, h1 = 1)
        let cov = CoveringG1::new(cx(0.0, 1.0), cx(0.3, 0.1), vec![cx(1.0, 0.0)]).unwrap();
        let f = Frobenius::new(Covering::G1(cov)).unwrap();
        let t = f.flat_coordinates().unwrap();
        assert_eq!(t.len(), 3);
        assert_close(t[0], cx(0.0, 1.0), 1e-15);
        // t1 = c0 - 2 c2 η₁(σ)
        let cache = f.theta().unwrap();
        assert_close(t[1], cx(0.3, 0.1) - c(2.0) * cache.eta1(), 1e-10);
        assert_close(t[2], cx(1.0, 0.0), 1e-10);
    }

    #[test]
    fn polynomial_has_no_flat_chart() {
        assert!(anchor().flat_coordinates().is_err());
        assert!(anchor()
            .jacobian_consistency(PrimaryDifferential::Dz, 1e-5)
            .is_err());
    }

    #[test]
    fn g_function_routes_agree_mod_branch_constant() {
        let f = Frobenius::new(Covering::G0(
            CoveringG0::laurent(2, vec![cx(0.4, 0.3), cx(-0.8, 0.1), cx(0.2, -0.6), cx(1.1, 0.4)])
                .unwrap(),
        ))
        .unwrap();
        let (a, b) = f.g_function(PrimaryDifferential::DzOverZ).unwrap();
        // the two routes differ by a multiple of iπ/24
        let diff = (a - b) / (I * PI / 24.0);
        let nearest = diff.re.round();
        assert!(diff.im.abs() < 1e-9, "diff {diff}");
        assert!((diff.re - nearest).abs() < 1e-9, "diff {diff}");

        let f = Frobenius::new(Covering::G1(
            CoveringG1::new(cx(0.3, 1.1), cx(0.1, 0.0), vec![cx(0.7, 0.2)]).unwrap(),
        ))
        .unwrap();
        let (a, b) = f.g_function(PrimaryDifferential::Omega).unwrap();
        let diff = (a - b) / (I * PI / 24.0);
        let nearest = diff.re.round();
        assert!(diff.im.abs() < 1e-9, "diff {diff}");
        assert!((diff.re - nearest).abs() < 1e-9, "diff {diff}");
    }

    #[test]
    fn incompatible_phi_is_rejected() {
        let f = anchor();
        assert!(matches!(
            f.metric_coeffs(PrimaryDifferential::DzOverZ),
            Err(Error::IncompatiblePhi(_))
        ));
        assert!(matches!(
            f.g_function(PrimaryDifferential::Omega),
            Err(Error::IncompatiblePhi(_))
        ));
    }

    #[test]
    fn tau_relation_holds_on_rational_kind() {
        // λ = z + a/(z-1) + b/(z+1): profile (1,1,1), M = 4
        let a = cx(0.8, 0.3);
        let b = cx(1.2, -0.5);
        let num = vec![a - b, cx(-1.0, 0.0) + a + b, cx(0.0, 0.0), cx(1.0, 0.0)];
        let den = vec![cx(-1.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)];
        let f = Frobenius::new(Covering::G0(
            CoveringG0::rational(vec![1, 1, 1], num, den).unwrap(),
        ))
        .unwrap();
        let gamma = f.rotation_coeffs().unwrap();
        let ham = f.hamiltonians(&gamma);
        let bq = f.bergmann_quantities().unwrap();
        for m in 0..4 {
            assert!((ham[m] + bq[m] / 2.0).norm() < 1e-9, "m = {m}");
        }
        // tau evaluations exist; the metric has no designated φ here
        assert!(f.log_tau_bergmann().is_ok());
        assert!(matches!(
            f.metric_coeffs(PrimaryDifferential::Dz),
            Err(Error::IncompatiblePhi(_))
        ));
    }

    #[test]
    fn jacobian_consistency_laurent_12() {
        let f = Frobenius::new(Covering::G0(
            CoveringG0::laurent(1, vec![cx(0.4, -0.7), cx(1.3, 0.8)]).unwrap(),
        ))
        .unwrap();
        let rep = f.jacobian_consistency(PrimaryDifferential::DzOverZ, 1e-5).unwrap();
        assert!(rep.residual < 1e-6, "residual {}", rep.residual);
    }

    #[test]
    fn jacobian_consistency_across_families() {
        let cases: Vec<Covering> = vec![
            // k=1, N=3
            Covering::G0(
                CoveringG0::laurent(1, vec![cx(0.6, 0.2), cx(-0.9, 0.4), cx(1.2, -0.3)]).unwrap(),
            ),
            // k=2, N=4
            Covering::G0(
                CoveringG0::laurent(
                    2,
                    vec![cx(0.5, 0.1), cx(-0.7, 0.6), cx(0.3, -0.8), cx(1.0, 0.5)],
                )
                .unwrap(),
            ),
            // k=2, N=5
            Covering::G0(
                CoveringG0::laurent(
                    2,
                    vec![cx(0.4, 0.3), cx(-0.8, 0.1), cx(0.2, -0.6), cx(1.1, 0.4), cx(0.9, -0.2)],
                )
                .unwrap(),
            ),
            Covering::G1(CoveringG1::new(cx(0.3, 1.1), cx(0.1, 0.0), vec![cx(0.7, 0.2)]).unwrap()),
            Covering::G1(
                CoveringG1::new(cx(0.21, 0.93), cx(0.3, -0.2), vec![cx(0.8, 0.4), cx(-0.5, 0.9)])
                    .unwrap(),
            ),
        ];
        for cov in cases {
            let phi = cov.designated_phi();
            let f = Frobenius::new(cov).unwrap();
            let rep = f.jacobian_consistency(phi, 1e-5).unwrap();
            assert!(rep.residual < 1e-5, "residual {}", rep.residual);
        }
    }

    /// The unit-chart constants rest on the flat metric having the canonical
    /// pairing in the literal coordinates; verify the pairing numerically.
    #[test]
    fn flat_metric_pairing_structure() {
        let eta_flat = |f: &Frobenius, phi: PrimaryDifferential| -> DMatrix<C64> {
            let params = match f.covering() {
                Covering::G0(c) => c.params().unwrap(),
                Covering::G1(c) => c.params(),
            };
            let m = params.len();
            let h = 1e-5;
            let mut dt_dp = DMatrix::<C64>::zeros(m, m);
            for j in 0..m {
                let mut plus = params.clone();
                let mut minus = params.clone();
                plus[j] += c(h);
                minus[j] -= c(h);
                let tp = f.refined_to(f.with_params(&plus).unwrap()).unwrap()
                    .flat_coordinates().unwrap();
                let tm = f.refined_to(f.with_params(&minus).unwrap()).unwrap()
                    .flat_coordinates().unwrap();
                for i in 0..m {
                    dt_dp[(i, j)] = (tp[i] - tm[i]) / c(2.0 * h);
                }
            }
            let dl_dp = match f.covering() {
                Covering::G0(cc) => cc.param_jacobian(f.branches()).unwrap(),
                Covering::G1(cc) => cc.param_jacobian(f.theta().unwrap(), f.branches()).unwrap(),
            };
            let a = dl_dp * dt_dp.try_inverse().unwrap();
            let eta = f.metric_coeffs(phi).unwrap();
            DMatrix::from_fn(m, m, |i, j| {
                (0..m).map(|r| a[(r, i)] * eta[r] * a[(r, j)]).sum()
            })
        };

        // laurent k=2, N=5: η(t1,t1) = 1/2, η(t3,t4) = 1/3, η(t2,t5) = 1
        let f = Frobenius::new(Covering::G0(
            CoveringG0::laurent(
                2,
                vec![cx(0.4, 0.3), cx(-0.8, 0.1), cx(0.2, -0.6), cx(1.1, 0.4), cx(0.9, -0.2)],
            )
            .unwrap(),
        ))
        .unwrap();
        let ef = eta_flat(&f, PrimaryDifferential::DzOverZ);
        assert_close(ef[(0, 0)], cx(0.5, 0.0), 1e-6);
        assert_close(ef[(2, 3)], cx(1.0 / 3.0, 0.0), 1e-6);
        assert_close(ef[(1, 4)], cx(1.0, 0.0), 1e-6);
        assert!(ef[(0, 1)].norm() < 1e-6);

        // genus 1 N=2: η(σ, t1) = 1/(2πi), η(t2, t2) = 2 with t2 = h1
        let f = Frobenius::new(Covering::G1(
            CoveringG1::new(cx(0.3, 1.1), cx(0.1, 0.0), vec![cx(0.7, 0.2)]).unwrap(),
        ))
        .unwrap();
        let ef = eta_flat(&f, PrimaryDifferential::Omega);
        assert_close(ef[(0, 1)], cx(0.0, -1.0 / (2.0 * PI)), 1e-6);
        assert_close(ef[(2, 2)], cx(2.0, 0.0), 1e-6);
        assert!(ef[(0, 0)].norm() < 1e-6);
    }
}
