//! Genus-1 branched coverings: elliptic functions with one pole.
//!
//! A point of the space is `λ(z) = c_0 + Σ_{j=2}^{N} c_j ℘^{(j-2)}(z|σ)` on
//! the torus with periods `(1, σ)`, a single pole of order `N` at `z = 0`.
//! The flat coordinate `z` integrates the normalized holomorphic differential
//! (`∫_a dz = 1`), so `ω = dz` is the primary differential of the family.
//!
//! Critical points are found by a grid of Newton starts on `λ'/λ''` over the
//! fundamental domain, local frames are built exactly as in genus 0 from the
//! theta-generated expansion of `λ`, and the torus Bergmann kernel is
//! `-∂_u² ln θ₁(u)|_{u=z-w} dz dw`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::genus0::{branch_record_from_series, BranchData, FRAME_ORDER, JACOBIAN_COND_CAP};
use crate::series::TruncatedSeries;
use crate::theta::ThetaCache;

/// Side length of the Newton-start grid over the fundamental domain.
pub const SEARCH_GRID: usize = 60;

/// Lattice-distance below which two critical points are identified.
pub const DEDUPE_TOL: f64 = 1e-8;

/// Critical points (and integration paths) must stay this far from the pole.
pub const POLE_EXCLUSION: f64 = 1e-6;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A point of the genus-1 Hurwitz space with pole profile `(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringG1 {
    sigma: C64,
    c0: C64,
    /// `c[j] = c_{j+2}`: coefficients of `℘, ℘', ..., ℘^{(N-2)}`.
    c: Vec<C64>,
}

impl CoveringG1 {
    pub fn new(sigma: C64, c0: C64, c: Vec<C64>) -> Result<Self> {
        if sigma.im <= 0.0 {
            return Err(Error::Descriptor("modulus must satisfy Im sigma > 0".into()));
        }
        if c.is_empty() {
            return Err(Error::Descriptor("genus-1 covering needs degree N >= 2".into()));
        }
        if c.last().unwrap().norm() <= 1e-12 {
            return Err(Error::Descriptor("genus-1 covering needs c_N != 0".into()));
        }
        Ok(Self { sigma, c0, c })
    }

    pub fn sigma(&self) -> C64 {
        self.sigma
    }

    pub fn c0(&self) -> C64 {
        self.c0
    }

    pub fn c_coeffs(&self) -> &[C64] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.len() + 1
    }

    /// `M = N + 1` finite branch points.
    pub fn branch_count(&self) -> usize {
        self.degree() + 1
    }

    pub fn theta_cache(&self) -> Result<ThetaCache> {
        ThetaCache::new(self.sigma)
    }

    /// Expansion of `λ(z + u)` in `u` through `O(u^order)`.
    pub fn lambda_series_at(
        &self,
        cache: &ThetaCache,
        z: C64,
        order: i64,
    ) -> Result<TruncatedSeries> {
        let n = self.degree() as i64;
        let wp = cache.wp_series_at(z, order + n)?;
        Ok(self.assemble_lambda(&wp, order))
    }

    /// Laurent expansion of `λ(u)` at the pole `u = 0` through `O(u^order)`.
    pub fn lambda_laurent_at_pole(&self, cache: &ThetaCache, order: i64) -> Result<TruncatedSeries> {
        let n = self.degree() as i64;
        let wp = cache.wp_laurent_at_zero(order + n)?;
        let lam = self.assemble_lambda(&wp, order);
        if lam.valuation() != Some(-n) {
            return Err(Error::Domain("pole order of λ is below the declared degree".into()));
        }
        Ok(lam)
    }

    fn assemble_lambda(&self, wp: &TruncatedSeries, order: i64) -> TruncatedSeries {
        let mut acc = TruncatedSeries::constant(self.c0, wp.trunc_order());
        let mut basis = wp.clone();
        for (j, &cj) in self.c.iter().enumerate() {
            if j > 0 {
                basis = basis.derivative();
            }
            acc = acc.add(&basis.scale(cj));
        }
        acc.truncate_to(order)
    }

    pub fn lambda_at(&self, cache: &ThetaCache, z: C64) -> Result<C64> {
        Ok(self.lambda_series_at(cache, cache.reduce(z), 1)?.coeff(0).unwrap())
    }

    pub fn lambda_prime_at(&self, cache: &ThetaCache, z: C64) -> Result<C64> {
        Ok(self.lambda_series_at(cache, cache.reduce(z), 2)?.coeff(1).unwrap())
    }

    /// Newton iteration on `λ'/λ''` from one start; returns the converged
    /// critical point reduced into the fundamental domain, or `None`.
    fn newton_critical(&self, cache: &ThetaCache, start: C64) -> Option<C64> {
        let mut z = start;
        let mut diverging = 0;
        for _ in 0..40 {
            let zr = cache.reduce(z);
            if zr.norm() < 10.0 * POLE_EXCLUSION {
                return None;
            }
            let ser = self.lambda_series_at(cache, zr, 3).ok()?;
            let lp = ser.coeff(1).unwrap();
            let lpp = ser.coeff(2).unwrap() * c(2.0);
            if lpp.norm() < 1e-13 {
                return None;
            }
            let step = lp / lpp;
            z = zr - step;
            if step.norm() > 0.7 {
                diverging += 1;
                if diverging > 4 {
                    return None;
                }
            }
            if step.norm() < 1e-14 * (1.0 + z.norm()) {
                let z = cache.reduce(z);
                if z.norm() < 10.0 * POLE_EXCLUSION {
                    return None;
                }
                return Some(z);
            }
        }
        None
    }

    /// All `N + 1` critical points with local frames, sorted by `(Re, Im)`
    /// of the critical value.
    pub fn critical_data(&self, cache: &ThetaCache) -> Result<Vec<BranchData>> {
        let expected = self.branch_count();
        let mut found: Vec<C64> = Vec::new();
        'grid: for i in 0..SEARCH_GRID {
            for j in 0..SEARCH_GRID {
                let a = (i as f64 + 0.5) / SEARCH_GRID as f64;
                let b = (j as f64 + 0.5) / SEARCH_GRID as f64;
                let start = c(a) + self.sigma * b - c(0.5) - self.sigma * 0.5;
                if let Some(z) = self.newton_critical(cache, start) {
                    if found
                        .iter()
                        .all(|&w| cache.reduce(z - w).norm() > DEDUPE_TOL)
                    {
                        found.push(z);
                        if found.len() > expected {
                            break 'grid;
                        }
                    }
                }
            }
        }
        if found.len() != expected {
            return Err(Error::SearchFailure(format!(
                "critical-point search found {} points, expected {}",
                found.len(),
                expected
            )));
        }
        let mut records = Vec::with_capacity(expected);
        for z in found {
            let lam = self.lambda_series_at(cache, z, FRAME_ORDER)?;
            records.push(branch_record_from_series(z, &lam, None)?);
        }
        let max_l = records.iter().map(|r| r.lambda.norm()).fold(0.0, f64::max);
        for (i, ri) in records.iter().enumerate() {
            for rj in records.iter().skip(i + 1) {
                if (ri.lambda - rj.lambda).norm() <= 1e-8 * max_l {
                    return Err(Error::NonSimpleStratum(format!(
                        "critical values collide: {} vs {}",
                        ri.lambda, rj.lambda
                    )));
                }
            }
        }
        records.sort_by(|a, b| {
            (a.lambda.re, a.lambda.im)
                .partial_cmp(&(b.lambda.re, b.lambda.im))
                .unwrap()
        });
        Ok(records)
    }

    /// Re-solves critical points from known approximate positions, keeping
    /// order and square-root sheets (for finite-difference oracles).
    pub fn refine_critical_data(
        &self,
        cache: &ThetaCache,
        reference: &[BranchData],
    ) -> Result<Vec<BranchData>> {
        let mut out = Vec::with_capacity(reference.len());
        for r in reference {
            let z = self.newton_critical(cache, r.z).ok_or_else(|| {
                Error::SearchFailure(format!("refinement from {} did not converge", r.z))
            })?;
            let lam = self.lambda_series_at(cache, z, FRAME_ORDER)?;
            out.push(branch_record_from_series(z, &lam, Some(r.dz_dx))?);
        }
        Ok(out)
    }

    /// Frame `z(ζ_1)` at the pole, `ζ_1 = λ^{-1/N}` with the principal root
    /// of the leading Laurent coefficient; constant term 0.
    pub fn infinity_frame(&self, cache: &ThetaCache, order: i64) -> Result<TruncatedSeries> {
        let n = self.degree() as i64;
        let lam = self.lambda_laurent_at_pole(cache, order + 2)?;
        let zeta = lam.pow_rational(-1, n)?;
        zeta.revert()
    }

    /// `h_1 = dz/dζ_1` at the pole.
    pub fn h1(&self, cache: &ThetaCache) -> Result<C64> {
        Ok(self.infinity_frame(cache, 6)?.coeff(1).unwrap())
    }

    /// Integrates `f` along the a-cycle `z_0 -> z_0 + 1` at height
    /// `Im z_0 = Im σ / 2` by composite Gauss-Legendre quadrature.
    pub fn a_cycle_integral<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(C64) -> Result<C64>,
    {
        let z0 = C64::new(0.0, self.sigma.im / 2.0);
        let panels = 8.max((6.0 / self.sigma.im).ceil() as usize);
        let (nodes, weights) = gauss_legendre_16();
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..panels {
            let a = z0 + c(p as f64 / panels as f64);
            let b = z0 + c((p + 1) as f64 / panels as f64);
            let mid = (a + b) / 2.0;
            let half = (b - a) / 2.0;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let z = mid + half * c(*x);
                acc += half * c(*w) * f(z)?;
            }
        }
        Ok(acc)
    }

    /// Flat coordinate `t_1 = ∫_a λ(z) dz`.
    pub fn t1(&self, cache: &ThetaCache) -> Result<C64> {
        // path stays at height Im σ / 2, well away from the pole lattice
        let dist = self.sigma.im / 2.0;
        if dist < POLE_EXCLUSION {
            return Err(Error::PoleOnPath("a-cycle path too close to the pole".into()));
        }
        self.a_cycle_integral(|z| self.lambda_at(cache, z))
    }

    /// Jacobian `∂λ_m/∂p` with parameter order `(σ, c_0, c_2, ..., c_N)`.
    /// Derivatives at fixed critical point (envelope theorem); the σ-column
    /// comes from the exact heat-equation derivative of `℘`.
    pub fn param_jacobian(
        &self,
        cache: &ThetaCache,
        branches: &[BranchData],
    ) -> Result<DMatrix<C64>> {
        let m = branches.len();
        let np = self.c.len() + 2;
        if m != np {
            return Err(Error::Singular("parameter count does not match branch count".into()));
        }
        let mut jac = DMatrix::<C64>::zeros(m, np);
        for (row, rec) in branches.iter().enumerate() {
            let wp = cache.wp_series_at(rec.z, self.c.len() as i64 + 1)?;
            let dwp = cache.dsigma_wp_series_at(rec.z, self.c.len() as i64 + 1)?;
            let mut dsigma = C64::new(0.0, 0.0);
            let mut fact = 1.0;
            for (j, &cj) in self.c.iter().enumerate() {
                // j-th basis function is ℘^{(j)}; series coefficient times j!
                let val = dwp.coeff(j as i64).unwrap() * c(fact);
                dsigma += cj * val;
                jac[(row, j + 2)] = wp.coeff(j as i64).unwrap() * c(fact);
                fact *= (j + 1) as f64;
            }
            jac[(row, 0)] = dsigma;
            jac[(row, 1)] = c(1.0);
        }
        let sv = jac.clone().svd(false, false);
        let smax = sv.singular_values.max();
        let smin = sv.singular_values.min();
        if smin <= 0.0 || !smin.is_finite() || smax / smin > JACOBIAN_COND_CAP {
            return Err(Error::Singular(format!(
                "parameter Jacobian condition number {:.3e} exceeds cap",
                smax / smin
            )));
        }
        Ok(jac)
    }

    /// Parameter vector `(σ, c_0, c_2, ..., c_N)`.
    pub fn params(&self) -> Vec<C64> {
        let mut p = Vec::with_capacity(self.c.len() + 2);
        p.push(self.sigma);
        p.push(self.c0);
        p.extend_from_slice(&self.c);
        p
    }

    pub fn with_params(&self, params: &[C64]) -> Result<Self> {
        if params.len() != self.c.len() + 2 {
            return Err(Error::Domain("parameter count mismatch".into()));
        }
        Self::new(params[0], params[1], params[2..].to_vec())
    }
}

/// Torus Bergmann kernel at two branch points:
/// `b_mn = -∂_u² ln θ₁(z_m - z_n) (dz/dx_m)(dz/dx_n)`.
pub fn bergmann_value_g1(
    cache: &ThetaCache,
    branches: &[BranchData],
    m: usize,
    n: usize,
) -> Result<C64> {
    if m == n {
        return Err(Error::Domain(
            "diagonal kernel value is singular; use the projective connection".into(),
        ));
    }
    let bm = &branches[m];
    let bn = &branches[n];
    Ok(-cache.log_theta1_dd(bm.z - bn.z)? * bm.dz_dx * bn.dz_dx)
}

/// `S_B(x_m)` at `x_m = 0` on the torus: the flat-chart kernel constant
/// transforms with the frame plus the frame's own Schwarzian.
pub fn proj_connection_g1(cache: &ThetaCache, branches: &[BranchData], m: usize) -> Result<C64> {
    let rec = &branches[m];
    let schw = rec.frame.schwarzian_at_zero()?;
    Ok(cache.sb_flat_chart() * rec.dz_dx * rec.dz_dx + schw)
}

/// 16-point Gauss-Legendre nodes and weights on `[-1, 1]`, computed by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_16() -> (Vec<f64>, Vec<f64>) {
    let n = 16usize;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..60 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::eisenstein_g2_g3;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b} (|diff| = {:.3e})", (a - b).norm());
    }

    fn square_lattice_n2() -> (CoveringG1, ThetaCache) {
        let cov = CoveringG1::new(cx(0.0, 1.0), cx(0.0, 0.0), vec![cx(1.0, 0.0)]).unwrap();
        let cache = cov.theta_cache().unwrap();
        (cov, cache)
    }

    #[test]
    fn n2_critical_points_are_half_periods() {
        let (cov, cache) = square_lattice_n2();
        let recs = cov.critical_data(&cache).unwrap();
        assert_eq!(recs.len(), 3);
        // λ_m = e_i; lemniscatic values -e1, 0, e1
        let e1 = 6.875185818020373;
        assert_close(recs[0].lambda, cx(-e1, 0.0), 1e-8);
        assert_close(recs[1].lambda, cx(0.0, 0.0), 1e-8);
        assert_close(recs[2].lambda, cx(e1, 0.0), 1e-8);
        // positions are the half-periods (mod lattice)
        let hp = [cx(0.0, 0.5), cx(0.5, 0.5), cx(0.5, 0.0)];
        for (r, h) in recs.iter().zip(hp.iter()) {
            assert!(cache.reduce(r.z - h).norm() < 1e-9, "{} vs {}", r.z, h);
        }
        // λ''(z_m) = ℘''(half-period) = 2(e_i - e_j)(e_i - e_k)
        let es = [-e1, 0.0, e1];
        for (i, r) in recs.iter().enumerate() {
            let (ej, ek) = match i {
                0 => (es[1], es[2]),
                1 => (es[0], es[2]),
                _ => (es[0], es[1]),
            };
            let want = 2.0 * (es[i] - ej) * (es[i] - ek);
            assert_close(r.lambda_pp, cx(want, 0.0), 1e-6);
        }
    }

    #[test]
    fn critical_count_matches_degree() {
        // N = 3 generic covering: exactly 4 critical points
        let cov = CoveringG1::new(
            cx(0.21, 0.93),
            cx(0.3, -0.2),
            vec![cx(0.8, 0.4), cx(-0.5, 0.9)],
        )
        .unwrap();
        let cache = cov.theta_cache().unwrap();
        let recs = cov.critical_data(&cache).unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            assert!(cov.lambda_prime_at(&cache, r.z).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn frame_defect_is_small() {
        let cov = CoveringG1::new(cx(0.13, 1.21), cx(0.1, 0.2), vec![cx(1.1, -0.3)]).unwrap();
        let cache = cov.theta_cache().unwrap();
        for r in cov.critical_data(&cache).unwrap() {
            let lam = cov.lambda_series_at(&cache, r.z, FRAME_ORDER).unwrap();
            let centered =
                lam.sub(&TruncatedSeries::constant(r.lambda, lam.trunc_order()));
            let u = r
                .frame
                .sub(&TruncatedSeries::constant(r.z, r.frame.trunc_order()));
            let comp = TruncatedSeries::compose(&centered, &u).unwrap();
            let target = TruncatedSeries::monomial(2, cx(1.0, 0.0), comp.trunc_order());
            assert!(comp.sub(&target).max_abs_coeff() < 1e-8);
        }
    }

    #[test]
    fn argument_principle_confirms_zero_count() {
        // ∮ λ''/λ' around a fundamental parallelogram equals
        // 2πi (zeros - poles) of λ'; both counts are N + 1.
        let cov = CoveringG1::new(cx(0.21, 0.93), cx(0.0, 0.0), vec![cx(0.8, 0.4), cx(-0.5, 0.9)])
            .unwrap();
        let cache = cov.theta_cache().unwrap();
        let z0 = cx(-0.131, 0.0) + cov.sigma() * (-0.273);
        let (nodes, weights) = gauss_legendre_16();
        let corners = [z0, z0 + cx(1.0, 0.0), z0 + cx(1.0, 0.0) + cov.sigma(), z0 + cov.sigma()];
        let mut acc = cx(0.0, 0.0);
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            let panels = 24;
            for p in 0..panels {
                let pa = a + (b - a) * (p as f64 / panels as f64);
                let pb = a + (b - a) * ((p + 1) as f64 / panels as f64);
                let mid = (pa + pb) / 2.0;
                let half = (pb - pa) / 2.0;
                for (x, w) in nodes.iter().zip(weights.iter()) {
                    let z = mid + half * cx(*x, 0.0);
                    let ser = cov.lambda_series_at(&cache, z, 3).unwrap();
                    let lp = ser.coeff(1).unwrap();
                    let lpp = ser.coeff(2).unwrap() * cx(2.0, 0.0);
                    acc += half * cx(*w, 0.0) * lpp / lp;
                }
            }
        }
        let winding = acc / cx(0.0, 2.0 * std::f64::consts::PI);
        assert!((winding).norm() < 1e-6, "zeros - poles = {winding}");
    }

    #[test]
    fn a_cycle_integrals() {
        let cov = CoveringG1::new(cx(0.17, 0.83), cx(0.0, 0.0), vec![cx(1.0, 0.0)]).unwrap();
        let cache = cov.theta_cache().unwrap();
        // ∫ dz = 1
        let one = cov.a_cycle_integral(|_| Ok(cx(1.0, 0.0))).unwrap();
        assert_close(one, cx(1.0, 0.0), 1e-13);
        // ∫ ℘' dz = 0 (exact derivative of an elliptic function)
        let dwp = cov.a_cycle_integral(|z| cache.wp(z, 1)).unwrap();
        assert!(dwp.norm() < 1e-10);
        // ∫ ℘ dz = -2 η₁
        let wp = cov.a_cycle_integral(|z| cache.wp(z, 0)).unwrap();
        assert_close(wp, -cx(2.0, 0.0) * cache.eta1(), 1e-10);
    }

    #[test]
    fn h1_and_pole_frame() {
        let (cov, cache) = square_lattice_n2();
        // N=2, c2=1: leading Laurent coefficient of λ is 1, so h1 = 1
        assert_close(cov.h1(&cache).unwrap(), cx(1.0, 0.0), 1e-12);

        // |h1|^N = (N-1)! |c_N| in general
        let cov = CoveringG1::new(cx(0.21, 0.93), cx(0.3, -0.2), vec![cx(0.8, 0.4), cx(-0.5, 0.9)])
            .unwrap();
        let cache = cov.theta_cache().unwrap();
        let n = cov.degree() as i32;
        let h1 = cov.h1(&cache).unwrap();
        let want = 2.0 * cov.c_coeffs().last().unwrap().norm();
        assert!((h1.norm().powi(n) - want).abs() < 1e-8 * want);

        // the frame satisfies λ(z(ζ)) = ζ^{-N} through the window
        let frame = cov.infinity_frame(&cache, 10).unwrap();
        let lam = cov.lambda_laurent_at_pole(&cache, 12).unwrap();
        let comp = TruncatedSeries::compose(&lam, &frame).unwrap();
        let target = TruncatedSeries::monomial(-n as i64, cx(1.0, 0.0), comp.trunc_order());
        assert!(comp.sub(&target).max_abs_coeff() < 1e-8);
    }

    #[test]
    fn bergmann_kernel_properties() {
        let cov = CoveringG1::new(cx(0.13, 1.21), cx(0.1, 0.2), vec![cx(1.1, -0.3)]).unwrap();
        let cache = cov.theta_cache().unwrap();
        let recs = cov.critical_data(&cache).unwrap();
        // symmetry
        let b01 = bergmann_value_g1(&cache, &recs, 0, 1).unwrap();
        let b10 = bergmann_value_g1(&cache, &recs, 1, 0).unwrap();
        assert_close(b01, b10, 1e-12 * b01.norm());
        assert!(bergmann_value_g1(&cache, &recs, 2, 2).is_err());

        // vanishing a-period: ∫_0^1 -∂² ln θ₁(z - w) dz = 0 for fixed w
        let w = cx(0.23, -0.11);
        let (nodes, weights) = gauss_legendre_16();
        let z0 = w + cx(0.0, cov.sigma().im / 2.0);
        let mut acc = cx(0.0, 0.0);
        let panels = 16;
        for p in 0..panels {
            let a = z0 + cx(p as f64 / panels as f64, 0.0);
            let b = z0 + cx((p + 1) as f64 / panels as f64, 0.0);
            let mid = (a + b) / 2.0;
            let half = (b - a) / 2.0;
            for (x, wt) in nodes.iter().zip(weights.iter()) {
                let z = mid + half * cx(*x, 0.0);
                acc += half * cx(*wt, 0.0) * (-cache.log_theta1_dd(z - w).unwrap());
            }
        }
        assert!(acc.norm() < 1e-8, "a-period of the kernel: {acc}");
    }

    #[test]
    fn diagonal_kernel_expansion_matches_projective_connection() {
        // fit H from b_mm(x, y) - 1/(x-y)^2 along the frame; 6H -> S_B(x_m)
        let cov = CoveringG1::new(cx(0.13, 1.21), cx(0.1, 0.2), vec![cx(1.1, -0.3)]).unwrap();
        let cache = cov.theta_cache().unwrap();
        let recs = cov.critical_data(&cache).unwrap();
        for m in 0..recs.len() {
            let want = proj_connection_g1(&cache, &recs, m).unwrap();
            let rec = &recs[m];
            let fit = |eps: f64| {
                let x = cx(eps, 0.7 * eps);
                let y = -x;
                let zx = rec.frame.eval(x);
                let zy = rec.frame.eval(y);
                let dzx = rec
                    .frame
                    .derivative()
                    .eval(x);
                let dzy = rec.frame.derivative().eval(y);
                let kernel = -cache.log_theta1_dd(zx - zy).unwrap() * dzx * dzy;
                (kernel - cx(1.0, 0.0) / ((x - y) * (x - y))) * cx(6.0, 0.0)
            };
            // Richardson in eps^2
            let f1 = fit(1e-2);
            let f2 = fit(5e-3);
            let extrap = (cx(4.0, 0.0) * f2 - f1) / cx(3.0, 0.0);
            assert_close(extrap, want, 1e-6 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn param_jacobian_structure_and_fd() {
        let (cov, cache) = square_lattice_n2();
        let recs = cov.critical_data(&cache).unwrap();
        let jac = cov.param_jacobian(&cache, &recs).unwrap();
        // ∂λ_m/∂c_0 = 1, ∂λ_m/∂c_2 = e_i = λ_m here (c0 = 0, c2 = 1)
        for m in 0..3 {
            assert_close(jac[(m, 1)], cx(1.0, 0.0), 1e-12);
            assert_close(jac[(m, 2)], recs[m].lambda, 1e-8);
        }

        // full matrix against brute finite differences on re-solved points
        let cov = CoveringG1::new(cx(0.21, 0.93), cx(0.3, -0.2), vec![cx(0.8, 0.4), cx(-0.5, 0.9)])
            .unwrap();
        let cache = cov.theta_cache().unwrap();
        let recs = cov.critical_data(&cache).unwrap();
        let jac = cov.param_jacobian(&cache, &recs).unwrap();
        let params = cov.params();
        let h = 1e-5;
        for jp in 0..params.len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[jp] += cx(h, 0.0);
            minus[jp] -= cx(h, 0.0);
            let cp = cov.with_params(&plus).unwrap();
            let cm = cov.with_params(&minus).unwrap();
            let rp = cp.refine_critical_data(&cp.theta_cache().unwrap(), &recs).unwrap();
            let rm = cm.refine_critical_data(&cm.theta_cache().unwrap(), &recs).unwrap();
            for m in 0..recs.len() {
                let fd = (rp[m].lambda - rm[m].lambda) / cx(2.0 * h, 0.0);
                let want = jac[(m, jp)];
                assert!(
                    (fd - want).norm() <= 1e-5 * (1.0 + want.norm()),
                    "col {jp} row {m}: fd {fd} vs {want}"
                );
            }
        }
    }

    #[test]
    fn n2_lambda_pp_cross_checked_by_eisenstein() {
        // λ'' at the half-periods vs the e_i from the quartic resolvent
        let (cov, cache) = square_lattice_n2();
        let recs = cov.critical_data(&cache).unwrap();
        let (g2, g3) = eisenstein_g2_g3(cov.sigma());
        for r in &recs {
            let e = r.lambda; // c0 = 0, c2 = 1
            // 4e^3 - g2 e - g3 = 0
            let res = cx(4.0, 0.0) * e * e * e - g2 * e - g3;
            assert!(res.norm() < 1e-6, "resolvent residual {res}");
        }
        let _ = g3;
    }
}
