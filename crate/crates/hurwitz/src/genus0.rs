//! Genus-0 branched coverings of the sphere.
//!
//! A covering is an explicit rational map `λ(z)` of degree `N` with simple
//! finite critical points and prescribed pole orders over infinity:
//!
//! * polynomial: `λ = z^N + a_2 z^{N-2} + ... + a_N` (one pole of order `N`),
//! * Laurent: `λ = z^k + b_1 z^{k-1} + ... + b_N / z^{N-k}`, `b_N != 0`
//!   (poles of order `k` at `z = ∞` and `N-k` at `z = 0`),
//! * rational: `λ = P(z)/Q(z)` with an arbitrary pole profile
//!   `(k_1, ..., k_l)`, the `z`-chart normalized so that
//!   `z = λ^{1/k_1} + O(1)` at the first pole.
//!
//! The module computes critical points and values, the local frames
//! `z(x_m)` with `x_m = (λ - λ_m)^{1/2}`, the frames `z(ζ_s)` with
//! `ζ_s = λ^{-1/k_s}` at the remaining poles, the rational Bergmann kernel at
//! pairs of branch points, and the Jacobian between coefficients and critical
//! values.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Window size used for local expansions; frames keep a few orders of margin
/// over the four coefficients the Schwarzian needs.
pub const FRAME_ORDER: i64 = 16;

/// Polished critical points must satisfy `|λ'(z_m)|` below this.
pub const CRIT_RESIDUAL_TOL: f64 = 1e-10;

/// Pairwise critical values must be separated by `1e-8 * max |λ_m|`.
pub const COLLISION_REL_TOL: f64 = 1e-8;

/// Condition-number cap for parameter Jacobians.
pub const JACOBIAN_COND_CAP: f64 = 1e10;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A point of a genus-0 Hurwitz space as an explicit rational map.
#[derive(Clone, Debug, PartialEq)]
pub enum CoveringG0 {
    /// `z^N + a[0] z^{N-2} + a[1] z^{N-3} + ... + a[N-2]` (that is `a_2..a_N`).
    Polynomial { a: Vec<C64> },
    /// `z^k + b[0] z^{k-1} + ... + b[N-1] z^{k-N}` (that is `b_1..b_N`).
    Laurent { k: usize, b: Vec<C64> },
    /// `num(z)/den(z)` with ascending coefficients and pole profile
    /// `(k_1, ..., k_l)`; `k_1` is the pole order at `z = ∞`.
    Rational {
        pole_profile: Vec<usize>,
        num: Vec<C64>,
        den: Vec<C64>,
    },
}

/// Per-critical-point record: position, critical value, local frame.
#[derive(Clone, Debug)]
pub struct BranchData {
    /// Critical point `z_m`.
    pub z: C64,
    /// Critical value `λ_m = λ(z_m)`.
    pub lambda: C64,
    /// `λ''(z_m)` (nonzero on the simple stratum).
    pub lambda_pp: C64,
    /// Frame `z(x_m)` as a series in `x_m = (λ - λ_m)^{1/2}`, constant term `z_m`.
    pub frame: TruncatedSeries,
    /// `dz/dx_m` at `x_m = 0`.
    pub dz_dx: C64,
}

impl BranchData {
    /// Switches to the other sheet of `x_m`, i.e. `x_m -> -x_m`.
    pub fn flip_sheet(&mut self) {
        let t = self.frame.trunc_order();
        let lo = self.frame.lowest_exponent();
        let mut coeffs = Vec::with_capacity((t - lo) as usize);
        for e in lo..t {
            let cf = self.frame.coeff(e).unwrap();
            coeffs.push(if e % 2 == 0 { cf } else { -cf });
        }
        self.frame = TruncatedSeries::from_coeffs(lo, &coeffs);
        self.dz_dx = -self.dz_dx;
    }
}

// ---------------------------------------------------------------------------
// dense polynomial helpers (ascending coefficients)
// ---------------------------------------------------------------------------

pub(crate) fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &cf in coeffs.iter().rev() {
        acc = acc * z + cf;
    }
    acc
}

pub(crate) fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, cf)| cf * c(i as f64))
        .collect()
}

/// Taylor coefficients of the polynomial at `z0`, through order `order - 1`.
pub(crate) fn poly_taylor(coeffs: &[C64], z0: C64, order: usize) -> Vec<C64> {
    // repeated synthetic division by (z - z0)
    let mut work = coeffs.to_vec();
    let mut out = Vec::with_capacity(order);
    for _ in 0..order {
        if work.is_empty() {
            out.push(C64::new(0.0, 0.0));
            continue;
        }
        let mut rem = C64::new(0.0, 0.0);
        for cf in work.iter_mut().rev() {
            rem = rem * z0 + *cf;
            *cf = rem;
        }
        // after the loop work[i] holds the quotient shifted by one; work[0] is
        // the remainder
        let r = work.remove(0);
        out.push(r);
    }
    out
}

fn poly_degree(coeffs: &[C64], tol: f64) -> usize {
    let mut d = coeffs.len();
    while d > 0 && coeffs[d - 1].norm() <= tol {
        d -= 1;
    }
    d.saturating_sub(1)
}

/// All roots of a dense complex polynomial by companion-matrix eigenvalues
/// followed by Newton polish.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = poly_degree(coeffs, 0.0);
    let lead = coeffs[deg];
    if lead.norm() < 1e-13 {
        return Err(Error::Singular("polynomial leading coefficient vanishes".into()));
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let mut roots = if deg == 1 {
        vec![-coeffs[0] / coeffs[1]]
    } else {
        let mut m = DMatrix::<C64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = c(1.0);
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -coeffs[i] / lead;
        }
        let eig = m
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::SearchFailure("companion eigenvalue iteration failed".into()))?;
        eig.iter().copied().collect::<Vec<_>>()
    };
    let deriv = poly_derivative(&coeffs[..=deg]);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let dp = poly_eval(&deriv, *r);
            if dp.norm() < 1e-300 {
                break;
            }
            *r -= poly_eval(&coeffs[..=deg], *r) / dp;
        }
    }
    Ok(roots)
}

// ---------------------------------------------------------------------------
// the covering
// ---------------------------------------------------------------------------

impl CoveringG0 {
    pub fn polynomial(a: Vec<C64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Descriptor("polynomial covering needs degree >= 2".into()));
        }
        Ok(Self::Polynomial { a })
    }

    pub fn laurent(k: usize, b: Vec<C64>) -> Result<Self> {
        let n = b.len();
        if k == 0 || k >= n {
            return Err(Error::Descriptor(format!(
                "laurent covering needs 1 <= k < N, got k={k}, N={n}"
            )));
        }
        if b[n - 1].norm() <= 1e-12 {
            return Err(Error::Descriptor("laurent covering needs b_N != 0".into()));
        }
        Ok(Self::Laurent { k, b })
    }

    pub fn rational(pole_profile: Vec<usize>, num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        let cov = Self::Rational { pole_profile, num, den };
        cov.validate_rational()?;
        Ok(cov)
    }

    /// Degree of the covering map.
    pub fn degree(&self) -> usize {
        match self {
            Self::Polynomial { a } => a.len() + 1,
            Self::Laurent { b, .. } => b.len(),
            Self::Rational { num, .. } => poly_degree(num, 0.0),
        }
    }

    /// Pole profile `(k_1, ..., k_l)` over infinity.
    pub fn pole_profile(&self) -> Vec<usize> {
        match self {
            Self::Polynomial { a } => vec![a.len() + 1],
            Self::Laurent { k, b } => vec![*k, b.len() - k],
            Self::Rational { pole_profile, .. } => pole_profile.clone(),
        }
    }

    /// Number of simple finite branch points `M = l + N - 2`.
    pub fn branch_count(&self) -> usize {
        self.pole_profile().len() + self.degree() - 2
    }

    /// `λ = P/Q` as ascending-coefficient polynomials.
    fn as_fraction(&self) -> (Vec<C64>, Vec<C64>) {
        match self {
            Self::Polynomial { a } => {
                let n = a.len() + 1;
                let mut p = vec![C64::new(0.0, 0.0); n + 1];
                p[n] = c(1.0);
                for (j, &aj) in a.iter().enumerate() {
                    // a[j] = a_{j+2}, coefficient of z^{n-j-2}
                    p[n - j - 2] = aj;
                }
                (p, vec![c(1.0)])
            }
            Self::Laurent { k, b } => {
                let n = b.len();
                let mut p = vec![C64::new(0.0, 0.0); n + 1];
                p[n] = c(1.0);
                for (j, &bj) in b.iter().enumerate() {
                    // b[j] = b_{j+1}, coefficient of z^{n-j-1} in P
                    p[n - j - 1] = bj;
                }
                let mut q = vec![C64::new(0.0, 0.0); n - k + 1];
                q[n - k] = c(1.0);
                (p, q)
            }
            Self::Rational { num, den, .. } => (num.clone(), den.clone()),
        }
    }

    fn validate_rational(&self) -> Result<()> {
        let Self::Rational { pole_profile, num, den } = self else {
            return Ok(());
        };
        if pole_profile.is_empty() {
            return Err(Error::Descriptor("empty pole profile".into()));
        }
        let n: usize = pole_profile.iter().sum();
        let k1 = pole_profile[0];
        if poly_degree(num, 1e-13) != n {
            return Err(Error::Descriptor(format!(
                "numerator degree must equal N = {n}"
            )));
        }
        if poly_degree(den, 1e-13) != n - k1 {
            return Err(Error::Descriptor(format!(
                "denominator degree must equal N - k_1 = {}",
                n - k1
            )));
        }
        let ratio = num[poly_degree(num, 1e-13)] / den[poly_degree(den, 1e-13)];
        if (ratio - c(1.0)).norm() > 1e-9 {
            return Err(Error::Descriptor(
                "normalization requires lead(num)/lead(den) = 1".into(),
            ));
        }
        // den must factor into the finite poles with multiplicities k_2..k_l
        let mut expected: Vec<usize> = pole_profile[1..].to_vec();
        let clusters = cluster_points(&poly_roots(den)?, 1e-6);
        let mut got: Vec<usize> = clusters.iter().map(|(_, m)| *m).collect();
        expected.sort_unstable();
        got.sort_unstable();
        if expected != got {
            return Err(Error::Descriptor(format!(
                "denominator root multiplicities {got:?} do not match pole profile {expected:?}"
            )));
        }
        Ok(())
    }

    /// Finite poles `(position, order)` sorted by `(Re, Im)`; these are
    /// `∞_2, ..., ∞_l`.  The polynomial kind has none.
    pub fn finite_poles(&self) -> Result<Vec<(C64, usize)>> {
        match self {
            Self::Polynomial { .. } => Ok(Vec::new()),
            Self::Laurent { k, b } => Ok(vec![(C64::new(0.0, 0.0), b.len() - k)]),
            Self::Rational { den, .. } => {
                let mut poles = cluster_points(&poly_roots(den)?, 1e-6);
                poles.sort_by(|a, b| complex_key(a.0).partial_cmp(&complex_key(b.0)).unwrap());
                Ok(poles)
            }
        }
    }

    /// `λ(z)`.
    pub fn lambda_at(&self, z: C64) -> C64 {
        let (p, q) = self.as_fraction();
        poly_eval(&p, z) / poly_eval(&q, z)
    }

    /// `λ'(z)`.
    pub fn lambda_prime_at(&self, z: C64) -> C64 {
        let (p, q) = self.as_fraction();
        let pv = poly_eval(&p, z);
        let qv = poly_eval(&q, z);
        let dpv = poly_eval(&poly_derivative(&p), z);
        let dqv = poly_eval(&poly_derivative(&q), z);
        (dpv * qv - pv * dqv) / (qv * qv)
    }

    /// Local expansion `λ(z0 + u)` as a series in `u` (constant term `λ(z0)`).
    pub fn lambda_series_at(&self, z0: C64, order: i64) -> Result<TruncatedSeries> {
        let (p, q) = self.as_fraction();
        let pt = TruncatedSeries::from_coeffs(0, &poly_taylor(&p, z0, order as usize));
        let qt = TruncatedSeries::from_coeffs(0, &poly_taylor(&q, z0, order as usize));
        pt.div(&qt)
    }

    /// Laurent expansion of `λ` around a finite pole `(pos, order k_s)`.
    fn lambda_laurent_at_pole(&self, pos: C64, ks: usize, order: i64) -> Result<TruncatedSeries> {
        let (p, q) = self.as_fraction();
        let window = order as usize + ks + 2;
        let pt = TruncatedSeries::from_coeffs(0, &poly_taylor(&p, pos, window));
        let qt = TruncatedSeries::from_coeffs(0, &poly_taylor(&q, pos, window));
        let lam = pt.div(&qt)?;
        if lam.valuation() != Some(-(ks as i64)) {
            return Err(Error::Domain(format!(
                "pole at {pos} does not have the declared order {ks}"
            )));
        }
        Ok(lam)
    }

    /// The polynomial whose roots are the finite critical points.
    fn critical_polynomial(&self) -> Vec<C64> {
        match self {
            Self::Polynomial { .. } => {
                let (p, _) = self.as_fraction();
                poly_derivative(&p)
            }
            Self::Laurent { k, b } => {
                // z^{N-k+1} λ' = P' z - (N-k) P with λ = P / z^{N-k}
                let (p, _) = self.as_fraction();
                let nk = (b.len() - k) as f64;
                p.iter()
                    .enumerate()
                    .map(|(i, cf)| cf * c(i as f64 - nk))
                    .collect()
            }
            Self::Rational { num, den, .. } => {
                let dp = poly_derivative(num);
                let dq = poly_derivative(den);
                let a = poly_mul(&dp, den);
                let b = poly_mul(num, &dq);
                poly_sub(&a, &b)
            }
        }
    }

    /// Critical points with local frames, sorted by `(Re, Im)` of the
    /// critical value.
    pub fn critical_data(&self) -> Result<Vec<BranchData>> {
        let crit = self.critical_polynomial();
        let mut roots = poly_roots(&crit)?;
        if let Self::Rational { .. } = self {
            // drop the spurious roots sitting at the finite poles
            let poles = self.finite_poles()?;
            roots.retain(|r| {
                poles
                    .iter()
                    .all(|(p, _)| (r - p).norm() > 1e-5 * (1.0 + p.norm()))
            });
        }
        let m_expected = self.branch_count();
        if roots.len() != m_expected {
            return Err(Error::NonSimpleStratum(format!(
                "found {} finite critical points, expected {}",
                roots.len(),
                m_expected
            )));
        }
        let mut records = Vec::with_capacity(roots.len());
        for z in roots {
            records.push(self.branch_record(z, None)?);
        }
        // simplicity of the stratum: polished derivative residuals and
        // pairwise-distinct critical values
        let max_l = records.iter().map(|r| r.lambda.norm()).fold(0.0, f64::max);
        for (i, ri) in records.iter().enumerate() {
            if self.lambda_prime_at(ri.z).norm() > CRIT_RESIDUAL_TOL {
                return Err(Error::NonSimpleStratum(format!(
                    "critical point {} did not converge",
                    ri.z
                )));
            }
            for rj in records.iter().skip(i + 1) {
                if (ri.lambda - rj.lambda).norm() <= COLLISION_REL_TOL * max_l {
                    return Err(Error::NonSimpleStratum(format!(
                        "critical values collide: {} vs {}",
                        ri.lambda, rj.lambda
                    )));
                }
            }
        }
        records.sort_by(|a, b| complex_key(a.lambda).partial_cmp(&complex_key(b.lambda)).unwrap());
        Ok(records)
    }

    /// Builds one branch record at a known critical point.  When `sheet_ref`
    /// is given, the square-root sheet of the frame is chosen to keep
    /// `dz/dx_m` close to it (used for continuation under small parameter
    /// perturbations); otherwise the principal branch of `(λ''/2)^{1/2}`.
    pub fn branch_record(&self, z: C64, sheet_ref: Option<C64>) -> Result<BranchData> {
        let lam = self.lambda_series_at(z, FRAME_ORDER)?;
        branch_record_from_series(z, &lam, sheet_ref)
    }

    /// Re-solves the critical points from known approximate positions,
    /// preserving order and square-root sheets.  Used by finite-difference
    /// oracles where the global search would lose the pairing.
    pub fn refine_critical_data(&self, reference: &[BranchData]) -> Result<Vec<BranchData>> {
        let crit = self.critical_polynomial();
        let deriv = poly_derivative(&crit);
        let mut out = Vec::with_capacity(reference.len());
        for r in reference {
            let mut z = r.z;
            for _ in 0..40 {
                let f = poly_eval(&crit, z);
                let df = poly_eval(&deriv, z);
                if df.norm() < 1e-300 {
                    return Err(Error::SearchFailure("Newton derivative vanished".into()));
                }
                let step = f / df;
                z -= step;
                if step.norm() < 1e-14 * (1.0 + z.norm()) {
                    break;
                }
            }
            if self.lambda_prime_at(z).norm() > CRIT_RESIDUAL_TOL {
                return Err(Error::SearchFailure(format!(
                    "refinement from {} did not converge",
                    r.z
                )));
            }
            out.push(self.branch_record(z, Some(r.dz_dx))?);
        }
        Ok(out)
    }

    /// Frame `z(ζ_s)` at the pole `∞_s`, `2 <= s <= l`, with
    /// `ζ_s = λ^{-1/k_s}`.  The constant term is the pole position.
    pub fn infinity_frame(&self, s: usize, order: i64) -> Result<TruncatedSeries> {
        let poles = self.finite_poles()?;
        if s < 2 || s > poles.len() + 1 {
            return Err(Error::Domain(format!(
                "pole index s = {s} out of range 2..={}",
                poles.len() + 1
            )));
        }
        let (pos, ks) = poles[s - 2];
        let lam = self.lambda_laurent_at_pole(pos, ks, order + 2)?;
        let zeta = lam.pow_rational(-1, ks as i64)?;
        let u_of_zeta = zeta.revert()?;
        Ok(TruncatedSeries::constant(pos, u_of_zeta.trunc_order()).add(&u_of_zeta))
    }

    /// `dz/dζ_s` at `ζ_s = 0` for every `s >= 2`, paired with `k_s`.
    pub fn h_factors(&self) -> Result<Vec<(usize, C64)>> {
        let poles = self.finite_poles()?;
        let mut out = Vec::with_capacity(poles.len());
        for (i, (_, ks)) in poles.iter().enumerate() {
            let frame = self.infinity_frame(i + 2, 6)?;
            out.push((*ks, frame.coeff(1).unwrap()));
        }
        Ok(out)
    }

    /// Jacobian `∂λ_m/∂p_j` of critical values with respect to the
    /// coefficient chart (envelope theorem: only the explicit dependence
    /// survives at a critical point).
    pub fn param_jacobian(&self, branches: &[BranchData]) -> Result<DMatrix<C64>> {
        let m = branches.len();
        let jac = match self {
            Self::Polynomial { a } => {
                let n = a.len() + 1;
                DMatrix::from_fn(m, a.len(), |row, col| {
                    // parameter a_{col+2} multiplies z^{n-col-2}
                    branches[row].z.powi((n - col - 2) as i32)
                })
            }
            Self::Laurent { k, b } => {
                let kk = *k as i32;
                DMatrix::from_fn(m, b.len(), |row, col| {
                    // parameter b_{col+1} multiplies z^{k-col-1}
                    branches[row].z.powi(kk - col as i32 - 1)
                })
            }
            Self::Rational { .. } => {
                return Err(Error::Domain(
                    "rational kind has no canonical coefficient chart".into(),
                ))
            }
        };
        if jac.nrows() != jac.ncols() {
            return Err(Error::Singular("parameter count does not match branch count".into()));
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

    /// Raw parameter vector (the coefficient chart used by the Jacobian).
    pub fn params(&self) -> Result<Vec<C64>> {
        match self {
            Self::Polynomial { a } => Ok(a.clone()),
            Self::Laurent { b, .. } => Ok(b.clone()),
            Self::Rational { .. } => {
                Err(Error::Domain("rational kind has no canonical coefficient chart".into()))
            }
        }
    }

    /// Same covering with a replaced parameter vector.
    pub fn with_params(&self, params: &[C64]) -> Result<Self> {
        match self {
            Self::Polynomial { .. } => Self::polynomial(params.to_vec()),
            Self::Laurent { k, .. } => Self::laurent(*k, params.to_vec()),
            Self::Rational { .. } => {
                Err(Error::Domain("rational kind has no canonical coefficient chart".into()))
            }
        }
    }
}

/// Builds a branch record from the local expansion of `λ` at a critical
/// point (genus-agnostic: genus 1 feeds theta-built expansions here).
pub(crate) fn branch_record_from_series(
    z: C64,
    lam: &TruncatedSeries,
    sheet_ref: Option<C64>,
) -> Result<BranchData> {
    let lambda_m = lam.coeff(0).unwrap();
    let centered = lam.sub(&TruncatedSeries::constant(lambda_m, lam.trunc_order()));
    // the linear coefficient is Newton residue; it must be noise relative to
    // λ'' before we declare the point a simple critical point
    let scale = centered.max_abs_coeff().max(1e-300);
    let c1 = centered.coeff(1).unwrap_or_default();
    let c2 = centered.coeff(2).unwrap_or_default();
    if c2.norm() < 1e-10 * scale || c1.norm() > 1e-7 * c2.norm() {
        return Err(Error::NonSimpleStratum(format!(
            "critical point at {z} is degenerate (λ'' = 0 or λ' != 0)"
        )));
    }
    let coeffs: Vec<C64> = (2..centered.trunc_order())
        .map(|e| centered.coeff(e).unwrap())
        .collect();
    let centered = TruncatedSeries::from_coeffs(2, &coeffs);
    let lambda_pp = c2 * c(2.0);
    let x_of_u = centered.pow_rational(1, 2)?;
    let u_of_x = x_of_u.revert()?;
    let mut rec = BranchData {
        z,
        lambda: lambda_m,
        lambda_pp,
        dz_dx: u_of_x.coeff(1).unwrap(),
        frame: TruncatedSeries::constant(z, u_of_x.trunc_order()).add(&u_of_x),
    };
    // sheet convention: dz/dx_m = principal (2/λ'')^{1/2}, unless a
    // reference value asks for the continued sheet.  Values sitting on
    // the branch cut up to roundoff are snapped to the upper edge so the
    // sheet does not depend on the noise of the root polish.
    let target = sheet_ref.unwrap_or_else(|| {
        let mut w = c(2.0) / lambda_pp;
        if w.im.abs() < 1e-12 * w.re.abs() {
            w = C64::new(w.re, 0.0);
        }
        w.sqrt()
    });
    if (-rec.dz_dx - target).norm() < (rec.dz_dx - target).norm() {
        rec.flip_sheet();
    }
    Ok(rec)
}

/// `b_mn(P_m, P_n)` of the rational kernel: the kernel
/// `dz dz'/(z - z')^2` written in the branch-point frames.
pub fn bergmann_value(branches: &[BranchData], m: usize, n: usize) -> Result<C64> {
    if m == n {
        return Err(Error::Domain(
            "diagonal kernel value is singular; use the projective connection".into(),
        ));
    }
    let bm = &branches[m];
    let bn = &branches[n];
    let d = bm.z - bn.z;
    Ok(bm.dz_dx * bn.dz_dx / (d * d))
}

/// `S_B(x_m)` at `x_m = 0`.  The sphere kernel has `S_B ≡ 0` in the `z`
/// chart, so this is the Schwarzian of the frame alone.
pub fn proj_connection_at_branch(branches: &[BranchData], m: usize) -> Result<C64> {
    branches[m].frame.schwarzian_at_zero()
}

fn complex_key(z: C64) -> (f64, f64) {
    (z.re, z.im)
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

/// Groups nearby points, returning `(centroid, multiplicity)` per cluster.
fn cluster_points(points: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for &p in points {
        if let Some((ctr, mult)) = clusters
            .iter_mut()
            .find(|(ctr, _)| (*ctr - p).norm() < tol * (1.0 + ctr.norm()))
        {
            *ctr = (*ctr * c(*mult as f64) + p) / c(*mult as f64 + 1.0);
            *mult += 1;
        } else {
            clusters.push((p, 1));
        }
    }
    clusters
}
