//! Independent numerical oracles for the defining identities.
//!
//! Derivatives with respect to a canonical coordinate `λ_m` are realized by
//! perturbing the coefficient chart along the inverse parameter Jacobian and
//! re-solving the covering with matched branch order and square-root sheets.
//! Every check produces a quantified residual against an explicit tolerance;
//! the whole suite is deterministic given a seed.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::frobenius::{Covering, Frobenius, PrimaryDifferential};
use crate::genus0::CoveringG0;
use crate::genus1::CoveringG1;

/// Finite-difference configuration: centered scheme, relative step.
#[derive(Clone, Copy, Debug)]
pub struct FDConfig {
    pub step: f64,
    pub tol_scale: f64,
}

impl Default for FDConfig {
    fn default() -> Self {
        Self { step: 1e-5, tol_scale: 1.0 }
    }
}

impl FDConfig {
    pub fn with_step(step: f64) -> Result<Self> {
        if !(1e-8..=1e-2).contains(&step) {
            return Err(Error::Domain(format!("fd step {step} outside [1e-8, 1e-2]")));
        }
        Ok(Self { step, tol_scale: 1.0 })
    }
}

/// One measured residual.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub covering: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Per-identity results with an aggregate pass flag.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub notes: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            notes: vec![
                // the statement of the derivative identity for B_m carries an
                // "m != m" condition; it is read as m != n
                "lemma2 condition read as m != n".into(),
            ],
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, covering: &str, residual: f64, tol: f64) {
        let pass = residual.is_finite() && residual < tol;
        self.pass &= pass;
        self.checks.push(CheckRecord {
            name: name.into(),
            covering: covering.to_string(),
            residual,
            tol,
            pass,
        });
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.pass &= other.pass;
        self.checks.extend(other.checks);
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
    }

    pub fn max_residual(&self, name_prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(name_prefix))
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// the λ-derivative
// ---------------------------------------------------------------------------

/// Perturbed snapshots `(f(λ + h e_m), f(λ - h e_m))` used by every centered
/// difference.  The parameter move is `dp = (∂λ/∂p)^{-1} h e_m`, so the other
/// canonical coordinates stay fixed to `O(h²)`.
fn perturbed_pair(base: &Frobenius, m: usize, h: f64) -> Result<(Frobenius, Frobenius)> {
    let jac = base.param_jacobian()?;
    let dim = base.branch_count();
    let mut rhs = nalgebra::DVector::<C64>::zeros(dim);
    rhs[m] = C64::new(h, 0.0);
    let dp = jac
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("parameter Jacobian is singular".into()))?;
    let params = base.params()?;
    let mut plus = params.clone();
    let mut minus = params;
    for j in 0..dim {
        plus[j] += dp[j];
        minus[j] -= dp[j];
    }
    let fp = base.refined_to(base.with_params(&plus)?)?;
    let fm = base.refined_to(base.with_params(&minus)?)?;
    Ok((fp, fm))
}

/// Centered `∂f/∂λ_m`.  On a stratum exit the step is halved once.
pub fn d_dlambda<F>(base: &Frobenius, m: usize, cfg: &FDConfig, func: F) -> Result<C64>
where
    F: Fn(&Frobenius) -> Result<C64>,
{
    let scale = 1.0f64.max(base.lambdas().iter().map(|l| l.norm()).fold(0.0, f64::max));
    let mut h = cfg.step * scale;
    for attempt in 0..2 {
        match perturbed_pair(base, m, h) {
            Ok((fp, fm)) => {
                let vp = func(&fp)?;
                let vm = func(&fm)?;
                return Ok((vp - vm) / C64::new(2.0 * h, 0.0));
            }
            Err(e) if attempt == 0 => {
                let _ = e;
                h /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

/// Principal log continued to the branch nearest a reference log.
fn continued_ln(value: C64, reference: C64) -> C64 {
    let raw = value.ln();
    let k = ((reference.im - raw.im) / (2.0 * PI)).round();
    raw + C64::new(0.0, 2.0 * PI * k)
}

/// `ln τ_B` of a perturbed snapshot with every per-factor log continued
/// against the base snapshot, so centered differences never straddle a cut.
pub fn log_tau_bergmann_continued(base: &Frobenius, pert: &Frobenius) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for ((ks, hb), (_, hp)) in base.h_factors().iter().zip(pert.h_factors().iter()) {
        acc += C64::new((ks + 1) as f64, 0.0) * continued_ln(*hp, hb.ln());
    }
    for (fb, fp) in base.f_factors().iter().zip(pert.f_factors().iter()) {
        acc -= continued_ln(*fp, fb.ln());
    }
    let mut out = acc / 12.0;
    if let (Some(cb), Some(cp)) = (base.theta(), pert.theta()) {
        let refer = cb.theta1_deriv0(1).ln();
        out += C64::new(2.0 / 3.0, 0.0) * continued_ln(cp.theta1_deriv0(1), refer);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// identity checks
// ---------------------------------------------------------------------------

fn rel(err: f64, scale: f64) -> f64 {
    err / (1.0 + scale)
}

/// `∂ ln τ_B / ∂λ_m = B_m` and `∂ ln τ_I / ∂λ_m = H_m`.
pub fn check_tau_definitions(
    f: &Frobenius,
    label: &str,
    cfg: &FDConfig,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let bq = f.bergmann_quantities()?;
    let gamma = f.rotation_coeffs()?;
    let ham = f.hamiltonians(&gamma);
    for m in 0..f.branch_count() {
        let fd = d_dlambda(f, m, cfg, |p| log_tau_bergmann_continued(f, p))?;
        report.push(
            format!("tauB_dlambda_{m}"),
            label,
            rel((fd - bq[m]).norm(), bq[m].norm()),
            tol,
        );
        report.push(
            format!("tauI_dlambda_{m}"),
            label,
            rel((-fd / 2.0 - ham[m]).norm(), ham[m].norm()),
            tol,
        );
    }
    Ok(())
}

/// Rauch formulas: `∂ f_m/∂λ_n = (1/2) b_mn f_n` for the frame factors and
/// `∂ b_nk/∂λ_m = (1/2) b_nm b_mk` for the kernel itself.
pub fn check_rauch(
    f: &Frobenius,
    label: &str,
    cfg: &FDConfig,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let mm = f.branch_count();
    for m in 0..mm {
        for n in 0..mm {
            if m == n {
                continue;
            }
            let fd = d_dlambda(f, n, cfg, |p| Ok(p.f_factors()[m]))?;
            let want = f.kernel_value(m, n)? * f.f_factors()[n] / 2.0;
            report.push(
                format!("rauch_alpha_{m}_{n}"),
                label,
                rel((fd - want).norm(), want.norm()),
                tol,
            );
        }
    }
    // kernel Rauch on distinct triples (bounded count to keep runtime flat)
    let mut triples = 0;
    'outer: for n in 0..mm {
        for k in (n + 1)..mm {
            for m in 0..mm {
                if m == n || m == k {
                    continue;
                }
                let fd = d_dlambda(f, m, cfg, |p| p.kernel_value(n, k))?;
                let want = f.kernel_value(n, m)? * f.kernel_value(m, k)? / 2.0;
                report.push(
                    format!("rauch_kernel_{n}{k}_{m}"),
                    label,
                    rel((fd - want).norm(), want.norm()),
                    tol,
                );
                triples += 1;
                if triples >= 6 {
                    break 'outer;
                }
            }
        }
    }
    Ok(())
}

/// Darboux-Egoroff system for the rotation coefficients:
/// `∂_{λ_k} γ_mn = γ_mk γ_kn` on distinct triples, plus the unity and Euler
/// sum rules `e(γ_mn) = 0`, `E(γ_mn) = -γ_mn`.
pub fn check_darboux_egoroff(
    f: &Frobenius,
    label: &str,
    cfg: &FDConfig,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let mm = f.branch_count();
    let gamma = f.rotation_coeffs()?;
    if mm >= 3 {
        let mut triples = 0;
        'outer: for m in 0..mm {
            for n in (m + 1)..mm {
                for k in 0..mm {
                    if k == m || k == n {
                        continue;
                    }
                    let fd = d_dlambda(f, k, cfg, |p| Ok(p.rotation_coeffs()?[(m, n)]))?;
                    let want = gamma[(m, k)] * gamma[(k, n)];
                    report.push(
                        format!("gamma1_{m}{n}_{k}"),
                        label,
                        rel((fd - want).norm(), want.norm()),
                        tol,
                    );
                    triples += 1;
                    if triples >= 6 {
                        break 'outer;
                    }
                }
            }
        }
    }
    // sum rules on the first off-diagonal pair
    let (m, n) = (0, 1);
    let mut e_sum = C64::new(0.0, 0.0);
    let mut euler = C64::new(0.0, 0.0);
    for k in 0..mm {
        let fd = d_dlambda(f, k, cfg, |p| Ok(p.rotation_coeffs()?[(m, n)]))?;
        e_sum += fd;
        euler += f.lambdas()[k] * fd;
    }
    report.push("gamma2_unity", label, rel(e_sum.norm(), gamma[(m, n)].norm()), tol);
    report.push(
        "gamma3_euler",
        label,
        rel((euler + gamma[(m, n)]).norm(), gamma[(m, n)].norm()),
        tol,
    );
    Ok(())
}

/// Derivatives of `B_m`: `∂_{λ_n} B_m = -(1/4) b_mn²` for `n != m`, plus the
/// unity and Euler sum rules.
pub fn check_lemma2(
    f: &Frobenius,
    label: &str,
    cfg: &FDConfig,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let mm = f.branch_count();
    let bq = f.bergmann_quantities()?;
    for (m, bqm) in bq.iter().enumerate() {
        let mut e_sum = C64::new(0.0, 0.0);
        let mut euler = C64::new(0.0, 0.0);
        for n in 0..mm {
            let fd = d_dlambda(f, n, cfg, |p| Ok(p.bergmann_quantities()?[m]))?;
            e_sum += fd;
            euler += f.lambdas()[n] * fd;
            if n != m {
                let b = f.kernel_value(m, n)?;
                let want = -b * b / 4.0;
                report.push(
                    format!("b1_{m}_{n}"),
                    label,
                    rel((fd - want).norm(), want.norm()),
                    tol,
                );
            }
        }
        report.push(format!("b2_unity_{m}"), label, rel(e_sum.norm(), bqm.norm()), tol);
        report.push(
            format!("b3_euler_{m}"),
            label,
            rel((euler + bqm).norm(), bqm.norm()),
            tol,
        );
    }
    Ok(())
}

/// Rotation coefficients from the kernel against the metric definition
/// `γ_mn = ∂_{λ_n} (η_mm)^{1/2} / (η_nn)^{1/2}`, for each primary
/// differential the covering admits.
pub fn check_phi_independence(
    f: &Frobenius,
    label: &str,
    cfg: &FDConfig,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let gamma = f.rotation_coeffs()?;
    let mut phis = vec![f.covering().designated_phi()];
    if matches!(f.covering(), Covering::G0(CoveringG0::Laurent { .. })) {
        phis.push(PrimaryDifferential::Dz);
    }
    for phi in phis {
        for (m, n) in [(0usize, 1usize), (1, 0)] {
            let fd = d_dlambda(f, n, cfg, |p| Ok(p.sqrt_eta(phi, m)))?;
            let got = fd / f.sqrt_eta(phi, n);
            report.push(
                format!("gamma_def_{}_{m}{n}", phi.tag()),
                label,
                rel((got - gamma[(m, n)]).norm(), gamma[(m, n)].norm()),
                tol,
            );
        }
    }
    Ok(())
}

/// `H_m = -(1/2) B_m` (the relation between the two tau-functions) as a
/// parameter-free residual.
pub fn check_hamiltonian_bergmann_relation(
    f: &Frobenius,
    label: &str,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let gamma = f.rotation_coeffs()?;
    let ham = f.hamiltonians(&gamma);
    let bq = f.bergmann_quantities()?;
    let mut worst = 0.0f64;
    for m in 0..f.branch_count() {
        worst = worst.max((ham[m] + bq[m] / 2.0).norm());
    }
    report.push("ttrel_hamiltonian", label, worst, tol);
    Ok(())
}

// ---------------------------------------------------------------------------
// the constancy checks of the closed-form G
// ---------------------------------------------------------------------------

/// The three families with closed-form G behaviour.
#[derive(Clone, Copy, Debug)]
pub enum GFamily {
    /// Polynomial coverings of degree `n`: G itself is constant.
    Polynomial { n: usize },
    /// Laurent coverings `(k, N)`: `G + t_N/24` is constant.
    Laurent { k: usize, n: usize },
    /// Genus-1 coverings of degree `n`:
    /// `G + ln η(σ) + ((N+1)/24) ln h_1` is constant.
    Genus1 { n: usize },
}

impl GFamily {
    fn label(&self) -> String {
        match self {
            Self::Polynomial { n } => format!("M_0;{n}"),
            Self::Laurent { k, n } => format!("M_0;{},{}", k, n - k),
            Self::Genus1 { n } => format!("M_1;{n}"),
        }
    }
}

/// Evaluates the branch-insensitive combination at `samples` random points
/// and reports the maximum pairwise difference.
pub fn check_g_closed_form(
    family: GFamily,
    samples: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
    report: &mut VerificationReport,
) -> Result<()> {
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let f = sample_family(family, rng)?;
        let phi = f.covering().designated_phi();
        let (g, _) = f.g_function(phi)?;
        let combo = match family {
            GFamily::Polynomial { .. } => g,
            GFamily::Laurent { .. } => {
                let t = f.flat_coordinates()?;
                g + t.last().unwrap() / 24.0
            }
            GFamily::Genus1 { n } => {
                let cache = f.theta().unwrap();
                let log_eta = cache.theta1_deriv0(1).ln() / 3.0;
                let h1 = f.h_factors()[0].1;
                g + log_eta + C64::new((n as f64 + 1.0) / 24.0, 0.0) * h1.ln()
            }
        };
        values.push(combo);
    }
    let mut max_diff = 0.0f64;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            max_diff = max_diff.max((values[i] - values[j]).norm());
        }
    }
    report.push(format!("g_const_{}", family.label()), &family.label(), max_diff, tol);
    Ok(())
}

// ---------------------------------------------------------------------------
// random coverings
// ---------------------------------------------------------------------------

fn annulus(rng: &mut ChaCha8Rng) -> C64 {
    let r = 0.5 + rng.gen::<f64>();
    let phase = 2.0 * PI * rng.gen::<f64>();
    C64::from_polar(r, phase)
}

/// Minimal separation margins that keep frames and finite differences well
/// conditioned; candidates failing them are resampled.
fn margins_ok(f: &Frobenius) -> bool {
    let lambdas = f.lambdas();
    let scale = 1.0f64.max(lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max));
    for i in 0..lambdas.len() {
        for j in (i + 1)..lambdas.len() {
            if (lambdas[i] - lambdas[j]).norm() < 0.05 * scale {
                return false;
            }
        }
    }
    let zs: Vec<C64> = f.branches().iter().map(|b| b.z).collect();
    for i in 0..zs.len() {
        for j in (i + 1)..zs.len() {
            if (zs[i] - zs[j]).norm() < 0.08 {
                return false;
            }
        }
    }
    true
}

/// Draws a covering from the family, rejecting degenerate candidates.
pub fn sample_family(family: GFamily, rng: &mut ChaCha8Rng) -> Result<Frobenius> {
    for _ in 0..60 {
        let covering = match family {
            GFamily::Polynomial { n } => {
                let a: Vec<C64> = (0..n - 1).map(|_| annulus(rng)).collect();
                Covering::G0(CoveringG0::polynomial(a)?)
            }
            GFamily::Laurent { k, n } => {
                let b: Vec<C64> = (0..n).map(|_| annulus(rng)).collect();
                Covering::G0(CoveringG0::laurent(k, b)?)
            }
            GFamily::Genus1 { n } => {
                let sigma = C64::new(0.8 * rng.gen::<f64>() - 0.4, 0.7 + 0.7 * rng.gen::<f64>());
                let c0 = annulus(rng);
                let c: Vec<C64> = (0..n - 1).map(|_| annulus(rng)).collect();
                Covering::G1(CoveringG1::new(sigma, c0, c)?)
            }
        };
        match Frobenius::new(covering) {
            Ok(f) if margins_ok(&f) => return Ok(f),
            _ => continue,
        }
    }
    Err(Error::SearchFailure(format!(
        "could not sample a well-separated covering in {}",
        family.label()
    )))
}

// ---------------------------------------------------------------------------
// suites
// ---------------------------------------------------------------------------

/// Genus-0 identity suite.
pub fn suite_genus0(seed: u64, cfg: &FDConfig) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport::new(seed);
    let ts = cfg.tol_scale;

    let families = [
        GFamily::Polynomial { n: 3 },
        GFamily::Polynomial { n: 4 },
        GFamily::Laurent { k: 1, n: 2 },
        GFamily::Laurent { k: 2, n: 4 },
    ];
    for family in families {
        let f = sample_family(family, &mut rng)?;
        let label = family.label();
        check_hamiltonian_bergmann_relation(&f, &label, 1e-8 * ts, &mut report)?;
        check_tau_definitions(&f, &label, cfg, 1e-5 * ts, &mut report)?;
        check_rauch(&f, &label, cfg, 1e-5 * ts, &mut report)?;
        if f.branch_count() >= 3 {
            check_darboux_egoroff(&f, &label, cfg, 1e-4 * ts, &mut report)?;
            check_lemma2(&f, &label, cfg, 1e-4 * ts, &mut report)?;
        }
    }
    // φ-independence on a Laurent cover (both dz and dz/z metrics)
    let f = sample_family(GFamily::Laurent { k: 2, n: 4 }, &mut rng)?;
    check_phi_independence(&f, "M_0;2,2", cfg, 1e-4 * ts, &mut report)?;

    // closed-form G behaviour
    check_g_closed_form(GFamily::Polynomial { n: 3 }, 8, &mut rng, 1e-9 * ts, &mut report)?;
    check_g_closed_form(GFamily::Laurent { k: 1, n: 2 }, 8, &mut rng, 1e-8 * ts, &mut report)?;
    check_g_closed_form(GFamily::Laurent { k: 2, n: 3 }, 8, &mut rng, 1e-8 * ts, &mut report)?;

    // flat-coordinate Jacobian identity
    for (k, n) in [(1usize, 3usize), (2, 5)] {
        let f = sample_family(GFamily::Laurent { k, n }, &mut rng)?;
        let rep = f.jacobian_consistency(PrimaryDifferential::DzOverZ, cfg.step)?;
        report.push("jac_identity", &GFamily::Laurent { k, n }.label(), rep.residual, 1e-4 * ts);
    }
    Ok(report)
}

/// Genus-1 identity suite (tolerances relaxed one order: the σ-direction
/// stacks the heat-equation evaluation on top of the finite difference).
pub fn suite_genus1(seed: u64, cfg: &FDConfig) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut report = VerificationReport::new(seed);
    let ts = cfg.tol_scale;

    for n in [2usize, 3] {
        let family = GFamily::Genus1 { n };
        let f = sample_family(family, &mut rng)?;
        let label = family.label();
        check_hamiltonian_bergmann_relation(&f, &label, 1e-8 * ts, &mut report)?;
        check_tau_definitions(&f, &label, cfg, 1e-4 * ts, &mut report)?;
        check_rauch(&f, &label, cfg, 1e-4 * ts, &mut report)?;
        if f.branch_count() >= 3 {
            check_darboux_egoroff(&f, &label, cfg, 1e-4 * ts, &mut report)?;
            check_lemma2(&f, &label, cfg, 1e-4 * ts, &mut report)?;
        }
    }

    check_g_closed_form(GFamily::Genus1 { n: 2 }, 6, &mut rng, 1e-5 * ts, &mut report)?;

    let f = sample_family(GFamily::Genus1 { n: 2 }, &mut rng)?;
    let rep = f.jacobian_consistency(PrimaryDifferential::Omega, cfg.step)?;
    report.push("jac_identity", "M_1;2", rep.residual, 1e-4 * ts);
    Ok(report)
}

/// Both suites merged.
pub fn suite_all(seed: u64, cfg: &FDConfig) -> Result<VerificationReport> {
    let mut report = suite_genus0(seed, cfg)?;
    report.merge(suite_genus1(seed, cfg)?);
    Ok(report)
}
