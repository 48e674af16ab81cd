//! Truncated complex Laurent series.
//!
//! All local computations in this crate (branch-point frames, residues,
//! Schwarzian derivatives, fractional powers of coverings near poles) run on
//! finite windows of Laurent coefficients.  A series tracks the exponents
//! `lowest..trunc`; everything below `lowest` is exactly zero, everything at
//! `trunc` and above is unknown.  Arithmetic propagates the window so that a
//! result never claims more precision than its inputs support.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Coefficients smaller than this count as zero when a leading coefficient
/// must be inverted (division, reversion, fractional powers).
pub const LEAD_TOL: f64 = 1e-13;

/// Default truncation order: the Schwarzian needs four coefficients of a
/// frame, composed frames eat a few orders, 12 leaves margin at no cost.
pub const DEFAULT_TRUNC: i64 = 12;

/// A finite window of a complex Laurent series.
///
/// Represents `sum_{j=lowest}^{trunc-1} coeffs[j-lowest] * x^j + O(x^trunc)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    lowest: i64,
    trunc: i64,
    coeffs: Vec<C64>,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

impl TruncatedSeries {
    pub fn new(lowest: i64, trunc: i64, coeffs: Vec<C64>) -> Result<Self> {
        if trunc < lowest || coeffs.len() != (trunc - lowest) as usize {
            return Err(Error::Domain(format!(
                "series window [{lowest}, {trunc}) does not match {} coefficients",
                coeffs.len()
            )));
        }
        Ok(Self { lowest, trunc, coeffs })
    }

    /// The zero series, known through `O(x^trunc)`.
    pub fn zero(trunc: i64) -> Self {
        Self { lowest: trunc, trunc, coeffs: Vec::new() }
    }

    pub fn constant(value: C64, trunc: i64) -> Self {
        Self::monomial(0, value, trunc)
    }

    /// The identity series `x`.
    pub fn identity(trunc: i64) -> Self {
        Self::monomial(1, c(1.0), trunc)
    }

    /// `value * x^exp`, known through `O(x^trunc)`.
    pub fn monomial(exp: i64, value: C64, trunc: i64) -> Self {
        if exp >= trunc {
            return Self::zero(trunc);
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); (trunc - exp) as usize];
        coeffs[0] = value;
        Self { lowest: exp, trunc, coeffs }
    }

    /// Builds `sum coeffs[i] x^(lowest+i)` from raw coefficients.
    pub fn from_coeffs(lowest: i64, coeffs: &[C64]) -> Self {
        Self {
            lowest,
            trunc: lowest + coeffs.len() as i64,
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn lowest_exponent(&self) -> i64 {
        self.lowest
    }

    pub fn trunc_order(&self) -> i64 {
        self.trunc
    }

    /// Coefficient of `x^exp`; `None` if the exponent lies at or above the
    /// truncation order (unknown), zero below the window.
    pub fn coeff(&self, exp: i64) -> Option<C64> {
        if exp >= self.trunc {
            None
        } else if exp < self.lowest {
            Some(C64::new(0.0, 0.0))
        } else {
            Some(self.coeffs[(exp - self.lowest) as usize])
        }
    }

    /// Exponent of the first coefficient with modulus above `LEAD_TOL`.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|z| z.norm() > LEAD_TOL)
            .map(|i| self.lowest + i as i64)
    }

    /// Largest coefficient modulus (0 for an empty window, NaN propagates).
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, |acc, x| {
            if x.is_nan() {
                f64::NAN
            } else {
                acc.max(x)
            }
        })
    }

    /// Discards coefficients below `min_exp` after checking that they are
    /// numerical noise (relative to the largest tracked coefficient).
    fn cleaned_above(&self, min_exp: i64, rel_tol: f64) -> Result<Self> {
        if self.lowest >= min_exp {
            return Ok(self.clone());
        }
        let scale = self.max_abs_coeff().max(1e-300);
        for e in self.lowest..min_exp.min(self.trunc) {
            let z = self.coeff(e).unwrap();
            if z.norm() > rel_tol * scale {
                return Err(Error::Domain(format!(
                    "coefficient at exponent {e} is not negligible ({} vs scale {scale:.3e})",
                    z.norm()
                )));
            }
        }
        if min_exp >= self.trunc {
            return Ok(Self::zero(self.trunc));
        }
        let coeffs: Vec<C64> = (min_exp..self.trunc).map(|e| self.coeff(e).unwrap()).collect();
        Ok(Self { lowest: min_exp, trunc: self.trunc, coeffs })
    }

    /// Widens the window with explicit zero coefficients.  Only valid when the
    /// caller knows the series exactly (a polynomial or finite Laurent sum).
    pub fn pad_to(&self, new_trunc: i64) -> Self {
        if new_trunc <= self.trunc {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize((new_trunc - self.lowest) as usize, C64::new(0.0, 0.0));
        Self { lowest: self.lowest, trunc: new_trunc, coeffs }
    }

    /// Restricts the window to `O(x^new_trunc)`; widening is not possible.
    pub fn truncate_to(&self, new_trunc: i64) -> Self {
        if new_trunc >= self.trunc {
            return self.clone();
        }
        if new_trunc <= self.lowest {
            return Self::zero(new_trunc);
        }
        Self {
            lowest: self.lowest,
            trunc: new_trunc,
            coeffs: self.coeffs[..(new_trunc - self.lowest) as usize].to_vec(),
        }
    }

    /// Drops exact-zero leading coefficients, tightening `lowest`.
    fn trimmed(mut self) -> Self {
        let mut skip = 0;
        while skip < self.coeffs.len() && self.coeffs[skip] == C64::new(0.0, 0.0) {
            skip += 1;
        }
        if skip > 0 {
            self.coeffs.drain(..skip);
            self.lowest += skip as i64;
        }
        self
    }

    pub fn neg(&self) -> Self {
        Self {
            lowest: self.lowest,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|z| -z).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            lowest: self.lowest,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|z| z * factor).collect(),
        }
    }

    /// Multiplies by `x^shift`.
    pub fn shift(&self, shift: i64) -> Self {
        Self {
            lowest: self.lowest + shift,
            trunc: self.trunc + shift,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let lowest = self.lowest.min(other.lowest).min(trunc);
        let mut coeffs = vec![C64::new(0.0, 0.0); (trunc - lowest) as usize];
        for (i, cf) in coeffs.iter_mut().enumerate() {
            let e = lowest + i as i64;
            *cf = self.coeff(e).unwrap_or_default() + other.coeff(e).unwrap_or_default();
        }
        Self { lowest, trunc, coeffs }.trimmed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        // A product is determined through min(ta + lb, tb + la): the first
        // unknown coefficient of either factor pollutes everything above it.
        let trunc = (self.trunc + other.lowest).min(other.trunc + self.lowest);
        let lowest = (self.lowest + other.lowest).min(trunc);
        let mut coeffs = vec![C64::new(0.0, 0.0); (trunc - lowest) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            let ea = self.lowest + i as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                let e = ea + other.lowest + j as i64;
                if e >= trunc {
                    break;
                }
                coeffs[(e - lowest) as usize] += a * b;
            }
        }
        Self { lowest, trunc, coeffs }
    }

    /// Long division; the divisor's leading coefficient must exceed `LEAD_TOL`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let vb = other.valuation().ok_or_else(|| {
            Error::Precision("division by a series with no tracked leading coefficient".into())
        })?;
        let lead = other.coeff(vb).unwrap();
        if lead.norm() < LEAD_TOL {
            return Err(Error::Precision("division by a numerically vanishing series".into()));
        }
        let n = ((self.trunc - vb).min(self.lowest - 2 * vb + other.trunc) - (self.lowest - vb))
            .max(0) as usize;
        let lowest = self.lowest - vb;
        let mut q = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let mut acc = self.coeff(self.lowest + j as i64).unwrap_or_default();
            for (i, qi) in q.iter().enumerate().take(j) {
                acc -= qi * other.coeff(vb + (j - i) as i64).unwrap_or_default();
            }
            q[j] = acc / lead;
        }
        Ok(Self { lowest, trunc: lowest + n as i64, coeffs: q })
    }

    pub fn derivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, z) in self.coeffs.iter().enumerate() {
            let e = self.lowest + i as i64;
            coeffs.push(z * c(e as f64));
        }
        Self { lowest: self.lowest - 1, trunc: self.trunc - 1, coeffs }.trimmed()
    }

    /// `outer(inner)`.  `inner` must vanish at the origin; if `outer` has
    /// negative exponents, `inner` must additionally have valuation exactly 1
    /// so its reciprocal exists as a Laurent series.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        for e in inner.lowest..1.min(inner.trunc) {
            if inner.coeff(e).unwrap().norm() > LEAD_TOL {
                return Err(Error::Domain(
                    "composition inner series must vanish at the origin".into(),
                ));
            }
        }
        let v = inner.valuation().unwrap_or(inner.trunc).max(1);
        let cap = v * outer.trunc;
        let mut result = Self::zero(cap);

        // positive part by Horner, highest exponent first
        if outer.trunc > 0 {
            let mut acc = Self::zero(cap);
            let mut e = outer.trunc - 1;
            loop {
                acc = acc.mul(inner);
                acc = acc.add(&Self::constant(outer.coeff(e).unwrap_or_default(), cap));
                if e == 0 {
                    break;
                }
                e -= 1;
            }
            result = result.add(&acc);
        }
        // negative part: Horner in the reciprocal of inner, ascending exponent
        if outer.lowest < 0 {
            if inner.valuation() != Some(1) {
                return Err(Error::Domain(
                    "Laurent outer requires inner of valuation exactly 1".into(),
                ));
            }
            let one = Self::constant(c(1.0), inner.trunc + cap);
            let inv = one.div(inner)?;
            let mut acc = Self::zero(cap);
            let end = 0.min(outer.trunc);
            for e in outer.lowest..end {
                acc = acc.add(&Self::constant(outer.coeff(e).unwrap_or_default(), cap));
                acc = acc.mul(&inv);
            }
            for _ in end..0 {
                acc = acc.mul(&inv);
            }
            result = result.add(&acc);
        }
        Ok(result.truncate_to(cap))
    }

    /// Functional inverse of `c1 x + c2 x^2 + ...` with `c1 != 0`.
    pub fn revert(&self) -> Result<Self> {
        if self.lowest < 0 || (self.lowest == 0 && self.coeffs[0].norm() > LEAD_TOL) {
            return Err(Error::Domain("reversion requires a series vanishing at 0".into()));
        }
        let c1 = self.coeff(1).unwrap_or_default();
        if c1.norm() < LEAD_TOL {
            return Err(Error::Domain("reversion requires a nonzero linear coefficient".into()));
        }
        let t = self.trunc;
        if t < 2 {
            return Err(Error::Precision("reversion needs the window to reach order 2".into()));
        }
        // Solve s(g(x)) = x degree by degree: the x^d coefficient of s∘g is
        // linear in g_d with factor c1.
        let mut g = vec![C64::new(0.0, 0.0); (t - 1) as usize]; // g[d-1] = coeff of x^d
        g[0] = c(1.0) / c1;
        for d in 2..t {
            let partial = Self::from_coeffs(1, &g[..(d - 1) as usize]).pad_to(d + 1);
            let comp = Self::compose(&self.truncate_to(d + 1), &partial)?;
            let err = comp.coeff(d).unwrap_or_default();
            g[(d - 1) as usize] = -err / c1;
        }
        Ok(Self::from_coeffs(1, &g))
    }

    /// Coefficient of `x^{-1}`; the window must contain it.
    pub fn residue(&self) -> Result<C64> {
        if self.lowest > -1 || self.trunc <= -1 {
            return Err(Error::Precision(format!(
                "residue needs exponent -1 inside the window [{}, {})",
                self.lowest, self.trunc
            )));
        }
        Ok(self.coeff(-1).unwrap())
    }

    /// `{s; x}` at `x = 0`: `s'''/s' - (3/2)(s''/s')^2` from the coefficients
    /// of `x`, `x^2`, `x^3`.  The constant term is irrelevant.
    pub fn schwarzian_at_zero(&self) -> Result<C64> {
        if self.trunc < 4 {
            return Err(Error::Precision("Schwarzian needs the window to reach order 4".into()));
        }
        if self.lowest < 0 {
            return Err(Error::Domain("Schwarzian of a Laurent series is not defined".into()));
        }
        let c1 = self.coeff(1).unwrap();
        if c1.norm() < LEAD_TOL {
            return Err(Error::Domain("Schwarzian needs a nonzero linear coefficient".into()));
        }
        let c2 = self.coeff(2).unwrap();
        let c3 = self.coeff(3).unwrap();
        Ok(c(6.0) * c3 / c1 - c(6.0) * (c2 / c1) * (c2 / c1))
    }

    /// `ln(1 + u)` for a series `u` of valuation >= 1, via integration of
    /// `u' / (1 + u)`.  Sub-tolerance noise below the linear term is dropped.
    pub fn log_one_plus(&self) -> Result<Self> {
        let u = self
            .cleaned_above(1, 1e-10)
            .map_err(|_| Error::Domain("log(1+u) requires u to vanish at 0".into()))?;
        let one_plus = Self::constant(c(1.0), u.trunc).add(&u);
        let num = u.derivative();
        let quot = num.div(&one_plus)?;
        // integrate term by term; the constant of integration is zero
        let mut coeffs = Vec::with_capacity(quot.coeffs.len());
        for (i, z) in quot.coeffs.iter().enumerate() {
            let e = quot.lowest + i as i64;
            coeffs.push(z / c((e + 1) as f64));
        }
        Ok(Self {
            lowest: quot.lowest + 1,
            trunc: quot.trunc + 1,
            coeffs,
        }
        .truncate_to(self.trunc))
    }

    /// `exp(u)` for a series `u` of valuation >= 1.
    pub fn exp_vanishing(&self) -> Result<Self> {
        let this = self
            .cleaned_above(1, 1e-10)
            .map_err(|_| Error::Domain("exp(u) requires u to vanish at 0".into()))?;
        let t = this.trunc;
        let mut result = Self::constant(c(1.0), t);
        let mut term = Self::constant(c(1.0), t);
        let mut k = 1u32;
        loop {
            term = term.mul(&this).scale(c(1.0 / k as f64)).truncate_to(t);
            if term.valuation().is_none() || term.lowest >= t {
                break;
            }
            result = result.add(&term);
            k += 1;
            if k > 2 * t.unsigned_abs() as u32 + 4 {
                break;
            }
        }
        Ok(result.truncate_to(t))
    }

    /// `self^(num/den)` with the principal branch on the leading coefficient.
    /// The leading exponent times `num` must be divisible by `den` so the
    /// result is again a Laurent series.
    pub fn pow_rational(&self, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator exponent".into()));
        }
        let v = self
            .valuation()
            .ok_or_else(|| Error::Precision("fractional power of a vanishing series".into()))?;
        if (v * num) % den != 0 {
            return Err(Error::Domain(format!(
                "fractional power branch failure: valuation {v} with exponent {num}/{den}"
            )));
        }
        let lead = self.coeff(v).unwrap();
        let alpha = num as f64 / den as f64;
        let lead_pow = lead.powf(alpha);
        let u = self.shift(-v).scale(c(1.0) / lead).sub(&Self::constant(c(1.0), self.trunc - v));
        let series = u.log_one_plus()?.scale(c(alpha)).exp_vanishing()?;
        Ok(series.scale(lead_pow).shift(v * num / den))
    }

    pub fn pow_int(&self, n: u32) -> Self {
        let mut result = Self::constant(c(1.0), self.trunc.max(1) * 2 + 8);
        for _ in 0..n {
            result = result.mul(self);
        }
        result
    }

    /// Evaluates the window at a point (Horner on the power part, ascending
    /// inverse powers for the principal part).
    pub fn eval(&self, x: C64) -> C64 {
        let mut pos = C64::new(0.0, 0.0);
        if self.trunc > 0 {
            let mut e = self.trunc - 1;
            loop {
                pos = pos * x + self.coeff(e).unwrap_or_default();
                if e == 0 {
                    break;
                }
                e -= 1;
            }
        }
        let mut neg = C64::new(0.0, 0.0);
        if self.lowest < 0 {
            let inv = C64::new(1.0, 0.0) / x;
            let mut power = inv;
            let mut e = -1i64;
            while e >= self.lowest {
                neg += self.coeff(e).unwrap_or_default() * power;
                power *= inv;
                e -= 1;
            }
        }
        pos + neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn compose_identity_outer() {
        let s = TruncatedSeries::from_coeffs(1, &[cx(2.0, 1.0), cx(0.5, 0.0), cx(0.0, -1.0)]);
        let id = TruncatedSeries::identity(8);
        let r = TruncatedSeries::compose(&id, &s).unwrap();
        for e in 1..4 {
            assert_close(r.coeff(e).unwrap(), s.coeff(e).unwrap(), 1e-15);
        }
    }

    #[test]
    fn compose_square_binomial() {
        // outer = x^2, inner = x + x^2 (trunc 4) -> x^2 + 2x^3 + x^4 (x^4 beyond window)
        let outer = TruncatedSeries::monomial(2, cx(1.0, 0.0), 8);
        let inner = TruncatedSeries::from_coeffs(1, &[cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]);
        let r = TruncatedSeries::compose(&outer, &inner).unwrap();
        assert_close(r.coeff(2).unwrap(), cx(1.0, 0.0), 1e-15);
        assert_close(r.coeff(3).unwrap(), cx(2.0, 0.0), 1e-15);
        assert_close(r.coeff(4).unwrap(), cx(1.0, 0.0), 1e-15);
    }

    #[test]
    fn compose_geometric() {
        // outer = 1/(1-x) through x^3, inner = 2x -> 1 + 2x + 4x^2 + 8x^3
        let outer = TruncatedSeries::from_coeffs(
            0,
            &[cx(1.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0)],
        );
        let inner = TruncatedSeries::monomial(1, cx(2.0, 0.0), 4);
        let r = TruncatedSeries::compose(&outer, &inner).unwrap();
        for (e, want) in [(0, 1.0), (1, 2.0), (2, 4.0), (3, 8.0)] {
            assert_close(r.coeff(e).unwrap(), cx(want, 0.0), 1e-14);
        }
    }

    #[test]
    fn compose_rejects_constant_inner() {
        let outer = TruncatedSeries::identity(6);
        let inner = TruncatedSeries::constant(cx(1.0, 0.0), 6);
        assert!(TruncatedSeries::compose(&outer, &inner).is_err());
    }

    #[test]
    fn revert_identity_and_linear() {
        let id = TruncatedSeries::identity(8);
        let r = id.revert().unwrap();
        assert_close(r.coeff(1).unwrap(), cx(1.0, 0.0), 1e-15);
        assert_close(r.coeff(2).unwrap(), cx(0.0, 0.0), 1e-15);

        let twox = TruncatedSeries::monomial(1, cx(2.0, 0.0), 8);
        let r = twox.revert().unwrap();
        assert_close(r.coeff(1).unwrap(), cx(0.5, 0.0), 1e-15);
    }

    #[test]
    fn revert_lagrange_example() {
        // x + x^2 (trunc 5) -> x - x^2 + 2x^3 - 5x^4
        let s = TruncatedSeries::from_coeffs(
            1,
            &[cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)],
        );
        let r = s.revert().unwrap();
        for (e, want) in [(1, 1.0), (2, -1.0), (3, 2.0), (4, -5.0)] {
            assert_close(r.coeff(e).unwrap(), cx(want, 0.0), 1e-13);
        }
    }

    #[test]
    fn revert_rejects_bad_leading_terms() {
        let with_const = TruncatedSeries::from_coeffs(0, &[cx(1.0, 0.0), cx(1.0, 0.0)]);
        assert!(with_const.revert().is_err());
        let no_linear = TruncatedSeries::monomial(2, cx(1.0, 0.0), 6);
        assert!(no_linear.revert().is_err());
    }

    #[test]
    fn schwarzian_examples() {
        // z = x -> 0
        let id = TruncatedSeries::identity(6);
        assert_close(id.schwarzian_at_zero().unwrap(), cx(0.0, 0.0), 1e-15);
        // z = x + x^3 -> 6
        let s = TruncatedSeries::from_coeffs(1, &[cx(1.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
        assert_close(s.schwarzian_at_zero().unwrap(), cx(6.0, 0.0), 1e-15);
    }

    #[test]
    fn schwarzian_kills_moebius() {
        // z = (a x + b)/(c x + d) expanded to order 4
        let (a, b, cc, d) = (cx(1.0, 2.0), cx(0.5, -1.0), cx(2.0, 0.5), cx(1.0, 0.0));
        let t = 6;
        let num = TruncatedSeries::from_coeffs(0, &[b, a]).pad_to(t);
        let den = TruncatedSeries::from_coeffs(0, &[d, cc]).pad_to(t);
        let s = num.div(&den).unwrap();
        assert!(s.schwarzian_at_zero().unwrap().norm() < 1e-12);
    }

    #[test]
    fn residue_examples() {
        let inv = TruncatedSeries::monomial(-1, cx(1.0, 0.0), 3);
        assert_close(inv.residue().unwrap(), cx(1.0, 0.0), 1e-15);

        let s = TruncatedSeries::from_coeffs(-2, &[cx(1.0, 0.0), cx(0.0, 0.0), cx(3.0, 0.0)]);
        assert_close(s.residue().unwrap(), cx(0.0, 0.0), 1e-15);

        // (1+x)^2/x^2 = 1/x^2 + 2/x + 1
        let num = TruncatedSeries::from_coeffs(0, &[cx(1.0, 0.0), cx(2.0, 0.0), cx(1.0, 0.0)])
            .pad_to(6);
        let den = TruncatedSeries::monomial(2, cx(1.0, 0.0), 6);
        let q = num.div(&den).unwrap();
        assert_close(q.residue().unwrap(), cx(2.0, 0.0), 1e-15);

        let pure = TruncatedSeries::monomial(0, cx(1.0, 0.0), 4);
        assert!(pure.residue().is_err());
    }

    #[test]
    fn residue_of_total_derivative_vanishes() {
        let s = TruncatedSeries::from_coeffs(
            -3,
            &[cx(1.0, -2.0), cx(0.3, 0.1), cx(-1.0, 0.4), cx(2.0, 0.0), cx(0.1, 0.9), cx(1.0, 1.0)],
        );
        let d = s.derivative();
        assert_close(d.residue().unwrap(), cx(0.0, 0.0), 1e-15);
    }

    #[test]
    fn division_guards_small_leading_coefficient() {
        let num = TruncatedSeries::identity(6);
        let den = TruncatedSeries::constant(cx(1e-14, 0.0), 6);
        assert!(num.div(&den).is_err());
    }

    #[test]
    fn mul_truncation_never_overclaims() {
        // a known through x^2, b through x^5: product through x^2 + val(b)
        let a = TruncatedSeries::from_coeffs(0, &[cx(1.0, 0.0), cx(1.0, 0.0)]);
        let b = TruncatedSeries::from_coeffs(1, &[cx(1.0, 0.0); 4]);
        let p = a.mul(&b);
        assert_eq!(p.trunc_order(), 3);
        assert_eq!(p.lowest_exponent(), 1);
    }

    #[test]
    fn pow_rational_sqrt() {
        // (4x^2 (1 + x))^(1/2) = 2x (1 + x/2 - x^2/8 + ...)
        let s = TruncatedSeries::from_coeffs(2, &[cx(4.0, 0.0), cx(4.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        let r = s.pow_rational(1, 2).unwrap();
        assert_close(r.coeff(1).unwrap(), cx(2.0, 0.0), 1e-13);
        assert_close(r.coeff(2).unwrap(), cx(1.0, 0.0), 1e-13);
        assert_close(r.coeff(3).unwrap(), cx(-0.25, 0.0), 1e-13);
    }

    #[test]
    fn pow_rational_branch_failure() {
        let s = TruncatedSeries::monomial(1, cx(1.0, 0.0), 6);
        assert!(s.pow_rational(1, 2).is_err());
    }

    #[test]
    fn eval_laurent() {
        let s = TruncatedSeries::from_coeffs(-1, &[cx(2.0, 0.0), cx(1.0, 0.0), cx(3.0, 0.0)]);
        // 2/x + 1 + 3x at x = 2 -> 1 + 1 + 6 = 8
        assert_close(s.eval(cx(2.0, 0.0)), cx(8.0, 0.0), 1e-14);
    }
}
