//! Big Witt vectors, Euler factors, curve zeta functions, Rankin–Selberg
//! LHom series and the kernels c, λ, λ̃ built from them.
//!
//! A Witt vector is a truncated series 1 + b₁t + … + b_N t^N. Addition ⊞ is
//! the series product; multiplication ⊠ multiplies power sums.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::polyrat::{LaurentPoly, Monomial, RationalFunction};
use crate::scalar::{Scalar, ScalarMode};
use crate::{DegreeWindow, Error, Result};

pub const DEFAULT_TRUNC: usize = 12;

/// Product of two series (constant term first), truncated to degree n.
pub fn series_mul(a: &[Scalar], b: &[Scalar], n: usize) -> Vec<Scalar> {
    let mut r = vec![Scalar::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            r[i + j] = &r[i + j] + &(x * y);
        }
    }
    r
}

/// Multiplicative inverse of a series with invertible constant term.
pub fn series_inv(a: &[Scalar], n: usize) -> Result<Vec<Scalar>> {
    let a0 = a.first().ok_or(Error::DivisionByZero)?.try_inv()?;
    let mut r = vec![Scalar::zero(); n + 1];
    r[0] = a0.clone();
    for k in 1..=n {
        let mut s = Scalar::zero();
        for i in 1..=k.min(a.len() - 1) {
            s = &s + &(&a[i] * &r[k - i]);
        }
        r[k] = -&(&s * &a0);
    }
    Ok(r)
}

/// Substitute t ↦ t^d in a series, truncated to degree n.
pub fn series_dilate(a: &[Scalar], d: usize, n: usize) -> Vec<Scalar> {
    let mut r = vec![Scalar::zero(); n + 1];
    for (i, x) in a.iter().enumerate() {
        if i * d > n {
            break;
        }
        r[i * d] = x.clone();
    }
    r
}

/// Taylor coefficients at 0 of a one-variable rational function.
pub fn series_of(f: &RationalFunction, var: &str, n: usize) -> Result<Vec<Scalar>> {
    let e = f.expand_region(&[var], &DegreeWindow::new().with(var, 0, n as i64))?;
    Ok((0..=n as i64).map(|k| e.get(&Monomial::var_pow(var, k)).cloned().unwrap_or_default()).collect())
}

/// The polynomial Σ a_i t^i as a rational function.
pub fn poly_rf(coeffs: &[Scalar], var: &str) -> RationalFunction {
    LaurentPoly::from_terms(coeffs.iter().enumerate().map(|(i, c)| (Monomial::var_pow(var, i as i64), c.clone()))).into()
}

/// Coefficient arithmetic needed by the Newton identities.
pub trait NewtonRing: Clone {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale_int(&self, n: i64) -> Self;
    fn div_int(&self, n: i64) -> Self;
}

impl NewtonRing for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_int(&self, n: i64) -> Self {
        self * &Scalar::from_int(n)
    }
    fn div_int(&self, n: i64) -> Self {
        self * &Scalar::ratio(1, n)
    }
}

impl NewtonRing for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_int(&self, n: i64) -> Self {
        self.scale(&Scalar::from_int(n))
    }
    fn div_int(&self, n: i64) -> Self {
        self.scale(&Scalar::ratio(1, n))
    }
}

/// Power sums p₁..p_N of the inverse roots of 1 + Σ b_i t^i.
pub fn power_sums<R: NewtonRing>(b: &[R]) -> Vec<R> {
    let n = b.len();
    let mut p: Vec<R> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut s = b[k - 1].scale_int(-(k as i64));
        for i in 1..k {
            s = s.add(&b[i - 1].mul(&p[k - i - 1]).scale_int(-1));
        }
        p.push(s);
    }
    p
}

/// Inverse of [`power_sums`].
pub fn from_power_sums<R: NewtonRing>(p: &[R]) -> Vec<R> {
    let n = p.len();
    let mut b: Vec<R> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut s = p[k - 1].clone();
        for i in 1..k {
            s = s.add(&b[i - 1].mul(&p[k - i - 1]));
        }
        b.push(s.div_int(-(k as i64)));
    }
    b
}

/// Truncated Witt vector 1 + b₁t + … + b_N t^N.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVector {
    b: Vec<Scalar>,
}

impl WittVector {
    /// From b₁..b_N.
    pub fn new(b: Vec<Scalar>) -> Self {
        WittVector { b }
    }
    /// 𝟎 = 1, neutral for ⊞.
    pub fn zero(n: usize) -> Self {
        WittVector { b: vec![Scalar::zero(); n] }
    }
    /// 𝟏 = 1 − t, neutral for ⊠.
    pub fn one(n: usize) -> Self {
        WittVector::teichmuller(Scalar::one(), n)
    }
    /// [[λ]] = 1 − λt.
    pub fn teichmuller(lambda: Scalar, n: usize) -> Self {
        let mut b = vec![Scalar::zero(); n];
        if n > 0 {
            b[0] = -lambda;
        }
        WittVector { b }
    }
    /// ∏(1 − λ_i t), truncated.
    pub fn from_roots(roots: &[Scalar], n: usize) -> Self {
        roots.iter().fold(WittVector::zero(n), |acc, r| acc.boxplus(&WittVector::teichmuller(r.clone(), n)).unwrap())
    }
    /// From a series with constant term 1.
    pub fn from_series(s: &[Scalar], n: usize) -> Result<Self> {
        if s.first().is_none_or(|c| !c.is_one()) {
            return Err(Error::Domain(String::from("Witt series must have constant term 1")));
        }
        let mut b: Vec<Scalar> = s.iter().skip(1).take(n).cloned().collect();
        b.resize(n, Scalar::zero());
        Ok(WittVector { b })
    }
    pub fn trunc(&self) -> usize {
        self.b.len()
    }
    /// b_i, with b₀ = 1 and zero past the truncation.
    pub fn coeff(&self, i: usize) -> Scalar {
        match i {
            0 => Scalar::one(),
            _ => self.b.get(i - 1).cloned().unwrap_or_default(),
        }
    }
    pub fn b(&self) -> &[Scalar] {
        &self.b
    }
    pub fn series(&self) -> Vec<Scalar> {
        let mut s = vec![Scalar::one()];
        s.extend(self.b.iter().cloned());
        s
    }
    /// Degree of B(t) as a polynomial within the truncation.
    pub fn rank(&self) -> usize {
        self.b.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1)
    }
    fn same_trunc(&self, o: &WittVector) -> Result<()> {
        if self.trunc() != o.trunc() {
            return Err(Error::Domain(format!("truncation mismatch: {} vs {}", self.trunc(), o.trunc())));
        }
        Ok(())
    }
    pub fn boxplus(&self, o: &WittVector) -> Result<WittVector> {
        self.same_trunc(o)?;
        let n = self.trunc();
        WittVector::from_series(&series_mul(&self.series(), &o.series(), n), n)
    }
    pub fn boxtimes(&self, o: &WittVector) -> Result<WittVector> {
        self.same_trunc(o)?;
        let p: Vec<Scalar> = power_sums(&self.b).iter().zip(power_sums(&o.b).iter()).map(|(x, y)| x * y).collect();
        Ok(WittVector { b: from_power_sums(&p) })
    }
    /// χ* for a vector of exact rank r: b_i ↦ b_{r−i}/b_r.
    pub fn star(&self) -> Result<WittVector> {
        let r = self.rank();
        if r == self.trunc() && r > 0 {
            return Err(Error::Domain(String::from("star needs a polynomial strictly inside the truncation")));
        }
        self.star_rank(r)
    }
    pub fn star_rank(&self, r: usize) -> Result<WittVector> {
        if self.rank() > r {
            return Err(Error::Domain(format!("vector has rank above {r}")));
        }
        let br = self.coeff(r);
        if br.is_zero() {
            return Err(Error::Domain(format!("b_{r} vanishes; star undefined")));
        }
        let inv = br.try_inv()?;
        let b = (1..=self.trunc()).map(|i| if i <= r { &self.coeff(r - i) * &inv } else { Scalar::zero() }).collect();
        Ok(WittVector { b })
    }
    /// L(χ; t) = 1/B(t), truncated.
    pub fn euler_factor(&self) -> Vec<Scalar> {
        series_inv(&self.series(), self.trunc()).expect("constant term is 1")
    }
    /// B(λt), i.e. [[λ]] ⊠ B.
    pub fn twist(&self, lambda: &Scalar) -> WittVector {
        let mut pw = Scalar::one();
        let b = self
            .b
            .iter()
            .map(|c| {
                pw = &pw * lambda;
                c * &pw
            })
            .collect();
        WittVector { b }
    }
    /// Same vector at another truncation (padding with zeros is only
    /// meaningful for polynomials).
    pub fn retrunc(&self, n: usize) -> WittVector {
        let mut b = self.b.clone();
        b.resize(n, Scalar::zero());
        WittVector { b }
    }
}

/// Curve over 𝔽_q, described by its zeta numerator P(t) (constant term first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveData {
    pub q: u64,
    pub g: u32,
    pub p: Vec<i64>,
}

fn mobius(n: u64) -> i64 {
    let (mut n, mut k, mut mu) = (n, 2, 1);
    while k * k <= n {
        if n % k == 0 {
            n /= k;
            if n % k == 0 {
                return 0;
            }
            mu = -mu;
        }
        k += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

impl CurveData {
    pub fn new(q: u64, g: u32, p: Vec<i64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("q = {q} is not a field size")));
        }
        if p.len() != 2 * g as usize + 1 || p[0] != 1 {
            return Err(Error::Domain(format!("zeta numerator must have degree 2g = {} and P(0) = 1", 2 * g)));
        }
        Ok(CurveData { q, g, p })
    }
    pub fn p1(q: u64) -> Self {
        CurveData { q, g: 0, p: vec![1] }
    }
    /// Elliptic curve with P(t) = 1 − a t + q t².
    pub fn elliptic(q: u64, a: i64) -> Result<Self> {
        CurveData::new(q, 1, vec![1, -a, q as i64])
    }

    /// N_n = #X(𝔽_{qⁿ}) for n = 1..=d.
    pub fn point_counts(&self, d: usize) -> Vec<i64> {
        let b: Vec<Scalar> = (1..=d).map(|i| Scalar::from_int(self.p.get(i).copied().unwrap_or(0))).collect();
        let p = power_sums(&b);
        (1..=d)
            .map(|n| {
                let pn = p[n - 1].as_rational().unwrap().to_integer();
                1 + (self.q as i64).pow(n as u32) - i64::try_from(pn).unwrap()
            })
            .collect()
    }

    /// a_1..a_D: number of closed points of each degree.
    pub fn place_counts(&self, d: usize) -> Result<Vec<i64>> {
        let nn = self.point_counts(d);
        let mut out = Vec::with_capacity(d);
        for n in 1..=d as u64 {
            let s: i64 = (1..=n).filter(|k| n % k == 0).map(|k| mobius(n / k) * nn[k as usize - 1]).sum();
            let a = s / n as i64;
            if a < 0 || s % n as i64 != 0 {
                return Err(Error::Domain(format!("zeta numerator gives invalid place count a_{n} = {s}/{n}")));
            }
            out.push(a);
        }
        Ok(out)
    }

    pub fn q_scalar(&self, mode: ScalarMode) -> Scalar {
        match mode {
            ScalarMode::Numeric(_) => Scalar::from_int(self.q as i64),
            ScalarMode::Symbolic => Scalar::q(mode),
        }
    }

    /// Symbolic mode treats q = v² as generic, which only makes sense when
    /// P(t) does not involve q, i.e. in genus 0.
    pub fn check_mode(&self, mode: ScalarMode) -> Result<()> {
        match mode {
            ScalarMode::Symbolic if self.g > 0 => Err(Error::Unsupported(String::from("symbolic mode needs genus 0; use numeric mode"))),
            ScalarMode::Numeric(q) if q != self.q => Err(Error::ModeMismatch),
            _ => Ok(()),
        }
    }

    fn p_poly(&self) -> Vec<LaurentPoly> {
        self.p.iter().map(|c| LaurentPoly::constant(Scalar::from_int(*c))).collect()
    }

    /// ζ_X(t) = P(t)/((1−t)(1−qt)) in the variable `var`.
    pub fn zeta_rational(&self, mode: ScalarMode, var: &str) -> RationalFunction {
        zeta_from(&self.p_poly(), &self.q_scalar(mode), var)
    }

    /// Taylor coefficients of ζ_X to order n.
    pub fn zeta_series(&self, mode: ScalarMode, n: usize) -> Vec<Scalar> {
        series_of(&self.zeta_rational(mode, "t"), "t", n).expect("zeta expands at 0")
    }

    /// ∏_{d ≤ D} (1 − t^d)^{−a_d}, to order n.
    pub fn zeta_euler_product(&self, d: usize, n: usize) -> Result<Vec<Scalar>> {
        euler_product_from_counts(&self.place_counts(d)?, n)
    }

    /// Global κ: ζ_X(−t)/ζ_X(−qt), to order n.
    pub fn kappa_global(&self, mode: ScalarMode, n: usize) -> Result<WittVector> {
        let z = self.zeta_rational(mode, "t");
        let q = self.q_scalar(mode);
        let num = z.scale_var("t", &-Scalar::one())?;
        let den = z.scale_var("t", &-q)?;
        WittVector::from_series(&series_of(&num.try_div(&den)?, "t", n)?, n)
    }

    /// λ^deg·χ₀ at the places of degree d (all equal): B = 1 + λ^d q^{−d/2} t.
    pub fn twist_local(&self, mode: ScalarMode, lambda: &Scalar, d: u32, n: usize) -> Result<WittVector> {
        let mut b = vec![Scalar::zero(); n];
        if n > 0 {
            b[0] = lambda.pow(d as i64)?.try_mul(&Scalar::v_pow(mode, -(d as i64)))?;
        }
        Ok(WittVector::new(b))
    }
}

/// ∏_d (1 − t^d)^{−a_d} for a_d = counts[d−1], to order n.
pub fn euler_product_from_counts(counts: &[i64], n: usize) -> Result<Vec<Scalar>> {
    let mut s = vec![Scalar::zero(); n + 1];
    s[0] = Scalar::one();
    for (i, a) in counts.iter().enumerate() {
        let d = i + 1;
        if d > n {
            break;
        }
        if *a < 0 {
            return Err(Error::Domain(format!("negative place count {a} in degree {d}")));
        }
        // (1 − t^d)^(−a) = Σ_k C(a+k−1, k) t^(dk)
        let mut f = vec![Scalar::zero(); n + 1];
        let mut c = Scalar::one();
        for k in 0..=n / d {
            if k > 0 {
                c = c.try_mul(&Scalar::ratio(a + k as i64 - 1, k as i64))?;
            }
            f[d * k] = c.clone();
        }
        s = series_mul(&s, &f, n);
    }
    Ok(s)
}

/// ζ(t) = P(t)/((1−t)(1−qt)) with polynomial-valued coefficients of P.
pub fn zeta_from(p: &[LaurentPoly], q: &Scalar, var: &str) -> RationalFunction {
    let t = LaurentPoly::var(var);
    let num = LaurentPoly::from_terms(
        p.iter().enumerate().flat_map(|(i, c)| c.mul_monomial(&Monomial::var_pow(var, i as i64)).terms().map(|(m, x)| (m.clone(), x.clone())).collect::<Vec<_>>()),
    );
    let one = LaurentPoly::one();
    RationalFunction::from_factors(num, &[(&one - &t, 1), (&one - &t.scale(q), 1)]).expect("nonzero factors")
}

/// Local κ_x: (1 + t)/(1 + q_x t), to order n.
pub fn kappa_local(qx: u64, n: usize) -> WittVector {
    let mq = Scalar::from_int(-(qx as i64));
    let mut s = vec![Scalar::one()];
    let mut pw = Scalar::one();
    for _ in 1..=n {
        // (−q)^k + (−q)^{k−1}
        let next = &pw * &mq;
        s.push(&next + &pw);
        pw = next;
    }
    WittVector::from_series(&s, n).expect("constant term 1")
}

/// Rank-1 twist characters λ^deg·χ₀ (χ₀ the character of the constant
/// function on Pic) or explicit local data grouped by place degree.
#[derive(Clone, Debug)]
pub enum GlobalCharacter {
    Twist { lambda: Scalar },
    Explicit { rank: usize, local: BTreeMap<u32, Vec<WittVector>> },
}

impl GlobalCharacter {
    pub fn rank(&self) -> usize {
        match self {
            GlobalCharacter::Twist { .. } => 1,
            GlobalCharacter::Explicit { rank, .. } => *rank,
        }
    }

    fn local(&self, curve: &CurveData, mode: ScalarMode, d: u32, count: usize, n: usize) -> Result<Vec<WittVector>> {
        match self {
            GlobalCharacter::Twist { lambda } => Ok(vec![curve.twist_local(mode, lambda, d, n)?; count]),
            GlobalCharacter::Explicit { local, .. } => {
                let v = local.get(&d).ok_or_else(|| Error::Domain(format!("no local data at degree {d}")))?;
                if v.len() != count {
                    return Err(Error::Domain(format!("degree {d}: {} local vectors for {count} places", v.len())));
                }
                Ok(v.iter().map(|w| w.retrunc(n)).collect())
            }
        }
    }
}

/// LHom(χ, χ′; t) = ∏_x L(χ_x* ⊠ χ′_x; t^{deg x}) to order n.
pub fn lhom_truncated(curve: &CurveData, mode: ScalarMode, chi: &GlobalCharacter, chi2: &GlobalCharacter, n: usize) -> Result<Vec<Scalar>> {
    curve.check_mode(mode)?;
    let counts = curve.place_counts(n)?;
    let mut s = vec![Scalar::zero(); n + 1];
    s[0] = Scalar::one();
    let r = chi.rank();
    for d in 1..=n {
        let m = n / d;
        let trunc = m.max(r + 1);
        let a = chi.local(curve, mode, d as u32, counts[d - 1] as usize, trunc)?;
        let b = chi2.local(curve, mode, d as u32, counts[d - 1] as usize, trunc)?;
        for (x, y) in a.iter().zip(b.iter()) {
            let l = x.star_rank(r)?.boxtimes(y)?.euler_factor();
            s = series_mul(&s, &series_dilate(&l, d, n), n);
        }
    }
    Ok(s)
}

/// Closed form for twist characters: LHom(λ^deg χ₀, μ^deg χ₀; t) = ζ_X((μ/λ)t).
/// `ratio` is the single term μ/λ (a scalar times a monomial in free parameters).
pub fn lhom_closed(curve: &CurveData, mode: ScalarMode, ratio: &LaurentPoly, var: &str) -> Result<RationalFunction> {
    curve.check_mode(mode)?;
    let (m, c) = ratio.as_term().ok_or_else(|| Error::Unsupported(String::from("closed-form LHom needs a monomial twist ratio")))?;
    curve.zeta_rational(mode, var).subst_term(var, c, &m.mul(&Monomial::var(var)))
}

/// ε_{χ,χ′} = ^π(χ*⊠χ′)(Ω¹) for twist characters with ratio μ/λ: the
/// class of Ω¹ has degree 2g−2 and ^π sends O(x) to the inverse local root.
pub fn epsilon_twist(curve: &CurveData, ratio: &LaurentPoly) -> Result<RationalFunction> {
    RationalFunction::from(ratio.clone()).pow(2 - 2 * curve.g as i64)
}

#[derive(Clone, Debug)]
pub struct FeqReport {
    pub passed: bool,
    pub lhs: RationalFunction,
    pub rhs: RationalFunction,
    pub epsilon: RationalFunction,
}

/// Check LHom(χ′,χ; 1/(qt)) = ε (q^{1/2}t)^{2(1−g)} LHom(χ,χ′; t) for twist
/// characters with ratio μ/λ. `epsilon` overrides the computed ε.
pub fn feq_check(curve: &CurveData, mode: ScalarMode, ratio: &LaurentPoly, epsilon: Option<RationalFunction>) -> Result<FeqReport> {
    let t = "t";
    let (m, c) = ratio.as_term().ok_or_else(|| Error::Unsupported(String::from("feq needs a monomial twist ratio")))?;
    let inv_ratio = LaurentPoly::term(m.inv(), c.try_inv()?);
    let swapped = lhom_closed(curve, mode, &inv_ratio, t)?;
    let q = curve.q_scalar(mode);
    let lhs = swapped.subst_term(t, &q.try_inv()?, &Monomial::var_pow(t, -1))?;
    let eps = match epsilon {
        Some(e) => e,
        None => epsilon_twist(curve, ratio)?,
    };
    let e2 = 2 * (1 - curve.g as i64);
    let monomial = RationalFunction::monomial(Monomial::var_pow(t, e2), Scalar::v_pow(mode, e2));
    let rhs = eps.try_mul(&monomial)?.try_mul(&lhom_closed(curve, mode, ratio, t)?)?;
    Ok(FeqReport { passed: lhs == rhs, lhs, rhs, epsilon: eps })
}

/// The kernel c and its coboundary data on rank-1 components.
#[derive(Clone, Debug)]
pub struct RsKernel {
    pub c: RationalFunction,
    pub lambda: RationalFunction,
    pub lambda_tilde: RationalFunction,
}

/// Kernels for rank-1 twist components with coordinates `s` (first
/// argument) and `t` (second), z = t/s:
/// c = q^{1−g} ζ(z)/ζ(z/q), λ = z^{1−g} ζ(z), λ̃ = f(z)·λ with
/// f(z) = z^{−1}(1−qz)(1−z/q).
pub fn rs_kernel(curve: &CurveData, mode: ScalarMode, s: &str, t: &str) -> Result<RsKernel> {
    curve.check_mode(mode)?;
    let q = curve.q_scalar(mode);
    let zeta = curve.zeta_rational(mode, "z");
    let z = Monomial::from_pairs([(t, 1), (s, -1)]);
    let zeta_z = zeta.subst_term("z", &Scalar::one(), &z)?;
    let zeta_zq = zeta.subst_term("z", &q.try_inv()?, &z)?;
    let qpow = q.pow(1 - curve.g as i64)?;
    let c = zeta_z.try_div(&zeta_zq)?.scale(&qpow);
    let lambda = zeta_z.mul_monomial(&z.pow(1 - curve.g as i64));
    let zp = LaurentPoly::monomial(z.clone());
    let one = LaurentPoly::one();
    let f = RationalFunction::from(&(&one - &zp.scale(&q)) * &(&one - &zp.scale(&q.try_inv()?))).mul_monomial(&z.inv());
    let lambda_tilde = f.try_mul(&lambda)?;
    Ok(RsKernel { c, lambda, lambda_tilde })
}

/// c_{X,r}(t, s) = ∏_{ε^r=1} q^{1−g} ζ(εt/s)/ζ(εt/(qs)), computed without
/// roots of unity: with u = (t/s)^r, ∏_ε P(εw) = P_r(u) where the power sums
/// of P_r are p_{rn}(P). `p` holds the coefficients of P (possibly symbolic).
pub fn c_xr(p: &[LaurentPoly], g: u32, q: &Scalar, r: usize, t: &str, s: &str) -> Result<RationalFunction> {
    if r == 0 {
        return Err(Error::Domain(String::from("rank must be positive")));
    }
    let deg = p.len() - 1;
    let n = deg * r;
    let mut b: Vec<LaurentPoly> = (1..=n).map(|i| p.get(i).cloned().unwrap_or_default()).collect();
    if b.is_empty() {
        b.push(LaurentPoly::zero());
    }
    let ps = power_sums(&b);
    let pr: Vec<LaurentPoly> = (1..=deg).map(|k| ps[r * k - 1].clone()).collect();
    let br = from_power_sums(&pr);
    let mut coeffs = vec![LaurentPoly::one()];
    coeffs.extend(br);
    let qr = q.pow(r as i64)?;
    let zr = zeta_from(&coeffs, &qr, "u");
    let u = Monomial::from_pairs([(t, r as i64), (s, -(r as i64))]);
    let num = zr.subst_term("u", &Scalar::one(), &u)?;
    let den = zr.subst_term("u", &qr.try_inv()?, &u)?;
    Ok(num.try_div(&den)?.scale(&q.pow(r as i64 * (1 - g as i64))?))
}
