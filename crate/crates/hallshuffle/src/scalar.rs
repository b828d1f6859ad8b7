//! Exact coefficients: ℚ(√q) (numeric mode) or ℚ(v), v² = q (symbolic mode).
//!
//! Pure rationals are mode-free and combine with either mode. A numeric
//! scalar with a nonzero √q part remembers its q; combining it with a
//! different q, or with a symbolic scalar, is [`Error::ModeMismatch`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::expr::{self, Target};
use crate::{Error, Result};

pub type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarMode {
    /// ℚ(√q) for a fixed positive integer q.
    Numeric(u64),
    /// ℚ(v) with v² = q left symbolic.
    Symbolic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar(Repr);

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Rat(Q),
    /// a + b√q with b ≠ 0 and q not a perfect square.
    Quad { q: u64, a: Q, b: Q },
    Sym(VFrac),
}

/// v^shift · num(v) / den(v), integer coefficients (constant term first),
/// v ∤ num, v ∤ den, gcd(num, den) = 1, joint content 1, lc(den) > 0.
/// Never a constant (those collapse to `Repr::Rat`).
#[derive(Clone, Debug, PartialEq, Eq)]
struct VFrac {
    num: Vec<BigInt>,
    den: Vec<BigInt>,
    shift: i64,
}

pub fn isqrt_exact(q: u64) -> Option<u64> {
    let r = q.isqrt();
    (r * r == q).then_some(r)
}

fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

// ---------- dense polynomials over ℚ (constant term first) ----------

fn trim(p: &mut Vec<Q>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn padd(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = vec![Q::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        r[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        r[i] += c;
    }
    trim(&mut r);
    r
}

fn pmul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    trim(&mut r);
    r
}

fn pdivrem(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let mut r: Vec<Q> = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lb = &b[db];
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut quo = vec![Q::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] / lb;
        for (j, y) in b.iter().enumerate() {
            r[k + j] -= &c * y;
        }
        quo[k] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut quo);
    (quo, r)
}

fn pgcd(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut x: Vec<Q> = a.to_vec();
    let mut y: Vec<Q> = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = pdivrem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn bgcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut x, mut y) = (a.abs(), b.abs());
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

impl VFrac {
    /// Normalize v^shift·num/den given over ℚ; returns a scalar (may collapse to ℚ).
    fn build(mut num: Vec<Q>, mut den: Vec<Q>, mut shift: i64) -> Scalar {
        trim(&mut num);
        trim(&mut den);
        assert!(!den.is_empty(), "VFrac with zero denominator");
        if num.is_empty() {
            return Scalar::zero();
        }
        let lead0 = |p: &mut Vec<Q>| -> i64 {
            let k = p.iter().position(|c| !c.is_zero()).unwrap();
            p.drain(..k);
            k as i64
        };
        shift += lead0(&mut num);
        shift -= lead0(&mut den);
        let g = pgcd(&num, &den);
        if g.len() > 1 {
            num = pdivrem(&num, &g).0;
            den = pdivrem(&den, &g).0;
        }
        // clear denominators, remove joint content, make lc(den) > 0
        let mut l = BigInt::one();
        for c in num.iter().chain(den.iter()) {
            let d = c.denom();
            l = &l / bgcd(&l, d) * d;
        }
        let mut ni: Vec<BigInt> = num.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
        let mut di: Vec<BigInt> = den.iter().map(|c| (c * Q::from_integer(l.clone())).to_integer()).collect();
        let mut cont = BigInt::zero();
        for c in ni.iter().chain(di.iter()) {
            cont = bgcd(&cont, c);
        }
        if di.last().unwrap().is_negative() {
            cont = -cont;
        }
        for c in ni.iter_mut().chain(di.iter_mut()) {
            *c = &*c / &cont;
        }
        if ni.len() == 1 && di.len() == 1 && shift == 0 {
            return Scalar(Repr::Rat(Q::new(ni.pop().unwrap(), di.pop().unwrap())));
        }
        Scalar(Repr::Sym(VFrac { num: ni, den: di, shift }))
    }

    fn from_rat(r: &Q) -> (Vec<Q>, Vec<Q>, i64) {
        (vec![r.clone()], vec![Q::one()], 0)
    }

    fn parts(&self) -> (Vec<Q>, Vec<Q>, i64) {
        (
            self.num.iter().map(|c| Q::from_integer(c.clone())).collect(),
            self.den.iter().map(|c| Q::from_integer(c.clone())).collect(),
            self.shift,
        )
    }
}

fn sym_parts(r: &Repr) -> Option<(Vec<Q>, Vec<Q>, i64)> {
    match r {
        Repr::Rat(x) => Some(VFrac::from_rat(x)),
        Repr::Sym(f) => Some(f.parts()),
        Repr::Quad { .. } => None,
    }
}

fn shift_poly(p: &[Q], k: i64) -> Vec<Q> {
    let mut r = vec![Q::zero(); k as usize];
    r.extend_from_slice(p);
    r
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Repr::Rat(Q::zero()))
    }
    pub fn one() -> Self {
        Scalar(Repr::Rat(Q::one()))
    }
    pub fn from_int(n: i64) -> Self {
        Scalar(Repr::Rat(q_int(n)))
    }
    pub fn from_bigint(n: BigInt) -> Self {
        Scalar(Repr::Rat(Q::from_integer(n)))
    }
    pub fn from_rat(r: Q) -> Self {
        Scalar(Repr::Rat(r))
    }
    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar(Repr::Rat(Q::new(BigInt::from(n), BigInt::from(d))))
    }

    /// √q in numeric mode, the symbol v in symbolic mode.
    pub fn v(mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::Numeric(q) => match isqrt_exact(q) {
                Some(r) => Scalar::from_int(r as i64),
                None => Scalar(Repr::Quad { q, a: Q::zero(), b: Q::one() }),
            },
            ScalarMode::Symbolic => Scalar(Repr::Sym(VFrac { num: vec![BigInt::one()], den: vec![BigInt::one()], shift: 1 })),
        }
    }

    /// q itself (v²) in the given mode.
    pub fn q(mode: ScalarMode) -> Self {
        let v = Scalar::v(mode);
        &v * &v
    }

    /// v^k = q^{k/2}.
    pub fn v_pow(mode: ScalarMode, k: i64) -> Self {
        Scalar::v(mode).pow(k).expect("v is invertible")
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Rat(r) if r.is_zero())
    }
    pub fn is_one(&self) -> bool {
        matches!(&self.0, Repr::Rat(r) if r.is_one())
    }

    /// The mode this scalar is pinned to, or `None` for plain rationals.
    pub fn mode(&self) -> Option<ScalarMode> {
        match &self.0 {
            Repr::Rat(_) => None,
            Repr::Quad { q, .. } => Some(ScalarMode::Numeric(*q)),
            Repr::Sym(_) => Some(ScalarMode::Symbolic),
        }
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match &self.0 {
            Repr::Rat(r) => Some(r),
            _ => None,
        }
    }

    /// Numeric-mode components (a, b) of a + b√q; rationals give b = 0.
    pub fn quad_parts(&self) -> Option<(Q, Q)> {
        match &self.0 {
            Repr::Rat(r) => Some((r.clone(), Q::zero())),
            Repr::Quad { a, b, .. } => Some((a.clone(), b.clone())),
            Repr::Sym(_) => None,
        }
    }

    fn quad(q: u64, a: Q, b: Q) -> Self {
        if b.is_zero() {
            Scalar(Repr::Rat(a))
        } else {
            Scalar(Repr::Quad { q, a, b })
        }
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar> {
        use Repr::*;
        Ok(match (&self.0, &o.0) {
            (Rat(x), Rat(y)) => Scalar(Rat(x + y)),
            (Rat(x), Quad { q, a, b }) | (Quad { q, a, b }, Rat(x)) => Scalar::quad(*q, a + x, b.clone()),
            (Quad { q, a, b }, Quad { q: q2, a: c, b: d }) => {
                if q != q2 {
                    return Err(Error::ModeMismatch);
                }
                Scalar::quad(*q, a + c, b + d)
            }
            (Quad { .. }, Sym(_)) | (Sym(_), Quad { .. }) => return Err(Error::ModeMismatch),
            (x, y) => {
                let (n1, d1, s1) = sym_parts(x).unwrap();
                let (n2, d2, s2) = sym_parts(y).unwrap();
                let s = s1.min(s2);
                let num = padd(&pmul(&shift_poly(&n1, s1 - s), &d2), &pmul(&shift_poly(&n2, s2 - s), &d1));
                VFrac::build(num, pmul(&d1, &d2), s)
            }
        })
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar> {
        use Repr::*;
        Ok(match (&self.0, &o.0) {
            (Rat(x), Rat(y)) => Scalar(Rat(x * y)),
            (Rat(x), Quad { q, a, b }) | (Quad { q, a, b }, Rat(x)) => Scalar::quad(*q, a * x, b * x),
            (Quad { q, a, b }, Quad { q: q2, a: c, b: d }) => {
                if q != q2 {
                    return Err(Error::ModeMismatch);
                }
                let qq = q_int(*q as i64);
                Scalar::quad(*q, a * c + b * d * qq, a * d + b * c)
            }
            (Quad { .. }, Sym(_)) | (Sym(_), Quad { .. }) => return Err(Error::ModeMismatch),
            (x, y) => {
                let (n1, d1, s1) = sym_parts(x).unwrap();
                let (n2, d2, s2) = sym_parts(y).unwrap();
                VFrac::build(pmul(&n1, &n2), pmul(&d1, &d2), s1 + s2)
            }
        })
    }

    pub fn try_inv(&self) -> Result<Scalar> {
        Ok(match &self.0 {
            Repr::Rat(r) => {
                if r.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                Scalar(Repr::Rat(r.recip()))
            }
            Repr::Quad { q, a, b } => {
                let n = a * a - b * b * q_int(*q as i64);
                Scalar::quad(*q, a / &n, -(b / &n))
            }
            Repr::Sym(f) => {
                let (n, d, s) = f.parts();
                VFrac::build(d, n, -s)
            }
        })
    }

    pub fn try_sub(&self, o: &Scalar) -> Result<Scalar> {
        self.try_add(&-o)
    }

    pub fn try_div(&self, o: &Scalar) -> Result<Scalar> {
        self.try_mul(&o.try_inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.try_inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Scalar::one();
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.try_mul(&b)?;
            }
            b = b.try_mul(&b)?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// Substitute v ↦ √q in a symbolic scalar. Numeric scalars pass through
    /// if their q matches.
    pub fn eval(&self, q: u64) -> Result<Scalar> {
        match &self.0 {
            Repr::Rat(_) => Ok(self.clone()),
            Repr::Quad { q: q2, .. } => {
                if *q2 == q {
                    Ok(self.clone())
                } else {
                    Err(Error::ModeMismatch)
                }
            }
            Repr::Sym(f) => {
                let v = Scalar::v(ScalarMode::Numeric(q));
                let horner = |p: &[BigInt]| -> Scalar {
                    let mut acc = Scalar::zero();
                    for c in p.iter().rev() {
                        acc = &(&acc * &v) + &Scalar::from_bigint(c.clone());
                    }
                    acc
                };
                let d = horner(&f.den);
                if d.is_zero() {
                    return Err(Error::Domain(format!("denominator vanishes at v = sqrt({q})")));
                }
                let n = horner(&f.num);
                Ok(&(&n * &v.pow(f.shift)?) / &d)
            }
        }
    }

    /// Convert into the given mode: symbolic scalars are evaluated in
    /// numeric mode; numeric scalars with a √q part cannot become symbolic.
    pub fn in_mode(&self, mode: ScalarMode) -> Result<Scalar> {
        match (mode, self.mode()) {
            (_, None) => Ok(self.clone()),
            (ScalarMode::Numeric(q), _) => self.eval(q),
            (ScalarMode::Symbolic, Some(ScalarMode::Symbolic)) => Ok(self.clone()),
            (ScalarMode::Symbolic, Some(_)) => Err(Error::ModeMismatch),
        }
    }

    /// Parse the scalar grammar (`3*v^2-1/2`, `-v`, `7`, parenthesised fractions).
    pub fn parse(s: &str, mode: ScalarMode) -> Result<Scalar> {
        let e = expr::parse(s)?;
        let x: SymEval = e.eval()?;
        x.0.in_mode(mode)
    }
}

struct SymEval(Scalar);

impl Target for SymEval {
    fn int(n: &BigInt) -> Result<Self> {
        Ok(SymEval(Scalar::from_bigint(n.clone())))
    }
    fn var(name: &str) -> Result<Self> {
        if name == "v" {
            Ok(SymEval(Scalar::v(ScalarMode::Symbolic)))
        } else {
            Err(Error::parse(name, "scalars may only use the symbol v"))
        }
    }
    fn add(self, o: Self) -> Result<Self> {
        Ok(SymEval(self.0.try_add(&o.0)?))
    }
    fn sub(self, o: Self) -> Result<Self> {
        Ok(SymEval(self.0.try_sub(&o.0)?))
    }
    fn mul(self, o: Self) -> Result<Self> {
        Ok(SymEval(self.0.try_mul(&o.0)?))
    }
    fn div(self, o: Self) -> Result<Self> {
        Ok(SymEval(self.0.try_div(&o.0)?))
    }
    fn neg(self) -> Result<Self> {
        Ok(SymEval(-self.0))
    }
    fn pow(self, e: i64) -> Result<Self> {
        Ok(SymEval(self.0.pow(e)?))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                self.$f(o).unwrap_or_else(|e| panic!("scalar {}: {e}", stringify!($m)))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.0 {
            Repr::Rat(r) => Scalar(Repr::Rat(-r)),
            Repr::Quad { q, a, b } => Scalar(Repr::Quad { q: *q, a: -a, b: -b }),
            Repr::Sym(f) => Scalar(Repr::Sym(VFrac { num: f.num.iter().map(|c| -c).collect(), den: f.den.clone(), shift: f.shift })),
        }
    }
}
impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

/// Format Σ c_k v^k over (power, coefficient) pairs in decreasing power.
fn fmt_vpoly(terms: &[(i64, Q)]) -> String {
    let mut out = String::new();
    for (k, c) in terms {
        let mut t = String::new();
        if *k == 0 {
            t = format!("{c}");
        } else {
            if c.is_one() {
            } else if *c == -Q::one() {
                t.push('-');
            } else {
                t = format!("{c}*");
            }
            if *k == 1 {
                t.push('v');
            } else {
                t.push_str(&format!("v^{k}"));
            }
        }
        if !out.is_empty() && !t.starts_with('-') {
            out.push('+');
        }
        out.push_str(&t);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Rat(r) => write!(f, "{r}"),
            Repr::Quad { a, b, .. } => {
                let mut terms = vec![(1, b.clone())];
                if !a.is_zero() {
                    terms.push((0, a.clone()));
                }
                write!(f, "{}", fmt_vpoly(&terms))
            }
            Repr::Sym(vf) => {
                let collect = |p: &[BigInt], shift: i64, scale: &Q| -> Vec<(i64, Q)> {
                    let mut t: Vec<(i64, Q)> = p
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, c)| (i as i64 + shift, Q::from_integer(c.clone()) / scale))
                        .collect();
                    t.reverse();
                    t
                };
                if vf.den.len() == 1 {
                    let d = Q::from_integer(vf.den[0].clone());
                    write!(f, "{}", fmt_vpoly(&collect(&vf.num, vf.shift, &d)))
                } else {
                    let (ns, ds) = if vf.shift >= 0 { (vf.shift, 0) } else { (0, -vf.shift) };
                    let one = Q::one();
                    write!(f, "({})/({})", fmt_vpoly(&collect(&vf.num, ns, &one)), fmt_vpoly(&collect(&vf.den, ds, &one)))
                }
            }
        }
    }
}
