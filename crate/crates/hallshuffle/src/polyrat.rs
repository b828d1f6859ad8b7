//! Sparse multivariate Laurent polynomials and rational functions over [`Scalar`].
//!
//! A [`RationalFunction`] keeps its denominator as a list of polynomial
//! factors with multiplicities. Each factor is normalized (no monomial
//! factor, lex-smallest coefficient 1) so that equal factors are found by
//! structural comparison; monomial and scalar units live in the numerator.
//! Equality is decided by bringing both sides over a common factor list.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use crate::expr::{self, Target};
use crate::scalar::{Scalar, ScalarMode};
use crate::{Error, Result};

/// Laurent monomial: sorted (variable, nonzero exponent) pairs.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(String, i64)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }
    pub fn var(name: &str) -> Self {
        Monomial(vec![(name.to_string(), 1)])
    }
    pub fn var_pow(name: &str, e: i64) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(name.to_string(), e)])
        }
    }
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        let mut m = Monomial::one();
        for (n, e) in pairs {
            m = m.mul(&Monomial::var_pow(n, e));
        }
        m
    }
    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
    pub fn exp(&self, name: &str) -> i64 {
        self.0.iter().find(|(n, _)| n == name).map_or(0, |(_, e)| *e)
    }
    pub fn pairs(&self) -> &[(String, i64)] {
        &self.0
    }
    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            let ord = match (self.0.get(i), o.0.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + o.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }
    pub fn pow(&self, k: i64) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(n, e)| (n.clone(), e * k)).collect())
    }
    pub fn inv(&self) -> Monomial {
        self.pow(-1)
    }
    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| e).sum()
    }
    /// Rename variables (targets must stay distinct after merging).
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Monomial {
        let mut m = Monomial::one();
        for (n, e) in &self.0 {
            let t = map.get(n).unwrap_or(n);
            m = m.mul(&Monomial::var_pow(t, *e));
        }
        m
    }
}

/// Lexicographic order with variables compared in name order.
impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            let (ea, eb) = match (self.0.get(i), o.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(a), Some(b)) => match a.0.cmp(&b.0) {
                    Ordering::Less => {
                        i += 1;
                        (a.1, 0)
                    }
                    Ordering::Greater => {
                        j += 1;
                        (0, b.1)
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (a.1, b.1)
                    }
                },
                (Some(a), None) => {
                    i += 1;
                    (a.1, 0)
                }
                (None, Some(b)) => {
                    j += 1;
                    (0, b.1)
                }
            };
            if ea != eb {
                return ea.cmp(&eb);
            }
        }
    }
}
impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (n, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{n}")?;
            } else {
                write!(f, "{n}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }
    pub fn one() -> Self {
        LaurentPoly::constant(Scalar::one())
    }
    pub fn constant(c: Scalar) -> Self {
        LaurentPoly::term(Monomial::one(), c)
    }
    pub fn var(name: &str) -> Self {
        LaurentPoly::term(Monomial::var(name), Scalar::one())
    }
    pub fn monomial(m: Monomial) -> Self {
        LaurentPoly::term(m, Scalar::one())
    }
    pub fn term(m: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { terms }
    }
    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = LaurentPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x = &*x + &c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }
    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }
    /// Single term c·m, if this polynomial is one.
    pub fn as_term(&self) -> Option<(&Monomial, &Scalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }
    pub fn variables(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(n, _)| n.clone())).collect()
    }
    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }
    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(k, x)| (k.mul(m), x.clone())).collect() }
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = LaurentPoly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
    /// Componentwise minimum exponents (the largest monomial dividing every term).
    pub fn monomial_gcd(&self) -> Monomial {
        let vars = self.variables();
        let pairs: Vec<(String, i64)> = vars
            .into_iter()
            .map(|v| {
                let e = self.terms.keys().map(|m| m.exp(&v)).min().unwrap_or(0);
                (v, e)
            })
            .filter(|(_, e)| *e != 0)
            .collect();
        Monomial(pairs)
    }
    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient self / d, or `None` if d does not divide self.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<LaurentPoly> {
        if d.is_zero() {
            return None;
        }
        if let Some((m, c)) = d.as_term() {
            let ci = c.try_inv().ok()?;
            return Some(self.mul_monomial(&m.inv()).scale(&ci));
        }
        // reduce to polynomials: d0 has no monomial factor, p0 exponents ≥ 0
        let gd = d.monomial_gcd();
        let d0 = d.mul_monomial(&gd.inv());
        let gp = self.monomial_gcd();
        let mut r = self.mul_monomial(&gp.inv());
        let (ld, lc) = d0.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let lci = lc.try_inv().ok()?;
        let mut quo = LaurentPoly::zero();
        while let Some((lm, c)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = lm.mul(&ld.inv());
            if qm.0.iter().any(|(_, e)| *e < 0) {
                return None;
            }
            let qc = &c * &lci;
            r = &r - &d0.mul_monomial(&qm).scale(&qc);
            quo.add_term(qm, qc);
        }
        Some(quo.mul_monomial(&gp.mul(&gd.inv())))
    }

    /// Apply var ↦ scale·monomial for each mapped variable.
    pub fn substitute(&self, map: &Subst) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut mon = Monomial::one();
            for (n, e) in &m.0 {
                match map.get(n) {
                    Some((s, t)) => {
                        coef = coef.try_mul(&s.pow(*e)?)?;
                        mon = mon.mul(&t.pow(*e));
                    }
                    None => mon = mon.mul(&Monomial::var_pow(n, *e)),
                }
            }
            out.add_term(mon, coef);
        }
        Ok(out)
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms.iter().map(|(m, c)| (m.rename(map), c.clone())))
    }

    pub fn map_scalars(&self, f: &dyn Fn(&Scalar) -> Result<Scalar>) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Evaluate at constant values for all variables.
    pub fn eval(&self, vals: &BTreeMap<String, Scalar>) -> Result<Scalar> {
        let map: Subst = vals.iter().map(|(k, v)| (k.clone(), (v.clone(), Monomial::one()))).collect();
        let p = self.substitute(&map)?;
        p.as_constant().ok_or_else(|| Error::Domain(String::from("unassigned variables in evaluation")))
    }

    /// Normalize to (unit, factor): self = unit·factor with unit a single
    /// term and factor a polynomial with no monomial factor whose lex-smallest
    /// coefficient is 1.
    fn split_unit(&self) -> (LaurentPoly, LaurentPoly) {
        let g = self.monomial_gcd();
        let f = self.mul_monomial(&g.inv());
        let c = f.terms.values().next().unwrap().clone();
        let ci = c.try_inv().unwrap();
        (LaurentPoly::term(g, c), f.scale(&ci))
    }
}

/// Substitution map: variable ↦ scale·monomial (a constant when the monomial is 1).
pub type Subst = BTreeMap<String, (Scalar, Monomial)>;

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }
}
impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, o: &LaurentPoly) -> LaurentPoly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }
}
impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        let mut r = LaurentPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }
}
impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

fn needs_parens(s: &str) -> bool {
    s[1..].contains(['+', '-']) || s.contains('(')
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (m, c) in &self.terms {
            let cs = c.to_string();
            let t = if m.is_one() {
                if needs_parens(&cs) {
                    format!("({cs})")
                } else {
                    cs
                }
            } else if c.is_one() {
                m.to_string()
            } else if (-c).is_one() {
                format!("-{m}")
            } else if needs_parens(&cs) {
                format!("({cs})*{m}")
            } else {
                format!("{cs}*{m}")
            };
            if !out.is_empty() && !t.starts_with('-') {
                out.push('+');
            }
            out.push_str(&t);
        }
        write!(f, "{out}")
    }
}

/// numerator / ∏ factor^mult.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: LaurentPoly,
    den: Vec<(LaurentPoly, u32)>,
}

impl From<LaurentPoly> for RationalFunction {
    fn from(p: LaurentPoly) -> Self {
        RationalFunction { num: p, den: Vec::new() }
    }
}

impl From<Scalar> for RationalFunction {
    fn from(c: Scalar) -> Self {
        LaurentPoly::constant(c).into()
    }
}

impl RationalFunction {
    pub fn zero() -> Self {
        LaurentPoly::zero().into()
    }
    pub fn one() -> Self {
        LaurentPoly::one().into()
    }
    pub fn var(name: &str) -> Self {
        LaurentPoly::var(name).into()
    }
    pub fn constant(c: Scalar) -> Self {
        c.into()
    }
    pub fn monomial(m: Monomial, c: Scalar) -> Self {
        LaurentPoly::term(m, c).into()
    }
    /// numer / ∏ factors (each factor may be any nonzero Laurent polynomial).
    pub fn from_factors(num: LaurentPoly, factors: &[(LaurentPoly, u32)]) -> Result<Self> {
        let mut r = RationalFunction::from(num);
        for (f, k) in factors {
            for _ in 0..*k {
                r = r.try_div(&RationalFunction::from(f.clone()))?;
            }
        }
        Ok(r)
    }
    pub fn numerator(&self) -> &LaurentPoly {
        &self.num
    }
    pub fn factors(&self) -> &[(LaurentPoly, u32)] {
        &self.den
    }
    pub fn denominator(&self) -> LaurentPoly {
        let mut d = LaurentPoly::one();
        for (f, k) in &self.den {
            d = &d * &f.pow(*k);
        }
        d
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn variables(&self) -> BTreeSet<String> {
        let mut s = self.num.variables();
        for (f, _) in &self.den {
            s.extend(f.variables());
        }
        s
    }

    fn push_factor(den: &mut Vec<(LaurentPoly, u32)>, f: LaurentPoly, k: u32) {
        match den.iter_mut().find(|(g, _)| *g == f) {
            Some((_, m)) => *m += k,
            None => den.push((f, k)),
        }
    }

    pub fn try_mul(&self, o: &RationalFunction) -> Result<RationalFunction> {
        if self.is_zero() || o.is_zero() {
            return Ok(RationalFunction::zero());
        }
        let mut den = self.den.clone();
        for (f, k) in &o.den {
            Self::push_factor(&mut den, f.clone(), *k);
        }
        Ok(RationalFunction { num: &self.num * &o.num, den })
    }

    pub fn try_inv(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (unit, f) = self.num.split_unit();
        let (m, c) = unit.as_term().unwrap();
        let mut num = self.denominator().mul_monomial(&m.inv()).scale(&c.try_inv()?);
        let mut den = Vec::new();
        if f.as_constant().is_none() {
            den.push((f, 1));
        } else {
            num = num.scale(&f.as_constant().unwrap().try_inv()?);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn try_div(&self, o: &RationalFunction) -> Result<RationalFunction> {
        self.try_mul(&o.try_inv()?)
    }

    /// Multiply by a single polynomial factor inverse, keeping it as one factor.
    pub fn div_poly(&self, p: &LaurentPoly) -> Result<RationalFunction> {
        self.try_div(&RationalFunction::from(p.clone()))
    }

    /// Both numerators over the lcm of the two factor lists.
    fn common(&self, o: &RationalFunction) -> (LaurentPoly, LaurentPoly, Vec<(LaurentPoly, u32)>) {
        let mut lcm: Vec<(LaurentPoly, u32)> = self.den.clone();
        for (f, k) in &o.den {
            match lcm.iter_mut().find(|(g, _)| g == f) {
                Some((_, m)) => *m = (*m).max(*k),
                None => lcm.push((f.clone(), *k)),
            }
        }
        let lift = |r: &RationalFunction| -> LaurentPoly {
            let mut n = r.num.clone();
            for (f, k) in &lcm {
                let have = r.den.iter().find(|(g, _)| g == f).map_or(0, |(_, m)| *m);
                if *k > have {
                    n = &n * &f.pow(k - have);
                }
            }
            n
        };
        (lift(self), lift(o), lcm)
    }

    pub fn try_add(&self, o: &RationalFunction) -> Result<RationalFunction> {
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        let (a, b, den) = self.common(o);
        let num = &a + &b;
        if num.is_zero() {
            return Ok(RationalFunction::zero());
        }
        Ok(RationalFunction { num, den })
    }

    pub fn try_sub(&self, o: &RationalFunction) -> Result<RationalFunction> {
        self.try_add(&-o)
    }

    pub fn scale(&self, c: &Scalar) -> RationalFunction {
        if c.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> RationalFunction {
        RationalFunction { num: self.num.mul_monomial(m), den: self.den.clone() }
    }

    pub fn pow(&self, e: i64) -> Result<RationalFunction> {
        let b = if e < 0 { self.try_inv()? } else { self.clone() };
        let mut acc = RationalFunction::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.try_mul(&b)?;
        }
        Ok(acc)
    }

    /// Cancel denominator factors that divide the numerator exactly.
    pub fn reduce(&self) -> RationalFunction {
        let mut num = self.num.clone();
        let mut den = Vec::new();
        for (f, k) in &self.den {
            let mut k = *k;
            while k > 0 {
                match num.div_exact(f) {
                    Some(q) => {
                        num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                den.push((f.clone(), k));
            }
        }
        RationalFunction { num, den }
    }

    /// The Laurent polynomial this function equals, if it is one.
    pub fn as_laurent(&self) -> Option<LaurentPoly> {
        let r = self.reduce();
        r.den.is_empty().then_some(r.num)
    }

    fn rebuild(num: LaurentPoly, factors: Vec<(LaurentPoly, u32)>) -> Result<RationalFunction> {
        let mut r = RationalFunction::from(num);
        for (f, k) in factors {
            if f.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let (unit, g) = f.split_unit();
            let (m, c) = unit.as_term().unwrap();
            let ck = c.pow(k as i64)?.try_inv()?;
            r.num = r.num.mul_monomial(&m.pow(-(k as i64))).scale(&ck);
            if g.as_constant().is_none() {
                Self::push_factor(&mut r.den, g, k);
            }
        }
        Ok(r)
    }

    /// Monomial substitution var ↦ scale·monomial.
    pub fn substitute(&self, map: &Subst) -> Result<RationalFunction> {
        let num = self.num.substitute(map)?;
        let mut fs = Vec::new();
        for (f, k) in &self.den {
            fs.push((f.substitute(map)?, *k));
        }
        Self::rebuild(num, fs)
    }

    /// Substitute constants for variables.
    pub fn subst_const(&self, vals: &[(&str, Scalar)]) -> Result<RationalFunction> {
        let map: Subst = vals.iter().map(|(n, c)| (n.to_string(), (c.clone(), Monomial::one()))).collect();
        self.substitute(&map)
    }

    /// Substitute var ↦ scale·var.
    pub fn scale_var(&self, var: &str, scale: &Scalar) -> Result<RationalFunction> {
        let mut map = Subst::new();
        map.insert(var.to_string(), (scale.clone(), Monomial::var(var)));
        self.substitute(&map)
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> RationalFunction {
        let mut den = Vec::new();
        for (f, k) in &self.den {
            Self::push_factor(&mut den, f.rename(map), *k);
        }
        // renaming can break the lex normalization of a factor
        Self::rebuild(self.num.rename(map), den).expect("renaming keeps factors nonzero")
    }

    /// Substitute var ↦ scale·monomial.
    pub fn subst_term(&self, var: &str, scale: &Scalar, m: &Monomial) -> Result<RationalFunction> {
        let mut map = Subst::new();
        map.insert(var.to_string(), (scale.clone(), m.clone()));
        self.substitute(&map)
    }

    pub fn rename_pairs(&self, pairs: &[(&str, &str)]) -> RationalFunction {
        let map = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        self.rename(&map)
    }

    pub fn map_scalars(&self, f: &dyn Fn(&Scalar) -> Result<Scalar>) -> Result<RationalFunction> {
        let mut fs = Vec::new();
        for (g, k) in &self.den {
            fs.push((g.map_scalars(f)?, *k));
        }
        Self::rebuild(self.num.map_scalars(f)?, fs)
    }

    /// Convert coefficients into the given scalar mode (evaluates v ↦ √q).
    pub fn in_mode(&self, mode: ScalarMode) -> Result<RationalFunction> {
        self.map_scalars(&|c| c.in_mode(mode))
    }

    /// Σ over all permutations of `vars` of f(σ·vars).
    pub fn symmetrize(&self, vars: &[&str]) -> Result<RationalFunction> {
        let mut acc = RationalFunction::zero();
        for perm in permutations(vars.len()) {
            let map: BTreeMap<String, String> = vars.iter().zip(perm.iter()).map(|(a, &i)| (a.to_string(), vars[i].to_string())).collect();
            acc = acc.try_add(&self.rename(&map))?;
        }
        Ok(acc)
    }

    /// Parse `numer | denom` or a plain expression; `v` is the scalar symbol.
    pub fn parse(s: &str, mode: ScalarMode) -> Result<RationalFunction> {
        let parse_part = |p: &str| -> Result<Parsed> { expr::parse(p)?.eval::<Parsed>() };
        let r = match s.split_once('|') {
            Some((n, d)) => {
                let n = parse_part(n)?;
                let d = parse_part(d)?;
                n.div(d)?.rf
            }
            None => parse_part(s)?.rf,
        };
        r.in_mode(mode)
    }

    /// Laurent expansion in the region 1 ≫ x₁ ≫ … ≫ xₙ (`order` lists x₁..xₙ),
    /// truncated to the window.
    pub fn expand_region(&self, order: &[&str], window: &DegreeWindow) -> Result<BTreeMap<Monomial, Scalar>> {
        expand_region(self, order, window)
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, o: &Self) -> bool {
        let (a, b, _) = self.common(o);
        a == b
    }
}

macro_rules! rf_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&RationalFunction> for &RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: &RationalFunction) -> RationalFunction {
                self.$f(o).unwrap_or_else(|e| panic!("rational function {}: {e}", stringify!($m)))
            }
        }
        impl $tr<RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: RationalFunction) -> RationalFunction {
                (&self).$m(&o)
            }
        }
    };
}
rf_binop!(Add, add, try_add);
rf_binop!(Sub, sub, try_sub);
rf_binop!(Mul, mul, try_mul);
impl core::ops::Div for &RationalFunction {
    type Output = RationalFunction;
    fn div(self, o: &RationalFunction) -> RationalFunction {
        self.try_div(o).unwrap_or_else(|e| panic!("rational function div: {e}"))
    }
}
impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.num)?;
        if self.den.is_empty() {
            return Ok(());
        }
        let mut fs: Vec<String> = self
            .den
            .iter()
            .map(|(g, k)| if *k == 1 { format!("({g})") } else { format!("({g})^{k}") })
            .collect();
        fs.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        write!(f, " | {}", fs.join("*"))
    }
}

/// Parser value: a rational function, plus its factorization when it is a
/// plain product of polynomial powers (so `1/((1-t)*(1-2*t))` keeps two factors).
struct Parsed {
    rf: RationalFunction,
    prod: Option<Vec<(LaurentPoly, i64)>>,
}

impl Parsed {
    fn plain(rf: RationalFunction) -> Self {
        let prod = rf.as_laurent_fast().map(|p| vec![(p, 1)]);
        Parsed { rf, prod }
    }
}

impl RationalFunction {
    fn as_laurent_fast(&self) -> Option<LaurentPoly> {
        self.den.is_empty().then(|| self.num.clone())
    }
}

impl Target for Parsed {
    fn int(n: &BigInt) -> Result<Self> {
        Ok(Parsed::plain(Scalar::from_bigint(n.clone()).into()))
    }
    fn var(name: &str) -> Result<Self> {
        if name == "v" {
            Ok(Parsed::plain(Scalar::v(ScalarMode::Symbolic).into()))
        } else {
            Ok(Parsed::plain(RationalFunction::var(name)))
        }
    }
    fn add(self, o: Self) -> Result<Self> {
        Ok(Parsed::plain(self.rf.try_add(&o.rf)?))
    }
    fn sub(self, o: Self) -> Result<Self> {
        Ok(Parsed::plain(self.rf.try_sub(&o.rf)?))
    }
    fn mul(self, o: Self) -> Result<Self> {
        let prod = match (self.prod, o.prod) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        };
        Ok(Parsed { rf: self.rf.try_mul(&o.rf)?, prod })
    }
    fn div(self, o: Self) -> Result<Self> {
        let rf = match &o.prod {
            Some(fs) => {
                let mut r = self.rf;
                for (p, k) in fs {
                    let inv = RationalFunction::from(p.clone()).try_inv()?;
                    for _ in 0..*k {
                        r = r.try_mul(&inv)?;
                    }
                    for _ in 0..(-*k) {
                        r = r.try_mul(&RationalFunction::from(p.clone()))?;
                    }
                }
                r
            }
            None => self.rf.try_div(&o.rf)?,
        };
        let prod = match (self.prod, o.prod) {
            (Some(mut a), Some(b)) => {
                a.extend(b.into_iter().map(|(p, k)| (p, -k)));
                Some(a)
            }
            _ => None,
        };
        Ok(Parsed { rf, prod })
    }
    fn neg(self) -> Result<Self> {
        let prod = self.prod.map(|mut v| {
            v.push((LaurentPoly::constant(-Scalar::one()), 1));
            v
        });
        Ok(Parsed { rf: -&self.rf, prod })
    }
    fn pow(self, e: i64) -> Result<Self> {
        let prod = self.prod.map(|v| v.into_iter().map(|(p, k)| (p, k * e)).collect());
        Ok(Parsed { rf: self.rf.pow(e)?, prod })
    }
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out.sort();
    out
}

/// Closed per-variable exponent intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeWindow {
    bounds: BTreeMap<String, (i64, i64)>,
}

impl DegreeWindow {
    pub fn new() -> Self {
        DegreeWindow::default()
    }
    pub fn with(mut self, var: &str, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window interval");
        self.bounds.insert(var.to_string(), (lo, hi));
        self
    }
    /// The same interval for every listed variable.
    pub fn cube(vars: &[&str], lo: i64, hi: i64) -> Self {
        vars.iter().fold(DegreeWindow::new(), |w, v| w.with(v, lo, hi))
    }
    pub fn bounds(&self, var: &str) -> Option<(i64, i64)> {
        self.bounds.get(var).copied()
    }
    pub fn contains(&self, m: &Monomial) -> bool {
        m.0.iter().all(|(n, _)| self.bounds.contains_key(n))
            && self.bounds.iter().all(|(n, (lo, hi))| {
                let e = m.exp(n);
                *lo <= e && e <= *hi
            })
    }
}

fn expand_region(f: &RationalFunction, order: &[&str], window: &DegreeWindow) -> Result<BTreeMap<Monomial, Scalar>> {
    for v in f.variables() {
        if !order.contains(&v.as_str()) {
            return Err(Error::Domain(format!("variable {v} missing from expansion order")));
        }
    }
    for v in order {
        if window.bounds(v).is_none() {
            return Err(Error::Domain(format!("window has no bounds for {v}")));
        }
    }
    let key = |m: &Monomial| -> Vec<i64> { order.iter().rev().map(|v| m.exp(v)).collect() };
    // per factor: dominant term u, and g = 1 - f/u (all terms small)
    let mut acc = f.num.clone();
    let mut series: Vec<LaurentPoly> = Vec::new();
    for (p, k) in &f.den {
        let (um, uc) = p.terms().min_by(|a, b| key(a.0).cmp(&key(b.0))).map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let uinv = LaurentPoly::term(um.inv(), uc.try_inv()?);
        let g = &LaurentPoly::one() - &(p * &uinv);
        for _ in 0..*k {
            acc = &acc * &uinv;
            if !g.is_zero() {
                series.push(g.clone());
            }
        }
    }
    // positive integer weights making every series term strictly positive
    let e_max = series.iter().flat_map(|g| g.terms().flat_map(|(m, _)| m.0.iter().map(|(_, e)| e.abs()))).max().unwrap_or(0);
    let base = e_max + 2;
    let mut weights = BTreeMap::new();
    let mut w = 1i64;
    for v in order {
        weights.insert(v.to_string(), w);
        w = w.checked_mul(base).ok_or_else(|| Error::guard("expansion weight", w, i64::MAX / base))?;
    }
    let val = |m: &Monomial| -> i64 { m.0.iter().map(|(n, e)| e * weights[n]).sum() };
    let vmax: i64 = order
        .iter()
        .map(|v| {
            let (lo, hi) = window.bounds(v).unwrap();
            (lo * weights[*v]).max(hi * weights[*v])
        })
        .sum();
    for g in &series {
        if g.terms().any(|(m, _)| val(m) <= 0) {
            return Err(Error::Domain(format!("denominator factor not expandable in the region: {g}")));
        }
    }
    // sign structure of remaining series, for box pruning
    let n = series.len();
    let mut can_dec = vec![BTreeSet::new(); n + 1];
    let mut can_inc = vec![BTreeSet::new(); n + 1];
    for j in (0..n).rev() {
        let (mut d, mut i) = (can_dec[j + 1].clone(), can_inc[j + 1].clone());
        for (m, _) in series[j].terms() {
            for (v, e) in &m.0 {
                if *e < 0 {
                    d.insert(v.clone());
                } else {
                    i.insert(v.clone());
                }
            }
        }
        can_dec[j] = d;
        can_inc[j] = i;
    }
    let prune = |p: LaurentPoly, j: usize| -> LaurentPoly {
        LaurentPoly::from_terms(p.terms.into_iter().filter(|(m, _)| {
            if val(m) > vmax {
                return false;
            }
            order.iter().all(|v| {
                let (lo, hi) = window.bounds(v).unwrap();
                let e = m.exp(v);
                !((e > hi && !can_dec[j].contains(*v)) || (e < lo && !can_inc[j].contains(*v)))
            })
        }))
    };
    acc = prune(acc, 0);
    for (j, g) in series.iter().enumerate() {
        let mut total = acc.clone();
        let mut t = acc;
        loop {
            t = prune(&t * g, j);
            if t.is_zero() {
                break;
            }
            total = &total + &t;
        }
        acc = prune(total, j + 1);
    }
    Ok(acc.terms.into_iter().filter(|(m, _)| window.contains(m)).collect())
}

macro_rules! lp_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, o: LaurentPoly) -> LaurentPoly {
                (&self).$m(&o)
            }
        }
    };
}
lp_owned!(Add, add);
lp_owned!(Sub, sub);
lp_owned!(Mul, mul);
