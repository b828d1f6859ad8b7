//! Coherent sheaves on P¹ over 𝔽_q: iso classes, Hom/Ext/Aut counts, the
//! Euler form, subsheaf counting, Hall products, Hecke operators, windowed
//! comultiplication, Eisenstein and Ψ-series, and the intertwiner M.
//!
//! Every coherent sheaf is V ⊕ T with V = ⊕O(dᵢ) and T a torsion sheaf, so
//! iso classes are (splitting type, place ↦ partition).
//!
//! Structure constants are counted, never looked up:
//! - bundle by bundle: Riedtmann's formula
//!   g^C_{AB} = |Ext¹(B,A)_C|·|Aut C| / (|Aut A||Aut B||Hom(B,A)|),
//!   where every Čech cocycle in Ext¹(B,A) is enumerated and its middle term
//!   is identified from h⁰(C(m)) = h⁰(A(m)) + dim ker(δ_m);
//! - bundle onto torsion: surjections V → T are enumerated chart by chart
//!   (x ↦ 1/x for `inf`) and the kernel type is again read from h⁰;
//! - torsion by torsion: local Hall numbers from [`crate::finmod`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::ff::{Elem, FiniteField};
use crate::finmod::{CensusGuard, LocalHall, Partition};
use crate::scalar::{Scalar, ScalarMode};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Places

/// A closed point of P¹: `inf` or a monic irreducible polynomial in x
/// (coefficients as field element codes, constant term first).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlaceP1 {
    Inf,
    Finite(Vec<Elem>),
}

impl PlaceP1 {
    pub fn degree(&self) -> u32 {
        match self {
            PlaceP1::Inf => 1,
            PlaceP1::Finite(p) => (p.len() - 1) as u32,
        }
    }
    /// The local equation in the chart containing the place: y for `inf`
    /// (y = 1/x), p(x) otherwise.
    fn local_poly(&self) -> Vec<Elem> {
        match self {
            PlaceP1::Inf => vec![0, 1],
            PlaceP1::Finite(p) => p.clone(),
        }
    }
    fn key(&self) -> (u32, u8, Vec<Elem>) {
        match self {
            PlaceP1::Inf => (1, 0, Vec::new()),
            PlaceP1::Finite(p) => (self.degree(), 1, p.iter().rev().copied().collect()),
        }
    }
    /// Parses `inf`, `x`, `x+1`, `x^2+x+1`, `x^2+2*x+3` (codes as coefficients).
    pub fn parse(s: &str, field: &FiniteField) -> Result<PlaceP1> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "inf" {
            return Ok(PlaceP1::Inf);
        }
        let mut coeffs: BTreeMap<usize, Elem> = BTreeMap::new();
        for term in t.split('+') {
            let (c, mono) = match term.split_once('*') {
                Some((c, m)) => (c.parse::<u64>().map_err(|_| Error::parse(s, "bad coefficient"))?, m),
                None if term.starts_with('x') => (1, term),
                None => (term.parse::<u64>().map_err(|_| Error::parse(s, "bad constant"))?, ""),
            };
            if c >= field.q() {
                return Err(Error::parse(s, "coefficient code out of range"));
            }
            let k = match mono {
                "" => 0,
                "x" => 1,
                m => m
                    .strip_prefix("x^")
                    .and_then(|e| e.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(s, "bad monomial"))?,
            };
            if coeffs.insert(k, c as Elem).is_some() {
                return Err(Error::parse(s, "repeated monomial"));
            }
        }
        let d = *coeffs.keys().max().unwrap_or(&0);
        if d == 0 || coeffs[&d] != 1 {
            return Err(Error::parse(s, "place polynomial must be monic of positive degree"));
        }
        let mut p = vec![0; d + 1];
        for (k, c) in coeffs {
            p[k] = c;
        }
        if !field.monic_irreducibles(d).contains(&p) {
            return Err(Error::parse(s, "polynomial is not irreducible"));
        }
        Ok(PlaceP1::Finite(p))
    }
}

impl PartialOrd for PlaceP1 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PlaceP1 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for PlaceP1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self {
            PlaceP1::Inf => return write!(f, "inf"),
            PlaceP1::Finite(p) => p,
        };
        let mut first = true;
        for k in (0..p.len()).rev() {
            let c = p[k];
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}*x")?,
                (k, 1) => write!(f, "x^{k}")?,
                (k, c) => write!(f, "{c}*x^{k}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Iso classes

/// Splitting type d₁ ≥ … ≥ d_r of ⊕O(dᵢ).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bundle(Vec<i64>);

impl Bundle {
    pub fn new(mut d: Vec<i64>) -> Self {
        d.sort_unstable_by(|a, b| b.cmp(a));
        Bundle(d)
    }
    pub fn zero() -> Self {
        Bundle(Vec::new())
    }
    pub fn line(d: i64) -> Self {
        Bundle(vec![d])
    }
    pub fn degrees(&self) -> &[i64] {
        &self.0
    }
    pub fn rank(&self) -> usize {
        self.0.len()
    }
    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }
    pub fn dual(&self) -> Bundle {
        Bundle::new(self.0.iter().map(|d| -d).collect())
    }
    pub fn twist(&self, k: i64) -> Bundle {
        Bundle(self.0.iter().map(|d| d + k).collect())
    }
    /// h⁰(V(m)) = Σ max(dᵢ + m + 1, 0).
    pub fn h0(&self, m: i64) -> i64 {
        self.0.iter().map(|d| (d + m + 1).max(0)).sum()
    }
    /// Splitting types of rank r, degree d with all summands in [lo, hi].
    pub fn all(r: usize, d: i64, lo: i64, hi: i64) -> Vec<Bundle> {
        fn go(r: usize, d: i64, lo: i64, hi: i64, cur: &mut Vec<i64>, out: &mut Vec<Bundle>) {
            if r == 0 {
                if d == 0 {
                    out.push(Bundle(cur.clone()));
                }
                return;
            }
            // remaining r entries are ≤ hi and ≥ lo
            for x in (lo..=hi).rev() {
                let rest = d - x;
                if rest > (r as i64 - 1) * x || rest < (r as i64 - 1) * lo {
                    continue;
                }
                cur.push(x);
                go(r - 1, rest, lo, x, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if lo <= hi {
            go(r, d, lo, hi, &mut Vec::new(), &mut out);
        }
        out
    }
}

/// Splitting type from the function m ↦ h⁰(V(m)) on [m0, m0 + len).
fn bundle_from_h0(rank: usize, m0: i64, h: &[i64]) -> Option<Bundle> {
    // #{dᵢ ≥ −m} = h(m) − h(m−1)
    let mut out = Vec::new();
    let mut prev_count = 0;
    for k in 1..h.len() {
        let count = (h[k] - h[k - 1]) as usize;
        if count < prev_count {
            return None;
        }
        for _ in prev_count..count {
            out.push(-(m0 + k as i64));
        }
        prev_count = count;
    }
    (out.len() == rank).then(|| Bundle::new(out))
}

/// Torsion sheaf: place ↦ nonempty partition.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Torsion(BTreeMap<PlaceP1, Partition>);

impl Torsion {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn at(place: PlaceP1, lambda: Partition) -> Self {
        Self::from_parts([(place, lambda)])
    }
    pub fn from_parts(parts: impl IntoIterator<Item = (PlaceP1, Partition)>) -> Self {
        Torsion(parts.into_iter().filter(|(_, l)| !l.is_empty()).collect())
    }
    pub fn parts(&self) -> &BTreeMap<PlaceP1, Partition> {
        &self.0
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(x, l)| (x.degree() * l.size()) as i64).sum()
    }
    pub fn get(&self, x: &PlaceP1) -> Partition {
        self.0.get(x).cloned().unwrap_or_default()
    }
}

/// A coherent sheaf V ⊕ T.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coherent {
    pub bundle: Bundle,
    pub torsion: Torsion,
}

impl Coherent {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn bundle(v: Bundle) -> Self {
        Coherent { bundle: v, torsion: Torsion::zero() }
    }
    pub fn line(d: i64) -> Self {
        Self::bundle(Bundle::line(d))
    }
    pub fn torsion(t: Torsion) -> Self {
        Coherent { bundle: Bundle::zero(), torsion: t }
    }
    pub fn new(v: Bundle, t: Torsion) -> Self {
        Coherent { bundle: v, torsion: t }
    }
    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }
    pub fn degree(&self) -> i64 {
        self.bundle.degree() + self.torsion.degree()
    }
    pub fn class(&self) -> (i64, i64) {
        (self.rank() as i64, self.degree())
    }
    pub fn is_bundle(&self) -> bool {
        self.torsion.is_zero()
    }
    pub fn is_torsion(&self) -> bool {
        self.bundle.rank() == 0
    }
    pub fn is_zero(&self) -> bool {
        self.is_bundle() && self.is_torsion()
    }
}

impl fmt::Display for Coherent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{\"bundle\":[")?;
        for (i, d) in self.bundle.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "],\"torsion\":{{")?;
        for (i, (x, l)) in self.torsion.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "\"{x}\":{l}")?;
        }
        write!(f, "}}}}")
    }
}

// ---------------------------------------------------------------------------
// Hall elements

/// Finitely supported function on iso classes (coefficient of 1_C = value at C).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HallElement {
    terms: BTreeMap<Coherent, Scalar>,
}

impl HallElement {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn unit() -> Self {
        Self::basis(Coherent::zero())
    }
    pub fn basis(c: Coherent) -> Self {
        Self::from_terms([(c, Scalar::one())])
    }
    pub fn from_terms(terms: impl IntoIterator<Item = (Coherent, Scalar)>) -> Self {
        let mut out = Self::zero();
        for (c, x) in terms {
            out.add_term(c, x);
        }
        out
    }
    pub fn add_term(&mut self, c: Coherent, x: Scalar) {
        if x.is_zero() {
            return;
        }
        let e = self.terms.entry(c.clone()).or_default();
        *e = &*e + &x;
        if e.is_zero() {
            self.terms.remove(&c);
        }
    }
    pub fn terms(&self) -> &BTreeMap<Coherent, Scalar> {
        &self.terms
    }
    pub fn coeff(&self, c: &Coherent) -> Scalar {
        self.terms.get(c).cloned().unwrap_or_default()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_bundle_only(&self) -> bool {
        self.terms.keys().all(Coherent::is_bundle)
    }
    pub fn scale(&self, x: &Scalar) -> Self {
        Self::from_terms(self.terms.iter().map(|(c, y)| (c.clone(), y * x)))
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (c, x) in &o.terms {
            out.add_term(c.clone(), x.clone());
        }
        out
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }
    /// Bundle part p_bun.
    pub fn bundle_part(&self) -> Self {
        Self::from_terms(self.terms.iter().filter(|(c, _)| c.is_bundle()).map(|(c, x)| (c.clone(), x.clone())))
    }
    /// f ↦ f*, f*(V) = f(V^∨), on bundle-only elements.
    pub fn dual(&self) -> Result<Self> {
        if !self.is_bundle_only() {
            return Err(Error::Unsupported(String::from("duality on torsion classes")));
        }
        Ok(Self::from_terms(self.terms.iter().map(|(c, x)| (Coherent::bundle(c.bundle.dual()), x.clone()))))
    }
}

impl fmt::Display for HallElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (c, x)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}: {x}")?;
        }
        write!(f, "}}")
    }
}

/// Element of H ⊗ H (finitely many terms; windowed when it comes from Δ or M).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HallTensor {
    terms: BTreeMap<(Coherent, Coherent), Scalar>,
}

impl HallTensor {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn add_term(&mut self, k: (Coherent, Coherent), x: Scalar) {
        if x.is_zero() {
            return;
        }
        let e = self.terms.entry(k.clone()).or_default();
        *e = &*e + &x;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }
    pub fn terms(&self) -> &BTreeMap<(Coherent, Coherent), Scalar> {
        &self.terms
    }
    pub fn coeff(&self, a: &Coherent, b: &Coherent) -> Scalar {
        self.terms.get(&(a.clone(), b.clone())).cloned().unwrap_or_default()
    }
    pub fn tensor(a: &HallElement, b: &HallElement) -> Self {
        let mut out = Self::zero();
        for (x, s) in a.terms() {
            for (y, t) in b.terms() {
                out.add_term((x.clone(), y.clone()), s * t);
            }
        }
        out
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, x) in &o.terms {
            out.add_term(k.clone(), x.clone());
        }
        out
    }
    pub fn scale(&self, x: &Scalar) -> Self {
        let mut out = Self::zero();
        for (k, y) in &self.terms {
            out.add_term(k.clone(), y * x);
        }
        out
    }
    /// Keep terms whose two factors satisfy `keep`.
    pub fn filter(&self, keep: impl Fn(&Coherent, &Coherent) -> bool) -> Self {
        let mut out = Self::zero();
        for ((a, b), x) in &self.terms {
            if keep(a, b) {
                out.add_term((a.clone(), b.clone()), x.clone());
            }
        }
        out
    }
}

impl fmt::Display for HallTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, ((a, b), x)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a} ⊗ {b}: {x}")?;
        }
        write!(f, "}}")
    }
}

// ---------------------------------------------------------------------------
// Chart models of torsion modules

/// T_x = ⊕ 𝔽_q[u]/(p^{λᵢ}) in the chart containing x, as residue polynomials.
struct ChartModule<'a> {
    field: &'a FiniteField,
    mods: Vec<Vec<Elem>>,
    dims: Vec<usize>,
}

impl<'a> ChartModule<'a> {
    fn new(field: &'a FiniteField, place: &PlaceP1, lambda: &Partition) -> Self {
        let p = place.local_poly();
        let mods: Vec<Vec<Elem>> =
            lambda.parts().iter().map(|&l| (0..l).fold(vec![1], |acc, _| field.poly_mul(&acc, &p))).collect();
        let dims = mods.iter().map(|m| m.len() - 1).collect();
        ChartModule { field, mods, dims }
    }
    fn dim(&self) -> usize {
        self.dims.iter().sum()
    }
    fn split<'v>(&self, v: &'v [Elem]) -> Vec<&'v [Elem]> {
        let mut out = Vec::new();
        let mut o = 0;
        for &d in &self.dims {
            out.push(&v[o..o + d]);
            o += d;
        }
        out
    }
    /// f(u)·v.
    fn act(&self, f: &[Elem], v: &[Elem]) -> Vec<Elem> {
        let mut out = Vec::with_capacity(self.dim());
        for (part, m) in self.split(v).into_iter().zip(self.mods.iter()) {
            let mut r = self.field.poly_divrem(&self.field.poly_mul(f, part), m).1;
            r.resize(m.len() - 1, 0);
            out.extend(r);
        }
        out
    }
    /// Whether the elements generate the module.
    fn generates(&self, gens: &[Vec<Elem>]) -> bool {
        let n = self.dim();
        let mut rows = Vec::new();
        for g in gens {
            let mut cur = g.clone();
            for _ in 0..n {
                rows.push(cur.clone());
                cur = self.act(&[0, 1], &cur);
            }
        }
        self.field.rank(&rows) == n
    }
}

// ---------------------------------------------------------------------------
// The Hall algebra of P¹

/// Feasibility limits.
#[derive(Clone, Debug)]
pub struct CohGuard {
    pub max_q: u64,
    pub max_rank: usize,
    pub max_abs_degree: i64,
    pub max_torsion_degree: i64,
    /// Largest number of Ext classes or surjections enumerated in one census.
    pub max_enumeration: u64,
}

impl Default for CohGuard {
    fn default() -> Self {
        CohGuard { max_q: 4, max_rank: 3, max_abs_degree: 6, max_torsion_degree: 4, max_enumeration: 1 << 20 }
    }
}

/// Direction of a Hecke operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeckeDirection {
    /// (T_F f)(V) = Σ_{V′ ⊆ V, V/V′ ≅ F} ⟨F,V′⟩ f(V′).
    T,
    /// T*_F(f) = (T_{F*}(f*))*.
    Dual,
}

type Census<K> = Rc<BTreeMap<K, u64>>;

/// Hall algebra of Coh(P¹/𝔽_q) with cached counts.
pub struct P1 {
    field: FiniteField,
    mode: ScalarMode,
    guard: CohGuard,
    local: RefCell<BTreeMap<u32, Rc<LocalHall>>>,
    places: RefCell<BTreeMap<u32, Rc<Vec<PlaceP1>>>>,
    ext_cache: RefCell<BTreeMap<(Bundle, Bundle), Census<Bundle>>>,
    surj_cache: RefCell<BTreeMap<(Bundle, Torsion), Census<Bundle>>>,
    mul_cache: RefCell<BTreeMap<(Coherent, Coherent), Rc<HallElement>>>,
}

impl P1 {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_guard(q, CohGuard::default())
    }
    pub fn with_guard(q: u64, guard: CohGuard) -> Result<Self> {
        if q > guard.max_q {
            return Err(Error::guard("q", q as i64, guard.max_q as i64));
        }
        Ok(P1 {
            field: FiniteField::new(q)?,
            mode: ScalarMode::Numeric(q),
            guard,
            local: RefCell::new(BTreeMap::new()),
            places: RefCell::new(BTreeMap::new()),
            ext_cache: RefCell::new(BTreeMap::new()),
            surj_cache: RefCell::new(BTreeMap::new()),
            mul_cache: RefCell::new(BTreeMap::new()),
        })
    }
    pub fn q(&self) -> u64 {
        self.field.q()
    }
    pub fn field(&self) -> &FiniteField {
        &self.field
    }
    pub fn mode(&self) -> ScalarMode {
        self.mode
    }
    pub fn guard(&self) -> &CohGuard {
        &self.guard
    }
    fn int(n: impl Into<BigInt>) -> Scalar {
        Scalar::from_bigint(n.into())
    }

    /// Local Hall algebra at places of degree d (residue field 𝔽_{q^d}).
    pub fn local(&self, d: u32) -> Result<Rc<LocalHall>> {
        if let Some(h) = self.local.borrow().get(&d) {
            return Ok(h.clone());
        }
        let guard = CensusGuard { max_q: 256, max_size: self.guard.max_torsion_degree as u32, ..CensusGuard::default() };
        let h = Rc::new(LocalHall::with_guard(self.q().pow(d), guard)?);
        self.local.borrow_mut().insert(d, h.clone());
        Ok(h)
    }

    /// Places of degree exactly d.
    pub fn places_of_degree(&self, d: u32) -> Rc<Vec<PlaceP1>> {
        if let Some(p) = self.places.borrow().get(&d) {
            return p.clone();
        }
        let mut v: Vec<PlaceP1> = self.field.monic_irreducibles(d as usize).into_iter().map(PlaceP1::Finite).collect();
        if d == 1 {
            v.insert(0, PlaceP1::Inf);
        }
        let v = Rc::new(v);
        self.places.borrow_mut().insert(d, v.clone());
        v
    }
    /// `inf` plus all monic irreducibles of degree ≤ D.
    pub fn places(&self, max_degree: u32) -> Vec<PlaceP1> {
        (1..=max_degree).flat_map(|d| self.places_of_degree(d).as_ref().clone()).collect()
    }

    /// All torsion sheaves of degree n with their |Aut|.
    pub fn torsion_classes(&self, n: u32) -> Result<Vec<(Torsion, BigInt)>> {
        if n as i64 > self.guard.max_torsion_degree {
            return Err(Error::guard("torsion degree", n as i64, self.guard.max_torsion_degree));
        }
        let labelled: Vec<(PlaceP1, u32)> = self.places(n).into_iter().map(|x| {
            let d = x.degree();
            (x, d)
        }).collect();
        let classes = crate::finmod::torsion_census_global(self.q(), n, &labelled)?;
        Ok(classes.into_iter().map(|(parts, aut)| (Torsion::from_parts(parts), aut)).collect())
    }

    // ----- Hom, Ext, Euler form, Aut -----

    /// (dim Hom(E,F), dim Ext¹(E,F)) over 𝔽_q.
    pub fn hom_ext(&self, e: &Coherent, f: &Coherent) -> (i64, i64) {
        let (mut hom, mut ext) = (0, 0);
        for a in e.bundle.degrees() {
            for b in f.bundle.degrees() {
                hom += (b - a + 1).max(0);
                ext += (a - b - 1).max(0);
            }
        }
        hom += e.rank() as i64 * f.torsion.degree();
        ext += f.rank() as i64 * e.torsion.degree();
        for (x, l) in e.torsion.parts() {
            if let Some(m) = f.torsion.parts().get(x) {
                let s: u32 = l.parts().iter().map(|a| m.parts().iter().map(|b| (*a).min(*b)).sum::<u32>()).sum();
                let s = (s * x.degree()) as i64;
                hom += s;
                ext += s;
            }
        }
        (hom, ext)
    }

    /// ⟨E,F⟩ = v^{rd′ − r′d + rr′} (genus 0).
    pub fn euler(&self, e: &Coherent, f: &Coherent) -> Scalar {
        let ((r, d), (r2, d2)) = (e.class(), f.class());
        Scalar::v_pow(self.mode, r * d2 - r2 * d + r * r2)
    }
    /// ((E,F)) = ⟨E,F⟩⟨F,E⟩.
    pub fn cartan(&self, e: &Coherent, f: &Coherent) -> Scalar {
        self.euler(e, f) * self.euler(f, e)
    }

    /// |Aut V| for V = ⊕O(dᵢ): the block-triangular unit group.
    pub fn aut_bundle(&self, v: &Bundle) -> BigInt {
        let q = BigInt::from(self.q());
        let mut out = BigInt::one();
        let mut mults: BTreeMap<i64, u32> = BTreeMap::new();
        for d in v.degrees() {
            *mults.entry(*d).or_insert(0) += 1;
        }
        for &m in mults.values() {
            // |GL_m(𝔽_q)|
            for k in 0..m {
                out *= q.clone().pow(m) - q.clone().pow(k);
            }
        }
        let mut e = 0u32;
        for a in v.degrees() {
            for b in v.degrees() {
                if a < b {
                    e += (b - a + 1) as u32;
                }
            }
        }
        out * q.pow(e)
    }
    pub fn aut_torsion(&self, t: &Torsion) -> Result<BigInt> {
        let mut out = BigInt::one();
        for (x, l) in t.parts() {
            out *= self.local(x.degree())?.aut_count(l)?;
        }
        Ok(out)
    }
    /// |Aut(V ⊕ T)| = |Aut V|·|Aut T|·q^{rank V · deg T}.
    pub fn aut_count(&self, c: &Coherent) -> Result<BigInt> {
        let e = (c.rank() as i64 * c.torsion.degree()) as u32;
        Ok(self.aut_bundle(&c.bundle) * self.aut_torsion(&c.torsion)? * BigInt::from(self.q()).pow(e))
    }

    // ----- censuses -----

    fn check_bundle(&self, v: &Bundle) -> Result<()> {
        if v.rank() > self.guard.max_rank {
            return Err(Error::guard("rank", v.rank() as i64, self.guard.max_rank as i64));
        }
        for d in v.degrees() {
            if d.abs() > self.guard.max_abs_degree {
                return Err(Error::guard("|degree|", d.abs(), self.guard.max_abs_degree));
            }
        }
        Ok(())
    }

    /// Number of classes in Ext¹(B, A) with each middle term C.
    pub fn ext_census(&self, a: &Bundle, b: &Bundle) -> Result<Census<Bundle>> {
        let key = (a.clone(), b.clone());
        if let Some(c) = self.ext_cache.borrow().get(&key) {
            return Ok(c.clone());
        }
        self.check_bundle(a)?;
        self.check_bundle(b)?;
        let f = &self.field;
        // cocycle coordinates: for each (i, j), exponents e with a_i − b_j < e < 0
        let mut slots: Vec<(usize, usize, i64)> = Vec::new();
        for (i, ai) in a.degrees().iter().enumerate() {
            for (j, bj) in b.degrees().iter().enumerate() {
                for e in (ai - bj + 1)..0 {
                    slots.push((i, j, e));
                }
            }
        }
        let total = (self.q() as u128).checked_pow(slots.len() as u32).unwrap_or(u128::MAX);
        if total > self.guard.max_enumeration as u128 {
            return Err(Error::guard("Ext classes", total.min(i64::MAX as u128) as i64, self.guard.max_enumeration as i64));
        }
        let all: Vec<i64> = a.degrees().iter().chain(b.degrees()).copied().collect();
        let (lo, hi) = (*all.iter().min().unwrap_or(&0), *all.iter().max().unwrap_or(&0));
        let rank = a.rank() + b.rank();
        let m0 = -hi - 1;
        let ms: Vec<i64> = (m0..=-lo + 1).collect();
        let mut out: BTreeMap<Bundle, u64> = BTreeMap::new();
        for xi in f.all_vectors(slots.len()) {
            let h: Vec<i64> = ms
                .iter()
                .map(|&m| {
                    // δ_m : H⁰(B(m)) → H¹(A(m)), columns x^k of each O(b_j + m)
                    let mut rows_idx: Vec<(usize, i64)> = Vec::new();
                    for (i, ai) in a.degrees().iter().enumerate() {
                        for e in (ai + m + 1)..0 {
                            rows_idx.push((i, e));
                        }
                    }
                    let mut cols: Vec<Vec<Elem>> = Vec::new();
                    for (j, bj) in b.degrees().iter().enumerate() {
                        for k in 0..=(bj + m) {
                            let col: Vec<Elem> = rows_idx
                                .iter()
                                .map(|&(i, e)| {
                                    slots
                                        .iter()
                                        .zip(xi.iter())
                                        .find(|((si, sj, se), _)| *si == i && *sj == j && se + k == e)
                                        .map_or(0, |(_, c)| *c)
                                })
                                .collect();
                            cols.push(col);
                        }
                    }
                    let rank_delta = if rows_idx.is_empty() { 0 } else { f.rank(&cols) as i64 };
                    a.h0(m) + b.h0(m) - rank_delta
                })
                .collect();
            let c = bundle_from_h0(rank, m0, &h)
                .ok_or_else(|| Error::Domain(String::from("middle term has inconsistent h⁰ profile")))?;
            *out.entry(c).or_insert(0) += 1;
        }
        let out = Rc::new(out);
        self.ext_cache.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    /// g^C_{AB} for bundles, by Riedtmann's formula over the Ext census.
    pub fn hall_number_bundles(&self, c: &Bundle, a: &Bundle, b: &Bundle) -> Result<BigInt> {
        let census = self.ext_census(a, b)?;
        let Some(&n) = census.get(c) else { return Ok(BigInt::zero()) };
        let hom: i64 = b.degrees().iter().map(|bj| a.degrees().iter().map(|ai| (ai - bj + 1).max(0)).sum::<i64>()).sum();
        let num = BigInt::from(n) * self.aut_bundle(c);
        let den = self.aut_bundle(a) * self.aut_bundle(b) * BigInt::from(self.q()).pow(hom as u32);
        let (g, r) = num.div_rem(&den);
        if !r.is_zero() {
            return Err(Error::Domain(format!("non-integral Hall number for {c:?} ⊇ {a:?}, quotient {b:?}")));
        }
        Ok(g)
    }

    /// Surjections U → T counted by the splitting type of the kernel.
    pub fn surjection_census(&self, u: &Bundle, t: &Torsion) -> Result<Census<Bundle>> {
        let key = (u.clone(), t.clone());
        if let Some(c) = self.surj_cache.borrow().get(&key) {
            return Ok(c.clone());
        }
        self.check_bundle(u)?;
        if t.degree() > self.guard.max_torsion_degree {
            return Err(Error::guard("torsion degree", t.degree(), self.guard.max_torsion_degree));
        }
        let f = &self.field;
        let r = u.rank();
        let mut out: BTreeMap<Bundle, u64> = BTreeMap::new();
        if r == 0 {
            if t.is_zero() {
                out.insert(Bundle::zero(), 1);
            }
            let out = Rc::new(out);
            self.surj_cache.borrow_mut().insert(key, out.clone());
            return Ok(out);
        }
        let places: Vec<(&PlaceP1, ChartModule)> =
            t.parts().iter().map(|(x, l)| (x, ChartModule::new(f, x, l))).collect();
        // local surjections: r-tuples of generators
        let mut local: Vec<Vec<Vec<Vec<Elem>>>> = Vec::new();
        let mut total: u128 = 1;
        for (_, m) in &places {
            let n = m.dim();
            let size = (self.q() as u128).checked_pow((n * r) as u32).unwrap_or(u128::MAX);
            if size > self.guard.max_enumeration as u128 {
                return Err(Error::guard("local maps", size.min(i64::MAX as u128) as i64, self.guard.max_enumeration as i64));
            }
            let gens: Vec<Vec<Vec<Elem>>> = f
                .all_vectors(n * r)
                .map(|v| v.chunks(n).map(|c| c.to_vec()).collect::<Vec<_>>())
                .filter(|g| m.generates(g))
                .collect();
            total = total.saturating_mul(gens.len() as u128);
            local.push(gens);
        }
        if total > self.guard.max_enumeration as u128 {
            return Err(Error::guard("surjections", total.min(i64::MAX as u128) as i64, self.guard.max_enumeration as i64));
        }
        let (lo, hi) = (*u.degrees().last().unwrap(), u.degrees()[0]);
        let m0 = -hi - 1;
        let ms: Vec<i64> = (m0..=-(lo - t.degree()) + 1).collect();
        let mut idx = vec![0usize; places.len()];
        loop {
            if local.iter().any(|g| g.is_empty()) {
                break;
            }
            let h: Vec<i64> = ms
                .iter()
                .map(|&m| {
                    let mut rows: Vec<Vec<Elem>> = Vec::new();
                    for (j, cj) in u.degrees().iter().enumerate() {
                        let k = cj + m;
                        for i in 0..=k.max(-1) {
                            // the form X^i Y^{k−i}
                            let mut row = Vec::new();
                            for (p, ((x, module), gens)) in places.iter().zip(local.iter()).enumerate() {
                                let w = &gens[idx[p]][j];
                                let mut mono = vec![0; (k + 1) as usize];
                                match x {
                                    PlaceP1::Inf => mono[(k - i) as usize] = 1,
                                    PlaceP1::Finite(_) => mono[i as usize] = 1,
                                }
                                f.poly_trim(&mut mono);
                                row.extend(module.act(&mono, w));
                            }
                            rows.push(row);
                        }
                    }
                    let n_rows = rows.len() as i64;
                    let rk = if rows.first().is_some_and(|r| !r.is_empty()) { f.rank(&rows) as i64 } else { 0 };
                    n_rows - rk
                })
                .collect();
            let k = bundle_from_h0(r, m0, &h)
                .ok_or_else(|| Error::Domain(String::from("kernel has inconsistent h⁰ profile")))?;
            *out.entry(k).or_insert(0) += 1;
            // next combination
            let mut p = 0;
            while p < idx.len() {
                idx[p] += 1;
                if idx[p] < local[p].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == idx.len() {
                break;
            }
        }
        let out = Rc::new(out);
        self.surj_cache.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    /// g^U_{V,T} = #{V′ ⊆ U : V′ ≅ V, U/V′ ≅ T} = surjections with kernel V / |Aut T|.
    pub fn hall_number_bundle_torsion(&self, u: &Bundle, v: &Bundle, t: &Torsion) -> Result<BigInt> {
        if u.rank() != v.rank() || u.degree() != v.degree() + t.degree() {
            return Ok(BigInt::zero());
        }
        let n = self.surjection_census(u, t)?.get(v).copied().unwrap_or(0);
        let (g, r) = BigInt::from(n).div_rem(&self.aut_torsion(t)?);
        debug_assert!(r.is_zero());
        Ok(g)
    }

    /// g^{T_C}_{T_A,T_B} = ∏_x local Hall numbers.
    pub fn hall_number_torsion(&self, c: &Torsion, a: &Torsion, b: &Torsion) -> Result<BigInt> {
        let mut places: Vec<&PlaceP1> = c.parts().keys().chain(a.parts().keys()).chain(b.parts().keys()).collect();
        places.sort();
        places.dedup();
        let mut out = BigInt::one();
        for x in places {
            let g = self.local(x.degree())?.hall_number(&c.get(x), &a.get(x), &b.get(x))?;
            if g == 0 {
                return Ok(BigInt::zero());
            }
            out *= g;
        }
        Ok(out)
    }

    /// Torsion sheaves T_C with g^{T_C}_{T_A,T_B} ≠ 0, with that number.
    fn torsion_products(&self, a: &Torsion, b: &Torsion) -> Result<Vec<(Torsion, BigInt)>> {
        let mut places: Vec<PlaceP1> = a.parts().keys().chain(b.parts().keys()).cloned().collect();
        places.sort();
        places.dedup();
        let mut options: Vec<Vec<(Partition, u64)>> = Vec::new();
        for x in &places {
            let (la, lb) = (a.get(x), b.get(x));
            let h = self.local(x.degree())?;
            let mut opts = Vec::new();
            for lc in Partition::all(la.size() + lb.size()) {
                let g = h.hall_number(&lc, &la, &lb)?;
                if g != 0 {
                    opts.push((lc, g));
                }
            }
            options.push(opts);
        }
        let mut out = vec![(Vec::new(), BigInt::one())];
        for (x, opts) in places.iter().zip(options.iter()) {
            let mut next = Vec::new();
            for (parts, g) in &out {
                for (lc, h) in opts {
                    let mut p: Vec<(PlaceP1, Partition)> = parts.clone();
                    p.push((x.clone(), lc.clone()));
                    next.push((p, g * BigInt::from(*h)));
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(|(p, g)| (Torsion::from_parts(p), g)).collect())
    }

    /// Sub-torsion-sheaves T₀ ⊆ T (as classes) with the quotient class and
    /// g^T_{T₀,T″}.
    fn torsion_splittings(&self, t: &Torsion) -> Result<Vec<(Torsion, Torsion, BigInt)>> {
        let mut out = vec![(Vec::new(), Vec::new(), BigInt::one())];
        for (x, l) in t.parts() {
            let census = self.local(x.degree())?.census(l)?;
            let mut next = Vec::new();
            for (subs, quos, g) in &out {
                for ((mu, nu), c) in census.iter() {
                    let mut s: Vec<(PlaceP1, Partition)> = subs.clone();
                    s.push((x.clone(), mu.clone()));
                    let mut qv: Vec<(PlaceP1, Partition)> = quos.clone();
                    qv.push((x.clone(), nu.clone()));
                    next.push((s, qv, g * BigInt::from(*c)));
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(|(s, qv, g)| (Torsion::from_parts(s), Torsion::from_parts(qv), g)).collect())
    }

    // ----- Hall products -----

    /// 1_A * 1_B = ⟨B,A⟩ Σ_C g^C_{AB} 1_C.
    pub fn mul_basis(&self, a: &Coherent, b: &Coherent) -> Result<Rc<HallElement>> {
        let key = (a.clone(), b.clone());
        if let Some(r) = self.mul_cache.borrow().get(&key) {
            return Ok(r.clone());
        }
        let out = self.mul_basis_uncached(a, b)?;
        let out = Rc::new(out);
        self.mul_cache.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    fn mul_basis_uncached(&self, a: &Coherent, b: &Coherent) -> Result<HallElement> {
        if a.is_zero() {
            return Ok(HallElement::basis(b.clone()));
        }
        if b.is_zero() {
            return Ok(HallElement::basis(a.clone()));
        }
        let tw = self.euler(b, a);
        let mut out = HallElement::zero();
        if a.is_torsion() {
            // extensions of V ⊕ T_B by T split off V
            for (tc, g) in self.torsion_products(&a.torsion, &b.torsion)? {
                out.add_term(Coherent::new(b.bundle.clone(), tc), &tw * &Self::int(g));
            }
            return Ok(out);
        }
        if a.is_bundle() && b.is_bundle() {
            let (va, vb) = (&a.bundle, &b.bundle);
            let census = self.ext_census(va, vb)?;
            for c in census.keys() {
                let g = self.hall_number_bundles(c, va, vb)?;
                out.add_term(Coherent::bundle(c.clone()), &tw * &Self::int(g));
            }
            return Ok(out);
        }
        if a.is_bundle() && b.is_torsion() {
            // C = U ⊕ T₀:  g = Σ_{T″} g^T_{T₀,T″}|Aut T₀| q^{r·deg T₀} #Surj(U→T″, ker ≅ V) / |Aut T|
            let v = &a.bundle;
            let t = &b.torsion;
            let r = v.rank() as u32;
            let aut_t = self.aut_torsion(t)?;
            let (lo, hi) = (*v.degrees().last().unwrap(), v.degrees()[0]);
            let mut acc: BTreeMap<Coherent, BigInt> = BTreeMap::new();
            for (t0, t2, g0) in self.torsion_splittings(t)? {
                let aut0 = self.aut_torsion(&t0)?;
                let lift = BigInt::from(self.q()).pow(r * t0.degree() as u32);
                for u in Bundle::all(v.rank(), v.degree() + t2.degree(), lo, hi + t2.degree()) {
                    let s = self.surjection_census(&u, &t2)?.get(v).copied().unwrap_or(0);
                    if s == 0 {
                        continue;
                    }
                    let e = acc.entry(Coherent::new(u, t0.clone())).or_insert_with(BigInt::zero);
                    *e += &g0 * &aut0 * &lift * BigInt::from(s);
                }
            }
            for (c, n) in acc {
                let (g, rem) = n.div_rem(&aut_t);
                if !rem.is_zero() {
                    return Err(Error::Domain(format!("non-integral Hall number for {c}")));
                }
                out.add_term(c, &tw * &Self::int(g));
            }
            return Ok(out);
        }
        // general case via 1_{V⊕T} = ⟨V,T⟩^{-1} 1_T * 1_V and associativity
        let split = |c: &Coherent| -> (HallElement, HallElement, Scalar) {
            let t = Coherent::torsion(c.torsion.clone());
            let v = Coherent::bundle(c.bundle.clone());
            let w = self.euler(&v, &t).try_inv().expect("Euler form is a unit");
            (HallElement::basis(t), HallElement::basis(v), w)
        };
        if !a.is_bundle() {
            let (t, v, w) = split(a);
            let vb = self.mul(&v, &HallElement::basis(b.clone()))?;
            return Ok(self.mul(&t, &vb)?.scale(&w));
        }
        // a is a bundle, b = V_B ⊕ T_B mixed
        let (t, v, w) = split(b);
        let at = self.mul(&HallElement::basis(a.clone()), &t)?;
        Ok(self.mul(&at, &v)?.scale(&w))
    }

    pub fn mul(&self, f: &HallElement, g: &HallElement) -> Result<HallElement> {
        let mut out = HallElement::zero();
        for (a, x) in f.terms() {
            for (b, y) in g.terms() {
                let xy = x * y;
                for (c, z) in self.mul_basis(a, b)?.terms() {
                    out.add_term(c.clone(), &xy * z);
                }
            }
        }
        Ok(out)
    }

    /// g^C_{AB} for any classes, read off from the product.
    pub fn hall_number(&self, c: &Coherent, a: &Coherent, b: &Coherent) -> Result<Scalar> {
        let prod = self.mul_basis(a, b)?;
        let tw = self.euler(b, a).try_inv()?;
        Ok(&prod.coeff(c) * &tw)
    }

    /// Line subsheaves O(d) ⊆ C (rank C ≤ 2) by enumerating section tuples
    /// modulo scalars, classified by the quotient C/O(d).
    pub fn count_line_subsheaves(&self, c: &Bundle, d: i64) -> Result<BTreeMap<Coherent, u64>> {
        if c.rank() > 2 || c.rank() == 0 {
            return Err(Error::Unsupported(format!("line subsheaves of rank {} bundles", c.rank())));
        }
        self.check_bundle(c)?;
        let f = &self.field;
        let degs: Vec<i64> = c.degrees().iter().map(|ci| ci - d).collect();
        let sizes: Vec<usize> = degs.iter().map(|k| (k + 1).max(0) as usize).collect();
        let total: usize = sizes.iter().sum();
        if (self.q() as u128).pow(total as u32) > self.guard.max_enumeration as u128 {
            return Err(Error::guard("section tuples", total as i64, 20));
        }
        let mut out: BTreeMap<Coherent, u64> = BTreeMap::new();
        for v in f.all_vectors(total) {
            // one representative per scalar class: first nonzero entry is 1
            match v.iter().find(|x| **x != 0) {
                Some(&1) => {}
                _ => continue,
            }
            let mut forms = Vec::new();
            let mut o = 0;
            for (k, s) in degs.iter().zip(sizes.iter()) {
                forms.push((*k, v[o..o + s].to_vec()));
                o += s;
            }
            // common zeros: finite part gcd of F(x,1), order at inf = min(k − deg F(x,1))
            let mut g: Vec<Elem> = Vec::new();
            let mut inf_order = i64::MAX;
            for (k, coeffs) in &forms {
                let mut p = coeffs.clone();
                f.poly_trim(&mut p);
                if p.is_empty() {
                    continue;
                }
                inf_order = inf_order.min(k - (p.len() as i64 - 1));
                g = if g.is_empty() { p } else { f.poly_gcd(&g, &p) };
            }
            let mut parts: Vec<(PlaceP1, Partition)> = Vec::new();
            if inf_order > 0 {
                parts.push((PlaceP1::Inf, Partition::new(vec![inf_order as u32])));
            }
            let mut rest = g.clone();
            let lead = *rest.last().unwrap();
            rest = f.poly_scale(&rest, f.inv(lead));
            for e in 1..rest.len() {
                for p in f.monic_irreducibles(e) {
                    let mut k = 0;
                    loop {
                        let (quo, rem) = f.poly_divrem(&rest, &p);
                        if !rem.is_empty() {
                            break;
                        }
                        rest = quo;
                        k += 1;
                    }
                    if k > 0 {
                        parts.push((PlaceP1::Finite(p), Partition::new(vec![k])));
                    }
                }
            }
            let torsion = Torsion::from_parts(parts);
            let e = torsion.degree();
            let quotient = if c.rank() == 1 {
                Coherent::torsion(torsion)
            } else {
                Coherent::new(Bundle::line(c.degree() - d - e), torsion)
            };
            *out.entry(quotient).or_insert(0) += 1;
        }
        Ok(out)
    }

    // ----- Hecke operators -----

    /// T_F or T*_F on a bundle-only element.
    pub fn hecke(&self, ft: &Torsion, f: &HallElement, dir: HeckeDirection) -> Result<HallElement> {
        if !f.is_bundle_only() {
            return Err(Error::Domain(String::from("Hecke operators act on bundle-only elements")));
        }
        match dir {
            HeckeDirection::Dual => Ok(self.hecke(ft, &f.dual()?, HeckeDirection::T)?.dual()?),
            HeckeDirection::T => {
                let fc = Coherent::torsion(ft.clone());
                let mut out = HallElement::zero();
                for (w, x) in f.terms() {
                    let wb = &w.bundle;
                    if wb.rank() == 0 {
                        // T_F(1) = ε(1_F)·1
                        if ft.is_zero() {
                            out.add_term(w.clone(), x.clone());
                        }
                        continue;
                    }
                    let tw = self.euler(&fc, w);
                    let (lo, hi) = (*wb.degrees().last().unwrap(), wb.degrees()[0]);
                    for v in Bundle::all(wb.rank(), wb.degree() + ft.degree(), lo, hi + ft.degree()) {
                        let g = self.hall_number_bundle_torsion(&v, wb, ft)?;
                        if !g.is_zero() {
                            out.add_term(Coherent::bundle(v), x * &tw * Self::int(g));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Orbifold scalar product (f, g) = Σ f(C)g(C)/|Aut C|.
    pub fn scalar_product(&self, f: &HallElement, g: &HallElement) -> Result<Scalar> {
        let mut s = Scalar::zero();
        for (c, x) in f.terms() {
            let y = g.coeff(c);
            if !y.is_zero() {
                s = s + x * &y / Self::int(self.aut_count(c)?);
            }
        }
        Ok(s)
    }

    // ----- comultiplication -----

    /// Δ(1_C) coefficient at 1_A ⊗ 1_B: ⟨B,A⟩ g^C_{AB} |Aut A||Aut B| / |Aut C|.
    pub fn comult_coeff(&self, c: &Coherent, a: &Coherent, b: &Coherent) -> Result<Scalar> {
        let g = self.hall_number(c, a, b)?;
        if g.is_zero() {
            return Ok(g);
        }
        let w = Self::int(self.aut_count(a)? * self.aut_count(b)?) / Self::int(self.aut_count(c)?);
        Ok(self.euler(b, a) * g * w)
    }

    /// Δ_{r′,r″} of a bundle-only element, restricted to bundle ⊗ bundle terms
    /// with deg A in [lo, hi].
    pub fn comult_window(&self, f: &HallElement, split: (usize, usize), deg_window: (i64, i64)) -> Result<HallTensor> {
        let mut out = HallTensor::zero();
        for (c, x) in f.terms() {
            if !c.is_bundle() {
                return Err(Error::Domain(String::from("comult_window takes bundle-only elements")));
            }
            let cb = &c.bundle;
            if cb.rank() != split.0 + split.1 {
                continue;
            }
            if split.0 == 0 || split.1 == 0 {
                let (a, b) = if split.0 == 0 { (Coherent::zero(), c.clone()) } else { (c.clone(), Coherent::zero()) };
                if split.0 > 0 && !(deg_window.0..=deg_window.1).contains(&cb.degree()) {
                    continue;
                }
                if split.0 == 0 && !(deg_window.0..=deg_window.1).contains(&0) {
                    continue;
                }
                out.add_term((a, b), x.clone());
                continue;
            }
            let (cmin, cmax) = (*cb.degrees().last().unwrap(), cb.degrees()[0]);
            for da in deg_window.0..=deg_window.1 {
                let db = cb.degree() - da;
                let a_lo = da - (split.0 as i64 - 1) * cmax;
                let b_hi = db - (split.1 as i64 - 1) * cmin;
                for a in Bundle::all(split.0, da, a_lo, cmax) {
                    for b in Bundle::all(split.1, db, cmin, b_hi) {
                        let (ac, bc) = (Coherent::bundle(a.clone()), Coherent::bundle(b));
                        let k = self.comult_coeff(c, &ac, &bc)?;
                        if !k.is_zero() {
                            out.add_term((ac, bc), x * &k);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Δ_coh of 1_{O(d)} into (line bundle) ⊗ (torsion of degree ≤ n).
    pub fn comult_line_torsion(&self, d: i64, n: u32) -> Result<HallTensor> {
        let c = Coherent::line(d);
        let mut out = HallTensor::zero();
        for k in 0..=n {
            for (t, _) in self.torsion_classes(k)? {
                let a = Coherent::line(d - k as i64);
                let b = Coherent::torsion(t);
                let x = self.comult_coeff(&c, &a, &b)?;
                if !x.is_zero() {
                    out.add_term((a, b), x);
                }
            }
        }
        Ok(out)
    }

    /// Δ of a torsion class: every subsheaf is a torsion subsheaf.
    pub fn comult_torsion(&self, t: &Torsion) -> Result<HallTensor> {
        let c = Coherent::torsion(t.clone());
        let mut out = HallTensor::zero();
        for (t0, t2, _) in self.torsion_splittings(t)? {
            let (a, b) = (Coherent::torsion(t0), Coherent::torsion(t2));
            if out.terms().contains_key(&(a.clone(), b.clone())) {
                continue;
            }
            let x = self.comult_coeff(&c, &a, &b)?;
            out.add_term((a, b), x);
        }
        Ok(out)
    }

    /// Twisted product on H ⊗ H:
    /// (1_{E₁}⊗1_{E₂})(1_{F₁}⊗1_{F₂}) = ((E₂,F₁)) (1_{E₁}*1_{F₁}) ⊗ (1_{E₂}*1_{F₂}).
    pub fn tensor_mul(&self, x: &HallTensor, y: &HallTensor) -> Result<HallTensor> {
        let mut out = HallTensor::zero();
        for ((e1, e2), s) in x.terms() {
            for ((f1, f2), t) in y.terms() {
                let w = self.cartan(e2, f1) * s * t;
                let left = self.mul_basis(e1, f1)?;
                let right = self.mul_basis(e2, f2)?;
                out = out.add(&HallTensor::tensor(&left, &right).scale(&w));
            }
        }
        Ok(out)
    }

    // ----- Eisenstein and Ψ series -----

    /// E_{f,d} = f(O(d))·1_{O(d)} for f(O(d)) = λ^{sign·d}.
    pub fn eisenstein(&self, lambda: &Scalar, sign: i64, d: i64) -> Result<HallElement> {
        Ok(HallElement::from_terms([(Coherent::line(d), lambda.pow(sign * d)?)]))
    }

    /// Hecke eigenvalue of f = Σ_d λ^{sign·d} 1_{O(d)} (as a function) under
    /// T_T, read off at O(0): (T_T f)(O) / f(O).
    pub fn rank1_character(&self, lambda: &Scalar, sign: i64, t: &Torsion) -> Result<Scalar> {
        let n = t.degree();
        let sub = Bundle::line(-n);
        let g = self.hall_number_bundle_torsion(&Bundle::line(0), &sub, t)?;
        let tw = self.euler(&Coherent::torsion(t.clone()), &Coherent::bundle(sub));
        Ok(tw * Self::int(g) * lambda.pow(-sign * n)?)
    }

    /// Ψ_f coefficients: Ψ_n = Σ_{deg T = n} χ_f(T)|Aut T| 1_T for n ≤ N.
    pub fn psi_series(&self, lambda: &Scalar, sign: i64, n: u32) -> Result<Vec<HallElement>> {
        let mut out = Vec::new();
        for k in 0..=n {
            let mut e = HallElement::zero();
            for (t, aut) in self.torsion_classes(k)? {
                let chi = self.rank1_character(lambda, sign, &t)?;
                e.add_term(Coherent::torsion(t), chi * Self::int(aut));
            }
            out.push(e);
        }
        Ok(out)
    }

    /// M(u ⊗ v) = p₂(Δ_{coh,0,1}(u) * Δ_{coh,1,0}(v)) for rank-1 u, v, with
    /// the torsion sum in Δ_{coh,1,0} cut at degree n.
    pub fn m_operator(&self, x: &HallTensor, n: u32) -> Result<HallTensor> {
        let mut out = HallTensor::zero();
        for ((u, v), s) in x.terms() {
            if u.rank() == 0 || v.rank() == 0 {
                // Δ_{coh,0,0} is trivial: M acts as the identity here
                out.add_term((u.clone(), v.clone()), s.clone());
                continue;
            }
            if u.rank() != 1 || v.rank() != 1 || !u.is_bundle() || !v.is_bundle() {
                return Err(Error::Unsupported(String::from("M is implemented on rank (1,1) bundle tensors")));
            }
            let mut left = HallTensor::zero();
            left.add_term((Coherent::zero(), u.clone()), Scalar::one());
            let right = self.comult_line_torsion(v.bundle.degree(), n)?;
            let prod = self.tensor_mul(&left, &right)?;
            out = out.add(&prod.filter(|a, b| a.is_bundle() && b.is_bundle()).scale(s));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Small helpers used by the verification layer

/// Exact conversion of a small integer scalar, when it is one.
pub fn scalar_to_i64(x: &Scalar) -> Option<i64> {
    let r = x.as_rational()?;
    if !r.is_integer() {
        return None;
    }
    r.to_integer().to_i64()
}

impl P1 {
    /// Human-readable summary of the guard settings.
    pub fn describe_guard(&self) -> String {
        let g = &self.guard;
        format!(
            "q ≤ {}, rank ≤ {}, |degree| ≤ {}, torsion degree ≤ {}, enumeration ≤ {}",
            g.max_q, g.max_rank, g.max_abs_degree, g.max_torsion_degree, g.max_enumeration
        )
    }
    pub fn label(c: &Coherent) -> String {
        c.to_string()
    }
}
