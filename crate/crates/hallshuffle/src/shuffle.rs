//! Feigin–Odesskii shuffle algebras on a disjoint union of copies of 𝔾_m.
//!
//! A degree-n element is a rational function of t1..tn on each component
//! word. Only sorted words are stored (one entry per component multiset);
//! the value on any other word follows from the braided symmetry
//! F(…, t_{i+1}, t_i, …) = c(t_{i+1}, t_i)·F(…, t_i, t_{i+1}, …).
//!
//! Product convention: for φ of degree r and ψ of degree s,
//! μ(φ,ψ)(t) = Σ_{S} [∏_{b<a, b∉S, a∈S} c(t_b, t_a)] φ(t_S) ψ(t_{S^c}),
//! summed over r-subsets S of positions; on degree 1 this reads
//! t^a ⧢ t^b = t₁^a t₂^b + c(t₁,t₂) t₁^b t₂^a.
//!
//! Kernels are rational functions of `s` (first argument) and `t` (second).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;
use crate::polyrat::{LaurentPoly, Monomial, RationalFunction};
use crate::scalar::{Scalar, ScalarMode};
use crate::witt::{c_xr, rs_kernel, CurveData};
use crate::{Error, Result};

pub type ComponentId = u32;

/// Slot variable name `t{k}` (1-based).
pub fn slot(k: usize) -> String {
    format!("t{k}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub id: ComponentId,
    pub weight: u32,
    pub coord: String,
}

/// Σ = ⊔ 𝔾_m, each component with a grading weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaScheme {
    components: Vec<Component>,
}

impl SigmaScheme {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for c in &components {
            if c.weight == 0 {
                return Err(Error::Domain(format!("component {} has weight 0", c.id)));
            }
            if !ids.insert(c.id) {
                return Err(Error::Domain(format!("duplicate component id {}", c.id)));
            }
        }
        Ok(SigmaScheme { components })
    }
    /// One component of weight 1.
    pub fn single() -> Self {
        SigmaScheme { components: vec![Component { id: 0, weight: 1, coord: String::from("t") }] }
    }
    pub fn components(&self) -> &[Component] {
        &self.components
    }
    pub fn weight(&self, id: ComponentId) -> Option<u32> {
        self.components.iter().find(|c| c.id == id).map(|c| c.weight)
    }
    /// Grading of a component multiset.
    pub fn degree(&self, labels: &[ComponentId]) -> Result<u32> {
        labels
            .iter()
            .map(|i| self.weight(*i).ok_or_else(|| Error::Domain(format!("unknown component {i}"))))
            .sum()
    }
}

fn is_slot_name(v: &str) -> bool {
    let mut cs = v.chars();
    matches!(cs.next(), Some('t') | Some('s')) && !cs.as_str().is_empty() && cs.all(|c| c.is_ascii_digit())
}

fn swap_st(f: &RationalFunction) -> RationalFunction {
    f.rename_pairs(&[("s", "t"), ("t", "s")])
}

fn at(f: &RationalFunction, first: &str, second: &str) -> RationalFunction {
    f.rename_pairs(&[("s", first), ("t", second)])
}

/// c_{ij}(s, t) on component pairs, with optional coboundary data.
#[derive(Clone, Debug)]
pub struct Kernel {
    c: BTreeMap<(ComponentId, ComponentId), RationalFunction>,
    lambda: Option<BTreeMap<(ComponentId, ComponentId), RationalFunction>>,
    lambda_tilde: Option<BTreeMap<(ComponentId, ComponentId), RationalFunction>>,
    antisymmetric: bool,
}

impl Kernel {
    pub fn new(c: BTreeMap<(ComponentId, ComponentId), RationalFunction>) -> Result<Self> {
        for f in c.values() {
            if f.is_zero() {
                return Err(Error::Domain(String::from("kernel entries must be invertible")));
            }
            // other variables are parameters, but must not collide with slots
            if let Some(v) = f.variables().iter().find(|v| is_slot_name(v)) {
                return Err(Error::Domain(format!("kernel entry uses reserved variable {v}")));
            }
        }
        let antisymmetric = c.iter().all(|((i, j), f)| match c.get(&(*j, *i)) {
            Some(g) => f * &swap_st(g) == RationalFunction::one(),
            None => false,
        });
        Ok(Kernel { c, lambda: None, lambda_tilde: None, antisymmetric })
    }
    /// Single component 0.
    pub fn single(c: RationalFunction) -> Result<Self> {
        Self::new(BTreeMap::from([((0, 0), c)]))
    }
    /// c ≡ 1 on the given components.
    pub fn trivial(ids: &[ComponentId]) -> Self {
        let mut m = BTreeMap::new();
        for i in ids {
            for j in ids {
                m.insert((*i, *j), RationalFunction::one());
            }
        }
        Self::new(m).expect("constant kernel")
    }
    /// Attach λ with c(s,t) = λ(s,t)^{-1} λ(t,s) (checked on every pair).
    pub fn with_lambda(mut self, lambda: BTreeMap<(ComponentId, ComponentId), RationalFunction>) -> Result<Self> {
        for ((i, j), c) in &self.c {
            let (l, lr) = match (lambda.get(&(*i, *j)), lambda.get(&(*j, *i))) {
                (Some(l), Some(lr)) => (l, lr),
                _ => return Err(Error::Domain(format!("λ missing on ({i},{j})"))),
            };
            if &swap_st(lr) / l != *c {
                return Err(Error::Domain(format!("λ is not a coboundary for c on ({i},{j})")));
            }
        }
        self.lambda = Some(lambda);
        Ok(self)
    }
    /// λ̃, used only by the symmetric shuffle product and the regularity check.
    pub fn with_lambda_tilde(mut self, lt: BTreeMap<(ComponentId, ComponentId), RationalFunction>) -> Self {
        self.lambda_tilde = Some(lt);
        self
    }
    pub fn is_antisymmetric(&self) -> bool {
        self.antisymmetric
    }
    pub fn get(&self, i: ComponentId, j: ComponentId) -> Result<&RationalFunction> {
        self.c.get(&(i, j)).ok_or_else(|| Error::Domain(format!("kernel missing pair ({i},{j})")))
    }
    pub fn entries(&self) -> &BTreeMap<(ComponentId, ComponentId), RationalFunction> {
        &self.c
    }
    pub fn lambda(&self) -> Option<&BTreeMap<(ComponentId, ComponentId), RationalFunction>> {
        self.lambda.as_ref()
    }
    pub fn lambda_tilde(&self) -> Option<&BTreeMap<(ComponentId, ComponentId), RationalFunction>> {
        self.lambda_tilde.as_ref()
    }
    /// c evaluated at slot variables.
    fn at(&self, i: ComponentId, j: ComponentId, a: &str, b: &str) -> Result<RationalFunction> {
        Ok(at(self.get(i, j)?, a, b))
    }
    /// Entry-wise map, e.g. a perturbation for negative controls.
    pub fn map(&self, f: impl Fn(&RationalFunction) -> Result<RationalFunction>) -> Result<Kernel> {
        let mut m = BTreeMap::new();
        for (k, c) in &self.c {
            m.insert(*k, f(c)?);
        }
        Kernel::new(m)
    }
    /// Parses `{"0,0": "(v^2*s-t)|(s-v^2*t)"}`-style entries.
    pub fn from_pairs(pairs: &[(String, String)], mode: ScalarMode) -> Result<Kernel> {
        let mut m = BTreeMap::new();
        for (k, v) in pairs {
            let (i, j) = k.split_once(',').ok_or_else(|| Error::parse(k, "expected \"i,j\""))?;
            let i = i.trim().parse().map_err(|_| Error::parse(k, "bad component id"))?;
            let j = j.trim().parse().map_err(|_| Error::parse(k, "bad component id"))?;
            m.insert((i, j), RationalFunction::parse(v, mode)?);
        }
        Kernel::new(m)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, ((i, j), c)) in self.c.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "\"{i},{j}\":\"{c}\"")?;
        }
        write!(f, "}}")
    }
}

/// Graded element: component word ↦ function of t1..tn.
///
/// Words are ordered; for an antisymmetric kernel the values on all words
/// of one multiset are determined by any one of them (see
/// [`ShuffleElement::check_symmetry`]), but for general kernels they are not,
/// so every word is kept.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShuffleElement {
    terms: BTreeMap<Vec<ComponentId>, RationalFunction>,
}

impl ShuffleElement {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn unit() -> Self {
        Self::from_terms([(Vec::new(), RationalFunction::one())])
    }
    /// Degree-1 generator t^d on a component.
    pub fn generator(component: ComponentId, d: i64) -> Self {
        Self::generator_fn(component, RationalFunction::monomial(Monomial::var_pow("t1", d), Scalar::one()))
    }
    /// Degree-1 element f(t1) on a component.
    pub fn generator_fn(component: ComponentId, f: RationalFunction) -> Self {
        Self::from_terms([(vec![component], f)])
    }
    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<ComponentId>, RationalFunction)>) -> Self {
        let mut out = Self::zero();
        for (w, f) in terms {
            out.add_term(w, f);
        }
        out
    }
    fn add_term(&mut self, w: Vec<ComponentId>, f: RationalFunction) {
        let e = self.terms.entry(w.clone()).or_insert_with(RationalFunction::zero);
        *e = &*e + &f;
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }
    pub fn terms(&self) -> &BTreeMap<Vec<ComponentId>, RationalFunction> {
        &self.terms
    }
    pub fn get(&self, w: &[ComponentId]) -> RationalFunction {
        self.terms.get(w).cloned().unwrap_or_else(RationalFunction::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, f) in &o.terms {
            out.add_term(w.clone(), f.clone());
        }
        out
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }
    pub fn scale(&self, x: &Scalar) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, f)| (w.clone(), f.scale(x))))
    }
    pub fn mul_rf(&self, g: &RationalFunction) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, f)| (w.clone(), f * g)))
    }
    /// Braided symmetry: for every word w and adjacent pair k, k+1,
    /// F_{w'}(t) = c_{w_{k+1} w_k}(t_k, t_{k+1})·F_w(…, t_{k+1}, t_k, …)
    /// where w' swaps w_k and w_{k+1}. Products of degree-1 elements satisfy
    /// this whenever the kernel is antisymmetric; with c ≡ 1 it is ordinary
    /// symmetry.
    pub fn check_symmetry(&self, kernel: &Kernel) -> Result<bool> {
        for (w, f) in &self.terms {
            for k in 0..w.len().saturating_sub(1) {
                let (a, b) = (slot(k + 1), slot(k + 2));
                let mut w2 = w.clone();
                w2.swap(k, k + 1);
                let swapped = f.rename_pairs(&[(&a, &b), (&b, &a)]);
                let c = kernel.at(w[k + 1], w[k], &a, &b)?;
                if self.get(&w2) != &c * &swapped {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
    /// Plain symmetry F_{w'}(t) = F_w(…, t_{k+1}, t_k, …), the symmetric
    /// representation of [`sym_shuffle_mul`].
    pub fn is_symmetric(&self) -> bool {
        let ids: BTreeSet<ComponentId> = self.terms.keys().flatten().copied().collect();
        let ids: Vec<ComponentId> = ids.into_iter().collect();
        self.check_symmetry(&Kernel::trivial(&ids)).unwrap_or(false)
    }
    /// Function-level coproduct component Δ_{r,s}: the identity on each
    /// word, read as a function of (t1..tr | t_{r+1}..tn). Returns pairs
    /// (left word, right word, function).
    pub fn coproduct(&self, r: usize) -> Vec<(Vec<ComponentId>, Vec<ComponentId>, RationalFunction)> {
        self.terms
            .iter()
            .filter(|(w, _)| w.len() >= r)
            .map(|(w, f)| (w[..r].to_vec(), w[r..].to_vec(), f.clone()))
            .collect()
    }
}

impl fmt::Display for ShuffleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (w, g)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            let labels: Vec<String> = w.iter().map(|i| i.to_string()).collect();
            write!(f, "\"[{}]\":\"{g}\"", labels.join(","))?;
        }
        write!(f, "}}")
    }
}

/// All r-subsets of 0..n in increasing order.
fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Sends slot offset+k+1 to slot offset+positions[k]+1, simultaneously.
fn place(f: &RationalFunction, positions: &[usize], offset: usize) -> RationalFunction {
    let map: BTreeMap<String, String> =
        positions.iter().enumerate().map(|(k, p)| (slot(offset + k + 1), slot(offset + p + 1))).collect();
    f.rename(&map)
}

/// Sum over interleavings of u and v. Each subset S of positions (where
/// the u-letters go) contributes `weight(w, S, S^c)` times F with its slots
/// moved into place. Slots outside offset+1..offset+n are left alone.
fn interleave(
    f: &RationalFunction,
    u: &[ComponentId],
    v: &[ComponentId],
    offset: usize,
    mut weight: impl FnMut(&[ComponentId], &[usize], &[usize]) -> Result<RationalFunction>,
) -> Result<ShuffleElement> {
    let (r, n) = (u.len(), u.len() + v.len());
    let mut out = ShuffleElement::zero();
    for s in subsets(n, r) {
        let comp: Vec<usize> = (0..n).filter(|p| !s.contains(p)).collect();
        let mut w = vec![0; n];
        for (k, p) in s.iter().enumerate() {
            w[*p] = u[k];
        }
        for (k, p) in comp.iter().enumerate() {
            w[*p] = v[k];
        }
        let positions: Vec<usize> = s.iter().chain(comp.iter()).copied().collect();
        let term = &place(f, &positions, offset) * &weight(&w, &s, &comp)?;
        out.add_term(w, term);
    }
    Ok(out)
}

/// μ_{r,s} applied to a function F(t1..tr | t_{r+1}..tn) on the word u ++ v:
/// Σ_S [∏_{b<a, b∉S, a∈S} c_{w_b w_a}(t_b, t_a)]·F(t_S | t_{S^c}).
pub fn shuffle_mul_tensor(
    f: &RationalFunction,
    u: &[ComponentId],
    v: &[ComponentId],
    kernel: &Kernel,
) -> Result<ShuffleElement> {
    shuffle_mul_block(f, u, v, kernel, 0)
}

/// [`shuffle_mul_tensor`] on the slots offset+1..offset+n, other slots
/// treated as parameters.
pub fn shuffle_mul_block(
    f: &RationalFunction,
    u: &[ComponentId],
    v: &[ComponentId],
    kernel: &Kernel,
    offset: usize,
) -> Result<ShuffleElement> {
    interleave(f, u, v, offset, |w, s, comp| {
        let mut c = RationalFunction::one();
        for &a in s {
            for &b in comp {
                if b < a {
                    c = &c * &kernel.at(w[b], w[a], &slot(offset + b + 1), &slot(offset + a + 1))?;
                }
            }
        }
        Ok(c)
    })
}

fn shift_slots(g: &RationalFunction, len: usize, by: usize) -> RationalFunction {
    let shift: BTreeMap<String, String> = (1..=len).map(|k| (slot(k), slot(k + by))).collect();
    g.rename(&shift)
}

/// Classical shuffle product.
pub fn shuffle_mul(phi: &ShuffleElement, psi: &ShuffleElement, kernel: &Kernel) -> Result<ShuffleElement> {
    let mut out = ShuffleElement::zero();
    for (u, f) in phi.terms() {
        for (v, g) in psi.terms() {
            let fg = f * &shift_slots(g, v.len(), u.len());
            out = out.add(&shuffle_mul_tensor(&fg, u, v, kernel)?);
        }
    }
    Ok(out)
}

/// Product of a sequence of elements, left to right.
pub fn shuffle_product(factors: &[ShuffleElement], kernel: &Kernel) -> Result<ShuffleElement> {
    let mut acc = ShuffleElement::unit();
    for f in factors {
        acc = shuffle_mul(&acc, f, kernel)?;
    }
    Ok(acc)
}

/// Symmetric shuffle product
/// ξ(a,b)_w = Σ_S a(t_S) b(t_{S^c}) ∏_{i∈S, j∉S} λ_{w_i w_j}(t_i, t_j),
/// which for symmetric a, b is (1/m!n!)·Symm[a⊗b·∏ λ(s_i, t_j)].
/// Uses λ̃ if `use_tilde`, else λ.
pub fn sym_shuffle_mul(a: &ShuffleElement, b: &ShuffleElement, kernel: &Kernel, use_tilde: bool) -> Result<ShuffleElement> {
    let lam = if use_tilde { kernel.lambda_tilde() } else { kernel.lambda() }
        .ok_or_else(|| Error::Domain(String::from("symmetric shuffle product needs coboundary data")))?;
    let mut out = ShuffleElement::zero();
    for (u, f) in a.terms() {
        for (v, g) in b.terms() {
            let fg = f * &shift_slots(g, v.len(), u.len());
            out = out.add(&interleave(&fg, u, v, 0, |w, s, comp| {
                let mut c = RationalFunction::one();
                for &i in s {
                    for &j in comp {
                        let l = lam
                            .get(&(w[i], w[j]))
                            .ok_or_else(|| Error::Domain(format!("λ missing on ({},{})", w[i], w[j])))?;
                        c = &c * &at(l, &slot(i + 1), &slot(j + 1));
                    }
                }
                Ok(c)
            })?);
        }
    }
    Ok(out)
}

/// Ψ: symmetric representation → shuffle representation,
/// F_w ↦ F_w·∏_{i<j} λ_{w_i w_j}(t_i, t_j)^{-1}.
pub fn psi_map(x: &ShuffleElement, kernel: &Kernel) -> Result<ShuffleElement> {
    let lam = kernel.lambda().ok_or_else(|| Error::Domain(String::from("Ψ needs λ")))?;
    let mut out = ShuffleElement::zero();
    for (w, f) in x.terms() {
        let mut g = f.clone();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                let l = lam.get(&(w[i], w[j])).ok_or_else(|| Error::Domain(String::from("λ missing")))?;
                g = g.try_div(&at(l, &slot(i + 1), &slot(j + 1)))?;
            }
        }
        out.add_term(w.clone(), g);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Relation spaces

/// Linear relations among ordered products of generators.
#[derive(Clone, Debug)]
pub struct RelationSpace {
    /// The products, as sequences of generator indices.
    pub words: Vec<Vec<usize>>,
    /// Basis of relation vectors (coefficients on `words`).
    pub basis: Vec<Vec<Scalar>>,
}

/// All ordered products of 1..=n generators whose total exponent lies in
/// `degree_window` (inclusive), with their relations.
pub fn relation_space(
    generators: &[(ComponentId, i64)],
    n: usize,
    degree_window: (i64, i64),
    kernel: &Kernel,
    max_words: usize,
) -> Result<RelationSpace> {
    if n > 3 {
        return Err(Error::guard("product length", n as i64, 3));
    }
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    let mut words: Vec<Vec<usize>> = Vec::new();
    for _ in 0..n {
        layer = layer
            .into_iter()
            .flat_map(|w| (0..generators.len()).map(move |g| {
                let mut v = w.clone();
                v.push(g);
                v
            }))
            .collect();
        words.extend(layer.iter().cloned());
    }
    words.retain(|w| {
        let d: i64 = w.iter().map(|g| generators[*g].1).sum();
        (degree_window.0..=degree_window.1).contains(&d)
    });
    if words.len() > max_words {
        return Err(Error::guard("products", words.len() as i64, max_words as i64));
    }
    let values: Vec<ShuffleElement> = words
        .iter()
        .map(|w| {
            let f: Vec<ShuffleElement> = w.iter().map(|g| ShuffleElement::generator(generators[*g].0, generators[*g].1)).collect();
            shuffle_product(&f, kernel)
        })
        .collect::<Result<_>>()?;
    let basis = relations_among(&values)?;
    Ok(RelationSpace { words, basis })
}

/// Kernel of the coefficient matrix of the given elements, after clearing
/// denominators word by word.
pub fn relations_among(values: &[ShuffleElement]) -> Result<Vec<Vec<Scalar>>> {
    // common denominator per component word
    let mut dens: BTreeMap<Vec<ComponentId>, Vec<(LaurentPoly, u32)>> = BTreeMap::new();
    for v in values {
        for (w, f) in v.terms() {
            let d = dens.entry(w.clone()).or_default();
            for (g, k) in f.reduce().factors() {
                match d.iter_mut().find(|(h, _)| h == g) {
                    Some((_, m)) => *m = (*m).max(*k),
                    None => d.push((g.clone(), *k)),
                }
            }
        }
    }
    let mut columns: Vec<BTreeMap<(Vec<ComponentId>, Monomial), Scalar>> = Vec::new();
    let mut keys: BTreeSet<(Vec<ComponentId>, Monomial)> = BTreeSet::new();
    for v in values {
        let mut col = BTreeMap::new();
        for (w, f) in v.terms() {
            let mut d = LaurentPoly::one();
            for (g, k) in &dens[w] {
                d = &d * &g.pow(*k);
            }
            let p = (f * &RationalFunction::from(d))
                .as_laurent()
                .ok_or_else(|| Error::Domain(String::from("common denominator does not clear")))?;
            for (m, c) in p.terms() {
                keys.insert((w.clone(), m.clone()));
                col.insert((w.clone(), m.clone()), c.clone());
            }
        }
        columns.push(col);
    }
    let matrix: Vec<Vec<Scalar>> =
        keys.iter().map(|k| columns.iter().map(|c| c.get(k).cloned().unwrap_or_default()).collect()).collect();
    linalg::nullspace(&matrix, values.len())
}

// ---------------------------------------------------------------------------
// Quadratic relations and regularity

/// Outcome of [`quadratic_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticReport {
    pub passed: bool,
    pub checked: usize,
    pub first_failure: Option<(i64, i64)>,
}

/// Coefficient of t^a s^b in Q(t,s)·X(t,s) as a list of (scalar, x, y)
/// meaning scalar·X_{x,y}, for Laurent Q in `t`, `s`.
pub fn shifted_terms(p: &LaurentPoly, a: i64, b: i64) -> Vec<(Scalar, i64, i64)> {
    p.terms().map(|(m, c)| (c.clone(), a - m.exp("t"), b - m.exp("s"))).collect()
}

/// Checks Q·E_i(t)E_j(s) = P·E_j(s)E_i(t) coefficientwise for a, b in the
/// window, where E_i(t) = Σ_d t^d·(generator t1^d on component i) and
/// P/Q = `exchange` (a function of `t`, `s`). See [`exchange_factor`] for
/// the factor the product convention predicts.
pub fn quadratic_check(
    i: ComponentId,
    j: ComponentId,
    exchange: &RationalFunction,
    kernel: &Kernel,
    window: (i64, i64),
) -> Result<QuadraticReport> {
    let r = exchange.reduce();
    let (p, q) = (r.numerator().clone(), r.denominator());
    let mut checked = 0;
    let prod = |x: ComponentId, dx: i64, y: ComponentId, dy: i64| {
        shuffle_mul(&ShuffleElement::generator(x, dx), &ShuffleElement::generator(y, dy), kernel)
    };
    for a in window.0..=window.1 {
        for b in window.0..=window.1 {
            let mut lhs = ShuffleElement::zero();
            for (c, x, y) in shifted_terms(&q, a, b) {
                lhs = lhs.add(&prod(i, x, j, y)?.scale(&c));
            }
            let mut rhs = ShuffleElement::zero();
            for (c, x, y) in shifted_terms(&p, a, b) {
                rhs = rhs.add(&prod(j, y, i, x)?.scale(&c));
            }
            checked += 1;
            if lhs != rhs {
                return Ok(QuadraticReport { passed: false, checked, first_failure: Some((a, b)) });
            }
        }
    }
    Ok(QuadraticReport { passed: true, checked, first_failure: None })
}

/// Exchange factor X(t,s) with E_i(t)E_j(s) = X·E_j(s)E_i(t).
///
/// Since Σ_d t^d t1^d pairs the slot t1 with 1/t, X(t,s) = c_{ji}(1/s, 1/t);
/// for an antisymmetric kernel depending only on the ratio of its
/// arguments this is c_{ij}(t, s).
pub fn exchange_factor(kernel: &Kernel, i: ComponentId, j: ComponentId) -> Result<RationalFunction> {
    let c = kernel.get(j, i)?;
    c.subst_term("s", &Scalar::one(), &Monomial::var_pow("s", -1))?
        .subst_term("t", &Scalar::one(), &Monomial::var_pow("t", -1))
}

/// Syntactic check that λ̃(s,t) is regular off the diagonal with at most a
/// first-order pole on s = t. Returns the offending factor on failure.
pub fn check_lambda_tilde(l: &RationalFunction) -> core::result::Result<(), String> {
    let diag = &LaurentPoly::var("s") - &LaurentPoly::var("t");
    let mut order = 0;
    for (f, k) in l.reduce().factors() {
        let mut g = f.clone();
        let mut e = 0;
        while let Some(h) = g.div_exact(&diag) {
            g = h;
            e += 1;
        }
        if g.len() != 1 {
            return Err(format!("({f})^{k}"));
        }
        order += e * k;
    }
    if order > 1 {
        return Err(format!("(s-t)^{order}"));
    }
    Ok(())
}

/// Outcome of [`regularity_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub passed: bool,
    pub offending: Option<String>,
}

/// Checks the λ̃ precondition and that every entry of `product` is a
/// Laurent polynomial.
pub fn regularity_check(product: &ShuffleElement, kernel: &Kernel) -> Result<RegularityReport> {
    let lt = kernel.lambda_tilde().ok_or_else(|| Error::Domain(String::from("regularity check needs λ̃")))?;
    for l in lt.values() {
        if let Err(e) = check_lambda_tilde(l) {
            return Ok(RegularityReport { passed: false, offending: Some(e) });
        }
    }
    for f in product.terms().values() {
        let r = f.reduce();
        if let Some((g, k)) = r.factors().first() {
            return Ok(RegularityReport { passed: false, offending: Some(format!("({g})^{k}")) });
        }
    }
    Ok(RegularityReport { passed: true, offending: None })
}

/// Spot check of the ideal property in degree 2: multiplication by e₁ and
/// e₂ maps ξ(f, g) back into the image of the product map.
pub fn ideal_spot_check(f: (ComponentId, i64), g: (ComponentId, i64), kernel: &Kernel) -> Result<bool> {
    let gen = |c: ComponentId, d: i64| ShuffleElement::generator(c, d);
    let xi = |a: &ShuffleElement, b: &ShuffleElement| sym_shuffle_mul(a, b, kernel, true);
    let base = xi(&gen(f.0, f.1), &gen(g.0, g.1))?;
    let e1 = RationalFunction::var("t1") + RationalFunction::var("t2");
    let e2 = RationalFunction::var("t1") * RationalFunction::var("t2");
    let lhs1 = base.mul_rf(&e1);
    let rhs1 = xi(&gen(f.0, f.1 + 1), &gen(g.0, g.1))?.add(&xi(&gen(f.0, f.1), &gen(g.0, g.1 + 1))?);
    let lhs2 = base.mul_rf(&e2);
    let rhs2 = xi(&gen(f.0, f.1 + 1), &gen(g.0, g.1 + 1))?;
    Ok(lhs1 == rhs1 && lhs2 == rhs2)
}

// ---------------------------------------------------------------------------
// Kernels from curves

/// Which kernel family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// Rank-1 twist characters: one component.
    Rank1,
    /// c_{X,r} on one component.
    Elliptic(usize),
}

/// Kernel on component 0 from curve data; antisymmetry is verified.
pub fn curve_kernels(curve: &CurveData, family: KernelFamily, mode: ScalarMode) -> Result<Kernel> {
    let k = match family {
        KernelFamily::Rank1 => {
            let rs = rs_kernel(curve, mode, "s", "t")?;
            // λ here satisfies c = λ(s,t)/λ(t,s); the coboundary convention
            // c = λ(s,t)^{-1}λ(t,s) takes the swapped function.
            let lam = swap_st(&rs.lambda);
            let lt = swap_st(&rs.lambda_tilde);
            Kernel::single(rs.c.reduce())?
                .with_lambda(BTreeMap::from([((0, 0), lam)]))?
                .with_lambda_tilde(BTreeMap::from([((0, 0), lt)]))
        }
        KernelFamily::Elliptic(r) => {
            curve.check_mode(mode)?;
            let p: Vec<LaurentPoly> = curve.p.iter().map(|c| LaurentPoly::constant(Scalar::from_int(*c))).collect();
            // c(first, second) = c_{X,r}(second, first), matching the rank-1 kernel
            let c = c_xr(&p, curve.g, &curve.q_scalar(mode), r, "t", "s")?;
            Kernel::single(c.reduce())?
        }
    };
    if !k.is_antisymmetric() {
        return Err(Error::Domain(String::from("curve kernel failed the antisymmetry check")));
    }
    Ok(k)
}
