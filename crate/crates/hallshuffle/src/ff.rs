//! Finite fields 𝔽_q (q = p^k ≤ 256) with table arithmetic, plus dense
//! linear algebra and polynomial helpers over them.
//!
//! Elements are `u16` codes: the coefficient vector of a polynomial in the
//! generator, read as a base-p integer. Code 0 is zero and 1 is one.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type Elem = u16;

#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u64,
    k: u32,
    q: u64,
    modulus: Vec<u64>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut m, mut k) = (q, 0);
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

/// Coefficients (constant first) of the base-p digits of x.
fn digits(mut x: u64, p: u64, k: u32) -> Vec<u64> {
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of a mod a monic polynomial m over ℤ/p.
fn zp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let c = r.pop().unwrap();
        let shift = r.len() - dm;
        for (i, mc) in m.iter().enumerate().take(dm) {
            r[shift + i] = (r[shift + i] + p * p - c * mc % p) % p;
        }
    }
    r
}

fn zp_irreducible(m: &[u64], p: u64) -> bool {
    let k = m.len() - 1;
    // any factor has degree ≤ k/2; try all monic polynomials of those degrees
    for d in 1..=k / 2 {
        for x in 0..p.pow(d as u32) {
            let mut f = digits(x, p, d as u32);
            f.push(1);
            if zp_rem(m, &f, p).iter().all(|c| *c == 0) {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    pub fn new(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or_else(|| Error::Domain(format!("{q} is not a prime power")))?;
        if q > 256 {
            return Err(Error::guard("field size", q as i64, 256));
        }
        let modulus: Vec<u64> = match q {
            4 => vec![1, 1, 1],
            8 => vec![1, 1, 0, 1],
            9 => vec![1, 0, 1],
            _ if k == 1 => vec![0, 1],
            _ => (0..p.pow(k))
                .map(|x| {
                    let mut m = digits(x, p, k);
                    m.push(1);
                    m
                })
                .find(|m| zp_irreducible(m, p))
                .expect("irreducible polynomials exist in every degree"),
        };
        if k > 1 && !zp_irreducible(&modulus, p) {
            return Err(Error::Domain(format!("modulus for q = {q} is reducible")));
        }
        let n = q as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..q {
            let da = digits(a, p, k);
            for b in 0..q {
                let db = digits(b, p, k);
                let s: Vec<u64> = da.iter().zip(db.iter()).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = undigits(&s, p) as Elem;
                let mut prod = vec![0u64; 2 * k as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = if k == 1 { vec![prod[0]] } else { zp_rem(&prod, &modulus, p) };
                r.resize(k as usize, 0);
                mul[(a * q + b) as usize] = undigits(&r, p) as Elem;
            }
        }
        let mut neg = vec![0; n];
        let mut inv = vec![0; n];
        for a in 0..n {
            neg[a] = (0..n).find(|&b| add[a * n + b] == 0).unwrap() as Elem;
            if a > 0 {
                inv[a] = (1..n).find(|&b| mul[a * n + b] == 1).unwrap() as Elem;
            }
        }
        Ok(FiniteField { p, k, q, modulus, add, mul, neg, inv })
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn characteristic(&self) -> u64 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.k
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q as Elem
    }
    pub fn units(&self) -> impl Iterator<Item = Elem> {
        1..self.q as Elem
    }
    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }
    /// Inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p as i64) as Elem
    }

    // ---------- linear algebra ----------

    /// Row-reduce in place; drops zero rows and returns pivot columns.
    pub fn rref(&self, m: &mut Vec<Vec<Elem>>) -> Vec<usize> {
        let rows = m.len();
        if rows == 0 {
            return Vec::new();
        }
        let cols = m[0].len();
        let mut piv = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, p);
            let iv = self.inv(m[r][c]);
            for x in m[r].iter_mut() {
                *x = self.mul(*x, iv);
            }
            let prow = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != r && row[c] != 0 {
                    let f = row[c];
                    for (x, y) in row.iter_mut().zip(prow.iter()) {
                        if *y != 0 {
                            *x = self.sub(*x, self.mul(f, *y));
                        }
                    }
                }
            }
            piv.push(c);
            r += 1;
        }
        m.truncate(r);
        piv
    }

    pub fn rank(&self, m: &[Vec<Elem>]) -> usize {
        let mut a = m.to_vec();
        self.rref(&mut a).len()
    }

    /// Basis of {x : Σ_j m[i][j] x_j = 0 for all i}.
    pub fn nullspace(&self, m: &[Vec<Elem>], cols: usize) -> Vec<Vec<Elem>> {
        let mut a = m.to_vec();
        let piv = self.rref(&mut a);
        let mut out = Vec::new();
        for free in (0..cols).filter(|c| !piv.contains(c)) {
            let mut x = vec![0; cols];
            x[free] = 1;
            for (row, &pc) in a.iter().zip(piv.iter()) {
                x[pc] = self.neg(row[free]);
            }
            out.push(x);
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mat(&self, v: &[Elem], m: &[Vec<Elem>]) -> Vec<Elem> {
        let cols = m.first().map_or(0, |r| r.len());
        let mut out = vec![0; cols];
        for (x, row) in v.iter().zip(m.iter()) {
            if *x == 0 {
                continue;
            }
            for (o, y) in out.iter_mut().zip(row.iter()) {
                if *y != 0 {
                    *o = self.add(*o, self.mul(*x, *y));
                }
            }
        }
        out
    }

    /// Reduce v modulo the row space of an RREF matrix with the given pivots.
    pub fn reduce(&self, v: &[Elem], basis: &[Vec<Elem>], pivots: &[usize]) -> Vec<Elem> {
        let mut r = v.to_vec();
        for (row, &pc) in basis.iter().zip(pivots.iter()) {
            let f = r[pc];
            if f != 0 {
                for (x, y) in r.iter_mut().zip(row.iter()) {
                    if *y != 0 {
                        *x = self.sub(*x, self.mul(f, *y));
                    }
                }
            }
        }
        r
    }

    /// All vectors of length n, as base-q counters.
    pub fn all_vectors(&self, n: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
        let total = (self.q as u128).pow(n as u32);
        (0..total).map(move |mut x| {
            (0..n)
                .map(|_| {
                    let d = (x % self.q as u128) as Elem;
                    x /= self.q as u128;
                    d
                })
                .collect()
        })
    }

    /// One representative per 1-dimensional subspace of a span (rows of `basis`).
    pub fn lines(&self, basis: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
        let d = basis.len();
        let mut out = Vec::new();
        for lead in 0..d {
            // coefficient vectors whose first nonzero entry is a 1 at `lead`
            for tail in self.all_vectors(d - lead - 1) {
                let mut c = vec![0; d];
                c[lead] = 1;
                c[lead + 1..].copy_from_slice(&tail);
                out.push(self.vec_mat(&c, basis));
            }
        }
        out
    }

    // ---------- polynomials (constant term first, no trailing zeros) ----------

    pub fn poly_trim(&self, p: &mut Vec<Elem>) {
        while p.last() == Some(&0) {
            p.pop();
        }
    }
    pub fn poly_mul(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                r[i + j] = self.add(r[i + j], self.mul(*x, *y));
            }
        }
        self.poly_trim(&mut r);
        r
    }
    pub fn poly_add(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let mut r = vec![0; a.len().max(b.len())];
        for (i, x) in a.iter().enumerate() {
            r[i] = *x;
        }
        for (i, y) in b.iter().enumerate() {
            r[i] = self.add(r[i], *y);
        }
        self.poly_trim(&mut r);
        r
    }
    pub fn poly_scale(&self, a: &[Elem], c: Elem) -> Vec<Elem> {
        let mut r: Vec<Elem> = a.iter().map(|x| self.mul(*x, c)).collect();
        self.poly_trim(&mut r);
        r
    }
    pub fn poly_divrem(&self, a: &[Elem], b: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
        let mut r = a.to_vec();
        self.poly_trim(&mut r);
        let db = b.len() - 1;
        let li = self.inv(b[db]);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let mut quo = vec![0; r.len() - db];
        while r.len() > db && !r.is_empty() {
            let k = r.len() - 1 - db;
            let c = self.mul(*r.last().unwrap(), li);
            for (j, y) in b.iter().enumerate() {
                r[k + j] = self.sub(r[k + j], self.mul(c, *y));
            }
            quo[k] = c;
            r.pop();
            self.poly_trim(&mut r);
        }
        self.poly_trim(&mut quo);
        (quo, r)
    }
    /// Monic gcd.
    pub fn poly_gcd(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let (mut x, mut y) = (a.to_vec(), b.to_vec());
        self.poly_trim(&mut x);
        self.poly_trim(&mut y);
        while !y.is_empty() {
            let (_, r) = self.poly_divrem(&x, &y);
            x = y;
            y = r;
        }
        if let Some(&l) = x.last() {
            let li = self.inv(l);
            x = self.poly_scale(&x, li);
        }
        x
    }
    pub fn poly_eval(&self, a: &[Elem], x: Elem) -> Elem {
        a.iter().rev().fold(0, |acc, c| self.add(self.mul(acc, x), *c))
    }
    /// All monic polynomials of degree d.
    pub fn monics(&self, d: usize) -> Vec<Vec<Elem>> {
        self.all_vectors(d)
            .map(|mut v| {
                v.push(1);
                v
            })
            .collect()
    }
    /// Monic irreducible polynomials of degree d, by sieving products of lower degrees.
    ///
    /// Monics of degree d are indexed by their lower coefficients read as a
    /// base-q integer, so the sieve is a flat bitmap.
    pub fn monic_irreducibles(&self, d: usize) -> Vec<Vec<Elem>> {
        if d <= 1 {
            return if d == 1 { self.monics(1) } else { Vec::new() };
        }
        let q = self.q as usize;
        let total = q.pow(d as u32);
        let mut reducible = vec![false; total];
        let mut prod = vec![0 as Elem; d + 1];
        for a in 1..=d / 2 {
            let b = d - a;
            for f in self.monic_irreducibles(a) {
                // odometer over the lower coefficients of a monic g of degree b
                let mut g = vec![0 as Elem; b + 1];
                g[b] = 1;
                loop {
                    prod.iter_mut().for_each(|c| *c = 0);
                    for (i, x) in f.iter().enumerate() {
                        if *x == 0 {
                            continue;
                        }
                        for (j, y) in g.iter().enumerate() {
                            prod[i + j] = self.add(prod[i + j], self.mul(*x, *y));
                        }
                    }
                    let idx = prod[..d].iter().rev().fold(0usize, |acc, c| acc * q + *c as usize);
                    reducible[idx] = true;
                    let mut k = 0;
                    while k < b {
                        g[k] += 1;
                        if (g[k] as usize) < q {
                            break;
                        }
                        g[k] = 0;
                        k += 1;
                    }
                    if k == b {
                        break;
                    }
                }
            }
        }
        (0..total)
            .filter(|&i| !reducible[i])
            .map(|mut x| {
                let mut v: Vec<Elem> = (0..d)
                    .map(|_| {
                        let c = (x % q) as Elem;
                        x /= q;
                        c
                    })
                    .collect();
                v.push(1);
                v
            })
            .collect()
    }
}
