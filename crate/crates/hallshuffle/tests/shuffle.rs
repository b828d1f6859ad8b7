use std::collections::BTreeMap;

use hallshuffle::linalg;
use hallshuffle::shuffle::*;
use hallshuffle::witt::{c_xr, CurveData};
use hallshuffle::{LaurentPoly, RationalFunction, Scalar, ScalarMode};
use proptest::prelude::*;

const SYM: ScalarMode = ScalarMode::Symbolic;

fn rf(x: &str) -> RationalFunction {
    RationalFunction::parse(x, SYM).unwrap()
}

fn g(d: i64) -> ShuffleElement {
    ShuffleElement::generator(0, d)
}

fn gc(c: ComponentId, d: i64) -> ShuffleElement {
    ShuffleElement::generator(c, d)
}

fn p1_kernel() -> Kernel {
    curve_kernels(&CurveData::p1(2), KernelFamily::Rank1, SYM).unwrap()
}

/// Two components, P¹ kernel on the diagonal blocks, λ₁₂ = s − 2t,
/// λ₂₁ = s − 3t off the diagonal.
fn two_component_kernel() -> Kernel {
    let p1 = p1_kernel();
    let lam = p1.lambda().unwrap()[&(0, 0)].clone();
    let l12 = rf("s-2*t");
    let l21 = rf("s-3*t");
    let swap = |f: &RationalFunction| f.rename_pairs(&[("s", "t"), ("t", "s")]);
    let c = BTreeMap::from([
        ((1, 1), p1.get(0, 0).unwrap().clone()),
        ((2, 2), p1.get(0, 0).unwrap().clone()),
        ((1, 2), &swap(&l21) / &l12),
        ((2, 1), &swap(&l12) / &l21),
    ]);
    let lambda = BTreeMap::from([((1, 1), lam.clone()), ((2, 2), lam), ((1, 2), l12), ((2, 1), l21)]);
    Kernel::new(c).unwrap().with_lambda(lambda).unwrap()
}

fn mono(a: i64, b: i64) -> RationalFunction {
    rf(&format!("t1^{a}*t2^{b}"))
}

#[test]
fn rank_one_kernel_of_p1_by_hand() {
    // q ζ(z)/ζ(z/q) with ζ(z) = 1/((1−z)(1−qz)), z = t/s, simplifies to
    // (q s − t)/(s − q t)
    let k = p1_kernel();
    assert!(k.is_antisymmetric());
    assert_eq!(k.get(0, 0).unwrap(), &rf("(v^2*s-t)/(s-v^2*t)"));
    // coboundary convention: c(s,t) = λ(t,s)/λ(s,t)
    let lam = &k.lambda().unwrap()[&(0, 0)];
    assert_eq!(&lam.rename_pairs(&[("s", "t"), ("t", "s")]) / lam, *k.get(0, 0).unwrap());
}

#[test]
fn degree_one_products() {
    let k = p1_kernel();
    let c12 = k.get(0, 0).unwrap().rename_pairs(&[("s", "t1"), ("t", "t2")]);
    for (a, b) in [(0, 0), (1, -2), (3, 1)] {
        let p = shuffle_mul(&g(a), &g(b), &k).unwrap();
        let expect = &mono(a, b) + &(&c12 * &mono(b, a));
        assert_eq!(p.get(&[0, 0]), expect);
        assert_eq!(p.terms().len(), 1);
    }
    // c ≡ 1: the symmetric algebra
    let one = Kernel::trivial(&[0]);
    let p = shuffle_mul(&g(2), &g(-1), &one).unwrap();
    assert_eq!(p.get(&[0, 0]), &mono(2, -1) + &mono(-1, 2));
    assert_eq!(p, shuffle_mul(&g(-1), &g(2), &one).unwrap());
    assert!(p.is_symmetric());
}

#[test]
fn display_uses_component_words() {
    let one = Kernel::trivial(&[1, 2]);
    let p = shuffle_mul(&gc(1, 1), &gc(2, 0), &one).unwrap();
    assert_eq!(p.to_string(), "{\"[1,2]\":\"t1\",\"[2,1]\":\"t2\"}");
    let k = Kernel::from_pairs(&[("0,0".into(), "(s-2*t)/(s+t)".into())], SYM).unwrap();
    assert!(!k.is_antisymmetric());
    assert!(k.to_string().starts_with("{\"0,0\":"));
}

#[test]
fn kernel_validation() {
    assert!(Kernel::single(RationalFunction::zero()).is_err());
    assert!(Kernel::single(rf("t1+s")).is_err());
    // parameters other than slot names are allowed
    assert!(Kernel::single(rf("a*s/t")).is_ok());
    let c = rf("(v^2*s-t)/(s-v^2*t)");
    assert!(Kernel::single(c.clone()).unwrap().with_lambda(BTreeMap::from([((0, 0), rf("s-t"))])).is_err());
    assert!(Kernel::single(c).unwrap().with_lambda(BTreeMap::new()).is_err());
    let k = Kernel::trivial(&[0]);
    assert!(shuffle_mul(&gc(1, 0), &g(0), &k).is_err());
    assert!(sym_shuffle_mul(&g(0), &g(0), &k, false).is_err());
}

#[test]
fn associativity_with_p1_kernel() {
    let k = p1_kernel();
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                let l = shuffle_mul(&shuffle_mul(&g(a), &g(b), &k).unwrap(), &g(c), &k).unwrap();
                let r = shuffle_mul(&g(a), &shuffle_mul(&g(b), &g(c), &k).unwrap(), &k).unwrap();
                assert_eq!(l, r, "({a},{b},{c})");
            }
        }
    }
}

#[test]
fn associativity_two_components_non_antisymmetric() {
    let k = Kernel::new(BTreeMap::from([
        ((1, 1), rf("(s-2*t)/(s+t)")),
        ((1, 2), rf("s/(s-t*5)")),
        ((2, 1), rf("t^2")),
        ((2, 2), rf("(3*s-t)")),
    ]))
    .unwrap();
    assert!(!k.is_antisymmetric());
    let xs = [gc(1, 0), gc(2, 1), gc(1, -1)];
    for x in &xs {
        for y in &xs {
            for z in &xs {
                let l = shuffle_mul(&shuffle_mul(x, y, &k).unwrap(), z, &k).unwrap();
                let r = shuffle_mul(x, &shuffle_mul(y, z, &k).unwrap(), &k).unwrap();
                assert_eq!(l, r);
            }
        }
    }
}

#[test]
fn products_are_braided_symmetric() {
    let k = p1_kernel();
    let p = shuffle_product(&[g(1), g(0), g(-1)], &k).unwrap();
    assert!(p.check_symmetry(&k).unwrap());
    assert!(!p.is_symmetric());
    let k2 = two_component_kernel();
    let p = shuffle_product(&[gc(1, 1), gc(2, 0), gc(1, 0)], &k2).unwrap();
    assert_eq!(p.terms().len(), 3);
    assert!(p.check_symmetry(&k2).unwrap());
}

#[test]
fn symmetric_product_small_cases() {
    let k = p1_kernel();
    let lam = &k.lambda().unwrap()[&(0, 0)];
    let l12 = lam.rename_pairs(&[("s", "t1"), ("t", "t2")]);
    let l21 = lam.rename_pairs(&[("s", "t2"), ("t", "t1")]);
    let x = sym_shuffle_mul(&g(2), &g(0), &k, false).unwrap();
    assert_eq!(x.get(&[0, 0]), &(&mono(2, 0) * &l12) + &(&mono(0, 2) * &l21));
    assert!(x.is_symmetric());
    // λ ≡ 1: plain symmetrization
    let triv = Kernel::trivial(&[0]).with_lambda(BTreeMap::from([((0, 0), RationalFunction::one())])).unwrap();
    let x = sym_shuffle_mul(&g(2), &g(0), &triv, false).unwrap();
    assert_eq!(x.get(&[0, 0]), &mono(2, 0) + &mono(0, 2));
    let y = sym_shuffle_mul(&x, &g(1), &triv, false).unwrap();
    assert_eq!(y.get(&[0, 0, 0]), rf("t1^2*t3+t1^2*t2+t2^2*t1+t2^2*t3+t3^2*t1+t3^2*t2"));
}

#[test]
fn psi_intertwines_products() {
    for k in [p1_kernel(), two_component_kernel()] {
        let gens: Vec<ShuffleElement> = if k.entries().contains_key(&(0, 0)) {
            vec![g(-1), g(0), g(2)]
        } else {
            vec![gc(1, 0), gc(2, 1), gc(1, -1)]
        };
        for x in &gens {
            assert_eq!(&psi_map(x, &k).unwrap(), x);
            for y in &gens {
                let xi = sym_shuffle_mul(x, y, &k, false).unwrap();
                assert!(xi.is_symmetric());
                assert_eq!(psi_map(&xi, &k).unwrap(), shuffle_mul(x, y, &k).unwrap());
                for z in &gens {
                    let xi3 = sym_shuffle_mul(&xi, z, &k, false).unwrap();
                    let mu3 = shuffle_product(&[x.clone(), y.clone(), z.clone()], &k).unwrap();
                    assert_eq!(psi_map(&xi3, &k).unwrap(), mu3);
                }
            }
        }
    }
}

/// R(φ⊗ψ) as a function on the word v ++ u.
fn braid(phi: &ShuffleElement, psi: &ShuffleElement, k: &Kernel) -> Vec<(Vec<u32>, Vec<u32>, RationalFunction)> {
    let mut out = Vec::new();
    for (u, f) in phi.terms() {
        for (v, gf) in psi.terms() {
            let (r, s) = (u.len(), v.len());
            let fm: BTreeMap<String, String> = (1..=r).map(|i| (slot(i), slot(s + i))).collect();
            let mut h = &f.rename(&fm) * gf;
            for a in 0..r {
                for b in 0..s {
                    let c = k.get(v[b], u[a]).unwrap().rename_pairs(&[("s", &slot(b + 1)), ("t", &slot(s + a + 1))]);
                    h = &h * &c;
                }
            }
            out.push((v.clone(), u.clone(), h));
        }
    }
    out
}

#[test]
fn m_commutativity() {
    for k in [p1_kernel(), two_component_kernel()] {
        let gens: Vec<ShuffleElement> = if k.entries().contains_key(&(0, 0)) {
            vec![g(-1), g(1), shuffle_mul(&g(0), &g(1), &p1_kernel()).unwrap()]
        } else {
            let k2 = two_component_kernel();
            vec![gc(1, 0), gc(2, 1), shuffle_mul(&gc(1, 1), &gc(2, 0), &k2).unwrap()]
        };
        for x in &gens {
            for y in &gens {
                let mut twisted = ShuffleElement::zero();
                for (v, u, h) in braid(x, y, &k) {
                    twisted = twisted.add(&shuffle_mul_tensor(&h, &v, &u, &k).unwrap());
                }
                assert_eq!(twisted, shuffle_mul(x, y, &k).unwrap());
            }
        }
    }
}

/// The three-arrow path of the bialgebra pentagon, projected to (n1, n2).
fn pentagon(phi: &ShuffleElement, psi: &ShuffleElement, n1: usize, k: &Kernel) -> ShuffleElement {
    let mut out = ShuffleElement::zero();
    for (u, f) in phi.terms() {
        for (v, gf) in psi.terms() {
            let (r, s) = (u.len(), v.len());
            for r1 in 0..=r.min(n1) {
                let s1 = n1 - r1;
                if s1 > s {
                    continue;
                }
                let r2 = r - r1;
                let fm: BTreeMap<String, String> =
                    (1..=r).map(|i| (slot(i), if i <= r1 { slot(i) } else { slot(n1 + i - r1) })).collect();
                let gm: BTreeMap<String, String> =
                    (1..=s).map(|i| (slot(i), if i <= s1 { slot(r1 + i) } else { slot(n1 + r2 + i - s1) })).collect();
                let mut h = &f.rename(&fm) * &gf.rename(&gm);
                // R moves the right part of φ past the left part of ψ
                for a in 0..r2 {
                    for b in 0..s1 {
                        let c = k
                            .get(v[b], u[r1 + a])
                            .unwrap()
                            .rename_pairs(&[("s", &slot(r1 + b + 1)), ("t", &slot(n1 + a + 1))]);
                        h = &h * &c;
                    }
                }
                let left = shuffle_mul_block(&h, &u[..r1], &v[..s1], k, 0).unwrap();
                for (w1, h1) in left.terms() {
                    let right = shuffle_mul_block(h1, &u[r1..], &v[s1..], k, n1).unwrap();
                    for (w2, h2) in right.terms() {
                        let w: Vec<u32> = w1.iter().chain(w2.iter()).copied().collect();
                        out = out.add(&ShuffleElement::from_terms([(w, h2.clone())]));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn coproduct_compatibility() {
    let k = p1_kernel();
    let phi = shuffle_mul(&g(1), &g(-1), &k).unwrap();
    let psi = g(0);
    let prod = shuffle_mul(&phi, &psi, &k).unwrap();
    for n1 in 0..=3 {
        assert_eq!(pentagon(&phi, &psi, n1, &k), prod, "split {n1}");
        for (w1, w2, f) in prod.coproduct(n1) {
            assert_eq!((w1.len(), w2.len()), (n1, 3 - n1));
            assert_eq!(f, prod.get(&[w1, w2].concat()));
        }
    }
    let k2 = Kernel::new(BTreeMap::from([
        ((1, 1), rf("(s-2*t)/(s+t)")),
        ((1, 2), rf("s/(s-t*5)")),
        ((2, 1), rf("t^2")),
        ((2, 2), rf("(3*s-t)")),
    ]))
    .unwrap();
    let phi = shuffle_mul(&gc(1, 1), &gc(2, 0), &k2).unwrap();
    let psi = shuffle_mul(&gc(2, -1), &gc(1, 0), &k2).unwrap();
    let prod = shuffle_mul(&phi, &psi, &k2).unwrap();
    for n1 in 0..=4 {
        assert_eq!(pentagon(&phi, &psi, n1, &k2), prod, "split {n1}");
    }
}

#[test]
fn quadratic_relations() {
    let k = p1_kernel();
    let x = exchange_factor(&k, 0, 0).unwrap();
    assert_eq!(x, rf("(v^2*t-s)/(t-v^2*s)"));
    let rep = quadratic_check(0, 0, &x, &k, (-3, 3)).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.checked, 49);
    let one = Kernel::trivial(&[0]);
    assert!(quadratic_check(0, 0, &RationalFunction::one(), &one, (-3, 3)).unwrap().passed);
    // exchange factor perturbed by t/s
    let bad = x.mul_monomial(&hallshuffle::Monomial::from_pairs([("t", 1), ("s", -1)]));
    let rep = quadratic_check(0, 0, &bad, &k, (-3, 3)).unwrap();
    assert!(!rep.passed);
    assert_eq!(rep.first_failure, Some((-3, -3)));
    // the swapped orientation c(s, t) fails
    let lit = x.rename_pairs(&[("s", "t"), ("t", "s")]);
    assert!(!quadratic_check(0, 0, &lit, &k, (-1, 1)).unwrap().passed);
    // two components, both orders
    let k2 = two_component_kernel();
    for (i, j) in [(1, 2), (2, 1), (1, 1)] {
        let x = exchange_factor(&k2, i, j).unwrap();
        assert!(quadratic_check(i, j, &x, &k2, (-1, 1)).unwrap().passed);
    }
}

fn eval_at(f: &RationalFunction, pt: &[(&str, i64)]) -> Scalar {
    let vals: Vec<(&str, Scalar)> = pt.iter().map(|(n, x)| (*n, Scalar::from_int(*x))).collect();
    let r = f.subst_const(&vals).unwrap().reduce();
    r.as_laurent().unwrap().as_constant().unwrap()
}

/// Independent oracle: relations among elements, found from values at
/// integer points (numeric q = 2, enough points to pin the span).
fn relations_by_evaluation(values: &[ShuffleElement], n: usize) -> Vec<Vec<Scalar>> {
    let words: std::collections::BTreeSet<Vec<u32>> = values.iter().flat_map(|v| v.terms().keys().cloned()).collect();
    let mut rows = Vec::new();
    for w in &words {
        for p in 0..24i64 {
            let pt: Vec<(String, i64)> = (1..=n).map(|i| (slot(i), 3 + p * 7 + (i as i64) * (i as i64) * 11 + p * p * i as i64)).collect();
            let pt: Vec<(&str, i64)> = pt.iter().map(|(a, b)| (a.as_str(), *b)).collect();
            rows.push(
                values
                    .iter()
                    .map(|v| eval_at(&v.get(w).in_mode(ScalarMode::Numeric(2)).unwrap(), &pt))
                    .collect::<Vec<_>>(),
            );
        }
    }
    linalg::nullspace(&rows, values.len()).unwrap()
}

#[test]
fn relation_spaces() {
    // c ≡ 1 with t^0, t^1: commutativity
    let one = Kernel::trivial(&[0]);
    let rs = relation_space(&[(0, 0), (0, 1)], 2, (1, 1), &one, 100).unwrap();
    assert_eq!(rs.words, vec![vec![1], vec![0, 1], vec![1, 0]]);
    assert_eq!(rs.basis.len(), 1);
    let r = &rs.basis[0];
    assert!(r[0].is_zero() && (&r[1] + &r[2]).is_zero() && !r[1].is_zero());

    // P¹ kernel, length-2 products with exponents in −2..2 at total degree 0
    let k = p1_kernel();
    let gens: Vec<(u32, i64)> = (-2..=2).map(|d| (0, d)).collect();
    let rs = relation_space(&gens, 2, (0, 0), &k, 100).unwrap();
    let two: Vec<usize> = (0..rs.words.len()).filter(|i| rs.words[*i].len() == 2).collect();
    let values: Vec<ShuffleElement> = rs
        .words
        .iter()
        .map(|w| shuffle_product(&w.iter().map(|i| g(gens[*i].1)).collect::<Vec<_>>(), &k).unwrap())
        .collect();
    let oracle = relations_by_evaluation(&values[two[0]..], 2);
    let restricted: Vec<Vec<Scalar>> = rs.basis.iter().map(|r| r[two[0]..].to_vec()).collect();
    assert!(rs.basis.iter().all(|r| r[..two[0]].iter().all(|c| c.is_zero())));
    assert!(linalg::same_span(&restricted.iter().map(|r| r.iter().map(|c| c.in_mode(ScalarMode::Numeric(2)).unwrap()).collect()).collect::<Vec<_>>(), &oracle).unwrap());
    // the coefficient identities of (t − q s)E(t)E(s) = (q t − s)E(s)E(t):
    // e^x e^y − q e^{x+1} e^{y−1} − q e^y e^x + e^{y−1} e^{x+1} = 0
    let q = Scalar::q(SYM);
    let idx = |a: i64, b: i64| rs.words.iter().position(|w| w.len() == 2 && gens[w[0]].1 == a && gens[w[1]].1 == b);
    let mut predicted = Vec::new();
    for x in -2..=2i64 {
        let y = -x;
        let terms = [(x, y, Scalar::one()), (x + 1, y - 1, -&q), (y, x, -&q), (y - 1, x + 1, Scalar::one())];
        if terms.iter().all(|(a, b, _)| idx(*a, *b).is_some()) {
            let mut v = vec![Scalar::zero(); rs.words.len()];
            for (a, b, c) in terms {
                let i = idx(a, b).unwrap();
                v[i] = &v[i] + &c;
            }
            predicted.push(v);
        }
    }
    assert!(!predicted.is_empty());
    let mut both = rs.basis.clone();
    both.extend(predicted.iter().cloned());
    assert_eq!(linalg::rank(&both).unwrap(), rs.basis.len());

    // two components, antisymmetric generic kernel: one relation in the
    // mixed part at total degree 1
    let k2 = two_component_kernel();
    let rs = relation_space(&[(1, 0), (1, 1), (2, 0), (2, 1)], 2, (1, 1), &k2, 100).unwrap();
    let mixed: Vec<usize> = (0..rs.words.len())
        .filter(|i| {
            let w = &rs.words[*i];
            w.len() == 2 && w.iter().map(|j| [1, 1, 2, 2][*j]).collect::<std::collections::BTreeSet<_>>().len() == 2
        })
        .collect();
    let mixed_relations = rs
        .basis
        .iter()
        .filter(|r| r.iter().enumerate().all(|(i, c)| c.is_zero() || mixed.contains(&i)))
        .count();
    assert_eq!(mixed.len(), 4);
    assert_eq!(mixed_relations, 1);
    assert!(relation_space(&[(0, 0)], 4, (0, 0), &one, 100).is_err());
    assert!(relation_space(&gens, 3, (-6, 6), &k, 10).is_err());
}

#[test]
fn regularity() {
    let k = p1_kernel();
    let lt = &k.lambda_tilde().unwrap()[&(0, 0)];
    assert!(check_lambda_tilde(lt).is_ok());
    for a in -1..=1 {
        for b in -1..=1 {
            let x = sym_shuffle_mul(&g(a), &g(b), &k, true).unwrap();
            let rep = regularity_check(&x, &k).unwrap();
            assert!(rep.passed, "{a},{b}: {:?}", rep.offending);
            assert!(x.is_symmetric());
            for c in [-1, 2] {
                let y = sym_shuffle_mul(&x, &g(c), &k, true).unwrap();
                assert!(regularity_check(&y, &k).unwrap().passed);
            }
        }
    }
    assert!(regularity_check(&g(5), &k).unwrap().passed);
    assert!(ideal_spot_check((0, 0), (0, 1), &k).unwrap());
    assert!(ideal_spot_check((0, -1), (0, 2), &k).unwrap());
    // the plain λ has a pole off the diagonal, s = q t
    let lam = k.lambda().unwrap()[&(0, 0)].clone();
    assert!(check_lambda_tilde(&lam).is_err());
    // second-order diagonal pole
    let bad_lt = rf("s*t/(s-t)^2");
    assert_eq!(check_lambda_tilde(&bad_lt), Err(String::from("(s-t)^2")));
    let bad = k.clone().with_lambda_tilde(BTreeMap::from([((0, 0), bad_lt)]));
    let x = sym_shuffle_mul(&g(0), &g(1), &bad, true).unwrap();
    let rep = regularity_check(&x, &bad).unwrap();
    assert!(!rep.passed);
    assert!(rep.offending.is_some());
}

#[test]
fn elliptic_kernels() {
    let curve = CurveData::elliptic(3, 1).unwrap();
    let n = ScalarMode::Numeric(3);
    let k1 = curve_kernels(&curve, KernelFamily::Elliptic(1), n).unwrap();
    let r1 = curve_kernels(&curve, KernelFamily::Rank1, n).unwrap();
    assert_eq!(k1.get(0, 0).unwrap(), r1.get(0, 0).unwrap());
    let k2 = curve_kernels(&curve, KernelFamily::Elliptic(2), n).unwrap();
    assert!(k2.is_antisymmetric());
    assert!(curve_kernels(&curve, KernelFamily::Rank1, SYM).is_err());
    // symbolic a: P(t) = 1 − a t + q t²
    let p = vec![LaurentPoly::one(), LaurentPoly::var("a").scale(&Scalar::from_int(-1)), LaurentPoly::constant(Scalar::q(SYM))];
    for r in 1..=3 {
        let c = c_xr(&p, 1, &Scalar::q(SYM), r, "s", "t").unwrap();
        assert!(Kernel::single(c).unwrap().is_antisymmetric(), "r = {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn associativity_random_exponents(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3, d in -2i64..=2) {
        let k = p1_kernel();
        let x = [g(a), g(b), g(c), g(d)];
        let l = shuffle_mul(&shuffle_mul(&x[0], &x[1], &k).unwrap(), &shuffle_mul(&x[2], &x[3], &k).unwrap(), &k).unwrap();
        let r = shuffle_product(&x, &k).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn unit_and_linearity(a in -3i64..=3, b in -3i64..=3, n in -5i64..=5) {
        let k = p1_kernel();
        let x = g(a).add(&g(b).scale(&Scalar::from_int(n)));
        prop_assert_eq!(shuffle_mul(&ShuffleElement::unit(), &x, &k).unwrap(), x.clone());
        prop_assert_eq!(shuffle_mul(&x, &ShuffleElement::unit(), &k).unwrap(), x.clone());
        let l = shuffle_mul(&x, &g(0), &k).unwrap();
        let r = shuffle_mul(&g(a), &g(0), &k).unwrap().add(&shuffle_mul(&g(b), &g(0), &k).unwrap().scale(&Scalar::from_int(n)));
        prop_assert_eq!(l, r);
    }
}
