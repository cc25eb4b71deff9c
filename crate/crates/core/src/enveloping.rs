//! U(𝔤)[ν] in PBW normal form, and the symmetrization map σ_ν.
//!
//! Straightening never involves ν. All the combinatorics is done over ℚ
//! with the ν-free symmetrization `s(ξ^α) = (1/k!) Σ_orderings`; the ν^k
//! prefactor of σ_ν is attached afterwards.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::{Arc, RwLock};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::poly::{Multi, PolyG};
use crate::scalar::{int, GaussianRational, LambdaPoly, Rational, Ring, Scalar};

/// Rational element of U(𝔤): ordered monomial e^α ↦ coefficient.
pub type RPbw = BTreeMap<Multi, Rational>;

/// Element of U(𝔤)[ν]: keys are ordered PBW monomials e₁^{a₁}⋯e_n^{a_n}.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PbwElement<S: Scalar>(pub PolyG<S>);

impl<S: Scalar> PbwElement<S> {
    pub fn zero(n: usize) -> Self {
        Self(PolyG::zero(n))
    }
    pub fn unit(n: usize) -> Self {
        Self(PolyG::one(n))
    }
    /// The single ordered monomial c·e^α.
    pub fn monomial(n: usize, alpha: Multi, c: LambdaPoly<S>) -> Self {
        Self(PolyG::monomial(n, alpha, c))
    }
    pub fn generator(n: usize, i: usize) -> Self {
        Self(PolyG::var(n, i))
    }
    pub fn plus(&self, o: &Self) -> Self {
        Self(self.0.plus(&o.0))
    }
    pub fn minus(&self, o: &Self) -> Self {
        Self(self.0.minus(&o.0))
    }
}

fn add_to(map: &mut RPbw, m: Multi, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(m).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        map.remove(&m);
    }
}

struct Memo<K, V>(RwLock<HashMap<K, Arc<V>>>);

impl<K: Eq + Hash + Clone, V> Memo<K, V> {
    fn new() -> Self {
        Self(RwLock::new(HashMap::new()))
    }
    fn get(&self, k: &K) -> Option<Arc<V>> {
        self.0.read().unwrap().get(k).cloned()
    }
    /// First writer wins; later identical results are discarded.
    fn publish(&self, k: K, v: V) -> Arc<V> {
        self.0.write().unwrap().entry(k).or_insert_with(|| Arc::new(v)).clone()
    }
    fn len(&self) -> usize {
        self.0.read().unwrap().len()
    }
}

/// Straightening engine for one algebra, with memo tables.
pub struct Enveloping {
    alg: Arc<LieAlgebra>,
    gen: Memo<(Multi, usize), RPbw>,
    sym: Memo<Multi, RPbw>,
    star: Memo<(Multi, Multi), Vec<(Multi, Rational)>>,
}

impl std::fmt::Debug for Enveloping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Enveloping({})", self.alg.name())
    }
}

impl Enveloping {
    pub fn new(alg: Arc<LieAlgebra>) -> Self {
        Self { alg, gen: Memo::new(), sym: Memo::new(), star: Memo::new() }
    }
    pub fn algebra(&self) -> &LieAlgebra {
        &self.alg
    }
    pub fn nvars(&self) -> usize {
        self.alg.dim()
    }
    pub fn cache_sizes(&self) -> (usize, usize, usize) {
        (self.gen.len(), self.sym.len(), self.star.len())
    }

    /// e^α · e_j in normal form.
    pub fn mul_gen(&self, alpha: &Multi, j: usize) -> Arc<RPbw> {
        let key = (*alpha, j);
        if let Some(v) = self.gen.get(&key) {
            return v;
        }
        let n = self.nvars();
        let last = (0..n).rev().find(|&i| alpha.get(i) > 0);
        let mut out = RPbw::new();
        match last {
            Some(m) if m > j => {
                // e^{α'} e_m e_j = (e^{α'} e_j) e_m + e^{α'} [e_m, e_j]
                let rest = alpha.dec(m).unwrap();
                let head = self.mul_gen(&rest, j);
                for (g, c) in head.iter() {
                    for (h, d) in self.mul_gen(g, m).iter() {
                        add_to(&mut out, *h, c * d);
                    }
                }
                for (k, c) in self.alg.bracket_of(m, j) {
                    for (h, d) in self.mul_gen(&rest, *k).iter() {
                        add_to(&mut out, *h, c * d);
                    }
                }
            }
            _ => {
                out.insert(alpha.inc(j), int(1));
            }
        }
        self.gen.publish(key, out)
    }

    /// A · e_j
    pub fn right_mul_gen(&self, a: &RPbw, j: usize) -> RPbw {
        let mut out = RPbw::new();
        for (g, c) in a {
            for (h, d) in self.mul_gen(g, j).iter() {
                add_to(&mut out, *h, c * d);
            }
        }
        out
    }

    /// e^α · e^β
    pub fn mul_monomials(&self, alpha: &Multi, beta: &Multi) -> RPbw {
        let mut acc = RPbw::new();
        acc.insert(*alpha, int(1));
        for i in 0..self.nvars() {
            for _ in 0..beta.get(i) {
                acc = self.right_mul_gen(&acc, i);
            }
        }
        acc
    }

    pub fn mul_rational(&self, a: &RPbw, b: &RPbw) -> RPbw {
        let mut out = RPbw::new();
        for (g, c) in a {
            for (h, d) in b {
                let cd = c * d;
                for (k, e) in self.mul_monomials(g, h) {
                    add_to(&mut out, k, &cd * e);
                }
            }
        }
        out
    }

    /// ν-free symmetrization of ξ^α: the average over all orderings.
    pub fn sym_monomial(&self, alpha: &Multi) -> Arc<RPbw> {
        if let Some(v) = self.sym.get(alpha) {
            return v;
        }
        let k = alpha.degree();
        let mut out = RPbw::new();
        if k == 0 {
            out.insert(Multi::zero(), int(1));
        } else {
            // Group orderings by their last letter.
            for j in 0..self.nvars() {
                let aj = alpha.get(j);
                if aj == 0 {
                    continue;
                }
                let w = Rational::new(aj.into(), k.into());
                let prev = self.sym_monomial(&alpha.dec(j).unwrap());
                for (h, d) in self.right_mul_gen(&prev, j) {
                    add_to(&mut out, h, &w * d);
                }
            }
        }
        self.sym.publish(*alpha, out)
    }

    /// Inverse of `sym_monomial` extended linearly, top degree down.
    pub fn unsym_rational(&self, a: &RPbw) -> BTreeMap<Multi, Rational> {
        let mut rest = a.clone();
        let mut out = BTreeMap::new();
        while let Some(d) = rest.keys().map(|m| m.degree()).max() {
            let top: Vec<(Multi, Rational)> =
                rest.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (*m, c.clone())).collect();
            for (m, c) in top {
                for (h, e) in self.sym_monomial(&m).iter() {
                    add_to(&mut rest, *h, -(&c * e));
                }
                out.insert(m, c);
            }
        }
        out
    }

    /// Rational data of ξ^α ⋆ ξ^β: pairs (γ, c) meaning c·ν^{|α|+|β|−|γ|} ξ^γ.
    pub fn star_monomials(&self, alpha: &Multi, beta: &Multi) -> Arc<Vec<(Multi, Rational)>> {
        let key = (*alpha, *beta);
        if let Some(v) = self.star.get(&key) {
            return v;
        }
        let prod = self.mul_rational(&self.sym_monomial(alpha), &self.sym_monomial(beta));
        let v: Vec<_> = self.unsym_rational(&prod).into_iter().collect();
        self.star.publish(key, v)
    }

    pub fn pbw_mul<S: Scalar>(&self, a: &PbwElement<S>, b: &PbwElement<S>) -> PbwElement<S> {
        let n = self.nvars();
        let mut out = PolyG::zero(n);
        for (g, c) in a.0.terms() {
            for (h, d) in b.0.terms() {
                let cd = c.times(d);
                for (k, e) in self.mul_monomials(g, h) {
                    out.add_term(k, cd.scale(&e));
                }
            }
        }
        PbwElement(out)
    }

    /// σ_ν(f): degree-k monomials pick up ν^k.
    pub fn symmetrize<S: Scalar>(&self, f: &PolyG<S>) -> PbwElement<S> {
        let n = self.nvars();
        let mut out = PolyG::zero(n);
        for (m, c) in f.terms() {
            let scaled = c.times(&LambdaPoly::nu_pow(m.degree()));
            for (h, e) in self.sym_monomial(m).iter() {
                out.add_term(*h, scaled.scale(e));
            }
        }
        PbwElement(out)
    }

    /// σ_ν⁻¹(A). Fails if a top coefficient is not divisible by ν^{degree}.
    pub fn unsymmetrize<S: Scalar>(&self, a: &PbwElement<S>) -> Result<PolyG<S>> {
        let n = self.nvars();
        let mut rest = a.0.clone();
        let mut out = PolyG::zero(n);
        while !rest.is_zero() {
            let d = rest.degree();
            let top: Vec<(Multi, LambdaPoly<S>)> =
                rest.terms().filter(|(m, _)| m.degree() == d).map(|(m, c)| (*m, c.clone())).collect();
            for (m, c) in top {
                let lowered = c.unshift(d).ok_or_else(|| Error::NonInvertibleCoefficient {
                    monomial: format!("{:?}", m.to_vec(n)),
                    power: d,
                })?;
                let inv = S::from_gauss(&GaussianRational::i_pow(d).inverse().unwrap());
                out.add_term(m, lowered.scale_scalar(&inv));
                for (h, e) in self.sym_monomial(&m).iter() {
                    rest.add_term(*h, c.scale(e).negated());
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie;
    use crate::scalar::GaussianRational as G;
    use proptest::prelude::*;

    fn env(a: LieAlgebra) -> Enveloping {
        Enveloping::new(Arc::new(a))
    }
    fn m(e: &[u32]) -> Multi {
        Multi::from_slice(e)
    }
    fn rp(terms: &[(&[u32], i64)]) -> RPbw {
        let mut r = RPbw::new();
        for (e, c) in terms {
            add_to(&mut r, m(e), int(*c));
        }
        r
    }

    #[test]
    fn straightening_examples() {
        let u = env(lie::su2());
        assert_eq!(u.mul_monomials(&m(&[0, 1, 0]), &m(&[1, 0, 0])), rp(&[(&[1, 1, 0], 1), (&[0, 0, 1], -1)]));
        let a = env(lie::abelian(2));
        assert_eq!(a.mul_monomials(&m(&[0, 1]), &m(&[1, 0])), rp(&[(&[1, 1], 1)]));
        let h = env(lie::heisenberg3());
        assert_eq!(h.mul_monomials(&m(&[0, 1, 0]), &m(&[1, 0, 1])), rp(&[(&[1, 1, 1], 1), (&[0, 0, 2], -1)]));
    }

    #[test]
    fn symmetrize_examples() {
        let u = env(lie::su2());
        let x1 = PolyG::<G>::var(3, 0);
        let x2 = PolyG::<G>::var(3, 1);
        let s = u.symmetrize(&x1);
        assert_eq!(s, PbwElement::monomial(3, m(&[1, 0, 0]), LambdaPoly::nu()));
        let s2 = u.symmetrize(&x1.times(&x2));
        let nu2 = LambdaPoly::<G>::nu_pow(2);
        let want = PolyG::from_terms(3, [(m(&[1, 1, 0]), nu2.clone()), (m(&[0, 0, 1]), nu2.scale(&crate::scalar::rat(-1, 2)))]);
        assert_eq!(s2.0, want);
        assert_eq!(u.symmetrize(&PolyG::<G>::one(3)), PbwElement::unit(3));
    }

    #[test]
    fn unsymmetrize_examples() {
        let u = env(lie::su2());
        let a = PbwElement::monomial(3, m(&[1, 1, 0]), LambdaPoly::<G>::nu_pow(2));
        let f = u.unsymmetrize(&a).unwrap();
        let want = PolyG::from_terms(
            3,
            [(m(&[1, 1, 0]), LambdaPoly::one()), (m(&[0, 0, 1]), LambdaPoly::<G>::nu().scale(&crate::scalar::rat(1, 2)))],
        );
        assert_eq!(f, want);
        assert_eq!(u.unsymmetrize(&PbwElement::<G>::unit(3)).unwrap(), PolyG::one(3));
        let bad = PbwElement::monomial(3, m(&[1, 0, 0]), LambdaPoly::<G>::one());
        assert!(matches!(u.unsymmetrize(&bad), Err(Error::NonInvertibleCoefficient { power: 1, .. })));
    }

    fn small_poly(n: usize, max_deg: u32) -> impl Strategy<Value = PolyG<G>> {
        prop::collection::vec((prop::collection::vec(0u32..=max_deg, n), -3i64..=3, 0u32..2), 1..4).prop_map(
            move |ts| {
                let mut p = PolyG::zero(n);
                for (mut e, c, lam) in ts {
                    while e.iter().sum::<u32>() > max_deg {
                        let i = e.iter().position(|&x| x > 0).unwrap();
                        e[i] -= 1;
                    }
                    p.add_term(Multi::from_slice(&e), LambdaPoly::monomial(lam, G::from_rational(&int(c))));
                }
                p
            },
        )
    }

    fn algebras() -> impl Strategy<Value = LieAlgebra> {
        prop::sample::select(vec!["su2", "sl2", "heisenberg3", "direct_sum(aff1,aff1)"]).prop_map(|s| lie::catalog(s).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn unsym_inverts_sym(alg in algebras(), f in small_poly(4, 6)) {
            let n = alg.dim();
            let f = PolyG::from_terms(n, f.terms().filter(|(m, _)| (n..4).all(|i| m.get(i) == 0)).map(|(m, c)| (*m, c.clone())));
            let u = env(alg);
            prop_assert_eq!(u.unsymmetrize(&u.symmetrize(&f)).unwrap(), f);
        }

        #[test]
        fn pbw_is_associative(alg in algebras(), a in small_poly(3, 3), b in small_poly(3, 3), c in small_poly(3, 3)) {
            let n = alg.dim();
            let u = env(alg);
            let lift = |p: &PolyG<G>| PbwElement(p.with_nvars(n));
            let (a, b, c) = (lift(&a), lift(&b), lift(&c));
            prop_assert_eq!(u.pbw_mul(&u.pbw_mul(&a, &b), &c), u.pbw_mul(&a, &u.pbw_mul(&b, &c)));
        }

        #[test]
        fn commutator_of_linear_elements(alg in algebras(), xs in prop::collection::vec(-3i64..=3, 4), ys in prop::collection::vec(-3i64..=3, 4)) {
            let n = alg.dim();
            let u = env(alg.clone());
            let lin = |v: &[i64]| PolyG::<G>::from_terms(n, (0..n).map(|i| (Multi::unit(i), LambdaPoly::from_int(v[i]))));
            let (x, y) = (lin(&xs), lin(&ys));
            let sx = u.symmetrize(&x);
            let sy = u.symmetrize(&y);
            let comm = u.pbw_mul(&sx, &sy).minus(&u.pbw_mul(&sy, &sx));
            let xr: Vec<Rational> = xs[..n].iter().map(|&v| int(v)).collect();
            let yr: Vec<Rational> = ys[..n].iter().map(|&v| int(v)).collect();
            let br = alg.bracket_vec(&xr, &yr);
            let image = PolyG::<G>::from_terms(n, (0..n).map(|k| (Multi::unit(k), LambdaPoly::nu_pow(2).scale(&br[k]))));
            prop_assert_eq!(comm.0, image);
        }
    }
}
