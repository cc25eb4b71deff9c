//! Linear Poisson structure on 𝔤*, exact integrators and harmonic splitting.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::poly::{Multi, Poly, PolyG};
use crate::scalar::{double_factorial_odd, int, LambdaPoly, Rational, Ring, Scalar, Sym, Unit};

/// {f,g} = ξ_k c^k_{ij} ∂_i f ∂_j g
pub fn poisson_bracket<C: Ring>(alg: &LieAlgebra, f: &Poly<C>, g: &Poly<C>) -> Poly<C> {
    let n = alg.dim();
    let df: Vec<_> = (0..n).map(|i| f.partial(i)).collect();
    let dg: Vec<_> = (0..n).map(|j| g.partial(j)).collect();
    let mut out = Poly::zero(n);
    for i in 0..n {
        if df[i].is_zero() {
            continue;
        }
        for j in 0..n {
            let b = alg.bracket_of(i, j);
            if b.is_empty() || dg[j].is_zero() {
                continue;
            }
            let prod = df[i].times(&dg[j]);
            for (k, c) in b {
                let x = Multi::unit(*k);
                for (m, v) in prod.terms() {
                    out.add_term(m.add(&x), v.scale(c));
                }
            }
        }
    }
    out
}

/// Hamiltonian vector field of a linear function: {x̂, ·} for x = Σ xᵢeᵢ.
pub fn linear_function<S: Scalar>(n: usize, x: &[Rational]) -> PolyG<S> {
    PolyG::from_terms(n, x.iter().enumerate().map(|(i, c)| (Multi::unit(i), LambdaPoly::from_rational(c))))
}

/// Polynomial factor p of p(ξ)·exp(−|ξ − c|²/2). The centre is zero unless
/// stated otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly<S: Scalar> {
    pub p: PolyG<S>,
}

impl<S: Scalar> GaussPoly<S> {
    pub fn new(p: PolyG<S>) -> Self {
        Self { p }
    }
    /// ∂_i(p e^{−u/2}) = (∂_i p − ξ_i p) e^{−u/2}
    pub fn partial(&self, i: usize) -> Self {
        Self { p: self.p.partial(i).minus(&self.p.mul_monomial(&Multi::unit(i))) }
    }
    pub fn mul_poly(&self, q: &PolyG<S>) -> Self {
        Self { p: self.p.times(q) }
    }
    pub fn integral(&self) -> LambdaPoly<Sym> {
        gaussian_integral(&self.p)
    }
}

/// ∫ ξ^α e^{−|ξ|²/2} dξ / √(2π)ⁿ
pub fn gaussian_moment(alpha: &Multi, n: usize) -> Option<BigInt> {
    let mut acc = BigInt::from(1);
    for i in 0..n {
        let e = alpha.get(i);
        if e % 2 == 1 {
            return None;
        }
        acc *= double_factorial_odd(e / 2);
    }
    Some(acc)
}

/// ∫_{ℝⁿ} p(ξ) e^{−|ξ|²/2} dⁿξ, as a λ-series with symbolic scalars.
pub fn gaussian_integral<S: Scalar>(p: &PolyG<S>) -> LambdaPoly<Sym> {
    let n = p.nvars();
    let mut out = LambdaPoly::<Sym>::zero();
    for (m, c) in p.terms() {
        if let Some(w) = gaussian_moment(m, n) {
            out.add_in(&c.map(|s| s.to_sym()).scale(&Rational::from_integer(w)));
        }
    }
    if out.is_zero() {
        return out;
    }
    out.scale_scalar(&Sym::unit_pow(Unit::Sqrt2Pi, n as i32))
}

/// Value of r² for sphere averages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Radius2 {
    Symbolic,
    Value(#[serde(with = "crate::scalar::rational_serde")] Rational),
}

impl Radius2 {
    pub fn pow(&self, k: u32) -> Sym {
        match self {
            Radius2::Symbolic => Sym::unit_pow(Unit::R2, k as i32),
            Radius2::Value(q) => Sym::rational(num_traits::pow(q.clone(), k as usize)),
        }
    }
    pub fn as_sym(&self) -> Sym {
        self.pow(1)
    }
}

/// Mean of ξ^α over the sphere |ξ| = r in ℝ³, divided by (r²)^{|α|/2}.
pub fn sphere_moment(alpha: &Multi) -> Option<Rational> {
    let mut num = BigInt::from(1);
    let mut total = 0;
    for i in 0..3 {
        let e = alpha.get(i);
        if e % 2 == 1 {
            return None;
        }
        num *= double_factorial_odd(e / 2);
        total += e;
    }
    // (|α|+1)!! with |α| even is (2m+1)!! = (2(m+1)−1)!!
    Some(Rational::new(num, double_factorial_odd(total / 2 + 1)))
}

/// Average over the radius-r sphere in su(2)* ≅ ℝ³.
pub fn sphere_average<S: Scalar>(f: &PolyG<S>, r2: &Radius2) -> Result<LambdaPoly<Sym>> {
    if f.nvars() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: f.nvars() });
    }
    let mut out = LambdaPoly::<Sym>::zero();
    for (m, c) in f.terms() {
        if let Some(w) = sphere_moment(m) {
            let s = r2.pow(m.degree() / 2).scale(&w);
            out.add_in(&c.map(|x| x.to_sym()).scale_scalar(&s));
        }
    }
    Ok(out)
}

/// u = |ξ|²
pub fn radial<C: Ring>(n: usize) -> Poly<C> {
    Poly::from_terms(n, (0..n).map(|i| (Multi::unit(i).add(&Multi::unit(i)), C::one())))
}

/// f = Σ u^m H_{m,d}, keyed by (m, d) with d = deg H.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicDecomposition<C: Ring> {
    pub nvars: usize,
    pub parts: BTreeMap<(u32, u32), Poly<C>>,
}

impl<C: Ring> HarmonicDecomposition<C> {
    pub fn reassemble(&self) -> Poly<C> {
        let u = radial::<C>(self.nvars);
        let mut out = Poly::zero(self.nvars);
        for ((m, _), h) in &self.parts {
            out.add_assign(&u.pow(*m).times(h));
        }
        out
    }
    fn insert(&mut self, key: (u32, u32), h: Poly<C>) {
        if h.is_zero() {
            return;
        }
        let e = self.parts.entry(key).or_insert_with(|| Poly::zero(self.nvars));
        e.add_assign(&h);
        if e.is_zero() {
            self.parts.remove(&key);
        }
    }
    /// Σ_d H_{0,d}: the harmonic part.
    pub fn harmonic_part(&self) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for ((m, _), h) in &self.parts {
            if *m == 0 {
                out.add_assign(h);
            }
        }
        out
    }
}

fn decompose_homogeneous<C: Ring>(p: &Poly<C>, k: u32) -> Vec<(u32, Poly<C>)> {
    if p.is_zero() {
        return Vec::new();
    }
    let n = p.nvars();
    if k < 2 {
        return vec![(0, p.clone())];
    }
    // Write Δp = Σ u^j H_j and solve Δ(u q) = Δp using
    // Δ(u^{j+1} H) = 2(j+1)(2j+2d+n) u^j H for harmonic H of degree d.
    let inner = decompose_homogeneous(&p.laplacian(), k - 2);
    let u = radial::<C>(n);
    let mut out = Vec::new();
    let mut uq = Poly::zero(n);
    for (j, h) in inner {
        let d = k - 2 - 2 * j;
        let denom = int(2 * (j as i64 + 1) * (2 * j as i64 + 2 * d as i64 + n as i64));
        let piece = h.scale_q(&(int(1) / denom));
        uq.add_assign(&u.pow(j + 1).times(&piece));
        out.push((j + 1, piece));
    }
    out.push((0, p.minus(&uq)));
    out
}

/// Splits f into u-powers times harmonic polynomials.
pub fn harmonic_decompose<C: Ring>(f: &Poly<C>) -> HarmonicDecomposition<C> {
    let n = f.nvars();
    let mut out = HarmonicDecomposition { nvars: n, parts: BTreeMap::new() };
    for k in 0..=f.degree() {
        let hk = f.homogeneous_part(k);
        for (m, h) in decompose_homogeneous(&hk, k) {
            out.insert((m, k - 2 * m), h);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie;
    use crate::scalar::{rat, GaussianRational as G};
    use proptest::prelude::*;

    type P = PolyG<G>;

    fn m(e: &[u32]) -> Multi {
        Multi::from_slice(e)
    }
    fn mono(n: usize, e: &[u32]) -> P {
        P::monomial(n, m(e), LambdaPoly::one())
    }

    #[test]
    fn bracket_examples() {
        let su2 = lie::su2();
        assert_eq!(poisson_bracket(&su2, &P::var(3, 0), &P::var(3, 1)), P::var(3, 2));
        let f = mono(3, &[2, 1, 0]).plus(&mono(3, &[0, 0, 3]));
        assert!(poisson_bracket(&su2, &f, &f).is_zero());
        let h = lie::heisenberg3();
        assert!(poisson_bracket(&h, &P::var(3, 2), &f).is_zero());
    }

    #[test]
    fn gaussian_examples() {
        assert!(gaussian_integral(&P::var(1, 0)).is_zero());
        let s = Sym::sqrt_2pi();
        assert_eq!(gaussian_integral(&mono(1, &[2])), LambdaPoly::constant(s.clone()));
        let want = Sym::unit_pow(Unit::Sqrt2Pi, 3).scale(&int(3));
        assert_eq!(gaussian_integral(&mono(3, &[2, 4, 0])), LambdaPoly::constant(want));
    }

    #[test]
    fn sphere_examples() {
        let r = Radius2::Symbolic;
        assert!(sphere_average(&P::var(3, 0), &r).unwrap().is_zero());
        assert_eq!(
            sphere_average(&mono(3, &[2, 0, 0]), &r).unwrap(),
            LambdaPoly::constant(Sym::r2().scale(&rat(1, 3)))
        );
        assert_eq!(
            sphere_average(&mono(3, &[4, 0, 0]), &r).unwrap(),
            LambdaPoly::constant(Sym::unit_pow(Unit::R2, 2).scale(&rat(1, 5)))
        );
        assert_eq!(
            sphere_average(&mono(3, &[2, 2, 0]), &Radius2::Value(int(2))).unwrap(),
            LambdaPoly::constant(Sym::rational(rat(4, 15)))
        );
        assert!(matches!(sphere_average(&P::var(2, 0), &r), Err(Error::WrongDimension { .. })));
    }

    #[test]
    fn harmonic_examples() {
        let d = harmonic_decompose(&mono(3, &[2, 0, 0]));
        let u = radial::<LambdaPoly<G>>(3);
        assert_eq!(d.parts[&(0, 2)], mono(3, &[2, 0, 0]).minus(&u.scale_q(&rat(1, 3))));
        assert_eq!(d.parts[&(1, 0)], P::from_rational(3, rat(1, 3)));
        let d = harmonic_decompose(&mono(3, &[1, 1, 0]));
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.parts[&(0, 2)], mono(3, &[1, 1, 0]));
        let d = harmonic_decompose(&u);
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.parts[&(1, 0)], P::one(3));
    }

    fn poly3(max_deg: u32) -> impl Strategy<Value = P> {
        prop::collection::vec((0u32..=max_deg, 0u32..=max_deg, 0u32..=max_deg, -4i64..=4), 1..5).prop_map(move |ts| {
            let mut p = P::zero(3);
            for (a, b, c, k) in ts {
                let (a, b) = (a.min(max_deg), b.min(max_deg - a.min(max_deg)));
                let c = c.min(max_deg - a - b);
                p.add_term(m(&[a, b, c]), LambdaPoly::from_int(k));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn jacobi_and_leibniz(name in prop::sample::select(vec!["su2", "sl2", "heisenberg3"]),
                              f in poly3(4), g in poly3(4), h in poly3(4)) {
            let a = lie::catalog(name).unwrap();
            let pb = |x: &P, y: &P| poisson_bracket(&a, x, y);
            let jac = pb(&f, &pb(&g, &h)).plus(&pb(&g, &pb(&h, &f))).plus(&pb(&h, &pb(&f, &g)));
            prop_assert!(jac.is_zero());
            let leib = pb(&f, &g.times(&h)).minus(&pb(&f, &g).times(&h)).minus(&g.times(&pb(&f, &h)));
            prop_assert!(leib.is_zero());
        }

        #[test]
        fn integration_by_parts(f in poly3(5), i in 0usize..3) {
            prop_assert!(GaussPoly::new(f).partial(i).integral().is_zero());
        }

        #[test]
        fn harmonic_reassembles(f in poly3(6)) {
            let d = harmonic_decompose(&f);
            prop_assert_eq!(d.reassemble(), f);
            for h in d.parts.values() {
                prop_assert!(h.laplacian().is_zero());
            }
        }

        #[test]
        fn sphere_average_kills_brackets(f in poly3(5), g in poly3(5)) {
            let a = lie::su2();
            prop_assert!(sphere_average(&poisson_bracket(&a, &f, &g), &Radius2::Symbolic).unwrap().is_zero());
        }
    }
}
