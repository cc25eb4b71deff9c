//! Reduction of the BCH product on su(2)* to the sphere |ξ|² = r².
//!
//! Functions on the orbit are stored by their harmonic representative.
//! The homotopy is polynomial division by J = |ξ|² − r², which is exact on
//! polynomials and commutes with rotations.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::check::IdentityCheck;
use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::poisson::{harmonic_decompose, poisson_bracket, radial, sphere_average, Radius2};
use crate::poly::{Multi, PolyG};
use crate::scalar::{GaussianRational, LambdaPoly, Ring, SeriesSign, Sym};
use crate::star::{star_mul_upto, Bch};

pub type SymPoly = PolyG<Sym>;

pub const DEFAULT_ORDER: u32 = 6;

/// A function on the orbit, by its harmonic representative.
#[derive(Clone, PartialEq, Serialize)]
pub struct OrbitFn {
    pub rep: SymPoly,
}

impl OrbitFn {
    pub fn zero() -> Self {
        Self { rep: SymPoly::zero(3) }
    }
    pub fn one() -> Self {
        Self { rep: SymPoly::one(3) }
    }
    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }
    pub fn plus(&self, o: &Self) -> Self {
        Self { rep: self.rep.plus(&o.rep) }
    }
    pub fn minus(&self, o: &Self) -> Self {
        Self { rep: self.rep.minus(&o.rep) }
    }
    pub fn scale(&self, c: &LambdaPoly<Sym>) -> Self {
        Self { rep: self.rep.map_coeffs(|x| x.times(c)) }
    }
    pub fn conj(&self) -> Self {
        Self { rep: self.rep.conj() }
    }
    pub fn lambda_cut(&self, order: u32) -> Self {
        Self { rep: self.rep.lambda_cut(order) }
    }
    pub fn is_harmonic(&self) -> bool {
        self.rep.laplacian().is_zero()
    }
}

impl fmt::Debug for OrbitFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

impl fmt::Display for OrbitFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rep)
    }
}

/// Element of Λ^l(𝔱) ⊗ Pol for one constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct KoszulChain {
    pub degree: u8,
    pub payload: SymPoly,
}

/// Orbit data: the su(2) BCH product, the radius and the λ-truncation.
pub struct Orbit {
    bch: Arc<Bch>,
    r2: Radius2,
    order: u32,
    j: SymPoly,
}

impl Orbit {
    pub fn new(bch: Arc<Bch>, r2: Radius2, order: u32) -> Result<Self> {
        let alg = bch.algebra();
        if alg.dim() != 3 {
            return Err(Error::WrongDimension { expected: 3, got: alg.dim() });
        }
        let j = casimir_j(&r2);
        for i in 0..3 {
            if !poisson_bracket(alg, &SymPoly::var(3, i), &j).is_zero() {
                return Err(Error::InvalidAlgebra(format!("|ξ|² is not a Casimir of {}", alg.name())));
            }
        }
        Ok(Self { bch, r2, order, j })
    }
    pub fn su2(r2: Radius2, order: u32) -> Self {
        Self::new(Arc::new(Bch::new(Arc::new(crate::lie::su2()))), r2, order).expect("su2 orbit")
    }
    pub fn bch(&self) -> &Bch {
        &self.bch
    }
    pub fn algebra(&self) -> &LieAlgebra {
        self.bch.algebra()
    }
    pub fn r2(&self) -> &Radius2 {
        &self.r2
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn casimir(&self) -> &SymPoly {
        &self.j
    }

    /// ⋆_BCH truncated at λ^order.
    pub fn star(&self, f: &SymPoly, g: &SymPoly) -> SymPoly {
        star_mul_upto(&*self.bch, f, g, Some(self.order))
    }

    fn r2_pow(&self, k: u32) -> LambdaPoly<Sym> {
        LambdaPoly::constant(self.r2.pow(k))
    }

    /// ι*: u ↦ r² in the harmonic decomposition.
    pub fn restrict(&self, f: &SymPoly) -> OrbitFn {
        let d = harmonic_decompose(f);
        let mut rep = SymPoly::zero(3);
        for ((m, _), h) in &d.parts {
            rep.add_assign(&h.map_coeffs(|c| c.times(&self.r2_pow(*m))));
        }
        OrbitFn { rep }
    }

    pub fn prolong(&self, phi: &OrbitFn) -> SymPoly {
        phi.rep.clone()
    }

    /// q with f − prol(ι* f) = J q, using u^m − r^{2m} = J Σ_{i<m} u^i r^{2(m−1−i)}.
    pub fn h0(&self, f: &SymPoly) -> SymPoly {
        let d = harmonic_decompose(f);
        let u = radial::<LambdaPoly<Sym>>(3);
        let mut out = SymPoly::zero(3);
        for ((m, _), h) in &d.parts {
            if *m == 0 {
                continue;
            }
            let mut factor = SymPoly::zero(3);
            for i in 0..*m {
                factor.add_assign(&u.pow(i).map_coeffs(|c| c.times(&self.r2_pow(m - 1 - i))));
            }
            out.add_assign(&factor.times(h));
        }
        out
    }

    /// ∂ on chains: l = 1 ↦ J·q, l = 0 ↦ ι*.
    pub fn koszul_boundary(&self, c: &KoszulChain) -> std::result::Result<KoszulChain, OrbitFn> {
        match c.degree {
            1 => Ok(KoszulChain { degree: 0, payload: self.j.times(&c.payload) }),
            _ => Err(self.restrict(&c.payload)),
        }
    }

    /// Deformed boundary q ↦ q ⋆ J.
    pub fn deformed_boundary(&self, q: &SymPoly) -> SymPoly {
        self.star(q, &self.j)
    }

    /// A(q) = J q − q ⋆ J, of order λ².
    pub fn a_op(&self, q: &SymPoly) -> SymPoly {
        self.j.times(q).lambda_cut(self.order).minus(&self.deformed_boundary(q))
    }

    /// Σ_m (A h₀)^m f, truncated at λ^order.
    pub fn resolvent(&self, f: &SymPoly) -> SymPoly {
        let mut acc = f.lambda_cut(self.order);
        let mut term = acc.clone();
        loop {
            term = self.a_op(&self.h0(&term));
            if term.is_zero() {
                break;
            }
            acc.add_assign(&term);
        }
        acc
    }

    /// ι*_def = ι* ∘ (id − A h₀)⁻¹
    pub fn deformed_restrict(&self, f: &SymPoly) -> OrbitFn {
        self.restrict(&self.resolvent(f))
    }

    /// φ ⋆_O ψ
    pub fn star_orbit(&self, phi: &OrbitFn, psi: &OrbitFn) -> OrbitFn {
        self.deformed_restrict(&self.star(&self.prolong(phi), &self.prolong(psi)))
    }

    /// τ_O = sphere average of the deformed restriction.
    pub fn positive_trace(&self, f: &SymPoly) -> Result<LambdaPoly<Sym>> {
        sphere_average(&self.deformed_restrict(f).rep, &self.r2)
    }

    pub fn trace_orbit(&self, phi: &OrbitFn) -> Result<LambdaPoly<Sym>> {
        sphere_average(&phi.rep, &self.r2)
    }

    /// Orbit Poisson bracket ι*{prol φ, prol ψ}.
    pub fn orbit_poisson(&self, phi: &OrbitFn, psi: &OrbitFn) -> OrbitFn {
        self.restrict(&poisson_bracket(self.algebra(), &self.prolong(phi), &self.prolong(psi)))
    }

    /// Infinitesimal rotation f ↦ {ξ_i, f}.
    pub fn rotate(&self, i: usize, f: &SymPoly) -> SymPoly {
        poisson_bracket(self.algebra(), &SymPoly::var(3, i), f)
    }

    pub fn class_of(&self, f: &SymPoly) -> OrbitFn {
        self.restrict(f)
    }

    /// Harmonic monomial classes of degree ≤ d, a spanning set of orbit
    /// functions at that degree.
    pub fn harmonic_basis(&self, d: u32) -> Vec<OrbitFn> {
        let mut out: Vec<OrbitFn> = Vec::new();
        for k in 0..=d {
            for m in Multi::all_of_degree(3, k) {
                let phi = self.restrict(&SymPoly::monomial(3, m, LambdaPoly::one()));
                let h = OrbitFn { rep: phi.rep.homogeneous_part(k) };
                if !h.is_zero() && !out.contains(&h) {
                    out.push(h);
                }
            }
        }
        out
    }
}

impl Orbit {
    /// Undeformed and deformed Koszul identities on the samples:
    /// prol∘ι* + ∂₁h₀ = id, h₀∂₁ = id, h₀∘prol = 0, ι*∘prol = id,
    /// ι*_def(q ⋆ J) = 0 and ι*_def∘prol = id.
    pub fn check_koszul(&self, fs: &[SymPoly], qs: &[SymPoly]) -> Vec<IdentityCheck> {
        let mut homotopy = IdentityCheck::new("koszul-homotopy");
        let mut h0_boundary = IdentityCheck::new("koszul-h0-boundary");
        let mut iprol = IdentityCheck::new("koszul-restrict-prolong");
        let mut def_boundary = IdentityCheck::new("koszul-deformed-boundary");
        let mut def_prol = IdentityCheck::new("koszul-deformed-prolong");
        let mut equiv = IdentityCheck::new("koszul-equivariance");
        for f in fs {
            let back = self.prolong(&self.restrict(f)).plus(&self.j.times(&self.h0(f)));
            homotopy.record(back == *f, || format!("f = {f}: prol ι* f + J h0 f = {back}"));
            let phi = self.restrict(f);
            iprol.record(self.restrict(&self.prolong(&phi)) == phi && self.h0(&self.prolong(&phi)).is_zero(), || {
                format!("class {phi}")
            });
            def_prol.record(self.deformed_restrict(&self.prolong(&phi)) == phi.lambda_cut(self.order), || {
                format!("ι*_def prol ≠ id on {phi}")
            });
            for i in 0..3 {
                let r = self.restrict(&self.rotate(i, f)).rep == self.rotate(i, &self.restrict(f).rep);
                let h = self.h0(&self.rotate(i, f)) == self.rotate(i, &self.h0(f));
                let d = self.deformed_restrict(&self.rotate(i, f)).rep == self.rotate(i, &self.deformed_restrict(f).rep);
                equiv.record(r && h && d, || format!("rotation {i} on {f}"));
            }
        }
        for q in qs {
            let hq = self.h0(&self.j.times(q));
            h0_boundary.record(hq == *q, || format!("h0(J·{q}) = {hq}"));
            let d = self.deformed_restrict(&self.deformed_boundary(q));
            def_boundary.record(d.is_zero(), || format!("ι*_def({q} ⋆ J) = {d}"));
        }
        vec![homotopy, h0_boundary, iprol, def_boundary, def_prol, equiv]
    }

    /// Associativity, Hermitian property, first-order bracket and
    /// independence of preimages for ⋆_O.
    pub fn check_star_orbit(
        &self,
        triples: &[(OrbitFn, OrbitFn, OrbitFn)],
        shifts: &[SymPoly],
    ) -> Vec<IdentityCheck> {
        let mut assoc = IdentityCheck::new("orbit-assoc");
        let mut herm = IdentityCheck::new("orbit-hermitian");
        let mut bracket = IdentityCheck::new("orbit-bracket");
        let mut preimage = IdentityCheck::new("orbit-preimage");
        let i = LambdaPoly::constant(Sym::constant(GaussianRational::i()));
        for (k, (a, b, c)) in triples.iter().enumerate() {
            let d = self.star_orbit(&self.star_orbit(a, b), c).minus(&self.star_orbit(a, &self.star_orbit(b, c)));
            assoc.record(d.is_zero(), || format!("({a}, {b}, {c}) ↦ {d}"));
            let d = self.star_orbit(a, b).conj().minus(&self.star_orbit(&b.conj(), &a.conj()));
            herm.record(d.is_zero(), || format!("({a}, {b}) ↦ {d}"));
            let comm = self.star_orbit(a, b).minus(&self.star_orbit(b, a));
            let first = OrbitFn { rep: SymPoly::lift(&comm.rep.lambda_coeff(1)) };
            let want = self.orbit_poisson(a, b).scale(&i);
            bracket.record(first == want, || format!("({a}, {b}): λ¹ of commutator {first}, expected {want}"));
            if let Some(q) = shifts.get(k % shifts.len().max(1)) {
                let fa = self.prolong(a).plus(&self.star(q, &self.j));
                let fb = self.prolong(b).plus(&self.star(&self.j, q));
                let got = self.deformed_restrict(&self.star(&fa, &fb));
                let want = self.star_orbit(a, b);
                preimage.record(got == want, || format!("({a}, {b}) shifted by {q}: {got} vs {want}"));
            }
        }
        vec![assoc, herm, bracket, preimage]
    }

    /// τ_O on ⋆-commutators, and the sign of τ_O(conj f ⋆ f).
    pub fn check_trace(&self, pairs: &[(SymPoly, SymPoly)], family: &[SymPoly]) -> Result<Vec<IdentityCheck>> {
        let mut trace = IdentityCheck::new("orbit-trace");
        let mut pos = IdentityCheck::new("orbit-positivity");
        for (f, g) in pairs {
            let t = self.positive_trace(&self.star(f, g).minus(&self.star(g, f)))?;
            trace.record(t.is_zero(), || format!("τ_O[{f}, {g}] = {t}"));
        }
        for f in family {
            let t = self.positive_trace(&self.star(&f.conj(), f))?;
            let ok = matches!(t.series_sign(), SeriesSign::Positive | SeriesSign::Zero);
            pos.record(ok, || format!("τ_O(conj f ⋆ f) = {t} for f = {f}"));
        }
        Ok(vec![trace, pos])
    }
}

/// J = ξ₁² + ξ₂² + ξ₃² − r²
pub fn casimir_j(r2: &Radius2) -> SymPoly {
    radial::<LambdaPoly<Sym>>(3).minus(&SymPoly::from_scalar(3, r2.as_sym()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::star::star_commutator;
    use proptest::prelude::*;

    fn orbit() -> Orbit {
        Orbit::su2(Radius2::Symbolic, 6)
    }
    fn mono(e: &[u32]) -> SymPoly {
        SymPoly::monomial(3, Multi::from_slice(e), LambdaPoly::one())
    }
    fn r2c(k: u32) -> LambdaPoly<Sym> {
        LambdaPoly::constant(Radius2::Symbolic.pow(k))
    }

    #[test]
    fn casimir_is_central() {
        let o = orbit();
        let j = o.casimir().clone();
        for i in 0..3 {
            assert!(star_commutator(o.bch(), &j, &SymPoly::var(3, i)).is_zero());
        }
        for m in Multi::all_up_to_degree(3, 4) {
            assert!(poisson_bracket(o.algebra(), &j, &SymPoly::monomial(3, m, LambdaPoly::one())).is_zero());
        }
        assert!(o.restrict(&j).is_zero());
    }

    #[test]
    fn restrict_and_prolong_examples() {
        let o = orbit();
        let u = radial::<LambdaPoly<Sym>>(3);
        assert_eq!(o.restrict(&u).rep, SymPoly::constant(3, r2c(1)));
        let x11 = o.restrict(&mono(&[2, 0, 0]));
        let want = mono(&[2, 0, 0]).minus(&u.scale_q(&rat(1, 3))).plus(&SymPoly::constant(3, r2c(1).scale(&rat(1, 3))));
        assert_eq!(o.prolong(&x11), want);
        assert_eq!(o.prolong(&o.restrict(&mono(&[1, 1, 0]))), mono(&[1, 1, 0]));
        assert_eq!(o.prolong(&OrbitFn::one()), SymPoly::one(3));
    }

    #[test]
    fn homotopy_examples() {
        let o = orbit();
        assert_eq!(o.h0(o.casimir()), SymPoly::one(3));
        let h = mono(&[1, 1, 0]);
        let u = radial::<LambdaPoly<Sym>>(3);
        assert_eq!(o.h0(&u.times(&h)), h);
        assert!(o.h0(&h).is_zero());
    }

    #[test]
    fn deformed_restrict_examples() {
        let o = orbit();
        assert_eq!(o.deformed_restrict(&SymPoly::one(3)), OrbitFn::one());
        let g = mono(&[1, 0, 1]);
        assert!(o.deformed_restrict(&o.star(o.casimir(), &g)).is_zero());
        assert_eq!(o.deformed_restrict(&SymPoly::var(3, 0)), o.restrict(&SymPoly::var(3, 0)));
    }

    #[test]
    fn star_orbit_examples() {
        let o = orbit();
        let phi = o.restrict(&mono(&[2, 1, 0]));
        assert_eq!(o.star_orbit(&OrbitFn::one(), &phi), phi);
        let (x1, x2) = (o.restrict(&SymPoly::var(3, 0)), o.restrict(&SymPoly::var(3, 1)));
        let got = o.star_orbit(&x1, &x2);
        let nu_half = LambdaPoly::<Sym>::nu().scale(&rat(1, 2));
        let low = o.restrict(&mono(&[1, 1, 0])).plus(&o.restrict(&SymPoly::var(3, 2)).scale(&nu_half));
        assert_eq!(got.lambda_cut(1), low);
    }

    #[test]
    fn positive_trace_examples() {
        let o = orbit();
        assert_eq!(o.positive_trace(&SymPoly::one(3)).unwrap(), LambdaPoly::one());
        let g = o.casimir().times(&SymPoly::var(3, 0));
        let f = o.star(&g.conj(), &g);
        let t = o.positive_trace(&f).unwrap();
        assert_eq!(t.coeff(0), Sym::zero());
        assert_eq!(t.series_sign(), SeriesSign::Positive, "{t}");
    }

    #[test]
    fn identity_checks_pass() {
        let o = Orbit::su2(Radius2::Symbolic, 4);
        let fs = vec![mono(&[2, 1, 0]), mono(&[1, 1, 1]).plus(&mono(&[0, 0, 2]))];
        for c in o.check_koszul(&fs, &[mono(&[1, 0, 0])]) {
            assert!(c.passed, "{c:?}");
        }
        let (a, b) = (o.restrict(&mono(&[1, 0, 0])), o.restrict(&mono(&[0, 1, 1])));
        for c in o.check_star_orbit(&[(a.clone(), b.clone(), a.clone())], &[mono(&[0, 1, 0])]) {
            assert!(c.passed, "{c:?}");
        }
        let g = o.casimir().times(&mono(&[1, 0, 0]));
        for c in o.check_trace(&[(mono(&[1, 1, 0]), mono(&[0, 1, 2]))], &[g, mono(&[0, 1, 0])]).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    fn sym_poly(deg: u32) -> impl Strategy<Value = SymPoly> {
        prop::collection::vec((0u32..=deg, 0u32..=deg, 0u32..=deg, -3i64..=3), 1..4).prop_map(move |ts| {
            let mut p = SymPoly::zero(3);
            for (a, b, c, k) in ts {
                let a = a.min(deg);
                let b = b.min(deg - a);
                let c = c.min(deg - a - b);
                p.add_term(Multi::from_slice(&[a, b, c]), LambdaPoly::constant(Sym::constant(GaussianRational::from(crate::scalar::int(k)))));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn homotopy_identities(f in sym_poly(6), q in sym_poly(4)) {
            let o = orbit();
            prop_assert_eq!(o.prolong(&o.restrict(&f)).plus(&o.casimir().times(&o.h0(&f))), f.clone());
            prop_assert_eq!(o.h0(&o.casimir().times(&q)), q);
            prop_assert!(o.h0(&o.prolong(&o.restrict(&f))).is_zero());
        }

        #[test]
        fn restrict_is_equivariant(f in sym_poly(5), i in 0usize..3) {
            let o = orbit();
            prop_assert_eq!(o.restrict(&o.rotate(i, &f)).rep, o.rotate(i, &o.restrict(&f).rep));
            prop_assert_eq!(o.h0(&o.rotate(i, &f)), o.rotate(i, &o.h0(&f)));
        }
    }
}
