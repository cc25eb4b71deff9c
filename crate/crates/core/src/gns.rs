//! GNS representation of the orbit trace on orbit functions.
//!
//! Every identity here is exact modulo λ^{L+1}, where L is the orbit's
//! truncation order; truncation is compatible with all products involved.

use crate::check::IdentityCheck;
use crate::error::{Error, Result};
use crate::orbit::{Orbit, OrbitFn, SymPoly};
use crate::poisson::poisson_bracket;
use crate::poly::Multi;
use crate::scalar::{LambdaPoly, Ring, Sym};

pub const DEFAULT_BUDGET: u32 = 6;

pub struct Gns<'a> {
    orbit: &'a Orbit,
    budget: u32,
}

impl<'a> Gns<'a> {
    pub fn new(orbit: &'a Orbit, budget: u32) -> Self {
        Self { orbit, budget }
    }
    pub fn orbit(&self) -> &Orbit {
        self.orbit
    }
    pub fn budget(&self) -> u32 {
        self.budget
    }

    fn check_budget(&self, a: u32, b: u32) -> Result<()> {
        if a + b > self.budget {
            return Err(Error::DegreeBudgetExceeded { needed: (a + b) as usize, budget: self.budget as usize });
        }
        Ok(())
    }

    /// ⟨φ, χ⟩ = tr_O(conj φ ⋆_O χ)
    pub fn inner(&self, phi: &OrbitFn, chi: &OrbitFn) -> LambdaPoly<Sym> {
        let p = self.orbit.star_orbit(&phi.conj(), chi);
        self.orbit.trace_orbit(&p).expect("orbit is three-dimensional")
    }

    /// π_O(f)φ = ι*_def(f ⋆ prol φ)
    pub fn pi(&self, f: &SymPoly, phi: &OrbitFn) -> Result<OrbitFn> {
        self.check_budget(f.degree(), phi.rep.degree())?;
        Ok(self.orbit.deformed_restrict(&self.orbit.star(f, &self.orbit.prolong(phi))))
    }

    /// Left ⋆_O-multiplication by ι*_def f; agrees with `pi`.
    pub fn pi_via_left(&self, f: &SymPoly, phi: &OrbitFn) -> Result<OrbitFn> {
        self.check_budget(f.degree(), phi.rep.degree())?;
        Ok(self.orbit.star_orbit(&self.orbit.deformed_restrict(f), phi))
    }

    pub fn left(&self, a: &OrbitFn, phi: &OrbitFn) -> Result<OrbitFn> {
        self.check_budget(a.rep.degree(), phi.rep.degree())?;
        Ok(self.orbit.star_orbit(a, phi))
    }

    pub fn right(&self, a: &OrbitFn, phi: &OrbitFn) -> Result<OrbitFn> {
        self.check_budget(a.rep.degree(), phi.rep.degree())?;
        Ok(self.orbit.star_orbit(phi, a))
    }

    pub fn modular_conjugation(&self, phi: &OrbitFn) -> OrbitFn {
        phi.conj()
    }

    /// Returns (f in Gel'fand ideal, ideal agrees with ker ι*_def).
    pub fn gelfand_ideal_check(&self, f: &SymPoly) -> (bool, bool) {
        let v = self.orbit.deformed_restrict(f);
        let norm_zero = self.inner(&v, &v).is_zero();
        (norm_zero, norm_zero == v.is_zero())
    }

    /// ℒφ = ι*{x̂, prol φ}: fundamental field of the coadjoint action.
    pub fn lie_derivative(&self, i: usize, phi: &OrbitFn) -> OrbitFn {
        let o = self.orbit;
        o.restrict(&poisson_bracket(o.algebra(), &SymPoly::var(3, i), &o.prolong(phi)))
    }

    fn cut(&self, p: &OrbitFn) -> OrbitFn {
        p.lambda_cut(self.orbit.order())
    }

    fn linear_class(&self, i: usize) -> OrbitFn {
        self.orbit.restrict(&SymPoly::var(3, i))
    }

    fn bracket_class(&self, i: usize, j: usize) -> SymPoly {
        let mut p = SymPoly::zero(3);
        for (k, c) in self.orbit.algebra().bracket_of(i, j) {
            p.add_term(Multi::unit(*k), LambdaPoly::from_rational(c));
        }
        p
    }

    /// J L_{ι*f} J = R_{ι* conj f} and [L_{ι*f}, R_{ι*g}] = 0 on the samples.
    pub fn check_commutant(&self, f: &SymPoly, g: &SymPoly, samples: &[OrbitFn]) -> Result<IdentityCheck> {
        let mut chk = IdentityCheck::new("commutant");
        let o = self.orbit;
        let a = o.deformed_restrict(f);
        let ac = o.deformed_restrict(&f.conj());
        let b = o.deformed_restrict(g);
        for phi in samples {
            let lhs = self.modular_conjugation(&self.left(&a, &self.modular_conjugation(phi))?);
            let rhs = self.right(&ac, phi)?;
            chk.record(self.cut(&lhs) == self.cut(&rhs), || format!("J L J != R on {phi}"));
            let lr = self.left(&a, &self.right(&b, phi)?)?;
            let rl = self.right(&b, &self.left(&a, phi)?)?;
            chk.record(self.cut(&lr) == self.cut(&rl), || format!("[L, R] != 0 on {phi}"));
        }
        Ok(chk)
    }

    /// Relations (i)-(iii) between π_O, right multiplication and ℒ.
    pub fn check_g_relations(&self, x: usize, y: usize, samples: &[OrbitFn]) -> Result<Vec<IdentityCheck>> {
        let o = self.orbit;
        let il = LambdaPoly::<Sym>::nu();
        let (xh, yh) = (SymPoly::var(3, x), SymPoly::var(3, y));
        let xy = self.bracket_class(x, y);
        let (xc, yc) = (self.linear_class(x), self.linear_class(y));
        let xyc = o.restrict(&xy);
        let mut left = IdentityCheck::new("g-left");
        let mut right = IdentityCheck::new("g-right");
        let mut adj = IdentityCheck::new("g-ad");
        for phi in samples {
            let l = self.pi(&xh, &self.pi(&yh, phi)?)?.minus(&self.pi(&yh, &self.pi(&xh, phi)?)?);
            let r = self.pi(&xy, phi)?.scale(&il);
            left.record(self.cut(&l) == self.cut(&r), || format!("(i) fails on {phi}"));

            let l = self.right(&xc, &self.right(&yc, phi)?)?.minus(&self.right(&yc, &self.right(&xc, phi)?)?);
            let r = self.right(&xyc, phi)?.scale(&il.negated());
            right.record(self.cut(&l) == self.cut(&r), || format!("(ii) fails on {phi}"));

            let l = self.pi(&xh, phi)?.minus(&self.right(&xc, phi)?);
            let r = self.lie_derivative(x, phi).scale(&il);
            adj.record(self.cut(&l) == self.cut(&r), || format!("(iii) fails on {phi}"));
        }
        Ok(vec![left, right, adj])
    }

    /// π_O(f ⋆ g) = π_O(f) π_O(g) and ⟨φ, π(f)χ⟩ = ⟨π(conj f)φ, χ⟩.
    pub fn check_representation(&self, pairs: &[(SymPoly, SymPoly)], vectors: &[OrbitFn]) -> Result<Vec<IdentityCheck>> {
        let o = self.orbit;
        let mut hom = IdentityCheck::new("gns-homomorphism");
        let mut star = IdentityCheck::new("gns-star-representation");
        let mut same = IdentityCheck::new("gns-left-multiplication");
        let cutl = |p: &LambdaPoly<Sym>| p.cut(o.order());
        for (f, g) in pairs {
            let fg = o.star(f, g);
            for phi in vectors {
                self.check_budget(f.degree() + g.degree(), phi.rep.degree())?;
                let l = self.pi(&fg, phi)?;
                let r = self.pi(f, &self.pi(g, phi)?)?;
                hom.record(self.cut(&l) == self.cut(&r), || format!("pi(f*g) != pi(f)pi(g) for f={f}, g={g}, phi={phi}"));
                same.record(self.cut(&self.pi(f, phi)?) == self.cut(&self.pi_via_left(f, phi)?), || {
                    format!("pi(f) differs from left multiplication, f={f}")
                });
                for chi in vectors {
                    let a = self.inner(phi, &self.pi(f, chi)?);
                    let b = self.inner(&self.pi(&f.conj(), phi)?, chi);
                    star.record(cutl(&a) == cutl(&b), || format!("<phi, pi(f)chi> != <pi(f*)phi, chi> for f={f}"));
                }
            }
        }
        Ok(vec![hom, star, same])
    }

    /// Hermiticity of ⟨·,·⟩, anti-unitarity of J, cyclicity of the trace,
    /// and infinitesimal unitarity of the rotation action.
    pub fn check_inner_product(&self, vectors: &[OrbitFn]) -> Vec<IdentityCheck> {
        let cutl = |p: &LambdaPoly<Sym>| p.cut(self.orbit.order());
        let mut herm = IdentityCheck::new("gns-hermitian");
        let mut anti = IdentityCheck::new("modular-antiunitary");
        let mut cyc = IdentityCheck::new("modular-trivial");
        let mut unit = IdentityCheck::new("g-unitary");
        for phi in vectors {
            for chi in vectors {
                let a = self.inner(phi, chi);
                herm.record(cutl(&a.conj()) == cutl(&self.inner(chi, phi)), || format!("<{phi},{chi}>"));
                let jj = self.inner(&self.modular_conjugation(phi), &self.modular_conjugation(chi));
                anti.record(cutl(&jj) == cutl(&self.inner(chi, phi)), || format!("<J{phi},J{chi}>"));
                let o = self.orbit;
                let t1 = o.trace_orbit(&o.star_orbit(phi, chi)).unwrap();
                let t2 = o.trace_orbit(&o.star_orbit(chi, phi)).unwrap();
                cyc.record(cutl(&t1) == cutl(&t2), || format!("tr({phi} * {chi}) != tr({chi} * {phi})"));
                for i in 0..3 {
                    let s = self.inner(&self.lie_derivative(i, phi), chi).plus(&self.inner(phi, &self.lie_derivative(i, chi)));
                    unit.record(cutl(&s).is_zero(), || format!("L_{} not skew on ({phi},{chi})", i + 1));
                }
            }
        }
        vec![herm, anti, cyc, unit]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::Radius2;
    use crate::scalar::rat;

    fn orbit() -> Orbit {
        Orbit::su2(Radius2::Symbolic, 4)
    }

    #[test]
    fn inner_examples() {
        let o = orbit();
        let g = Gns::new(&o, DEFAULT_BUDGET);
        assert_eq!(g.inner(&OrbitFn::one(), &OrbitFn::one()), LambdaPoly::one());
        let (x1, x2) = (o.restrict(&SymPoly::var(3, 0)), o.restrict(&SymPoly::var(3, 1)));
        assert!(g.inner(&x1, &x2).coeff(0).is_zero());
        assert_eq!(g.inner(&x1, &x1).coeff(0), Radius2::Symbolic.pow(1).scale(&rat(1, 3)));
    }

    #[test]
    fn pi_examples() {
        let o = orbit();
        let g = Gns::new(&o, DEFAULT_BUDGET);
        let phi = o.restrict(&SymPoly::var(3, 2).times(&SymPoly::var(3, 0)));
        assert_eq!(g.pi(&SymPoly::one(3), &phi).unwrap(), phi);
        assert!(g.pi(o.casimir(), &phi).unwrap().is_zero());
        let x1 = SymPoly::var(3, 0);
        assert_eq!(g.pi(&x1, &OrbitFn::one()).unwrap(), o.deformed_restrict(&x1));
        let big = SymPoly::var(3, 0).pow(5);
        assert!(matches!(g.pi(&big, &phi), Err(Error::DegreeBudgetExceeded { .. })));
    }

    #[test]
    fn gelfand_examples() {
        let o = orbit();
        let g = Gns::new(&o, DEFAULT_BUDGET);
        let jg = o.star(o.casimir(), &SymPoly::var(3, 1));
        assert_eq!(g.gelfand_ideal_check(&jg), (true, true));
        assert_eq!(g.gelfand_ideal_check(&SymPoly::one(3)), (false, true));
        assert_eq!(g.gelfand_ideal_check(&SymPoly::var(3, 0)), (false, true));
    }

    #[test]
    fn modular_examples() {
        let o = orbit();
        let g = Gns::new(&o, DEFAULT_BUDGET);
        assert_eq!(g.modular_conjugation(&OrbitFn::one()), OrbitFn::one());
        let phi = o.restrict(&SymPoly::var(3, 0));
        let il = LambdaPoly::<Sym>::nu();
        assert_eq!(g.modular_conjugation(&phi.scale(&il)), g.modular_conjugation(&phi).scale(&il.negated()));
        assert_eq!(g.modular_conjugation(&g.modular_conjugation(&phi)), phi);
    }

    #[test]
    fn relation_examples() {
        let o = orbit();
        let g = Gns::new(&o, DEFAULT_BUDGET);
        let x3 = o.restrict(&SymPoly::var(3, 2));
        for c in g.check_g_relations(0, 1, std::slice::from_ref(&x3)).unwrap() {
            assert!(c.passed, "{c:?}");
        }
        for c in g.check_g_relations(0, 0, &[x3]).unwrap() {
            assert!(c.passed, "{c:?}");
        }
        let x1 = o.restrict(&SymPoly::var(3, 0));
        assert_eq!(g.lie_derivative(2, &x1), o.restrict(&SymPoly::var(3, 1)));
        let c = g.check_commutant(&SymPoly::var(3, 0), &SymPoly::var(3, 1), &[o.restrict(&SymPoly::var(3, 2)), OrbitFn::one()]).unwrap();
        assert!(c.passed, "{c:?}");
    }
}
