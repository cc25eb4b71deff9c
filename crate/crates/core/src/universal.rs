//! Invariant products on a group, the products and traces they induce on a
//! space the group acts on, and two instances: translations of ℝ²ⁿ with the
//! Moyal product, and the two-dimensional ax+b group with the product
//! obtained by conjugating Moyal with the operator T.
//!
//! Generic group elements and points are formal symbols (`Unit::Var`,
//! `Unit::ExpVar`), so every invariance statement becomes an identity between
//! exact expressions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::check::IdentityCheck;
use crate::error::{Error, Result};
use crate::poly::{Multi, PolyG};
use crate::scalar::{
    binomial, double_factorial_odd, factorial, fmt_rational, int, rat, GaussianRational, LambdaPoly, Rational, Ring,
    Scalar, SeriesSign, Sym, Unit,
};
use crate::star::{star_mul_upto, Moyal, Pointwise, StarProduct};

type Coeff = LambdaPoly<Sym>;

// ---------------------------------------------------------------------------
// Group and action models

/// Power of e^{−a′} scaling the ℓ-slot of the ax+b law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxbLaw {
    /// (a + a′, e^{−2a′}ℓ + ℓ′)
    #[default]
    Squared,
    /// (a + a′, e^{−a′}ℓ + ℓ′)
    Linear,
}

impl AxbLaw {
    pub fn k(self) -> i32 {
        match self {
            AxbLaw::Squared => 2,
            AxbLaw::Linear => 1,
        }
    }
}

/// Coordinates of a group element as symbolic expressions. An ax+b element
/// is stored as (a, ℓ, e^{a}, e^{−a}) so that the law stays polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElem(pub Vec<Sym>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupModel {
    Translations { dim: usize },
    Axb(AxbLaw),
}

impl GroupModel {
    pub fn name(&self) -> String {
        match self {
            GroupModel::Translations { dim } => format!("translations[{dim}]"),
            GroupModel::Axb(law) => format!("axb[k={}]", law.k()),
        }
    }
    pub fn coordinate_count(&self) -> usize {
        match self {
            GroupModel::Translations { dim } => *dim,
            GroupModel::Axb(_) => 2,
        }
    }
    pub fn identity(&self) -> GroupElem {
        match self {
            GroupModel::Translations { dim } => GroupElem(vec![Sym::zero(); *dim]),
            GroupModel::Axb(_) => GroupElem(vec![Sym::zero(), Sym::zero(), Sym::one(), Sym::one()]),
        }
    }
    /// A generic element; different slots use disjoint symbols. Slot 0 of
    /// ax+b is (a′, ℓ′, E, E⁻¹).
    pub fn generic(&self, slot: u8) -> GroupElem {
        match self {
            GroupModel::Translations { dim } => {
                GroupElem((0..*dim).map(|i| Sym::var(slot * (*dim as u8) + i as u8)).collect())
            }
            GroupModel::Axb(_) => GroupElem(vec![
                Sym::var(2 * slot),
                Sym::var(2 * slot + 1),
                Sym::exp_var(slot, 1),
                Sym::exp_var(slot, -1),
            ]),
        }
    }
    pub fn mul(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        match self {
            GroupModel::Translations { .. } => GroupElem(g.0.iter().zip(&h.0).map(|(x, y)| x.plus(y)).collect()),
            GroupModel::Axb(law) => {
                let (a, l, e, ei) = (&g.0[0], &g.0[1], &g.0[2], &g.0[3]);
                let (a2, l2, e2, ei2) = (&h.0[0], &h.0[1], &h.0[2], &h.0[3]);
                GroupElem(vec![
                    a.plus(a2),
                    ei2.pow(law.k() as u32).times(l).plus(l2),
                    e.times(e2),
                    ei.times(ei2),
                ])
            }
        }
    }
    pub fn inverse(&self, g: &GroupElem) -> GroupElem {
        match self {
            GroupModel::Translations { .. } => GroupElem(g.0.iter().map(|x| x.negated()).collect()),
            GroupModel::Axb(law) => {
                let (a, l, e, ei) = (&g.0[0], &g.0[1], &g.0[2], &g.0[3]);
                GroupElem(vec![a.negated(), e.pow(law.k() as u32).times(l).negated(), ei.clone(), e.clone()])
            }
        }
    }
    /// Associativity, two-sided identity and two-sided inverse at generic
    /// elements.
    pub fn check_axioms(&self) -> IdentityCheck {
        let mut c = IdentityCheck::new(format!("group-axioms[{}]", self.name()));
        let (g, h, k) = (self.generic(0), self.generic(1), self.generic(2));
        let e = self.identity();
        let lhs = self.mul(&self.mul(&g, &h), &k);
        let rhs = self.mul(&g, &self.mul(&h, &k));
        c.record(lhs == rhs, || format!("(gh)k = {lhs:?}, g(hk) = {rhs:?}"));
        c.record(self.mul(&e, &g) == g, || "e·g ≠ g".into());
        c.record(self.mul(&g, &e) == g, || "g·e ≠ g".into());
        let gi = self.inverse(&g);
        c.record(self.mul(&g, &gi) == e, || "g·g⁻¹ ≠ e".into());
        c.record(self.mul(&gi, &g) == e, || "g⁻¹·g ≠ e".into());
        c
    }
}

/// A left action τ of a group on a coordinate space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionModel {
    /// ℝ²ⁿ acting on ℝ²ⁿ × ℝˢ by shifting the first 2n coordinates.
    Translations { pairs: usize, spectators: usize },
    /// ax+b acting on itself by left multiplication.
    AxbOnItself(AxbLaw),
}

impl ActionModel {
    pub fn group(&self) -> GroupModel {
        match self {
            ActionModel::Translations { pairs, .. } => GroupModel::Translations { dim: 2 * pairs },
            ActionModel::AxbOnItself(law) => GroupModel::Axb(*law),
        }
    }
    pub fn name(&self) -> String {
        match self {
            ActionModel::Translations { pairs, spectators } => format!("translations[{pairs}+{spectators}]"),
            ActionModel::AxbOnItself(law) => format!("axb-left[k={}]", law.k()),
        }
    }
    /// Whether bi-invariance of the product is available for the trace argument.
    pub fn bi_invariant(&self) -> bool {
        matches!(self, ActionModel::Translations { .. })
    }
    /// A generic point, in symbols disjoint from group slots 0..=2.
    pub fn generic_point(&self) -> Vec<Sym> {
        match self {
            ActionModel::Translations { pairs, spectators } => {
                (0..2 * pairs + spectators).map(|i| Sym::var(100 + i as u8)).collect()
            }
            ActionModel::AxbOnItself(_) => self.group().generic(3).0,
        }
    }
    pub fn act(&self, g: &GroupElem, x: &[Sym]) -> Vec<Sym> {
        match self {
            ActionModel::Translations { pairs, .. } => {
                x.iter().enumerate().map(|(i, xi)| if i < 2 * pairs { xi.plus(&g.0[i]) } else { xi.clone() }).collect()
            }
            ActionModel::AxbOnItself(_) => self.group().mul(g, &GroupElem(x.to_vec())).0,
        }
    }
    /// τ(e, x) = x and τ(g, τ(h, x)) = τ(gh, x).
    pub fn check_axioms(&self) -> IdentityCheck {
        let grp = self.group();
        let mut c = IdentityCheck::new(format!("action-axioms[{}]", self.name()));
        let x = self.generic_point();
        let (g, h) = (grp.generic(0), grp.generic(1));
        c.record(self.act(&grp.identity(), &x) == x, || "τ(e,x) ≠ x".into());
        let lhs = self.act(&g, &self.act(&h, &x));
        let rhs = self.act(&grp.mul(&g, &h), &x);
        c.record(lhs == rhs, || format!("τ(g,τ(h,x)) = {lhs:?}, τ(gh,x) = {rhs:?}"));
        c
    }
}

// ---------------------------------------------------------------------------
// Generic Moyal expansion

/// Something the Moyal bidifferential operator can differentiate.
trait Phase: Clone {
    fn d(&self, v: usize) -> Self;
    fn vanishes(&self) -> bool;
}

fn derive<A: Phase>(memo: &mut HashMap<Multi, A>, m: &Multi) -> A {
    if let Some(x) = memo.get(m) {
        return x.clone();
    }
    let v = m.first_var().expect("zero index is seeded");
    let out = derive(memo, &m.dec(v).unwrap()).d(v);
    memo.insert(*m, out.clone());
    out
}

/// Feeds `emit(r, c, ∂_q^α∂_p^β f, ∂_p^α∂_q^β g)` for every term of
/// Σ (λ/2i)^r (−1)^{|β|}/(α!β!) ∂_q^α∂_p^β f · ∂_p^α∂_q^β g, r = |α|+|β|.
/// Stops after `max`, or once every term of some order vanishes.
fn weyl_expand<A: Phase, B: Phase>(
    f: &A,
    g: &B,
    pairs: usize,
    max: Option<u32>,
    mut emit: impl FnMut(u32, &GaussianRational, &A, &B),
) {
    let mut da = HashMap::new();
    let mut db = HashMap::new();
    da.insert(Multi::zero(), f.clone());
    db.insert(Multi::zero(), g.clone());
    let half_over_i = GaussianRational::new(int(0), rat(-1, 2));
    let mut r = 0u32;
    while max.is_none_or(|m| r <= m) {
        let pref = half_over_i.pow(r);
        let mut any = false;
        for ga in Multi::all_of_degree(2 * pairs, r) {
            let a = derive(&mut da, &ga);
            if a.vanishes() {
                continue;
            }
            let mut gb = Multi::zero();
            for k in 0..pairs {
                gb.set(k, ga.get(pairs + k));
                gb.set(pairs + k, ga.get(k));
            }
            let b = derive(&mut db, &gb);
            if b.vanishes() {
                continue;
            }
            any = true;
            let beta: u32 = (0..pairs).map(|k| ga.get(pairs + k)).sum();
            let mut c = pref.scale(&Rational::new(1.into(), ga.factorial()));
            if beta % 2 == 1 {
                c = c.negated();
            }
            emit(r, &c, &a, &b);
        }
        if !any {
            break;
        }
        r += 1;
    }
}

fn gauss_sym(c: &GaussianRational) -> Sym {
    Sym::constant(c.clone())
}

// ---------------------------------------------------------------------------
// Exponential polynomials

/// Finite sum of c·e^{m a} a^i ℓ^j, times e^{−w(a²+ℓ²)/2} when the weight
/// w is nonzero. Coefficients are λ-polynomials over symbolic scalars.
#[derive(Clone, PartialEq)]
pub struct ExpPoly {
    weight: Rational,
    terms: BTreeMap<(i32, u32, u32), Coeff>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { weight: Rational::zero(), terms: BTreeMap::new() }
    }
    pub fn one() -> Self {
        Self::term(0, 0, 0, Coeff::one())
    }
    pub fn term(m: i32, i: u32, j: u32, c: Coeff) -> Self {
        let mut out = Self::zero();
        out.add_term((m, i, j), &c);
        out
    }
    pub fn monomial(m: i32, i: u32, j: u32) -> Self {
        Self::term(m, i, j, Coeff::one())
    }
    pub fn constant(c: Coeff) -> Self {
        Self::term(0, 0, 0, c)
    }
    pub fn sym(s: Sym) -> Self {
        Self::constant(Coeff::constant(s))
    }
    pub fn a() -> Self {
        Self::monomial(0, 1, 0)
    }
    pub fn ell() -> Self {
        Self::monomial(0, 0, 1)
    }
    pub fn exp(m: i32) -> Self {
        Self::monomial(m, 0, 0)
    }
    /// e^{−(a²+ℓ²)/2}
    pub fn gaussian() -> Self {
        Self::one().damped(int(1))
    }
    /// Replaces the damping weight.
    pub fn damped(mut self, w: Rational) -> Self {
        self.weight = w;
        self
    }
    pub fn weight(&self) -> &Rational {
        &self.weight
    }
    pub fn terms(&self) -> impl Iterator<Item = (&(i32, u32, u32), &Coeff)> {
        self.terms.iter()
    }
    pub fn coeff(&self, key: (i32, u32, u32)) -> Coeff {
        self.terms.get(&key).cloned().unwrap_or_else(Coeff::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn ell_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.2).max().unwrap_or(0)
    }
    fn add_term(&mut self, key: (i32, u32, u32), c: &Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                e.add_in(c);
                if e.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }
    /// Sum; a zero summand adopts the other's weight.
    pub fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }
    pub fn add_assign(&mut self, o: &Self) {
        if o.is_zero() {
            return;
        }
        if self.is_zero() {
            self.weight = o.weight.clone();
        }
        assert_eq!(self.weight, o.weight, "sum of different damping weights");
        for (k, c) in &o.terms {
            self.add_term(*k, c);
        }
    }
    pub fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }
    pub fn negated(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }
    pub fn scale_q(&self, q: &Rational) -> Self {
        self.map_coeffs(|c| c.scale(q))
    }
    pub fn scale(&self, s: &Coeff) -> Self {
        self.map_coeffs(|c| c.times(s))
    }
    pub fn scale_gauss(&self, g: &GaussianRational) -> Self {
        let s = gauss_sym(g);
        self.map_coeffs(|c| c.scale_scalar(&s))
    }
    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> Self {
        let mut out = Self { weight: self.weight.clone(), terms: BTreeMap::new() };
        for (k, c) in &self.terms {
            out.add_term(*k, &f(c));
        }
        out
    }
    pub fn conj(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }
    pub fn lambda_cut(&self, order: u32) -> Self {
        self.map_coeffs(|c| c.cut(order))
    }
    /// Multiplies by λ^k.
    pub fn lambda_shift(&self, k: u32) -> Self {
        self.map_coeffs(|c| c.shift(k))
    }
    /// The λ^k coefficient as a λ-free element.
    pub fn lambda_coeff(&self, k: u32) -> Self {
        self.map_coeffs(|c| Coeff::constant(c.coeff(k)))
    }
    pub fn max_lambda_order(&self) -> u32 {
        self.terms.values().filter_map(|c| c.highest_order()).max().unwrap_or(0)
    }
    /// Product, dropping λ-powers above `cut` if given. Weights add.
    pub fn times_upto(&self, o: &Self, cut: Option<u32>) -> Self {
        let mut out = Self { weight: &self.weight + &o.weight, terms: BTreeMap::new() };
        for ((m1, i1, j1), c1) in &self.terms {
            for ((m2, i2, j2), c2) in &o.terms {
                let mut c = c1.times(c2);
                if let Some(l) = cut {
                    c = c.cut(l);
                }
                out.add_term((m1 + m2, i1 + i2, j1 + j2), &c);
            }
        }
        out
    }
    pub fn times(&self, o: &Self) -> Self {
        self.times_upto(o, None)
    }
    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.times(self))
    }
    pub fn partial_a(&self) -> Self {
        let mut out = Self { weight: self.weight.clone(), terms: BTreeMap::new() };
        for (&(m, i, j), c) in &self.terms {
            if m != 0 {
                out.add_term((m, i, j), &c.scale(&int(m as i64)));
            }
            if i > 0 {
                out.add_term((m, i - 1, j), &c.scale(&int(i as i64)));
            }
            if !self.weight.is_zero() {
                out.add_term((m, i + 1, j), &c.scale(&-self.weight.clone()));
            }
        }
        out
    }
    pub fn partial_ell(&self) -> Self {
        let mut out = Self { weight: self.weight.clone(), terms: BTreeMap::new() };
        for (&(m, i, j), c) in &self.terms {
            if j > 0 {
                out.add_term((m, i, j - 1), &c.scale(&int(j as i64)));
            }
            if !self.weight.is_zero() {
                out.add_term((m, i, j + 1), &c.scale(&-self.weight.clone()));
            }
        }
        out
    }
    pub fn partial_ell_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.partial_ell())
    }
    /// f(h·y) for the symbolic element y.
    pub fn right_translate(&self, y: &GroupElem, law: AxbLaw) -> Result<Self> {
        self.require_undamped("right translation")?;
        let (a0, l0, e0, ei0) = (&y.0[0], &y.0[1], &y.0[2], &y.0[3]);
        let new_a = Self::a().plus(&Self::sym(a0.clone()));
        let new_l = Self::ell().scale(&Coeff::constant(ei0.pow(law.k() as u32))).plus(&Self::sym(l0.clone()));
        Ok(self.substitute(e0, ei0, &new_a, &new_l))
    }
    /// f(y·h) for the symbolic element y.
    pub fn left_translate(&self, y: &GroupElem, law: AxbLaw) -> Result<Self> {
        self.require_undamped("left translation")?;
        let (a0, l0, e0, ei0) = (&y.0[0], &y.0[1], &y.0[2], &y.0[3]);
        let new_a = Self::a().plus(&Self::sym(a0.clone()));
        let new_l = Self::exp(-law.k()).scale(&Coeff::constant(l0.clone())).plus(&Self::ell());
        Ok(self.substitute(e0, ei0, &new_a, &new_l))
    }
    fn require_undamped(&self, what: &str) -> Result<()> {
        if self.weight.is_zero() {
            Ok(())
        } else {
            Err(Error::ClassViolation(format!("{what} of a Gaussian-damped function leaves the class")))
        }
    }
    /// e^{ma} ↦ e_shift^m e^{ma}, a ↦ new_a, ℓ ↦ new_l.
    fn substitute(&self, e0: &Sym, ei0: &Sym, new_a: &Self, new_l: &Self) -> Self {
        let mut out = Self::zero();
        for (&(m, i, j), c) in &self.terms {
            let shift = if m >= 0 { e0.pow(m as u32) } else { ei0.pow((-m) as u32) };
            let t = Self::exp(m)
                .times(&new_a.pow(i))
                .times(&new_l.pow(j))
                .scale(&c.scale_scalar(&shift));
            out.add_assign(&t);
        }
        out
    }
}

impl Phase for ExpPoly {
    fn d(&self, v: usize) -> Self {
        if v == 0 {
            self.partial_a()
        } else {
            self.partial_ell()
        }
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(m, i, j), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if m != 0 {
                write!(f, "*exp({m}a)")?;
            }
            match i {
                0 => {}
                1 => write!(f, "*a")?,
                _ => write!(f, "*a^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*l")?,
                _ => write!(f, "*l^{j}")?,
            }
        }
        if !self.weight.is_zero() {
            write!(f, " [*exp(-{}(a^2+l^2)/2)]", fmt_rational(&self.weight))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize)]
struct ExpPolyRepr<'a> {
    #[serde(with = "crate::scalar::rational_serde")]
    weight: &'a Rational,
    terms: Vec<((i32, u32, u32), &'a Coeff)>,
}

impl Serialize for ExpPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExpPolyRepr { weight: &self.weight, terms: self.terms.iter().map(|(k, c)| (*k, c)).collect() }.serialize(s)
    }
}

/// Moyal product on the (a, ℓ) plane with ω = da ∧ dℓ, through λ^order.
pub fn weyl(f: &ExpPoly, g: &ExpPoly, order: u32) -> ExpPoly {
    let mut out = ExpPoly { weight: &f.weight + &g.weight, terms: BTreeMap::new() };
    weyl_expand(f, g, 1, Some(order), |r, c, a, b| {
        let t = a.times_upto(b, Some(order - r)).scale_gauss(c).lambda_shift(r);
        out.add_assign(&t);
    });
    out
}

/// Monomials e^{ma} a^i ℓ^j with |m| ≤ max_m and i + j ≤ max_deg.
pub fn exp_poly_samples(max_m: i32, max_deg: u32) -> Vec<ExpPoly> {
    let mut out = Vec::new();
    for m in -max_m..=max_m {
        for d in 0..=max_deg {
            for i in 0..=d {
                out.push(ExpPoly::monomial(m, i, d - i));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The ax+b instance

/// Sign in the exponent of the equivalence T = Σ_n (1/n!) s(∂_ℓ)ⁿ ∘ ℓⁿ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TSign {
    /// s = −(i/λ)ψ₁((λ/i)∂), read off the Fourier kernel e^{−(i/ħ)ψ₁(p)q}.
    /// On plane waves T e^{iβℓ} = e^{i asinh(λβ)ℓ/λ}/√(1+λ²β²).
    #[default]
    Kernel,
    /// s = +(i/λ)ψ₁((λ/i)∂), the compact exponential taken literally.
    Compact,
}

/// A vector field c_a ∂_a + c_ℓ ∂_ℓ with exponential-polynomial coefficients.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub name: String,
    pub da: ExpPoly,
    pub dl: ExpPoly,
}

impl VectorField {
    pub fn zero() -> Self {
        Self { name: "0".into(), da: ExpPoly::zero(), dl: ExpPoly::zero() }
    }
    pub fn apply(&self, f: &ExpPoly) -> ExpPoly {
        self.da.times(&f.partial_a()).plus(&self.dl.times(&f.partial_ell()))
    }
    pub fn bracket(&self, o: &Self) -> Self {
        Self {
            name: format!("[{},{}]", self.name, o.name),
            da: self.apply(&o.da).minus(&o.apply(&self.da)),
            dl: self.apply(&o.dl).minus(&o.apply(&self.dl)),
        }
    }
}

/// h with T∘X∘T⁻¹ = (1/(iλ))[h, ·]_W on the test set.
#[derive(Clone, Debug)]
pub struct InnerDerivation {
    pub field: String,
    pub order: u32,
    pub h: ExpPoly,
    pub tests: usize,
    pub residual_zero: bool,
}

/// Left and right invariance of a product under group translations.
#[derive(Clone, Debug, Serialize)]
pub struct BiInvarianceReport {
    pub product: String,
    pub left: IdentityCheck,
    pub right: IdentityCheck,
    /// τ*_g-invariance of the induced product, when it applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub induced: Option<IdentityCheck>,
}

#[derive(Clone, Copy, Debug)]
pub struct AxbModel {
    pub law: AxbLaw,
    pub sign: TSign,
    pub order: u32,
}

impl AxbModel {
    pub fn new(order: u32) -> Self {
        Self { law: AxbLaw::default(), sign: TSign::default(), order }
    }
    pub fn with(law: AxbLaw, sign: TSign, order: u32) -> Self {
        Self { law, sign, order }
    }
    pub fn group(&self) -> GroupModel {
        GroupModel::Axb(self.law)
    }

    /// s(∂)f = Σ_{k≥1} σ(−1)^k λ^{2k} ∂^{2k+1} f/(2k+1)!, σ = ±1 by convention.
    fn s_apply(&self, f: &ExpPoly) -> ExpPoly {
        let sigma: i64 = match self.sign {
            TSign::Kernel => -1,
            TSign::Compact => 1,
        };
        let mut out = ExpPoly::zero();
        let mut d = f.partial_ell();
        for k in 1..=self.order / 2 {
            d = d.partial_ell().partial_ell();
            if d.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { -sigma } else { sigma };
            let c = Rational::new(sign.into(), factorial(2 * k + 1));
            out.add_assign(&d.scale_q(&c).lambda_shift(2 * k).lambda_cut(self.order));
        }
        out
    }

    /// T f through λ^order: multiplication by ℓⁿ first, then s(∂)ⁿ.
    pub fn t(&self, f: &ExpPoly) -> ExpPoly {
        let mut out = f.lambda_cut(self.order);
        let mut lf = f.clone();
        for n in 1..=self.order / 2 {
            lf = lf.times(&ExpPoly::ell());
            let mut h = lf.clone();
            for _ in 0..n {
                h = self.s_apply(&h);
            }
            out.add_assign(&h.scale_q(&Rational::new(1.into(), factorial(n))));
        }
        out
    }

    /// T⁻¹ = Σ_j (1 − T)^j; each factor raises the λ-order by at least 2.
    pub fn t_inv(&self, f: &ExpPoly) -> ExpPoly {
        let mut out = f.lambda_cut(self.order);
        let mut cur = out.clone();
        for _ in 1..=self.order / 2 {
            cur = cur.minus(&self.t(&cur));
            if cur.is_zero() {
                break;
            }
            out.add_assign(&cur);
        }
        out
    }

    pub fn weyl(&self, f: &ExpPoly, g: &ExpPoly) -> ExpPoly {
        weyl(f, g, self.order)
    }

    /// f ⋆_BM g = T⁻¹(Tf ⋆_W Tg)
    pub fn star_bm(&self, f: &ExpPoly, g: &ExpPoly) -> ExpPoly {
        self.t_inv(&self.weyl(&self.t(f), &self.t(g)))
    }

    pub fn commutator_bm(&self, f: &ExpPoly, g: &ExpPoly) -> ExpPoly {
        self.star_bm(f, g).minus(&self.star_bm(g, f))
    }

    /// (1/(iλ))[h, f]_W through λ^order.
    pub fn inner(&self, h: &ExpPoly, f: &ExpPoly) -> ExpPoly {
        let c = weyl(h, f, self.order + 1).minus(&weyl(f, h, self.order + 1));
        let minus_i = GaussianRational::new(int(0), int(-1));
        c.map_coeffs(|x| x.unshift(1).expect("commutator starts at λ¹")).scale_gauss(&minus_i).lambda_cut(self.order)
    }

    /// ∫ T(f) da dℓ for f in the weight-one Gaussian class.
    pub fn trace_bm(&self, f: &ExpPoly) -> Result<Coeff> {
        if f.is_zero() {
            return Ok(Coeff::zero());
        }
        if f.weight != int(1) {
            return Err(Error::ClassViolation(format!(
                "trace needs damping weight 1, got {}",
                fmt_rational(&f.weight)
            )));
        }
        Ok(gaussian_plane_integral(&self.t(f)))
    }

    /// Right-invariant frame: X₁ = ∂_a and X₂ = e^{−ka}∂_ℓ, generating left
    /// translations by (t, 0) and (0, t).
    pub fn frame(&self) -> [VectorField; 2] {
        [
            VectorField { name: "X1".into(), da: ExpPoly::one(), dl: ExpPoly::zero() },
            VectorField { name: "X2".into(), da: ExpPoly::zero(), dl: ExpPoly::exp(-self.law.k()) },
        ]
    }

    /// Test functions e^{ma} a^i ℓ^j, |m| ≤ 1, i ≤ 1, j ≤ 3.
    pub fn derivation_tests() -> Vec<ExpPoly> {
        let mut out = Vec::new();
        for m in -1..=1 {
            for i in 0..=1 {
                for j in 0..=3 {
                    out.push(ExpPoly::monomial(m, i, j));
                }
            }
        }
        out
    }

    /// Solves T∘X∘T⁻¹ = (1/(iλ))[h, ·]_W order by order for h in the span of
    /// e^{ma} a^i ℓ^j, |m| ≤ 2, i, j ≤ 2.
    pub fn check_inner_derivation(&self, x: &VectorField) -> Result<InnerDerivation> {
        let tests = Self::derivation_tests();
        let targets: Vec<ExpPoly> = tests.iter().map(|f| self.t(&x.apply(&self.t_inv(f)))).collect();
        let mut basis = Vec::new();
        for m in -2..=2 {
            for i in 0..=2 {
                for j in 0..=2 {
                    if (m, i, j) != (0, 0, 0) {
                        basis.push(ExpPoly::monomial(m, i, j));
                    }
                }
            }
        }
        // λ⁰ part of (1/(iλ))[b, f] is −{b, f}.
        let lead: Vec<Vec<ExpPoly>> = basis
            .iter()
            .map(|b| tests.iter().map(|f| AxbModel { order: 0, ..*self }.inner(b, f)).collect())
            .collect();
        let mut h = ExpPoly::zero();
        for r in 0..=self.order {
            let residual: Vec<ExpPoly> =
                tests.iter().zip(&targets).map(|(f, t)| t.minus(&self.inner(&h, f)).lambda_coeff(r)).collect();
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            let mut labels = Vec::new();
            for (ti, res) in residual.iter().enumerate() {
                let mut keys: Vec<(i32, u32, u32)> = res.terms.keys().copied().collect();
                for col in &lead {
                    keys.extend(col[ti].terms.keys().copied());
                }
                keys.sort();
                keys.dedup();
                for key in keys {
                    let row: Result<Vec<GaussianRational>> = lead.iter().map(|col| gauss_of(&col[ti].coeff(key))).collect();
                    rows.push(row?);
                    rhs.push(gauss_of(&res.coeff(key))?);
                    labels.push((ti, key));
                }
            }
            match solve_linear(rows, rhs, basis.len()) {
                Ok(sol) => {
                    for (b, c) in basis.iter().zip(sol) {
                        if !c.is_zero() {
                            h.add_assign(&b.scale_gauss(&c).lambda_shift(r));
                        }
                    }
                }
                Err(row) => {
                    let (ti, key) = labels[row];
                    return Err(Error::NoSolution {
                        order: r,
                        obstruction: format!(
                            "field {}: on test {} the λ^{r} residual {} has no Hamiltonian source (key {:?})",
                            x.name, tests[ti], residual[ti], key
                        ),
                    });
                }
            }
        }
        let residual_zero = tests.iter().zip(&targets).all(|(f, t)| t.minus(&self.inner(&h, f)).is_zero());
        Ok(InnerDerivation { field: x.name.clone(), order: self.order, h, tests: tests.len(), residual_zero })
    }

    /// Frame certificates plus (1/(iλ))[h₁, h₂]_W − h_{[X₁,X₂]} ∈ constants.
    pub fn check_frame(&self) -> Result<(Vec<InnerDerivation>, IdentityCheck)> {
        let [x1, x2] = self.frame();
        let x12 = x1.bracket(&x2);
        let d1 = self.check_inner_derivation(&x1)?;
        let d2 = self.check_inner_derivation(&x2)?;
        let d12 = self.check_inner_derivation(&x12)?;
        let mut c = IdentityCheck::new("bm-frame-bracket");
        let defect = self.inner(&d1.h, &d2.h).minus(&d12.h);
        let central = defect.terms.keys().all(|k| *k == (0, 0, 0));
        c.record(central, || format!("(1/iλ)[h1,h2] − h12 = {defect}"));
        Ok((vec![d1, d2, d12], c))
    }

    /// T real, even in λ, inverted by t_inv, and the identity on undamped
    /// functions of ℓ-degree ≤ 1.
    pub fn check_t(&self, samples: &[ExpPoly]) -> IdentityCheck {
        let mut c = IdentityCheck::new("bm-t-properties");
        for f in samples {
            let tf = self.t(f);
            c.record(tf.conj() == self.t(&f.conj()), || format!("T not real on {f}"));
            let odd = tf.minus(f).terms.values().any(|x| x.coeffs().any(|(k, _)| k % 2 == 1));
            c.record(!odd, || format!("T(f) − f has odd λ-powers for f = {f}"));
            c.record(self.t_inv(&tf) == f.lambda_cut(self.order), || format!("T⁻¹T ≠ id on {f}"));
            if f.weight.is_zero() && f.ell_degree() <= 1 {
                c.record(tf == *f, || format!("T moves {f}"));
            }
        }
        c
    }

    pub fn check_associativity(&self, triples: &[(ExpPoly, ExpPoly, ExpPoly)]) -> IdentityCheck {
        let mut c = IdentityCheck::new("bm-associativity");
        for (f, g, h) in triples {
            let d = self.star_bm(&self.star_bm(f, g), h).minus(&self.star_bm(f, &self.star_bm(g, h)));
            c.record(d.is_zero(), || format!("({f}, {g}, {h}) ↦ {d}"));
        }
        c
    }

    /// conj(f ⋆ g) = conj g ⋆ conj f, and the λ¹ part of [f, g] is −i{f, g}.
    pub fn check_hermitian_and_bracket(&self, pairs: &[(ExpPoly, ExpPoly)]) -> [IdentityCheck; 2] {
        let mut herm = IdentityCheck::new("bm-hermitian");
        let mut first = IdentityCheck::new("bm-first-order-bracket");
        for (f, g) in pairs {
            let d = self.star_bm(f, g).conj().minus(&self.star_bm(&g.conj(), &f.conj()));
            herm.record(d.is_zero(), || format!("({f}, {g}) ↦ {d}"));
            let comm = self.commutator_bm(f, g).lambda_coeff(1);
            let pb = f.partial_a().times(&g.partial_ell()).minus(&f.partial_ell().times(&g.partial_a()));
            let want = pb.scale_gauss(&GaussianRational::new(int(0), int(-1)));
            first.record(comm == want, || format!("({f}, {g}): λ¹ commutator {comm}, expected {want}"));
        }
        [herm, first]
    }

    /// Left*_y(f ⋆ g) = Left*_y f ⋆ Left*_y g at a generic y, and the same
    /// for Right*. Only the left identity is expected to hold.
    pub fn check_bi_invariance(&self, pairs: &[(ExpPoly, ExpPoly)]) -> Result<BiInvarianceReport> {
        let y = self.group().generic(0);
        let mut left = IdentityCheck::new("bm-left-invariance");
        let mut right = IdentityCheck::new("bm-right-invariance");
        for (f, g) in pairs {
            let lhs = self.star_bm(f, g).left_translate(&y, self.law)?;
            let rhs = self.star_bm(&f.left_translate(&y, self.law)?, &g.left_translate(&y, self.law)?);
            let d = lhs.minus(&rhs);
            left.record(d.is_zero(), || format!("({f}, {g}) ↦ {d}"));
            let lhs = self.star_bm(f, g).right_translate(&y, self.law)?;
            let rhs = self.star_bm(&f.right_translate(&y, self.law)?, &g.right_translate(&y, self.law)?);
            let d = lhs.minus(&rhs);
            right.record(d.is_zero(), || format!("({f}, {g}) ↦ {d}"));
        }
        Ok(BiInvarianceReport { product: format!("star-bm[k={}]", self.law.k()), left, right, induced: None })
    }

    /// Trace of ⋆_BM-commutators; f carries weight 1 and g weight 0, or
    /// both weight ½.
    pub fn check_trace(&self, pairs: &[(ExpPoly, ExpPoly)]) -> Result<IdentityCheck> {
        let mut c = IdentityCheck::new("bm-trace");
        for (f, g) in pairs {
            let t = self.trace_bm(&self.commutator_bm(f, g))?;
            c.record(t.is_zero(), || format!("tr[{f}, {g}] = {t}"));
        }
        Ok(c)
    }

    /// series_sign of tr(conj g ⋆ g) for weight-½ samples g.
    pub fn check_positivity(&self, samples: &[ExpPoly]) -> Result<IdentityCheck> {
        let mut c = IdentityCheck::new("bm-trace-positivity");
        for g in samples {
            let t = self.trace_bm(&self.star_bm(&g.conj(), g))?;
            let s = t.series_sign();
            c.record(matches!(s, SeriesSign::Positive | SeriesSign::Zero), || format!("tr(conj g ⋆ g) = {t} for g = {g}"));
        }
        Ok(c)
    }

    /// α^x f = f(· x) for f on G and a symbolic point x of G.
    pub fn alpha_x(&self, f: &ExpPoly, x: &GroupElem) -> Result<ExpPoly> {
        f.right_translate(x, self.law)
    }

    /// Right*_y α^x = α^{y.x} and Left*_y α^x = α^x τ*_y at generic y, x.
    pub fn check_alpha_relations(&self, samples: &[ExpPoly]) -> Result<IdentityCheck> {
        let grp = self.group();
        let (y, x) = (grp.generic(0), grp.generic(3));
        let mut c = IdentityCheck::new("alpha-relations[axb]");
        for f in samples {
            let ax = self.alpha_x(f, &x)?;
            let lhs = ax.right_translate(&y, self.law)?;
            let rhs = self.alpha_x(f, &grp.mul(&y, &x))?;
            c.record(lhs == rhs, || format!("Right*α^x ≠ α^(y.x) on {f}"));
            let lhs = ax.left_translate(&y, self.law)?;
            let rhs = self.alpha_x(&f.left_translate(&y, self.law)?, &x)?;
            c.record(lhs == rhs, || format!("Left*α^x ≠ α^x τ* on {f}"));
        }
        Ok(c)
    }
}

fn gauss_of(c: &Coeff) -> Result<GaussianRational> {
    let s = c.coeff(0);
    if c.coeffs().any(|(k, _)| k != 0) {
        return Err(Error::ClassViolation("λ-dependent coefficient in a linear system".into()));
    }
    s.as_gauss().ok_or_else(|| Error::ClassViolation(format!("symbolic coefficient {s} in a linear system")))
}

/// Gauss–Jordan elimination; free unknowns are set to zero. On an
/// inconsistent system returns the index of an offending equation.
fn solve_linear(
    mut rows: Vec<Vec<GaussianRational>>,
    mut rhs: Vec<GaussianRational>,
    n: usize,
) -> std::result::Result<Vec<GaussianRational>, usize> {
    let order: Vec<usize> = (0..rows.len()).collect();
    let mut order = order;
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        order.swap(r, p);
        let inv = rows[r][col].inverse().expect("nonzero pivot");
        for v in rows[r].iter_mut() {
            *v = v.times(&inv);
        }
        rhs[r] = rhs[r].times(&inv);
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            for j in 0..n {
                let t = f.times(&rows[r][j]);
                rows[i][j] = rows[i][j].minus(&t);
            }
            let t = f.times(&rhs[r]);
            rhs[i] = rhs[i].minus(&t);
        }
        pivots.push(col);
        r += 1;
    }
    if let Some(bad) = (r..rows.len()).find(|&i| !rhs[i].is_zero()) {
        return Err(order[bad]);
    }
    let mut sol = vec![GaussianRational::zero(); n];
    for (i, col) in pivots.into_iter().enumerate() {
        sol[col] = rhs[i].clone();
    }
    Ok(sol)
}

/// ∫ e^{ma} a^i e^{−a²/2} da / √(2π) = e^{m²/2} E[(Z + m)^i]; returns the
/// rational factor.
fn shifted_moment(m: i32, i: u32) -> Rational {
    let mut acc = Rational::zero();
    for k in (0..=i).step_by(2) {
        let mut t = Rational::from_integer(binomial(i, k) * double_factorial_odd(k / 2));
        t *= Rational::from_integer(m.into()).pow((i - k) as i32);
        acc += t;
    }
    acc
}

/// ∫ f da dℓ for f in the weight-one Gaussian class.
fn gaussian_plane_integral(f: &ExpPoly) -> Coeff {
    let mut out = Coeff::zero();
    for (&(m, i, j), c) in &f.terms {
        if j % 2 == 1 {
            continue;
        }
        let q = shifted_moment(m, i) * Rational::from_integer(double_factorial_odd(j / 2));
        if q.is_zero() {
            continue;
        }
        let unit = Sym::unit_pow(Unit::SqrtE, m * m).times(&Sym::unit_pow(Unit::Sqrt2Pi, 2)).scale(&q);
        out.add_in(&c.scale_scalar(&unit));
    }
    out
}

// ---------------------------------------------------------------------------
// The translation instance

/// p(y, s) e^{−w|y|²/2} on X = ℝ²ⁿ × ℝˢ (plus trailing parameters), y the
/// first 2n coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct XFun {
    pub p: PolyG<Sym>,
    pub weight: Rational,
}

impl XFun {
    pub fn poly(p: PolyG<Sym>) -> Self {
        Self { p, weight: Rational::zero() }
    }
    pub fn damped(p: PolyG<Sym>, weight: Rational) -> Self {
        Self { p, weight }
    }
    pub fn conj(&self) -> Self {
        Self { p: self.p.conj(), weight: self.weight.clone() }
    }
    pub fn minus(&self, o: &Self) -> Self {
        assert_eq!(self.weight, o.weight);
        Self { p: self.p.minus(&o.p), weight: self.weight.clone() }
    }
}

/// q(g, x) e^{−w|g + y|²/2} on G × X: the pullback α^x of an `XFun`.
#[derive(Clone, Debug)]
struct TFun {
    p: PolyG<Sym>,
    weight: Rational,
    gdim: usize,
}

impl Phase for TFun {
    fn d(&self, v: usize) -> Self {
        let mut p = self.p.partial(v);
        if !self.weight.is_zero() {
            let n = self.p.nvars();
            let shift = PolyG::var(n, v).plus(&PolyG::var(n, self.gdim + v));
            p = p.minus(&shift.times(&self.p).scale_q(&self.weight));
        }
        Self { p, weight: self.weight.clone(), gdim: self.gdim }
    }
    fn vanishes(&self) -> bool {
        self.p.is_zero()
    }
}

/// A functional on functions of x: the function itself (evaluation at a
/// symbolic point) or a weighted sum of evaluations.
#[derive(Clone, Debug, PartialEq)]
pub enum PointFunctional {
    Symbolic,
    Evaluations(Vec<(Rational, Vec<Rational>)>),
}

impl PointFunctional {
    pub fn apply(&self, p: &PolyG<Sym>) -> PolyG<Sym> {
        match self {
            PointFunctional::Symbolic => p.clone(),
            PointFunctional::Evaluations(list) => {
                let mut acc = Coeff::zero();
                for (w, pt) in list {
                    let point: Vec<Coeff> = pt.iter().map(Coeff::from_rational).collect();
                    acc.add_in(&p.eval(&point).scale(w));
                }
                PolyG::constant(p.nvars(), acc)
            }
        }
    }
}

/// ℝ²ⁿ acting on ℝ²ⁿ × ℝˢ by translation, with the Moyal product on the
/// group. Functions on G × X use variables (g, x, parameters).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Translations {
    pub pairs: usize,
    pub spectators: usize,
}

impl Translations {
    pub fn new(pairs: usize, spectators: usize) -> Self {
        Self { pairs, spectators }
    }
    pub fn action(&self) -> ActionModel {
        ActionModel::Translations { pairs: self.pairs, spectators: self.spectators }
    }
    pub fn gdim(&self) -> usize {
        2 * self.pairs
    }
    pub fn xdim(&self) -> usize {
        2 * self.pairs + self.spectators
    }
    /// Moyal on X directly, treating spectators and parameters as constants.
    pub fn moyal_x(&self, f: &PolyG<Sym>, g: &PolyG<Sym>) -> PolyG<Sym> {
        let m = Moyal::with_spectators(self.pairs, f.nvars() - self.gdim());
        star_mul_upto(&m, f, g, None)
    }
    /// (α^x f)(g) = f(g.x) as a function of (g, x, parameters).
    pub fn alpha_x(&self, f: &PolyG<Sym>) -> PolyG<Sym> {
        let gd = self.gdim();
        let n = gd + f.nvars();
        let subs: Vec<PolyG<Sym>> = (0..f.nvars())
            .map(|i| if i < gd { PolyG::var(n, gd + i).plus(&PolyG::var(n, i)) } else { PolyG::var(n, gd + i) })
            .collect();
        f.compose(&subs)
    }
    /// Restriction to g = e; drops the group variables.
    fn at_identity(&self, p: &PolyG<Sym>) -> PolyG<Sym> {
        let gd = self.gdim();
        let n = p.nvars() - gd;
        let subs: Vec<PolyG<Sym>> =
            (0..p.nvars()).map(|i| if i < gd { PolyG::zero(n) } else { PolyG::var(n, i - gd) }).collect();
        p.compose(&subs)
    }
    /// (f₁ ⋆_X f₂)(x) = (α^x f₁ ⋆ α^x f₂)(e)
    pub fn star_x(&self, f1: &PolyG<Sym>, f2: &PolyG<Sym>) -> PolyG<Sym> {
        let m = Moyal::with_spectators(self.pairs, f1.nvars());
        self.at_identity(&star_mul_upto(&m, &self.alpha_x(f1), &self.alpha_x(f2), None))
    }
    /// ⋆_X on the Gaussian class. Two damped factors give an infinite
    /// series, so an order is then required.
    pub fn star_x_damped(&self, f1: &XFun, f2: &XFun, order: Option<u32>) -> Result<XFun> {
        if order.is_none() && !f1.weight.is_zero() && !f2.weight.is_zero() {
            return Err(Error::ClassViolation("product of two damped functions needs a λ-order".into()));
        }
        let a = TFun { p: self.alpha_x(&f1.p), weight: f1.weight.clone(), gdim: self.gdim() };
        let b = TFun { p: self.alpha_x(&f2.p), weight: f2.weight.clone(), gdim: self.gdim() };
        let mut out = PolyG::zero(a.p.nvars());
        weyl_expand(&a, &b, self.pairs, order, |r, c, x, y| {
            let mut t = x.p.times(&y.p).scale_scalar(&gauss_sym(c)).lambda_shift(r);
            if let Some(l) = order {
                t = t.lambda_cut(l);
            }
            out.add_assign(&t);
        });
        Ok(XFun { p: self.at_identity(&out), weight: &f1.weight + &f2.weight })
    }
    /// tr_G(α^x f) = ∫ f(g + y, s) dg, a function of the remaining
    /// coordinates.
    pub fn trace_alpha(&self, f: &XFun) -> Result<PolyG<Sym>> {
        if f.weight != int(1) {
            return Err(Error::ClassViolation(format!(
                "group trace needs damping weight 1, got {}",
                fmt_rational(&f.weight)
            )));
        }
        let gd = self.gdim();
        let q = self.alpha_x(&f.p);
        let n = q.nvars();
        // g ↦ g − y centres the Gaussian at the origin.
        let subs: Vec<PolyG<Sym>> = (0..n)
            .map(|i| if i < gd { PolyG::var(n, i).minus(&PolyG::var(n, gd + i)) } else { PolyG::var(n, i) })
            .collect();
        let q = q.compose(&subs);
        let mut out = PolyG::zero(n - gd);
        let unit = Sym::unit_pow(Unit::Sqrt2Pi, gd as i32);
        for (m, c) in q.terms() {
            let Some(w) = crate::poisson::gaussian_moment(m, gd) else { continue };
            let rest = Multi::from_slice(&m.to_vec(n)[gd..]);
            out.add_term(rest, c.scale_scalar(&unit).scale(&Rational::from_integer(w)));
        }
        Ok(out)
    }
    /// tr_Φ(f) = Φ(x ↦ tr_G(α^x f))
    pub fn induced_trace(&self, phi: &PointFunctional, f: &XFun) -> Result<PolyG<Sym>> {
        Ok(phi.apply(&self.trace_alpha(f)?))
    }

    fn var(&self, n: usize, i: usize) -> PolyG<Sym> {
        PolyG::var(n, i)
    }

    /// Translation check: ⋆_X equals Moyal on X for polynomial samples.
    pub fn check_reproduces_moyal(&self, pairs: &[(PolyG<Sym>, PolyG<Sym>)]) -> IdentityCheck {
        let mut c = IdentityCheck::new("starx-moyal");
        for (f, g) in pairs {
            let d = self.star_x(f, g).minus(&self.moyal_x(f, g));
            c.record(d.is_zero(), || format!("{f:?}, {g:?} ↦ {d:?}"));
        }
        c
    }

    pub fn check_associativity(&self, triples: &[(PolyG<Sym>, PolyG<Sym>, PolyG<Sym>)]) -> IdentityCheck {
        let mut c = IdentityCheck::new("starx-associativity");
        for (f, g, h) in triples {
            let d = self.star_x(&self.star_x(f, g), h).minus(&self.star_x(f, &self.star_x(g, h)));
            c.record(d.is_zero(), || format!("{f:?}, {g:?}, {h:?} ↦ {d:?}"));
        }
        c
    }

    /// α^x(f₁ ⋆_X f₂) = α^x f₁ ⋆_G α^x f₂
    pub fn check_homomorphism(&self, pairs: &[(PolyG<Sym>, PolyG<Sym>)]) -> IdentityCheck {
        let mut c = IdentityCheck::new("starx-homomorphism");
        for (f, g) in pairs {
            let m = Moyal::with_spectators(self.pairs, f.nvars());
            let lhs = self.alpha_x(&self.star_x(f, g));
            let rhs = star_mul_upto(&m, &self.alpha_x(f), &self.alpha_x(g), None);
            let d = lhs.minus(&rhs);
            c.record(d.is_zero(), || format!("{f:?}, {g:?} ↦ {d:?}"));
        }
        c
    }

    /// Functions of the spectators alone are constant on orbits, and ⋆_X
    /// with them is pointwise.
    pub fn check_orbit_tangential(&self, orbit_constants: &[PolyG<Sym>], others: &[PolyG<Sym>]) -> IdentityCheck {
        let mut c = IdentityCheck::new("starx-constant-on-orbits");
        for f in orbit_constants {
            debug_assert!(f.terms().all(|(m, _)| (0..self.gdim()).all(|i| m.get(i) == 0)));
            for g in others {
                let p = f.times(g);
                let d1 = self.star_x(f, g).minus(&p);
                let d2 = self.star_x(g, f).minus(&p);
                c.record(d1.is_zero() && d2.is_zero(), || format!("{f:?}, {g:?} ↦ {d1:?} / {d2:?}"));
            }
        }
        c
    }

    /// Right*_{g′} α^x = α^{g′.x} and Left*_{g′} α^x = α^x τ*_{g′} with g′
    /// appended as parameters.
    pub fn check_alpha_relations(&self, samples: &[PolyG<Sym>]) -> IdentityCheck {
        let mut c = IdentityCheck::new("alpha-relations[translations]");
        let (gd, xd) = (self.gdim(), self.xdim());
        for f in samples {
            // f on X, extended by g′ parameters.
            let n = xd + gd;
            let fe = f.with_nvars(n);
            let ax = self.alpha_x(&fe);
            let nt = ax.nvars();
            // Right*_{g′}: g ↦ g + g′ (g′ sits after x in α's variables).
            let shift_g: Vec<PolyG<Sym>> = (0..nt)
                .map(|i| if i < gd { self.var(nt, i).plus(&self.var(nt, gd + xd + i)) } else { self.var(nt, i) })
                .collect();
            let right = ax.compose(&shift_g);
            // τ*_{g′} f(x) = f(y + g′, s)
            let tau: Vec<PolyG<Sym>> = (0..n)
                .map(|i| if i < gd { self.var(n, i).plus(&self.var(n, xd + i)) } else { self.var(n, i) })
                .collect();
            let moved = self.alpha_x(&fe.compose(&tau));
            // The group is abelian, so this is also Left*_{g′} α^x = α^x τ*_{g′}.
            c.record(right == moved, || format!("Right* α^x ≠ α^(g.x) on {f:?}"));
        }
        c
    }

    /// Left- and right-invariance of a product on G at a generic g′, and
    /// τ*-invariance of the induced product on X.
    pub fn check_bi_invariance(&self, star: &dyn StarProduct, pairs: &[(PolyG<Sym>, PolyG<Sym>)]) -> BiInvarianceReport {
        let gd = self.gdim();
        let mut left = IdentityCheck::new(format!("{}-left-invariance", star.name()));
        let mut right = IdentityCheck::new(format!("{}-right-invariance", star.name()));
        let mut induced = IdentityCheck::new("starx-tau-invariance");
        for (f, g) in pairs {
            // On G with parameters g′: f(g + g′) since the group is abelian.
            let n = star.nvars();
            debug_assert_eq!(n, 2 * gd);
            let shift: Vec<PolyG<Sym>> = (0..n)
                .map(|i| if i < gd { self.var(n, i).plus(&self.var(n, gd + i)) } else { self.var(n, i) })
                .collect();
            let fg = f.with_nvars(n);
            let gg = g.with_nvars(n);
            let lhs = star_mul_upto(star, &fg, &gg, None).compose(&shift);
            let rhs = star_mul_upto(star, &fg.compose(&shift), &gg.compose(&shift), None);
            let d = lhs.minus(&rhs);
            left.record(d.is_zero(), || format!("{f:?}, {g:?} ↦ {d:?}"));
            right.record(d.is_zero(), || format!("{f:?}, {g:?} ↦ {d:?}"));
        }
        // Bi-invariance makes ⋆_X invariant under τ*.
        {
            let xd = self.xdim();
            let n = xd + gd;
            let tau: Vec<PolyG<Sym>> = (0..n)
                .map(|i| if i < gd { self.var(n, i).plus(&self.var(n, xd + i)) } else { self.var(n, i) })
                .collect();
            for (f, g) in pairs {
                let (fx, gx) = (self.embed_on_x(f, n), self.embed_on_x(g, n));
                let lhs = self.star_x(&fx, &gx).compose(&tau);
                let rhs = self.star_x(&fx.compose(&tau), &gx.compose(&tau));
                let d = lhs.minus(&rhs);
                induced.record(d.is_zero(), || format!("{f:?}, {g:?} ↦ {d:?}"));
            }
        }
        BiInvarianceReport { product: star.name(), left, right, induced: Some(induced) }
    }

    /// Reads a function of the group coordinates as a function on X.
    fn embed_on_x(&self, f: &PolyG<Sym>, n: usize) -> PolyG<Sym> {
        let gd = self.gdim();
        let subs: Vec<PolyG<Sym>> = (0..f.nvars()).map(|i| if i < gd { self.var(n, i) } else { PolyG::zero(n) }).collect();
        f.compose(&subs)
    }

    /// With ι(g) = g⁻¹, f ⋆ι h = ι*(ι*f ⋆ ι*h) is left-invariant whenever ⋆
    /// is right-invariant.
    pub fn check_left_universal(&self, pairs: &[(PolyG<Sym>, PolyG<Sym>)]) -> IdentityCheck {
        let gd = self.gdim();
        let n = 2 * gd;
        let m = Moyal::with_spectators(self.pairs, gd);
        let inv: Vec<PolyG<Sym>> =
            (0..n).map(|i| if i < gd { self.var(n, i).negated() } else { self.var(n, i) }).collect();
        let left: Vec<PolyG<Sym>> =
            (0..n).map(|i| if i < gd { self.var(n, gd + i).plus(&self.var(n, i)) } else { self.var(n, i) }).collect();
        let prod = |f: &PolyG<Sym>, h: &PolyG<Sym>| {
            star_mul_upto(&m, &f.compose(&inv), &h.compose(&inv), None).compose(&inv)
        };
        let mut c = IdentityCheck::new("left-universal");
        for (f, h) in pairs {
            let (f, h) = (f.with_nvars(n), h.with_nvars(n));
            let lhs = prod(&f, &h).compose(&left);
            let rhs = prod(&f.compose(&left), &h.compose(&left));
            let d = lhs.minus(&rhs);
            c.record(d.is_zero(), || format!("{f:?}, {h:?} ↦ {d:?}"));
        }
        c
    }

    /// tr_Φ([f₁, f₂]_{⋆X}) = 0; the weights of each pair must sum to 1.
    pub fn check_induced_trace(
        &self,
        phi: &PointFunctional,
        pairs: &[(XFun, XFun)],
        order: Option<u32>,
    ) -> Result<IdentityCheck> {
        let mut c = IdentityCheck::new("induced-trace");
        for (f, g) in pairs {
            let comm = self.star_x_damped(f, g, order)?.minus(&self.star_x_damped(g, f, order)?);
            let t = self.induced_trace(phi, &comm)?;
            c.record(t.is_zero(), || format!("tr[{:?}, {:?}] = {t:?}", f.p, g.p));
        }
        Ok(c)
    }

    /// Sign of tr_Φ(conj f ⋆_X f) for weight-½ samples.
    pub fn check_induced_positivity(&self, phi: &PointFunctional, samples: &[XFun], order: u32) -> Result<IdentityCheck> {
        let mut c = IdentityCheck::new("induced-trace-positivity");
        for f in samples {
            let t = self.induced_trace(phi, &self.star_x_damped(&f.conj(), f, Some(order))?)?;
            let ok = t.terms().all(|(m, _)| m.degree() == 0)
                && matches!(t.coeff(&Multi::zero()).series_sign(), SeriesSign::Positive | SeriesSign::Zero);
            c.record(ok, || format!("tr(conj f ⋆ f) = {t:?} for f = {:?}", f.p));
        }
        Ok(c)
    }
}

/// Pointwise bi-invariance as a baseline.
pub fn check_pointwise_bi_invariance(tr: &Translations, pairs: &[(PolyG<Sym>, PolyG<Sym>)]) -> BiInvarianceReport {
    tr.check_bi_invariance(&Pointwise(2 * tr.gdim()), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> AxbModel {
        AxbModel::new(4)
    }

    fn lam2(q: Rational) -> Coeff {
        Coeff::monomial(2, Sym::rational(q))
    }

    #[test]
    fn group_and_action_axioms() {
        for g in [GroupModel::Translations { dim: 2 }, GroupModel::Axb(AxbLaw::Squared), GroupModel::Axb(AxbLaw::Linear)] {
            let c = g.check_axioms();
            assert!(c.passed, "{c:?}");
        }
        for a in [ActionModel::Translations { pairs: 1, spectators: 1 }, ActionModel::AxbOnItself(AxbLaw::Squared)] {
            assert!(a.check_axioms().passed);
        }
    }

    #[test]
    fn t_on_low_powers() {
        let m = model();
        assert_eq!(m.t(&ExpPoly::one()), ExpPoly::one());
        assert_eq!(m.t(&ExpPoly::ell()), ExpPoly::ell());
        let l2 = ExpPoly::monomial(0, 0, 2);
        let kernel = m.t(&l2);
        assert_eq!(kernel, l2.plus(&ExpPoly::constant(lam2(int(1)))));
        let compact = AxbModel::with(AxbLaw::Squared, TSign::Compact, 4).t(&l2);
        assert_eq!(compact, l2.plus(&ExpPoly::constant(lam2(int(-1)))));
    }

    #[test]
    fn t_matches_plane_wave_formula() {
        // λ² part of e^{i asinh(λβ)ℓ/λ}(1+λ²β²)^{-1/2} at β³ is −(2/3)iβ³ℓ,
        // against (iβ)³/3! = −iβ³/6 for ℓ³: T ℓ³ = ℓ³ + 4λ²ℓ + O(λ⁴).
        let m = model();
        let t = m.t(&ExpPoly::monomial(0, 0, 3));
        assert_eq!(t.lambda_coeff(2), ExpPoly::monomial(0, 0, 1).scale_q(&int(4)));
    }

    #[test]
    fn t_properties_on_samples() {
        let m = model();
        let samples = exp_poly_samples(1, 3);
        let c = m.check_t(&samples);
        assert!(c.passed, "{c:?}");
        let c = m.check_t(&[ExpPoly::gaussian().times(&ExpPoly::monomial(1, 0, 1))]);
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn first_order_commutator() {
        let m = model();
        let c = m.commutator_bm(&ExpPoly::a(), &ExpPoly::ell());
        let want = ExpPoly::constant(Coeff::monomial(1, Sym::constant(GaussianRational::new(int(0), int(-1)))));
        assert_eq!(c, want);
        let [h, b] = m.check_hermitian_and_bracket(&[(ExpPoly::exp(1), ExpPoly::monomial(0, 1, 2))]);
        assert!(h.passed && b.passed, "{h:?} {b:?}");
    }

    #[test]
    fn bm_associative_small() {
        let m = model();
        let t = vec![(ExpPoly::exp(1), ExpPoly::ell(), ExpPoly::monomial(-1, 0, 2))];
        assert!(m.check_associativity(&t).passed);
    }

    #[test]
    fn inner_derivations_kernel_sign() {
        let m = AxbModel::new(4);
        let (ds, bracket) = m.check_frame().expect("solvable");
        assert!(bracket.passed, "{bracket:?}");
        assert!(ds.iter().all(|d| d.residual_zero));
        assert_eq!(ds[0].h, ExpPoly::ell());
        assert_eq!(ds[1].h, ExpPoly::exp(-2).scale_q(&rat(1, 2)));
    }

    #[test]
    fn compact_sign_has_no_inner_derivation() {
        let m = AxbModel::with(AxbLaw::Squared, TSign::Compact, 2);
        let [_, x2] = m.frame();
        match m.check_inner_derivation(&x2) {
            Err(Error::NoSolution { order, .. }) => assert_eq!(order, 2),
            other => panic!("expected an obstruction, got {other:?}"),
        }
    }

    #[test]
    fn linear_law_has_no_inner_derivation() {
        let m = AxbModel::with(AxbLaw::Linear, TSign::Kernel, 2);
        let [_, x2] = m.frame();
        assert!(matches!(m.check_inner_derivation(&x2), Err(Error::NoSolution { .. })));
    }

    #[test]
    fn zero_field_gives_zero() {
        let d = model().check_inner_derivation(&VectorField::zero()).unwrap();
        assert!(d.h.is_zero() && d.residual_zero);
    }

    #[test]
    fn frame_is_right_invariant() {
        let m = model();
        let y = m.group().generic(0);
        for x in m.frame() {
            for f in exp_poly_samples(1, 2) {
                let lhs = x.apply(&f.right_translate(&y, m.law).unwrap());
                let rhs = x.apply(&f).right_translate(&y, m.law).unwrap();
                assert_eq!(lhs, rhs, "{} on {f}", x.name);
            }
        }
    }

    #[test]
    fn bm_left_invariant() {
        let m = AxbModel::new(2);
        let pairs = vec![(ExpPoly::monomial(1, 0, 1), ExpPoly::monomial(0, 0, 2))];
        let r = m.check_bi_invariance(&pairs).unwrap();
        assert!(r.left.passed, "{:?}", r.left);
    }

    #[test]
    fn trace_bm_gaussian_and_commutators() {
        let m = model();
        let tr = m.trace_bm(&ExpPoly::gaussian()).unwrap();
        assert_eq!(tr, Coeff::constant(Sym::unit_pow(Unit::Sqrt2Pi, 2)));
        let f = ExpPoly::gaussian().times(&ExpPoly::monomial(1, 1, 1));
        let g = ExpPoly::monomial(0, 0, 3);
        assert!(m.check_trace(&[(f, g)]).unwrap().passed);
        assert!(matches!(m.trace_bm(&ExpPoly::ell()), Err(Error::ClassViolation(_))));
    }

    #[test]
    fn trace_bm_positive() {
        let m = AxbModel::new(2);
        let g = ExpPoly::monomial(1, 0, 1).plus(&ExpPoly::monomial(0, 1, 0)).damped(rat(1, 2));
        assert!(m.check_positivity(&[g]).unwrap().passed);
    }

    #[test]
    fn shifted_moment_values() {
        // E[(Z+1)^2] = 2, E[(Z+2)^3] = 8 + 6 = 14
        assert_eq!(shifted_moment(1, 2), int(2));
        assert_eq!(shifted_moment(2, 3), int(14));
        assert_eq!(shifted_moment(0, 4), int(3));
    }

    #[test]
    fn solver_detects_inconsistency() {
        let one = GaussianRational::one();
        let z = GaussianRational::zero();
        let rows = vec![vec![one.clone(), z.clone()], vec![one.clone(), z.clone()]];
        assert_eq!(solve_linear(rows, vec![one.clone(), z.clone()], 2), Err(1));
    }

    fn tpoly(n: usize, e: &[u32]) -> PolyG<Sym> {
        PolyG::monomial(n, Multi::from_slice(e), Coeff::one())
    }

    #[test]
    fn translations_reproduce_moyal() {
        let tr = Translations::new(1, 1);
        let q = tpoly(3, &[1, 0, 0]);
        let p = tpoly(3, &[0, 1, 0]);
        assert_eq!(tr.star_x(&q, &p), tr.moyal_x(&q, &p));
        assert_eq!(tr.alpha_x(&q), tpoly(5, &[1, 0, 0, 0, 0]).plus(&tpoly(5, &[0, 0, 1, 0, 0])));
        let s = tpoly(3, &[0, 0, 1]);
        assert!(tr.check_orbit_tangential(std::slice::from_ref(&s), &[q.clone(), p.times(&q)]).passed);
        assert!(tr.check_alpha_relations(&[q.times(&p), s]).passed);
        assert!(tr.check_left_universal(&[(tpoly(2, &[1, 1]), tpoly(2, &[0, 2]))]).passed);
    }

    #[test]
    fn translations_bi_invariance() {
        let tr = Translations::new(1, 0);
        let pairs = vec![(tpoly(2, &[2, 1]), tpoly(2, &[1, 2]))];
        let r = tr.check_bi_invariance(&Moyal::with_spectators(1, 2), &pairs);
        assert!(r.left.passed && r.right.passed && r.induced.as_ref().unwrap().passed, "{r:?}");
        assert!(check_pointwise_bi_invariance(&tr, &pairs).left.passed);
    }

    #[test]
    fn translations_induced_trace() {
        let tr = Translations::new(1, 1);
        let q = tpoly(3, &[1, 0, 0]);
        let p = tpoly(3, &[0, 1, 0]);
        let f = XFun::damped(q.clone(), int(1));
        let g = XFun::poly(p.times(&tpoly(3, &[0, 0, 1])));
        let c = tr.check_induced_trace(&PointFunctional::Symbolic, &[(f.clone(), g)], None).unwrap();
        assert!(c.passed, "{c:?}");
        let one = XFun::damped(PolyG::one(3), int(1));
        let t = tr.induced_trace(&PointFunctional::Symbolic, &one).unwrap();
        assert_eq!(t, PolyG::constant(3, Coeff::constant(Sym::unit_pow(Unit::Sqrt2Pi, 2))));
        let phi = PointFunctional::Evaluations(vec![
            (rat(1, 2), vec![int(0), int(0), int(1)]),
            (rat(1, 2), vec![int(1), int(-1), int(2)]),
        ]);
        let h = XFun::damped(q.plus(&tpoly(3, &[0, 0, 1])), rat(1, 2));
        assert!(tr.check_induced_positivity(&phi, &[h], 4).unwrap().passed);
    }

    fn exp_poly() -> impl Strategy<Value = ExpPoly> {
        proptest::collection::vec(((-2i32..=2), (0u32..=2), (0u32..=3), (-3i64..=3)), 1..4).prop_map(|ts| {
            let mut out = ExpPoly::zero();
            for (m, i, j, c) in ts {
                out.add_assign(&ExpPoly::monomial(m, i, j).scale_q(&int(c)));
            }
            out
        })
    }

    fn x_poly() -> impl Strategy<Value = PolyG<Sym>> {
        proptest::collection::vec(((0u32..=2), (0u32..=2), (0u32..=1), (-3i64..=3)), 1..4).prop_map(|ts| {
            let mut out = PolyG::zero(3);
            for (a, b, s, c) in ts {
                out.add_term(Multi::from_slice(&[a, b, s]), Coeff::from_rational(&int(c)));
            }
            out
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn t_real_even_invertible(f in exp_poly()) {
            let c = model().check_t(&[f]);
            prop_assert!(c.passed, "{:?}", c);
        }

        #[test]
        fn bm_associative(f in exp_poly(), g in exp_poly(), h in exp_poly()) {
            let c = AxbModel::new(2).check_associativity(&[(f, g, h)]);
            prop_assert!(c.passed, "{:?}", c);
        }

        #[test]
        fn starx_associative_and_homomorphic(f in x_poly(), g in x_poly(), h in x_poly()) {
            let tr = Translations::new(1, 1);
            prop_assert!(tr.check_associativity(&[(f.clone(), g.clone(), h)]).passed);
            prop_assert!(tr.check_homomorphism(&[(f, g)]).passed);
        }
    }
}
