//! Sparse multivariate polynomials over a coefficient ring.
//!
//! `PolyG<S>` (coefficients in `LambdaPoly<S>`) is the workhorse type:
//! polynomials on 𝔤* whose coefficients are polynomials in λ.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{int, GaussianRational, LambdaPoly, Rational, Ring, Scalar};

pub const MAX_VARS: usize = 16;

/// Exponent vector of a monomial ξ^α.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Multi(pub [u8; MAX_VARS]);

impl Multi {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn unit(i: usize) -> Self {
        let mut m = Self::default();
        m.0[i] = 1;
        m
    }
    pub fn from_slice(e: &[u32]) -> Self {
        assert!(e.len() <= MAX_VARS, "too many variables");
        let mut m = Self::default();
        for (i, x) in e.iter().enumerate() {
            m.0[i] = u8::try_from(*x).expect("exponent overflow");
        }
        m
    }
    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.0[i] as u32
    }
    pub fn set(&mut self, i: usize, e: u32) {
        self.0[i] = u8::try_from(e).expect("exponent overflow");
    }
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut m = *self;
        for i in 0..MAX_VARS {
            m.0[i] = self.0[i].checked_add(o.0[i]).expect("exponent overflow");
        }
        m
    }
    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        let mut m = *self;
        for i in 0..MAX_VARS {
            m.0[i] = self.0[i].checked_sub(o.0[i])?;
        }
        Some(m)
    }
    pub fn divides(&self, o: &Self) -> bool {
        (0..MAX_VARS).all(|i| self.0[i] <= o.0[i])
    }
    pub fn inc(&self, i: usize) -> Self {
        let mut m = *self;
        m.0[i] += 1;
        m
    }
    pub fn dec(&self, i: usize) -> Option<Self> {
        let mut m = *self;
        m.0[i] = m.0[i].checked_sub(1)?;
        Some(m)
    }
    pub fn to_vec(&self, n: usize) -> Vec<u32> {
        (0..n).map(|i| self.get(i)).collect()
    }
    /// Lowest variable index with a nonzero exponent.
    pub fn first_var(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }
    /// Π α_i!
    pub fn factorial(&self) -> num_bigint::BigInt {
        self.0.iter().fold(num_bigint::BigInt::from(1), |acc, &e| acc * crate::scalar::factorial(e as u32))
    }
    /// Every exponent vector in `n` variables of total degree exactly `d`.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<Multi> {
        fn rec(n: usize, i: usize, left: u32, cur: &mut Multi, out: &mut Vec<Multi>) {
            if i + 1 == n {
                cur.set(i, left);
                out.push(*cur);
                cur.set(i, 0);
                return;
            }
            for e in (0..=left).rev() {
                cur.set(i, e);
                rec(n, i + 1, left - e, cur, out);
            }
            cur.set(i, 0);
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(Multi::zero());
            }
            return out;
        }
        rec(n, 0, d, &mut Multi::zero(), &mut out);
        out
    }
    /// Every exponent vector of total degree at most `d`, graded.
    pub fn all_up_to_degree(n: usize, d: u32) -> Vec<Multi> {
        (0..=d).flat_map(|k| Self::all_of_degree(n, k)).collect()
    }
}

impl fmt::Debug for Multi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&e| e > 0).map_or(0, |p| p + 1);
        write!(f, "{:?}", &self.0[..last])
    }
}

/// Polynomial in `nvars` commuting variables.
#[derive(Clone, PartialEq)]
pub struct Poly<C> {
    nvars: usize,
    terms: BTreeMap<Multi, C>,
}

/// Polynomial on 𝔤* with coefficients in λ-polynomials.
pub type PolyG<S> = Poly<LambdaPoly<S>>;

impl<C: Ring> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        Self { nvars, terms: BTreeMap::new() }
    }
    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }
    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, Multi::zero(), c)
    }
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        Self::monomial(nvars, Multi::unit(i), C::one())
    }
    pub fn monomial(nvars: usize, m: Multi, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(m, c);
        p
    }
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Multi, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Multi, &C)> + ExactSizeIterator {
        self.terms.iter()
    }
    pub fn into_terms(self) -> BTreeMap<Multi, C> {
        self.terms
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, m: &Multi) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }
    pub fn coeff_ref(&self, m: &Multi) -> Option<&C> {
        self.terms.get(m)
    }
    /// Total degree; -1 is never returned, the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }
    pub fn add_term(&mut self, m: Multi, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_in(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
    pub fn add_term_ref(&mut self, m: Multi, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_in(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
    pub fn add_assign(&mut self, o: &Self) {
        debug_assert_eq!(self.nvars, o.nvars);
        for (m, c) in &o.terms {
            self.add_term_ref(*m, c);
        }
    }
    pub fn add_scaled(&mut self, o: &Self, s: &C) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.times(s));
        }
    }
    pub fn plus(&self, o: &Self) -> Self {
        let mut p = self.clone();
        p.add_assign(o);
        p
    }
    pub fn minus(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(*m, c.negated());
        }
        p
    }
    pub fn negated(&self) -> Self {
        self.map_coeffs(|c| c.negated())
    }
    pub fn times(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                p.add_term(m1.add(m2), c1.times(c2));
            }
        }
        p
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }
    pub fn scale(&self, s: &C) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(*m, c.times(s));
        }
        p
    }
    pub fn scale_q(&self, q: &Rational) -> Self {
        self.map_coeffs(|c| c.scale(q))
    }
    pub fn mul_monomial(&self, m: &Multi) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(k, c)| (k.add(m), c.clone())).collect() }
    }
    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(*m, f(c));
        }
        p
    }
    pub fn map_into<D: Ring>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut p = Poly::<D>::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(*m, f(c));
        }
        p
    }
    pub fn conj(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }
    /// ∂/∂ξ_i
    pub fn partial(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.get(i);
            if e > 0 {
                p.add_term(m.dec(i).unwrap(), c.scale(&int(e as i64)));
            }
        }
        p
    }
    /// ∂^β
    pub fn partial_multi(&self, beta: &Multi) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if let Some(rest) = m.checked_sub(beta) {
                let mut factor = num_bigint::BigInt::from(1);
                for i in 0..self.nvars {
                    for k in 0..beta.get(i) {
                        factor *= m.get(i) - k;
                    }
                }
                p.add_term(rest, c.scale(&Rational::from_integer(factor)));
            }
        }
        p
    }
    /// Euler vector field ξ_i ∂_i: multiplies each monomial by its degree.
    pub fn euler(&self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(*m, c.scale(&int(m.degree() as i64)));
        }
        p
    }
    pub fn laplacian(&self) -> Self {
        let mut p = Self::zero(self.nvars);
        for i in 0..self.nvars {
            p.add_assign(&self.partial(i).partial(i));
        }
        p
    }
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }
    /// Evaluates at a point given by coefficient-ring values.
    pub fn eval(&self, point: &[C]) -> C {
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate().take(self.nvars) {
                let e = m.get(i);
                if e > 0 {
                    t = t.times(&x.pow(e));
                }
            }
            acc.add_in(&t);
        }
        acc
    }
    /// Substitutes polynomials for the variables (composition).
    pub fn compose(&self, subs: &[Poly<C>]) -> Poly<C> {
        let n_out = subs.first().map_or(self.nvars, |s| s.nvars);
        let mut out = Poly::zero(n_out);
        let mut powers: Vec<Vec<Poly<C>>> = subs.iter().map(|s| vec![Poly::one(n_out), s.clone()]).collect();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(n_out, c.clone());
            for (i, pw) in powers.iter_mut().enumerate() {
                let e = m.get(i) as usize;
                while pw.len() <= e {
                    let next = pw.last().unwrap().times(&subs[i]);
                    pw.push(next);
                }
                if e > 0 {
                    t = t.times(&pw[e]);
                }
            }
            out.add_assign(&t);
        }
        out
    }
    /// Re-embeds into a space with more (or equally many) variables.
    pub fn with_nvars(&self, n: usize) -> Self {
        assert!(n >= self.nvars || self.terms.keys().all(|m| (n..self.nvars).all(|i| m.get(i) == 0)));
        Self { nvars: n, terms: self.terms.clone() }
    }
}

impl<S: Scalar> Poly<LambdaPoly<S>> {
    pub fn from_scalar(nvars: usize, s: S) -> Self {
        Self::constant(nvars, LambdaPoly::constant(s))
    }
    pub fn from_rational(nvars: usize, q: Rational) -> Self {
        Self::constant(nvars, LambdaPoly::from_rational(&q))
    }
    pub fn monomial_q(nvars: usize, m: Multi, q: Rational) -> Self {
        Self::monomial(nvars, m, LambdaPoly::from_rational(&q))
    }
    /// Drops every λ-exponent above `order`.
    pub fn lambda_cut(&self, order: u32) -> Self {
        self.map_coeffs(|c| c.cut(order))
    }
    /// λ ∂/∂λ
    pub fn lambda_euler(&self) -> Self {
        self.map_coeffs(|c| c.lambda_euler())
    }
    /// The homogeneity operator λ∂_λ + ξ_i∂_i.
    pub fn homogeneity_op(&self) -> Self {
        self.lambda_euler().plus(&self.euler())
    }
    pub fn lambda_coeff(&self, k: u32) -> Poly<S> {
        let mut p = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(*m, c.coeff(k));
        }
        p
    }
    pub fn max_lambda_order(&self) -> u32 {
        self.terms.values().filter_map(|c| c.highest_order()).max().unwrap_or(0)
    }
    pub fn min_lambda_order(&self) -> Option<u32> {
        self.terms.values().filter_map(|c| c.lowest_order()).min()
    }
    pub fn lift(p: &Poly<S>) -> Self {
        p.map_into(|c| LambdaPoly::constant(c.clone()))
    }
    pub fn scale_scalar(&self, s: &S) -> Self {
        self.map_coeffs(|c| c.scale_scalar(s))
    }
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PolyG<T> {
        let mut p = PolyG::<T>::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(*m, c.map(&f));
        }
        p
    }
    /// Multiplies by λ^k.
    pub fn lambda_shift(&self, k: u32) -> Self {
        self.map_coeffs(|c| c.shift(k))
    }
}

impl<S: Scalar> Poly<S> {
    pub fn lift_lambda(&self) -> PolyG<S> {
        PolyG::lift(self)
    }
}

impl PolyG<GaussianRational> {
    pub fn to_sym(&self) -> PolyG<crate::scalar::Sym> {
        self.map_scalars(|c| c.to_sym())
    }
}

impl<C: Ring> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, o: &Poly<C>) -> Poly<C> {
        self.plus(o)
    }
}
impl<C: Ring> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, o: &Poly<C>) -> Poly<C> {
        self.minus(o)
    }
}
impl<C: Ring> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, o: &Poly<C>) -> Poly<C> {
        self.times(o)
    }
}
impl<C: Ring> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.negated()
    }
}
impl<C: Ring> Add for Poly<C> {
    type Output = Poly<C>;
    fn add(self, o: Poly<C>) -> Poly<C> {
        self.plus(&o)
    }
}
impl<C: Ring> Sub for Poly<C> {
    type Output = Poly<C>;
    fn sub(self, o: Poly<C>) -> Poly<C> {
        self.minus(&o)
    }
}
impl<C: Ring> Mul for Poly<C> {
    type Output = Poly<C>;
    fn mul(self, o: Poly<C>) -> Poly<C> {
        self.times(&o)
    }
}

impl<C: Ring + fmt::Display> Poly<C> {
    /// Renders with the given variable labels, graded by degree.
    pub fn display_with(&self, labels: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<_> = self.terms.keys().collect();
        keys.sort_by(|a, b| a.degree().cmp(&b.degree()).then(b.cmp(a)));
        let mut parts = Vec::new();
        for m in keys {
            let c = &self.terms[m];
            let mut mono = Vec::new();
            for i in 0..self.nvars {
                match m.get(i) {
                    0 => {}
                    1 => mono.push(labels[i].clone()),
                    e => mono.push(format!("{}^{}", labels[i], e)),
                }
            }
            let cs = format!("{c}");
            if mono.is_empty() {
                parts.push(format!("({cs})"));
            } else if cs == "1" {
                parts.push(mono.join("*"));
            } else {
                parts.push(format!("({cs})*{}", mono.join("*")));
            }
        }
        parts.join(" + ")
    }
}

/// Parses sums of products such as `2*x1^2*x3 - 1/2*i*x2 + lambda*h`.
/// Factors are rationals, `i`, `lambda` (optionally `lambda^k`) and
/// variable labels with optional `^k`; the default labels `x1..xn` are
/// always accepted. Parentheses are not supported.
pub fn parse_poly(text: &str, labels: &[String]) -> Result<PolyG<GaussianRational>, crate::error::ParseError> {
    let n = labels.len();
    let err = |reason: String| crate::error::ParseError::Polynomial { input: text.to_string(), reason };
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty input".into()));
    }
    // Split into signed terms at top-level + and −, keeping the `/` of fractions.
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut negative = false;
    for ch in compact.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with('^') {
            terms.push((negative, std::mem::take(&mut cur)));
            negative = ch == '-';
        } else if (ch == '+' || ch == '-') && cur.is_empty() {
            if ch == '-' {
                negative = !negative;
            }
        } else {
            cur.push(ch);
        }
    }
    if cur.is_empty() {
        return Err(err("dangling sign".into()));
    }
    terms.push((negative, cur));
    let defaults = default_labels(n);
    let mut out = PolyG::zero(n);
    for (neg, term) in terms {
        let mut coeff = GaussianRational::real(int(if neg { -1 } else { 1 }));
        let mut lambda = 0u32;
        let mut mono = Multi::zero();
        for factor in term.split('*') {
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<u32>().map_err(|_| err(format!("bad exponent in `{factor}`")))?),
                None => (factor, 1),
            };
            if base.is_empty() {
                return Err(err("empty factor".into()));
            }
            if base.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                let q = crate::scalar::parse_rational(base).map_err(|_| err(format!("bad number `{base}`")))?;
                let g = GaussianRational::real(q);
                for _ in 0..exp {
                    coeff = coeff.times(&g);
                }
            } else if base == "i" {
                coeff = coeff.times(&GaussianRational::i_pow(exp));
            } else if base == "lambda" {
                lambda += exp;
            } else if let Some(k) = labels.iter().position(|l| l == base).or_else(|| defaults.iter().position(|l| l == base)) {
                let e = mono.get(k) + exp;
                if e > u8::MAX as u32 {
                    return Err(err("exponent too large".into()));
                }
                mono.set(k, e);
            } else {
                return Err(err(format!("unknown symbol `{base}`")));
            }
        }
        out.add_term(mono, LambdaPoly::monomial(lambda, coeff));
    }
    Ok(out)
}

pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl<C: Ring + fmt::Display> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_labels(self.nvars)))
    }
}

impl<C: Ring> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c:?}){m:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr<C> {
    nvars: usize,
    terms: Vec<(Vec<u32>, C)>,
}

impl<C: Ring + Serialize> Serialize for Poly<C> {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        PolyRepr { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.to_vec(self.nvars), c.clone())).collect() }
            .serialize(s)
    }
}

impl<'de, C: Ring + Deserialize<'de>> Deserialize<'de> for Poly<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PolyRepr::<C>::deserialize(d)?;
        if r.nvars > MAX_VARS {
            return Err(serde::de::Error::custom("too many variables"));
        }
        let mut p = Poly::zero(r.nvars);
        for (e, c) in r.terms {
            if e.len() != r.nvars || e.iter().any(|&x| x > 255) {
                return Err(serde::de::Error::custom("bad exponent vector"));
            }
            p.add_term(Multi::from_slice(&e), c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational as G;

    type P = Poly<G>;

    #[test]
    fn enumerates_monomials() {
        assert_eq!(Multi::all_of_degree(3, 2).len(), 6);
        assert_eq!(Multi::all_up_to_degree(3, 4).len(), 35);
        assert_eq!(Multi::all_of_degree(1, 3), vec![Multi::from_slice(&[3])]);
    }

    #[test]
    fn derivative_and_euler() {
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let f = &(&x * &x) * &y;
        assert_eq!(f.partial(0), (&x * &y).scale_q(&int(2)));
        assert_eq!(f.euler(), f.scale_q(&int(3)));
        assert_eq!(f.partial_multi(&Multi::from_slice(&[2, 1])), P::constant(2, G::from_rational(&int(2))));
    }

    #[test]
    fn compose_shifts() {
        let x = P::var(1, 0);
        let f = &x * &x;
        let shifted = f.compose(&[&x + &P::one(1)]);
        assert_eq!(shifted, &(&f + &x.scale_q(&int(2))) + &P::one(1));
    }

    #[test]
    fn parse_round_trip() {
        let labels: Vec<String> = ["h", "e", "f"].iter().map(|s| s.to_string()).collect();
        let p = parse_poly("2*h^2*f - 1/2*i*e + lambda + x1", &labels).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.coeff(&Multi::from_slice(&[2, 0, 1])), LambdaPoly::constant(GaussianRational::real(int(2))));
        assert_eq!(p.coeff(&Multi::from_slice(&[0, 1, 0])), LambdaPoly::constant(GaussianRational::new(int(0), crate::scalar::rat(-1, 2))));
        assert_eq!(p.coeff(&Multi::zero()), LambdaPoly::lambda());
        assert!(parse_poly("h +", &labels).is_err());
        assert!(parse_poly("y", &labels).is_err());
        assert_eq!(parse_poly("-h", &labels).unwrap(), parse_poly("0-h", &labels).unwrap());
        assert!(parse_poly("x1^-1", &labels).is_err());
    }
}
