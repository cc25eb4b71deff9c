//! Exact scalars: rationals, Gaussian rationals, symbolic units, and
//! polynomials in the formal parameter λ (with ν = iλ).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::ParseError;

/// Arbitrary precision rational, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats as `p/q`, the canonical wire form.
pub fn fmt_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Accepts `p/q`, `p`, or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    let bad = || ParseError::Rational(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((w, f)) = s.split_once('.') {
        let neg = w.trim_start().starts_with('-');
        let w: BigInt = if w.is_empty() || w == "-" { BigInt::zero() } else { w.parse().map_err(|_| bad())? };
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let frac: BigInt = f.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), f.len());
        let fr = BigRational::new(frac, den);
        let w = BigRational::from_integer(w);
        return Ok(if neg { w - fr } else { w + fr });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// (2m-1)!! with the convention (-1)!! = 1.
pub fn double_factorial_odd(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Serde adapter writing a rational as the string "p/q".
pub mod rational_serde {
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(q))
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Commutative ring operations used by every coefficient type in the crate.
///
/// The method names avoid the `std::ops` names so that concrete types can
/// implement both without call-site ambiguity.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Complex conjugation, with λ and every symbolic unit treated as real.
    fn conj(&self) -> Self;
    fn from_rational(q: &Rational) -> Self;

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }
    fn add_in(&mut self, other: &Self) {
        *self = self.plus(other);
    }
    fn scale(&self, q: &Rational) -> Self {
        self.times(&Self::from_rational(q))
    }
    fn from_int(k: i64) -> Self {
        Self::from_rational(&int(k))
    }
    fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }
}

/// Sign information of a scalar interpreted as a real number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignHint {
    Zero,
    Positive,
    Negative,
    NonReal,
    Undetermined,
}

/// Scalars that can live under λ: the field ℚ(i) and its symbolic extension.
pub trait Scalar: Ring + fmt::Display {
    fn from_gauss(g: &GaussianRational) -> Self;
    fn to_sym(&self) -> Sym;
    /// The value if it is a plain Gaussian rational.
    fn as_gauss(&self) -> Option<GaussianRational>;
    fn sign_hint(&self) -> SignHint;
    fn imag_unit() -> Self {
        Self::from_gauss(&GaussianRational::i())
    }
}

// ---------------------------------------------------------------------------
// Gaussian rationals

/// Element of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }
    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }
    pub fn i() -> Self {
        Self { re: Rational::zero(), im: Rational::one() }
    }
    /// iᵏ
    pub fn i_pow(k: u32) -> Self {
        match k % 4 {
            0 => Self::real(int(1)),
            1 => Self::new(int(0), int(1)),
            2 => Self::real(int(-1)),
            _ => Self::new(int(0), int(-1)),
        }
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    pub fn norm_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }
    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_sq();
        if n.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }
    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inverse().map(|inv| self.times(&inv))
    }
}

impl Ring for GaussianRational {
    fn zero() -> Self {
        Self::real(Rational::zero())
    }
    fn one() -> Self {
        Self::real(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn minus(&self, o: &Self) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn times(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(&self.re * &o.re);
        }
        Self::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
    fn negated(&self) -> Self {
        Self::new(-&self.re, -&self.im)
    }
    fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }
    fn from_rational(q: &Rational) -> Self {
        Self::real(q.clone())
    }
    fn add_in(&mut self, o: &Self) {
        self.re += &o.re;
        self.im += &o.im;
    }
    fn scale(&self, q: &Rational) -> Self {
        Self::new(&self.re * q, &self.im * q)
    }
}

impl Scalar for GaussianRational {
    fn from_gauss(g: &GaussianRational) -> Self {
        g.clone()
    }
    fn to_sym(&self) -> Sym {
        Sym::constant(self.clone())
    }
    fn as_gauss(&self) -> Option<GaussianRational> {
        Some(self.clone())
    }
    fn sign_hint(&self) -> SignHint {
        if !self.im.is_zero() {
            SignHint::NonReal
        } else if self.re.is_zero() {
            SignHint::Zero
        } else if self.re.is_positive() {
            SignHint::Positive
        } else {
            SignHint::Negative
        }
    }
}

impl From<Rational> for GaussianRational {
    fn from(q: Rational) -> Self {
        Self::real(q)
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-&self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}i", self.im)
                }
            }
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}i)", self.re, -&self.im)
                } else {
                    write!(f, "({}+{}i)", self.re, self.im)
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GaussRepr {
    re: String,
    im: String,
}

impl Serialize for GaussianRational {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        GaussRepr { re: fmt_rational(&self.re), im: fmt_rational(&self.im) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = GaussRepr::deserialize(d)?;
        let re = parse_rational(&r.re).map_err(serde::de::Error::custom)?;
        let im = parse_rational(&r.im).map_err(serde::de::Error::custom)?;
        Ok(Self::new(re, im))
    }
}

macro_rules! forward_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                Ring::plus(&self, &o)
            }
        }
        impl<'a> Add<&'a $t> for &'a $t {
            type Output = $t;
            fn add(self, o: &$t) -> $t {
                Ring::plus(self, o)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                Ring::minus(&self, &o)
            }
        }
        impl<'a> Sub<&'a $t> for &'a $t {
            type Output = $t;
            fn sub(self, o: &$t) -> $t {
                Ring::minus(self, o)
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                Ring::times(&self, &o)
            }
        }
        impl<'a> Mul<&'a $t> for &'a $t {
            type Output = $t;
            fn mul(self, o: &$t) -> $t {
                Ring::times(self, o)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                Ring::negated(&self)
            }
        }
    };
}

forward_ops!(GaussianRational);

// ---------------------------------------------------------------------------
// Symbolic scalars

/// Opaque commuting real units.
///
/// `Var(k)` are free real symbols (generic group parameters and points),
/// `ExpVar(k)` stands for e^{Var(k)}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Unit {
    /// √(2π); π itself is √(2π)²/2.
    Sqrt2Pi,
    /// The squared orbit radius.
    R2,
    /// e^{1/2}
    SqrtE,
    Var(u8),
    ExpVar(u8),
}

impl Unit {
    /// Every unit except the free symbols is a positive real number.
    fn is_positive(self) -> bool {
        !matches!(self, Unit::Var(_))
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Sqrt2Pi => write!(f, "sqrt(2pi)"),
            Unit::R2 => write!(f, "r2"),
            Unit::SqrtE => write!(f, "sqrt(e)"),
            Unit::Var(0) => write!(f, "a'"),
            Unit::Var(1) => write!(f, "l'"),
            Unit::Var(k) => write!(f, "s{k}"),
            Unit::ExpVar(0) => write!(f, "E"),
            Unit::ExpVar(k) => write!(f, "exp(s{k})"),
        }
    }
}

/// Laurent monomial in the units, sorted by unit with nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymMonomial(SmallVec<[(Unit, i32); 3]>);

impl SymMonomial {
    pub fn one() -> Self {
        Self::default()
    }
    pub fn unit(u: Unit, e: i32) -> Self {
        let mut m = Self::default();
        if e != 0 {
            m.0.push((u, e));
        }
        m
    }
    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
    pub fn exponent(&self, u: Unit) -> i32 {
        self.0.iter().find(|(v, _)| *v == u).map_or(0, |(_, e)| *e)
    }
    pub fn factors(&self) -> &[(Unit, i32)] {
        &self.0
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut out: SmallVec<[(Unit, i32); 3]> = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            if j == o.0.len() || (i < self.0.len() && self.0[i].0 < o.0[j].0) {
                out.push(self.0[i]);
                i += 1;
            } else if i == self.0.len() || o.0[j].0 < self.0[i].0 {
                out.push(o.0[j]);
                j += 1;
            } else {
                let e = self.0[i].1 + o.0[j].1;
                if e != 0 {
                    out.push((self.0[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Self(out)
    }
    pub fn without(&self, u: Unit) -> Self {
        Self(self.0.iter().copied().filter(|(v, _)| *v != u).collect())
    }
}

impl fmt::Display for SymMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (u, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{u}")?;
            } else {
                write!(f, "{u}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Finite sum of Gaussian-rational multiples of unit monomials.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct Sym {
    terms: BTreeMap<SymMonomial, GaussianRational>,
}

impl Sym {
    pub fn constant(c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(SymMonomial::one(), c);
        }
        Self { terms }
    }
    pub fn rational(q: Rational) -> Self {
        Self::constant(GaussianRational::real(q))
    }
    pub fn unit(u: Unit) -> Self {
        Self::unit_pow(u, 1)
    }
    pub fn unit_pow(u: Unit, e: i32) -> Self {
        Self::term(SymMonomial::unit(u, e), GaussianRational::one())
    }
    pub fn term(m: SymMonomial, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }
    pub fn r2() -> Self {
        Self::unit(Unit::R2)
    }
    pub fn sqrt_2pi() -> Self {
        Self::unit(Unit::Sqrt2Pi)
    }
    /// π = √(2π)²/2
    pub fn pi() -> Self {
        Self::term(SymMonomial::unit(Unit::Sqrt2Pi, 2), GaussianRational::real(rat(1, 2)))
    }
    pub fn var(k: u8) -> Self {
        Self::unit(Unit::Var(k))
    }
    /// e^{m·s_k}
    pub fn exp_var(k: u8, m: i32) -> Self {
        Self::unit_pow(Unit::ExpVar(k), m)
    }
    pub fn terms(&self) -> impl Iterator<Item = (&SymMonomial, &GaussianRational)> {
        self.terms.iter()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn mentions(&self, u: Unit) -> bool {
        self.terms.keys().any(|m| m.exponent(u) != 0)
    }
    fn insert_add(&mut self, m: SymMonomial, c: GaussianRational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_in(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
    /// Replaces a unit by a value. Negative powers require an invertible
    /// constant value.
    pub fn substitute(&self, u: Unit, value: &Sym) -> Option<Sym> {
        let mut out = Sym::default();
        for (m, c) in &self.terms {
            let e = m.exponent(u);
            let rest = Sym::term(m.without(u), c.clone());
            let factor = if e >= 0 {
                value.pow(e as u32)
            } else {
                let inv = value.as_gauss()?.inverse()?;
                Sym::constant(inv).pow((-e) as u32)
            };
            out.add_in(&rest.times(&factor));
        }
        Some(out)
    }
    /// Binds r² to a rational value.
    pub fn bind_r2(&self, r2: &Rational) -> Option<Sym> {
        self.substitute(Unit::R2, &Sym::rational(r2.clone()))
    }
}

impl Ring for Sym {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(GaussianRational::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.add_in(o);
        out
    }
    fn add_in(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            self.insert_add(m.clone(), c.clone());
        }
    }
    fn times(&self, o: &Self) -> Self {
        let mut out = Sym::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert_add(m1.mul(m2), c1.times(c2));
            }
        }
        out
    }
    fn negated(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.negated())).collect() }
    }
    fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect() }
    }
    fn from_rational(q: &Rational) -> Self {
        Self::rational(q.clone())
    }
    fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.scale(q))).collect() }
    }
}

impl Scalar for Sym {
    fn from_gauss(g: &GaussianRational) -> Self {
        Self::constant(g.clone())
    }
    fn to_sym(&self) -> Sym {
        self.clone()
    }
    fn as_gauss(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }
    fn sign_hint(&self) -> SignHint {
        if self.terms.is_empty() {
            return SignHint::Zero;
        }
        if self.terms.values().any(|c| !c.is_real()) {
            return SignHint::NonReal;
        }
        let all_positive_units =
            self.terms.keys().all(|m| m.factors().iter().all(|(u, _)| u.is_positive()));
        if !all_positive_units {
            return SignHint::Undetermined;
        }
        let pos = self.terms.values().all(|c| c.re.is_positive());
        let neg = self.terms.values().all(|c| c.re.is_negative());
        match (pos, neg) {
            (true, _) => SignHint::Positive,
            (_, true) => SignHint::Negative,
            _ => SignHint::Undetermined,
        }
    }
}

forward_ops!(Sym);

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{c}")?;
            } else if *c == GaussianRational::one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SymTermRepr {
    units: Vec<(Unit, i32)>,
    coeff: GaussianRational,
}

impl Serialize for Sym {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        let v: Vec<SymTermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| SymTermRepr { units: m.0.to_vec(), coeff: c.clone() })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sym {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<SymTermRepr>::deserialize(d)?;
        let mut out = Sym::default();
        for t in v {
            let mut m = SymMonomial::one();
            for (u, e) in t.units {
                m = m.mul(&SymMonomial::unit(u, e));
            }
            out.insert_add(m, t.coeff);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// λ-polynomials

/// Polynomial (optionally truncated series) in λ over a scalar ring.
#[derive(Clone)]
pub struct LambdaPoly<S> {
    coeffs: BTreeMap<u32, S>,
    trunc: Option<u32>,
}

/// Ordered-ring sign of a λ-series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesSign {
    Positive,
    Negative,
    Zero,
    NonReal,
    /// Lowest coefficient has no definite sign (only possible with free symbols).
    Undetermined,
}

impl<S: Scalar> LambdaPoly<S> {
    pub fn constant(c: S) -> Self {
        Self::monomial(0, c)
    }
    pub fn monomial(k: u32, c: S) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        Self { coeffs, trunc: None }
    }
    pub fn lambda() -> Self {
        Self::monomial(1, S::one())
    }
    /// ν = iλ
    pub fn nu() -> Self {
        Self::monomial(1, S::imag_unit())
    }
    /// νᵏ = iᵏλᵏ
    pub fn nu_pow(k: u32) -> Self {
        Self::monomial(k, S::from_gauss(&GaussianRational::i_pow(k)))
    }
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, S)>) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, &c);
        }
        out
    }
    pub fn coeff(&self, k: u32) -> S {
        self.coeffs.get(&k).cloned().unwrap_or_else(S::zero)
    }
    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &S)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }
    pub fn truncation(&self) -> Option<u32> {
        self.trunc
    }
    pub fn lowest_order(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }
    pub fn highest_order(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }
    pub fn add_term(&mut self, k: u32, c: &S) {
        if self.trunc.is_some_and(|l| k > l) || c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(k) {
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
    /// Drops every exponent above `order` and records the truncation.
    pub fn truncated(&self, order: u32) -> Self {
        let trunc = Some(self.trunc.map_or(order, |t| t.min(order)));
        Self { coeffs: self.coeffs.range(..=order).map(|(k, c)| (*k, c.clone())).collect(), trunc }
    }
    /// Drops exponents above `order` without recording a truncation.
    pub fn cut(&self, order: u32) -> Self {
        Self { coeffs: self.coeffs.range(..=order).map(|(k, c)| (*k, c.clone())).collect(), trunc: self.trunc }
    }
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LambdaPoly<T> {
        let mut out = LambdaPoly::<T>::zero();
        out.trunc = self.trunc;
        for (k, c) in &self.coeffs {
            out.add_term(*k, &f(c));
        }
        out
    }
    pub fn scale_scalar(&self, s: &S) -> Self {
        let mut out = Self { coeffs: BTreeMap::new(), trunc: self.trunc };
        for (k, c) in &self.coeffs {
            out.add_term(*k, &c.times(s));
        }
        out
    }
    /// Multiplies by λ^k.
    pub fn shift(&self, k: u32) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            trunc: self.trunc.map(|t| t + k),
        }
    }
    /// Divides by λ^k if every exponent is at least k.
    pub fn unshift(&self, k: u32) -> Option<Self> {
        if self.lowest_order().is_some_and(|l| l < k) {
            return None;
        }
        Some(Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e - k, c.clone())).collect(),
            trunc: self.trunc.map(|t| t.saturating_sub(k)),
        })
    }
    /// λ ∂/∂λ (which equals ν ∂/∂ν).
    pub fn lambda_euler(&self) -> Self {
        let mut out = Self { coeffs: BTreeMap::new(), trunc: self.trunc };
        for (k, c) in &self.coeffs {
            out.add_term(*k, &c.scale(&int(*k as i64)));
        }
        out
    }
    pub fn series_sign(&self) -> SeriesSign {
        series_sign(self)
    }
}

/// Sign in the ordered ring ℝ[[λ]]: zero, non-real, or the sign of the
/// lowest nonvanishing coefficient.
pub fn series_sign<S: Scalar>(a: &LambdaPoly<S>) -> SeriesSign {
    if a.coeffs.is_empty() {
        return SeriesSign::Zero;
    }
    if a.coeffs.values().any(|c| c.sign_hint() == SignHint::NonReal) {
        return SeriesSign::NonReal;
    }
    let (_, low) = a.coeffs.iter().next().unwrap();
    match low.sign_hint() {
        SignHint::Positive => SeriesSign::Positive,
        SignHint::Negative => SeriesSign::Negative,
        SignHint::Zero => SeriesSign::Zero,
        SignHint::NonReal => SeriesSign::NonReal,
        SignHint::Undetermined => SeriesSign::Undetermined,
    }
}

pub fn lambda_poly_mul<S: Scalar>(a: &LambdaPoly<S>, b: &LambdaPoly<S>) -> LambdaPoly<S> {
    a.times(b)
}

pub fn lambda_poly_conjugate<S: Scalar>(a: &LambdaPoly<S>) -> LambdaPoly<S> {
    a.conj()
}

fn min_trunc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<S: Scalar> Ring for LambdaPoly<S> {
    fn zero() -> Self {
        Self { coeffs: BTreeMap::new(), trunc: None }
    }
    fn one() -> Self {
        Self::constant(S::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.add_in(o);
        out
    }
    fn add_in(&mut self, o: &Self) {
        let t = min_trunc(self.trunc, o.trunc);
        if t != self.trunc {
            *self = self.truncated(t.unwrap());
        }
        for (k, c) in &o.coeffs {
            self.add_term(*k, c);
        }
    }
    fn times(&self, o: &Self) -> Self {
        let trunc = min_trunc(self.trunc, o.trunc);
        let mut out = Self { coeffs: BTreeMap::new(), trunc };
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &o.coeffs {
                out.add_term(k1 + k2, &c1.times(c2));
            }
        }
        out
    }
    fn negated(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.negated())).collect(), trunc: self.trunc }
    }
    fn conj(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.conj())).collect(), trunc: self.trunc }
    }
    fn from_rational(q: &Rational) -> Self {
        Self::constant(S::from_rational(q))
    }
    fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self { coeffs: BTreeMap::new(), trunc: self.trunc };
        }
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.scale(q))).collect(), trunc: self.trunc }
    }
}

/// Equality of the stored coefficients; truncation markers are ignored.
impl<S: Scalar> PartialEq for LambdaPoly<S> {
    fn eq(&self, o: &Self) -> bool {
        self.coeffs == o.coeffs
    }
}

impl<S: Scalar> fmt::Debug for LambdaPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<S: Scalar> fmt::Display for LambdaPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*lambda")?,
                _ => write!(f, "({c})*lambda^{k}")?,
            }
        }
        if let Some(t) = self.trunc {
            write!(f, " + O(lambda^{})", t + 1)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct LambdaRepr<S> {
    terms: Vec<(u32, S)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    trunc: Option<u32>,
}

impl<S: Scalar + Serialize> Serialize for LambdaPoly<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        LambdaRepr { terms: self.coeffs.iter().map(|(k, c)| (*k, c.clone())).collect(), trunc: self.trunc }
            .serialize(s)
    }
}

impl<'de, S: Scalar + Deserialize<'de>> Deserialize<'de> for LambdaPoly<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LambdaRepr::<S>::deserialize(d)?;
        let mut out = Self::from_terms(r.terms);
        out.trunc = r.trunc;
        if let Some(t) = r.trunc {
            out = out.truncated(t);
        }
        Ok(out)
    }
}

impl<S: Scalar> From<S> for LambdaPoly<S> {
    fn from(c: S) -> Self {
        Self::constant(c)
    }
}

/// Exact conversion of a small rational to f64, used only for display.
pub fn approx(q: &Rational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    type LP = LambdaPoly<GaussianRational>;

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::new(int(re), int(im))
    }

    #[test]
    fn difference_of_squares() {
        let a = LP::from_terms([(0, g(1, 0)), (1, g(1, 0))]);
        let b = LP::from_terms([(0, g(1, 0)), (1, g(-1, 0))]);
        assert_eq!(lambda_poly_mul(&a, &b), LP::from_terms([(0, g(1, 0)), (2, g(-1, 0))]));
    }

    #[test]
    fn nu_squared_is_minus_lambda_squared() {
        assert_eq!(LP::nu().times(&LP::nu()), LP::monomial(2, g(-1, 0)));
        assert_eq!(LP::nu_pow(2), LP::monomial(2, g(-1, 0)));
        assert_eq!(LP::nu_pow(3), LP::monomial(3, g(0, -1)));
    }

    #[test]
    fn truncated_product() {
        let a = LP::from_terms([(0, g(1, 0)), (1, g(1, 0)), (2, g(1, 0))]).truncated(2);
        let b = LP::from_terms([(0, g(1, 0)), (1, g(1, 0))]);
        let p = lambda_poly_mul(&a, &b);
        assert_eq!(p, LP::from_terms([(0, g(1, 0)), (1, g(2, 0)), (2, g(2, 0))]));
        assert_eq!(p.truncation(), Some(2));
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(lambda_poly_conjugate(&LP::nu()), LP::monomial(1, g(0, -1)));
        let real = LP::from_terms([(0, g(1, 0)), (1, g(1, 0))]);
        assert_eq!(lambda_poly_conjugate(&real), real);
        assert_eq!(lambda_poly_conjugate(&LP::monomial(2, g(2, 3))), LP::monomial(2, g(2, -3)));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(series_sign(&LP::zero()), SeriesSign::Zero);
        assert_eq!(series_sign(&LP::from_terms([(2, g(1, 0)), (3, g(-5, 0))])), SeriesSign::Positive);
        assert_eq!(series_sign(&LP::from_terms([(1, g(-1, 0)), (2, g(1, 0))])), SeriesSign::Negative);
        assert_eq!(series_sign(&LP::nu()), SeriesSign::NonReal);
    }

    #[test]
    fn symbolic_units() {
        let e = Sym::exp_var(0, 1);
        let einv = Sym::exp_var(0, -1);
        assert_eq!(e.times(&einv), Sym::one());
        let two_pi = Sym::sqrt_2pi().times(&Sym::sqrt_2pi());
        assert_eq!(two_pi, Sym::pi().scale(&int(2)));
        let r4 = Sym::r2().times(&Sym::r2()).scale(&rat(1, 5));
        assert_eq!(r4.bind_r2(&int(2)).unwrap(), Sym::rational(rat(4, 5)));
        assert_eq!(Sym::r2().scale(&int(3)).sign_hint(), SignHint::Positive);
        assert_eq!(Sym::var(0).sign_hint(), SignHint::Undetermined);
    }

    #[test]
    fn rational_wire_format() {
        assert_eq!(fmt_rational(&rat(-3, 6)), "-1/2");
        assert_eq!(parse_rational("4/6").unwrap(), rat(2, 3));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        let json = serde_json::to_string(&g(1, -2)).unwrap();
        assert_eq!(json, r#"{"re":"1/1","im":"-2/1"}"#);
        let back: GaussianRational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g(1, -2));
        let lp = LP::from_terms([(3, g(0, 1)), (0, g(2, 0))]);
        let s = serde_json::to_string(&lp).unwrap();
        assert_eq!(s, r#"{"terms":[[0,{"re":"2/1","im":"0/1"}],[3,{"re":"0/1","im":"1/1"}]]}"#);
        let back: LP = serde_json::from_str(&s).unwrap();
        assert_eq!(back, lp);
    }
}
