//! log(e^X e^Y) in the free Lie algebra on two letters.
//!
//! The series is produced in Dynkin's nested-bracket form, expanded in the
//! free associative algebra, and rewritten in the Lyndon basis. Nothing here
//! touches the enveloping-algebra code, so it can serve as an independent
//! check of the PBW pipeline.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::lie::LieAlgebra;
use crate::scalar::{factorial, int, Rational};

/// Letters: 0 = X, 1 = Y.
pub type Word = Vec<u8>;
pub type FreeAssoc = BTreeMap<Word, Rational>;

fn add_to(map: &mut FreeAssoc, w: Word, c: Rational) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(w.clone()).or_insert_with(Rational::zero);
    *e += c;
    if e.is_zero() {
        map.remove(&w);
    }
}

fn mul(a: &FreeAssoc, b: &FreeAssoc, max_len: usize) -> FreeAssoc {
    let mut out = FreeAssoc::new();
    for (u, c) in a {
        for (v, d) in b {
            if u.len() + v.len() > max_len {
                continue;
            }
            let mut w = u.clone();
            w.extend_from_slice(v);
            add_to(&mut out, w, c * d);
        }
    }
    out
}

fn commutator(a: &FreeAssoc, b: &FreeAssoc) -> FreeAssoc {
    let mut out = mul(a, b, usize::MAX);
    for (w, c) in mul(b, a, usize::MAX) {
        add_to(&mut out, w, -c);
    }
    out
}

fn letter(l: u8) -> FreeAssoc {
    let mut m = FreeAssoc::new();
    m.insert(vec![l], Rational::one());
    m
}

/// log(e^X e^Y) as an associative series, words of length 1..=n.
pub fn log_series(n: usize) -> FreeAssoc {
    // W = e^X e^Y − 1
    let mut w = FreeAssoc::new();
    for a in 0..=n {
        for b in 0..=(n - a) {
            if a + b == 0 {
                continue;
            }
            let word: Word = std::iter::repeat_n(0, a).chain(std::iter::repeat_n(1, b)).collect();
            let c = Rational::new(1.into(), factorial(a as u32) * factorial(b as u32));
            w.insert(word, c);
        }
    }
    let mut out = FreeAssoc::new();
    let mut pow = w.clone();
    for k in 1..=n {
        let sign = if k % 2 == 1 { int(1) } else { int(-1) };
        let c = sign / int(k as i64);
        for (u, v) in &pow {
            add_to(&mut out, u.clone(), &c * v);
        }
        pow = mul(&pow, &w, n);
    }
    out
}

/// Left-normed bracket [[…[x₁,x₂],…],x_m] expanded associatively.
pub fn left_normed(word: &[u8]) -> FreeAssoc {
    let mut acc = letter(word[0]);
    for &l in &word[1..] {
        acc = commutator(&acc, &letter(l));
    }
    acc
}

/// Dynkin form of the degree-m part: (1/m) Σ c_w θ(w) with θ left-normed.
/// Returned as the list (w, c_w/m).
pub fn dynkin_terms(m: usize) -> Vec<(Word, Rational)> {
    log_series(m)
        .into_iter()
        .filter(|(w, _)| w.len() == m)
        .map(|(w, c)| (w, c / int(m as i64)))
        .collect()
}

pub fn is_lyndon(w: &[u8]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// All Lyndon words over {0,1} of length m in increasing order.
pub fn lyndon_words(m: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for bits in 0u32..(1 << m) {
        let w: Word = (0..m).map(|i| ((bits >> (m - 1 - i)) & 1) as u8).collect();
        if is_lyndon(&w) {
            out.push(w);
        }
    }
    out
}

/// Standard factorisation ℓ = uv with v the longest proper Lyndon suffix.
pub fn standard_factorization(w: &[u8]) -> (Word, Word) {
    for i in 1..w.len() {
        if is_lyndon(&w[i..]) {
            return (w[..i].to_vec(), w[i..].to_vec());
        }
    }
    unreachable!("word of length ≥ 2 always has a Lyndon suffix")
}

/// Nested bracket tree for a Lyndon word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bracket {
    Letter(u8),
    Pair(Box<Bracket>, Box<Bracket>),
}

impl Bracket {
    pub fn of_lyndon(w: &[u8]) -> Bracket {
        if w.len() == 1 {
            return Bracket::Letter(w[0]);
        }
        let (u, v) = standard_factorization(w);
        Bracket::Pair(Box::new(Self::of_lyndon(&u)), Box::new(Self::of_lyndon(&v)))
    }
    pub fn expand(&self) -> FreeAssoc {
        match self {
            Bracket::Letter(l) => letter(*l),
            Bracket::Pair(a, b) => commutator(&a.expand(), &b.expand()),
        }
    }
    /// Value in 𝔤 with X ↦ x, Y ↦ y.
    pub fn eval(&self, alg: &LieAlgebra, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        match self {
            Bracket::Letter(0) => x.to_vec(),
            Bracket::Letter(_) => y.to_vec(),
            Bracket::Pair(a, b) => alg.bracket_vec(&a.eval(alg, x, y), &b.eval(alg, x, y)),
        }
    }
}

impl std::fmt::Display for Bracket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bracket::Letter(0) => write!(f, "X"),
            Bracket::Letter(_) => write!(f, "Y"),
            Bracket::Pair(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// Coordinates of a homogeneous Lie element in the Lyndon basis. The least
/// word in the support of P_ℓ is ℓ, so elimination from the smallest word
/// upwards is triangular. Returns `None` if the input is not a Lie element.
pub fn lyndon_coordinates(elem: &FreeAssoc) -> Option<BTreeMap<Word, Rational>> {
    let mut rest = elem.clone();
    let mut out = BTreeMap::new();
    while let Some((w, c)) = rest.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
        if !is_lyndon(&w) {
            return None;
        }
        for (u, d) in Bracket::of_lyndon(&w).expand() {
            add_to(&mut rest, u, -(&c * d));
        }
        out.insert(w, c);
    }
    Some(out)
}

/// The BCH series per degree, each part in Lyndon coordinates.
#[derive(Clone, Debug)]
pub struct BchSeries {
    pub order: usize,
    pub parts: Vec<BTreeMap<Word, Rational>>,
}

impl BchSeries {
    pub fn new(order: usize) -> Self {
        let mut parts = vec![BTreeMap::new()];
        for m in 1..=order {
            let mut lie_elem = FreeAssoc::new();
            for (w, c) in dynkin_terms(m) {
                for (u, d) in left_normed(&w) {
                    add_to(&mut lie_elem, u, &c * d);
                }
            }
            parts.push(lyndon_coordinates(&lie_elem).expect("Dynkin output is a Lie element"));
        }
        Self { order, parts }
    }

    /// H_m(x, y) ∈ 𝔤 for m = 0..=order (index 0 is zero).
    pub fn specialize(&self, alg: &LieAlgebra, x: &[Rational], y: &[Rational]) -> Vec<Vec<Rational>> {
        let n = alg.dim();
        self.parts
            .iter()
            .map(|part| {
                let mut v = vec![Rational::zero(); n];
                for (w, c) in part {
                    for (vi, bi) in v.iter_mut().zip(Bracket::of_lyndon(w).eval(alg, x, y)) {
                        *vi += c * bi;
                    }
                }
                v
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for part in &self.parts {
            for (w, c) in part {
                parts.push(format!("({}){}", crate::scalar::fmt_rational(c), Bracket::of_lyndon(w)));
            }
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie;
    use crate::scalar::rat;

    fn coords(pairs: &[(&[u8], Rational)]) -> BTreeMap<Word, Rational> {
        pairs.iter().map(|(w, c)| (w.to_vec(), c.clone())).collect()
    }

    #[test]
    fn lyndon_counts() {
        // Necklace polynomial for two letters.
        let counts: Vec<usize> = (1..=8).map(|m| lyndon_words(m).len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9, 18, 30]);
    }

    #[test]
    fn low_order_coefficients() {
        let b = BchSeries::new(4);
        assert_eq!(b.parts[1], coords(&[(&[0], int(1)), (&[1], int(1))]));
        assert_eq!(b.parts[2], coords(&[(&[0, 1], rat(1, 2))]));
        assert_eq!(b.parts[3], coords(&[(&[0, 0, 1], rat(1, 12)), (&[0, 1, 1], rat(1, 12))]));
        assert_eq!(b.parts[4], coords(&[(&[0, 0, 1, 1], rat(1, 24))]));
    }

    #[test]
    fn dynkin_agrees_with_log_series() {
        let log = log_series(6);
        for m in 1..=6 {
            let mut via_dynkin = FreeAssoc::new();
            for (w, c) in dynkin_terms(m) {
                for (u, d) in left_normed(&w) {
                    add_to(&mut via_dynkin, u, &c * d);
                }
            }
            let direct: FreeAssoc = log.iter().filter(|(w, _)| w.len() == m).map(|(w, c)| (w.clone(), c.clone())).collect();
            assert_eq!(via_dynkin, direct, "degree {m}");
        }
    }

    #[test]
    fn non_lie_element_rejected() {
        let mut e = FreeAssoc::new();
        e.insert(vec![0, 0], int(1));
        assert!(lyndon_coordinates(&e).is_none());
    }

    #[test]
    fn heisenberg_truncates() {
        let h = lie::heisenberg3();
        let b = BchSeries::new(5);
        let x = vec![int(1), int(0), int(0)];
        let y = vec![int(0), int(1), int(0)];
        let parts = b.specialize(&h, &x, &y);
        assert_eq!(parts[2], vec![int(0), int(0), rat(1, 2)]);
        for p in &parts[3..] {
            assert!(p.iter().all(|c| c.is_zero()));
        }
    }
}
