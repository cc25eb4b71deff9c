//! Finite-dimensional Lie algebras given by structure constants.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::MAX_VARS;
use crate::scalar::{fmt_rational, int, parse_rational, Rational};

/// One failed axiom instance (indices are 1-based, as in the input file).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    AntisymmetryViolation { i: usize, j: usize, k: usize },
    JacobiViolation { i: usize, j: usize, k: usize, l: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AntisymmetryViolation { i, j, k } => write!(f, "AntisymmetryViolation({i},{j},{k})"),
            Violation::JacobiViolation { i, j, k, l } => write!(f, "JacobiViolation({i},{j},{k},{l})"),
        }
    }
}

/// Validated Lie algebra. Immutable once built.
#[derive(Clone, PartialEq)]
pub struct LieAlgebra {
    name: String,
    labels: Vec<String>,
    /// `brackets[i][j]` lists (k, c^k_{ij}) with nonzero c.
    brackets: Vec<Vec<Vec<(usize, Rational)>>>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra({}, dim {})", self.name, self.dim())
    }
}

/// Raw constants before validation, 0-based indices.
#[derive(Clone, Debug, Default)]
pub struct RawTable {
    pub name: String,
    pub dim: usize,
    pub labels: Vec<String>,
    pub entries: BTreeMap<(usize, usize, usize), Rational>,
}

impl RawTable {
    pub fn new(name: &str, dim: usize) -> Self {
        Self { name: name.into(), dim, labels: (1..=dim).map(|i| format!("e{i}")).collect(), entries: BTreeMap::new() }
    }
    /// Sets c^k_{ij} (0-based) without implying antisymmetry.
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Rational) -> &mut Self {
        if v.is_zero() {
            self.entries.remove(&(i, j, k));
        } else {
            self.entries.insert((i, j, k), v);
        }
        self
    }
    /// Sets [e_i, e_j] ∋ v e_k together with the antisymmetric partner.
    pub fn bracket(&mut self, i: usize, j: usize, k: usize, v: Rational) -> &mut Self {
        self.set(i, j, k, v.clone());
        self.set(j, i, k, -v)
    }
    fn get(&self, i: usize, j: usize, k: usize) -> Rational {
        self.entries.get(&(i, j, k)).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Checks antisymmetry and Jacobi, listing every violated instance.
pub fn validate(raw: &RawTable) -> std::result::Result<LieAlgebra, Vec<Violation>> {
    let n = raw.dim;
    let mut bad = Vec::new();
    for &(i, j, k) in raw.entries.keys() {
        if i >= n || j >= n || k >= n {
            // Out-of-range entries cannot be expressed as violations of a specific axiom.
            bad.push(Violation::AntisymmetryViolation { i: i + 1, j: j + 1, k: k + 1 });
        }
    }
    if !bad.is_empty() {
        return Err(bad);
    }
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                if !(raw.get(i, j, k) + raw.get(j, i, k)).is_zero() {
                    bad.push(Violation::AntisymmetryViolation { i: i + 1, j: j + 1, k: k + 1 });
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(bad);
    }
    let alg = LieAlgebra::from_raw_unchecked(raw);
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in 0..n {
                    if !alg.jacobiator(i, j, k, l).is_zero() {
                        bad.push(Violation::JacobiViolation { i: i + 1, j: j + 1, k: k + 1, l: l + 1 });
                    }
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(alg)
    } else {
        Err(bad)
    }
}

impl LieAlgebra {
    fn from_raw_unchecked(raw: &RawTable) -> Self {
        let n = raw.dim;
        let mut brackets = vec![vec![Vec::new(); n]; n];
        for ((i, j, k), v) in &raw.entries {
            brackets[*i][*j].push((*k, v.clone()));
        }
        let labels = if raw.labels.len() == n { raw.labels.clone() } else { (1..=n).map(|i| format!("e{i}")).collect() };
        Self { name: raw.name.clone(), labels, brackets }
    }

    /// Validates, collapsing the violation list into an error.
    pub fn from_raw(raw: &RawTable) -> Result<Self> {
        if raw.dim == 0 || raw.dim > MAX_VARS {
            return Err(Error::InvalidAlgebra(format!("dimension must be in 1..={MAX_VARS}, got {}", raw.dim)));
        }
        validate(raw).map_err(|v| {
            Error::InvalidAlgebra(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    /// Nonzero (k, c^k_{ij}).
    #[inline]
    pub fn bracket_of(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.brackets[i][j]
    }
    pub fn c(&self, i: usize, j: usize, k: usize) -> Rational {
        self.brackets[i][j].iter().find(|(kk, _)| *kk == k).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
    }
    pub fn is_abelian(&self) -> bool {
        self.brackets.iter().all(|row| row.iter().all(|b| b.is_empty()))
    }

    /// Bracket of coefficient vectors.
    pub fn bracket_vec(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, c) in &self.brackets[i][j] {
                    out[*k] += &xy * c;
                }
            }
        }
        out
    }

    /// l-component of [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j].
    fn jacobiator(&self, i: usize, j: usize, k: usize, l: usize) -> Rational {
        let mut s = Rational::zero();
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            for (m, v) in &self.brackets[a][b] {
                s += v * self.c(*m, c, l);
            }
        }
        s
    }

    /// Σ_i c^i_{ij}, the trace of ad(e_j).
    pub fn trace_form(&self) -> Vec<Rational> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| self.c(j, i, i)).sum()).collect()
    }

    /// Returns `(true, None)` or `(false, Some((j, tr ad e_j)))` with j 1-based.
    pub fn unimodular(&self) -> (bool, Option<(usize, Rational)>) {
        match self.trace_form().into_iter().enumerate().find(|(_, v)| !v.is_zero()) {
            None => (true, None),
            Some((j, v)) => (false, Some((j + 1, v))),
        }
    }

    /// Matrix of ad(x): column j is [x, e_j].
    pub fn adjoint_matrix(&self, x: &[Rational]) -> Result<Vec<Vec<Rational>>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::WrongDimension { expected: n, got: x.len() });
        }
        let mut m = vec![vec![Rational::zero(); n]; n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for j in 0..n {
                for (k, c) in &self.brackets[i][j] {
                    m[*k][j] += xi * c;
                }
            }
        }
        Ok(m)
    }

    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let n1 = self.dim();
        let n = n1 + other.dim();
        let mut raw = RawTable::new(&format!("{}+{}", self.name, other.name), n);
        raw.labels = self.labels.iter().cloned().chain(other.labels.iter().map(|l| format!("{l}'"))).collect();
        for (off, alg) in [(0, self), (n1, other)] {
            for i in 0..alg.dim() {
                for j in 0..alg.dim() {
                    for (k, v) in &alg.brackets[i][j] {
                        raw.set(i + off, j + off, k + off, v.clone());
                    }
                }
            }
        }
        LieAlgebra::from_raw_unchecked(&raw)
    }

    pub fn to_file(&self) -> AlgebraFile {
        let mut brackets = Vec::new();
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                for (k, v) in &self.brackets[i][j] {
                    brackets.push(BracketEntry { i: i + 1, j: j + 1, k: k + 1, value: fmt_rational(v) });
                }
            }
        }
        AlgebraFile { name: self.name.clone(), dim: self.dim(), basis: Some(self.labels.clone()), brackets }
    }
}

/// On-disk algebra description; indices 1-based, only i &lt; j.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebraFile {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: String,
}

impl AlgebraFile {
    pub fn to_raw(&self) -> Result<RawTable> {
        let mut raw = RawTable::new(&self.name, self.dim);
        if let Some(b) = &self.basis {
            if b.len() != self.dim {
                return Err(Error::InvalidAlgebra(format!("basis has {} labels, dim is {}", b.len(), self.dim)));
            }
            raw.labels = b.clone();
        }
        for e in &self.brackets {
            if e.i >= e.j {
                return Err(Error::InvalidAlgebra(format!("bracket entry ({},{},{}) must have i < j", e.i, e.j, e.k)));
            }
            if e.i == 0 || e.j > self.dim || e.k == 0 || e.k > self.dim {
                return Err(Error::InvalidAlgebra(format!("bracket entry ({},{},{}) out of range", e.i, e.j, e.k)));
            }
            let v = parse_rational(&e.value)?;
            let prev = raw.get(e.i - 1, e.j - 1, e.k - 1);
            raw.bracket(e.i - 1, e.j - 1, e.k - 1, prev + v);
        }
        Ok(raw)
    }

    pub fn to_algebra(&self) -> Result<LieAlgebra> {
        LieAlgebra::from_raw(&self.to_raw()?)
    }

    /// Parses JSON, falling back to TOML.
    pub fn parse(text: &str) -> Result<Self> {
        match serde_json::from_str(text) {
            Ok(f) => Ok(f),
            Err(je) => toml::from_str(text)
                .map_err(|te| Error::Config(format!("algebra file is neither JSON ({je}) nor TOML ({te})"))),
        }
    }
}

fn eps(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

pub fn su2() -> LieAlgebra {
    let mut raw = RawTable::new("su2", 3);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                raw.set(i, j, k, int(eps(i, j, k)));
            }
        }
    }
    LieAlgebra::from_raw(&raw).expect("su2")
}

/// Basis (h, e, f).
pub fn sl2() -> LieAlgebra {
    let mut raw = RawTable::new("sl2", 3);
    raw.labels = vec!["h".into(), "e".into(), "f".into()];
    raw.bracket(0, 1, 1, int(2)).bracket(0, 2, 2, int(-2)).bracket(1, 2, 0, int(1));
    LieAlgebra::from_raw(&raw).expect("sl2")
}

pub fn heisenberg3() -> LieAlgebra {
    let mut raw = RawTable::new("heisenberg3", 3);
    raw.bracket(0, 1, 2, int(1));
    LieAlgebra::from_raw(&raw).expect("heisenberg3")
}

/// [e₁, e₂] = e₂.
pub fn aff1() -> LieAlgebra {
    let mut raw = RawTable::new("aff1", 2);
    raw.bracket(0, 1, 1, int(1));
    LieAlgebra::from_raw(&raw).expect("aff1")
}

pub fn abelian(n: usize) -> LieAlgebra {
    LieAlgebra::from_raw(&RawTable::new(&format!("abelian({n})"), n)).expect("abelian")
}

/// Looks up `su2`, `sl2`, `heisenberg3`, `aff1`, `abelian(n)` or
/// `direct_sum(a,b,...)`.
pub fn catalog(name: &str) -> Result<LieAlgebra> {
    let s = name.trim();
    match s {
        "su2" => return Ok(su2()),
        "sl2" => return Ok(sl2()),
        "heisenberg3" => return Ok(heisenberg3()),
        "aff1" => return Ok(aff1()),
        _ => {}
    }
    if let Some(arg) = s.strip_prefix("abelian(").and_then(|r| r.strip_suffix(')')) {
        let n: usize = arg.trim().parse().map_err(|_| Error::UnknownName(name.into()))?;
        if n == 0 || n > MAX_VARS {
            return Err(Error::InvalidAlgebra(format!("abelian dimension must be in 1..={MAX_VARS}")));
        }
        return Ok(abelian(n));
    }
    if let Some(args) = s.strip_prefix("direct_sum(").and_then(|r| r.strip_suffix(')')) {
        let parts = split_top_level(args);
        if parts.is_empty() {
            return Err(Error::UnknownName(name.into()));
        }
        let mut acc = catalog(parts[0])?;
        for p in &parts[1..] {
            let next = catalog(p)?;
            if acc.dim() + next.dim() > MAX_VARS {
                return Err(Error::InvalidAlgebra(format!("direct sum exceeds {MAX_VARS} dimensions")));
            }
            acc = acc.direct_sum(&next);
        }
        return Ok(acc);
    }
    Err(Error::UnknownName(name.into()))
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(s[start..].trim());
    }
    out
}

pub fn trace(m: &[Vec<Rational>]) -> Rational {
    m.iter().enumerate().map(|(i, r)| r[i].clone()).sum()
}

/// Human-readable summary for the `algebra info` command.
pub fn describe(alg: &LieAlgebra) -> String {
    let mut s = format!("{} (dim {})\n", alg.name(), alg.dim());
    for i in 0..alg.dim() {
        for j in (i + 1)..alg.dim() {
            let b = alg.bracket_of(i, j);
            if b.is_empty() {
                continue;
            }
            let rhs: Vec<String> = b
                .iter()
                .map(|(k, v)| {
                    if v.is_one() {
                        alg.labels[*k].clone()
                    } else if v.is_negative() && (-v).is_one() {
                        format!("-{}", alg.labels[*k])
                    } else {
                        format!("({v}){}", alg.labels[*k])
                    }
                })
                .collect();
            s.push_str(&format!("  [{},{}] = {}\n", alg.labels[i], alg.labels[j], rhs.join(" + ")));
        }
    }
    let (uni, w) = alg.unimodular();
    match w {
        None => s.push_str(&format!("  unimodular: {uni}\n")),
        Some((j, v)) => s.push_str(&format!("  unimodular: false (tr ad {} = {v})\n", alg.labels[j - 1])),
    }
    s
}
