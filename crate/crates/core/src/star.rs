//! Star products on polynomial algebras and the identities they satisfy.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::enveloping::Enveloping;
use crate::error::{Error, Result};
use crate::free_lie::BchSeries;
use crate::lie::LieAlgebra;
use crate::poisson::{gaussian_integral, poisson_bracket, sphere_average, GaussPoly, Radius2};
use crate::poly::{Multi, PolyG};
use crate::scalar::{factorial, int, rat, GaussianRational, LambdaPoly, Rational, Ring, Scalar, Sym};

/// ξ^α ⋆ ξ^β as a list of (γ, k, c) meaning c λ^k ξ^γ.
pub type MonomialProduct = Arc<Vec<(Multi, u32, GaussianRational)>>;

/// A star product on polynomials in `nvars` variables, given on monomials.
pub trait StarProduct: Send + Sync {
    fn nvars(&self) -> usize;
    fn name(&self) -> String;
    fn monomial_product(&self, a: &Multi, b: &Multi) -> MonomialProduct;
}

type PairCache = RwLock<BTreeMap<(Multi, Multi), MonomialProduct>>;

fn cached(cache: &PairCache, a: &Multi, b: &Multi, f: impl FnOnce() -> Vec<(Multi, u32, GaussianRational)>) -> MonomialProduct {
    if let Some(v) = cache.read().unwrap().get(&(*a, *b)) {
        return v.clone();
    }
    let v = Arc::new(f());
    cache.write().unwrap().entry((*a, *b)).or_insert(v).clone()
}

/// The product transported from U(𝔤) by σ_ν.
pub struct Bch {
    env: Arc<Enveloping>,
    cache: PairCache,
}

impl Bch {
    pub fn new(alg: Arc<LieAlgebra>) -> Self {
        Self { env: Arc::new(Enveloping::new(alg)), cache: RwLock::new(BTreeMap::new()) }
    }
    pub fn algebra(&self) -> &LieAlgebra {
        self.env.algebra()
    }
    pub fn enveloping(&self) -> &Enveloping {
        &self.env
    }
    /// Snapshot of every monomial product computed so far, in key order.
    pub fn table(&self) -> Vec<((Multi, Multi), MonomialProduct)> {
        self.cache.read().unwrap().iter().map(|(k, v)| (*k, v.clone())).collect()
    }
    /// Seeds the product table. Entries already present are kept.
    pub fn preload(&self, entries: impl IntoIterator<Item = ((Multi, Multi), Vec<(Multi, u32, GaussianRational)>)>) {
        let mut c = self.cache.write().unwrap();
        for (k, v) in entries {
            c.entry(k).or_insert_with(|| Arc::new(v));
        }
    }
}

impl StarProduct for Bch {
    fn nvars(&self) -> usize {
        self.env.nvars()
    }
    fn name(&self) -> String {
        format!("bch[{}]", self.env.algebra().name())
    }
    fn monomial_product(&self, a: &Multi, b: &Multi) -> MonomialProduct {
        cached(&self.cache, a, b, || {
            let total = a.degree() + b.degree();
            self.env
                .star_monomials(a, b)
                .iter()
                .map(|(g, c)| {
                    let d = total - g.degree();
                    (*g, d, GaussianRational::i_pow(d).scale(c))
                })
                .collect()
        })
    }
}

/// Weyl–Moyal product on ℝ²ⁿ × ℝˢ, coordinates (q¹..qⁿ, p₁..pₙ, s¹..sˢ);
/// the spectator coordinates s commute with everything.
pub struct Moyal {
    pairs: usize,
    spectators: usize,
    cache: PairCache,
}

impl Moyal {
    pub fn new(pairs: usize) -> Self {
        Self::with_spectators(pairs, 0)
    }
    pub fn with_spectators(pairs: usize, spectators: usize) -> Self {
        assert!(2 * pairs + spectators <= crate::poly::MAX_VARS);
        Self { pairs, spectators, cache: RwLock::new(BTreeMap::new()) }
    }
    pub fn pairs(&self) -> usize {
        self.pairs
    }
    pub fn q(&self, k: usize) -> usize {
        k
    }
    pub fn p(&self, k: usize) -> usize {
        self.pairs + k
    }
}

fn falling(e: u32, k: u32) -> i64 {
    (0..k).map(|j| (e - j) as i64).product()
}

impl StarProduct for Moyal {
    fn nvars(&self) -> usize {
        2 * self.pairs + self.spectators
    }
    fn name(&self) -> String {
        if self.spectators == 0 {
            format!("moyal[{}]", self.pairs)
        } else {
            format!("moyal[{}+{}]", self.pairs, self.spectators)
        }
    }
    /// Σ_r (λ/2i)^r / r! P^r with P = ∂_q ⊗ ∂_p − ∂_p ⊗ ∂_q.
    fn monomial_product(&self, a: &Multi, b: &Multi) -> MonomialProduct {
        cached(&self.cache, a, b, || {
            let mut out: BTreeMap<(Multi, u32), GaussianRational> = BTreeMap::new();
            // Current P^r(a, b) as a list of derivative pairs with coefficients.
            let mut layer: BTreeMap<(Multi, Multi), Rational> = BTreeMap::new();
            layer.insert((*a, *b), int(1));
            let half_over_i = GaussianRational::new(int(0), rat(-1, 2));
            let mut r = 0u32;
            while !layer.is_empty() {
                let pref = half_over_i.pow(r).scale(&Rational::new(1.into(), factorial(r)));
                for ((x, y), c) in &layer {
                    let key = (x.add(y), r);
                    let e = out.entry(key).or_insert_with(GaussianRational::zero);
                    e.add_in(&pref.scale(c));
                }
                let mut next: BTreeMap<(Multi, Multi), Rational> = BTreeMap::new();
                for ((x, y), c) in &layer {
                    for k in 0..self.pairs {
                        let (qi, pi) = (self.q(k), self.p(k));
                        for (i, j, sign) in [(qi, pi, 1i64), (pi, qi, -1)] {
                            let (ei, ej) = (x.get(i), y.get(j));
                            if ei == 0 || ej == 0 {
                                continue;
                            }
                            let key = (x.dec(i).unwrap(), y.dec(j).unwrap());
                            let v = c * int(sign * falling(ei, 1) * falling(ej, 1));
                            let slot = next.entry(key).or_insert_with(Rational::zero);
                            *slot += v;
                        }
                    }
                }
                next.retain(|_, v| !v.is_zero());
                layer = next;
                r += 1;
            }
            out.into_iter().filter(|(_, c)| !c.is_zero()).map(|((g, k), c)| (g, k, c)).collect()
        })
    }
}

/// The undeformed commutative product.
pub struct Pointwise(pub usize);

impl StarProduct for Pointwise {
    fn nvars(&self) -> usize {
        self.0
    }
    fn name(&self) -> String {
        format!("pointwise[{}]", self.0)
    }
    fn monomial_product(&self, a: &Multi, b: &Multi) -> MonomialProduct {
        Arc::new(vec![(a.add(b), 0, GaussianRational::one())])
    }
}

/// f ⋆ g, dropping λ-powers above `max_order` if given.
pub fn star_mul_upto<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, g: &PolyG<S>, max_order: Option<u32>) -> PolyG<S> {
    let n = star.nvars();
    debug_assert_eq!(f.nvars(), n);
    debug_assert_eq!(g.nvars(), n);
    let mut out = PolyG::zero(n);
    for (a, ca) in f.terms() {
        for (b, cb) in g.terms() {
            let base = ca.times(cb);
            let low = match base.lowest_order() {
                Some(l) => l,
                None => continue,
            };
            for (gm, k, c) in star.monomial_product(a, b).iter() {
                if let Some(m) = max_order {
                    if low + k > m {
                        continue;
                    }
                }
                let mut t = base.shift(*k).scale_scalar(&S::from_gauss(c));
                if let Some(m) = max_order {
                    t = t.cut(m);
                }
                out.add_term(*gm, t);
            }
        }
    }
    out
}

pub fn star_mul<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, g: &PolyG<S>) -> PolyG<S> {
    star_mul_upto(star, f, g, None)
}

pub fn star_commutator<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, g: &PolyG<S>) -> PolyG<S> {
    star_mul(star, f, g).minus(&star_mul(star, g, f))
}

/// ⋆-power f^{⋆k}.
pub fn star_pow<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, k: u32, max_order: Option<u32>) -> PolyG<S> {
    let mut acc = PolyG::one(star.nvars());
    for _ in 0..k {
        acc = star_mul_upto(star, &acc, f, max_order);
    }
    acc
}

/// σ_ν⁻¹(σ_ν f • σ_ν g) on 𝔤*.
pub fn star_bch<S: Scalar>(bch: &Bch, f: &PolyG<S>, g: &PolyG<S>) -> PolyG<S> {
    star_mul(bch, f, g)
}

pub fn moyal<S: Scalar>(m: &Moyal, f: &PolyG<S>, g: &PolyG<S>) -> PolyG<S> {
    star_mul(m, f, g)
}

// ---------------------------------------------------------------------------
// Identity defects. Each returns the polynomial that must vanish.

pub fn associativity_defect<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, g: &PolyG<S>, h: &PolyG<S>) -> PolyG<S> {
    let l = star_mul(star, &star_mul(star, f, g), h);
    let r = star_mul(star, f, &star_mul(star, g, h));
    l.minus(&r)
}

/// x̂ ⋆ f − f ⋆ x̂ − ν{x̂, f}
pub fn verify_strong_invariance<S: Scalar>(bch: &Bch, x: usize, f: &PolyG<S>) -> PolyG<S> {
    let n = bch.nvars();
    let xh = PolyG::<S>::var(n, x);
    let pb = poisson_bracket(bch.algebra(), &xh, f);
    star_commutator(bch, &xh, f).minus(&pb.map_coeffs(|c| c.times(&LambdaPoly::nu())))
}

/// H(f⋆g) − Hf⋆g − f⋆Hg with H = λ∂_λ + Euler.
pub fn homogeneity_defect<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, g: &PolyG<S>) -> PolyG<S> {
    let fg = star_mul(star, f, g);
    fg.homogeneity_op()
        .minus(&star_mul(star, &f.homogeneity_op(), g))
        .minus(&star_mul(star, f, &g.homogeneity_op()))
}

/// x̂⋆ŷ − ŷ⋆x̂ − ν [x,y]^ for basis vectors.
pub fn covariance_defect<S: Scalar>(bch: &Bch, i: usize, j: usize) -> PolyG<S> {
    let n = bch.nvars();
    let (x, y) = (PolyG::<S>::var(n, i), PolyG::<S>::var(n, j));
    let mut br = PolyG::zero(n);
    for (k, c) in bch.algebra().bracket_of(i, j) {
        br.add_term(Multi::unit(*k), LambdaPoly::nu().scale(c));
    }
    star_commutator(bch, &x, &y).minus(&br)
}

/// conj(f⋆g) − conj(g)⋆conj(f)
pub fn hermitian_defect<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, g: &PolyG<S>) -> PolyG<S> {
    star_mul(star, f, g).conj().minus(&star_mul(star, &g.conj(), &f.conj()))
}

// ---------------------------------------------------------------------------
// Exponential identity

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpBchReport {
    pub order: usize,
    pub success: bool,
    /// First mismatch as (t-degree, λ-order, ξ-degree).
    pub first_mismatch: Option<(usize, u32, u32)>,
    /// (1/ν)H(νx,νy) through the requested order, rendered.
    pub exponent: String,
}

fn linear<S: Scalar>(n: usize, v: &[Rational]) -> PolyG<S> {
    PolyG::from_terms(n, v.iter().enumerate().map(|(i, c)| (Multi::unit(i), LambdaPoly::from_rational(c))))
}

/// Compares e_{tx} ⋆ e_{ty} with exp of (1/ν)H(νtx, νty) coefficient by
/// coefficient in t, using the Lyndon-basis BCH series for H.
pub fn verify_exp_bch(bch: &Bch, x: &[Rational], y: &[Rational], order: usize) -> ExpBchReport {
    type P = PolyG<GaussianRational>;
    let n = bch.nvars();
    let series = BchSeries::new(order);
    let h = series.specialize(bch.algebra(), x, y);
    // z_j = ν^{j−1} Ĥ_j
    let z: Vec<P> = (0..=order)
        .map(|j| if j == 0 { P::zero(n) } else { linear::<GaussianRational>(n, &h[j]).map_coeffs(|c| c.times(&LambdaPoly::nu_pow(j as u32 - 1))) })
        .collect();
    let exponent = {
        let mut acc = P::zero(n);
        for zj in &z {
            acc.add_assign(zj);
        }
        acc.display_with(bch.algebra().labels())
    };
    // exp(z) as a t-series
    let mut rhs = vec![P::zero(n); order + 1];
    rhs[0] = P::one(n);
    let mut pow = rhs.clone();
    for k in 1..=order {
        let mut next = vec![P::zero(n); order + 1];
        for (a, pa) in pow.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, zb) in z.iter().enumerate().skip(1) {
                if a + b <= order {
                    next[a + b].add_assign(&pa.times(zb));
                }
            }
        }
        pow = next;
        let inv = Rational::new(1.into(), factorial(k as u32));
        for m in 0..=order {
            rhs[m].add_assign(&pow[m].scale_q(&inv));
        }
    }
    let xh = linear::<GaussianRational>(n, x);
    let yh = linear::<GaussianRational>(n, y);
    let xp: Vec<P> = (0..=order as u32).map(|a| xh.pow(a).scale_q(&Rational::new(1.into(), factorial(a)))).collect();
    let yp: Vec<P> = (0..=order as u32).map(|b| yh.pow(b).scale_q(&Rational::new(1.into(), factorial(b)))).collect();
    let lhs: Vec<P> = (0..=order)
        .into_par_iter()
        .map(|m| {
            let mut acc = P::zero(n);
            for a in 0..=m {
                acc.add_assign(&star_mul(bch, &xp[a], &yp[m - a]));
            }
            acc
        })
        .collect();
    let mut first = None;
    for m in 0..=order {
        let d = lhs[m].minus(&rhs[m]);
        if let Some(((lo, deg), _)) = d
            .terms()
            .flat_map(|(mm, c)| c.coeffs().map(move |(k, _)| ((k, mm.degree()), ())))
            .min_by_key(|x| x.0)
        {
            first = Some((m, lo, deg));
            break;
        }
    }
    ExpBchReport { order, success: first.is_none(), first_mismatch: first, exponent }
}

// ---------------------------------------------------------------------------
// Differential operators and the cochains C_r

/// Σ_β a_β(ξ) ∂^β
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<S: Scalar> {
    pub nvars: usize,
    pub terms: BTreeMap<Multi, PolyG<S>>,
}

impl<S: Scalar> DiffOp<S> {
    pub fn zero(n: usize) -> Self {
        Self { nvars: n, terms: BTreeMap::new() }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|b| b.degree()).max().unwrap_or(0)
    }
    fn set(&mut self, beta: Multi, a: PolyG<S>) {
        if a.is_zero() {
            self.terms.remove(&beta);
        } else {
            self.terms.insert(beta, a);
        }
    }
    pub fn apply(&self, g: &PolyG<S>) -> PolyG<S> {
        let mut out = PolyG::zero(self.nvars);
        for (beta, a) in &self.terms {
            let d = g.partial_multi(beta);
            if !d.is_zero() {
                out.add_assign(&a.times(&d));
            }
        }
        out
    }
    pub fn apply_gauss(&self, g: &GaussPoly<S>) -> GaussPoly<S> {
        let mut memo: BTreeMap<Multi, GaussPoly<S>> = BTreeMap::new();
        memo.insert(Multi::zero(), g.clone());
        let mut out = PolyG::zero(self.nvars);
        for (beta, a) in &self.terms {
            let d = gauss_partial(&mut memo, beta);
            out.add_assign(&a.times(&d.p));
        }
        GaussPoly::new(out)
    }
}

fn gauss_partial<S: Scalar>(memo: &mut BTreeMap<Multi, GaussPoly<S>>, beta: &Multi) -> GaussPoly<S> {
    if let Some(v) = memo.get(beta) {
        return v.clone();
    }
    let i = beta.first_var().unwrap();
    let prev = gauss_partial(memo, &beta.dec(i).unwrap());
    let v = prev.partial(i);
    memo.insert(*beta, v.clone());
    v
}

/// Which argument of C_r is held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// C_r(f, ·)
    Left,
    /// C_r(·, f)
    Right,
}

/// ν^r coefficient of f ⋆ g, i.e. λ^r coefficient divided by i^r.
pub fn nu_coefficient<S: Scalar>(p: &PolyG<S>, r: u32) -> PolyG<S> {
    let inv = S::from_gauss(&GaussianRational::i_pow(r).inverse().unwrap());
    PolyG::lift(&p.lambda_coeff(r)).scale_scalar(&inv)
}

fn cochain_on<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, beta: &Multi, r: u32, side: Side) -> PolyG<S> {
    let n = star.nvars();
    let mono = PolyG::<S>::monomial(n, *beta, LambdaPoly::one());
    let prod = match side {
        Side::Left => star_mul_upto(star, f, &mono, Some(r)),
        Side::Right => star_mul_upto(star, &mono, f, Some(r)),
    };
    nu_coefficient(&prod, r)
}

/// C_r(f,·) (or C_r(·,f)) as a differential operator of order ≤ r, plus
/// whether it reproduces the cochain on all monomials of degree r+1.
pub fn bidiff_extract_checked<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, r: u32, side: Side) -> (DiffOp<S>, bool) {
    let n = star.nvars();
    let mut op = DiffOp::zero(n);
    for beta in Multi::all_up_to_degree(n, r) {
        let mut target = cochain_on(star, f, &beta, r, side);
        let fact = Rational::from_integer(beta.factorial());
        // Subtract contributions of lower operators: a_{β'} β!/(β−β')! ξ^{β−β'}.
        let mono = PolyG::<S>::monomial(n, beta, LambdaPoly::one());
        target = target.minus(&op.apply(&mono));
        op.set(beta, target.scale_q(&(int(1) / fact)));
    }
    let ok = Multi::all_of_degree(n, r + 1).into_iter().all(|beta| {
        let mono = PolyG::<S>::monomial(n, beta, LambdaPoly::one());
        op.apply(&mono) == cochain_on(star, f, &beta, r, side)
    });
    (op, ok)
}

pub fn bidiff_extract<S: Scalar>(star: &dyn StarProduct, f: &PolyG<S>, r: u32) -> DiffOp<S> {
    bidiff_extract_checked(star, f, r, Side::Left).0
}

// ---------------------------------------------------------------------------
// Closedness

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosednessWitness {
    pub f: Vec<u32>,
    pub g: Vec<u32>,
    pub nu_order: u32,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosednessReport {
    pub star: String,
    pub fdeg: u32,
    pub gdeg: u32,
    pub max_order: u32,
    pub checked: usize,
    pub all_zero: bool,
    /// Operators C_r(f,·) failed the one-extra-degree order check.
    pub order_bound_failures: usize,
    pub witness: Option<ClosednessWitness>,
}

/// ∫ (f ⋆ g − g ⋆ f) dⁿξ for monomials f and Gaussian-class g = ξ^γ e^{−|ξ|²/2},
/// order by order in ν up to `max_order`.
pub fn check_closedness(star: &dyn StarProduct, fdeg: u32, gdeg: u32, max_order: u32) -> ClosednessReport {
    type S = GaussianRational;
    let n = star.nvars();
    let fs = Multi::all_up_to_degree(n, fdeg);
    let gs = Multi::all_up_to_degree(n, gdeg);
    let per_f: Vec<(Vec<(u32, (DiffOp<S>, bool), (DiffOp<S>, bool))>, Multi)> = fs
        .par_iter()
        .map(|a| {
            let f = PolyG::<S>::monomial(n, *a, LambdaPoly::one());
            let ops = (1..=max_order)
                .map(|r| (r, bidiff_extract_checked(star, &f, r, Side::Left), bidiff_extract_checked(star, &f, r, Side::Right)))
                .collect();
            (ops, *a)
        })
        .collect();
    let mut checked = 0;
    let mut failures = 0;
    let mut witness = None;
    for (ops, a) in &per_f {
        for (_, (_, okl), (_, okr)) in ops {
            failures += usize::from(!okl) + usize::from(!okr);
        }
        for gm in &gs {
            let g = GaussPoly::new(PolyG::<S>::monomial(n, *gm, LambdaPoly::one()));
            for (r, (l, _), (rt, _)) in ops {
                checked += 1;
                let diff = l.apply_gauss(&g).p.minus(&rt.apply_gauss(&g).p);
                let v = gaussian_integral(&diff);
                if !v.is_zero() && witness.is_none() {
                    witness = Some(ClosednessWitness { f: a.to_vec(n), g: gm.to_vec(n), nu_order: *r, value: format!("{v}") });
                }
            }
        }
    }
    ClosednessReport {
        star: star.name(),
        fdeg,
        gdeg,
        max_order,
        checked,
        all_zero: witness.is_none(),
        order_bound_failures: failures,
        witness,
    }
}

// ---------------------------------------------------------------------------
// Trace functionals

#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    SphereAverage(Radius2),
    /// sphere_average ∘ Δ^k
    SphereLaplacian(Radius2, u32),
    GaussianIntegral,
    Evaluation(Vec<Rational>),
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::SphereAverage(_) => "sphere-average".into(),
            Functional::SphereLaplacian(_, k) => format!("sphere-average-laplacian^{k}"),
            Functional::GaussianIntegral => "gaussian-integral".into(),
            Functional::Evaluation(p) => {
                format!("evaluation[{}]", p.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","))
            }
        }
    }
    pub fn apply<S: Scalar>(&self, f: &PolyG<S>) -> Result<LambdaPoly<Sym>> {
        match self {
            Functional::SphereAverage(r) => sphere_average(f, r),
            Functional::SphereLaplacian(r, k) => {
                let mut g = f.clone();
                for _ in 0..*k {
                    g = g.laplacian();
                }
                sphere_average(&g, r)
            }
            Functional::GaussianIntegral => Ok(gaussian_integral(f)),
            Functional::Evaluation(p) => {
                if p.len() != f.nvars() {
                    return Err(Error::WrongDimension { expected: f.nvars(), got: p.len() });
                }
                let pt: Vec<LambdaPoly<Sym>> = p.iter().map(LambdaPoly::from_rational).collect();
                Ok(f.map_scalars(|s| s.to_sym()).eval(&pt))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub functional: String,
    pub samples: usize,
    pub poisson_trace: bool,
    pub star_trace: bool,
    /// First failing sample: (index, "poisson" or "star", value).
    pub witness: Option<(usize, String, String)>,
}

/// τ({f,g}) = 0 and τ(f⋆g − g⋆f) = 0 over the sample pairs.
pub fn check_invariant_trace(
    alg: &LieAlgebra,
    tau: &Functional,
    star: &dyn StarProduct,
    samples: &[(PolyG<GaussianRational>, PolyG<GaussianRational>)],
) -> Result<TraceReport> {
    let results: Vec<(LambdaPoly<Sym>, LambdaPoly<Sym>)> = samples
        .par_iter()
        .map(|(f, g)| Ok((tau.apply(&poisson_bracket(alg, f, g))?, tau.apply(&star_commutator(star, f, g))?)))
        .collect::<Result<_>>()?;
    let mut witness = None;
    let mut pt = true;
    let mut st = true;
    for (i, (p, s)) in results.iter().enumerate() {
        if !p.is_zero() {
            pt = false;
            witness.get_or_insert((i, "poisson".to_string(), p.to_string()));
        }
        if !s.is_zero() {
            st = false;
            witness.get_or_insert((i, "star".to_string(), s.to_string()));
        }
    }
    Ok(TraceReport { functional: tau.name(), samples: samples.len(), poisson_trace: pt, star_trace: st, witness })
}

// ---------------------------------------------------------------------------
// Matrices and projections

/// Square matrix with polynomial entries, multiplied through a star product.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOverStar<S: Scalar> {
    pub size: usize,
    pub nvars: usize,
    pub entries: Vec<PolyG<S>>,
}

impl<S: Scalar> MatrixOverStar<S> {
    pub fn from_rows(nvars: usize, rows: Vec<Vec<PolyG<S>>>) -> Self {
        let size = rows.len();
        assert!(rows.iter().all(|r| r.len() == size), "matrix must be square");
        Self { size, nvars, entries: rows.into_iter().flatten().collect() }
    }
    pub fn identity(size: usize, nvars: usize) -> Self {
        Self::scalar(size, nvars, &PolyG::one(nvars))
    }
    pub fn scalar(size: usize, nvars: usize, c: &PolyG<S>) -> Self {
        let mut entries = vec![PolyG::zero(nvars); size * size];
        for i in 0..size {
            entries[i * size + i] = c.clone();
        }
        Self { size, nvars, entries }
    }
    pub fn get(&self, i: usize, j: usize) -> &PolyG<S> {
        &self.entries[i * self.size + j]
    }
    pub fn plus(&self, o: &Self) -> Self {
        Self { entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.plus(b)).collect(), ..self.clone() }
    }
    pub fn minus(&self, o: &Self) -> Self {
        Self { entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.minus(b)).collect(), ..self.clone() }
    }
    pub fn scale_q(&self, q: &Rational) -> Self {
        Self { entries: self.entries.iter().map(|a| a.scale_q(q)).collect(), ..self.clone() }
    }
    pub fn lambda_cut(&self, order: u32) -> Self {
        Self { entries: self.entries.iter().map(|a| a.lambda_cut(order)).collect(), ..self.clone() }
    }
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }
    pub fn is_lambda_free(&self) -> bool {
        self.entries.iter().all(|e| e.max_lambda_order() == 0)
    }
    pub fn lambda_zero_part(&self) -> Self {
        Self { entries: self.entries.iter().map(|a| PolyG::lift(&a.lambda_coeff(0))).collect(), ..self.clone() }
    }
    pub fn mul_with(&self, o: &Self, star: &dyn StarProduct, max_order: Option<u32>) -> Self {
        let s = self.size;
        let mut entries = vec![PolyG::zero(self.nvars); s * s];
        for i in 0..s {
            for j in 0..s {
                let mut acc = PolyG::zero(self.nvars);
                for k in 0..s {
                    acc.add_assign(&star_mul_upto(star, self.get(i, k), o.get(k, j), max_order));
                }
                entries[i * s + j] = acc;
            }
        }
        Self { entries, ..self.clone() }
    }
}

/// Deforms a classical idempotent into a ⋆-idempotent through λ^{order}.
pub fn deform_projection<S: Scalar>(star: &dyn StarProduct, p0: &MatrixOverStar<S>, order: u32) -> Result<MatrixOverStar<S>> {
    let pw = Pointwise(p0.nvars);
    if !p0.is_lambda_free() || p0.mul_with(p0, &pw, None) != *p0 {
        return Err(Error::NotClassicallyIdempotent);
    }
    let (s, n) = (p0.size, p0.nvars);
    let lim = Some(order);
    let one = MatrixOverStar::identity(s, n);
    let half = MatrixOverStar::scalar(s, n, &PolyG::from_rational(n, rat(1, 2)));
    let a = one.plus(&p0.mul_with(p0, star, lim).minus(p0).scale_q(&int(4))).lambda_cut(order);
    // X ⋆ A ⋆ X = 1 by Newton steps; each step at least doubles the valid order.
    let mut x = one.clone();
    for _ in 0..=(order + 1) {
        let xax = x.mul_with(&a, star, lim).mul_with(&x, star, lim);
        let corr = one.minus(&xax).mul_with(&x, star, lim).scale_q(&rat(1, 2));
        if corr.is_zero() {
            break;
        }
        x = x.plus(&corr).lambda_cut(order);
    }
    Ok(half.plus(&p0.minus(&half).mul_with(&x, star, lim)).lambda_cut(order))
}
