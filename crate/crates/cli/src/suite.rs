//! Runs the configured identity checks and assembles a [`Report`].

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use lie_star::check::IdentityCheck;
use lie_star::gns::{Gns, DEFAULT_BUDGET};
use lie_star::lie::{validate, LieAlgebra};
use lie_star::orbit::{Orbit, OrbitFn, SymPoly};
use lie_star::poisson::Radius2;
use lie_star::poly::{Multi, PolyG};
use lie_star::scalar::{int, rat, GaussianRational, LambdaPoly, Rational, Ring, Sym};
use lie_star::star::{
    associativity_defect, check_closedness, check_invariant_trace, covariance_defect, deform_projection,
    hermitian_defect, homogeneity_defect, star_mul_upto, verify_exp_bch, verify_strong_invariance, Bch, Functional,
    MatrixOverStar, Moyal, StarProduct,
};
use lie_star::universal::{
    exp_poly_samples, ActionModel, AxbModel, ExpPoly, GroupModel, PointFunctional, Translations, XFun,
};
use lie_star::{Error, Result};
use rayon::prelude::*;

use crate::cache::Cache;
use crate::config::{StarSelector, SuiteConfig};
use crate::report::{Record, Report};
use crate::sampling::{monomials, pairs, pairs_each, pick, triples};

type P = PolyG<GaussianRational>;

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    scope: String,
    alg: Arc<LieAlgebra>,
    bch: Arc<Bch>,
}

fn mono(n: usize, m: &Multi) -> P {
    P::monomial(n, *m, LambdaPoly::one())
}

fn smono(n: usize, m: &Multi) -> SymPoly {
    SymPoly::monomial(n, *m, LambdaPoly::one())
}

fn gauss(re: Rational, im: Rational) -> LambdaPoly<GaussianRational> {
    LambdaPoly::constant(GaussianRational::new(re, im))
}

/// Runs `check` on each case in parallel and records in enumeration order.
fn run_cases<T: Sync>(
    name: &str,
    cases: &[T],
    check: impl Fn(&T) -> Option<String> + Sync + Send,
) -> IdentityCheck {
    let results: Vec<Option<String>> = cases.par_iter().map(check).collect();
    let mut c = IdentityCheck::new(name);
    for r in results {
        let ok = r.is_none();
        c.record(ok, || r.unwrap_or_default());
    }
    c
}

fn check_zero(p: &P, labels: &[String], what: impl FnOnce() -> String) -> Option<String> {
    if p.is_zero() {
        None
    } else {
        Some(format!("{}: {}", what(), p.display_with(labels)))
    }
}

fn describe(ms: &[&Multi], n: usize, labels: &[String]) -> String {
    ms.iter().map(|m| mono(n, m).display_with(labels)).collect::<Vec<_>>().join(", ")
}

impl Ctx<'_> {
    fn rec(&self, c: IdentityCheck, anchor: &str) -> Record {
        Record::from_check(&self.scope, c, anchor)
    }
    fn name(&self, id: &str) -> String {
        format!("{}/{id}", self.scope)
    }
    fn n(&self) -> usize {
        self.alg.dim()
    }
    fn labels(&self) -> &[String] {
        self.alg.labels()
    }
    fn cap(&self) -> usize {
        self.cfg.samples
    }
    fn pick<T>(&self, items: Vec<T>, label: &str) -> Vec<T> {
        pick(items, self.cfg.seed, &format!("{}/{label}", self.scope), self.cap())
    }
    /// Full enumeration in seeded order.
    fn all<T>(&self, items: Vec<T>, label: &str) -> Vec<T> {
        pick(items, self.cfg.seed, &format!("{}/{label}", self.scope), usize::MAX)
    }

    fn run(&self, id: &str) -> Result<Vec<Record>> {
        match self.cfg.star {
            StarSelector::Bch => self.bch_identity(id),
            StarSelector::Moyal => self.moyal_identity(id),
            StarSelector::Orbit => self.orbit_identity(id),
            StarSelector::Gns => self.gns_identity(id),
            StarSelector::Translations => self.translations_identity(id),
            StarSelector::Axb => self.axb_identity(id),
        }
    }

    // -----------------------------------------------------------------------
    // BCH

    fn bch_identity(&self, id: &str) -> Result<Vec<Record>> {
        let (n, labels, bch) = (self.n(), self.labels(), &*self.bch);
        let deg = self.cfg.degree;
        let star: &dyn StarProduct = bch;
        Ok(match id {
            "structure" => {
                let v = validate(&self.alg.to_file().to_raw()?);
                let defect = v.as_ref().err().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "));
                vec![Record::new(self.name("structure"), "antisymmetry and Jacobi identity", n * n * n, v.is_ok(), defect)]
            }
            "unimodular" => {
                let (ok, w) = self.alg.unimodular();
                let defect = w.map(|(j, c)| format!("tr ad {} = {c}", labels[j - 1]));
                vec![Record::new(self.name("unimodular"), "tr ad x = 0 for every basis element", n, ok, defect)]
            }
            "assoc" => {
                let cases = self.all(triples(n, deg), "assoc");
                let c = run_cases("bch-associativity", &cases, |(a, b, c)| {
                    let d = associativity_defect(star, &mono(n, a), &mono(n, b), &mono(n, c));
                    check_zero(&d, labels, || describe(&[a, b, c], n, labels))
                });
                vec![self.rec(c, "(f ⋆ g) ⋆ h = f ⋆ (g ⋆ h) on monomial triples")]
            }
            "strong-inv" => {
                let cases: Vec<(usize, Multi)> =
                    (0..n).flat_map(|x| monomials(n, deg).into_iter().map(move |m| (x, m))).collect();
                let c = run_cases("bch-strong-invariance", &cases, |(x, m)| {
                    let d = verify_strong_invariance(bch, *x, &mono(n, m));
                    check_zero(&d, labels, || format!("x = {}, f = {}", labels[*x], describe(&[m], n, labels)))
                });
                vec![self.rec(c, "x ⋆ f − f ⋆ x = ν{x, f} for linear x")]
            }
            "homog" => {
                let cases: Vec<(usize, Multi)> =
                    (0..n).flat_map(|x| monomials(n, deg).into_iter().map(move |m| (x, m))).collect();
                let c = run_cases("bch-homogeneity", &cases, |(x, m)| {
                    let d = homogeneity_defect(star, &P::var(n, *x), &mono(n, m));
                    check_zero(&d, labels, || format!("x = {}, f = {}", labels[*x], describe(&[m], n, labels)))
                });
                vec![self.rec(c, "ν∂_ν + E is a derivation of the product")]
            }
            "covariance" => {
                let cases: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
                let c = run_cases("bch-covariance", &cases, |(i, j)| {
                    let d = covariance_defect::<GaussianRational>(bch, *i, *j);
                    check_zero(&d, labels, || format!("({}, {})", labels[*i], labels[*j]))
                });
                vec![self.rec(c, "linear functions commute up to ν times their bracket")]
            }
            "hermitian" => {
                let cases = self.pick(pairs_each(n, deg), "hermitian");
                let c = run_cases("bch-hermitian", &cases, |(a, b)| {
                    let f = mono(n, a).plus(&mono(n, b).scale(&gauss(int(0), int(1))));
                    let g = mono(n, b).plus(&mono(n, a).scale(&gauss(rat(1, 2), int(-1))));
                    let d = hermitian_defect(star, &f, &g);
                    check_zero(&d, labels, || format!("f = {}, g = {}", f.display_with(labels), g.display_with(labels)))
                });
                vec![self.rec(c, "conj(f ⋆ g) = conj g ⋆ conj f")]
            }
            "exp-bch" => {
                let order = self.cfg.order.unwrap_or(5) as usize;
                let mut cases: Vec<(Vec<Rational>, Vec<Rational>)> = Vec::new();
                let unit = |i: usize| (0..n).map(|k| int((k == i) as i64)).collect::<Vec<_>>();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            cases.push((unit(i), unit(j)));
                        }
                    }
                }
                cases.push(((0..n).map(|k| int(k as i64 + 1)).collect(), (0..n).map(|k| rat(1 - 2 * (k as i64 % 2), 2)).collect()));
                let c = run_cases("bch-exp-bch", &cases, |(x, y)| {
                    let r = verify_exp_bch(bch, x, y, order);
                    r.first_mismatch.map(|(t, l, d)| format!("x = {x:?}, y = {y:?}: mismatch at t^{t}, ν^{l}, degree {d}"))
                });
                vec![self.rec(c, "e_x ⋆ e_y = e_{BCH(x, y)} through the series order")]
            }
            "closedness" => {
                let order = self.cfg.order.unwrap_or(deg);
                let r = check_closedness(star, deg, 2.min(deg), order);
                let defect = r.witness.as_ref().map(|w| {
                    format!("∫[ξ^{:?}, ξ^{:?} e^(−|ξ|²/2)] has ν^{} coefficient {}", w.f, w.g, w.nu_order, w.value)
                });
                let holds = r.all_zero && r.order_bound_failures == 0;
                vec![Record::new(self.name("closedness"), "Lebesgue integral kills commutators with Gaussian-class functions", r.checked, holds, defect)]
            }
            "trace" | "trace-evaluation" => {
                if n != 3 {
                    return Err(Error::Config("sphere functionals need a three-dimensional algebra".into()));
                }
                let cases: Vec<(P, P)> =
                    self.pick(pairs_each(n, deg), "trace").iter().map(|(a, b)| (mono(n, a), mono(n, b))).collect();
                let taus = if id == "trace" {
                    vec![Functional::SphereAverage(self.cfg.r2.clone()), Functional::SphereLaplacian(self.cfg.r2.clone(), 1)]
                } else {
                    vec![Functional::Evaluation(vec![int(1), int(0), int(0)])]
                };
                let mut out = Vec::new();
                for tau in taus {
                    let r = check_invariant_trace(&self.alg, &tau, star, &cases)?;
                    let defect = r.witness.map(|(i, kind, v)| {
                        let (f, g) = &cases[i];
                        format!("{kind} commutator of {} and {}: {v}", f.display_with(labels), g.display_with(labels))
                    });
                    out.push(Record::new(
                        self.name(&format!("trace[{}]", tau.name())),
                        "functional vanishes on Poisson brackets and ⋆-commutators",
                        r.samples,
                        r.poisson_trace && r.star_trace,
                        defect,
                    ));
                }
                out
            }
            _ => unreachable!("validated identity"),
        })
    }

    // -----------------------------------------------------------------------
    // Moyal

    fn moyal_identity(&self, id: &str) -> Result<Vec<Record>> {
        let k = self.cfg.pairs;
        let m = Moyal::new(k);
        let n = 2 * k;
        let labels: Vec<String> = (0..k).map(|i| format!("q{}", i + 1)).chain((0..k).map(|i| format!("p{}", i + 1))).collect();
        let deg = self.cfg.degree;
        Ok(match id {
            "assoc" => {
                let cases = self.all(triples(n, deg), "assoc");
                let c = run_cases("moyal-associativity", &cases, |(a, b, c)| {
                    let d = associativity_defect(&m, &mono(n, a), &mono(n, b), &mono(n, c));
                    check_zero(&d, &labels, || describe(&[a, b, c], n, &labels))
                });
                vec![self.rec(c, "(f ⋆ g) ⋆ h = f ⋆ (g ⋆ h) on monomial triples")]
            }
            "hermitian" => {
                let cases = self.pick(pairs_each(n, deg), "hermitian");
                let c = run_cases("moyal-hermitian", &cases, |(a, b)| {
                    let f = mono(n, a).plus(&mono(n, b).scale(&gauss(int(0), int(1))));
                    let d = hermitian_defect(&m, &f, &mono(n, b));
                    check_zero(&d, &labels, || format!("f = {}", f.display_with(&labels)))
                });
                vec![self.rec(c, "conj(f ⋆ g) = conj g ⋆ conj f")]
            }
            "projection" => {
                let order = self.cfg.order.unwrap_or(4);
                let p0 = projection_example();
                let one = Moyal::new(1);
                let p = deform_projection(&one, &p0, order)?;
                let idem = p.mul_with(&p, &one, Some(order)).minus(&p).lambda_cut(order);
                let classical = p.lambda_zero_part() == p0;
                vec![
                    Record::new(
                        self.name("projection-idempotent"),
                        "P ⋆ P = P through the order, for P deforming [[1+qp, −p], [q+q²p, −qp]]",
                        4,
                        idem.is_zero(),
                        (!idem.is_zero()).then(|| format!("{idem:?}")),
                    ),
                    Record::new(self.name("projection-classical-limit"), "P at λ = 0 is the classical projection", 4, classical, None),
                ]
            }
            _ => unreachable!("validated identity"),
        })
    }

    // -----------------------------------------------------------------------
    // Orbit

    fn orbit(&self) -> Result<Orbit> {
        Orbit::new(self.bch.clone(), self.cfg.r2.clone(), self.cfg.order.expect("validated"))
    }

    fn orbit_identity(&self, id: &str) -> Result<Vec<Record>> {
        let o = self.orbit()?;
        let deg = self.cfg.degree;
        Ok(match id {
            "koszul" => {
                let mut fs: Vec<SymPoly> = self.pick(monomials(3, deg), "koszul-f").iter().map(|m| smono(3, m)).collect();
                // Mixed-degree sums exercise the homotopy beyond monomials.
                let extra = self.pick(pairs_each(3, deg), "koszul-sum");
                fs.extend(extra.iter().take(self.cap() / 4).map(|(a, b)| smono(3, a).plus(&smono(3, b))));
                let qs: Vec<SymPoly> =
                    self.pick(monomials(3, deg.saturating_sub(2)), "koszul-q").iter().map(|m| smono(3, m)).collect();
                o.check_koszul(&fs, &qs).into_iter().map(|c| self.rec(c, "Koszul homotopy identities, undeformed and deformed")).collect()
            }
            "star" => {
                let basis = o.harmonic_basis(deg);
                let mut all = Vec::new();
                for a in &basis {
                    for b in &basis {
                        for c in &basis {
                            all.push((a.clone(), b.clone(), c.clone()));
                        }
                    }
                }
                let triples = self.pick(all, "orbit-star");
                let shifts: Vec<SymPoly> =
                    [[1, 0, 0], [0, 1, 1], [0, 0, 2], [0, 0, 0]].iter().map(|e| smono(3, &Multi::from_slice(e))).collect();
                o.check_star_orbit(&triples, &shifts).into_iter().map(|c| self.rec(c, "reduced product on harmonic classes")).collect()
            }
            "trace" | "positivity" => {
                let (pairs, family) = if id == "trace" {
                    let p = self.pick(pairs_each(3, deg), "orbit-trace");
                    (p.iter().map(|(a, b)| (smono(3, a), smono(3, b))).collect::<Vec<_>>(), Vec::new())
                } else {
                    (Vec::new(), positivity_family(&o))
                };
                o.check_trace(&pairs, &family)?
                    .into_iter()
                    .filter(|c| c.identity == if id == "trace" { "orbit-trace" } else { "orbit-positivity" })
                    .map(|c| self.rec(c, "orbit trace: vanishes on commutators, nonnegative on conj f ⋆ f"))
                    .collect()
            }
            _ => unreachable!("validated identity"),
        })
    }

    // -----------------------------------------------------------------------
    // GNS

    fn gns_identity(&self, id: &str) -> Result<Vec<Record>> {
        let o = self.orbit()?;
        let g = Gns::new(&o, DEFAULT_BUDGET);
        let cap = self.cap().min(8);
        let vectors: Vec<OrbitFn> = pick(monomials(3, self.cfg.degree), self.cfg.seed, &format!("{}/vectors", self.scope), 5)
            .iter()
            .map(|m| o.restrict(&smono(3, m)))
            .collect();
        let anchor = "GNS representation on orbit functions";
        let rec = |cs: Vec<IdentityCheck>| cs.into_iter().map(|c| self.rec(c, anchor)).collect::<Vec<_>>();
        Ok(match id {
            "representation" => {
                let ps = pick(pairs_each(3, 1), self.cfg.seed, &format!("{}/pairs", self.scope), cap);
                let ps: Vec<(SymPoly, SymPoly)> = ps.iter().map(|(a, b)| (smono(3, a), smono(3, b))).collect();
                rec(g.check_representation(&ps, &vectors)?)
            }
            "commutant" => {
                let mut c = IdentityCheck::new("commutant");
                for (a, b) in [([1, 0, 0], [0, 1, 0]), ([0, 0, 1], [1, 1, 0]), ([0, 2, 0], [0, 0, 1])] {
                    let (f, h) = (smono(3, &Multi::from_slice(&a)), smono(3, &Multi::from_slice(&b)));
                    c.merge(g.check_commutant(&f, &h, &vectors)?);
                }
                rec(vec![c])
            }
            "g-relations" => {
                let mut acc: Vec<IdentityCheck> = Vec::new();
                for x in 0..3 {
                    for y in 0..3 {
                        let cs = g.check_g_relations(x, y, &vectors)?;
                        if acc.is_empty() {
                            acc = cs;
                        } else {
                            for (a, c) in acc.iter_mut().zip(cs) {
                                a.merge(c);
                            }
                        }
                    }
                }
                rec(acc)
            }
            "inner-product" => rec(g.check_inner_product(&vectors)),
            _ => unreachable!("validated identity"),
        })
    }

    // -----------------------------------------------------------------------
    // Universal deformation: translations

    fn translations_identity(&self, id: &str) -> Result<Vec<Record>> {
        let tr = Translations::new(self.cfg.pairs, self.cfg.spectators);
        let (gd, xd) = (tr.gdim(), tr.xdim());
        let deg = self.cfg.degree;
        let xm = |m: &Multi| smono(xd, m);
        let gm = |m: &Multi| smono(gd, m);
        let anchor = "universal deformation along the translation action";
        let rec = |c: IdentityCheck| self.rec(c, anchor);
        Ok(match id {
            "group" => vec![rec(tr.action().group().check_axioms()), rec(tr.action().check_axioms())],
            "moyal" => {
                let ps: Vec<_> = self.all(pairs(xd, deg), "moyal").iter().map(|(a, b)| (xm(a), xm(b))).collect();
                vec![rec(tr.check_reproduces_moyal(&ps))]
            }
            "assoc" => {
                let ts: Vec<_> =
                    self.pick(triples(xd, deg), "assoc").iter().map(|(a, b, c)| (xm(a), xm(b), xm(c))).collect();
                vec![rec(tr.check_associativity(&ts))]
            }
            "homomorphism" => {
                let ps: Vec<_> = self.pick(pairs(xd, deg), "hom").iter().map(|(a, b)| (xm(a), xm(b))).collect();
                vec![rec(tr.check_homomorphism(&ps))]
            }
            "tangential" => {
                let consts: Vec<SymPoly> = monomials(self.cfg.spectators, 2)
                    .iter()
                    .map(|m| {
                        let mut e = vec![0u32; xd];
                        for s in 0..self.cfg.spectators {
                            e[2 * self.cfg.pairs + s] = m.get(s);
                        }
                        xm(&Multi::from_slice(&e))
                    })
                    .collect();
                let others: Vec<SymPoly> = self.pick(monomials(xd, deg), "tangential").iter().map(xm).collect();
                vec![rec(tr.check_orbit_tangential(&consts, &others))]
            }
            "alpha" => {
                let fs: Vec<SymPoly> = self.pick(monomials(xd, deg), "alpha").iter().map(xm).collect();
                vec![rec(tr.check_alpha_relations(&fs))]
            }
            "bi-invariance" => {
                let ps: Vec<_> = self.pick(pairs(gd, deg), "bi").iter().map(|(a, b)| (gm(a), gm(b))).collect();
                let r = tr.check_bi_invariance(&Moyal::with_spectators(self.cfg.pairs, gd), &ps);
                let mut v = vec![rec(r.left), rec(r.right)];
                v.extend(r.induced.map(rec));
                v
            }
            "left-universal" => {
                let ps: Vec<_> = self.pick(pairs(gd, deg), "left").iter().map(|(a, b)| (gm(a), gm(b))).collect();
                vec![rec(tr.check_left_universal(&ps))]
            }
            "trace" => {
                let order = self.cfg.order.unwrap_or(4);
                let base = self.pick(pairs_each(xd, 2), "trace");
                let mut ps = Vec::new();
                for (k, (a, b)) in base.iter().enumerate() {
                    let (f, g) = (xm(a), xm(b));
                    ps.push(match k % 3 {
                        0 => (XFun::damped(f, int(1)), XFun::poly(g)),
                        1 => (XFun::poly(f), XFun::damped(g, int(1))),
                        _ => (XFun::damped(f, rat(1, 2)), XFun::damped(g, rat(1, 2))),
                    });
                }
                vec![rec(tr.check_induced_trace(&PointFunctional::Symbolic, &ps, Some(order))?)]
            }
            "positivity" => {
                let order = self.cfg.order.unwrap_or(4);
                let pts: Vec<(Rational, Vec<Rational>)> = (0..3)
                    .map(|k| (rat(1, k + 1), (0..xd).map(|i| int((i as i64 + k) % 3 - 1)).collect()))
                    .collect();
                let phi = PointFunctional::Evaluations(pts);
                let i = LambdaPoly::constant(Sym::constant(GaussianRational::i()));
                let samples: Vec<XFun> = self
                    .pick(pairs_each(xd, 2), "positivity")
                    .iter()
                    .map(|(a, b)| XFun::damped(xm(a).plus(&xm(b).scale(&i)), rat(1, 2)))
                    .collect();
                vec![rec(tr.check_induced_positivity(&phi, &samples, order)?)]
            }
            _ => unreachable!("validated identity"),
        })
    }

    // -----------------------------------------------------------------------
    // Universal deformation: ax+b

    fn axb_identity(&self, id: &str) -> Result<Vec<Record>> {
        let m = AxbModel::with(self.cfg.law, self.cfg.sign, self.cfg.order.expect("validated"));
        let deg = self.cfg.degree;
        let anchor = "left-invariant product on the ax+b group";
        let rec = |c: IdentityCheck| self.rec(c, anchor);
        let plain = exp_poly_samples(1, deg);
        let small = exp_poly_samples(1, deg.min(2));
        let sample_pairs = |label: &str| {
            let mut all = Vec::new();
            for f in &small {
                for g in &small {
                    all.push((f.clone(), g.clone()));
                }
            }
            self.pick(all, label)
        };
        Ok(match id {
            "group" => vec![rec(GroupModel::Axb(self.cfg.law).check_axioms()), rec(ActionModel::AxbOnItself(self.cfg.law).check_axioms())],
            "t" => {
                let mut s = plain.clone();
                s.extend(small.iter().map(|f| f.clone().damped(int(1))));
                vec![rec(m.check_t(&s))]
            }
            "assoc" => {
                let tiny = exp_poly_samples(1, 1);
                let mut all = Vec::new();
                for f in &tiny {
                    for g in &tiny {
                        for h in &tiny {
                            all.push((f.clone(), g.clone(), h.clone()));
                        }
                    }
                }
                vec![rec(m.check_associativity(&self.pick(all, "assoc")))]
            }
            "hermitian" => {
                let i = ExpPoly::sym(Sym::constant(GaussianRational::i()));
                let ps: Vec<(ExpPoly, ExpPoly)> =
                    sample_pairs("hermitian").into_iter().map(|(f, g)| (f.plus(&g.times(&i)), g)).collect();
                m.check_hermitian_and_bracket(&ps).into_iter().map(rec).collect()
            }
            "frame" => {
                let mut out = Vec::new();
                for x in m.frame() {
                    let name = self.name(&format!("inner-derivation[{}]", x.name));
                    let what = "right-invariant vector field is an inner derivation of the product";
                    out.push(match m.check_inner_derivation(&x) {
                        Ok(d) => {
                            let defect = (!d.residual_zero).then(|| format!("residual with h = {}", d.h));
                            Record::new(name, what, d.tests, d.residual_zero, defect)
                        }
                        Err(e) => Record::new(name, what, 0, false, Some(e.to_string())),
                    });
                }
                if let Ok((_, c)) = m.check_frame() {
                    out.push(rec(c));
                }
                out
            }
            "bi-invariance" => {
                let r = m.check_bi_invariance(&sample_pairs("bi"))?;
                vec![rec(r.left), rec(r.right).expecting_violation()]
            }
            "trace" => {
                let mut ps = Vec::new();
                for (k, (f, g)) in sample_pairs("trace").into_iter().enumerate() {
                    ps.push(if k % 2 == 0 { (f.damped(int(1)), g) } else { (f.damped(rat(1, 2)), g.damped(rat(1, 2))) });
                }
                vec![rec(m.check_trace(&ps)?)]
            }
            "positivity" => {
                let i = ExpPoly::sym(Sym::constant(GaussianRational::i()));
                let gs: Vec<ExpPoly> = sample_pairs("positivity")
                    .into_iter()
                    .map(|(f, g)| f.plus(&g.times(&i)).damped(rat(1, 2)))
                    .collect();
                vec![rec(m.check_positivity(&gs)?)]
            }
            "alpha" => vec![rec(m.check_alpha_relations(&small)?)],
            _ => unreachable!("validated identity"),
        })
    }
}

/// The classical projection [[1+qp, −p], [q+q²p, −qp]] in Moyal variables (q, p).
pub fn projection_example() -> MatrixOverStar<GaussianRational> {
    let v = |e: [u32; 2], c: i64| P::monomial(2, Multi::from_slice(&e), LambdaPoly::from_rational(&int(c)));
    MatrixOverStar::from_rows(
        2,
        vec![
            vec![v([0, 0], 1).plus(&v([1, 1], 1)), v([0, 1], -1)],
            vec![v([1, 0], 1).plus(&v([2, 1], 1)), v([1, 1], -1)],
        ],
    )
}

/// Twenty orbit positivity samples: ten polynomials, including complex
/// combinations, and ten elements J ⋆ g of the vanishing ideal.
pub fn positivity_family(o: &Orbit) -> Vec<SymPoly> {
    let m = |e: [u32; 3]| smono(3, &Multi::from_slice(&e));
    let i = LambdaPoly::constant(Sym::constant(GaussianRational::i()));
    let gs = vec![
        m([0, 0, 0]),
        m([1, 0, 0]),
        m([0, 1, 0]),
        m([0, 0, 1]),
        m([1, 1, 0]),
        m([0, 1, 1]).plus(&m([1, 0, 0]).scale(&i)),
        m([2, 0, 0]),
        m([1, 0, 0]).plus(&m([0, 1, 0]).scale(&i)),
        m([0, 0, 2]).plus(&m([1, 1, 1])),
        m([1, 0, 1]).minus(&m([0, 1, 0]).scale(&i)),
    ];
    let mut out = gs.clone();
    out.extend(gs.iter().map(|g| o.star(o.casimir(), g)));
    out
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into())
}

fn scope_of(cfg: &SuiteConfig) -> String {
    match cfg.star {
        StarSelector::Moyal => format!("moyal[{}]", cfg.pairs),
        StarSelector::Translations => format!("translations[{}+{}]", cfg.pairs, cfg.spectators),
        StarSelector::Axb => format!("axb[k={},{}]", cfg.law.k(), serde_json::to_value(cfg.sign).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()),
        StarSelector::Orbit | StarSelector::Gns => {
            let r2 = match &cfg.r2 {
                Radius2::Symbolic => "r2".to_string(),
                Radius2::Value(q) => format!("r2={}", lie_star::scalar::fmt_rational(q)),
            };
            format!("{}/{}[{r2},λ^{}]", cfg.algebra.label(), cfg.star.name(), cfg.order.unwrap_or(0))
        }
        StarSelector::Bch => format!("{}/bch", cfg.algebra.label()),
    }
}

/// Runs one suite entry. Only configuration problems are returned as
/// errors; failures inside a check become failing records.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let alg = Arc::new(cfg.algebra.load().map_err(|e| match e {
        Error::Config(m) => Error::Config(m),
        other => Error::Config(format!("algebra {}: {other}", cfg.algebra.label())),
    })?);
    let bch = Arc::new(Bch::new(alg.clone()));
    let cache = cfg.cache_dir.as_ref().map(Cache::new);
    if let Some(c) = &cache {
        // A rejected file is rebuilt below and overwritten on store.
        let _ = c.load(&bch, cfg.degree);
    }
    let ctx = Ctx { cfg, scope: scope_of(cfg), alg, bch };
    let ids = cfg.selected();
    let groups: Vec<Vec<Record>> = ids
        .par_iter()
        .map(|id| {
            let start = Instant::now();
            let out = catch_unwind(AssertUnwindSafe(|| ctx.run(id)));
            let mut recs = match out {
                Ok(Ok(r)) => r,
                Ok(Err(e)) => vec![Record::error(ctx.name(id), "module error", e.to_string())],
                Err(p) => vec![Record::error(ctx.name(id), "module panic", panic_message(p))],
            };
            let ms = start.elapsed().as_millis() as u64;
            let expect = cfg.expect_violation.iter().any(|e| e == id);
            for r in &mut recs {
                if expect {
                    *r = r.clone().expecting_violation();
                }
                if cfg.timings {
                    r.wall_ms = Some(ms);
                }
            }
            recs
        })
        .collect();
    if let Some(c) = &cache {
        // A failed write only costs a recomputation next time.
        let _ = c.store(&ctx.bch, cfg.degree);
    }
    Ok(Report::new(cfg.seed, groups.into_iter().flatten().collect()))
}

/// Runs several entries and merges their records.
pub fn run_suites(cfgs: &[SuiteConfig]) -> Result<Report> {
    for c in cfgs {
        c.validate()?;
    }
    let reports = cfgs.iter().map(run_suite).collect::<Result<Vec<_>>>()?;
    let mut r = Report::merge(reports);
    if let Some(c) = cfgs.first() {
        r.seed = c.seed;
    }
    Ok(r)
}

/// Star product on monomials of the configured kind, for `star mul`.
pub fn product_for(cfg: &SuiteConfig, alg: Arc<LieAlgebra>) -> Box<dyn StarProduct> {
    match cfg.star {
        StarSelector::Moyal => Box::new(Moyal::new(cfg.pairs)),
        _ => Box::new(Bch::new(alg)),
    }
}

/// f ⋆ g truncated at the configured order.
pub fn multiply(star: &dyn StarProduct, f: &P, g: &P, order: Option<u32>) -> P {
    star_mul_upto(star, f, g, order)
}
