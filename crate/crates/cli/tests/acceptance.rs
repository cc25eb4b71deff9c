//! One pass/fail line per acceptance criterion. Exits nonzero if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use lie_star::free_lie::{dynkin_terms, left_normed, log_series, lyndon_coordinates, BchSeries, FreeAssoc};
use lie_star::lie::{catalog, validate, RawTable};
use lie_star::orbit::{Orbit, SymPoly};
use lie_star::poisson::Radius2;
use lie_star::poly::{Multi, PolyG};
use lie_star::scalar::{int, rat, GaussianRational, LambdaPoly, Rational, Ring, Sym};
use lie_star::star::{
    check_closedness, check_invariant_trace, deform_projection, verify_exp_bch, Bch, Functional, Moyal, StarProduct,
};
use lie_star::universal::{AxbModel, ExpPoly, PointFunctional, Translations, XFun};
use lie_star_cli::config::StarSelector;
use lie_star_cli::sampling::{monomials, pairs, pairs_each, pick, triples};
use lie_star_cli::suite::{positivity_family, projection_example};
use lie_star_cli::{default_suite, run_suite, run_suites, Report, SuiteConfig};

type P = PolyG<GaussianRational>;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self { ok, detail: detail.into() }
    }
}

/// Collects sub-checks; the first failure is reported.
#[derive(Default)]
struct Checks {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Checks {
    fn add(&mut self, ok: bool, what: impl Into<String>) {
        let w = what.into();
        if ok {
            self.notes.push(w);
        } else {
            self.failures.push(w);
        }
    }
    fn report(&mut self, r: &Report, what: &str) {
        let n: usize = r.records.iter().map(|x| x.samples).sum();
        match r.failures().next() {
            None => self.add(true, format!("{what}: {} records, {n} cases", r.records.len())),
            Some(f) => self.add(false, format!("{what}: {} failed ({})", f.name, f.defect.clone().unwrap_or_default())),
        }
    }
    fn outcome(self) -> Outcome {
        if self.failures.is_empty() {
            Outcome::new(true, self.notes.join("; "))
        } else {
            Outcome::new(false, format!("FAILED {}", self.failures.join("; FAILED ")))
        }
    }
}

fn suite(cfg: SuiteConfig) -> Report {
    run_suite(&cfg).expect("valid configuration")
}

fn mono(n: usize, m: &Multi) -> P {
    P::monomial(n, *m, LambdaPoly::one())
}

fn smono(m: &Multi) -> SymPoly {
    SymPoly::monomial(3, *m, LambdaPoly::one())
}

fn bch(name: &str) -> Bch {
    Bch::new(Arc::new(catalog(name).unwrap()))
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn c1() -> Outcome {
    let t = Instant::now();
    let mut c = Checks::default();
    let names = ["su2", "sl2", "heisenberg3", "aff1", "abelian(1)", "abelian(2)", "abelian(3)", "abelian(4)", "abelian(5)"];
    for name in names {
        let alg = catalog(name).unwrap();
        let ok = validate(&alg.to_file().to_raw().unwrap()).is_ok();
        c.add(ok, format!("{name} valid"));
        let (uni, w) = alg.unimodular();
        if name == "aff1" {
            c.add(!uni && w == Some((1, int(1))), format!("aff1 not unimodular, witness tr ad e1 = {}", w.map(|x| x.1).unwrap_or_default()));
        } else if name != "sl2" {
            c.add(uni, format!("{name} unimodular"));
        }
    }
    let mut broken = RawTable::new("broken", 3);
    broken.bracket(0, 1, 1, int(1)).bracket(1, 2, 0, int(1));
    c.add(validate(&broken).is_err(), "a non-Jacobi table is rejected");
    let el = t.elapsed();
    c.add(el < Duration::from_secs(1), format!("{:.3} s < 1 s", secs(el)));
    c.outcome()
}

fn c2() -> Outcome {
    let t = Instant::now();
    let mut c = Checks::default();
    let mut total = 0;
    for alg in ["su2", "heisenberg3", "aff1"] {
        let r = suite(SuiteConfig::new(alg, StarSelector::Bch).with_identities(&["assoc"]).with_degree(4));
        total += r.records[0].samples;
        c.report(&r, &format!("{alg} triples of total degree ≤ 4"));
    }
    c.add(total >= 300, format!("{total} triples"));
    let el = t.elapsed();
    c.add(el < Duration::from_secs(120), format!("{:.1} s < 120 s", secs(el)));
    c.outcome()
}

fn c3() -> Outcome {
    let mut c = Checks::default();
    for alg in ["su2", "heisenberg3", "aff1", "sl2"] {
        let r = suite(SuiteConfig::new(alg, StarSelector::Bch).with_identities(&["strong-inv", "homog"]).with_degree(5));
        c.report(&r, &format!("{alg} basis × degree ≤ 5"));
    }
    c.outcome()
}

fn c4() -> Outcome {
    let mut c = Checks::default();
    for alg in ["su2", "heisenberg3", "aff1", "sl2"] {
        let r = suite(
            SuiteConfig::new(alg, StarSelector::Bch)
                .with_identities(&["covariance", "hermitian"])
                .with_degree(4)
                .with_samples(150),
        );
        c.report(&r, &format!("{alg} basis pairs and 150 seeded pairs of degree ≤ 4"));
    }
    c.outcome()
}

fn c5() -> Outcome {
    let mut c = Checks::default();
    // The Dynkin nested-bracket form must reproduce the associative log series.
    let log = log_series(5);
    let mut dyn_ok = true;
    for m in 1..=5 {
        let mut e = FreeAssoc::new();
        for (w, k) in dynkin_terms(m) {
            for (u, d) in left_normed(&w) {
                *e.entry(u).or_insert_with(|| int(0)) += &k * d;
            }
        }
        e.retain(|_, v| *v != int(0));
        let want: FreeAssoc = log.iter().filter(|(w, _)| w.len() == m).map(|(w, v)| (w.clone(), v.clone())).collect();
        dyn_ok &= e == want && lyndon_coordinates(&e).is_some();
    }
    c.add(dyn_ok, "Dynkin form equals log(e^X e^Y) through degree 5");
    let vecs = |n: usize| -> Vec<(Vec<Rational>, Vec<Rational>)> {
        let unit = |i: usize| (0..n).map(|k| int((k == i) as i64)).collect::<Vec<_>>();
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v.push((unit(i), unit(j)));
                }
            }
        }
        v.push(((0..n).map(|k| rat(k as i64 + 1, 2)).collect(), (0..n).map(|k| int(1 - k as i64)).collect()));
        v
    };
    for alg in ["su2", "heisenberg3", "aff1", "abelian(3)"] {
        let b = bch(alg);
        let n = b.nvars();
        let all = vecs(n).iter().all(|(x, y)| verify_exp_bch(&b, x, y, 5).success);
        c.add(all, format!("{alg}: e_x ⋆ e_y = exp(BCH) through order 5"));
    }
    let h = catalog("heisenberg3").unwrap();
    let series = BchSeries::new(5);
    let (x, y) = (vec![int(2), rat(-1, 3), int(5)], vec![rat(1, 2), int(4), int(-1)]);
    let parts = series.specialize(&h, &x, &y);
    let xy = h.bracket_vec(&x, &y);
    let sum: Vec<Rational> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    let half: Vec<Rational> = xy.iter().map(|v| v * rat(1, 2)).collect();
    let closed = parts[1] == sum && parts[2] == half && parts[3..].iter().all(|p| p.iter().all(|v| *v == int(0)));
    c.add(closed, "heisenberg3: BCH(x, y) = x + y + ½[x, y]");
    c.outcome()
}

fn c6() -> Outcome {
    let mut c = Checks::default();
    for alg in ["su2", "heisenberg3", "abelian(3)"] {
        let r = check_closedness(&bch(alg), 4, 2, 4);
        c.add(r.all_zero && r.order_bound_failures == 0, format!("{alg}: {} integrals vanish", r.checked));
    }
    let r = check_closedness(&bch("aff1"), 4, 2, 4);
    match r.witness {
        Some(w) if w.nu_order == 1 => c.add(true, format!("aff1 witness ν¹: ξ^{:?} against ξ^{:?} gives {}", w.f, w.g, w.value)),
        other => c.add(false, format!("aff1 witness {other:?}")),
    }
    c.outcome()
}

fn c7() -> Outcome {
    let mut c = Checks::default();
    let alg = catalog("su2").unwrap();
    let b = bch("su2");
    let all: Vec<(P, P)> = pairs(3, 5).iter().map(|(x, y)| (mono(3, x), mono(3, y))).collect();
    let extra: Vec<(P, P)> =
        pick(pairs_each(3, 5), 3, "c7", 120).iter().map(|(x, y)| (mono(3, x), mono(3, y))).collect();
    let samples: Vec<(P, P)> = all.into_iter().chain(extra).collect();
    for tau in [Functional::SphereAverage(Radius2::Symbolic), Functional::SphereLaplacian(Radius2::Symbolic, 1)] {
        let r = check_invariant_trace(&alg, &tau, &b, &samples).unwrap();
        c.add(r.poisson_trace && r.star_trace, format!("{} on {} commutators", tau.name(), r.samples));
    }
    let bad = Functional::Evaluation(vec![int(1), int(0), int(0)]);
    let r = check_invariant_trace(&alg, &bad, &b, &samples).unwrap();
    c.add(!r.star_trace && r.witness.is_some(), format!("{} rejected, witness {:?}", bad.name(), r.witness.map(|w| w.2)));
    c.outcome()
}

fn c8() -> Outcome {
    let mut c = Checks::default();
    let o = Orbit::su2(Radius2::Symbolic, 6);
    let mut fs: Vec<SymPoly> = monomials(3, 6).iter().map(smono).collect();
    fs.extend(pick(pairs_each(3, 6), 8, "c8", 30).iter().map(|(a, b)| smono(a).minus(&smono(b).scale_q(&rat(3, 2)))));
    let qs: Vec<SymPoly> = monomials(3, 4).iter().map(smono).collect();
    for chk in o.check_koszul(&fs, &qs) {
        c.add(chk.passed, format!("{} on {} cases{}", chk.identity, chk.cases, chk.witness.map(|w| format!(": {w}")).unwrap_or_default()));
    }
    c.outcome()
}

fn c9() -> Outcome {
    let mut c = Checks::default();
    let o = Orbit::su2(Radius2::Symbolic, 4);
    let basis = o.harmonic_basis(3);
    let mut all = Vec::new();
    for a in &basis {
        for b in &basis {
            for d in &basis {
                all.push((a.clone(), b.clone(), d.clone()));
            }
        }
    }
    let triples = pick(all, 9, "c9", 150);
    let shifts: Vec<SymPoly> = monomials(3, 2).iter().map(smono).collect();
    for chk in o.check_star_orbit(&triples, &shifts) {
        c.add(chk.passed, format!("{} on {} cases{}", chk.identity, chk.cases, chk.witness.map(|w| format!(": {w}")).unwrap_or_default()));
    }
    // Harmonic parts of the monomials: a spanning set, 16 of them independent.
    c.add(basis.len() >= 16, format!("{} harmonic classes of degree ≤ 3", basis.len()));
    c.outcome()
}

fn c10() -> Outcome {
    let mut c = Checks::default();
    let o = Orbit::su2(Radius2::Symbolic, 4);
    let ps: Vec<(SymPoly, SymPoly)> = pick(pairs_each(3, 3), 10, "c10", 60).iter().map(|(a, b)| (smono(a), smono(b))).collect();
    let family = positivity_family(&o);
    for chk in o.check_trace(&ps, &family).unwrap() {
        c.add(chk.passed, format!("{} on {} cases{}", chk.identity, chk.cases, chk.witness.map(|w| format!(": {w}")).unwrap_or_default()));
    }
    c.add(ps.len() >= 50 && family.len() == 20, format!("{} pairs, {} family members", ps.len(), family.len()));
    let r = suite(SuiteConfig::new("su2", StarSelector::Orbit).with_identities(&["trace", "positivity"]).with_order(Some(4)).with_samples(50).with_r2_value(int(1)));
    c.report(&r, "suite with r² = 1");
    c.outcome()
}

fn c11() -> Outcome {
    let mut c = Checks::default();
    let r = suite(SuiteConfig::new("su2", StarSelector::Gns).with_order(Some(4)));
    c.report(&r, "GNS identities through λ⁴");
    c.outcome()
}

fn c12() -> Outcome {
    let mut c = Checks::default();
    // Translation instance.
    let tr = Translations::new(1, 1);
    let xm = |m: &Multi| SymPoly::monomial(3, *m, LambdaPoly::one());
    let moy: Vec<_> = pairs(3, 4).iter().map(|(a, b)| (xm(a), xm(b))).collect();
    let k = tr.check_reproduces_moyal(&moy);
    c.add(k.passed, format!("⋆_X = Moyal on {} pairs of degree ≤ 4", k.cases));
    let ts: Vec<_> = pick(triples(3, 4), 12, "c12", 120).iter().map(|(a, b, d)| (xm(a), xm(b), xm(d))).collect();
    let k = tr.check_associativity(&ts);
    c.add(k.passed, format!("⋆_X associative on {} triples", k.cases));
    let consts = vec![xm(&Multi::from_slice(&[0, 0, 1])), xm(&Multi::from_slice(&[0, 0, 2]))];
    let others: Vec<_> = monomials(3, 3).iter().map(xm).collect();
    let k = tr.check_orbit_tangential(&consts, &others);
    c.add(k.passed, format!("⋆_X constant on orbits, {} cases", k.cases));
    let mut tps = Vec::new();
    for (i, (a, b)) in pick(pairs_each(3, 2), 12, "c12-trace", 45).iter().enumerate() {
        tps.push(match i % 3 {
            0 => (XFun::damped(xm(a), int(1)), XFun::poly(xm(b))),
            1 => (XFun::poly(xm(a)), XFun::damped(xm(b), int(1))),
            _ => (XFun::damped(xm(a), rat(1, 2)), XFun::damped(xm(b), rat(1, 2))),
        });
    }
    let k = tr.check_induced_trace(&PointFunctional::Symbolic, &tps, Some(4)).unwrap();
    c.add(k.passed, format!("induced trace on {} commutators", k.cases));

    // ax+b instance.
    let m = AxbModel::new(4);
    let samples = lie_star::universal::exp_poly_samples(1, 3);
    let k = m.check_t(&samples);
    c.add(k.passed, format!("T real, even and invertible on {} samples", k.cases));
    let ell2 = ExpPoly::ell().pow(2);
    let got = m.t(&ell2).lambda_cut(3);
    let want = ell2.minus(&ExpPoly::constant(LambdaPoly::monomial(2, Sym::one())));
    c.add(got == want, format!("T(ℓ²) = ℓ² − λ² + O(λ⁴): computed T(ℓ²) = {got}"));
    let tiny = lie_star::universal::exp_poly_samples(1, 1);
    let mut all = Vec::new();
    for f in &tiny {
        for g in &tiny {
            for h in &tiny {
                all.push((f.clone(), g.clone(), h.clone()));
            }
        }
    }
    let k = m.check_associativity(&pick(all, 12, "c12-bm", 40));
    c.add(k.passed, format!("⋆_BM associative through λ⁴ on {} triples", k.cases));
    match m.check_frame() {
        Ok((ds, br)) => {
            for d in ds {
                c.add(d.residual_zero && d.order >= 2, format!("{} inner through λ^{} with h = {}", d.field, d.order, d.h));
            }
            c.add(br.passed, "frame bracket consistent");
        }
        Err(e) => c.add(false, format!("inner-derivation certificate: {e}")),
    }
    let small = lie_star::universal::exp_poly_samples(1, 2);
    let mut tp = Vec::new();
    for (i, f) in small.iter().enumerate() {
        let g = &small[(i * 7 + 3) % small.len()];
        tp.push(if i % 2 == 0 { (f.clone().damped(int(1)), g.clone()) } else { (f.clone().damped(rat(1, 2)), g.clone().damped(rat(1, 2))) });
    }
    match m.check_trace(&tp) {
        Ok(k) => c.add(k.passed, format!("trace_BM kills {} commutators through λ⁴", k.cases)),
        Err(e) => c.add(false, format!("trace_BM: {e}")),
    }
    c.outcome()
}

fn c13() -> Outcome {
    let mut c = Checks::default();
    let moyal = Moyal::new(1);
    let p0 = projection_example();
    c.add(p0.mul_with(&p0, &Pointwise2, None).minus(&p0).is_zero(), "P₀ is a pointwise projection");
    match deform_projection(&moyal, &p0, 4) {
        Ok(p) => {
            let d = p.mul_with(&p, &moyal, Some(4)).minus(&p).lambda_cut(4);
            c.add(d.is_zero(), "P ⋆ P − P = 0 through λ⁴");
            c.add(p.lambda_zero_part() == p0, "P at λ = 0 equals P₀");
            c.add(!p.is_lambda_free(), "P has nontrivial corrections");
        }
        Err(e) => c.add(false, format!("deformation failed: {e}")),
    }
    c.outcome()
}

/// Pointwise product on two variables, for the classical check.
struct Pointwise2;
impl StarProduct for Pointwise2 {
    fn nvars(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        "pointwise".into()
    }
    fn monomial_product(&self, a: &Multi, b: &Multi) -> lie_star::star::MonomialProduct {
        Arc::new(vec![(a.add(b), 0, GaussianRational::one())])
    }
}

fn c14() -> Outcome {
    let mut c = Checks::default();
    let t = Instant::now();
    let first = run_suites(&default_suite()).unwrap();
    let el = t.elapsed();
    c.report(&first, "default suite");
    let dir = std::env::temp_dir().join(format!("lie-star-acceptance-{}", std::process::id()));
    let cached: Vec<SuiteConfig> = default_suite()
        .into_iter()
        .map(|mut s| {
            s.cache_dir = Some(dir.clone());
            s
        })
        .collect();
    let second = run_suites(&cached).unwrap();
    let third = run_suites(&cached).unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    c.add(
        first.to_json() == second.to_json() && second.to_json() == third.to_json(),
        format!("byte-identical JSON over three runs ({} bytes, cold and warm cache)", first.to_json().len()),
    );
    c.add(el < Duration::from_secs(600), format!("{:.1} s < 600 s", secs(el)));
    c.outcome()
}

trait R2Ext {
    fn with_r2_value(self, q: Rational) -> Self;
}
impl R2Ext for SuiteConfig {
    fn with_r2_value(mut self, q: Rational) -> Self {
        self.r2 = Radius2::Value(q);
        self
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("structure validation", c1),
        ("BCH associativity", c2),
        ("strong invariance and homogeneity", c3),
        ("covariance and Hermitian property", c4),
        ("BCH oracle", c5),
        ("closedness and unimodularity", c6),
        ("invariant-functional traces", c7),
        ("Koszul identities", c8),
        ("orbit product", c9),
        ("positive trace", c10),
        ("GNS suite", c11),
        ("universal deformations", c12),
        ("projection deformation", c13),
        ("end-to-end suite", c14),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        if !o.ok {
            failed += 1;
        }
        println!("criterion {:>2} {tag}  {name} [{:.1} s]: {}", i + 1, secs(t.elapsed()), o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
