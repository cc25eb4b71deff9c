use std::sync::Arc;

use lie_star::lie::{catalog, AlgebraFile};
use lie_star::orbit::{Orbit, SymPoly};
use lie_star::poisson::Radius2;
use lie_star::poly::{default_labels, parse_poly, PolyG};
use lie_star::scalar::{GaussianRational, Scalar, Sym};
use lie_star::star::{star_mul, verify_exp_bch, Bch, Moyal};

type P = PolyG<GaussianRational>;

fn sym(p: &P) -> SymPoly {
    p.map_scalars(Sym::from_gauss)
}

fn parse(text: &str, labels: &[String]) -> P {
    parse_poly(text, labels).unwrap()
}

#[test]
fn su2_linear_product() {
    let alg = Arc::new(catalog("su2").unwrap());
    let labels = alg.labels().to_vec();
    let b = Bch::new(alg);
    let got = star_mul(&b, &parse("e1", &labels), &parse("e2", &labels));
    assert_eq!(got, parse("e1*e2 + 1/2*i*lambda*e3", &labels));
}

#[test]
fn moyal_quadratic_product() {
    let labels = default_labels(2);
    let got = star_mul(&Moyal::new(1), &parse("x1^2", &labels), &parse("x2^2", &labels));
    assert_eq!(got, parse("x1^2*x2^2 - 2*i*lambda*x1*x2 - 1/2*lambda^2", &labels));
}

#[test]
fn algebra_file_round_trip_preserves_products() {
    let alg = catalog("aff1").unwrap();
    let text = serde_json::to_string(&alg.to_file()).unwrap();
    let back = AlgebraFile::parse(&text).unwrap().to_algebra().unwrap();
    let labels = alg.labels().to_vec();
    let (f, g) = (parse("e1^2 + e2", &labels), parse("e1*e2^2", &labels));
    let x = star_mul(&Bch::new(Arc::new(alg)), &f, &g);
    let y = star_mul(&Bch::new(Arc::new(back)), &f, &g);
    assert_eq!(x, y);
}

#[test]
fn heisenberg_exponentials() {
    let b = Bch::new(Arc::new(catalog("heisenberg3").unwrap()));
    let one = lie_star::scalar::int(1);
    let zero = lie_star::scalar::int(0);
    let r = verify_exp_bch(&b, &[one.clone(), zero.clone(), zero.clone()], &[zero.clone(), one, zero], 5);
    assert!(r.success, "{:?}", r.first_mismatch);
}

#[test]
fn orbit_product_of_linear_classes() {
    let o = Orbit::su2(Radius2::Symbolic, 4);
    let labels = default_labels(3);
    let f = o.restrict(&sym(&parse("x1", &labels)));
    let g = o.restrict(&sym(&parse("x2", &labels)));
    let got = o.star_orbit(&f, &g).lambda_cut(1);
    let want = o.restrict(&sym(&parse("x1*x2 + 1/2*i*lambda*x3", &labels)));
    assert_eq!(got, want);
}
