//! Suite configuration: parsing, defaults and bounds.

use std::path::{Path, PathBuf};

use lie_star::lie::{catalog, AlgebraFile, LieAlgebra};
use lie_star::poisson::Radius2;
use lie_star::scalar::parse_rational;
use lie_star::universal::{AxbLaw, TSign};
use lie_star::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_DEGREE: u32 = 8;
pub const MAX_ORDER: u32 = 8;
pub const MAX_SAMPLES: usize = 5000;
pub const MAX_PAIRS: usize = 2;
pub const MAX_SPECTATORS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraSource {
    Catalog(String),
    File(PathBuf),
}

impl AlgebraSource {
    /// A name from the catalog, or a path if the string names an existing
    /// file or ends in `.json`/`.toml`.
    pub fn parse(s: &str) -> Self {
        let p = Path::new(s);
        if p.is_file() || s.ends_with(".json") || s.ends_with(".toml") {
            AlgebraSource::File(p.to_path_buf())
        } else {
            AlgebraSource::Catalog(s.to_string())
        }
    }
    pub fn load(&self) -> Result<LieAlgebra> {
        match self {
            AlgebraSource::Catalog(name) => catalog(name),
            AlgebraSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                AlgebraFile::parse(&text)?.to_algebra()
            }
        }
    }
    pub fn label(&self) -> String {
        match self {
            AlgebraSource::Catalog(name) => name.clone(),
            AlgebraSource::File(path) => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        }
    }
}

/// Which family of identities a suite entry exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarSelector {
    Bch,
    Moyal,
    Orbit,
    Gns,
    Translations,
    Axb,
}

impl StarSelector {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "bch" => StarSelector::Bch,
            "moyal" => StarSelector::Moyal,
            "orbit" => StarSelector::Orbit,
            "gns" => StarSelector::Gns,
            "translations" => StarSelector::Translations,
            "axb" => StarSelector::Axb,
            _ => return Err(Error::Config(format!("unknown star selector `{s}`"))),
        })
    }
    pub fn name(self) -> &'static str {
        match self {
            StarSelector::Bch => "bch",
            StarSelector::Moyal => "moyal",
            StarSelector::Orbit => "orbit",
            StarSelector::Gns => "gns",
            StarSelector::Translations => "translations",
            StarSelector::Axb => "axb",
        }
    }
    /// Identities understood by this selector, in the order they run.
    pub fn identities(self) -> &'static [&'static str] {
        match self {
            StarSelector::Bch => &[
                "structure",
                "unimodular",
                "assoc",
                "strong-inv",
                "homog",
                "covariance",
                "hermitian",
                "exp-bch",
                "closedness",
                "trace",
                "trace-evaluation",
            ],
            StarSelector::Moyal => &["assoc", "hermitian", "projection"],
            StarSelector::Orbit => &["koszul", "star", "trace", "positivity"],
            StarSelector::Gns => &["representation", "commutant", "g-relations", "inner-product"],
            StarSelector::Translations => &[
                "group",
                "moyal",
                "assoc",
                "homomorphism",
                "tangential",
                "alpha",
                "bi-invariance",
                "left-universal",
                "trace",
                "positivity",
            ],
            StarSelector::Axb => {
                &["group", "t", "assoc", "hermitian", "frame", "bi-invariance", "trace", "positivity", "alpha"]
            }
        }
    }
    fn default_degree(self) -> u32 {
        match self {
            StarSelector::Bch | StarSelector::Moyal | StarSelector::Translations => 4,
            StarSelector::Orbit | StarSelector::Axb => 3,
            StarSelector::Gns => 2,
        }
    }
    fn default_order(self) -> Option<u32> {
        match self {
            StarSelector::Bch | StarSelector::Translations => None,
            _ => Some(4),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(Error::Config(format!("unknown format `{s}`"))),
        }
    }
}

/// One suite entry. Bounds are checked by [`SuiteConfig::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub algebra: AlgebraSource,
    pub star: StarSelector,
    /// Empty means every identity of the selector.
    pub identities: Vec<String>,
    /// Identities whose violation is the expected outcome; they pass iff a
    /// witness is found.
    pub expect_violation: Vec<String>,
    pub degree: u32,
    /// λ-order; `None` is exact where the product is finite.
    pub order: Option<u32>,
    pub r2: Radius2,
    pub seed: u64,
    /// Cap on sampled pairs and triples.
    pub samples: usize,
    pub pairs: usize,
    pub spectators: usize,
    pub law: AxbLaw,
    pub sign: TSign,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    /// Record wall times; off by default so reports are byte-reproducible.
    pub timings: bool,
}

impl SuiteConfig {
    pub fn new(algebra: &str, star: StarSelector) -> Self {
        Self {
            algebra: AlgebraSource::parse(algebra),
            star,
            identities: Vec::new(),
            expect_violation: Vec::new(),
            degree: star.default_degree(),
            order: star.default_order(),
            r2: Radius2::Symbolic,
            seed: 0,
            samples: 60,
            pairs: 1,
            spectators: 1,
            law: AxbLaw::default(),
            sign: TSign::default(),
            format: Format::Json,
            cache_dir: None,
            timings: false,
        }
    }
    pub fn with_identities(mut self, ids: &[&str]) -> Self {
        self.identities = ids.iter().map(|s| s.to_string()).collect();
        self
    }
    pub fn expecting_violation(mut self, ids: &[&str]) -> Self {
        self.expect_violation = ids.iter().map(|s| s.to_string()).collect();
        self
    }
    pub fn with_degree(mut self, d: u32) -> Self {
        self.degree = d;
        self
    }
    pub fn with_order(mut self, o: Option<u32>) -> Self {
        self.order = o;
        self
    }
    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    /// The identities that will run, after defaulting.
    pub fn selected(&self) -> Vec<String> {
        if self.identities.is_empty() {
            self.star.identities().iter().map(|s| s.to_string()).collect()
        } else {
            self.identities.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.degree > MAX_DEGREE {
            return bad(format!("degree {} exceeds the maximum {MAX_DEGREE}", self.degree));
        }
        if let Some(o) = self.order {
            if o > MAX_ORDER {
                return bad(format!("order {o} exceeds the maximum {MAX_ORDER}"));
            }
        }
        if self.samples == 0 || self.samples > MAX_SAMPLES {
            return bad(format!("samples must be in 1..={MAX_SAMPLES}"));
        }
        if self.pairs == 0 || self.pairs > MAX_PAIRS {
            return bad(format!("pairs must be in 1..={MAX_PAIRS}"));
        }
        if self.spectators > MAX_SPECTATORS {
            return bad(format!("spectators must be at most {MAX_SPECTATORS}"));
        }
        let known = self.star.identities();
        for id in self.identities.iter().chain(&self.expect_violation) {
            if !known.contains(&id.as_str()) {
                return bad(format!("identity `{id}` is not available for star `{}`", self.star.name()));
            }
        }
        if matches!(self.star, StarSelector::Orbit | StarSelector::Gns) {
            match &self.algebra {
                AlgebraSource::Catalog(n) if n == "su2" => {}
                _ => return bad("orbit and gns suites are defined for su2 only".into()),
            }
            if self.order.is_none() {
                return bad("orbit and gns suites need a finite order".into());
            }
        }
        if self.star == StarSelector::Axb && self.order.is_none() {
            return bad("the axb suite needs a finite order".into());
        }
        Ok(())
    }
}

/// TOML form of a suite entry; every field but `algebra` and `star` is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    algebra: Option<String>,
    star: Option<String>,
    identities: Option<Vec<String>>,
    expect_violation: Option<Vec<String>>,
    degree: Option<u32>,
    order: Option<OrderSpec>,
    r2: Option<String>,
    seed: Option<u64>,
    samples: Option<usize>,
    pairs: Option<usize>,
    spectators: Option<usize>,
    law: Option<AxbLaw>,
    sign: Option<TSign>,
    timings: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OrderSpec {
    N(u32),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    suite: Vec<RawSuite>,
}

pub fn parse_order(s: &str) -> Result<Option<u32>> {
    if s == "exact" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Config(format!("order must be an integer or `exact`, got `{s}`")))
}

pub fn parse_r2(s: &str) -> Result<Radius2> {
    if s == "symbolic" {
        return Ok(Radius2::Symbolic);
    }
    let q = parse_rational(s).map_err(|e| Error::Config(format!("r2: {e}")))?;
    if q <= lie_star::scalar::int(0) {
        return Err(Error::Config("r2 must be positive".into()));
    }
    Ok(Radius2::Value(q))
}

impl RawSuite {
    fn into_config(self) -> Result<SuiteConfig> {
        let algebra = self.algebra.ok_or_else(|| Error::Config("suite entry without `algebra`".into()))?;
        let star = StarSelector::parse(&self.star.ok_or_else(|| Error::Config("suite entry without `star`".into()))?)?;
        let mut c = SuiteConfig::new(&algebra, star);
        if let Some(v) = self.identities {
            c.identities = v;
        }
        if let Some(v) = self.expect_violation {
            c.expect_violation = v;
        }
        if let Some(d) = self.degree {
            c.degree = d;
        }
        match self.order {
            Some(OrderSpec::N(n)) => c.order = Some(n),
            Some(OrderSpec::Word(w)) => c.order = parse_order(&w)?,
            None => {}
        }
        if let Some(r) = self.r2 {
            c.r2 = parse_r2(&r)?;
        }
        c.seed = self.seed.unwrap_or(c.seed);
        c.samples = self.samples.unwrap_or(c.samples);
        c.pairs = self.pairs.unwrap_or(c.pairs);
        c.spectators = self.spectators.unwrap_or(c.spectators);
        c.law = self.law.unwrap_or(c.law);
        c.sign = self.sign.unwrap_or(c.sign);
        c.timings = self.timings.unwrap_or(false);
        c.validate()?;
        Ok(c)
    }
}

/// Reads `[[suite]]` entries from TOML text.
pub fn parse_suite_file(text: &str) -> Result<Vec<SuiteConfig>> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(format!("suite file: {e}")))?;
    if raw.suite.is_empty() {
        return Err(Error::Config("suite file has no [[suite]] entries".into()));
    }
    raw.suite.into_iter().map(RawSuite::into_config).collect()
}

/// The full default run: every module, sized for the acceptance bounds.
pub fn default_suite() -> Vec<SuiteConfig> {
    use StarSelector::*;
    let mut out = Vec::new();
    for alg in ["su2", "sl2", "heisenberg3", "aff1", "abelian(1)", "abelian(2)", "abelian(3)", "abelian(4)", "abelian(5)"] {
        let mut c = SuiteConfig::new(alg, Bch).with_identities(&["structure", "unimodular"]);
        if alg == "aff1" {
            c = c.expecting_violation(&["unimodular"]);
        }
        out.push(c);
    }
    for alg in ["su2", "heisenberg3", "aff1"] {
        out.push(SuiteConfig::new(alg, Bch).with_identities(&["assoc", "covariance", "hermitian"]).with_samples(200));
        out.push(SuiteConfig::new(alg, Bch).with_identities(&["strong-inv", "homog"]).with_degree(5));
    }
    for alg in ["su2", "heisenberg3", "aff1", "abelian(2)"] {
        let mut c = SuiteConfig::new(alg, Bch).with_identities(&["exp-bch", "closedness"]).with_order(Some(5));
        if alg == "aff1" {
            c = c.expecting_violation(&["closedness"]);
        }
        out.push(c);
    }
    out.push(
        SuiteConfig::new("su2", Bch)
            .with_identities(&["trace", "trace-evaluation"])
            .expecting_violation(&["trace-evaluation"])
            .with_degree(5)
            .with_samples(120),
    );
    out.push(SuiteConfig::new("abelian(2)", Moyal).with_degree(3).with_samples(120));
    out.push(SuiteConfig::new("su2", Orbit).with_identities(&["koszul"]).with_degree(6).with_order(Some(6)).with_samples(40));
    out.push(SuiteConfig::new("su2", Orbit).with_identities(&["star"]).with_degree(3).with_samples(40));
    out.push(SuiteConfig::new("su2", Orbit).with_identities(&["trace", "positivity"]).with_degree(3).with_samples(50));
    out.push(SuiteConfig::new("su2", Gns));
    out.push(SuiteConfig::new("abelian(2)", Translations));
    out.push(SuiteConfig::new("abelian(2)", Axb).with_samples(30));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suite_file() {
        let text = r#"
            [[suite]]
            algebra = "su2"
            star = "orbit"
            identities = ["trace", "positivity"]
            r2 = "1"
            order = 4

            [[suite]]
            algebra = "aff1"
            star = "bch"
            order = "exact"
            identities = ["closedness"]
        "#;
        let v = parse_suite_file(text).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].r2, Radius2::Value(lie_star::scalar::int(1)));
        assert_eq!(v[1].order, None);
    }

    #[test]
    fn rejects_out_of_bounds() {
        assert!(SuiteConfig::new("su2", StarSelector::Bch).with_degree(MAX_DEGREE + 1).validate().is_err());
        assert!(SuiteConfig::new("su2", StarSelector::Bch).with_identities(&["koszul"]).validate().is_err());
        assert!(SuiteConfig::new("aff1", StarSelector::Orbit).validate().is_err());
        assert!(parse_suite_file("[[suite]]\nalgebra = \"su2\"\nstar = \"bch\"\nbogus = 1\n").is_err());
        assert!(parse_r2("-1").is_err());
    }

    #[test]
    fn default_suite_is_valid() {
        for c in default_suite() {
            c.validate().unwrap();
        }
    }
}
