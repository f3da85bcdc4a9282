//! Named verification suites and their JSON reports.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::families::{
    standard_component, ComponentBuilder, ConfigSummary, Family, FamilyConfig, GradedComponent,
    SkoReading, TruncatedAlgebra,
};
use crate::homsolver::{self, KernelElement, TupleConditions};
use crate::par;
use crate::scalar::{self, int};
use crate::superpoly::{Parity, SuperPoly};
use crate::vectorfield::{
    bracket_formula, bracket_formula_with, d_x_parity, CorrectionParity, VectorField,
};

pub const REPORT_SCHEMA: &str = "cartan.check-report/1";

pub const SUITES: [&str; 12] = [
    "jacobi",
    "antisym",
    "bracket-formula",
    "grading",
    "transitivity",
    "lemma-ll3",
    "lemma-yuanl1",
    "prop-minus1",
    "prop-zero",
    "theorem-step",
    "hom-solve",
    "implied-rows",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// The more severe of two statuses.
    pub fn worst(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema: String,
    pub suite: String,
    pub config: Option<ConfigSummary>,
    pub status: Status,
    pub dims: BTreeMap<String, i64>,
    pub nullspace_dim: Option<usize>,
    pub counterexample: Option<Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub details: BTreeMap<String, Value>,
    pub elapsed_ms: u64,
}

impl CheckReport {
    pub fn new(suite: &str, config: Option<&FamilyConfig>) -> Self {
        CheckReport {
            schema: REPORT_SCHEMA.into(),
            suite: suite.into(),
            config: config.map(ConfigSummary::of),
            status: Status::Pass,
            dims: BTreeMap::new(),
            nullspace_dim: None,
            counterexample: None,
            seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            details: BTreeMap::new(),
            elapsed_ms: 0,
        }
    }

    fn fail(&mut self, counterexample: Value) {
        self.status = Status::Fail;
        if self.counterexample.is_none() {
            self.counterexample = Some(counterexample);
        }
    }
}

/// Tunables of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteParams {
    pub samples: usize,
    pub seed: u64,
    /// Largest coefficient weight of sampled polynomials.
    pub max_weight: u32,
    /// Top degree of the σ-codomain window.
    pub codomain_max: i64,
    /// Largest component degree sampled by the identity suites.
    pub sample_degree: i64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            samples: 500,
            seed: 7,
            max_weight: 4,
            codomain_max: 2,
            sample_degree: 2,
        }
    }
}

/// Runs one suite. Reports depend only on `(name, config, params)`.
pub fn run_suite(name: &str, config: &FamilyConfig, params: &SuiteParams) -> Result<CheckReport> {
    let start = Instant::now();
    let mut report = match name {
        "jacobi" => jacobi(config, params)?,
        "antisym" => antisym(config, params)?,
        "bracket-formula" => bracket_formula_suite(config, params)?,
        "grading" => grading(config)?,
        "transitivity" => transitivity(config)?,
        "lemma-ll3" => lemma_ll3(config)?,
        "lemma-yuanl1" => lemma_yuanl1(config)?,
        "prop-minus1" => homsolver::verify_prop_minus1(config, params.codomain_max)?,
        "prop-zero" => homsolver::verify_prop_zero(config, params.codomain_max)?,
        "theorem-step" => homsolver::verify_theorem_step(config, &[1, 2])?,
        "hom-solve" => hom_solve(config, params)?,
        "implied-rows" => homsolver::implied_rows_check(config, params.codomain_max)?,
        other => return Err(Error::InvalidArgument(format!("unknown suite `{other}`"))),
    };
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Full pipeline report on `g_{-depth} ⊕ … ⊕ g_0`.
pub fn hom_solve(config: &FamilyConfig, params: &SuiteParams) -> Result<CheckReport> {
    let main = homsolver::run_pipeline(config, params.codomain_max)?;
    let wider = homsolver::run_pipeline(config, params.codomain_max + 1)?;
    Ok(homsolver::pipeline_report(
        "hom-solve",
        config,
        &main,
        Some(&wider),
        -config.depth()..=0,
    ))
}

fn components(config: &FamilyConfig, top: i64) -> Result<Vec<GradedComponent>> {
    let mut builder = ComponentBuilder::new(config.clone());
    (-config.depth()..=top)
        .map(|j| builder.component(j))
        .collect()
}

fn record_dims(report: &mut CheckReport, comps: &[GradedComponent]) {
    for c in comps {
        report
            .dims
            .insert(format!("g[{}]", c.degree()), c.dim() as i64);
    }
}

/// A random parity-homogeneous element of a random component: a small
/// integer combination of one to three basis elements of one parity.
fn sample_element(rng: &mut ChaCha8Rng, comps: &[GradedComponent]) -> (VectorField, Parity) {
    loop {
        let c = &comps[rng.gen_range(0..comps.len())];
        if c.dim() == 0 {
            continue;
        }
        let parity = c.parities()[rng.gen_range(0..c.dim())];
        let members: Vec<usize> = (0..c.dim())
            .filter(|&i| c.parities()[i] == parity)
            .collect();
        let mut acc = VectorField::zero(c.basis()[0].signature());
        for _ in 0..rng.gen_range(1..=3) {
            let k = members[rng.gen_range(0..members.len())];
            let coeff = loop {
                let v = rng.gen_range(-3i64..=3);
                if v != 0 {
                    break v;
                }
            };
            acc = acc
                .add(&c.basis()[k].scale(&int(coeff)))
                .expect("same signature");
        }
        if !acc.is_zero() {
            return (acc, parity);
        }
    }
}

fn jacobi(config: &FamilyConfig, params: &SuiteParams) -> Result<CheckReport> {
    let comps = components(config, params.sample_degree)?;
    let mut report = CheckReport::new("jacobi", Some(config));
    report.seed = Some(params.seed);
    record_dims(&mut report, &comps);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let triples: Vec<_> = (0..params.samples)
        .map(|_| {
            [
                sample_element(&mut rng, &comps),
                sample_element(&mut rng, &comps),
                sample_element(&mut rng, &comps),
            ]
        })
        .collect();
    let residuals = par::map(
        &triples,
        |[(a, pa), (b, pb), (c, pc)]| -> Result<VectorField> {
            let t1 = a.bracket(&b.bracket(c)?)?.scale(&int(pa.koszul(*pc)));
            let t2 = b.bracket(&c.bracket(a)?)?.scale(&int(pb.koszul(*pa)));
            let t3 = c.bracket(&a.bracket(b)?)?.scale(&int(pc.koszul(*pb)));
            t1.add(&t2)?.add(&t3)
        },
    );
    for (k, r) in residuals.into_iter().enumerate() {
        let r = r?;
        if !r.is_zero() {
            let [(a, _), (b, _), (c, _)] = &triples[k];
            report.fail(json!({"sample": k, "x": a.to_string(), "y": b.to_string(), "z": c.to_string(), "residual": r.to_string()}));
        }
    }
    report
        .details
        .insert("samples".into(), json!(params.samples));
    Ok(report)
}

fn antisym(config: &FamilyConfig, params: &SuiteParams) -> Result<CheckReport> {
    let comps = components(config, params.sample_degree)?;
    let mut report = CheckReport::new("antisym", Some(config));
    report.seed = Some(params.seed);
    record_dims(&mut report, &comps);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pairs: Vec<_> = (0..params.samples)
        .map(|_| {
            (
                sample_element(&mut rng, &comps),
                sample_element(&mut rng, &comps),
            )
        })
        .collect();
    let residuals = par::map(&pairs, |((a, pa), (b, pb))| -> Result<VectorField> {
        let ab = a.bracket(b)?;
        let ba = b.bracket(a)?;
        ab.add(&ba.scale(&int(pa.koszul(*pb))))
    });
    for (k, r) in residuals.into_iter().enumerate() {
        let r = r?;
        if !r.is_zero() {
            let ((a, _), (b, _)) = &pairs[k];
            report.fail(json!({"sample": k, "x": a.to_string(), "y": b.to_string(), "residual": r.to_string()}));
        }
    }
    report
        .details
        .insert("samples".into(), json!(params.samples));
    Ok(report)
}

fn random_parity(rng: &mut ChaCha8Rng) -> Parity {
    if rng.gen_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

fn bracket_formula_suite(config: &FamilyConfig, params: &SuiteParams) -> Result<CheckReport> {
    let family = config.family();
    if matches!(family, Family::W | Family::S) {
        return Err(Error::InvalidArgument(format!(
            "{family} has no generating operator"
        )));
    }
    let mut report = CheckReport::new("bracket-formula", Some(config));
    report.seed = Some(params.seed);
    let sig = config.signature();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pairs: Vec<(SuperPoly, Parity, SuperPoly)> = (0..params.samples)
        .map(|_| {
            let pf = random_parity(&mut rng);
            let pg = random_parity(&mut rng);
            let f = SuperPoly::random_with(&mut rng, sig, pf, params.max_weight);
            let g = SuperPoly::random_with(&mut rng, sig, pg, params.max_weight);
            (f, pf, g)
        })
        .collect();
    let outcomes = par::map(
        &pairs,
        |(f, pf, g)| -> Result<(VectorField, VectorField, bool, bool)> {
            let df = config.d_x(f)?;
            let dg = config.d_x(g)?;
            let lhs = df.bracket(&dg)?;
            let rhs = bracket_formula(family, f, g, config.maps())?;
            let parity_ok = df.is_zero() || df.homogeneous_parity()? == d_x_parity(family, *pf);
            let literal =
                bracket_formula_with(family, f, g, config.maps(), CorrectionParity::Function)?
                    == lhs;
            Ok((lhs, rhs, parity_ok, literal))
        },
    );
    let mut literal_mismatches = 0usize;
    let mut literal_example = None;
    for (k, o) in outcomes.into_iter().enumerate() {
        let (lhs, rhs, parity_ok, literal) = o?;
        let (f, _, g) = &pairs[k];
        if lhs != rhs || !parity_ok {
            report.fail(json!({"sample": k, "f": f.to_string(), "g": g.to_string(), "commutator": lhs.to_string(), "formula": rhs.to_string()}));
        }
        if !literal {
            literal_mismatches += 1;
            literal_example.get_or_insert_with(|| json!({"f": f.to_string(), "g": g.to_string()}));
        }
    }
    report
        .details
        .insert("samples".into(), json!(params.samples));
    if matches!(family, Family::KO | Family::SKO) {
        // the correction term's sign read off the parity of f itself
        report.details.insert(
            "function_parity_reading".into(),
            json!({"mismatches": literal_mismatches, "example": literal_example}),
        );
    }
    Ok(report)
}

fn grading(config: &FamilyConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("grading", Some(config));
    let mut builder = ComponentBuilder::new(config.clone());
    let d = config.depth();
    for j in -d..=0 {
        let listed = standard_component(config, j)?;
        let generated = builder.generic(j)?;
        report.dims.insert(format!("g[{j}]"), listed.dim() as i64);
        if !listed.span_equals(&generated) {
            report.fail(
                json!({"degree": j, "listed_dim": listed.dim(), "generated_dim": generated.dim()}),
            );
        }
        for (b, g) in listed.basis().iter().zip(listed.grades()) {
            if config.grade(b).as_ref() != Some(g) || g.degree != j {
                report.fail(json!({"degree": j, "inhomogeneous": b.to_string()}));
            }
        }
    }
    let g1 = builder.component(1)?;
    report.dims.insert("g[1]".into(), g1.dim() as i64);
    // closure of every bracket landing in the window
    let alg = TruncatedAlgebra::from_builder(&mut builder, 1)?;
    match alg.with_structure_constants() {
        Ok(alg) => {
            report
                .details
                .insert("structure_constants".into(), json!(alg.structure_entries()));
        }
        Err(e) => report.fail(json!({"closure": e.to_string()})),
    }
    if config.family() == Family::SKO {
        let mut other =
            ComponentBuilder::new(config.clone().with_sko_reading(match config.sko_reading() {
                SkoReading::MLambda => SkoReading::NLambda,
                SkoReading::NLambda => SkoReading::MLambda,
            }));
        let mut dims = BTreeMap::new();
        for j in -d..=1 {
            dims.insert(
                j.to_string(),
                json!([builder.generic(j)?.dim(), other.generic(j)?.dim()]),
            );
        }
        report
            .details
            .insert("sko_readings_dims".into(), json!(dims));
    }
    Ok(report)
}

fn transitivity(config: &FamilyConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("transitivity", Some(config));
    let mut builder = ComponentBuilder::new(config.clone());
    let minus1 = builder.component(-1)?;
    report.dims.insert("g[-1]".into(), minus1.dim() as i64);
    for j in 0..=2 {
        let comp = builder.component(j)?;
        let ker = homsolver::common_annihilator(config, &comp, minus1.basis())?;
        report.dims.insert(format!("g[{j}]"), comp.dim() as i64);
        report
            .details
            .insert(format!("kernel_dim[{j}]"), json!(ker.len()));
        if let Some(w) = ker.first() {
            report.fail(json!({"degree": j, "element": w.to_string()}));
        }
    }
    Ok(report)
}

fn lemma_ll3(config: &FamilyConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("lemma-ll3", Some(config));
    let mut builder = ComponentBuilder::new(config.clone());
    report
        .dims
        .insert("g[0]".into(), builder.component(0)?.dim() as i64);
    // ∂_i itself for W and S; D_X(x_{i'}) elsewhere, with ∂_i as a side note
    let primary = if config.family().has_generating_operator() {
        KernelElement::Operator
    } else {
        KernelElement::Partial
    };
    let mut readings = vec![(primary, "kernel")];
    if primary == KernelElement::Operator {
        readings.push((KernelElement::Partial, "partial_kernel"));
    }
    for (element, name) in readings {
        let mut per_index = BTreeMap::new();
        let mut failures = 0;
        for i in 1..=config.signature().vars() {
            if config.nu() == Some(i) {
                continue;
            }
            let c = homsolver::kernel_ad_check(&mut builder, i, element)?;
            per_index.insert(
                i.to_string(),
                json!({
                    "kernel_dim": c.kernel_dim,
                    "asserted_dim": c.asserted_dim,
                    "bracket_span_dim": c.bracket_dim,
                    "kernel_equals_assertion": c.kernel_matches_assertion,
                }),
            );
            if !c.holds() {
                failures += 1;
                if element == primary {
                    report.fail(json!({
                        "index": i,
                        "kernel_equals_assertion": c.kernel_matches_assertion,
                        "outside_bracket_span": c.witness,
                    }));
                }
            }
        }
        report.details.insert(
            name.into(),
            json!({"failing_indices": failures, "indices": per_index}),
        );
    }
    Ok(report)
}

fn lemma_yuanl1(config: &FamilyConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("lemma-yuanl1", Some(config));
    let mut builder = ComponentBuilder::new(config.clone());
    let outcomes = homsolver::yuanl1_check(&mut builder, TupleConditions::Centralizing)?;
    let failing: Vec<_> = outcomes.iter().filter(|o| !o.holds).collect();
    report
        .details
        .insert("tuples".into(), json!(outcomes.len()));
    report
        .details
        .insert("failing".into(), json!(failing.len()));
    if let Some(o) = failing.first() {
        report.fail(json!({"tuple": o.tuple, "element": o.element}));
    }
    if matches!(config.family(), Family::W | Family::S) {
        let literal = homsolver::yuanl1_check(&mut builder, TupleConditions::Literal)?;
        let bad: Vec<_> = literal.iter().filter(|o| !o.holds).collect();
        report.details.insert(
            "literal_conditions".into(),
            json!({
                "tuples": literal.len(),
                "failing": bad.len(),
                "example": bad.first().map(|o| json!({"tuple": o.tuple, "element": o.element})),
            }),
        );
    }
    Ok(report)
}

/// One entry of an acceptance manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub suite: String,
    pub family: Family,
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub lambda: Option<String>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub codomain_max: Option<i64>,
}

impl ManifestEntry {
    pub fn config(&self) -> Result<FamilyConfig> {
        let mut c = FamilyConfig::new(self.family, self.m, self.n)?;
        if let Some(l) = &self.lambda {
            c = c.with_lambda(scalar::parse(l)?);
        }
        Ok(c)
    }

    pub fn params(&self) -> SuiteParams {
        let mut p = SuiteParams::default();
        if let Some(s) = self.samples {
            p.samples = s;
        }
        if let Some(s) = self.seed {
            p.seed = s;
        }
        if let Some(c) = self.codomain_max {
            p.codomain_max = c;
        }
        p
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, rename = "check")]
    pub checks: Vec<ManifestEntry>,
}

/// Runs every manifest entry, entries in parallel. Errors become FAIL
/// reports carrying the message.
pub fn run_manifest(manifest: &Manifest) -> Vec<CheckReport> {
    par::map(&manifest.checks, |e| {
        let run = e
            .config()
            .and_then(|c| run_suite(&e.suite, &c, &e.params()));
        run.unwrap_or_else(|err| {
            let mut r = CheckReport::new(&e.suite, e.config().ok().as_ref());
            r.fail(json!({"error": err.to_string()}));
            r
        })
    })
}

/// Overall status of a set of reports.
pub fn overall(reports: &[CheckReport]) -> Status {
    reports.iter().fold(Status::Pass, |s, r| s.worst(r.status))
}
