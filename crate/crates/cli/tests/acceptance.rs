//! Acceptance run: one line per criterion.
//!
//! Every check is exact (rational arithmetic, zero tolerance). The only
//! pinned numeric limits are wall-clock: 60 s per configuration for the
//! identity suites and 30 min for the whole manifest.
//!
//! Criteria listed in `KNOWN_FAILURES` print FAIL like any other; the process
//! exits nonzero only when an outcome differs from that list, so an
//! unexpected pass is reported too.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use cartan::expr;
use cartan::families::component_basis;
use cartan::superpoly::{Parity, Signature, SuperPoly};
use cartan::verify::{CheckReport, Status};
use cartan::{Family, FamilyConfig, Scalar, VectorField};

const PER_CONFIG_LIMIT: Duration = Duration::from_secs(60);
const MANIFEST_LIMIT: Duration = Duration::from_secs(30 * 60);
const SAMPLES: u64 = 500;
const ROUND_TRIPS: u64 = 200;

/// Lemma statements that do not hold at the desk configurations, and the
/// all-PASS manifest requirement that depends on them.
const KNOWN_FAILURES: &[u32] = &[5, 6, 10];

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cartan(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Reports(Vec<CheckReport>);

impl Reports {
    fn get(&self, suite: &str, label: &str) -> Option<&CheckReport> {
        self.0
            .iter()
            .find(|r| r.suite == suite && r.config.as_ref().is_some_and(|c| c.label == label))
    }

    fn statuses(&self, suite: &str, labels: &[String]) -> (Vec<String>, Vec<String>) {
        let mut ok = Vec::new();
        let mut bad = Vec::new();
        for l in labels {
            match self.get(suite, l) {
                Some(r) if r.status == Status::Pass => ok.push(l.clone()),
                Some(r) => bad.push(format!("{l}={}", r.status)),
                None => bad.push(format!("{l}=missing")),
            }
        }
        (ok, bad)
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn labels(filter: impl Fn(Family) -> bool) -> Vec<String> {
    FamilyConfig::desk_defaults()
        .into_iter()
        .filter(|c| filter(c.family()))
        .map(|c| c.label())
        .collect()
}

fn criterion_1(r: &Reports) -> Outcome {
    let all = labels(|_| true);
    let mut bad = Vec::new();
    let mut slowest = (String::new(), 0u64);
    for l in &all {
        let mut ms = 0;
        for suite in ["jacobi", "antisym"] {
            match r.get(suite, l) {
                Some(rep) => {
                    let samples = rep
                        .details
                        .get("samples")
                        .and_then(|v| v.as_u64())
                        .unwrap_or(0);
                    if rep.status != Status::Pass || samples < SAMPLES {
                        bad.push(format!("{suite} {l}={} ({samples} samples)", rep.status));
                    }
                    ms += rep.elapsed_ms;
                }
                None => bad.push(format!("{suite} {l} missing")),
            }
        }
        if ms > slowest.1 {
            slowest = (l.clone(), ms);
        }
        if Duration::from_millis(ms) > PER_CONFIG_LIMIT {
            bad.push(format!("{l} took {ms} ms"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} configs x {SAMPLES} triples and pairs, slowest {} {} ms (limit {} s){}",
            all.len(),
            slowest.0,
            slowest.1,
            PER_CONFIG_LIMIT.as_secs(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; {}", bad.join(", "))
            }
        ),
    )
}

fn criterion_2(r: &Reports) -> Outcome {
    let ls = labels(|f| f.has_generating_operator());
    let (ok, bad) = r.statuses("bracket-formula", &ls);
    outcome(
        bad.is_empty(),
        format!(
            "{}/{} configs exact on {SAMPLES} pairs {}",
            ok.len(),
            ls.len(),
            bad.join(", ")
        ),
    )
}

fn criterion_3(r: &Reports) -> Outcome {
    let ls = labels(|_| true);
    let (ok, mut bad) = r.statuses("grading", &ls);
    let dim = |f, m, n, j| {
        component_basis(&FamilyConfig::new(f, m, n).unwrap(), j)
            .unwrap()
            .dim()
    };
    for (name, got, want) in [
        ("W(4,4)[0]", dim(Family::W, 4, 4, 0), 64),
        ("S(4,4)[0]", dim(Family::S, 4, 4, 0), 63),
        ("K(5,4)[-1]", dim(Family::K, 5, 4, -1), 8),
        ("K(5,4)[-2]", dim(Family::K, 5, 4, -2), 1),
    ] {
        if got != want {
            bad.push(format!("dim {name} = {got}, expected {want}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "span equality at {}/{} configs, dims 64/63/8/1 checked {}",
            ok.len(),
            ls.len(),
            bad.join(", ")
        ),
    )
}

fn criterion_4(r: &Reports) -> Outcome {
    let ls = labels(|_| true);
    let (ok, bad) = r.statuses("transitivity", &ls);
    outcome(
        bad.is_empty(),
        format!(
            "kernel 0 in degrees 0,1,2 at {}/{} configs {}",
            ok.len(),
            ls.len(),
            bad.join(", ")
        ),
    )
}

fn criterion_5(r: &Reports) -> Outcome {
    let ls = labels(|_| true);
    let (ok, bad) = r.statuses("lemma-ll3", &ls);
    outcome(
        bad.is_empty(),
        format!(
            "perfect kernel at {}/{}: {}; not at {}",
            ok.len(),
            ls.len(),
            ok.join(" "),
            bad.join(" ")
        ),
    )
}

fn criterion_6(r: &Reports) -> Outcome {
    let ls = labels(|_| true);
    let mut bad = Vec::new();
    let mut ok = Vec::new();
    for l in &ls {
        match r.get("lemma-yuanl1", l) {
            Some(rep) if rep.status == Status::Pass => ok.push(l.clone()),
            Some(rep) => bad.push(format!(
                "{l} ({}/{} tuples)",
                rep.details.get("failing").cloned().unwrap_or_default(),
                rep.details.get("tuples").cloned().unwrap_or_default()
            )),
            None => bad.push(format!("{l} missing")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "all tuples hold at {}/{}; failing at {}",
            ok.len(),
            ls.len(),
            bad.join(" ")
        ),
    )
}

fn criterion_7(r: &Reports) -> Outcome {
    let ls = labels(|_| true);
    let mut bad = Vec::new();
    for l in &ls {
        for suite in ["prop-minus1", "prop-zero", "hom-solve", "theorem-step"] {
            match r.get(suite, l) {
                Some(rep) if rep.status == Status::Pass => {
                    if suite == "hom-solve" {
                        let sols = rep
                            .details
                            .get("solutions")
                            .and_then(|v| v.as_str())
                            .unwrap_or("");
                        let unchanged = rep.details["codomain_sensitivity"]["unchanged"].as_bool()
                            == Some(true);
                        if sols != "{0, id}" || !unchanged {
                            bad.push(format!(
                                "{l} solutions {sols}, codomain unchanged {unchanged}"
                            ));
                        }
                    }
                }
                Some(rep) => bad.push(format!("{suite} {l}={}", rep.status)),
                None => bad.push(format!("{suite} {l} missing")),
            }
        }
    }
    let solver = r
        .get("hom-solve", "W(4,4)")
        .and_then(|rep| rep.details.get("solve_nullspace_dim"))
        .and_then(|v| v.as_u64());
    let oracle = dense_oracle_w44();
    if solver != Some(oracle as u64) {
        bad.push(format!(
            "dense oracle nullity {oracle} vs solver {solver:?}"
        ));
    }
    outcome(
        bad.is_empty(),
        format!(
            "{{0, id}} on g[-d]..g[0] at {} configs, theorem step l=1,2, W(4,4) dense oracle nullity {oracle} = solver {} {}",
            ls.len(),
            solver.map(|s| s.to_string()).unwrap_or("?".into()),
            bad.join(", ")
        ),
    )
}

fn criterion_8(r: &Reports) -> Outcome {
    let ls = ["H(4,4)", "K(5,4)", "HO(4,4)", "KO(4,5)"].map(String::from);
    let (ok, bad) = r.statuses("implied-rows", &ls);
    let literal: Vec<String> = ls
        .iter()
        .filter_map(|l| {
            let rep = r.get("implied-rows", l)?;
            let n = rep
                .details
                .get("second_family")?
                .get("outside_row_space")?
                .as_u64()?;
            (n > 0).then(|| format!("{l}:{n}"))
        })
        .collect();
    outcome(
        bad.is_empty(),
        format!(
            "both families in the row space at {}/4 {}; second family with literal signs outside at {}",
            ok.len(),
            bad.join(", "),
            if literal.is_empty() { "none".to_string() } else { literal.join(" ") }
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut bad = Vec::new();
    let cfgs = FamilyConfig::desk_defaults();
    for seed in 0..ROUND_TRIPS {
        let c = &cfgs[seed as usize % cfgs.len()];
        let e = expr::random_expr(c, seed);
        let mut args = vec![
            "eval".to_string(),
            "--family".into(),
            c.family().to_string(),
        ];
        args.extend([
            "--m".into(),
            c.signature().m().to_string(),
            "--n".into(),
            c.signature().n().to_string(),
        ]);
        args.extend(["--lambda".into(), cartan::scalar::display(c.lambda())]);
        let run = |text: &str| {
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.push(text);
            let o = cartan(&a);
            let out = String::from_utf8_lossy(&o.stdout)
                .lines()
                .filter(|l| !l.starts_with('#'))
                .collect::<Vec<_>>()
                .join("\n");
            (o.status.code(), out)
        };
        let (code, canon) = run(&e.to_string());
        let (code2, again) = run(&canon);
        if code != Some(0) || code2 != Some(0) || canon != again {
            bad.push(format!("seed {seed}: {e} -> {canon} -> {again}"));
        }
    }
    let o = cartan(&[
        "verify",
        "jacobi",
        "--family",
        "W",
        "--m",
        "4",
        "--n",
        "4",
        "--samples",
        "500",
        "--seed",
        "7",
    ]);
    if o.status.code() != Some(0) {
        bad.push(format!("verify jacobi exit {:?}", o.status.code()));
    }
    let o = cartan(&["eval", "--family", "K", "--m", "5", "--n", "4", "D_K(1)"]);
    let value: Vec<String> = String::from_utf8_lossy(&o.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect();
    if o.status.code() != Some(0) || value != ["2*p5"] {
        bad.push(format!("eval D_K(1) printed {value:?}"));
    }
    let o = cartan(&[
        "basis", "--family", "K", "--m", "5", "--n", "4", "--degree", "-2",
    ]);
    let elems = String::from_utf8_lossy(&o.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    if o.status.code() != Some(0) || elems != 1 {
        bad.push(format!("basis degree -2 printed {elems} elements"));
    }
    outcome(
        bad.is_empty(),
        format!(
            "{ROUND_TRIPS} round trips through the binary, 3 documented commands {}",
            bad.join("; ")
        ),
    )
}

fn criterion_10(r: &Reports, elapsed: Duration) -> Outcome {
    let failing: Vec<String> =
        r.0.iter()
            .filter(|x| x.status != Status::Pass)
            .map(|x| {
                format!(
                    "{} {}",
                    x.suite,
                    x.config.as_ref().map(|c| c.label.as_str()).unwrap_or("-")
                )
            })
            .collect();
    let in_time = elapsed <= MANIFEST_LIMIT;
    outcome(
        failing.is_empty() && in_time,
        format!(
            "{} checks in {:.0} s (limit {} s), {} not PASS{}",
            r.0.len(),
            elapsed.as_secs_f64(),
            MANIFEST_LIMIT.as_secs(),
            failing.len(),
            if failing.is_empty() {
                String::new()
            } else {
                format!(": {}", failing.join(", "))
            }
        ),
    )
}

// Independent recomputation of the W(4,4) nullspace dimension: the basis is
// generated here as monomial fields, every bracket comes straight from
// `VectorField::bracket`, and each torus block is reduced by plain dense
// Gaussian elimination.

type Grade = Vec<i64>;

/// Products `x_{i1}…x_{ik}` with `i1 ≤ … ≤ ik`, odd indices not repeated.
fn monomials(sig: Signature, k: usize, lo: usize) -> Vec<SuperPoly> {
    if k == 0 {
        return vec![SuperPoly::one(sig)];
    }
    let mut out = Vec::new();
    for i in lo..=sig.vars() {
        let next = if i > sig.m() { i + 1 } else { i };
        for rest in monomials(sig, k - 1, next) {
            let p = SuperPoly::var(sig, i).unwrap().mul(&rest).unwrap();
            // keep coefficient 1 whatever sign the reordering produced
            let (m, _) = p.terms().next().unwrap();
            out.push(SuperPoly::monomial(sig, *m, Scalar::one()));
        }
    }
    out
}

/// `x^a ∂_r` of degree `degree`, i.e. `|a| = degree + 1`.
fn monomial_fields(sig: Signature, degree: i64) -> Vec<VectorField> {
    let mut out = Vec::new();
    for p in monomials(sig, (degree + 1) as usize, 1) {
        for r in 1..=sig.vars() {
            out.push(VectorField::term(p.clone(), r).unwrap());
        }
    }
    out
}

fn grade_of(f: &VectorField, vars: usize) -> Grade {
    let (r, m, _) = f.terms().next().unwrap();
    let sig = f.signature();
    let mut g: Grade = (1..=vars).map(|k| m.exponent(&sig, k) as i64).collect();
    g[r - 1] -= 1;
    g
}

fn parity_of(f: &VectorField) -> Parity {
    f.homogeneous_parity().unwrap()
}

type Term = (usize, cartan::SuperMonomial);

fn terms_of(f: &VectorField) -> BTreeMap<Term, Scalar> {
    f.terms().map(|(r, m, c)| ((r, *m), c.clone())).collect()
}

struct DenseBlock {
    cols: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl DenseBlock {
    fn full(&self) -> bool {
        self.rows.len() == self.cols
    }

    fn insert(&mut self, mut v: Vec<Scalar>) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone() / &row[p];
                for j in 0..self.cols {
                    if !row[j].is_zero() {
                        let d = &f * &row[j];
                        v[j] -= d;
                    }
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            self.rows.push(v);
            self.pivots.push(p);
        }
    }
}

fn dense_oracle_w44() -> usize {
    let sig = Signature::new(4, 4).unwrap();
    let vars = sig.vars();
    let domain: Vec<VectorField> = (-1..=0).flat_map(|d| monomial_fields(sig, d)).collect();
    let codomain: Vec<VectorField> = (-1..=2).flat_map(|d| monomial_fields(sig, d)).collect();
    let dgrades: Vec<Grade> = domain.iter().map(|f| grade_of(f, vars)).collect();
    let cgrades: Vec<Grade> = codomain.iter().map(|f| grade_of(f, vars)).collect();

    // unknown (x, c) for matching parity, grouped by the grade shift c - x
    let mut blocks: Vec<DenseBlock> = Vec::new();
    let mut block_ids: HashMap<Grade, usize> = HashMap::new();
    let mut by_x: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); domain.len()];
    for (x, fx) in domain.iter().enumerate() {
        for (c, fc) in codomain.iter().enumerate() {
            if parity_of(fx) != parity_of(fc) {
                continue;
            }
            let shift: Grade = cgrades[c]
                .iter()
                .zip(&dgrades[x])
                .map(|(a, b)| a - b)
                .collect();
            let next = blocks.len();
            let b = *block_ids.entry(shift).or_insert_with(|| {
                blocks.push(DenseBlock {
                    cols: 0,
                    rows: Vec::new(),
                    pivots: Vec::new(),
                });
                next
            });
            let local = blocks[b].cols;
            blocks[b].cols += 1;
            by_x[x].push((c, b, local));
        }
    }

    let mut cache: HashMap<(usize, Term), VectorField> = HashMap::new();
    let n = domain.len();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                let mut rows: BTreeMap<(usize, Term), Vec<(usize, Scalar)>> = BTreeMap::new();
                for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                    let w = domain[y].bracket(&domain[z]).unwrap();
                    if w.is_zero() {
                        continue;
                    }
                    let sign = if parity_of(&domain[x]).is_odd() && parity_of(&domain[z]).is_odd() {
                        -1
                    } else {
                        1
                    };
                    for &(cc, blk, local) in &by_x[x] {
                        if blocks[blk].full() {
                            continue;
                        }
                        for (t, coef) in terms_of(&w) {
                            let br = cache
                                .entry((cc, t.clone()))
                                .or_insert_with(|| {
                                    let single = VectorField::term(
                                        SuperPoly::monomial(sig, t.1, Scalar::one()),
                                        t.0,
                                    )
                                    .unwrap();
                                    codomain[cc].bracket(&single).unwrap()
                                })
                                .clone();
                            for (out, v) in terms_of(&br) {
                                let val = &coef * &v * Scalar::from_integer(sign.into());
                                rows.entry((blk, out)).or_default().push((local, val));
                            }
                        }
                    }
                }
                for ((blk, _), entries) in rows {
                    let mut v = vec![Scalar::zero(); blocks[blk].cols];
                    for (j, val) in entries {
                        v[j] += val;
                    }
                    if v.iter().any(|x| !x.is_zero()) {
                        blocks[blk].insert(v);
                    }
                }
            }
        }
    }
    blocks.iter().map(|b| b.cols - b.rows.len()).sum()
}

fn main() {
    let manifest = workspace().join("manifests/acceptance.toml");
    let out = std::env::temp_dir().join(format!("cartan-acceptance-{}.json", std::process::id()));
    let start = Instant::now();
    let run = cartan(&[
        "verify",
        "all",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    let text = std::fs::read_to_string(&out).unwrap_or_else(|e| {
        panic!(
            "manifest run produced no report ({e}): {}",
            String::from_utf8_lossy(&run.stderr)
        )
    });
    let _ = std::fs::remove_file(&out);
    let reports = Reports(serde_json::from_str(&text).expect("report array"));

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "super-Jacobi and antisymmetry", criterion_1(&reports)),
        (2, "bracket formula", criterion_2(&reports)),
        (3, "graded components", criterion_3(&reports)),
        (4, "transitivity", criterion_4(&reports)),
        (5, "kernel perfectness", criterion_5(&reports)),
        (6, "tuple membership", criterion_6(&reports)),
        (7, "Hom-structure triviality", criterion_7(&reports)),
        (8, "implied rows", criterion_8(&reports)),
        (9, "CLI", criterion_9()),
        (10, "full manifest", criterion_10(&reports, elapsed)),
    ];
    let mut surprises = Vec::new();
    for (id, name, o) in &results {
        let expected_fail = KNOWN_FAILURES.contains(id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if expected_fail && !o.pass {
            " (known)"
        } else {
            ""
        };
        println!("criterion {id:>2} {tag}{note} {name}: {}", o.detail);
        if o.pass == expected_fail {
            surprises.push(*id);
        }
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if !surprises.is_empty() {
        println!("unexpected outcome for criteria {surprises:?}");
        std::process::exit(1);
    }
}
