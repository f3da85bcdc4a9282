//! The Cartan-type families `W, S, H, K, HO, KO, SHO, SKO` as graded
//! subalgebras of `W(m,n)`: configurations, homogeneous bases of the graded
//! components, membership tests, the derived subalgebras `SHO` and `SKO`, and
//! exact structure constants over a finite degree window.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, RationalMatrix, SparseEchelon, SparseVec};
use crate::par;
use crate::scalar::{self, Scalar};
use crate::superpoly::{monomials_of_weight, Parity, Signature, SuperMonomial, SuperPoly};
use crate::vectorfield::{d_ij, d_x, div_lambda, IndexMaps, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    W,
    S,
    H,
    K,
    HO,
    KO,
    SHO,
    SKO,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::W,
        Family::S,
        Family::H,
        Family::K,
        Family::HO,
        Family::KO,
        Family::SHO,
        Family::SKO,
    ];

    /// Families presented as images of a generating-function operator `D_X`.
    pub fn has_generating_operator(self) -> bool {
        !matches!(self, Family::W | Family::S)
    }

    /// The family whose `D_X` builds this one.
    pub fn operator_family(self) -> Family {
        match self {
            Family::SHO => Family::HO,
            Family::SKO => Family::KO,
            f => f,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::W => "W",
            Family::S => "S",
            Family::H => "H",
            Family::K => "K",
            Family::HO => "HO",
            Family::KO => "KO",
            Family::SHO => "SHO",
            Family::SKO => "SKO",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown family `{s}`")))
    }
}

/// Which multiple of `λ` accompanies `x_i x_{i'}` in the degree-0 generator
/// `D_KO(x_{2m+1} + c λ x_i x_{i'})` of SKO.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SkoReading {
    /// `c = m`, matching the `mλ` in `div_λ`.
    #[default]
    MLambda,
    /// `c = n = m + 1`.
    NLambda,
}

/// Combined grading of a homogeneous vector field: the principal degree and
/// a torus weight that every family's bracket respects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Grade {
    pub degree: i64,
    pub torus: Vec<i32>,
}

impl Grade {
    pub fn add(&self, other: &Grade) -> Grade {
        Grade {
            degree: self.degree + other.degree,
            torus: self
                .torus
                .iter()
                .zip(&other.torus)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Grade) -> Grade {
        Grade {
            degree: self.degree - other.degree,
            torus: self
                .torus
                .iter()
                .zip(&other.torus)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// A family together with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyConfig {
    family: Family,
    sig: Signature,
    lambda: Scalar,
    sko_reading: SkoReading,
    maps: IndexMaps,
}

impl FamilyConfig {
    pub fn new(family: Family, m: usize, n: usize) -> Result<Self> {
        let sig = Signature::new(m, n)?;
        let maps = IndexMaps::new(family, sig)?;
        Ok(FamilyConfig {
            family,
            sig,
            lambda: Scalar::zero(),
            sko_reading: SkoReading::default(),
            maps,
        })
    }

    pub fn with_lambda(mut self, lambda: Scalar) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_sko_reading(mut self, reading: SkoReading) -> Self {
        self.sko_reading = reading;
        self
    }

    /// The desk-scale configurations: the smallest sizes meeting each family's
    /// shape constraint with `m, n > 3`, and SKO at `λ ∈ {0, 1, 2/3}`.
    pub fn desk_defaults() -> Vec<FamilyConfig> {
        let mk = |f, m, n| FamilyConfig::new(f, m, n).expect("valid desk config");
        vec![
            mk(Family::W, 4, 4),
            mk(Family::S, 4, 4),
            mk(Family::H, 4, 4),
            mk(Family::K, 5, 4),
            mk(Family::HO, 4, 4),
            mk(Family::SHO, 4, 4),
            mk(Family::KO, 4, 5),
            mk(Family::SKO, 4, 5).with_lambda(scalar::int(0)),
            mk(Family::SKO, 4, 5).with_lambda(scalar::int(1)),
            mk(Family::SKO, 4, 5).with_lambda(scalar::ratio(2, 3)),
        ]
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn sko_reading(&self) -> SkoReading {
        self.sko_reading
    }

    pub fn maps(&self) -> &IndexMaps {
        &self.maps
    }

    pub fn nu(&self) -> Option<usize> {
        self.maps.nu()
    }

    /// 1 everywhere, 2 at `ν` when it exists.
    pub fn gamma(&self) -> Vec<i64> {
        let mut g = vec![1; self.sig.vars()];
        if let Some(nu) = self.nu() {
            g[nu - 1] = 2;
        }
        g
    }

    pub fn depth(&self) -> i64 {
        if self.nu().is_some() {
            2
        } else {
            1
        }
    }

    /// `FAMILY(m,n)` or `SKO(m,n;λ)`.
    pub fn label(&self) -> String {
        if self.family == Family::SKO {
            format!(
                "SKO({},{};{})",
                self.sig.m(),
                self.sig.n(),
                scalar::display(&self.lambda)
            )
        } else {
            format!("{}({},{})", self.family, self.sig.m(), self.sig.n())
        }
    }

    fn torus_rank(&self) -> usize {
        match self.family {
            Family::W | Family::S => self.sig.vars(),
            Family::H | Family::K => self.sig.m() / 2,
            _ => self.sig.m(),
        }
    }

    /// Torus weight of `x_i`. For W and S every variable has its own weight;
    /// the other families pair `x_i` with `x_{i'}` at opposite weights, and
    /// self-paired or distinguished variables have weight 0.
    fn torus_of_index(&self, i: usize) -> Vec<i32> {
        let mut t = vec![0; self.torus_rank()];
        match self.family {
            Family::W | Family::S => t[i - 1] = 1,
            Family::H | Family::K => {
                let r = self.sig.m() / 2;
                if i <= r {
                    t[i - 1] = 1;
                } else if i <= 2 * r {
                    t[i - r - 1] = -1;
                }
            }
            _ => {
                let m = self.sig.m();
                if i <= m {
                    t[i - 1] = 1;
                } else if i <= 2 * m {
                    t[i - m - 1] = -1;
                }
            }
        }
        t
    }

    fn monomial_torus(&self, mono: &SuperMonomial) -> Vec<i32> {
        let mut t = vec![0; self.torus_rank()];
        for i in 1..=self.sig.vars() {
            let e = mono.exponent(&self.sig, i) as i32;
            if e != 0 {
                for (a, b) in t.iter_mut().zip(self.torus_of_index(i)) {
                    *a += e * b;
                }
            }
        }
        t
    }

    fn term_grade(&self, r: usize, mono: &SuperMonomial) -> Grade {
        let gamma = self.gamma();
        let mut torus = self.monomial_torus(mono);
        for (a, b) in torus.iter_mut().zip(self.torus_of_index(r)) {
            *a -= b;
        }
        Grade {
            degree: mono.weight(&self.sig, &gamma) - gamma[r - 1],
            torus,
        }
    }

    /// Grade of a homogeneous nonzero field; `None` for zero or inhomogeneous input.
    pub fn grade(&self, field: &VectorField) -> Option<Grade> {
        let mut out: Option<Grade> = None;
        for (r, mono, _) in field.terms() {
            let g = self.term_grade(r, mono);
            match &out {
                None => out = Some(g),
                Some(prev) if *prev == g => {}
                Some(_) => return None,
            }
        }
        out
    }

    /// `D_X(f)` for this family (errors for W and S).
    pub fn d_x(&self, f: &SuperPoly) -> Result<VectorField> {
        d_x(self.family, f, &self.maps)
    }

    fn sko_coefficient(&self) -> Scalar {
        let c = match self.sko_reading {
            SkoReading::MLambda => self.sig.m(),
            SkoReading::NLambda => self.sig.n(),
        };
        &self.lambda * scalar::int(c as i64)
    }
}

impl fmt::Display for FamilyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Coordinate key of a term `x^a ∂_r`.
pub type TermKey = (usize, SuperMonomial);

pub fn field_vector(field: &VectorField) -> SparseVec<TermKey> {
    field
        .terms()
        .map(|(r, m, c)| ((r, *m), c.clone()))
        .collect()
}

fn vector_field(sig: Signature, v: &SparseVec<TermKey>) -> VectorField {
    let mut coeffs = vec![SuperPoly::zero(sig); sig.vars()];
    for ((r, m), c) in v {
        coeffs[r - 1].add_term(*m, c.clone());
    }
    VectorField::from_coeffs(coeffs).expect("well-formed coefficients")
}

fn combine(sig: Signature, basis: &[VectorField], coords: &SparseVec<usize>) -> VectorField {
    let mut acc = SparseVec::new();
    for (i, c) in coords {
        axpy(&mut acc, c, &field_vector(&basis[*i]));
    }
    vector_field(sig, &acc)
}

/// An independent, parity- and grade-homogeneous basis of one graded
/// component, with a coordinatizer.
#[derive(Clone, Debug)]
pub struct GradedComponent {
    degree: i64,
    basis: Vec<VectorField>,
    parities: Vec<Parity>,
    grades: Vec<Grade>,
    index: SparseEchelon<TermKey>,
}

impl GradedComponent {
    fn empty(degree: i64) -> Self {
        GradedComponent {
            degree,
            basis: Vec::new(),
            parities: Vec::new(),
            grades: Vec::new(),
            index: SparseEchelon::new(),
        }
    }

    /// Keeps the first-come independent subset of `generators`.
    pub(crate) fn from_generators<I>(
        config: &FamilyConfig,
        degree: i64,
        generators: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = VectorField>,
    {
        let mut comp = Self::empty(degree);
        for g in generators {
            comp.push(config, g)?;
        }
        Ok(comp)
    }

    fn push(&mut self, config: &FamilyConfig, g: VectorField) -> Result<bool> {
        if g.is_zero() {
            return Ok(false);
        }
        let grade = config
            .grade(&g)
            .ok_or_else(|| Error::Inhomogeneous(g.to_string()))?;
        if grade.degree != self.degree {
            return Err(Error::Inhomogeneous(format!(
                "{g} has degree {} in component {}",
                grade.degree, self.degree
            )));
        }
        let parity = g.homogeneous_parity()?;
        if self.index.insert(field_vector(&g)) {
            self.basis.push(g);
            self.parities.push(parity);
            self.grades.push(grade);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VectorField] {
        &self.basis
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn grades(&self) -> &[Grade] {
        &self.grades
    }

    /// Coordinates of `field` in this basis, or `None` if outside the span.
    pub fn coordinates(&self, field: &VectorField) -> Option<SparseVec<usize>> {
        self.index.coordinates(field_vector(field))
    }

    pub fn contains(&self, field: &VectorField) -> bool {
        self.index.contains(&field_vector(field))
    }

    pub fn combination(&self, coords: &SparseVec<usize>) -> Option<VectorField> {
        let sig = self.basis.first()?.signature();
        Some(combine(sig, &self.basis, coords))
    }

    pub fn span_equals(&self, other: &GradedComponent) -> bool {
        self.dim() == other.dim() && other.basis.iter().all(|b| self.contains(b))
    }
}

/// Result of generating a derived component `[X′, X′]_j`.
#[derive(Clone, Debug)]
pub struct DerivedComponent {
    pub component: GradedComponent,
    /// Dimension of the ambient primed component `X′_j`.
    pub prime_dim: usize,
    /// Every bracket pair landing in degree `j` was available, or the span
    /// already filled `X′_j`.
    pub certified: bool,
    /// Dimension of the span generated with one fewer degree of window.
    pub dim_with_narrower_window: Option<usize>,
}

/// Lazily computes and caches the graded components of one configuration.
pub struct ComponentBuilder {
    config: FamilyConfig,
    generic: BTreeMap<i64, GradedComponent>,
    prime: BTreeMap<i64, GradedComponent>,
    operator: BTreeMap<i64, GradedComponent>,
    derived_window: i64,
}

impl ComponentBuilder {
    pub fn new(config: FamilyConfig) -> Self {
        ComponentBuilder {
            config,
            generic: BTreeMap::new(),
            prime: BTreeMap::new(),
            operator: BTreeMap::new(),
            derived_window: i64::MAX,
        }
    }

    /// Caps the degrees of primed components used when generating SHO/SKO.
    pub fn with_derived_window(mut self, max_degree: i64) -> Self {
        self.derived_window = max_degree;
        self
    }

    pub fn config(&self) -> &FamilyConfig {
        &self.config
    }

    fn check_degree(&self, j: i64) -> Result<()> {
        if j < -self.config.depth() {
            return Err(Error::DegreeOutOfRange {
                family: self.config.label(),
                degree: j,
                min: -self.config.depth(),
            });
        }
        Ok(())
    }

    /// The component of degree `j`: the listed spanning sets for
    /// `j ∈ {-2, -1, 0}`, generated from monomials (and brackets, for SHO and
    /// SKO) above.
    pub fn component(&mut self, j: i64) -> Result<GradedComponent> {
        self.check_degree(j)?;
        if j <= 0 {
            standard_component(&self.config, j)
        } else {
            self.generic(j)
        }
    }

    /// The component of degree `j` generated uniformly for every degree.
    pub fn generic(&mut self, j: i64) -> Result<GradedComponent> {
        self.check_degree(j)?;
        if let Some(c) = self.generic.get(&j) {
            return Ok(c.clone());
        }
        let comp = match self.config.family {
            Family::W => w_component(&self.config, j)?,
            Family::S => s_component(&self.config, j)?,
            Family::H | Family::K | Family::HO | Family::KO => self.operator_component(j)?,
            Family::SHO | Family::SKO => {
                let window = self.derived_window;
                self.derived(j, window)?.component
            }
        };
        self.generic.insert(j, comp.clone());
        Ok(comp)
    }

    /// `D_X` images of all monomials of weight `j + 2`.
    pub fn operator_component(&mut self, j: i64) -> Result<GradedComponent> {
        if let Some(c) = self.operator.get(&j) {
            return Ok(c.clone());
        }
        let cfg = &self.config;
        let monos = monomials_of_weight(&cfg.sig, &cfg.gamma(), j + 2);
        let fields = par::map(&monos, |m| {
            cfg.d_x(&SuperPoly::monomial(cfg.sig, *m, Scalar::one()))
        });
        let fields = fields.into_iter().collect::<Result<Vec<_>>>()?;
        let comp = GradedComponent::from_generators(cfg, j, fields)?;
        self.operator.insert(j, comp.clone());
        Ok(comp)
    }

    /// `SHO′_j` (divergence-free part of `HO_j`) or `SKO′_j` (`D_KO(f)` with
    /// `div_λ(f) = 0`).
    pub fn prime_component(&mut self, j: i64) -> Result<GradedComponent> {
        self.check_degree(j)?;
        if let Some(c) = self.prime.get(&j) {
            return Ok(c.clone());
        }
        let comp = match self.config.family {
            Family::SHO => self.sho_prime(j)?,
            Family::SKO => self.sko_prime(j)?,
            f => {
                return Err(Error::Unsupported {
                    op: "prime component".into(),
                    context: format!("family {f}"),
                })
            }
        };
        self.prime.insert(j, comp.clone());
        Ok(comp)
    }

    fn sho_prime(&mut self, j: i64) -> Result<GradedComponent> {
        let ho = self.operator_component(j)?;
        let cfg = self.config.clone();
        let mut blocks: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
        for (i, g) in ho.grades().iter().enumerate() {
            blocks.entry(g.torus.clone()).or_default().push(i);
        }
        let mut gens = Vec::new();
        for members in blocks.values() {
            let divs = members
                .iter()
                .map(|&i| ho.basis()[i].div())
                .collect::<Result<Vec<_>>>()?;
            for kernel in linear_kernel(&divs) {
                let coords: SparseVec<usize> = kernel
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (members[k], c))
                    .collect();
                gens.push(combine(cfg.sig, ho.basis(), &coords));
            }
        }
        GradedComponent::from_generators(&cfg, j, gens)
    }

    fn sko_prime(&mut self, j: i64) -> Result<GradedComponent> {
        let cfg = self.config.clone();
        let monos = monomials_of_weight(&cfg.sig, &cfg.gamma(), j + 2);
        let mut blocks: BTreeMap<(Parity, Vec<i32>), Vec<SuperMonomial>> = BTreeMap::new();
        for m in monos {
            blocks
                .entry((m.parity(), cfg.monomial_torus(&m)))
                .or_default()
                .push(m);
        }
        let mut gens = Vec::new();
        for members in blocks.values() {
            let polys: Vec<SuperPoly> = members
                .iter()
                .map(|m| SuperPoly::monomial(cfg.sig, *m, Scalar::one()))
                .collect();
            let images = polys
                .iter()
                .map(|p| div_lambda(p, &cfg.lambda, &cfg.maps))
                .collect::<Result<Vec<_>>>()?;
            for kernel in linear_kernel(&images) {
                let f = SuperPoly::from_terms(
                    cfg.sig,
                    kernel
                        .into_iter()
                        .zip(members)
                        .filter(|(c, _)| !c.is_zero())
                        .map(|(c, m)| (*m, c)),
                );
                gens.push(cfg.d_x(&f)?);
            }
        }
        GradedComponent::from_generators(&cfg, j, gens)
    }

    /// `[X′, X′]_j` for SHO and SKO, spanned by brackets of primed components
    /// whose degrees sum to `j`, using primed degrees up to `window_max`.
    pub fn derived(&mut self, j: i64, window_max: i64) -> Result<DerivedComponent> {
        self.check_degree(j)?;
        if !matches!(self.config.family, Family::SHO | Family::SKO) {
            return Err(Error::Unsupported {
                op: "derived component".into(),
                context: format!("family {}", self.config.family),
            });
        }
        let d = self.config.depth();
        let prime_dim = self.prime_component(j)?.dim();
        let top = (j + d).min(window_max);
        let cfg = self.config.clone();
        let mut comp = GradedComponent::empty(j);
        let mut narrower: Option<usize> = None;
        // lowest pair degree first; [X′_{-1}, X′_{j+1}] usually fills everything
        for a in -d..=top {
            let b = j - a;
            if b < a || b > top {
                continue;
            }
            if b == top && narrower.is_none() && top > -d {
                narrower = Some(comp.dim());
            }
            let left = self.prime_component(a)?;
            let right = self.prime_component(b)?;
            let mut pairs = Vec::new();
            for (x, px) in left.basis().iter().zip(left.parities()) {
                for (y, py) in right.basis().iter().zip(right.parities()) {
                    pairs.push((x, *px, y, *py));
                }
            }
            for chunk in pairs.chunks(256) {
                if comp.dim() == prime_dim {
                    break;
                }
                let brackets =
                    par::map(chunk, |(x, px, y, py)| x.bracket_with_parities(y, *px, *py));
                for br in brackets {
                    comp.push(&cfg, br)?;
                    if comp.dim() == prime_dim {
                        break;
                    }
                }
            }
            if comp.dim() == prime_dim {
                break;
            }
        }
        let full = comp.dim() == prime_dim;
        let certified = full || window_max >= j + d;
        Ok(DerivedComponent {
            component: comp,
            prime_dim,
            certified,
            dim_with_narrower_window: if full { None } else { narrower },
        })
    }
}

/// Kernel of the linear map sending the `k`-th unit vector to `images[k]`.
fn linear_kernel(images: &[SuperPoly]) -> Vec<Vec<Scalar>> {
    let mut rows: BTreeMap<SuperMonomial, usize> = BTreeMap::new();
    for p in images {
        for (m, _) in p.terms() {
            let next = rows.len();
            rows.entry(*m).or_insert(next);
        }
    }
    if rows.is_empty() {
        return (0..images.len())
            .map(|k| {
                let mut v = vec![Scalar::zero(); images.len()];
                v[k] = Scalar::one();
                v
            })
            .collect();
    }
    let mut mat = RationalMatrix::zero(rows.len(), images.len());
    for (k, p) in images.iter().enumerate() {
        for (m, c) in p.terms() {
            mat.set(rows[m], k, c.clone());
        }
    }
    mat.nullspace()
}

fn w_component(cfg: &FamilyConfig, j: i64) -> Result<GradedComponent> {
    let gamma = cfg.gamma();
    let mut gens = Vec::new();
    for r in 1..=cfg.sig.vars() {
        for m in monomials_of_weight(&cfg.sig, &gamma, j + gamma[r - 1]) {
            gens.push(VectorField::term(
                SuperPoly::monomial(cfg.sig, m, Scalar::one()),
                r,
            )?);
        }
    }
    GradedComponent::from_generators(cfg, j, gens)
}

fn s_component(cfg: &FamilyConfig, j: i64) -> Result<GradedComponent> {
    let monos = monomials_of_weight(&cfg.sig, &cfg.gamma(), j + 2);
    let vars = cfg.sig.vars();
    let mut jobs = Vec::new();
    for m in &monos {
        for r in 1..=vars {
            for s in r..=vars {
                jobs.push((*m, r, s));
            }
        }
    }
    let gens = par::map(&jobs, |(m, r, s)| {
        d_ij(*r, *s, &SuperPoly::monomial(cfg.sig, *m, Scalar::one()))
    });
    GradedComponent::from_generators(cfg, j, gens.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Spanning sets listed for the low-degree components, with indices corrected
/// to the ranges the definitions allow (`ν` excluded, `2m+1` for the
/// distinguished odd variable, `D_X` in place of `D_H`).
pub fn standard_generators(cfg: &FamilyConfig, j: i64) -> Result<Vec<VectorField>> {
    let sig = cfg.sig;
    let vars = sig.vars();
    let nu = cfg.nu();
    let x = |i: usize| SuperPoly::var(sig, i).expect("index in range");
    let xx = |i: usize, k: usize| x(i).mul(&x(k)).expect("same signature");
    let off_nu: Vec<usize> = (1..=vars).filter(|&i| Some(i) != nu).collect();
    let mut out = Vec::new();
    match (cfg.family, j) {
        (Family::K | Family::KO | Family::SKO, -2) => out.push(cfg.d_x(&SuperPoly::one(sig))?),
        (_, -2) => {}
        (Family::W | Family::S, -1) => {
            for i in 1..=vars {
                out.push(VectorField::partial(sig, i)?);
            }
        }
        (_, -1) => {
            for &i in &off_nu {
                out.push(cfg.d_x(&x(i))?);
            }
        }
        (Family::W, 0) => {
            for i in 1..=vars {
                for k in 1..=vars {
                    out.push(VectorField::term(x(i), k)?);
                }
            }
        }
        (Family::S, 0) => {
            for i in 1..=vars {
                for k in 1..=vars {
                    if i != k {
                        out.push(VectorField::term(x(i), k)?);
                        // divergence-free only with the super sign
                        let sign = scalar::int(if sig.parity_of(i) == sig.parity_of(k) {
                            1
                        } else {
                            -1
                        });
                        out.push(
                            VectorField::term(x(i), i)?
                                .sub(&VectorField::term(x(k), k)?.scale(&sign))?,
                        );
                    }
                }
            }
        }
        (Family::H | Family::K | Family::HO | Family::KO, 0) => {
            for (a, &i) in off_nu.iter().enumerate() {
                for &k in &off_nu[a..] {
                    out.push(cfg.d_x(&xx(i, k))?);
                }
            }
            if let Some(nu) = nu {
                out.push(cfg.d_x(&x(nu))?);
            }
        }
        (Family::SHO | Family::SKO, 0) => {
            let maps = cfg.maps();
            for (a, &i) in off_nu.iter().enumerate() {
                for &k in &off_nu[a..] {
                    if maps.iprime(i) != Some(k) {
                        out.push(cfg.d_x(&xx(i, k))?);
                    }
                }
            }
            let paired: Vec<usize> = (1..=2 * sig.m()).collect();
            for &i in &paired {
                for &k in &paired {
                    if i != k {
                        let ip = maps.iprime(i).expect("paired");
                        let kp = maps.iprime(k).expect("paired");
                        out.push(cfg.d_x(&xx(i, ip).sub(&xx(k, kp))?)?);
                    }
                }
            }
            if cfg.family == Family::SKO {
                let top = x(2 * sig.m() + 1);
                let c = cfg.sko_coefficient();
                for &i in &paired {
                    let ip = maps.iprime(i).expect("paired");
                    out.push(cfg.d_x(&top.add(&xx(i, ip).scale(&c))?)?);
                }
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no listed spanning set for degree {j}"
            )))
        }
    }
    Ok(out)
}

/// Component spanned by [`standard_generators`].
pub fn standard_component(cfg: &FamilyConfig, j: i64) -> Result<GradedComponent> {
    if j < -cfg.depth() {
        return Err(Error::DegreeOutOfRange {
            family: cfg.label(),
            degree: j,
            min: -cfg.depth(),
        });
    }
    GradedComponent::from_generators(cfg, j, standard_generators(cfg, j)?)
}

/// Shorthand for `ComponentBuilder::new(config).component(j)`.
pub fn component_basis(config: &FamilyConfig, j: i64) -> Result<GradedComponent> {
    ComponentBuilder::new(config.clone()).component(j)
}

/// Which defining condition to test in [`member`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// The family itself (derived subalgebra for SHO and SKO).
    Family,
    /// `SHO′` or `SKO′`: the divergence condition only.
    Prime,
}

/// Whether a weight- and parity-homogeneous field belongs to the family.
pub fn member(
    builder: &mut ComponentBuilder,
    field: &VectorField,
    which: Membership,
) -> Result<bool> {
    let cfg = builder.config().clone();
    if field.is_zero() {
        return Ok(true);
    }
    field.homogeneous_parity()?;
    let degree = match field.weight(&cfg.gamma()) {
        crate::superpoly::Homogeneity::Pure(w) => w,
        _ => return Err(Error::Inhomogeneous(field.to_string())),
    };
    if degree < -cfg.depth() {
        return Ok(false);
    }
    match (cfg.family, which) {
        (Family::W, _) => Ok(true),
        (Family::SHO, Membership::Prime) => {
            let ho = builder.operator_component(degree)?;
            Ok(ho.contains(field) && field.div()?.is_zero())
        }
        (Family::SKO, Membership::Prime) => {
            let ko = builder.operator_component(degree)?;
            let Some(coords) = ko.coordinates(field) else {
                return Ok(false);
            };
            // operator components are built from monomials, so coordinates
            // read back the generating function
            let monos = monomials_of_weight(&cfg.sig, &cfg.gamma(), degree + 2);
            let mut f = SuperPoly::zero(cfg.sig);
            let images: Vec<VectorField> = ko.basis().to_vec();
            for (i, c) in coords {
                let img = &images[i];
                let m = monos
                    .iter()
                    .find(|m| {
                        cfg.d_x(&SuperPoly::monomial(cfg.sig, **m, Scalar::one()))
                            .map(|d| &d == img)
                            .unwrap_or(false)
                    })
                    .expect("operator basis element comes from a monomial");
                f.add_term(*m, c);
            }
            for p in [Parity::Even, Parity::Odd] {
                let part = f.parity_part(p);
                if !div_lambda(&part, &cfg.lambda, &cfg.maps)?.is_zero() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(builder.component(degree)?.contains(field)),
    }
}

/// Reference to a basis element of a truncated algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisRef {
    pub degree: i64,
    pub index: usize,
}

/// Graded components over a degree window `[-depth, max_degree]` with a
/// global numbering of the basis elements.
#[derive(Clone, Debug)]
pub struct TruncatedAlgebra {
    config: FamilyConfig,
    min_degree: i64,
    max_degree: i64,
    components: Vec<GradedComponent>,
    offsets: Vec<usize>,
    structure: BTreeMap<(usize, usize), SparseVec<usize>>,
}

impl TruncatedAlgebra {
    /// Builds the components of degrees `-depth..=max_degree` without
    /// structure constants.
    pub fn components(config: &FamilyConfig, max_degree: i64) -> Result<Self> {
        let mut builder = ComponentBuilder::new(config.clone());
        Self::from_builder(&mut builder, max_degree)
    }

    pub fn from_builder(builder: &mut ComponentBuilder, max_degree: i64) -> Result<Self> {
        let config = builder.config().clone();
        let min_degree = -config.depth();
        let mut components = Vec::new();
        let mut offsets = Vec::new();
        let mut total = 0;
        for j in min_degree..=max_degree {
            let c = builder.component(j)?;
            offsets.push(total);
            total += c.dim();
            components.push(c);
        }
        Ok(TruncatedAlgebra {
            config,
            min_degree,
            max_degree,
            components,
            offsets,
            structure: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &FamilyConfig {
        &self.config
    }

    pub fn window(&self) -> (i64, i64) {
        (self.min_degree, self.max_degree)
    }

    pub fn component(&self, j: i64) -> Option<&GradedComponent> {
        if j < self.min_degree || j > self.max_degree {
            None
        } else {
            Some(&self.components[(j - self.min_degree) as usize])
        }
    }

    pub fn dims(&self) -> Vec<(i64, usize)> {
        self.components
            .iter()
            .map(|c| (c.degree(), c.dim()))
            .collect()
    }

    pub fn total_dim(&self) -> usize {
        self.components.iter().map(GradedComponent::dim).sum()
    }

    pub fn global(&self, r: BasisRef) -> usize {
        self.offsets[(r.degree - self.min_degree) as usize] + r.index
    }

    pub fn locate(&self, global: usize) -> BasisRef {
        let k = self.offsets.partition_point(|&o| o <= global) - 1;
        BasisRef {
            degree: self.min_degree + k as i64,
            index: global - self.offsets[k],
        }
    }

    pub fn element(&self, r: BasisRef) -> &VectorField {
        &self.components[(r.degree - self.min_degree) as usize].basis()[r.index]
    }

    pub fn parity(&self, r: BasisRef) -> Parity {
        self.components[(r.degree - self.min_degree) as usize].parities()[r.index]
    }

    pub fn grade(&self, r: BasisRef) -> &Grade {
        &self.components[(r.degree - self.min_degree) as usize].grades()[r.index]
    }

    /// Global references to every basis element of degrees in `degrees`.
    pub fn refs_in(&self, degrees: std::ops::RangeInclusive<i64>) -> Vec<BasisRef> {
        degrees
            .filter_map(|j| self.component(j).map(|c| (j, c.dim())))
            .flat_map(|(j, d)| (0..d).map(move |index| BasisRef { degree: j, index }))
            .collect()
    }

    /// Coordinates of `field` (homogeneous of some in-window degree) as a
    /// sparse vector over global indices.
    pub fn coordinates(&self, field: &VectorField) -> Result<Option<SparseVec<usize>>> {
        if field.is_zero() {
            return Ok(Some(SparseVec::new()));
        }
        let Some(grade) = self.config.grade(field) else {
            return Err(Error::Inhomogeneous(field.to_string()));
        };
        let Some(comp) = self.component(grade.degree) else {
            return Ok(None);
        };
        let base = self.offsets[(grade.degree - self.min_degree) as usize];
        Ok(comp
            .coordinates(field)
            .map(|c| c.into_iter().map(|(i, v)| (base + i, v)).collect()))
    }

    /// Exact coordinates of `[a, b]`; an error if the bracket leaves the
    /// span of its target component. Brackets landing above the window or
    /// below the depth are reported as `None` and zero respectively.
    pub fn bracket_coords(&self, a: BasisRef, b: BasisRef) -> Result<Option<SparseVec<usize>>> {
        let target = a.degree + b.degree;
        if target < self.min_degree {
            return Ok(Some(SparseVec::new()));
        }
        if target > self.max_degree {
            return Ok(None);
        }
        let x = self.element(a);
        let y = self.element(b);
        let br = x.bracket_with_parities(y, self.parity(a), self.parity(b));
        match self.coordinates(&br)? {
            Some(c) => Ok(Some(c)),
            None => Err(Error::ClosureViolation {
                left: x.to_string(),
                right: y.to_string(),
                degree: target,
            }),
        }
    }

    /// Computes every in-window structure constant.
    pub fn with_structure_constants(mut self) -> Result<Self> {
        let n = self.total_dim();
        let mut pairs = Vec::new();
        for i in 0..n {
            let a = self.locate(i);
            for k in 0..n {
                let b = self.locate(k);
                if a.degree + b.degree <= self.max_degree && a.degree + b.degree >= self.min_degree
                {
                    pairs.push((i, k, a, b));
                }
            }
        }
        let this = &self;
        let results = par::map(&pairs, |(i, k, a, b)| {
            this.bracket_coords(*a, *b)
                .map(|c| (*i, *k, c.unwrap_or_default()))
        });
        let mut structure = BTreeMap::new();
        for r in results {
            let (i, k, c) = r?;
            if !c.is_empty() {
                structure.insert((i, k), c);
            }
        }
        self.structure = structure;
        Ok(self)
    }

    /// Stored coordinates of `[e_i, e_k]` (global indices); empty when zero.
    pub fn structure_constant(&self, i: usize, k: usize) -> Option<&SparseVec<usize>> {
        self.structure.get(&(i, k))
    }

    pub fn structure_entries(&self) -> usize {
        self.structure.len()
    }

    pub fn report(&self) -> AlgebraReport {
        AlgebraReport {
            schema: ALGEBRA_SCHEMA.to_string(),
            config: ConfigSummary::of(&self.config),
            window: [self.min_degree, self.max_degree],
            components: self
                .components
                .iter()
                .map(|c| ComponentReport {
                    degree: c.degree(),
                    dim: c.dim(),
                    basis: c.basis().iter().map(ToString::to_string).collect(),
                    parities: c.parities().iter().map(ToString::to_string).collect(),
                })
                .collect(),
            structure_constants: self
                .structure
                .iter()
                .map(|(&(i, k), v)| StructureEntry {
                    left: i,
                    right: k,
                    coords: v.iter().map(|(t, c)| (*t, scalar::display(c))).collect(),
                })
                .collect(),
        }
    }
}

/// Builds components and structure constants over `[-depth, max_degree]`.
pub fn structure_constants(config: &FamilyConfig, max_degree: i64) -> Result<TruncatedAlgebra> {
    TruncatedAlgebra::components(config, max_degree)?.with_structure_constants()
}

pub const ALGEBRA_SCHEMA: &str = "cartan.truncated-algebra/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub lambda: String,
    pub label: String,
    pub depth: i64,
    pub nu: Option<usize>,
    pub gamma: Vec<i64>,
}

impl ConfigSummary {
    pub fn of(c: &FamilyConfig) -> Self {
        ConfigSummary {
            family: c.family,
            m: c.sig.m(),
            n: c.sig.n(),
            lambda: scalar::display(&c.lambda),
            label: c.label(),
            depth: c.depth(),
            nu: c.nu(),
            gamma: c.gamma(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub degree: i64,
    pub dim: usize,
    pub basis: Vec<String>,
    pub parities: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureEntry {
    pub left: usize,
    pub right: usize,
    /// `(global target index, exact rational)` pairs.
    pub coords: Vec<(usize, String)>,
}

/// Serialized form of a [`TruncatedAlgebra`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub schema: String,
    pub config: ConfigSummary,
    pub window: [i64; 2],
    pub components: Vec<ComponentReport>,
    pub structure_constants: Vec<StructureEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(f: Family, m: usize, n: usize) -> FamilyConfig {
        FamilyConfig::new(f, m, n).unwrap()
    }

    #[test]
    fn config_shapes() {
        assert!(FamilyConfig::new(Family::H, 5, 4).is_err());
        assert!(FamilyConfig::new(Family::K, 4, 4).is_err());
        assert!(FamilyConfig::new(Family::HO, 4, 5).is_err());
        assert!(FamilyConfig::new(Family::KO, 4, 4).is_err());
        let k = cfg(Family::K, 5, 4);
        assert_eq!(k.gamma(), vec![1, 1, 1, 1, 2, 1, 1, 1, 1]);
        assert_eq!(k.depth(), 2);
        let ko = cfg(Family::KO, 4, 5);
        assert_eq!(ko.nu(), Some(9));
        assert_eq!(cfg(Family::W, 4, 4).depth(), 1);
        assert_eq!("sko".parse::<Family>().unwrap(), Family::SKO);
    }

    #[test]
    fn component_examples() {
        let w = component_basis(&cfg(Family::W, 4, 4), -1).unwrap();
        assert_eq!(w.dim(), 8);
        let k = component_basis(&cfg(Family::K, 5, 4), -2).unwrap();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis()[0].to_string(), "2*p5");
        let s = component_basis(&cfg(Family::S, 4, 4), 0).unwrap();
        assert_eq!(s.dim(), 63);
        assert!(matches!(
            component_basis(&cfg(Family::W, 4, 4), -2),
            Err(Error::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let w = cfg(Family::W, 4, 4);
        let mut b = ComponentBuilder::new(w.clone());
        let x1p1 = VectorField::term(SuperPoly::var(w.signature(), 1).unwrap(), 1).unwrap();
        assert!(member(&mut b, &x1p1, Membership::Family).unwrap());
        let mixed = x1p1
            .add(&VectorField::partial(w.signature(), 1).unwrap())
            .unwrap();
        assert!(member(&mut b, &mixed, Membership::Family).is_err());

        let s = cfg(Family::S, 4, 4);
        let mut bs = ComponentBuilder::new(s);
        assert!(!member(&mut bs, &x1p1, Membership::Family).unwrap());

        for lambda in [scalar::int(0), scalar::int(1)] {
            let sko = cfg(Family::SKO, 4, 5).with_lambda(lambda.clone());
            let d = sko
                .d_x(&SuperPoly::var(sko.signature(), 9).unwrap())
                .unwrap();
            let mut bk = ComponentBuilder::new(sko);
            assert_eq!(
                member(&mut bk, &d, Membership::Prime).unwrap(),
                lambda.is_zero()
            );
        }
    }

    #[test]
    fn grades_are_homogeneous() {
        for c in FamilyConfig::desk_defaults() {
            let alg = TruncatedAlgebra::components(&c, 1).unwrap();
            for j in alg.window().0..=1 {
                let comp = alg.component(j).unwrap();
                for (g, e) in comp.grades().iter().zip(comp.basis()) {
                    assert_eq!(g.degree, j, "{c}: {e}");
                    assert!(!e.parity().is_mixed());
                }
            }
        }
    }

    #[test]
    fn w_structure_constants_small_window() {
        let w = cfg(Family::W, 4, 4);
        let alg = structure_constants(&w, 1).unwrap();
        // [∂_1, x_1 ∂_2] = ∂_2
        let sig = w.signature();
        let d1 = VectorField::partial(sig, 1).unwrap();
        let x1d2 = VectorField::term(SuperPoly::var(sig, 1).unwrap(), 2).unwrap();
        let i = alg.coordinates(&d1).unwrap().unwrap();
        let k = alg.coordinates(&x1d2).unwrap().unwrap();
        let (i, k) = (*i.keys().next().unwrap(), *k.keys().next().unwrap());
        let c = alg.structure_constant(i, k).unwrap();
        let d2 = VectorField::partial(sig, 2).unwrap();
        let expect = alg.coordinates(&d2).unwrap().unwrap();
        assert_eq!(c, &expect);
    }
}
