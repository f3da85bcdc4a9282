//! Even linear maps `σ` on the low-degree part of a truncated algebra, the
//! linear constraints imposed by the Hom-super-Jacobi identity
//! `(-1)^{|x||z|}[σx,[y,z]] + (-1)^{|y||x|}[σy,[z,x]] + (-1)^{|z||y|}[σz,[x,y]] = 0`,
//! their exact solution, the multiplicativity filter `σ[x,y] = [σx,σy]`, and
//! the linear facts the triviality argument rests on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::families::{
    field_vector, ComponentBuilder, ConfigSummary, Family, FamilyConfig, Grade, GradedComponent,
    TermKey, TruncatedAlgebra,
};
use crate::linalg::{axpy, sparse_dot, SparseEchelon, SparseVec};
use crate::par;
use crate::scalar::{self, Scalar};
use crate::superpoly::{Parity, SuperPoly};
use crate::vectorfield::VectorField;
use crate::verify::{CheckReport, Status};

/// One unknown `σ_{b,c}`: the coefficient of codomain basis element `c` in
/// `σ(b)` for domain position `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Unknown {
    pub domain: usize,
    pub codomain: usize,
}

/// Unknowns sharing one grade shift `grade(c) - grade(b)`. The constraint
/// system is block diagonal with respect to these.
#[derive(Clone, Debug)]
pub struct Block {
    pub shift: Grade,
    pub unknowns: Vec<usize>,
}

/// A σ-map as a sparse vector over unknown ids.
pub type SigmaMap = SparseVec<usize>;

/// The unknown even map `σ: V → codomain` together with everything needed to
/// write down its constraints: pair brackets inside `V` and the adjoint action
/// of the codomain on the low-degree part of the window.
pub struct SigmaParam {
    alg: TruncatedAlgebra,
    domain: Vec<usize>,
    domain_pos: HashMap<usize, usize>,
    unknowns: Vec<Unknown>,
    unknown_index: HashMap<(usize, usize), usize>,
    blocks: Vec<Block>,
    local: Vec<usize>,
    block_of: Vec<usize>,
    by_domain: Vec<Vec<(usize, Vec<(usize, usize)>)>>,
    pair: Vec<SparseVec<usize>>,
    low: Vec<usize>,
    low_pos: HashMap<usize, usize>,
    /// `[c, v]` over interned terms, computed in the full algebra.
    ad: Vec<SparseVec<usize>>,
    terms: Vec<TermKey>,
    term_degree: Vec<i64>,
}

impl SigmaParam {
    /// `σ` on the components of degrees `domain_degrees` into the window
    /// `[-depth, codomain_max]`.
    pub fn new(
        config: &FamilyConfig,
        domain_degrees: RangeInclusive<i64>,
        codomain_max: i64,
    ) -> Result<Self> {
        let mut builder = ComponentBuilder::new(config.clone());
        Self::with_builder(&mut builder, domain_degrees, codomain_max)
    }

    pub fn with_builder(
        builder: &mut ComponentBuilder,
        domain_degrees: RangeInclusive<i64>,
        codomain_max: i64,
    ) -> Result<Self> {
        let alg = TruncatedAlgebra::from_builder(builder, codomain_max)?;
        Self::from_algebra(alg, domain_degrees)
    }

    pub fn from_algebra(
        alg: TruncatedAlgebra,
        domain_degrees: RangeInclusive<i64>,
    ) -> Result<Self> {
        let (lo, hi) = alg.window();
        if *domain_degrees.start() < lo || *domain_degrees.end() > hi {
            return Err(Error::InvalidArgument(format!(
                "domain degrees {domain_degrees:?} not inside the window [{lo}, {hi}]"
            )));
        }
        let domain: Vec<usize> = alg
            .refs_in(domain_degrees.clone())
            .into_iter()
            .map(|r| alg.global(r))
            .collect();
        let domain_pos: HashMap<usize, usize> =
            domain.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let total = alg.total_dim();

        let mut unknowns = Vec::new();
        let mut block_ids: BTreeMap<Grade, usize> = BTreeMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        let mut local = Vec::new();
        let mut block_of = Vec::new();
        let mut by_domain = Vec::with_capacity(domain.len());
        for (p, &b) in domain.iter().enumerate() {
            let rb = alg.locate(b);
            let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
            for c in 0..total {
                let rc = alg.locate(c);
                if alg.parity(rc) != alg.parity(rb) {
                    continue;
                }
                let shift = alg.grade(rc).sub(alg.grade(rb));
                let next = blocks.len();
                let blk = *block_ids.entry(shift.clone()).or_insert_with(|| {
                    blocks.push(Block {
                        shift,
                        unknowns: Vec::new(),
                    });
                    next
                });
                let id = unknowns.len();
                unknowns.push(Unknown {
                    domain: p,
                    codomain: c,
                });
                local.push(blocks[blk].unknowns.len());
                blocks[blk].unknowns.push(id);
                block_of.push(blk);
                groups.entry(blk).or_default().push((local[id], c));
            }
            by_domain.push(groups.into_iter().collect());
        }
        let unknown_index = unknowns
            .iter()
            .enumerate()
            .map(|(i, u)| ((u.domain, u.codomain), i))
            .collect();

        let n = domain.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        let pair = par::map(&pairs, |&(a, b)| {
            alg.bracket_coords(alg.locate(domain[a]), alg.locate(domain[b]))
                .map(|c| c.unwrap_or_default())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        // brackets of two domain elements, and the domain itself, sit at or below this degree
        let end = *domain_degrees.end();
        let top = (2 * end).max(end).min(hi);
        let low: Vec<usize> = alg
            .refs_in(lo..=top)
            .into_iter()
            .map(|r| alg.global(r))
            .collect();
        let low_pos: HashMap<usize, usize> = low.iter().enumerate().map(|(p, &g)| (g, p)).collect();
        let nl = low.len();
        let ad_rows = par::map_range(total, |c| {
            let rc = alg.locate(c);
            let ec = alg.element(rc);
            low.iter()
                .map(|&v| {
                    let rv = alg.locate(v);
                    field_vector(&ec.bracket_with_parities(
                        alg.element(rv),
                        alg.parity(rc),
                        alg.parity(rv),
                    ))
                })
                .collect::<Vec<_>>()
        });
        let terms: Vec<TermKey> = ad_rows
            .iter()
            .flatten()
            .flat_map(|v| v.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let term_id: HashMap<&TermKey, usize> =
            terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut ad = Vec::with_capacity(total * nl);
        for row in &ad_rows {
            for v in row {
                ad.push(v.iter().map(|(k, a)| (term_id[k], a.clone())).collect());
            }
        }
        let config = alg.config();
        let sig = config.signature();
        let gamma = config.gamma();
        let term_degree = terms
            .iter()
            .map(|(r, m)| m.weight(&sig, &gamma) - gamma[r - 1])
            .collect();
        Ok(SigmaParam {
            alg,
            domain,
            domain_pos,
            unknowns,
            unknown_index,
            blocks,
            local,
            block_of,
            by_domain,
            pair,
            low,
            low_pos,
            ad,
            terms,
            term_degree,
        })
    }

    pub fn algebra(&self) -> &TruncatedAlgebra {
        &self.alg
    }

    pub fn config(&self) -> &FamilyConfig {
        self.alg.config()
    }

    /// Global indices of the domain basis, in order.
    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn domain_position(&self, global: usize) -> Option<usize> {
        self.domain_pos.get(&global).copied()
    }

    pub fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    pub fn unknown_id(&self, domain_pos: usize, codomain: usize) -> Option<usize> {
        self.unknown_index.get(&(domain_pos, codomain)).copied()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_of(&self, unknown: usize) -> usize {
        self.block_of[unknown]
    }

    /// Position of an unknown inside its block.
    pub fn local_index(&self, unknown: usize) -> usize {
        self.local[unknown]
    }

    fn domain_parity(&self, p: usize) -> Parity {
        self.alg.parity(self.alg.locate(self.domain[p]))
    }

    /// Coordinates of `[y, z]` for domain positions `y, z`, over global indices.
    pub fn pair_bracket(&self, y: usize, z: usize) -> &SparseVec<usize> {
        &self.pair[y * self.domain.len() + z]
    }

    /// `[c, v]` over interned terms, for codomain `c` and `v` any window
    /// element up to the degree reached by brackets of domain elements.
    pub fn ad(&self, c: usize, v: usize) -> Option<&SparseVec<usize>> {
        let pos = *self.low_pos.get(&v)?;
        Some(&self.ad[c * self.low.len() + pos])
    }

    /// `[c, w]` over interned terms, for a combination `w` of low-degree elements.
    pub fn ad_combination(&self, c: usize, w: &SparseVec<usize>) -> Result<SparseVec<usize>> {
        let mut out = SparseVec::new();
        for (v, a) in w {
            let row = self.ad(c, *v).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "element {v} is above the precomputed adjoint range"
                ))
            })?;
            axpy(&mut out, a, row);
        }
        Ok(out)
    }

    /// `σ = id` on the domain.
    pub fn identity(&self) -> SigmaMap {
        (0..self.domain.len())
            .map(|p| (self.unknown_index[&(p, self.domain[p])], Scalar::one()))
            .collect()
    }

    /// `sigma` with every unknown on domain elements above `max_degree` dropped.
    pub fn project(&self, sigma: &SigmaMap, max_degree: i64) -> SigmaMap {
        sigma
            .iter()
            .filter(|(u, _)| self.domain_degree(self.unknowns[**u].domain) <= max_degree)
            .map(|(u, a)| (*u, a.clone()))
            .collect()
    }

    /// `σ(b)` for domain position `b`, over global codomain indices.
    pub fn image(&self, sigma: &SigmaMap, b: usize) -> SparseVec<usize> {
        let mut out = SparseVec::new();
        for (&u, a) in sigma {
            let unk = self.unknowns[u];
            if unk.domain == b {
                out.insert(unk.codomain, a.clone());
            }
        }
        out
    }

    /// `σ(w)` for `w` given in global coordinates of domain elements.
    pub fn apply(&self, sigma: &SigmaMap, w: &SparseVec<usize>) -> Result<SparseVec<usize>> {
        let mut out = SparseVec::new();
        for (g, a) in w {
            let p = self.domain_position(*g).ok_or_else(|| {
                Error::InvalidArgument(format!("element {g} is outside the σ-domain"))
            })?;
            axpy(&mut out, a, &self.image(sigma, p));
        }
        Ok(out)
    }

    /// The term behind an interned term id.
    pub fn term(&self, id: usize) -> &TermKey {
        &self.terms[id]
    }

    /// Degree of the field term behind an interned term id.
    pub fn term_degree(&self, id: usize) -> i64 {
        self.term_degree[id]
    }

    /// The vector field with the given interned term coefficients.
    pub fn term_field(&self, v: &SparseVec<usize>) -> VectorField {
        let acc: SparseVec<TermKey> = v
            .iter()
            .map(|(id, c)| (self.terms[*id].clone(), c.clone()))
            .collect();
        self.from_terms(acc)
    }

    /// The vector field with the given global coordinates.
    pub fn field(&self, coords: &SparseVec<usize>) -> VectorField {
        let mut acc: SparseVec<TermKey> = SparseVec::new();
        for (g, a) in coords {
            axpy(
                &mut acc,
                a,
                &field_vector(self.alg.element(self.alg.locate(*g))),
            );
        }
        self.from_terms(acc)
    }

    fn from_terms(&self, acc: SparseVec<TermKey>) -> VectorField {
        let sig = self.config().signature();
        let mut coeffs = vec![SuperPoly::zero(sig); sig.vars()];
        for ((r, m), c) in acc {
            coeffs[r - 1] = coeffs[r - 1]
                .add(&SuperPoly::monomial(sig, m, c))
                .expect("same signature");
        }
        VectorField::from_coeffs(coeffs).expect("well-formed")
    }

    /// Degree of the domain element at position `p`.
    pub fn domain_degree(&self, p: usize) -> i64 {
        self.alg.locate(self.domain[p]).degree
    }

    /// All multisets `{a ≤ b ≤ c}` of domain positions, ordered by total
    /// degree and then lexicographically. The identity is symmetric up to sign
    /// under permutations, so these cover every ordered triple.
    pub fn all_triples(&self) -> Vec<[usize; 3]> {
        self.triples_where(|_| true)
    }

    /// The multisets with at most one element of positive degree. Equal to
    /// [`SigmaParam::all_triples`] when the domain stops at degree 0.
    pub fn standard_triples(&self) -> Vec<[usize; 3]> {
        self.triples_where(|t| t.iter().filter(|&&p| self.domain_degree(p) > 0).count() <= 1)
    }

    fn triples_where(&self, keep: impl Fn(&[usize; 3]) -> bool) -> Vec<[usize; 3]> {
        let n = self.domain.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    if keep(&[a, b, c]) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        let deg = |p: usize| self.domain_degree(p);
        out.sort_by_key(|t| deg(t[0]) + deg(t[1]) + deg(t[2]));
        out
    }

    /// Rows contributed by one triple to the blocks flagged in `live`, keyed
    /// by `(block, output basis element)` with entries over block-local
    /// unknown positions.
    fn triple_rows(
        &self,
        t: [usize; 3],
        live: &[bool],
    ) -> BTreeMap<(usize, usize), SparseVec<usize>> {
        let [a, b, c] = t;
        let mut acc: BTreeMap<(usize, usize), SparseVec<usize>> = BTreeMap::new();
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            let w = self.pair_bracket(y, z);
            if w.is_empty() {
                continue;
            }
            let sign = scalar::int(self.domain_parity(x).koszul(self.domain_parity(z)));
            let scaled: Vec<(usize, Scalar)> = w
                .iter()
                .map(|(v, wv)| (self.low_pos[v], wv * &sign))
                .collect();
            for (blk, members) in &self.by_domain[x] {
                if !live[*blk] {
                    continue;
                }
                for (loc, cc) in members {
                    let base = cc * self.low.len();
                    for (vp, wv) in &scaled {
                        for (e, val) in &self.ad[base + vp] {
                            let row = acc.entry((*blk, *e)).or_default();
                            let add = wv * val;
                            let slot = row.entry(*loc).or_insert_with(Scalar::zero);
                            *slot += add;
                            if slot.is_zero() {
                                row.remove(loc);
                            }
                        }
                    }
                }
            }
        }
        acc.retain(|_, r| !r.is_empty());
        acc
    }

    /// Explicit constraint rows for a selection of triples.
    pub fn generate_constraints(&self, triples: &[[usize; 3]]) -> Result<ConstraintSystem> {
        let n = self.domain.len();
        if let Some(t) = triples.iter().find(|t| t.iter().any(|&p| p >= n)) {
            return Err(Error::InvalidArgument(format!(
                "triple {t:?} outside the σ-domain"
            )));
        }
        let live = vec![true; self.blocks.len()];
        let per = par::map(triples, |t| self.triple_rows(*t, &live));
        let mut rows = Vec::new();
        for (ti, (t, map)) in triples.iter().zip(per).enumerate() {
            let mut ordered: Vec<((usize, usize), SparseVec<usize>)> = map.into_iter().collect();
            ordered.sort_by_key(|((blk, e), _)| (self.term_degree[*e], *e, *blk));
            for ((blk, e), r) in ordered {
                let coeffs = r
                    .into_iter()
                    .map(|(l, v)| (self.blocks[blk].unknowns[l], v))
                    .collect();
                rows.push(ConstraintRow {
                    triple_index: ti,
                    triple: *t,
                    output: e,
                    block: blk,
                    coeffs,
                });
            }
        }
        Ok(ConstraintSystem {
            unknowns: self.unknowns.len(),
            rows,
        })
    }

    /// Solves the constraints of `triples` block by block. Blocks stop taking
    /// rows once their rank reaches their size.
    pub fn solve(&self, triples: &[[usize; 3]]) -> HomSolution {
        let mut states: Vec<BlockState> = self
            .blocks
            .iter()
            .map(|b| BlockState {
                echelon: SparseEchelon::lean(),
                size: b.unknowns.len(),
                pending: Vec::new(),
                certificate: Vec::new(),
            })
            .collect();
        let chunk = 64 * par::threads().max(1);
        let mut processed = 0;
        for (ci, batch) in triples.chunks(chunk).enumerate() {
            let live: Vec<bool> = states.iter().map(|s| !s.full()).collect();
            if !live.iter().any(|&l| l) {
                break;
            }
            let per = par::map(batch, |t| self.triple_rows(*t, &live));
            for (k, map) in per.into_iter().enumerate() {
                let ti = ci * chunk + k;
                for ((blk, e), row) in map {
                    states[blk].pending.push((ti, e, row));
                }
            }
            par::for_each_mut(&mut states, BlockState::flush);
            processed += batch.len();
        }
        let mut nullspace_blocks = Vec::new();
        let mut nullspace = Vec::new();
        for (bi, s) in states.iter().enumerate() {
            if s.full() {
                continue;
            }
            for v in s.echelon.nullspace(s.size) {
                let global: SigmaMap = v
                    .into_iter()
                    .map(|(l, a)| (self.blocks[bi].unknowns[l], a))
                    .collect();
                nullspace.push(global);
                nullspace_blocks.push(bi);
            }
        }
        let identity = self.identity();
        let contains_identity = is_in_span(&identity, &nullspace);
        HomSolution {
            unknowns: self.unknowns.len(),
            triples_total: triples.len(),
            triples_processed: processed,
            rank: states.iter().map(|s| s.echelon.rank()).sum(),
            nullspace,
            nullspace_blocks,
            contains_identity,
            certificates: states.into_iter().map(|s| s.certificate).collect(),
        }
    }

    /// Residual of the identity for a σ-map on one triple, over interned terms.
    pub fn residual(&self, sigma: &SigmaMap, t: [usize; 3]) -> Result<SparseVec<usize>> {
        let [a, b, c] = t;
        let mut out = SparseVec::new();
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            let w = self.pair_bracket(y, z);
            if w.is_empty() {
                continue;
            }
            let sign = scalar::int(self.domain_parity(x).koszul(self.domain_parity(z)));
            for (cc, s) in self.image(sigma, x) {
                let v = self.ad_combination(cc, w)?;
                axpy(&mut out, &(&s * &sign), &v);
            }
        }
        Ok(out)
    }
}

struct BlockState {
    echelon: SparseEchelon<usize>,
    size: usize,
    pending: Vec<(usize, usize, SparseVec<usize>)>,
    certificate: Vec<(usize, usize)>,
}

impl BlockState {
    fn full(&self) -> bool {
        self.echelon.rank() == self.size
    }

    fn flush(&mut self) {
        let pending = std::mem::take(&mut self.pending);
        for (ti, e, row) in pending {
            if self.full() {
                break;
            }
            if self.echelon.insert(row) {
                self.certificate.push((ti, e));
            }
        }
    }
}

fn is_in_span(v: &SigmaMap, basis: &[SigmaMap]) -> bool {
    let mut ech: SparseEchelon<usize> = SparseEchelon::lean();
    for b in basis {
        ech.insert(b.clone());
    }
    ech.contains(v)
}

/// One linear equation in the unknowns.
#[derive(Clone, Debug)]
pub struct ConstraintRow {
    pub triple_index: usize,
    pub triple: [usize; 3],
    /// Interned term whose coefficient this row is.
    pub output: usize,
    pub block: usize,
    pub coeffs: SparseVec<usize>,
}

/// Explicit rows with provenance, ordered by `(triple, output degree, output term)`.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub unknowns: usize,
    pub rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    /// Value of every row at `sigma`.
    pub fn evaluate(&self, sigma: &SigmaMap) -> Vec<Scalar> {
        self.rows
            .iter()
            .map(|r| sparse_dot(&r.coeffs, sigma))
            .collect()
    }

    pub fn rank(&self) -> usize {
        let mut ech: SparseEchelon<usize> = SparseEchelon::lean();
        for r in &self.rows {
            ech.insert(r.coeffs.clone());
        }
        ech.rank()
    }

    pub fn nullspace(&self) -> Vec<SigmaMap> {
        let mut ech: SparseEchelon<usize> = SparseEchelon::lean();
        for r in &self.rows {
            ech.insert(r.coeffs.clone());
        }
        ech.nullspace(self.unknowns)
    }
}

/// Output of the nullspace stage.
#[derive(Clone, Debug)]
pub struct HomSolution {
    pub unknowns: usize,
    pub triples_total: usize,
    pub triples_processed: usize,
    pub rank: usize,
    pub nullspace: Vec<SigmaMap>,
    /// Block of each nullspace vector.
    pub nullspace_blocks: Vec<usize>,
    pub contains_identity: bool,
    /// Per block, the `(triple index, output)` of every row that raised the rank.
    pub certificates: Vec<Vec<(usize, usize)>>,
}

impl HomSolution {
    pub fn nullity(&self) -> usize {
        self.nullspace.len()
    }

    /// A basis of the nullspace restricted to domain elements of degree at
    /// most `max_degree`. Each vector still lies in a single block.
    pub fn projected(&self, param: &SigmaParam, max_degree: i64) -> Vec<SigmaMap> {
        let mut per_block: BTreeMap<usize, SparseEchelon<usize>> = BTreeMap::new();
        let mut out = Vec::new();
        for (v, &b) in self.nullspace.iter().zip(&self.nullspace_blocks) {
            let p = param.project(v, max_degree);
            if !p.is_empty()
                && per_block
                    .entry(b)
                    .or_insert_with(SparseEchelon::lean)
                    .insert(p.clone())
            {
                out.push(p);
            }
        }
        out
    }
}

/// Classification of one nonzero multiplicative solution.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionKind {
    Identity,
    Other,
}

#[derive(Clone, Debug)]
pub struct MultiplicativeSolution {
    pub map: SigmaMap,
    pub kind: SolutionKind,
    /// The whole line through `map` is multiplicative.
    pub continuum: bool,
}

/// Result of intersecting the nullspace with the multiplicativity equations.
#[derive(Clone, Debug)]
pub enum MultiplicativeSet {
    /// Every multiplicative σ is `0` or one of `solutions`.
    Classified {
        solutions: Vec<MultiplicativeSolution>,
    },
    /// No pairs were checked; the nullspace is returned as is.
    Unfiltered,
    Inconclusive {
        reason: String,
    },
}

impl MultiplicativeSet {
    pub fn is_trivial(&self) -> bool {
        match self {
            MultiplicativeSet::Classified { solutions } => solutions
                .iter()
                .all(|s| s.kind == SolutionKind::Identity && !s.continuum),
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MultiplicativeSet::Classified { solutions } => {
                let mut parts = vec!["0".to_string()];
                for s in solutions {
                    parts.push(match (&s.kind, s.continuum) {
                        (SolutionKind::Identity, false) => "id".into(),
                        (SolutionKind::Identity, true) => "t*id (all t)".into(),
                        (SolutionKind::Other, false) => "non-trivial".into(),
                        (SolutionKind::Other, true) => "non-trivial line".into(),
                    });
                }
                format!("{{{}}}", parts.join(", "))
            }
            MultiplicativeSet::Unfiltered => "unfiltered".into(),
            MultiplicativeSet::Inconclusive { reason } => {
                format!("manual analysis required: {reason}")
            }
        }
    }
}

/// All unordered pairs of domain positions whose bracket stays in the domain.
pub fn all_pairs(param: &SigmaParam) -> Vec<(usize, usize)> {
    scoped_pairs(param, i64::MAX)
}

/// Unordered pairs of domain elements of degree at most `max_degree` whose
/// bracket is again such an element combination.
pub fn scoped_pairs(param: &SigmaParam, max_degree: i64) -> Vec<(usize, usize)> {
    let n = param.domain().len();
    let inside = |p: usize| param.domain_degree(p) <= max_degree;
    let mut out = Vec::new();
    for a in (0..n).filter(|&a| inside(a)) {
        for b in (a..n).filter(|&b| inside(b)) {
            if param
                .pair_bracket(a, b)
                .keys()
                .all(|g| param.domain_position(*g).is_some_and(inside))
            {
                out.push((a, b));
            }
        }
    }
    out
}

/// Solves `σ[x,y] = [σx,σy]` on `pairs` for `σ` in the span of `basis`.
/// Exact for spans of dimension at most 2; larger spans are inconclusive.
pub fn filter_multiplicative(
    param: &SigmaParam,
    basis: &[SigmaMap],
    pairs: &[(usize, usize)],
) -> Result<MultiplicativeSet> {
    if pairs.is_empty() {
        return Ok(MultiplicativeSet::Unfiltered);
    }
    let k = basis.len();
    if k == 0 {
        return Ok(MultiplicativeSet::Classified {
            solutions: Vec::new(),
        });
    }
    if k > 2 {
        return Ok(MultiplicativeSet::Inconclusive {
            reason: format!("nullspace dimension {k} exceeds 2"),
        });
    }
    // A[i]: σ_i[x,y]; B[i][j]: [σ_i x, σ_j y], as term vectors concatenated over pairs
    let images: Vec<Vec<VectorField>> = basis
        .iter()
        .map(|s| {
            (0..param.domain().len())
                .map(|p| param.field(&param.image(s, p)))
                .collect()
        })
        .collect();
    let per_pair = par::map(
        pairs,
        |&(x, y)| -> Result<(Vec<SparseVec<TermKey>>, Vec<Vec<SparseVec<TermKey>>>)> {
            let w = param.pair_bracket(x, y);
            let px = param.domain_parity(x);
            let py = param.domain_parity(y);
            let mut a = Vec::with_capacity(k);
            let mut b = vec![Vec::with_capacity(k); k];
            for i in 0..k {
                a.push(field_vector(&param.field(&param.apply(&basis[i], w)?)));
                for j in 0..k {
                    b[i].push(field_vector(&images[i][x].bracket_with_parities(
                        &images[j][y],
                        px,
                        py,
                    )));
                }
            }
            Ok((a, b))
        },
    );
    let mut a_vecs: Vec<SparseVec<(usize, TermKey)>> = vec![SparseVec::new(); k];
    let mut b_vecs: Vec<Vec<SparseVec<(usize, TermKey)>>> = vec![vec![SparseVec::new(); k]; k];
    for (pi, r) in per_pair.into_iter().enumerate() {
        let (a, b) = r?;
        for i in 0..k {
            a_vecs[i].extend(a[i].iter().map(|(key, v)| ((pi, key.clone()), v.clone())));
            for j in 0..k {
                b_vecs[i][j].extend(
                    b[i][j]
                        .iter()
                        .map(|(key, v)| ((pi, key.clone()), v.clone())),
                );
            }
        }
    }
    let keys: BTreeSet<(usize, TermKey)> = a_vecs
        .iter()
        .flat_map(|v| v.keys().cloned())
        .chain(b_vecs.iter().flatten().flat_map(|v| v.keys().cloned()))
        .collect();
    let get = |v: &SparseVec<(usize, TermKey)>, key: &(usize, TermKey)| {
        v.get(key).cloned().unwrap_or_else(Scalar::zero)
    };
    // per coordinate: linear part A(d) and quadratic part B(d,d) in the direction d
    let coord_polys: Vec<(Vec<Scalar>, Vec<Vec<Scalar>>)> = keys
        .iter()
        .map(|key| {
            let a: Vec<Scalar> = (0..k).map(|i| get(&a_vecs[i], key)).collect();
            let b: Vec<Vec<Scalar>> = (0..k)
                .map(|i| (0..k).map(|j| get(&b_vecs[i][j], key)).collect())
                .collect();
            (a, b)
        })
        .collect();

    let scope = pairs
        .iter()
        .map(|&(x, y)| param.domain_degree(x).max(param.domain_degree(y)))
        .max()
        .unwrap_or(i64::MIN);
    let identity = param.project(&param.identity(), scope);
    let mut solutions = Vec::new();
    let mut directions: Vec<Vec<Scalar>> = Vec::new();
    if k == 1 {
        directions.push(vec![Scalar::one()]);
    } else {
        // affine chart d = (1, u) plus the point d = (0, 1)
        let eval_chart = |(a, b): &(Vec<Scalar>, Vec<Vec<Scalar>>)| {
            let lin = Poly::new(vec![a[0].clone(), a[1].clone()]);
            let quad = Poly::new(vec![b[0][0].clone(), &b[0][1] + &b[1][0], b[1][1].clone()]);
            (lin, quad)
        };
        let polys: Vec<(Poly, Poly)> = coord_polys.iter().map(eval_chart).collect();
        let reference = polys.iter().position(|(l, q)| !l.is_zero() || !q.is_zero());
        if let Some(r) = reference {
            let (lr, qr) = &polys[r];
            let mut g = Poly::zero();
            for (l, q) in &polys {
                let minor = lr.mul(q).sub(&l.mul(qr));
                g = g.gcd(&minor);
                if g.degree() == Some(0) {
                    break;
                }
            }
            if g.is_zero() {
                // every coordinate is proportional along the whole chart: pick sample directions
                for u in [0i64, 1, 2, -1] {
                    directions.push(vec![Scalar::one(), scalar::int(u)]);
                }
            } else {
                match g.rational_roots() {
                    Some(roots) => {
                        for u in roots {
                            directions.push(vec![Scalar::one(), u]);
                        }
                    }
                    None => {
                        return Ok(MultiplicativeSet::Inconclusive {
                            reason: format!("could not isolate the roots of {}", g.display()),
                        })
                    }
                }
            }
        }
        directions.push(vec![Scalar::zero(), Scalar::one()]);
    }
    for d in directions {
        let mut s: Option<Scalar> = None;
        let mut ok = true;
        let mut b_all_zero = true;
        let mut a_all_zero = true;
        for (a, b) in &coord_polys {
            let lin: Scalar = (0..k).map(|i| &d[i] * &a[i]).sum();
            let quad: Scalar = (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| &d[i] * &d[j] * &b[i][j])
                .sum();
            if !lin.is_zero() {
                a_all_zero = false;
            }
            if quad.is_zero() {
                if !lin.is_zero() {
                    ok = false;
                    break;
                }
                continue;
            }
            b_all_zero = false;
            let cand = lin / quad;
            match &s {
                None => s = Some(cand),
                Some(prev) if *prev == cand => {}
                Some(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let (scale, continuum) = if b_all_zero {
            if !a_all_zero {
                continue;
            }
            (Scalar::one(), true)
        } else {
            match s {
                Some(v) if !v.is_zero() => (v, false),
                _ => continue,
            }
        };
        let mut map = SigmaMap::new();
        for i in 0..k {
            axpy(&mut map, &(&d[i] * &scale), &basis[i]);
        }
        if map.is_empty() {
            continue;
        }
        let kind = if map == identity {
            SolutionKind::Identity
        } else {
            SolutionKind::Other
        };
        if !solutions
            .iter()
            .any(|x: &MultiplicativeSolution| x.map == map)
        {
            solutions.push(MultiplicativeSolution {
                map,
                kind,
                continuum,
            });
        }
    }
    Ok(MultiplicativeSet::Classified { solutions })
}

/// Dense univariate polynomial over the rationals, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<Scalar>);

impl Poly {
    fn new(mut c: Vec<Scalar>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    fn zero() -> Self {
        Poly(Vec::new())
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Scalar::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = Scalar::zero();
        Poly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    fn rem(&self, o: &Poly) -> Poly {
        let mut r = self.0.clone();
        let d = o.0.len();
        let lead = o.0.last().expect("nonzero divisor").clone();
        while r.len() >= d {
            let q = r.last().expect("nonempty") / &lead;
            let shift = r.len() - d;
            for (i, c) in o.0.iter().enumerate() {
                r[shift + i] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    fn monic(&self) -> Poly {
        match self.0.last() {
            None => Poly::zero(),
            Some(l) => Poly(self.0.iter().map(|c| c / l).collect()),
        }
    }

    fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn eval(&self, x: &Scalar) -> Scalar {
        self.0
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, c| acc * x + c)
    }

    fn display(&self) -> String {
        self.0
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}*u^{i}", scalar::display(c)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Rational roots for degree ≤ 3: every rational root is `k / a_n` for
    /// an integer `k` once the coefficients are cleared to integers, so
    /// candidates come from floating-point real roots rounded on that grid.
    /// `None` when the magnitudes are too large for that to be reliable.
    fn rational_roots(&self) -> Option<Vec<Scalar>> {
        let deg = self.degree()?;
        if deg == 0 {
            return Some(Vec::new());
        }
        if deg > 3 {
            return None;
        }
        let den = self.0.iter().fold(BigInt::one(), |acc, c| {
            num_integer::Integer::lcm(&acc, c.denom())
        });
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * Scalar::from_integer(den.clone())).to_integer())
            .collect();
        let lead = ints.last().expect("nonzero").abs();
        let floats: Option<Vec<f64>> = ints.iter().map(|c| c.to_f64()).collect();
        let floats = floats?;
        if floats.iter().any(|c| c.abs() > 1e12) || lead.to_f64()? > 1e6 {
            return None;
        }
        let mut roots = Vec::new();
        for r in real_roots(&floats) {
            let base = (r * lead.to_f64()?).round();
            for delta in [-1.0, 0.0, 1.0] {
                let cand = Scalar::new(BigInt::from((base + delta) as i64), lead.clone());
                if self.eval(&cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
        roots.sort();
        Some(roots)
    }
}

/// Real roots of a polynomial of degree ≤ 3 with `f64` coefficients.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let eval = |x: f64| c.iter().rev().fold(0.0, |acc, a| acc * x + a);
    match c.len() {
        2 => vec![-c[0] / c[1]],
        3 => {
            let disc = c[1] * c[1] - 4.0 * c[2] * c[0];
            if disc < -1e-9 {
                Vec::new()
            } else {
                let s = disc.max(0.0).sqrt();
                vec![(-c[1] - s) / (2.0 * c[2]), (-c[1] + s) / (2.0 * c[2])]
            }
        }
        4 => {
            // split at the critical points and bisect each monotone piece
            let bound = 1.0 + c[..3].iter().map(|a| (a / c[3]).abs()).fold(0.0, f64::max);
            let mut cuts = vec![-bound];
            let d = [c[1], 2.0 * c[2], 3.0 * c[3]];
            let mut crit = real_roots(&d);
            crit.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            cuts.extend(crit.into_iter().filter(|x| x.abs() < bound));
            cuts.push(bound);
            let mut out = Vec::new();
            for w in cuts.windows(2) {
                let (mut lo, mut hi) = (w[0], w[1]);
                let (flo, fhi) = (eval(lo), eval(hi));
                if flo == 0.0 {
                    out.push(lo);
                    continue;
                }
                if flo.signum() == fhi.signum() {
                    // touching root at a critical point
                    if fhi.abs() < 1e-9 {
                        out.push(hi);
                    }
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if eval(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Everything the propositions need from one configuration.
pub struct HomPipeline {
    pub param: SigmaParam,
    pub solution: HomSolution,
    /// The nullspace restricted to `g_{-d} ⊕ … ⊕ g_0`.
    pub restricted: Vec<SigmaMap>,
    pub multiplicative: MultiplicativeSet,
    pub pairs_checked: usize,
    pub codomain_max: i64,
}

/// Solves on `g_{-d} ⊕ … ⊕ g_{d-1}` with codomain `[-d, codomain_max]` and
/// classifies the multiplicative maps on `g_{-d} ⊕ … ⊕ g_0`. For depth 2
/// the triples with one element of `g_1` are what tie `g_{-2}` to the rest;
/// triples with two or more are left out.
pub fn run_pipeline(config: &FamilyConfig, codomain_max: i64) -> Result<HomPipeline> {
    let d = config.depth();
    let param = SigmaParam::new(config, -d..=d - 1, codomain_max)?;
    let triples = param.standard_triples();
    let solution = param.solve(&triples);
    let restricted = solution.projected(&param, 0);
    let pairs = scoped_pairs(&param, 0);
    let multiplicative = filter_multiplicative(&param, &restricted, &pairs)?;
    Ok(HomPipeline {
        param,
        solution,
        restricted,
        multiplicative,
        pairs_checked: pairs.len(),
        codomain_max,
    })
}

/// Whether every nonzero multiplicative solution is the identity on the
/// components of degrees `degrees`; returns the first offending element.
fn restricts_to_identity(
    pipeline: &HomPipeline,
    degrees: RangeInclusive<i64>,
) -> Option<(String, String)> {
    let MultiplicativeSet::Classified { solutions } = &pipeline.multiplicative else {
        return None;
    };
    let param = &pipeline.param;
    for s in solutions {
        for (p, &g) in param.domain().iter().enumerate() {
            let r = param.algebra().locate(g);
            if !degrees.contains(&r.degree) {
                continue;
            }
            let img = param.image(&s.map, p);
            let expect: SparseVec<usize> = [(g, Scalar::one())].into_iter().collect();
            if img != expect || s.continuum {
                return Some((
                    param.algebra().element(r).to_string(),
                    param.field(&img).to_string(),
                ));
            }
        }
    }
    None
}

/// Report for the pipeline at `codomain_max` and a rerun at `codomain_max + 1`.
pub fn pipeline_report(
    suite: &str,
    config: &FamilyConfig,
    main: &HomPipeline,
    wider: Option<&HomPipeline>,
    target: RangeInclusive<i64>,
) -> CheckReport {
    let mut report = CheckReport::new(suite, Some(config));
    let alg = main.param.algebra();
    for (j, d) in alg.dims() {
        report.dims.insert(format!("g[{j}]"), d as i64);
    }
    report.nullspace_dim = Some(main.restricted.len());
    report
        .details
        .insert("solve_nullspace_dim".into(), json!(main.solution.nullity()));
    report
        .details
        .insert("domain_dim".into(), json!(main.param.domain().len()));
    report.details.insert(
        "codomain_window".into(),
        json!([alg.window().0, alg.window().1]),
    );
    report
        .details
        .insert("unknowns".into(), json!(main.solution.unknowns));
    report
        .details
        .insert("blocks".into(), json!(main.param.blocks().len()));
    report
        .details
        .insert("rank".into(), json!(main.solution.rank));
    report.details.insert(
        "triples".into(),
        json!({"total": main.solution.triples_total, "processed": main.solution.triples_processed}),
    );
    report.details.insert(
        "identity_in_nullspace".into(),
        json!(main.solution.contains_identity),
    );
    report
        .details
        .insert("multiplicative_pairs".into(), json!(main.pairs_checked));
    report
        .details
        .insert("solutions".into(), json!(main.multiplicative.describe()));
    let mut status = Status::Pass;
    let mut notes = Vec::new();
    if !main.solution.contains_identity {
        status = Status::Fail;
        notes.push("identity is not in the nullspace".to_string());
    }
    if let Some(w) = wider {
        let same = w.restricted.len() == main.restricted.len();
        report.details.insert(
            "codomain_sensitivity".into(),
            json!({"codomain_max": w.codomain_max, "nullspace_dim": w.restricted.len(), "unchanged": same}),
        );
        if !same {
            status = status.worst(Status::Inconclusive);
            notes.push("nullspace changed when the codomain window grew".to_string());
        }
    }
    match &main.multiplicative {
        MultiplicativeSet::Inconclusive { reason } => {
            status = status.worst(Status::Inconclusive);
            notes.push(reason.clone());
        }
        MultiplicativeSet::Unfiltered => {
            status = status.worst(Status::Inconclusive);
            notes.push("no multiplicativity pairs".into());
        }
        MultiplicativeSet::Classified { .. } => {
            if let Some((x, img)) = restricts_to_identity(main, target.clone()) {
                status = Status::Fail;
                report.counterexample = Some(json!({"element": x, "sigma_image": img}));
            }
        }
    }
    report.details.insert(
        "target_degrees".into(),
        json!([target.start(), target.end()]),
    );
    if !notes.is_empty() {
        report.details.insert("notes".into(), json!(notes));
    }
    report.status = status;
    report
}

/// σ restricted to `g_{-1}` is `0` or the identity for every multiplicative solution.
pub fn verify_prop_minus1(config: &FamilyConfig, codomain_max: i64) -> Result<CheckReport> {
    let main = run_pipeline(config, codomain_max)?;
    let wider = run_pipeline(config, codomain_max + 1)?;
    Ok(pipeline_report(
        "prop-minus1",
        config,
        &main,
        Some(&wider),
        -1..=-1,
    ))
}

/// σ restricted to `g_{-d} ⊕ … ⊕ g_0` is `0` or the identity.
pub fn verify_prop_zero(config: &FamilyConfig, codomain_max: i64) -> Result<CheckReport> {
    let main = run_pipeline(config, codomain_max)?;
    let wider = run_pipeline(config, codomain_max + 1)?;
    let d = config.depth();
    Ok(pipeline_report(
        "prop-zero",
        config,
        &main,
        Some(&wider),
        -d..=0,
    ))
}

/// Homogeneous elements `w` of `comp` with `[w, s] = 0` for every `s` in
/// `elems`. Each `s` must be grade-homogeneous; the kernel is computed one
/// torus block of `comp` at a time.
pub fn common_annihilator(
    config: &FamilyConfig,
    comp: &GradedComponent,
    elems: &[VectorField],
) -> Result<Vec<VectorField>> {
    let sig = config.signature();
    let parities = elems
        .iter()
        .map(|e| e.homogeneous_parity())
        .collect::<Result<Vec<_>>>()?;
    let mut blocks: BTreeMap<(Vec<i32>, Parity), Vec<usize>> = BTreeMap::new();
    for (i, (g, p)) in comp.grades().iter().zip(comp.parities()).enumerate() {
        blocks.entry((g.torus.clone(), *p)).or_default().push(i);
    }
    let jobs: Vec<Vec<usize>> = blocks.into_values().collect();
    let kernels = par::map(&jobs, |members| {
        let mut rows: BTreeMap<(usize, TermKey), SparseVec<usize>> = BTreeMap::new();
        for (col, &i) in members.iter().enumerate() {
            let w = &comp.basis()[i];
            let pw = comp.parities()[i];
            for (si, s) in elems.iter().enumerate() {
                let br = w.bracket_with_parities(s, pw, parities[si]);
                for (key, v) in field_vector(&br) {
                    rows.entry((si, key)).or_default().insert(col, v);
                }
            }
        }
        let mut ech: SparseEchelon<usize> = SparseEchelon::lean();
        for r in rows.into_values() {
            if ech.rank() == members.len() {
                break;
            }
            ech.insert(r);
        }
        ech.nullspace(members.len())
            .into_iter()
            .map(|v| {
                let coords: SparseVec<usize> =
                    v.into_iter().map(|(c, a)| (members[c], a)).collect();
                comp.combination(&coords).expect("nonempty component")
            })
            .collect::<Vec<_>>()
    });
    let _ = sig;
    Ok(kernels.into_iter().flatten().collect())
}

/// Echelon of the span of `[a, b]` over `a, b ∈ basis`, stopping early once
/// the span reaches `cap` dimensions.
fn bracket_span(basis: &[VectorField], cap: usize) -> Result<SparseEchelon<TermKey>> {
    let parities = basis
        .iter()
        .map(|b| b.homogeneous_parity())
        .collect::<Result<Vec<_>>>()?;
    let mut ech = SparseEchelon::lean();
    let pairs: Vec<(usize, usize)> = (0..basis.len())
        .flat_map(|i| (i..basis.len()).map(move |j| (i, j)))
        .collect();
    for chunk in pairs.chunks(256) {
        if ech.rank() >= cap {
            break;
        }
        let brs = par::map(chunk, |&(i, j)| {
            basis[i].bracket_with_parities(&basis[j], parities[i], parities[j])
        });
        for br in brs {
            if ech.rank() >= cap {
                break;
            }
            ech.insert(field_vector(&br));
        }
    }
    Ok(ech)
}

fn span_echelon(fields: &[VectorField]) -> SparseEchelon<TermKey> {
    let mut ech = SparseEchelon::lean();
    for f in fields {
        ech.insert(field_vector(f));
    }
    ech
}

/// Outcome of a perfectness comparison `[K, K] = K`.
#[derive(Clone, Debug)]
pub struct PerfectnessCheck {
    pub kernel_dim: usize,
    pub bracket_dim: usize,
    pub asserted_dim: usize,
    pub kernel_matches_assertion: bool,
    /// A kernel element outside `[K, K]`, if any.
    pub witness: Option<String>,
}

impl PerfectnessCheck {
    pub fn holds(&self) -> bool {
        self.kernel_matches_assertion
            && self.witness.is_none()
            && self.bracket_dim == self.kernel_dim
    }
}

/// Which degree −1 element the kernel is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelElement {
    /// `∂_i` itself.
    Partial,
    /// `D_X(x_{i'})`, the element of `g_{-1}` playing the role of `∂_i`.
    Operator,
}

/// `Ker(ad e) ∩ X_0` against `span{x_j∂_k : j ≠ i} ∩ X_0`, and whether
/// that kernel is perfect; `e` is `∂_i` or `D_X(x_{i'})`.
pub fn kernel_ad_check(
    builder: &mut ComponentBuilder,
    i: usize,
    element: KernelElement,
) -> Result<PerfectnessCheck> {
    let cfg = builder.config().clone();
    let sig = cfg.signature();
    sig.check_index(i)?;
    if cfg.nu() == Some(i) {
        return Err(Error::InvalidArgument(format!(
            "index {i} is the distinguished index"
        )));
    }
    let e = match element {
        KernelElement::Partial => VectorField::partial(sig, i)?,
        KernelElement::Operator => {
            if !cfg.family().has_generating_operator() {
                return Err(Error::InvalidArgument(format!(
                    "{} has no generating operator",
                    cfg.family()
                )));
            }
            let ip = cfg
                .maps()
                .iprime(i)
                .ok_or_else(|| Error::InvalidArgument(format!("index {i} has no partner")))?;
            cfg.d_x(&SuperPoly::var(sig, ip)?)?
        }
    };
    let comp0 = builder.component(0)?;
    let kernel = common_annihilator(&cfg, &comp0, &[e])?;
    // x_j∂_k with j ≠ i: the x_i∂_k coordinates of an element must vanish
    let xi = SuperPoly::var(sig, i)?;
    let xi_mono = *xi.terms().next().expect("variable").0;
    let mut asserted_gens = Vec::new();
    {
        let mut blocks: BTreeMap<(Vec<i32>, Parity), Vec<usize>> = BTreeMap::new();
        for (k, (g, p)) in comp0.grades().iter().zip(comp0.parities()).enumerate() {
            blocks.entry((g.torus.clone(), *p)).or_default().push(k);
        }
        for members in blocks.values() {
            let mut rows: BTreeMap<TermKey, SparseVec<usize>> = BTreeMap::new();
            for (col, &k) in members.iter().enumerate() {
                for (key, v) in field_vector(&comp0.basis()[k]) {
                    if key.1 == xi_mono {
                        rows.entry(key).or_default().insert(col, v);
                    }
                }
            }
            let mut ech: SparseEchelon<usize> = SparseEchelon::lean();
            for r in rows.into_values() {
                ech.insert(r);
            }
            for v in ech.nullspace(members.len()) {
                let coords: SparseVec<usize> =
                    v.into_iter().map(|(c, a)| (members[c], a)).collect();
                asserted_gens.push(comp0.combination(&coords).expect("nonempty"));
            }
        }
    }
    let kernel_ech = span_echelon(&kernel);
    let asserted_ech = span_echelon(&asserted_gens);
    let matches = kernel_ech.rank() == asserted_ech.rank()
        && asserted_gens
            .iter()
            .all(|a| kernel_ech.contains(&field_vector(a)));
    let brackets = bracket_span(&kernel, kernel.len())?;
    let witness = kernel
        .iter()
        .find(|k| !brackets.contains(&field_vector(k)))
        .map(ToString::to_string);
    Ok(PerfectnessCheck {
        kernel_dim: kernel.len(),
        bracket_dim: brackets.rank(),
        asserted_dim: asserted_gens.len(),
        kernel_matches_assertion: matches,
        witness,
    })
}

/// Which index conditions select the tuples of the centralizer-bracket lemma.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleConditions {
    /// Exactly as stated: `k ≠ j, l` (first form); `k ≠ l`, `k, l ∉ {i', j'}` (second form).
    Literal,
    /// First form with `l ≠ i` added, which is what `x_k∂_l` commuting with
    /// `x_i∂_j` requires.
    Centralizing,
}

/// One tuple of the centralizer-bracket lemma and whether the membership holds.
#[derive(Clone, Debug)]
pub struct TupleOutcome {
    pub tuple: [usize; 4],
    pub element: String,
    pub holds: bool,
}

/// Exhaustive check of the centralizer-bracket lemma. For W and S the
/// elements are `x_k∂_l` and the centralizers those of `x_i∂_j`; for the
/// other families `D_X(x_k x_l)` and `D_X(x_i x_j)`.
pub fn yuanl1_check(
    builder: &mut ComponentBuilder,
    conditions: TupleConditions,
) -> Result<Vec<TupleOutcome>> {
    let cfg = builder.config().clone();
    let sig = cfg.signature();
    let vars = sig.vars();
    let nu = cfg.nu();
    let comp0 = builder.component(0)?;
    let comp0_ech = span_echelon(comp0.basis());
    let first_form = matches!(cfg.family(), Family::W | Family::S);
    let x = |i: usize| SuperPoly::var(sig, i).expect("index");
    let element = |k: usize, l: usize| -> Result<VectorField> {
        if first_form {
            VectorField::term(x(k), l)
        } else {
            cfg.d_x(&x(k).mul(&x(l))?)
        }
    };
    let idx: Vec<usize> = (1..=vars).filter(|&i| Some(i) != nu).collect();
    let maps = cfg.maps();
    let prime = |i: usize| maps.iprime(i);
    let mut out = Vec::new();
    let mut heads = Vec::new();
    for &i in &idx {
        for &j in &idx {
            if !first_form && j < i {
                continue;
            }
            let h = element(i, j)?;
            if h.is_zero() || !comp0_ech.contains(&field_vector(&h)) {
                continue;
            }
            heads.push((i, j, h));
        }
    }
    let results = par::map(&heads, |(i, j, h)| -> Result<Vec<TupleOutcome>> {
        let kernel = common_annihilator(&cfg, &comp0, std::slice::from_ref(h))?;
        let span = bracket_span(&kernel, kernel.len())?;
        let mut rows = Vec::new();
        for &k in &idx {
            for &l in &idx {
                let admissible = if first_form {
                    let literal = k != *j && k != l;
                    match conditions {
                        TupleConditions::Literal => literal,
                        TupleConditions::Centralizing => literal && l != *i,
                    }
                } else {
                    k < l
                        && [prime(*i), prime(*j)]
                            .iter()
                            .all(|p| *p != Some(k) && *p != Some(l))
                };
                if !admissible {
                    continue;
                }
                let e = element(k, l)?;
                if e.is_zero() || !comp0_ech.contains(&field_vector(&e)) {
                    continue;
                }
                rows.push(TupleOutcome {
                    tuple: [*i, *j, k, l],
                    element: e.to_string(),
                    holds: span.contains(&field_vector(&e)),
                });
            }
        }
        Ok(rows)
    });
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Common annihilator in degree `l` of `[y, z]` for `y, z ∈ g_{-1} ⊕ g_0`.
pub fn theorem_step_annihilator(builder: &mut ComponentBuilder, l: i64) -> Result<(usize, usize)> {
    let cfg = builder.config().clone();
    let mut low = Vec::new();
    for j in [-1, 0] {
        low.extend(builder.component(j)?.basis().iter().cloned());
    }
    let span = bracket_span(&low, usize::MAX)?;
    let comp0 = builder.component(0)?;
    let compm1 = builder.component(-1)?;
    // homogeneous spanning set of the brackets: pairs of basis elements
    let mut gens = Vec::new();
    let mut ech: SparseEchelon<TermKey> = SparseEchelon::lean();
    let all: Vec<(&VectorField, Parity)> = compm1
        .basis()
        .iter()
        .zip(compm1.parities())
        .chain(comp0.basis().iter().zip(comp0.parities()))
        .map(|(b, p)| (b, *p))
        .collect();
    for a in 0..all.len() {
        for b in a..all.len() {
            let br = all[a].0.bracket_with_parities(all[b].0, all[a].1, all[b].1);
            if !br.is_zero() && ech.insert(field_vector(&br)) {
                gens.push(br);
            }
        }
    }
    debug_assert_eq!(ech.rank(), span.rank());
    let comp = builder.component(l)?;
    let ann = common_annihilator(&cfg, &comp, &gens)?;
    Ok((ann.len(), comp.dim()))
}

/// The annihilator check for each `l` in `levels`.
pub fn verify_theorem_step(config: &FamilyConfig, levels: &[i64]) -> Result<CheckReport> {
    let mut builder = ComponentBuilder::new(config.clone());
    let mut report = CheckReport::new("theorem-step", Some(config));
    let mut status = Status::Pass;
    for &l in levels {
        if l < 1 {
            return Err(Error::InvalidArgument(format!(
                "level {l} must be at least 1"
            )));
        }
        let (ann, dim) = theorem_step_annihilator(&mut builder, l)?;
        report.dims.insert(format!("g[{l}]"), dim as i64);
        report
            .details
            .insert(format!("annihilator_dim[{l}]"), json!(ann));
        if ann != 0 {
            status = Status::Fail;
            report.counterexample = Some(json!({"level": l, "annihilator_dim": ann}));
        }
    }
    report.status = status;
    Ok(report)
}

/// Linear form in the unknowns, with a description of where it came from.
#[derive(Clone, Debug)]
pub struct ImpliedForm {
    pub label: String,
    pub form: SparseVec<usize>,
}

/// Coordinates of `[σ(D_X(x_i)), D_X(x_k)]` as linear forms, one per output
/// basis element.
fn bracket_forms(
    param: &SigmaParam,
    x_i: &SparseVec<usize>,
    x_k: &SparseVec<usize>,
) -> Result<BTreeMap<usize, SparseVec<usize>>> {
    let mut out: BTreeMap<usize, SparseVec<usize>> = BTreeMap::new();
    for (g, a) in x_i {
        let p = param
            .domain_position(*g)
            .ok_or_else(|| Error::InvalidArgument("element outside the σ-domain".into()))?;
        for (u, unk) in param.unknowns().iter().enumerate() {
            if unk.domain != p {
                continue;
            }
            let v = param.ad_combination(unk.codomain, x_k)?;
            for (e, val) in v {
                let entry = out.entry(e).or_default();
                let slot = entry.entry(u).or_insert_with(Scalar::zero);
                *slot += a * &val;
                if slot.is_zero() {
                    entry.remove(&u);
                }
            }
        }
    }
    out.retain(|_, f| !f.is_empty());
    Ok(out)
}

/// The constraint families spelled out in the degree −1 argument:
/// `[σ(D_X(x_i)), D_X(x_{k'})] = 0` for `i ≠ k`, and
/// `[σ(D_X(x_i)), D_X(x_{i'})] = [σ(D_X(x_j)), D_X(x_{j'})]` for `i ≠ j, j'`.
/// The third list is the second with each side scaled so that it vanishes
/// at `σ = id`: `c_j L_i = c_i L_j` where `[D_X(x_i), D_X(x_{i'})] = c_i w`.
/// It is empty when those brackets are not all proportional.
pub fn implied_forms(param: &SigmaParam) -> Result<[Vec<ImpliedForm>; 3]> {
    let cfg = param.config().clone();
    let sig = cfg.signature();
    let maps = cfg.maps();
    let nu = cfg.nu();
    let alg = param.algebra();
    let idx: Vec<usize> = (1..=sig.vars()).filter(|&i| Some(i) != nu).collect();
    let mut dx: HashMap<usize, SparseVec<usize>> = HashMap::new();
    for &i in &idx {
        let f = cfg.d_x(&SuperPoly::var(sig, i)?)?;
        let c = alg
            .coordinates(&f)?
            .ok_or_else(|| Error::InvalidArgument(format!("D_X(x{i}) outside the window")))?;
        dx.insert(i, c);
    }
    let prime = |i: usize| maps.iprime(i).expect("i' defined off ν");
    let mut e15 = Vec::new();
    for &i in &idx {
        for &k in &idx {
            if i == k {
                continue;
            }
            for (e, form) in bracket_forms(param, &dx[&i], &dx[&prime(k)])? {
                e15.push(ImpliedForm {
                    label: format!(
                        "[σ(D(x{i})), D(x{})] @ {}",
                        prime(k),
                        param.term_field(&[(e, Scalar::one())].into_iter().collect())
                    ),
                    form,
                });
            }
        }
    }
    let mut e16 = Vec::new();
    let mut diag: HashMap<usize, BTreeMap<usize, SparseVec<usize>>> = HashMap::new();
    for &i in &idx {
        diag.insert(i, bracket_forms(param, &dx[&i], &dx[&prime(i)])?);
    }
    let identity = param.identity();
    let at_id = |i: usize| -> SparseVec<usize> {
        diag[&i]
            .iter()
            .map(|(e, f)| (*e, sparse_dot(f, &identity)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    };
    let w = idx.iter().map(|&i| at_id(i)).find(|v| !v.is_empty());
    let scales: Option<HashMap<usize, Scalar>> = match w {
        // nothing to balance: the literal forms already vanish at the identity
        None => Some(idx.iter().map(|&i| (i, Scalar::one())).collect()),
        Some(w) => {
            let (e0, w0) = w
                .iter()
                .next()
                .map(|(e, v)| (*e, v.clone()))
                .expect("nonempty");
            idx.iter()
                .map(|&i| {
                    let v = at_id(i);
                    let c = v.get(&e0).cloned().unwrap_or_else(Scalar::zero) / &w0;
                    let mut check = v.clone();
                    axpy(&mut check, &-c.clone(), &w);
                    (check.is_empty() && !c.is_zero()).then_some((i, c))
                })
                .collect()
        }
    };
    let term = |e: usize| {
        param
            .term_field(&[(e, Scalar::one())].into_iter().collect())
            .to_string()
    };
    let mut normalized = Vec::new();
    for &i in &idx {
        for &j in &idx {
            if i == j || i == prime(j) || j < i {
                continue;
            }
            let keys: BTreeSet<usize> = diag[&i].keys().chain(diag[&j].keys()).copied().collect();
            for e in keys {
                let mut form = diag[&i].get(&e).cloned().unwrap_or_default();
                if let Some(other) = diag[&j].get(&e) {
                    axpy(&mut form, &-Scalar::one(), other);
                }
                let label = format!(
                    "[σ(D(x{i})), D(x{})] - [σ(D(x{j})), D(x{})] @ {}",
                    prime(i),
                    prime(j),
                    term(e)
                );
                if let Some(c) = &scales {
                    let mut scaled = SparseVec::new();
                    if let Some(f) = diag[&i].get(&e) {
                        axpy(&mut scaled, &c[&j], f);
                    }
                    if let Some(f) = diag[&j].get(&e) {
                        axpy(&mut scaled, &-c[&i].clone(), f);
                    }
                    if !scaled.is_empty() {
                        normalized.push(ImpliedForm {
                            label: format!("c{j}·L{i} - c{i}·L{j} @ {}", term(e)),
                            form: scaled,
                        });
                    }
                }
                if !form.is_empty() {
                    e16.push(ImpliedForm { label, form });
                }
            }
        }
    }
    Ok([e15, e16, normalized])
}

/// A form lies in the row space of a fully solved system iff it vanishes on
/// the whole nullspace.
pub fn in_row_space(form: &SparseVec<usize>, solution: &HomSolution) -> bool {
    solution
        .nullspace
        .iter()
        .all(|v| sparse_dot(form, v).is_zero())
}

/// Row-space membership of both constraint families.
pub fn implied_rows_check(config: &FamilyConfig, codomain_max: i64) -> Result<CheckReport> {
    let pipeline = run_pipeline(config, codomain_max)?;
    implied_rows_report(config, &pipeline)
}

/// Status follows the first family and the sign-normalized second family;
/// the literal second family is reported alongside.
pub fn implied_rows_report(config: &FamilyConfig, pipeline: &HomPipeline) -> Result<CheckReport> {
    let [e15, e16, normalized] = implied_forms(&pipeline.param)?;
    let identity = pipeline.param.identity();
    let mut report = CheckReport::new("implied-rows", Some(config));
    report.nullspace_dim = Some(pipeline.solution.nullity());
    let mut status = Status::Pass;
    if normalized.is_empty() && !e16.is_empty() {
        status = Status::Inconclusive;
        report.details.insert(
            "notes".into(),
            json!(["diagonal brackets are not proportional"]),
        );
    }
    for (name, forms, decisive) in [
        ("first", &e15, true),
        ("second", &e16, false),
        ("second_normalized", &normalized, true),
    ] {
        let failing: Vec<&ImpliedForm> = forms
            .iter()
            .filter(|f| !in_row_space(&f.form, &pipeline.solution))
            .collect();
        let nonzero_at_id = forms
            .iter()
            .filter(|f| !sparse_dot(&f.form, &identity).is_zero())
            .count();
        report.details.insert(
            format!("{name}_family"),
            json!({
                "forms": forms.len(),
                "outside_row_space": failing.len(),
                "nonzero_at_identity": nonzero_at_id,
            }),
        );
        if let Some(f) = failing.first().filter(|_| decisive) {
            status = Status::Fail;
            if report.counterexample.is_none() {
                report.counterexample = Some(json!({"family": name, "form": f.label}));
            }
        }
    }
    report.status = status;
    Ok(report)
}

/// Config summary for reports built outside this module.
pub fn summary(config: &FamilyConfig) -> ConfigSummary {
    ConfigSummary::of(config)
}
