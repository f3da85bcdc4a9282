//! Exact arithmetic in the supercommutative algebra `Λ(m,n)`: polynomials in
//! `m` even indeterminates tensored with the Grassmann algebra on `n` odd
//! ones.
//!
//! Indices are 1-based throughout the public API, matching the usual
//! `x_1, …, x_{m+n}` notation: `1..=m` are even, `m+1..=m+n` are odd.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub const MAX_EVEN: usize = 12;
pub const MAX_ODD: usize = 16;

/// Z/2 degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: u32) -> Self {
        if bit % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// `(-1)^{|a||b|}` as `±1`.
    pub fn koszul(self, other: Parity) -> i64 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Outcome of asking for a common grading of the terms of an element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homogeneity<T> {
    /// The zero element; compatible with every value.
    Zero,
    Pure(T),
    Mixed,
}

impl<T: PartialEq> Homogeneity<T> {
    pub fn pure(self) -> Option<T> {
        match self {
            Homogeneity::Pure(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, Homogeneity::Mixed)
    }

    pub(crate) fn absorb(self, value: T) -> Self {
        match self {
            Homogeneity::Zero => Homogeneity::Pure(value),
            Homogeneity::Pure(t) if t == value => Homogeneity::Pure(t),
            _ => Homogeneity::Mixed,
        }
    }
}

/// Numbers of even and odd indeterminates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    m: usize,
    n: usize,
}

impl Signature {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSignature(format!(
                "m and n must be positive (got m={m}, n={n})"
            )));
        }
        if m > MAX_EVEN || n > MAX_ODD {
            return Err(Error::InvalidSignature(format!(
                "at most {MAX_EVEN} even and {MAX_ODD} odd indeterminates are supported (got m={m}, n={n})"
            )));
        }
        Ok(Signature { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vars(&self) -> usize {
        self.m + self.n
    }

    /// Whether `m > 3` and `n > 3`, the sizes the structure theory is stated for.
    pub fn is_large(&self) -> bool {
        self.m > 3 && self.n > 3
    }

    pub fn parity_of(&self, index: usize) -> Parity {
        if index <= self.m {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.vars() {
            Err(Error::IndexOutOfRange {
                index,
                max: self.vars(),
            })
        } else {
            Ok(())
        }
    }

    fn ensure_same(&self, other: &Signature) -> Result<()> {
        if self != other {
            Err(Error::SignatureMismatch {
                left: (self.m, self.n),
                right: (other.m, other.n),
            })
        } else {
            Ok(())
        }
    }
}

/// A monomial `x^a · x_{j1} ⋯ x_{jk}` with the odd part in ascending order.
///
/// Bit `k` of `odd` stands for the odd indeterminate `x_{m+1+k}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SuperMonomial {
    even: [u16; MAX_EVEN],
    odd: u32,
}

impl SuperMonomial {
    pub fn one() -> Self {
        SuperMonomial {
            even: [0; MAX_EVEN],
            odd: 0,
        }
    }

    /// The single indeterminate `x_index`.
    pub fn var(sig: &Signature, index: usize) -> Result<Self> {
        sig.check_index(index)?;
        let mut mono = Self::one();
        if index <= sig.m {
            mono.even[index - 1] = 1;
        } else {
            mono.odd = 1 << (index - sig.m - 1);
        }
        Ok(mono)
    }

    /// Builds a monomial from even exponents and a set of odd indices,
    /// returning the sign needed to bring the odd indices into ascending order
    /// (or `None` when an odd index repeats).
    pub fn from_parts(
        sig: &Signature,
        even: &[u16],
        odd_indices: &[usize],
    ) -> Result<Option<(i64, Self)>> {
        if even.len() != sig.m {
            return Err(Error::InvalidSignature(format!(
                "expected {} even exponents, got {}",
                sig.m,
                even.len()
            )));
        }
        let mut mono = Self::one();
        mono.even[..sig.m].copy_from_slice(even);
        let mut sign = 1;
        for &j in odd_indices {
            sig.check_index(j)?;
            if j <= sig.m {
                return Err(Error::InvalidSignature(format!("x{j} is not odd")));
            }
            let bit = 1u32 << (j - sig.m - 1);
            if mono.odd & bit != 0 {
                return Ok(None);
            }
            // appending x_j after the existing factors; move it left past larger ones
            if (mono.odd & !(bit | (bit - 1))).count_ones() % 2 == 1 {
                sign = -sign;
            }
            mono.odd |= bit;
        }
        Ok(Some((sign, mono)))
    }

    pub fn even_exponents<'a>(&'a self, sig: &Signature) -> &'a [u16] {
        &self.even[..sig.m]
    }

    pub fn exponent(&self, sig: &Signature, index: usize) -> u16 {
        if index <= sig.m {
            self.even[index - 1]
        } else if self.odd & (1 << (index - sig.m - 1)) != 0 {
            1
        } else {
            0
        }
    }

    /// Global 1-based indices of the odd factors, ascending.
    pub fn odd_indices(&self, sig: &Signature) -> Vec<usize> {
        (0..sig.n)
            .filter(|k| self.odd & (1 << k) != 0)
            .map(|k| sig.m + 1 + k)
            .collect()
    }

    pub fn odd_mask(&self) -> u32 {
        self.odd
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.odd.count_ones())
    }

    pub fn total_degree(&self) -> u32 {
        self.even.iter().map(|&e| e as u32).sum::<u32>() + self.odd.count_ones()
    }

    pub fn is_one(&self) -> bool {
        self.odd == 0 && self.even.iter().all(|&e| e == 0)
    }

    /// `Σ a_i γ_i` over all indeterminates.
    pub fn weight(&self, sig: &Signature, gamma: &[i64]) -> i64 {
        let even: i64 = (0..sig.m).map(|i| self.even[i] as i64 * gamma[i]).sum();
        let odd: i64 = (0..sig.n)
            .filter(|k| self.odd & (1 << k) != 0)
            .map(|k| gamma[sig.m + k])
            .sum();
        even + odd
    }

    /// Product with the Koszul sign; `None` when the odd parts overlap.
    pub fn mul(&self, other: &SuperMonomial) -> Option<(i64, SuperMonomial)> {
        if self.odd & other.odd != 0 {
            return None;
        }
        let mut inversions = 0u32;
        let mut rest = other.odd;
        while rest != 0 {
            let k = rest.trailing_zeros();
            rest &= rest - 1;
            // factors of `self` with larger index must pass x_k
            let above = if k >= 31 { 0 } else { self.odd >> (k + 1) };
            inversions += above.count_ones();
        }
        let mut even = self.even;
        for (e, o) in even.iter_mut().zip(other.even.iter()) {
            *e += *o;
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((
            sign,
            SuperMonomial {
                even,
                odd: self.odd | other.odd,
            },
        ))
    }

    /// `∂_index` of the monomial as `(coefficient, monomial)`.
    pub fn partial(&self, sig: &Signature, index: usize) -> Option<(i64, SuperMonomial)> {
        if index <= sig.m {
            let e = self.even[index - 1];
            if e == 0 {
                return None;
            }
            let mut out = *self;
            out.even[index - 1] -= 1;
            Some((e as i64, out))
        } else {
            let k = index - sig.m - 1;
            let bit = 1u32 << k;
            if self.odd & bit == 0 {
                return None;
            }
            let before = (self.odd & (bit - 1)).count_ones();
            let sign = if before % 2 == 0 { 1 } else { -1 };
            Some((
                sign,
                SuperMonomial {
                    even: self.even,
                    odd: self.odd & !bit,
                },
            ))
        }
    }

    /// Textual form such as `x1^3*x5*x6`; the unit monomial prints as `1`.
    pub fn display(&self, sig: &Signature) -> String {
        let mut parts = Vec::new();
        for i in 0..sig.m {
            match self.even[i] {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                e => parts.push(format!("x{}^{}", i + 1, e)),
            }
        }
        for j in self.odd_indices(sig) {
            parts.push(format!("x{j}"));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    fn odd_cmp(a: u32, b: u32) -> Ordering {
        // lexicographic order of the ascending index lists
        let (mut x, mut y) = (a, b);
        loop {
            match (x == 0, y == 0) {
                (true, true) => return Ordering::Equal,
                (true, false) => return Ordering::Less,
                (false, true) => return Ordering::Greater,
                _ => {}
            }
            let (i, j) = (x.trailing_zeros(), y.trailing_zeros());
            if i != j {
                return i.cmp(&j);
            }
            x &= x - 1;
            y &= y - 1;
        }
    }
}

impl Ord for SuperMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.even.cmp(&self.even))
            .then_with(|| Self::odd_cmp(self.odd, other.odd))
    }
}

impl PartialOrd for SuperMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sign and product of two monomials, checking signatures.
pub fn mono_mul(
    sig_a: &Signature,
    a: &SuperMonomial,
    sig_b: &Signature,
    b: &SuperMonomial,
) -> Result<Option<(i64, SuperMonomial)>> {
    sig_a.ensure_same(sig_b)?;
    Ok(a.mul(b))
}

/// Sparse element of `Λ(m,n)` with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SuperPoly {
    sig: Signature,
    terms: BTreeMap<SuperMonomial, Scalar>,
}

impl SuperPoly {
    pub fn zero(sig: Signature) -> Self {
        SuperPoly {
            sig,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(sig: Signature) -> Self {
        Self::constant(sig, Scalar::one())
    }

    pub fn constant(sig: Signature, c: Scalar) -> Self {
        Self::monomial(sig, SuperMonomial::one(), c)
    }

    pub fn monomial(sig: Signature, mono: SuperMonomial, c: Scalar) -> Self {
        let mut p = Self::zero(sig);
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn var(sig: Signature, index: usize) -> Result<Self> {
        Ok(Self::monomial(
            sig,
            SuperMonomial::var(&sig, index)?,
            Scalar::one(),
        ))
    }

    /// Builds from arbitrary `(coefficient, monomial)` pairs, merging repeats
    /// and dropping zeros.
    pub fn from_terms<I>(sig: Signature, terms: I) -> Self
    where
        I: IntoIterator<Item = (SuperMonomial, Scalar)>,
    {
        let mut p = Self::zero(sig);
        for (mono, c) in terms {
            p.add_term(mono, c);
        }
        p
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SuperMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &SuperMonomial) -> Scalar {
        self.terms.get(mono).cloned().unwrap_or_else(Scalar::zero)
    }

    pub(crate) fn add_term(&mut self, mono: SuperMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add_scaled_term(&mut self, mono: SuperMonomial, c: &Scalar, k: i64) {
        self.add_term(mono, c * Scalar::from_integer(k.into()));
    }

    /// Drops zero coefficients. Values built through the public API are
    /// already canonical; this is the normalization the canonical form is
    /// defined by.
    pub fn normalized(&self) -> Self {
        SuperPoly {
            sig: self.sig,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn parity(&self) -> Homogeneity<Parity> {
        self.terms
            .keys()
            .fold(Homogeneity::Zero, |acc, m| acc.absorb(m.parity()))
    }

    /// Parity of a nonzero homogeneous element, or an error for mixed input.
    /// The zero polynomial reports `Even`, which is compatible with every use.
    pub fn homogeneous_parity(&self) -> Result<Parity> {
        match self.parity() {
            Homogeneity::Zero => Ok(Parity::Even),
            Homogeneity::Pure(p) => Ok(p),
            Homogeneity::Mixed => Err(Error::MixedParity(self.to_string())),
        }
    }

    pub fn weight(&self, gamma: &[i64]) -> Result<Homogeneity<i64>> {
        if self.is_zero() {
            return Err(Error::ZeroWeight);
        }
        Ok(self.terms.keys().fold(Homogeneity::Zero, |acc, m| {
            acc.absorb(m.weight(&self.sig, gamma))
        }))
    }

    pub fn add(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.sig.ensure_same(&other.sig)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.sig.ensure_same(&other.sig)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero(self.sig);
        }
        SuperPoly {
            sig: self.sig,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn neg(&self) -> SuperPoly {
        SuperPoly {
            sig: self.sig,
            terms: self.terms.iter().map(|(m, v)| (*m, -v.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &SuperPoly) -> Result<SuperPoly> {
        self.sig.ensure_same(&other.sig)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero(self.sig);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((sign, mono)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(mono, if sign < 0 { -c } else { c });
                }
            }
        }
        out
    }

    /// Multiplication by a single signed monomial term on the left.
    pub(crate) fn mul_monomial_left(&self, mono: &SuperMonomial, c: &Scalar) -> SuperPoly {
        let mut out = SuperPoly::zero(self.sig);
        for (mb, cb) in &self.terms {
            if let Some((sign, m)) = mono.mul(mb) {
                let v = c * cb;
                out.add_term(m, if sign < 0 { -v } else { v });
            }
        }
        out
    }

    /// The superderivation `∂_index`.
    pub fn partial(&self, index: usize) -> Result<SuperPoly> {
        self.sig.check_index(index)?;
        Ok(self.partial_unchecked(index))
    }

    pub(crate) fn partial_unchecked(&self, index: usize) -> SuperPoly {
        let mut out = SuperPoly::zero(self.sig);
        for (m, c) in &self.terms {
            if let Some((k, mono)) = m.partial(&self.sig, index) {
                out.add_scaled_term(mono, c, k);
            }
        }
        out
    }

    /// Restriction to the terms of the given parity.
    pub fn parity_part(&self, parity: Parity) -> SuperPoly {
        SuperPoly {
            sig: self.sig,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.parity() == parity)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Deterministic pseudo-random polynomial of one parity whose terms all
    /// have total degree at most `max_weight` (unit weights).
    pub fn random_homogeneous(
        sig: Signature,
        parity: Parity,
        max_weight: u32,
        seed: u64,
    ) -> SuperPoly {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(&mut rng, sig, parity, max_weight)
    }

    /// Same as [`SuperPoly::random_homogeneous`] drawing from a caller-owned generator.
    pub fn random_with<R: Rng>(
        rng: &mut R,
        sig: Signature,
        parity: Parity,
        max_weight: u32,
    ) -> SuperPoly {
        let pool: Vec<SuperMonomial> = monomials_up_to(&sig, max_weight)
            .into_iter()
            .filter(|m| m.parity() == parity)
            .collect();
        let mut out = SuperPoly::zero(sig);
        if pool.is_empty() {
            return out;
        }
        let count = rng.gen_range(1..=4usize);
        for _ in 0..count {
            let mono = pool[rng.gen_range(0..pool.len())];
            let mut c: i64 = rng.gen_range(-3..=3);
            if c == 0 {
                c = 1;
            }
            out.add_term(mono, scalar::int(c));
        }
        out
    }
}

/// All monomials of total degree at most `max_degree`, in canonical order.
pub fn monomials_up_to(sig: &Signature, max_degree: u32) -> Vec<SuperMonomial> {
    let gamma = vec![1i64; sig.vars()];
    let mut out = Vec::new();
    for d in 0..=max_degree as i64 {
        out.extend(monomials_of_weight(sig, &gamma, d));
    }
    out
}

/// All monomials of exact weight `w` under `gamma`, in canonical order.
pub fn monomials_of_weight(sig: &Signature, gamma: &[i64], w: i64) -> Vec<SuperMonomial> {
    let mut out = Vec::new();
    if w < 0 {
        return out;
    }
    for odd in 0u32..(1u32 << sig.n) {
        let odd_w: i64 = (0..sig.n)
            .filter(|k| odd & (1 << k) != 0)
            .map(|k| gamma[sig.m + k])
            .sum();
        if odd_w > w {
            continue;
        }
        let mut exps = [0u16; MAX_EVEN];
        even_fill(sig.m, gamma, 0, w - odd_w, &mut exps, &mut |e| {
            out.push(SuperMonomial { even: *e, odd });
        });
    }
    out.sort();
    out
}

fn even_fill(
    m: usize,
    gamma: &[i64],
    i: usize,
    remaining: i64,
    exps: &mut [u16; MAX_EVEN],
    emit: &mut dyn FnMut(&[u16; MAX_EVEN]),
) {
    if i == m {
        if remaining == 0 {
            emit(exps);
        }
        return;
    }
    let g = gamma[i];
    let mut e = 0i64;
    while e * g <= remaining {
        exps[i] = e as u16;
        even_fill(m, gamma, i + 1, remaining - e * g, exps, emit);
        e += 1;
    }
    exps[i] = 0;
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let body = m.display(&self.sig);
            write_signed_term(f, k == 0, c, if m.is_one() { None } else { Some(&body) })?;
        }
        Ok(())
    }
}

/// Writes `± c*body` in the canonical textual style shared by polynomials and
/// vector fields.
pub(crate) fn write_signed_term(
    f: &mut dyn fmt::Write,
    first: bool,
    c: &Scalar,
    body: Option<&str>,
) -> fmt::Result {
    let negative = c.is_negative();
    if first {
        if negative {
            write!(f, "-")?;
        }
    } else if negative {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    let abs = c.abs();
    match body {
        None => write!(f, "{}", scalar::display(&abs)),
        Some(b) if abs.is_one() => write!(f, "{b}"),
        Some(b) => write!(f, "{}*{b}", scalar::display(&abs)),
    }
}
