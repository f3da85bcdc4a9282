//! Elements of `W(m,n)` written as `Σ f_r ∂_r`, their supercommutator, the
//! divergence, and the generating operators `D_ij`, `D_H`, `D_K`, `D_HO`,
//! `D_KO` of the Cartan-type families.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::families::Family;
use crate::scalar::{self, Scalar};
use crate::superpoly::{
    write_signed_term, Homogeneity, Parity, Signature, SuperMonomial, SuperPoly,
};

/// `Σ_r coeffs[r-1] ∂_r`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VectorField {
    sig: Signature,
    coeffs: Vec<SuperPoly>,
}

impl VectorField {
    pub fn zero(sig: Signature) -> Self {
        VectorField {
            sig,
            coeffs: vec![SuperPoly::zero(sig); sig.vars()],
        }
    }

    /// `f ∂_r`.
    pub fn term(f: SuperPoly, r: usize) -> Result<Self> {
        let sig = f.signature();
        sig.check_index(r)?;
        let mut out = Self::zero(sig);
        out.coeffs[r - 1] = f;
        Ok(out)
    }

    /// `∂_r`.
    pub fn partial(sig: Signature, r: usize) -> Result<Self> {
        Self::term(SuperPoly::one(sig), r)
    }

    pub fn from_coeffs(coeffs: Vec<SuperPoly>) -> Result<Self> {
        let sig = match coeffs.first() {
            Some(c) => c.signature(),
            None => return Err(Error::InvalidArgument("empty coefficient list".into())),
        };
        if coeffs.len() != sig.vars() || coeffs.iter().any(|c| c.signature() != sig) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients over one signature",
                sig.vars()
            )));
        }
        Ok(VectorField { sig, coeffs })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Coefficient of `∂_r`.
    pub fn coeff(&self, r: usize) -> &SuperPoly {
        &self.coeffs[r - 1]
    }

    pub fn coeffs(&self) -> &[SuperPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(SuperPoly::is_zero)
    }

    /// `(r, monomial, coefficient)` for every nonzero term, ordered by `r`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &SuperMonomial, &Scalar)> {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(r, p)| p.terms().map(move |(m, c)| (r + 1, m, c)))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.iter().map(SuperPoly::len).sum()
    }

    pub fn parity(&self) -> Homogeneity<Parity> {
        self.terms().fold(Homogeneity::Zero, |acc, (r, m, _)| {
            acc.absorb(m.parity() + self.sig.parity_of(r))
        })
    }

    /// Parity of a homogeneous field (zero reports `Even`).
    pub fn homogeneous_parity(&self) -> Result<Parity> {
        match self.parity() {
            Homogeneity::Zero => Ok(Parity::Even),
            Homogeneity::Pure(p) => Ok(p),
            Homogeneity::Mixed => Err(Error::MixedParity(self.to_string())),
        }
    }

    /// Common value of `weight(f_r) - γ_r`.
    pub fn weight(&self, gamma: &[i64]) -> Homogeneity<i64> {
        self.terms().fold(Homogeneity::Zero, |acc, (r, m, _)| {
            acc.absorb(m.weight(&self.sig, gamma) - gamma[r - 1])
        })
    }

    fn ensure_same(&self, other: &VectorField) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch {
                left: (self.sig.m(), self.sig.n()),
                right: (other.sig.m(), other.sig.n()),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.ensure_same(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            sig: self.sig,
            coeffs,
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.ensure_same(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            sig: self.sig,
            coeffs,
        })
    }

    pub fn scale(&self, c: &Scalar) -> VectorField {
        VectorField {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> VectorField {
        VectorField {
            sig: self.sig,
            coeffs: self.coeffs.iter().map(SuperPoly::neg).collect(),
        }
    }

    /// Left multiplication by a function: `g · Σ f_r ∂_r = Σ (g f_r) ∂_r`.
    pub fn mul_left(&self, g: &SuperPoly) -> Result<VectorField> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|p| g.mul(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            sig: self.sig,
            coeffs,
        })
    }

    /// `D(f) = Σ_r f_r ∂_r(f)`.
    pub fn apply(&self, f: &SuperPoly) -> Result<SuperPoly> {
        if self.sig != f.signature() {
            return Err(Error::SignatureMismatch {
                left: (self.sig.m(), self.sig.n()),
                right: (f.signature().m(), f.signature().n()),
            });
        }
        Ok(self.apply_unchecked(f))
    }

    pub(crate) fn apply_unchecked(&self, f: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero(self.sig);
        for (r, coeff) in self.coeffs.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let d = f.partial_unchecked(r + 1);
            if d.is_zero() {
                continue;
            }
            for (m, c) in coeff.terms() {
                for (mm, cc) in d.mul_monomial_left(m, c).terms() {
                    out.add_term(*mm, cc.clone());
                }
            }
        }
        out
    }

    /// Supercommutator `[D, E] = D∘E - (-1)^{|D||E|} E∘D`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        self.ensure_same(other)?;
        let pd = self.homogeneous_parity()?;
        let pe = other.homogeneous_parity()?;
        Ok(self.bracket_with_parities(other, pd, pe))
    }

    pub(crate) fn bracket_with_parities(
        &self,
        other: &VectorField,
        pd: Parity,
        pe: Parity,
    ) -> VectorField {
        let sign = pd.koszul(pe);
        let coeffs = (0..self.sig.vars())
            .map(|k| {
                let mut left = self.apply_unchecked(&other.coeffs[k]);
                let right = other.apply_unchecked(&self.coeffs[k]);
                for (m, c) in right.terms() {
                    left.add_term(*m, if sign > 0 { -c.clone() } else { c.clone() });
                }
                left
            })
            .collect();
        VectorField {
            sig: self.sig,
            coeffs,
        }
    }

    /// `div(Σ f_r ∂_r) = Σ (-1)^{|∂_r||f_r|} ∂_r(f_r)`.
    pub fn div(&self) -> Result<SuperPoly> {
        let mut out = SuperPoly::zero(self.sig);
        for (i, f) in self.coeffs.iter().enumerate() {
            let r = i + 1;
            let pf = f.homogeneous_parity()?;
            let s = self.sig.parity_of(r).koszul(pf);
            let d = f.partial_unchecked(r);
            for (m, c) in d.terms() {
                out.add_term(*m, if s < 0 { -c.clone() } else { c.clone() });
            }
        }
        Ok(out)
    }
}

impl VectorField {
    /// Deterministic pseudo-random field of the given parity with 1 to 3
    /// nonzero components whose coefficients have total degree at most
    /// `max_weight`.
    pub fn random_homogeneous(sig: Signature, parity: Parity, max_weight: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(&mut rng, sig, parity, max_weight)
    }

    pub fn random_with<R: Rng>(
        rng: &mut R,
        sig: Signature,
        parity: Parity,
        max_weight: u32,
    ) -> Self {
        let mut out = Self::zero(sig);
        for _ in 0..rng.gen_range(1..=3usize) {
            let r = rng.gen_range(1..=sig.vars());
            let p = SuperPoly::random_with(rng, sig, parity + sig.parity_of(r), max_weight);
            add_into(&mut out, r, &p);
        }
        out
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (r, m, c)) in self.terms().enumerate() {
            let body = if m.is_one() {
                format!("p{r}")
            } else {
                format!("{}*p{r}", m.display(&self.sig))
            };
            write_signed_term(f, k == 0, c, Some(&body))?;
        }
        Ok(())
    }
}

/// The index involution `i ↦ i'`, the sign `τ`, and the distinguished index
/// `ν` attached to a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexMaps {
    family: Family,
    sig: Signature,
}

impl IndexMaps {
    /// Validates the shape constraints (`m` even for H, odd for K, `n = m` for
    /// HO/SHO, `n = m + 1` for KO/SKO).
    pub fn new(family: Family, sig: Signature) -> Result<Self> {
        let (m, n) = (sig.m(), sig.n());
        let ok = match family {
            Family::W | Family::S => true,
            Family::H => m % 2 == 0,
            Family::K => m % 2 == 1,
            Family::HO | Family::SHO => n == m,
            Family::KO | Family::SKO => n == m + 1,
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "{family}({m},{n}) violates the shape constraint of {family}"
            )));
        }
        Ok(IndexMaps { family, sig })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    fn half(&self) -> usize {
        self.sig.m() / 2
    }

    /// `i'`, or `None` where the family leaves it undefined.
    pub fn iprime(&self, i: usize) -> Option<usize> {
        let m = self.sig.m();
        if i == 0 || i > self.sig.vars() {
            return None;
        }
        match self.family {
            Family::H | Family::K => {
                let r = self.half();
                if i <= r {
                    Some(i + r)
                } else if i <= 2 * r {
                    Some(i - r)
                } else if i > m {
                    Some(i)
                } else {
                    None
                }
            }
            Family::HO | Family::KO | Family::SHO | Family::SKO => {
                if i <= m {
                    Some(i + m)
                } else if i <= 2 * m {
                    Some(i - m)
                } else {
                    None
                }
            }
            Family::W | Family::S => None,
        }
    }

    /// `τ(i)` for H and K.
    pub fn tau(&self, i: usize) -> Option<i64> {
        match self.family {
            Family::H | Family::K => {
                let r = self.half();
                if i == 0 || i > self.sig.vars() {
                    None
                } else if i <= r {
                    Some(1)
                } else if i <= 2 * r {
                    Some(-1)
                } else if i > self.sig.m() {
                    Some(1)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// `ν`: `m` for K, `2m+1` for KO and SKO.
    pub fn nu(&self) -> Option<usize> {
        match self.family {
            Family::K => Some(self.sig.m()),
            Family::KO | Family::SKO => Some(2 * self.sig.m() + 1),
            _ => None,
        }
    }
}

fn signed(p: &SuperPoly, s: i64) -> SuperPoly {
    if s < 0 {
        p.neg()
    } else {
        p.clone()
    }
}

fn add_into(field: &mut VectorField, r: usize, p: &SuperPoly) {
    for (m, c) in p.terms() {
        field.coeffs[r - 1].add_term(*m, c.clone());
    }
}

/// `D_ij(f) = (-1)^{|∂_i||∂_j|} ∂_i(f) ∂_j - (-1)^{(|∂_i|+|∂_j|)|f|} ∂_j(f) ∂_i`.
pub fn d_ij(i: usize, j: usize, f: &SuperPoly) -> Result<VectorField> {
    let sig = f.signature();
    sig.check_index(i)?;
    sig.check_index(j)?;
    let pf = f.homogeneous_parity()?;
    let (pi, pj) = (sig.parity_of(i), sig.parity_of(j));
    let mut out = VectorField::zero(sig);
    add_into(&mut out, j, &signed(&f.partial_unchecked(i), pi.koszul(pj)));
    add_into(
        &mut out,
        i,
        &signed(&f.partial_unchecked(j), -(pi + pj).koszul(pf)),
    );
    Ok(out)
}

fn ensure_maps(maps: &IndexMaps, f: &SuperPoly, op: &str, allowed: &[Family]) -> Result<()> {
    if f.signature() != maps.sig {
        return Err(Error::SignatureMismatch {
            left: (maps.sig.m(), maps.sig.n()),
            right: (f.signature().m(), f.signature().n()),
        });
    }
    if !allowed.contains(&maps.family) {
        return Err(Error::Unsupported {
            op: op.to_string(),
            context: format!("family {}", maps.family),
        });
    }
    Ok(())
}

/// `D_H(f) = Σ_i τ(i) (-1)^{|∂_i||f|} ∂_i(f) ∂_{i'}` (requires `m` even).
pub fn d_h(f: &SuperPoly, maps: &IndexMaps) -> Result<VectorField> {
    ensure_maps(maps, f, "D_H", &[Family::H])?;
    let sig = f.signature();
    if sig.m() % 2 != 0 {
        return Err(Error::InvalidConfig(
            "D_H needs an even number of even indeterminates".into(),
        ));
    }
    let pf = f.homogeneous_parity()?;
    let mut out = VectorField::zero(sig);
    for i in 1..=sig.vars() {
        let tau = maps.tau(i).expect("tau defined for H");
        let ip = maps.iprime(i).expect("i' defined for H");
        let s = tau * sig.parity_of(i).koszul(pf);
        add_into(&mut out, ip, &signed(&f.partial_unchecked(i), s));
    }
    Ok(out)
}

/// `D_K(f)` on `Λ(m,n)` with `m = 2r+1`:
/// `Σ_{i≠m} (-1)^{|∂_i||f|}(x_i ∂_m(f) + τ(i') ∂_{i'}(f)) ∂_i + (2f - Σ_{i≠m} x_i ∂_i(f)) ∂_m`.
pub fn d_k(f: &SuperPoly, maps: &IndexMaps) -> Result<VectorField> {
    ensure_maps(maps, f, "D_K", &[Family::K])?;
    let sig = f.signature();
    let m = sig.m();
    if m % 2 != 1 {
        return Err(Error::InvalidConfig(
            "D_K needs an odd number of even indeterminates".into(),
        ));
    }
    let pf = f.homogeneous_parity()?;
    let dm = f.partial_unchecked(m);
    let mut out = VectorField::zero(sig);
    let mut last = f.scale(&scalar::int(2));
    for i in (1..=sig.vars()).filter(|&i| i != m) {
        let xi = SuperPoly::var(sig, i)?;
        let ip = maps.iprime(i).expect("i' defined off ν");
        let tau = maps.tau(ip).expect("tau defined off ν");
        let mut coeff = xi.mul_unchecked(&dm);
        for (mm, c) in signed(&f.partial_unchecked(ip), tau).terms() {
            coeff.add_term(*mm, c.clone());
        }
        add_into(&mut out, i, &signed(&coeff, sig.parity_of(i).koszul(pf)));
        for (mm, c) in xi.mul_unchecked(&f.partial_unchecked(i)).terms() {
            last.add_term(*mm, -c.clone());
        }
    }
    add_into(&mut out, m, &last);
    Ok(out)
}

/// `D_HO(f) = Σ_{i=1}^{2m} (-1)^{|∂_i||f|} ∂_i(f) ∂_{i'}`.
pub fn d_ho(f: &SuperPoly, maps: &IndexMaps) -> Result<VectorField> {
    ensure_maps(
        maps,
        f,
        "D_HO",
        &[Family::HO, Family::SHO, Family::KO, Family::SKO],
    )?;
    let sig = f.signature();
    if !matches!(maps.family, Family::KO | Family::SKO) && sig.n() != sig.m() {
        return Err(Error::InvalidConfig("D_HO needs n = m".into()));
    }
    let pf = f.homogeneous_parity()?;
    let mut out = VectorField::zero(sig);
    for i in 1..=2 * sig.m() {
        let ip = maps.iprime(i).expect("i' defined on 1..2m");
        let s = sig.parity_of(i).koszul(pf);
        add_into(&mut out, ip, &signed(&f.partial_unchecked(i), s));
    }
    Ok(out)
}

/// The Euler field `𝔇 = Σ_{i=1}^{2m} x_i ∂_i` (needs `n ≥ m`).
pub fn euler(sig: Signature) -> Result<VectorField> {
    if sig.n() < sig.m() {
        return Err(Error::InvalidConfig("the Euler field 𝔇 needs n ≥ m".into()));
    }
    let mut out = VectorField::zero(sig);
    for i in 1..=2 * sig.m() {
        out.coeffs[i - 1] = SuperPoly::var(sig, i)?;
    }
    Ok(out)
}

/// `D_KO(f) = D_HO(f) + (-1)^{|f|} ∂_{2m+1}(f) 𝔇 + (𝔇(f) - 2f) ∂_{2m+1}`.
pub fn d_ko(f: &SuperPoly, maps: &IndexMaps) -> Result<VectorField> {
    ensure_maps(maps, f, "D_KO", &[Family::KO, Family::SKO])?;
    let sig = f.signature();
    if sig.n() != sig.m() + 1 {
        return Err(Error::InvalidConfig("D_KO needs n = m + 1".into()));
    }
    let pf = f.homogeneous_parity()?;
    let top = 2 * sig.m() + 1;
    let eul = euler(sig)?;
    let mut out = d_ho(f, maps)?;
    let dtop = signed(&f.partial_unchecked(top), if pf.is_odd() { -1 } else { 1 });
    for i in 1..=2 * sig.m() {
        let xi = SuperPoly::var(sig, i)?;
        add_into(&mut out, i, &dtop.mul_unchecked(&xi));
    }
    let mut last = eul.apply_unchecked(f);
    for (m, c) in f.terms() {
        last.add_term(*m, c * scalar::int(-2));
    }
    add_into(&mut out, top, &last);
    Ok(out)
}

/// `div_λ(f) = (-1)^{|f|} 2 (Σ_{i=1}^m ∂_i ∂_{i'}(f) + (𝔇 - mλ) ∂_{2m+1}(f))`.
pub fn div_lambda(f: &SuperPoly, lambda: &Scalar, maps: &IndexMaps) -> Result<SuperPoly> {
    ensure_maps(maps, f, "div_lambda", &[Family::KO, Family::SKO])?;
    let sig = f.signature();
    if sig.n() != sig.m() + 1 {
        return Err(Error::InvalidConfig("div_lambda needs n = m + 1".into()));
    }
    let pf = f.homogeneous_parity()?;
    let m = sig.m();
    let mut inner = SuperPoly::zero(sig);
    for i in 1..=m {
        let ip = maps.iprime(i).expect("i' defined");
        for (mm, c) in f.partial_unchecked(ip).partial_unchecked(i).terms() {
            inner.add_term(*mm, c.clone());
        }
    }
    let dtop = f.partial_unchecked(2 * m + 1);
    for (mm, c) in euler(sig)?.apply_unchecked(&dtop).terms() {
        inner.add_term(*mm, c.clone());
    }
    let shift = lambda * scalar::int(m as i64);
    for (mm, c) in dtop.terms() {
        inner.add_term(*mm, -(c * &shift));
    }
    let factor = scalar::int(if pf.is_odd() { -2 } else { 2 });
    Ok(inner.scale(&factor))
}

/// `D_X(f)` for the families that have a generating function presentation.
pub fn d_x(family: Family, f: &SuperPoly, maps: &IndexMaps) -> Result<VectorField> {
    match family {
        Family::H => d_h(f, maps),
        Family::K => d_k(f, maps),
        Family::HO | Family::SHO => d_ho(f, maps),
        Family::KO | Family::SKO => d_ko(f, maps),
        Family::W | Family::S => Err(Error::Unsupported {
            op: "D_X".into(),
            context: format!("family {family}"),
        }),
    }
}

/// Which parity the sign `(-1)^{|f|}` in the KO correction of
/// [`bracket_formula`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CorrectionParity {
    /// Parity of the field `D_X(f)`. This is the reading under which the
    /// identity holds for KO and SKO.
    #[default]
    Field,
    /// Parity of the generating function `f`. Fails for KO and SKO, e.g.
    /// `f = x_{2m+1}, g = 1`.
    Function,
}

/// Right-hand side of the generating-function bracket identity
/// `[D_X(f), D_X(g)] = D_X(D_X(f)(g) - 2(δ_{X,K} - (-1)^{|f|} δ_{X,KO}) ∂_ν(f) g)`
/// with `|f|` read as the parity of `D_X(f)`.
///
/// SKO takes the KO correction and SHO the HO one (no correction).
pub fn bracket_formula(
    family: Family,
    f: &SuperPoly,
    g: &SuperPoly,
    maps: &IndexMaps,
) -> Result<VectorField> {
    bracket_formula_with(family, f, g, maps, CorrectionParity::Field)
}

pub fn bracket_formula_with(
    family: Family,
    f: &SuperPoly,
    g: &SuperPoly,
    maps: &IndexMaps,
    reading: CorrectionParity,
) -> Result<VectorField> {
    if matches!(family, Family::W | Family::S) {
        return Err(Error::Unsupported {
            op: "bracket_formula".into(),
            context: format!("family {family}"),
        });
    }
    let pf = f.homogeneous_parity()?;
    g.homogeneous_parity()?;
    let df = d_x(family, f, maps)?;
    let mut inner = df.apply(g)?;
    let sign_parity = match reading {
        CorrectionParity::Field => d_x_parity(family, pf),
        CorrectionParity::Function => pf,
    };
    // -2(δ_K - (-1)^p δ_KO)
    let coeff: i64 = match family {
        Family::K => -2,
        Family::KO | Family::SKO => {
            if sign_parity.is_odd() {
                -2
            } else {
                2
            }
        }
        _ => 0,
    };
    if coeff != 0 {
        let nu = maps.nu().expect("ν defined for K, KO, SKO");
        let corr = f.partial_unchecked(nu).mul_unchecked(g);
        for (m, c) in corr.terms() {
            inner.add_term(*m, c * scalar::int(coeff));
        }
    }
    d_x(family, &inner, maps)
}

/// Parity of `D_X(f)` given `|f|`: `D_H` and `D_K` preserve parity, the odd
/// operators `D_HO` and `D_KO` flip it.
pub fn d_x_parity(family: Family, pf: Parity) -> Parity {
    match family {
        Family::HO | Family::SHO | Family::KO | Family::SKO => pf + Parity::Odd,
        _ => pf,
    }
}
