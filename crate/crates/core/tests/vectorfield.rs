use cartan::families::{Family, FamilyConfig};
use cartan::scalar::{int, ratio};
use cartan::superpoly::{Parity, Signature, SuperPoly};
use cartan::vectorfield::{
    bracket_formula, d_h, d_ho, d_ij, d_k, d_ko, d_x_parity, div_lambda, euler, IndexMaps,
    VectorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn x(sig: Signature, i: usize) -> SuperPoly {
    SuperPoly::var(sig, i).unwrap()
}

fn xp(sig: Signature, i: usize, r: usize) -> VectorField {
    VectorField::term(x(sig, i), r).unwrap()
}

fn p(sig: Signature, r: usize) -> VectorField {
    VectorField::partial(sig, r).unwrap()
}

fn maps(f: Family, m: usize, n: usize) -> IndexMaps {
    IndexMaps::new(f, Signature::new(m, n).unwrap()).unwrap()
}

fn random_parity(rng: &mut ChaCha8Rng) -> Parity {
    if rng.gen_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

#[test]
fn apply_examples() {
    let s = Signature::new(4, 4).unwrap();
    let x1sq = x(s, 1).mul(&x(s, 1)).unwrap();
    assert_eq!(p(s, 1).apply(&x1sq).unwrap(), x(s, 1).scale(&int(2)));
    assert_eq!(xp(s, 1, 2).apply(&x(s, 2)).unwrap(), x(s, 1));
    // x5 ∂6 (x6 x7) = x5 x7, ∂6 is the first factor so no sign
    let x6x7 = x(s, 6).mul(&x(s, 7)).unwrap();
    assert_eq!(
        xp(s, 5, 6).apply(&x6x7).unwrap(),
        x(s, 5).mul(&x(s, 7)).unwrap()
    );
}

#[test]
fn bracket_examples() {
    let s = Signature::new(4, 4).unwrap();
    let lhs = xp(s, 1, 2).bracket(&xp(s, 2, 1)).unwrap();
    assert_eq!(lhs, xp(s, 1, 1).sub(&xp(s, 2, 2)).unwrap());
    assert!(p(s, 1).bracket(&p(s, 2)).unwrap().is_zero());
    // ∂5 is odd, x5∂5 even: [∂5, x5∂5] = ∂5(x5) ∂5
    assert_eq!(p(s, 5).bracket(&xp(s, 5, 5)).unwrap(), p(s, 5));
    let mixed = p(s, 1).add(&p(s, 5)).unwrap();
    assert!(mixed.bracket(&p(s, 1)).is_err());
}

#[test]
fn div_examples() {
    let s = Signature::new(4, 4).unwrap();
    assert_eq!(xp(s, 1, 1).div().unwrap(), SuperPoly::one(s));
    assert_eq!(xp(s, 5, 5).div().unwrap(), SuperPoly::one(s).neg());
    for k in 1..=8 {
        assert!(p(s, k).div().unwrap().is_zero());
    }
}

#[test]
fn d_ij_examples() {
    let s = Signature::new(4, 4).unwrap();
    let x1x2 = x(s, 1).mul(&x(s, 2)).unwrap();
    assert_eq!(
        d_ij(1, 2, &x1x2).unwrap(),
        xp(s, 2, 2).sub(&xp(s, 1, 1)).unwrap()
    );
    assert!(d_ij(3, 6, &SuperPoly::one(s)).unwrap().is_zero());
    let f = x(s, 1).mul(&x(s, 1)).unwrap().mul(&x(s, 3)).unwrap();
    assert!(d_ij(1, 1, &f).unwrap().is_zero());
    assert!(d_ij(9, 1, &f).is_err());
}

#[test]
fn d_h_examples() {
    let mh = maps(Family::H, 4, 4);
    let s = mh.signature();
    assert_eq!(d_h(&x(s, 1), &mh).unwrap(), p(s, 3));
    let x1x3 = x(s, 1).mul(&x(s, 3)).unwrap();
    assert_eq!(
        d_h(&x1x3, &mh).unwrap(),
        xp(s, 3, 3).sub(&xp(s, 1, 1)).unwrap()
    );
    assert!(d_h(&SuperPoly::one(s), &mh).unwrap().is_zero());
}

#[test]
fn d_k_examples() {
    let mk = maps(Family::K, 5, 4);
    let s = mk.signature();
    let dk1 = d_k(&SuperPoly::one(s), &mk).unwrap();
    assert_eq!(dk1, p(s, 5).scale(&int(2)));
    let dk_x1 = d_k(&x(s, 1), &mk).unwrap();
    assert_eq!(dk_x1, p(s, 3).add(&xp(s, 1, 5)).unwrap());
    let dk_x3 = d_k(&x(s, 3), &mk).unwrap();
    assert_eq!(dk_x1.bracket(&dk_x3).unwrap(), dk1);
    assert_eq!(
        bracket_formula(Family::K, &x(s, 1), &x(s, 3), &mk).unwrap(),
        dk1
    );
    assert!(d_k(&x(s, 1), &maps(Family::H, 4, 4)).is_err());
}

#[test]
fn d_ho_examples() {
    let mo = maps(Family::HO, 4, 4);
    let s = mo.signature();
    assert_eq!(d_ho(&x(s, 1), &mo).unwrap(), p(s, 5));
    // ∂5 and x5 are both odd, so the Koszul sign is -1
    assert_eq!(d_ho(&x(s, 5), &mo).unwrap(), p(s, 1).neg());
    assert!(d_ho(&SuperPoly::one(s), &mo).unwrap().is_zero());
}

#[test]
fn d_ko_examples() {
    let mo = maps(Family::KO, 4, 5);
    let s = mo.signature();
    assert_eq!(
        d_ko(&SuperPoly::one(s), &mo).unwrap(),
        p(s, 9).scale(&int(-2))
    );
    let expect = euler(s)
        .unwrap()
        .neg()
        .sub(&xp(s, 9, 9).scale(&int(2)))
        .unwrap();
    assert_eq!(d_ko(&x(s, 9), &mo).unwrap(), expect);
    assert_eq!(
        d_ko(&x(s, 1), &mo).unwrap(),
        p(s, 5).sub(&xp(s, 1, 9)).unwrap()
    );
    assert!(d_ko(&x(s, 1), &maps(Family::HO, 4, 4)).is_err());
}

#[test]
fn div_lambda_examples() {
    let mo = maps(Family::SKO, 4, 5);
    let s = mo.signature();
    for l in [int(0), int(1), ratio(2, 3), ratio(-5, 7)] {
        let v = div_lambda(&x(s, 9), &l, &mo).unwrap();
        assert_eq!(v, SuperPoly::constant(s, &l * int(8)));
        assert!(div_lambda(&SuperPoly::one(s), &l, &mo).unwrap().is_zero());
        // x1 x5 is odd, ∂1 ∂5 (x1 x5) = 1, prefactor -2
        let x1x5 = x(s, 1).mul(&x(s, 5)).unwrap();
        assert_eq!(
            div_lambda(&x1x5, &l, &mo).unwrap(),
            SuperPoly::constant(s, int(-2))
        );
    }
}

fn sample_field(rng: &mut ChaCha8Rng, s: Signature) -> (VectorField, Parity) {
    let pa = random_parity(rng);
    (VectorField::random_with(rng, s, pa, 3), pa)
}

#[test]
fn super_jacobi_on_1000_triples() {
    let s = Signature::new(4, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let (a, pa) = sample_field(&mut rng, s);
        let (b, pb) = sample_field(&mut rng, s);
        let (c, pc) = sample_field(&mut rng, s);
        let t1 = a
            .bracket(&b.bracket(&c).unwrap())
            .unwrap()
            .scale(&int(pa.koszul(pc)));
        let t2 = b
            .bracket(&c.bracket(&a).unwrap())
            .unwrap()
            .scale(&int(pb.koszul(pa)));
        let t3 = c
            .bracket(&a.bracket(&b).unwrap())
            .unwrap()
            .scale(&int(pc.koszul(pb)));
        let sum = t1.add(&t2).unwrap().add(&t3).unwrap();
        assert!(sum.is_zero(), "{a} | {b} | {c}");
    }
}

#[test]
fn antisymmetry_and_operator_commutator() {
    let s = Signature::new(4, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..500 {
        let (a, pa) = sample_field(&mut rng, s);
        let (b, pb) = sample_field(&mut rng, s);
        let ab = a.bracket(&b).unwrap();
        let ba = b.bracket(&a).unwrap();
        assert_eq!(ab, ba.scale(&int(-pa.koszul(pb))));
        let fp = random_parity(&mut rng);
        let f = SuperPoly::random_with(&mut rng, s, fp, 3);
        let lhs = ab.apply(&f).unwrap();
        let rhs = a
            .apply(&b.apply(&f).unwrap())
            .unwrap()
            .sub(
                &b.apply(&a.apply(&f).unwrap())
                    .unwrap()
                    .scale(&int(pa.koszul(pb))),
            )
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn bracket_formula_matches_commutator() {
    for cfg in [
        FamilyConfig::new(Family::H, 4, 4).unwrap(),
        FamilyConfig::new(Family::K, 5, 4).unwrap(),
        FamilyConfig::new(Family::HO, 4, 4).unwrap(),
        FamilyConfig::new(Family::SHO, 4, 4).unwrap(),
        FamilyConfig::new(Family::KO, 4, 5).unwrap(),
        FamilyConfig::new(Family::SKO, 4, 5)
            .unwrap()
            .with_lambda(ratio(2, 3)),
    ] {
        let s = cfg.signature();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..150 {
            let pf = random_parity(&mut rng);
            let pg = random_parity(&mut rng);
            let f = SuperPoly::random_with(&mut rng, s, pf, 4);
            let g = SuperPoly::random_with(&mut rng, s, pg, 4);
            let df = cfg.d_x(&f).unwrap();
            let dg = cfg.d_x(&g).unwrap();
            let lhs = df.bracket(&dg).unwrap();
            let rhs = bracket_formula(cfg.family(), &f, &g, cfg.maps()).unwrap();
            assert_eq!(lhs, rhs, "{cfg}: f = {f}, g = {g}");
            if !df.is_zero() {
                assert_eq!(
                    df.homogeneous_parity().unwrap(),
                    d_x_parity(cfg.family(), pf)
                );
            }
        }
    }
}

#[test]
fn ko_correction_parity_readings() {
    use cartan::vectorfield::{bracket_formula_with, CorrectionParity};
    let cfg = FamilyConfig::new(Family::KO, 4, 5).unwrap();
    let s = cfg.signature();
    let one = SuperPoly::one(s);
    // [D(x9), D(1)] = [-𝔇 - 2 x9∂9, -2∂9] = 4[x9∂9, ∂9] = -4∂9
    let lhs = cfg
        .d_x(&x(s, 9))
        .unwrap()
        .bracket(&cfg.d_x(&one).unwrap())
        .unwrap();
    assert_eq!(lhs, p(s, 9).scale(&int(-4)));
    let field = bracket_formula_with(
        Family::KO,
        &x(s, 9),
        &one,
        cfg.maps(),
        CorrectionParity::Field,
    )
    .unwrap();
    let function = bracket_formula_with(
        Family::KO,
        &x(s, 9),
        &one,
        cfg.maps(),
        CorrectionParity::Function,
    )
    .unwrap();
    assert_eq!(field, lhs);
    assert_eq!(function, lhs.neg());
}
