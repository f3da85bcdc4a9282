use cartan::error::Error;
use cartan::expr::{self, Value};
use cartan::superpoly::{Parity, SuperPoly};
use cartan::vectorfield::VectorField;
use cartan::FamilyConfig;
use proptest::prelude::*;

fn configs() -> Vec<FamilyConfig> {
    FamilyConfig::desk_defaults()
}

#[test]
fn random_expressions_round_trip() {
    let cfgs = configs();
    for seed in 0..200u64 {
        let c = &cfgs[seed as usize % cfgs.len()];
        let e = expr::random_expr(c, seed);
        let text = e.to_string();
        let reparsed = expr::parse(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        assert_eq!(reparsed.to_string(), text);
        let value = expr::evaluate(&reparsed, c)
            .unwrap_or_else(|err| panic!("{} {text}: {err}", c.label()));
        let canon = value.to_string();
        let again = expr::eval_str(&canon, c).unwrap_or_else(|err| panic!("{canon}: {err}"));
        // a zero field prints as `0`, which reads back as the zero polynomial
        if canon != "0" {
            assert_eq!(again, value, "{text}");
        }
        assert_eq!(again.to_string(), canon);
    }
}

#[test]
fn printing_canonicalizes() {
    let c = FamilyConfig::new(cartan::Family::W, 4, 4).unwrap();
    let v = expr::eval_str("x6*x5 + 2/4*x1*x1 - x1^2", &c).unwrap();
    assert_eq!(v.to_string(), "-1/2*x1^2 - x5*x6");
    let f = expr::eval_str("(x2 + x1)*p3 - p3*0", &c);
    assert!(matches!(f, Err(Error::Parse { offset: 18, .. })), "{f:?}");
    let f = expr::eval_str("(x2 + x1)*p3", &c).unwrap();
    assert_eq!(f.to_string(), "x1*p3 + x2*p3");
}

#[test]
fn syntax_errors_are_positioned() {
    for (text, offset) in [
        ("x1 +", 4),
        ("D(1,2 x1)", 6),
        ("1/0", 0),
        ("x1 $ x2", 3),
        ("div_lambda(1/2, x1)", 14),
        ("x01", 0),
    ] {
        match expr::parse(text) {
            Err(Error::Parse { offset: o, .. }) => assert_eq!(o, offset, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn semantic_errors() {
    let ko = FamilyConfig::new(cartan::Family::KO, 4, 5).unwrap();
    // mixed parity under an operator that needs a homogeneous argument
    match expr::eval_str("D_KO(x1 + x5)", &ko) {
        Err(Error::Parse { offset, message }) => {
            assert_eq!(offset, 5);
            assert!(message.contains("parity"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    // family mismatch
    assert!(matches!(
        expr::eval_str("D_K(1)", &ko),
        Err(Error::Parse { offset: 0, .. })
    ));
    // index range
    assert!(matches!(
        expr::eval_str("p10", &ko),
        Err(Error::Parse { offset: 0, .. })
    ));
}

proptest! {
    #[test]
    fn canonical_forms_parse_back(seed in any::<u64>(), odd in any::<bool>(), pick in 0usize..10) {
        let c = &configs()[pick];
        let parity = if odd { Parity::Odd } else { Parity::Even };
        let sig = c.signature();
        let f = VectorField::random_homogeneous(sig, parity, 3, seed);
        let text = f.to_string();
        prop_assert_eq!(expr::eval_str(&text, c).unwrap(), Value::Field(f));
        let p = SuperPoly::random_homogeneous(sig, parity, 3, seed);
        let text = p.to_string();
        prop_assert_eq!(expr::eval_str(&text, c).unwrap(), Value::Poly(p));
    }
}
