//! Exact arithmetic in the Grassmann superalgebra `Λ(m,n)`, the Lie
//! superalgebra `W(m,n)` of its super-derivations, the Cartan-type
//! subalgebras `S, H, K, HO, KO, SHO, SKO`, and a solver for Hom-Lie
//! structures on their low-degree parts.
//!
//! ```
//! use cartan::superpoly::{Signature, SuperPoly};
//!
//! let sig = Signature::new(4, 4).unwrap();
//! let x5 = SuperPoly::var(sig, 5).unwrap();
//! let x6 = SuperPoly::var(sig, 6).unwrap();
//! assert_eq!(x6.mul(&x5).unwrap().to_string(), "-x5*x6");
//! ```

pub mod error;
pub mod expr;
pub mod families;
pub mod homsolver;
pub mod linalg;
pub mod par;
pub mod scalar;
pub mod superpoly;
pub mod vectorfield;
pub mod verify;

pub use error::{Error, Result};
pub use families::{Family, FamilyConfig};
pub use scalar::Scalar;
pub use superpoly::{Parity, Signature, SuperMonomial, SuperPoly};
pub use vectorfield::VectorField;
