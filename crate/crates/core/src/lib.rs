//! Exact-arithmetic machinery for characteristic-p differential calculus,
//! Milnor K-theory mod p, and duality pairings of finite abelian groups.
//!
//! Modules mirror the mathematical layers:
//! - [`fields`]: `F_q(t_1..t_d)` with the Frobenius and p-monomial structure;
//! - [`derham`]: differential forms, Cartier operators, `Z^r`/`B^r`, dlog;
//! - [`duality`]: wedge-product Gram matrices and graded-piece pairings;
//! - [`kmilnor`]: Milnor symbols mod p, tame symbols, unit filtrations;
//! - [`finab`]: finite abelian groups, Q/Z pairings, the four-lemma harness;
//! - [`complexes`]: bounded complexes, cones, chain pairings;
//! - [`gcoh`]: finite-group cohomology, cup products, transfers;
//! - [`suites`]: the seeded verification suites behind `charp verify`.

pub mod error;
pub mod fq;
pub mod poly;
pub mod ratfn;
pub mod fields;
pub mod derham;
pub mod duality;
pub mod finab;
pub mod kmilnor;
pub mod complexes;
pub mod gcoh;
pub mod suites;

pub use error::FieldError;
pub use fields::{KElem, PBasisField, PMonDecomp};
pub use fq::{ArtinSchreier, Fq, FqElem};
pub use poly::{MPoly, Mon};
pub use ratfn::RatFn;
