//! Extremality of uniformly noisy pairs of mutually unbiased bases.
//!
//! A pair of MUBs in `C^d` mixed with white noise at weights `(λ, μ)` is
//! jointly measurable on a convex region of the plane. On the elliptic arc
//! bounding that region, the noisy pair is an extreme point of the set of
//! compatible observable pairs iff `λμ ≠ 0` and the Haagerup matrix of the
//! bases has no eigenvalue `−1`.
//!
//! - [`finite_group`]: finite abelian groups and their characters.
//! - [`mub_catalog`]: MUB pairs from groups, Hadamard matrices and a catalog.
//! - [`haagerup`]: the matrix `Λ` and its spectrum.
//! - [`povm`]: noisy observables and explicit joint observables.
//! - [`extremality`]: region geometry and certificates.
//! - [`numerics`]: Jacobi eigensolver, Gram ranks and tolerances.
//!
//! ```
//! use mub_extremal::extremality::{certify_gamma_point, gamma_parametrize, Verdict};
//! use mub_extremal::mub_catalog::fourier_mub;
//! use mub_extremal::numerics::Tolerances;
//! use mub_extremal::povm::Branch;
//!
//! let tol = Tolerances::default();
//! let pair = fourier_mub(&"7".parse()?);
//! let (l, m) = gamma_parametrize(7, 0.3, Branch::A)?;
//! let cert = certify_gamma_point(&pair, l, m, true, &tol)?;
//! assert_eq!(cert.verdict, Verdict::Extremal);
//! # Ok::<(), mub_extremal::error::Error>(())
//! ```

pub mod error;
pub mod extremality;
pub mod finite_group;
pub mod haagerup;
pub mod mub_catalog;
pub mod numerics;
pub mod povm;
pub mod report;

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/bases.md")]
    mod bases {}
    #[doc = include_str!("../../../book/src/haagerup.md")]
    mod haagerup {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/region.md")]
    mod region {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
