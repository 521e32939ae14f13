//! Lazy, exact p-adic arithmetic.
//!
//! Exact p-adic numbers, rings, extensions and polynomials are nodes of a
//! dependency graph that can be approximated to any precision on demand. The
//! [`approx`] module is the fixed-precision engine underneath; [`rings`]
//! builds exact objects on the [`lazy`] engine; [`query`] and [`newton`]
//! provide algorithms that only ever look at finitely many approximations.

pub mod approx;
pub mod bench;
pub mod error;
pub mod expr;
pub mod integer;
pub mod lazy;
pub mod newton;
pub mod query;
pub mod rings;

pub use error::{Error, Result, Val};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/approximations.md")]
    mod approximations {}
    #[doc = include_str!("../../../book/src/lazy.md")]
    mod lazy {}
    #[doc = include_str!("../../../book/src/queries.md")]
    mod queries {}
    #[doc = include_str!("../../../book/src/extensions.md")]
    mod extensions {}
    #[doc = include_str!("../../../book/src/newton.md")]
    mod newton {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}
