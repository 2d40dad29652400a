#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod algorithms;
pub mod error;
pub mod instance;
pub mod objective;
pub mod oracles;
pub mod report;
pub mod submodular;
pub mod subproblem;
pub mod vertex;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/set-functions.md")]
    mod set_functions {}
    #[doc = include_str!("../../../book/src/duality.md")]
    mod duality {}
    #[doc = include_str!("../../../book/src/kelley.md")]
    mod kelley {}
    #[doc = include_str!("../../../book/src/frank-wolfe.md")]
    mod frank_wolfe {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
