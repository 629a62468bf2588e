//! Runs the guide's code blocks as doc-tests so the book cannot drift from the API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grid.md")]
pub mod grid {}

#[doc = include_str!("../../../book/src/jump-operator.md")]
pub mod jump_operator {}

#[doc = include_str!("../../../book/src/stationary.md")]
pub mod stationary {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/bifurcations.md")]
pub mod bifurcations {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
