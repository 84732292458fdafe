//! The chapters of the guide in `book/src`, included as documentation so
//! that `cargo test` compiles and runs every Rust listing in them.

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/extraction.md")]
pub mod extraction {}

#[doc = include_str!("../../../book/src/fixpoint.md")]
pub mod fixpoint {}

#[doc = include_str!("../../../book/src/recall.md")]
pub mod recall {}

#[doc = include_str!("../../../book/src/overlap.md")]
pub mod overlap {}
