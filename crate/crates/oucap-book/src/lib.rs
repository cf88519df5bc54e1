//! The guide in `book/` is the narrative documentation of `oucap`. mdbook
//! does not run snippets against crate dependencies, so this shim includes
//! every chapter as a module doc and lets `cargo test --doc` execute the
//! code blocks. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model-space.md")]
pub mod model_space {}

#[doc = include_str!("../../../book/src/semigroup.md")]
pub mod semigroup {}

#[doc = include_str!("../../../book/src/potentials.md")]
pub mod potentials {}

#[doc = include_str!("../../../book/src/truncation.md")]
pub mod truncation {}

#[doc = include_str!("../../../book/src/capacities.md")]
pub mod capacities {}

#[doc = include_str!("../../../book/src/hausdorff.md")]
pub mod hausdorff {}

#[doc = include_str!("../../../book/src/sheet.md")]
pub mod sheet {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
