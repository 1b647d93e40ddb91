// mdbook cannot run listings that depend on workspace crates, so each
// chapter is included here as a module doc and `cargo test --doc` runs it.
// One module per chapter keeps failure names traceable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}
#[doc = include_str!("../../../book/src/dispersion.md")]
pub mod dispersion {}
#[doc = include_str!("../../../book/src/randomization.md")]
pub mod randomization {}
#[doc = include_str!("../../../book/src/monitoring.md")]
pub mod monitoring {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/limitations.md")]
pub mod limitations {}
