// The book chapters are compiled as doc comments so that `cargo test --doc`
// runs every snippet. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/two_level.md")]
pub mod two_level {}
#[doc = include_str!("../../../book/src/seeds.md")]
pub mod seeds {}
#[doc = include_str!("../../../book/src/transformation.md")]
pub mod transformation {}
#[doc = include_str!("../../../book/src/families.md")]
pub mod families {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
