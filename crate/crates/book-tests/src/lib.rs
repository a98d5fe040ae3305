//! Runs the code listings of the guide as doc-tests, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/moebius.md")]
pub mod moebius {}
#[doc = include_str!("../../../book/src/circles.md")]
pub mod circles {}
#[doc = include_str!("../../../book/src/parameter-spaces.md")]
pub mod parameter_spaces {}
#[doc = include_str!("../../../book/src/koebe.md")]
pub mod koebe {}
#[doc = include_str!("../../../book/src/triangle.md")]
pub mod triangle {}
#[doc = include_str!("../../../book/src/deformation.md")]
pub mod deformation {}
#[doc = include_str!("../../../book/src/limit-sets.md")]
pub mod limit_sets {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
