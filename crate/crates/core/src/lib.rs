pub mod acceptance;
pub mod circle;
pub mod deform;
pub mod error;
pub mod exact;
pub mod group;
pub mod json;
pub mod koebe;
pub mod limitset;
pub mod moebius;
pub mod render;
pub mod triangle;
pub mod varieties;

pub use error::{Error, Result};
