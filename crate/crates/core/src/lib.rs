pub mod driver;
pub mod engine;
pub mod ir;
pub mod minimize;
pub mod prelude;
pub mod resolve;
pub mod syntax;
pub mod triggers;
pub mod vcgen;

#[cfg(test)]
mod testutil;
