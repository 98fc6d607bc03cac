pub mod eval;
pub mod extract;
pub mod report;
pub mod repr;
pub mod selftest;
pub mod synth;
pub mod train;
