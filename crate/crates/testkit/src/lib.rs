//! Slow, direct reference implementations that the test suites compare the
//! production code against. Nothing here shares code with `flowsieve`.

pub mod cart;
pub mod cases;
pub mod numeric;
pub mod scores;
