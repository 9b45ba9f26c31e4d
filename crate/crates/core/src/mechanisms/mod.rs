//! Assignment mechanisms.
//!
//! [`lottery`] holds the round-based mechanisms resolved by lotteries or
//! priorities (eager Boston, adaptive Boston, classic Boston, random
//! priority). [`eating`] holds the continuous-consumption mechanisms
//! (the respecting-eagerness family and probabilistic serial).

pub mod eating;
pub mod lottery;
