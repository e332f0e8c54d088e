//! Library surface of the CLI harness: the in-memory simulation world, the
//! networked scenarios, the benchmark measurements and their reports. The
//! binary in `main.rs` is a thin dispatcher over these.

pub mod bench;
pub mod keyfiles;
pub mod report;
pub mod scenario;
pub mod sim;
