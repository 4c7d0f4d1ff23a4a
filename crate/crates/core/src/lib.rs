//! Autonomous power-grid violation resolution.
//!
//! The crate detects voltage, thermal and disconnection violations with an
//! AC power-flow solver and remediates them through a sandboxed
//! plan/execute/validate loop with rollback. Plans come either from a
//! deterministic heuristic planner or from an LLM behind a pluggable chat
//! transport.
//!
//! Module map:
//! - [`model`] — grid data model and topology queries
//! - [`admittance`] — per-unit conversion and Y-bus construction
//! - [`caseio`] — case file parsing/serialization and built-in benchmarks
//! - [`powerflow`] — island detection and the Newton-Raphson solver
//! - [`violations`] — violation detection, scoring and report comparison
//! - [`actions`] — typed control actions with validation and exact undo
//! - [`context`] — adaptive multi-scale rendering of grid state for planners
//! - [`planner`] — heuristic and LLM planners, prompts and tool-call parsing
//! - [`workflow`] — the plan/execute/validate/rollback resolution loop
//! - [`harness`] — scenario generation, metrics, benchmarking, data export

pub mod actions;
pub mod admittance;
pub mod caseio;
pub mod context;
pub mod harness;
pub mod model;
pub mod planner;
pub mod powerflow;
pub mod violations;
pub mod workflow;

use sha2::{Digest, Sha256};

/// Short stable content hash (first 16 hex chars of SHA-256), used for
/// network digests and violation-report fingerprints.
pub fn digest_str(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(16);
    for byte in out.iter().take(8) {
        use std::fmt::Write;
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}
