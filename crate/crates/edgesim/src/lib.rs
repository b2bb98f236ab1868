//! Discrete-event simulator of a wireless edge station that multicasts video
//! segments to a set of clients with local caches.
//!
//! The station serves segment requests over one shared broadcast channel.
//! Clients cache segments they receive and replay files according to a
//! rewatch-biased popularity process; the station can XOR-combine pending
//! requests into a single coded transmission whenever every target client
//! already holds the other targets' segments. The crate measures how much
//! traffic the caches and the coded multicast save, and what the clients see
//! in terms of per-MB latency and perceived throughput.
//!
//! ## Layout
//!
//! - [`popularity`]: per-client file-popularity distribution and its update rule
//! - [`workload`]: catalog generation, request-profile generation, text formats
//! - [`cache`]: client cache state, shared request statistics, eviction policies
//! - [`coding`]: pending-request queue and the greedy coded-merge placement
//! - [`engine`]: the event loop tying clients, queue, and channel together
//! - [`metrics`]: gains, latency/throughput summaries, results CSV
//! - [`sweep`]: experiment grid runner with resume support
//! - [`plot`]: dependency-free SVG rendering of aggregated results
//! - [`config`]: experiment configuration file schema

pub mod cache;
pub mod cli;
pub mod coding;
pub mod config;
pub mod engine;
pub mod error;
pub mod fsutil;
pub mod metrics;
pub mod plot;
pub mod popularity;
pub mod sweep;
pub mod workload;

pub use error::SimError;

/// Simulation time in integer milliseconds since run start.
pub type TimeMs = u64;

/// Client identifier (dense, `0..n_clients`).
pub type ClientId = u32;

/// A single video segment: file rank plus 1-based segment index.
///
/// Files are identified by their initial popularity rank (1 = most popular),
/// so the derived `Ord` gives the canonical (file, index) tie-break order used
/// by every deterministic scan in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId {
    pub file: u32,
    pub index: u32,
}

impl SegmentId {
    pub fn new(file: u32, index: u32) -> Self {
        Self { file, index }
    }
}

impl std::fmt::Display for SegmentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.file, self.index)
    }
}
