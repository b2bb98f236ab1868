//! Per-client segment caches, the station's shared request statistics, and
//! the eviction policies that arbitrate between them.
//!
//! The station keeps one set of global statistics (request recency and
//! frequency per segment, plus how many client caches currently hold each
//! segment) and each client keeps a byte-budgeted cache of segments it has
//! received. On insert, a cache evicts victims one at a time until the new
//! segment fits, choosing each victim by the configured policy:
//!
//! - `lru` — evict the globally least-recently requested resident;
//! - `lfu` — evict the globally least-frequently requested resident;
//! - `belady` — clairvoyant: evict the resident this client will next need
//!   farthest in the future (never again counts as farthest);
//! - `lfu-index` — evict the globally least-frequently requested resident,
//!   breaking ties toward segments replicated in more caches (cheap to drop
//!   locally, and spare copies create coding chances), then toward the one
//!   this client played least recently.
//!
//! Every remaining tie falls back to the smallest (file, index) pair, so
//! victim selection is fully deterministic.

use crate::workload::{Catalog, SegmentIndex};
use crate::{ClientId, SegmentId, TimeMs};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Cache eviction policy. The derived order (declaration order) gives
/// aggregated tables a stable policy sort.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Policy {
    Lru,
    Lfu,
    Belady,
    LfuIndex,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Lru, Policy::Lfu, Policy::Belady, Policy::LfuIndex];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Lru => "lru",
            Policy::Lfu => "lfu",
            Policy::Belady => "belady",
            Policy::LfuIndex => "lfu-index",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lru" => Ok(Policy::Lru),
            "lfu" => Ok(Policy::Lfu),
            "belady" => Ok(Policy::Belady),
            "lfu-index" => Ok(Policy::LfuIndex),
            other => Err(format!(
                "unknown policy {other:?} (expected lru, lfu, belady, or lfu-index)"
            )),
        }
    }
}

/// Snapshot of everything the station tracks about one segment, from one
/// client's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentRecord {
    pub segment: SegmentId,
    /// When this client last requested the segment.
    pub last_local: Option<TimeMs>,
    /// How many times this client has requested it.
    pub local_count: u64,
    /// When any client last requested it.
    pub last_global: Option<TimeMs>,
    /// How many times any client has requested it.
    pub global_count: u64,
    /// How many client caches currently hold it.
    pub holders: u32,
}

/// Station-wide request statistics, kept in dense per-segment arrays.
///
/// `record_request` must be called with non-decreasing timestamps; a
/// regression means the event loop is broken, so it panics rather than
/// recording misordered history.
#[derive(Debug)]
pub struct GlobalStats {
    index: SegmentIndex,
    last_global: Vec<Option<TimeMs>>,
    global_count: Vec<u64>,
    holders: Vec<u32>,
    /// Outer index: client id.
    last_local: Vec<Vec<Option<TimeMs>>>,
    local_count: Vec<Vec<u64>>,
    last_time: TimeMs,
}

impl GlobalStats {
    pub fn new(catalog: &Catalog, n_clients: u32) -> Self {
        let index = catalog.segment_index().clone();
        let n = index.total_segments();
        Self {
            index,
            last_global: vec![None; n],
            global_count: vec![0; n],
            holders: vec![0; n],
            last_local: vec![vec![None; n]; n_clients as usize],
            local_count: vec![vec![0; n]; n_clients as usize],
            last_time: 0,
        }
    }

    /// Note that `client` requested `seg` at time `now` (hit or miss alike).
    pub fn record_request(&mut self, client: ClientId, seg: SegmentId, now: TimeMs) {
        assert!(
            now >= self.last_time,
            "request times must be non-decreasing: {now} after {}",
            self.last_time
        );
        self.last_time = now;
        let o = self.index.ordinal(seg);
        self.last_global[o] = Some(now);
        self.global_count[o] += 1;
        self.last_local[client as usize][o] = Some(now);
        self.local_count[client as usize][o] += 1;
    }

    pub fn holders(&self, seg: SegmentId) -> u32 {
        self.holders[self.index.ordinal(seg)]
    }

    fn note_insert(&mut self, seg: SegmentId) {
        self.holders[self.index.ordinal(seg)] += 1;
    }

    fn note_evict(&mut self, seg: SegmentId) {
        let o = self.index.ordinal(seg);
        assert!(self.holders[o] > 0, "holder count underflow for {seg}");
        self.holders[o] -= 1;
    }

    pub fn record(&self, client: ClientId, seg: SegmentId) -> SegmentRecord {
        let o = self.index.ordinal(seg);
        SegmentRecord {
            segment: seg,
            last_local: self.last_local[client as usize][o],
            local_count: self.local_count[client as usize][o],
            last_global: self.last_global[o],
            global_count: self.global_count[o],
            holders: self.holders[o],
        }
    }
}

/// The remaining request sequence of one client, consulted by the
/// clairvoyant policy.
///
/// `positions` lists, per segment, the indices at which that segment occurs
/// in the client's full request sequence; `cursor` counts requests already
/// issued. The next use of a segment is its first occurrence at or past the
/// cursor.
#[derive(Debug, Clone)]
pub struct ClientFuture {
    index: SegmentIndex,
    positions: Vec<Vec<u32>>,
    cursor: u32,
}

impl ClientFuture {
    pub fn new(catalog: &Catalog, sequence: &[SegmentId]) -> Self {
        let index = catalog.segment_index().clone();
        let mut positions = vec![Vec::new(); index.total_segments()];
        for (pos, &seg) in sequence.iter().enumerate() {
            positions[index.ordinal(seg)].push(pos as u32);
        }
        Self {
            index,
            positions,
            cursor: 0,
        }
    }

    /// Consume one request; call exactly once per segment the client asks
    /// for, in order.
    pub fn advance(&mut self) {
        self.cursor += 1;
    }

    /// Position of the client's next request for `seg`, if any.
    pub fn next_use(&self, seg: SegmentId) -> Option<u32> {
        let occ = &self.positions[self.index.ordinal(seg)];
        let i = occ.partition_point(|&p| p < self.cursor);
        occ.get(i).copied()
    }
}

/// A segment too large to ever fit the cache; it is delivered to the player
/// but not retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OversizeSegment {
    pub segment: SegmentId,
    pub size: u64,
    pub capacity: u64,
}

impl fmt::Display for OversizeSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "segment {} ({} bytes) exceeds cache capacity ({} bytes)",
            self.segment, self.size, self.capacity
        )
    }
}

/// One client's byte-budgeted segment cache.
#[derive(Debug, Clone)]
pub struct ClientCache {
    client: ClientId,
    capacity: u64,
    used: u64,
    residents: BTreeMap<SegmentId, u64>,
}

impl ClientCache {
    pub fn new(client: ClientId, capacity: u64) -> Self {
        Self {
            client,
            capacity,
            used: 0,
            residents: BTreeMap::new(),
        }
    }

    pub fn contains(&self, seg: SegmentId) -> bool {
        self.residents.contains_key(&seg)
    }

    pub fn used_bytes(&self) -> u64 {
        self.used
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.residents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residents.is_empty()
    }

    /// Current residents in ascending (file, index) order.
    pub fn resident_ids(&self) -> Vec<SegmentId> {
        self.residents.keys().copied().collect()
    }

    /// Insert a newly delivered segment, evicting until it fits. Returns the
    /// victims in eviction order. A segment larger than the whole cache is
    /// rejected instead.
    ///
    /// `future` is required by the clairvoyant policy and ignored otherwise.
    pub fn insert(
        &mut self,
        seg: SegmentId,
        size: u64,
        stats: &mut GlobalStats,
        policy: Policy,
        future: Option<&ClientFuture>,
    ) -> Result<Vec<SegmentId>, OversizeSegment> {
        assert!(!self.contains(seg), "duplicate insert of {seg}");
        if size > self.capacity {
            return Err(OversizeSegment {
                segment: seg,
                size,
                capacity: self.capacity,
            });
        }
        let mut evicted = Vec::new();
        while self.used + size > self.capacity {
            let victim = self.select_victim(stats, policy, future);
            let vsize = self.residents.remove(&victim).expect("victim is resident");
            self.used -= vsize;
            stats.note_evict(victim);
            evicted.push(victim);
        }
        self.residents.insert(seg, size);
        self.used += size;
        stats.note_insert(seg);
        Ok(evicted)
    }

    /// Pick the next victim among current residents. Ties fall back to the
    /// smallest (file, index) because residents are scanned in ascending
    /// order and replaced only on strict improvement.
    fn select_victim(
        &self,
        stats: &GlobalStats,
        policy: Policy,
        future: Option<&ClientFuture>,
    ) -> SegmentId {
        let records = || self.residents.keys().map(|&s| stats.record(self.client, s));
        match policy {
            Policy::Lru => argmin_by_key(records(), |r| r.last_global),
            Policy::Lfu => argmin_by_key(records(), |r| r.global_count),
            Policy::Belady => {
                let future = future.expect("clairvoyant policy needs the client's future");
                // Farthest next use evicted first; never-again sorts past
                // every real position.
                argmin_by_key(records(), |r| {
                    Reverse(future.next_use(r.segment).map_or(u64::MAX, u64::from))
                })
            }
            Policy::LfuIndex => {
                argmin_by_key(records(), |r| (r.global_count, Reverse(r.holders), r.last_local))
            }
        }
        .expect("eviction requires at least one resident")
    }
}

/// First segment minimizing `key` over `records`; earlier (canonical) wins a
/// tie because replacement requires a strictly smaller key.
fn argmin_by_key<K: Ord>(
    records: impl Iterator<Item = SegmentRecord>,
    mut key: impl FnMut(&SegmentRecord) -> K,
) -> Option<SegmentId> {
    let mut best: Option<(K, SegmentId)> = None;
    for r in records {
        let k = key(&r);
        match &best {
            Some((bk, _)) if k >= *bk => {}
            _ => best = Some((k, r.segment)),
        }
    }
    best.map(|(_, seg)| seg)
}
