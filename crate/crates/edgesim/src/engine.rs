//! The discrete-event loop: clients replaying their request profiles, one
//! shared multicast channel, per-client caches, and the coding queue.
//!
//! Time is integer milliseconds. Three event kinds drive the loop, and at
//! equal timestamps they process in a fixed order — transmission completions
//! first (freeing the channel and maximizing coding chances for requests at
//! the same instant), then segment requests, then wait expirations; residual
//! ties go by client id. The loop is fully deterministic: the profile fixes
//! all randomness ahead of time and the engine draws nothing.
//!
//! A client streams each profiled file segment by segment, one request in
//! flight at a time. Cache hits are instantaneous (a run of hits consumes
//! segments in zero simulated time); misses enter the station queue, coded
//! or plain FIFO. The station serves the queue head whenever the channel is
//! free: the payload is the XOR of the group's segments, so its length is
//! the longest member segment (shorter ones are zero-padded), and its
//! airtime is rounded up to the next millisecond. After a file's last
//! segment, the client idles for the profile's recorded wait, then starts
//! the next file. The run ends when every client has exhausted its profile
//! and the channel has drained — nothing is cut off mid-flight.

use crate::cache::{ClientCache, ClientFuture, GlobalStats, Policy, SegmentRecord};
use crate::coding::{PendingRequest, Placement, RequestQueue};
use crate::error::SimError;
use crate::workload::{div_ceil, Catalog, RequestProfile};
use crate::{ClientId, SegmentId, TimeMs};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Per-run knobs. The cache budget is `cache_fraction` of the catalog's
/// total bytes, rounded down.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_clients: u32,
    pub link_rate_bps: u64,
    pub cache_fraction: f64,
    pub policy: Policy,
    pub coding_enabled: bool,
    pub backhaul_delay_ms: TimeMs,
    /// Record per-placement coding decisions into the output.
    pub collect_coding_events: bool,
    /// Record per-operation cache decisions into the output.
    pub collect_cache_events: bool,
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.n_clients == 0 {
            return Err(SimError::config("n_clients must be at least 1"));
        }
        if self.link_rate_bps == 0 {
            return Err(SimError::config("link_rate_bps must be positive"));
        }
        if !(0.0..=1.0).contains(&self.cache_fraction) {
            return Err(SimError::config("cache_fraction must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Where a delivery came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliverySource {
    CacheHit,
    Network,
}

impl DeliverySource {
    pub fn as_str(self) -> &'static str {
        match self {
            DeliverySource::CacheHit => "cache",
            DeliverySource::Network => "network",
        }
    }
}

/// One satisfied segment request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeliveryRecord {
    pub request_time: TimeMs,
    pub delivery_time: TimeMs,
    pub client: ClientId,
    pub segment: SegmentId,
    pub segment_bytes: u64,
    pub source: DeliverySource,
    /// Bytes of the transmission that carried it; 0 for cache hits.
    pub payload_bytes: u64,
    /// Members of that transmission; 0 for cache hits.
    pub group_size: u32,
}

/// One multicast transmission (possibly serving several clients at once).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionRecord {
    pub start: TimeMs,
    pub end: TimeMs,
    pub payload_bytes: u64,
    pub members: Vec<(ClientId, SegmentId)>,
}

/// How an incoming miss was placed into the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingAction {
    Merge,
    Append,
}

impl CodingAction {
    pub fn as_str(self) -> &'static str {
        match self {
            CodingAction::Merge => "merge",
            CodingAction::Append => "append",
        }
    }
}

/// One queue-placement decision (collected when asked).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingEvent {
    pub time: TimeMs,
    pub action: CodingAction,
    /// Members of the resulting queue entry.
    pub members: Vec<(ClientId, SegmentId)>,
    pub dof: usize,
    pub doe: usize,
}

/// Cache operation kinds for the optional cache trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOp {
    Hit,
    Miss,
    Insert,
    Evict,
}

impl CacheOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheOp::Hit => "hit",
            CacheOp::Miss => "miss",
            CacheOp::Insert => "insert",
            CacheOp::Evict => "evict",
        }
    }
}

/// One cache operation with the segment's statistics after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheEvent {
    pub time: TimeMs,
    pub client: ClientId,
    pub op: CacheOp,
    pub record: SegmentRecord,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Chronological; coded groups appear as consecutive records sharing a
    /// delivery time, ordered by client.
    pub deliveries: Vec<DeliveryRecord>,
    pub transmissions: Vec<TransmissionRecord>,
    /// Total payload bytes sent on the channel (each coded payload once).
    pub tx_bytes: u64,
    pub hits: u64,
    pub misses: u64,
    /// Time of the last event processed.
    pub end_time: TimeMs,
    /// Empty unless `collect_coding_events`.
    pub coding_events: Vec<CodingEvent>,
    /// Empty unless `collect_cache_events`.
    pub cache_events: Vec<CacheEvent>,
}

/// Event kinds in tie-break order at equal timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    TxComplete,
    SegmentRequest,
    WaitExpired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: TimeMs,
    kind: EventKind,
    client: ClientId,
    seq: u64,
}

struct Client {
    cache: ClientCache,
    /// Remaining request sequence; present only for the clairvoyant policy.
    future: Option<ClientFuture>,
    /// Index of the next profile entry to start (its wait may be pending).
    next_entry: usize,
    /// File being streamed and the next segment index to request.
    current: Option<(u32, u32)>,
}

struct InFlight {
    request: PendingRequest,
    payload_bytes: u64,
    start: TimeMs,
    end: TimeMs,
}

struct Engine<'a> {
    catalog: &'a Catalog,
    profile: &'a RequestProfile,
    cfg: &'a SimConfig,
    clients: Vec<Client>,
    stats: GlobalStats,
    queue: RequestQueue,
    tx: Option<InFlight>,
    events: BinaryHeap<Reverse<Event>>,
    seq: u64,
    now: TimeMs,
    out: RunOutput,
}

/// Simulate `profile` against `catalog` under `cfg`, to completion.
pub fn run(
    catalog: &Catalog,
    profile: &RequestProfile,
    cfg: &SimConfig,
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    profile.verify_catalog(catalog)?;
    if profile.n_clients() != cfg.n_clients {
        return Err(SimError::config(format!(
            "config expects {} clients but the profile has {}",
            cfg.n_clients,
            profile.n_clients()
        )));
    }
    let capacity = (cfg.cache_fraction * catalog.total_bytes() as f64).floor() as u64;
    let clients = (0..cfg.n_clients)
        .map(|c| Client {
            cache: ClientCache::new(c, capacity),
            future: (cfg.policy == Policy::Belady)
                .then(|| ClientFuture::new(catalog, &profile.future_segments(catalog, c))),
            next_entry: 0,
            current: None,
        })
        .collect();
    let mut engine = Engine {
        catalog,
        profile,
        cfg,
        clients,
        stats: GlobalStats::new(catalog, cfg.n_clients),
        queue: RequestQueue::new(),
        tx: None,
        events: BinaryHeap::new(),
        seq: 0,
        now: 0,
        out: RunOutput {
            deliveries: Vec::new(),
            transmissions: Vec::new(),
            tx_bytes: 0,
            hits: 0,
            misses: 0,
            end_time: 0,
            coding_events: Vec::new(),
            cache_events: Vec::new(),
        },
    };
    engine.run_to_completion();
    Ok(engine.out)
}

impl<'a> Engine<'a> {
    fn run_to_completion(&mut self) {
        for client in 0..self.cfg.n_clients {
            let wait = self.profile.entries[client as usize][0].wait_ms;
            self.schedule(wait, EventKind::WaitExpired, client);
        }
        while let Some(Reverse(ev)) = self.events.pop() {
            if ev.time > self.now {
                // The previous instant is fully settled: the channel must
                // not sit idle over a non-empty queue.
                assert!(
                    self.tx.is_some() || self.queue.is_empty(),
                    "channel idle at t={} with {} queued requests",
                    self.now,
                    self.queue.len()
                );
                self.now = ev.time;
            }
            match ev.kind {
                EventKind::TxComplete => self.on_tx_complete(),
                EventKind::SegmentRequest => self.on_segment_request(ev.client),
                EventKind::WaitExpired => self.on_wait_expired(ev.client),
            }
        }
        self.out.end_time = self.now;
        self.audit_final_state();
    }

    fn schedule(&mut self, time: TimeMs, kind: EventKind, client: ClientId) {
        debug_assert!(time >= self.now);
        self.seq += 1;
        self.events.push(Reverse(Event {
            time,
            kind,
            client,
            seq: self.seq,
        }));
    }

    fn on_wait_expired(&mut self, client: ClientId) {
        let c = &mut self.clients[client as usize];
        assert!(c.current.is_none(), "wait expired while streaming");
        let entry = self.profile.entries[client as usize][c.next_entry];
        c.next_entry += 1;
        c.current = Some((entry.file, 1));
        self.schedule(self.now, EventKind::SegmentRequest, client);
    }

    fn on_segment_request(&mut self, client: ClientId) {
        let c = &mut self.clients[client as usize];
        let (file, index) = c.current.expect("request without a current file");
        let seg = SegmentId::new(file, index);
        self.stats.record_request(client, seg, self.now);
        if let Some(future) = &mut c.future {
            future.advance();
        }
        if c.cache.contains(seg) {
            self.out.hits += 1;
            let record = DeliveryRecord {
                request_time: self.now,
                delivery_time: self.now,
                client,
                segment: seg,
                segment_bytes: self.catalog.segment_bytes(seg),
                source: DeliverySource::CacheHit,
                payload_bytes: 0,
                group_size: 0,
            };
            self.out.deliveries.push(record);
            self.push_cache_event(client, CacheOp::Hit, seg);
            self.advance_after_delivery(client, seg);
        } else {
            self.out.misses += 1;
            self.push_cache_event(client, CacheOp::Miss, seg);
            let has = self.clients[client as usize].cache.resident_ids();
            let incoming = PendingRequest::singleton(client, seg, has, self.now);
            let placement = if self.cfg.coding_enabled {
                self.queue.try_code_or_enqueue(incoming)
            } else {
                Placement::Appended {
                    position: self.queue.push_back(incoming),
                }
            };
            self.push_coding_event(placement);
            self.kick();
        }
    }

    fn on_tx_complete(&mut self) {
        let tx = self.tx.take().expect("completion without a transmission");
        assert_eq!(tx.end, self.now);
        self.out.tx_bytes += tx.payload_bytes;
        self.out.transmissions.push(TransmissionRecord {
            start: tx.start,
            end: tx.end,
            payload_bytes: tx.payload_bytes,
            members: tx
                .request
                .members
                .iter()
                .map(|m| (m.client, m.want))
                .collect(),
        });
        let group_size = tx.request.members.len() as u32;
        for member in &tx.request.members {
            // Decodability against the *live* cache: every other wanted
            // segment of the group must still be present. Clients never
            // evict while their only request is in flight, so the enqueue
            // snapshot cannot have rotted.
            for &w in &tx.request.wants {
                assert!(
                    w == member.want
                        || self.clients[member.client as usize].cache.contains(w),
                    "client {} lost side information {} before decoding {}",
                    member.client,
                    w,
                    member.want
                );
            }
            self.out.deliveries.push(DeliveryRecord {
                request_time: member.requested_at,
                delivery_time: self.now,
                client: member.client,
                segment: member.want,
                segment_bytes: self.catalog.segment_bytes(member.want),
                source: DeliverySource::Network,
                payload_bytes: tx.payload_bytes,
                group_size,
            });
            let c = &mut self.clients[member.client as usize];
            let size = self.catalog.segment_bytes(member.want);
            match c.cache.insert(
                member.want,
                size,
                &mut self.stats,
                self.cfg.policy,
                c.future.as_ref(),
            ) {
                Ok(evicted) => {
                    for victim in evicted {
                        self.push_cache_event(member.client, CacheOp::Evict, victim);
                    }
                    self.push_cache_event(member.client, CacheOp::Insert, member.want);
                }
                Err(_oversize) => {
                    // Larger than the whole cache: delivered to the player
                    // but not retained.
                }
            }
        }
        for i in 0..tx.request.members.len() {
            let (client, want) = (tx.request.members[i].client, tx.request.members[i].want);
            self.advance_after_delivery(client, want);
        }
        self.kick();
    }

    /// Move the client past a just-delivered segment: next segment of the
    /// file immediately, or the next profile entry's wait, or done.
    fn advance_after_delivery(&mut self, client: ClientId, seg: SegmentId) {
        let c = &mut self.clients[client as usize];
        let (file, index) = c.current.expect("delivery to an idle client");
        assert_eq!(SegmentId::new(file, index), seg, "out-of-order delivery");
        if index < self.catalog.n_segments(file) {
            c.current = Some((file, index + 1));
            self.schedule(self.now, EventKind::SegmentRequest, client);
        } else {
            c.current = None;
            if c.next_entry < self.profile.entries[client as usize].len() {
                let wait = self.profile.entries[client as usize][c.next_entry].wait_ms;
                self.schedule(self.now + wait, EventKind::WaitExpired, client);
            }
        }
    }

    /// Start serving the queue head if the channel is free.
    fn kick(&mut self) {
        if self.tx.is_some() {
            return;
        }
        let Some(request) = self.queue.pop_front() else {
            return;
        };
        let payload_bytes = request
            .wants
            .iter()
            .map(|&w| self.catalog.segment_bytes(w))
            .max()
            .expect("a request always wants something");
        let duration = div_ceil(payload_bytes * 8 * 1000, self.cfg.link_rate_bps);
        let end = self.now + self.cfg.backhaul_delay_ms + duration;
        self.schedule(end, EventKind::TxComplete, 0);
        self.tx = Some(InFlight {
            request,
            payload_bytes,
            start: self.now,
            end,
        });
    }

    fn push_cache_event(&mut self, client: ClientId, op: CacheOp, seg: SegmentId) {
        if self.cfg.collect_cache_events {
            self.out.cache_events.push(CacheEvent {
                time: self.now,
                client,
                op,
                record: self.stats.record(client, seg),
            });
        }
    }

    fn push_coding_event(&mut self, placement: Placement) {
        if !self.cfg.collect_coding_events {
            return;
        }
        let (action, position) = match placement {
            Placement::Merged { position, .. } => (CodingAction::Merge, position),
            Placement::Appended { position } => (CodingAction::Append, position),
        };
        let entry = self
            .queue
            .iter()
            .nth(position)
            .expect("placement position is live");
        self.out.coding_events.push(CodingEvent {
            time: self.now,
            action,
            members: entry.members.iter().map(|m| (m.client, m.want)).collect(),
            dof: entry.dof(),
            doe: entry.doe(),
        });
    }

    /// End-of-run accounting checks; any failure is an engine bug.
    fn audit_final_state(&self) {
        assert!(self.queue.is_empty(), "run ended with queued requests");
        assert!(self.tx.is_none(), "run ended mid-transmission");
        for (i, c) in self.clients.iter().enumerate() {
            assert!(c.current.is_none(), "client {i} ended mid-file");
            assert_eq!(
                c.next_entry,
                self.profile.entries[i].len(),
                "client {i} ended with profile entries left"
            );
        }
        assert_eq!(
            self.out.hits + self.out.misses,
            self.out.deliveries.len() as u64,
            "every request resolves to exactly one delivery"
        );
        let requested: u64 = self
            .profile
            .entries
            .iter()
            .flatten()
            .map(|e| self.catalog.n_segments(e.file) as u64)
            .sum();
        assert_eq!(self.out.deliveries.len() as u64, requested);
        let tx_sum: u64 = self.out.transmissions.iter().map(|t| t.payload_bytes).sum();
        assert_eq!(tx_sum, self.out.tx_bytes);
        let network_members: u64 = self
            .out
            .transmissions
            .iter()
            .map(|t| t.members.len() as u64)
            .sum();
        assert_eq!(network_members, self.out.misses);
        // Holder counts must agree with the actual cache contents.
        for f in self.catalog.files() {
            for index in 1..=f.segment_sizes.len() as u32 {
                let seg = SegmentId::new(f.id, index);
                let truth = self
                    .clients
                    .iter()
                    .filter(|c| c.cache.contains(seg))
                    .count() as u32;
                assert_eq!(self.stats.holders(seg), truth, "holder drift for {seg}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::workload::{FileSpec, ProfileEntry};

    fn sim(policy: Policy, coding: bool, fraction: f64, n_clients: u32) -> SimConfig {
        SimConfig {
            n_clients,
            link_rate_bps: 24_000_000,
            cache_fraction: fraction,
            policy,
            coding_enabled: coding,
            backhaul_delay_ms: 0,
            collect_coding_events: true,
            collect_cache_events: true,
        }
    }

    /// One-segment files of the given sizes, 4 s long each.
    fn catalog_of(sizes: &[u64]) -> Catalog {
        let files = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| FileSpec {
                id: i as u32 + 1,
                duration_s: 4,
                segment_sizes: vec![s],
            })
            .collect();
        Catalog::from_files(files, 4000, 0).unwrap()
    }

    fn profile_of(catalog: &Catalog, entries: Vec<Vec<(u32, u64)>>) -> RequestProfile {
        RequestProfile {
            seed: 0,
            alpha: 0.0,
            gamma: 2.5,
            q: 10.0,
            mean_wait_ms: 5000,
            horizon_ms: 1,
            catalog_sha256: catalog.sha256(),
            entries: entries
                .into_iter()
                .map(|seq| {
                    seq.into_iter()
                        .map(|(file, wait_ms)| ProfileEntry { file, wait_ms })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn three_megabytes_take_exactly_one_second() {
        let cat = catalog_of(&[3_000_000]);
        let prof = profile_of(&cat, vec![vec![(1, 0)]]);
        let out = run(&cat, &prof, &sim(Policy::Lru, false, 0.0, 1)).unwrap();
        assert_eq!(out.deliveries.len(), 1);
        let d = out.deliveries[0];
        assert_eq!((d.request_time, d.delivery_time), (0, 1000));
        assert_eq!(d.payload_bytes, 3_000_000);
        assert_eq!(out.tx_bytes, 3_000_000);
        assert_eq!(out.end_time, 1000);
    }

    #[test]
    fn airtime_rounds_up_to_whole_milliseconds() {
        let cat = catalog_of(&[2_500_000]);
        let prof = profile_of(&cat, vec![vec![(1, 0)]]);
        let out = run(&cat, &prof, &sim(Policy::Lru, false, 0.0, 1)).unwrap();
        // 20 Mb at 24 Mbps = 833.33… ms, charged as 834.
        assert_eq!(out.deliveries[0].delivery_time, 834);
    }

    #[test]
    fn backhaul_delay_shifts_completion() {
        let cat = catalog_of(&[3_000_000]);
        let prof = profile_of(&cat, vec![vec![(1, 0)]]);
        let mut cfg = sim(Policy::Lru, false, 0.0, 1);
        cfg.backhaul_delay_ms = 250;
        let out = run(&cat, &prof, &cfg).unwrap();
        assert_eq!(out.deliveries[0].delivery_time, 1250);
    }

    #[test]
    fn rewatch_hits_are_instant_and_free() {
        // One file, three segments; the second playback is all hits.
        let files = vec![FileSpec {
            id: 1,
            duration_s: 12,
            segment_sizes: vec![1_000_000, 1_000_000, 1_000_000],
        }];
        let cat = Catalog::from_files(files, 4000, 0).unwrap();
        let prof = profile_of(&cat, vec![vec![(1, 0), (1, 5000)]]);
        let out = run(&cat, &prof, &sim(Policy::Lru, false, 1.0, 1)).unwrap();
        assert_eq!(out.hits, 3);
        assert_eq!(out.misses, 3);
        let first_end = out.transmissions.last().unwrap().end;
        let hits: Vec<_> = out
            .deliveries
            .iter()
            .filter(|d| d.source == DeliverySource::CacheHit)
            .collect();
        assert_eq!(hits.len(), 3);
        for h in &hits {
            assert_eq!(h.request_time, h.delivery_time, "hits are instantaneous");
            assert_eq!(h.delivery_time, first_end + 5000, "hit run takes zero time");
            assert_eq!((h.payload_bytes, h.group_size), (0, 0));
        }
        assert_eq!(out.tx_bytes, 3_000_000, "second playback cost nothing");
    }

    /// Three clients arranged so the final two misses are queued while the
    /// channel is busy and share cached side information: they merge into
    /// one XOR transmission whose payload is the larger segment.
    fn coded_pair_scenario(coding: bool) -> RunOutput {
        let cat = catalog_of(&[1_000_000, 2_000_000, 1_000_000, 6_000_000]);
        let prof = profile_of(
            &cat,
            vec![
                vec![(3, 0), (1, 1200), (2, 1000)],
                vec![(3, 100), (2, 1400), (1, 500)],
                vec![(4, 1000), (4, 1001)],
            ],
        );
        // 3.5 MB budget: both small files fit, the 6 MB file never does.
        run(&cat, &prof, &sim(Policy::Lru, coding, 0.35, 3)).unwrap()
    }

    #[test]
    fn codeable_misses_share_one_transmission() {
        let out = coded_pair_scenario(true);
        assert_eq!(out.transmissions.len(), 7);
        assert_eq!(out.tx_bytes, 19_000_000);
        let last = out.transmissions.last().unwrap();
        assert_eq!(last.members.len(), 2);
        assert_eq!(last.payload_bytes, 2_000_000, "padded to the larger want");
        assert_eq!((last.start, last.end), (6001, 6668));
        let coded: Vec<_> = out.deliveries.iter().filter(|d| d.group_size == 2).collect();
        assert_eq!(coded.len(), 2);
        for d in &coded {
            assert_eq!(d.delivery_time, 6668);
            assert_eq!(d.payload_bytes, 2_000_000);
        }
        assert_eq!(coded[0].client, 0);
        assert_eq!(coded[0].segment, SegmentId::new(2, 1));
        assert_eq!(coded[1].client, 1);
        assert_eq!(coded[1].segment, SegmentId::new(1, 1));
        assert!(
            out.coding_events
                .iter()
                .any(|e| e.action == CodingAction::Merge && e.doe == 2),
            "the merge shows up in the coding trace"
        );
    }

    #[test]
    fn disabling_coding_sends_each_want_separately() {
        let on = coded_pair_scenario(true);
        let off = coded_pair_scenario(false);
        assert_eq!(off.transmissions.len(), 8);
        assert_eq!(off.tx_bytes, 20_000_000);
        assert_eq!(off.tx_bytes - on.tx_bytes, 1_000_000, "XOR saved one send");
        assert!(off.deliveries.iter().all(|d| d.group_size <= 1));
    }

    #[test]
    fn oversize_segments_are_never_cached() {
        let out = coded_pair_scenario(true);
        // Client 2 streams the 6 MB file twice; both are network misses.
        let c2: Vec<_> = out.deliveries.iter().filter(|d| d.client == 2).collect();
        assert_eq!(c2.len(), 2);
        assert!(c2.iter().all(|d| d.source == DeliverySource::Network));
        assert!(out
            .cache_events
            .iter()
            .all(|e| !(e.client == 2 && e.op == CacheOp::Insert)));
    }

    fn generated_workload() -> (Catalog, RequestProfile, ExperimentConfig) {
        let mut cfg = ExperimentConfig::default();
        cfg.n_files = 12;
        cfg.n_clients = 4;
        cfg.horizon_s = 900.0;
        cfg.file_duration_s = [120, 240];
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 0.75, 3).unwrap();
        (cat, prof, cfg)
    }

    #[test]
    fn no_cache_means_no_hits_and_no_coding() {
        let (cat, prof, _) = generated_workload();
        let on = run(&cat, &prof, &sim(Policy::Lru, true, 0.0, 4)).unwrap();
        let off = run(&cat, &prof, &sim(Policy::Lru, false, 0.0, 4)).unwrap();
        assert_eq!(on.hits, 0);
        let wanted: u64 = on.deliveries.iter().map(|d| d.segment_bytes).sum();
        assert_eq!(on.tx_bytes, wanted, "every byte served plain from network");
        assert_eq!(on, off, "empty side information defeats coding entirely");
    }

    #[test]
    fn a_lone_client_gains_nothing_from_coding() {
        let mut cfg = ExperimentConfig::default();
        cfg.n_files = 12;
        cfg.n_clients = 1;
        cfg.horizon_s = 900.0;
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 1.0, 5).unwrap();
        let on = run(&cat, &prof, &sim(Policy::Lfu, true, 0.10, 1)).unwrap();
        let off = run(&cat, &prof, &sim(Policy::Lfu, false, 0.10, 1)).unwrap();
        assert_eq!(on, off);
    }

    #[test]
    fn identical_inputs_produce_identical_runs() {
        let (cat, prof, _) = generated_workload();
        for policy in Policy::ALL {
            let a = run(&cat, &prof, &sim(policy, true, 0.10, 4)).unwrap();
            let b = run(&cat, &prof, &sim(policy, true, 0.10, 4)).unwrap();
            assert_eq!(a, b, "{policy} run must be reproducible");
        }
    }

    #[test]
    fn network_deliveries_respect_the_link_rate() {
        let (cat, prof, _) = generated_workload();
        let out = run(&cat, &prof, &sim(Policy::LfuIndex, true, 0.10, 4)).unwrap();
        assert!(out.misses > 0);
        for d in &out.deliveries {
            match d.source {
                DeliverySource::CacheHit => assert_eq!(d.request_time, d.delivery_time),
                DeliverySource::Network => {
                    let elapsed = d.delivery_time - d.request_time;
                    assert!(elapsed > 0);
                    assert!(d.payload_bytes >= d.segment_bytes);
                    // wanted bits / elapsed seconds ≤ link rate, in integers.
                    assert!(d.segment_bytes * 8 * 1000 <= 24_000_000 * elapsed);
                }
            }
        }
    }

    #[test]
    fn profile_from_another_catalog_is_rejected() {
        let (cat, prof, mut cfg) = generated_workload();
        cfg.catalog_seed += 1;
        let other = Catalog::generate(&cfg).unwrap();
        let err = run(&other, &prof, &sim(Policy::Lru, true, 0.10, 4)).unwrap_err();
        assert!(matches!(err, SimError::StaleProfile(_)));
        let err = run(&cat, &prof, &sim(Policy::Lru, true, 0.10, 3)).unwrap_err();
        assert!(matches!(err, SimError::Config(_)), "client count mismatch");
    }
}
