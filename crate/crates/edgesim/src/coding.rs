//! The station's request queue and the XOR index-coding algebra.
//!
//! Every cache miss becomes a [`PendingRequest`] carrying the client's
//! wanted segment and a snapshot of what that client's cache held at request
//! time. Two requests are *codeable* when each side's wants are covered by
//! the other side's cached side information — then a single XOR broadcast of
//! their payloads serves both, because every member can cancel the segments
//! it already holds. Codeable requests are merged: the combined request
//! keeps the intersection of the has-sets (side information still common to
//! all members) and the union of the disjoint want-sets.
//!
//! Two counts steer the greedy placement of an incoming request:
//!
//! - **dof** (degrees of freedom), `|has|`: how much side information the
//!   entry still offers future merges;
//! - **doe** (degrees of effort), `|wants|`: how many segments are already
//!   encoded together, i.e. how much a future partner must hold.
//!
//! The queue scans front-to-back for the codeable entry whose merge keeps
//! the most dof, breaking ties toward the fewest doe and then the earliest
//! position. A merge that would leave *no* shared side information (merged
//! dof 0) is worthless for further coding and is skipped; if no candidate
//! survives, the request is appended at the tail. Merged entries keep the
//! earlier request's queue position.

use crate::{ClientId, SegmentId, TimeMs};
use std::collections::VecDeque;

/// One client's stake in a pending (possibly merged) request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub client: ClientId,
    /// The single segment this client asked for.
    pub want: SegmentId,
    /// When the client issued the request.
    pub requested_at: TimeMs,
    /// The client's cache contents at request time, ascending. Frozen here
    /// so decodability can be audited later even after the merged has-set
    /// shrinks to the members' intersection.
    pub has_snapshot: Vec<SegmentId>,
}

/// A queued segment request: one member per client served, the union of
/// their wants, and the side information common to all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingRequest {
    /// Wanted segments, ascending; exactly one per member.
    pub wants: Vec<SegmentId>,
    /// Side information shared by every member, ascending.
    pub has: Vec<SegmentId>,
    /// Participating clients, ascending by client id.
    pub members: Vec<Member>,
    /// Earliest request time among members; fixes the queue position.
    pub enqueue_time: TimeMs,
}

impl PendingRequest {
    /// A fresh one-client request. `has` must be ascending and must not
    /// contain `want` (a held segment would have been a cache hit).
    pub fn singleton(client: ClientId, want: SegmentId, has: Vec<SegmentId>, now: TimeMs) -> Self {
        debug_assert!(is_sorted_set(&has), "has-snapshot must be a sorted set");
        assert!(
            !sorted_contains(&has, want),
            "client {client} requested {want} it already holds"
        );
        Self {
            wants: vec![want],
            has: has.clone(),
            members: vec![Member {
                client,
                want,
                requested_at: now,
                has_snapshot: has,
            }],
            enqueue_time: now,
        }
    }

    /// Degrees of freedom: how much shared side information is left.
    pub fn dof(&self) -> usize {
        self.has.len()
    }

    /// Degrees of effort: how many segments are encoded together.
    pub fn doe(&self) -> usize {
        self.wants.len()
    }
}

/// True when one XOR transmission can serve both requests: each side's
/// wants must sit inside the other side's shared side information.
pub fn codeable(a: &PendingRequest, b: &PendingRequest) -> bool {
    is_subset(&a.wants, &b.has) && is_subset(&b.wants, &a.has)
}

/// Combine two codeable requests into one queue entry.
///
/// Panics if the pair is not codeable or shares a client — both mean the
/// caller broke the queue discipline.
pub fn merge(a: &PendingRequest, b: &PendingRequest) -> PendingRequest {
    assert!(codeable(a, b), "merge of non-codeable requests");
    let wants = merge_disjoint(&a.wants, &b.wants);
    let has = intersect(&a.has, &b.has);
    let mut members: Vec<Member> = a.members.iter().chain(&b.members).cloned().collect();
    members.sort_by_key(|m| m.client);
    for pair in members.windows(2) {
        assert!(
            pair[0].client != pair[1].client,
            "client {} appears in both merge operands",
            pair[0].client
        );
    }
    let merged = PendingRequest {
        wants,
        has,
        members,
        enqueue_time: a.enqueue_time.min(b.enqueue_time),
    };
    assert_decodable(&merged);
    merged
}

/// Check that every member could XOR-decode its want if the whole group
/// were transmitted now: all *other* wanted segments must be in that
/// member's has-snapshot.
pub fn assert_decodable(r: &PendingRequest) {
    for m in &r.members {
        for &w in &r.wants {
            assert!(
                w == m.want || sorted_contains(&m.has_snapshot, w),
                "client {} could not decode {}: {} is missing from its side information",
                m.client,
                m.want,
                w
            );
        }
    }
}

/// Where `try_code_or_enqueue` put the incoming request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Merged into the entry at `position`; counts are of the merged entry.
    Merged {
        position: usize,
        dof: usize,
        doe: usize,
    },
    /// Appended at the tail (now at `position`).
    Appended { position: usize },
}

/// The station's FIFO of pending requests.
#[derive(Debug, Default)]
pub struct RequestQueue {
    entries: VecDeque<PendingRequest>,
}

impl RequestQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PendingRequest> {
        self.entries.iter()
    }

    /// Plain FIFO append (the coding-disabled path).
    pub fn push_back(&mut self, incoming: PendingRequest) -> usize {
        self.assert_new_clients(&incoming);
        self.entries.push_back(incoming);
        self.entries.len() - 1
    }

    /// Greedy coded placement: merge `incoming` into the codeable entry
    /// keeping the most shared side information (ties: fewest encoded
    /// segments, then earliest position), or append when no candidate keeps
    /// any. Merging replaces the candidate in place, preserving its queue
    /// position.
    pub fn try_code_or_enqueue(&mut self, incoming: PendingRequest) -> Placement {
        self.assert_new_clients(&incoming);
        let mut best: Option<(usize, usize, usize)> = None; // (dof, doe, position) keyed below
        for (pos, entry) in self.entries.iter().enumerate() {
            if !codeable(entry, &incoming) {
                continue;
            }
            let dof = intersect_count(&entry.has, &incoming.has);
            if dof == 0 {
                // The merged entry would carry no side information, so it
                // could never code again; appending keeps both useful.
                continue;
            }
            let doe = entry.doe() + incoming.doe();
            let better = match best {
                None => true,
                Some((bdof, bdoe, _)) => dof > bdof || (dof == bdof && doe < bdoe),
            };
            if better {
                best = Some((dof, doe, pos));
            }
        }
        match best {
            Some((dof, doe, position)) => {
                let merged = merge(&self.entries[position], &incoming);
                debug_assert_eq!((merged.dof(), merged.doe()), (dof, doe));
                self.entries[position] = merged;
                Placement::Merged { position, dof, doe }
            }
            None => {
                self.entries.push_back(incoming);
                Placement::Appended {
                    position: self.entries.len() - 1,
                }
            }
        }
    }

    /// Remove and return the head entry for transmission, re-auditing that
    /// every member can decode it.
    pub fn pop_front(&mut self) -> Option<PendingRequest> {
        let head = self.entries.pop_front()?;
        assert_decodable(&head);
        Some(head)
    }

    fn assert_new_clients(&self, incoming: &PendingRequest) {
        for entry in &self.entries {
            for m in &entry.members {
                assert!(
                    incoming.members.iter().all(|im| im.client != m.client),
                    "client {} already has a queued request",
                    m.client
                );
            }
        }
    }
}

// --- sorted-set helpers (ascending Vec<SegmentId> as a set) ---

fn is_sorted_set(v: &[SegmentId]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub(crate) fn sorted_contains(set: &[SegmentId], x: SegmentId) -> bool {
    set.binary_search(&x).is_ok()
}

/// `sub ⊆ sup` for ascending sets, by a single forward scan.
pub(crate) fn is_subset(sub: &[SegmentId], sup: &[SegmentId]) -> bool {
    let mut i = 0;
    for &x in sub {
        while i < sup.len() && sup[i] < x {
            i += 1;
        }
        if i == sup.len() || sup[i] != x {
            return false;
        }
        i += 1;
    }
    true
}

fn intersect(a: &[SegmentId], b: &[SegmentId]) -> Vec<SegmentId> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersect_count(a: &[SegmentId], b: &[SegmentId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Union of two ascending sets that must not overlap (two requests for the
/// same segment are never codeable, so merged want-sets stay disjoint).
fn merge_disjoint(a: &[SegmentId], b: &[SegmentId]) -> Vec<SegmentId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => panic!("want-sets overlap on {}", a[i]),
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
