//! Event loop for the autonomous-station protocol.
//!
//! Stations `0..=S` sit `ℓ` apart. Every pair at nesting level `j` spans
//! `[a, a + 2^j]` with `2^j | a`, so pairs with the same endpoints form one
//! *class*, stored at `classes[j][a >> j]`. Pairs only ever move upward
//! through classes:
//!
//! ```text
//! level 2   0 ─────────────────────── 4
//! level 1   0 ─────────── 2 ───────── 4        swap at 2
//! level 0   0 ──── 1 ──── 2 ──── 3 ── 4        swaps at 1 and 3
//! ```
//!
//! Each interior station splits its qubits between a left and a right bank.
//! A station at which level-`t` swaps happen needs `t + 2` qubits per bank
//! to make progress, which is what the `2 + 2·log₂ S` budget provides.
//! Classes above level 0 admit a new pair only when empty or holding a
//! single unfinished pair; level 0 admits `2 + slack` pairs, counting link
//! attempts in flight, where slack is whatever the banks hold beyond the
//! minimum.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ChainConfig, LinkModel};
use super::lineage::{DeliveredPair, Lineage};
use super::queue::EventQueue;
use super::result::SimResult;
use crate::bell_algebra::{self, BellDiagonalState};
use crate::{Error, Result};

const LEFT: usize = 0;
const RIGHT: usize = 1;

/// One entangled pair held in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: u64,
    pub left_station: usize,
    pub right_station: usize,
    pub state: BellDiagonalState,
    pub nesting_level: u32,
    pub rounds_done: u32,
    pub created_at: f64,
}

#[derive(Debug, Clone)]
struct Slot {
    record: PairRecord,
    /// In a purification round or awaiting swap notification.
    busy: bool,
    lineage: Option<Box<Lineage>>,
}

#[derive(Debug, Clone)]
enum Event {
    LinkAttemptDone {
        link: usize,
    },
    PurificationDone {
        level: u32,
        index: usize,
        kept: u64,
        sacrificed: u64,
        outcome: Option<BellDiagonalState>,
    },
    SwapNotified {
        level: u32,
        index: usize,
        pair: u64,
        station: usize,
    },
}

/// A single seeded run of the chain.
#[derive(Debug)]
pub struct Simulation {
    config: ChainConfig,
    link: LinkModel,
    levels: u32,
    segments: usize,
    capacity: Vec<[usize; 2]>,
    used: Vec<[usize; 2]>,
    pending_release: Vec<[usize; 2]>,
    attempts: Vec<usize>,
    classes: Vec<Vec<Vec<Slot>>>,
    queue: EventQueue<Event>,
    dirty: BTreeSet<usize>,
    rng: ChaCha8Rng,
    now: f64,
    next_id: u64,
    events: u64,
    started: bool,
    arrivals: Vec<f64>,
    fidelities: Vec<f64>,
    track_lineage: bool,
    delivered: Vec<DeliveredPair>,
}

impl Simulation {
    pub fn new(config: ChainConfig) -> Result<Self> {
        let config = config.validated()?;
        let link = LinkModel::resolve(&config)?;
        let levels = config.levels();
        let segments = config.segments();
        let n = config.qubits_per_station;
        let capacity = (0..=segments)
            .map(|s| {
                if s == 0 {
                    [0, n]
                } else if s == segments {
                    [n, 0]
                } else {
                    [n / 2, n / 2]
                }
            })
            .collect();
        let classes = (0..=levels).map(|j| vec![Vec::new(); segments >> j]).collect();
        Ok(Simulation {
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            config,
            link,
            levels,
            segments,
            capacity,
            used: vec![[0; 2]; segments + 1],
            pending_release: vec![[0; 2]; segments + 1],
            attempts: vec![0; segments],
            classes,
            queue: EventQueue::new(),
            dirty: BTreeSet::new(),
            now: 0.0,
            next_id: 0,
            events: 0,
            started: false,
            arrivals: Vec::new(),
            fidelities: Vec::new(),
            track_lineage: false,
            delivered: Vec::new(),
        })
    }

    /// Record the history of every pair so delivered states can be replayed.
    pub fn with_lineage(mut self) -> Self {
        self.track_lineage = true;
        self
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn link(&self) -> &LinkModel {
        &self.link
    }

    pub fn now_ms(&self) -> f64 {
        self.now
    }

    pub fn delivered_count(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_finished(&self) -> bool {
        self.arrivals.len() >= self.config.target_pairs
    }

    /// Delivered pairs with their histories; empty unless built
    /// [`with_lineage`](Self::with_lineage).
    pub fn delivered_pairs(&self) -> &[DeliveredPair] {
        &self.delivered
    }

    /// Every pair currently held in memory.
    pub fn pairs(&self) -> impl Iterator<Item = &PairRecord> {
        self.classes.iter().flatten().flatten().map(|slot| &slot.record)
    }

    /// Process one event. Returns `Ok(false)` once the target is reached.
    pub fn step(&mut self) -> Result<bool> {
        if !self.started {
            self.started = true;
            self.dirty.extend(0..=self.segments);
            self.service();
        }
        if self.is_finished() {
            return Ok(false);
        }
        let Some(next) = self.queue.pop() else {
            return Err(self.deadlock());
        };
        self.now = next.time_ms;
        self.events += 1;
        self.handle(next.event)?;
        self.service();
        Ok(!self.is_finished())
    }

    pub fn run(mut self) -> Result<SimResult> {
        while self.step()? {}
        Ok(self.into_result())
    }

    pub fn into_result(self) -> SimResult {
        SimResult::new(
            self.config.rng_seed,
            self.arrivals,
            self.fidelities,
            self.events,
            self.link,
            self.config,
        )
    }

    /// Check that every bank's qubit count matches the pairs, link attempts
    /// and pending releases that claim it.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let mut held = vec![[0usize; 2]; self.segments + 1];
        let mut seen = BTreeSet::new();
        for (j, row) in self.classes.iter().enumerate() {
            for (idx, class) in row.iter().enumerate() {
                for slot in class {
                    let r = &slot.record;
                    if !seen.insert(r.id) {
                        return Err(format!("pair {} stored twice", r.id));
                    }
                    let left = idx << j;
                    if r.left_station != left || r.right_station != left + (1 << j) || r.nesting_level as usize != j {
                        return Err(format!("pair {} misfiled: {r:?} in class ({j}, {idx})", r.id));
                    }
                    held[r.left_station][RIGHT] += 1;
                    held[r.right_station][LEFT] += 1;
                }
            }
        }
        for (link, &a) in self.attempts.iter().enumerate() {
            held[link][RIGHT] += a;
            held[link + 1][LEFT] += a;
        }
        for s in 0..=self.segments {
            for side in [LEFT, RIGHT] {
                let claimed = held[s][side] + self.pending_release[s][side];
                if claimed != self.used[s][side] {
                    return Err(format!(
                        "station {s} side {side}: {} qubits in use but {claimed} claimed",
                        self.used[s][side]
                    ));
                }
                if claimed > self.capacity[s][side] {
                    return Err(format!(
                        "station {s} side {side}: {claimed} qubits claimed, capacity {}",
                        self.capacity[s][side]
                    ));
                }
            }
        }
        Ok(())
    }

    fn handle(&mut self, event: Event) -> Result<()> {
        match event {
            Event::LinkAttemptDone { link } => {
                self.attempts[link] -= 1;
                if self.rng.random::<f64>() < self.link.success_probability {
                    let state = self.link.state;
                    let record = PairRecord {
                        id: self.fresh_id(),
                        left_station: link,
                        right_station: link + 1,
                        state,
                        nesting_level: 0,
                        rounds_done: 0,
                        created_at: self.now,
                    };
                    let lineage = self.track_lineage.then(|| Box::new(Lineage::Link(state)));
                    self.classes[0][link].push(Slot { record, busy: false, lineage });
                } else {
                    self.release(link, RIGHT);
                    self.release(link + 1, LEFT);
                }
                self.touch_class(0, link);
            }
            Event::PurificationDone { level, index, kept, sacrificed, outcome } => {
                let class = &mut self.classes[level as usize][index];
                let pos = class.iter().position(|s| s.record.id == sacrificed).expect("sacrificial pair");
                let sac = class.remove(pos);
                let slot = class.iter_mut().find(|s| s.record.id == kept).expect("kept pair");
                slot.busy = false;
                if let Some(state) = outcome {
                    slot.record.state = state;
                    slot.record.rounds_done += 1;
                    if let (Some(k), Some(s)) = (slot.lineage.take(), sac.lineage) {
                        slot.lineage = Some(Box::new(Lineage::Purified { kept: k, sacrificed: s }));
                    }
                }
                self.release(sac.record.left_station, RIGHT);
                self.release(sac.record.right_station, LEFT);
                self.touch_class(level, index);
            }
            Event::SwapNotified { level, index, pair, station } => {
                for side in [LEFT, RIGHT] {
                    self.pending_release[station][side] -= 1;
                    self.release(station, side);
                }
                let slot = self.classes[level as usize][index]
                    .iter_mut()
                    .find(|s| s.record.id == pair)
                    .expect("swapped pair");
                slot.busy = false;
                self.touch_class(level, index);
            }
        }
        Ok(())
    }

    fn service(&mut self) {
        while let Some(s) = self.dirty.pop_first() {
            if self.is_finished() {
                self.dirty.clear();
                return;
            }
            self.service_station(s);
        }
    }

    fn service_station(&mut self, s: usize) {
        if s == 0 || s == self.segments {
            while self.try_deliver() {}
        }
        for j in 0..=self.top_level_at(s) {
            let span = 1usize << j;
            if !s.is_multiple_of(span) {
                break;
            }
            if s + span <= self.segments {
                while self.try_purify(j, s >> j) {}
            }
            if s >= span {
                while self.try_purify(j, (s - span) >> j) {}
            }
        }
        if s != 0 && s != self.segments {
            while self.try_swap(s) {}
        }
        if s > 0 {
            while self.try_link(s - 1) {}
        }
        if s < self.segments {
            while self.try_link(s) {}
        }
    }

    /// Highest level whose pairs end at station `s`.
    fn top_level_at(&self, s: usize) -> u32 {
        if s == 0 {
            self.levels
        } else {
            s.trailing_zeros().min(self.levels)
        }
    }

    fn slack(&self, s: usize, side: usize) -> i64 {
        self.capacity[s][side] as i64 - (self.top_level_at(s) as i64 + 2)
    }

    fn link_cap(&self, link: usize) -> usize {
        let slack = self.slack(link, RIGHT).min(self.slack(link + 1, LEFT));
        (2 + slack).max(1) as usize
    }

    fn free(&self, s: usize, side: usize) -> usize {
        self.capacity[s][side] - self.used[s][side]
    }

    fn release(&mut self, s: usize, side: usize) {
        self.used[s][side] -= 1;
        self.dirty.insert(s);
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn touch_class(&mut self, level: u32, index: usize) {
        let left = index << level;
        let span = 1usize << level;
        self.dirty.insert(left);
        self.dirty.insert(left + span);
        if level > 0 {
            self.dirty.insert(left + span / 2);
        }
    }

    fn rounds_needed(&self, level: u32) -> u32 {
        self.config.purification_schedule[level as usize]
    }

    fn span_ms(&self, level: u32) -> f64 {
        self.config.segment_length_km * (1u64 << level) as f64 / self.config.light_speed_km_per_ms
    }

    fn try_link(&mut self, link: usize) -> bool {
        let occupied = self.attempts[link] + self.classes[0][link].len();
        if occupied >= self.link_cap(link) || self.free(link, RIGHT) == 0 || self.free(link + 1, LEFT) == 0 {
            return false;
        }
        self.used[link][RIGHT] += 1;
        self.used[link + 1][LEFT] += 1;
        self.attempts[link] += 1;
        let done = self.now + 2.0 * self.span_ms(0);
        self.queue.push(done, Event::LinkAttemptDone { link });
        true
    }

    fn try_purify(&mut self, level: u32, index: usize) -> bool {
        let needed = self.rounds_needed(level);
        let mut ready = self.classes[level as usize][index]
            .iter()
            .filter(|s| !s.busy && s.record.rounds_done < needed)
            .map(|s| s.record.id);
        let (Some(kept), Some(sacrificed)) = (ready.next(), ready.next()) else {
            return false;
        };
        let noise = self.config.noise.purification();
        let class = &mut self.classes[level as usize][index];
        let (mut a, mut b) = (None, None);
        for slot in class.iter_mut() {
            if slot.record.id == kept {
                slot.busy = true;
                a = Some(slot.record.state);
            } else if slot.record.id == sacrificed {
                slot.busy = true;
                b = Some(slot.record.state);
            }
        }
        let (a, b) = (a.unwrap(), b.unwrap());
        // Inputs are valid Bell-diagonal states, so the round can only fail
        // to be defined if both are orthogonal to the target subspace.
        let outcome = match bell_algebra::purify(&a, &b, noise) {
            Ok(o) => (self.rng.random::<f64>() < o.success_probability).then_some(o.state),
            Err(_) => None,
        };
        let done = self.now + 2.0 * self.span_ms(level);
        self.queue.push(done, Event::PurificationDone { level, index, kept, sacrificed, outcome });
        true
    }

    fn oldest_complete(&self, level: u32, index: usize) -> Option<usize> {
        let needed = self.rounds_needed(level);
        self.classes[level as usize][index]
            .iter()
            .position(|s| !s.busy && s.record.rounds_done >= needed)
    }

    fn accepts(&self, level: u32, index: usize) -> bool {
        let needed = self.rounds_needed(level);
        match self.classes[level as usize][index].as_slice() {
            [] => true,
            [only] => only.record.rounds_done < needed,
            _ => false,
        }
    }

    fn try_swap(&mut self, s: usize) -> bool {
        let j = s.trailing_zeros();
        if j >= self.levels {
            return false;
        }
        let span = 1usize << j;
        let (li, ri) = ((s - span) >> j, s >> j);
        let target = (s - span) >> (j + 1);
        let (Some(lp), Some(rp)) = (self.oldest_complete(j, li), self.oldest_complete(j, ri)) else {
            return false;
        };
        if !self.accepts(j + 1, target) {
            return false;
        }
        let left = self.classes[j as usize][li].remove(lp);
        let right = self.classes[j as usize][ri].remove(rp);
        let state = bell_algebra::connect(&left.record.state, &right.record.state, self.config.noise.swap());
        let lineage = match (left.lineage, right.lineage) {
            (Some(l), Some(r)) => Some(Box::new(Lineage::Swapped { left: l, right: r })),
            _ => None,
        };
        let record = PairRecord {
            id: self.fresh_id(),
            left_station: left.record.left_station,
            right_station: right.record.right_station,
            state,
            nesting_level: j + 1,
            rounds_done: 0,
            created_at: self.now,
        };
        let pair = record.id;
        self.classes[j as usize + 1][target].push(Slot { record, busy: true, lineage });
        self.pending_release[s][LEFT] += 1;
        self.pending_release[s][RIGHT] += 1;
        let notified = self.now + self.span_ms(j + 1) / 2.0;
        self.queue.push(notified, Event::SwapNotified { level: j + 1, index: target, pair, station: s });
        self.touch_class(j, li);
        self.touch_class(j, ri);
        self.touch_class(j + 1, target);
        true
    }

    fn try_deliver(&mut self) -> bool {
        if self.is_finished() {
            return false;
        }
        let Some(pos) = self.oldest_complete(self.levels, 0) else {
            return false;
        };
        let slot = self.classes[self.levels as usize][0].remove(pos);
        self.release(0, RIGHT);
        self.release(self.segments, LEFT);
        self.arrivals.push(self.now);
        self.fidelities.push(slot.record.state.fidelity());
        if let Some(lineage) = slot.lineage {
            self.delivered.push(DeliveredPair {
                arrival_ms: self.now,
                state: slot.record.state,
                lineage: *lineage,
            });
        }
        self.touch_class(self.levels, 0);
        true
    }

    fn deadlock(&self) -> Error {
        let per_level: Vec<String> = self
            .classes
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let pairs: usize = row.iter().map(Vec::len).sum();
                let needed = self.rounds_needed(j as u32);
                let done = row.iter().flatten().filter(|s| s.record.rounds_done >= needed).count();
                format!("L{j}: {pairs} pairs ({done} complete)")
            })
            .collect();
        let free: usize = (0..=self.segments).map(|s| self.free(s, LEFT) + self.free(s, RIGHT)).sum();
        Error::Deadlock {
            time_ms: self.now,
            delivered: self.arrivals.len(),
            target: self.config.target_pairs,
            diagnostic: format!(
                "{}; {free} free qubits; check purification_schedule against qubits_per_station",
                per_level.join(", ")
            ),
        }
    }
}
