//! Deterministic discrete-event kernel.
//!
//! The [`Scheduler`] owns the simulation clock and a time-ordered queue of
//! [`Event`]s. Events with equal fire times pop in insertion order. Random
//! numbers come from named [`RngStream`]s so that adding a consumer never
//! perturbs the sequence seen by another.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Simulation time in seconds.
pub type Time = f64;

/// What an event does when it fires, with the ids it refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    TaskArrival { vehicle: usize },
    TransmissionDone { task: usize },
    ProcessingDone { task: usize },
    VehicleHandover { vehicle: usize },
    DecisionEpoch,
    MetricsSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub fire_time: Time,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed so that `BinaryHeap` (a max-heap) yields the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Clock plus pending-event queue.
#[derive(Debug, Clone)]
pub struct Scheduler {
    now: Time,
    next_seq: u64,
    horizon: Time,
    queue: BinaryHeap<Event>,
}

impl Default for Scheduler {
    fn default() -> Self {
        Self::new(f64::INFINITY)
    }
}

impl Scheduler {
    /// Creates a kernel whose run ends at `horizon`; later events are dropped when popped.
    pub fn new(horizon: Time) -> Self {
        Self {
            now: 0.0,
            next_seq: 0,
            horizon,
            queue: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Queues `kind` to fire at `fire_time` and returns its sequence number.
    pub fn schedule(&mut self, fire_time: Time, kind: EventKind) -> Result<u64> {
        if !(fire_time >= self.now) {
            return Err(Error::EventInPast {
                fire_time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Event {
            fire_time,
            seq,
            kind,
        });
        Ok(seq)
    }

    /// Pops the earliest event and advances the clock to it.
    ///
    /// Returns `None` once the queue is empty or the earliest event lies past
    /// the horizon. Events past the horizon are discarded.
    pub fn pop_next(&mut self) -> Option<Event> {
        let event = self.queue.pop()?;
        if event.fire_time > self.horizon {
            self.queue.clear();
            return None;
        }
        self.now = event.fire_time;
        Some(event)
    }
}

/// 64-bit FNV-1a, used to turn a stream name into seed material.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed, e.g. one per training episode.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    mix64(mix64(master ^ fnv1a(label.as_bytes())) ^ mix64(index))
}

/// A named pseudo-random stream seeded from `(master_seed, name)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    name: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, name: &str) -> Self {
        let seed = mix64(master_seed ^ fnv1a(name.as_bytes()));
        Self {
            name: name.to_owned(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            lo + (hi - lo) * self.uniform()
        }
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Exponential variate with the given rate, by CDF inversion.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        exponential_from_uniform(self.uniform(), rate)
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// `-ln(1 - u) / rate`.
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    -(1.0 - u).ln() / rate
}
