//! Physical model: a ring of zones, one fog node and RSU per zone, a cloud
//! tier behind a backhaul, and vehicles that roam between zones while
//! generating tasks.
//!
//! Fog nodes and the cloud run tasks serially in FIFO order. A task is
//! enqueued when its uplink transfer finishes, so work that is still in
//! transit is invisible to `busy_until`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{EventKind, RngStream, Time};

const BITS_PER_MB: f64 = 8.0e6;
const BYTES_PER_MB: f64 = 1.0e6;

/// Inclusive `[min, max]` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub(crate) fn validate(&self, field: &str, positive: bool) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::config(field, "bounds must be finite"));
        }
        if self.min > self.max {
            return Err(Error::config(
                field,
                format!("min ({}) exceeds max ({})", self.min, self.max),
            ));
        }
        if positive && self.min <= 0.0 {
            return Err(Error::config(field, "bounds must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    /// Zones on the ring; each hosts one fog node.
    pub zones: usize,
    /// Fog CPU rates are drawn uniformly from this set.
    pub fog_cpu_ghz: Vec<f64>,
    pub fog_memory_mb: Span,
    pub segment_length_m: f64,
    pub cloud_cpu_ghz: f64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            zones: 6,
            fog_cpu_ghz: vec![1.0, 2.0, 3.0, 4.0],
            fog_memory_mb: Span::new(16.0, 64.0),
            segment_length_m: 500.0,
            cloud_cpu_ghz: 16.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    pub vehicles: usize,
    pub speed_kmh: Span,
    /// Tasks per second per vehicle.
    pub arrival_rate: f64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            vehicles: 100,
            speed_kmh: Span::new(20.0, 80.0),
            arrival_rate: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub size_mb: Span,
    pub deadline_ms: Span,
    pub cycles_per_bit: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            size_mb: Span::new(0.5, 5.0),
            deadline_ms: Span::new(50.0, 500.0),
            cycles_per_bit: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub v2r_mbps: f64,
    pub hop_delay_ms: f64,
    pub backhaul_rtt_ms: f64,
    pub result_kb: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            v2r_mbps: 100.0,
            hop_delay_ms: 5.0,
            backhaul_rtt_ms: 100.0,
            result_kb: 10.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub topology: TopologyConfig,
    pub fleet: FleetConfig,
    pub tasks: TaskConfig,
    pub links: LinkConfig,
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        if t.zones == 0 {
            return Err(Error::config("world.topology.zones", "must be at least 1"));
        }
        if t.fog_cpu_ghz.is_empty() || t.fog_cpu_ghz.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::config(
                "world.topology.fog_cpu_ghz",
                "must be a non-empty list of positive rates",
            ));
        }
        t.fog_memory_mb
            .validate("world.topology.fog_memory_mb", true)?;
        positive("world.topology.segment_length_m", t.segment_length_m)?;
        positive("world.topology.cloud_cpu_ghz", t.cloud_cpu_ghz)?;

        let f = &self.fleet;
        if f.vehicles == 0 {
            return Err(Error::config("world.fleet.vehicles", "must be at least 1"));
        }
        f.speed_kmh.validate("world.fleet.speed_kmh", true)?;
        if !(f.arrival_rate >= 0.0) || !f.arrival_rate.is_finite() {
            return Err(Error::config("world.fleet.arrival_rate", "must be >= 0"));
        }

        let k = &self.tasks;
        k.size_mb.validate("world.tasks.size_mb", true)?;
        k.deadline_ms.validate("world.tasks.deadline_ms", true)?;
        positive("world.tasks.cycles_per_bit", k.cycles_per_bit)?;

        let l = &self.links;
        positive("world.links.v2r_mbps", l.v2r_mbps)?;
        positive("world.links.hop_delay_ms", l.hop_delay_ms)?;
        positive("world.links.backhaul_rtt_ms", l.backhaul_rtt_ms)?;
        positive("world.links.result_kb", l.result_kb)?;
        if k.size_mb.max > t.fog_memory_mb.min {
            return Err(Error::config(
                "world.topology.fog_memory_mb",
                "smallest node memory must hold the largest task",
            ));
        }
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, "must be positive"))
    }
}

/// Where a task is sent, relative to the zone it was submitted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Local,
    Left,
    Right,
    Cloud,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Local, Action::Left, Action::Right, Action::Cloud];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }
}

/// Network path taken by the uplink (and mirrored by the result downlink).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    LocalFog,
    NeighborFog(usize),
    Cloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Fog(usize),
    Cloud,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: usize,
    pub segment_length: f64,
    /// Distinct ring neighbours, left first.
    pub neighbors: Vec<usize>,
    pub fog_node: usize,
}

/// Record of the intervals a server spent processing.
#[derive(Debug, Clone, Default)]
pub struct BusyLog {
    intervals: VecDeque<(Time, Time)>,
    scheduled_total: f64,
}

impl BusyLog {
    pub fn push(&mut self, start: Time, end: Time) {
        self.scheduled_total += end - start;
        self.intervals.push_back((start, end));
    }

    /// Busy time accumulated in `[0, t]`.
    pub fn busy_until(&self, t: Time) -> f64 {
        let mut future = 0.0;
        for &(s, e) in self.intervals.iter().rev() {
            if e <= t {
                break;
            }
            future += e - s.max(t);
        }
        (self.scheduled_total - future).max(0.0)
    }

    /// Busy time within `[t - window, t]`.
    pub fn busy_in_window(&self, t: Time, window: f64) -> f64 {
        let lo = t - window;
        let mut busy = 0.0;
        for &(s, e) in self.intervals.iter().rev() {
            if e <= lo {
                break;
            }
            let overlap = e.min(t) - s.max(lo);
            if overlap > 0.0 {
                busy += overlap;
            }
        }
        busy
    }

    pub(crate) fn prune_before(&mut self, t: Time) {
        while matches!(self.intervals.front(), Some(&(_, e)) if e < t) {
            self.intervals.pop_front();
        }
    }
}

#[derive(Debug, Clone)]
pub struct FogNode {
    pub id: usize,
    /// Cycles per second.
    pub cpu_rate: f64,
    /// Bytes.
    pub memory_capacity: f64,
    /// Tasks admitted and not yet finished, head is in service.
    pub queue: VecDeque<usize>,
    pub queued_bytes: f64,
    pub busy_until: Time,
    pub busy: BusyLog,
    /// Tasks routed here whose uplink is still running.
    pub in_transit: usize,
    /// Processing seconds those in-transit tasks will need.
    pub in_transit_work: f64,
}

impl FogNode {
    pub fn new(id: usize, cpu_rate: f64, memory_capacity: f64) -> Self {
        assert!(cpu_rate > 0.0 && memory_capacity > 0.0);
        Self {
            id,
            cpu_rate,
            memory_capacity,
            queue: VecDeque::new(),
            queued_bytes: 0.0,
            busy_until: 0.0,
            busy: BusyLog::default(),
            in_transit: 0,
            in_transit_work: 0.0,
        }
    }

    pub fn cumulative_busy_time(&self, now: Time) -> f64 {
        self.busy.busy_until(now)
    }

    /// Committed processing seconds: residual backlog plus in-transit work.
    pub fn pending_work(&self, now: Time) -> f64 {
        (self.busy_until - now).max(0.0) + self.in_transit_work
    }

    pub fn pending_tasks(&self) -> usize {
        self.queue.len() + self.in_transit
    }
}

#[derive(Debug, Clone)]
pub struct CloudNode {
    pub cpu_rate: f64,
    pub backhaul_rtt: f64,
    pub busy_until: Time,
    pub busy: BusyLog,
    pub in_transit: usize,
    /// Tasks admitted and not yet finished.
    pub in_queue: usize,
}

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: usize,
    pub zone: usize,
    /// Metres per second.
    pub speed: f64,
    pub arrival_rate: f64,
    pub next_handover_time: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskOutcome {
    Pending,
    Completed,
    DeadlineMiss,
    Rejected,
}

impl TaskOutcome {
    pub fn is_terminal(self) -> bool {
        self != TaskOutcome::Pending
    }
}

#[derive(Debug, Clone)]
pub struct Task {
    pub id: usize,
    pub vehicle: usize,
    pub origin_zone: usize,
    pub size: f64,
    pub cycles_required: f64,
    /// Relative deadline in seconds.
    pub deadline: f64,
    pub created_at: Time,
    pub decided_at: Option<Time>,
    pub tx_done_at: Option<Time>,
    pub completed_at: Option<Time>,
    pub outcome: TaskOutcome,
    pub action: Option<Action>,
    pub target: Option<Target>,
    pub route: Option<Route>,
}

impl Task {
    pub fn size_bits(&self) -> f64 {
        self.size * 8.0
    }

    /// End-to-end latency, known once the result is delivered.
    pub fn latency(&self) -> Option<f64> {
        self.completed_at.map(|t| t - self.created_at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    /// Bits per second between a vehicle and its RSU.
    pub v2r_rate: f64,
    pub inter_zone_hop_delay: f64,
    pub backhaul_rtt: f64,
    pub result_bits: f64,
}

impl LinkModel {
    pub fn from_config(cfg: &LinkConfig) -> Self {
        Self {
            v2r_rate: cfg.v2r_mbps * 1.0e6,
            inter_zone_hop_delay: cfg.hop_delay_ms * 1.0e-3,
            backhaul_rtt: cfg.backhaul_rtt_ms * 1.0e-3,
            result_bits: cfg.result_kb * 8.0e3,
        }
    }

    fn route_extra(&self, route: Route) -> f64 {
        match route {
            Route::LocalFog => 0.0,
            Route::NeighborFog(hops) => hops as f64 * self.inter_zone_hop_delay,
            Route::Cloud => self.backhaul_rtt / 2.0,
        }
    }

    /// Uplink delay for a payload of `size_bits`.
    pub fn transmission_delay(&self, size_bits: f64, route: Route) -> f64 {
        size_bits / self.v2r_rate + self.route_extra(route)
    }

    /// Result delivery back to the vehicle; one extra hop if it changed zones.
    pub fn downlink_delay(&self, route: Route, moved: bool) -> f64 {
        let forward = if moved {
            self.inter_zone_hop_delay
        } else {
            0.0
        };
        self.result_bits / self.v2r_rate + self.route_extra(route) + forward
    }
}

pub fn processing_time(cycles: f64, cpu_rate: f64) -> f64 {
    cycles / cpu_rate
}

/// Ring distance between two zones.
pub fn ring_hops(a: usize, b: usize, zones: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(zones - d)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub generated: usize,
    pub completed: usize,
    pub missed: usize,
    pub rejected: usize,
}

impl Counts {
    pub fn terminal(&self) -> usize {
        self.completed + self.missed + self.rejected
    }

    pub fn in_flight(&self) -> usize {
        self.generated - self.terminal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admission {
    Accepted { done_at: Time },
    Rejected,
}

#[derive(Debug, Clone)]
struct TaskParams {
    size_bytes: (f64, f64),
    deadline_s: (f64, f64),
    cycles_per_bit: f64,
}

/// All mutable physical state of one run.
#[derive(Debug, Clone)]
pub struct World {
    pub zones: Vec<Zone>,
    pub nodes: Vec<FogNode>,
    pub cloud: CloudNode,
    pub vehicles: Vec<Vehicle>,
    pub tasks: Vec<Task>,
    pub link: LinkModel,
    zone_population: Vec<usize>,
    counts: Counts,
    delay_estimate: f64,
    /// Trailing window used for busy-time shares.
    window: f64,
    params: TaskParams,
    arrivals: RngStream,
    task_draws: RngStream,
    mobility: RngStream,
}

impl World {
    /// Builds a world. Node hardware comes from `topology_seed`; the fleet
    /// and all runtime randomness come from `run_seed`.
    pub fn new(cfg: &WorldConfig, topology_seed: u64, run_seed: u64, window: f64) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.topology.zones;
        let mut topo = RngStream::new(topology_seed, "topology");
        let mem = cfg.topology.fog_memory_mb;
        let nodes = (0..n)
            .map(|id| {
                let ghz = cfg.topology.fog_cpu_ghz[topo.index(cfg.topology.fog_cpu_ghz.len())];
                let mb = topo.uniform_range(mem.min, mem.max);
                FogNode::new(id, ghz * 1.0e9, mb * BYTES_PER_MB)
            })
            .collect();
        let zones = (0..n)
            .map(|id| {
                let mut neighbors = Vec::with_capacity(2);
                for z in [(id + n - 1) % n, (id + 1) % n] {
                    if z != id && !neighbors.contains(&z) {
                        neighbors.push(z);
                    }
                }
                Zone {
                    id,
                    segment_length: cfg.topology.segment_length_m,
                    neighbors,
                    fog_node: id,
                }
            })
            .collect::<Vec<_>>();

        let mut fleet = RngStream::new(run_seed, "fleet");
        let vehicles: Vec<Vehicle> = (0..cfg.fleet.vehicles)
            .map(|id| {
                let zone = fleet.index(n);
                let speed =
                    fleet.uniform_range(cfg.fleet.speed_kmh.min, cfg.fleet.speed_kmh.max) / 3.6;
                let dwell = cfg.topology.segment_length_m / speed;
                Vehicle {
                    id,
                    zone,
                    speed,
                    arrival_rate: cfg.fleet.arrival_rate,
                    next_handover_time: fleet.uniform() * dwell,
                }
            })
            .collect();

        let mut population = vec![0usize; n];
        for v in vehicles.iter() {
            population[v.zone] += 1;
        }
        let link = LinkModel::from_config(&cfg.links);
        let t = &cfg.tasks;
        let params = TaskParams {
            size_bytes: (t.size_mb.min * BYTES_PER_MB, t.size_mb.max * BYTES_PER_MB),
            deadline_s: (t.deadline_ms.min * 1e-3, t.deadline_ms.max * 1e-3),
            cycles_per_bit: t.cycles_per_bit,
        };
        let mean_bits = (t.size_mb.min + t.size_mb.max) / 2.0 * BITS_PER_MB;
        Ok(Self {
            zones,
            nodes,
            cloud: CloudNode {
                cpu_rate: cfg.topology.cloud_cpu_ghz * 1.0e9,
                backhaul_rtt: link.backhaul_rtt,
                busy_until: 0.0,
                busy: BusyLog::default(),
                in_transit: 0,
                in_queue: 0,
            },
            zone_population: population,
            vehicles,
            tasks: Vec::new(),
            delay_estimate: link.transmission_delay(mean_bits, Route::LocalFog),
            link,
            counts: Counts::default(),
            window,
            params,
            arrivals: RngStream::new(run_seed, "arrivals"),
            task_draws: RngStream::new(run_seed, "tasks"),
            mobility: RngStream::new(run_seed, "mobility"),
        })
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// Moving estimate of recent uplink delay, seconds.
    pub fn delay_estimate(&self) -> f64 {
        self.delay_estimate
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn task_size_range(&self) -> (f64, f64) {
        self.params.size_bytes
    }

    pub fn deadline_range(&self) -> (f64, f64) {
        self.params.deadline_s
    }

    pub fn vehicles_in_zone(&self, zone: usize) -> usize {
        self.zone_population[zone]
    }

    /// Tasks that are queued, in service or on the way to a server.
    pub fn tasks_at_servers(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.queue.len() + n.in_transit)
            .sum::<usize>()
            + self.cloud.in_queue
            + self.cloud.in_transit
    }

    /// Events that start the run: each vehicle's first arrival and handover.
    pub fn initial_events(&mut self) -> Vec<(Time, EventKind)> {
        let mut events = Vec::with_capacity(self.vehicles.len() * 2);
        for v in 0..self.vehicles.len() {
            if let Some(gap) = self.next_arrival_gap(v) {
                events.push((gap, EventKind::TaskArrival { vehicle: v }));
            }
            events.push((
                self.vehicles[v].next_handover_time,
                EventKind::VehicleHandover { vehicle: v },
            ));
        }
        events
    }

    /// Exponential gap to the vehicle's next task, or `None` if it never generates one.
    pub fn next_arrival_gap(&mut self, vehicle: usize) -> Option<f64> {
        let rate = self.vehicles[vehicle].arrival_rate;
        if rate > 0.0 {
            Some(self.arrivals.exponential(rate))
        } else {
            None
        }
    }

    /// Draws a new task for `vehicle` and returns its id.
    pub fn create_task(&mut self, vehicle: usize, now: Time) -> usize {
        let (smin, smax) = self.params.size_bytes;
        let (dmin, dmax) = self.params.deadline_s;
        let size = self.task_draws.uniform_range(smin, smax);
        let deadline = self.task_draws.uniform_range(dmin, dmax);
        self.push_task(vehicle, size, deadline, now)
    }

    /// Adds a task with explicit size (bytes) and deadline (seconds).
    pub fn push_task(&mut self, vehicle: usize, size: f64, deadline: f64, now: Time) -> usize {
        let id = self.tasks.len();
        self.tasks.push(Task {
            id,
            vehicle,
            origin_zone: self.vehicles[vehicle].zone,
            size,
            cycles_required: size * 8.0 * self.params.cycles_per_bit,
            deadline,
            created_at: now,
            decided_at: None,
            tx_done_at: None,
            completed_at: None,
            outcome: TaskOutcome::Pending,
            action: None,
            target: None,
            route: None,
        });
        self.counts.generated += 1;
        id
    }

    /// Hands the vehicle over to a random neighbour zone; returns the next handover time.
    pub fn advance_vehicle(&mut self, vehicle: usize, now: Time) -> Time {
        let zone = self.vehicles[vehicle].zone;
        let neighbors = &self.zones[zone].neighbors;
        if !neighbors.is_empty() {
            let pick = neighbors[self.mobility.index(neighbors.len())];
            self.vehicles[vehicle].zone = pick;
            self.zone_population[zone] -= 1;
            self.zone_population[pick] += 1;
        }
        let v = &mut self.vehicles[vehicle];
        v.next_handover_time = now + self.zones[zone].segment_length / v.speed;
        v.next_handover_time
    }

    /// Resolves a relative action from `origin` into a concrete target and route.
    pub fn resolve(&self, origin: usize, action: Action) -> (Target, Route) {
        let n = self.zones.len();
        let node = match action {
            Action::Local => origin,
            Action::Left => (origin + n - 1) % n,
            Action::Right => (origin + 1) % n,
            Action::Cloud => return (Target::Cloud, Route::Cloud),
        };
        let hops = ring_hops(origin, node, n);
        let route = if hops == 0 {
            Route::LocalFog
        } else {
            Route::NeighborFog(hops)
        };
        (Target::Fog(self.zones[node].fog_node), route)
    }

    fn cpu_rate(&self, target: Target) -> f64 {
        match target {
            Target::Fog(n) => self.nodes[n].cpu_rate,
            Target::Cloud => self.cloud.cpu_rate,
        }
    }

    fn target_busy_until(&self, target: Target) -> Time {
        match target {
            Target::Fog(n) => self.nodes[n].busy_until,
            Target::Cloud => self.cloud.busy_until,
        }
    }

    pub fn processing_time(&self, task: usize, target: Target) -> f64 {
        processing_time(self.tasks[task].cycles_required, self.cpu_rate(target))
    }

    /// Latency the task would see under `action` given current queues, ignoring
    /// work that has not reached a server yet and any future arrivals.
    pub fn predicted_completion_latency(&self, task: usize, action: Action, now: Time) -> f64 {
        let t = &self.tasks[task];
        let (target, route) = self.resolve(t.origin_zone, action);
        let uplink = self.link.transmission_delay(t.size_bits(), route);
        let wait = (self.target_busy_until(target) - now - uplink).max(0.0);
        (now - t.created_at)
            + uplink
            + wait
            + self.processing_time(task, target)
            + self.link.downlink_delay(route, false)
    }

    /// Commits `task` to `action`; returns when its uplink finishes.
    pub fn dispatch(&mut self, task: usize, action: Action, now: Time) -> Time {
        let (target, route) = self.resolve(self.tasks[task].origin_zone, action);
        let uplink = self
            .link
            .transmission_delay(self.tasks[task].size_bits(), route);
        let proc = self.processing_time(task, target);
        match target {
            Target::Fog(n) => {
                self.nodes[n].in_transit += 1;
                self.nodes[n].in_transit_work += proc;
            }
            Target::Cloud => self.cloud.in_transit += 1,
        }
        let t = &mut self.tasks[task];
        t.decided_at = Some(now);
        t.action = Some(action);
        t.target = Some(target);
        t.route = Some(route);
        now + uplink
    }

    /// Admits the task to its target's FIFO queue once transmission completes.
    pub fn enqueue_task(&mut self, task: usize, now: Time) -> Admission {
        let target = self.tasks[task].target.expect("enqueue before dispatch");
        let size = self.tasks[task].size;
        let proc = self.processing_time(task, target);
        self.tasks[task].tx_done_at = Some(now);
        let uplink = now - self.tasks[task].decided_at.unwrap_or(now);
        self.delay_estimate = 0.9 * self.delay_estimate + 0.1 * uplink;
        match target {
            Target::Fog(n) => {
                let node = &mut self.nodes[n];
                node.in_transit -= 1;
                node.in_transit_work = (node.in_transit_work - proc).max(0.0);
                if node.in_transit == 0 {
                    node.in_transit_work = 0.0;
                }
                if node.queued_bytes + size > node.memory_capacity {
                    self.tasks[task].outcome = TaskOutcome::Rejected;
                    self.counts.rejected += 1;
                    return Admission::Rejected;
                }
                let start = now.max(node.busy_until);
                let end = start + proc;
                node.queue.push_back(task);
                node.queued_bytes += size;
                node.busy_until = end;
                node.busy.push(start, end);
                node.busy.prune_before(now - self.window - 1.0);
                Admission::Accepted { done_at: end }
            }
            Target::Cloud => {
                self.cloud.in_transit -= 1;
                self.cloud.in_queue += 1;
                let start = now.max(self.cloud.busy_until);
                let end = start + proc;
                self.cloud.busy_until = end;
                self.cloud.busy.push(start, end);
                self.cloud.busy.prune_before(now - self.window - 1.0);
                Admission::Accepted { done_at: end }
            }
        }
    }

    /// Finishes processing, delivers the result and settles the outcome.
    pub fn complete_task(&mut self, task: usize, now: Time) -> TaskOutcome {
        let target = self.tasks[task].target.expect("complete before dispatch");
        match target {
            Target::Fog(n) => {
                let node = &mut self.nodes[n];
                let head = node.queue.pop_front();
                debug_assert_eq!(head, Some(task), "FIFO order violated");
                node.queued_bytes = (node.queued_bytes - self.tasks[task].size).max(0.0);
                if node.queue.is_empty() {
                    node.queued_bytes = 0.0;
                }
            }
            Target::Cloud => self.cloud.in_queue -= 1,
        }
        let t = &self.tasks[task];
        let moved = self.vehicles[t.vehicle].zone != t.origin_zone;
        let route = t.route.expect("route set at dispatch");
        let delivered = now + self.link.downlink_delay(route, moved);
        let t = &mut self.tasks[task];
        t.completed_at = Some(delivered);
        let latency = delivered - t.created_at;
        // A latency equal to the deadline counts as met.
        t.outcome = if latency <= t.deadline + 1e-12 {
            self.counts.completed += 1;
            TaskOutcome::Completed
        } else {
            self.counts.missed += 1;
            TaskOutcome::DeadlineMiss
        };
        t.outcome
    }

    /// Fraction of the trailing window each fog node spent busy.
    pub fn busy_shares(&self, now: Time) -> Vec<f64> {
        let w = self.window.min(now);
        self.nodes
            .iter()
            .map(|n| {
                if w > 0.0 {
                    (n.busy.busy_in_window(now, w) / w).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}
