//! Stateful link layer: attachment bookkeeping, scans, periodic reporting.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    map_link_quality, residual_for_scheme, scan, AccessCandidate, AccessHistory, GllConfig, GllError,
    LinkMeasurement, LinkQualityReport, Rat, ScanMode, ScanOutcome, ServiceClass,
};
use crate::simenv::{Cell, Ctx, EnvChange, Environment, Handle, RecordKind, SimTime, Wakeup};
use crate::trg::{types, Event, Trigger};

pub const GLL_SOURCE: &str = "gll";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttachOutcome {
    /// Already attached; no second link-up is emitted.
    AlreadyAttached,
    InProgress,
    Started,
}

#[derive(Clone, Debug)]
struct ActiveScan {
    id: u64,
    outcome: ScanOutcome,
    /// Fall back to a full scan when this targeted scan finds nothing.
    then_full: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanCounters {
    pub targeted: u64,
    pub full: u64,
}

pub struct Gll {
    cfg: GllConfig,
    network_view: bool,
    supported: BTreeSet<Rat>,
    history: AccessHistory,
    attached: BTreeSet<String>,
    attaching: BTreeMap<String, (u64, Handle)>,
    detected: BTreeSet<String>,
    scan: Option<ActiveScan>,
    next_id: u64,
    class: Option<ServiceClass>,
    interval_override: Option<u64>,
    enabled: bool,
    tick_generation: u64,
    ticking: bool,
    energy: f64,
    scans: ScanCounters,
}

impl Gll {
    /// `network_view` exposes the load of cells the terminal is not attached
    /// to, as network-side resource management would see it.
    pub fn new(cfg: GllConfig, network_view: bool, supported: BTreeSet<Rat>) -> Self {
        Gll {
            history: cfg.initial_history(),
            enabled: cfg.reporting.enabled,
            cfg,
            network_view,
            supported,
            attached: BTreeSet::new(),
            attaching: BTreeMap::new(),
            detected: BTreeSet::new(),
            scan: None,
            next_id: 0,
            class: None,
            interval_override: None,
            tick_generation: 0,
            ticking: false,
            energy: 0.0,
            scans: ScanCounters::default(),
        }
    }

    pub fn config(&self) -> &GllConfig {
        &self.cfg
    }

    pub fn history(&self) -> &AccessHistory {
        &self.history
    }

    pub fn is_attached(&self, cell: &str) -> bool {
        self.attached.contains(cell)
    }

    pub fn is_attaching(&self, cell: &str) -> bool {
        self.attaching.contains_key(cell)
    }

    pub fn attached(&self) -> impl Iterator<Item = &str> {
        self.attached.iter().map(String::as_str)
    }

    pub fn detected(&self) -> impl Iterator<Item = &str> {
        self.detected.iter().map(String::as_str)
    }

    pub fn is_scanning(&self) -> bool {
        self.scan.is_some()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn scan_counters(&self) -> &ScanCounters {
        &self.scans
    }

    fn supports(&self, rat: &Rat) -> bool {
        self.supported.is_empty() || self.supported.contains(rat)
    }

    /// Current spacing of periodic reports.
    pub fn interval_ms(&self) -> u64 {
        self.interval_override
            .unwrap_or_else(|| self.cfg.reporting.interval_for(self.class))
    }

    /// Marks a cell as attached without latency (initial state of a run).
    pub fn preattach(&mut self, cell: &Cell) {
        self.attached.insert(cell.cell_id.clone());
        self.detected.insert(cell.cell_id.clone());
        self.history.record(&cell.rat, &cell.frequency);
    }

    /// Starts the periodic ticker and the initial targeted-then-full scan.
    pub fn start(&mut self, env: &Environment, ctx: &mut Ctx) {
        if self.enabled {
            self.schedule_tick(ctx);
        }
        self.begin_scan(ScanMode::Targeted, true, env, ctx);
    }

    fn schedule_tick(&mut self, ctx: &mut Ctx) {
        self.tick_generation += 1;
        self.ticking = true;
        let interval = self.interval_ms();
        ctx.schedule_in(
            interval,
            Wakeup::GllTick {
                generation: self.tick_generation,
            },
        );
    }

    /// The class of the most demanding active flow; the new interval applies
    /// from the next tick on.
    pub fn set_active_class(&mut self, class: Option<ServiceClass>) {
        self.class = class;
    }

    pub fn on_tick(&mut self, generation: u64, env: &Environment, ctx: &mut Ctx) {
        if generation != self.tick_generation || !self.enabled {
            return;
        }
        self.ticking = false;
        self.publish_batch(env, ctx, true);
        self.schedule_tick(ctx);
    }

    /// Requests a scan; `false` if one is already running.
    pub fn request_scan(&mut self, mode: ScanMode, env: &Environment, ctx: &mut Ctx) -> bool {
        if self.scan.is_some() {
            return false;
        }
        self.begin_scan(mode, false, env, ctx);
        true
    }

    fn begin_scan(&mut self, mode: ScanMode, then_full: bool, env: &Environment, ctx: &mut Ctx) {
        let outcome = scan(mode, &self.history, env, |r| self.supports(r), &self.cfg.scan);
        self.next_id += 1;
        let id = self.next_id;
        let rec = ctx
            .note(GLL_SOURCE, RecordKind::Measurement)
            .with("what", "scan-start")
            .with("mode", mode.as_str())
            .with("scan", id)
            .with("cost_ms", outcome.cost_ms);
        ctx.record(rec);
        ctx.schedule_in(outcome.cost_ms, Wakeup::ScanDone { scan: id });
        self.scan = Some(ActiveScan {
            id,
            outcome,
            then_full,
        });
    }

    pub fn on_scan_done(&mut self, id: u64, env: &Environment, ctx: &mut Ctx) {
        let Some(active) = self.scan.take_if(|s| s.id == id) else {
            return;
        };
        let ActiveScan {
            outcome, then_full, ..
        } = active;
        // Cells that went out of coverage while the probe was running are not reported.
        let found: Vec<AccessCandidate> = outcome
            .candidates
            .iter()
            .filter(|c| env.is_covered(&c.cell_id))
            .cloned()
            .collect();
        match outcome.mode {
            ScanMode::Targeted => self.scans.targeted += 1,
            ScanMode::Full => self.scans.full += 1,
        }
        self.energy += outcome.energy;
        for c in &found {
            self.detected.insert(c.cell_id.clone());
        }
        let chain = found.is_empty() && then_full && outcome.mode == ScanMode::Targeted;
        if !chain {
            self.publish_batch(env, ctx, false);
        }
        let cells: Vec<&str> = found.iter().map(|c| c.cell_id.as_str()).collect();
        ctx.publish(
            Event::new(types::SCAN_COMPLETE, GLL_SOURCE)
                .with("mode", outcome.mode.as_str())
                .with("found", found.len())
                .with("cells", cells.join(","))
                .with("probes", outcome.probes)
                .with("cost_ms", outcome.cost_ms)
                .with("energy", outcome.energy),
        );
        if chain {
            self.begin_scan(ScanMode::Full, false, env, ctx);
        }
    }

    pub fn attach(&mut self, cell_id: &str, env: &Environment, ctx: &mut Ctx) -> Result<AttachOutcome, GllError> {
        let cell = env
            .cell(cell_id)
            .ok_or_else(|| GllError::UnknownCell(cell_id.to_string()))?;
        if self.attached.contains(cell_id) {
            return Ok(AttachOutcome::AlreadyAttached);
        }
        if self.attaching.contains_key(cell_id) {
            return Ok(AttachOutcome::InProgress);
        }
        if !cell.covered {
            return Err(GllError::NotCovered(cell_id.to_string()));
        }
        self.next_id += 1;
        let attempt = self.next_id;
        let handle = ctx.schedule_in(
            self.cfg.attach_latency_ms,
            Wakeup::AttachDone {
                cell: cell_id.to_string(),
                attempt,
            },
        );
        self.attaching.insert(cell_id.to_string(), (attempt, handle));
        Ok(AttachOutcome::Started)
    }

    pub fn on_attach_done(&mut self, cell_id: &str, attempt: u64, env: &Environment, ctx: &mut Ctx) {
        if self.attaching.get(cell_id).map(|a| a.0) != Some(attempt) {
            return;
        }
        self.attaching.remove(cell_id);
        let Some(cell) = env.cell(cell_id) else { return };
        if !cell.covered {
            ctx.publish(candidate_event(types::ATTACH_FAILED, &cell.candidate()).with("reason", "coverage-lost"));
            return;
        }
        self.attached.insert(cell_id.to_string());
        self.detected.insert(cell_id.to_string());
        self.history.record(&cell.rat, &cell.frequency);
        ctx.publish(candidate_event(types::LINK_UP, &cell.candidate()));
    }

    pub fn detach(&mut self, cell_id: &str, env: &mut Environment, ctx: &mut Ctx) -> Result<(), GllError> {
        if !self.attached.remove(cell_id) {
            return Err(GllError::NotAttached(cell_id.to_string()));
        }
        let cell = env
            .cell_mut(cell_id)
            .ok_or_else(|| GllError::UnknownCell(cell_id.to_string()))?;
        let flows = release_all(cell);
        ctx.publish(
            candidate_event(types::LINK_DOWN, &cell.candidate())
                .with("reason", "requested")
                .with("flows", flows.join(",")),
        );
        Ok(())
    }

    /// Maps `demand` units of a flow onto an attached cell.
    pub fn reserve(&mut self, flow: &str, cell_id: &str, demand: u64, env: &mut Environment) -> Result<(), GllError> {
        if !self.attached.contains(cell_id) {
            return Err(GllError::NotAttached(cell_id.to_string()));
        }
        let cell = env
            .cell_mut(cell_id)
            .ok_or_else(|| GllError::UnknownCell(cell_id.to_string()))?;
        cell.reserve(flow, demand)?;
        Ok(())
    }

    pub fn release(&mut self, flow: &str, cell_id: &str, env: &mut Environment) -> Option<u64> {
        env.cell_mut(cell_id)?.release(flow)
    }

    pub fn on_env_change(&mut self, change: &EnvChange, env: &mut Environment, ctx: &mut Ctx) {
        match change {
            EnvChange::CoverageChanged {
                cell,
                covered: false,
                cable,
            } => self.coverage_lost(cell, *cable, env, ctx),
            EnvChange::CoverageChanged {
                cell, covered: true, ..
            } => {
                if let Some(c) = env.cell(cell) {
                    if self.supports(&c.rat) {
                        self.detect(cell, env, ctx);
                    }
                }
            }
            EnvChange::RouterAdvertisement { cell } => {
                let Some(c) = env.cell(cell) else { return };
                ctx.publish(candidate_event(types::ROUTER_ADVERTISEMENT, &c.candidate()));
                if c.covered && self.supports(&c.rat) {
                    self.detect(cell, env, ctx);
                }
            }
            _ => {}
        }
    }

    fn detect(&mut self, cell_id: &str, env: &Environment, ctx: &mut Ctx) {
        if !self.detected.insert(cell_id.to_string()) {
            return;
        }
        let Some(cell) = env.cell(cell_id) else { return };
        let report = self.report(cell, ctx.now);
        ctx.publish(report_event(&report, 0, 1, false).retyped(types::NEW_ACCESS_DETECTED));
        self.publish_batch(env, ctx, false);
    }

    fn coverage_lost(&mut self, cell_id: &str, cable: bool, env: &mut Environment, ctx: &mut Ctx) {
        if let Some((_, handle)) = self.attaching.remove(cell_id) {
            ctx.cancel(handle);
            if let Some(c) = env.cell(cell_id) {
                ctx.publish(candidate_event(types::ATTACH_FAILED, &c.candidate()).with("reason", "coverage-lost"));
            }
        }
        let was_attached = self.attached.remove(cell_id);
        let was_detected = self.detected.remove(cell_id);
        let Some(cell) = env.cell_mut(cell_id) else { return };
        if was_attached {
            let flows = release_all(cell);
            ctx.publish(
                candidate_event(types::LINK_DOWN, &cell.candidate())
                    .with("reason", "lost")
                    .with("cable", cable)
                    .with("flows", flows.join(",")),
            );
        } else if was_detected {
            ctx.publish(candidate_event(types::ACCESS_LOST, &cell.candidate()));
        }
    }

    pub fn on_trigger(&mut self, t: &Trigger, ctx: &mut Ctx) {
        if !t.is(types::REPORTING_INTERVAL_CHANGE) {
            return;
        }
        if let Some(ms) = t.num("interval_ms") {
            if ms >= 1.0 && ms.fract() == 0.0 {
                self.interval_override = Some(ms as u64);
            }
        }
        if t.flag("clear") == Some(true) {
            self.interval_override = None;
        }
        if let Some(class) = t.text("service_class").and_then(ServiceClass::parse) {
            self.class = Some(class);
        }
        if let Some(enabled) = t.flag("enabled") {
            self.enabled = enabled;
            if !enabled {
                self.tick_generation += 1;
                self.ticking = false;
            } else if !self.ticking {
                self.schedule_tick(ctx);
            }
        }
        let rec = ctx
            .note(GLL_SOURCE, RecordKind::Log)
            .with("what", "reporting-reconfigured")
            .with("interval_ms", self.interval_ms())
            .with("enabled", self.enabled);
        ctx.record(rec);
    }

    pub fn measure(&self, cell: &Cell, now: SimTime) -> LinkMeasurement<f64> {
        let visible = self.network_view || self.attached.contains(&cell.cell_id);
        let (load, free) = if visible {
            (cell.load(), cell.free_resources())
        } else {
            (0.0, cell.total_resources)
        };
        LinkMeasurement {
            candidate: cell.candidate(),
            residual_error_rate: residual_for_scheme(cell.raw_error_rate, &cell.rat, &self.cfg.mac),
            achievable_rate: cell.achievable_rate,
            delay: cell.base_delay,
            load,
            covered: cell.covered,
            taken_at: now,
            free_resources: free,
            security_level: cell.security_level,
            cost_per_mb: cell.cost_per_mb,
        }
    }

    pub fn report(&self, cell: &Cell, now: SimTime) -> LinkQualityReport<f64> {
        let class = self.class.unwrap_or_default();
        map_link_quality(&self.measure(cell, now), &self.cfg.mapping, class)
    }

    /// Every covered attached or detected access, in cell order.
    pub fn reports(&self, env: &Environment, now: SimTime) -> Vec<LinkQualityReport<f64>> {
        self.attached
            .union(&self.detected)
            .filter_map(|id| env.cell(id))
            .filter(|c| c.covered)
            .map(|c| self.report(c, now))
            .collect()
    }

    fn publish_batch(&mut self, env: &Environment, ctx: &mut Ctx, periodic: bool) {
        let reports = self.reports(env, ctx.now);
        let n = reports.len();
        for (i, r) in reports.iter().enumerate() {
            ctx.publish(report_event(r, i, n, periodic));
        }
    }
}

fn release_all(cell: &mut Cell) -> Vec<String> {
    let flows: Vec<String> = cell.reservations().map(|(f, _)| f.to_string()).collect();
    for f in &flows {
        cell.release(f);
    }
    flows
}

trait Retype {
    fn retyped(self, event_type: &str) -> Self;
}

impl Retype for Event {
    fn retyped(mut self, event_type: &str) -> Self {
        self.event_type = event_type.to_string();
        self
    }
}

fn candidate_event(event_type: &str, c: &AccessCandidate) -> Event {
    Event::new(event_type, GLL_SOURCE)
        .with("cell", c.cell_id.as_str())
        .with("rat", c.rat.as_str())
        .with("operator", c.operator_id.as_str())
        .with("frequency", c.frequency.as_str())
}

pub fn candidate_from_event(e: &Event) -> Option<AccessCandidate> {
    Some(AccessCandidate::new(
        e.text("rat")?,
        e.text("operator")?,
        e.text("cell")?,
        e.text("frequency")?,
    ))
}

pub fn report_event(r: &LinkQualityReport<f64>, batch_index: usize, batch_size: usize, periodic: bool) -> Event {
    let m = &r.raw;
    candidate_event(types::LINK_QUALITY_REPORT, &r.candidate)
        .with("q_error", r.q_error)
        .with("q_rate", r.q_rate)
        .with("q_delay", r.q_delay)
        .with("q_load", r.q_load)
        .with("quality", r.quality)
        .with("relative_resources", r.relative_resources)
        .with("residual_error_rate", m.residual_error_rate)
        .with("achievable_rate", m.achievable_rate)
        .with("delay", m.delay)
        .with("load", m.load)
        .with("covered", m.covered)
        .with("taken_at", m.taken_at.as_ms())
        .with("free_resources", m.free_resources)
        .with("security_level", m.security_level as u64)
        .with("cost_per_mb", m.cost_per_mb)
        .with("batch_index", batch_index)
        .with("batch_size", batch_size)
        .with("periodic", periodic)
}

/// Rebuilds a report from its event form.
pub fn report_from_event(e: &Event) -> Option<LinkQualityReport<f64>> {
    let candidate = candidate_from_event(e)?;
    let raw = LinkMeasurement {
        candidate: candidate.clone(),
        residual_error_rate: e.num("residual_error_rate")?,
        achievable_rate: e.num("achievable_rate")?,
        delay: e.num("delay")?,
        load: e.num("load")?,
        covered: e.flag("covered")?,
        taken_at: SimTime(e.num("taken_at")? as u64),
        free_resources: e.num("free_resources")? as u64,
        security_level: e.num("security_level")? as u8,
        cost_per_mb: e.num("cost_per_mb")?,
    };
    Some(LinkQualityReport {
        candidate,
        q_error: e.num("q_error")?,
        q_rate: e.num("q_rate")?,
        q_delay: e.num("q_delay")?,
        q_load: e.num("q_load")?,
        quality: e.num("quality")?,
        relative_resources: e.num("relative_resources")?,
        raw,
    })
}
