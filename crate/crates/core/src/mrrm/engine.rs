//! Event-driven decision loop around `select_access`.

use std::collections::BTreeMap;

use super::{select_access, Flow, HandoverSemantics, MrrmConfig, MrrmError, PolicySet, RankedList};
use crate::gll::{
    report_from_event, AccessCandidate, AttachOutcome, Gll, LinkQualityReport,
    Rat, ScanMode, ServiceClass,
};
use crate::simenv::{Ctx, Environment, FlowSpec, RecordKind, SimTime, Wakeup};
use crate::trg::{types, Event, Trigger, Verdict};

pub const MRRM_SOURCE: &str = "mrrm";

/// Tolerance on the hysteresis comparison so that a margin of exactly
/// `hysteresis_delta` is not lost to rounding.
const HYSTERESIS_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum FlowPhase {
    Idle,
    /// Unserved flow waiting for its first link.
    Attaching { target: AccessCandidate },
    /// Handover target link being brought up before the request is issued.
    Preparing { target: AccessCandidate },
    HandingOver { handover: String, target: AccessCandidate },
}

#[derive(Clone, Debug)]
struct FlowState {
    flow: Flow<f64>,
    phase: FlowPhase,
    /// The serving link is up and carries the flow.
    connected: bool,
    last_status: Option<(Option<String>, bool, bool)>,
    floor_latched: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Check {
    Pending { request: u64 },
    Allowed,
    Denied,
    TimedOut,
}

/// Current candidate set with the latest quality of each access.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateReport {
    pub entries: Vec<(AccessCandidate, f64)>,
    pub at: SimTime,
}

pub struct Mrrm {
    cfg: MrrmConfig,
    semantics: HandoverSemantics,
    policies: PolicySet<f64>,
    flows: BTreeMap<String, FlowState>,
    reports: BTreeMap<String, LinkQualityReport<f64>>,
    checks: BTreeMap<String, Check>,
    cooldown: BTreeMap<String, SimTime>,
    scans_completed: u64,
    next_handover: u64,
    next_request: u64,
}

impl Mrrm {
    pub fn new(cfg: MrrmConfig, semantics: HandoverSemantics) -> Self {
        Mrrm {
            policies: cfg.policies.clone(),
            cfg,
            semantics,
            flows: BTreeMap::new(),
            reports: BTreeMap::new(),
            checks: BTreeMap::new(),
            cooldown: BTreeMap::new(),
            scans_completed: 0,
            next_handover: 0,
            next_request: 0,
        }
    }

    /// Operators that need no Policies-Check (e.g. the one already serving).
    pub fn preapprove(&mut self, operator: &str) {
        self.checks.insert(operator.to_string(), Check::Allowed);
    }

    pub fn policies(&self) -> &PolicySet<f64> {
        &self.policies
    }

    pub fn flow(&self, id: &str) -> Option<&Flow<f64>> {
        self.flows.get(id).map(|s| &s.flow)
    }

    pub fn phase(&self, id: &str) -> Option<&FlowPhase> {
        self.flows.get(id).map(|s| &s.phase)
    }

    pub fn is_connected(&self, id: &str) -> bool {
        self.flows.get(id).is_some_and(|s| s.connected)
    }

    pub fn flows(&self) -> impl Iterator<Item = &Flow<f64>> {
        self.flows.values().map(|s| &s.flow)
    }

    /// Registers a flow already mapped onto an attached access.
    pub fn add_served_flow(&mut self, flow: Flow<f64>) {
        let connected = flow.serving.is_some();
        self.flows.insert(
            flow.flow_id.clone(),
            FlowState {
                flow,
                phase: FlowPhase::Idle,
                connected,
                last_status: None,
                floor_latched: false,
            },
        );
    }

    /// Most demanding service class among active flows.
    pub fn active_class(&self) -> Option<ServiceClass> {
        self.flows.values().map(|s| s.flow.service_class).min()
    }

    pub fn candidate_report(&self, now: SimTime) -> Result<CandidateReport, MrrmError> {
        if self.scans_completed == 0 {
            return Err(MrrmError::NoScanYet);
        }
        Ok(CandidateReport {
            entries: self
                .reports
                .values()
                .map(|r| (r.candidate.clone(), r.quality))
                .collect(),
            at: now,
        })
    }

    /// Ranked list for one flow over the admissible reports.
    pub fn ranked_list(&self, flow_id: &str, now: SimTime) -> Option<RankedList<f64>> {
        let st = self.flows.get(flow_id)?;
        Some(self.rank(&st.flow, now))
    }

    fn rank(&self, flow: &Flow<f64>, now: SimTime) -> RankedList<f64> {
        let pool: Vec<LinkQualityReport<f64>> = self
            .reports
            .values()
            .filter(|r| self.checks.get(&r.candidate.operator_id) == Some(&Check::Allowed))
            .filter(|r| self.cooldown.get(&r.candidate.cell_id).is_none_or(|until| now >= *until))
            .cloned()
            .collect();
        select_access(
            flow,
            &pool,
            &self.policies,
            &self.cfg.capabilities,
            &self.cfg.selection,
            now,
        )
    }

    pub fn start(&mut self, gll: &mut Gll, ctx: &mut Ctx) {
        gll.set_active_class(self.active_class());
        let ids: Vec<String> = self.flows.keys().cloned().collect();
        for id in ids {
            self.record_status(&id, false, ctx);
        }
    }

    pub fn on_policy_timeout(&mut self, operator: &str, request: u64, ctx: &mut Ctx) {
        if self.checks.get(operator) == Some(&Check::Pending { request }) {
            self.checks.insert(operator.to_string(), Check::TimedOut);
            let rec = ctx
                .note(MRRM_SOURCE, RecordKind::Log)
                .with("what", "policies-check-timeout")
                .with("operator", operator)
                .with("request", request);
            ctx.record(rec);
        }
    }

    pub fn on_trigger(&mut self, t: &Trigger, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let e: &Event = t;
        match e.event_type.as_str() {
            types::FLOW_ARRIVAL => {
                let Some(spec) = FlowSpec::from_payload(&e.payload) else {
                    return self.ignore(e, "malformed flow", ctx);
                };
                if self.flows.contains_key(&spec.flow_id) {
                    return self.ignore(e, "duplicate flow", ctx);
                }
                self.add_served_flow(spec.to_flow());
                gll.set_active_class(self.active_class());
            }
            types::FLOW_DEPARTURE => {
                let Some(id) = e.text("flow") else { return };
                self.remove_flow(id, gll, env, ctx);
                gll.set_active_class(self.active_class());
            }
            types::LINK_QUALITY_REPORT => {
                let Some(r) = report_from_event(e) else { return };
                self.ensure_checked(&r.candidate, ctx);
                self.reports.insert(r.candidate.cell_id.clone(), r);
                let last = e.num("batch_index").zip(e.num("batch_size")).is_some_and(|(i, n)| i + 1.0 >= n);
                if !(last && e.flag("periodic") == Some(true)) {
                    return;
                }
                self.check_quality_floor(gll, env, ctx);
            }
            types::SCAN_COMPLETE => {
                self.scans_completed += 1;
                self.retry_timed_out();
                self.ensure_all_checked(ctx);
                self.publish_candidate_report(ctx);
            }
            types::NEW_ACCESS_DETECTED => {
                let Some(r) = report_from_event(e) else { return };
                self.retry_timed_out();
                self.ensure_checked(&r.candidate, ctx);
                self.reports.insert(r.candidate.cell_id.clone(), r);
                self.publish_candidate_report(ctx);
            }
            types::ACCESS_LOST => {
                let Some(cell) = e.text("cell") else { return };
                self.reports.remove(cell);
            }
            types::LINK_UP => {
                let Some(cell) = e.text("cell") else { return };
                self.on_link_up(cell, gll, env, ctx);
            }
            types::ATTACH_FAILED => {
                let Some(cell) = e.text("cell") else { return };
                self.put_on_cooldown(cell, ctx.now);
                for st in self.flows.values_mut() {
                    if matches!(&st.phase, FlowPhase::Attaching { target } | FlowPhase::Preparing { target } if target.cell_id == cell) {
                        st.phase = FlowPhase::Idle;
                    }
                }
            }
            types::LINK_DOWN => {
                let Some(cell) = e.text("cell") else { return };
                if e.text("reason") == Some("lost") {
                    self.reports.remove(cell);
                }
                for st in self.flows.values_mut() {
                    if st.flow.serving.as_ref().is_some_and(|s| s.cell_id == cell) {
                        st.connected = false;
                    }
                    if matches!(&st.phase, FlowPhase::Attaching { target } | FlowPhase::Preparing { target } if target.cell_id == cell) {
                        st.phase = FlowPhase::Idle;
                    }
                }
            }
            types::HANDOVER_COMPLETE => {
                let Some(ho) = e.text("handover") else { return };
                self.on_handover_complete(ho, gll, env, ctx);
            }
            types::HANDOVER_FAILED => {
                let Some(ho) = e.text("handover") else { return };
                self.on_handover_failed(ho, gll, env, ctx);
            }
            types::QOS_UNSATISFIED => {
                self.spontaneous_scan("qos-unsatisfied", gll, env, ctx);
            }
            types::POLICY_CHANGED => self.apply_policy_change(e, ctx),
            types::POLICIES_CHECK_ANSWER => {
                let Some(op) = e.text("operator") else { return };
                let verdict = e.text("verdict").and_then(Verdict::parse).unwrap_or_default();
                self.checks.insert(
                    op.to_string(),
                    match verdict {
                        Verdict::Allow => Check::Allowed,
                        Verdict::Deny => Check::Denied,
                    },
                );
                if let (Some(rat), Some(pref)) = (e.text("rat"), e.num("preference")) {
                    self.policies.set_preference(op, &Rat::new(rat), pref);
                }
            }
            _ => return self.ignore(e, "unhandled type", ctx),
        }
        self.decide(gll, env, ctx);
    }

    fn ignore(&self, e: &Event, why: &str, ctx: &mut Ctx) {
        let rec = ctx
            .note(MRRM_SOURCE, RecordKind::Log)
            .with("what", "ignored")
            .with("event", e.event_type.as_str())
            .with("why", why);
        ctx.record(rec);
    }

    fn put_on_cooldown(&mut self, cell: &str, now: SimTime) {
        self.cooldown.insert(cell.to_string(), now + self.cfg.cooldown_ms);
    }

    fn retry_timed_out(&mut self) {
        self.checks.retain(|_, c| *c != Check::TimedOut);
    }

    fn ensure_all_checked(&mut self, ctx: &mut Ctx) {
        let cands: Vec<AccessCandidate> = self.reports.values().map(|r| r.candidate.clone()).collect();
        for c in &cands {
            self.ensure_checked(c, ctx);
        }
    }

    /// Issues a Policies-Check-Request the first time an operator is seen.
    fn ensure_checked(&mut self, c: &AccessCandidate, ctx: &mut Ctx) {
        if self.checks.contains_key(&c.operator_id) {
            return;
        }
        self.next_request += 1;
        let request = self.next_request;
        self.checks.insert(c.operator_id.clone(), Check::Pending { request });
        ctx.publish(
            Event::new(types::POLICIES_CHECK_REQUEST, MRRM_SOURCE)
                .with("operator", c.operator_id.as_str())
                .with("rat", c.rat.as_str())
                .with("cell", c.cell_id.as_str())
                .with("request", request),
        );
        ctx.schedule_in(
            self.cfg.policy_check_timeout_ms,
            Wakeup::PolicyTimeout {
                operator: c.operator_id.clone(),
                request,
            },
        );
    }

    fn publish_candidate_report(&self, ctx: &mut Ctx) {
        let Ok(report) = self.candidate_report(ctx.now) else { return };
        let cells: Vec<&str> = report.entries.iter().map(|(c, _)| c.cell_id.as_str()).collect();
        let best = report.entries.iter().map(|(_, q)| *q).fold(0.0, f64::max);
        let mut ev = Event::new(types::CANDIDATE_REPORT, MRRM_SOURCE)
            .with("count", report.entries.len())
            .with("cells", cells.join(","))
            .with("quality", best);
        for (c, q) in &report.entries {
            ev.set(format!("quality.{}", c.cell_id), *q);
        }
        ctx.publish(ev);
    }

    fn apply_policy_change(&mut self, e: &Event, ctx: &mut Ctx) {
        let p = &mut self.policies;
        if let Some(op) = e.text("deny_operator") {
            p.deny_operator(op);
        }
        if let Some(op) = e.text("allow_operator") {
            p.allow_operator(op);
        }
        if let (Some(op), Some(rat), Some(pref)) = (e.text("operator"), e.text("rat"), e.num("preference")) {
            p.set_preference(op, &Rat::new(rat), pref);
        }
        if let Some(level) = e.num("min_security_level") {
            p.min_security_level = level.clamp(0.0, 3.0) as u8;
        }
        if let Some(cap) = e.num("max_cost_per_mb") {
            p.max_cost_per_mb = (cap >= 0.0).then_some(cap);
        }
        if let Some(roaming) = e.flag("roaming_allowed") {
            p.roaming_allowed = roaming;
        }
        let rec = ctx
            .note(MRRM_SOURCE, RecordKind::Log)
            .with("what", "policy-applied")
            .with("source", e.source.as_str());
        ctx.record(rec);
    }

    fn check_quality_floor(&mut self, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let floor = self.cfg.selection.quality_floor;
        let mut below = false;
        for st in self.flows.values_mut() {
            let Some(serving) = st.flow.serving.as_ref().filter(|_| st.connected && st.phase == FlowPhase::Idle) else {
                continue;
            };
            let Some(q) = self.reports.get(&serving.cell_id).map(|r| r.quality) else { continue };
            if q < floor {
                if !st.floor_latched {
                    st.floor_latched = true;
                    below = true;
                }
            } else {
                st.floor_latched = false;
            }
        }
        if below {
            self.spontaneous_scan("quality-floor", gll, env, ctx);
        }
    }

    fn spontaneous_scan(&mut self, why: &str, gll: &mut Gll, env: &Environment, ctx: &mut Ctx) {
        let started = gll.request_scan(ScanMode::Full, env, ctx);
        let rec = ctx
            .note(MRRM_SOURCE, RecordKind::Decision)
            .with("action", "scan")
            .with("mode", ScanMode::Full.as_str())
            .with("why", why)
            .with("started", started);
        ctx.record(rec);
    }

    fn remove_flow(&mut self, id: &str, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let Some(st) = self.flows.remove(id) else { return };
        let mut cells: Vec<String> = st.flow.serving.iter().map(|c| c.cell_id.clone()).collect();
        if let FlowPhase::HandingOver { target, .. } = &st.phase {
            cells.push(target.cell_id.clone());
        }
        for cell in cells {
            gll.release(id, &cell, env);
            self.detach_if_unused(&cell, gll, env, ctx);
        }
        let rec = ctx
            .note(MRRM_SOURCE, RecordKind::Status)
            .with("flow", id)
            .with("serving", "")
            .with("connected", false)
            .with("feasible", false)
            .with("departed", true);
        ctx.record(rec);
    }

    fn in_use(&self, cell: &str) -> bool {
        self.in_use_except(cell, None)
    }

    fn in_use_except(&self, cell: &str, except: Option<&str>) -> bool {
        self.flows.iter().filter(|(id, _)| Some(id.as_str()) != except).any(|(_, st)| {
            st.flow.serving.as_ref().is_some_and(|s| s.cell_id == cell)
                || match &st.phase {
                    FlowPhase::Idle => false,
                    FlowPhase::Attaching { target }
                    | FlowPhase::Preparing { target }
                    | FlowPhase::HandingOver { target, .. } => target.cell_id == cell,
                }
        })
    }

    fn detach_if_unused(&mut self, cell: &str, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        if gll.is_attached(cell) && !self.in_use(cell) {
            let _ = gll.detach(cell, env, ctx);
        }
    }

    fn on_link_up(&mut self, cell: &str, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let waiting: Vec<(String, bool)> = self
            .flows
            .iter()
            .filter_map(|(id, st)| match &st.phase {
                FlowPhase::Attaching { target } if target.cell_id == cell => Some((id.clone(), false)),
                FlowPhase::Preparing { target } if target.cell_id == cell => Some((id.clone(), true)),
                _ => None,
            })
            .collect();
        for (id, handover) in waiting {
            let target = match &self.flows[&id].phase {
                FlowPhase::Attaching { target } | FlowPhase::Preparing { target } => target.clone(),
                _ => continue,
            };
            self.flows.get_mut(&id).expect("flow present").phase = FlowPhase::Idle;
            if handover {
                self.request_handover(&id, target, gll, env, ctx);
            } else {
                self.map_onto(&id, target, gll, env, ctx);
            }
        }
    }

    fn on_handover_complete(&mut self, ho: &str, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let Some((id, target)) = self.find_handover(ho) else { return };
        let st = self.flows.get_mut(&id).expect("flow present");
        let source = st.flow.serving.replace(target);
        st.phase = FlowPhase::Idle;
        st.connected = true;
        st.floor_latched = false;
        if let Some(src) = source {
            gll.release(&id, &src.cell_id, env);
            self.detach_if_unused(&src.cell_id, gll, env, ctx);
        }
    }

    fn on_handover_failed(&mut self, ho: &str, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let Some((id, target)) = self.find_handover(ho) else { return };
        self.flows.get_mut(&id).expect("flow present").phase = FlowPhase::Idle;
        gll.release(&id, &target.cell_id, env);
        self.put_on_cooldown(&target.cell_id, ctx.now);
        self.detach_if_unused(&target.cell_id, gll, env, ctx);
    }

    fn find_handover(&self, ho: &str) -> Option<(String, AccessCandidate)> {
        self.flows.iter().find_map(|(id, st)| match &st.phase {
            FlowPhase::HandingOver { handover, target } if handover == ho => Some((id.clone(), target.clone())),
            _ => None,
        })
    }

    /// One selection round over all flows in flow-id order. Residual resources
    /// are re-checked against what earlier flows took in the same round.
    pub fn decide(&mut self, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let now = ctx.now;
        let mut taken: BTreeMap<String, u64> = BTreeMap::new();
        let ids: Vec<String> = self.flows.keys().cloned().collect();
        for id in ids {
            let st = &self.flows[&id];
            let list = self.rank(&st.flow, now);
            let feasible = !list.is_empty();
            if st.phase == FlowPhase::Idle {
                let demand = st.flow.resource_demand;
                let serving = st.flow.serving.clone();
                let connected = st.connected;
                let fits = |c: &AccessCandidate| {
                    Some(c) == serving.as_ref()
                        || self.reports.get(&c.cell_id).is_some_and(|r| {
                            r.raw.free_resources >= taken.get(&c.cell_id).copied().unwrap_or(0) + demand
                        })
                };
                let head = list.entries.iter().find(|e| fits(&e.candidate)).cloned();
                let serving_score = match (&serving, connected) {
                    (Some(s), true) => list.score_of(s).unwrap_or(0.0),
                    _ => 0.0,
                };
                if let Some(head) = head {
                    let is_serving = Some(&head.candidate) == serving.as_ref();
                    let action = match (&serving, is_serving, connected) {
                        (None, _, _) | (Some(_), true, false) => Some("attach"),
                        (Some(_), true, true) => None,
                        (Some(_), false, true) if head.score - serving_score < self.cfg.selection.hysteresis_delta - HYSTERESIS_EPS => None,
                        (Some(_), false, _) => Some("handover"),
                    };
                    if let Some(action) = action {
                        let rec = ctx
                            .note(MRRM_SOURCE, RecordKind::Decision)
                            .with("flow", id.as_str())
                            .with("action", action)
                            .with("target", head.candidate.cell_id.as_str())
                            .with("score", head.score)
                            .with("serving_score", serving_score)
                            .with("serving", serving.as_ref().map_or("", |s| s.cell_id.as_str()));
                        ctx.record(rec);
                        *taken.entry(head.candidate.cell_id.clone()).or_default() += demand;
                        if action == "attach" {
                            self.attach_flow(&id, head.candidate, gll, env, ctx);
                        } else {
                            self.begin_handover(&id, head.candidate, gll, env, ctx);
                        }
                    }
                }
            }
            self.record_status(&id, feasible, ctx);
        }
    }

    fn record_status(&mut self, id: &str, feasible: bool, ctx: &mut Ctx) {
        let Some(st) = self.flows.get_mut(id) else { return };
        let status = (
            st.flow.serving.as_ref().map(|s| s.cell_id.clone()),
            st.connected,
            feasible,
        );
        if st.last_status.as_ref() == Some(&status) {
            return;
        }
        let rec = ctx
            .note(MRRM_SOURCE, RecordKind::Status)
            .with("flow", id)
            .with("serving", status.0.clone().unwrap_or_default())
            .with("connected", status.1)
            .with("feasible", status.2);
        ctx.record(rec);
        st.last_status = Some(status);
    }

    fn attach_flow(&mut self, id: &str, target: AccessCandidate, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        if gll.is_attached(&target.cell_id) {
            self.map_onto(id, target, gll, env, ctx);
            return;
        }
        match gll.attach(&target.cell_id, env, ctx) {
            Ok(AttachOutcome::Started | AttachOutcome::InProgress) => {
                self.flows.get_mut(id).expect("flow present").phase = FlowPhase::Attaching { target };
            }
            Ok(AttachOutcome::AlreadyAttached) => self.map_onto(id, target, gll, env, ctx),
            Err(_) => self.put_on_cooldown(&target.cell_id, ctx.now),
        }
    }

    /// Reserves resources on an attached access and makes it the serving one.
    fn map_onto(&mut self, id: &str, target: AccessCandidate, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let demand = self.flows[id].flow.resource_demand;
        if gll.reserve(id, &target.cell_id, demand, env).is_err() {
            self.put_on_cooldown(&target.cell_id, ctx.now);
            self.detach_if_unused(&target.cell_id, gll, env, ctx);
            return;
        }
        let st = self.flows.get_mut(id).expect("flow present");
        let old = st.flow.serving.replace(target);
        st.connected = true;
        st.floor_latched = false;
        if let Some(old) = old {
            self.detach_if_unused(&old.cell_id, gll, env, ctx);
        }
    }

    fn begin_handover(&mut self, id: &str, target: AccessCandidate, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        if self.semantics == HandoverSemantics::BreakBeforeMake {
            let st = self.flows.get_mut(id).expect("flow present");
            st.connected = false;
            if let Some(src) = st.flow.serving.clone() {
                gll.release(id, &src.cell_id, env);
                if gll.is_attached(&src.cell_id) && !self.in_use_except(&src.cell_id, Some(id)) {
                    let _ = gll.detach(&src.cell_id, env, ctx);
                }
            }
        }
        if gll.is_attached(&target.cell_id) {
            self.request_handover(id, target, gll, env, ctx);
            return;
        }
        match gll.attach(&target.cell_id, env, ctx) {
            Ok(AttachOutcome::AlreadyAttached) => self.request_handover(id, target, gll, env, ctx),
            Ok(_) => self.flows.get_mut(id).expect("flow present").phase = FlowPhase::Preparing { target },
            Err(_) => self.put_on_cooldown(&target.cell_id, ctx.now),
        }
    }

    /// Holds target resources and asks the mobility function to move the flow.
    fn request_handover(&mut self, id: &str, target: AccessCandidate, gll: &mut Gll, env: &mut Environment, ctx: &mut Ctx) {
        let demand = self.flows[id].flow.resource_demand;
        if gll.reserve(id, &target.cell_id, demand, env).is_err() {
            self.put_on_cooldown(&target.cell_id, ctx.now);
            self.detach_if_unused(&target.cell_id, gll, env, ctx);
            return;
        }
        self.next_handover += 1;
        let handover = format!("ho-{}", self.next_handover);
        let st = self.flows.get_mut(id).expect("flow present");
        let from = st.flow.serving.as_ref().map_or(String::new(), |s| s.cell_id.clone());
        ctx.publish(
            Event::new(types::HANDOVER_EXECUTION_REQUEST, MRRM_SOURCE)
                .with("handover", handover.as_str())
                .with("flow", id)
                .with("from", from)
                .with("to", target.cell_id.as_str())
                .with("to_rat", target.rat.as_str())
                .with("to_operator", target.operator_id.as_str()),
        );
        st.phase = FlowPhase::HandingOver { handover, target };
    }
}
