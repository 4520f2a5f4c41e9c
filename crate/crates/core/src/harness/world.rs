//! One self-contained run: the event loop wiring the environment, bus, link
//! layer, MRRM, mobility executor and policy store together.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mobility::{MobilityDelayModel, MobilityExecutor, MOBILITY_CONSUMER};
use super::{compute_stats, report_breakdown, BreakdownReport, RunStats};
use crate::gll::Gll;
use crate::mrrm::{Mrrm, MRRM_SOURCE};
use crate::simenv::{
    apply_action, Action, Ctx, EnvChange, Environment, MrrmLocation, RecordKind, Scenario, Scheduler, SimError,
    SimTime, Trace, TraceRecord, Wakeup,
};
use crate::trg::{types, Bus, Event, PolicyStore, Subscription, Trigger, UciRecord, TRG_SOURCE};

pub const ENV_SOURCE: &str = "env";

/// Bound on events published within one step; exceeding it means a
/// feedback loop between consumers.
const MAX_EVENTS_PER_STEP: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("scenario cannot be set up: {0}")]
    Setup(String),
    #[error(transparent)]
    Invariant(#[from] SimError),
}

#[derive(Debug)]
pub struct RunOutput {
    pub trace: Trace,
    pub stats: RunStats,
    pub breakdown: Vec<BreakdownReport>,
}

pub struct Simulation {
    scenario: Scenario,
    sched: Scheduler<Wakeup>,
    env: Environment,
    bus: Bus,
    gll: Gll,
    mrrm: Mrrm,
    mobility: MobilityExecutor,
    store: PolicyStore,
    trace: Trace,
    rng: ChaCha8Rng,
    outbox: VecDeque<Event>,
    actions: Vec<Action>,
}

fn subscribe(bus: &mut Bus, sub: Subscription) -> Result<(), RunError> {
    bus.subscribe(sub).map(|_| ()).map_err(|e| RunError::Setup(e.to_string()))
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, RunError> {
        let actions = scenario
            .timeline
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_action(i))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| RunError::Setup(e.to_string()))?;
        let mut env = Environment::new(scenario.cells.iter().cloned());
        let mut bus = Bus::new();
        subscribe(
            &mut bus,
            Subscription::new(
                MRRM_SOURCE,
                [
                    types::FLOW_ARRIVAL,
                    types::FLOW_DEPARTURE,
                    types::LINK_QUALITY_REPORT,
                    types::SCAN_COMPLETE,
                    types::NEW_ACCESS_DETECTED,
                    types::ACCESS_LOST,
                    types::LINK_UP,
                    types::LINK_DOWN,
                    types::ATTACH_FAILED,
                    types::HANDOVER_COMPLETE,
                    types::HANDOVER_FAILED,
                    types::QOS_UNSATISFIED,
                    types::POLICY_CHANGED,
                    types::POLICIES_CHECK_ANSWER,
                ],
            ),
        )?;
        subscribe(&mut bus, Subscription::new("gll", [types::REPORTING_INTERVAL_CHANGE]))?;
        subscribe(
            &mut bus,
            Subscription::new(
                MOBILITY_CONSUMER,
                [types::HANDOVER_EXECUTION_REQUEST, types::LINK_DOWN, types::ACCESS_LOST],
            ),
        )?;
        subscribe(&mut bus, Subscription::new(PolicyStore::CONSUMER, [types::POLICIES_CHECK_REQUEST]))?;
        for s in &scenario.trg.subscriptions {
            subscribe(&mut bus, s.clone())?;
        }
        for d in &scenario.trg.drop_rules {
            bus.add_drop_rule(d.clone());
        }
        for c in &scenario.trg.correlations {
            bus.define_correlation(c.clone()).map_err(|e| RunError::Setup(e.to_string()))?;
        }
        let builtin = [
            UciRecord::new("multiaccess/candidates", MRRM_SOURCE, "candidate access report"),
            UciRecord::new("multiaccess/link-quality", "gll", "per-access link quality reports"),
        ];
        for u in builtin.into_iter().chain(scenario.trg.ucis.iter().cloned()) {
            bus.registry_mut()
                .register(u)
                .map_err(|e| RunError::Setup(e.to_string()))?;
        }

        let caps = &scenario.mrrm.capabilities;
        let mut gll = Gll::new(
            scenario.gll.clone(),
            scenario.mrrm_location == MrrmLocation::Network,
            caps.supported_rats.clone(),
        );
        let mut mrrm = Mrrm::new(scenario.mrrm.clone(), scenario.mobility.semantics);
        for spec in &scenario.flows {
            let mut flow = spec.to_flow();
            if let Some(cell_id) = &spec.serving {
                let cell = env
                    .cell(cell_id)
                    .ok_or_else(|| RunError::Setup(format!("unknown serving cell `{cell_id}`")))?;
                flow.serving = Some(cell.candidate());
                mrrm.preapprove(&cell.operator_id);
                gll.preattach(cell);
                gll.reserve(&spec.flow_id, cell_id, spec.resource_demand, &mut env)
                    .map_err(|e| RunError::Setup(e.to_string()))?;
            }
            mrrm.add_served_flow(flow);
        }
        let mobility = MobilityExecutor::new(
            MobilityDelayModel {
                delays_ms: scenario.delays(),
            },
            scenario.mobility.jitter_ms,
        );
        let mut sched = Scheduler::new();
        for (i, a) in scenario.ordered_timeline() {
            sched.schedule(a.at, Wakeup::Action(i))?;
        }
        Ok(Simulation {
            store: PolicyStore::new(scenario.trg.policy_store.clone()),
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            scenario,
            sched,
            env,
            bus,
            gll,
            mrrm,
            mobility,
            trace: Trace::new(),
            outbox: VecDeque::new(),
            actions,
        })
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn bus(&self) -> &Bus {
        &self.bus
    }

    pub fn run(mut self) -> Result<RunOutput, RunError> {
        let end = SimTime(self.scenario.duration());
        let start = TraceRecord::new(SimTime::ZERO, "harness", RecordKind::Status)
            .with("what", "start")
            .with("scenario", self.scenario.name.as_str())
            .with("seed", self.scenario.seed);
        self.trace.push(start);
        {
            let Simulation {
                sched,
                env,
                gll,
                mrrm,
                trace,
                rng,
                outbox,
                ..
            } = &mut self;
            let mut ctx = Ctx {
                now: SimTime::ZERO,
                sched,
                outbox,
                trace,
                rng,
            };
            mrrm.start(gll, &mut ctx);
            gll.start(env, &mut ctx);
        }
        self.drain(SimTime::ZERO)?;
        while let Some((at, wakeup)) = self.sched.pop_until(end) {
            self.step(at, wakeup)?;
            self.drain(at)?;
            self.env.check_conservation()?;
        }
        self.sched.advance_to(end)?;
        let fin = TraceRecord::new(end, "harness", RecordKind::Status)
            .with("what", "end")
            .with("energy", self.gll.energy());
        self.trace.push(fin);
        let stats = compute_stats(self.trace.records());
        let breakdown = report_breakdown(self.trace.records());
        Ok(RunOutput {
            trace: self.trace,
            stats,
            breakdown,
        })
    }

    fn step(&mut self, now: SimTime, wakeup: Wakeup) -> Result<(), RunError> {
        let Simulation {
            sched,
            env,
            gll,
            mrrm,
            mobility,
            trace,
            rng,
            outbox,
            actions,
            ..
        } = self;
        let mut ctx = Ctx {
            now,
            sched,
            outbox,
            trace,
            rng,
        };
        match wakeup {
            Wakeup::Action(i) => {
                let action = &actions[i];
                let rec = ctx
                    .note(ENV_SOURCE, RecordKind::Action)
                    .with("kind", action.kind())
                    .with("target", action.target());
                ctx.record(rec);
                let changes = apply_action(env, action, now, gll.interval_ms())?;
                for change in changes {
                    apply_change(change, env, gll, &mut ctx)?;
                }
            }
            Wakeup::RampPoint { cell, field, value } => {
                let action = Action::SetCellField {
                    cell: cell.clone(),
                    field,
                    value,
                };
                apply_action(env, &action, now, gll.interval_ms())?;
                let rec = ctx
                    .note(ENV_SOURCE, RecordKind::Action)
                    .with("kind", "ramp-point")
                    .with("target", cell)
                    .with("field", field.as_str())
                    .with("value", value);
                ctx.record(rec);
            }
            Wakeup::GllTick { generation } => gll.on_tick(generation, env, &mut ctx),
            Wakeup::ScanDone { scan } => gll.on_scan_done(scan, env, &mut ctx),
            Wakeup::AttachDone { cell, attempt } => gll.on_attach_done(&cell, attempt, env, &mut ctx),
            Wakeup::PolicyTimeout { operator, request } => {
                mrrm.on_policy_timeout(&operator, request, &mut ctx)
            }
            Wakeup::Publish(event) => ctx.publish(event),
            Wakeup::TracePoint { handover, point } => mobility.on_trace_point(&handover, point, &mut ctx),
            Wakeup::End => {}
        }
        Ok(())
    }

    /// Publishes queued events until the step is quiet. Consumers run
    /// synchronously and anything they publish joins the end of the queue.
    fn drain(&mut self, now: SimTime) -> Result<(), RunError> {
        let mut published = 0usize;
        while let Some(event) = self.outbox.pop_front() {
            published += 1;
            if published > MAX_EVENTS_PER_STEP {
                return Err(SimError::Invariant(format!("more than {MAX_EVENTS_PER_STEP} events at t={now}")).into());
            }
            let publication = self
                .bus
                .publish(event, now)
                .map_err(|e| SimError::Invariant(format!("publish rejected: {e}")))?;
            for step in publication.steps {
                let mut rec = TraceRecord::new(now, TRG_SOURCE, RecordKind::Event)
                    .with("event", step.event.event_type.as_str())
                    .with("src", step.event.source.as_str())
                    .with("synthetic", step.synthetic);
                if step.dropped {
                    rec = rec.with("dropped", true);
                }
                for (k, v) in &step.event.payload {
                    rec = rec.with(format!("p.{k}"), v.clone());
                }
                self.trace.push(rec);
                for trigger in step.triggers {
                    let rec = TraceRecord::new(now, TRG_SOURCE, RecordKind::Delivery)
                        .with("event", trigger.event.event_type.as_str())
                        .with("consumer", trigger.delivered_to.as_str())
                        .with("synthetic", trigger.synthetic);
                    self.trace.push(rec);
                    self.route(&trigger, now);
                }
            }
        }
        Ok(())
    }

    fn route(&mut self, trigger: &Trigger, now: SimTime) {
        let Simulation {
            sched,
            env,
            gll,
            mrrm,
            mobility,
            store,
            trace,
            rng,
            outbox,
            ..
        } = self;
        let mut ctx = Ctx {
            now,
            sched,
            outbox,
            trace,
            rng,
        };
        match trigger.delivered_to.as_str() {
            MRRM_SOURCE => mrrm.on_trigger(trigger, gll, env, &mut ctx),
            "gll" => gll.on_trigger(trigger, &mut ctx),
            MOBILITY_CONSUMER => mobility.on_trigger(trigger, &mut ctx),
            PolicyStore::CONSUMER => {
                if let Some(answer) = store.answer(&trigger.event) {
                    match store.answer_delay_ms() {
                        0 => ctx.publish(answer),
                        d => {
                            ctx.schedule_in(d, Wakeup::Publish(answer));
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

fn apply_change(change: EnvChange, env: &mut Environment, gll: &mut Gll, ctx: &mut Ctx) -> Result<(), RunError> {
    match change {
        EnvChange::FieldChanged { .. } => {}
        EnvChange::CoverageChanged { .. } | EnvChange::RouterAdvertisement { .. } => {
            gll.on_env_change(&change, env, ctx)
        }
        EnvChange::FlowArrived(spec) => {
            let mut ev = Event::new(types::FLOW_ARRIVAL, ENV_SOURCE);
            ev.payload = spec.to_payload();
            ctx.publish(ev);
        }
        EnvChange::FlowDeparted { flow } => {
            ctx.publish(Event::new(types::FLOW_DEPARTURE, ENV_SOURCE).with("flow", flow));
        }
        EnvChange::RampPlanned { cell, field, points } => {
            for (at, value) in points {
                ctx.sched.schedule(
                    at,
                    Wakeup::RampPoint {
                        cell: cell.clone(),
                        field,
                        value,
                    },
                )?;
            }
        }
        EnvChange::UpperTrigger {
            event_type,
            source,
            payload,
        } => {
            let mut ev = Event::new(event_type, source);
            ev.payload = payload;
            ctx.publish(ev);
        }
    }
    Ok(())
}

/// Runs a validated scenario to completion.
pub fn run_scenario(scenario: Scenario) -> Result<RunOutput, RunError> {
    Simulation::new(scenario)?.run()
}
