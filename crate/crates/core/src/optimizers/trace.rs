//! Per-evaluation audit log and its CSV/JSON forms.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    EnergyEval,
    ParameterUpdate,
    SweepBoundary,
    PoolSelection,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::EnergyEval => "energy_eval",
            EventKind::ParameterUpdate => "parameter_update",
            EventKind::SweepBoundary => "sweep_boundary",
            EventKind::PoolSelection => "pool_selection",
        }
    }
}

/// One scored pool candidate inside a `pool_selection` event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub pool_index: usize,
    pub label: String,
    /// Attainable energy (energy criterion) or gradient magnitude (gradient criterion).
    pub score: f64,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    /// Evaluator counter after the event; the 1-based index of an `energy_eval`.
    pub eval_index: u64,
    pub kind: EventKind,
    pub param_index: Option<usize>,
    pub theta: Option<f64>,
    pub energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<RankedCandidate>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OptimizerTrace {
    pub events: Vec<TraceEvent>,
}

/// Run description stored next to the events in the JSON form.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub fixture: String,
    pub optimizer: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    metadata: &'a RunMetadata,
    evaluations: u64,
    events: &'a [TraceEvent],
}

fn field<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl OptimizerTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn record(&mut self, eval_index: u64, kind: EventKind, param: Option<usize>, theta: Option<f64>, energy: Option<f64>) {
        self.push(TraceEvent { eval_index, kind, param_index: param, theta, energy, ranking: None });
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.of_kind(kind).count()
    }

    /// `eval_index,kind,param_index,theta,energy`; absent fields are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eval_index,kind,param_index,theta,energy\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.eval_index,
                e.kind.as_str(),
                field(e.param_index),
                field(e.theta),
                field(e.energy)
            );
        }
        out
    }

    pub fn to_json(&self, metadata: &RunMetadata) -> String {
        let evaluations = self.count(EventKind::EnergyEval) as u64;
        let doc = TraceDocument { metadata, evaluations, events: &self.events };
        serde_json::to_string_pretty(&doc).expect("trace serialises")
    }
}
