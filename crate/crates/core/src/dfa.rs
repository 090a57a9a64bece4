//! Generic deterministic finite automaton engine plus the concrete
//! LegalEdge contract machine.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// A validated DFA: states, event alphabet, partial transition function,
/// initial state, and absorbing final states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfaSpec {
    states: BTreeSet<String>,
    alphabet: BTreeSet<String>,
    initial: String,
    finals: BTreeSet<String>,
    transitions: BTreeMap<(String, String), String>,
}

/// Construction/load errors for a [`DfaSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecError {
    UnknownState(String),
    UnknownEvent(String),
    DuplicateTransition { from: String, event: String },
    TransitionFromFinal { state: String },
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::UnknownState(s) => write!(f, "state `{s}` not in state set"),
            SpecError::UnknownEvent(e) => write!(f, "event `{e}` not in alphabet"),
            SpecError::DuplicateTransition { from, event } => {
                write!(f, "duplicate transition key ({from}, {event})")
            }
            SpecError::TransitionFromFinal { state } => {
                write!(f, "transition out of final state `{state}`")
            }
        }
    }
}

impl core::error::Error for SpecError {}

/// Errors from stepping a machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepError {
    /// The event is in the alphabet but no transition is defined from the
    /// current state. Signals a contract-integrity violation.
    UndefinedTransition { state: String, event: String },
    /// The event is not in the alphabet at all. A programming error,
    /// distinct from a rejected transition.
    UnknownEvent { event: String },
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::UndefinedTransition { state, event } => {
                write!(f, "no transition from `{state}` on `{event}`")
            }
            StepError::UnknownEvent { event } => write!(f, "event `{event}` not in alphabet"),
        }
    }
}

impl core::error::Error for StepError {}

impl DfaSpec {
    /// Build and validate a spec from its parts.
    pub fn new<S, E, F, T>(
        states: S,
        alphabet: E,
        initial: &str,
        finals: F,
        transitions: T,
    ) -> Result<DfaSpec, SpecError>
    where
        S: IntoIterator,
        S::Item: Into<String>,
        E: IntoIterator,
        E::Item: Into<String>,
        F: IntoIterator,
        F::Item: Into<String>,
        T: IntoIterator<Item = (String, String, String)>,
    {
        let states: BTreeSet<String> = states.into_iter().map(Into::into).collect();
        let alphabet: BTreeSet<String> = alphabet.into_iter().map(Into::into).collect();
        let finals: BTreeSet<String> = finals.into_iter().map(Into::into).collect();

        if !states.contains(initial) {
            return Err(SpecError::UnknownState(initial.to_string()));
        }
        for s in &finals {
            if !states.contains(s) {
                return Err(SpecError::UnknownState(s.clone()));
            }
        }

        let mut table = BTreeMap::new();
        for (from, event, to) in transitions {
            if !states.contains(&from) {
                return Err(SpecError::UnknownState(from));
            }
            if !states.contains(&to) {
                return Err(SpecError::UnknownState(to));
            }
            if !alphabet.contains(&event) {
                return Err(SpecError::UnknownEvent(event));
            }
            if finals.contains(&from) {
                return Err(SpecError::TransitionFromFinal { state: from });
            }
            if table.insert((from.clone(), event.clone()), to).is_some() {
                return Err(SpecError::DuplicateTransition { from, event });
            }
        }

        Ok(DfaSpec {
            states,
            alphabet,
            initial: initial.to_string(),
            finals,
            transitions: table,
        })
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(String::as_str)
    }

    pub fn alphabet(&self) -> impl Iterator<Item = &str> {
        self.alphabet.iter().map(String::as_str)
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn is_final(&self, state: &str) -> bool {
        self.finals.contains(state)
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// The image of (state, event), if defined.
    pub fn delta(&self, state: &str, event: &str) -> Option<&str> {
        self.transitions
            .get(&(state.to_string(), event.to_string()))
            .map(String::as_str)
    }

    /// Fold `events` over the transition function from the initial state.
    /// Instead of failing, reports the index of the first event that could
    /// not be applied.
    pub fn replay<'a, I>(&self, events: I) -> Result<String, ReplayFailure>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut current = self.initial.clone();
        for (index, event) in events.into_iter().enumerate() {
            if !self.alphabet.contains(event) {
                return Err(ReplayFailure {
                    index,
                    error: StepError::UnknownEvent {
                        event: event.to_string(),
                    },
                });
            }
            match self.delta(&current, event) {
                Some(next) => current = next.to_string(),
                None => {
                    return Err(ReplayFailure {
                        index,
                        error: StepError::UndefinedTransition {
                            state: current,
                            event: event.to_string(),
                        },
                    })
                }
            }
        }
        Ok(current)
    }

    /// Serialize to the interchange JSON document.
    pub fn to_json(&self) -> String {
        let wire = DfaSpecWire {
            states: self.states.iter().cloned().collect(),
            alphabet: self.alphabet.iter().cloned().collect(),
            initial: self.initial.clone(),
            finals: self.finals.iter().cloned().collect(),
            transitions: self
                .transitions
                .iter()
                .map(|((from, event), to)| TransitionWire {
                    from: from.clone(),
                    event: event.clone(),
                    to: to.clone(),
                })
                .collect(),
        };
        crate::canon::to_canonical_string(&wire)
    }

    /// Load from the interchange JSON document, revalidating every
    /// invariant. Duplicate (from, event) keys are a load error.
    pub fn from_json(json: &str) -> Result<DfaSpec, LoadError> {
        let wire: DfaSpecWire = serde_json::from_str(json).map_err(|_| LoadError::Malformed)?;
        DfaSpec::new(
            wire.states,
            wire.alphabet,
            &wire.initial,
            wire.finals,
            wire.transitions
                .into_iter()
                .map(|t| (t.from, t.event, t.to)),
        )
        .map_err(LoadError::Invalid)
    }
}

#[derive(Serialize, Deserialize)]
struct DfaSpecWire {
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: String,
    finals: Vec<String>,
    transitions: Vec<TransitionWire>,
}

#[derive(Serialize, Deserialize)]
struct TransitionWire {
    from: String,
    event: String,
    to: String,
}

/// Outcome of a failed [`DfaSpec::replay`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayFailure {
    /// Index of the first event that could not be applied.
    pub index: usize,
    pub error: StepError,
}

/// JSON load errors.
#[derive(Debug)]
pub enum LoadError {
    Malformed,
    Invalid(SpecError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Malformed => write!(f, "malformed DFA document"),
            LoadError::Invalid(e) => write!(f, "invalid DFA document: {e}"),
        }
    }
}

impl core::error::Error for LoadError {}

/// One applied transition in a machine's history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub event: String,
    pub from: String,
    pub to: String,
    pub tick: u64,
}

/// A live machine: a spec, the current state, and the append-only history
/// that reproduces it. Single-writer; cheap to clone and move across
/// threads.
#[derive(Debug, Clone)]
pub struct MachineInstance {
    spec: Arc<DfaSpec>,
    current: String,
    history: Vec<HistoryEntry>,
}

impl MachineInstance {
    pub fn new(spec: Arc<DfaSpec>) -> MachineInstance {
        let current = spec.initial().to_string();
        MachineInstance {
            spec,
            current,
            history: Vec::new(),
        }
    }

    pub fn spec(&self) -> &Arc<DfaSpec> {
        &self.spec
    }

    pub fn current(&self) -> &str {
        &self.current
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn is_final(&self) -> bool {
        self.spec.is_final(&self.current)
    }

    /// Apply one event at the given tick. On success the machine moves and
    /// the history gains one entry; on failure nothing changes.
    pub fn step(&mut self, event: &str, tick: u64) -> Result<&str, StepError> {
        if !self.spec.alphabet.contains(event) {
            return Err(StepError::UnknownEvent {
                event: event.to_string(),
            });
        }
        let Some(next) = self.spec.delta(&self.current, event) else {
            return Err(StepError::UndefinedTransition {
                state: self.current.clone(),
                event: event.to_string(),
            });
        };
        let next = next.to_string();
        self.history.push(HistoryEntry {
            event: event.to_string(),
            from: core::mem::replace(&mut self.current, next.clone()),
            to: next,
            tick,
        });
        Ok(&self.current)
    }
}

/// Lifecycle states of a LegalEdge charging contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractState {
    Drafted,
    Signed,
    Active,
    Triggered,
    Updated,
    Disputed,
    Completed,
    Terminated,
}

impl ContractState {
    pub const ALL: [ContractState; 8] = [
        ContractState::Drafted,
        ContractState::Signed,
        ContractState::Active,
        ContractState::Triggered,
        ContractState::Updated,
        ContractState::Disputed,
        ContractState::Completed,
        ContractState::Terminated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ContractState::Drafted => "Drafted",
            ContractState::Signed => "Signed",
            ContractState::Active => "Active",
            ContractState::Triggered => "Triggered",
            ContractState::Updated => "Updated",
            ContractState::Disputed => "Disputed",
            ContractState::Completed => "Completed",
            ContractState::Terminated => "Terminated",
        }
    }

    pub fn from_str(s: &str) -> Option<ContractState> {
        ContractState::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Events that drive the contract machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractEvent {
    SigningRequestReceived,
    ContractExecutionTriggered,
    TransactionConditionMet,
    RegulatoryUpdateDetected,
    DisputeFiled,
    ResolutionUpheld,
    ResolutionTerminated,
    AllObligationsMet,
    ViolationDetected,
    ClauseExecuted,
    ComplianceApplied,
}

impl ContractEvent {
    pub const ALL: [ContractEvent; 11] = [
        ContractEvent::SigningRequestReceived,
        ContractEvent::ContractExecutionTriggered,
        ContractEvent::TransactionConditionMet,
        ContractEvent::RegulatoryUpdateDetected,
        ContractEvent::DisputeFiled,
        ContractEvent::ResolutionUpheld,
        ContractEvent::ResolutionTerminated,
        ContractEvent::AllObligationsMet,
        ContractEvent::ViolationDetected,
        ContractEvent::ClauseExecuted,
        ContractEvent::ComplianceApplied,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ContractEvent::SigningRequestReceived => "SigningRequestReceived",
            ContractEvent::ContractExecutionTriggered => "ContractExecutionTriggered",
            ContractEvent::TransactionConditionMet => "TransactionConditionMet",
            ContractEvent::RegulatoryUpdateDetected => "RegulatoryUpdateDetected",
            ContractEvent::DisputeFiled => "DisputeFiled",
            ContractEvent::ResolutionUpheld => "ResolutionUpheld",
            ContractEvent::ResolutionTerminated => "ResolutionTerminated",
            ContractEvent::AllObligationsMet => "AllObligationsMet",
            ContractEvent::ViolationDetected => "ViolationDetected",
            ContractEvent::ClauseExecuted => "ClauseExecuted",
            ContractEvent::ComplianceApplied => "ComplianceApplied",
        }
    }

    pub fn from_str(s: &str) -> Option<ContractEvent> {
        ContractEvent::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

use ContractEvent as Ev;
use ContractState as St;

/// The 11 transitions of the LegalEdge contract machine. Resolution of a
/// dispute is split into two events (upheld vs terminated) to keep the
/// machine deterministic, and Triggered/Updated return to Active so no
/// non-final state deadlocks.
pub const LEGALEDGE_TRANSITIONS: [(ContractState, ContractEvent, ContractState); 11] = [
    (St::Drafted, Ev::SigningRequestReceived, St::Signed),
    (St::Signed, Ev::ContractExecutionTriggered, St::Active),
    (St::Active, Ev::TransactionConditionMet, St::Triggered),
    (St::Active, Ev::RegulatoryUpdateDetected, St::Updated),
    (St::Active, Ev::DisputeFiled, St::Disputed),
    (St::Disputed, Ev::ResolutionUpheld, St::Active),
    (St::Disputed, Ev::ResolutionTerminated, St::Terminated),
    (St::Active, Ev::AllObligationsMet, St::Completed),
    (St::Active, Ev::ViolationDetected, St::Terminated),
    (St::Triggered, Ev::ClauseExecuted, St::Active),
    (St::Updated, Ev::ComplianceApplied, St::Active),
];

/// Build the fixed LegalEdge contract machine.
pub fn legaledge_spec() -> DfaSpec {
    DfaSpec::new(
        ContractState::ALL.iter().map(|s| s.as_str()),
        ContractEvent::ALL.iter().map(|e| e.as_str()),
        St::Drafted.as_str(),
        [St::Completed.as_str(), St::Terminated.as_str()],
        LEGALEDGE_TRANSITIONS.iter().map(|&(from, ev, to)| {
            (
                from.as_str().to_string(),
                ev.as_str().to_string(),
                to.as_str().to_string(),
            )
        }),
    )
    .expect("LegalEdge machine is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legaledge_examples() {
        let spec = legaledge_spec();
        assert_eq!(
            spec.delta("Drafted", "SigningRequestReceived"),
            Some("Signed")
        );
        assert_eq!(spec.delta("Active", "ViolationDetected"), Some("Terminated"));
        // Finals are absorbing: nothing is defined out of Completed.
        for ev in ContractEvent::ALL {
            assert_eq!(spec.delta("Completed", ev.as_str()), None);
        }
    }

    #[test]
    fn step_moves_and_records() {
        let spec = Arc::new(legaledge_spec());
        let mut m = MachineInstance::new(spec);
        m.step("SigningRequestReceived", 1).unwrap();
        m.step("ContractExecutionTriggered", 2).unwrap();
        assert_eq!(m.current(), "Active");
        m.step("DisputeFiled", 3).unwrap();
        assert_eq!(m.current(), "Disputed");
        assert_eq!(m.history().len(), 3);
        assert_eq!(m.history()[2].from, "Active");

        // Replaying the recorded history reproduces the current state.
        let replayed = m
            .spec()
            .replay(m.history().iter().map(|h| h.event.as_str()))
            .unwrap();
        assert_eq!(replayed, m.current());
    }

    #[test]
    fn undefined_vs_unknown() {
        let spec = Arc::new(legaledge_spec());
        let mut m = MachineInstance::new(spec);
        m.step("SigningRequestReceived", 0).unwrap();
        let before = m.current().to_string();
        match m.step("DisputeFiled", 1) {
            Err(StepError::UndefinedTransition { state, event }) => {
                assert_eq!(state, "Signed");
                assert_eq!(event, "DisputeFiled");
            }
            other => panic!("expected UndefinedTransition, got {other:?}"),
        }
        assert_eq!(m.current(), before, "failed step must not move");
        assert!(matches!(
            m.step("NotAnEvent", 2),
            Err(StepError::UnknownEvent { .. })
        ));
    }

    #[test]
    fn replay_examples() {
        let spec = legaledge_spec();
        let none: [&str; 0] = [];
        assert_eq!(spec.replay(none).unwrap(), "Drafted");
        assert_eq!(
            spec.replay([
                "SigningRequestReceived",
                "ContractExecutionTriggered",
                "AllObligationsMet",
            ])
            .unwrap(),
            "Completed"
        );
        let fail = spec
            .replay(["SigningRequestReceived", "SigningRequestReceived"])
            .unwrap_err();
        assert_eq!(fail.index, 1);
        assert!(matches!(fail.error, StepError::UndefinedTransition { .. }));
    }

    #[test]
    fn duplicate_transition_rejected_on_load() {
        let json = r#"{
            "states": ["A", "B"],
            "alphabet": ["go"],
            "initial": "A",
            "finals": ["B"],
            "transitions": [
                {"from": "A", "event": "go", "to": "B"},
                {"from": "A", "event": "go", "to": "A"}
            ]
        }"#;
        assert!(matches!(
            DfaSpec::from_json(json),
            Err(LoadError::Invalid(SpecError::DuplicateTransition { .. }))
        ));
    }

    #[test]
    fn final_state_cannot_have_outgoing_edges() {
        let err = DfaSpec::new(
            ["A", "B"],
            ["go"],
            "A",
            ["B"],
            [("B".into(), "go".into(), "A".into())],
        )
        .unwrap_err();
        assert!(matches!(err, SpecError::TransitionFromFinal { .. }));
    }
}
