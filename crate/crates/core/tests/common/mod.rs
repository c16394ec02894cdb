#![allow(dead_code)]

pub mod native;
pub mod stub;

use autoda_core::engine::{run_attack_observed, AttackConfig, AttackProblem, Proposal};
use autoda_core::seed::SeededRng;
use autoda_core::victims::EvalInstance;
use autoda_core::{clamp_to_domain, l2_distance, AttackTrace, InputVector};

/// Keeps every point a proposal produced, `None` for failed ones.
pub struct Recording<P> {
    pub inner: P,
    pub proposed: Vec<Option<InputVector>>,
}

impl<P> Recording<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            proposed: Vec::new(),
        }
    }
}

impl<P: Proposal> Proposal for Recording<P> {
    fn propose(
        &mut self,
        current: &InputVector,
        original: &InputVector,
        rng: &mut SeededRng,
        s: f64,
    ) -> Result<InputVector, autoda_core::engine::NumericError> {
        let out = self.inner.propose(current, original, rng, s);
        self.proposed.push(out.as_ref().ok().cloned());
        out
    }

    fn observe(&mut self, improved: bool) {
        self.inner.observe(improved)
    }
}

/// Runs one attack and returns its trace with every violation of the
/// walk's invariants found by re-querying the oracle afterwards.
pub fn checked_attack<P: Proposal>(
    inst: &EvalInstance,
    proposal: P,
    config: &AttackConfig,
) -> (AttackTrace, Vec<String>) {
    let mut recording = Recording::new(proposal);
    let mut improved = Vec::new();
    let problem = AttackProblem {
        original: &inst.original,
        original_label: inst.label,
        start: &inst.start,
    };
    let trace = run_attack_observed(
        inst.oracle.as_ref(),
        problem,
        &mut recording,
        config,
        |it| improved.push(it.improved),
    )
    .expect("attack runs");

    let mut violations = Vec::new();
    for w in trace.points.windows(2) {
        if w[1].d_min > w[0].d_min {
            violations.push(format!("d_min rose at query {}", w[1].query_index));
        }
        if w[1].query_index != w[0].query_index + 1 {
            violations.push(format!("query index jumped at {}", w[1].query_index));
        }
    }
    if trace.queries_used() > config.max_queries {
        violations.push(format!(
            "{} queries over a budget of {}",
            trace.queries_used(),
            config.max_queries
        ));
    }
    if trace.points.len() as u64 != trace.queries_used() {
        violations.push("trace length differs from queries used".into());
    }
    for (i, (point, accepted)) in recording.proposed.iter().zip(&improved).enumerate() {
        if !accepted {
            continue;
        }
        let point = clamp_to_domain(point.clone().expect("accepted proposals exist"));
        if inst.oracle.label_of(&point) == inst.label {
            violations.push(format!("accepted proposal {i} is not adversarial"));
        }
    }
    if inst.oracle.label_of(&trace.final_example) == inst.label {
        violations.push("final example is not adversarial".into());
    }
    let d = l2_distance(&trace.final_example, &inst.original).unwrap();
    if d != trace.final_distance() {
        violations.push(format!(
            "final example at {d}, trace says {}",
            trace.final_distance()
        ));
    }
    (trace, violations)
}
