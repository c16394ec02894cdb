use std::fs::File;

use autoda_core::dsl::built_in_final;
use autoda_core::engine::{
    boundary_attack_proposal, run_attack, AttackConfig, AttackProblem, ProgramProposal, Proposal,
};
use autoda_core::report::{
    read_trace_csv, write_trace_csv, ComparisonTable, EvalReport, DEFAULT_EPSILON,
};
use autoda_core::victims::{sphere_instances, EvalInstance, SphereSetup};
use autoda_core::AttackTrace;

const CHECKPOINTS: [u64; 3] = [250, 500, 1000];

fn attack_all(
    instances: &[EvalInstance],
    mut make: impl FnMut() -> Box<dyn Proposal>,
) -> Vec<AttackTrace> {
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let config = AttackConfig {
                max_queries: 1000,
                seed: i as u64,
                ..AttackConfig::default()
            };
            let problem = AttackProblem {
                original: &inst.original,
                original_label: inst.label,
                start: &inst.start,
            };
            run_attack(inst.oracle.as_ref(), problem, make().as_mut(), &config).unwrap()
        })
        .collect()
}

#[test]
fn report_recomputes_from_trace_files() {
    let instances = sphere_instances(16, 5, 3, SphereSetup::default());
    let traces = attack_all(&instances, || {
        Box::new(ProgramProposal::new(built_in_final()))
    });
    let direct = EvalReport::from_traces("final", &traces, &CHECKPOINTS, DEFAULT_EPSILON);

    let dir = tempfile::tempdir().unwrap();
    for (i, t) in traces.iter().enumerate() {
        let f = File::create(dir.path().join(format!("trace_{i}.csv"))).unwrap();
        write_trace_csv(f, &t.points).unwrap();
    }
    let read: Vec<_> = (0..traces.len())
        .map(|i| {
            read_trace_csv(File::open(dir.path().join(format!("trace_{i}.csv"))).unwrap()).unwrap()
        })
        .collect();
    let slices: Vec<&[_]> = read.iter().map(Vec::as_slice).collect();
    let rebuilt = EvalReport::from_points("final", &slices, &CHECKPOINTS, DEFAULT_EPSILON).unwrap();
    assert_eq!(rebuilt, direct);

    // Independent recomputation of the checkpoint statistics.
    for (c, &q) in CHECKPOINTS.iter().enumerate() {
        let mut d: Vec<f64> = traces
            .iter()
            .map(|t| {
                t.points
                    .iter()
                    .filter(|p| p.query_index <= q)
                    .map(|p| p.d_min)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|x| x * x).sum::<f64>() / n - mean * mean;
        d.sort_by(f64::total_cmp);
        let s = &direct.stats[c];
        assert_eq!(s.queries, q);
        assert!((s.mean - mean).abs() < 1e-12);
        assert!((s.std - var.max(0.0).sqrt()).abs() < 1e-6);
        assert_eq!(s.median, d[2]);
        let wins = d.iter().filter(|&&x| x < DEFAULT_EPSILON).count() as f64;
        assert_eq!(s.asr, 100.0 * wins / n);
    }

    let json = direct.to_json();
    assert_eq!(EvalReport::from_json(&json).unwrap(), direct);
}

#[test]
fn infinite_threshold_round_trips() {
    let instances = sphere_instances(8, 2, 1, SphereSetup::default());
    let traces = attack_all(&instances, || {
        Box::new(ProgramProposal::new(built_in_final()))
    });
    let report = EvalReport::from_traces("x", &traces, &CHECKPOINTS, f64::INFINITY);
    let json = report.to_json();
    assert!(json.contains("\"epsilon\": \"inf\""), "{json}");
    let back = EvalReport::from_json(&json).unwrap();
    assert_eq!(back, report);
    assert!(back.stats.iter().all(|s| s.asr == 100.0));
}

#[test]
fn comparison_marks_the_better_attack() {
    let instances = sphere_instances(16, 4, 5, SphereSetup::default());
    let ours = EvalReport::from_traces(
        "final",
        &attack_all(&instances, || {
            Box::new(ProgramProposal::new(built_in_final()))
        }),
        &CHECKPOINTS,
        DEFAULT_EPSILON,
    );
    let baseline = EvalReport::from_traces(
        "boundary",
        &attack_all(&instances, || Box::new(boundary_attack_proposal())),
        &CHECKPOINTS,
        DEFAULT_EPSILON,
    );
    let table = ComparisonTable::from_reports(&[ours.clone(), baseline.clone()]).unwrap();
    let csv = table.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "attack,mean_250,std_250,median_250,asr_250,mean_500,std_500,median_500,asr_500,mean_1000,std_1000,median_1000,asr_1000"
    );
    assert!(lines.next().unwrap().starts_with("final,"));
    assert!(lines.next().unwrap().starts_with("boundary,"));
    let text = table.to_text();
    assert!(text.contains('*'), "{text}");

    let mut other = baseline;
    other.checkpoints = vec![1, 2, 3];
    assert!(ComparisonTable::from_reports(&[ours, other]).is_err());
}
