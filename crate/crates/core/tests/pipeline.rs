use std::fs;
use std::path::Path;

use faultline::io::{read_network, read_partition, write_interactions_csv};
use faultline::partitioner::{overlap_coefficient, ExactConfig, PartitionerError, SolveMethod};
use faultline::pipeline::{
    rerun_manifest, run_pipeline, Manifest, PipelineConfig, PipelineError, MANIFEST_FILE,
    METRICS_FILE, NETWORK_FILE, PARTITION_FILE, RESTARTS_FILE, TIMELINE_FILE, TOPICS_FILE,
};
use faultline::synth::{generate_stream, Burst, PlantedConfig, TemporalConfig};

const DAY: i64 = 86_400;

fn demo_stream(dir: &Path) -> (PlantedConfig, std::path::PathBuf) {
    let mut cfg = PlantedConfig::new(16, 2, 0.5, 0.05, 21);
    cfg.temporal = Some(TemporalConfig {
        start: 1_600_000_000,
        duration: 40 * DAY,
        rate_per_day: 1_500.0,
        bursts: vec![Burst {
            start: 1_600_000_000 + 19 * DAY,
            end: 1_600_000_000 + 31 * DAY,
            sign_noise: 0.0,
        }],
        tags: vec!["a".into(), "b".into()],
    });
    let stream = generate_stream(&cfg).unwrap();
    let path = dir.join("interactions.csv");
    write_interactions_csv(fs::File::create(&path).unwrap(), &stream.interactions).unwrap();
    (cfg, path)
}

fn quick_config(input: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(input);
    cfg.seed = 5;
    cfg.metrics.null_instances = 500;
    cfg.metrics.bootstrap_resamples = 200;
    cfg.partition.k_range = vec![2, 3];
    cfg
}

#[test]
fn end_to_end_run_recovers_planted_groups() {
    let dir = tempfile::tempdir().unwrap();
    let (planted_cfg, input) = demo_stream(dir.path());
    let out = dir.path().join("out");
    let summary = run_pipeline(&quick_config(&input), &out).unwrap();

    for name in [NETWORK_FILE, PARTITION_FILE, METRICS_FILE, TOPICS_FILE, TIMELINE_FILE, RESTARTS_FILE, MANIFEST_FILE] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    assert_eq!(summary.selection.k_star, 2);

    // recovered groups agree with the planted ones on the inferred node set
    let stream = generate_stream(&planted_cfg).unwrap();
    let part = read_partition(fs::read(out.join(PARTITION_FILE)).unwrap().as_slice()).unwrap();
    let planted_pairs: Vec<(String, u32)> = part
        .nodes()
        .ids()
        .iter()
        .map(|id| (id.clone(), stream.planted.group_of_id(id).unwrap() as u32))
        .collect();
    let planted = faultline::signed::Partition::from_pairs(part.nodes().clone(), planted_pairs, 2).unwrap();
    assert_eq!(overlap_coefficient(&part, &planted).unwrap(), 1.0);

    let net = read_network(fs::read(out.join(NETWORK_FILE)).unwrap().as_slice()).unwrap();
    assert_eq!(net.network.node_count(), part.len());
    assert!(net.provenance.prior.is_some());

    // the noiseless burst is perfectly aligned; windows are anchored at the
    // first timestamp, so the one ending 30 days in lies inside the burst
    let timeline = fs::read_to_string(out.join(TIMELINE_FILE)).unwrap();
    let burst_row = timeline
        .lines()
        .find(|l| l.starts_with("2020-10-13"))
        .expect("window ending inside the burst");
    assert_eq!(burst_row.split(',').nth(3), Some("1"));

    let manifest = Manifest::read(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.seeds, summary.manifest.seeds);
    assert_eq!(manifest.outputs.len(), 6);
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (_, input) = demo_stream(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_pipeline(&quick_config(&input), &a).unwrap();
    let manifest = Manifest::read(&a.join(MANIFEST_FILE)).unwrap();
    rerun_manifest(&manifest, &b).unwrap();
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn changed_input_invalidates_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (_, input) = demo_stream(dir.path());
    let out = dir.path().join("out");
    run_pipeline(&quick_config(&input), &out).unwrap();
    let manifest = Manifest::read(&out.join(MANIFEST_FILE)).unwrap();
    let mut text = fs::read_to_string(&input).unwrap();
    text.push_str("x,y,+1,1600000001,\n");
    fs::write(&input, text).unwrap();
    assert!(matches!(
        rerun_manifest(&manifest, &dir.path().join("again")),
        Err(PipelineError::Config(_))
    ));
}

#[test]
fn forced_exact_over_cap_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let (_, input) = demo_stream(dir.path());
    let out = dir.path().join("out");
    let mut cfg = quick_config(&input);
    cfg.partition.solver = SolveMethod::Exact(ExactConfig { max_nodes: Some(4) });
    let err = run_pipeline(&cfg, &out).unwrap_err();
    assert!(matches!(err, PipelineError::Partition(PartitionerError::SizeLimit { cap: 4, .. })));
    assert_eq!(err.stage(), "partition");
    assert!(err.is_user_error());
    assert!(!out.exists());
}

#[test]
fn bad_rows_abort_at_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "rater,author,sign,timestamp\na,b,+1,0\nb,b,-1,1\n").unwrap();
    let err = run_pipeline(&quick_config(&input), &dir.path().join("out")).unwrap_err();
    assert_eq!(err.stage(), "ingest");
    assert!(err.to_string().contains("SELF_RATING"));
    assert!(err.to_string().contains("line 3"));
}
