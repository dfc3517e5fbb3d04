use aero_core::allocator::{run_step_aero, run_step_fixed, FixedMode};
use aero_core::oracle::{
    make_pool, write_trace, DifficultySpec, LengthDist, ReplaySource, RecordingSource, SyntheticOracle,
};
use aero_core::{AeroConfig, QueryId};

fn oracle(seed: u64) -> SyntheticOracle {
    let pool = make_pool(&DifficultySpec::paperlike_1_5b(), 300, seed).unwrap();
    SyntheticOracle::new(pool, LengthDist::Uniform { min: 50, max: 900 }, seed).unwrap()
}

fn batch(o: &SyntheticOracle, n: usize) -> Vec<QueryId> {
    o.pool().ids().take(n).cloned().collect()
}

#[test]
fn recorded_aero_step_replays_identically() {
    let cfg = AeroConfig { seed: 5, ..Default::default() };
    let o = oracle(5);
    let b = batch(&o, 120);
    let mut rec = RecordingSource::new(o);
    let live: Vec<_> = (0..3).map(|step| run_step_aero(&b, &mut rec, &cfg, step).unwrap()).collect();

    let mut buf = Vec::new();
    write_trace(rec.records(), &mut buf).unwrap();
    let mut replay = ReplaySource::parse(buf.as_slice()).unwrap();
    assert_eq!(replay.steps(), vec![0, 1, 2]);
    for (step, expected) in live.iter().enumerate() {
        assert_eq!(replay.queries_at(step as u64), b.as_slice());
        let again = run_step_aero(&b, &mut replay, &cfg, step as u64).unwrap();
        assert_eq!(&again, expected);
    }
}

#[test]
fn recorded_fixed_step_replays_identically() {
    let o = oracle(9);
    let b = batch(&o, 50);
    let mut rec = RecordingSource::new(o);
    let live = run_step_fixed(&b, &mut rec, 16, FixedMode::DapoFilter, 0).unwrap();
    let mut buf = Vec::new();
    write_trace(rec.records(), &mut buf).unwrap();
    assert_eq!(buf.iter().filter(|&&c| c == b'\n').count(), 50 * 16);
    let mut replay = ReplaySource::parse(buf.as_slice()).unwrap();
    assert_eq!(run_step_fixed(&b, &mut replay, 16, FixedMode::DapoFilter, 0).unwrap(), live);
}

#[test]
fn replaying_a_short_trace_at_a_larger_size_fails() {
    let o = oracle(2);
    let b = batch(&o, 10);
    let mut rec = RecordingSource::new(o);
    run_step_fixed(&b, &mut rec, 8, FixedMode::Grpo, 0).unwrap();
    let mut buf = Vec::new();
    write_trace(rec.records(), &mut buf).unwrap();
    let mut replay = ReplaySource::parse(buf.as_slice()).unwrap();
    assert!(run_step_fixed(&b, &mut replay, 16, FixedMode::Grpo, 0).is_err());
}
