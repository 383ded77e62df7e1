//! Frozen synthetic schedule for seed 1 under the default configuration.

use condloc_core::synth::{generate_scenario, ScenarioConfig};

const SEED1_SCHEDULE: [(u16, f64, f64); 15] = [
    (2, 2.7, 8.1),
    (4, 14.3, 33.5),
    (14, 37.3, 54.9),
    (1, 64.9, 84.6),
    (15, 87.8, 99.6),
    (5, 108.7, 114.2),
    (11, 116.2, 131.9),
    (10, 138.5, 144.4),
    (8, 152.6, 160.0),
    (12, 162.5, 179.8),
    (7, 187.7, 196.0),
    (3, 199.3, 206.1),
    (13, 210.0, 218.2),
    (6, 225.4, 234.2),
    (9, 242.0, 248.3),
];

#[test]
fn seed1_default_schedule_is_frozen() {
    let s = generate_scenario(1, "seed1", &ScenarioConfig::default()).unwrap();
    assert_eq!(s.num_clips, 478);
    let got: Vec<(u16, f64, f64)> = s
        .schedule
        .iter()
        .map(|a| (a.class_id.index() as u16, a.start_s, a.end_s))
        .collect();
    assert_eq!(got, SEED1_SCHEDULE);
}

#[test]
fn seed1_schedule_respects_config_ranges() {
    let mut prev_end = 0.0;
    for &(_, start, end) in &SEED1_SCHEDULE {
        assert!((5.0..=20.0).contains(&(end - start)));
        assert!((2.0..=10.0 + 1e-9).contains(&(start - prev_end)));
        prev_end = end;
    }
    let mut classes: Vec<u16> = SEED1_SCHEDULE.iter().map(|a| a.0).collect();
    classes.sort();
    assert_eq!(classes, (1..=15).collect::<Vec<_>>());
}
