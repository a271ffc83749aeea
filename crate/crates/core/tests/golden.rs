//! Golden regression: the committed demonstration-scenario log must stay
//! byte-stable across releases.

use ibc::config::parse_config;
use ibc::{run_closed_loop, ControllerChoice};

#[test]
fn demonstration_scenario_log_is_byte_stable() {
    let cfg = parse_config(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../configs/demo.cfg"
        ))
        .unwrap(),
    )
    .unwrap();
    let log = run_closed_loop(&cfg, ControllerChoice::Cbc).unwrap();
    let golden = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/demo_cbc_golden.csv"
    ))
    .unwrap();
    let fresh = log.to_csv();
    assert_eq!(fresh.len(), golden.len(), "log length drifted");
    if fresh != golden {
        for (k, (a, b)) in fresh.lines().zip(golden.lines()).enumerate() {
            assert_eq!(a, b, "first drift at line {}", k + 1);
        }
        panic!("logs differ");
    }
}
