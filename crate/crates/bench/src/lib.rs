//! Benchmark inputs shared by the criterion targets.

use bellbound_core::presets::chsh_tsirelson;
use bellbound_core::quantum::ghz_mabk_behavior;
use bellbound_core::Behavior;

/// Named behaviors, from the two-party CHSH table to the five-party GHZ one.
pub fn workloads() -> Vec<(&'static str, Behavior)> {
    vec![
        ("chsh", chsh_tsirelson()),
        ("mabk3", ghz_mabk_behavior(3).expect("n = 3 is supported")),
        ("mabk5", ghz_mabk_behavior(5).expect("n = 5 is supported")),
    ]
}
