//! Fixtures shared by the benchmarks in `benches/`.

use polydyn::scenarios::RandomArrayParams;
use polydyn::{ScenarioKind, ScenarioSpec, System};

/// Seeded random-array system with `a_ii` in `(0.05, 0.95)`.
pub fn fixture(n: usize, m: usize, seed: u64) -> System {
    let spec = ScenarioSpec {
        n,
        m,
        seed,
        kind: ScenarioKind::RandomArray(RandomArrayParams {
            extra_edge_prob: 0.05,
            ..Default::default()
        }),
    };
    spec.generate().expect("fixture parameters are valid")
}
