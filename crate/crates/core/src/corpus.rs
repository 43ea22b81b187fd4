//! Reference specs exercised by the test suites and the benches.

use crate::graph_model::GraphSpec;

/// Named specs covering the torus, small cycles, a five-cycle with a unit
/// multiplicity, handle specs and paths.
pub fn corpus() -> Vec<(&'static str, GraphSpec)> {
    vec![
        ("torus", GraphSpec::circle(&[], 2)),
        ("c222", GraphSpec::circle(&[2, 2, 2], 2)),
        ("c221", GraphSpec::circle(&[2, 2, 1], 2)),
        ("c212", GraphSpec::circle(&[2, 1, 2], 2)),
        ("c2222", GraphSpec::circle(&[2, 2, 2, 2], 2)),
        ("c333", GraphSpec::circle(&[3, 3, 3], 2)),
        ("c32412", GraphSpec::circle(&[3, 2, 4, 1, 2], 2)),
        ("c222_m4", GraphSpec::circle(&[2, 2, 2], 4)),
        ("h212_m5", GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])])),
        ("h222_m5", GraphSpec::circle(&[2, 2, 2], 5).with_handles(&[((1, 2), &[1, 1]), ((3, 1), &[0, 1])])),
        ("h2121_m3", GraphSpec::circle(&[2, 1, 2, 1], 3).with_handles(&[((2, 1), &[1]), ((4, 1), &[1])])),
        ("l1321", GraphSpec::line(&[1, 3, 2, 1], 2)),
        ("l131", GraphSpec::line(&[1, 3, 1], 3)),
        ("l1", GraphSpec::line(&[1], 2)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::validate;

    #[test]
    fn corpus_is_valid() {
        for (name, spec) in corpus() {
            assert!(validate(&spec).is_ok(), "{name}");
        }
    }
}
