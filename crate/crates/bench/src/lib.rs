//! Benchmark fixtures shared by the criterion targets.

use reebforge_core::corpus::corpus;
use reebforge_core::{synthesize, validate, Synthesis, ValidatedSpec};

pub const PREC: u32 = 128;

/// Validated corpus entries whose names appear in `names`.
pub fn fixtures(names: &[&str]) -> Vec<(&'static str, ValidatedSpec)> {
    corpus().into_iter().filter(|(n, _)| names.contains(n)).map(|(n, s)| (n, validate(&s).expect("corpus spec validates"))).collect()
}

pub fn synthesized(names: &[&str]) -> Vec<(&'static str, ValidatedSpec, Synthesis)> {
    fixtures(names)
        .into_iter()
        .map(|(n, v)| {
            let syn = synthesize(&v, PREC).expect("corpus spec synthesizes");
            (n, v, syn)
        })
        .collect()
}
