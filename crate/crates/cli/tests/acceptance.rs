//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when
//! any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reebforge_core::certificate::{region_identity, regularity};
use reebforge_core::corpus::corpus;
use reebforge_core::graph_model::{reeb_isomorphic, validate, GraphSpec, Mode};
use reebforge_core::layout::{build_arrangement, certify_disjointness};
use reebforge_core::poly::{synthesize, Synthesis};
use reebforge_core::sweep::{brute_oracle_reeb, euler_check, fiber_counts_check, oracle_equivalent, sweep_reeb, verify_morse};

const PREC: u32 = 128;
const SEED: u64 = 20_240_917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn random_cycle(rng: &mut ChaCha8Rng, k: usize, max_a: u32) -> Vec<u32> {
    loop {
        let a: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=max_a)).collect();
        if (0..k).all(|j| !(a[j] == 1 && a[(j + 1) % k] == 1)) {
            return a;
        }
    }
}

/// `2 Σ (a_j - 1) + 4`, plus twice every prescribed handle count.
fn closed_form(spec: &GraphSpec) -> u32 {
    let removed: u32 = spec.multiplicities.iter().map(|a| a - 1).sum();
    let handles: u32 = spec.handles.iter().flatten().flat_map(|h| h.sequence.iter()).sum();
    2 * handles + 2 * removed + 4
}

fn random_handle_spec(rng: &mut ChaCha8Rng) -> GraphSpec {
    let m = [3u32, 4, 5, 7][rng.gen_range(0..4)];
    let stages = ((m - 1) / 2) as usize;
    let k = rng.gen_range(3..=6);
    let a = random_cycle(rng, k, 3);
    let mut entries: Vec<((u32, u32), Vec<u32>)> = Vec::new();
    let mut budget = 4u32;
    for j in 1..=k as u32 {
        for c in 1..=a[j as usize - 1] {
            if budget > 0 && rng.gen_bool(0.3) {
                let seq: Vec<u32> = (0..stages).map(|_| rng.gen_range(0..=1)).collect();
                budget = budget.saturating_sub(seq.iter().sum());
                entries.push(((j, c), seq));
            }
        }
    }
    let refs: Vec<((u32, u32), &[u32])> = entries.iter().map(|(e, s)| (*e, s.as_slice())).collect();
    GraphSpec::circle(&a, m).with_handles(&refs)
}

struct Model {
    name: &'static str,
    spec: GraphSpec,
    syn: Synthesis,
}

fn corpus_models() -> Vec<Model> {
    corpus()
        .into_iter()
        .map(|(name, spec)| {
            let v = validate(&spec).expect("corpus spec validates");
            let syn = synthesize(&v, PREC).expect("corpus spec synthesizes");
            Model { name, spec, syn }
        })
        .collect()
}

fn c1_degree_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let t = Instant::now();
    let mut bad = Vec::new();
    for _ in 0..100 {
        let k = rng.gen_range(3..=12);
        let spec = GraphSpec::circle(&random_cycle(&mut rng, k, 5), 2);
        let ok = validate(&spec).ok().and_then(|v| synthesize(&v, PREC).ok()).is_some_and(|s| s.degree == closed_form(&spec));
        if !ok {
            bad.push(spec.multiplicities.clone());
        }
    }
    let el = t.elapsed();
    outcome(
        bad.is_empty() && el < Duration::from_secs(5),
        format!("{} of 100 random specs exact in {} (limit 5 s){}", 100 - bad.len(), secs(el), fmt_bad(&bad)),
    )
}

fn fmt_bad<T: std::fmt::Debug>(bad: &[T]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing {:?}", &bad[..bad.len().min(3)])
    }
}

fn c2_handle_degree_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let t = Instant::now();
    let (mut tried, mut bad, mut handles) = (0, Vec::new(), 0);
    while tried < 25 {
        let spec = random_handle_spec(&mut rng);
        let Ok(v) = validate(&spec) else { continue };
        tried += 1;
        handles += spec.handles.iter().flatten().flat_map(|h| h.sequence.iter()).sum::<u32>();
        match synthesize(&v, PREC) {
            Ok(s) if s.degree == closed_form(&spec) => {}
            other => bad.push(format!("{:?} m={} -> {:?}", spec.multiplicities, spec.dimension, other.map(|s| s.degree))),
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} of 25 random handle specs exact ({handles} ellipsoids) in {}{}", 25 - bad.len(), secs(t.elapsed()), fmt_bad(&bad)),
    )
}

fn c3_realization(models: &[Model]) -> Outcome {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for m in models {
        let t = Instant::now();
        let ok = validate(&m.spec)
            .ok()
            .and_then(|v| build_arrangement(&v, PREC).ok())
            .and_then(|arr| sweep_reeb(&arr, PREC).ok())
            .is_some_and(|g| reeb_isomorphic(&m.spec, &g));
        let el = t.elapsed();
        slowest = slowest.max(el);
        if !ok || el >= Duration::from_secs(1) {
            bad.push(m.name);
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} of {} corpus specs isomorphic, slowest {} (limit 1 s each){}",
            models.len() - bad.len(),
            models.len(),
            secs(slowest),
            fmt_bad(&bad)
        ),
    )
}

fn c4_oracle(models: &[Model]) -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for m in models {
        let arr = &m.syn.arrangement;
        let ok = match (sweep_reeb(arr, PREC), brute_oracle_reeb(arr, 2048, 512)) {
            (Ok(a), Ok(b)) => {
                let tol = if arr.mode == Mode::Circle { 4.0 / 512.0 } else { 4.0 * (arr.k as f64 + 8.0) / 512.0 };
                oracle_equivalent(&a, &b, arr.mode, tol) && reeb_isomorphic(&m.spec, &b)
            }
            _ => false,
        };
        if !ok {
            bad.push(m.name);
        }
    }
    let el = t.elapsed();
    outcome(
        bad.is_empty() && el < Duration::from_secs(30),
        format!(
            "{} of {} corpus models match at 2048x512 in {} (limit 30 s){}",
            models.len() - bad.len(),
            models.len(),
            secs(el),
            fmt_bad(&bad)
        ),
    )
}

fn c5_region_identity(models: &[Model]) -> Outcome {
    let t = Instant::now();
    let (mut mismatches, mut undecided, mut staged, mut band, mut staged_pts) = (0, 0, 0, 0, 0);
    for m in models {
        let r = region_identity(&m.syn, 100_000, 10_000, 1e-9, SEED, PREC);
        mismatches += r.mismatches;
        undecided += r.undecided;
        band += r.in_band;
        staged += r.staged.iter().map(|s| s.mismatches).sum::<usize>();
        staged_pts += r.staged.iter().map(|s| s.points).sum::<usize>();
    }
    outcome(
        mismatches + undecided + staged == 0,
        format!(
            "{} models x 100000 points: {mismatches} mismatches, {undecided} undecided, {band} in the 1e-9 band; staged: {staged} mismatches over {staged_pts} points; {}",
            models.len(),
            secs(t.elapsed())
        ),
    )
}

fn c6_regularity(models: &[Model]) -> Outcome {
    let t = Instant::now();
    let mut min_margin = f64::INFINITY;
    let mut bad = Vec::new();
    let mut grad_fail = 0;
    for m in models {
        match certify_disjointness(&m.syn.arrangement, PREC) {
            Ok(rep) => {
                if let Some(v) = rep.min_margin_f64() {
                    min_margin = min_margin.min(v);
                    if v <= 1e-6 {
                        bad.push(m.name);
                    }
                }
            }
            Err(_) => bad.push(m.name),
        }
        let r = regularity(&m.syn, 1000, SEED, PREC);
        if r.points != 1000 || r.gradient_nonzero != r.points {
            grad_fail += 1;
            bad.push(m.name);
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "min certified clearance {min_margin:.3e} (limit 1e-6); {} models x 1000 zero-set points, {grad_fail} with a gradient enclosure touching zero; {}{}",
            models.len(),
            secs(t.elapsed()),
            fmt_bad(&bad)
        ),
    )
}

fn c7_morse(models: &[Model]) -> Outcome {
    let mut bad = Vec::new();
    let mut saddles = 0;
    for m in models {
        let want: u32 = 2 * m.spec.multiplicities.iter().map(|a| a - 1).sum::<u32>();
        let ok = verify_morse(&m.syn.arrangement, PREC).is_ok_and(|c| {
            saddles += c.saddle_count;
            c.saddle_count == want && c.pass && c.tangencies_on_vertex_positions && c.per_vertex.iter().all(|v| v.tangencies + v.folds >= 1)
        });
        if !ok {
            bad.push(m.name);
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{saddles} saddles over {} corpus models, every vertex singular, tangencies exactly on vertex positions{}",
            models.len(),
            fmt_bad(&bad)
        ),
    )
}

fn c8_euler(models: &[Model]) -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for m in models.iter().filter(|m| m.spec.mode == Mode::Circle && m.spec.dimension == 2) {
        checked += 1;
        let want = -2 * m.spec.multiplicities.iter().map(|&a| a as i64 - 1).sum::<i64>();
        let ok = euler_check(&m.syn.arrangement, PREC)
            .is_ok_and(|r| r.from_critical_points == r.from_region && r.from_region == want && r.closed_form == want);
        if !ok {
            bad.push(m.name);
        }
    }
    let torus = models.iter().find(|m| m.name == "torus").expect("torus in corpus");
    let torus_ok = torus.syn.degree == 4 && euler_check(&torus.syn.arrangement, PREC).is_ok_and(|r| r.from_critical_points == 0);
    outcome(
        bad.is_empty() && torus_ok,
        format!("{checked} surface models agree on both computations; torus chi 0 and degree 4: {torus_ok}{}", fmt_bad(&bad)),
    )
}

fn c9_fibers(models: &[Model]) -> Outcome {
    let mut bad = Vec::new();
    let mut rows = 0;
    for m in models.iter().filter(|m| m.spec.handles.is_some()) {
        match fiber_counts_check(&m.syn.arrangement, PREC) {
            Ok(t) => {
                rows += t.rows.len();
                if t.rows.iter().any(|r| r.counts != r.expected) {
                    bad.push(m.name.to_string());
                }
            }
            Err(e) => bad.push(format!("{}: {e}", m.name)),
        }
    }
    let h = models.iter().find(|m| m.name == "h212_m5").expect("handle example in corpus");
    let word = fiber_counts_check(&h.syn.arrangement, PREC)
        .ok()
        .and_then(|t| t.rows.into_iter().find(|r| r.channel == [2, 1]))
        .map(|r| r.word)
        .unwrap_or_default();
    let swept = sweep_reeb(&h.syn.arrangement, PREC)
        .ok()
        .and_then(|g| g.edges.into_iter().find(|e| e.channel == [2, 1]))
        .map(|e| e.fiber)
        .unwrap_or_default();
    outcome(
        bad.is_empty() && word == "S¹×S³" && swept == word,
        format!("{rows} channel rows match their sequences; channel (2,1) of (2,1,2), m=5 reads {word:?}{}", fmt_bad(&bad)),
    )
}

fn c10_determinism(suite_start: Instant) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_reebforge");
    let specs = [
        r#"{"mode":"circle","vertices":3,"multiplicities":[2,2,2],"dimension":2}"#,
        r#"{"mode":"circle","vertices":3,"multiplicities":[2,1,2],"dimension":5,"handles":[{"edge":[2,1],"sequence":[1,0]}]}"#,
        r#"{"mode":"line","vertices":5,"multiplicities":[1,3,2,1],"dimension":2}"#,
    ];
    let tmp = std::env::temp_dir().join(format!("reebforge-acceptance-{}", std::process::id()));
    let mut differing = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.join(format!("{i}-{rep}"));
            let ok = Command::new(bin)
                .args(["synthesize", "--inline", spec, "--out", dir.to_str().unwrap()])
                .env_remove("REEBFORGE_PRECISION")
                .status()
                .is_ok_and(|s| s.success())
                && Command::new(bin)
                    .args(["plot", "--arrangement", dir.join("arrangement.json").to_str().unwrap()])
                    .args(["--out", dir.join("plot.svg").to_str().unwrap()])
                    .status()
                    .is_ok_and(|s| s.success());
            let read = |f: &str| fs::read(dir.join(f)).unwrap_or_default();
            outputs.push((ok, ["model.json", "arrangement.json", "certificate.json", "plot.svg"].map(read)));
        }
        if !(outputs[0].0 && outputs[1].0 && outputs[0].1 == outputs[1].1 && outputs[0].1.iter().all(|b| !b.is_empty())) {
            differing.push(i);
        }
    }
    let _ = fs::remove_dir_all(Path::new(&tmp));
    let el = suite_start.elapsed();
    outcome(
        differing.is_empty() && el < Duration::from_secs(60),
        format!("3 specs x 2 runs byte-identical (JSON + SVG); whole suite {} (limit 60 s){}", secs(el), fmt_bad(&differing)),
    )
}

fn main() {
    let start = Instant::now();
    let models = corpus_models();
    let results = [
        ("degree law, no handles", c1_degree_law()),
        ("degree law, handles", c2_handle_degree_law()),
        ("realization", c3_realization(&models)),
        ("oracle equivalence", c4_oracle(&models)),
        ("region identity", c5_region_identity(&models)),
        ("regularity", c6_regularity(&models)),
        ("morse / saddle law", c7_morse(&models)),
        ("euler characteristic", c8_euler(&models)),
        ("fiber counts", c9_fibers(&models)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    let d = c10_determinism(start);
    println!("criterion 10 [{}] determinism: {}", if d.pass { "PASS" } else { "FAIL" }, d.detail);
    failed += !d.pass as usize;
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
