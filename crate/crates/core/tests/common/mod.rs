#![allow(dead_code)]

use lattice_probe_core::pattern::Pattern;
use lattice_probe_core::{FormalConcept, FormalContext};
use rand::seq::index::sample;
use rand::Rng;

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Each cell incident independently with probability `p`.
pub fn bernoulli_context<R: Rng>(rng: &mut R, n: usize, k: usize, p: f64) -> FormalContext {
    FormalContext::from_fn(ids("g", n), ids("m", k), |_, _| rng.gen_bool(p)).unwrap()
}

/// Exactly `round(density * n * k)` incident cells at random positions.
pub fn exact_density_context<R: Rng>(rng: &mut R, n: usize, k: usize, density: f64) -> FormalContext {
    let cells = (density * (n * k) as f64).round() as usize;
    let chosen: Vec<usize> = sample(rng, n * k, cells).into_vec();
    FormalContext::from_fn(ids("obj", n), ids("attr", k), |g, m| chosen.contains(&(g * k + m))).unwrap()
}

/// Closure of every object subset, deduplicated.
pub fn powerset_concepts(ctx: &FormalContext) -> Vec<FormalConcept> {
    let n = ctx.num_objects();
    assert!(n <= 20);
    let mut out: Vec<FormalConcept> = Vec::new();
    for mask in 0u32..(1 << n) {
        let objs: Vec<usize> = (0..n).filter(|g| mask >> g & 1 == 1).collect();
        let c = ctx.closure(&objs).unwrap();
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

pub fn patterns() -> Vec<Pattern> {
    vec![
        Pattern::parse("p0", "[object] is a thing that can [attribute] .").unwrap(),
        Pattern::parse("p1", "to [attribute] is typical of [object] .").unwrap(),
    ]
}
