//! End-to-end acceptance checks. Prints one PASS/FAIL line per check and
//! exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{bernoulli_context, exact_density_context, ids, patterns, powerset_concepts};
use lattice_probe_core::eval::{
    average_precision, eval_concept_classification, eval_reconstruction, mean_reciprocal_rank, RankDirection,
};
use lattice_probe_core::gibbs::{gibbs_generate, GibbsSpec, JointProvider};
use lattice_probe_core::pipeline::{binarize, normalize_minmax_log, normalize_sigmoid};
use lattice_probe_core::rng::seeded_rng;
use lattice_probe_core::synthetic::{convergence_experiment, generate_corpus, learn_context, ConvergenceSpec, CorpusSpec};
use lattice_probe_core::{
    build_lattice, enumerate_concepts, FormalContext, GoldContext, PooledContext, ScoreMatrix,
};
use rand::Rng;

type Check = Result<String, String>;
type NamedCheck = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = seeded_rng(11);
    for i in 0..200 {
        let n = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=10);
        let p = rng.gen_range(0.1..0.9);
        let ctx = bernoulli_context(&mut rng, n, k, p);
        let mut fast = enumerate_concepts(&ctx).map_err(|e| e.to_string())?;
        let mut slow = powerset_concepts(&ctx);
        fast.sort_by(|a, b| a.extent.cmp(&b.extent));
        slow.sort_by(|a, b| a.extent.cmp(&b.extent));
        ensure(fast == slow, format!("context {i} ({n}x{k}) differs from closure oracle"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!("200 contexts in {took:.2?}"))
}

fn identity_law() -> Check {
    for n in 2..=10 {
        let ctx = FormalContext::from_fn(ids("g", n), ids("m", n), |g, m| g == m).unwrap();
        let lat = build_lattice(enumerate_concepts(&ctx).unwrap()).unwrap();
        ensure(lat.len() == n + 2, format!("n={n}: {} concepts", lat.len()))?;
        ensure(lat.atoms().len() == n, format!("n={n}: {} atoms", lat.atoms().len()))?;
        ensure(lat.covers.len() == 2 * n, format!("n={n}: {} covers", lat.covers.len()))?;
    }
    Ok("n = 2..=10".into())
}

fn hasse_correctness() -> Check {
    let mut rng = seeded_rng(12);
    for i in 0..100 {
        let n = rng.gen_range(1..=10);
        let k = rng.gen_range(1..=8);
        let ctx = bernoulli_context(&mut rng, n, k, 0.4);
        let lat = build_lattice(enumerate_concepts(&ctx).unwrap()).unwrap();
        let c = lat.len();
        let mut reach = vec![vec![false; c]; c];
        for (a, row) in reach.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(lo, hi) in &lat.covers {
            reach[lo][hi] = true;
        }
        for m in 0..c {
            for a in 0..c {
                for b in 0..c {
                    if reach[a][m] && reach[m][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
        for (a, row) in reach.iter().enumerate() {
            for (b, &reachable) in row.iter().enumerate() {
                ensure(reachable == lat.leq(a, b), format!("context {i}: order mismatch at ({a}, {b})"))?;
            }
        }
    }
    Ok("100 contexts".into())
}

fn convergence() -> Check {
    let start = Instant::now();
    let ctx = exact_density_context(&mut seeded_rng(13), 20, 10, 0.3);
    let spec = ConvergenceSpec::new(vec![100, 1_000, 10_000, 100_000], 10, 14);
    let table = convergence_experiment(&ctx, &patterns(), &spec).map_err(|e| e.to_string())?;
    let small = table.distances_at(100);
    let large = table.distances_at(100_000);
    let mean = large.iter().sum::<f64>() / large.len() as f64;
    let improved = small.iter().zip(&large).filter(|(s, l)| l < s).count();
    let took = start.elapsed();
    ensure(mean < 0.05, format!("mean distance at n=1e5 is {mean}"))?;
    ensure(improved * 100 >= 95 * large.len(), format!("{improved}/{} trials improved", large.len()))?;
    ensure(took < Duration::from_secs(30), format!("took {took:?}"))?;
    Ok(format!("mean {mean:.4} at n=1e5, {improved}/10 improved, {took:.2?}"))
}

/// Learned context of a noisy synthetic world.
fn noisy_learned_context() -> PooledContext {
    let ctx = exact_density_context(&mut seeded_rng(15), 20, 10, 0.3);
    let mut spec = CorpusSpec::new(2_000, 16);
    spec.noise_rate = 0.2;
    let corpus = generate_corpus(&ctx, &patterns(), &spec).unwrap();
    learn_context(&corpus, ctx.objects(), ctx.attributes()).unwrap()
}

fn normalization_ablation() -> Check {
    let learned = noisy_learned_context();
    let minmax = normalize_minmax_log(&learned).map_err(|e| e.to_string())?;
    let sigmoid = normalize_sigmoid(&learned, 1.0, None).map_err(|e| e.to_string())?;
    let mut last = usize::MAX;
    for step in 0..=20 {
        let alpha = step as f64 / 20.0;
        let count = binarize(&minmax, alpha).unwrap().incidence_count();
        ensure(count <= last, format!("positive count rises at alpha={alpha}"))?;
        last = count;
    }
    let jac = |p: &PooledContext, a: f64, b: f64| {
        lattice_probe_core::pipeline::incidence_jaccard(&binarize(p, a).unwrap(), &binarize(p, b).unwrap()).unwrap()
    };
    let jm = jac(&minmax, 0.6, 0.7);
    let js = jac(&sigmoid, 0.5, 0.6);
    ensure(jm > js, format!("min-max jaccard {jm} <= sigmoid jaccard {js}"))?;
    Ok(format!("jaccard min-max {jm:.3} > sigmoid {js:.3}"))
}

fn scale_invariance() -> Check {
    let mut rng = seeded_rng(17);
    let raw = ScoreMatrix::from_fn(8, 6, |_, _| rng.gen_range(1e-6..1.0));
    let base = PooledContext::new(ids("g", 8), ids("m", 6), raw.clone()).unwrap();
    let scaled = PooledContext::new(ids("g", 8), ids("m", 6), raw.map(|v| v * 10.0)).unwrap();
    for alpha in [0.3, 0.5, 0.6, 0.8] {
        let a = binarize(&normalize_minmax_log(&base).unwrap(), alpha).unwrap();
        let b = binarize(&normalize_minmax_log(&scaled).unwrap(), alpha).unwrap();
        ensure(a == b, format!("binarization differs at alpha={alpha}"))?;
    }
    Ok("c = 10".into())
}

fn gibbs_correctness() -> Check {
    let start = Instant::now();
    let weights = ScoreMatrix::from_rows(&[
        vec![0.20, 0.05, 0.05],
        vec![0.10, 0.25, 0.05],
        vec![0.05, 0.05, 0.20],
    ])
    .unwrap();
    let provider = JointProvider::new(ids("g", 3), ids("m", 3), weights).unwrap();
    let pattern = &patterns()[0];
    let spec = GibbsSpec::new(100_000, 1_000, 18);
    let run = gibbs_generate(&provider, pattern, &spec).map_err(|e| e.to_string())?;
    let truth = provider.object_marginal();
    let mut empirical = [0.0; 3];
    for (g, _) in &run.chain[spec.burn_in..] {
        empirical[provider.objects().iter().position(|o| o == g).unwrap()] += 1.0;
    }
    let total: f64 = empirical.iter().sum();
    let tv = 0.5 * truth.iter().zip(&empirical).map(|(t, e)| (t - e / total).abs()).sum::<f64>();
    let again = gibbs_generate(&provider, pattern, &spec).unwrap();
    let took = start.elapsed();
    ensure(tv < 0.05, format!("total variation {tv}"))?;
    ensure(again.chain == run.chain, "chain not reproducible from seed")?;
    ensure(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!("TV {tv:.4}, {took:.2?}"))
}

/// Ranks by full sort, descending score then identifier.
fn naive_rank(scores: &[f64], ids: &[String], candidates: &[usize], target: usize) -> usize {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(ids[a].cmp(&ids[b])));
    order.iter().position(|&c| c == target).unwrap() + 1
}

fn metric_oracles() -> Check {
    let mrr = mean_reciprocal_rank(&[1, 2, 4]);
    ensure((mrr - 0.58333).abs() < 1e-5 && (mrr - 7.0 / 12.0).abs() < 1e-9, format!("MRR {{1,2,4}} = {mrr}"))?;
    let mut rng = seeded_rng(19);
    let ks = [1, 3, 5];
    for inst in 0..50 {
        let ctx = bernoulli_context(&mut rng, 10, 10, 0.3);
        // coarse grid so that ties occur
        let s = ScoreMatrix::from_fn(10, 10, |_, _| rng.gen_range(0..10) as f64 / 10.0);
        let pooled = PooledContext::new(ids("g", 10), ids("m", 10), s.clone()).unwrap();
        let gold = GoldContext::new(ctx.clone(), None).unwrap();
        let attr_ids = ids("m", 10);
        for filtered in [false, true] {
            let Ok(rep) = eval_reconstruction(&pooled, &gold, RankDirection::Attributes, &ks, filtered) else {
                ensure(ctx.incidence_count() == 0, format!("instance {inst}: unexpected error"))?;
                continue;
            };
            let mut ranks = Vec::new();
            for g in 0..10 {
                let row: Vec<f64> = s.row(g).to_vec();
                for m in (0..10).filter(|&m| ctx.has(g, m)) {
                    let cands: Vec<usize> =
                        (0..10).filter(|&c| c == m || !(filtered && ctx.has(g, c))).collect();
                    ranks.push(naive_rank(&row, &attr_ids, &cands, m));
                }
            }
            let got: Vec<usize> = rep.per_query.iter().map(|q| q.rank.unwrap()).collect();
            ensure(got == ranks, format!("instance {inst}: ranks differ"))?;
            let oracle_mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64;
            ensure(rep.metric("mrr") == Some(oracle_mrr), format!("instance {inst}: mrr"))?;
            for k in ks {
                let hits = ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64;
                ensure(rep.metric(&format!("hit@{k}")) == Some(hits), format!("instance {inst}: hit@{k}"))?;
            }
        }

        let alpha = 0.45;
        let Ok(rep) = eval_concept_classification(&pooled, &gold, alpha) else {
            continue;
        };
        let concepts: Vec<_> = powerset_concepts(&ctx)
            .into_iter()
            .filter(|c| !c.extent.is_empty() && !c.intent.is_empty())
            .collect();
        ensure(concepts.len() == rep.per_query.len(), format!("instance {inst}: concept count"))?;
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        let mut aps = Vec::new();
        for c in &concepts {
            let member_score: Vec<f64> =
                (0..10).map(|g| c.intent.iter().map(|m| s[(g, m)]).fold(1.0, f64::min)).collect();
            for g in 0..10 {
                let pred = c.intent.iter().all(|m| s[(g, m)] > alpha);
                match (pred, c.extent.contains(g)) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    _ => {}
                }
            }
            let obj_ids = ids("g", 10);
            let order: Vec<usize> = {
                let mut o: Vec<usize> = (0..10).collect();
                o.sort_by(|&a, &b| member_score[b].partial_cmp(&member_score[a]).unwrap().then(obj_ids[a].cmp(&obj_ids[b])));
                o
            };
            let mut hits = 0.0;
            let mut sum = 0.0;
            for (i, &g) in order.iter().enumerate() {
                if c.extent.contains(g) {
                    hits += 1.0;
                    sum += hits / (i + 1) as f64;
                }
            }
            aps.push(sum / c.extent.len() as f64);
            let rel: Vec<bool> = order.iter().map(|&g| c.extent.contains(g)).collect();
            ensure(average_precision(&rel) == *aps.last().unwrap(), format!("instance {inst}: AP helper"))?;
        }
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        ensure(rep.metric("f1") == Some(f1), format!("instance {inst}: f1 {:?} vs {f1}", rep.metric("f1")))?;
        let mut got_ap: Vec<f64> = rep.per_query.iter().map(|q| q.average_precision.unwrap()).collect();
        let mut want_ap = aps.clone();
        got_ap.sort_by(f64::total_cmp);
        want_ap.sort_by(f64::total_cmp);
        ensure(got_ap == want_ap, format!("instance {inst}: per-concept AP"))?;
        let map = aps.iter().sum::<f64>() / aps.len() as f64;
        ensure((rep.metric("map").unwrap() - map).abs() < 1e-12, format!("instance {inst}: map"))?;
    }
    Ok(format!("50 instances, MRR {{1,2,4}} = {mrr:.5}"))
}

fn main() -> ExitCode {
    let checks: [NamedCheck; 8] = [
        ("concept enumeration matches closure oracle", oracle_equivalence),
        ("identity context lattice shape", identity_law),
        ("covering relation generates the order", hasse_correctness),
        ("synthetic learner converges", convergence),
        ("min-max normalization is threshold-stable", normalization_ablation),
        ("min-max-log binarization is scale invariant", scale_invariance),
        ("gibbs sampler recovers the object marginal", gibbs_correctness),
        ("metrics match naive implementations", metric_oracles),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
