//! Scoring reconstructed contexts against gold contexts.
//!
//! Two tasks are supported. *Reconstruction* ranks, for every gold pair, the
//! true item among all candidates of one axis and reports MRR and hit@k.
//! *Concept classification* uses the non-trivial concepts of the gold
//! context as labels: an object is predicted to belong to a concept when its
//! score exceeds `alpha` for every attribute of the intent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::context::FormalContext;
use crate::error::{Axis, Error, Result};
use crate::lattice::{enumerate_concepts, ConceptLattice};
use crate::matrix::ScoreMatrix;
use crate::pipeline::PooledContext;

/// Tolerance between declared and actual gold density.
pub const DENSITY_TOLERANCE: f64 = 0.01;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldMetadata {
    pub name: String,
    /// Fraction of incident cells, in `[0, 1]`.
    pub density: Option<f64>,
    /// Token arity of objects, e.g. `"single-token"`.
    pub object_tokens: Option<String>,
    pub attribute_tokens: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldContext {
    pub context: FormalContext,
    pub metadata: Option<GoldMetadata>,
}

impl GoldContext {
    /// Checks the declared density, when present, against the incidence.
    pub fn new(context: FormalContext, metadata: Option<GoldMetadata>) -> Result<Self> {
        if let Some(declared) = metadata.as_ref().and_then(|m| m.density) {
            let actual = context.density();
            if (declared - actual).abs() > DENSITY_TOLERANCE {
                return Err(Error::DensityMismatch { declared, actual });
            }
        }
        Ok(Self { context, metadata })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Reconstruction,
    Classification,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Reconstruction => "reconstruction",
            Task::Classification => "classification",
        }
    }
}

/// Which axis is ranked for each gold pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankDirection {
    /// Query by object, rank attributes.
    Attributes,
    /// Query by attribute, rank objects.
    Objects,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub id: String,
    pub rank: Option<usize>,
    pub average_precision: Option<f64>,
    pub f1: Option<f64>,
    /// One flag per requested `k`.
    pub hits: Vec<bool>,
    /// The target shared its score with another candidate.
    pub tied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    /// Metric name and value, in a fixed order.
    pub aggregate: Vec<(String, f64)>,
    pub per_query: Vec<QueryResult>,
    /// Number of queries whose target was tied with another candidate.
    pub tied_queries: usize,
    /// Gold identifiers missing from the scores, as `object:<id>` or
    /// `attribute:<id>`.
    pub unaligned: Vec<String>,
}

impl EvalReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.aggregate.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Gold context restricted to identifiers present in the scores, with the
/// score matrix permuted to match.
struct Aligned {
    gold: FormalContext,
    scores: ScoreMatrix,
    unaligned: Vec<String>,
}

fn align(scores: &PooledContext, gold: &GoldContext) -> Result<Aligned> {
    let index = |ids: &[String]| -> BTreeMap<String, usize> {
        ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
    };
    let (so, sa) = (index(&scores.objects), index(&scores.attributes));
    let gctx = &gold.context;
    let mut unaligned = Vec::new();
    let mut objs = Vec::new();
    for (g, id) in gctx.objects().iter().enumerate() {
        match so.get(id) {
            Some(&s) => objs.push((g, s)),
            None => unaligned.push(alloc::format!("object:{id}")),
        }
    }
    let mut attrs = Vec::new();
    for (m, id) in gctx.attributes().iter().enumerate() {
        match sa.get(id) {
            Some(&s) => attrs.push((m, s)),
            None => unaligned.push(alloc::format!("attribute:{id}")),
        }
    }
    if objs.is_empty() {
        return Err(Error::NoAlignedIdentifiers { axis: Axis::Object });
    }
    if attrs.is_empty() {
        return Err(Error::NoAlignedIdentifiers { axis: Axis::Attribute });
    }
    if !unaligned.is_empty() {
        log::warn!("{} gold identifier(s) missing from scores", unaligned.len());
    }
    let aligned_gold = FormalContext::from_fn(
        objs.iter().map(|&(g, _)| gctx.objects()[g].clone()).collect(),
        attrs.iter().map(|&(m, _)| gctx.attributes()[m].clone()).collect(),
        |i, j| gctx.has(objs[i].0, attrs[j].0),
    )?;
    let aligned_scores = ScoreMatrix::from_fn(objs.len(), attrs.len(), |i, j| scores.scores[(objs[i].1, attrs[j].1)]);
    Ok(Aligned {
        gold: aligned_gold,
        scores: aligned_scores,
        unaligned,
    })
}

/// Ranking evaluation of `scores` against every gold pair.
///
/// Candidates are all aligned items of the ranked axis; with `filtered`, the
/// other gold positives of the same query are removed first.
pub fn eval_reconstruction(
    scores: &PooledContext,
    gold: &GoldContext,
    direction: RankDirection,
    ks: &[usize],
    filtered: bool,
) -> Result<EvalReport> {
    if ks.contains(&0) {
        return Err(Error::Invalid("hit@k needs k >= 1".into()));
    }
    let a = align(scores, gold)?;
    let (n, k) = (a.gold.num_objects(), a.gold.num_attributes());

    let mut per_query = Vec::new();
    let items = match direction {
        RankDirection::Attributes => k,
        RankDirection::Objects => n,
    };
    // (query, item) -> (object, attribute)
    let cell = |q: usize, i: usize| match direction {
        RankDirection::Attributes => (q, i),
        RankDirection::Objects => (i, q),
    };
    let item_ids: Vec<String> = match direction {
        RankDirection::Attributes => a.gold.attributes().to_vec(),
        RankDirection::Objects => a.gold.objects().to_vec(),
    };
    let query_ids: Vec<String> = match direction {
        RankDirection::Attributes => a.gold.objects().to_vec(),
        RankDirection::Objects => a.gold.attributes().to_vec(),
    };
    for (q, query_id) in query_ids.iter().enumerate() {
        let positives: Vec<usize> = (0..items)
            .filter(|&i| {
                let (g, m) = cell(q, i);
                a.gold.has(g, m)
            })
            .collect();
        for &target in &positives {
            let candidates: Vec<usize> = (0..items)
                .filter(|i| !filtered || *i == target || !positives.contains(i))
                .collect();
            let score = |i: usize| {
                let (g, m) = cell(q, i);
                a.scores[(g, m)]
            };
            let (rank, tied) = rank_by(target, &candidates, score, &item_ids);
            per_query.push(QueryResult {
                id: alloc::format!("{} -> {}", query_id, item_ids[target]),
                rank: Some(rank),
                average_precision: None,
                f1: None,
                hits: ks.iter().map(|&k| rank <= k).collect(),
                tied,
            });
        }
    }
    if per_query.is_empty() {
        return Err(Error::NoGoldPositives);
    }
    let total = per_query.len() as f64;
    let mut aggregate = Vec::new();
    let mrr = per_query.iter().map(|q| 1.0 / q.rank.unwrap() as f64).sum::<f64>() / total;
    aggregate.push((String::from("mrr"), mrr));
    for (j, k) in ks.iter().enumerate() {
        let hits = per_query.iter().filter(|q| q.hits[j]).count() as f64;
        aggregate.push((alloc::format!("hit@{k}"), hits / total));
    }
    let tied_queries = per_query.iter().filter(|q| q.tied).count();
    Ok(EvalReport {
        task: Task::Reconstruction,
        aggregate,
        per_query,
        tied_queries,
        unaligned: a.unaligned,
    })
}

/// 1-based rank of `target` among `candidates` by descending score, ties
/// broken by identifier. Also reports whether a tie occurred.
fn rank_by(target: usize, candidates: &[usize], score: impl Fn(usize) -> f64, ids: &[String]) -> (usize, bool) {
    let st = score(target);
    let mut rank = 1;
    let mut tied = false;
    for &c in candidates {
        if c == target {
            continue;
        }
        let sc = score(c);
        if sc > st {
            rank += 1;
        } else if sc == st {
            tied = true;
            if ids[c] < ids[target] {
                rank += 1;
            }
        }
    }
    (rank, tied)
}

/// Mean reciprocal rank of 1-based ranks.
pub fn mean_reciprocal_rank(ranks: &[usize]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64
}

/// Average precision of a ranking given relevance flags in ranked order.
pub fn average_precision(relevant_in_rank_order: &[bool]) -> f64 {
    let total = relevant_in_rank_order.iter().filter(|&&r| r).count();
    if total == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &r) in relevant_in_rank_order.iter().enumerate() {
        if r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / total as f64
}

fn f1_from(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Concept labels with each object's membership score.
struct ClassificationSetup {
    /// `(label, gold extent flags, per-object min score over the intent)`.
    concepts: Vec<(String, Vec<bool>, Vec<f64>)>,
    object_ids: Vec<String>,
    unaligned: Vec<String>,
}

fn classification_setup(scores: &PooledContext, gold: &GoldContext) -> Result<ClassificationSetup> {
    let a = align(scores, gold)?;
    let ctx = &a.gold;
    let mut concepts = Vec::new();
    for c in enumerate_concepts(ctx)? {
        if c.extent.is_empty() || c.intent.is_empty() {
            continue;
        }
        let label = alloc::format!(
            "{{{}}}",
            c.intent
                .iter()
                .map(|m| ctx.attributes()[m].as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        let members = (0..ctx.num_objects()).map(|g| c.extent.contains(g)).collect();
        let membership = (0..ctx.num_objects())
            .map(|g| c.intent.iter().map(|m| a.scores[(g, m)]).fold(f64::INFINITY, f64::min))
            .collect();
        concepts.push((label, members, membership));
    }
    if concepts.is_empty() {
        return Err(Error::NoNontrivialConcepts);
    }
    Ok(ClassificationSetup {
        concepts,
        object_ids: ctx.objects().to_vec(),
        unaligned: a.unaligned,
    })
}

/// Objects sorted by descending score, ties by identifier.
fn ranking(scores: &[f64], ids: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&x, &y| {
        scores[y]
            .partial_cmp(&scores[x])
            .unwrap_or(Ordering::Equal)
            .then_with(|| ids[x].cmp(&ids[y]))
    });
    order
}

/// Multilabel concept classification at threshold `alpha`.
pub fn eval_concept_classification(scores: &PooledContext, gold: &GoldContext, alpha: f64) -> Result<EvalReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let setup = classification_setup(scores, gold)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut per_query = Vec::new();
    for (label, members, membership) in &setup.concepts {
        let (mut ctp, mut cfp, mut cfn) = (0, 0, 0);
        for (&is_member, &score) in members.iter().zip(membership) {
            match (score > alpha, is_member) {
                (true, true) => ctp += 1,
                (true, false) => cfp += 1,
                (false, true) => cfn += 1,
                (false, false) => {}
            }
        }
        tp += ctp;
        fp += cfp;
        fn_ += cfn;
        let order = ranking(membership, &setup.object_ids);
        let rel: Vec<bool> = order.iter().map(|&g| members[g]).collect();
        let tied = order.windows(2).any(|w| membership[w[0]] == membership[w[1]]);
        per_query.push(QueryResult {
            id: label.clone(),
            rank: None,
            average_precision: Some(average_precision(&rel)),
            f1: Some(f1_from(ctp, cfp, cfn)),
            hits: Vec::new(),
            tied,
        });
    }
    let count = per_query.len() as f64;
    let map = per_query.iter().filter_map(|q| q.average_precision).sum::<f64>() / count;
    let macro_f1 = per_query.iter().filter_map(|q| q.f1).sum::<f64>() / count;
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let aggregate = alloc::vec![
        (String::from("f1"), f1_from(tp, fp, fn_)),
        (String::from("map"), map),
        (String::from("precision"), precision),
        (String::from("recall"), recall),
        (String::from("macro_f1"), macro_f1),
    ];
    let tied_queries = per_query.iter().filter(|q| q.tied).count();
    Ok(EvalReport {
        task: Task::Classification,
        aggregate,
        per_query,
        tied_queries,
        unaligned: setup.unaligned,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub f1: f64,
    /// Number of predicted (object, concept) memberships.
    pub predicted_positive: usize,
}

/// Micro F1 and predicted-positive count at each threshold.
pub fn alpha_sweep(scores: &PooledContext, gold: &GoldContext, alphas: &[f64]) -> Result<Vec<SweepPoint>> {
    if let Some(&bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::AlphaOutOfRange(bad));
    }
    let setup = classification_setup(scores, gold)?;
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (_, members, membership) in &setup.concepts {
                for (&is_member, &score) in members.iter().zip(membership) {
                    match (score > alpha, is_member) {
                        (true, true) => tp += 1,
                        (true, false) => fp += 1,
                        (false, true) => fn_ += 1,
                        (false, false) => {}
                    }
                }
            }
            SweepPoint {
                alpha,
                f1: f1_from(tp, fp, fn_),
                predicted_positive: tp + fp,
            }
        })
        .collect())
}

/// `n` evenly spaced thresholds from 0 to 1 inclusive.
pub fn alpha_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeComparison {
    pub shared: usize,
    pub union: usize,
    /// `shared / union` over concept extents.
    pub jaccard: f64,
    /// Fraction of shared extents whose intents agree.
    pub intent_agreement: f64,
    /// Fraction of ordered pairs of shared extents on which the covering
    /// relations agree; `1` with fewer than two shared extents.
    pub cover_agreement: f64,
}

fn universes(l: &ConceptLattice) -> Option<(usize, usize)> {
    let first = l.concepts.first()?;
    let u = (first.extent.universe(), first.intent.universe());
    l.concepts
        .iter()
        .all(|c| (c.extent.universe(), c.intent.universe()) == u)
        .then_some(u)
}

/// Compares two lattices over the same object and attribute universes.
pub fn compare_lattices(a: &ConceptLattice, b: &ConceptLattice) -> Result<LatticeComparison> {
    let ua = universes(a).ok_or(Error::UniverseMismatch)?;
    if universes(b) != Some(ua) {
        return Err(Error::UniverseMismatch);
    }
    let index_b: BTreeMap<_, usize> = b.concepts.iter().enumerate().map(|(i, c)| (&c.extent, i)).collect();
    let shared: Vec<(usize, usize)> = a
        .concepts
        .iter()
        .enumerate()
        .filter_map(|(i, c)| index_b.get(&c.extent).map(|&j| (i, j)))
        .collect();
    let union = a.len() + b.len() - shared.len();
    let intent_agreement = if shared.is_empty() {
        1.0
    } else {
        shared
            .iter()
            .filter(|&&(i, j)| a.concepts[i].intent == b.concepts[j].intent)
            .count() as f64
            / shared.len() as f64
    };
    let (mut agree, mut pairs) = (0usize, 0usize);
    for &(ia, ib) in &shared {
        for &(ja, jb) in &shared {
            if ia == ja {
                continue;
            }
            pairs += 1;
            let ca = a.covers.binary_search(&(ia, ja)).is_ok();
            let cb = b.covers.binary_search(&(ib, jb)).is_ok();
            agree += (ca == cb) as usize;
        }
    }
    Ok(LatticeComparison {
        shared: shared.len(),
        union,
        jaccard: shared.len() as f64 / union as f64,
        intent_agreement,
        cover_agreement: if pairs == 0 { 1.0 } else { agree as f64 / pairs as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn gold(n: usize, k: usize, f: impl FnMut(usize, usize) -> bool) -> GoldContext {
        GoldContext::new(FormalContext::from_fn(ids("g", n), ids("m", k), f).unwrap(), None).unwrap()
    }

    fn scores(n: usize, k: usize, f: impl Fn(usize, usize) -> f64) -> PooledContext {
        PooledContext::new(ids("g", n), ids("m", k), ScoreMatrix::from_fn(n, k, f)).unwrap()
    }

    #[test]
    fn mrr_of_one_two_four() {
        assert!((mean_reciprocal_rank(&[1, 2, 4]) - 0.583_333_333_333).abs() < 1e-9);
    }

    #[test]
    fn reconstruction_ranks_and_ties() {
        // one object, truth m1; m0 scores higher, m2 ties and sorts after
        let g = gold(1, 3, |_, m| m == 1);
        let s = scores(1, 3, |_, m| [0.9, 0.5, 0.5][m]);
        let r = eval_reconstruction(&s, &g, RankDirection::Attributes, &[1, 2], false).unwrap();
        assert_eq!(r.per_query[0].rank, Some(2));
        assert!(r.per_query[0].tied);
        assert_eq!(r.metric("mrr"), Some(0.5));
        assert_eq!(r.metric("hit@1"), Some(0.0));
        assert_eq!(r.metric("hit@2"), Some(1.0));
        assert_eq!(r.tied_queries, 1);
    }

    #[test]
    fn filtered_removes_other_positives() {
        let g = gold(1, 3, |_, m| m < 2);
        let s = scores(1, 3, |_, m| [0.9, 0.8, 0.1][m]);
        let raw = eval_reconstruction(&s, &g, RankDirection::Attributes, &[1], false).unwrap();
        let filt = eval_reconstruction(&s, &g, RankDirection::Attributes, &[1], true).unwrap();
        assert_eq!(raw.metric("mrr"), Some(0.75));
        assert_eq!(filt.metric("mrr"), Some(1.0));
    }

    #[test]
    fn object_direction_queries_by_attribute() {
        let g = gold(3, 1, |o, _| o == 2);
        let s = scores(3, 1, |o, _| o as f64 / 4.0);
        let r = eval_reconstruction(&s, &g, RankDirection::Objects, &[1], false).unwrap();
        assert_eq!(r.per_query[0].id, "m0 -> g2");
        assert_eq!(r.metric("mrr"), Some(1.0));
    }

    #[test]
    fn alignment_errors_and_drops() {
        let g = gold(2, 2, |a, b| a == b);
        let s = PooledContext::new(
            vec!["g0".into(), "x".into()],
            ids("m", 2),
            ScoreMatrix::from_fn(2, 2, |_, _| 0.5),
        )
        .unwrap();
        let r = eval_reconstruction(&s, &g, RankDirection::Attributes, &[1], false).unwrap();
        assert_eq!(r.unaligned, vec![String::from("object:g1")]);
        assert_eq!(r.per_query.len(), 1);
        let none = PooledContext::new(vec!["x".into()], ids("m", 2), ScoreMatrix::zeros(1, 2)).unwrap();
        assert_eq!(
            eval_reconstruction(&none, &g, RankDirection::Attributes, &[1], false),
            Err(Error::NoAlignedIdentifiers { axis: Axis::Object })
        );
        let empty = gold(2, 2, |_, _| false);
        assert_eq!(
            eval_reconstruction(&s, &empty, RankDirection::Attributes, &[1], false),
            Err(Error::NoGoldPositives)
        );
    }

    #[test]
    fn density_is_checked() {
        let ctx = FormalContext::from_fn(ids("g", 2), ids("m", 2), |a, b| a == b).unwrap();
        let meta = |d| {
            Some(GoldMetadata {
                name: "t".into(),
                density: Some(d),
                ..Default::default()
            })
        };
        assert!(GoldContext::new(ctx.clone(), meta(0.5)).is_ok());
        assert!(matches!(
            GoldContext::new(ctx, meta(0.3)),
            Err(Error::DensityMismatch { .. })
        ));
    }

    #[test]
    fn perfect_scores_classify_perfectly() {
        let g = gold(4, 3, |o, m| (o + m) % 3 != 0);
        let s = scores(4, 3, |o, m| if g.context.has(o, m) { 0.9 } else { 0.1 });
        let r = eval_concept_classification(&s, &g, 0.5).unwrap();
        assert_eq!(r.metric("f1"), Some(1.0));
        assert_eq!(r.metric("map"), Some(1.0));
        let sweep = alpha_sweep(&s, &g, &alpha_grid(3)).unwrap();
        assert_eq!(sweep[1].f1, 1.0);
        assert_eq!(sweep[2].predicted_positive, 0);
    }

    #[test]
    fn trivial_concepts_only_is_an_error() {
        let g = gold(2, 2, |_, _| false);
        let s = scores(2, 2, |_, _| 0.5);
        assert_eq!(eval_concept_classification(&s, &g, 0.5), Err(Error::NoNontrivialConcepts));
    }

    #[test]
    fn average_precision_examples() {
        assert_eq!(average_precision(&[true, false, true]), (1.0 + 2.0 / 3.0) / 2.0);
        assert_eq!(average_precision(&[false, false]), 0.0);
    }

    #[test]
    fn lattice_comparison() {
        let a = gold(3, 3, |o, m| o == m).context;
        let b = gold(3, 3, |o, m| o == m || (o == 0 && m == 1)).context;
        let la = crate::build_lattice(enumerate_concepts(&a).unwrap()).unwrap();
        let lb = crate::build_lattice(enumerate_concepts(&b).unwrap()).unwrap();
        let same = compare_lattices(&la, &la).unwrap();
        assert_eq!((same.jaccard, same.intent_agreement, same.cover_agreement), (1.0, 1.0, 1.0));
        let diff = compare_lattices(&la, &lb).unwrap();
        assert!(diff.jaccard < 1.0);
        let small = crate::build_lattice(enumerate_concepts(&gold(2, 3, |_, _| true).context).unwrap()).unwrap();
        assert_eq!(compare_lattices(&la, &small), Err(Error::UniverseMismatch));
    }
}
