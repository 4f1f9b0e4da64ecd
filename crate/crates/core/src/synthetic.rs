//! Synthetic world: sentences sampled from a ground-truth context, and the
//! co-occurrence learner that recovers the context from them.
//!
//! Each sentence fills a pattern drawn uniformly at random with an
//! object-attribute pair drawn from the incident pairs of the context. With
//! probability `noise_rate` the pair is swapped for a uniformly drawn
//! non-incident pair.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::pattern::Pattern;
use crate::pipeline::PooledContext;
use crate::rng::{seeded_rng, trial_rng};

/// How incident pairs are drawn.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum PairDistribution {
    #[default]
    Uniform,
    /// One non-negative weight per incident pair, in row-major order.
    Weighted(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub n: usize,
    pub seed: u64,
    pub pair_dist: PairDistribution,
    pub noise_rate: f64,
    /// Free-form identifier of the source context, carried into the corpus.
    pub source: String,
}

impl CorpusSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            pair_dist: PairDistribution::Uniform,
            noise_rate: 0.0,
            source: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub pattern: String,
    pub object: String,
    pub attribute: String,
    pub tokens: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub sentences: Vec<Sentence>,
    pub source: String,
    pub seed: u64,
}

/// Draws `(pattern, object, attribute)` index triples.
struct TripleSampler {
    incident: Vec<(usize, usize)>,
    non_incident: Vec<(usize, usize)>,
    weights: Option<WeightedIndex<f64>>,
    patterns: usize,
    noise_rate: f64,
}

impl TripleSampler {
    fn new(ctx: &FormalContext, patterns: usize, pair_dist: &PairDistribution, noise_rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&noise_rate) {
            return Err(Error::NoiseRateOutOfRange(noise_rate));
        }
        if patterns == 0 {
            return Err(Error::Invalid("at least one pattern is required".into()));
        }
        let mut incident = Vec::new();
        let mut non_incident = Vec::new();
        for g in 0..ctx.num_objects() {
            for m in 0..ctx.num_attributes() {
                if ctx.has(g, m) {
                    incident.push((g, m));
                } else {
                    non_incident.push((g, m));
                }
            }
        }
        if incident.is_empty() {
            return Err(Error::EmptyIncidence);
        }
        if noise_rate > 0.0 && non_incident.is_empty() {
            return Err(Error::NoNonIncidentPairs);
        }
        let weights = match pair_dist {
            PairDistribution::Uniform => None,
            PairDistribution::Weighted(w) => {
                if w.len() != incident.len() {
                    return Err(Error::ShapeMismatch {
                        expected: alloc::format!("{} pair weights", incident.len()),
                        found: alloc::format!("{}", w.len()),
                    });
                }
                Some(WeightedIndex::new(w).map_err(|e| Error::Invalid(alloc::format!("pair weights: {e}")))?)
            }
        };
        Ok(Self {
            incident,
            non_incident,
            weights,
            patterns,
            noise_rate,
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
        let b = rng.gen_range(0..self.patterns);
        let noisy = self.noise_rate > 0.0 && rng.gen::<f64>() < self.noise_rate;
        let (g, m) = if noisy {
            self.non_incident[rng.gen_range(0..self.non_incident.len())]
        } else {
            match &self.weights {
                Some(w) => self.incident[w.sample(rng)],
                None => self.incident[rng.gen_range(0..self.incident.len())],
            }
        };
        (b, g, m)
    }
}

fn render(ctx: &FormalContext, patterns: &[Pattern], (b, g, m): (usize, usize, usize)) -> Sentence {
    let (object, attribute) = (&ctx.objects()[g], &ctx.attributes()[m]);
    let tokens = patterns[b]
        .render_filling(Some(object), Some(attribute))
        .expect("identifiers checked for the mask placeholder");
    Sentence {
        pattern: patterns[b].id().into(),
        object: object.clone(),
        attribute: attribute.clone(),
        tokens,
    }
}

fn check_identifiers(ctx: &FormalContext) -> Result<()> {
    for id in ctx.objects().iter().chain(ctx.attributes()) {
        if id.contains(crate::pattern::MASK) {
            return Err(Error::TokenContainsMask(id.clone()));
        }
    }
    Ok(())
}

fn sample_sentences(
    ctx: &FormalContext,
    patterns: &[Pattern],
    spec: &CorpusSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Sentence>> {
    check_identifiers(ctx)?;
    let sampler = TripleSampler::new(ctx, patterns.len(), &spec.pair_dist, spec.noise_rate)?;
    Ok((0..spec.n)
        .map(|_| render(ctx, patterns, sampler.sample(rng)))
        .collect())
}

/// Samples `spec.n` sentences from `ctx`.
pub fn generate_corpus(ctx: &FormalContext, patterns: &[Pattern], spec: &CorpusSpec) -> Result<SyntheticCorpus> {
    let mut rng = seeded_rng(spec.seed);
    Ok(SyntheticCorpus {
        sentences: sample_sentences(ctx, patterns, spec, &mut rng)?,
        source: spec.source.clone(),
        seed: spec.seed,
    })
}

/// How raw co-occurrence counts are scaled into `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LearnNormalization {
    /// Divide by the largest count.
    #[default]
    Max,
    /// Divide each row by its sum.
    RowStochastic,
}

struct Vocab<'a> {
    objects: BTreeMap<&'a str, usize>,
    attributes: BTreeMap<&'a str, usize>,
}

impl<'a> Vocab<'a> {
    fn new(objects: &'a [String], attributes: &'a [String]) -> Self {
        let index = |ids: &'a [String]| ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        Self {
            objects: index(objects),
            attributes: index(attributes),
        }
    }

    /// Adds one count per (object token, attribute token) position pair.
    fn count(&self, tokens: &[String], counts: &mut ScoreMatrix) {
        for wi in tokens {
            let Some(&g) = self.objects.get(wi.as_str()) else {
                continue;
            };
            for wj in tokens {
                if let Some(&m) = self.attributes.get(wj.as_str()) {
                    counts[(g, m)] += 1.0;
                }
            }
        }
    }
}

/// Raw co-occurrence counts of known objects and attributes within each
/// sentence. Unknown tokens are ignored.
pub fn cooccurrence_counts(corpus: &SyntheticCorpus, objects: &[String], attributes: &[String]) -> ScoreMatrix {
    let vocab = Vocab::new(objects, attributes);
    let mut counts = ScoreMatrix::zeros(objects.len(), attributes.len());
    for s in &corpus.sentences {
        vocab.count(&s.tokens, &mut counts);
    }
    counts
}

pub(crate) fn normalize_counts(counts: &ScoreMatrix, mode: LearnNormalization) -> ScoreMatrix {
    match mode {
        LearnNormalization::Max => {
            let max = counts.values().iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                counts.map(|v| v / max)
            } else {
                log::warn!("no co-occurrences counted; normalization skipped");
                counts.clone()
            }
        }
        LearnNormalization::RowStochastic => {
            let mut out = counts.clone();
            for r in 0..counts.rows() {
                let sum: f64 = counts.row(r).iter().sum();
                if sum > 0.0 {
                    for c in 0..counts.cols() {
                        out[(r, c)] /= sum;
                    }
                }
            }
            out
        }
    }
}

/// Learns a probabilistic context by counting co-occurrences and dividing by
/// the largest count.
pub fn learn_context(corpus: &SyntheticCorpus, objects: &[String], attributes: &[String]) -> Result<PooledContext> {
    learn_context_with(corpus, objects, attributes, LearnNormalization::Max)
}

pub fn learn_context_with(
    corpus: &SyntheticCorpus,
    objects: &[String],
    attributes: &[String],
    mode: LearnNormalization,
) -> Result<PooledContext> {
    let counts = cooccurrence_counts(corpus, objects, attributes);
    PooledContext::new(objects.to_vec(), attributes.to_vec(), normalize_counts(&counts, mode))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistanceMetric {
    #[default]
    MeanAbs,
    MaxAbs,
}

/// Mean or maximum absolute entry-wise deviation.
pub fn context_distance(a: &ScoreMatrix, b: &ScoreMatrix, metric: DistanceMetric) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: alloc::format!("{:?}", a.shape()),
            found: alloc::format!("{:?}", b.shape()),
        });
    }
    let diffs = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs());
    Ok(match metric {
        DistanceMetric::MaxAbs => diffs.fold(0.0, f64::max),
        DistanceMetric::MeanAbs => {
            let len = a.values().len();
            if len == 0 {
                0.0
            } else {
                diffs.sum::<f64>() / len as f64
            }
        }
    })
}

/// Expected pair frequencies of a noise-free corpus drawn from `ctx`,
/// normalized the same way the learner normalizes counts.
///
/// Under uniform pair sampling and max normalization this is the 0/1
/// incidence matrix itself.
pub fn expected_context(
    ctx: &FormalContext,
    pair_dist: &PairDistribution,
    mode: LearnNormalization,
) -> Result<ScoreMatrix> {
    let mut freq = ScoreMatrix::zeros(ctx.num_objects(), ctx.num_attributes());
    let incident: Vec<(usize, usize)> = (0..ctx.num_objects())
        .flat_map(|g| ctx.row(g).iter().map(move |m| (g, m)))
        .collect();
    if incident.is_empty() {
        return Err(Error::EmptyIncidence);
    }
    match pair_dist {
        PairDistribution::Uniform => {
            for &(g, m) in &incident {
                freq[(g, m)] = 1.0 / incident.len() as f64;
            }
        }
        PairDistribution::Weighted(w) => {
            if w.len() != incident.len() {
                return Err(Error::ShapeMismatch {
                    expected: alloc::format!("{} pair weights", incident.len()),
                    found: alloc::format!("{}", w.len()),
                });
            }
            let total: f64 = w.iter().sum();
            if total.is_nan() || total <= 0.0 || w.iter().any(|&x| x < 0.0) {
                return Err(Error::Invalid("pair weights must be non-negative with positive sum".into()));
            }
            for (&(g, m), &x) in incident.iter().zip(w) {
                freq[(g, m)] = x / total;
            }
        }
    }
    Ok(normalize_counts(&freq, mode))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    /// Strictly increasing corpus sizes.
    pub n_schedule: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub noise_rate: f64,
    pub pair_dist: PairDistribution,
    pub metric: DistanceMetric,
    pub normalization: LearnNormalization,
}

impl ConvergenceSpec {
    pub fn new(n_schedule: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            n_schedule,
            trials,
            seed,
            noise_rate: 0.0,
            pair_dist: PairDistribution::Uniform,
            metric: DistanceMetric::MeanAbs,
            normalization: LearnNormalization::Max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub trial: usize,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// Ordered by trial, then by `n`.
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn distances_at(&self, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n).map(|r| r.distance).collect()
    }

    pub fn summary(&self) -> Vec<ConvergenceSummary> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        ns.into_iter()
            .map(|n| {
                let d = self.distances_at(n);
                let mean = d.iter().sum::<f64>() / d.len() as f64;
                let std = if d.len() > 1 {
                    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (d.len() - 1) as f64;
                    libm::sqrt(var)
                } else {
                    0.0
                };
                ConvergenceSummary { n, mean, std }
            })
            .collect()
    }
}

/// Measures how fast the learned context approaches the expected one.
///
/// Each trial draws one corpus of the largest scheduled size from its own
/// RNG stream and scores every prefix of scheduled length.
pub fn convergence_experiment(
    ctx: &FormalContext,
    patterns: &[Pattern],
    spec: &ConvergenceSpec,
) -> Result<ConvergenceTable> {
    if spec.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("n_schedule must be strictly increasing".into()));
    }
    check_identifiers(ctx)?;
    let sampler = TripleSampler::new(ctx, patterns.len(), &spec.pair_dist, spec.noise_rate)?;
    let target = expected_context(ctx, &spec.pair_dist, spec.normalization)?;
    let vocab = Vocab::new(ctx.objects(), ctx.attributes());
    let max_n = spec.n_schedule.last().copied().unwrap_or(0);

    let mut rows = Vec::with_capacity(spec.trials * spec.n_schedule.len());
    for trial in 0..spec.trials {
        let mut rng = trial_rng(spec.seed, trial as u64);
        let mut counts = ScoreMatrix::zeros(ctx.num_objects(), ctx.num_attributes());
        let mut checkpoints = spec.n_schedule.iter().peekable();
        for drawn in 0..=max_n {
            while checkpoints.peek() == Some(&&drawn) {
                let learned = normalize_counts(&counts, spec.normalization);
                rows.push(ConvergenceRow {
                    n: drawn,
                    trial,
                    distance: context_distance(&learned, &target, spec.metric)?,
                });
                checkpoints.next();
            }
            if drawn < max_n {
                let sentence = render(ctx, patterns, sampler.sample(&mut rng));
                vocab.count(&sentence.tokens, &mut counts);
            }
        }
    }
    Ok(ConvergenceTable { rows })
}
