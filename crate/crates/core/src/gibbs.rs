//! Gibbs sampling of object-attribute pairs from a cloze probability
//! provider.
//!
//! The chain starts from `g₀ ~ p(· | b)` with both slots masked and
//! `m₀ ~ p(· | b^{g₀,·})`, then alternates the two conditionals. The
//! empirical context is the pair-frequency matrix over the tokens that were
//! actually sampled; no vocabulary is presupposed.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::pattern::{Pattern, Slot};
use crate::pipeline::PooledContext;
use crate::rng::seeded_rng;

/// Tolerance on the total mass of a provider distribution.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// A pattern filling with the `target` slot masked. The other slot is either
/// filled or also masked.
#[derive(Clone, Copy, Debug)]
pub struct FillQuery<'a> {
    pub pattern: &'a Pattern,
    pub target: Slot,
    /// Filler of the non-target slot.
    pub given: Option<&'a str>,
}

impl FillQuery<'_> {
    pub fn tokens(&self) -> Result<Vec<String>> {
        match self.target {
            Slot::Object => self.pattern.render_filling(None, self.given),
            Slot::Attribute => self.pattern.render_filling(self.given, None),
        }
    }

    /// Index of the masked target slot in [`FillQuery::tokens`].
    pub fn mask_index(&self) -> usize {
        self.pattern.slot_index(self.target)
    }
}

/// A distribution over candidate fillers for one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenDistribution {
    pub tokens: Vec<String>,
    pub probs: Vec<f64>,
}

impl TokenDistribution {
    /// Checks for a non-empty vocabulary, matching lengths, non-negative
    /// finite probabilities and unit total mass.
    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if self.tokens.len() != self.probs.len() {
            return Err(Error::Provider(alloc::format!(
                "{} tokens but {} probabilities",
                self.tokens.len(),
                self.probs.len()
            )));
        }
        if let Some(&p) = self.probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Provider(alloc::format!("invalid probability {p}")));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::DistributionNotNormalized { sum });
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &str {
        let total: f64 = self.probs.iter().sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        for (t, &p) in self.tokens.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return t;
            }
        }
        // rounding can leave u at the very top; take the last positive entry
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        &self.tokens[last]
    }
}

/// Answers masked-slot queries with a distribution over fillers.
///
/// Implementations must be deterministic for a fixed state.
pub trait ProbabilityProvider {
    fn fill(&self, query: &FillQuery<'_>) -> Result<TokenDistribution>;
}

impl<P: ProbabilityProvider + ?Sized> ProbabilityProvider for &P {
    fn fill(&self, query: &FillQuery<'_>) -> Result<TokenDistribution> {
        (**self).fill(query)
    }
}

/// Exact conditionals of a known joint distribution over objects ×
/// attributes. The pattern is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct JointProvider {
    objects: Vec<String>,
    attributes: Vec<String>,
    joint: ScoreMatrix,
}

impl JointProvider {
    /// `weights` need not be normalized but must be non-negative with a
    /// positive total.
    pub fn new(objects: Vec<String>, attributes: Vec<String>, weights: ScoreMatrix) -> Result<Self> {
        let ctx = PooledContext::new(objects, attributes, weights)?;
        if ctx.scores.values().iter().any(|&w| w < 0.0) {
            return Err(Error::Invalid("joint weights must be non-negative".into()));
        }
        let total: f64 = ctx.scores.values().iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Invalid("joint weights must have positive mass".into()));
        }
        Ok(Self {
            joint: ctx.scores.map(|w| w / total),
            objects: ctx.objects,
            attributes: ctx.attributes,
        })
    }

    pub fn from_pooled(ctx: &PooledContext) -> Result<Self> {
        Self::new(ctx.objects.clone(), ctx.attributes.clone(), ctx.scores.clone())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    /// Normalized joint probabilities.
    pub fn joint(&self) -> &ScoreMatrix {
        &self.joint
    }

    pub fn object_marginal(&self) -> Vec<f64> {
        (0..self.objects.len()).map(|g| self.joint.row(g).iter().sum()).collect()
    }

    pub fn attribute_marginal(&self) -> Vec<f64> {
        (0..self.attributes.len())
            .map(|m| (0..self.objects.len()).map(|g| self.joint[(g, m)]).sum())
            .collect()
    }

    fn normalized(tokens: &[String], weights: Vec<f64>) -> Result<TokenDistribution> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Provider("conditioning event has zero probability".into()));
        }
        Ok(TokenDistribution {
            tokens: tokens.to_vec(),
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }
}

impl ProbabilityProvider for JointProvider {
    fn fill(&self, query: &FillQuery<'_>) -> Result<TokenDistribution> {
        let unknown = |t: &str| Error::Provider(alloc::format!("unknown conditioning token {t:?}"));
        match (query.target, query.given) {
            (Slot::Object, None) => Self::normalized(&self.objects, self.object_marginal()),
            (Slot::Attribute, None) => Self::normalized(&self.attributes, self.attribute_marginal()),
            (Slot::Object, Some(a)) => {
                let m = self.attributes.iter().position(|x| x == a).ok_or_else(|| unknown(a))?;
                let col = (0..self.objects.len()).map(|g| self.joint[(g, m)]).collect();
                Self::normalized(&self.objects, col)
            }
            (Slot::Attribute, Some(o)) => {
                let g = self.objects.iter().position(|x| x == o).ok_or_else(|| unknown(o))?;
                Self::normalized(&self.attributes, self.joint.row(g).to_vec())
            }
        }
    }
}

/// Which previous state each half-step conditions on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UpdateOrder {
    /// `g_t ~ p(· | m_{t-1})`, then `m_t ~ p(· | g_t)`: systematic-scan Gibbs,
    /// stationary at the joint.
    #[default]
    Sequential,
    /// `g_t ~ p(· | m_{t-1})` and `m_t ~ p(· | g_{t-1})`. Each coordinate is
    /// still marginally correct, but pairs decouple towards the product of
    /// the marginals.
    Simultaneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GibbsSpec {
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub update: UpdateOrder,
}

impl GibbsSpec {
    pub fn new(steps: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            steps,
            burn_in,
            seed,
            update: UpdateOrder::Sequential,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsRun {
    /// `(g_t, m_t)` for `t = 0 .. steps`.
    pub chain: Vec<(String, String)>,
    /// Pair frequencies after burn-in over sampled tokens, sorted by
    /// identifier on both axes.
    pub empirical: PooledContext,
}

fn draw<P: ProbabilityProvider + ?Sized, R: Rng>(
    provider: &P,
    pattern: &Pattern,
    target: Slot,
    given: Option<&str>,
    rng: &mut R,
) -> Result<String> {
    let dist = provider.fill(&FillQuery { pattern, target, given })?;
    dist.validate()?;
    Ok(dist.sample(rng).into())
}

pub fn gibbs_generate<P: ProbabilityProvider + ?Sized>(
    provider: &P,
    pattern: &Pattern,
    spec: &GibbsSpec,
) -> Result<GibbsRun> {
    if spec.steps <= spec.burn_in {
        return Err(Error::Invalid(alloc::format!(
            "steps ({}) must exceed burn-in ({})",
            spec.steps,
            spec.burn_in
        )));
    }
    let mut rng = seeded_rng(spec.seed);
    let mut chain: Vec<(String, String)> = Vec::with_capacity(spec.steps);
    let g0 = draw(provider, pattern, Slot::Object, None, &mut rng)?;
    let m0 = draw(provider, pattern, Slot::Attribute, Some(&g0), &mut rng)?;
    chain.push((g0, m0));
    for _ in 1..spec.steps {
        let (prev_g, prev_m) = chain.last().expect("chain is non-empty");
        let g = draw(provider, pattern, Slot::Object, Some(prev_m), &mut rng)?;
        let m = match spec.update {
            UpdateOrder::Sequential => draw(provider, pattern, Slot::Attribute, Some(&g), &mut rng)?,
            UpdateOrder::Simultaneous => draw(provider, pattern, Slot::Attribute, Some(prev_g), &mut rng)?,
        };
        chain.push((g, m));
    }
    let empirical = pair_frequencies(&chain[spec.burn_in..])?;
    Ok(GibbsRun { chain, empirical })
}

/// Relative frequencies of the given pairs over the tokens that occur.
pub fn pair_frequencies(pairs: &[(String, String)]) -> Result<PooledContext> {
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut objects: BTreeMap<&str, usize> = BTreeMap::new();
    let mut attributes: BTreeMap<&str, usize> = BTreeMap::new();
    for (g, m) in pairs {
        *counts.entry((g.as_str(), m.as_str())).or_default() += 1;
        objects.insert(g, 0);
        attributes.insert(m, 0);
    }
    for (i, v) in objects.values_mut().enumerate() {
        *v = i;
    }
    for (i, v) in attributes.values_mut().enumerate() {
        *v = i;
    }
    let mut scores = ScoreMatrix::zeros(objects.len(), attributes.len());
    let total = pairs.len().max(1) as f64;
    for ((g, m), c) in counts {
        scores[(objects[g], attributes[m])] = c as f64 / total;
    }
    PooledContext::new(
        objects.keys().map(|s| String::from(*s)).collect(),
        attributes.keys().map(|s| String::from(*s)).collect(),
        scores,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use core::cell::Cell;

    fn ids(p: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    fn pattern() -> Pattern {
        Pattern::parse("p", "[object] can [attribute]").unwrap()
    }

    struct PointMass;

    impl ProbabilityProvider for PointMass {
        fn fill(&self, q: &FillQuery<'_>) -> Result<TokenDistribution> {
            let (a, b) = match q.target {
                Slot::Object => ("eagle", "owl"),
                Slot::Attribute => ("fly", "swim"),
            };
            Ok(TokenDistribution {
                tokens: vec![a.into(), b.into()],
                probs: vec![1.0, 0.0],
            })
        }
    }

    #[test]
    fn point_mass_chain_is_constant() {
        let run = gibbs_generate(&PointMass, &pattern(), &GibbsSpec::new(20, 0, 7)).unwrap();
        assert_eq!(run.chain.len(), 20);
        assert!(run.chain.iter().all(|p| p == &("eagle".into(), "fly".into())));
        assert_eq!(run.empirical.objects, vec![String::from("eagle")]);
        assert_eq!(run.empirical.scores.to_rows(), vec![vec![1.0]]);
    }

    #[test]
    fn queries_render_masks() {
        struct Recorder(Cell<usize>);
        impl ProbabilityProvider for Recorder {
            fn fill(&self, q: &FillQuery<'_>) -> Result<TokenDistribution> {
                let tokens = q.tokens()?;
                assert_eq!(tokens[q.mask_index()], crate::pattern::MASK);
                let masks = tokens.iter().filter(|t| *t == crate::pattern::MASK).count();
                assert_eq!(masks, if q.given.is_some() { 1 } else { 2 });
                self.0.set(self.0.get() + 1);
                Ok(TokenDistribution {
                    tokens: vec!["x".into()],
                    probs: vec![1.0],
                })
            }
        }
        let rec = Recorder(Cell::new(0));
        gibbs_generate(&rec, &pattern(), &GibbsSpec::new(5, 1, 0)).unwrap();
        assert_eq!(rec.0.get(), 10);
    }

    #[test]
    fn provider_contract_enforced() {
        struct Bad(Vec<f64>);
        impl ProbabilityProvider for Bad {
            fn fill(&self, _: &FillQuery<'_>) -> Result<TokenDistribution> {
                Ok(TokenDistribution {
                    tokens: (0..self.0.len()).map(|i| format!("t{i}")).collect(),
                    probs: self.0.clone(),
                })
            }
        }
        let spec = GibbsSpec::new(3, 0, 0);
        assert!(matches!(
            gibbs_generate(&Bad(vec![0.5, 0.4]), &pattern(), &spec),
            Err(Error::DistributionNotNormalized { .. })
        ));
        assert_eq!(
            gibbs_generate(&Bad(vec![]), &pattern(), &spec),
            Err(Error::EmptyVocabulary)
        );
        assert!(gibbs_generate(&Bad(vec![1.0]), &pattern(), &GibbsSpec::new(3, 3, 0)).is_err());
    }

    #[test]
    fn joint_provider_conditionals() {
        let w = ScoreMatrix::from_rows(&[vec![1.0, 3.0], vec![0.0, 4.0]]).unwrap();
        let p = JointProvider::new(ids("g", 2), ids("m", 2), w).unwrap();
        let pat = pattern();
        let d = p
            .fill(&FillQuery { pattern: &pat, target: Slot::Object, given: Some("m1") })
            .unwrap();
        assert_eq!(d.probs, vec![3.0 / 7.0, 4.0 / 7.0]);
        let d = p.fill(&FillQuery { pattern: &pat, target: Slot::Attribute, given: None }).unwrap();
        assert_eq!(d.probs, vec![0.125, 0.875]);
        assert!(p
            .fill(&FillQuery { pattern: &pat, target: Slot::Object, given: Some("m0") })
            .is_ok());
        assert!(matches!(
            p.fill(&FillQuery { pattern: &pat, target: Slot::Object, given: Some("zz") }),
            Err(Error::Provider(_))
        ));
    }

    #[test]
    fn seed_reproducible() {
        let w = ScoreMatrix::from_fn(3, 3, |g, m| 1.0 + (g * 3 + m) as f64);
        let p = JointProvider::new(ids("g", 3), ids("m", 3), w).unwrap();
        let a = gibbs_generate(&p, &pattern(), &GibbsSpec::new(500, 50, 11)).unwrap();
        let b = gibbs_generate(&p, &pattern(), &GibbsSpec::new(500, 50, 11)).unwrap();
        assert_eq!(a, b);
        let c = gibbs_generate(&p, &pattern(), &GibbsSpec::new(500, 50, 12)).unwrap();
        assert_ne!(a.chain, c.chain);
    }
}
