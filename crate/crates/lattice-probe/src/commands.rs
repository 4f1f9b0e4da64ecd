//! The subcommands. Each one reads and validates all inputs, computes every
//! output in memory and only then writes the files.

use std::time::Duration;

use lattice_probe_core::dot::{export_dot, Labeling};
use lattice_probe_core::eval::{alpha_grid, alpha_sweep, eval_concept_classification, eval_reconstruction, RankDirection};
use lattice_probe_core::gibbs::{gibbs_generate, GibbsSpec, ProbabilityProvider, UpdateOrder};
use lattice_probe_core::pipeline::{binarize, normalize_minmax_log_scoped, normalize_sigmoid, pool, NormScope, Normalization};
use lattice_probe_core::synthetic::{
    context_distance, convergence_experiment, expected_context, generate_corpus, learn_context_with, ConvergenceSpec,
    CorpusSpec, LearnNormalization,
};
use lattice_probe_core::{build_lattice, enumerate_concepts};

use crate::config::{required, LabelingName, LearnNormName, Options, RankAxis, RunConfig, TaskName, UpdateName};
use crate::error::{CliError, CliResult};
use crate::formats::{
    chain_jsonl, concept_listing, convergence_csv, corpus_jsonl, metrics_csv, read_joint, read_json, read_patterns,
    read_scores, report_json, sweep_csv, to_json_pretty, ContextFile, GoldFile, NormName, PooledFile, TensorFile,
};
use crate::output::Outputs;
use crate::provider::{HttpProvider, DEFAULT_TOP_K};

pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];
pub const DEFAULT_SWEEP_POINTS: usize = 21;
pub const DEFAULT_CORPUS_SIZE: usize = 10_000;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_SCHEDULE: [usize; 3] = [100, 1_000, 10_000];
pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_BURN_IN: usize = 1_000;
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

/// Result of a subcommand before anything is written.
pub struct Run {
    pub config: RunConfig,
    pub outputs: Outputs,
    /// Human-readable summary for stdout.
    pub summary: String,
}

impl Run {
    fn new(subcommand: &'static str, options: Options, mut outputs: Outputs, summary: String) -> CliResult<Self> {
        let config = RunConfig::new(subcommand, options)?;
        outputs.add(crate::config::RUN_CONFIG_FILE, config.to_json());
        Ok(Self {
            config,
            outputs,
            summary,
        })
    }
}

pub fn build_context(mut o: Options) -> CliResult<Run> {
    RunConfig::new("build-context", o.clone())?;
    required(&o.out, "out")?;
    let tensor = read_json::<TensorFile>(required(&o.tensor, "tensor")?)?.into_tensor()?;
    let pooling = *required(&o.pooling, "pooling")?;
    let norm = *o.norm.get_or_insert(NormName::Minmax);
    let norm_core: Normalization = norm.into();
    let alpha = *o.alpha.get_or_insert(norm_core.default_alpha());

    let pooled = pool(&tensor, pooling.into())?;
    let mut normalized = match norm {
        NormName::None => pooled,
        NormName::Minmax => {
            let scope = if *o.row_norm.get_or_insert(false) {
                NormScope::Row
            } else {
                NormScope::Matrix
            };
            normalize_minmax_log_scoped(&pooled, scope)?
        }
        NormName::Sigmoid => normalize_sigmoid(&pooled, *o.sigmoid_scale.get_or_insert(1.0), o.sigmoid_shift)?,
    };
    normalized.alpha = Some(alpha);
    let ctx = binarize(&normalized, alpha)?;

    let mut out = Outputs::default();
    out.add("pooled.json", to_json_pretty(&PooledFile::from_pooled(&normalized)));
    out.add("context.json", to_json_pretty(&ContextFile::from_context(&ctx)));
    let summary = format!(
        "density {:.4} ({} of {} cells)",
        ctx.density(),
        ctx.incidence_count(),
        ctx.num_objects() * ctx.num_attributes()
    );
    Run::new("build-context", o, out, summary)
}

pub fn lattice(mut o: Options) -> CliResult<Run> {
    RunConfig::new("lattice", o.clone())?;
    required(&o.out, "out")?;
    let mut ctx = read_json::<ContextFile>(required(&o.context, "context")?)?.into_context()?;
    if *o.clarify.get_or_insert(false) {
        ctx = ctx.clarify();
    }
    let labeling = match *o.labeling.get_or_insert(LabelingName::Reduced) {
        LabelingName::Full => Labeling::Full,
        LabelingName::Reduced => Labeling::Reduced,
    };
    let lat = build_lattice(enumerate_concepts(&ctx)?)?;
    let mut out = Outputs::default();
    out.add("lattice.dot", export_dot(&lat, &ctx, labeling).into_bytes());
    out.add("concepts.json", to_json_pretty(&concept_listing(&lat, &ctx)));
    let summary = format!("{} concepts, {} cover edges", lat.len(), lat.covers.len());
    Run::new("lattice", o, out, summary)
}

pub fn eval(mut o: Options) -> CliResult<Run> {
    RunConfig::new("eval", o.clone())?;
    required(&o.out, "out")?;
    let scores = read_scores(required(&o.scores, "scores")?)?;
    let gold = read_json::<GoldFile>(required(&o.gold, "gold")?)?.into_gold()?;
    let mut out = Outputs::default();
    let report = match *o.task.get_or_insert(TaskName::Reconstruction) {
        TaskName::Reconstruction => {
            let direction = match required(&o.direction, "direction")? {
                RankAxis::Obj => RankDirection::Objects,
                RankAxis::Attr => RankDirection::Attributes,
            };
            let ks = o.ks.get_or_insert_with(|| DEFAULT_KS.to_vec()).clone();
            let filtered = *o.filtered.get_or_insert(false);
            let report = eval_reconstruction(&scores, &gold, direction, &ks, filtered)?;
            out.add("report.json", report_json(&report, &ks, None));
            report
        }
        TaskName::Classification => {
            let alpha = *o
                .alpha
                .get_or_insert(scores.alpha.unwrap_or(scores.normalization.default_alpha()));
            let points = *o.sweep.get_or_insert(DEFAULT_SWEEP_POINTS);
            let report = eval_concept_classification(&scores, &gold, alpha)?;
            let curve = alpha_sweep(&scores, &gold, &alpha_grid(points))?;
            out.add("report.json", report_json(&report, &[], Some(&curve)));
            out.add("alpha_curve.csv", sweep_csv(&curve));
            report
        }
    };
    out.add("report.csv", metrics_csv(&report));
    let mut summary: Vec<String> = report.aggregate.iter().map(|(k, v)| format!("{k} {v:.4}")).collect();
    if !report.unaligned.is_empty() {
        summary.push(format!("{} gold identifiers not scored", report.unaligned.len()));
    }
    Run::new("eval", o, out, summary.join("\n"))
}

pub fn synth(mut o: Options) -> CliResult<Run> {
    RunConfig::new("synth", o.clone())?;
    required(&o.out, "out")?;
    let ctx_path = required(&o.context, "context")?.clone();
    let ctx = read_json::<ContextFile>(&ctx_path)?.into_context()?;
    let patterns = read_patterns(required(&o.patterns, "patterns")?)?;
    let n = *o.n.get_or_insert(DEFAULT_CORPUS_SIZE);
    let seed = *o.seed.get_or_insert(0);
    let noise = *o.noise.get_or_insert(0.0);
    let mode = match *o.learn_norm.get_or_insert(LearnNormName::Max) {
        LearnNormName::Max => LearnNormalization::Max,
        LearnNormName::Row => LearnNormalization::RowStochastic,
    };
    let trials = *o.trials.get_or_insert(DEFAULT_TRIALS);
    let schedule = o.schedule.get_or_insert_with(|| DEFAULT_SCHEDULE.to_vec()).clone();

    let mut spec = CorpusSpec::new(n, seed);
    spec.noise_rate = noise;
    spec.source = ctx_path.display().to_string();
    let corpus = generate_corpus(&ctx, &patterns, &spec)?;
    let learned = learn_context_with(&corpus, ctx.objects(), ctx.attributes(), mode)?;
    let target = expected_context(&ctx, &spec.pair_dist, mode)?;
    let distance = context_distance(&learned.scores, &target, Default::default())?;

    let mut conv = ConvergenceSpec::new(schedule, trials, seed);
    conv.noise_rate = noise;
    conv.normalization = mode;
    let table = convergence_experiment(&ctx, &patterns, &conv)?;

    let mut out = Outputs::default();
    out.add("corpus.jsonl", corpus_jsonl(&corpus));
    out.add("learned.json", to_json_pretty(&PooledFile::from_pooled(&learned)));
    out.add("convergence.csv", convergence_csv(&table));
    let mut summary = vec![format!("{n} sentences, distance to expected context {distance:.4}")];
    summary.extend(
        table
            .summary()
            .iter()
            .map(|s| format!("n={} mean distance {:.4} (sd {:.4})", s.n, s.mean, s.std)),
    );
    Run::new("synth", o, out, summary.join("\n"))
}

pub fn gibbs(mut o: Options) -> CliResult<Run> {
    RunConfig::new("gibbs", o.clone())?;
    required(&o.out, "out")?;
    let patterns = read_patterns(required(&o.patterns, "patterns")?)?;
    let pattern = match &o.pattern {
        Some(id) => patterns
            .iter()
            .find(|p| p.id() == id)
            .ok_or_else(|| CliError::Validation(format!("--pattern: no pattern with id {id:?}")))?,
        None => &patterns[0],
    };
    let steps = *o.steps.get_or_insert(DEFAULT_STEPS);
    let burn_in = *o.burn_in.get_or_insert(DEFAULT_BURN_IN.min(steps / 2));
    let mut spec = GibbsSpec::new(steps, burn_in, *o.seed.get_or_insert(0));
    spec.update = match *o.update.get_or_insert(UpdateName::Sequential) {
        UpdateName::Sequential => UpdateOrder::Sequential,
        UpdateName::Simultaneous => UpdateOrder::Simultaneous,
    };
    let endpoint = required(&o.provider, "provider")?.clone();
    let provider: Box<dyn ProbabilityProvider> = if endpoint == "builtin" {
        Box::new(read_joint(required(&o.joint, "joint")?)?)
    } else {
        let top_k = *o.top_k.get_or_insert(DEFAULT_TOP_K);
        let timeout = Duration::from_secs(*o.timeout.get_or_insert(DEFAULT_TIMEOUT_SECS));
        Box::new(HttpProvider::new(&endpoint, top_k, timeout))
    };
    let run = gibbs_generate(provider.as_ref(), pattern, &spec)?;

    let mut out = Outputs::default();
    out.add("chain.jsonl", chain_jsonl(&run.chain));
    out.add("empirical.json", to_json_pretty(&PooledFile::from_pooled(&run.empirical)));
    let summary = format!(
        "{steps} steps, {} objects and {} attributes visited after burn-in",
        run.empirical.objects.len(),
        run.empirical.attributes.len()
    );
    Run::new("gibbs", o, out, summary)
}
