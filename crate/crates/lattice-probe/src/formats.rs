//! JSON, JSONL and CSV file formats.
//!
//! Every reader reports the offending field as a JSON path, e.g.
//! `incidence[2][0]`.

use std::fs;
use std::path::Path;

use lattice_probe_core::eval::{EvalReport, GoldMetadata, SweepPoint};
use lattice_probe_core::gibbs::JointProvider;
use lattice_probe_core::lattice::ConceptLattice;
use lattice_probe_core::pattern::Pattern;
use lattice_probe_core::pipeline::{Direction, Normalization, Pooling};
use lattice_probe_core::synthetic::{ConvergenceTable, SyntheticCorpus};
use lattice_probe_core::{FormalContext, GoldContext, PooledContext, ScoreMatrix, TriadicTensor};
use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{CliError, CliResult};

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

/// Parses `text` as `T`, naming the failing field on error.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { String::new() } else { format!(" at `{path}`") };
        CliError::Validation(format!("{origin}{at}: {}", e.inner()))
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(&read_text(path)?, &path.display().to_string())
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContextFile {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub incidence: Vec<Vec<u8>>,
}

fn incidence_rows(incidence: &[Vec<u8>]) -> CliResult<Vec<Vec<bool>>> {
    incidence
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| match v {
                    0 => Ok(false),
                    1 => Ok(true),
                    _ => Err(invalid(&format!("incidence[{i}][{j}]"), format!("expected 0 or 1, found {v}"))),
                })
                .collect()
        })
        .collect()
}

impl ContextFile {
    pub fn into_context(self) -> CliResult<FormalContext> {
        let rows = incidence_rows(&self.incidence)?;
        FormalContext::new(self.objects, self.attributes, &rows).map_err(|e| invalid("incidence", e))
    }

    pub fn from_context(ctx: &FormalContext) -> Self {
        Self {
            objects: ctx.objects().to_vec(),
            attributes: ctx.attributes().to_vec(),
            incidence: ctx
                .to_matrix()
                .into_iter()
                .map(|row| row.into_iter().map(u8::from).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MetadataFile {
    pub name: String,
    #[serde(default)]
    pub density: Option<f64>,
    #[serde(default)]
    pub object_tokens: Option<String>,
    #[serde(default)]
    pub attribute_tokens: Option<String>,
}

/// A context file with optional dataset metadata.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldFile {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub incidence: Vec<Vec<u8>>,
    #[serde(default)]
    pub metadata: Option<MetadataFile>,
}

impl GoldFile {
    pub fn into_gold(self) -> CliResult<GoldContext> {
        let ctx = ContextFile {
            objects: self.objects,
            attributes: self.attributes,
            incidence: self.incidence,
        }
        .into_context()?;
        let metadata = self.metadata.map(|m| GoldMetadata {
            name: m.name,
            density: m.density,
            object_tokens: m.object_tokens,
            attribute_tokens: m.attribute_tokens,
        });
        GoldContext::new(ctx, metadata).map_err(|e| invalid("metadata.density", e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionName {
    ObjectGivenAttribute,
    AttributeGivenObject,
}

impl From<DirectionName> for Direction {
    fn from(d: DirectionName) -> Self {
        match d {
            DirectionName::ObjectGivenAttribute => Direction::ObjectGivenAttribute,
            DirectionName::AttributeGivenObject => Direction::AttributeGivenObject,
        }
    }
}

impl From<Direction> for DirectionName {
    fn from(d: Direction) -> Self {
        match d {
            Direction::ObjectGivenAttribute => DirectionName::ObjectGivenAttribute,
            Direction::AttributeGivenObject => DirectionName::AttributeGivenObject,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub patterns: Vec<String>,
    pub direction: DirectionName,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl TensorFile {
    pub fn into_tensor(self) -> CliResult<TriadicTensor> {
        TriadicTensor::new(
            self.objects,
            self.attributes,
            self.patterns,
            self.direction.into(),
            &self.values,
        )
        .map_err(|e| invalid("values", e))
    }

    pub fn from_tensor(t: &TriadicTensor) -> Self {
        Self {
            objects: t.objects().to_vec(),
            attributes: t.attributes().to_vec(),
            patterns: t.patterns().to_vec(),
            direction: t.direction().into(),
            values: t.to_nested(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PoolingName {
    Avg,
    Max,
}

impl From<PoolingName> for Pooling {
    fn from(p: PoolingName) -> Self {
        match p {
            PoolingName::Avg => Pooling::Avg,
            PoolingName::Max => Pooling::Max,
        }
    }
}

impl From<Pooling> for PoolingName {
    fn from(p: Pooling) -> Self {
        match p {
            Pooling::Avg => PoolingName::Avg,
            Pooling::Max => PoolingName::Max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NormName {
    None,
    Minmax,
    Sigmoid,
}

impl From<NormName> for Normalization {
    fn from(n: NormName) -> Self {
        match n {
            NormName::None => Normalization::None,
            NormName::Minmax => Normalization::MinMaxLog,
            NormName::Sigmoid => Normalization::Sigmoid,
        }
    }
}

impl From<Normalization> for NormName {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::None => NormName::None,
            Normalization::MinMaxLog => NormName::Minmax,
            Normalization::Sigmoid => NormName::Sigmoid,
        }
    }
}

/// Objects × attributes score matrix with its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PooledFile {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub pooling: Option<PoolingName>,
    #[serde(default = "default_norm")]
    pub normalization: NormName,
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn default_norm() -> NormName {
    NormName::None
}

impl PooledFile {
    pub fn into_pooled(self) -> CliResult<PooledContext> {
        let scores = ScoreMatrix::from_rows(&self.values).map_err(|e| invalid("values", e))?;
        let mut p = PooledContext::new(self.objects, self.attributes, scores).map_err(|e| invalid("values", e))?;
        if let Some(a) = self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(invalid("alpha", format!("{a} is outside [0, 1]")));
            }
        }
        p.pooling = self.pooling.map(Into::into);
        p.normalization = self.normalization.into();
        p.alpha = self.alpha;
        Ok(p)
    }

    pub fn from_pooled(p: &PooledContext) -> Self {
        Self {
            objects: p.objects.clone(),
            attributes: p.attributes.clone(),
            values: p.scores.to_rows(),
            pooling: p.pooling.map(Into::into),
            normalization: p.normalization.into(),
            alpha: p.alpha,
        }
    }
}

/// Reads either a binary context (`incidence`) or a score matrix (`values`).
pub fn read_scores(path: &Path) -> CliResult<PooledContext> {
    let text = read_text(path)?;
    let origin = path.display().to_string();
    let value: serde_json::Value = parse_json(&text, &origin)?;
    if value.get("incidence").is_some() {
        let ctx = parse_json::<ContextFile>(&text, &origin)?.into_context()?;
        Ok(PooledContext::from_context(&ctx))
    } else {
        parse_json::<PooledFile>(&text, &origin)?.into_pooled()
    }
}

/// Joint weights for the built-in provider, stored as a score matrix file.
pub fn read_joint(path: &Path) -> CliResult<JointProvider> {
    let p = read_json::<PooledFile>(path)?.into_pooled()?;
    JointProvider::new(p.objects, p.attributes, p.scores).map_err(|e| invalid("values", e))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternEntry {
    pub id: String,
    pub template: String,
}

pub fn read_patterns(path: &Path) -> CliResult<Vec<Pattern>> {
    let entries: Vec<PatternEntry> = read_json(path)?;
    if entries.is_empty() {
        return Err(invalid("patterns", "no patterns given"));
    }
    entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| Pattern::parse(e.id, &e.template).map_err(|err| invalid(&format!("[{i}].template"), err)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusLine {
    pub pattern: String,
    pub object: String,
    pub attribute: String,
    pub text: Vec<String>,
}

pub fn corpus_jsonl(corpus: &SyntheticCorpus) -> Vec<u8> {
    let mut out = Vec::new();
    for s in &corpus.sentences {
        let line = CorpusLine {
            pattern: s.pattern.clone(),
            object: s.object.clone(),
            attribute: s.attribute.clone(),
            text: s.tokens.clone(),
        };
        serde_json::to_writer(&mut out, &line).expect("in-memory serialization cannot fail");
        out.push(b'\n');
    }
    out
}

/// Parses JSONL, naming the line and field of the first error.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str, origin: &str) -> CliResult<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_json(l, &format!("{origin} line {}", i + 1)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLine {
    pub step: usize,
    pub object: String,
    pub attribute: String,
}

pub fn chain_jsonl(chain: &[(String, String)]) -> Vec<u8> {
    let mut out = Vec::new();
    for (step, (g, m)) in chain.iter().enumerate() {
        let line = ChainLine {
            step,
            object: g.clone(),
            attribute: m.clone(),
        };
        serde_json::to_writer(&mut out, &line).expect("in-memory serialization cannot fail");
        out.push(b'\n');
    }
    out
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn convergence_csv(table: &ConvergenceTable) -> Vec<u8> {
    csv_bytes(
        &["n", "trial", "distance"],
        table
            .rows
            .iter()
            .map(|r| vec![r.n.to_string(), r.trial.to_string(), r.distance.to_string()]),
    )
}

/// Parses a `n,trial,distance` table.
pub fn parse_convergence_csv(text: &str) -> CliResult<Vec<(usize, usize, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| invalid("header", e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["n", "trial", "distance"] {
        return Err(invalid("header", "expected n,trial,distance"));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, rec)| rec.map_err(|e| invalid(&format!("row {}", i + 1), e)))
        .collect()
}

pub fn metrics_csv(report: &EvalReport) -> Vec<u8> {
    csv_bytes(
        &["metric", "value"],
        report.aggregate.iter().map(|(k, v)| vec![k.clone(), v.to_string()]),
    )
}

pub fn sweep_csv(points: &[SweepPoint]) -> Vec<u8> {
    csv_bytes(
        &["alpha", "f1", "predicted_positive"],
        points
            .iter()
            .map(|p| vec![p.alpha.to_string(), p.f1.to_string(), p.predicted_positive.to_string()]),
    )
}

/// Serializes pairs as a JSON object, keeping their order.
struct Ordered<'a, V>(&'a [(String, V)]);

impl<V: Serialize> Serialize for Ordered<'_, V> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct QueryFile<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    average_precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hits: Option<Ordered<'a, bool>>,
    tied: bool,
}

#[derive(Serialize)]
struct SweepFile {
    alpha: f64,
    f1: f64,
    predicted_positive: usize,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    task: &'static str,
    aggregate: Ordered<'a, f64>,
    tied_queries: usize,
    unaligned: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_curve: Option<Vec<SweepFile>>,
    per_query: Vec<QueryFile<'a>>,
}

/// Report JSON with keys in a fixed order: `task`, `aggregate` (metrics in
/// computation order), `tied_queries`, `unaligned`, optional `alpha_curve`,
/// `per_query`.
pub fn report_json(report: &EvalReport, ks: &[usize], curve: Option<&[SweepPoint]>) -> Vec<u8> {
    let hits: Vec<Vec<(String, bool)>> = report
        .per_query
        .iter()
        .map(|q| ks.iter().zip(&q.hits).map(|(k, h)| (format!("hit@{k}"), *h)).collect())
        .collect();
    let file = ReportFile {
        task: report.task.as_str(),
        aggregate: Ordered(&report.aggregate),
        tied_queries: report.tied_queries,
        unaligned: &report.unaligned,
        alpha_curve: curve.map(|c| {
            c.iter()
                .map(|p| SweepFile {
                    alpha: p.alpha,
                    f1: p.f1,
                    predicted_positive: p.predicted_positive,
                })
                .collect()
        }),
        per_query: report
            .per_query
            .iter()
            .zip(&hits)
            .map(|(q, h)| QueryFile {
                id: &q.id,
                rank: q.rank,
                average_precision: q.average_precision,
                f1: q.f1,
                hits: (!h.is_empty()).then_some(Ordered(h.as_slice())),
                tied: q.tied,
            })
            .collect(),
    };
    to_json_pretty(&file)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub extent: Vec<String>,
    pub intent: Vec<String>,
}

/// Concepts in lattice order with identifiers resolved against `ctx`.
pub fn concept_listing(lattice: &ConceptLattice, ctx: &FormalContext) -> Vec<ConceptEntry> {
    lattice
        .concepts
        .iter()
        .map(|c| ConceptEntry {
            extent: c.extent.iter().map(|g| ctx.objects()[g].clone()).collect(),
            intent: c.intent.iter().map(|m| ctx.attributes()[m].clone()).collect(),
        })
        .collect()
}
