//! Client for out-of-process probability providers.
//!
//! Protocol: `POST {endpoint}/fill` with `{"tokens", "mask_index", "top_k"}`;
//! the reply is `{"tokens", "probs", "mass"}` where `probs` sums to `mass`
//! (the share of the full vocabulary covered by the returned tokens).

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::time::Duration;

use lattice_probe_core::gibbs::{FillQuery, ProbabilityProvider, TokenDistribution, MASS_TOLERANCE};
use lattice_probe_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::formats::parse_json;

pub const DEFAULT_TOP_K: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillRequest {
    pub tokens: Vec<String>,
    pub mask_index: usize,
    pub top_k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillResponse {
    pub tokens: Vec<String>,
    pub probs: Vec<f64>,
    pub mass: f64,
}

fn violation(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Provider(format!("field `{field}`: {msg}"))
}

impl FillResponse {
    /// Checks the reply against the protocol and rescales it to sum to one.
    pub fn into_distribution(self) -> Result<TokenDistribution> {
        if self.tokens.is_empty() {
            return Err(violation("tokens", "empty"));
        }
        if self.probs.len() != self.tokens.len() {
            return Err(violation(
                "probs",
                format!("{} values for {} tokens", self.probs.len(), self.tokens.len()),
            ));
        }
        let mut seen = HashSet::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if !seen.insert(t.as_str()) {
                return Err(violation(&format!("tokens[{i}]"), format!("duplicate token {t:?}")));
            }
        }
        for (i, &p) in self.probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(violation(&format!("probs[{i}]"), format!("{p} is not a probability")));
            }
        }
        if !(self.mass > 0.0 && self.mass <= 1.0 + MASS_TOLERANCE) {
            return Err(violation("mass", format!("{} is outside (0, 1]", self.mass)));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - self.mass).abs() > MASS_TOLERANCE {
            return Err(violation("mass", format!("probs sum to {sum}, reported {}", self.mass)));
        }
        let probs = self.probs.iter().map(|p| p / sum).collect();
        Ok(TokenDistribution {
            tokens: self.tokens,
            probs,
        })
    }
}

/// Queries an HTTP provider and caches replies per request.
///
/// Not thread-safe: the cache uses interior mutability.
pub struct HttpProvider {
    url: String,
    top_k: usize,
    agent: ureq::Agent,
    cache: RefCell<HashMap<(Vec<String>, usize), TokenDistribution>>,
}

impl HttpProvider {
    pub fn new(endpoint: &str, top_k: usize, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        Self {
            url: format!("{}/fill", endpoint.trim_end_matches('/')),
            top_k,
            agent: ureq::Agent::new_with_config(config),
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn request(&self, req: &FillRequest) -> Result<TokenDistribution> {
        let key = (req.tokens.clone(), req.mask_index);
        if let Some(hit) = self.cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(req)
            .map_err(|e| Error::Provider(format!("{}: {e}", self.url)))?;
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Provider(format!("{}: {e}", self.url)))?;
        let reply: FillResponse = parse_json(&body, "provider reply").map_err(|e| Error::Provider(e.to_string()))?;
        let dist = reply.into_distribution()?;
        self.cache.borrow_mut().insert(key, dist.clone());
        Ok(dist)
    }
}

impl ProbabilityProvider for HttpProvider {
    fn fill(&self, query: &FillQuery<'_>) -> Result<TokenDistribution> {
        self.request(&FillRequest {
            tokens: query.tokens()?,
            mask_index: query.mask_index(),
            top_k: self.top_k,
        })
    }
}
