//! Concept enumeration (NextClosure) and the covering relation.

use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::context::{FormalConcept, FormalContext};
use crate::error::{Error, Result};

/// Default object cap for exact enumeration.
pub const DEFAULT_OBJECT_CAP: usize = 64;

/// Enumerates every concept of `ctx` in lectic order of intents, using
/// [`DEFAULT_OBJECT_CAP`].
pub fn enumerate_concepts(ctx: &FormalContext) -> Result<Vec<FormalConcept>> {
    enumerate_concepts_capped(ctx, DEFAULT_OBJECT_CAP)
}

pub fn enumerate_concepts_capped(ctx: &FormalContext, cap: usize) -> Result<Vec<FormalConcept>> {
    if ctx.num_objects() > cap {
        return Err(Error::ContextTooLarge {
            objects: ctx.num_objects(),
            cap,
        });
    }
    let mut out = Vec::new();
    let mut current = ctx.concept_of_intent(&BitSet::empty(ctx.num_attributes()));
    loop {
        let next = next_closure(ctx, &current.intent);
        out.push(current);
        match next {
            Some(c) => current = c,
            None => return Ok(out),
        }
    }
}

/// Lectically next closed intent after `intent`, with its extent.
fn next_closure(ctx: &FormalContext, intent: &BitSet) -> Option<FormalConcept> {
    let k = ctx.num_attributes();
    let mut prefix = intent.clone();
    for m in (0..k).rev() {
        if intent.contains(m) {
            prefix.remove(m);
            continue;
        }
        // prefix == intent ∩ {0..m-1}
        let mut candidate = prefix.clone();
        candidate.insert(m);
        let concept = ctx.concept_of_intent(&candidate);
        let mut low = concept.intent.clone();
        low.truncate_below(m);
        if low == prefix {
            return Some(concept);
        }
    }
    None
}

/// Concepts of one context together with their covering relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptLattice {
    pub concepts: Vec<FormalConcept>,
    /// `(lower, upper)` index pairs; sorted.
    pub covers: Vec<(usize, usize)>,
    pub top: usize,
    pub bottom: usize,
}

/// Orders `concepts` by extent inclusion and keeps only covering pairs.
///
/// The input order is preserved in the result, so lectic output of
/// [`enumerate_concepts`] stays lectic.
pub fn build_lattice(concepts: Vec<FormalConcept>) -> Result<ConceptLattice> {
    if concepts.is_empty() {
        return Err(Error::EmptyConceptList);
    }
    let n = concepts.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        concepts[a]
            .extent
            .len()
            .cmp(&concepts[b].extent.len())
            .then(concepts[a].extent.cmp(&concepts[b].extent))
    });
    for w in order.windows(2) {
        if concepts[w[0]].extent == concepts[w[1]].extent {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicateExtent { first, second });
        }
    }

    // Upper covers of c are the minimal strict supersets. Scanning candidates
    // by increasing extent size, a superset is minimal iff it contains no
    // previously accepted cover.
    let mut covers = Vec::new();
    for (pos, &lo) in order.iter().enumerate() {
        let mut uppers: Vec<usize> = Vec::new();
        for &hi in &order[pos + 1..] {
            let ext = &concepts[hi].extent;
            if concepts[lo].extent.is_strict_subset(ext)
                && !uppers.iter().any(|&u| concepts[u].extent.is_subset(ext))
            {
                uppers.push(hi);
            }
        }
        covers.extend(uppers.into_iter().map(|hi| (lo, hi)));
    }
    covers.sort_unstable();

    let top = *order.last().unwrap();
    let bottom = order[0];
    Ok(ConceptLattice {
        concepts,
        covers,
        top,
        bottom,
    })
}

impl ConceptLattice {
    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.concepts[a].leq(&self.concepts[b])
    }

    /// Indices of concepts covering `i`.
    pub fn upper_covers(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.covers.iter().filter(move |c| c.0 == i).map(|c| c.1)
    }

    /// Indices of concepts covered by `i`.
    pub fn lower_covers(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.covers.iter().filter(move |c| c.1 == i).map(|c| c.0)
    }

    /// Objects introduced at concept `i`: its extent minus the extents of its
    /// lower covers.
    pub fn own_objects(&self, i: usize) -> BitSet {
        let mut own = self.concepts[i].extent.clone();
        for lo in self.lower_covers(i) {
            own.difference_with(&self.concepts[lo].extent);
        }
        own
    }

    /// Attributes introduced at concept `i`: its intent minus the intents of
    /// its upper covers.
    pub fn own_attributes(&self, i: usize) -> BitSet {
        let mut own = self.concepts[i].intent.clone();
        for hi in self.upper_covers(i) {
            own.difference_with(&self.concepts[hi].intent);
        }
        own
    }

    /// Atoms: concepts covering the bottom.
    pub fn atoms(&self) -> Vec<usize> {
        self.upper_covers(self.bottom).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn ctx_from(n: usize, k: usize, f: impl FnMut(usize, usize) -> bool) -> FormalContext {
        FormalContext::from_fn(ids("g", n), ids("m", k), f).unwrap()
    }

    /// Closure of every object subset, deduplicated.
    fn powerset_concepts(ctx: &FormalContext) -> Vec<FormalConcept> {
        let n = ctx.num_objects();
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

    #[test]
    fn identity_three_has_five_concepts() {
        let ctx = ctx_from(3, 3, |g, m| g == m);
        let concepts = enumerate_concepts(&ctx).unwrap();
        assert_eq!(concepts.len(), 5);
        let oracle = powerset_concepts(&ctx);
        assert_eq!(oracle.len(), 5);
        for c in &oracle {
            assert!(concepts.contains(c));
        }
    }

    #[test]
    fn all_true_has_single_concept() {
        let ctx = ctx_from(2, 2, |_, _| true);
        let concepts = enumerate_concepts(&ctx).unwrap();
        assert_eq!(concepts.len(), 1);
        assert!(concepts[0].extent.is_full() && concepts[0].intent.is_full());
        let lat = build_lattice(concepts).unwrap();
        assert!(lat.covers.is_empty());
        assert_eq!((lat.top, lat.bottom), (0, 0));
    }

    #[test]
    fn output_is_lectic() {
        let ctx = ctx_from(4, 4, |g, m| (g * 7 + m * 3) % 5 < 2);
        let concepts = enumerate_concepts(&ctx).unwrap();
        for w in concepts.windows(2) {
            assert_eq!(w[0].intent.lectic_cmp(&w[1].intent), core::cmp::Ordering::Less);
        }
        assert!(concepts.last().unwrap().intent.is_full());
    }

    #[test]
    fn cap_is_enforced() {
        let ctx = ctx_from(65, 1, |_, _| true);
        assert_eq!(
            enumerate_concepts(&ctx),
            Err(Error::ContextTooLarge { objects: 65, cap: 64 })
        );
        assert!(enumerate_concepts_capped(&ctx, 100).is_ok());
    }

    #[test]
    fn identity_lattice_is_diamond() {
        let ctx = ctx_from(3, 3, |g, m| g == m);
        let lat = build_lattice(enumerate_concepts(&ctx).unwrap()).unwrap();
        assert_eq!(lat.covers.len(), 6);
        assert!(lat.concepts[lat.top].extent.is_full());
        assert!(lat.concepts[lat.bottom].intent.is_full());
        assert!(lat.concepts[lat.bottom].extent.is_empty());
        assert_eq!(lat.atoms().len(), 3);
    }

    #[test]
    fn chain_context_gives_chain() {
        // strictly lower-triangular: g has m iff m < g
        let ctx = ctx_from(3, 3, |g, m| m < g);
        let lat = build_lattice(enumerate_concepts(&ctx).unwrap()).unwrap();
        assert_eq!(lat.len(), 4);
        assert_eq!(lat.covers.len(), 3);
        for i in 0..4 {
            for j in 0..4 {
                assert!(lat.leq(i, j) || lat.leq(j, i));
            }
        }
        // with the diagonal, the last row equals M and the bottom has a
        // non-empty extent: a 3-chain
        let ctx = ctx_from(3, 3, |g, m| m <= g);
        let lat = build_lattice(enumerate_concepts(&ctx).unwrap()).unwrap();
        assert_eq!((lat.len(), lat.covers.len()), (3, 2));
    }

    #[test]
    fn duplicate_extents_rejected() {
        let ctx = ctx_from(2, 2, |g, m| g == m);
        let c = ctx.closure(&[0]).unwrap();
        assert!(matches!(
            build_lattice(vec![c.clone(), c]),
            Err(Error::DuplicateExtent { first: 0, second: 1 })
        ));
        assert_eq!(build_lattice(Vec::new()), Err(Error::EmptyConceptList));
    }

    #[test]
    fn own_labels_identity() {
        let ctx = ctx_from(3, 3, |g, m| g == m);
        let lat = build_lattice(enumerate_concepts(&ctx).unwrap()).unwrap();
        for a in lat.atoms() {
            let objs: Vec<_> = lat.own_objects(a).iter().collect();
            let attrs: Vec<_> = lat.own_attributes(a).iter().collect();
            assert_eq!(objs.len(), 1);
            assert_eq!(objs, attrs);
        }
        assert!(lat.own_objects(lat.top).is_empty());
        assert!(lat.own_attributes(lat.bottom).is_empty());
    }
}
