//! Formal contexts `(G, M, I)` and their derivation operators.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::error::{Axis, Error, Result};

/// A finite set of objects, a finite set of attributes and a binary
/// incidence relation between them.
///
/// Incidence is stored twice, once per object (its attribute row) and once
/// per attribute (its object column), so both derivation operators reduce to
/// word-wise intersections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    rows: Vec<BitSet>,
    cols: Vec<BitSet>,
}

pub(crate) fn check_unique(ids: &[String], axis: Axis) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateIdentifier {
                axis,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

impl FormalContext {
    /// Builds a context from a row-major boolean matrix.
    pub fn new(
        objects: Vec<String>,
        attributes: Vec<String>,
        incidence: &[Vec<bool>],
    ) -> Result<Self> {
        if incidence.len() != objects.len() {
            return Err(Error::ShapeMismatch {
                expected: alloc::format!("{} rows", objects.len()),
                found: alloc::format!("{} rows", incidence.len()),
            });
        }
        for (g, row) in incidence.iter().enumerate() {
            if row.len() != attributes.len() {
                return Err(Error::ShapeMismatch {
                    expected: alloc::format!("{} columns", attributes.len()),
                    found: alloc::format!("{} columns in row {g}", row.len()),
                });
            }
        }
        Self::from_fn(objects, attributes, |g, m| incidence[g][m])
    }

    /// Builds a context whose incidence is given by `has(g, m)`.
    pub fn from_fn<F>(objects: Vec<String>, attributes: Vec<String>, mut has: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> bool,
    {
        check_unique(&objects, Axis::Object)?;
        check_unique(&attributes, Axis::Attribute)?;
        let (n, k) = (objects.len(), attributes.len());
        let mut rows = alloc::vec![BitSet::empty(k); n];
        let mut cols = alloc::vec![BitSet::empty(n); k];
        for (g, row) in rows.iter_mut().enumerate() {
            for (m, col) in cols.iter_mut().enumerate() {
                if has(g, m) {
                    row.insert(m);
                    col.insert(g);
                }
            }
        }
        Ok(Self {
            objects,
            attributes,
            rows,
            cols,
        })
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    #[inline]
    pub fn has(&self, g: usize, m: usize) -> bool {
        self.rows[g].contains(m)
    }

    /// Attributes of object `g`.
    pub fn row(&self, g: usize) -> &BitSet {
        &self.rows[g]
    }

    /// Objects having attribute `m`.
    pub fn column(&self, m: usize) -> &BitSet {
        &self.cols[m]
    }

    pub fn incidence_count(&self) -> usize {
        self.rows.iter().map(BitSet::len).sum()
    }

    /// Fraction of incident cells; zero for an empty context.
    pub fn density(&self) -> f64 {
        let cells = self.objects.len() * self.attributes.len();
        if cells == 0 {
            0.0
        } else {
            self.incidence_count() as f64 / cells as f64
        }
    }

    /// Row-major `Vec<Vec<bool>>` view of the incidence relation.
    pub fn to_matrix(&self) -> Vec<Vec<bool>> {
        self.rows
            .iter()
            .map(|r| (0..self.attributes.len()).map(|m| r.contains(m)).collect())
            .collect()
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == id)
    }

    pub fn attribute_index(&self, id: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == id)
    }

    fn object_set(&self, objs: &[usize]) -> Result<BitSet> {
        let n = self.objects.len();
        if let Some(&index) = objs.iter().find(|&&g| g >= n) {
            return Err(Error::IndexOutOfRange {
                axis: Axis::Object,
                index,
                size: n,
            });
        }
        Ok(BitSet::from_indices(n, objs.iter().copied()))
    }

    fn attribute_set(&self, attrs: &[usize]) -> Result<BitSet> {
        let k = self.attributes.len();
        if let Some(&index) = attrs.iter().find(|&&m| m >= k) {
            return Err(Error::IndexOutOfRange {
                axis: Axis::Attribute,
                index,
                size: k,
            });
        }
        Ok(BitSet::from_indices(k, attrs.iter().copied()))
    }

    /// `A'`: attributes shared by every object in `extent`. The empty set
    /// derives to all attributes.
    pub fn intent_of(&self, extent: &BitSet) -> BitSet {
        let mut out = BitSet::full(self.attributes.len());
        for g in extent {
            out.intersect_with(&self.rows[g]);
        }
        out
    }

    /// `B'`: objects having every attribute in `intent`. The empty set
    /// derives to all objects.
    pub fn extent_of(&self, intent: &BitSet) -> BitSet {
        let mut out = BitSet::full(self.objects.len());
        for m in intent {
            out.intersect_with(&self.cols[m]);
        }
        out
    }

    /// Index-checked `A'`.
    pub fn derive_attributes(&self, objs: &[usize]) -> Result<BitSet> {
        Ok(self.intent_of(&self.object_set(objs)?))
    }

    /// Index-checked `B'`.
    pub fn derive_objects(&self, attrs: &[usize]) -> Result<BitSet> {
        Ok(self.extent_of(&self.attribute_set(attrs)?))
    }

    /// The concept generated by an object set: `(A'', A')`.
    pub fn closure(&self, objs: &[usize]) -> Result<FormalConcept> {
        Ok(self.concept_of_extent(&self.object_set(objs)?))
    }

    pub fn concept_of_extent(&self, extent: &BitSet) -> FormalConcept {
        let intent = self.intent_of(extent);
        let extent = self.extent_of(&intent);
        FormalConcept { extent, intent }
    }

    pub fn concept_of_intent(&self, intent: &BitSet) -> FormalConcept {
        let extent = self.extent_of(intent);
        let intent = self.intent_of(&extent);
        FormalConcept { extent, intent }
    }

    /// Whether `(extent, intent)` is closed in both directions.
    pub fn is_concept(&self, concept: &FormalConcept) -> bool {
        self.intent_of(&concept.extent) == concept.intent
            && self.extent_of(&concept.intent) == concept.extent
    }

    /// Merges objects with identical rows and attributes with identical
    /// columns. Merged identifiers are joined with `|` in original order.
    pub fn clarify(&self) -> FormalContext {
        fn groups(sets: &[BitSet]) -> Vec<Vec<usize>> {
            let mut out: Vec<Vec<usize>> = Vec::new();
            for (i, s) in sets.iter().enumerate() {
                match out.iter_mut().find(|grp| sets[grp[0]] == *s) {
                    Some(grp) => grp.push(i),
                    None => out.push(alloc::vec![i]),
                }
            }
            out
        }
        let join = |ids: &[String], grp: &[usize]| {
            grp.iter()
                .map(|&i| ids[i].as_str())
                .collect::<Vec<_>>()
                .join("|")
        };
        let og = groups(&self.rows);
        let ag = groups(&self.cols);
        let objects = og.iter().map(|grp| join(&self.objects, grp)).collect();
        let attributes = ag.iter().map(|grp| join(&self.attributes, grp)).collect();
        FormalContext::from_fn(objects, attributes, |g, m| self.has(og[g][0], ag[m][0]))
            .expect("joined identifiers of disjoint groups are unique")
    }
}

/// An extent/intent pair closed under derivation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormalConcept {
    pub extent: BitSet,
    pub intent: BitSet,
}

impl FormalConcept {
    /// The concept order: `self ≤ other` iff `self.extent ⊆ other.extent`.
    /// For genuine concepts this coincides with reverse intent inclusion.
    pub fn leq(&self, other: &FormalConcept) -> bool {
        let by_extent = self.extent.is_subset(&other.extent);
        debug_assert_eq!(
            by_extent,
            other.intent.is_subset(&self.intent),
            "extent and intent order disagree; not concepts of one context"
        );
        by_extent
    }
}
