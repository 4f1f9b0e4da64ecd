//! Binary triadic contexts `(G, M, B, Y)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::context::check_unique;
use crate::error::{Axis, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriadicContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    conditions: Vec<String>,
    /// Flattened `[g][m][b]`.
    cells: Vec<bool>,
}

impl TriadicContext {
    pub fn from_fn<F>(
        objects: Vec<String>,
        attributes: Vec<String>,
        conditions: Vec<String>,
        mut has: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> bool,
    {
        check_unique(&objects, Axis::Object)?;
        check_unique(&attributes, Axis::Attribute)?;
        check_unique(&conditions, Axis::Condition)?;
        let (n, k, c) = (objects.len(), attributes.len(), conditions.len());
        let mut cells = Vec::with_capacity(n * k * c);
        for g in 0..n {
            for m in 0..k {
                for b in 0..c {
                    cells.push(has(g, m, b));
                }
            }
        }
        Ok(Self {
            objects,
            attributes,
            conditions,
            cells,
        })
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }

    #[inline]
    pub fn has(&self, g: usize, m: usize, b: usize) -> bool {
        let (k, c) = (self.attributes.len(), self.conditions.len());
        self.cells[(g * k + m) * c + b]
    }

    fn check(&self, set: &BitSet, axis: Axis, size: usize) -> Result<()> {
        if set.universe() != size {
            return Err(Error::ShapeMismatch {
                expected: alloc::format!("{axis} set over {size} elements"),
                found: alloc::format!("{} elements", set.universe()),
            });
        }
        Ok(())
    }

    /// Whether `(a1, a2, a3)` is a triadic concept: each component equals the
    /// set of elements of its axis related to everything in the other two.
    pub fn is_triadic_concept(&self, a1: &BitSet, a2: &BitSet, a3: &BitSet) -> Result<bool> {
        let (n, k, c) = (
            self.objects.len(),
            self.attributes.len(),
            self.conditions.len(),
        );
        self.check(a1, Axis::Object, n)?;
        self.check(a2, Axis::Attribute, k)?;
        self.check(a3, Axis::Condition, c)?;

        let objects_ok = (0..n).all(|g| {
            let related = a2.iter().all(|m| a3.iter().all(|b| self.has(g, m, b)));
            related == a1.contains(g)
        });
        if !objects_ok {
            return Ok(false);
        }
        let attributes_ok = (0..k).all(|m| {
            let related = a1.iter().all(|g| a3.iter().all(|b| self.has(g, m, b)));
            related == a2.contains(m)
        });
        if !attributes_ok {
            return Ok(false);
        }
        Ok((0..c).all(|b| {
            let related = a1.iter().all(|g| a2.iter().all(|m| self.has(g, m, b)));
            related == a3.contains(b)
        }))
    }
}
