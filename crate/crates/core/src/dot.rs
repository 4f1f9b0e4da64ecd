//! Graphviz DOT rendering of concept lattices.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::bitset::BitSet;
use crate::context::FormalContext;
use crate::lattice::ConceptLattice;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Labeling {
    /// Full extent and intent on every node.
    Full,
    /// Each object and attribute appears once, at the concept introducing it.
    Reduced,
}

fn names<'a>(ids: &'a [String], set: &BitSet) -> Vec<&'a str> {
    set.iter().map(|i| ids[i].as_str()).collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

/// Node label for concept `i` under `labeling`.
pub fn node_label(lattice: &ConceptLattice, ctx: &FormalContext, i: usize, labeling: Labeling) -> String {
    match labeling {
        Labeling::Full => {
            let c = &lattice.concepts[i];
            alloc::format!(
                "{{{}}} / {{{}}}",
                names(ctx.objects(), &c.extent).join(", "),
                names(ctx.attributes(), &c.intent).join(", ")
            )
        }
        Labeling::Reduced => alloc::format!(
            "{} / {}",
            names(ctx.objects(), &lattice.own_objects(i)).join(", "),
            names(ctx.attributes(), &lattice.own_attributes(i)).join(", ")
        ),
    }
}

/// Renders the lattice as a directed graph, edges pointing from each concept
/// to the concepts covering it.
pub fn export_dot(lattice: &ConceptLattice, ctx: &FormalContext, labeling: Labeling) -> String {
    let mut out = String::new();
    out.push_str("digraph lattice {\n  rankdir=BT;\n  node [shape=box];\n");
    for i in 0..lattice.len() {
        let label = node_label(lattice, ctx, i, labeling);
        let _ = writeln!(out, "  c{i} [label=\"{}\"];", escape(label.trim()));
    }
    for &(lo, hi) in &lattice.covers {
        let _ = writeln!(out, "  c{lo} -> c{hi};");
    }
    out.push_str("}\n");
    out
}
