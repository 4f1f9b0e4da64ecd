//! Cloze patterns with one object slot and one attribute slot.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Placeholder rendered for an unfilled slot.
pub const MASK: &str = "[MASK]";
/// Object slot marker in template text.
pub const OBJECT_SLOT: &str = "[object]";
/// Attribute slot marker in template text.
pub const ATTRIBUTE_SLOT: &str = "[attribute]";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Object,
    Attribute,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Word(String),
    Slot(Slot),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    id: String,
    tokens: Vec<Token>,
}

impl Pattern {
    pub fn new(id: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: &str| Error::InvalidPattern {
            id: id.clone(),
            reason: reason.to_owned(),
        };
        let count = |s: Slot| tokens.iter().filter(|t| **t == Token::Slot(s)).count();
        if count(Slot::Object) != 1 {
            return Err(invalid("expected exactly one object slot"));
        }
        if count(Slot::Attribute) != 1 {
            return Err(invalid("expected exactly one attribute slot"));
        }
        if tokens
            .iter()
            .any(|t| matches!(t, Token::Word(w) if w.is_empty() || w.contains(MASK)))
        {
            return Err(invalid("words must be non-empty and free of the mask placeholder"));
        }
        Ok(Self { id, tokens })
    }

    /// Parses whitespace-separated template text such as
    /// `"[object] is an animal that can [attribute] ."`.
    pub fn parse(id: impl Into<String>, template: &str) -> Result<Self> {
        let tokens = template
            .split_whitespace()
            .map(|w| match w {
                OBJECT_SLOT => Token::Slot(Slot::Object),
                ATTRIBUTE_SLOT => Token::Slot(Slot::Attribute),
                w => Token::Word(w.to_owned()),
            })
            .collect();
        Self::new(id, tokens)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Template text with slot markers, the inverse of [`Pattern::parse`].
    pub fn template(&self) -> String {
        self.tokens
            .iter()
            .map(|t| match t {
                Token::Word(w) => w.as_str(),
                Token::Slot(Slot::Object) => OBJECT_SLOT,
                Token::Slot(Slot::Attribute) => ATTRIBUTE_SLOT,
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Position of `slot` in the rendered token sequence.
    pub fn slot_index(&self, slot: Slot) -> usize {
        self.tokens
            .iter()
            .position(|t| *t == Token::Slot(slot))
            .expect("validated pattern has both slots")
    }

    /// Whether the object slot precedes the attribute slot.
    pub fn object_first(&self) -> bool {
        self.slot_index(Slot::Object) < self.slot_index(Slot::Attribute)
    }

    /// Substitutes the given fillers; an empty slot renders as [`MASK`].
    /// Fillers are kept as single tokens even if they contain spaces.
    pub fn render_filling(&self, object: Option<&str>, attribute: Option<&str>) -> Result<Vec<String>> {
        for filler in [object, attribute].into_iter().flatten() {
            if filler.contains(MASK) {
                return Err(Error::TokenContainsMask(filler.to_owned()));
            }
        }
        Ok(self
            .tokens
            .iter()
            .map(|t| match t {
                Token::Word(w) => w.clone(),
                Token::Slot(Slot::Object) => object.unwrap_or(MASK).to_owned(),
                Token::Slot(Slot::Attribute) => attribute.unwrap_or(MASK).to_owned(),
            })
            .collect())
    }
}
