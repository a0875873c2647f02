use crate::error::{Error, Result};

/// Largest histogram the engine will materialize.
pub const MAX_CELLS: usize = 1 << 24;

/// Product of categorical attributes; cells are numbered row-major (the
/// last attribute varies fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramDomain {
    names: Vec<String>,
    cards: Vec<usize>,
    size: usize,
}

impl HistogramDomain {
    pub fn new(names: Vec<String>, cards: Vec<usize>) -> Result<Self> {
        if names.len() != cards.len() {
            return Err(Error::argument("one cardinality per attribute is required"));
        }
        if cards.is_empty() {
            return Err(Error::argument("a domain needs at least one attribute"));
        }
        let mut size = 1usize;
        for (n, &c) in names.iter().zip(&cards) {
            if c == 0 {
                return Err(Error::argument(format!("attribute {n} has no categories")));
            }
            size = size
                .checked_mul(c)
                .filter(|&s| s <= MAX_CELLS)
                .ok_or_else(|| Error::argument(format!("domain exceeds {MAX_CELLS} cells")))?;
        }
        Ok(HistogramDomain { names, cards, size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn attributes(&self) -> usize {
        self.cards.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn cell_index(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.cards.len() {
            return Err(Error::argument(format!("tuple has {} values, domain has {} attributes", tuple.len(), self.cards.len())));
        }
        let mut idx = 0;
        for (k, (&v, &c)) in tuple.iter().zip(&self.cards).enumerate() {
            if v >= c {
                return Err(Error::argument(format!("value {v} out of range for attribute {}", self.names[k])));
            }
            idx = idx * c + v;
        }
        Ok(idx)
    }

    pub fn tuple(&self, cell: usize) -> Vec<usize> {
        debug_assert!(cell < self.size);
        let mut out = vec![0; self.cards.len()];
        let mut rest = cell;
        for k in (0..self.cards.len()).rev() {
            out[k] = rest % self.cards[k];
            rest /= self.cards[k];
        }
        out
    }
}
