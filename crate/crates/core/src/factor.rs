//! Nonnegative tables over small sets of binary variables.
//!
//! A [`FactorTable`] is the single numeric representation used for CPT
//! rows, clique potentials and evidence likelihoods. Entries are indexed by
//! the joint state of the scope with the **last** scope variable varying
//! fastest, so for scope `[a, b]` the layout is
//! `(a=0,b=0), (a=0,b=1), (a=1,b=0), (a=1,b=1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest scope a table may have (2^24 entries).
pub const MAX_SCOPE: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorTable {
    pub scope: Vec<String>,
    pub values: Vec<f64>,
}

/// Offset of `pos` within a scope of length `len` (last-fastest).
#[inline]
pub fn stride(len: usize, pos: usize) -> usize {
    1usize << (len - 1 - pos)
}

/// Bit of scope position `pos` in joint index `index`.
#[inline]
pub fn state_at(index: usize, len: usize, pos: usize) -> u8 {
    ((index >> (len - 1 - pos)) & 1) as u8
}

impl FactorTable {
    pub fn new(scope: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let table = FactorTable { scope, values };
        if let Some(problem) = table.shape_problem() {
            return Err(Error::InvalidTable(problem));
        }
        Ok(table)
    }

    /// Constant table over `scope`.
    pub fn uniform(scope: Vec<String>, value: f64) -> Self {
        let len = 1usize << scope.len();
        FactorTable {
            scope,
            values: vec![value; len],
        }
    }

    /// Prior table `(absent, present)` for a single variable.
    pub fn prior(name: &str, p_present: f64) -> Self {
        FactorTable {
            scope: vec![name.to_string()],
            values: vec![1.0 - p_present, p_present],
        }
    }

    /// CPT for `child` given `parents`: one `[p(absent), p(present)]` row per
    /// parent joint state (parents in the given order, last fastest).
    pub fn conditional(child: &str, parents: &[&str], rows: &[[f64; 2]]) -> Result<Self> {
        if rows.len() != 1usize << parents.len() {
            return Err(Error::InvalidTable(format!(
                "expected {} parent rows for {child}, got {}",
                1usize << parents.len(),
                rows.len()
            )));
        }
        let mut scope: Vec<String> = parents.iter().map(|p| p.to_string()).collect();
        scope.push(child.to_string());
        let values = rows.iter().flatten().copied().collect();
        FactorTable::new(scope, values)
    }

    /// [`FactorTable::conditional`] from `p(child present | row)` values.
    pub fn bernoulli(child: &str, parents: &[&str], p_present: &[f64]) -> Result<Self> {
        let rows: Vec<[f64; 2]> = p_present.iter().map(|&p| [1.0 - p, p]).collect();
        Self::conditional(child, parents, &rows)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.scope.iter().position(|s| s == name)
    }

    /// Describes why the table is malformed, if it is.
    pub fn shape_problem(&self) -> Option<String> {
        if self.scope.len() > MAX_SCOPE {
            return Some(format!("scope of {} variables is too large", self.scope.len()));
        }
        let expected = 1usize << self.scope.len();
        if self.values.len() != expected {
            return Some(format!(
                "table over [{}] has {} entries, expected {expected}",
                self.scope.join(", "),
                self.values.len()
            ));
        }
        for (i, w) in self.scope.iter().enumerate() {
            if self.scope[..i].contains(w) {
                return Some(format!("variable {w} repeated in table scope"));
            }
        }
        if let Some(bad) = self.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Some(format!(
                "table over [{}] has invalid entry {bad}",
                self.scope.join(", ")
            ));
        }
        None
    }

    /// Value at the joint state given as one bit per scope variable.
    pub fn get(&self, states: &[u8]) -> f64 {
        debug_assert_eq!(states.len(), self.scope.len());
        let index = states
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | (s as usize & 1));
        self.values[index]
    }

    /// Same table with its scope permuted into `order`.
    pub fn reordered(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.scope.len() {
            return Err(Error::InvalidTable(format!(
                "cannot reorder [{}] into [{}]",
                self.scope.join(", "),
                order.join(", ")
            )));
        }
        let mapping = order
            .iter()
            .map(|name| {
                self.position(name).ok_or_else(|| {
                    Error::InvalidTable(format!("{name} not in table scope"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let len = order.len();
        let mut values = vec![0.0; self.values.len()];
        let mut old_states = vec![0u8; len];
        for (new_index, slot) in values.iter_mut().enumerate() {
            for (new_pos, &old_pos) in mapping.iter().enumerate() {
                old_states[old_pos] = state_at(new_index, len, new_pos);
            }
            *slot = self.get(&old_states);
        }
        Ok(FactorTable {
            scope: order.to_vec(),
            values,
        })
    }

    /// Scope sorted lexicographically, values permuted to match.
    pub fn canonical(&self) -> Result<Self> {
        let mut order = self.scope.clone();
        order.sort();
        self.reordered(&order)
    }

    /// Sums of entries over `child` for every joint state of the other
    /// scope variables, in last-fastest order of the remaining scope.
    pub fn row_sums(&self, child: &str) -> Option<Vec<f64>> {
        let pos = self.position(child)?;
        let len = self.scope.len();
        let step = stride(len, pos);
        let mut sums = Vec::with_capacity(self.values.len() / 2);
        for index in 0..self.values.len() {
            if state_at(index, len, pos) == 0 {
                sums.push(self.values[index] + self.values[index + step]);
            }
        }
        Some(sums)
    }

    /// Sums out every variable not in `keep`; result scope follows `keep`.
    pub fn marginal(&self, keep: &[String]) -> Result<Self> {
        let positions = keep
            .iter()
            .map(|name| {
                self.position(name).ok_or_else(|| {
                    Error::InvalidTable(format!("{name} not in table scope"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let len = self.scope.len();
        let mut values = vec![0.0; 1usize << keep.len()];
        for (index, &v) in self.values.iter().enumerate() {
            let target = positions
                .iter()
                .fold(0usize, |acc, &p| (acc << 1) | state_at(index, len, p) as usize);
            values[target] += v;
        }
        Ok(FactorTable {
            scope: keep.to_vec(),
            values,
        })
    }
}
