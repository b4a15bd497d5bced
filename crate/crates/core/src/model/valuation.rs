use std::fmt;

use super::expr::VarId;

/// Total assignment of values to the variables of a model, indexed by
/// [`VarId`]. Booleans are stored as 0/1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(Vec<i64>);

impl Valuation {
    pub fn new(values: Vec<i64>) -> Self {
        Valuation(values)
    }

    pub fn get(&self, id: VarId) -> i64 {
        self.0[id.0]
    }

    pub fn set(&mut self, id: VarId, value: i64) {
        self.0[id.0] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}
