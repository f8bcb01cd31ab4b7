use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Expansion coefficients `(m, c_m)` with distinct global indices, kept in
/// increasing `m`. Zero coefficients may be present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientList {
    entries: Vec<(u128, f64)>,
}

impl CoefficientList {
    pub fn new(mut entries: Vec<(u128, f64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(format!("duplicate basis index {}", w[0].0)));
        }
        if let Some(&(m, _)) = entries.iter().find(|e| e.0 == 0) {
            return Err(Error::IndexOutOfRange(format!("basis index {m}; indices start at 1")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(u128, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, m: u128) -> Option<f64> {
        self.entries
            .binary_search_by_key(&m, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, (_, c)| acc + c * c)
    }

    /// Entries whose magnitude counts as nonzero for greedy selection.
    pub fn support(&self) -> impl Iterator<Item = &(u128, f64)> {
        self.entries.iter().filter(|(_, c)| c.abs() >= super::ZERO_COEFFICIENT)
    }

    /// Entries with index in `indices` (which must be sorted).
    pub fn restrict(&self, indices: &[u128]) -> Vec<(u128, f64)> {
        self.entries
            .iter()
            .filter(|(m, _)| indices.binary_search(m).is_ok())
            .copied()
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffRecord {
    m: u128,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffFile {
    coeffs: Vec<CoeffRecord>,
}

impl Serialize for CoefficientList {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CoeffFile {
            coeffs: self.entries.iter().map(|&(m, c)| CoeffRecord { m, c }).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoefficientList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = CoeffFile::deserialize(deserializer)?;
        CoefficientList::new(file.coeffs.into_iter().map(|r| (r.m, r.c)).collect()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_distinct() {
        let c = CoefficientList::new(vec![(3, 1.0), (1, 2.0)]).unwrap();
        assert_eq!(c.entries(), &[(1, 2.0), (3, 1.0)]);
        assert_eq!(c.get(3), Some(1.0));
        assert_eq!(c.get(2), None);
        assert!(CoefficientList::new(vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(CoefficientList::new(vec![(0, 1.0)]).is_err());
    }

    #[test]
    fn json_layout() {
        let c = CoefficientList::new(vec![(2, -0.5), (7, 1.0)]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"coeffs":[{"m":2,"c":-0.5},{"m":7,"c":1.0}]}"#);
        assert_eq!(serde_json::from_str::<CoefficientList>(&text).unwrap(), c);
        assert!(serde_json::from_str::<CoefficientList>(r#"{"coeffs":[{"m":1,"c":1},{"m":1,"c":2}]}"#).is_err());
    }
}
