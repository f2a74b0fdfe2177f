//! Bitstring histograms.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::status::{Status, StatusCode};
use crate::value::decode_text_list;

/// Counts keyed by bitstring. Iteration is in ascending bitstring order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: BTreeMap<String, u64>,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_shots<I, S>(shots: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut h = Self::new();
        for s in shots {
            h.add(s.as_ref(), 1);
        }
        h
    }

    pub fn add(&mut self, bitstring: &str, count: u64) {
        if count > 0 {
            *self.counts.entry(bitstring.to_string()).or_insert(0) += count;
        }
    }

    pub fn get(&self, bitstring: &str) -> u64 {
        self.counts.get(bitstring).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Comma-joined keys (ascending) and aligned comma-joined counts.
    pub fn encode(&self) -> (String, String) {
        let keys: Vec<&str> = self.counts.keys().map(String::as_str).collect();
        let values: Vec<String> = self.counts.values().map(u64::to_string).collect();
        (keys.join(","), values.join(","))
    }

    /// Inverse of [`Histogram::encode`].
    pub fn decode(keys: &str, values: &str) -> Status<Self> {
        let keys = decode_text_list(keys);
        let values = decode_text_list(values);
        if keys.len() != values.len() {
            return Err(StatusCode::Protocol);
        }
        let mut h = Self::new();
        for (k, v) in keys.iter().zip(&values) {
            h.add(k, v.parse().map_err(|_| StatusCode::Protocol)?);
        }
        Ok(h)
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for Histogram {
    fn from_iter<T: IntoIterator<Item = (S, u64)>>(iter: T) -> Self {
        let mut h = Self::new();
        for (k, v) in iter {
            h.add(k.as_ref(), v);
        }
        h
    }
}
