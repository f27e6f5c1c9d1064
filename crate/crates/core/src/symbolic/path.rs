use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fixed-length bit string; bit `i` decides the `i`-th open branch.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathString(pub Vec<bool>);

impl PathString {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.gen()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Truncates or zero-pads to exactly `len` bits.
    pub fn normalized(mut self, len: usize) -> Self {
        self.0.resize(len, false);
        self
    }
}

impl fmt::Display for PathString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("path strings contain only 0 and 1 (found {0:?})")]
pub struct BadBit(pub char);

impl FromStr for PathString {
    type Err = BadBit;

    /// Parses `0`/`1` characters; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, BadBit> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BadBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PathString)
    }
}

impl Serialize for PathString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PathString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_round_trip() {
        let q: PathString = "1 00 01".parse().unwrap();
        assert_eq!(q.to_string(), "10001");
        assert_eq!(q.len(), 5);
        assert!("10x".parse::<PathString>().is_err());
    }

    #[test]
    fn normalization_pads_and_truncates() {
        let q: PathString = "11".parse().unwrap();
        assert_eq!(q.clone().normalized(4).to_string(), "1100");
        assert_eq!(q.normalized(1).to_string(), "1");
    }
}
