use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedRole {
    Chromosome,
    Intersection,
    Background,
}

/// A marker pixel. Coordinates are signed so that out-of-range input can be
/// parsed and rejected explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub x: i64,
    pub y: i64,
    pub label: u32,
    pub role: SeedRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Method {
    /// Intersection goes to the chromosome above; those below get a filled gap.
    AboveTakesIntersection,
    /// Intersection is shared by every adjacent chromosome.
    SharedIntersection,
}

impl TryFrom<u8> for Method {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Method::AboveTakesIntersection),
            2 => Ok(Method::SharedIntersection),
            _ => Err(format!("method must be 1 or 2, got {v}")),
        }
    }
}

impl From<Method> for u8 {
    fn from(m: Method) -> u8 {
        match m {
            Method::AboveTakesIntersection => 1,
            Method::SharedIntersection => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub method: Method,
    #[serde(default)]
    pub above_label: Option<u32>,
    pub seeds: Vec<Seed>,
}

impl SeedSet {
    /// Role of every label. A label used with two roles is rejected.
    pub fn roles(&self) -> Result<BTreeMap<u32, SeedRole>> {
        let mut roles = BTreeMap::new();
        for s in &self.seeds {
            if s.label == 0 {
                return Err(Error::invalid("seed labels must be positive"));
            }
            if let Some(prev) = roles.insert(s.label, s.role) {
                if prev != s.role {
                    return Err(Error::invalid(format!("label {} used with two roles", s.label)));
                }
            }
        }
        Ok(roles)
    }

    pub fn labels_with(&self, role: SeedRole) -> Result<BTreeSet<u32>> {
        Ok(self
            .roles()?
            .into_iter()
            .filter(|&(_, r)| r == role)
            .map(|(l, _)| l)
            .collect())
    }

    /// Seeds as in-bounds positions; anything outside `width` x `height` is an error.
    pub(crate) fn positions(&self, width: usize, height: usize) -> Result<Vec<(Pos, u32)>> {
        self.seeds
            .iter()
            .map(|s| {
                if s.x < 0 || s.y < 0 || s.x >= width as i64 || s.y >= height as i64 {
                    Err(Error::invalid(format!(
                        "seed ({}, {}) outside the {width}x{height} image",
                        s.x, s.y
                    )))
                } else {
                    Ok((Pos::new(s.x as usize, s.y as usize), s.label))
                }
            })
            .collect()
    }

    /// Checks the separation preconditions.
    pub fn validate_for_separation(&self, width: usize, height: usize) -> Result<()> {
        self.positions(width, height)?;
        let chromosomes = self.labels_with(SeedRole::Chromosome)?;
        if chromosomes.len() < 2 {
            return Err(Error::invalid("separation needs at least two chromosome labels"));
        }
        let has_intersection = !self.labels_with(SeedRole::Intersection)?.is_empty();
        if self.method == Method::AboveTakesIntersection {
            match self.above_label {
                Some(l) if !chromosomes.contains(&l) => {
                    return Err(Error::invalid(format!("above_label {l} is not a chromosome label")));
                }
                None if has_intersection => {
                    return Err(Error::invalid("method 1 with an intersection seed needs above_label"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}
