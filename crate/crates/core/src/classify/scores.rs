use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based chromosome class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(u32);

impl ClassLabel {
    pub fn new(index: u32, classes: usize) -> Result<Self> {
        if index == 0 || index as usize > classes {
            return Err(Error::invalid(format!("class {index} outside 1..={classes}")));
        }
        Ok(ClassLabel(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub(crate) fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn from_slot(slot: usize) -> Self {
        ClassLabel(slot as u32 + 1)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-crop class scores. Rows keep their insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<T> {
    classes: usize,
    ids: Vec<String>,
    rows: Vec<Vec<T>>,
    index: HashMap<String, usize>,
}

impl<T: Float> ScoreMatrix<T> {
    /// Rows must be nonnegative, finite, of length `classes`, with at least
    /// one positive entry; ids must be unique.
    pub fn new(classes: usize, rows: Vec<(String, Vec<T>)>) -> Result<Self> {
        if classes == 0 || rows.is_empty() {
            return Err(Error::invalid("score matrix needs at least one row and one class"));
        }
        let mut index = HashMap::with_capacity(rows.len());
        let (mut ids, mut data) = (Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len()));
        for (i, (id, row)) in rows.into_iter().enumerate() {
            if row.len() != classes {
                return Err(Error::invalid(format!("row `{id}` has {} scores, expected {classes}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite() || *v < T::zero()) {
                return Err(Error::invalid(format!("row `{id}` has a negative or non-finite score")));
            }
            if !row.iter().any(|v| *v > T::zero()) {
                return Err(Error::invalid(format!("row `{id}` has no positive score")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate row `{id}`")));
            }
            ids.push(id);
            data.push(row);
        }
        Ok(ScoreMatrix { classes, ids, rows: data, index })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn row_for(&self, id: &str) -> Result<&[T]> {
        self.position(id)
            .map(|i| self.row(i))
            .ok_or_else(|| Error::MissingScore(id.to_string()))
    }

    pub fn score(&self, i: usize, class: ClassLabel) -> T {
        self.rows[i][class.slot()]
    }

    pub fn to_file(&self) -> ScoresFile {
        ScoresFile {
            classes: self.classes,
            rows: self
                .ids
                .iter()
                .zip(&self.rows)
                .map(|(id, r)| ScoreRow {
                    id: id.clone(),
                    scores: r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &ScoresFile) -> Result<Self> {
        let rows = file
            .rows
            .iter()
            .map(|r| {
                let scores = r
                    .scores
                    .iter()
                    .map(|&v| T::from(v).ok_or_else(|| Error::invalid(format!("score {v} not representable"))))
                    .collect::<Result<Vec<T>>>()?;
                Ok((r.id.clone(), scores))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.classes, rows)
    }
}

/// On-disk scores: `{"classes":23,"rows":[{"id":"crop_003","scores":[...]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub classes: usize,
    pub rows: Vec<ScoreRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentSource {
    Argmax,
    Redistributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assigned {
    pub class: ClassLabel,
    pub provenance: AssignmentSource,
}

/// Crop id to class, exported as `{"crop_003":{"class":5,"provenance":"argmax"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub entries: BTreeMap<String, Assigned>,
}

impl Assignment {
    pub fn class_of(&self, id: &str) -> Option<ClassLabel> {
        self.entries.get(id).map(|a| a.class)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Crops per class, indexed from class 1.
    pub fn counts(&self, classes: usize) -> Vec<usize> {
        let mut c = vec![0; classes];
        for a in self.entries.values() {
            c[a.class.slot()] += 1;
        }
        c
    }

    /// Crop ids per class, ascending.
    pub fn members(&self, class: ClassLabel) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, a)| a.class == class)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Each crop goes to its highest-scoring class; ties go to the smaller class.
pub fn argmax_assign<T: Float>(scores: &ScoreMatrix<T>) -> Assignment {
    let mut entries = BTreeMap::new();
    for (i, id) in scores.ids().iter().enumerate() {
        let row = scores.row(i);
        let best = (1..row.len()).fold(0, |b, k| if row[k] > row[b] { k } else { b });
        entries.insert(
            id.clone(),
            Assigned { class: ClassLabel::from_slot(best), provenance: AssignmentSource::Argmax },
        );
    }
    Assignment { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&[f64]]) -> ScoreMatrix<f64> {
        let c = rows[0].len();
        ScoreMatrix::new(c, rows.iter().enumerate().map(|(i, r)| (format!("crop_{i:03}"), r.to_vec())).collect())
            .unwrap()
    }

    #[test]
    fn argmax_and_ties() {
        let a = argmax_assign(&matrix(&[&[0.1, 0.9], &[0.5, 0.5]]));
        assert_eq!(a.class_of("crop_000").unwrap().index(), 2);
        assert_eq!(a.class_of("crop_001").unwrap().index(), 1);
        assert!(a.entries.values().all(|x| x.provenance == AssignmentSource::Argmax));
    }

    #[test]
    fn peaked_rows_give_two_per_class() {
        let rows: Vec<(String, Vec<f64>)> = (0..46)
            .map(|i| {
                let mut r = vec![0.01; 23];
                r[i / 2] = 0.8;
                (format!("crop_{i:03}"), r)
            })
            .collect();
        let a = argmax_assign(&ScoreMatrix::new(23, rows).unwrap());
        assert_eq!(a.counts(23), vec![2; 23]);
    }

    #[test]
    fn invalid_matrices() {
        let r = |v: Vec<f64>| vec![("a".to_string(), v)];
        assert!(ScoreMatrix::new(2, r(vec![0.0, 0.0])).is_err());
        assert!(ScoreMatrix::new(2, r(vec![-1.0, 2.0])).is_err());
        assert!(ScoreMatrix::new(2, r(vec![f64::NAN, 2.0])).is_err());
        assert!(ScoreMatrix::new(3, r(vec![1.0, 2.0])).is_err());
        assert!(ScoreMatrix::<f64>::new(2, vec![]).is_err());
        let dup = vec![("a".to_string(), vec![1.0, 0.0]), ("a".to_string(), vec![1.0, 0.0])];
        assert!(ScoreMatrix::new(2, dup).is_err());
        assert!(ClassLabel::new(0, 23).is_err() && ClassLabel::new(24, 23).is_err());
    }

    #[test]
    fn json_formats() {
        let json = r#"{"classes":2,"rows":[{"id":"crop_003","scores":[0.2,0.7]}]}"#;
        let file: ScoresFile = serde_json::from_str(json).unwrap();
        let m = ScoreMatrix::<f64>::from_file(&file).unwrap();
        assert_eq!(serde_json::to_string(&m.to_file()).unwrap(), json);
        let a = argmax_assign(&m);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"crop_003":{"class":2,"provenance":"argmax"}}"#);
        let back: Assignment = serde_json::from_str(r#"{"crop_003":{"class":2,"provenance":"redistributed"}}"#).unwrap();
        assert_eq!(back.entries["crop_003"].provenance, AssignmentSource::Redistributed);
        assert!(matches!(m.row_for("crop_9"), Err(Error::MissingScore(_))));
    }

    #[test]
    fn f32_matrix() {
        let m = ScoreMatrix::<f32>::new(3, vec![("x".into(), vec![0.1, 0.3, 0.2])]).unwrap();
        assert_eq!(argmax_assign(&m).class_of("x").unwrap().index(), 2);
    }

    proptest! {
        #[test]
        fn argmax_invariant_under_row_rescaling(
            raw in proptest::collection::vec(proptest::collection::vec(0u32..20, 5), 1..12),
            factors in proptest::collection::vec(0.01f64..100.0, 12),
        ) {
            let rows: Vec<(String, Vec<f64>)> = raw
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut v: Vec<f64> = r.iter().map(|&x| x as f64).collect();
                    v[0] += 1.0;
                    (format!("c{i:02}"), v)
                })
                .collect();
            let scaled = rows
                .iter()
                .zip(&factors)
                .map(|((id, v), f)| (id.clone(), v.iter().map(|x| x * f).collect()))
                .collect();
            let a = argmax_assign(&ScoreMatrix::new(5, rows).unwrap());
            let b = argmax_assign(&ScoreMatrix::new(5, scaled).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
