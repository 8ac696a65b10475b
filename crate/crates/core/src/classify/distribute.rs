use std::cmp::Ordering;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::scores::{Assignment, AssignmentSource, ClassLabel, ScoreMatrix};
use crate::error::{Error, Result};

/// Expected crops per class. `residual` is the declared difference between
/// the metaphase total and the per-class sum (-1 for 45, +1 for 47).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub counts: Vec<usize>,
    pub residual: i64,
}

impl ExpectedCounts {
    pub fn uniform(classes: usize, per_class: usize) -> Self {
        ExpectedCounts { counts: vec![per_class; classes], residual: 0 }
    }

    pub fn total(&self) -> i64 {
        self.counts.iter().sum::<usize>() as i64 + self.residual
    }
}

/// Two per class, with a residual of -1/0/+1 for totals `2C-1`, `2C`, `2C+1`.
pub fn expected_counts(total: usize, classes: usize) -> Result<ExpectedCounts> {
    let normal = 2 * classes;
    if classes == 0 || total + 1 < normal || total > normal + 1 {
        return Err(Error::invalid(format!(
            "total {total} is inconsistent with {classes} classes (expected {} to {})",
            normal.saturating_sub(1),
            normal + 1
        )));
    }
    Ok(ExpectedCounts { counts: vec![2; classes], residual: total as i64 - normal as i64 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub id: String,
    pub from: ClassLabel,
    pub to: ClassLabel,
}

/// Class whose final count differs from the expected one; `delta` is
/// count minus expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub class: ClassLabel,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub assignment: Assignment,
    pub moves: Vec<Move>,
    pub residuals: Vec<Residual>,
    pub declared_residual: i64,
}

impl DistributionReport {
    pub fn is_exact(&self) -> bool {
        self.residuals.is_empty()
    }
}

/// Count-constrained redistribution.
///
/// Repeatedly takes the lacking class with the largest deficit (smallest
/// index on ties) and moves into it the crop, among those sitting in crowded
/// classes, with the highest score for it; ties prefer the larger margin over
/// the crop's current class, then the smaller crop id. Stops when no class
/// lacks or none is crowded. Unresolved differences are reported, not raised.
pub fn distribute<T: Float>(
    scores: &ScoreMatrix<T>,
    assignment: &Assignment,
    expected: &ExpectedCounts,
) -> Result<DistributionReport> {
    let c = scores.classes();
    if expected.counts.len() != c {
        return Err(Error::invalid(format!(
            "expected counts cover {} classes, scores have {c}",
            expected.counts.len()
        )));
    }
    if assignment.len() != scores.len() {
        return Err(Error::invalid("assignment and score matrix cover different crops"));
    }
    let mut current = Vec::with_capacity(scores.len());
    for (i, id) in scores.ids().iter().enumerate() {
        let class = assignment
            .class_of(id)
            .ok_or_else(|| Error::invalid(format!("crop `{id}` has no assignment")))?;
        if class.slot() >= c {
            return Err(Error::invalid(format!("crop `{id}` assigned to class {class} of {c}")));
        }
        current.push((i, class));
    }
    let mut out = assignment.clone();
    let mut counts = assignment.counts(c);
    let want = &expected.counts;
    let mut moves = Vec::new();

    loop {
        let lacking = (0..c)
            .filter(|&k| counts[k] < want[k])
            .max_by(|&a, &b| (want[a] - counts[a]).cmp(&(want[b] - counts[b])).then(b.cmp(&a)));
        let Some(l) = lacking else { break };
        let target = ClassLabel::from_slot(l);
        let mut best: Option<(usize, T, T)> = None;
        for (pos, &(i, class)) in current.iter().enumerate() {
            if counts[class.slot()] <= want[class.slot()] {
                continue;
            }
            let s = scores.score(i, target);
            let margin = s - scores.score(i, class);
            let better = match best {
                None => true,
                Some((bp, bs, bm)) => match s.partial_cmp(&bs).unwrap_or(Ordering::Equal) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => match margin.partial_cmp(&bm).unwrap_or(Ordering::Equal) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => scores.ids()[i] < scores.ids()[current[bp].0],
                    },
                },
            };
            if better {
                best = Some((pos, s, margin));
            }
        }
        let Some((pos, _, _)) = best else { break };
        let (i, from) = current[pos];
        counts[from.slot()] -= 1;
        counts[l] += 1;
        current[pos].1 = target;
        let id = scores.ids()[i].clone();
        let entry = out.entries.get_mut(&id).expect("assignment covers every crop");
        entry.class = target;
        entry.provenance = AssignmentSource::Redistributed;
        moves.push(Move { id, from, to: target });
    }

    let residuals = (0..c)
        .filter(|&k| counts[k] != want[k])
        .map(|k| Residual { class: ClassLabel::from_slot(k), delta: counts[k] as i64 - want[k] as i64 })
        .collect();
    Ok(DistributionReport { assignment: out, moves, residuals, declared_residual: expected.residual })
}
