use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of the main predictors into L groups and of the modifying
/// variables into G groups. Indices are 0-based in memory; the JSON file
/// form ([`GroupSpecFile`]) is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    predictor_groups: Vec<Vec<usize>>,
    modifier_groups: Vec<Vec<usize>>,
    p: usize,
    k: usize,
}

/// On-disk form: two arrays of arrays of 1-based column indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpecFile {
    pub predictor_groups: Vec<Vec<usize>>,
    pub modifier_groups: Vec<Vec<usize>>,
}

impl GroupSpec {
    pub fn new(
        predictor_groups: Vec<Vec<usize>>,
        modifier_groups: Vec<Vec<usize>>,
        p: usize,
        k: usize,
    ) -> Result<Self> {
        check_partition("predictor", &predictor_groups, p, 0)?;
        check_partition("modifier", &modifier_groups, k, 0)?;
        Ok(GroupSpec {
            predictor_groups,
            modifier_groups,
            p,
            k,
        })
    }

    /// Every predictor and every modifier in its own group.
    pub fn singletons(p: usize, k: usize) -> Self {
        GroupSpec {
            predictor_groups: (0..p).map(|j| vec![j]).collect(),
            modifier_groups: (0..k).map(|m| vec![m]).collect(),
            p,
            k,
        }
    }

    /// Singleton predictor groups with all modifiers in one group: the
    /// pliable-Lasso layout.
    pub fn pliable(p: usize, k: usize) -> Self {
        let modifier_groups = if k == 0 { Vec::new() } else { vec![(0..k).collect()] };
        GroupSpec {
            predictor_groups: (0..p).map(|j| vec![j]).collect(),
            modifier_groups,
            p,
            k,
        }
    }

    /// Same modifier groups, predictors split into singletons.
    pub fn with_singleton_predictors(&self) -> Self {
        GroupSpec {
            predictor_groups: (0..self.p).map(|j| vec![j]).collect(),
            modifier_groups: self.modifier_groups.clone(),
            p: self.p,
            k: self.k,
        }
    }

    pub fn from_file(f: &GroupSpecFile, p: usize, k: usize) -> Result<Self> {
        check_partition("predictor", &f.predictor_groups, p, 1)?;
        check_partition("modifier", &f.modifier_groups, k, 1)?;
        let shift =
            |gs: &[Vec<usize>]| -> Vec<Vec<usize>> { gs.iter().map(|g| g.iter().map(|&i| i - 1).collect()).collect() };
        Ok(GroupSpec {
            predictor_groups: shift(&f.predictor_groups),
            modifier_groups: shift(&f.modifier_groups),
            p,
            k,
        })
    }

    pub fn to_file(&self) -> GroupSpecFile {
        let shift =
            |gs: &[Vec<usize>]| -> Vec<Vec<usize>> { gs.iter().map(|g| g.iter().map(|&i| i + 1).collect()).collect() };
        GroupSpecFile {
            predictor_groups: shift(&self.predictor_groups),
            modifier_groups: shift(&self.modifier_groups),
        }
    }

    pub fn predictor_groups(&self) -> &[Vec<usize>] {
        &self.predictor_groups
    }

    pub fn modifier_groups(&self) -> &[Vec<usize>] {
        &self.modifier_groups
    }

    pub fn n_predictor_groups(&self) -> usize {
        self.predictor_groups.len()
    }

    pub fn n_modifier_groups(&self) -> usize {
        self.modifier_groups.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn check_dims(&self, p: usize, k: usize) -> Result<()> {
        if self.p != p || self.k != k {
            return Err(Error::dims(format!(
                "group spec covers p = {}, K = {} but data has p = {p}, K = {k}",
                self.p, self.k
            )));
        }
        Ok(())
    }
}

fn check_partition(kind: &str, groups: &[Vec<usize>], size: usize, base: usize) -> Result<()> {
    let mut seen = vec![false; size];
    for (gi, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::InvalidGroups(format!("{kind} group {} is empty", gi + base)));
        }
        for &idx in g {
            if idx < base || idx - base >= size {
                return Err(Error::InvalidGroups(format!(
                    "{kind} index {idx} in group {} is outside {}..={}",
                    gi + base,
                    base,
                    size + base - 1
                )));
            }
            if std::mem::replace(&mut seen[idx - base], true) {
                return Err(Error::InvalidGroups(format!(
                    "{kind} index {idx} appears in more than one group"
                )));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidGroups(format!(
            "{kind} index {} is not assigned to any group",
            missing + base
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip_is_one_based() {
        let f = GroupSpecFile {
            predictor_groups: vec![vec![1, 2], vec![3]],
            modifier_groups: vec![vec![2, 1]],
        };
        let g = GroupSpec::from_file(&f, 3, 2).unwrap();
        assert_eq!(g.predictor_groups(), &[vec![0, 1], vec![2]]);
        assert_eq!(g.to_file(), f);
    }

    #[test]
    fn validation_names_offending_index() {
        let bad = GroupSpecFile {
            predictor_groups: vec![vec![1, 4]],
            modifier_groups: vec![],
        };
        let msg = GroupSpec::from_file(&bad, 3, 0).unwrap_err().to_string();
        assert!(msg.contains("index 4"), "{msg}");

        let dup = GroupSpecFile {
            predictor_groups: vec![vec![1, 2], vec![2, 3]],
            modifier_groups: vec![],
        };
        let msg = GroupSpec::from_file(&dup, 3, 0).unwrap_err().to_string();
        assert!(msg.contains("index 2"), "{msg}");

        let gap = GroupSpecFile {
            predictor_groups: vec![vec![1], vec![3]],
            modifier_groups: vec![],
        };
        let msg = GroupSpec::from_file(&gap, 3, 0).unwrap_err().to_string();
        assert!(msg.contains("index 2"), "{msg}");

        let empty = GroupSpecFile {
            predictor_groups: vec![vec![1, 2, 3], vec![]],
            modifier_groups: vec![],
        };
        assert!(GroupSpec::from_file(&empty, 3, 0).is_err());
    }

    #[test]
    fn pliable_layout() {
        let g = GroupSpec::pliable(3, 4);
        assert_eq!(g.n_predictor_groups(), 3);
        assert_eq!(g.modifier_groups(), &[vec![0, 1, 2, 3]]);
        assert_eq!(GroupSpec::pliable(2, 0).n_modifier_groups(), 0);
    }
}
