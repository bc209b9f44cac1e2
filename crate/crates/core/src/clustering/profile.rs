use crate::corpus::CountMatrix;
use crate::error::{Error, Result};

/// Per-region play fractions over the kept activities. The denominator is the
/// region's all-activity total, so rows may sum to less than one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    regions: Vec<String>,
    activities: Vec<String>,
    values: Vec<f64>,
}

impl ProfileMatrix {
    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn row(&self, region: usize) -> &[f64] {
        let na = self.activities.len();
        &self.values[region * na..(region + 1) * na]
    }
}

/// Divides each kept count by its region's total. Regions with a zero total
/// have no defined profile and are returned in the second element.
pub fn build_profiles(matrix: &CountMatrix, kept: &[String]) -> Result<(ProfileMatrix, Vec<String>)> {
    if kept.is_empty() {
        return Err(Error::InvalidArgument("no activities to profile".into()));
    }
    let columns = kept
        .iter()
        .map(|id| {
            matrix
                .activity_index(id)
                .ok_or_else(|| Error::InvalidArgument(format!("activity {id} not in matrix")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut regions = Vec::new();
    let mut values = Vec::with_capacity(matrix.n_regions() * columns.len());
    let mut dropped = Vec::new();
    for (r, id) in matrix.regions().iter().enumerate() {
        let total = matrix.region_totals()[r];
        if total == 0 {
            dropped.push(id.clone());
            continue;
        }
        regions.push(id.clone());
        values.extend(
            columns
                .iter()
                .map(|&a| matrix.count(r, a) as f64 / total as f64),
        );
    }
    Ok((
        ProfileMatrix {
            regions,
            activities: kept.to_vec(),
            values,
        },
        dropped,
    ))
}
