use serde::Serialize;

use super::{CountMatrix, RegionCatalog};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSummary {
    pub region_id: String,
    pub players: u64,
    pub population: Option<u64>,
    /// `players / population`; `None` when the population is unknown or zero.
    pub percent_of_population: Option<f64>,
    pub share_of_national: f64,
}

/// One summary per matrix region, sorted by players descending and then by
/// region_id. Players are the region's all-activity totals.
pub fn region_summaries(matrix: &CountMatrix, catalog: &RegionCatalog) -> Vec<RegionSummary> {
    let national: u64 = matrix.region_totals().iter().sum();
    let mut out: Vec<RegionSummary> = matrix
        .regions()
        .iter()
        .zip(matrix.region_totals())
        .map(|(id, &players)| {
            let population = catalog.get(id).and_then(|m| m.population);
            let percent_of_population = population
                .filter(|&p| p > 0)
                .map(|p| players as f64 / p as f64);
            let share_of_national = if national > 0 {
                players as f64 / national as f64
            } else {
                0.0
            };
            RegionSummary {
                region_id: id.clone(),
                players,
                population,
                percent_of_population,
                share_of_national,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.players
            .cmp(&a.players)
            .then_with(|| a.region_id.cmp(&b.region_id))
    });
    out
}

/// Fraction of all players living in the `k` leading regions of a sorted
/// summary list.
pub fn top_k_national_share(summaries: &[RegionSummary], k: usize) -> f64 {
    let national: u64 = summaries.iter().map(|s| s.players).sum();
    if national == 0 {
        return 0.0;
    }
    let top: u64 = summaries.iter().take(k).map(|s| s.players).sum();
    top as f64 / national as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RegionMeta;

    fn catalog(rows: &[(&str, Option<u64>)]) -> RegionCatalog {
        RegionCatalog::new(
            rows.iter()
                .map(|&(id, population)| RegionMeta {
                    region_id: id.into(),
                    name: id.into(),
                    province: None,
                    latitude: None,
                    longitude: None,
                    population,
                    included: true,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ties_sorted_by_id_and_zero_population_unavailable() {
        let cat = catalog(&[("b", Some(0)), ("a", Some(100)), ("c", None)]);
        let m = CountMatrix::new(
            vec!["b".into(), "a".into(), "c".into()],
            vec![],
            vec![],
            vec![10, 10, 30],
            true,
        )
        .unwrap();
        let s = region_summaries(&m, &cat);
        let ids: Vec<_> = s.iter().map(|s| s.region_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(s[1].percent_of_population, Some(0.1));
        assert_eq!(s[2].percent_of_population, None);
        assert_eq!(s[0].percent_of_population, None);
        let total: f64 = s.iter().map(|s| s.share_of_national).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((top_k_national_share(&s, 1) - 0.6).abs() < 1e-15);
    }
}
