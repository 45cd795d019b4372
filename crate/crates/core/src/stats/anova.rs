use serde::{Deserialize, Serialize};

use super::distributions::f_sf;
use crate::error::{Error, Result};

/// Classical one-way ANOVA decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub ss_groups: f64,
    pub ss_error: f64,
    pub ss_total: f64,
    pub df_groups: usize,
    pub df_error: usize,
    pub df_total: usize,
    pub ms_groups: f64,
    pub ms_error: f64,
    pub f_stat: f64,
    pub p_value: f64,
}

impl AnovaTable {
    /// Completes a table from its between/within sums of squares.
    pub fn from_sums(ss_groups: f64, df_groups: usize, ss_error: f64, df_error: usize) -> Result<Self> {
        if df_groups == 0 || df_error == 0 {
            return Err(Error::Degenerate(format!(
                "ANOVA degrees of freedom ({df_groups}, {df_error})"
            )));
        }
        let ms_groups = ss_groups / df_groups as f64;
        let ms_error = ss_error / df_error as f64;
        if ms_error <= 0.0 || !ms_error.is_finite() {
            return Err(Error::Degenerate(
                "zero within-group variance; F statistic undefined".into(),
            ));
        }
        let f_stat = ms_groups / ms_error;
        let table = AnovaTable {
            ss_groups,
            ss_error,
            ss_total: ss_groups + ss_error,
            df_groups,
            df_error,
            df_total: df_groups + df_error,
            ms_groups,
            ms_error,
            f_stat,
            p_value: f_sf(f_stat, df_groups as f64, df_error as f64),
        };
        debug_assert!(table.is_consistent());
        Ok(table)
    }

    /// Additivity and ratio identities of the table.
    pub fn is_consistent(&self) -> bool {
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300);
        rel(self.ss_total, self.ss_groups + self.ss_error)
            && self.df_total == self.df_groups + self.df_error
            && rel(self.ms_groups, self.ss_groups / self.df_groups as f64)
            && rel(self.ms_error, self.ss_error / self.df_error as f64)
            && rel(self.f_stat, self.ms_groups / self.ms_error)
            && (0.0..=1.0).contains(&self.p_value)
    }
}

pub fn one_way_anova(groups: &[&[f64]]) -> Result<AnovaTable> {
    if groups.len() < 2 {
        return Err(Error::Degenerate("ANOVA needs at least two groups".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Degenerate("ANOVA group without observations".into()));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    if n <= groups.len() {
        return Err(Error::Degenerate(
            "ANOVA needs more observations than groups".into(),
        ));
    }
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ss_groups = 0.0;
    let mut ss_error = 0.0;
    for g in groups {
        let m = super::mean(g);
        ss_groups += g.len() as f64 * (m - grand).powi(2);
        ss_error += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    AnovaTable::from_sums(ss_groups, groups.len() - 1, ss_error, n - groups.len())
}
