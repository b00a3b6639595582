use std::io::Write;

use super::AnalysisError;
use crate::corpus::{PsychTrait, TraitProfile};

pub const CDF_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct TraitComparison {
    pub psych_trait: PsychTrait,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Empirical CDFs at `i / 100` for `i = 0..=100`.
    pub cdf_a: Vec<f64>,
    pub cdf_b: Vec<f64>,
}

pub fn grid() -> Vec<f64> {
    (0..CDF_GRID_POINTS).map(|i| i as f64 / (CDF_GRID_POINTS - 1) as f64).collect()
}

/// Fraction of `values` at or below each grid point.
pub fn empirical_cdf(values: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&g| sorted.partition_point(|&v| v <= g) as f64 / sorted.len() as f64)
        .collect()
}

pub fn group_compare(a: &[TraitProfile], b: &[TraitProfile]) -> Result<Vec<TraitComparison>, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let g = grid();
    Ok(PsychTrait::ALL
        .iter()
        .map(|&t| {
            let va: Vec<f64> = a.iter().map(|p| p.get(t)).collect();
            let vb: Vec<f64> = b.iter().map(|p| p.get(t)).collect();
            TraitComparison {
                psych_trait: t,
                mean_a: va.iter().sum::<f64>() / va.len() as f64,
                mean_b: vb.iter().sum::<f64>() / vb.len() as f64,
                cdf_a: empirical_cdf(&va, &g),
                cdf_b: empirical_cdf(&vb, &g),
            }
        })
        .collect())
}

/// `trait,mean_a,mean_b`.
pub fn write_group_means<W: Write>(writer: W, cmp: &[TraitComparison]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trait", "mean_a", "mean_b"])?;
    for c in cmp {
        w.write_record([c.psych_trait.name(), &c.mean_a.to_string(), &c.mean_b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `trait,x,cdf_a,cdf_b`, one row per grid point.
pub fn write_group_cdfs<W: Write>(writer: W, cmp: &[TraitComparison]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trait", "x", "cdf_a", "cdf_b"])?;
    let g = grid();
    for c in cmp {
        for (i, x) in g.iter().enumerate() {
            w.write_record([c.psych_trait.name(), &x.to_string(), &c.cdf_a[i].to_string(), &c.cdf_b[i].to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profiles(values: &[f64]) -> Vec<TraitProfile> {
        values.iter().map(|&v| TraitProfile::new([v; 7])).collect()
    }

    #[test]
    fn identical_groups_identical_cdfs() {
        let a = profiles(&[0.1, 0.5, 0.9]);
        for c in group_compare(&a, &a).unwrap() {
            assert_eq!(c.cdf_a, c.cdf_b);
            assert_eq!(c.mean_a, c.mean_b);
        }
        assert!(group_compare(&a, &[]).is_err());
    }

    proptest! {
        #[test]
        fn shift_dominance_and_shape(values in proptest::collection::vec(0.0f64..=1.0, 1..40)) {
            let a = profiles(&values);
            let shifted: Vec<f64> = values.iter().map(|v| (v + 0.2).min(1.0)).collect();
            let b = profiles(&shifted);
            for c in group_compare(&a, &b).unwrap() {
                prop_assert_eq!(c.cdf_a.len(), CDF_GRID_POINTS);
                prop_assert_eq!(*c.cdf_a.last().unwrap(), 1.0);
                prop_assert_eq!(*c.cdf_b.last().unwrap(), 1.0);
                for i in 0..CDF_GRID_POINTS {
                    prop_assert!(c.cdf_b[i] <= c.cdf_a[i]);
                    if i > 0 {
                        prop_assert!(c.cdf_a[i] >= c.cdf_a[i - 1]);
                    }
                }
            }
        }
    }
}
