use std::io::Write;

use super::stats::{pearson, Pearson};
use super::AnalysisError;
use crate::corpus::{PsychTrait, TraitProfile};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEntry {
    /// Feature column (`family:name`) or trait name.
    pub row: String,
    pub column: PsychTrait,
    pub stats: Pearson,
}

/// ρ, p and n for every (row, trait) pair, rows in input order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub entries: Vec<CorrelationEntry>,
}

/// `**` at p < 0.01, `*` at p < 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn trait_column(labels: &[TraitProfile], t: PsychTrait) -> Vec<f64> {
    labels.iter().map(|p| p.get(t)).collect()
}

pub fn feature_trait_matrix(features: &FeatureMatrix, labels: &[TraitProfile]) -> Result<CorrelationReport, AnalysisError> {
    if features.n_rows() != labels.len() {
        return Err(AnalysisError::LengthMismatch(features.n_rows(), labels.len()));
    }
    let targets: Vec<Vec<f64>> = PsychTrait::ALL.iter().map(|&t| trait_column(labels, t)).collect();
    let mut entries = Vec::with_capacity(features.n_cols() * 7);
    for (j, name) in features.names().iter().enumerate() {
        for (&t, y) in PsychTrait::ALL.iter().zip(&targets) {
            entries.push(CorrelationEntry { row: name.to_string(), column: t, stats: pearson(features.column(j), y)? });
        }
    }
    Ok(CorrelationReport { entries })
}

/// Trait-by-trait correlations; symmetric with a unit diagonal.
pub fn trait_trait_matrix(labels: &[TraitProfile]) -> Result<CorrelationReport, AnalysisError> {
    let cols: Vec<Vec<f64>> = PsychTrait::ALL.iter().map(|&t| trait_column(labels, t)).collect();
    let mut entries: Vec<CorrelationEntry> = Vec::with_capacity(49);
    for (i, &a) in PsychTrait::ALL.iter().enumerate() {
        for (j, &b) in PsychTrait::ALL.iter().enumerate() {
            let stats = if i == j {
                let n = labels.len();
                let degenerate = pearson(&cols[i], &cols[j])?.degenerate;
                Pearson { rho: 1.0, p: 0.0, n, degenerate }
            } else if j < i {
                // reuse the mirrored entry so the matrix is exactly symmetric
                entries[j * 7 + i].stats
            } else {
                pearson(&cols[i], &cols[j])?
            };
            entries.push(CorrelationEntry { row: a.name().to_string(), column: b, stats });
        }
    }
    Ok(CorrelationReport { entries })
}

impl CorrelationReport {
    pub fn get(&self, row: &str, column: PsychTrait) -> Option<&Pearson> {
        self.entries.iter().find(|e| e.row == row && e.column == column).map(|e| &e.stats)
    }

    /// Long form: `row,trait,rho,p,n,stars`.
    pub fn write_long<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["row", "trait", "rho", "p", "n", "stars"])?;
        for e in &self.entries {
            w.write_record([
                e.row.as_str(),
                e.column.name(),
                &e.stats.rho.to_string(),
                &e.stats.p.to_string(),
                &e.stats.n.to_string(),
                stars(e.stats.p),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Wide form: one row per feature, one starred `ρ` cell per trait.
    pub fn write_wide<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["row"];
        header.extend(PsychTrait::ALL.iter().map(|t| t.name()));
        w.write_record(&header)?;
        // entries of one row are contiguous in every report this module builds
        for group in self.entries.chunk_by(|a, b| a.row == b.row) {
            let mut record = vec![group[0].row.clone()];
            for &t in &PsychTrait::ALL {
                record.push(match group.iter().find(|e| e.column == t) {
                    Some(e) => format!("{:.3}{}", e.stats.rho, stars(e.stats.p)),
                    None => String::new(),
                });
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{ColumnName, Family};

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.03), "*");
        assert_eq!(stars(0.05), "");
    }

    #[test]
    fn trait_matrix_symmetric_with_unit_diagonal() {
        let labels: Vec<TraitProfile> = (0..20)
            .map(|i| {
                let x = i as f64 / 20.0;
                TraitProfile::new([x, 1.0 - x, (x * 7.0) % 1.0, x * x, 0.5, (x * 3.0) % 1.0, x.sqrt()])
            })
            .collect();
        let r = trait_trait_matrix(&labels).unwrap();
        for a in PsychTrait::ALL {
            assert_eq!(r.get(a.name(), a).unwrap().rho, 1.0);
            for b in PsychTrait::ALL {
                assert_eq!(r.get(a.name(), b).unwrap().rho, r.get(b.name(), a).unwrap().rho);
            }
        }
        assert_eq!(r.get("anxiety", PsychTrait::Avoidance).unwrap().rho, -1.0);
    }

    #[test]
    fn wide_report_shape() {
        let labels: Vec<TraitProfile> =
            (0..10).map(|i| TraitProfile::new([i as f64 / 10.0; 7])).collect();
        let mut m = FeatureMatrix::new((0..10).map(|i| i.to_string()).collect());
        m.push_column(ColumnName::new(Family::Behavioral, "x"), (0..10).map(|i| i as f64).collect()).unwrap();
        let report = feature_trait_matrix(&m, &labels).unwrap();
        let mut buf = Vec::new();
        report.write_wide(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("behavioral:x,1.000**,"));
    }
}
