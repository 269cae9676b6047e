//! Machine-readable attack reports and per-candidate media exports.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AttackResult, Candidate, Ranking};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::media::{from_signal, store_asset, MediaAsset};
use crate::metrics::QualityReport;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub rank: usize,
    pub trial_index: u64,
    pub guess: Vec<Vec<f64>>,
    pub score: f64,
    pub won_segments: Vec<usize>,
    pub quality: QualityReport,
    /// Media export name, when the candidate was exported.
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub ranking: Ranking,
    pub oracle_queries: usize,
    pub recovered_as: Option<Vec<Vec<f64>>>,
    pub estimated_inverse_rows: Option<Vec<Vec<f64>>>,
    pub assembled_quality: Option<QualityReport>,
    pub candidates: Vec<CandidateEntry>,
}

fn rows<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<f64>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(Scalar::as_f64).collect()).collect()
}

/// `cand_<rank>_<trial>.<ext>`; ranks start at 1.
pub fn candidate_file_name(rank: usize, trial: u64, extension: &str) -> String {
    format!("cand_{rank}_{trial}.{extension}")
}

impl AttackReport {
    /// Summary of `result`. With `extension` set, each candidate records the
    /// file name its media export uses.
    pub fn from_result<T: Scalar>(result: &AttackResult<T>, extension: Option<&str>) -> Self {
        let entry = |(k, c): (usize, &Candidate<T>)| CandidateEntry {
            rank: k + 1,
            trial_index: c.trial_index,
            guess: rows(&c.guess),
            score: c.score,
            won_segments: c.won_segments.clone(),
            quality: c.quality.clone(),
            file: extension.map(|e| candidate_file_name(k + 1, c.trial_index, e)),
        };
        AttackReport {
            ranking: result.ranking,
            oracle_queries: result.oracle_queries,
            recovered_as: result.recovered_as.as_ref().map(rows),
            estimated_inverse_rows: result.estimated_inverse_rows.as_ref().map(rows),
            assembled_quality: result.assembled_quality.clone(),
            candidates: result.candidates.iter().enumerate().map(entry).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Writes every candidate reconstruction to `dir` in the format of
/// `template`. Images are calibrated per segment.
pub fn export_candidates<T: Scalar>(result: &AttackResult<T>, template: &MediaAsset, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let kind = template.kind();
    result
        .candidates
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let asset = from_signal(&c.reconstruction, template, kind.is_image())?;
            let path = dir.join(candidate_file_name(k + 1, c.trial_index, kind.extension()));
            store_asset(&asset, &path)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{differential_attack, Guesses};
    use crate::media::to_signal;
    use crate::metrics::Domain;
    use crate::signal::SignalBlock;

    #[test]
    fn report_and_exports() {
        let pixels: Vec<u8> = (0..64).map(|v| (v * 4) as u8).collect();
        let img = MediaAsset::image8(8, 8, pixels).unwrap();
        let s1: SignalBlock = to_signal(&img, 2).unwrap();
        let s2 = s1.map_valid(|v| -v);
        let result = differential_attack(&s1, &s2, &Guesses::Random(2), 3, Domain::Image).unwrap();
        let report = AttackReport::from_result(&result, Some(img.kind().extension()));
        assert_eq!(report.candidates[1].file.as_deref(), Some("cand_2_1.pgm"));
        let json = report.to_json().unwrap();
        let back: AttackReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);

        let dir = std::env::temp_dir().join(format!("bss-report-{}", std::process::id()));
        let paths = export_candidates(&result, &img, &dir).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths[0].ends_with("cand_1_0.pgm"));
        assert!(crate::media::load_asset(&paths[0]).is_ok());
        fs::remove_dir_all(&dir).unwrap();
    }
}
