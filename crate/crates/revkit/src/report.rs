use std::fs;
use std::path::{Path, PathBuf};

use revkit_core::experiment::Report;
use revkit_core::score::ScoreReport;

use crate::{Error, Result};

/// Writes `dir/report.tsv` and `dir/report.md`; returns both paths.
pub fn write_report(report: &Report, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let tsv = dir.join("report.tsv");
    let md = dir.join("report.md");
    fs::write(&tsv, report.to_tsv()).map_err(Error::io(&tsv))?;
    fs::write(&md, report.to_markdown()).map_err(Error::io(&md))?;
    Ok((tsv, md))
}

/// Per-utterance edit counts followed by a `TOTAL` row.
pub fn score_report_tsv(report: &ScoreReport) -> String {
    let mut s = String::from("id\tref_len\tsub\tdel\tins\tPER%\n");
    let rows = report.utterances.iter().map(|u| (u.id.as_str(), &u.counts));
    for (id, c) in rows.chain(std::iter::once(("TOTAL", &report.total))) {
        s.push_str(&format!(
            "{id}\t{}\t{}\t{}\t{}\t{:.2}\n",
            c.reference_len,
            c.substitutions,
            c.deletions,
            c.insertions,
            c.per()
        ));
    }
    s
}
