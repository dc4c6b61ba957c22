//! CSV rendering: one header line, one `#` comment line carrying the seed and
//! config fingerprint, then data rows.

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const BOUND_HEADER: &[&str] = &[
    "n",
    "p",
    "q",
    "b",
    "a",
    "chi2_exact",
    "chi2_closed_bound",
    "tv_upper",
    "power_upper",
    "pd_ok",
    "mgf_ok",
    "b_caps_ok",
    "error",
];

pub const VERIFY_HEADER: &[&str] = &["name", "closed_form", "brute_force", "abs_err", "rel_err", "pass"];

pub const POWER_HEADER: &[&str] = &[
    "regime", "n", "p", "q", "s_or_b", "trials", "rejections", "estimate", "ci_low", "ci_high", "seed",
];

/// First 16 hex digits of the SHA-256 of the canonical config.
pub fn fingerprint(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.canonical().as_bytes());
    hex::encode(digest)[..16].to_string()
}

pub fn comment_line(cfg: &ExperimentConfig) -> String {
    format!(
        "# seed={} fingerprint={} config: {}",
        cfg.seed,
        fingerprint(cfg),
        cfg.canonical()
    )
}

pub fn render(header: &[&str], comment: &str, rows: &[Vec<String>]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    out.extend_from_slice(comment.as_bytes());
    out.push(b'\n');
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_header_comment_rows() {
        let bytes = render(&["x", "y"], "# c", &[vec!["1".into(), "a,b".into()]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "x,y\n# c\n1,\"a,b\"\n");
    }
}
