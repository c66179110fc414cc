use std::path::Path;

use super::IoError;
use crate::config::SolverConfig;

/// Reads `key = value` lines into a config. `#` starts a comment and bare
/// words are taken as strings, so `overlap_mode = max` and
/// `overlap_mode = "max"` are equivalent.
pub fn parse_config(text: &str) -> Result<SolverConfig, IoError> {
    let mut doc = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(IoError::Config { line: n + 1, message: format!("expected key = value, got `{line}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        let literal = value.parse::<f64>().is_ok() || matches!(value, "true" | "false") || value.starts_with('"');
        if literal {
            doc.push_str(&format!("{key} = {value}\n"));
        } else {
            doc.push_str(&format!("{key} = {value:?}\n"));
        }
    }
    let config: SolverConfig = toml::from_str(&doc).map_err(|e| IoError::Config { line: 0, message: e.message().to_string() })?;
    config.validate().map_err(|e| IoError::Config { line: 0, message: e.to_string() })?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SolverConfig, IoError> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OverlapMode;

    #[test]
    fn bare_and_quoted_values() {
        let c = parse_config("# run\nalpha = 0.25\ndelta=16\nmax_area = 64 # joined\noverlap_mode = max\ncell_solver = \"repair\"\nalternate_corners = true\n").unwrap();
        assert_eq!(c.alpha, 0.25);
        assert_eq!((c.delta, c.max_area), (16, 64));
        assert_eq!(c.overlap_mode, OverlapMode::Maximize);
        assert_eq!(c.cell_solver, "repair");
        assert!(c.alternate_corners);
    }

    #[test]
    fn unknown_keys_and_bad_lines_fail() {
        assert!(parse_config("alpah = 0.5").is_err());
        assert!(matches!(parse_config("alpha 0.5"), Err(IoError::Config { line: 1, .. })));
        assert!(parse_config("delta = 64\nmax_area = 16").is_err());
    }
}
