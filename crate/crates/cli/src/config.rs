//! Defaults, config-file merge, and small parsers.
//!
//! Precedence is fixed: compiled defaults, then the `--config` file, then
//! explicit command-line flags. The config file uses the same `key=value`
//! grammar as run manifests, so a previous run's manifest fragment can seed
//! a new run. Unknown keys are rejected by name rather than ignored — a
//! typo that silently fell back to a default would poison downstream
//! comparisons.

use crate::cli::CommonOpts;
use crate::Failure;
use beltrami_core::{C64, GridSpec, Manifest, SolverOptions};
use std::path::PathBuf;

/// Resolved run settings after the default/config/flag merge.
#[derive(Debug, Clone)]
pub struct Settings {
    pub n_side: usize,
    pub half_width: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub outer_max: usize,
    pub out_dir: PathBuf,
    pub csv: bool,
}

impl Default for Settings {
    fn default() -> Self {
        let opts = SolverOptions::default();
        Settings {
            n_side: 512,
            half_width: 1.25,
            tol: opts.tol,
            max_iter: opts.max_iter,
            outer_max: opts.outer_max,
            out_dir: PathBuf::from("beltrami-out"),
            csv: false,
        }
    }
}

const KNOWN_KEYS: &[&str] = &["n_side", "half_width", "tol", "max_iter", "outer_max", "out", "csv"];

impl Settings {
    /// Merges defaults, the optional config file, and explicit flags, then
    /// validates the grid geometry once so later `GridSpec` construction
    /// cannot fail.
    pub fn resolve(common: &CommonOpts) -> Result<Self, Failure> {
        let mut settings = Settings::default();

        if let Some(path) = &common.config {
            let manifest = Manifest::read_from(path).map_err(|err| match err {
                beltrami_core::Error::Io(io) => {
                    Failure::Io(format!("cannot read config file {}: {io}", path.display()))
                }
                other => Failure::Usage(format!("config file {}: {other}", path.display())),
            })?;
            for (key, value) in manifest.entries() {
                settings.apply(key, value).map_err(|message| {
                    Failure::Usage(format!("config file {}: {message}", path.display()))
                })?;
            }
        }

        if let Some(n) = common.n_side {
            settings.n_side = n;
        }
        if let Some(l) = common.half_width {
            settings.half_width = l;
        }
        if let Some(tol) = common.tol {
            settings.tol = tol;
        }
        if let Some(n) = common.max_iter {
            settings.max_iter = n;
        }
        if let Some(n) = common.outer_max {
            settings.outer_max = n;
        }
        if let Some(dir) = &common.out {
            settings.out_dir = dir.clone();
        }
        if common.csv {
            settings.csv = true;
        }

        // Fail early on bad geometry; commands rebuild this infallibly.
        settings.grid()?;
        if !(settings.tol > 0.0 && settings.tol.is_finite()) {
            return Err(Failure::Usage(format!(
                "tolerance must be positive and finite, got {}",
                settings.tol
            )));
        }
        Ok(settings)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("key `{key}` has unparsable value `{value}`"))
        }
        match key {
            "n_side" => self.n_side = parse(key, value)?,
            "half_width" => self.half_width = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "outer_max" => self.outer_max = parse(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "csv" => {
                self.csv = match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(format!("key `csv` must be true or false, got `{other}`")),
                }
            }
            unknown => {
                return Err(format!(
                    "unknown configuration key `{unknown}` (known keys: {})",
                    KNOWN_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec, Failure> {
        GridSpec::new(self.n_side, self.half_width).map_err(crate::core_failure)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iter: self.max_iter, outer_max: self.outer_max }
    }
}

/// Parses `RE` or `RE,IM` into a complex number.
pub fn parse_complex(text: &str) -> Result<C64, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "expected a complex number as RE or RE,IM, got `{text}`"
        ))
    };
    let mut parts = text.splitn(2, ',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(part) => part.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

/// Parses a comma-separated list of truncation levels.
pub fn parse_levels(text: &str) -> Result<Vec<f64>, Failure> {
    let mut levels = Vec::new();
    for part in text.split(',') {
        let level: f64 = part.trim().parse().map_err(|_| {
            Failure::Usage(format!("bad truncation level `{}` in --levels", part.trim()))
        })?;
        levels.push(level);
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare_opts() -> CommonOpts {
        CommonOpts {
            out: None,
            config: None,
            n_side: None,
            half_width: None,
            tol: None,
            max_iter: None,
            outer_max: None,
            csv: false,
        }
    }

    #[test]
    fn defaults_resolve_without_a_config_file() {
        let s = Settings::resolve(&bare_opts()).unwrap();
        assert_eq!(s.n_side, 512);
        assert_eq!(s.half_width, 1.25);
        assert_eq!(s.tol, 1e-8);
        assert!(!s.csv);
    }

    #[test]
    fn flags_override_config_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "n_side=64\ntol=0.000001\ncsv=true\n").unwrap();
        let mut opts = bare_opts();
        opts.config = Some(path);
        opts.tol = Some(1e-9);
        let s = Settings::resolve(&opts).unwrap();
        assert_eq!(s.n_side, 64, "config value survives");
        assert_eq!(s.tol, 1e-9, "flag wins over config");
        assert!(s.csv);
    }

    #[test]
    fn unknown_config_keys_are_rejected_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "n_sides=64\n").unwrap();
        let mut opts = bare_opts();
        opts.config = Some(path);
        let err = Settings::resolve(&opts).unwrap_err();
        match err {
            Failure::Usage(message) => {
                assert!(message.contains("n_sides"), "message names the key: {message}")
            }
            other => panic!("expected a usage failure, got {other:?}"),
        }
    }

    #[test]
    fn complex_parsing_accepts_both_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.3, -0.1").unwrap(), C64::new(0.3, -0.1));
        assert!(parse_complex("lots").is_err());
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn level_lists_parse_and_report_bad_entries() {
        assert_eq!(parse_levels("2, 4,8").unwrap(), vec![2.0, 4.0, 8.0]);
        assert!(parse_levels("2,x").is_err());
    }
}
