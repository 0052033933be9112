use serde::Deserialize;
use ud_realize::order::OrderConfig;

use crate::args::OrderArgs;
use crate::Failure;

/// Optional settings file for `realize` and `reorder`.
#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threshold: Option<usize>,
    pub exhaustive_limit: Option<usize>,
    pub arrangement_cap: Option<usize>,
    pub capitalize: Option<bool>,
    pub append_full_stop: Option<bool>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// Resolved ordering settings plus the worker count.
#[derive(Debug, PartialEq)]
pub struct Settings {
    pub order: OrderConfig,
    pub jobs: usize,
}

/// Flags win over the file, the file over the defaults.
pub fn resolve(args: &OrderArgs, file: &FileConfig) -> Result<Settings, Failure> {
    let d = OrderConfig::default();
    let order = OrderConfig {
        threshold: args.threshold.or(file.threshold).unwrap_or(d.threshold),
        exhaustive_limit: args.exhaustive_limit.or(file.exhaustive_limit).unwrap_or(d.exhaustive_limit),
        arrangement_cap: args.arrangement_cap.or(file.arrangement_cap).unwrap_or(d.arrangement_cap),
        capitalize: !args.no_capitalize && file.capitalize.unwrap_or(d.capitalize),
        append_full_stop: !args.no_full_stop && file.append_full_stop.unwrap_or(d.append_full_stop),
    };
    let jobs = args.jobs.or(file.jobs).unwrap_or(1);
    for (name, v) in [
        ("threshold", order.threshold),
        ("exhaustive_limit", order.exhaustive_limit),
        ("arrangement_cap", order.arrangement_cap),
        ("jobs", jobs),
    ] {
        if v == 0 {
            return Err(Failure::Usage(format!("{} must be positive", name)));
        }
    }
    if order.threshold < order.exhaustive_limit {
        return Err(Failure::Usage(format!(
            "threshold ({}) must be at least exhaustive_limit ({})",
            order.threshold, order.exhaustive_limit
        )));
    }
    Ok(Settings { order, jobs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = FileConfig::parse("threshold = 10\ncapitalize = false\njobs = 4\n").unwrap();
        let args = OrderArgs {
            threshold: Some(12),
            ..OrderArgs::default()
        };
        let s = resolve(&args, &file).unwrap();
        assert_eq!(s.order.threshold, 12);
        assert!(!s.order.capitalize);
        assert!(s.order.append_full_stop);
        assert_eq!(s.jobs, 4);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(FileConfig::parse("thresold = 3").is_err());
        let file = FileConfig::parse("threshold = 3").unwrap();
        assert!(matches!(resolve(&OrderArgs::default(), &file), Err(Failure::Usage(_))));
        let args = OrderArgs {
            jobs: Some(0),
            ..OrderArgs::default()
        };
        assert!(matches!(resolve(&args, &FileConfig::default()), Err(Failure::Usage(_))));
    }
}
