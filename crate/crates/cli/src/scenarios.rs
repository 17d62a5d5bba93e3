//! Built-in scenario files, embedded at compile time.

use crate::config::{parse_config, ScenarioConfig};
use crate::error::CliError;

pub const SCENARIOS: [(&str, &str); 5] = [
    ("cesaro", include_str!("../scenarios/cesaro.toml")),
    ("discrete-hausdorff", include_str!("../scenarios/discrete-hausdorff.toml")),
    ("cyclic-group", include_str!("../scenarios/cyclic-group.toml")),
    ("two-variable-demo", include_str!("../scenarios/two-variable-demo.toml")),
    ("p-lt-1-divergence", include_str!("../scenarios/p-lt-1-divergence.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<&'static str, CliError> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| CliError::Usage(format!("unknown scenario {name:?}; known: {}", names().collect::<Vec<_>>().join(", "))))
}

pub fn load(name: &str) -> Result<ScenarioConfig, CliError> {
    Ok(parse_config(source(name)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scenario_parses() {
        for name in names() {
            let cfg = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(cfg.description.is_some(), "{name}");
        }
        assert!(load("nope").is_err());
    }
}
