use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// Built-in scenarios as `(name, json)`.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".json")))),*
        ];
    };
}

presets!(
    "trajectory-1", "trajectory-2", "trajectory-3", "trajectory-4",
    "trajectory-5", "trajectory-6", "trajectory-7", "trajectory-8",
    "apt-trajectory-1", "apt-trajectory-2", "apt-trajectory-3", "apt-trajectory-4",
    "apt-trajectory-5", "apt-trajectory-6", "apt-trajectory-7", "apt-trajectory-8",
);

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> CliResult<ScenarioConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::invalid("preset", format!("unknown preset '{name}'")))?;
    ScenarioConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use encircle::classify::trajectory_setup;
    use encircle::Family;

    #[test]
    fn every_preset_parses_and_matches_its_number() {
        assert_eq!(PRESETS.len(), 16);
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.name.as_deref(), Some(*name));
            let n: u8 = name.rsplit('-').next().unwrap().parse().unwrap();
            let (theta0, dir, _) = trajectory_setup(n).unwrap();
            assert_eq!((cfg.path.theta0, cfg.path.direction), (theta0, dir));
            let apt = name.starts_with("apt");
            assert_eq!(cfg.hamiltonian.family, if apt { Family::AptPassive } else { Family::PtPassive });
        }
    }

    #[test]
    fn unknown_preset_is_a_validation_error() {
        let e = preset("trajectory-9").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.field().as_deref(), Some("preset"));
    }
}
