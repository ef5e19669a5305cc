//! Bundled reference configs.

/// (name, TOML text) for every bundled config.
pub const GOLDEN: &[(&str, &str)] = &[
    ("fig2_static", include_str!("../../configs/fig2_static.toml")),
    ("fig2_static_lindblad", include_str!("../../configs/fig2_static_lindblad.toml")),
    ("fig2_oscillating", include_str!("../../configs/fig2_oscillating.toml")),
    ("fig2_oscillating_lindblad", include_str!("../../configs/fig2_oscillating_lindblad.toml")),
    ("fig3_superposed", include_str!("../../configs/fig3_superposed.toml")),
    ("tomography_round_trip", include_str!("../../configs/tomography_round_trip.toml")),
    ("feasibility_electron", include_str!("../../configs/feasibility_electron.toml")),
];

pub fn golden(name: &str) -> Option<&'static str> {
    GOLDEN.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn golden_names() -> impl Iterator<Item = &'static str> {
    GOLDEN.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn every_golden_parses_and_names_match() {
        for (name, text) in GOLDEN {
            let s = Scenario::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name(), *name);
        }
        assert!(golden("fig2_static").is_some());
        assert!(golden("nope").is_none());
    }
}
