//! Experiment configs shipped with the binary.

pub const PRESETS: &[(&str, &str)] = &[
    ("schwinger_spectrum", include_str!("../../../presets/schwinger_spectrum.toml")),
    ("schwinger_exact", include_str!("../../../presets/schwinger_exact.toml")),
    ("schwinger_noisy", include_str!("../../../presets/schwinger_noisy.toml")),
    ("ssh_spectrum", include_str!("../../../presets/ssh_spectrum.toml")),
    ("tim_otoc", include_str!("../../../presets/tim_otoc.toml")),
    ("bracket_selftest", include_str!("../../../presets/bracket_selftest.toml")),
];

pub fn find(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
