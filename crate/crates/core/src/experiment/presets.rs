//! Experiment files shipped with the crate, one per table row and figure.

use super::config::{parse_config_str, ExperimentSpec};
use crate::error::{Error, Result};

/// `(name, JSON text)` for every bundled preset, sorted by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("ising10_fs2", include_str!("../../presets/ising10_fs2.json")),
    ("ising10_fs4", include_str!("../../presets/ising10_fs4.json")),
    ("ising10_pvqd1", include_str!("../../presets/ising10_pvqd1.json")),
    ("ising10_pvqd2", include_str!("../../presets/ising10_pvqd2.json")),
    ("ising10_pvqd4", include_str!("../../presets/ising10_pvqd4.json")),
    ("ising4_noisy_fs2", include_str!("../../presets/ising4_noisy_fs2.json")),
    ("ising4_noisy_pvqd1", include_str!("../../presets/ising4_noisy_pvqd1.json")),
    ("ising4_noisy_pvqd2", include_str!("../../presets/ising4_noisy_pvqd2.json")),
    ("ising4_warm0", include_str!("../../presets/ising4_warm0.json")),
    ("ising4_warm005", include_str!("../../presets/ising4_warm005.json")),
    ("ising4_warm01", include_str!("../../presets/ising4_warm01.json")),
    ("ising8_fs2", include_str!("../../presets/ising8_fs2.json")),
    ("ising8_noisy_fs2", include_str!("../../presets/ising8_noisy_fs2.json")),
    ("ising8_noisy_pvqd1", include_str!("../../presets/ising8_noisy_pvqd1.json")),
    ("ising8_noisy_pvqd2", include_str!("../../presets/ising8_noisy_pvqd2.json")),
    ("ising8_pvqd1", include_str!("../../presets/ising8_pvqd1.json")),
    ("ising8_pvqd2", include_str!("../../presets/ising8_pvqd2.json")),
    ("ising8_rand2", include_str!("../../presets/ising8_rand2.json")),
    ("ising8_seq2", include_str!("../../presets/ising8_seq2.json")),
    ("ising8_warm0", include_str!("../../presets/ising8_warm0.json")),
    ("ising8_warm005", include_str!("../../presets/ising8_warm005.json")),
    ("ising8_warm01", include_str!("../../presets/ising8_warm01.json")),
    ("tfim2_fs2", include_str!("../../presets/tfim2_fs2.json")),
    ("xyz10_fs2", include_str!("../../presets/xyz10_fs2.json")),
    ("xyz10_fs4", include_str!("../../presets/xyz10_fs4.json")),
    ("xyz10_pvqd1", include_str!("../../presets/xyz10_pvqd1.json")),
    ("xyz10_pvqd2", include_str!("../../presets/xyz10_pvqd2.json")),
    ("xyz10_pvqd4", include_str!("../../presets/xyz10_pvqd4.json")),
    ("xyz12_sweep1", include_str!("../../presets/xyz12_sweep1.json")),
    ("xyz12_sweep2", include_str!("../../presets/xyz12_sweep2.json")),
    ("xyz8_sweep2", include_str!("../../presets/xyz8_sweep2.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// Raw JSON of a preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::config("preset", format!("no preset named `{name}`")))
}

pub fn load_preset(name: &str) -> Result<ExperimentSpec> {
    parse_config_str(preset_text(name)?, None)
}
