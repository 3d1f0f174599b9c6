// SPDX-License-Identifier: Apache-2.0

//! Built-in scenarios, usable wherever a config path is expected.

pub const NAMES: [&str; 2] = ["nominal", "sounding_rocket"];

const NOMINAL: &str = include_str!("../../presets/nominal.toml");
const SOUNDING_ROCKET: &str = include_str!("../../presets/sounding_rocket.toml");

/// TOML source of a built-in scenario.
pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "nominal" => Some(NOMINAL),
        "sounding_rocket" => Some(SOUNDING_ROCKET),
        _ => None,
    }
}
