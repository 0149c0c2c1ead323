//! Scenario files shipped with the binary, one per reproduced figure.

pub const NAMES: [&str; 10] = [
    "fig1b", "fig3a", "fig3b", "fig4", "fig5", "fig6a", "fig6b", "fig7a", "fig7b", "fig8",
];

const TEXTS: [&str; 10] = [
    include_str!("../presets/fig1b.toml"),
    include_str!("../presets/fig3a.toml"),
    include_str!("../presets/fig3b.toml"),
    include_str!("../presets/fig4.toml"),
    include_str!("../presets/fig5.toml"),
    include_str!("../presets/fig6a.toml"),
    include_str!("../presets/fig6b.toml"),
    include_str!("../presets/fig7a.toml"),
    include_str!("../presets/fig7b.toml"),
    include_str!("../presets/fig8.toml"),
];

pub fn get(name: &str) -> Option<&'static str> {
    NAMES.iter().position(|n| *n == name).map(|i| TEXTS[i])
}
