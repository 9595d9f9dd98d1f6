//! Built-in example scenarios.

use crate::context::Diagnostic;
use crate::schema::Scenario;

const ENTRIES: [(&str, &str); 7] = [
    ("full-tangent-pair", include_str!("../gallery/full-tangent-pair.json")),
    ("dxy-leaves", include_str!("../gallery/dxy-leaves.json")),
    ("rotation-action", include_str!("../gallery/rotation-action.json")),
    ("so3-fields", include_str!("../gallery/so3-fields.json")),
    ("so2-in-so3", include_str!("../gallery/so2-in-so3.json")),
    ("torus-cover", include_str!("../gallery/torus-cover.json")),
    ("xy-dz-fibers", include_str!("../gallery/xy-dz-fibers.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|(n, _)| *n)
}

/// The scenario file as shipped.
pub fn text(name: &str) -> Result<&'static str, Diagnostic> {
    ENTRIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            Diagnostic::new(
                "gallery",
                format!("unknown scenario {name:?}; known: {}", names().collect::<Vec<_>>().join(", ")),
            )
        })
}

pub fn scenario(name: &str) -> Result<Scenario, Diagnostic> {
    crate::parse_scenario(text(name)?, &format!("gallery:{name}"))
}
