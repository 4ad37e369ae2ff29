//! Metagrammars bundled with the crate.

pub const DATES: &str = include_str!("../fixtures/dates.sag");
pub const CSV_V1: &str = include_str!("../fixtures/csv_v1.sag");
pub const CSV_PREFS: &str = include_str!("../fixtures/csv_prefs.sag");
pub const XML: &str = include_str!("../fixtures/xml.sag");
pub const XML_ORDERED: &str = include_str!("../fixtures/xml_ordered.sag");
pub const SQL: &str = include_str!("../fixtures/sql.sag");
pub const CSV_STRICT: &str = include_str!("../fixtures/csv_strict.sag");
pub const CSV_LAX: &str = include_str!("../fixtures/csv_lax.sag");
pub const PROVENANCE: &str = include_str!("../fixtures/provenance.sag");
pub const BOUNDED_UNSAT: &str = include_str!("../fixtures/bounded_unsat.sag");

/// `(name, source)` for every bundled fixture.
pub const ALL: &[(&str, &str)] = &[
    ("dates", DATES),
    ("csv_v1", CSV_V1),
    ("csv_prefs", CSV_PREFS),
    ("xml", XML),
    ("xml_ordered", XML_ORDERED),
    ("sql", SQL),
    ("csv_strict", CSV_STRICT),
    ("csv_lax", CSV_LAX),
    ("provenance", PROVENANCE),
    ("bounded_unsat", BOUNDED_UNSAT),
];

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
