//! Theorem layer: jet realization, disk and field conversion, commutation,
//! staged type search, cross-validation and point scans.

mod commute;
mod realize;
mod scan;
mod search;
mod validate;

pub use commute::{commutation_defect, CommutationReport};
pub use realize::{
    disk_field_target, disk_from_commuting_field, jet_extension_test, realize_field_from_disk,
    JetExtension, Multiplier,
};
pub use scan::{recenter, scan_type, type_at_point, Recentered};
pub use search::{
    gauge, type_search, type_search_with, Obstruction, SearchOptions, StageRecord, Strategy,
    TypeReport,
};
pub use validate::{cross_validate, ValidationRecord};
