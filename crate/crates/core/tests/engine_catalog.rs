use levitype_core::catalog::{catalog, ExpectedType};
use levitype_core::engine::{cross_validate, type_search, Strategy};
use levitype_core::geometry::ACStructure;

#[test]
fn catalog_types_at_kmax_8() {
    let k_max = 8;
    let cap = k_max + 2;
    for entry in catalog() {
        let start = std::time::Instant::now();
        let m = (entry.build)(cap).unwrap();
        let j = ACStructure::standard(entry.n, cap);
        let report = type_search(&m, &j, k_max, Strategy::ExactStaged).unwrap();
        eprintln!(
            "{}: lower {} certified {} cap {} in {:?}",
            entry.name,
            report.lower_bound,
            report.certified_exact,
            report.cap_reached,
            start.elapsed()
        );
        match entry.expected {
            ExpectedType::Finite { lower_bound, certified } => {
                assert_eq!(report.lower_bound, lower_bound, "{}", entry.name);
                assert_eq!(report.certified_exact, certified, "{}", entry.name);
            }
            ExpectedType::Unbounded => {
                assert!(report.cap_reached, "{}", entry.name);
                assert_eq!(report.lower_bound, k_max);
            }
        }
        let v = cross_validate(&m, &j, &report).unwrap();
        eprintln!("  validated k={} in {:?}", v.k, start.elapsed());
    }
}
