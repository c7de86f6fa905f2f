//! Finite-scale asymptotic statistics: window scans, hits, greedy hulls,
//! covering nets of the reference catalog and the oscillation classifier.

mod covering;
mod hits;
mod hull;
mod scan;

pub use covering::{build_covering, classify, CenterMatch, Classification, CoveringNet, OscillationClass};
pub use hits::{find_hits, HitSet};
pub use hull::{estimate_hull, Hull, HullBuilder, HullCenter};
pub use scan::{
    scan, scan_with, target_integrals, Execution, ScanPlan, ScanRecord, ScanTable, WindowOutput,
    WindowScanner,
};
