//! Percolation references: critical constants, field thresholds for the
//! dominating site percolation, decay fits and the Kertész line scan.

mod constants;
mod fit;
mod kertesz;
mod site;
mod thresholds;

pub use constants::{
    beta_p, crossing_probability, verify_constant, ConstantCheck, CriticalConstant,
    CriticalConstants, PercKind,
};
pub use fit::{decay_fit, DecayFit, DecayPoint};
pub use kertesz::{
    classify, kertesz_scan, scan_cell, write_kertesz_csv, Classification, ClassifyRule,
    KerteszConfig, KerteszResult, ScanCell,
};
pub use site::{
    averaged_site_estimate, quenched_site_estimate, site_event_exact, site_probabilities,
    AveragedSiteEstimate, SiteEvent,
};
pub use thresholds::{
    delta_grid, h2_bound, h2_bound_below, h2_bound_with, h3_bound, h3_bound_below, h3_bound_with,
    h3_lhs, threshold_table, write_threshold_csv, H3Bound, ThresholdRow,
};
