mod common;

use common::equivalence::{check_equivalence, small_instances};
use mtd_core::Variant;

#[test]
fn engine_matches_reference_on_cast_example() {
    for variant in [
        Variant::Full,
        Variant::Core,
        Variant::CopyDetection,
        Variant::Popularity,
    ] {
        check_equivalence(&common::cast(), variant, &format!("cast {variant}"));
    }
}

#[test]
fn engine_matches_reference_on_small_synthetic_instances() {
    for (label, claims) in small_instances() {
        check_equivalence(&claims, Variant::Full, &label);
        check_equivalence(&claims, Variant::Core, &label);
    }
}
