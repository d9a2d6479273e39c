mod common;

use common::oracle::{oracle_sweep, seeded, symmetry_sweep};

#[test]
fn closed_form_equals_nested_average_oracle() {
    let mut rng = seeded(7);
    for total in 1..=4usize {
        for l in 1..=total {
            let s = oracle_sweep(l, total - l, if total <= 3 { 50 } else { 10 }, &mut rng);
            println!("({l},{}) worst relative deviation {:.2e}", total - l, s.worst_rel);
            assert!(s.all_homogeneous, "({l},{}) residual {}", total - l, s.max_residual);
            assert!(s.worst_rel <= 1e-9, "({l},{}) {}", total - l, s.worst_rel);
        }
    }
}

#[test]
fn parity_and_mirror_relations_hold() {
    let worst = symmetry_sweep(4, 100);
    assert!(worst <= 1e-10, "worst deviation {worst:e}");
}
