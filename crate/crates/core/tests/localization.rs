use optovib::analysis;
use optovib::fd::{self, Grid};
use optovib::{Mode, ModelParams};

fn grid() -> Grid {
    Grid::new(13.0, 26001).unwrap()
}

#[test]
fn free_oscillator_states_are_extended_and_centred() {
    let p = ModelParams::reference(0.0, 0.0);
    let s = fd::solve(&p, &grid(), Mode::Hermitian, 12).unwrap();
    for r in analysis::classify_modes(&s, &p) {
        assert!(!r.localized, "mode {} flagged localized", r.index);
        assert!(r.centroid.abs() < 1e-6, "mode {} centroid {}", r.index, r.centroid);
    }
}

#[test]
fn first_side_minima_hold_several_states_at_eta_three() {
    let p = ModelParams::reference(4.0, 3.0);
    let s = fd::solve(&p, &grid(), Mode::Hermitian, 20).unwrap();
    let reports = analysis::classify_modes(&s, &p);
    let in_first = reports.iter().filter(|r| r.localized && r.site == Some(0)).count();
    assert!(in_first >= 4, "only {in_first} localized states in the first site");
}

#[test]
fn broken_partners_mirror_each_other() {
    let p = ModelParams::reference(4.0, 2.0);
    let s = fd::solve(&p, &grid(), Mode::Full, 20).unwrap();
    let pt = analysis::detect_pt_breaking(&s, &p, None).unwrap();
    assert!(!pt.broken_pairs.is_empty());
    for bp in &pt.broken_pairs {
        assert!(bp.mirror_deviation < 1e-3);
        assert!((bp.centroid_a + bp.centroid_b).abs() < 1e-6);
        assert!((bp.shifted_a.im + bp.shifted_b.im).abs() < 1e-8);
    }
}
