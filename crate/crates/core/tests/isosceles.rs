use freefall::isosceles::{
    classify_singularity, family_velocity_for_tc, integrate_isosceles, tc_angle_search, IsoEventKind, IsoSettings,
    IsoTermination, IsoscelesState, SingularityKind, TcCase,
};
use freefall::Error;

#[test]
fn first_case_one_solution_has_one_base_encounter() {
    let st = IsoSettings::default();
    let sol = tc_angle_search(TcCase::AfterBinaryCollisions(1), (20.0, 30.0), 1e-8, &st).unwrap();
    assert!((sol.alpha - 25.3663).abs() < 1e-3, "{}", sol.alpha);
    let s = IsoscelesState::from_vertex_angle(sol.alpha, 2.0, 1.0).unwrap();
    // stop well before the collapse so conservation stays meaningful
    let shallow = IsoSettings { tc_fraction: 1e-4, ..Default::default() };
    let traj = integrate_isosceles(&s, 2.0 * sol.tc_time, &shallow).unwrap();
    assert_eq!(traj.termination, IsoTermination::TripleCollision);
    assert_eq!(traj.events_of(IsoEventKind::BinaryCollision).count(), 1);
    assert!((traj.last.t - sol.tc_time).abs() < 1e-5);
    assert!(traj.energy_drift < 1e-8, "{}", traj.energy_drift);
}

#[test]
fn neighbours_of_the_solution_miss_on_opposite_sides() {
    let st = IsoSettings { stop_after_bc: Some(2), ..Default::default() };
    let x_at_second = |alpha: f64| {
        let s = IsoscelesState::from_vertex_angle(alpha, 2.0, 1.0).unwrap();
        let traj = integrate_isosceles(&s, 100.0, &st).unwrap();
        let x = traj.events_of(IsoEventKind::BinaryCollision).nth(1).unwrap().x;
        x
    };
    let (lo, hi) = (x_at_second(25.2), x_at_second(25.5));
    assert!(lo * hi < 0.0, "{lo} {hi}");
}

#[test]
fn family_member_at_ninety_degrees() {
    let m = family_velocity_for_tc(90.0, 1.5, 1.0 / 3.0, (-0.3, -0.2), &IsoSettings::default()).unwrap();
    assert!((0.218..=0.225).contains(&m.v_y.abs()), "{}", m.v_y);
    assert!((m.tc_time - 3.0722296).abs() < 1e-3, "{}", m.tc_time);
}

#[test]
fn bad_brackets_are_input_errors() {
    let st = IsoSettings::default();
    let e = tc_angle_search(TcCase::AfterBinaryCollisions(1), (40.0, 50.0), 1e-6, &st).unwrap_err();
    assert!(matches!(e, Error::NoSignChange(_)));
    assert!(!e.is_numerical());
    assert!(tc_angle_search(TcCase::AfterBinaryCollisions(1), (0.0, 30.0), 1e-6, &st).is_err());
    assert!(tc_angle_search(TcCase::AfterBinaryCollisions(1), (20.0, 180.0), 1e-6, &st).is_err());
}

#[test]
fn binary_collision_is_regular_and_triple_is_not() {
    let near_bc = IsoscelesState::new(1.5, 1e-10, 0.0, -3.0, 1.0).unwrap();
    assert!(matches!(classify_singularity(&near_bc, 1.0).unwrap(), SingularityKind::Binary { .. }));
    let near_tc = IsoscelesState::new(1e-10, 1e-10, 0.0, 0.0, 1.0).unwrap();
    assert_eq!(classify_singularity(&near_tc, 1.0).unwrap(), SingularityKind::Triple);
    let far = IsoscelesState::new(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
    assert!(classify_singularity(&far, 1.0).is_err());
}
