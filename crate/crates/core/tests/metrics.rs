use proptest::prelude::*;
use tsc_lab::metrics::cycle_queue_metric;
use tsc_lab::sim::NUM_LANES;

#[test]
fn worked_examples() {
    assert_eq!(cycle_queue_metric(&[[0; NUM_LANES]; 30]).unwrap().q_cycle, 0);

    // lane maxima [5,6,4,7,1,7,0,3]; approach maxima N 6, E 7, S 7, W 3
    let ticks = [[3, 1, 4, 7, 0, 7, 0, 2], [5, 6, 2, 0, 1, 0, 0, 3]];
    let m = cycle_queue_metric(&ticks).unwrap();
    assert_eq!(m.q_cycle, 23);

    let mut one = [[0; NUM_LANES]; 10];
    one[6][4] = 4;
    assert_eq!(cycle_queue_metric(&one).unwrap().q_cycle, 4);
    assert!(cycle_queue_metric(&[]).is_err());
}

fn tick() -> impl Strategy<Value = [usize; NUM_LANES]> {
    prop::array::uniform8(0usize..60)
}

proptest! {
    #[test]
    fn repeating_the_log_changes_nothing(ticks in prop::collection::vec(tick(), 1..50)) {
        let doubled: Vec<_> = ticks.iter().chain(&ticks).copied().collect();
        prop_assert_eq!(cycle_queue_metric(&ticks).unwrap(), cycle_queue_metric(&doubled).unwrap());
    }

    #[test]
    fn bounded_by_peak_lane_sums(ticks in prop::collection::vec(tick(), 1..50)) {
        let m = cycle_queue_metric(&ticks).unwrap();
        let peak = ticks.iter().flatten().copied().max().unwrap();
        prop_assert!(m.q_cycle <= 4 * peak);
        prop_assert!(m.q_cycle >= peak);
        let mut order = ticks.clone();
        order.reverse();
        prop_assert_eq!(m, cycle_queue_metric(&order).unwrap());
    }
}
