//! Diagnostics stay within their natural ranges.

use netrec::diagnostics::{
    item_half_life, popularity_half_life, probe_degree_correlations, probe_scatter,
};
use netrec::{generate, time_probe, GenParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ranges_hold_on_generated_logs(seed in any::<u64>(), tau in 1i64..40, delta in 1i64..10) {
        let params = GenParams {
            n_users: 300,
            total_steps: 120,
            events_per_step: 10,
            seed,
            ..GenParams::default()
        };
        let log = generate(&params).unwrap();
        for a in 0..log.item_count() as u32 {
            let times = log.item_times(a);
            let life = item_half_life(times).unwrap();
            prop_assert!(life >= 0 && life <= times[times.len() - 1] - times[0]);
        }
        let stats = popularity_half_life(&log, 3);
        if let (Some(mean), Some(median)) = (stats.mean, stats.median) {
            prop_assert!(mean >= 0.0 && median >= 0.0);
        }
        let split = time_probe(&log, log.max_time() * 4 / 5, delta).unwrap();
        for row in probe_scatter(&split, tau).unwrap() {
            prop_assert!(row.delta_k <= row.k_train && row.age >= 0);
        }
        if let Ok(c) = probe_degree_correlations(&split, tau) {
            prop_assert!((-1.0..=1.0).contains(&c.degree_vs_probe));
            prop_assert!((-1.0..=1.0).contains(&c.increase_vs_probe));
        }
    }
}
