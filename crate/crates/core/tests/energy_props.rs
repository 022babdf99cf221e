use std::time::Duration;

use embedbench::bench::{estimate_energy, time_stage, PowerProfile, WallClock};
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = PowerProfile> {
    (0.0f64..500.0, 0.0f64..500.0, 0.0f64..50.0, 0.0f64..1.5)
        .prop_map(|(c, g, r, i)| PowerProfile::new("p", c, g, r, i).unwrap())
}

/// Relative agreement to a few units in the last place.
fn ulps_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

proptest! {
    #[test]
    fn energy_is_linear_in_duration(p in profile(), a in 0.0f64..1e5, b in 0.0f64..1e5) {
        let ea = estimate_energy(a, &p).unwrap();
        let eb = estimate_energy(b, &p).unwrap();
        let eab = estimate_energy(a + b, &p).unwrap();
        prop_assert!(ulps_close(eab.energy_kwh, ea.energy_kwh + eb.energy_kwh));
        prop_assert!(ulps_close(eab.emissions_kg, ea.emissions_kg + eb.emissions_kg));
        let doubled = estimate_energy(2.0 * a, &p).unwrap();
        prop_assert_eq!(doubled.energy_kwh, 2.0 * ea.energy_kwh);
        prop_assert_eq!(doubled.emissions_kg, 2.0 * ea.emissions_kg);
    }

    #[test]
    fn energy_grows_with_every_power_field(p in profile(), d in 0.0f64..1e4, bump in 0.0f64..100.0) {
        let base = estimate_energy(d, &p).unwrap();
        for field in 0..4 {
            let mut q = p.clone();
            match field {
                0 => q.cpu_power_w += bump,
                1 => q.gpu_power_w += bump,
                2 => q.ram_power_w += bump,
                _ => q.carbon_intensity += bump,
            }
            let e = estimate_energy(d, &q).unwrap();
            prop_assert!(e.energy_kwh >= base.energy_kwh);
            prop_assert!(e.emissions_kg >= base.emissions_kg);
        }
    }

    #[test]
    fn runs_on_one_profile_lie_on_a_line_through_the_origin(
        p in profile(),
        durations in prop::collection::vec(1e-3f64..1e4, 2..20),
    ) {
        prop_assume!(p.total_power_w() > 0.0);
        let slope = estimate_energy(durations[0], &p).unwrap().energy_kwh / durations[0];
        for &d in &durations {
            let e = estimate_energy(d, &p).unwrap();
            prop_assert!(ulps_close(e.energy_kwh / d, slope));
        }
    }
}

#[test]
fn sleeping_action_is_timed_from_below() {
    let clock = WallClock::new();
    let (t, out) = time_stage("sleep", &clock, 5, |_| {
        std::thread::sleep(Duration::from_millis(10));
        Ok(42)
    })
    .unwrap();
    assert_eq!(t.repeats(), 5);
    assert!(t.durations_s.iter().all(|&d| d >= 0.010));
    assert!(t.mean_s >= 0.010);
    assert_eq!(out, vec![42; 5]);
    let (one, _) = time_stage("once", &clock, 1, |_| Ok(())).unwrap();
    assert_eq!(one.mean_s, one.durations_s[0]);
    assert!(time_stage("none", &clock, 0, |_| Ok(())).is_err());
}
