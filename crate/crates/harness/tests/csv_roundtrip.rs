//! CSV writers and readers are exact inverses.

use iqi_core::propagator::Trajectory;
use iqi_core::qubit::QubitState;
use iqi_harness::csvio::{read_summary, read_trajectory, write_summary, write_trajectory, Status, SweepRecord};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6, Just(0.0), any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

fn status() -> impl Strategy<Value = Status> {
    prop_oneof![Just(Status::Decohered), Just(Status::NotYetDecohered), Just(Status::Failed)]
}

fn record() -> impl Strategy<Value = SweepRecord> {
    (
        finite(),
        finite(),
        status(),
        proptest::option::of(finite()),
        proptest::option::of(finite()),
        proptest::option::of(finite()),
        proptest::option::of(finite()),
    )
        .prop_map(|(s, lambda2, status, t_iq, omega_iq, k, t1_fit)| SweepRecord {
            s,
            lambda2,
            status,
            t_iq,
            omega_iq,
            k,
            t1_fit,
        })
}

proptest! {
    #[test]
    fn trajectory_round_trips_bit_exactly(
        steps in proptest::collection::vec((1e-9f64..10.0, finite(), finite(), finite()), 0..40),
    ) {
        let mut t = 0.0;
        let samples: Vec<(f64, QubitState)> = steps
            .iter()
            .map(|&(dt, a, b, c)| {
                t += dt;
                (t, QubitState::new(a, b, c))
            })
            .collect();
        let traj = Trajectory::from_samples(samples).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trajectory(&path, &traj).unwrap();
        let back = read_trajectory(&path).unwrap();
        prop_assert_eq!(back.samples, traj.samples);
    }

    #[test]
    fn summary_round_trips_bit_exactly(records in proptest::collection::vec(record(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        write_summary(&path, &records).unwrap();
        prop_assert_eq!(read_summary(&path).unwrap(), records.clone());
        // rewriting what was read reproduces the file byte for byte
        let first = std::fs::read(&path).unwrap();
        write_summary(&path, &read_summary(&path).unwrap()).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), first);
    }
}

#[test]
fn headers_are_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_summary(&path, &[SweepRecord::failed(0.5, 0.01)]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "s,lambda2,status,T_IQ,omega_IQ,k,T1_fit");
    assert!(text.lines().nth(1).unwrap().ends_with(",failed,,,,"));
}

#[test]
fn malformed_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    for bad in [
        "t,rho22,re_rho12\n0,1,0\n",
        "t,rho22,re_rho12,im_rho12\n0,1,x,0\n",
        "t,rho22,re_rho12,im_rho12\n1,1,0,0\n0,1,0,0\n",
    ] {
        std::fs::write(&path, bad).unwrap();
        assert!(read_trajectory(&path).is_err(), "{bad:?}");
    }
}
