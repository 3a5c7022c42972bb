//! Exercises the C surface the way a foreign caller would: status codes,
//! out-pointers, the error-message channel, and the opaque simulator handle.

use std::os::raw::c_char;
use std::ptr;

use mimo_uplink_ffi::*;

fn last_error() -> String {
    unsafe {
        let needed = mu_last_error_message(ptr::null_mut(), 0);
        assert!(needed > 0, "no error message set");
        let mut buf = vec![0u8; needed];
        let written = mu_last_error_message(buf.as_mut_ptr().cast::<c_char>(), buf.len());
        assert_eq!(written, needed);
        let nul = buf.iter().position(|&b| b == 0).unwrap();
        String::from_utf8(buf[..nul].to_vec()).unwrap()
    }
}

#[test]
fn scalar_functions_round_trip() {
    unsafe {
        let (mut hat, mut tilde) = (0.0, 0.0);
        assert_eq!(
            mu_estimation_variances(3.0, &mut hat, &mut tilde),
            MuStatus::Ok
        );
        assert_eq!((hat, tilde), (0.75, 0.25));

        let mut p_d = 0.0;
        assert_eq!(mu_data_power(1.0, 4, 2, 2.0, &mut p_d), MuStatus::Ok);
        assert_eq!(p_d, 1.0);

        let mut rho = 0.0;
        assert_eq!(mu_effective_snr(2.0, 4.0, 2, &mut rho), MuStatus::Ok);
        assert!((rho - 8.0 / 9.0).abs() < 1e-15);

        assert_eq!(mu_effective_snr_equal_power(1.0, 1, &mut rho), MuStatus::Ok);
        assert!((rho - 1.0 / 3.0).abs() < 1e-15);

        let mut rate = 0.0;
        assert_eq!(mu_rate_zf(1.0, 10, 2, 10, &mut rate), MuStatus::Ok);
        assert!((rate - 0.8 * 9.0f64.log2()).abs() < 1e-12);
        assert_eq!(mu_rate_mrc(1.0, 10, 2, 10, &mut rate), MuStatus::Ok);
        assert!((rate - 0.8 * 5.5f64.log2()).abs() < 1e-12);

        assert_eq!(mu_k_star(5, 9, 10), 5);
        let mut dof = 0.0;
        assert_eq!(mu_dof_total(8, 4, 16, &mut dof), MuStatus::Ok);
        assert_eq!(dof, 3.0);
    }
}

#[test]
fn split_functions_agree_with_each_other() {
    unsafe {
        let mut closed = MuSplit {
            alpha_train: 0.0,
            e: 0.0,
            p_d: 0.0,
            rho: 0.0,
        };
        let mut grid = closed;
        assert_eq!(mu_optimal_split(1.0, 10, 2, &mut closed), MuStatus::Ok);
        assert_eq!(mu_optimal_split_grid(1.0, 10, 2, &mut grid), MuStatus::Ok);
        assert!((closed.rho - 0.4645169675575874).abs() < 1e-12);
        assert!((closed.rho - grid.rho).abs() <= 1e-9 * grid.rho);

        // rho_of_alpha at the optimal alpha reproduces the optimal rho.
        let mut rho = 0.0;
        assert_eq!(
            mu_rho_of_alpha(closed.alpha_train, 1.0, 10, 2, &mut rho),
            MuStatus::Ok
        );
        assert!((rho - closed.rho).abs() < 1e-12);
    }
}

#[test]
fn power_functions_match_the_scaling_law() {
    unsafe {
        let mut rho0 = 0.0;
        assert_eq!(mu_target_rho_for_rate(0.8, 2, 10, &mut rho0), MuStatus::Ok);
        assert!((rho0 - 1.0) < 1e-12);

        let (mut p100, mut p400) = (0.0, 0.0);
        assert_eq!(
            mu_required_power_asymptotic(rho0, 100, 2, 10, &mut p100),
            MuStatus::Ok
        );
        assert_eq!(
            mu_required_power_asymptotic(rho0, 400, 2, 10, &mut p400),
            MuStatus::Ok
        );
        assert_eq!((p100 / 2.0).to_bits(), p400.to_bits());

        let (mut p_exact, mut achieved) = (0.0, 0.0);
        assert_eq!(
            mu_required_power_exact(
                0.8,
                100,
                2,
                10,
                MuReceiver::Mrc as u32,
                &mut p_exact,
                &mut achieved
            ),
            MuStatus::Ok
        );
        assert!((p_exact - 0.0679270842).abs() < 1e-6);
        assert!((achieved - 0.8).abs() < 1e-9 * 0.8);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    unsafe {
        let mut p_d = 0.0;
        assert_eq!(
            mu_data_power(1.0, 4, 2, 5.0, &mut p_d),
            MuStatus::DomainError
        );
        assert!(
            last_error().contains("exceeds the budget"),
            "got {}",
            last_error()
        );

        assert_eq!(
            mu_data_power(1.0, 4, 2, 2.0, ptr::null_mut()),
            MuStatus::NullPointer
        );

        let mut rate = 0.0;
        assert_eq!(mu_rate_zf(1.0, 2, 4, 10, &mut rate), MuStatus::DomainError);
        assert!(last_error().contains("K <= M"), "got {}", last_error());

        let (mut p, mut a) = (0.0, 0.0);
        assert_eq!(
            mu_required_power_exact(0.8, 100, 2, 10, 99, &mut p, &mut a),
            MuStatus::InvalidArgument
        );
        assert!(
            last_error().contains("unknown receiver"),
            "got {}",
            last_error()
        );

        // Truncated reads still come back NUL terminated.
        let mut tiny = [0u8; 8];
        let needed = mu_last_error_message(tiny.as_mut_ptr().cast::<c_char>(), tiny.len());
        assert!(needed > tiny.len());
        assert_eq!(tiny[7], 0);
    }
}

#[test]
fn simulator_handle_is_deterministic_and_validates() {
    unsafe {
        let mut sim: *mut MuSimulator = ptr::null_mut();
        assert_eq!(mu_simulator_new(10, 2, 10, 1.0, &mut sim), MuStatus::Ok);
        assert!(!sim.is_null());

        let run = |sim: *const MuSimulator| {
            let (mut mean, mut se, mut resamples) = (0.0f64, 0.0f64, 0u64);
            let status = mu_simulator_empirical_rate(
                sim,
                MuReceiver::Zf as u32,
                -1.0,
                300,
                17,
                &mut mean,
                &mut se,
                &mut resamples,
            );
            assert_eq!(status, MuStatus::Ok);
            (mean, se, resamples)
        };
        let first = run(sim);
        let second = run(sim);
        assert_eq!(first.0.to_bits(), second.0.to_bits());
        assert_eq!(first.1.to_bits(), second.1.to_bits());
        assert_eq!(first.2, second.2);
        assert!(first.0 > 0.0 && first.1 > 0.0);

        // Fixed split through the same handle: alpha = 0.5.
        let (mut mean, mut se, mut resamples) = (0.0f64, 0.0f64, 0u64);
        assert_eq!(
            mu_simulator_empirical_rate(
                sim,
                MuReceiver::Mmse as u32,
                0.5,
                300,
                17,
                &mut mean,
                &mut se,
                &mut resamples
            ),
            MuStatus::Ok
        );
        assert!(mean > 0.0);

        // Bad receiver and bad alpha are rejected without touching outputs.
        let before = mean;
        assert_eq!(
            mu_simulator_empirical_rate(sim, 7, 0.5, 300, 17, &mut mean, &mut se, &mut resamples),
            MuStatus::InvalidArgument
        );
        assert_eq!(
            mu_simulator_empirical_rate(
                sim,
                MuReceiver::Zf as u32,
                1.5,
                300,
                17,
                &mut mean,
                &mut se,
                &mut resamples
            ),
            MuStatus::DomainError
        );
        assert_eq!(mean.to_bits(), before.to_bits());

        mu_simulator_free(sim);
        mu_simulator_free(ptr::null_mut());

        // Construction rejects K > M up front and nulls the handle even if
        // the caller left garbage in it.
        let mut bad: *mut MuSimulator = ptr::dangling_mut();
        assert_eq!(
            mu_simulator_new(2, 3, 10, 1.0, &mut bad),
            MuStatus::DomainError
        );
        assert!(bad.is_null());

        let status = mu_simulator_empirical_rate(
            ptr::null(),
            MuReceiver::Zf as u32,
            -1.0,
            300,
            17,
            &mut mean,
            &mut se,
            &mut resamples,
        );
        assert_eq!(status, MuStatus::NullPointer);
    }
}
