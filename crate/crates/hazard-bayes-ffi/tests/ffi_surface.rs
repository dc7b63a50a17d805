//! Exercises the C entry points the way a foreign caller would: raw
//! pointers, status codes, explicit frees.

use std::ffi::{c_int, CStr, CString};
use std::ptr;

use hazard_bayes_ffi::*;

fn params(mu1: f64, mu2: f64, scale: f64) -> HbParams {
    HbParams { mu1, mu2, transition_scale: scale }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hb_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_non_empty() {
    let v = unsafe { CStr::from_ptr(hb_version()) }.to_str().unwrap();
    assert!(!v.is_empty());
}

#[test]
fn model_evaluation_round_trip() {
    let p = params(13.2, 58.5, 3.1);
    let mut value = 0.0f64;
    unsafe {
        assert_eq!(hb_effective_average(&p, 0.0, &mut value), HbStatus::Ok);
        assert_eq!(value, 13.2);
        assert_eq!(hb_hazard(&p, 0, &mut value), HbStatus::Ok);
        assert!((value - 1.0 / 14.2).abs() < 1e-15);
        assert_eq!(hb_survival(&p, 0, &mut value), HbStatus::Ok);
        assert_eq!(value, 1.0);
        assert_eq!(hb_score_pmf(&p, 1, &mut value), HbStatus::Ok);
        assert!(value > 0.0 && value < 1.0);
    }
}

#[test]
fn null_and_invalid_arguments_are_reported() {
    let p = params(13.2, 58.5, 3.1);
    let mut value = 0.0f64;
    unsafe {
        assert_eq!(hb_effective_average(ptr::null(), 1.0, &mut value), HbStatus::NullArgument);
        assert_eq!(hb_effective_average(&p, 1.0, ptr::null_mut()), HbStatus::NullArgument);
        assert_eq!(hb_effective_average(&p, -1.0, &mut value), HbStatus::InvalidArgument);
        // mu1 > mu2 violates the constraint.
        let bad = params(60.0, 50.0, 5.0);
        assert_eq!(hb_hazard(&bad, 0, &mut value), HbStatus::InvalidArgument);
        assert!(last_error().contains("initial average"));
    }
}

#[test]
fn dataset_lifecycle_and_likelihood() {
    unsafe {
        let data = hb_dataset_new();
        assert_eq!(hb_dataset_len(data), 0);
        assert_eq!(hb_dataset_push(data, 4, 0), HbStatus::Ok);
        assert_eq!(hb_dataset_push(data, 0, 0), HbStatus::Ok);
        assert_eq!(hb_dataset_push(data, 7, 1), HbStatus::Ok);
        assert_eq!(hb_dataset_len(data), 3);

        let p = params(5.0, 30.0, 3.0);
        let mut ll = 0.0f64;
        assert_eq!(hb_log_likelihood(data, &p, &mut ll), HbStatus::Ok);
        assert!(ll.is_finite() && ll < 0.0);

        // Empty dataset is invalid for the likelihood.
        let empty = hb_dataset_new();
        assert_eq!(hb_log_likelihood(empty, &p, &mut ll), HbStatus::InvalidArgument);

        hb_dataset_free(empty);
        hb_dataset_free(data);
        hb_dataset_free(ptr::null_mut()); // null-safe
    }
}

#[test]
fn csv_parsing_selects_players() {
    let text = CString::new("player,score\nwaugh,45*\nwaugh,0\nlara,400*\n").unwrap();
    let waugh = CString::new("waugh").unwrap();
    unsafe {
        let mut data: *mut HbDataset = ptr::null_mut();
        assert_eq!(
            hb_dataset_parse_csv(text.as_ptr(), waugh.as_ptr(), &mut data),
            HbStatus::Ok
        );
        assert_eq!(hb_dataset_len(data), 2);
        hb_dataset_free(data);

        // Two players but none named: ambiguous.
        let mut ambiguous: *mut HbDataset = ptr::null_mut();
        assert_eq!(
            hb_dataset_parse_csv(text.as_ptr(), ptr::null(), &mut ambiguous),
            HbStatus::InvalidArgument
        );

        let missing = CString::new("tendulkar").unwrap();
        assert_eq!(
            hb_dataset_parse_csv(text.as_ptr(), missing.as_ptr(), &mut ambiguous),
            HbStatus::InvalidArgument
        );
        assert!(last_error().contains("tendulkar"));

        let garbage = CString::new("waugh,4x\n").unwrap();
        assert_eq!(
            hb_dataset_parse_csv(garbage.as_ptr(), ptr::null(), &mut ambiguous),
            HbStatus::ParseError
        );
        assert!(last_error().contains("line 1"));
    }
}

#[test]
fn simulate_analyze_summarize_compare() {
    unsafe {
        let truth = params(10.0, 40.0, 5.0);
        let mut data: *mut HbDataset = ptr::null_mut();
        assert_eq!(hb_simulate_career(&truth, 300, 0.1, 7, &mut data), HbStatus::Ok);
        assert_eq!(hb_dataset_len(data), 300);

        let config = HbNsConfig { n_particles: 80, mcmc_steps: 40, seed: 11 };
        let mut posterior: *mut HbPosterior = ptr::null_mut();
        assert_eq!(hb_analyze(data, &config, &mut posterior), HbStatus::Ok);
        let len = hb_posterior_len(posterior);
        assert!(len >= 100, "expected equal-weight samples, got {len}");

        let mut sample = params(0.0, 0.0, 0.0);
        assert_eq!(hb_posterior_sample(posterior, 0, &mut sample), HbStatus::Ok);
        assert!(sample.mu1 <= sample.mu2);
        assert_eq!(
            hb_posterior_sample(posterior, len, &mut sample),
            HbStatus::OutOfRange
        );

        let (mut log_z, mut err) = (0.0f64, 0.0f64);
        assert_eq!(hb_posterior_log_evidence(posterior, &mut log_z, &mut err), HbStatus::Ok);
        assert!(log_z.is_finite() && err >= 0.0);

        let mut summary = HbSummary {
            median: 0.0,
            plus_err: 0.0,
            minus_err: 0.0,
            lo68: 0.0,
            hi68: 0.0,
        };
        for param in 0..3 as c_int {
            assert_eq!(hb_posterior_summary(posterior, param, &mut summary), HbStatus::Ok);
            assert!(summary.lo68 <= summary.median && summary.median <= summary.hi68);
        }
        assert_eq!(hb_posterior_summary(posterior, 3, &mut summary), HbStatus::OutOfRange);

        // Self-comparison sits at one half.
        let mut prob = 0.0f64;
        assert_eq!(hb_compare(posterior, posterior, 1, 5, &mut prob), HbStatus::Ok);
        assert!((prob - 0.5).abs() <= 1e-3, "self comparison {prob}");

        // Determinism through the C surface.
        let mut posterior2: *mut HbPosterior = ptr::null_mut();
        assert_eq!(hb_analyze(data, &config, &mut posterior2), HbStatus::Ok);
        let mut a = params(0.0, 0.0, 0.0);
        let mut b = params(0.0, 0.0, 0.0);
        for i in [0usize, 17, len - 1] {
            assert_eq!(hb_posterior_sample(posterior, i, &mut a), HbStatus::Ok);
            assert_eq!(hb_posterior_sample(posterior2, i, &mut b), HbStatus::Ok);
            assert_eq!(a.mu1.to_bits(), b.mu1.to_bits());
            assert_eq!(a.mu2.to_bits(), b.mu2.to_bits());
        }

        hb_posterior_free(posterior2);
        hb_posterior_free(posterior);
        hb_posterior_free(ptr::null_mut());
        hb_dataset_free(data);
    }
}

#[test]
fn bayes_factor_prefers_varying_hazard_on_varying_data() {
    unsafe {
        let truth = params(5.0, 50.0, 5.0);
        let mut data: *mut HbDataset = ptr::null_mut();
        assert_eq!(hb_simulate_career(&truth, 400, 0.1, 3, &mut data), HbStatus::Ok);
        let config = HbNsConfig { n_particles: 80, mcmc_steps: 40, seed: 4 };
        let (mut log_z, mut log_z0, mut log_bf) = (0.0f64, 0.0f64, 0.0f64);
        assert_eq!(
            hb_log_bayes_factor(data, &config, &mut log_z, &mut log_z0, &mut log_bf),
            HbStatus::Ok
        );
        assert!((log_z - log_z0 - log_bf).abs() < 1e-12);
        assert!(log_bf > 0.0, "varying-hazard data should favor the varying model: {log_bf}");
        hb_dataset_free(data);
    }
}
