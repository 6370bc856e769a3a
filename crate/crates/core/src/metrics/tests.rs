use super::*;
use crate::channel::trial_rng;
use crate::constellation::{build_constellation, PhaseTable, Scheme};
use crate::error::Error;
use crate::shaping::{design_pm, design_srrc};
use crate::waveform::WaveformBuffer;
use num_complex::Complex64;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

const R: f64 = 10_500.0;

fn coherent(scheme: Scheme, m: usize) -> Modulation {
    Modulation::Coherent(build_constellation(scheme, m).unwrap())
}

fn uncoded(name: &str, modulation: Modulation) -> Link {
    Link {
        name: name.into(),
        modulation,
        coding: Coding::Uncoded,
        filter: Arc::new(design_srrc(0.6, 4, 8).unwrap()),
        symbol_rate: R,
    }
}

fn curve(points: &[(f64, f64)]) -> BerCurve {
    BerCurve {
        scheme: "t".into(),
        points: points
            .iter()
            .map(|&(e, b)| BerPoint { ebn0_db: e, ber: b, bits: 1_000_000, errors: (b * 1e6) as u64, frames: 1 })
            .collect(),
    }
}

#[test]
fn noiseless_point_has_zero_ber() {
    let link = uncoded("8psk", coherent(Scheme::Psk, 8));
    let stop = StopRule { min_errors: 1, max_bits: 100_000, end_on_zero: true };
    let p = run_ber_point(&link, f64::INFINITY, 0, stop, 1).unwrap();
    assert_eq!(p.errors, 0);
    assert_eq!(p.ber, 0.0);
    assert!(p.bits >= 100_000);
}

#[test]
fn uncoded_8psk_matches_closed_form() {
    let link = uncoded("8psk", coherent(Scheme::Psk, 8));
    let e = theory::ebn0_for_ber(|d| theory::mpsk_ber(8, d), 1e-3);
    let stop = StopRule { min_errors: 2000, max_bits: 50_000_000, end_on_zero: false };
    let p = run_ber_point(&link, e, 0, stop, 7).unwrap();
    assert!(p.errors >= 100);
    assert!((p.ber / 1e-3 - 1.0).abs() < 0.10, "BER {} at {e:.2} dB", p.ber);
}

#[test]
fn uncoded_16qam_matches_closed_form() {
    let link = uncoded("16qam", coherent(Scheme::Qam, 16));
    let e = theory::ebn0_for_ber(|d| theory::square_qam_ber(16, d), 1e-3);
    let stop = StopRule { min_errors: 2000, max_bits: 50_000_000, end_on_zero: false };
    let p = run_ber_point(&link, e, 0, stop, 9).unwrap();
    assert!((p.ber / 1e-3 - 1.0).abs() < 0.10, "BER {} at {e:.2} dB", p.ber);
}

#[test]
fn uncoded_d8psk_near_closed_form() {
    let link = uncoded("d8psk", Modulation::Differential(PhaseTable::bundled().unwrap()));
    let e = theory::ebn0_for_ber(|d| theory::dmpsk_ber(8, d), 1e-3);
    let stop = StopRule { min_errors: 1000, max_bits: 50_000_000, end_on_zero: false };
    let p = run_ber_point(&link, e, 0, stop, 3).unwrap();
    assert!(p.ber > 0.5e-3 && p.ber < 2e-3, "BER {}", p.ber);
}

#[test]
fn ber_monotone_in_ebn0() {
    let link = uncoded("8psk", coherent(Scheme::Psk, 8));
    let stop = StopRule { min_errors: 200, max_bits: 5_000_000, end_on_zero: true };
    let c = run_ber(&link, &[2.0, 4.0, 6.0, 8.0, 10.0], stop, 5).unwrap();
    assert!(c.inversions(100).is_empty(), "{:?}", c.points);
    assert_eq!(c.points.len(), 5);
}

#[test]
fn ber_deterministic_across_thread_counts() {
    let link = uncoded("16apsk", coherent(Scheme::Apsk, 16));
    let stop = StopRule { min_errors: 150, max_bits: 2_000_000, end_on_zero: true };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ber(&link, &[4.0, 6.0, 8.0], stop, 42).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert_eq!(ber_csv(&[a]), ber_csv(&[b]));
}

#[test]
fn papr_deterministic_across_thread_counts() {
    let f = design_pm(R, 4, 8, 80.0).unwrap();
    let m = coherent(Scheme::Qam, 64);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| papr_csv(&[ccdf_from_paprs("64qam", frame_paprs(&m, &f, 256, 500, 1).unwrap())]))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn differential_with_soft_code_rejected() {
    let mut link = uncoded("d8", Modulation::Differential(PhaseTable::bundled().unwrap()));
    link.coding = Coding::Conv(crate::fec::ConvConfig::standard_r3_4(480).unwrap());
    assert!(matches!(link.validate(), Err(Error::Config(_))));
}

#[test]
fn constant_envelope_has_zero_papr() {
    let c = build_constellation(Scheme::Psk, 8).unwrap();
    let mut rng = trial_rng(1, 0, 0);
    for _ in 0..20 {
        let frame: Vec<Complex64> = (0..256)
            .map(|_| c.points()[rand::Rng::random_range(&mut rng, 0..8)])
            .collect();
        assert!(papr_db(&frame).abs() < 1e-12);
    }
}

#[test]
fn d8psk_has_lowest_papr_with_srrc() {
    let f = design_srrc(0.6, 4, 8).unwrap();
    let frames = 10_000;
    let level = |m: &Modulation| backoff_at(&ccdf_from_paprs("x", frame_paprs(m, &f, 256, frames, 2).unwrap()), 1e-3).unwrap();
    let base = level(&Modulation::Differential(PhaseTable::bundled().unwrap()));
    for (s, m) in [(Scheme::Qam, 16), (Scheme::Qam, 256), (Scheme::Apsk, 16), (Scheme::Apsk, 256)] {
        assert!(level(&coherent(s, m)) > base, "{s}{m}");
    }
}

#[test]
fn backoff_needs_enough_frames() {
    let paprs: Vec<f64> = (0..9_999).map(|i| i as f64 * 1e-3).collect();
    let c = ccdf_from_paprs("x", paprs);
    assert!(matches!(backoff_at(&c, 1e-3), Err(Error::InsufficientData(_))));
    assert!(backoff_at(&c, 1e-2).is_ok());
    assert!(matches!(backoff_at(&c, 0.0), Err(Error::Domain(_))));
}

#[test]
fn backoff_matches_empirical_quantile() {
    // Uniform PAPRs on [0, 10): Pr(X > x) = 1 − x/10, so p = 1e-2 → 9.9.
    let n = 100_000;
    let paprs: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / n as f64).collect();
    let c = ccdf_from_paprs("u", paprs);
    assert!((backoff_at(&c, 1e-2).unwrap() - 9.9).abs() < 1e-3);
    assert!((backoff_at(&c, 0.5).unwrap() - 5.0).abs() < 1e-3);
}

proptest! {
    #[test]
    fn ccdf_non_increasing(v in proptest::collection::vec(0.0f64..20.0, 1..400)) {
        let c = ccdf_from_paprs("p", v);
        for w in c.points.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
            prop_assert!(w[1].0 >= w[0].0);
        }
        prop_assert!(c.points.iter().all(|p| (0.0..=1.0).contains(&p.1)));
    }

    #[test]
    fn lm_identity(g in -20.0f64..20.0, b in -5.0f64..10.0, r in 1.0f64..100.0) {
        let row = LinkMarginRow::new("x", g, b, r);
        prop_assert_eq!(row.lm_db, g - b);
    }
}

#[test]
fn white_noise_psd_is_flat() {
    let mut rng = trial_rng(11, 0, 0);
    let samples: Vec<Complex64> = (0..1_000_000)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let w = WaveformBuffer::new(samples, 42_000.0, 4);
    let p = estimate_psd(&w, DEFAULT_SEGMENT, DEFAULT_OVERLAP, "noise").unwrap();
    let mean = p.db.iter().sum::<f64>() / p.db.len() as f64;
    let worst = p.db.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
    assert!(worst < 1.5, "deviation {worst} dB");
    assert_eq!(p.freq_hz.len(), DEFAULT_SEGMENT);
    assert!((p.freq_hz[0] + 21_000.0).abs() < 1e-9);
}

#[test]
fn psd_tone_lands_on_its_bin() {
    let fs = 4096.0;
    let f0 = 512.0;
    let samples: Vec<Complex64> = (0..4096 * 8)
        .map(|n| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f0 * n as f64 / fs))
        .collect();
    let p = estimate_psd(&WaveformBuffer::new(samples, fs, 1), 4096, 0.5, "tone").unwrap();
    let (i, _) = p.db.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert!((p.freq_hz[i] - f0).abs() < 1e-9);
}

#[test]
fn pm_oob_far_below_srrc() {
    let pm = design_pm(R, 4, 8, 80.0).unwrap();
    let srrc = design_srrc(0.6, 4, 8).unwrap();
    let m = coherent(Scheme::Qam, 16);
    let level = |f| {
        let w = random_waveform(&m, f, 1 << 17, R, 3).unwrap();
        estimate_psd(&w, DEFAULT_SEGMENT, DEFAULT_OVERLAP, "x").unwrap().level_at(1.5 * R)
    };
    let (a, b) = (level(&pm), level(&srrc));
    assert!(b - a >= 25.0, "PM {a:.1} dB, SRRC {b:.1} dB");
}

#[test]
fn qam_and_apsk_spectra_agree() {
    let f = design_pm(R, 4, 8, 80.0).unwrap();
    let psd = |s| {
        let w = random_waveform(&coherent(s, 256), &f, 1 << 18, R, 4).unwrap();
        estimate_psd(&w, DEFAULT_SEGMENT, DEFAULT_OVERLAP, "x").unwrap()
    };
    // Averages over 32-bin groups (82 Hz) to suppress per-bin estimation noise.
    let smooth = |p: &PsdCurve| -> Vec<(f64, f64)> {
        p.freq_hz
            .chunks(32)
            .zip(p.db.chunks(32))
            .map(|(f, d)| {
                let lin = d.iter().map(|x| 10f64.powf(x / 10.0)).sum::<f64>() / 32.0;
                (f[16], 10.0 * lin.log10())
            })
            .collect()
    };
    let (q, a) = (smooth(&psd(Scheme::Qam)), smooth(&psd(Scheme::Apsk)));
    for ((f, dq), (_, da)) in q.iter().zip(&a) {
        if f.abs() <= R {
            assert!((dq - da).abs() < 0.5, "{f} Hz: {dq} vs {da}");
        }
    }
}

#[test]
fn psd_rejects_short_input() {
    let w = WaveformBuffer::new(vec![Complex64::new(1.0, 0.0); 4096], 1.0, 1);
    assert!(estimate_psd(&w, 4096, 0.5, "x").is_err());
    assert!(estimate_psd(&w, 64, 1.0, "x").is_err());
}

#[test]
fn info_bit_rates() {
    assert!((info_bit_rate(10.5, 256, 0.75) - 63.0).abs() < 1e-12);
    assert!((info_bit_rate(10.5, 64, 0.75) - 47.25).abs() < 1e-12);
    assert!((info_bit_rate(10.5, 32, 0.75) - 39.375).abs() < 1e-12);
    assert!((info_bit_rate(10.5, 16, 0.75) - 31.5).abs() < 1e-12);
    assert!((info_bit_rate(10.5, 8, 0.75) - 23.625).abs() < 1e-12);
    let d8 = info_bit_rate(10.5, 8, 249.0 / 255.0);
    assert!((d8 - 30.7588).abs() < 1e-3);
    assert!((d8 - 30.75).abs() < 0.05);
    assert_eq!(info_bit_rate(10_500.0, 2, 1.0), 10_500.0);
}

#[test]
fn voice_capacities() {
    assert_eq!(voice_capacity(31_500.0, 2_400.0).unwrap(), 13);
    assert_eq!(voice_capacity(31_500.0, 700.0).unwrap(), 45);
    assert_eq!(voice_capacity(4_800.0, 4_800.0).unwrap(), 1);
    assert!(voice_capacity(0.0, 700.0).is_err());
}

#[test]
fn reference_rows_satisfy_identity() {
    let rows = [
        LinkMarginRow::new("16-APSK", 10.0, 2.8, 31.5),
        LinkMarginRow::new("256-QAM", 2.9, 3.7, 63.0),
        LinkMarginRow::new("8-PSK", 11.0, 0.0, 23.625),
    ];
    assert!((rows[0].lm_db - 7.2).abs() < 1e-12);
    assert!((rows[1].lm_db + 0.8).abs() < 1e-12);
    assert_eq!(rows[2].lm_db, 11.0);
}

#[test]
fn ebn0_interpolation_is_log_linear() {
    let c = curve(&[(0.0, 1e-2), (2.0, 1e-3), (4.0, 1e-5)]);
    assert!((ebn0_at_ber(&c, 1e-4).unwrap() - 3.0).abs() < 1e-12);
    assert!((ebn0_at_ber(&c, 10f64.powf(-2.5)).unwrap() - 1.0).abs() < 1e-12);
    let short = curve(&[(0.0, 1e-2), (2.0, 1e-3)]);
    assert!(matches!(ebn0_at_ber(&short, 1e-4), Err(Error::InsufficientData(_))));
}

#[test]
fn link_margin_table_relative_to_baseline() {
    let base_ber = curve(&[(8.0, 1e-3), (10.0, 1e-5)]);
    let s_ber = curve(&[(0.0, 1e-3), (2.0, 1e-5)]);
    let mk = |name: &str, shift: f64| {
        let v: Vec<f64> = (0..20_000).map(|i| shift + i as f64 * 1e-4).collect();
        ccdf_from_paprs(name, v)
    };
    let (bc, sc) = (mk("b", 1.0), mk("s", 3.0));
    let rows = link_margin_table(
        &LmInput { name: "D8PSK", ber: &base_ber, ccdf: &bc, rate_kbps: 30.75 },
        &[LmInput { name: "16-QAM", ber: &s_ber, ccdf: &sc, rate_kbps: 31.5 }],
    )
    .unwrap();
    assert_eq!(rows[0], LinkMarginRow::new("D8PSK", 0.0, 0.0, 30.75));
    assert!((rows[1].ebn0_gain_db - 8.0).abs() < 1e-9);
    assert!((rows[1].required_backoff_db - 2.0).abs() < 1e-6);
    assert!((rows[1].lm_db - 6.0).abs() < 1e-6);
}

#[test]
fn csv_headers_and_rows() {
    let c = curve(&[(0.0, 1e-2)]);
    let s = ber_csv(&[c]);
    assert!(s.starts_with("scheme,ebn0_db,ber,bits,errors\n"));
    assert_eq!(s.lines().count(), 2);
    let l = lm_csv(&[LinkMarginRow::new("8-PSK", 11.0, 0.0, 23.625)]);
    assert!(l.starts_with("modulation,ebn0_gain_db,required_backoff_db,lm_db,info_bit_rate_kbps\n"));
    let p = papr_csv(&[ccdf_from_paprs("a", vec![1.0, 2.0, 3.0])]);
    assert!(p.starts_with("scheme,papr_db,ccdf\n"));
    let d = psd_csv(&[PsdCurve { label: "a".into(), freq_hz: vec![0.0], db: vec![0.0] }]);
    assert!(d.starts_with("label,freq_hz,db\n"));
}
