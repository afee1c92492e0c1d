mod oracle;

use approx::assert_relative_eq;
use proptest::prelude::*;

use simofdm_core::channel::{freq_channel_matrix, sample_paths, ChannelModel, TargetSet};
use simofdm_core::compensation::{equivalent_channel, rho_max};
use simofdm_core::link::{build, CompensatorKind};
use simofdm_core::linalg::{frobenius, CMatrix};
use simofdm_core::receiver::{subtract_sense, ReceiverChannel};
use simofdm_core::rng::{random_bits, trial_rng};
use simofdm_core::sensing::{crlb, fusion_weight};
use simofdm_core::waveform::{
    binomial, bits_per_symbol, build_sense_frame, comm_frame_to_bits, generate_m_sequence,
    map_bits_to_comm_frame, superpose, Frame, FrameRole, IndexCodebook,
};
use simofdm_core::Complex64;

fn layout() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=8).prop_flat_map(|n| (Just(n), 1..n)).prop_filter("needs index bits", |&(n, k)| binomial(n, k) >= 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bits_survive_map_and_demap((group, active) in layout(), seed in any::<u64>()) {
        let cfg = oracle::config(4 * group, group, active, 3);
        let cb = IndexCodebook::new(group, active).unwrap();
        let mut rng = trial_rng(seed, "prop/map", 0);
        let bits = random_bits(&mut rng, bits_per_symbol(&cfg).unwrap() * cfg.symbols);
        let frame = map_bits_to_comm_frame(&bits, &cfg, &cb).unwrap();
        prop_assert_eq!(comm_frame_to_bits(&frame, &cfg, &cb).unwrap(), bits);
        for n in 0..cfg.symbols {
            prop_assert!((frame.column_energy(n) - cfg.subcarriers as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn sensing_subtraction_inverts_superposition(rho in 0.0f64..0.99, norm in 0.5f64..20.0, power in 0.1f64..10.0, seed in any::<u64>()) {
        let mut cfg = oracle::config(32, 8, 2, 4);
        cfg.transmit_power = power;
        let cb = IndexCodebook::new(8, 2).unwrap();
        let sense = build_sense_frame(&cfg).unwrap();
        let mut rng = trial_rng(seed, "prop/subtract", 0);
        let comm = map_bits_to_comm_frame(&random_bits(&mut rng, bits_per_symbol(&cfg).unwrap() * 4), &cfg, &cb).unwrap();
        let x = superpose(&comm, &sense, rho).unwrap();
        let y = Frame::new(x.samples * Complex64::new(power.sqrt() / norm, 0.0), FrameRole::Received);
        let back = subtract_sense(&y, rho, &sense, &ReceiverChannel::flat(norm, 32), power).unwrap();
        let err = (&back.samples - &comm.samples).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "max error {}", err);
    }

    #[test]
    fn channel_matrix_is_linear_in_path_gains(scale_re in -3.0f64..3.0, scale_im in -3.0f64..3.0, seed in any::<u64>()) {
        let cfg = oracle::config(32, 8, 2, 1);
        let mut rng = trial_rng(seed, "prop/linear", 0);
        let paths = sample_paths(ChannelModel::Rayleigh, 5, 8, 300.0, &cfg, &mut rng).unwrap();
        let a = Complex64::new(scale_re, scale_im);
        let mut scaled = paths.clone();
        for p in &mut scaled.paths {
            p.gain *= a;
        }
        let h = freq_channel_matrix(&paths, &cfg) * a;
        let hs = freq_channel_matrix(&scaled, &cfg);
        let diff = (h - &hs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12 * (1.0 + a.norm()) * hs.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    #[test]
    fn precoders_have_unit_frobenius_norm(seed in any::<u64>(), paths in 1usize..6) {
        let cfg = oracle::config(32, 8, 2, 1);
        let mut rng = trial_rng(seed, "prop/precoder", 0);
        let p = sample_paths(ChannelModel::Rician { k_factor: 2.0 }, paths, 8, 100.0, &cfg, &mut rng).unwrap();
        let h = freq_channel_matrix(&p, &cfg);
        for kind in [CompensatorKind::Identity, CompensatorKind::FullInverse, CompensatorKind::IciOnly] {
            if let Ok(u) = build(kind, &h) {
                prop_assert!((frobenius(&u.matrix) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn crlb_scales_inversely_with_power_and_linearly_with_noise(
        power in 0.01f64..100.0,
        noise in 1e-4f64..10.0,
        a in 0.1f64..50.0,
        b in 0.1f64..50.0,
        rho in 0.05f64..0.9,
    ) {
        let mut cfg = oracle::config(32, 8, 2, 8);
        cfg.transmit_power = power;
        cfg.power_split = rho;
        let targets = TargetSet::from_pairs(&[(120.0, 4.0), (900.0, -12.0)], Complex64::new(1.0, 0.0), &cfg).unwrap();
        let frame = build_sense_frame(&cfg).unwrap();
        let base = crlb(&targets, &frame, noise, power, &cfg).unwrap();
        let power_scaled = crlb(&targets, &frame, noise, a * power, &cfg).unwrap();
        let noise_scaled = crlb(&targets, &frame, b * noise, power, &cfg).unwrap();
        for ((t, p), s) in base.targets.iter().zip(&power_scaled.targets).zip(&noise_scaled.targets) {
            assert_relative_eq!(p.range, t.range / a, max_relative = 1e-10);
            assert_relative_eq!(p.velocity, t.velocity / a, max_relative = 1e-10);
            assert_relative_eq!(s.range, t.range * b, max_relative = 1e-10);
            assert_relative_eq!(s.velocity, t.velocity * b, max_relative = 1e-10);
        }
    }

    #[test]
    fn static_perfect_rho_max_is_closed_form(gain in 0.0f64..20.0, seed in any::<u64>(), noise in 1e-4f64..1.0) {
        let cfg = oracle::config(16, 8, 2, 1);
        let mut rng = trial_rng(seed, "prop/rhomax", 0);
        let p = sample_paths(ChannelModel::Rician { k_factor: 2.0 }, 3, 8, 0.0, &cfg, &mut rng).unwrap();
        let h = freq_channel_matrix(&p, &cfg);
        let eq = equivalent_channel(&h, &h).unwrap();
        let (r, clamped) = rho_max(&eq, &h, gain, 1.0, noise).unwrap();
        prop_assert!(!clamped);
        prop_assert!((r - (1.0 - 10f64.powf(-gain / 10.0))).abs() < 1e-12);
    }

    #[test]
    fn fused_variance_never_exceeds_either_input(v1 in 0.0f64..1e4, v2 in 0.0f64..1e4) {
        let w = fusion_weight(v1, v2);
        prop_assert!((0.0..=1.0).contains(&w));
        let fused = w * w * v1 + (1.0 - w) * (1.0 - w) * v2;
        prop_assert!(fused <= v1.min(v2) * (1.0 + 1e-12) + 1e-300);
    }
}

#[test]
fn m_sequences_have_two_valued_autocorrelation() {
    for degree in 3..=12u32 {
        let s = generate_m_sequence(degree).unwrap();
        let n = s.len();
        assert_eq!(n, (1 << degree) - 1);
        for lag in 1..n {
            let c: f64 = (0..n).map(|i| s[i] * s[(i + lag) % n]).sum();
            assert_eq!(c, -1.0, "degree {degree}, lag {lag}");
        }
    }
}

#[test]
fn identity_estimate_leaves_channel_unchanged() {
    let cfg = oracle::config(16, 8, 2, 1);
    let mut rng = trial_rng(3, "prop/identity", 0);
    let p = sample_paths(ChannelModel::Rayleigh, 4, 8, 50.0, &cfg, &mut rng).unwrap();
    let h = freq_channel_matrix(&p, &cfg);
    let eq = equivalent_channel(&h, &h).unwrap();
    let diff = (eq - CMatrix::identity(16, 16)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-9);
}
