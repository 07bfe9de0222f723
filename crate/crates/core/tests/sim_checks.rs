//! Codebook structure, encoder statistics, decoding, and exact
//! equivocation of the coding-scheme simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secrecy_lab::channel::product_wiretap_channel;
use secrecy_lab::corpus::{corpus_rng, random_channel};
use secrecy_lab::error::Error;
use secrecy_lab::sim::{
    build_codebook, decode_noise_forwarding, decode_receiver, encode, equivocation_monte_carlo,
    exact_equivocation, run_experiment, transmit, Decoder, Scheme, SimConfig,
};
use secrecy_lab::Channel;

fn bsc_rows(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

/// Binary channel with `Y = X1` noiselessly and `Z = BSC(q)(X1)`.
fn clean_y_noisy_z(q: f64) -> Channel {
    product_wiretap_channel(&bsc_rows(0.0), &bsc_rows(q)).unwrap()
}

/// `Z` carries nothing: uniform regardless of the input.
fn blind_z() -> Channel {
    product_wiretap_channel(&bsc_rows(0.0), &bsc_rows(0.5)).unwrap()
}

fn all_codewords_distinct(cb: &secrecy_lab::sim::Codebook) -> bool {
    let mut seen = std::collections::HashSet::new();
    for i in 0..cb.m10 {
        for b in 0..cb.valid_b() {
            if !seen.insert((cb.q_seqs[i].clone(), cb.x1_seqs[i][b].clone())) {
                return false;
            }
        }
    }
    true
}

#[test]
fn zero_rates_build_single_codeword_books() {
    let mut cfg = SimConfig::uniform(blind_z(), Scheme::Scheme1);
    cfg.blocklength = 4;
    let cb = build_codebook(&cfg).unwrap();
    assert_eq!((cb.m10, cb.m11, cb.m2, cb.m), (1, 1, 1, 1));
    assert_eq!(cb.cells, 1);
}

#[test]
fn message_book_rounds_to_power_of_two() {
    let mut cfg = SimConfig::uniform(blind_z(), Scheme::Scheme1);
    cfg.blocklength = 4;
    cfg.r11 = 0.5;
    cfg.r = 0.5;
    let cb = build_codebook(&cfg).unwrap();
    assert_eq!(cb.m11, 4); // 2^ceil(4 * 0.5)
    assert!((cb.realized.r11 - 0.5).abs() < 1e-12);
}

#[test]
fn partition_cell_counts_match_the_split() {
    // Z = X1 noiselessly kills the secure excess, so the whole message is
    // carried by the partition: 2 cells of 4 dummy indices each
    let ch = product_wiretap_channel(&bsc_rows(0.0), &bsc_rows(0.0)).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme2);
    cfg.blocklength = 4;
    cfg.r = 0.75;
    cfg.r11 = 0.25;
    let cb = build_codebook(&cfg).unwrap();
    assert_eq!(cb.m, 8);
    assert_eq!(cb.m11, 2);
    assert!(cb.zero_secrecy);
    assert_eq!(cb.r_prime, 0.0);
    assert_eq!(cb.cells, 2);
    assert_eq!(cb.cell_size, 4);
    assert_eq!(cb.cells * cb.cell_size * cb.mw, cb.m);
}

#[test]
fn infeasible_split_is_rejected() {
    let mut cfg = SimConfig::uniform(blind_z(), Scheme::Scheme1);
    cfg.blocklength = 4;
    cfg.r11 = 0.75;
    cfg.r = 0.25;
    assert!(matches!(
        build_codebook(&cfg),
        Err(Error::Validation(_))
    ));
}

#[test]
fn encoder_draws_uniformly_within_the_cell() {
    let ch = product_wiretap_channel(&bsc_rows(0.0), &bsc_rows(0.0)).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme2);
    cfg.blocklength = 4;
    cfg.r = 0.75;
    cfg.r11 = 0.25;
    let cb = build_codebook(&cfg).unwrap();
    assert!(cb.partitioned());
    let w11 = 1usize;
    let j = w11 % cb.cells;
    let mut counts = vec![0usize; cb.cell_size];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let e = encode(&cb, 0, w11, &mut rng).unwrap();
        assert_eq!(cb.g(e.l), j, "dummy index escaped its cell");
        counts[e.l - j * cb.cell_size] += 1;
    }
    // chi-square against uniform over 4 bins: dof 3, 1% critical = 11.345
    let expect = 10_000.0 / cb.cell_size as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum();
    assert!(chi2 < 11.345, "chi-square {chi2} over {counts:?}");
}

#[test]
fn encoder_uniform_over_dummy_space_without_partition() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 10;
    cfg.r11 = 0.2;
    cfg.r = 0.9;
    let cb = build_codebook(&cfg).unwrap();
    assert!(!cb.partitioned());
    let mut counts = vec![0usize; cb.ml];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let e = encode(&cb, 0, 0, &mut rng).unwrap();
        counts[e.l] += 1;
    }
    let expect = 10_000.0 / cb.ml as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum();
    // dof = ml - 1 = 3, 1% critical = 11.345
    assert!(chi2 < 11.345, "chi-square {chi2}");
}

#[test]
fn encoder_deterministic_with_singleton_cells() {
    let ch = product_wiretap_channel(&bsc_rows(0.0), &bsc_rows(0.0)).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme1);
    cfg.blocklength = 4;
    cfg.r = 0.5;
    cfg.r11 = 0.5;
    let cb = build_codebook(&cfg).unwrap();
    assert!(cb.partitioned());
    assert_eq!(cb.cell_size, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = encode(&cb, 0, 1, &mut rng).unwrap();
    let b = encode(&cb, 0, 1, &mut rng).unwrap();
    assert_eq!(a.l, b.l);
    assert_eq!(a.b, b.b);
}

#[test]
fn noiseless_channel_decodes_every_codeword() {
    // hunt a collision-free codebook, then the receiver must recover every
    // message from its exact codeword
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 10;
    cfg.r11 = 0.4;
    cfg.r = 0.4;
    let cb = (0..100)
        .find_map(|seed| {
            cfg.seed = seed;
            let cb = build_codebook(&cfg).unwrap();
            all_codewords_distinct(&cb).then_some(cb)
        })
        .expect("no collision-free codebook in 100 seeds");
    for b in 0..cb.valid_b() {
        let y = cb.x1_seqs[0][b].clone();
        let got = decode_receiver(&cfg, &cb, &y, Decoder::MaxLikelihood).unwrap();
        assert_eq!(got, Some((0, cb.message_of_b(b))));
    }
}

#[test]
fn rate_above_capacity_fails_often() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 6;
    cfg.r11 = 2.0; // far beyond 1 bit/use
    cfg.r = 2.0;
    cfg.trials = 200;
    cfg.seed = 5;
    let report = run_experiment(&cfg).unwrap();
    assert!(
        report.empirical_pe >= 0.5,
        "pe {} too low for an impossible rate",
        report.empirical_pe
    );
}

#[test]
fn ml_and_typicality_agree_on_noiseless_uniform_channel() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 8;
    cfg.r11 = 0.25;
    cfg.r = 0.5;
    cfg.seed = 3;
    let cb = build_codebook(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let w10 = 0;
        let w11 = rng.gen_range(0..cb.m11);
        let e = encode(&cb, w10, w11, &mut rng).unwrap();
        let y = cb.x1_seqs[e.i][e.b].clone();
        let ml = decode_receiver(&cfg, &cb, &y, Decoder::MaxLikelihood).unwrap();
        let typ = decode_receiver(&cfg, &cb, &y, Decoder::JointTypicality { epsilon: 0.3 })
            .unwrap();
        assert_eq!(ml, typ);
    }
}

#[test]
fn noise_forwarding_equals_plain_decode_without_helper() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.2), Scheme::NoiseForwarding);
    cfg.blocklength = 6;
    cfg.r11 = 0.3;
    cfg.r = 0.5;
    cfg.seed = 9;
    let cb = build_codebook(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let y: Vec<u8> = (0..cfg.blocklength).map(|_| rng.gen_range(0..2u8)).collect();
        let a = decode_receiver(&cfg, &cb, &y, Decoder::MaxLikelihood).unwrap();
        let b = decode_noise_forwarding(&cfg, &cb, &y, Decoder::MaxLikelihood).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn noise_forwarding_with_pinned_helper_equals_conditioning() {
    // helper alphabet present but P(X2) is a point mass: marginalizing the
    // helper equals conditioning on its constant codeword
    let mut rng = corpus_rng(55);
    let ch = random_channel(&mut rng, 2, 2, 2, 2);
    let mut cfg = SimConfig::uniform(ch, Scheme::NoiseForwarding);
    cfg.pmf_x2 = vec![1.0, 0.0];
    cfg.blocklength = 6;
    cfg.r11 = 0.3;
    cfg.r = 0.5;
    cfg.seed = 21;
    let cb = build_codebook(&cfg).unwrap();
    assert!(cb.x2_seqs[0].iter().all(|&s| s == 0));
    let mut gen = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let y: Vec<u8> = (0..cfg.blocklength).map(|_| gen.gen_range(0..2u8)).collect();
        let nf = decode_noise_forwarding(&cfg, &cb, &y, Decoder::MaxLikelihood).unwrap();
        let conditioned = decode_receiver(&cfg, &cb, &y, Decoder::MaxLikelihood).unwrap();
        assert_eq!(nf, conditioned);
    }
}

#[test]
fn equivocation_blind_eavesdropper_gets_full_rate() {
    let mut cfg = SimConfig::uniform(blind_z(), Scheme::Scheme1);
    cfg.blocklength = 6;
    cfg.r10 = 0.2;
    cfg.r11 = 0.3;
    cfg.r = 0.5;
    cfg.seed = 4;
    let cb = build_codebook(&cfg).unwrap();
    let h = exact_equivocation(&cfg, &cb).unwrap();
    let full = ((cb.m10 as f64).log2() + (cb.m11 as f64).log2()) / cfg.blocklength as f64;
    assert!(
        (h - full).abs() < 1e-9,
        "equivocation {h} vs full rate {full}"
    );
}

#[test]
fn equivocation_single_message_is_zero() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 5;
    let cb = build_codebook(&cfg).unwrap();
    let h = exact_equivocation(&cfg, &cb).unwrap();
    assert!(h.abs() < 1e-12);
}

#[test]
fn equivocation_transparent_eavesdropper_no_dummy_is_zero() {
    // Z = X1 noiselessly, deterministic encoder, distinct codewords: the
    // eavesdropper's posterior is a point mass
    let ch = product_wiretap_channel(&bsc_rows(0.0), &bsc_rows(0.0)).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme1);
    cfg.blocklength = 8;
    cfg.r11 = 0.25;
    cfg.r = 0.25;
    let cb = (0..100)
        .find_map(|seed| {
            cfg.seed = seed;
            let cb = build_codebook(&cfg).unwrap();
            (all_codewords_distinct(&cb) && cb.cell_size == 1).then_some(cb)
        })
        .expect("no injective deterministic codebook in 100 seeds");
    let h = exact_equivocation(&cfg, &cb).unwrap();
    assert!(h.abs() < 1e-12, "posterior should be a point mass, H = {h}");
}

#[test]
fn equivocation_guard_points_to_monte_carlo() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 30; // 2^30 eavesdropper sequences
    let cb = build_codebook(&cfg).unwrap();
    match exact_equivocation(&cfg, &cb) {
        Err(Error::Guard(msg)) => assert!(msg.contains("Monte Carlo")),
        other => panic!("expected guard, got {other:?}"),
    }
    let (est, ci) = equivocation_monte_carlo(&cfg, &cb, 500).unwrap();
    assert!(est.abs() < 1e-12 && ci < 1e-12); // single message: exactly zero
}

#[test]
fn run_experiment_rejects_zero_trials() {
    let mut cfg = SimConfig::uniform(blind_z(), Scheme::Scheme1);
    cfg.trials = 0;
    assert!(matches!(run_experiment(&cfg), Err(Error::Validation(_))));
}

#[test]
fn fixed_seed_reports_are_bit_identical() {
    let mut cfg = SimConfig::uniform(clean_y_noisy_z(0.3), Scheme::Scheme1);
    cfg.blocklength = 8;
    cfg.r11 = 0.25;
    cfg.r = 0.5;
    cfg.trials = 300;
    cfg.seed = 77;
    let a = serde_json::to_string(&run_experiment(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scheme2_branch_matches_information_comparison() {
    // the eavesdropper sees the helper symbol verbatim next to a noisy copy
    // of X1, the receiver sees X1 only: I(X2;Y|Q1) = 0 < I(X2;Z|Q1), which
    // selects the conditioned secure-excess branch
    let by = bsc_rows(0.05);
    let bz = bsc_rows(0.25);
    let mut p = Vec::new();
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for y in 0..2 {
                for z in 0..4usize {
                    let (zb, z2) = (z >> 1, z & 1);
                    let pz = if z2 == x2 { bz[x1][zb] } else { 0.0 };
                    p.push(by[x1][y] * pz);
                }
            }
        }
    }
    let ch = Channel::new(2, 2, 2, 4, 0, p).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme2);
    cfg.blocklength = 6;
    cfg.r11 = 0.3;
    cfg.r = 0.8;
    let cb = build_codebook(&cfg).unwrap();
    assert!(cb.terms.i_x1_y_g_x2q1 > cb.terms.i_x1_z_g_x2q1);
    assert!(cb.terms.i_x2_y_g_q1 < cb.terms.i_x2_z_g_q1);
    assert_eq!(cb.case, "case2b");
    let expect = (cb.realized.r - cb.terms.i_x1_z_g_x2q1).max(0.0);
    assert!((cb.r_prime_target - expect).abs() < 1e-12);
}

#[test]
fn rate_bookkeeping_invariants_on_random_configs() {
    let mut rng = corpus_rng(56);
    for _ in 0..25 {
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let scheme = match rng.gen_range(0..3) {
            0 => Scheme::Scheme1,
            1 => Scheme::Scheme2,
            _ => Scheme::NoiseForwarding,
        };
        let mut cfg = SimConfig::uniform(ch, scheme);
        cfg.blocklength = rng.gen_range(3..=6);
        cfg.r10 = rng.gen_range(0.0..0.3);
        cfg.r11 = rng.gen_range(0.0..0.6);
        cfg.r2 = rng.gen_range(0.0..0.4);
        cfg.r = cfg.r11 + rng.gen_range(0.0..0.5);
        cfg.seed = rng.gen();
        let cb = build_codebook(&cfg).unwrap();
        assert!(cb.r_prime <= cb.realized.r + 1e-12);
        assert_eq!(cb.cells * cb.cell_size * cb.mw, cb.m);
        let h = exact_equivocation(&cfg, &cb).unwrap();
        assert!(h <= cb.realized.r10 + cb.realized.r11 + 1e-9);
    }
}

#[test]
fn noise_forwarding_succeeds_where_helper_decoding_fails() {
    // the helper sends dummy randomness at an undecodably high rate but
    // rarely interferes; ignoring it keeps the receiver reliable, decoding
    // it does not
    let e = 0.02;
    let mut p = Vec::new();
    for x1 in 0..2usize {
        for x2 in 0..2usize {
            for y in 0..2usize {
                for z in 0..2usize {
                    let py = if y == (x1 ^ x2) { 1.0 - e } else { e };
                    let pz = if z == x1 { 0.7 } else { 0.3 };
                    p.push(py * pz);
                }
            }
        }
    }
    let ch = Channel::new(2, 2, 2, 2, 0, p).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::NoiseForwarding);
    cfg.pmf_x2 = vec![0.97, 0.03];
    cfg.blocklength = 10;
    cfg.r11 = 0.25;
    cfg.r = 0.4;
    cfg.r2 = 1.0;
    cfg.trials = 300;
    cfg.seed = 0;

    // the operated rate sits inside the helper-as-noise region: check
    // against the marginal-channel information bound
    let slice = cfg.channel.marginals();
    let mut pm = Vec::new();
    for x1 in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let py: f64 = (0..2).map(|x2| cfg.pmf_x2[x2] * slice.p_y(x1, x2, y)).sum();
                let pz: f64 = (0..2).map(|x2| cfg.pmf_x2[x2] * slice.p_z(x1, x2, z)).sum();
                pm.push(py * pz);
            }
        }
    }
    let marginal = Channel::new(2, 1, 2, 2, 0, pm).unwrap();
    let mut mcfg = SimConfig::uniform(marginal, Scheme::NoiseForwarding);
    mcfg.blocklength = cfg.blocklength;
    let nf_rate_cap = secrecy_lab::sim::receiver_rate_cap(&mcfg).unwrap();
    let nf = run_experiment(&cfg).unwrap();
    assert!(
        nf.realized_r11 + 0.1 <= nf_rate_cap,
        "rate {} not inside the noise-forwarding bound {nf_rate_cap}",
        nf.realized_r11
    );
    assert!(nf.empirical_pe <= 0.1, "nf pe {}", nf.empirical_pe);

    let mut rx_cfg = cfg.clone();
    rx_cfg.scheme = Scheme::Scheme1;
    let rx = run_experiment(&rx_cfg).unwrap();
    assert!(
        rx.empirical_pe > 2.0 * nf.empirical_pe,
        "helper decoding pe {} vs nf pe {}",
        rx.empirical_pe,
        nf.empirical_pe
    );
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j + 1 < v.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn error_rate_trends_down_with_blocklength() {
    let ch = clean_y_noisy_z(0.3);
    let mut pes = Vec::new();
    let ns = [4.0f64, 6.0, 8.0, 10.0];
    for &n in &ns {
        let mut cfg = SimConfig::uniform(ch.clone(), Scheme::Scheme1);
        cfg.blocklength = n as usize;
        cfg.r11 = 0.4;
        cfg.r = 0.4;
        cfg.trials = 2000;
        cfg.seed = 0;
        pes.push(run_experiment(&cfg).unwrap().empirical_pe);
    }
    let rho = spearman(&ns, &pes);
    assert!(rho < 0.0, "expected a negative trend, rho = {rho} over {pes:?}");
}

#[test]
fn deaf_security_field_reports_full_rate_for_blind_helper() {
    // helper observation independent of everything: the helper learns
    // nothing, so H(W1|Y1^N X2^N)/N is the full message rate
    let bz = bsc_rows(0.3);
    let mut p = Vec::new();
    for x1 in 0..2usize {
        for y in 0..2usize {
            for z in 0..2usize {
                for y1 in 0..2usize {
                    let py = if y == x1 { 1.0 } else { 0.0 };
                    let _ = y1;
                    p.push(py * bz[x1][z] * 0.5);
                }
            }
        }
    }
    let ch = Channel::new(2, 1, 2, 2, 2, p).unwrap();
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme1);
    cfg.blocklength = 6;
    cfg.r11 = 0.5;
    cfg.r = 0.5;
    cfg.trials = 50;
    cfg.seed = 2;
    let report = run_experiment(&cfg).unwrap();
    let rs = report
        .deaf_security_bits_per_symbol
        .expect("channel exposes a helper observation");
    let full = report.realized_r10 + report.realized_r11;
    assert!((rs - full).abs() < 1e-9, "helper security {rs} vs full rate {full}");
}

#[test]
fn typicality_with_tight_slack_erases() {
    // a skewed input law rarely produces exactly-typical sequences at tiny
    // blocklength, so a tight epsilon forces erasures
    let ch = clean_y_noisy_z(0.3);
    let mut cfg = SimConfig::uniform(ch, Scheme::Scheme1);
    cfg.pmf_x1_given_q1 = vec![vec![0.7, 0.3]];
    cfg.blocklength = 5;
    cfg.r11 = 0.4;
    cfg.r = 0.4;
    cfg.seed = 6;
    let cb = build_codebook(&cfg).unwrap();
    let y = cb.x1_seqs[0][0].clone();
    let got = decode_receiver(&cfg, &cb, &y, Decoder::JointTypicality { epsilon: 1e-4 })
        .unwrap();
    assert_eq!(got, None, "expected an erasure under a tight slack");
}
