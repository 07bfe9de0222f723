//! Effectiveness-condition checks against the brute-force region oracle,
//! plus the algebraic rearrangements the condition derivation rests on.

use rand::Rng;
use secrecy_lab::corpus::{corpus_rng, random_aux_chain, random_channel};
use secrecy_lab::{brute_force_effective, check_prop2, compose_joint, AuxChain, Channel, Var};

fn bsc_rows(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

#[test]
fn no_secrecy_advantage_means_not_effective() {
    // eavesdropper sees X1 noiselessly, receiver through a BSC: the strict
    // condition fails with a clear margin
    let ch = secrecy_lab::channel::product_wiretap_channel(&bsc_rows(0.3), &bsc_rows(0.0)).unwrap();
    let aux = AuxChain {
        q1_size: 1,
        u1_size: 2,
        u2_size: 1,
        pmf_q1: vec![1.0],
        pmf_u1_given_q1: vec![vec![0.5, 0.5]],
        pmf_u2: vec![1.0],
        pmf_x1_given_u1: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        pmf_x2_given_u2: vec![vec![1.0]],
    };
    let v = check_prop2(&aux, &ch).unwrap();
    assert!(v.witness.i_u1_y_g_q1 < v.witness.i_u1_z_g_q1 - 1e-6);
    assert!(!v.effective);
    assert!(!brute_force_effective(&aux, &ch).unwrap());
}

#[test]
fn degenerate_helper_is_not_effective() {
    // constant U2 zeroes every helper term; with no secrecy advantage the
    // verdict is ineffective (and marginal, since the helper comparisons
    // sit exactly on their boundaries)
    let ch = secrecy_lab::channel::product_wiretap_channel(&bsc_rows(0.3), &bsc_rows(0.0)).unwrap();
    let aux = AuxChain::degenerate_for(2, 1);
    let v = check_prop2(&aux, &ch).unwrap();
    assert_eq!(v.witness.i_u2_y_g_q1, 0.0);
    assert_eq!(v.witness.i_u2_z_g_q1, 0.0);
    assert_eq!(v.witness.i_u2_y_g_u1, 0.0);
    assert_eq!(v.witness.i_u2_z_g_u1, 0.0);
    assert!(!v.effective);
    assert!(v.marginal);
    assert!(!brute_force_effective(&aux, &ch).unwrap());
}

#[test]
fn verdict_matches_brute_force_on_random_corpus() {
    let mut rng = corpus_rng(41);
    let mut checked = 0;
    let mut marginal = 0;
    let mut effective = 0;
    for _ in 0..300 {
        let x1 = rng.gen_range(2..=3usize);
        let x2 = rng.gen_range(2..=3usize);
        let ny = rng.gen_range(2..=3usize);
        let nz = rng.gen_range(2..=3usize);
        let nq = rng.gen_range(2..=3usize);
        let nu1 = rng.gen_range(2..=3usize);
        let nu2 = rng.gen_range(2..=3usize);
        let ch = random_channel(&mut rng, x1, x2, ny, nz);
        let aux = random_aux_chain(&mut rng, nq, nu1, nu2, x1, x2);
        let v = check_prop2(&aux, &ch).unwrap();
        if v.marginal {
            marginal += 1;
            continue;
        }
        let oracle = brute_force_effective(&aux, &ch).unwrap();
        assert_eq!(
            v.effective, oracle,
            "formula {} vs oracle {oracle} on witness {:?}",
            v.effective, v.witness
        );
        checked += 1;
        if v.effective {
            effective += 1;
        }
    }
    assert!(checked >= 200, "only {checked} non-marginal instances");
    // the corpus should exercise both verdicts
    assert!(effective > 0 && effective < checked);
    println!("prop2 corpus: {checked} checked, {effective} effective, {marginal} marginal");
}

#[test]
fn third_case_instances_are_never_effective() {
    // when the helper-to-eavesdropper side information is below the
    // helper's receiver rate, the noise scheme adds nothing
    let mut rng = corpus_rng(42);
    let mut seen = 0;
    for _ in 0..400 {
        let ch = random_channel(&mut rng, 2, 2, 2, 2);
        let aux = random_aux_chain(&mut rng, 2, 2, 2, 2, 2);
        let v = check_prop2(&aux, &ch).unwrap();
        let w = &v.witness;
        if w.i_u2_z_g_u1 <= w.i_u2_y_g_q1 - 1e-9 && !v.marginal {
            assert!(!v.effective);
            assert!(!brute_force_effective(&aux, &ch).unwrap());
            seen += 1;
        }
    }
    assert!(seen > 10, "third-case filter matched only {seen} instances");
}

#[test]
fn re_cap_difference_rearrangements_hold() {
    // the two algebraic identities behind the effectiveness conditions:
    //   (B - A1) = (I(U2;Z|U1) - I(U2;Z|Q1)) - (I(U2;Y|U1) - I(U2;Y|Q1))
    //   (B - A2) = I(U2;Z|U1) - I(U2;Y|U1)
    // where B is the helper-as-noise cap and A1, A2 the conditioned caps
    let mut rng = corpus_rng(43);
    for _ in 0..200 {
        let x1 = rng.gen_range(2..=3usize);
        let x2 = rng.gen_range(2..=3usize);
        let ny = rng.gen_range(2..=3usize);
        let nz = rng.gen_range(2..=3usize);
        let nq = rng.gen_range(2..=3usize);
        let nu1 = rng.gen_range(2..=3usize);
        let nu2 = rng.gen_range(2..=3usize);
        let ch = random_channel(&mut rng, x1, x2, ny, nz);
        let aux = random_aux_chain(&mut rng, nq, nu1, nu2, x1, x2);
        let j = compose_joint(&aux, &ch).unwrap();
        let b = j.cmi(&[Var::U1], &[Var::Y], &[Var::Q1]).unwrap()
            - j.cmi(&[Var::U1], &[Var::Z], &[Var::Q1]).unwrap();
        let a1 = j.cmi(&[Var::U1], &[Var::Y], &[Var::U2, Var::Q1]).unwrap()
            - j.cmi(&[Var::U1], &[Var::Z], &[Var::U2, Var::Q1]).unwrap();
        let a2 = j.cmi(&[Var::U1, Var::U2], &[Var::Y], &[Var::Q1]).unwrap()
            - j.cmi(&[Var::U1, Var::U2], &[Var::Z], &[Var::Q1]).unwrap();
        let zu1 = j.cmi(&[Var::U2], &[Var::Z], &[Var::U1]).unwrap();
        let zq1 = j.cmi(&[Var::U2], &[Var::Z], &[Var::Q1]).unwrap();
        let yu1 = j.cmi(&[Var::U2], &[Var::Y], &[Var::U1]).unwrap();
        let yq1 = j.cmi(&[Var::U2], &[Var::Y], &[Var::Q1]).unwrap();
        assert!(
            ((b - a1) - ((zu1 - zq1) - (yu1 - yq1))).abs() < 1e-9,
            "first rearrangement broken"
        );
        assert!(
            ((b - a2) - (zu1 - yu1)).abs() < 1e-9,
            "second rearrangement broken"
        );
    }
}
