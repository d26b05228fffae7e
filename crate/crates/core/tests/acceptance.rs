//! Acceptance suite: thirteen numbered criteria covering the analytic
//! Werner-Holevo values, the qubit and Weyl instances, protocol
//! universality, the product-measurement bound, the separable-input
//! identity, chain consistency and the Haar study.
//!
//! Each test prints one `criterion NN: PASS/FAIL` line (run with
//! `--nocapture` to see them alongside the harness output) and fails the
//! suite on any violated tolerance.

use std::time::Instant;

use discrim_core::channels::{
    qubit_example, random_binary_channels, random_channel, sym_antisym_projectors, werner_holevo,
    weyl_flagged, ChannelPair, Family,
};
use discrim_core::haar::{closed_form_sum, mc_ne_integral, HaarSampler};
use discrim_core::linalg::{outer, trace_norm, BipartiteShape, Side};
use discrim_core::locc::{
    flagged_protocol, locc_lower_bound, random_binary_protocol, DiscriminationInstance,
};
use discrim_core::norms::{
    diamond_norm, ne_norm, ne_norm_flagged_objective, ne_norm_grid,
    ne_norm_random_binary_objective, norm_chain_with, ppt_norm, separable_input_invariance,
    thm1_product_bound_check, ChainConfig, ChainReport, Direction, NormEstimate, NormKind,
    ProductMeasurement,
};
use discrim_core::sdp::random_ppt_operator;

// ---------------------------------------------------------------------------
// reporting helpers

fn report(id: usize, start: Instant, failures: &[String], summary: &str) {
    let secs = start.elapsed().as_secs_f64();
    if failures.is_empty() {
        println!("criterion {id:02}: PASS ({secs:.1}s) — {summary}");
    } else {
        println!("criterion {id:02}: FAIL ({secs:.1}s) — {}", failures.join("; "));
        panic!("criterion {id:02} failed:\n{}", failures.join("\n"));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, message: impl FnOnce() -> String) {
    if !ok {
        failures.push(message());
    }
}

/// Re-tag a pair as `Custom` so the registered analytic values cannot snap
/// an estimate; the criteria below measure the raw optimizers.
fn untagged(pair: &ChannelPair) -> ChannelPair {
    ChannelPair::new(pair.phi0.clone(), pair.phi1.clone(), Family::Custom).unwrap()
}

// ---------------------------------------------------------------------------
// shared instance constructions (criterion 11 revisits those of 8 and 9)

fn criterion8_instance(k: u64) -> ChannelPair {
    let mut sampler = HaarSampler::new(0xAC08, 8).derive(k);
    let d = [2, 4, 6][(sampler.uniform() * 3.0) as usize % 3];
    let n = 1 + (sampler.uniform() * 8.0) as usize % 8;
    let unitaries: Vec<_> = (0..n).map(|_| sampler.unitary(d)).collect();
    random_binary_channels(d, &unitaries).unwrap()
}

/// The `k`-th random qubit-output pair together with the sampler positioned
/// right after the two channel draws (criterion 9 keeps sampling from it).
fn criterion9_pair(k: u64) -> (ChannelPair, HaarSampler) {
    let mut sampler = HaarSampler::new(0xAC09, 2).derive(k);
    let phi0 = random_channel(2, 2, 2, &mut sampler).unwrap();
    let phi1 = random_channel(2, 2, 2, &mut sampler).unwrap();
    let pair = ChannelPair::new(phi0, phi1, Family::Custom).unwrap();
    (pair, sampler)
}

// ---------------------------------------------------------------------------
// criteria

#[test]
fn criterion_01_werner_holevo_ne_matches_4_over_d_plus_1() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for d in 2..=5 {
        let pair = untagged(&werner_holevo(d).unwrap());
        let value = ne_norm(&pair, 32, 0xAC01).unwrap().value;
        let target = 4.0 / (d as f64 + 1.0);
        check(&mut failures, (value - target).abs() <= 1e-6, || {
            format!("d={d}: NE {value:.9} vs {target:.9}")
        });
    }
    report(1, start, &failures, "WH NE = 4/(d+1) within 1e-6 for d=2..5");
}

#[test]
fn criterion_02_werner_holevo_diamond_is_2() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for d in 2..=5 {
        let pair = untagged(&werner_holevo(d).unwrap());
        let value = diamond_norm(&pair, 8, 0xAC02).unwrap().value;
        check(&mut failures, (value - 2.0).abs() <= 1e-6, || {
            format!("d={d}: diamond {value:.9} vs 2")
        });
    }
    report(2, start, &failures, "WH diamond = 2 within 1e-6 for d=2..5");
}

#[test]
fn criterion_03_werner_holevo_ppt_reaches_but_never_exceeds_bound() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for d in 2..=3 {
        let pair = untagged(&werner_holevo(d).unwrap());
        let bound = 4.0 / (d as f64 + 1.0);
        // Restart 0 always starts from the maximally entangled input.
        let from_maxent = ppt_norm(&pair, 1, 0xAC03).unwrap().value;
        check(&mut failures, (from_maxent - bound).abs() <= 1e-4, || {
            format!("d={d}: maxent start reached {from_maxent:.9} vs {bound:.9}")
        });
        // The multistart best is the max over restarts, so best ≤ bound
        // certifies that no restart overshoots.
        let best = ppt_norm(&pair, 16, 0xAC03).unwrap().value;
        check(&mut failures, best <= bound + 1e-4, || {
            format!("d={d}: a restart overshot to {best:.9} vs {bound:.9}")
        });
    }
    report(3, start, &failures, "WH PPT hits 4/(d+1) within 1e-4, no overshoot, d=2,3");
}

#[test]
fn criterion_04_werner_holevo_choi_identity() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for d in 2..=5 {
        let pair = werner_holevo(d).unwrap();
        let (s, r) = sym_antisym_projectors(d);
        let expected = &s.scale(2.0 / (d as f64 + 1.0)) - &r.scale(2.0 / (d as f64 - 1.0));
        let deviation = (&pair.diff_choi().matrix - &expected).fro_norm();
        check(&mut failures, deviation <= 1e-9, || {
            format!("d={d}: Choi deviation {deviation:.3e}")
        });
    }
    report(4, start, &failures, "diff Choi = (2/(d+1))S - (2/(d-1))R to 1e-9, d=2..5");
}

#[test]
fn criterion_05_ppt_operators_respect_projector_inequality() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for d in 2..=4 {
        let shape = BipartiteShape::new(d, d);
        let (s, r) = sym_antisym_projectors(d);
        let r_minus_s = &r - &s;

        let marginal = r.partial_trace(shape, Side::A).unwrap();
        let expected = (d as f64 - 1.0) / 2.0;
        let mut marginal_dev = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { expected } else { 0.0 };
                marginal_dev = marginal_dev.max((marginal[(i, j)].re - target).abs());
                marginal_dev = marginal_dev.max(marginal[(i, j)].im.abs());
            }
        }
        check(&mut failures, marginal_dev <= 1e-10, || {
            format!("d={d}: Tr_Y(R) deviates from ((d-1)/2)·1 by {marginal_dev:.3e}")
        });

        let mut sampler = HaarSampler::new(0xAC05 + d as u64, d * d);
        for t in 0..100 {
            let q = random_ppt_operator(shape, &mut sampler).unwrap();
            let overlap = q.hs_inner(&r_minus_s).re;
            check(&mut failures, overlap <= 1e-9, || {
                format!("d={d} trial {t}: <Q, R-S> = {overlap:.3e}")
            });
        }
    }
    report(5, start, &failures, "<Q,R-S> ≤ 0 for 300 PPT operators; Tr_Y(R) marginal exact");
}

#[test]
fn criterion_06_qubit_examples_ne_and_protocol() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (variant, target) in [(2, 2.0_f64.sqrt()), (3, 2.0 / 3.0_f64.sqrt())] {
        let pair = qubit_example(variant).unwrap();
        let value = ne_norm(&untagged(&pair), 32, 0xAC06).unwrap().value;
        check(&mut failures, (value - target).abs() <= 1e-6, || {
            format!("variant {variant}: NE {value:.9} vs {target:.9}")
        });

        let instance = DiscriminationInstance::maximally_entangled(pair.clone()).unwrap();
        let tree = random_binary_protocol(&pair).unwrap();
        let p = instance.success_probability(&tree).unwrap();
        check(&mut failures, locc_lower_bound(p) >= 2.0 - 1e-9, || {
            format!("variant {variant}: LOCC lower bound {:.9}", locc_lower_bound(p))
        });
    }
    report(6, start, &failures, "qubit NE = √2 and 2/√3; protocol-certified LOCC ≥ 2");
}

#[test]
fn criterion_07_weyl_flagged_protocol_and_ne_bound() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for d in 2..=3 {
        let pair = weyl_flagged(d).unwrap();
        let instance = DiscriminationInstance::maximally_entangled(pair.clone()).unwrap();
        let tree = flagged_protocol(&pair, &instance.input, instance.dim_z).unwrap();
        let p = instance.success_probability(&tree).unwrap();
        check(&mut failures, p >= 1.0 - 1e-9, || {
            format!("d={d}: protocol success {p:.12}")
        });

        let value = ne_norm(&untagged(&pair), 16, 0xAC07).unwrap().value;
        let bound = 2.0 * (d as f64 / (d as f64 + 1.0)).sqrt();
        check(&mut failures, value <= bound + 1e-6, || {
            format!("d={d}: NE estimate {value:.9} above bound {bound:.9}")
        });
    }
    report(7, start, &failures, "Weyl d=2,3: perfect protocol; NE ≤ 2√(d/(d+1))");
}

#[test]
fn criterion_08_random_binary_protocol_universality() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in 0..20 {
        let pair = criterion8_instance(k);
        let instance = DiscriminationInstance::maximally_entangled(pair.clone()).unwrap();
        let tree = random_binary_protocol(&pair).unwrap();
        let p = instance.success_probability(&tree).unwrap();
        check(&mut failures, (p - 1.0).abs() <= 1e-9, || {
            format!("instance {k}: success {p:.12}")
        });
    }
    report(8, start, &failures, "20 random binary instances discriminated perfectly");
}

#[test]
fn criterion_09_product_measurement_bound_on_qubit_outputs() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0_usize;
    for k in 0..200 {
        let (pair, mut sampler) = criterion9_pair(k);
        // The Bloch-grid value is the NE reference for qubit-output pairs.
        let grid = ne_norm_grid(&pair).unwrap();
        let ne = NormEstimate {
            norm: NormKind::Ne,
            value: grid.value,
            direction: Direction::Upper,
            method: grid.method.clone(),
            restarts: grid.restarts,
            iterations: grid.iterations,
            residual: grid.residual,
            witness: None,
        };
        for _ in 0..2 {
            let rho = outer(&sampler.state(4));
            let m = ProductMeasurement::random(2, 2, 3, 3, &mut sampler).unwrap();
            match thm1_product_bound_check(&pair, &rho, &m, &ne) {
                Ok((lhs, rhs)) => {
                    checked += 1;
                    check(&mut failures, lhs <= rhs + 1e-6, || {
                        format!("pair {k}: product value {lhs:.9} above bound {rhs:.9}")
                    });
                }
                Err(e) => failures.push(format!("pair {k}: {e}")),
            }
        }
    }
    report(
        9,
        start,
        &failures,
        &format!("{checked} product measurements on 200 qubit-output pairs obey (dimY/2)·NE"),
    );
}

#[test]
fn criterion_10_separable_inputs_never_beat_ne() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let cases = [
        ("werner-holevo d=2", werner_holevo(2).unwrap(), 4.0 / 3.0),
        ("qubit-example 2", qubit_example(2).unwrap(), 2.0_f64.sqrt()),
    ];
    for (label, pair, ne) in cases {
        let excess = separable_input_invariance(&pair, ne, 500, 0xAC10).unwrap();
        check(&mut failures, excess <= 1e-7, || {
            format!("{label}: separable input exceeded NE by {excess:.3e}")
        });
    }
    report(10, start, &failures, "500 separable inputs per instance stay within NE");
}

/// Every lower bound of a smaller norm must stay below every upper bound of
/// a larger norm, up to 1e-6.
fn chain_consistent(label: &str, report: &ChainReport, failures: &mut Vec<String>) {
    for i in 0..report.rows.len() {
        for j in i..report.rows.len() {
            if let (Some(lower), Some(upper)) = (report.rows[i].lower, report.rows[j].upper) {
                check(failures, lower <= upper + 1e-6, || {
                    format!(
                        "{label}: {} lower {lower:.9} above {} upper {upper:.9}",
                        report.rows[i].norm.label(),
                        report.rows[j].norm.label()
                    )
                });
            }
        }
    }
}

#[test]
fn criterion_11_norm_chain_consistency_across_all_instances() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut count = 0_usize;

    let named_config = ChainConfig {
        seed: 0xAC11,
        ne_restarts: 16,
        diamond_restarts: 4,
        ppt_restarts: 2,
        sep_measurements: 8,
        ..ChainConfig::default()
    };
    let mut named: Vec<(String, ChannelPair)> = Vec::new();
    for d in 2..=5 {
        named.push((format!("werner-holevo d={d}"), werner_holevo(d).unwrap()));
    }
    for variant in 2..=3 {
        named.push((format!("qubit-example {variant}"), qubit_example(variant).unwrap()));
    }
    for d in 2..=3 {
        named.push((format!("weyl-flagged d={d}"), weyl_flagged(d).unwrap()));
    }
    for (label, pair) in &named {
        match norm_chain_with(pair, &named_config) {
            Ok(report) => chain_consistent(label, &report, &mut failures),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
        count += 1;
    }

    // The random instance sets of criteria 8 and 9, revisited with a
    // reduced budget: consistency is a structural property, so the cheaper
    // estimates must still assemble into a valid chain.
    let random_config = ChainConfig {
        seed: 0xAC11,
        ne_restarts: 6,
        diamond_restarts: 2,
        ppt_restarts: 2,
        sep_measurements: 4,
        max_sdp_dim: 16,
        ..ChainConfig::default()
    };
    for k in 0..20 {
        let pair = criterion8_instance(k);
        let label = format!("random-binary {k}");
        match norm_chain_with(&pair, &random_config) {
            Ok(report) => chain_consistent(&label, &report, &mut failures),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
        count += 1;
    }
    for k in 0..200 {
        let (pair, _) = criterion9_pair(k);
        let label = format!("qubit-output pair {k}");
        match norm_chain_with(&pair, &random_config) {
            Ok(report) => chain_consistent(&label, &report, &mut failures),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
        count += 1;
    }

    report(
        11,
        start,
        &failures,
        &format!("norm chains consistent on all {count} instances of criteria 1-10"),
    );
}

#[test]
fn criterion_12_haar_study() {
    let start = Instant::now();
    let mut failures = Vec::new();

    let mc = mc_ne_integral(2, 100_000, None, 0xAC12).unwrap();
    check(&mut failures, (mc.mean - 0.5).abs() <= 4.0 * mc.stderr, || {
        format!("mc integral {:.6} ± {:.6} vs 0.5", mc.mean, mc.stderr)
    });

    let sum2 = closed_form_sum(2).unwrap();
    let sum4 = closed_form_sum(4).unwrap();
    check(&mut failures, sum2 == 0.25, || format!("closed_form_sum(2) = {sum2:?}"));
    check(&mut failures, sum4 == 0.21875, || format!("closed_form_sum(4) = {sum4:?}"));

    let mut worst = 0.0_f64;
    for d in (2..=200).step_by(2) {
        let sum = closed_form_sum(d).unwrap();
        let asymptote = (2.0 / (std::f64::consts::PI * d as f64)).sqrt();
        worst = worst.max((sum - asymptote).abs() * d as f64);
    }
    check(&mut failures, worst <= 1.0, || {
        format!("d·|sum - √(2/(πd))| grew to {worst:.6}")
    });

    // The mc/sum ratio is reported, not asserted: the closed-form sum and
    // the integral differ by a constant factor that the study documents.
    report(
        12,
        start,
        &failures,
        &format!(
            "mc(2) = {:.4} ± {:.4}, sums exact, asymptote gap ≤ {worst:.3}/d; mc/sum ratio {:.3}",
            mc.mean,
            mc.stderr,
            mc.mean / sum2
        ),
    );
}

#[test]
fn criterion_13_specialized_objectives_match_generic() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut sampler = HaarSampler::new(0xAC13, 8);

    let flagged = weyl_flagged(2).unwrap();
    for t in 0..100 {
        let psi = sampler.state(flagged.dim_in());
        let fast = ne_norm_flagged_objective(&flagged, &psi).unwrap();
        let generic = trace_norm(&flagged.diff_apply(&outer(&psi)).unwrap()).unwrap();
        check(&mut failures, (fast - generic).abs() <= 1e-10, || {
            format!("flagged trial {t}: {fast:.12} vs {generic:.12}")
        });
    }

    let unitaries: Vec<_> = (0..4).map(|_| sampler.unitary(4)).collect();
    let binary = random_binary_channels(4, &unitaries).unwrap();
    for t in 0..100 {
        let psi = sampler.state(4);
        let fast = ne_norm_random_binary_objective(&binary, &psi).unwrap();
        let generic = trace_norm(&binary.diff_apply(&outer(&psi)).unwrap()).unwrap();
        check(&mut failures, (fast - generic).abs() <= 1e-10, || {
            format!("binary trial {t}: {fast:.12} vs {generic:.12}")
        });
    }

    let qubit = qubit_example(2).unwrap();
    let (random_pair, _) = criterion9_pair(0xF00D);
    for (label, pair) in [("qubit-example 2", &qubit), ("random 2->2", &random_pair)] {
        let seesaw = ne_norm(&untagged(pair), 16, 0xAC13).unwrap().value;
        let grid = ne_norm_grid(pair).unwrap().value;
        check(&mut failures, (seesaw - grid).abs() <= 1e-4, || {
            format!("{label}: seesaw {seesaw:.9} vs grid {grid:.9}")
        });
    }

    report(
        13,
        start,
        &failures,
        "flagged/binary objectives = trace norm to 1e-10; seesaw = grid to 1e-4",
    );
}

#[test]
fn criterion_08_maximally_entangled_input_is_used() {
    // Companion sanity for criterion 8's construction helper: the sampled
    // dimensions stay inside the advertised set.
    let mut seen = std::collections::BTreeSet::new();
    for k in 0..20 {
        let pair = criterion8_instance(k);
        seen.insert(pair.dim_in());
    }
    assert!(seen.iter().all(|d| [2, 4, 6].contains(d)), "dims {seen:?}");
}
