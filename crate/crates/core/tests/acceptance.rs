//! End-to-end acceptance gate: ten numbered criteria, one line each.
//! Runs without the libtest harness so the verdict lines always print.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blindfactor::builder::shor_circuit;
use blindfactor::circuit::{gate_census, random_circuit, Gate};
use blindfactor::counting::{factorial, max_depth, s_prime, C_NUMERATOR};
use blindfactor::decompose::{
    apply_std_gate, decompose_cr, decompose_toffoli, lower_multicontrol, std_census, StdCircuit,
};
use blindfactor::partition::{
    blind_pair_with_budget, equivalent, optimize, optimize_with_budget, post_selection_probability,
    verify_lemma1,
};
use blindfactor::protocol::{Engine, ProtocolConfig, RoundDetail, ServerBehavior, Verdict};
use blindfactor::shor::{factors_from_period, recover_period, validate_period};
use blindfactor::unitary::{apply_gate, circuit_unitary, max_diff_up_to_phase, max_entry_diff};
use blindfactor::{Circuit, StateVector};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn first_register_distribution(circuit: &Circuit) -> blindfactor::Distribution {
    let mut s = StateVector::zero(circuit.n).unwrap();
    s.apply_circuit(circuit, 0).unwrap();
    s.distribution(&(0..circuit.t).collect::<Vec<_>>())
}

/// 1. t=3 first-register distribution: exact peaks and summed success.
fn criterion_1() -> Outcome {
    let circuit = shor_circuit(21, 4, 3, 3).map_err(|e| e.to_string())?;
    let dist = first_register_distribution(&circuit);
    let peak = (8.0 + 5.0 * 2.0f64.sqrt()) / 64.0;
    for y in [0b011usize, 0b101] {
        ensure!(
            (dist.prob(y) - peak).abs() < 1e-10,
            "P({y:03b}) = {} vs {peak}",
            dist.prob(y)
        );
    }
    let success = dist.prob(3) + dist.prob(5);
    ensure!(
        (success - 0.471).abs() <= 0.001,
        "summed success {success} not within 0.471 +- 0.001"
    );
    Ok(format!(
        "P(011) = P(101) = {peak:.5}, period-yielding mass {success:.4}"
    ))
}

/// 2. t=2 distribution exact; no period without the heuristic, y=1 with it.
fn criterion_2() -> Outcome {
    let circuit = shor_circuit(21, 4, 2, 3).map_err(|e| e.to_string())?;
    let dist = first_register_distribution(&circuit);
    for (y, expect) in [0.375, 0.25, 0.125, 0.25].into_iter().enumerate() {
        ensure!(
            (dist.prob(y) - expect).abs() < 1e-10,
            "P({y:02b}) = {} vs {expect}",
            dist.prob(y)
        );
    }
    for y in 0..4u64 {
        ensure!(
            recover_period(y, 2, 4, 21, false).is_none(),
            "y = {y} unexpectedly yields a period without the heuristic"
        );
    }
    ensure!(
        recover_period(1, 2, 4, 21, true) == Some(3),
        "heuristic did not recover r = 3 from y = 1"
    );
    Ok("distribution {0.375, 0.25, 0.125, 0.25}; no bare period, heuristic rescues y=1".into())
}

/// 3. Blind end-to-end success probability, exact and empirical.
fn criterion_3() -> Outcome {
    let engine = Engine::new(ProtocolConfig::new(21, 4, 3, 3)).map_err(|e| e.to_string())?;
    let exact = engine.exact_blind_success_probability(false);
    ensure!(
        (exact - 0.0589).abs() <= 0.002,
        "exact blind success {exact} not within 0.0589 +- 0.002"
    );

    let recoverable: Vec<bool> = (0..8u64)
        .map(|y| {
            recover_period(y, 3, 4, 21, false)
                .and_then(|r| factors_from_period(r, 4, 21).ok().flatten())
                .is_some()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rounds = 1_000_000usize;
    let mut successes = 0usize;
    for _ in 0..rounds {
        if let RoundDetail::Computation { y: Some(y), .. } = engine.computation_round(&mut rng) {
            successes += recoverable[y as usize] as usize;
        }
    }
    let rate = successes as f64 / rounds as f64;
    let sigma = (exact * (1.0 - exact) / rounds as f64).sqrt();
    ensure!(
        (rate - exact).abs() < 5.0 * sigma,
        "empirical {rate} vs exact {exact} beyond 5 sigma ({sigma})"
    );
    Ok(format!(
        "exact {exact:.4}, empirical {rate:.4} over 10^6 rounds (sigma {sigma:.1e})"
    ))
}

/// 4. Ricochet identity residuals and exact post-selection probability.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let t = rng.gen_range(1..3usize);
        let l = rng.gen_range(1..=(3 - t));
        let depth = rng.gen_range(1..=6);
        let circuit = random_circuit(&mut rng, t, l, depth);
        let p = optimize(&circuit).map_err(|e| e.to_string())?;
        // Random circuits gate the second register freely, so the X^x
        // correction only commutes at x = 0.
        let residual = verify_lemma1(&p.c_less, &p.c_greater, 0).map_err(|e| e.to_string())?;
        ensure!(residual < 1e-10, "partition {i}: residual {residual}");
        worst = worst.max(residual);
    }

    for t in [2usize, 3] {
        let circuit = shor_circuit(21, 4, t, 3).map_err(|e| e.to_string())?;
        let partition = optimize_with_budget(&circuit, 20_000).map_err(|e| e.to_string())?;
        for second in 0..1usize << 3 {
            let x = second << t;
            let residual = verify_lemma1(&partition.c_less, &partition.c_greater, x)
                .map_err(|e| e.to_string())?;
            ensure!(residual < 1e-10, "t={t}, x={x}: residual {residual}");
            worst = worst.max(residual);
        }
        let pair = blind_pair_with_budget(&circuit, 20_000).map_err(|e| e.to_string())?;
        let p = post_selection_probability(&pair).map_err(|e| e.to_string())?;
        let expect = 0.5f64.powi(t as i32);
        ensure!(
            (p - expect).abs() < 1e-12,
            "t={t}: post-selection {p} vs 2^-{t}"
        );
    }
    Ok(format!(
        "100 random + 2 default partitions, worst residual {worst:.1e}; post-selection = 2^-t"
    ))
}

/// 5. Reversal realizes the transpose on random circuits.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let t = rng.gen_range(1..=3usize);
        let l = rng.gen_range(1..=4 - t);
        let depth = rng.gen_range(1..=6);
        let circuit = random_circuit(&mut rng, t, l, depth);
        let u = circuit_unitary(&circuit).map_err(|e| e.to_string())?;
        let rev = circuit_unitary(&circuit.reversed()).map_err(|e| e.to_string())?;
        let diff = max_entry_diff(&rev, &u.transpose());
        ensure!(diff < 1e-12, "circuit {i}: |U(rev) - U^T| = {diff}");
        worst = worst.max(diff);
    }
    Ok(format!("200 random circuits, worst deviation {worst:.1e}"))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Count depth-1 components on k labeled qubits by recursing on the
/// highest qubit q: idle, carrying H or X, paired in an oriented CR or
/// CNOT (phase exponent ignored), or inside a C^lNOT support of size
/// j + 1 >= 3 with any support member as target. Empty included.
fn enumerate_components(k: usize) -> u64 {
    if k == 0 {
        return 1;
    }
    let rest = k as u64 - 1;
    let mut total = 3 * enumerate_components(k - 1);
    if k >= 2 {
        total += 4 * rest * enumerate_components(k - 2);
    }
    for j in 2..k as u64 {
        total += binomial(rest, j) * (j + 1) * enumerate_components(k - 1 - j as usize);
    }
    total
}

/// 6. Component-count recurrence against the bound and brute enumeration.
fn criterion_6() -> Outcome {
    ensure!(
        s_prime(8) == 1_133_233u32.into(),
        "s'(8) = {} != 1133233",
        s_prime(8)
    );
    for n in [2usize, 3] {
        let brute = enumerate_components(n);
        ensure!(
            s_prime(n) == brute.into(),
            "s'({n}) = {} vs enumeration {brute}",
            s_prime(n)
        );
    }
    let mut equality_at_8 = false;
    for n in 1..=30usize {
        // s'(n) <= c * n! with c = 1133233/8!; equality holds exactly at
        // n = 8 where c was pinned, so the strict form is tested off 8.
        let lhs = s_prime(n) * factorial(8);
        let rhs = num_bigint::BigUint::from(C_NUMERATOR) * factorial(n);
        ensure!(lhs <= rhs, "s'({n}) exceeds c * {n}!");
        if lhs == rhs {
            ensure!(n == 8, "unexpected equality with c * n! at n = {n}");
            equality_at_8 = true;
        }
    }
    ensure!(equality_at_8, "missing defining equality at n = 8");
    for n in 8..30usize {
        // s'(n)/n! strictly decreasing.
        ensure!(
            s_prime(n + 1) * factorial(n) < s_prime(n) * factorial(n + 1),
            "s'(n)/n! not decreasing at n = {n}"
        );
    }
    Ok(
        "s'(8) = 1133233; s'(2) = 13, s'(3) = 66 match enumeration; bound tight only at n = 8"
            .into(),
    )
}

fn std_unitary(circuit: &StdCircuit) -> DMatrix<Complex64> {
    let dim = 1usize << circuit.n;
    let mut u = DMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::default(); dim];
    for j in 0..dim {
        col.fill(Complex64::default());
        col[j] = Complex64::new(1.0, 0.0);
        for gate in &circuit.gates {
            apply_std_gate(&mut col, gate);
        }
        for i in 0..dim {
            u[(i, j)] = col[i];
        }
    }
    u
}

fn gate_unitary(n: usize, gate: &Gate) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::default(); dim];
    for j in 0..dim {
        col.fill(Complex64::default());
        col[j] = Complex64::new(1.0, 0.0);
        apply_gate(&mut col, gate, 0);
        for i in 0..dim {
            u[(i, j)] = col[i];
        }
    }
    u
}

/// 7. Standard-set decompositions: tallies, ancilla restoration, unitaries.
fn criterion_7() -> Outcome {
    let toffoli = StdCircuit {
        n: 3,
        gates: decompose_toffoli(0, 1, 2),
    };
    let counts = std_census(&toffoli);
    ensure!(
        counts.get("T") == Some(&7)
            && counts.get("H") == Some(&2)
            && counts.get("R^1") == Some(&1)
            && counts.get("CNOT") == Some(&6)
            && counts.len() == 4,
        "C^2NOT tally {counts:?}"
    );
    let diff = max_diff_up_to_phase(&std_unitary(&toffoli), &gate_unitary(3, &Gate::toffoli(0, 1, 2)));
    ensure!(diff < 1e-12, "C^2NOT unitary deviation {diff}");

    for k in [0usize, 1, 2] {
        let circuit = StdCircuit {
            n: 2,
            gates: decompose_cr(k, 0, 1),
        };
        let expect = gate_unitary(
            2,
            &Gate::CR {
                k,
                control: 0,
                target: 1,
            },
        );
        let diff = max_diff_up_to_phase(&std_unitary(&circuit), &expect);
        ensure!(diff < 1e-12, "CR^{k} deviation {diff}");
    }

    for l in [3usize, 4] {
        let controls: Vec<usize> = (0..l).collect();
        let target = l;
        let ancillas: Vec<usize> = (l + 1..2 * l - 1).collect();
        let lowered =
            lower_multicontrol(&controls, target, &ancillas).map_err(|e| e.to_string())?;
        ensure!(
            lowered.len() == 2 * l - 3,
            "C^{l}NOT lowered to {} Toffolis, expected {}",
            lowered.len(),
            2 * l - 3
        );
        let qubits = 2 * l - 1;
        let dim = 1usize << qubits;
        let ancilla_mask: usize = ancillas.iter().map(|&a| 1usize << a).sum();
        let control_mask: usize = controls.iter().map(|&c| 1usize << c).sum();
        for j in (0..dim).filter(|j| j & ancilla_mask == 0) {
            let mut amps = vec![Complex64::default(); dim];
            amps[j] = Complex64::new(1.0, 0.0);
            for gate in &lowered {
                apply_gate(&mut amps, gate, 0);
            }
            let expect = if j & control_mask == control_mask {
                j ^ (1 << target)
            } else {
                j
            };
            ensure!(
                (amps[expect] - Complex64::new(1.0, 0.0)).norm() < 1e-12,
                "C^{l}NOT acts wrongly (or dirties an ancilla) on |{j:b}>"
            );
        }
    }
    Ok("C^2NOT tally {T:7, H:2, R^1:1, CNOT:6}; CR^k exact; C^3/C^4NOT use 2l-3 Toffolis".into())
}

/// 8. Partitioner splits cleanly; depths compared against the references.
fn criterion_8() -> Outcome {
    let t2 = shor_circuit(21, 4, 2, 3).map_err(|e| e.to_string())?;
    let partition = optimize(&t2).map_err(|e| e.to_string())?;
    let total = gate_census(&t2).non_clifford;
    ensure!(
        gate_census(&partition.c_less).non_clifford == 0,
        "first stage carries non-Clifford gates"
    );
    ensure!(
        gate_census(&partition.c_greater).non_clifford == total,
        "second stage lost non-Clifford gates"
    );
    let recomposed = Circuit::new(
        t2.t,
        t2.l,
        partition
            .c_less
            .components
            .iter()
            .chain(&partition.c_greater.components)
            .cloned()
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        equivalent(&t2, &recomposed).map_err(|e| e.to_string())?,
        "recomposed circuit differs from the input"
    );

    let mut notes = Vec::new();
    for (t, reference) in [(2usize, (8usize, 5usize)), (3, (17, 13))] {
        let circuit = shor_circuit(21, 4, t, 3).map_err(|e| e.to_string())?;
        let p = optimize_with_budget(&circuit, 20_000).map_err(|e| e.to_string())?;
        let achieved = (circuit.depth(), p.d_star);
        let flag = if achieved == reference {
            "matches"
        } else {
            "deviates from"
        };
        notes.push(format!(
            "t={t}: (d, d*_>) = {achieved:?} {flag} reference {reference:?}"
        ));
    }
    Ok(format!(
        "clean Clifford/non-Clifford split, recomposition equivalent; {}",
        notes.join("; ")
    ))
}

/// 9. Protocol statistics: CHSH rates, detection, honest soundness.
fn criterion_9() -> Outcome {
    let honest = Engine::new(ProtocolConfig::new(21, 4, 2, 3)).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rounds = 100_000usize;
    let mut wins = 0usize;
    for _ in 0..rounds {
        if let RoundDetail::Chsh { win, .. } = honest.chsh_round(&mut rng) {
            wins += win as usize;
        }
    }
    let rate = wins as f64 / rounds as f64;
    let tsirelson = (std::f64::consts::FRAC_PI_8).cos().powi(2);
    let sigma = (tsirelson * (1.0 - tsirelson) / rounds as f64).sqrt();
    ensure!(
        (rate - tsirelson).abs() < 3.0 * sigma,
        "honest CHSH rate {rate} vs {tsirelson}"
    );

    let mut config = ProtocolConfig::new(21, 4, 2, 3);
    config.behavior_a = ServerBehavior::ChshClassical;
    config.behavior_b = ServerBehavior::ChshClassical;
    let classical = Engine::with_pair(config.clone(), honest.pair.clone())
        .map_err(|e| e.to_string())?;
    let mut flagged_runs = 0usize;
    let mut classical_rate_sum = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wins = 0usize;
        let mut window = 0usize;
        let mut window_wins = 0usize;
        let mut flagged = false;
        for _ in 0..10_000usize {
            if let RoundDetail::Chsh { win, .. } = classical.chsh_round(&mut rng) {
                wins += win as usize;
                window += 1;
                window_wins += win as usize;
                if window == config.chsh_batch {
                    if (window_wins as f64) < config.chsh_threshold * window as f64 {
                        flagged = true;
                    }
                    window = 0;
                    window_wins = 0;
                }
            }
        }
        flagged_runs += flagged as usize;
        classical_rate_sum += wins as f64 / 10_000.0;
    }
    let classical_rate = classical_rate_sum / 100.0;
    let sigma_c = (0.75 * 0.25 / 10_000.0f64).sqrt();
    ensure!(
        classical_rate <= 0.75 + 3.0 * sigma_c,
        "classical CHSH rate {classical_rate} above 0.75 + 3 sigma"
    );
    ensure!(
        flagged_runs > 99,
        "classical adversary flagged in only {flagged_runs}/100 runs"
    );

    let t3 = Engine::new(ProtocolConfig::new(21, 4, 3, 3)).map_err(|e| e.to_string())?;
    let mut factors = 0usize;
    let mut dishonest = 0usize;
    for seed in 0..100u64 {
        match t3.run(seed).verdict {
            Verdict::Factors { p: 3, q: 7, .. } => factors += 1,
            Verdict::Dishonest { .. } => dishonest += 1,
            other => return Err(format!("seed {seed}: unexpected verdict {other:?}")),
        }
    }
    ensure!(
        dishonest < 1,
        "honest runs flagged dishonest {dishonest}/100 times"
    );
    ensure!(factors == 100 - dishonest, "honest runs failed to factor");
    Ok(format!(
        "honest CHSH {rate:.4} (Tsirelson {tsirelson:.4}), classical {classical_rate:.4} flagged {flagged_runs}/100; honest protocol factored 21 in {factors}/100 seeds"
    ))
}

/// 10. Classical pipeline spot values.
fn criterion_10() -> Outcome {
    ensure!(validate_period(3, 4, 21), "validate_period(3, 4, 21) failed");
    let factors = factors_from_period(3, 4, 21)
        .map_err(|e| e.to_string())?
        .ok_or("factors_from_period(3, 4, 21) degenerate")?;
    ensure!(factors == (3, 7), "factors {factors:?} != (3, 7)");
    ensure!(
        max_depth(21, 4) == 3072,
        "maxDep(21, 4) = {} != 3072",
        max_depth(21, 4)
    );
    Ok("validate_period(3,4,21), factors (3,7), maxDep(21,4) = 3072".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("t=3 distribution", criterion_1),
        ("t=2 negative claim", criterion_2),
        ("blind success rate", criterion_3),
        ("ricochet identity", criterion_4),
        ("reversal = transpose", criterion_5),
        ("component counting", criterion_6),
        ("standard decompositions", criterion_7),
        ("partitioner", criterion_8),
        ("protocol statistics", criterion_9),
        ("classical pipeline", criterion_10),
    ];
    let mut failures = 0usize;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let result = run();
        let elapsed = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:2} PASS [{elapsed:7.2}s] {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:2} FAIL [{elapsed:7.2}s] {name}: {detail}", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} of 10 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
