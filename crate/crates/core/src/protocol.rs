//! Multi-round client/two-server verification protocol.
//!
//! Each round the client runs one of four subprotocols: the blind
//! computation itself, a CHSH game, or tomography of either server.
//! Honest answers are drawn from the exact joint outcome distributions of
//! the shared-EPR simulation (cached once per condition); adversaries are
//! classical post-processors of those answers, which is fully general
//! here because every commanded measurement is in a product basis.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::builder::shor_circuit;
use crate::error::{Error, Result};
use crate::partition::{bipartite_state, blind_pair_with_budget, BlindPair};
use crate::shor::{factors_from_period, recover_period, FactorInstance};
use crate::statevec::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Server {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

/// How a server answers instructions. Everything except `Honest` is a
/// deterministic or stochastic corruption of the honest answer bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServerBehavior {
    Honest,
    /// Fixed deterministic answers (all ones), the classical-strategy
    /// cap of 0.75 when played against itself.
    ChshClassical,
    Depolarizing(f64),
    BitFlip(f64),
}

impl std::str::FromStr for ServerBehavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_p = |spec: &str| -> Result<f64> {
            let p: f64 = spec
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad probability {spec:?}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
            Ok(p)
        };
        match s.split_once(':') {
            None => match s {
                "honest" => Ok(ServerBehavior::Honest),
                "chsh-classical" => Ok(ServerBehavior::ChshClassical),
                other => Err(Error::InvalidArgument(format!(
                    "unknown behavior {other:?} (honest, chsh-classical, depolarizing:p, bit-flip:p)"
                ))),
            },
            Some(("depolarizing", p)) => Ok(ServerBehavior::Depolarizing(parse_p(p)?)),
            Some(("bit-flip", p)) => Ok(ServerBehavior::BitFlip(parse_p(p)?)),
            Some((other, _)) => Err(Error::InvalidArgument(format!(
                "unknown behavior {other:?}"
            ))),
        }
    }
}

impl ServerBehavior {
    /// Post-process this server's honest answer bits.
    fn answer<R: Rng>(&self, honest: u64, width: usize, rng: &mut R) -> u64 {
        match self {
            ServerBehavior::Honest => honest,
            ServerBehavior::ChshClassical => (1u64 << width) - 1,
            ServerBehavior::Depolarizing(p) => {
                let mut bits = honest;
                for i in 0..width {
                    if rng.gen::<f64>() < *p {
                        let fresh = rng.gen::<bool>() as u64;
                        bits = bits & !(1 << i) | fresh << i;
                    }
                }
                bits
            }
            ServerBehavior::BitFlip(p) => {
                let mut bits = honest;
                for i in 0..width {
                    if rng.gen::<f64>() < *p {
                        bits ^= 1 << i;
                    }
                }
                bits
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    #[serde(rename = "N")]
    pub n_value: u64,
    pub a: u64,
    pub t: usize,
    #[serde(rename = "L")]
    pub l: usize,
    /// Probability of a computational round; each security subprotocol
    /// gets (1 - eta) / 3.
    pub eta: f64,
    pub seed: u64,
    pub max_rounds: usize,
    pub behavior_a: ServerBehavior,
    pub behavior_b: ServerBehavior,
    /// Try the offset/multiple scan when convergents fail.
    pub heuristic: bool,
    /// Post-selected computational outcomes without a valid period before
    /// B is declared dishonest.
    pub trial_budget: usize,
    pub chsh_batch: usize,
    pub chsh_threshold: f64,
    /// Answer bias above which a failed CHSH batch is attributed to a
    /// specific server.
    pub chsh_bias_threshold: f64,
    /// Samples per (computing server, basis) condition before the
    /// tomography test runs.
    pub tomography_batch: usize,
    pub tomography_epsilon: f64,
    pub partition_budget: usize,
}

impl ProtocolConfig {
    pub fn new(n_value: u64, a: u64, t: usize, l: usize) -> Self {
        ProtocolConfig {
            n_value,
            a,
            t,
            l,
            eta: 0.25,
            seed: 0,
            max_rounds: 100_000,
            behavior_a: ServerBehavior::Honest,
            behavior_b: ServerBehavior::Honest,
            heuristic: true,
            trial_budget: 4 << t,
            chsh_batch: 1024,
            chsh_threshold: 0.80,
            chsh_bias_threshold: 0.1,
            tomography_batch: 10_000,
            tomography_epsilon: 0.05,
            partition_budget: 20_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eta = {} outside (0, 1)",
                self.eta
            )));
        }
        FactorInstance::new(self.n_value, self.a)?;
        Ok(())
    }
}

/// Inverse-transform sampler over a fixed outcome distribution.
struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        Sampler {
            cdf: probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect(),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

struct TomographyCache {
    sampler: Sampler,
    /// Predicted joint distribution of (measuring bit, computing bit) per
    /// EPR pair, indexed measuring << 1 | computing.
    pair_marginals: Vec<[f64; 4]>,
}

/// Cached exact distributions for every instruction the client can issue.
pub struct Engine {
    pub config: ProtocolConfig,
    pub pair: BlindPair,
    comp_probs: Vec<f64>,
    comp_sampler: Sampler,
    chsh: [[f64; 4]; 4],
    tomography: BTreeMap<(Server, Basis), TomographyCache>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "subprotocol", rename_all = "kebab-case")]
pub enum RoundDetail {
    Computation {
        a_bits: u64,
        b_bits: u64,
        post_selected: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        y: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        period: Option<u64>,
    },
    Chsh {
        s: u8,
        t: u8,
        a: u8,
        b: u8,
        win: bool,
    },
    Tomography {
        computing: Server,
        basis: Basis,
        measuring_bits: u64,
        computing_bits: u64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    #[serde(flatten)]
    pub detail: RoundDetail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Factors { p: u64, q: u64, period: u64 },
    Dishonest { server: Server },
    Exhausted,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TranscriptStats {
    pub computation_rounds: usize,
    pub post_selected: usize,
    pub failed_post_selected: usize,
    pub chsh_rounds: usize,
    pub chsh_wins: usize,
    pub tomography_rounds_a: usize,
    pub tomography_rounds_b: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTranscript {
    pub config: ProtocolConfig,
    pub rounds: Vec<RoundRecord>,
    pub verdict: Verdict,
    pub stats: TranscriptStats,
}

impl ProtocolTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serialization cannot fail")
    }

    pub fn summary_csv(&self) -> String {
        let s = &self.stats;
        let mut out = String::from("subprotocol,rounds,note\n");
        out.push_str(&format!(
            "computation,{},post_selected={}\n",
            s.computation_rounds, s.post_selected
        ));
        out.push_str(&format!("chsh,{},wins={}\n", s.chsh_rounds, s.chsh_wins));
        out.push_str(&format!("tomography_a,{},\n", s.tomography_rounds_a));
        out.push_str(&format!("tomography_b,{},\n", s.tomography_rounds_b));
        out
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Engine {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let circuit = shor_circuit(config.n_value, config.a, config.t, config.l)?;
        let pair = blind_pair_with_budget(&circuit, config.partition_budget)?;
        Engine::with_pair(config, pair)
    }

    pub fn with_pair(config: ProtocolConfig, pair: BlindPair) -> Result<Self> {
        config.validate()?;
        let n = pair.n;
        let comp_probs: Vec<f64> = bipartite_state(&pair)?
            .amps
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        let comp_sampler = Sampler::new(&comp_probs);

        // CHSH joints: A measures at 0 or pi/2, B at +/- pi/4, so every
        // question pair has |correlation| = 1/sqrt(2).
        let e = std::f64::consts::FRAC_1_SQRT_2;
        let mut chsh = [[0.0; 4]; 4];
        for (s, t) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
            let corr = if s == 1 && t == 1 { -e } else { e };
            for (a, b) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
                let sign = if a == b { 1.0 } else { -1.0 };
                chsh[s << 1 | t][a << 1 | b] = (1.0 + sign * corr) / 4.0;
            }
        }

        let mut tomography = BTreeMap::new();
        for computing in [Server::A, Server::B] {
            for basis in [Basis::X, Basis::Z] {
                let mut state = StateVector::epr_pairs(n)?;
                let (circuit, comp_offset, meas_offset) = match computing {
                    Server::A => (&pair.circ_a, 0, n),
                    Server::B => (&pair.circ_b, n, 0),
                };
                state.apply_circuit(circuit, comp_offset)?;
                if basis == Basis::X {
                    for q in meas_offset..meas_offset + n {
                        crate::unitary::apply_gate(
                            &mut state.amps,
                            &crate::circuit::Gate::H { target: q },
                            0,
                        );
                    }
                }
                let probs: Vec<f64> = state.amps.iter().map(|a| a.norm_sqr()).collect();
                let mut pair_marginals = vec![[0.0f64; 4]; n];
                for (i, &p) in probs.iter().enumerate() {
                    for (pair_idx, marginal) in pair_marginals.iter_mut().enumerate() {
                        let m = i >> (meas_offset + pair_idx) & 1;
                        let c = i >> (comp_offset + pair_idx) & 1;
                        marginal[m << 1 | c] += p;
                    }
                }
                tomography.insert(
                    (computing, basis),
                    TomographyCache {
                        sampler: Sampler::new(&probs),
                        pair_marginals,
                    },
                );
            }
        }

        Ok(Engine {
            config,
            pair,
            comp_probs,
            comp_sampler,
            chsh,
            tomography,
        })
    }

    fn n(&self) -> usize {
        self.pair.n
    }

    /// Both servers run their circuits and Z-measure everything; the
    /// record is post-selected on A's first-register zeros.
    pub fn computation_round<R: Rng>(&self, rng: &mut R) -> RoundDetail {
        let n = self.n();
        let joint = self.comp_sampler.sample(rng) as u64;
        let mask = (1u64 << n) - 1;
        let a_bits = self
            .config
            .behavior_a
            .answer(joint & mask, n, rng);
        let b_bits = self
            .config
            .behavior_b
            .answer(joint >> n & mask, n, rng);
        let post_selected = a_bits & ((1 << self.pair.t) - 1) == 0;
        RoundDetail::Computation {
            a_bits,
            b_bits,
            post_selected,
            y: post_selected.then_some(b_bits & ((1 << self.pair.t) - 1)),
            period: None,
        }
    }

    pub fn chsh_round<R: Rng>(&self, rng: &mut R) -> RoundDetail {
        let s = rng.gen_range(0..2u8);
        let t = rng.gen_range(0..2u8);
        let outcome = Sampler::new(&self.chsh[(s << 1 | t) as usize]).sample(rng);
        let a = self
            .config
            .behavior_a
            .answer(outcome as u64 >> 1 & 1, 1, rng) as u8;
        let b = self.config.behavior_b.answer(outcome as u64 & 1, 1, rng) as u8;
        RoundDetail::Chsh {
            s,
            t,
            a,
            b,
            win: a ^ b == s & t,
        }
    }

    pub fn tomography_round<R: Rng>(
        &self,
        computing: Server,
        basis: Basis,
        rng: &mut R,
    ) -> RoundDetail {
        let n = self.n();
        let cache = &self.tomography[&(computing, basis)];
        let joint = cache.sampler.sample(rng) as u64;
        let mask = (1u64 << n) - 1;
        let (a_raw, b_raw) = (joint & mask, joint >> n & mask);
        let a_bits = self.config.behavior_a.answer(a_raw, n, rng);
        let b_bits = self.config.behavior_b.answer(b_raw, n, rng);
        let (computing_bits, measuring_bits) = match computing {
            Server::A => (a_bits, b_bits),
            Server::B => (b_bits, a_bits),
        };
        RoundDetail::Tomography {
            computing,
            basis,
            measuring_bits,
            computing_bits,
        }
    }

    /// Attempt period and factor recovery from a post-selected outcome.
    fn postprocess(&self, y: u64) -> Option<(u64, u64, u64)> {
        let c = &self.config;
        let r = recover_period(y, c.t as u32, c.a, c.n_value, c.heuristic)?;
        let (p, q) = factors_from_period(r, c.a, c.n_value).ok().flatten()?;
        // Classical verification closes the loop: gcd(p, N) = p prime.
        (p * q == c.n_value && is_prime(p) && is_prime(q)).then_some((p, q, r))
    }

    pub fn run(&self, seed: u64) -> ProtocolTranscript {
        let mut config = self.config.clone();
        config.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rounds = Vec::new();
        let mut stats = TranscriptStats::default();

        let mut chsh_window = 0usize;
        let mut chsh_window_wins = 0usize;
        let mut chsh_ones = [0usize; 2];
        let mut tomo_counts: BTreeMap<(Server, Basis), (usize, Vec<[u64; 4]>)> = BTreeMap::new();

        let mut verdict = Verdict::Exhausted;
        'rounds: for round in 1..=config.max_rounds {
            let u: f64 = rng.gen();
            let detail = if u < config.eta {
                let mut detail = self.computation_round(&mut rng);
                if let RoundDetail::Computation {
                    post_selected,
                    y: Some(y),
                    period,
                    ..
                } = &mut detail
                {
                    debug_assert!(*post_selected);
                    stats.post_selected += 1;
                    if let Some((p, q, r)) = self.postprocess(*y) {
                        *period = Some(r);
                        stats.computation_rounds += 1;
                        rounds.push(RoundRecord { round, detail });
                        verdict = Verdict::Factors { p, q, period: r };
                        break 'rounds;
                    }
                    stats.failed_post_selected += 1;
                    if stats.failed_post_selected >= config.trial_budget {
                        stats.computation_rounds += 1;
                        rounds.push(RoundRecord { round, detail });
                        verdict = Verdict::Dishonest { server: Server::B };
                        break 'rounds;
                    }
                }
                stats.computation_rounds += 1;
                detail
            } else if u < config.eta + (1.0 - config.eta) / 3.0 {
                let detail = self.chsh_round(&mut rng);
                if let RoundDetail::Chsh { a, b, win, .. } = &detail {
                    stats.chsh_rounds += 1;
                    chsh_window += 1;
                    chsh_window_wins += *win as usize;
                    stats.chsh_wins += *win as usize;
                    chsh_ones[0] += *a as usize;
                    chsh_ones[1] += *b as usize;
                    if chsh_window == config.chsh_batch {
                        let rate = chsh_window_wins as f64 / chsh_window as f64;
                        if rate < config.chsh_threshold {
                            let bias_a =
                                (chsh_ones[0] as f64 / stats.chsh_rounds as f64 - 0.5).abs();
                            let bias_b =
                                (chsh_ones[1] as f64 / stats.chsh_rounds as f64 - 0.5).abs();
                            let server = if bias_a > config.chsh_bias_threshold
                                && bias_a >= bias_b
                            {
                                Server::A
                            } else {
                                Server::B
                            };
                            rounds.push(RoundRecord { round, detail });
                            verdict = Verdict::Dishonest { server };
                            break 'rounds;
                        }
                        chsh_window = 0;
                        chsh_window_wins = 0;
                    }
                }
                detail
            } else {
                let idx = ((u - config.eta) / ((1.0 - config.eta) / 3.0)) as usize;
                let computing = if idx <= 1 { Server::A } else { Server::B };
                let basis = if rng.gen::<bool>() { Basis::X } else { Basis::Z };
                let detail = self.tomography_round(computing, basis, &mut rng);
                if let RoundDetail::Tomography {
                    measuring_bits,
                    computing_bits,
                    ..
                } = &detail
                {
                    match computing {
                        Server::A => stats.tomography_rounds_a += 1,
                        Server::B => stats.tomography_rounds_b += 1,
                    }
                    let n = self.n();
                    let entry = tomo_counts
                        .entry((computing, basis))
                        .or_insert_with(|| (0, vec![[0u64; 4]; n]));
                    entry.0 += 1;
                    for i in 0..n {
                        let m = (measuring_bits >> i & 1) as usize;
                        let c = (computing_bits >> i & 1) as usize;
                        entry.1[i][m << 1 | c] += 1;
                    }
                    if entry.0 == config.tomography_batch {
                        let cache = &self.tomography[&(computing, basis)];
                        let total = entry.0 as f64;
                        let failed = entry.1.iter().zip(&cache.pair_marginals).any(
                            |(counts, predicted)| {
                                let tv: f64 = counts
                                    .iter()
                                    .zip(predicted)
                                    .map(|(&c, &p)| (c as f64 / total - p).abs())
                                    .sum::<f64>()
                                    / 2.0;
                                tv > config.tomography_epsilon
                            },
                        );
                        if failed {
                            rounds.push(RoundRecord { round, detail });
                            verdict = Verdict::Dishonest { server: computing };
                            break 'rounds;
                        }
                    }
                }
                detail
            };
            rounds.push(RoundRecord { round, detail });
        }

        ProtocolTranscript {
            config,
            rounds,
            verdict,
            stats,
        }
    }

    /// Exact probability that one computational round both post-selects
    /// and yields a recoverable period, from the cached joint distribution.
    pub fn exact_blind_success_probability(&self, heuristic: bool) -> f64 {
        let c = &self.config;
        let t = self.pair.t;
        let recoverable: Vec<bool> = (0..1u64 << t)
            .map(|y| {
                recover_period(y, t as u32, c.a, c.n_value, heuristic)
                    .and_then(|r| factors_from_period(r, c.a, c.n_value).ok().flatten())
                    .is_some()
            })
            .collect();
        let n = self.n();
        let t_mask = (1usize << t) - 1;
        self.comp_probs
            .iter()
            .enumerate()
            .filter(|(i, _)| i & t_mask == 0 && recoverable[(i >> n & t_mask) as u64 as usize])
            .map(|(_, &p)| p)
            .sum()
    }
}

pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolTranscript> {
    let engine = Engine::new(config.clone())?;
    Ok(engine.run(config.seed))
}
