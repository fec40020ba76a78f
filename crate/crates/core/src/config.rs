//! System configuration and the `[system]` / `[traffic]` / `[solver]` config file format.

use std::path::Path;

use serde::Deserialize;

use crate::error::ConfigError;

/// Static parameters of the K-user OFDMA downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of users (and downlink queues).
    pub k: usize,
    /// Number of independent subbands.
    pub n_f: usize,
    /// Buffer size per queue, in packets.
    pub n_q: usize,
    /// Slot duration in seconds.
    pub tau: f64,
    /// Mean packet arrival rate per user, packets/second.
    pub lambda: Vec<f64>,
    /// Mean packet size per user, bits.
    pub mean_packet_bits: Vec<f64>,
    /// Delay weight per user.
    pub beta: Vec<f64>,
    /// Average total transmit power budget.
    pub p_0: f64,
    /// Lagrange multiplier pricing transmit power in the per-stage reward.
    pub gamma: f64,
    /// Bandwidth of one subband, Hz.
    pub subband_bandwidth: f64,
    /// Master seed for all random streams.
    pub rng_seed: u64,
    /// Quantization alphabet size used by the offline solvers.
    pub csi_levels: usize,
}

impl SystemConfig {
    /// Checks the hard invariants; returns soft warnings on success.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        if self.k == 0 {
            return err("K must be >= 1".into());
        }
        if self.n_f == 0 {
            return err("N_F must be >= 1".into());
        }
        if self.n_q == 0 {
            return err("N_Q must be >= 1".into());
        }
        if !(self.tau > 0.0) {
            return err("tau must be > 0".into());
        }
        if !(self.p_0 > 0.0) {
            return err("P_0 must be > 0".into());
        }
        if !(self.gamma > 0.0) {
            return err("gamma must be > 0".into());
        }
        if !(self.subband_bandwidth > 0.0) {
            return err("subband_bandwidth must be > 0".into());
        }
        if self.csi_levels < 1 {
            return err("csi_levels must be >= 1".into());
        }
        for (name, v) in [
            ("lambda", &self.lambda),
            ("mean_packet_bits", &self.mean_packet_bits),
            ("beta", &self.beta),
        ] {
            if v.len() != self.k {
                return err(format!("{name} must have exactly K = {} entries", self.k));
            }
            if !v.iter().all(|x| *x > 0.0 && x.is_finite()) {
                return err(format!("all {name} entries must be finite and > 0"));
            }
        }
        let mut warnings = Vec::new();
        for (k, l) in self.lambda.iter().enumerate() {
            let lt = l * self.tau;
            if lt > 0.2 {
                warnings.push(format!(
                    "lambda[{k}]*tau = {lt:.3} > 0.2: the small-slot approximation is strained"
                ));
            }
        }
        Ok(warnings)
    }

    /// Joint queue state count `(N_Q + 1)^K`, saturating on overflow.
    pub fn joint_states(&self) -> usize {
        let base = self.n_q + 1;
        let mut n: usize = 1;
        for _ in 0..self.k {
            n = n.saturating_mul(base);
        }
        n
    }

    /// Power budget for a given transmit SNR in dB (noise power normalized to 1,
    /// SNR = P_0 / (N_F * noise)).
    pub fn p0_for_snr_db(&self, snr_db: f64) -> f64 {
        self.n_f as f64 * 10f64.powf(snr_db / 10.0)
    }

    /// SNR in dB corresponding to this config's power budget.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.p_0 / self.n_f as f64).log10()
    }
}

/// Tunables for the solvers, learners, and experiment harness.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stepsize scale `a` in eps_k = a / (b + k)^exponent.
    pub stepsize_a: f64,
    /// Stepsize offset `b`.
    pub stepsize_b: f64,
    /// Stepsize decay exponent, in (0.5, 1].
    pub stepsize_exponent: f64,
    /// Stop threshold on the max-norm table change per regenerative period.
    pub delta_v: f64,
    /// Maximum number of regenerative periods before giving up.
    pub max_periods: usize,
    /// Maximum slots a single regenerative period may span.
    pub max_period_slots: u64,
    /// Span tolerance for relative value iteration.
    pub rvi_epsilon: f64,
    /// Iteration cap for relative value iteration.
    pub rvi_max_iters: usize,
    /// Cap on the joint state space size accepted by the joint solvers.
    pub state_space_cap: usize,
    /// Slots discarded before measurement starts.
    pub warmup_slots: u64,
    /// Slots measured after warmup.
    pub measure_slots: u64,
    /// Relative tolerance on |avg_power - P_0| / P_0 for gamma calibration.
    pub calib_tolerance: f64,
    /// Bisection iteration cap for gamma calibration.
    pub calib_max_iters: usize,
    /// Warmup slots per calibration probe run.
    pub calib_warmup_slots: u64,
    /// Measured slots per calibration probe run.
    pub calib_measure_slots: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            stepsize_a: 1.0,
            stepsize_b: 1.0,
            stepsize_exponent: 0.85,
            delta_v: 1e-3,
            max_periods: 100_000,
            max_period_slots: 1_000_000,
            rvi_epsilon: 1e-8,
            rvi_max_iters: 200_000,
            state_space_cap: 4096,
            warmup_slots: 100_000,
            measure_slots: 1_000_000,
            calib_tolerance: 0.02,
            calib_max_iters: 30,
            calib_warmup_slots: 20_000,
            calib_measure_slots: 200_000,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        if !(self.stepsize_a > 0.0) {
            return err("stepsize_a must be > 0".into());
        }
        if !(self.stepsize_b >= 1.0) {
            return err("stepsize_b must be >= 1".into());
        }
        if !(self.stepsize_exponent > 0.5 && self.stepsize_exponent <= 1.0) {
            return err("stepsize_exponent must lie in (0.5, 1]".into());
        }
        if !(self.delta_v > 0.0) {
            return err("delta_v must be > 0".into());
        }
        if !(self.rvi_epsilon > 0.0) {
            return err("rvi_epsilon must be > 0".into());
        }
        if !(self.calib_tolerance > 0.0) {
            return err("calib_tolerance must be > 0".into());
        }
        let mut warnings = Vec::new();
        if self.measure_slots < 10 * self.warmup_slots {
            warnings.push(format!(
                "measure_slots = {} is below 10x warmup_slots = {}; measurements may carry transient bias",
                self.measure_slots, self.warmup_slots
            ));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N_F")]
    n_f: usize,
    #[serde(rename = "N_Q")]
    n_q: usize,
    tau: f64,
    #[serde(rename = "P_0")]
    p_0: f64,
    subband_bandwidth: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrafficSection {
    lambda: Vec<f64>,
    mean_packet_bits: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    gamma: f64,
    rng_seed: u64,
    csi_levels: usize,
    stepsize_a: Option<f64>,
    stepsize_b: Option<f64>,
    stepsize_exponent: Option<f64>,
    delta_v: Option<f64>,
    max_periods: Option<usize>,
    max_period_slots: Option<u64>,
    rvi_epsilon: Option<f64>,
    rvi_max_iters: Option<usize>,
    state_space_cap: Option<usize>,
    warmup_slots: Option<u64>,
    measure_slots: Option<u64>,
    calib_tolerance: Option<f64>,
    calib_max_iters: Option<usize>,
    calib_warmup_slots: Option<u64>,
    calib_measure_slots: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    system: SystemSection,
    traffic: TrafficSection,
    solver: SolverSection,
}

/// Loads and validates a config file. Returns the config, the solver options,
/// and any validation warnings.
pub fn load_config(
    path: impl AsRef<Path>,
) -> Result<(SystemConfig, SolverOptions, Vec<String>), ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

/// Parses config text in the `[system]` / `[traffic]` / `[solver]` format.
pub fn parse_config(text: &str) -> Result<(SystemConfig, SolverOptions, Vec<String>), ConfigError> {
    let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: String::new(),
        message: e.to_string(),
    })?;
    let cfg = SystemConfig {
        k: file.system.k,
        n_f: file.system.n_f,
        n_q: file.system.n_q,
        tau: file.system.tau,
        lambda: file.traffic.lambda,
        mean_packet_bits: file.traffic.mean_packet_bits,
        beta: file.traffic.beta,
        p_0: file.system.p_0,
        gamma: file.solver.gamma,
        subband_bandwidth: file.system.subband_bandwidth,
        rng_seed: file.solver.rng_seed,
        csi_levels: file.solver.csi_levels,
    };
    let d = SolverOptions::default();
    let s = &file.solver;
    let opts = SolverOptions {
        stepsize_a: s.stepsize_a.unwrap_or(d.stepsize_a),
        stepsize_b: s.stepsize_b.unwrap_or(d.stepsize_b),
        stepsize_exponent: s.stepsize_exponent.unwrap_or(d.stepsize_exponent),
        delta_v: s.delta_v.unwrap_or(d.delta_v),
        max_periods: s.max_periods.unwrap_or(d.max_periods),
        max_period_slots: s.max_period_slots.unwrap_or(d.max_period_slots),
        rvi_epsilon: s.rvi_epsilon.unwrap_or(d.rvi_epsilon),
        rvi_max_iters: s.rvi_max_iters.unwrap_or(d.rvi_max_iters),
        state_space_cap: s.state_space_cap.unwrap_or(d.state_space_cap),
        warmup_slots: s.warmup_slots.unwrap_or(d.warmup_slots),
        measure_slots: s.measure_slots.unwrap_or(d.measure_slots),
        calib_tolerance: s.calib_tolerance.unwrap_or(d.calib_tolerance),
        calib_max_iters: s.calib_max_iters.unwrap_or(d.calib_max_iters),
        calib_warmup_slots: s.calib_warmup_slots.unwrap_or(d.calib_warmup_slots),
        calib_measure_slots: s.calib_measure_slots.unwrap_or(d.calib_measure_slots),
    };
    let mut warnings = cfg.validate()?;
    warnings.extend(opts.validate()?);
    Ok((cfg, opts, warnings))
}
