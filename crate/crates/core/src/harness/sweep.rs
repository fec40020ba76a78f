//! SNR sweeps over policies and seeds, paired comparisons, and the delimited
//! table format they are exported in.

use crate::calibrate::calibrate_gamma;
use crate::config::{SolverOptions, SystemConfig};
use crate::par;

use super::metrics::Metrics;
use super::policy::PolicyKind;
use super::replication::{run_replication, RunParams};

/// What to sweep: the Cartesian product of policies, SNR points, and seeds.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: SystemConfig,
    pub opts: SolverOptions,
    pub policies: Vec<PolicyKind>,
    pub snr_list_db: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// One sweep cell; errors are carried per cell so one bad point cannot abort
/// the rest of the sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub policy: PolicyKind,
    pub snr_db: f64,
    pub seed: u64,
    pub gamma: f64,
    pub result: Result<Metrics, String>,
}

/// Runs the sweep. Each (policy, SNR) point is calibrated once; its seeds
/// share the calibrated policy. `jobs <= 1` runs sequentially.
pub fn sweep(spec: &ExperimentSpec, jobs: usize) -> Vec<SweepCell> {
    let points: Vec<(PolicyKind, f64)> = spec
        .policies
        .iter()
        .flat_map(|&p| spec.snr_list_db.iter().map(move |&s| (p, s)))
        .collect();
    let preps = par::map_indices_bounded(points.len(), jobs, |i| {
        let (kind, snr_db) = points[i];
        let mut cfg = spec.config.clone();
        cfg.p_0 = cfg.p0_for_snr_db(snr_db);
        match calibrate_gamma(kind, &cfg, &spec.opts) {
            Ok(cal) => {
                cfg.gamma = cal.gamma;
                Ok((cfg, cal))
            }
            Err(e) => Err(e.to_string()),
        }
    });

    let params = RunParams {
        warmup_slots: spec.opts.warmup_slots,
        measure_slots: spec.opts.measure_slots,
    };
    let n_seeds = spec.seeds.len();
    let cells = par::map_indices_bounded(points.len() * n_seeds, jobs, |idx| {
        let point = idx / n_seeds;
        let seed = spec.seeds[idx % n_seeds];
        let (kind, snr_db) = points[point];
        match &preps[point] {
            Ok((cfg, cal)) => SweepCell {
                policy: kind,
                snr_db,
                seed,
                gamma: cal.gamma,
                result: Ok(run_replication(&cal.policy, cfg, &params, seed)),
            },
            Err(e) => SweepCell {
                policy: kind,
                snr_db,
                seed,
                gamma: f64::NAN,
                result: Err(e.clone()),
            },
        }
    });
    cells
}

fn per_user_cols(prefix: &str, k: usize) -> String {
    (1..=k)
        .map(|u| format!("{prefix}_{u}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Header of the sweep table; per-user columns are expanded 1..=K.
pub fn sweep_table_header(k: usize) -> String {
    format!(
        "policy,snr_db,seed,slots,avg_power,{},{},{},{},weighted_delay",
        per_user_cols("drop_rate", k),
        per_user_cols("avg_queue", k),
        per_user_cols("delay_littles", k),
        per_user_cols("delay_sojourn", k)
    )
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders successful cells as the delimited sweep table.
pub fn sweep_table(cells: &[SweepCell], k: usize) -> String {
    let mut out = sweep_table_header(k);
    out.push('\n');
    for cell in cells {
        let m = match &cell.result {
            Ok(m) => m,
            Err(_) => continue,
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            cell.policy,
            cell.snr_db,
            cell.seed,
            m.slots,
            m.avg_power,
            join(&m.drop_rate),
            join(&m.avg_queue),
            join(&m.avg_delay_littles),
            join(&m.avg_delay_sojourn),
            m.weighted_delay
        ));
    }
    out
}

/// One parsed row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: String,
    pub snr_db: f64,
    pub seed: u64,
    pub slots: u64,
    pub avg_power: f64,
    pub drop_rate: Vec<f64>,
    pub avg_queue: Vec<f64>,
    pub delay_littles: Vec<f64>,
    pub delay_sojourn: Vec<f64>,
    pub weighted_delay: f64,
}

/// Parses a sweep table produced by [`sweep_table`]. The user count is
/// inferred from the header.
pub fn parse_sweep_table(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty table")?;
    let cols: Vec<&str> = header.split(',').collect();
    let fixed = 6; // policy, snr_db, seed, slots, avg_power, weighted_delay
    if cols.len() < fixed || (cols.len() - fixed) % 4 != 0 {
        return Err(format!("malformed header: {header}"));
    }
    let k = (cols.len() - fixed) / 4;
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(format!("row {} has {} fields, want {}", ln + 2, f.len(), cols.len()));
        }
        let num = |s: &str| -> Result<f64, String> {
            s.parse::<f64>().map_err(|e| format!("row {}: {e}", ln + 2))
        };
        let vec_at = |start: usize| -> Result<Vec<f64>, String> {
            (start..start + k).map(|i| num(f[i])).collect()
        };
        rows.push(SweepRow {
            policy: f[0].to_string(),
            snr_db: num(f[1])?,
            seed: f[2].parse().map_err(|e| format!("row {}: {e}", ln + 2))?,
            slots: f[3].parse().map_err(|e| format!("row {}: {e}", ln + 2))?,
            avg_power: num(f[4])?,
            drop_rate: vec_at(5)?,
            avg_queue: vec_at(5 + k)?,
            delay_littles: vec_at(5 + 2 * k)?,
            delay_sojourn: vec_at(5 + 3 * k)?,
            weighted_delay: num(f[5 + 4 * k])?,
        });
    }
    Ok(rows)
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `wins + losses` fair coin flips. Ties are excluded by the caller.
pub fn sign_test_p(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    // Exact binomial tail; n is small (seed counts).
    let mut log_c = 0.0f64; // ln C(n, i) running value, i = 0
    let mut tail = 0.0;
    for i in 0..=n {
        if i >= wins {
            tail += log_c.exp();
        }
        if i < n {
            log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
    }
    (tail * 0.5f64.powi(n as i32)).min(1.0)
}

/// Paired weighted-delay comparison of two policies at one SNR point.
#[derive(Debug, Clone)]
pub struct PairedComparison {
    pub policy_a: String,
    pub policy_b: String,
    pub snr_db: f64,
    /// Per-seed `(seed, delay_b - delay_a)`; positive favors `a`.
    pub deltas: Vec<(u64, f64)>,
    pub wins_a: u64,
    pub losses_a: u64,
    pub ties: u64,
    /// One-sided sign-test p-value for "`a` has lower delay".
    pub p_value: f64,
}

/// Pairs two policies seed-by-seed at every SNR both cover.
pub fn paired_weighted_delay(rows: &[SweepRow], a: &str, b: &str) -> Vec<PairedComparison> {
    let mut snrs: Vec<f64> = rows
        .iter()
        .filter(|r| r.policy == a || r.policy == b)
        .map(|r| r.snr_db)
        .collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let mut out = Vec::new();
    for &snr in &snrs {
        let find = |p: &str, seed: u64| {
            rows.iter()
                .find(|r| r.policy == p && r.snr_db == snr && r.seed == seed)
        };
        let mut seeds: Vec<u64> = rows
            .iter()
            .filter(|r| r.policy == a && r.snr_db == snr)
            .map(|r| r.seed)
            .collect();
        seeds.sort_unstable();
        let mut deltas = Vec::new();
        for &seed in &seeds {
            if let (Some(ra), Some(rb)) = (find(a, seed), find(b, seed)) {
                deltas.push((seed, rb.weighted_delay - ra.weighted_delay));
            }
        }
        if deltas.is_empty() {
            continue;
        }
        let wins_a = deltas.iter().filter(|(_, d)| *d > 0.0).count() as u64;
        let losses_a = deltas.iter().filter(|(_, d)| *d < 0.0).count() as u64;
        let ties = deltas.len() as u64 - wins_a - losses_a;
        out.push(PairedComparison {
            policy_a: a.to_string(),
            policy_b: b.to_string(),
            snr_db: snr,
            p_value: sign_test_p(wins_a, losses_a),
            deltas,
            wins_a,
            losses_a,
            ties,
        });
    }
    out
}
