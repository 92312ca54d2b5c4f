//! Seeded Monte Carlo experiments over the coefficient selectors: mean rates,
//! flop counts and candidate counts per SNR point, written as CSV.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use cfsel::random::{trial_channel, trial_rng};
use cfsel::rate::db_to_linear;
use cfsel::selectors::{
    clll_select, complex_exhaustive_two, exhaustive_one, linear_search, ll_select,
};
use cfsel::{Channel, RingId, SelectionResult, ThresholdTable};
use rayon::prelude::*;
use serde::Serialize;

pub use cfsel::random::gen_channel;

pub const CSV_HEADER: &str = "snr_db,algorithm,mean_rate,rate_std,mean_flops,mean_candidates,trials";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("trial {trial} at {snr_db} dB ({algorithm}): {source}")]
    Trial { trial: u64, snr_db: f64, algorithm: Algorithm, source: cfsel::Error },
    #[error(transparent)]
    Core(#[from] cfsel::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            BenchError::Trial { source: cfsel::Error::Budget { .. }, .. } | BenchError::Core(cfsel::Error::Budget { .. })
        )
    }

    /// 3 for budget errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_budget() {
            3
        } else {
            2
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Ex1,
    Ex2,
    Ll,
    Clll,
    Linear,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Ex1, Algorithm::Ex2, Algorithm::Ll, Algorithm::Clll, Algorithm::Linear];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ex1 => "ex1",
            Algorithm::Ex2 => "ex2",
            Algorithm::Ll => "ll",
            Algorithm::Clll => "clll",
            Algorithm::Linear => "linear",
        }
    }

    /// Runs the selector; `table` is required for `Linear`.
    pub fn select(self, ch: &Channel, ring: RingId, table: Option<&ThresholdTable>) -> cfsel::Result<SelectionResult> {
        match self {
            Algorithm::Ex1 => exhaustive_one(ch, ring),
            Algorithm::Ex2 => complex_exhaustive_two(ch, ring),
            Algorithm::Ll => ll_select(ch, ring),
            Algorithm::Clll => clll_select(ch, ring),
            Algorithm::Linear => {
                let table = table.ok_or_else(|| cfsel::Error::InvalidArgument("linear search needs a threshold table".into()))?;
                linear_search(ch, ring, table)
            }
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm '{s}' (expected ex1, ex2, ll, clll or linear)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ring: RingId,
    pub users: usize,
    pub snr_points_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Threshold table for `linear`; the published table is used when absent.
    pub table_path: Option<PathBuf>,
    pub count_flops: bool,
}

impl ExperimentConfig {
    pub fn new(ring: RingId, users: usize, snr_points_db: Vec<f64>, trials: usize, seed: u64, algorithms: Vec<Algorithm>) -> Self {
        Self { ring, users, snr_points_db, trials, seed, algorithms, table_path: None, count_flops: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(BenchError::Config("users must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.snr_points_db.is_empty() || self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return Err(BenchError::Config("SNR points must be a nonempty list of finite values".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms selected".into()));
        }
        Ok(())
    }

    /// The table for `linear`, loaded from `table_path` or the published one.
    pub fn load_table(&self) -> Result<ThresholdTable> {
        let table = match &self.table_path {
            Some(p) => ThresholdTable::parse(&std::fs::read_to_string(p)?)?,
            None => ThresholdTable::published(self.ring),
        };
        if table.ring != self.ring {
            return Err(BenchError::Config(format!("table ring {} does not match --ring {}", table.ring, self.ring)));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub algorithm: String,
    pub mean_rate: f64,
    pub rate_std: f64,
    pub mean_flops: f64,
    pub mean_candidates: f64,
    pub trials: usize,
}

/// One selector outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub rate: f64,
    pub flops: u64,
    pub candidates: u64,
}

/// Per-trial outcomes at one SNR point, `samples[trial][k]` for `algorithms[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRun {
    pub snr_db: f64,
    pub algorithms: Vec<Algorithm>,
    pub samples: Vec<Vec<Sample>>,
}

impl PairedRun {
    pub fn column(&self, alg: Algorithm) -> Option<Vec<Sample>> {
        let k = self.algorithms.iter().position(|&a| a == alg)?;
        Some(self.samples.iter().map(|s| s[k]).collect())
    }
}

/// Runs every algorithm on the same channel for each trial index.
pub fn run_paired(cfg: &ExperimentConfig, snr_db: f64, table: Option<&ThresholdTable>) -> Result<PairedRun> {
    let snr = db_to_linear(snr_db);
    let samples = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let ch = trial_channel(cfg.seed, t, cfg.users, snr)?;
            cfg.algorithms
                .iter()
                .map(|&alg| {
                    let r = alg
                        .select(&ch, cfg.ring, table)
                        .map_err(|source| BenchError::Trial { trial: t, snr_db, algorithm: alg, source })?;
                    Ok(Sample { rate: r.rate, flops: r.flops.total_flops(), candidates: r.candidates_examined })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairedRun { snr_db, algorithms: cfg.algorithms.clone(), samples })
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        n if n <= 8 => x.iter().sum(),
        n => {
            let (a, b) = x.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = pairwise_sum(x) / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0)).sqrt())
}

fn summarize(run: &PairedRun, count_flops: bool) -> Vec<ResultRow> {
    run.algorithms
        .iter()
        .map(|&alg| {
            let col = run.column(alg).expect("algorithm present");
            let rates: Vec<f64> = col.iter().map(|s| s.rate).collect();
            let flops: Vec<f64> = col.iter().map(|s| s.flops as f64).collect();
            let cands: Vec<f64> = col.iter().map(|s| s.candidates as f64).collect();
            let (mean_rate, rate_std) = mean_std(&rates);
            ResultRow {
                snr_db: run.snr_db,
                algorithm: alg.name().to_string(),
                mean_rate,
                rate_std,
                mean_flops: if count_flops { mean_std(&flops).0 } else { 0.0 },
                mean_candidates: mean_std(&cands).0,
                trials: col.len(),
            }
        })
        .collect()
}

fn run_rows(cfg: &ExperimentConfig, count_flops: bool) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let table = if cfg.algorithms.contains(&Algorithm::Linear) { Some(cfg.load_table()?) } else { None };
    let mut rows = Vec::new();
    for &snr_db in &cfg.snr_points_db {
        rows.extend(summarize(&run_paired(cfg, snr_db, table.as_ref())?, count_flops));
    }
    Ok(rows)
}

/// Mean and standard deviation of the rate per (SNR, algorithm); flops are
/// reported only when `cfg.count_flops` is set.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_rows(cfg, cfg.count_flops)
}

/// Mean flop and candidate counts per (SNR, algorithm).
pub fn run_complexity_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if !cfg.count_flops {
        return Err(BenchError::Config("complexity experiment requires count_flops".into()));
    }
    run_rows(cfg, true)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    if rows.is_empty() {
        writeln!(buf, "{CSV_HEADER}")?;
    } else {
        write_csv(rows, &mut buf)?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `4 ln L / (1 − 1/L)`
pub fn max_gain_bound(users: usize) -> f64 {
    let l = users as f64;
    4.0 * l.ln() / (1.0 - 1.0 / l)
}

/// Monte Carlo mean of `max_l |h_l|²` over `draws` channels.
pub fn mean_max_gain_sq(users: usize, draws: usize, seed: u64) -> f64 {
    let v: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|t| cfsel::random::gen_gains(users, &mut trial_rng(seed, t)).iter().map(|h| h.norm_sqr()).fold(0.0, f64::max))
        .collect();
    pairwise_sum(&v) / draws as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub snr_db: Vec<f64>,
    pub ex2_candidates: Vec<f64>,
    pub ex2_snr_slope: f64,
    pub linear_candidates: Option<Vec<f64>>,
    pub linear_snr_slope: Option<f64>,
    /// `SNR·E[|h_max|²] / (γ²·𝒜₀)` at the highest SNR point, with `γ` from the table.
    pub linear_predicted_top: Option<f64>,
    pub l_values: Vec<usize>,
    pub ex2_flops_by_l: Vec<f64>,
    pub ex2_l_exponent: Option<f64>,
    /// `(L, Monte Carlo E[|h_max|²], bound)`
    pub max_gain: Vec<(usize, f64, f64)>,
}

impl ScalingReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("quantity,key,value\n");
        for (i, snr) in self.snr_db.iter().enumerate() {
            s += &format!("ex2_candidates,{snr},{}\n", self.ex2_candidates[i]);
            if let Some(lc) = &self.linear_candidates {
                s += &format!("linear_candidates,{snr},{}\n", lc[i]);
            }
        }
        s += &format!("ex2_snr_slope,,{}\n", self.ex2_snr_slope);
        if let Some(v) = self.linear_snr_slope {
            s += &format!("linear_snr_slope,,{v}\n");
        }
        if let Some(v) = self.linear_predicted_top {
            s += &format!("linear_predicted_top,,{v}\n");
        }
        for (l, f) in self.l_values.iter().zip(&self.ex2_flops_by_l) {
            s += &format!("ex2_flops_by_l,{l},{f}\n");
        }
        if let Some(v) = self.ex2_l_exponent {
            s += &format!("ex2_l_exponent,,{v}\n");
        }
        for (l, mc, bound) in &self.max_gain {
            s += &format!("max_gain_mc,{l},{mc}\nmax_gain_bound,{l},{bound}\n");
        }
        s
    }
}

/// Log-log regressions of candidate counts against SNR (at `cfg.users`) and of
/// ex2 flops against `L` (at the highest SNR point), plus the `|h_max|²`
/// bound at each `L` with `gain_draws` draws.
pub fn scaling_check(cfg: &ExperimentConfig, l_values: &[usize], gain_draws: usize) -> Result<ScalingReport> {
    cfg.validate()?;
    let (lo, hi) = cfg
        .snr_points_db
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    if cfg.snr_points_db.len() < 2 || hi - lo < 20.0 - 1e-9 {
        return Err(BenchError::Config("scaling check needs an SNR grid spanning at least two decades".into()));
    }
    let with_linear = cfg.algorithms.contains(&Algorithm::Linear);
    let mut algs = vec![Algorithm::Ex2];
    if with_linear {
        algs.push(Algorithm::Linear);
    }
    let sub = ExperimentConfig { algorithms: algs, ..cfg.clone() };
    let table = if with_linear { Some(cfg.load_table()?) } else { None };

    let snr_lin: Vec<f64> = cfg.snr_points_db.iter().map(|&d| db_to_linear(d)).collect();
    let mut ex2 = Vec::new();
    let mut lin = Vec::new();
    for &snr_db in &cfg.snr_points_db {
        let run = run_paired(&sub, snr_db, table.as_ref())?;
        let mean_c = |a| {
            let c: Vec<f64> = run.column(a).unwrap().iter().map(|s| s.candidates as f64).collect();
            mean_std(&c).0
        };
        ex2.push(mean_c(Algorithm::Ex2));
        if with_linear {
            lin.push(mean_c(Algorithm::Linear));
        }
    }
    let ex2_snr_slope = loglog_slope(&snr_lin, &ex2).ok_or_else(|| BenchError::Config("degenerate candidate counts".into()))?;
    let linear_snr_slope = if with_linear { loglog_slope(&snr_lin, &lin) } else { None };

    let linear_predicted_top = match &table {
        Some(t) => match t.lookup(cfg.users, hi)?.value() {
            Some(g) => {
                let hmax = mean_max_gain_sq(cfg.users, gain_draws.max(1), cfg.seed);
                Some(db_to_linear(hi) * hmax / (g * g * cfg.ring.fundamental_area()))
            }
            None => None,
        },
        None => None,
    };

    let mut flops_by_l = Vec::new();
    for &l in l_values {
        let c = ExperimentConfig { users: l, algorithms: vec![Algorithm::Ex2], ..cfg.clone() };
        let run = run_paired(&c, hi, None)?;
        let f: Vec<f64> = run.column(Algorithm::Ex2).unwrap().iter().map(|s| s.flops as f64).collect();
        flops_by_l.push(mean_std(&f).0);
    }
    let lf: Vec<f64> = l_values.iter().map(|&l| l as f64).collect();
    let ex2_l_exponent = loglog_slope(&lf, &flops_by_l);

    let max_gain = l_values
        .iter()
        .map(|&l| (l, mean_max_gain_sq(l, gain_draws.max(1), cfg.seed), max_gain_bound(l)))
        .collect();

    Ok(ScalingReport {
        snr_db: cfg.snr_points_db.clone(),
        ex2_candidates: ex2,
        ex2_snr_slope,
        linear_candidates: with_linear.then_some(lin),
        linear_snr_slope,
        linear_predicted_top,
        l_values: l_values.to_vec(),
        ex2_flops_by_l: flops_by_l,
        ex2_l_exponent,
        max_gain,
    })
}

/// Parses `"re,im;re,im;..."`.
pub fn parse_gains(s: &str) -> Result<Vec<cfsel::ComplexScalar>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let mut it = p.split(',').map(|x| x.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(re)), Some(Ok(im)), None) => Ok(cfsel::ComplexScalar::new(re, im)),
                _ => Err(BenchError::Config(format!("bad channel entry '{p}', expected 're,im'"))),
            }
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|v| if v.is_empty() { Err(BenchError::Config("empty channel".into())) } else { Ok(v) })
}

/// Parses a comma-separated list, e.g. `"5,10,15"`; `a:b:step` ranges are accepted.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || BenchError::Config(format!("cannot parse '{part}'"));
        if part.contains(':') {
            let f: Vec<f64> = part.split(':').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
            let [a, b, step] = f[..] else { return Err(bad()) };
            if !(step > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            for k in 0..=n {
                let v = a + step * k as f64;
                out.push(format_num(v).parse::<T>().map_err(|_| bad())?);
            }
        } else {
            out.push(part.parse::<T>().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(BenchError::Config("empty list".into()));
    }
    Ok(out)
}

fn format_num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
