//! Step-size thresholds for the linear search: construction from training
//! channels, lookup, and a line-oriented text format.
//!
//! For a channel, `γ_opt` is the width of the largest axis-aligned square in
//! the region of scaling factors that produce the optimal vector, normalized
//! by `√(A0 / |h_max|²)`. A table stores, per user count and SNR bin, the
//! minimum of `γ_opt` over training channels.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{largest_inscribed_axis_square, region_of_vector, AlphaSector};
use crate::random::trial_channel;
use crate::rate::{db_to_linear, mmse_alpha, Channel, CoeffVector};
use crate::rings::RingId;
use crate::selectors::complex_exhaustive_two;

/// A table entry: a threshold, or the marker telling the linear search to
/// fall back to the exhaustive selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Value(f64),
    Exhaustive,
}

impl Gamma {
    pub fn value(self) -> Option<f64> {
        match self {
            Gamma::Value(g) => Some(g),
            Gamma::Exhaustive => None,
        }
    }

    fn order_key(self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }
}

impl std::fmt::Display for Gamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gamma::Value(g) => write!(f, "{g}"),
            Gamma::Exhaustive => f.write_str("E"),
        }
    }
}

/// SNR bin `[snr_lo_db, snr_hi_db)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    pub gamma: Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSample {
    pub gamma_opt: f64,
    pub channel_id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    pub ring: RingId,
    pub rows: BTreeMap<usize, Vec<Bin>>,
    pub trials: usize,
    pub rng_seed: u64,
}

/// Below this SNR every table marks the exhaustive fallback.
pub const EXHAUSTIVE_BELOW_DB: f64 = 5.0;
/// Value of the open-ended top bin in the published table.
pub const TERMINAL_GAMMA: f64 = 0.71;

/// Rounds `x > 0` down to 6 significant digits.
pub fn floor_sig6(x: f64) -> f64 {
    if !(x > 0.0 && x.is_finite()) {
        return x;
    }
    let e = x.log10().floor() as i32;
    let scale = 10f64.powi(5 - e);
    let y = (x * scale).floor() / scale;
    // guard against the scaled product landing just above an integer
    if y > x {
        ((x * scale).floor() - 1.0) / scale
    } else {
        y
    }
}

/// Normalized inscribed-square width of the optimal vector's region.
///
/// Among the unit multiples of the optimum, the one whose MMSE scaling
/// factor lies in the phase sector is used, since that is where the linear
/// search samples.
pub fn gamma_opt_of(ch: &Channel, ring: RingId) -> Result<f64> {
    let best = complex_exhaustive_two(ch, ring)?;
    let a = in_sector_multiple(ch, ring, &best.a_opt)?;
    let sector = AlphaSector::for_channel(ch, ring);
    let region = match region_of_vector(ring, ch, &a, &sector)? {
        Some(r) => r,
        None => {
            // the region lies outside the disc; use a box that holds all of it
            let reach = ch
                .h()
                .iter()
                .zip(a.elements())
                .map(|(h, e)| (e.embedding().norm() + ring.covering_radius()) / h.norm())
                .fold(sector.radius, f64::max);
            region_of_vector(ring, ch, &a, &sector.with_radius(2.0 * reach))?
                .ok_or_else(|| Error::Internal(format!("optimal vector {a} has an empty region")))?
        }
    };
    let (d, _) = largest_inscribed_axis_square(&region);
    let scale = (ring.fundamental_area() / ch.max_gain_sq()).sqrt();
    let g = (d / scale).min(1.0);
    if !(g > 0.0) {
        return Err(Error::Internal(format!("degenerate optimal region for {a}")));
    }
    Ok(g)
}

fn in_sector_multiple(ch: &Channel, ring: RingId, a: &CoeffVector) -> Result<CoeffVector> {
    let hi = ring.phase_sector();
    let mut best = (f64::INFINITY, a.clone());
    for u in ring.units() {
        let v = a.scaled(u);
        let alpha = mmse_alpha(ch, &v)?;
        let ph = alpha.arg();
        // distance of the phase from [0, hi)
        let miss = if ph >= 0.0 && ph < hi { 0.0 } else if ph < 0.0 { -ph } else { ph - hi };
        if miss < best.0 {
            best = (miss, v);
        }
    }
    Ok(best.1)
}

/// Construction options beyond the table shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Bins whose estimated work `trials · SNR · L²` exceeds this are marked `E`.
    pub work_budget: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { work_budget: 1e12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub table: ThresholdTable,
    /// `(L, bin lower edge, minimizing sample)` for each computed bin.
    pub minima: Vec<(usize, f64, GammaSample)>,
    /// Bins marked `E` because of the work budget.
    pub budget_marked: Vec<(usize, f64)>,
    /// Rows whose raw minima were not monotone, before repair.
    pub non_monotone: Vec<usize>,
}

/// Builds bins `[e_k, e_{k+1})` from `snr_edges_db`, a leading `E` bin below
/// the first edge, and a terminal bin above the last edge.
pub fn build_table(
    ring: RingId,
    l_values: &[usize],
    snr_edges_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ThresholdTable> {
    Ok(build_table_with(ring, l_values, snr_edges_db, trials, seed, BuildOptions::default())?.table)
}

pub fn build_table_with(
    ring: RingId,
    l_values: &[usize],
    snr_edges_db: &[f64],
    trials: usize,
    seed: u64,
    opts: BuildOptions,
) -> Result<BuildReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if l_values.is_empty() || l_values.contains(&0) {
        return Err(Error::InvalidArgument("user counts must be positive".into()));
    }
    if snr_edges_db.len() < 2 || snr_edges_db.windows(2).any(|w| !(w[0] < w[1])) || snr_edges_db.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("SNR edges must be finite and strictly increasing (at least two)".into()));
    }
    let mut rows = BTreeMap::new();
    let mut minima = Vec::new();
    let mut budget_marked = Vec::new();
    let mut non_monotone = Vec::new();
    for &users in l_values {
        let mut bins = vec![Bin { snr_lo_db: f64::NEG_INFINITY, snr_hi_db: snr_edges_db[0], gamma: Gamma::Exhaustive }];
        for w in snr_edges_db.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let snr = db_to_linear(lo);
            let work = trials as f64 * snr * (users * users) as f64;
            let gamma = if lo < EXHAUSTIVE_BELOW_DB {
                Gamma::Exhaustive
            } else if work > opts.work_budget {
                budget_marked.push((users, lo));
                Gamma::Exhaustive
            } else {
                let samples: Vec<GammaSample> = (0..trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let ch = trial_channel(seed, t, users, snr)?;
                        Ok(GammaSample { gamma_opt: gamma_opt_of(&ch, ring)?, channel_id: t })
                    })
                    .collect::<Result<_>>()?;
                let min = samples
                    .iter()
                    .copied()
                    .min_by(|a, b| a.gamma_opt.total_cmp(&b.gamma_opt).then(a.channel_id.cmp(&b.channel_id)))
                    .expect("at least one trial");
                minima.push((users, lo, min));
                Gamma::Value(floor_sig6(min.gamma_opt))
            };
            bins.push(Bin { snr_lo_db: lo, snr_hi_db: hi, gamma });
        }
        let last = bins.last().map(|b| b.gamma.value().unwrap_or(0.0)).unwrap_or(0.0);
        let terminal = last.max(floor_sig6(std::f64::consts::FRAC_1_SQRT_2));
        bins.push(Bin { snr_lo_db: *snr_edges_db.last().unwrap(), snr_hi_db: f64::INFINITY, gamma: Gamma::Value(terminal) });
        if repair_monotone(&mut bins) {
            non_monotone.push(users);
        }
        rows.insert(users, bins);
    }
    let table = ThresholdTable { ring, rows, trials, rng_seed: seed };
    table.validate()?;
    Ok(BuildReport { table, minima, budget_marked, non_monotone })
}

/// Lowers each value to the minimum of itself and every later value, which
/// keeps thresholds conservative. Returns whether anything changed.
fn repair_monotone(bins: &mut [Bin]) -> bool {
    let mut changed = false;
    let mut suffix_min = f64::INFINITY;
    for b in bins.iter_mut().rev() {
        if let Gamma::Value(g) = b.gamma {
            if g > suffix_min {
                b.gamma = Gamma::Value(suffix_min);
                changed = true;
            } else {
                suffix_min = g;
            }
        }
    }
    changed
}

impl ThresholdTable {
    /// Checks contiguity, ranges and monotonicity of every row.
    pub fn validate(&self) -> Result<()> {
        for (&users, bins) in &self.rows {
            check_row(users, bins).map_err(|msg| Error::InvalidArgument(msg))?;
        }
        Ok(())
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.values().all(|bins| bins.windows(2).all(|w| w[0].gamma.order_key() <= w[1].gamma.order_key()))
    }

    pub fn lookup(&self, users: usize, snr_db: f64) -> Result<Gamma> {
        let bins = self.rows.get(&users).ok_or(Error::TableMiss { users })?;
        bins.iter()
            .find(|b| b.snr_lo_db <= snr_db && snr_db < b.snr_hi_db)
            .map(|b| b.gamma)
            .ok_or(Error::TableMiss { users })
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        s.push_str("ring,L_count,trials,seed\n");
        let _ = writeln!(s, "{},{},{},{}", self.ring.short_name(), self.rows.len(), self.trials, self.rng_seed);
        s.push_str("L,snr_lo_db,snr_hi_db,gamma\n");
        for (users, bins) in &self.rows {
            for b in bins {
                let _ = writeln!(s, "{},{},{},{}", users, fmt_edge(b.snr_lo_db), fmt_edge(b.snr_hi_db), b.gamma);
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<ThresholdTable> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, msg: String| Error::Parse { line, msg };

        let (n, head) = lines.next().ok_or_else(|| perr(1, "empty table".into()))?;
        if head != "ring,L_count,trials,seed" {
            return Err(perr(n, format!("expected header 'ring,L_count,trials,seed', got '{head}'")));
        }
        let (n, meta) = lines.next().ok_or_else(|| perr(n + 1, "missing table metadata".into()))?;
        let f: Vec<&str> = meta.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(perr(n, format!("expected 4 metadata fields, got {}", f.len())));
        }
        let ring = RingId::from_short_name(f[0]).ok_or_else(|| perr(n, format!("unknown ring '{}'", f[0])))?;
        let l_count: usize = f[1].parse().map_err(|_| perr(n, format!("bad L_count '{}'", f[1])))?;
        let trials: usize = f[2].parse().map_err(|_| perr(n, format!("bad trials '{}'", f[2])))?;
        let rng_seed: u64 = f[3].parse().map_err(|_| perr(n, format!("bad seed '{}'", f[3])))?;

        let mut rows: BTreeMap<usize, Vec<Bin>> = BTreeMap::new();
        let mut last_line: BTreeMap<usize, usize> = BTreeMap::new();
        for (n, line) in lines {
            if line == "L,snr_lo_db,snr_hi_db,gamma" {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(perr(n, format!("expected 4 fields, got {}", f.len())));
            }
            let users: usize = f[0].parse().map_err(|_| perr(n, format!("bad L '{}'", f[0])))?;
            if users == 0 {
                return Err(perr(n, "L must be positive".into()));
            }
            let lo = parse_edge(f[1]).ok_or_else(|| perr(n, format!("bad snr_lo_db '{}'", f[1])))?;
            let hi = parse_edge(f[2]).ok_or_else(|| perr(n, format!("bad snr_hi_db '{}'", f[2])))?;
            if !(lo < hi) {
                return Err(perr(n, format!("empty bin [{lo}, {hi})")));
            }
            let gamma = if f[3] == "E" {
                Gamma::Exhaustive
            } else {
                let g: f64 = f[3].parse().map_err(|_| perr(n, format!("bad gamma '{}'", f[3])))?;
                if !(g > 0.0 && g <= 1.0) {
                    return Err(perr(n, format!("gamma {g} outside (0, 1]")));
                }
                Gamma::Value(g)
            };
            let row = rows.entry(users).or_default();
            if let Some(prev) = row.last() {
                if lo < prev.snr_hi_db {
                    return Err(perr(n, format!("bin [{lo}, {hi}) overlaps [{}, {})", prev.snr_lo_db, prev.snr_hi_db)));
                }
                if lo > prev.snr_hi_db {
                    return Err(perr(n, format!("gap between {} and {lo}", prev.snr_hi_db)));
                }
                if gamma.order_key() < prev.gamma.order_key() {
                    return Err(perr(n, format!("gamma {gamma} decreases from {}", prev.gamma)));
                }
            }
            row.push(Bin { snr_lo_db: lo, snr_hi_db: hi, gamma });
            last_line.insert(users, n);
        }
        if rows.len() != l_count {
            let n = last_line.values().max().copied().unwrap_or(2);
            return Err(perr(n, format!("L_count is {l_count} but {} rows were given", rows.len())));
        }
        let table = ThresholdTable { ring, rows, trials, rng_seed };
        table.validate().map_err(|e| perr(0, e.to_string()))?;
        Ok(table)
    }

    /// The published partial table, with its open-ended top bin starting at 40 dB.
    pub fn published(ring: RingId) -> ThresholdTable {
        let values: [(usize, [f64; 7]); 3] = match ring {
            RingId::GaussianZI => [
                (5, [0.09, 0.12, 0.21, 0.28, 0.33, 0.39, 0.44]),
                (8, [0.05, 0.07, 0.13, 0.16, 0.25, 0.32, 0.38]),
                (10, [0.05, 0.06, 0.10, 0.12, 0.17, 0.22, 0.29]),
            ],
            RingId::EisensteinZOmega => [
                (5, [0.10, 0.12, 0.20, 0.29, 0.33, 0.40, 0.44]),
                (8, [0.05, 0.08, 0.11, 0.16, 0.24, 0.32, 0.37]),
                (10, [0.05, 0.06, 0.09, 0.13, 0.18, 0.23, 0.28]),
            ],
        };
        let mut rows = BTreeMap::new();
        for (users, gs) in values {
            let mut bins = vec![Bin { snr_lo_db: f64::NEG_INFINITY, snr_hi_db: 5.0, gamma: Gamma::Exhaustive }];
            for (k, g) in gs.iter().enumerate() {
                let lo = 5.0 + 5.0 * k as f64;
                bins.push(Bin { snr_lo_db: lo, snr_hi_db: lo + 5.0, gamma: Gamma::Value(*g) });
            }
            bins.push(Bin { snr_lo_db: 40.0, snr_hi_db: f64::INFINITY, gamma: Gamma::Value(TERMINAL_GAMMA) });
            rows.insert(users, bins);
        }
        ThresholdTable { ring, rows, trials: 1000, rng_seed: 0 }
    }
}

fn check_row(users: usize, bins: &[Bin]) -> std::result::Result<(), String> {
    if bins.is_empty() {
        return Err(format!("row L={users} has no bins"));
    }
    for b in bins {
        if !(b.snr_lo_db < b.snr_hi_db) {
            return Err(format!("row L={users}: empty bin [{}, {})", b.snr_lo_db, b.snr_hi_db));
        }
        if let Gamma::Value(g) = b.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(format!("row L={users}: gamma {g} outside (0, 1]"));
            }
        }
    }
    for w in bins.windows(2) {
        if w[0].snr_hi_db != w[1].snr_lo_db {
            return Err(format!("row L={users}: bins [{}, {}) and [{}, {}) are not contiguous", w[0].snr_lo_db, w[0].snr_hi_db, w[1].snr_lo_db, w[1].snr_hi_db));
        }
        if w[1].gamma.order_key() < w[0].gamma.order_key() {
            return Err(format!("row L={users}: gamma decreases at {} dB", w[1].snr_lo_db));
        }
    }
    Ok(())
}

fn fmt_edge(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn parse_edge(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}
