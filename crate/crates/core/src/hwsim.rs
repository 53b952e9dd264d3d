//! Cycle-level model of the accelerator's input streams.
//!
//! Nine level processing units (three channels by three output bands) each
//! own an input FIFO. Every cycle the host link delivers
//! `total_bandwidth / pixel_bits` pixels, handed out one at a time in
//! round-robin order to streams whose FIFO has room and whose LPU still needs
//! data. An LPU walks its level's pixels in raster order; each pixel streams
//! a `window x window` sub-image through the convolution engine at one column
//! per cycle. Columns already seen by the previous pixel of the same row come
//! from the LPU's line buffer; only the `2^level` columns that slide into the
//! window (or the whole window at the start of a row) must be popped from the
//! FIFO. A cycle that needs a FIFO column and finds less than a full column
//! is counted inactive.
//!
//! The model is for trends (efficiency against bandwidth), not timing
//! closure: window clipping at image borders is ignored.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::llf::{half_width, level_dims, LpuConfig, ACCEL_BANDS};

pub const PIXEL_BITS: u32 = 8;
pub const CHANNELS: usize = 3;
pub const STREAMS: usize = CHANNELS * ACCEL_BANDS;

/// LUT share of one L1 LPU instance, in percent of the device.
pub const L1_LUT_PCT: f64 = 1.28;
/// LUT share of the full nine-unit design, in percent of the device.
pub const FULL_DESIGN_LUT_PCT: f64 = 19.0;
/// Pipeline depth of an L1 unit: remap, engine fill, downsample, upsample,
/// engine fill, subtract.
pub const L1_FILL_CYCLES: u64 = 1 + 2 + 1 + 1 + 2 + 1;

/// Aggregate host-to-device bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bandwidth {
    Bits(u32),
    /// Every FIFO is refilled to capacity each cycle.
    Unlimited,
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bandwidth::Bits(b) => write!(f, "{b}"),
            Bandwidth::Unlimited => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "unlimited") {
            return Ok(Bandwidth::Unlimited);
        }
        s.parse::<u32>()
            .map(Bandwidth::Bits)
            .map_err(|_| Error::InvalidParams(format!("bad bandwidth '{s}' (bits per cycle or 'inf')")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arbitration {
    RoundRobin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamConfig {
    pub total_bandwidth: Bandwidth,
    pub pixel_bits: u32,
    pub n_streams: usize,
    pub arbitration: Arbitration,
    /// FIFO depth in columns of the stream's own column height.
    pub fifo_columns: usize,
}

impl StreamConfig {
    pub fn new(total_bandwidth: Bandwidth) -> Self {
        Self {
            total_bandwidth,
            pixel_bits: PIXEL_BITS,
            n_streams: STREAMS,
            arbitration: Arbitration::RoundRobin,
            fifo_columns: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_streams != STREAMS {
            return Err(Error::InvalidParams(format!(
                "the accelerator has {STREAMS} streams, got {}",
                self.n_streams
            )));
        }
        if self.pixel_bits == 0 || self.fifo_columns == 0 {
            return Err(Error::InvalidParams("pixel_bits and fifo_columns must be positive".into()));
        }
        if let Bandwidth::Bits(b) = self.total_bandwidth {
            if b < self.pixel_bits {
                return Err(Error::NoProgress {
                    bandwidth: b,
                    pixel_bits: self.pixel_bits,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CycleStats {
    pub active: u64,
    pub inactive: u64,
}

impl CycleStats {
    pub fn total(&self) -> u64 {
        self.active + self.inactive
    }

    pub fn efficiency(&self) -> f64 {
        match self.total() {
            0 => 1.0,
            t => self.active as f64 / t as f64,
        }
    }
}

impl std::ops::Add for CycleStats {
    type Output = CycleStats;

    fn add(self, rhs: Self) -> Self {
        CycleStats {
            active: self.active + rhs.active,
            inactive: self.inactive + rhs.inactive,
        }
    }
}

/// Work description of one LPU for a given image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpuWorkload {
    pub level: usize,
    pub rows: u64,
    pub items_per_row: u64,
    /// Sub-image side in pixels; also the cycles per output coefficient.
    pub window: u64,
    /// Fresh columns per coefficient after the first of a row.
    pub step: u64,
}

impl LpuWorkload {
    pub fn new(cfg: LpuConfig, width: usize, height: usize) -> Self {
        let level = cfg.level();
        let (lw, lh) = level_dims(width, height, level);
        Self {
            level,
            rows: lh as u64,
            items_per_row: lw as u64,
            window: 2 * half_width(level) as u64 + 1,
            step: 1 << level,
        }
    }

    pub fn column_height(&self) -> u64 {
        self.window
    }

    pub fn columns_per_row(&self) -> u64 {
        self.window + (self.items_per_row - 1) * self.step
    }

    pub fn total_columns(&self) -> u64 {
        self.rows * self.columns_per_row()
    }

    pub fn total_pixels(&self) -> u64 {
        self.total_columns() * self.column_height()
    }

    /// Cycles needed when data is never short.
    pub fn compute_cycles(&self) -> u64 {
        self.rows * self.items_per_row * self.window
    }
}

/// Per-LPU outcome of [`simulate_lpus`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpuStats {
    pub channel: usize,
    pub level: usize,
    pub stats: CycleStats,
    pub pixels_delivered: u64,
    pub columns_consumed: u64,
    pub column_height: u64,
}

struct Unit {
    work: LpuWorkload,
    fifo: u64,
    capacity: u64,
    undelivered: u64,
    row: u64,
    item: u64,
    cycle_in_item: u64,
    done: bool,
    out: LpuStats,
}

impl Unit {
    fn new(channel: usize, work: LpuWorkload, fifo_columns: usize) -> Self {
        Self {
            work,
            fifo: 0,
            capacity: fifo_columns as u64 * work.column_height(),
            undelivered: work.total_pixels(),
            row: 0,
            item: 0,
            cycle_in_item: 0,
            done: work.rows == 0,
            out: LpuStats {
                channel,
                level: work.level,
                stats: CycleStats::default(),
                pixels_delivered: 0,
                columns_consumed: 0,
                column_height: work.column_height(),
            },
        }
    }

    fn wants_data(&self) -> bool {
        self.undelivered > 0 && self.fifo < self.capacity
    }

    fn deliver(&mut self, n: u64) {
        self.fifo += n;
        self.undelivered -= n;
        self.out.pixels_delivered += n;
    }

    fn needs_column(&self) -> bool {
        self.item == 0 || self.cycle_in_item >= self.work.window - self.work.step
    }

    fn step(&mut self) {
        if self.done {
            return;
        }
        if self.needs_column() {
            let h = self.work.column_height();
            if self.fifo < h {
                self.out.stats.inactive += 1;
                return;
            }
            self.fifo -= h;
            self.out.columns_consumed += 1;
        }
        self.out.stats.active += 1;
        self.cycle_in_item += 1;
        if self.cycle_in_item == self.work.window {
            self.cycle_in_item = 0;
            self.item += 1;
            if self.item == self.work.items_per_row {
                self.item = 0;
                self.row += 1;
                self.done = self.row == self.work.rows;
            }
        }
    }
}

/// Runs the nine-stream model to completion; results ordered by channel, then level.
pub fn simulate_lpus(width: usize, height: usize, cfg: &StreamConfig) -> Result<Vec<LpuStats>> {
    cfg.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidParams("image must be non-empty".into()));
    }
    let mut units: Vec<Unit> = (0..CHANNELS)
        .flat_map(|c| (0..ACCEL_BANDS).map(move |l| (c, l)))
        .map(|(c, l)| {
            let work = LpuWorkload::new(LpuConfig::new(l).expect("level in range"), width, height);
            Unit::new(c, work, cfg.fifo_columns)
        })
        .collect();
    let per_cycle = match cfg.total_bandwidth {
        Bandwidth::Bits(b) => Some((b / cfg.pixel_bits) as u64),
        Bandwidth::Unlimited => None,
    };
    let n = units.len();
    let mut next = 0usize;
    while units.iter().any(|u| !u.done) {
        match per_cycle {
            None => {
                for u in units.iter_mut() {
                    let room = (u.capacity - u.fifo).min(u.undelivered);
                    u.deliver(room);
                }
            }
            Some(mut budget) => {
                while budget > 0 {
                    let mut served = false;
                    for k in 0..n {
                        if budget == 0 {
                            break;
                        }
                        let s = (next + k) % n;
                        if units[s].wants_data() {
                            units[s].deliver(1);
                            budget -= 1;
                            served = true;
                            if budget == 0 {
                                next = (s + 1) % n;
                            }
                        }
                    }
                    if !served {
                        break;
                    }
                }
            }
        }
        for u in units.iter_mut() {
            u.step();
        }
    }
    Ok(units.into_iter().map(|u| u.out).collect())
}

/// Sums the per-channel stats of each output level.
pub fn aggregate_by_level(stats: &[LpuStats]) -> [CycleStats; ACCEL_BANDS] {
    let mut out = [CycleStats::default(); ACCEL_BANDS];
    for s in stats {
        out[s.level] = out[s.level] + s.stats;
    }
    out
}

/// One CSV row of a bandwidth sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRecord {
    pub scenario: String,
    pub level: usize,
    pub bandwidth: Bandwidth,
    pub stats: CycleStats,
}

/// Runs [`simulate_lpus`] at each bandwidth and aggregates per level.
pub fn bandwidth_sweep(width: usize, height: usize, bandwidths: &[Bandwidth]) -> Result<Vec<SimRecord>> {
    let mut records = Vec::with_capacity(bandwidths.len() * ACCEL_BANDS);
    for &bw in bandwidths {
        let stats = simulate_lpus(width, height, &StreamConfig::new(bw))?;
        for (level, s) in aggregate_by_level(&stats).into_iter().enumerate() {
            records.push(SimRecord {
                scenario: format!("bw{bw}"),
                level,
                bandwidth: bw,
                stats: s,
            });
        }
    }
    Ok(records)
}

/// How the L1 work is split across replicated units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicationPlan {
    n_instances: usize,
}

impl ReplicationPlan {
    pub const MAX_INSTANCES: usize = 6;

    pub fn new(n_instances: usize) -> Result<Self> {
        if !(1..=Self::MAX_INSTANCES).contains(&n_instances) {
            return Err(Error::InvalidParams(format!(
                "replication needs 1..={} instances, got {n_instances}",
                Self::MAX_INSTANCES
            )));
        }
        Ok(Self { n_instances })
    }

    pub fn n_instances(&self) -> usize {
        self.n_instances
    }

    /// Contiguous pixel ranges whose sizes differ by at most one.
    pub fn shares(&self, total: u64) -> Vec<Range<u64>> {
        let n = self.n_instances as u64;
        let (base, extra) = (total / n, total % n);
        let mut start = 0;
        (0..n)
            .map(|i| {
                let len = base + u64::from(i < extra);
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }

    /// Modeled LUT usage in percent of the device.
    pub fn resource_pct(&self) -> f64 {
        FULL_DESIGN_LUT_PCT - L1_LUT_PCT + self.n_instances as f64 * L1_LUT_PCT
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationReport {
    pub n_instances: usize,
    pub latency_cycles: u64,
    pub fill_cycles: u64,
    pub resource_pct: f64,
    pub per_instance_cycles: Vec<u64>,
}

/// Compute-bound L1 latency when its pixels are split over the plan's instances.
pub fn simulate_replication(width: usize, height: usize, plan: &ReplicationPlan) -> ReplicationReport {
    let work = LpuWorkload::new(LpuConfig::new(0).expect("level 0"), width, height);
    let total = work.rows * work.items_per_row;
    let per_instance_cycles: Vec<u64> = plan
        .shares(total)
        .into_iter()
        .map(|r| (r.end - r.start) * work.window)
        .collect();
    let busiest = per_instance_cycles.iter().copied().max().unwrap_or(0);
    ReplicationReport {
        n_instances: plan.n_instances(),
        latency_cycles: busiest + L1_FILL_CYCLES,
        fill_cycles: L1_FILL_CYCLES,
        resource_pct: plan.resource_pct(),
        per_instance_cycles,
    }
}

pub const SIM_CSV_HEADER: &str = "scenario,lpu,bandwidth_bits,active,inactive,efficiency";
pub const REPLICATION_CSV_HEADER: &str = "scenario,n_instances,latency_cycles,resource_pct";

/// Bandwidth-sweep CSV, rows in the order given.
pub fn emit_sim_csv(records: &[SimRecord]) -> String {
    let mut out = String::from(SIM_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},L{},{},{},{},{:.6}",
            r.scenario,
            r.level + 1,
            r.bandwidth,
            r.stats.active,
            r.stats.inactive,
            r.stats.efficiency()
        );
    }
    out
}

pub fn emit_replication_csv(reports: &[ReplicationReport]) -> String {
    let mut out = String::from(REPLICATION_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "replicate{},{},{},{:.2}",
            r.n_instances, r.n_instances, r.latency_cycles, r.resource_pct
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_starved_link() {
        let cfg = StreamConfig::new(Bandwidth::Bits(4));
        assert!(matches!(simulate_lpus(16, 16, &cfg), Err(Error::NoProgress { .. })));
        assert!(simulate_lpus(16, 16, &StreamConfig::new(Bandwidth::Bits(8))).is_ok());
    }

    #[test]
    fn unlimited_never_stalls() {
        let stats = simulate_lpus(40, 24, &StreamConfig::new(Bandwidth::Unlimited)).unwrap();
        assert_eq!(stats.len(), 9);
        for s in &stats {
            assert_eq!(s.stats.inactive, 0);
            assert_eq!(s.stats.efficiency(), 1.0);
        }
    }

    #[test]
    fn workload_shape() {
        let w = LpuWorkload::new(LpuConfig::new(2).unwrap(), 64, 40);
        assert_eq!((w.rows, w.items_per_row, w.window, w.step), (10, 16, 31, 4));
        assert_eq!(w.columns_per_row(), 31 + 15 * 4);
    }

    #[test]
    fn bandwidth_parsing() {
        assert_eq!("64".parse::<Bandwidth>().unwrap(), Bandwidth::Bits(64));
        assert_eq!("inf".parse::<Bandwidth>().unwrap(), Bandwidth::Unlimited);
        assert!("fast".parse::<Bandwidth>().is_err());
    }

    #[test]
    fn shares_partition() {
        let plan = ReplicationPlan::new(4).unwrap();
        let s = plan.shares(10);
        assert_eq!(s, vec![0..3, 3..6, 6..8, 8..10]);
        assert!(ReplicationPlan::new(0).is_err());
        assert!(ReplicationPlan::new(7).is_err());
    }

    #[test]
    fn single_instance_baseline() {
        let r = simulate_replication(32, 16, &ReplicationPlan::new(1).unwrap());
        assert_eq!(r.latency_cycles, 32 * 16 * 7 + L1_FILL_CYCLES);
        assert!((r.resource_pct - FULL_DESIGN_LUT_PCT).abs() < 1e-12);
    }

    #[test]
    fn csv_shapes() {
        let rec = SimRecord {
            scenario: "bw32".into(),
            level: 0,
            bandwidth: Bandwidth::Bits(32),
            stats: CycleStats { active: 3, inactive: 1 },
        };
        assert_eq!(
            emit_sim_csv(&[rec]),
            "scenario,lpu,bandwidth_bits,active,inactive,efficiency\nbw32,L1,32,3,1,0.750000\n"
        );
    }
}
