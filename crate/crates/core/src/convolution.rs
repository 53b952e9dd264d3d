//! 3x3 binomial smoothing kernel and its two evaluators.
//!
//! [`conv3_ref`] is the exact real-valued convolution. [`conv3_shift_add`] is a
//! bit-exact model of the streaming convolution engine: each incoming column
//! is reduced by a row of shift-and-accumulate units ([`sau`]), and the result
//! travels through two more pipeline stages (`<< 1`, then `>> 1`) so that the
//! three kernel columns `1, 2, 1` are applied to three consecutive input
//! columns. The output column centred on input column `j` is available on the
//! cycle when column `j + 1` enters the first stage.
//!
//! All borders are clamp-to-edge. The `*_valid` variants take an already
//! padded plane and return the `(w - 2) x (h - 2)` interior, which is what
//! the engine itself computes for `l` rows.

use crate::error::{Error, Result};
use crate::plane::{Plane, PlaneQ, Q_LIMIT};

/// Shift used throughout the pipeline: weights `[1, 2, 1] x [1, 2, 1] / 16`.
pub const DEFAULT_SHIFT: u32 = 4;

/// The separable kernel `outer([1,2,1], [1,2,1]) / 2^shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Kernel3 {
    shift: u32,
}

impl Default for Kernel3 {
    fn default() -> Self {
        Self {
            shift: DEFAULT_SHIFT,
        }
    }
}

impl Kernel3 {
    /// Kernel with the given scale shift; the column relation needs `shift >= 2`.
    pub fn new(shift: u32) -> Result<Self> {
        if !(2..=16).contains(&shift) {
            return Err(Error::InvalidParams(format!(
                "kernel shift must be in 2..=16, got {shift}"
            )));
        }
        Ok(Self { shift })
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    /// `weights()[row][col]`.
    pub fn weights(&self) -> [[f64; 3]; 3] {
        let taps = [1.0, 2.0, 1.0];
        let scale = 1.0 / (1u64 << self.shift) as f64;
        let mut w = [[0.0; 3]; 3];
        for (r, tr) in taps.iter().enumerate() {
            for (c, tc) in taps.iter().enumerate() {
                w[r][c] = tr * tc * scale;
            }
        }
        w
    }

    pub fn sum(&self) -> f64 {
        self.weights().iter().flatten().sum()
    }
}

/// Clamp-to-edge padding by one sample on every side.
pub fn pad_clamp<T: Copy>(p: &crate::plane::Grid<T>) -> crate::plane::Grid<T> {
    let (w, h) = p.dims();
    crate::plane::Grid::from_fn(w + 2, h + 2, |x, y| {
        p.get_clamped(x as isize - 1, y as isize - 1)
    })
}

/// Exact convolution with clamp-to-edge borders; output has the input's dims.
pub fn conv3_ref(p: &Plane, k: &Kernel3) -> Plane {
    conv3_ref_valid(&pad_clamp(p), k)
}

/// Exact convolution over the interior of an already padded plane.
pub fn conv3_ref_valid(padded: &Plane, k: &Kernel3) -> Plane {
    let (w, h) = padded.dims();
    assert!(w >= 3 && h >= 3, "padded plane must be at least 3x3");
    let wt = k.weights();
    Plane::from_fn(w - 2, h - 2, |x, y| {
        let mut acc = 0.0;
        for (r, wr) in wt.iter().enumerate() {
            let row = padded.row(y + r);
            acc += wr[0] * row[x] + wr[1] * row[x + 1] + wr[2] * row[x + 2];
        }
        acc
    })
}

/// Shift-and-accumulate unit: `(a >> s) + (b >> (s - 1)) + (c >> s)`, floor shifts.
#[inline]
pub fn sau(a: i32, b: i32, c: i32, shift: u32) -> i32 {
    debug_assert!(a.abs() <= Q_LIMIT && b.abs() <= Q_LIMIT && c.abs() <= Q_LIMIT);
    (a >> shift) + (b >> (shift - 1)) + (c >> shift)
}

/// Register contents of the three-stage column pipeline after one cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnPipelineState {
    /// Stage 1: vertical shift-and-accumulate of the newest column.
    pub x1: Vec<i32>,
    /// Stage 2: previous `x1 << 1`.
    pub x2: Vec<i32>,
    /// Stage 3: previous `x2 >> 1`.
    pub x3: Vec<i32>,
    /// Columns that have entered the pipeline so far.
    pub fill_count: usize,
}

impl ColumnPipelineState {
    /// True once three columns have entered and the stage sum is a valid output.
    pub fn is_full(&self) -> bool {
        self.fill_count >= 3
    }

    /// `x1 + x2 + x3` when the pipeline is full.
    pub fn output(&self) -> Option<Vec<i32>> {
        self.is_full().then(|| {
            self.x1
                .iter()
                .zip(&self.x2)
                .zip(&self.x3)
                .map(|((a, b), c)| a + b + c)
                .collect()
        })
    }
}

/// Streaming engine fed one column of `l` samples per cycle.
#[derive(Clone, Debug)]
pub struct ColumnPipeline {
    shift: u32,
    state: ColumnPipelineState,
}

impl ColumnPipeline {
    pub fn new(column_height: usize, shift: u32) -> Self {
        assert!(column_height >= 3, "engine needs at least 3 rows");
        let n = column_height - 2;
        Self {
            shift,
            state: ColumnPipelineState {
                x1: vec![0; n],
                x2: vec![0; n],
                x3: vec![0; n],
                fill_count: 0,
            },
        }
    }

    /// Advances one cycle with `column` entering stage 1.
    pub fn push(&mut self, column: &[i32]) {
        let s = &mut self.state;
        debug_assert_eq!(column.len(), s.x1.len() + 2);
        for i in 0..s.x1.len() {
            s.x3[i] = s.x2[i] >> 1;
            s.x2[i] = s.x1[i] << 1;
            s.x1[i] = sau(column[i], column[i + 1], column[i + 2], self.shift);
        }
        s.fill_count += 1;
    }

    pub fn state(&self) -> &ColumnPipelineState {
        &self.state
    }
}

/// Bit-exact shift-add convolution with clamp-to-edge borders.
pub fn conv3_shift_add(p: &PlaneQ, shift: u32) -> PlaneQ {
    conv3_shift_add_valid(&pad_clamp(p), shift)
}

/// Shift-add convolution of the interior of an already padded plane.
pub fn conv3_shift_add_valid(padded: &PlaneQ, shift: u32) -> PlaneQ {
    let (w, h) = padded.dims();
    assert!(w >= 3 && h >= 3, "padded plane must be at least 3x3");
    let (ow, oh) = (w - 2, h - 2);
    let src = padded.samples();
    let mut out = vec![0i32; ow * oh];
    let mut engine = ColumnPipeline::new(h, shift);
    let mut column = vec![0i32; h];
    for c in 0..w {
        for (r, v) in column.iter_mut().enumerate() {
            *v = src[r * w + c];
        }
        engine.push(&column);
        if c >= 2 {
            let st = engine.state();
            for r in 0..oh {
                out[r * ow + c - 2] = st.x1[r] + st.x2[r] + st.x3[r];
            }
        }
    }
    PlaneQ::new(ow, oh, out).expect("engine output dims")
}

/// Border treatment for [`pipeline_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracePadding {
    /// Clamp-pad all sides: `w + 2` cycles, `w` full-pipeline outputs of height `h`.
    Clamp,
    /// Raw columns only: `w` cycles, `w - 2` outputs of height `h - 2`.
    Interior,
}

/// Cycle-by-cycle register states of the engine while it filters `p`.
pub fn pipeline_trace(p: &PlaneQ, shift: u32, padding: TracePadding) -> Vec<ColumnPipelineState> {
    let input = match padding {
        TracePadding::Clamp => pad_clamp(p),
        TracePadding::Interior => p.clone(),
    };
    let (w, h) = input.dims();
    let mut engine = ColumnPipeline::new(h, shift);
    let mut trace = Vec::with_capacity(w);
    let mut column = vec![0i32; h];
    for c in 0..w {
        for (r, v) in column.iter_mut().enumerate() {
            *v = input.get(c, r);
        }
        engine.push(&column);
        trace.push(engine.state().clone());
    }
    trace
}

/// Reassembles the filtered plane from the full-pipeline cycles of a trace.
pub fn plane_from_trace(trace: &[ColumnPipelineState]) -> Option<PlaneQ> {
    let columns: Vec<Vec<i32>> = trace.iter().filter_map(|s| s.output()).collect();
    let w = columns.len();
    let h = columns.first()?.len();
    PlaneQ::new(w, h, (0..w * h).map(|i| columns[i % w][i / w]).collect()).ok()
}
