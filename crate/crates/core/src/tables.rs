//! Reproduction harness for the published jump-process tables.
//!
//! Each row of the reference tables is re-run at `scale × J` jumps. The
//! rows are independent and run in parallel; row `i` uses seed
//! `seed + i`, so output is deterministic for a given `(table, scale, seed)`.

use crate::error::{Error, Result};
use crate::jumpproc::{derived_ratios, run, JumpStats, ProcessConfig, ProcessKind};
use rayon::prelude::*;

/// Relative tolerance on flip counts at full scale; widened by `1/√scale`.
pub const COUNT_REL_TOL: f64 = 0.05;

/// One published row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub copies: usize,
    pub offset: usize,
    pub alpha: f64,
    pub jumps: u64,
    pub forward_flips: u64,
    pub backward_flips: u64,
    pub a_mean: f64,
    pub b_mean: f64,
    /// Mean copy-flip count; published for the `W` table only.
    pub c_mean: Option<f64>,
    pub r1: Option<f64>,
    pub r2: f64,
}

const fn row(
    copies: usize,
    offset: usize,
    alpha: f64,
    jumps: u64,
    f: u64,
    r: u64,
    a: f64,
    b: f64,
    c: Option<f64>,
    r1: Option<f64>,
    r2: f64,
) -> ReferenceRow {
    ReferenceRow {
        copies,
        offset,
        alpha,
        jumps,
        forward_flips: f,
        backward_flips: r,
        a_mean: a,
        b_mean: b,
        c_mean: c,
        r1,
        r2,
    }
}

const A23: f64 = 2.0 / 3.0;
const A712: f64 = 7.0 / 12.0;
const A1324: f64 = 13.0 / 24.0;
const A2548: f64 = 25.0 / 48.0;

/// Reference results for the `N` process.
pub const TABLE1: &[ReferenceRow] = &[
    row(8, 2, 1.0, 10_000_000, 5_002_391, 0, 1.2212e6, 1.2242e6, None, None, 0.9778),
    row(8, 2, A23, 10_005_000, 3_336_249, 1_668_173, 4.0719e5, 4.0778e5, None, None, 0.9773),
    row(8, 2, A712, 10_000_000, 2_919_143, 2_081_936, 2.0472e5, 2.0419e5, None, None, 0.9768),
    row(8, 2, A1324, 20_000_000, 5_415_950, 4_583_516, 2.0225e5, 2.0394e5, None, None, 0.9758),
    row(8, 2, A2548, 20_000_000, 5_205_748, 4_792_723, 1.0111e5, 9.7748e4, None, None, 0.9629),
    row(16, 1, A23, 10_000_000, 3_331_214, 1_667_291, 2.2680e5, 2.2837e5, None, None, 0.5471),
    row(16, 2, A23, 10_000_000, 3_333_718, 1_666_593, 3.1050e5, 3.1231e5, None, None, 0.7470),
    row(16, 4, A23, 10_000_000, 3_332_375, 1_668_024, 4.0726e5, 4.0487e5, None, None, 0.9763),
    row(16, 8, A23, 10_000_000, 3_332_983, 1_667_959, 4.7057e5, 4.6881e5, None, None, 1.129),
    row(32, 1, A23, 10_000_000, 3_333_992, 1_665_310, 1.6566e5, 1.6342e5, None, None, 0.3946),
    row(32, 2, A23, 10_000_000, 3_334_183, 1_666_927, 2.2823e5, 2.2691e5, None, None, 0.5461),
    row(32, 4, A23, 10_000_000, 3_335_290, 1_664_622, 3.1246e5, 3.1090e5, None, None, 0.7460),
    row(32, 8, A23, 10_000_000, 3_334_115, 1_665_497, 4.0766e5, 4.0893e5, None, None, 0.9788),
    row(64, 2, A23, 10_000_000, 3_333_389, 1_665_903, 1.6270e5, 1.6609e5, None, None, 0.3944),
    row(64, 8, A23, 10_000_000, 3_334_884, 1_667_409, 3.1174e5, 3.1077e5, None, None, 0.7465),
    row(64, 16, A23, 10_000_000, 3_333_361, 1_665_149, 4.0878e5, 4.0681e5, None, None, 0.9783),
];

macro_rules! w {
    ($k:expr, $j:expr, $al:expr, $jj:expr, $f:expr, $r:expr, $a:expr, $b:expr, $c:expr, $r1:expr, $r2:expr) => {
        row($k, $j, $al, $jj, $f, $r, $a, $b, Some($c), Some($r1), $r2)
    };
}

/// Reference results for the `W` process.
pub const TABLE2: &[ReferenceRow] = &[
    w!(16, 1, A23, 10_000_000, 2_294_496, 1_153_377, 1.5090e4, 1.5224e4, 512_272.0, 1.700, 0.5187),
    w!(16, 2, A23, 10_000_000, 1_642_125, 827_546, 1.1095e4, 1.1140e4, 369_874.0, 1.747, 0.7381),
    w!(16, 4, A23, 10_000_000, 1_243_440, 631_437, 8.4986e3, 8.5709e3, 282_097.0, 1.785, 0.9887),
    w!(32, 1, A23, 10_000_000, 2_251_225, 1_130_260, 5.2767e3, 5.2874e3, 251_470.0, 1.706, 0.3748),
    w!(32, 2, A23, 10_000_000, 1_580_763, 798_450, 3.7948e3, 3.7869e3, 178_242.0, 1.754, 0.5436),
    w!(32, 3, A23, 10_000_000, 1_307_517, 663_010, 3.1831e3, 3.1756e3, 148_053.0, 1.786, 0.6665),
    w!(32, 4, A23, 10_000_000, 1_138_660, 582_221, 2.7568e3, 2.7539e3, 129_549.0, 1.792, 0.7644),
    w!(32, 5, A23, 10_000_000, 1_042_861, 534_477, 2.5251e3, 2.5549e3, 118_876.0, 1.809, 0.8405),
    w!(32, 6, A23, 10_000_000, 967_434, 495_375, 2.3921e3, 2.3670e3, 110_380.0, 1.825, 0.9131),
    w!(32, 7, A23, 10_000_000, 911_386, 467_753, 2.2203e3, 2.2288e3, 104_017.0, 1.815, 0.9644),
    w!(32, 8, A23, 10_000_000, 874_623, 449_650, 2.1260e3, 2.1291e3, 100_035.0, 1.812, 1.001),
    w!(32, 9, A23, 12_000_000, 1_024_333, 527_608, 2.5445e3, 2.5039e3, 117_076.0, 1.840, 1.041),
    w!(32, 10, A23, 11_000_000, 911_136, 470_663, 2.2247e3, 2.2062e3, 104_318.0, 1.821, 1.061),
    w!(32, 11, A23, 14_000_000, 1_142_519, 589_629, 2.7743e3, 2.7949e3, 130_899.0, 1.823, 1.077),
    w!(32, 12, A23, 11_000_000, 874_736, 453_702, 2.1478e3, 2.1269e3, 100_289.0, 1.838, 1.114),
    w!(32, 13, A23, 14_000_000, 1_102_885, 571_297, 2.7163e3, 2.7051e3, 126_588.0, 1.846, 1.128),
    w!(32, 14, A23, 12_000_000, 938_220, 487_280, 2.2964e3, 2.2897e3, 107_856.0, 1.841, 1.131),
    w!(32, 15, A23, 14_000_000, 1_086_256, 568_979, 2.6827e3, 2.6788e3, 125_154.0, 1.876, 1.159),
    w!(32, 1, 1.0, 10_000_000, 3_332_721, 0, 1.5819e4, 1.5825e4, 247_677.0, 1.719, 0.3834),
    w!(32, 2, 1.0, 10_000_000, 2_369_493, 0, 1.1341e4, 1.1354e4, 179_076.0, 1.734, 0.5347),
    w!(32, 2, A712, 10_000_000, 1_381_226, 991_383, 1.9456e3, 1.8973e3, 178_013.0, 1.785, 0.5536),
    w!(32, 2, A1324, 20_000_000, 2_573_137, 2_181_102, 1.9085e3, 1.9266e3, 356_466.0, 1.771, 0.5491),
    w!(32, 2, A2548, 40_000_000, 4_950_753, 4_559_821, 1.9429e3, 1.8834e3, 712_677.0, 1.772, 0.5496),
    w!(64, 1, A23, 10_000_000, 2_233_592, 1_123_461, 1.8555e3, 1.8491e3, 124_756.0, 1.708, 0.2675),
    w!(64, 2, A23, 20_000_000, 3_102_155, 1_571_597, 2.6385e3, 2.6427e3, 175_391.0, 1.767, 0.3935),
    w!(64, 4, A23, 20_000_000, 2_208_690, 1_127_635, 1.9124e3, 1.9001e3, 125_776.0, 1.806, 0.5610),
    w!(64, 8, A23, 22_000_000, 1_782_288, 917_200, 1.5424e3, 1.5407e3, 101_851.0, 1.825, 0.7699),
    w!(64, 16, A23, 30_000_000, 1_909_428, 988_772, 1.6775e3, 1.6584e3, 109_624.0, 1.855, 0.9917),
    w!(64, 24, A23, 25_000_000, 1_450_673, 755_564, 1.2598e3, 1.2479e3, 83_414.0, 1.847, 1.081),
    w!(128, 1, A23, 10_000_000, 2_221_748, 1_119_251, 6.5420e2, 6.5077e2, 62_092.0, 1.714, 0.1906),
    w!(128, 16, A23, 10_000_000, 573_255, 297_429, 1.7767e2, 1.7490e2, 16_466.0, 1.851, 0.7764),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    /// `N` process.
    One,
    /// `W` process.
    Two,
}

impl Table {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::InvalidConfig(format!("no table {n}; choose 1 or 2"))),
        }
    }

    pub fn kind(self) -> ProcessKind {
        match self {
            Self::One => ProcessKind::N,
            Self::Two => ProcessKind::W,
        }
    }

    pub fn reference(self) -> &'static [ReferenceRow] {
        match self {
            Self::One => TABLE1,
            Self::Two => TABLE2,
        }
    }

    /// CSV header; the column set of the published table.
    pub fn header(self) -> &'static str {
        match self {
            Self::One => "K,j,alpha,J,F,R,A,B,r2",
            Self::Two => "K,j,alpha,J,F,R,A,B,C,r1,r2",
        }
    }
}

/// A reproduced row next to its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproducedRow {
    pub reference: ReferenceRow,
    pub config: ProcessConfig,
    pub stats: JumpStats,
    /// `None` when `F = R` (can happen only at very small scales).
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

impl ReproducedRow {
    /// `A` rescaled to the reference jump count.
    pub fn a_normalized(&self) -> f64 {
        self.stats.a_mean * self.reference.jumps as f64 / self.stats.jumps as f64
    }

    pub fn b_normalized(&self) -> f64 {
        self.stats.b_mean * self.reference.jumps as f64 / self.stats.jumps as f64
    }

    pub fn f_normalized(&self) -> f64 {
        self.stats.forward_flips as f64 * self.reference.jumps as f64 / self.stats.jumps as f64
    }

    pub fn r_normalized(&self) -> f64 {
        self.stats.backward_flips as f64 * self.reference.jumps as f64 / self.stats.jumps as f64
    }
}

/// Jump count used for a reference row at `scale`.
pub fn scaled_jumps(reference: &ReferenceRow, scale: f64) -> u64 {
    ((reference.jumps as f64 * scale).round() as u64).max(1)
}

/// Comparison tolerance on counts at a given scale.
pub fn count_tolerance(scale: f64) -> f64 {
    COUNT_REL_TOL / scale.min(1.0).sqrt()
}

/// Re-runs every row of `table` at `scale × J` jumps.
pub fn reproduce(table: Table, scale: f64, seed: u32) -> Result<Vec<ReproducedRow>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidConfig(format!("scale must be positive, got {scale}")));
    }
    table
        .reference()
        .par_iter()
        .enumerate()
        .map(|(i, reference)| {
            let config = ProcessConfig::new(table.kind(), reference.copies, reference.offset, reference.alpha);
            let stats = run(&config, scaled_jumps(reference, scale), seed.wrapping_add(i as u32))?;
            let ratios = derived_ratios(&stats, &config).ok();
            Ok(ReproducedRow {
                reference: *reference,
                r1: ratios.map(|r| r.r1),
                r2: ratios.map(|r| r.r2),
                config,
                stats,
            })
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_else(|| "NaN".into())
}

/// The CSV line for a reproduced row; columns follow [`Table::header`].
pub fn csv_line(table: Table, row: &ReproducedRow) -> String {
    let s = &row.stats;
    let head = format!(
        "{},{},{:?},{},{},{},{:?},{:?}",
        row.config.copies, row.config.offset, row.config.alpha, s.jumps, s.forward_flips, s.backward_flips, s.a_mean, s.b_mean
    );
    match table {
        Table::One => format!("{head},{}", opt(row.r2)),
        Table::Two => format!("{head},{:?},{},{}", s.c_mean(), opt(row.r1), opt(row.r2)),
    }
}

/// Human-readable comparison of a reproduced table against the reference.
pub fn comparison_report(table: Table, rows: &[ReproducedRow], scale: f64) -> String {
    let tol = count_tolerance(scale);
    let mut out = format!(
        "# table {} at scale {scale}; counts normalized to the reference J, tolerance ±{:.1}%\n",
        match table {
            Table::One => 1,
            Table::Two => 2,
        },
        100.0 * tol
    );
    out.push_str("K,j,alpha,F_norm,F_ref,R_norm,R_ref,A_norm,A_ref,B_norm,B_ref,r1,r1_ref,r2,r2_ref,counts_ok\n");
    for r in rows {
        let rf = &r.reference;
        let ok_f = rel_ok(r.f_normalized(), rf.forward_flips as f64, tol);
        let ok_r = rf.backward_flips == 0 && r.stats.backward_flips == 0
            || rel_ok(r.r_normalized(), rf.backward_flips as f64, tol);
        out.push_str(&format!(
            "{},{},{:.4},{:.0},{},{:.0},{},{:.5e},{:.5e},{:.5e},{:.5e},{},{},{},{},{}\n",
            rf.copies,
            rf.offset,
            rf.alpha,
            r.f_normalized(),
            rf.forward_flips,
            r.r_normalized(),
            rf.backward_flips,
            r.a_normalized(),
            rf.a_mean,
            r.b_normalized(),
            rf.b_mean,
            r.r1.map(|v| format!("{v:.4}")).unwrap_or_else(|| "NaN".into()),
            rf.r1.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
            r.r2.map(|v| format!("{v:.4}")).unwrap_or_else(|| "NaN".into()),
            rf.r2,
            ok_f && ok_r
        ));
    }
    out
}

fn rel_ok(x: f64, reference: f64, tol: f64) -> bool {
    reference != 0.0 && ((x - reference) / reference).abs() <= tol
}
