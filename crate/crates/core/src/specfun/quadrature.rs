//! Adaptive Gauss–Kronrod integration with strictly interior nodes.

use crate::error::{Error, Result};

/// Tolerances and panel rule for [`integrate_unit_interval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Kronrod points per panel: 15 (G7/K15) or 31 (G15/K31).
    pub node_count: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of panels.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            node_count: 15,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureConfig {
    pub fn new(node_count: usize, abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = QuadratureConfig {
            node_count,
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count != 15 && self.node_count != 31 {
            return Err(Error::domain(
                "QuadratureConfig",
                format!("node_count {} unsupported (use 15 or 31)", self.node_count),
            ));
        }
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(Error::domain(
                "QuadratureConfig",
                "tolerances must be non-negative and not both zero",
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("QuadratureConfig", "max_subdivisions must be positive"));
        }
        Ok(())
    }

    /// Same rule with both tolerances replaced.
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    fn rule(&self) -> &'static Rule {
        if self.node_count == 31 {
            &K31
        } else {
            &K15
        }
    }
}

struct Rule {
    /// Kronrod abscissae on [0, 1), descending, centre last.
    xgk: &'static [f64],
    wgk: &'static [f64],
    /// Gauss weights for the odd-indexed abscissae (centre last when present).
    wg: &'static [f64],
}

static K15: Rule = Rule {
    xgk: &[
        0.991_455_371_120_812_639_206_854_697_526_329,
        0.949_107_912_342_758_524_526_189_684_047_851,
        0.864_864_423_359_769_072_789_712_788_640_926,
        0.741_531_185_599_394_439_863_864_773_280_788,
        0.586_087_235_467_691_130_294_144_845_693_013,
        0.405_845_151_377_397_166_906_606_412_076_961,
        0.207_784_955_007_898_467_600_689_403_773_245,
        0.0,
    ],
    wgk: &[
        0.022_935_322_010_529_224_963_732_008_058_970,
        0.063_092_092_629_978_553_290_700_663_189_204,
        0.104_790_010_322_250_183_839_876_322_541_518,
        0.140_653_259_715_525_918_745_189_590_510_238,
        0.169_004_726_639_267_902_826_583_426_598_550,
        0.190_350_578_064_785_409_913_256_402_421_014,
        0.204_432_940_075_298_892_414_161_999_234_649,
        0.209_482_141_084_727_828_012_999_174_891_714,
    ],
    wg: &[
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
        0.417_959_183_673_469_387_755_102_040_816_327,
    ],
};

static K31: Rule = Rule {
    xgk: &[
        0.998_002_298_693_397_060_285_172_840_152_271,
        0.987_992_518_020_485_428_489_565_718_586_613,
        0.967_739_075_679_139_134_257_347_978_784_337,
        0.937_273_392_400_705_904_307_758_947_710_209,
        0.897_264_532_344_081_900_882_509_656_454_496,
        0.848_206_583_410_427_216_200_648_320_774_217,
        0.790_418_501_442_465_932_967_649_294_817_947,
        0.724_417_731_360_170_047_416_186_054_613_938,
        0.650_996_741_297_416_970_533_735_895_313_275,
        0.570_972_172_608_538_847_537_226_737_253_911,
        0.485_081_863_640_239_680_693_655_740_232_351,
        0.394_151_347_077_563_369_897_207_370_981_045,
        0.299_180_007_153_168_812_166_780_024_266_389,
        0.201_194_093_997_434_522_300_628_303_394_596,
        0.101_142_066_918_717_499_027_074_231_447_392,
        0.0,
    ],
    wgk: &[
        0.005_377_479_872_923_348_987_792_051_430_128,
        0.015_007_947_329_316_122_538_374_763_075_807,
        0.025_460_847_326_715_320_186_874_001_019_653,
        0.035_346_360_791_375_846_222_037_948_478_360,
        0.044_589_751_324_764_876_608_227_299_373_280,
        0.053_481_524_690_928_087_265_343_147_239_430,
        0.062_009_567_800_670_640_285_139_230_960_803,
        0.069_854_121_318_728_258_709_520_077_099_147,
        0.076_849_680_757_720_378_894_432_777_482_659,
        0.083_080_502_823_133_021_038_289_247_286_104,
        0.088_564_443_056_211_770_647_275_443_693_774,
        0.093_126_598_170_825_321_225_486_872_747_346,
        0.096_642_726_983_623_678_505_179_907_627_589,
        0.099_173_598_721_791_959_332_393_173_484_603,
        0.100_769_845_523_875_595_044_946_662_617_570,
        0.101_330_007_014_791_549_017_374_792_767_493,
    ],
    wg: &[
        0.030_753_241_996_117_268_354_628_393_577_204,
        0.070_366_047_488_108_124_709_267_416_450_667,
        0.107_159_220_467_171_935_011_869_546_685_869,
        0.139_570_677_926_154_314_447_804_794_511_028,
        0.166_269_205_816_993_933_553_200_860_481_209,
        0.186_161_000_015_562_211_026_800_561_866_423,
        0.198_431_485_327_111_576_456_118_326_443_839,
        0.202_578_241_925_561_272_880_620_199_967_519,
    ],
};

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// One Gauss–Kronrod panel on `[a, b]`; returns `(kronrod, error estimate)`.
fn gk_panel<F: FnMut(f64) -> f64>(f: &mut F, rule: &Rule, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let n = rule.xgk.len();
    let fc = f(center);
    let mut res_k = fc * rule.wgk[n - 1];
    // Both Gauss rules (7 and 15 points) include the centre.
    let mut res_g = fc * rule.wg[rule.wg.len() - 1];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 16];
    let mut fv2 = [0.0; 16];
    for j in 0..n - 1 {
        let dx = half * rule.xgk[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += rule.wgk[j] * (f1 + f2);
        res_abs += rule.wgk[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += rule.wg[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = rule.wgk[n - 1] * (fc - mean).abs();
    for j in 0..n - 1 {
        res_asc += rule.wgk[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integration of `f` over `(a, b)`; nodes never touch the endpoints.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    integrate_with_breaks(f, a, b, &[], cfg)
}

/// Like [`integrate`], but starts from panels split at the interior `breaks`.
/// Useful when the integrand's mass sits in a narrow, predictable region.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain("integrate", format!("invalid interval ({a}, {b})")));
    }
    let rule = cfg.rule();
    let mut knots: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.truncate(cfg.max_subdivisions.saturating_sub(1));
    let mut edges = Vec::with_capacity(knots.len() + 2);
    edges.push(a);
    edges.extend(knots);
    edges.push(b);
    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| {
            let (value, err) = gk_panel(&mut f, rule, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                err,
            }
        })
        .collect();
    let mut total: f64 = panels.iter().map(|p| p.value).sum();
    let mut total_err: f64 = panels.iter().map(|p| p.err).sum();
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::domain("integrate", "integrand produced a non-finite value"));
        }
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok((total, total_err));
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                value: total,
                err_est: total_err,
            });
        }
        let (worst, _) =
            panels.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, p)| if p.err > acc.1 { (i, p.err) } else { acc },
            );
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if p.b - p.a <= 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
            // Panel cannot be split further in floating point.
            return Err(Error::QuadratureNonConvergence {
                value: total,
                err_est: total_err,
            });
        }
        let (v1, e1) = gk_panel(&mut f, rule, p.a, mid);
        let (v2, e2) = gk_panel(&mut f, rule, mid, p.b);
        panels[worst] = Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
        };
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
        });
        total = panels.iter().map(|p| p.value).sum();
        total_err = panels.iter().map(|p| p.err).sum();
    }
}

/// Runs a fallible integrand; the first error it raises wins over whatever
/// the integrator reports.
pub(crate) fn integrate_fallible<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut first: Option<Error> = None;
    let out = integrate_with_breaks(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                first.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        breaks,
        cfg,
    );
    match first {
        Some(e) => Err(e),
        None => out,
    }
}

/// `∫₀¹ f(s) ds` with the adaptive panel rule; returns `(value, err_est)`.
pub fn integrate_unit_interval<F: FnMut(f64) -> f64>(f: F, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    integrate(f, 0.0, 1.0, cfg)
}

/// `∫₀^∞ f(r) dr` through `r = t / (1 - t)`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    integrate_unit_interval(
        |t| {
            let om = 1.0 - t;
            f(t / om) / (om * om)
        },
        cfg,
    )
}

/// Fallible `∫₀^∞ f(r) dr` with breakpoints given on the `r` axis.
pub(crate) fn integrate_half_line_fallible<F>(mut f: F, r_breaks: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let t_breaks: Vec<f64> = r_breaks.iter().filter(|r| **r > 0.0).map(|r| r / (1.0 + r)).collect();
    integrate_fallible(
        |t| {
            let om = 1.0 - t;
            Ok(f(t / om)? / (om * om))
        },
        0.0,
        1.0,
        &t_breaks,
        cfg,
    )
}
