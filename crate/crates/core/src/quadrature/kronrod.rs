//! 15-point Gauss–Kronrod rule with the embedded 7-point Gauss rule.

use std::sync::OnceLock;

use crate::error::Result;

/// Kronrod abscissae on [0, 1], largest first; index 7 is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod abscissae (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 abscissae on [-1, 1] in ascending order.
pub(crate) fn nodes() -> [f64; 15] {
    let mut x = [0.0; 15];
    for i in 0..7 {
        x[i] = -XGK[i];
        x[14 - i] = XGK[i];
    }
    x
}

/// Kronrod weights aligned with [`nodes`].
pub(crate) fn kronrod_weights() -> [f64; 15] {
    let mut w = [0.0; 15];
    for i in 0..7 {
        w[i] = WGK[i];
        w[14 - i] = WGK[i];
    }
    w[7] = WGK[7];
    w
}

/// Gauss weights aligned with [`nodes`] (zero at Kronrod-only points).
pub(crate) fn gauss_weights() -> [f64; 15] {
    let mut w = [0.0; 15];
    for (j, i) in [1usize, 3, 5].into_iter().enumerate() {
        w[i] = WG[j];
        w[14 - i] = WG[j];
    }
    w[7] = WG[3];
    w
}

/// One application of the rule on [a, b].
#[derive(Debug, Clone, Copy)]
pub(crate) struct RuleResult {
    pub kronrod: f64,
    pub gauss: f64,
    pub resabs: f64,
    pub resasc: f64,
}

impl RuleResult {
    /// QUADPACK error estimate.
    pub fn error(&self) -> f64 {
        let mut err = (self.kronrod - self.gauss).abs();
        if self.resasc != 0.0 && err != 0.0 {
            err = self.resasc * (200.0 * err / self.resasc).powf(1.5).min(1.0);
        }
        if self.resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * self.resabs);
        }
        err
    }
}

/// Applies the rule to precomputed values at the 15 mapped nodes.
pub(crate) fn apply(values: &[f64; 15], half: f64) -> RuleResult {
    let wk = kronrod_weights();
    let wg = gauss_weights();
    let mut k = 0.0;
    let mut g = 0.0;
    let mut abs = 0.0;
    for i in 0..15 {
        k += wk[i] * values[i];
        g += wg[i] * values[i];
        abs += wk[i] * values[i].abs();
    }
    let mean = 0.5 * k;
    let asc: f64 = (0..15).map(|i| wk[i] * (values[i] - mean).abs()).sum();
    RuleResult {
        kronrod: k * half,
        gauss: g * half,
        resabs: abs * half.abs(),
        resasc: asc * half.abs(),
    }
}

pub(crate) fn rule<F>(f: &F, a: f64, b: f64) -> Result<RuleResult>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let half = 0.5 * (b - a);
    let centre = 0.5 * (a + b);
    let mut values = [0.0; 15];
    for (v, x) in values.iter_mut().zip(nodes()) {
        *v = f(centre + half * x)?;
    }
    Ok(apply(&values, half))
}

/// `S[j][m] = ∫_{-1}^{x_j} L_m(x) dx` for the Lagrange basis on the 15
/// nodes. Multiplying node values by `S` (and the half-width) gives the
/// running integral from the left end to every node, exact for degree-14
/// polynomials.
pub(crate) fn partial_integration_matrix() -> &'static [[f64; 15]; 15] {
    static MATRIX: OnceLock<[[f64; 15]; 15]> = OnceLock::new();
    MATRIX.get_or_init(|| {
        let x = nodes();
        let wk = kronrod_weights();
        let lagrange = |m: usize, y: f64| -> f64 {
            let mut p = 1.0;
            for i in 0..15 {
                if i != m {
                    p *= (y - x[i]) / (x[m] - x[i]);
                }
            }
            p
        };
        let mut s = [[0.0; 15]; 15];
        for j in 0..15 {
            // K15 on [-1, x_j] integrates degree ≤ 22 exactly.
            let half = 0.5 * (x[j] + 1.0);
            let centre = 0.5 * (x[j] - 1.0);
            for m in 0..15 {
                s[j][m] = half
                    * (0..15)
                        .map(|i| wk[i] * lagrange(m, centre + half * x[i]))
                        .sum::<f64>();
            }
        }
        s
    })
}
