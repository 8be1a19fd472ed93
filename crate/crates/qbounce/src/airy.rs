//! Airy function of the first kind.
//!
//! Evaluates Ai(x), Ai'(x) and the negative zeros a_n from scratch. Two
//! branches cover the real line: the Maclaurin double series for
//! |x| <= X_SWITCH, carried in double-double arithmetic so the severe
//! cancellation of the oscillatory region costs no accuracy, and the
//! standard asymptotic expansions beyond (exponentially decaying for
//! x -> +inf, oscillatory for x -> -inf). Only Ai is provided: the bouncer
//! boundary condition (decay at +inf) never selects Bi.
//!
//! Accuracy: absolute error <= 1e-12 for |x| <= 10, relative error
//! <= 1e-10 for 10 < |x| <= 100; zeros to 1e-10.

use crate::{Error, Result};

/// Branch switch point: Maclaurin series inside, asymptotics outside.
const X_SWITCH: f64 = 9.0;

/// Largest zero index with a tested accuracy guarantee.
pub const MAX_ZERO_INDEX: usize = 100;

const NEWTON_BUDGET: usize = 40;

/// Ai and Ai' at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
}

/// Ai(x). NaN propagates; infinities map to the limit 0.
pub fn airy_ai(x: f64) -> f64 {
    airy_ai_both(x).ai
}

/// Ai'(x). NaN propagates; infinities map to the limit 0.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_ai_both(x).ai_prime
}

/// Ai(x) and Ai'(x) in one evaluation (both branches produce the pair
/// at no extra cost).
pub fn airy_ai_both(x: f64) -> AiryValue {
    if x.is_nan() {
        return AiryValue { x, ai: f64::NAN, ai_prime: f64::NAN };
    }
    if x.is_infinite() {
        return AiryValue { x, ai: 0.0, ai_prime: 0.0 };
    }
    let (ai, ai_prime) = if x.abs() <= X_SWITCH {
        series_ai(x)
    } else if x > 0.0 {
        asymptotic_pos(x)
    } else {
        asymptotic_neg(x)
    };
    AiryValue { x, ai, ai_prime }
}

/// n-th negative zero of Ai (a_1 = -2.3381..., a_2 = -4.0879...).
///
/// Seeds from a_n ~ -(3 pi (4n-1)/8)^(2/3) and refines by Newton
/// iteration on Ai; accurate to better than 1e-10 for n <= 100.
pub fn airy_zero(n: usize) -> Result<f64> {
    if n == 0 || n > MAX_ZERO_INDEX {
        return Err(Error::LevelOutOfRange { n, max: MAX_ZERO_INDEX });
    }
    let t = 3.0 * std::f64::consts::PI * (4 * n - 1) as f64 / 8.0;
    let mut x = -t.powf(2.0 / 3.0);
    for _ in 0..NEWTON_BUDGET {
        let v = airy_ai_both(x);
        let dx = v.ai / v.ai_prime;
        x -= dx;
        if dx.abs() <= 1e-14 * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::ZeroNoConvergence { n, budget: NEWTON_BUDGET })
}

// ---------------------------------------------------------------------------
// Maclaurin branch.
//
// With f, g the standard Airy pair (f(0)=1, f'(0)=0; g(0)=0, g'(0)=1):
//   Ai  = c1 f  - c2 g          c1 = Ai(0),  c2 = -Ai'(0)
//   Ai' = c1 f' - c2 g'
// Term recurrences in x^3 (k = 1, 2, ...):
//   f:  t_k = t_{k-1} x^3 / ((3k)(3k-1)),    t_0 = 1
//   g:  u_k = u_{k-1} x^3 / ((3k)(3k+1)),    u_0 = x
//   f': p_k = p_{k-1} x^3 / ((3k-3)(3k-1)),  p_1 = x^2/2
//   g': q_k = q_{k-1} x^3 / ((3k-2)(3k)),    q_0 = 1
// At x = -9 the largest term is ~4e15 against a result of order 0.1;
// double-double carries ~32 digits, so the cancellation is harmless.

// Ai(0) and -Ai'(0) split into double-double constants.
const C1: Dd = Dd { hi: 0.3550280538878172, lo: 2.05233632436212e-17 };
const C2: Dd = Dd { hi: 0.2588194037928068, lo: -2.522243111610832e-17 };

fn series_ai(x: f64) -> (f64, f64) {
    let x3 = Dd::product(x, x).mul_f64(x);

    let mut t = Dd::from(1.0);
    let mut u = Dd::from(x);
    let mut p = Dd::product(x, x).mul_f64(0.5);
    let mut q = Dd::from(1.0);

    let mut f = t;
    let mut g = u;
    let mut fp = p;
    let mut gp = q;

    for k in 1..=200usize {
        let k3 = (3 * k) as f64;
        t = t.mul(x3).div_f64(k3 * (k3 - 1.0));
        u = u.mul(x3).div_f64(k3 * (k3 + 1.0));
        q = q.mul(x3).div_f64((k3 - 2.0) * k3);
        f = f.add(t);
        g = g.add(u);
        gp = gp.add(q);
        if k >= 2 {
            p = p.mul(x3).div_f64((k3 - 3.0) * (k3 - 1.0));
            fp = fp.add(p);
        }
        if t.hi.abs() < 1e-40 && u.hi.abs() < 1e-40 {
            break;
        }
    }

    let ai = C1.mul(f).sub(C2.mul(g)).to_f64();
    let ai_prime = C1.mul(fp).sub(C2.mul(gp)).to_f64();
    (ai, ai_prime)
}

// ---------------------------------------------------------------------------
// Asymptotic branch (zeta = (2/3)|x|^(3/2)).
//
// Coefficient recurrence: u_0 = 1,
//   u_k = u_{k-1} (3k-5/2)(3k-3/2)(3k-1/2) / (54 k (k-1/2))
// and v_k = -(6k+1)/(6k-1) u_k for the derivative sums. Truncation is at
// the smallest term: with |x| >= 9 (zeta >= 18) that term is ~e^(-2 zeta),
// below 1e-15 of the leading one.

const SQRT_PI: f64 = 1.7724538509055160;

fn asym_coeff(k: usize, prev: f64) -> f64 {
    let kf = k as f64;
    prev * (3.0 * kf - 2.5) * (3.0 * kf - 1.5) * (3.0 * kf - 0.5) / (54.0 * kf * (kf - 0.5))
}

fn asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut u = 1.0;
    let mut sign = 1.0;
    let mut sum_ai = 1.0;
    let mut sum_aip = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..=60usize {
        u = asym_coeff(k, u);
        let term = u / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        sign = -sign;
        let v = -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * u;
        sum_ai += sign * term;
        sum_aip += sign * v / zeta.powi(k as i32);
        if term.abs() < 1e-18 {
            break;
        }
    }
    let pre = (-zeta).exp() / (2.0 * SQRT_PI);
    let ai = pre / x.powf(0.25) * sum_ai;
    let aip = -pre * x.powf(0.25) * sum_aip;
    (ai, aip)
}

fn asymptotic_neg(x: f64) -> (f64, f64) {
    let y = -x;
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    // Split the u and v sums into even (cos companion) and odd (sin
    // companion) parts; the alternation is (-1)^k in the pair index.
    let mut u = 1.0;
    let mut ue = 1.0; // sum of (-1)^k u_{2k} zeta^{-2k}
    let mut uo = 0.0; // sum of (-1)^k u_{2k+1} zeta^{-2k-1}
    let mut ve = 1.0;
    let mut vo = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=60usize {
        u = asym_coeff(k, u);
        let term = u / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        let v_term = -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * term;
        // pair index k/2, companion selected by parity of k
        let flip = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            ue += flip * term;
            ve += flip * v_term;
        } else {
            uo += flip * term;
            vo += flip * v_term;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let (sin_p, cos_p) = (zeta - std::f64::consts::FRAC_PI_4).sin_cos();
    let q = y.powf(0.25);
    let ai = (cos_p * ue + sin_p * uo) / (SQRT_PI * q);
    let aip = (sin_p * ve - cos_p * vo) * q / SQRT_PI;
    (ai, aip)
}

// ---------------------------------------------------------------------------
// Double-double arithmetic: an unevaluated sum hi + lo with |lo| <= ulp(hi)/2,
// giving ~32 significant digits. Only the handful of operations the series
// needs. Products rely on the correctly rounded `f64::mul_add`.

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two f64 as a double-double.
    #[inline]
    fn product(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(Dd { hi: -o.hi, lo: -o.lo })
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    fn mul_f64(self, f: f64) -> Dd {
        let (p, e) = two_prod(self.hi, f);
        let (hi, lo) = quick_two_sum(p, e + self.lo * f);
        Dd { hi, lo }
    }

    #[inline]
    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = ((self.hi - p) - e) + self.lo;
        let (hi, lo) = quick_two_sum(q1, r / d);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values frozen from a 30-digit evaluation of the Maclaurin
    // series (small |x|) and of the full asymptotic expansion (large |x|),
    // cross-checked against each other in the overlap region.
    const REFERENCE: [(f64, f64, f64); 26] = [
        (-20.0, -0.17640612707798469, 0.89286285673647124),
        (-15.5, -0.16644795409041977, 0.90493793543021220),
        (-10.0, 0.040241238486443191, 0.99626504413279006),
        (-9.5, 0.31910324771912820, -0.10809531881187124),
        (-9.0, -0.022133721547341404, -0.97566398092633159),
        (-8.5, -0.33029023763020888, -0.032313348284639136),
        (-7.0, 0.18428083525050564, -0.77100816841012655),
        (-5.0, 0.35076100902411432, 0.32719281855444314),
        (-2.5, -0.11232506769296609, 0.67885273426479436),
        (-1.0, 0.53556088329235212, -0.010160567116645209),
        (-0.5, 0.47572809161053959, -0.20408167033954739),
        (0.0, 0.35502805388781724, -0.25881940379280680),
        (0.5, 0.23169360648083349, -0.22491053266468389),
        (1.0, 0.13529241631288142, -0.15914744129679321),
        (2.0, 0.034924130423274379, -0.053090384433653632),
        (3.5, 0.0025840987869896350, -0.0050044139679525828),
        (5.0, 0.00010834442813607442, -0.00024741389086846248),
        (7.0, 7.4921288639971671e-7, -2.0081508947387920e-6),
        (8.5, 1.0997009755195507e-8, -3.2377254404476023e-8),
        (9.0, 2.4711684308724898e-9, -7.4806413896589464e-9),
        (9.5, 5.3302637046174916e-10, -1.6566394593740666e-9),
        (10.0, 1.1047532552898686e-10, -3.5206336767389236e-10),
        (12.0, 1.3931846888753608e-13, -4.8547365549853085e-13),
        (25.0, 8.1160268246913867e-38, -4.0660893372432810e-37),
        (50.0, 4.5849417240748285e-104, -3.2443318198287993e-103),
        (100.0, 2.6344821520881845e-291, -2.6351403616044099e-290),
    ];

    const ZEROS: [f64; 10] = [
        -2.338107410459767,
        -4.0879494441309706,
        -5.5205598280955511,
        -6.786708090071759,
        -7.9441335871208531,
        -9.0226508533409804,
        -10.040174341558086,
        -11.008524303733263,
        -11.936015563236263,
        -12.828776752865757,
    ];

    #[test]
    fn reference_values_small_x() {
        for &(x, ai, aip) in REFERENCE.iter().filter(|r| r.0.abs() <= 10.0) {
            let v = airy_ai_both(x);
            assert!(
                (v.ai - ai).abs() <= 1e-12,
                "Ai({x}): got {}, want {ai}",
                v.ai
            );
            assert!(
                (v.ai_prime - aip).abs() <= 1e-12,
                "Ai'({x}): got {}, want {aip}",
                v.ai_prime
            );
        }
    }

    #[test]
    fn reference_values_large_x() {
        for &(x, ai, aip) in REFERENCE.iter().filter(|r| r.0.abs() > 10.0) {
            let v = airy_ai_both(x);
            assert!(
                ((v.ai - ai) / ai).abs() <= 1e-10,
                "Ai({x}): got {}, want {ai}",
                v.ai
            );
            assert!(
                ((v.ai_prime - aip) / aip).abs() <= 1e-10,
                "Ai'({x}): got {}, want {aip}",
                v.ai_prime
            );
        }
    }

    #[test]
    fn value_at_origin() {
        // Ai(0) = 3^(-2/3)/Gamma(2/3), Ai'(0) = -3^(-1/3)/Gamma(1/3)
        assert!((airy_ai(0.0) - 0.3550280538878172).abs() < 1e-15);
        assert!((airy_ai_prime(0.0) + 0.2588194037928068).abs() < 1e-15);
    }

    #[test]
    fn decays_for_large_positive_x() {
        assert!(airy_ai(10.0) < 1e-9);
        assert!(airy_ai(10.0) > 0.0);
    }

    #[test]
    fn strictly_decreasing_and_positive_on_nonnegative_axis() {
        let ai0 = airy_ai(0.0);
        let mut prev = ai0;
        let mut x = 0.05;
        while x <= 20.0 {
            let v = airy_ai(x);
            assert!(v > 0.0 && v < ai0, "Ai({x}) = {v} out of (0, Ai(0))");
            assert!(v < prev, "Ai not decreasing at {x}");
            assert!(airy_ai_prime(x) < 0.0);
            prev = v;
            x += 0.05;
        }
    }

    #[test]
    fn first_zero_and_slope_there() {
        let a1 = airy_zero(1).unwrap();
        assert!((a1 - ZEROS[0]).abs() < 1e-12);
        assert!(airy_ai(a1).abs() < 1e-10);
        assert!((airy_ai_prime(a1).abs() - 0.7012108227206913).abs() < 1e-10);
    }

    #[test]
    fn first_ten_zeros() {
        for (i, &want) in ZEROS.iter().enumerate() {
            let got = airy_zero(i + 1).unwrap();
            assert!(
                (got - want).abs() < 1e-11,
                "a_{}: got {got}, want {want}",
                i + 1
            );
        }
    }

    #[test]
    fn zeros_are_ordered_with_nonzero_slope() {
        let mut prev = 0.0;
        for n in 1..=50 {
            let a = airy_zero(n).unwrap();
            assert!(a < prev, "a_{n} not below a_{}", n - 1);
            assert!(airy_ai(a).abs() <= 1e-9, "residual at a_{n}");
            // zeros of Ai and Ai' interlace, so the slope stays away from 0
            assert!(airy_ai_prime(a).abs() > 0.1);
            prev = a;
        }
    }

    #[test]
    fn high_zero_indices() {
        assert!((airy_zero(50).unwrap() - -38.021008677255254).abs() < 1e-10);
        assert!((airy_zero(100).unwrap() - -60.455557274116699).abs() < 1e-10);
    }

    #[test]
    fn zero_index_bounds() {
        assert!(matches!(airy_zero(0), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(airy_zero(101), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn ode_residual_by_central_differences() {
        // Ai'' = x Ai, checked with step 1e-3 over [-20, 5].
        let h = 1e-3;
        let mut x = -20.0;
        while x <= 5.0 {
            let second = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
            let res = (second - x * airy_ai(x)).abs();
            assert!(res <= 1e-6, "ODE residual {res} at x = {x}");
            x += 0.25;
        }
    }

    #[test]
    fn branches_agree_in_overlap_windows() {
        for i in 0..=20 {
            let x = 8.5 + 0.05 * i as f64;
            let (s, sp) = series_ai(x);
            let (a, ap) = asymptotic_pos(x);
            assert!((s - a).abs() <= 1e-11, "Ai branch gap at {x}");
            assert!((sp - ap).abs() <= 1e-11, "Ai' branch gap at {x}");
            let (s, sp) = series_ai(-x);
            let (a, ap) = asymptotic_neg(-x);
            assert!((s - a).abs() <= 1e-11, "Ai branch gap at {}", -x);
            assert!((sp - ap).abs() <= 1e-11, "Ai' branch gap at {}", -x);
        }
    }

    #[test]
    fn non_finite_inputs() {
        assert!(airy_ai(f64::NAN).is_nan());
        assert_eq!(airy_ai(f64::INFINITY), 0.0);
        assert_eq!(airy_ai(f64::NEG_INFINITY), 0.0);
    }
}
