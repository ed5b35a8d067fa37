//! Special functions used by the closed-form outage analysis.
//!
//! Everything here is restricted to the parameter ranges the analysis
//! actually produces: integer gamma shapes (Nakagami fading with integer m),
//! integer Bessel orders, and power-series coefficient tables of truncated
//! exponential sums raised to small integer powers.  The restriction buys
//! simple, fast evaluations with provable accuracy instead of a general
//! special-function library.

use thiserror::Error;

/// Errors for domain violations and overflow in table construction.
#[derive(Debug, Error, PartialEq)]
pub enum SpecFunError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("out of supported range: {0}")]
    OutOfRange(String),
    #[error("coefficient overflow at index {index}")]
    Overflow { index: usize },
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Natural log of n!, exact-to-rounding for small n, accumulated for large n.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 34 {
        // 34! still fits in u128, and the f64 cast keeps 53 correct bits.
        let mut f: u128 = 1;
        for k in 2..=n as u128 {
            f *= k;
        }
        (f as f64).ln()
    } else {
        let mut sum = ln_factorial(34);
        let mut comp = 0.0;
        for k in 35..=n {
            // Neumaier compensation keeps the error independent of n.
            let term = (k as f64).ln();
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        sum + comp
    }
}

/// Binomial coefficient, exact as long as the result fits in a u64.
pub fn binomial(n: u64, k: u64) -> Result<u64, SpecFunError> {
    if k > n {
        return Err(SpecFunError::InvalidParameter(format!(
            "binomial requires k <= n, got n={n} k={k}"
        )));
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Multiply before dividing: the running product is always integral.
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or(SpecFunError::Overflow { index: i as usize })?;
        acc /= i as u128;
    }
    u64::try_from(acc).map_err(|_| SpecFunError::Overflow { index: k as usize })
}

/// Regularized lower incomplete gamma function P(shape, x) for integer shape.
///
/// Equal to `1 - exp(-x) * sum_{k<shape} x^k / k!`, but evaluated through the
/// ascending series when `x < shape + 1` so small arguments keep full
/// relative accuracy instead of cancelling against 1.
pub fn regularized_lower_gamma(shape: u32, x: f64) -> Result<f64, SpecFunError> {
    if shape == 0 {
        return Err(SpecFunError::InvalidParameter(
            "gamma shape must be a positive integer".into(),
        ));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::InvalidParameter(format!(
            "gamma argument must be finite and non-negative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let a = shape as f64;
    if x < a + 1.0 {
        // P(a,x) = x^a e^-x / a! * sum_{n>=0} x^n / ((a+1)...(a+n))
        let ln_pref = a * x.ln() - x - ln_factorial(shape);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 1.0;
        while term > f64::EPSILON * sum {
            term *= x / (a + n);
            sum += term;
            n += 1.0;
        }
        Ok((ln_pref.exp() * sum).min(1.0))
    } else {
        // Complement is a short sum of decreasing positive terms.
        let mut term = (-x).exp();
        let mut q = term;
        for k in 1..shape {
            term *= x / k as f64;
            q += term;
        }
        Ok(1.0 - q)
    }
}

/// Scaled values (K0(x) e^x, K1(x) e^x).
///
/// Temme's series below x = 2, a Steed/Thompson-Barnett continued fraction
/// above.  Both are standard and keep relative error near machine precision.
fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let a = (x / 2.0).ln();
        let xx = x * x / 4.0;
        let mut f = -EULER_GAMMA - a;
        let mut p = 0.5;
        let mut q = 0.5;
        let mut coef = 1.0;
        let mut sum0 = f;
        let mut sum1 = 0.5;
        for k in 1..500 {
            let kf = k as f64;
            f = (kf * f + p + q) / (kf * kf);
            p /= kf;
            q /= kf;
            let h = p - kf * f;
            coef *= xx / kf;
            sum0 += coef * f;
            sum1 += coef * h;
            if coef * (f.abs() + h.abs()) < f64::EPSILON * sum0.abs() {
                break;
            }
        }
        let scale = x.exp();
        (sum0 * scale, 2.0 * sum1 / x * scale)
    } else {
        // CF2 for the ratio plus the normalising sum S, order 0.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..10_000 {
            a -= 2.0 * (i as f64 - 1.0);
            c = -a * c / i as f64;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < f64::EPSILON {
                break;
            }
        }
        h = a1 * h;
        let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
        let k1 = k0 * (x + 0.5 - h) / x;
        (k0, k1)
    }
}

fn check_bessel_args(order: i32, x: f64) -> Result<u32, SpecFunError> {
    if order.unsigned_abs() > 200 {
        return Err(SpecFunError::OutOfRange(format!(
            "Bessel order {order} outside supported |order| <= 200"
        )));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecFunError::InvalidParameter(format!(
            "Bessel argument must be finite and positive, got {x}"
        )));
    }
    Ok(order.unsigned_abs())
}

/// ln K_n(x) for every order n = 0..=max_order at once.
///
/// The upward recurrence K_{n+1} = K_{n-1} + (2n/x) K_n is forward-stable
/// (all terms positive); the running pair is renormalised by powers of two so
/// huge orders at small x never overflow before the log is taken.
pub fn ln_bessel_k_sequence(max_order: u32, x: f64) -> Result<Vec<f64>, SpecFunError> {
    check_bessel_args(max_order as i32, x)?;
    let (k0, k1) = bessel_k01_scaled(x);
    let mut out = Vec::with_capacity(max_order as usize + 1);
    out.push(k0.ln() - x);
    if max_order == 0 {
        return Ok(out);
    }
    out.push(k1.ln() - x);
    let mut prev = k0;
    let mut cur = k1;
    let mut exp2: i64 = 0;
    for n in 1..max_order as u64 {
        let next = prev + (2.0 * n as f64 / x) * cur;
        prev = cur;
        cur = next;
        if cur > 1e280 {
            let down = 2f64.powi(-600);
            cur *= down;
            prev *= down;
            exp2 += 600;
        }
        out.push(cur.ln() + exp2 as f64 * std::f64::consts::LN_2 - x);
    }
    Ok(out)
}

/// ln K_order(x).  Negative orders fold onto positive ones (K_-n = K_n).
pub fn ln_bessel_k(order: i32, x: f64) -> Result<f64, SpecFunError> {
    let n = check_bessel_args(order, x)?;
    Ok(*ln_bessel_k_sequence(n, x)?.last().unwrap())
}

/// Modified Bessel function of the second kind K_order(x).
///
/// May overflow to infinity for large orders at tiny arguments; use
/// [`ln_bessel_k`] when the magnitude itself is the quantity of interest.
pub fn bessel_k(order: i32, x: f64) -> Result<f64, SpecFunError> {
    Ok(ln_bessel_k(order, x)?.exp())
}

/// Coefficients of `(sum_{k < base_terms} (scale*t)^k / k!)^power` in t.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub power: u32,
    pub base_terms: u32,
    pub scale: f64,
    /// Length `power * (base_terms - 1) + 1`; all entries non-negative.
    pub coeffs: Vec<f64>,
}

impl CoeffTable {
    /// Evaluate the expanded polynomial at t (test and diagnostic helper).
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// Unevaluated double-double value hi + lo.  The recursion below mixes signs
/// and spans twenty orders of magnitude across the table, which costs plain
/// f64 a few thousand ulps at the tail; double-double keeps every emitted
/// coefficient comfortably inside 1e-12 relative error.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: (hi - s) + lo,
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        Dd::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::renorm(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = Dd::two_prod(self.hi, b);
        Dd::renorm(p.hi, p.lo + self.lo * b)
    }

    fn div_f64(self, b: f64) -> Dd {
        let q = self.hi / b;
        let r = Dd::two_prod(q, b);
        Dd::renorm(q, ((self.hi - r.hi) - r.lo + self.lo) / b)
    }
}

/// Power-series coefficients of a truncated exponential sum raised to an
/// integer power, by the standard recursion for powers of a series:
///
/// theta_0 = 1,
/// theta_x = (1/x) * sum_b (b*(power+1) - x) * w_b * theta_{x-b},
///
/// where w_b = scale^b / b! are the base coefficients.
pub fn multinomial_coeffs(
    power: u32,
    base_terms: u32,
    scale: f64,
) -> Result<CoeffTable, SpecFunError> {
    if power < 1 || base_terms < 1 {
        return Err(SpecFunError::InvalidParameter(format!(
            "power and base_terms must be >= 1, got power={power} base_terms={base_terms}"
        )));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(SpecFunError::InvalidParameter(format!(
            "scale must be finite and positive, got {scale}"
        )));
    }
    let len = power as usize * (base_terms as usize - 1) + 1;
    let mut w = Vec::with_capacity(base_terms as usize);
    w.push(Dd::from(1.0));
    for b in 1..base_terms as usize {
        w.push(w[b - 1].mul_f64(scale).div_f64(b as f64));
    }
    let mut theta = Vec::with_capacity(len);
    theta.push(Dd::from(1.0));
    let mut coeffs = Vec::with_capacity(len);
    coeffs.push(1.0);
    for x in 1..len {
        let mut acc = Dd::ZERO;
        for b in 1..=x.min(base_terms as usize - 1) {
            let k = b as f64 * (power as f64 + 1.0) - x as f64;
            acc = acc.add(w[b].mul(theta[x - b]).mul_f64(k));
        }
        let t = acc.div_f64(x as f64);
        if !t.hi.is_finite() {
            return Err(SpecFunError::Overflow { index: x });
        }
        theta.push(t);
        coeffs.push(t.hi);
    }
    Ok(CoeffTable {
        power,
        base_terms,
        scale,
        coeffs,
    })
}
