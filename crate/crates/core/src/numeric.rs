use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the certified code paths.
pub type Rat = Ratio<BigInt>;

pub fn rat_i64(n: i64, d: i64) -> Rat {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_u(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// x^e by binary exponentiation. `Ratio::pow` takes an `i32`; this keeps
/// large truncation depths out of the cast.
pub fn pow_rat(x: &Rat, e: u64) -> Rat {
    let mut base = x.clone();
    let mut e = e;
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Parses a nonnegative rational from `p/q`, a decimal like `0.25`, or an
/// integer literal.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::input("empty number"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad numerator in '{s}'")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad denominator in '{s}'")))?;
        if q.is_zero() {
            return Err(Error::input(format!("zero denominator in '{s}'")));
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int = if int.is_empty() { "0" } else { int };
        let digits = frac.len() as u32;
        if frac.chars().any(|c| !c.is_ascii_digit()) {
            return Err(Error::input(format!("bad decimal '{s}'")));
        }
        let int: BigInt = int
            .parse()
            .map_err(|_| Error::input(format!("bad decimal '{s}'")))?;
        let frac: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse()
                .map_err(|_| Error::input(format!("bad decimal '{s}'")))?
        };
        let scale = BigInt::from(10u32).pow(digits);
        let neg = int.is_negative() || s.trim_start().starts_with('-');
        let num = if neg { &int * &scale - &frac } else { &int * &scale + &frac };
        return Ok(Ratio::new(num, scale));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::input(format!("bad number '{s}'")))?;
    Ok(Rat::from_integer(n))
}

/// Rounding direction for decimal rendering of exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

/// Significant digits kept when rendering certified rational bounds.
pub const REPORT_DIGITS: usize = 36;

/// Renders `x` as a decimal string with `sig` significant digits, rounding in
/// the requested direction, and reports whether the rendering is exact.
///
/// Certified lower bounds are rendered with `Round::Down` and upper bounds
/// with `Round::Up`, so the printed interval still contains the true value.
pub fn decimal_str(x: &Rat, sig: usize, round: Round) -> (String, bool) {
    assert!(sig > 0);
    if x.is_zero() {
        return ("0".to_string(), true);
    }
    let neg = x.is_negative();
    let x_abs = x.abs();
    // Effective direction on the magnitude: rounding a negative value down
    // means rounding its magnitude up.
    let mag_up = match (neg, round) {
        (false, Round::Up) | (true, Round::Down) => true,
        _ => false,
    };
    let p = x_abs.numer().clone();
    let q = x_abs.denom().clone();
    // Find shift s with 10^(sig-1) <= floor(p*10^s/q) < 10^sig.
    let ten = BigInt::from(10u32);
    let lo = ten.pow(sig as u32 - 1);
    let hi = ten.pow(sig as u32);
    let mut s: i64 = (decimal_digits(&q) as i64) - (decimal_digits(&p) as i64) + sig as i64 - 1;
    let mut m;
    let mut rem;
    loop {
        let scaled = if s >= 0 {
            &p * ten.pow(s as u32)
        } else {
            p.clone()
        };
        let denom = if s >= 0 { q.clone() } else { &q * ten.pow((-s) as u32) };
        m = &scaled / &denom;
        rem = &scaled - &m * &denom;
        if m < lo {
            s += 1;
        } else if m >= hi {
            s -= 1;
        } else {
            break;
        }
    }
    let exact = rem.is_zero();
    if !exact && mag_up {
        m += 1u32;
        if m == hi {
            // 999..9 rounded up; renormalize to 100..0 x 10.
            m = lo.clone();
            s -= 1;
        }
    }
    let digits = m.to_string();
    let body = place_point(&digits, s);
    let sign = if neg { "-" } else { "" };
    (format!("{sign}{body}"), exact)
}

fn decimal_digits(n: &BigInt) -> usize {
    n.abs().to_string().len()
}

/// Places a decimal point so the digit string `d` denotes d * 10^(-s),
/// then trims trailing fractional zeros.
fn place_point(d: &str, s: i64) -> String {
    if s <= 0 {
        let mut out = d.to_string();
        out.push_str(&"0".repeat((-s) as usize));
        return out;
    }
    let s = s as usize;
    let raw = if s >= d.len() {
        format!("0.{}{}", "0".repeat(s - d.len()), d)
    } else {
        format!("{}.{}", &d[..d.len() - s], &d[d.len() - s..])
    };
    let trimmed = raw.trim_end_matches('0');
    let trimmed = trimmed.strip_suffix('.').unwrap_or(trimmed);
    trimmed.to_string()
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
