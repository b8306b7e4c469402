//! Fixed-point coin and token amounts with 18 decimal places.

use num_bigint::BigUint;
use thiserror::Error;

pub const DECIMALS: u32 = 18;
pub const UNIT: u128 = 1_000_000_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmountError {
    #[error("`{0}` is not a decimal amount")]
    Parse(String),
    #[error("`{0}` has more than 18 fractional digits")]
    TooPrecise(String),
    #[error("`{0}` overflows")]
    Overflow(String),
}

/// Parses `"10"`, `"0.02"`, `"1.000001"` into 18-decimal fixed point.
pub fn parse_amount(s: &str) -> Result<u128, AmountError> {
    let s = s.trim();
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() || !digits_ok(int_part) || !digits_ok(frac_part)
    {
        return Err(AmountError::Parse(s.to_string()));
    }
    if frac_part.len() > DECIMALS as usize {
        return Err(AmountError::TooPrecise(s.to_string()));
    }
    let int: u128 = if int_part.is_empty() {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| AmountError::Overflow(s.to_string()))?
    };
    let mut frac: u128 = 0;
    if !frac_part.is_empty() {
        frac = frac_part
            .parse()
            .map_err(|_| AmountError::Parse(s.to_string()))?;
        frac *= 10u128.pow(DECIMALS - frac_part.len() as u32);
    }
    int.checked_mul(UNIT)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(|| AmountError::Overflow(s.to_string()))
}

pub fn format_amount(v: u128) -> String {
    let int = v / UNIT;
    let frac = v % UNIT;
    if frac == 0 {
        return int.to_string();
    }
    let f = format!("{frac:018}");
    format!("{int}.{}", f.trim_end_matches('0'))
}

/// `floor(a * b / c)` without intermediate overflow.
pub fn mul_div_floor(a: u128, b: u128, c: u128) -> u128 {
    assert!(c != 0, "mul_div_floor by zero");
    match a.checked_mul(b) {
        Some(p) => p / c,
        None => {
            let q = BigUint::from(a) * BigUint::from(b) / BigUint::from(c);
            u128::try_from(q).expect("mul_div_floor result fits in u128")
        }
    }
}
