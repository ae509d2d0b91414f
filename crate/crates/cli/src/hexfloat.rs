//! Exact text encoding of f64 as C99-style hexadecimal floats.
//!
//! Only the canonical form produced by [`format_hex`] is accepted back:
//! `[-]0x1.<hex>p±e` for normal numbers, `[-]0x0.<hex>p-1022` for
//! subnormals, `[-]0x0p+0` for zero, plus `inf`, `-inf` and `nan`.

const MANTISSA_BITS: u32 = 52;
const MANTISSA_MASK: u64 = (1 << MANTISSA_BITS) - 1;
const EXP_BIAS: i64 = 1023;

pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> MANTISSA_BITS) & 0x7ff) as i64;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, 1 - EXP_BIAS)
    } else {
        (1, biased - EXP_BIAS)
    };
    let digits = format!("{mantissa:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

pub fn parse_hex(s: &str) -> Option<f64> {
    match s {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x")?;
    let (mantissa_text, exp_text) = rest.split_once('p')?;
    if !exp_text.starts_with(['+', '-']) {
        return None;
    }
    let exp: i64 = exp_text.parse().ok()?;
    let (lead, frac) = match mantissa_text.split_once('.') {
        Some((l, f)) if !f.is_empty() => (l, f),
        Some(_) => return None,
        None => (mantissa_text, ""),
    };
    if frac.len() > 13
        || !frac
            .bytes()
            .all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
    {
        return None;
    }
    let mantissa = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(&format!("{frac:0<13}"), 16).ok()?
    };
    let sign_bit = (negative as u64) << 63;
    let bits = match lead {
        "1" => {
            let biased = exp + EXP_BIAS;
            if !(1..=2046).contains(&biased) {
                return None;
            }
            sign_bit | ((biased as u64) << MANTISSA_BITS) | mantissa
        }
        "0" if mantissa == 0 && exp == 0 => sign_bit,
        "0" if mantissa != 0 && exp == 1 - EXP_BIAS => sign_bit | mantissa,
        _ => return None,
    };
    Some(f64::from_bits(bits))
}
