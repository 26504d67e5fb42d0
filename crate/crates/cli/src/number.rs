//! Integer arguments in decimal or `AeK` shorthand, parsed without floats.

pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, Some(e)),
        None => (s, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(mant) || exp.is_some_and(|e| !digits(e)) {
        return Err(format!("`{s}` is not a nonnegative integer"));
    }
    let too_big = || format!("`{s}` does not fit in 64 bits");
    let mut v: u64 = mant.parse().map_err(|_| too_big())?;
    if let Some(e) = exp {
        let e: u32 = e.parse().map_err(|_| too_big())?;
        let scale = 10u64.checked_pow(e).ok_or_else(too_big)?;
        v = v.checked_mul(scale).ok_or_else(too_big)?;
    }
    Ok(v)
}
