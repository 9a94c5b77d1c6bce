use super::{BinLabel, LabelError};

/// Reads a model completion as a label.
///
/// Accepts an integer or a decimal with exactly one fractional digit,
/// surrounded by any whitespace; the value is clamped into `[0.0, 9.9]`.
pub fn parse_completion(text: &str) -> Result<BinLabel, LabelError> {
    let bad = || LabelError::Unparseable(text.to_string());
    let t = text.trim();
    let (negative, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut tenths: u64 = 0;
    for b in int_part.bytes() {
        // saturate; anything this large clamps to 9.9 anyway
        tenths = tenths.saturating_mul(10).saturating_add(u64::from(b - b'0'));
    }
    tenths = tenths.saturating_mul(10);
    match frac_part {
        None => {}
        Some(f) if f.len() == 1 && f.as_bytes()[0].is_ascii_digit() => {
            tenths = tenths.saturating_add(u64::from(f.as_bytes()[0] - b'0'));
        }
        Some(_) => return Err(bad()),
    }
    if negative {
        return Ok(BinLabel::MIN);
    }
    Ok(BinLabel::from_tenths(tenths.min(99) as u8).expect("clamped into range"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(s: &str) -> String {
        parse_completion(s).unwrap().to_string()
    }

    #[test]
    fn accepted_forms() {
        assert_eq!(ok("9.0"), "9.0");
        assert_eq!(ok(" 2.1\n"), "2.1");
        assert_eq!(ok("7"), "7.0");
        assert_eq!(ok("+4.5"), "4.5");
        assert_eq!(ok("12.5"), "9.9");
        assert_eq!(ok("-0.3"), "0.0");
        assert_eq!(ok("99999999999999999999999"), "9.9");
    }

    #[test]
    fn rejected_forms() {
        for s in ["high", "", " ", "9.", ".5", "9.05", "9,0", "1e1", "9.0 high", "--1", "4.x"] {
            assert!(
                matches!(parse_completion(s), Err(LabelError::Unparseable(_))),
                "{s:?} should be rejected"
            );
        }
    }

    #[test]
    fn inverse_of_render() {
        for label in BinLabel::all() {
            assert_eq!(parse_completion(&label.to_string()).unwrap(), label);
        }
    }
}
