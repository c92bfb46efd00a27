//! Engineering-notation parsing and canonical float formatting.
//!
//! All internal quantities are SI base units; suffixes exist only at the
//! netlist/CLI boundary. Canonical output uses Rust's shortest round-trip
//! exponent form so serialized values reparse bit-exactly.

/// Parse a number with an optional engineering suffix (`1.013n`, `4505.6f`,
/// `5G`, `2.59`, `1e-12`). Unit letters (`H`, `F`, `V`, `Hz`, `s`, `Ohm`)
/// after the suffix are accepted and ignored.
pub fn parse_eng(text: &str) -> Option<f64> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    // Longest numeric prefix parseable as f64.
    let mut split = text.len();
    loop {
        if text[..split].parse::<f64>().is_ok() {
            break;
        }
        if split == 0 {
            return None;
        }
        split -= 1;
    }
    let value: f64 = text[..split].parse().ok()?;
    let rest = &text[split..];
    if rest.is_empty() {
        return Some(value);
    }
    let mut chars = rest.chars();
    let suffix = chars.next().unwrap();
    let tail = chars.as_str();
    let mult = match suffix {
        'a' => 1e-18,
        'f' => 1e-15,
        'p' => 1e-12,
        'n' => 1e-9,
        'u' => 1e-6,
        'm' => 1e-3,
        'k' => 1e3,
        'M' => 1e6,
        'G' => 1e9,
        'T' => 1e12,
        // Bare unit letter, no scaling.
        'H' | 'F' | 'V' | 's' | 'W' => 1.0,
        _ => return None,
    };
    if !tail.is_empty() && !is_unit_tail(suffix, tail) {
        return None;
    }
    Some(value * mult)
}

fn is_unit_tail(suffix: char, tail: &str) -> bool {
    // Accept things like "nH", "pF", "GHz", "ps", "mV", "kOhm".
    if suffix == 'H' && tail == "z" {
        return true;
    }
    matches!(tail, "H" | "F" | "V" | "s" | "W" | "Hz" | "Ohm")
}

/// Canonical formatting: shortest representation in exponent form.
/// `parse_eng(&format_canonical(x)) == Some(x)` bit-exactly for finite x.
pub fn format_canonical(value: f64) -> String {
    format!("{:e}", value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plain_numbers() {
        assert_eq!(parse_eng("2.59"), Some(2.59));
        assert_eq!(parse_eng("1e-12"), Some(1e-12));
        assert_eq!(parse_eng("-3.3"), Some(-3.3));
    }

    #[test]
    fn suffixes() {
        assert_eq!(parse_eng("1n"), Some(1e-9));
        assert_eq!(parse_eng("1.013nH"), Some(1.013 * 1e-9));
        assert_eq!(parse_eng("2pF"), Some(2.0 * 1e-12));
        assert_eq!(parse_eng("5GHz"), Some(5.0 * 1e9));
        assert_eq!(parse_eng("100ps"), Some(100.0 * 1e-12));
        assert_eq!(parse_eng("4505.6f"), Some(4505.6 * 1e-15));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_eng(""), None);
        assert_eq!(parse_eng("abc"), None);
        assert_eq!(parse_eng("1.0q"), None);
        assert_eq!(parse_eng("1nX"), None);
    }

    proptest! {
        #[test]
        fn canonical_round_trip(x in prop::num::f64::NORMAL) {
            let s = format_canonical(x);
            prop_assert_eq!(parse_eng(&s), Some(x));
        }
    }
}
