//! Canonical text formatting for file outputs.
//!
//! Every float written to a scheme, model, report, or trace file goes through
//! [`sig12`], so identical values always produce identical bytes regardless of
//! platform.

/// Formats a float with 12 significant digits in exponent notation.
///
/// `12` digits are enough that parsing the text and re-formatting the parsed
/// value reproduces the same bytes, which keeps saved files stable under
/// load/save cycles.
pub fn sig12(x: f64) -> String {
    debug_assert!(x.is_finite(), "non-finite value in output: {x}");
    format!("{:.11e}", x)
}

/// Escapes a string for embedding in a JSON document.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
