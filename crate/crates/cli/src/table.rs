use std::fmt::Write;

use distillery_core::SweepRecord;

pub const CSV_HEADER: &str = "p,n,v_ed,v_nd,p_succ,delta";
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits, in plain notation
/// unless the magnitude is tiny or huge.
pub fn significant(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // the exponent after rounding decides where the twelfth digit sits
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exponent: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if !(-5..12).contains(&exponent) {
        return sci;
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent) as usize;
    format!("{x:.decimals$}")
}

pub fn to_csv(rows: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            significant(r.p),
            r.n,
            significant(r.v_ed),
            significant(r.v_nd),
            significant(r.p_succ),
            significant(r.delta)
        );
    }
    out
}
