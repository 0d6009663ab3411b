/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// fixed notation for exponents in `-4..digits`, scientific otherwise, with
/// trailing zeros dropped.
pub(crate) fn format_sig(x: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_owned();
    }
    let sci = format!("{x:.*e}", digits - 1);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}
