//! Number and trace formatting for terminal output.

use gradkit::CvRecord;

/// Formats `v` like C's `%g` with six significant digits.
pub fn g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `It.    n, RSS =   <rss>, Par. = <p1> [<p2>]`
pub fn trace_line(record: &CvRecord) -> String {
    let params: Vec<String> = record.params.iter().map(|p| format!("{:>10}", g6(*p))).collect();
    format!(
        "It. {:>4}, RSS = {:>10}, Par. = {}",
        record.iteration,
        g6(record.rss),
        params.join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (3.501_824, "3.50182"),
            (1.669_2, "1.6692"),
            (0.000_393_552_1, "0.000393552"),
            (0.000_222_489_3, "0.000222489"),
            (0.001_011_500_2, "0.0010115"),
            (0.2, "0.2"),
            (0.0, "0"),
            (123_456.7, "123457"),
            (1_234_567.0, "1.23457e+06"),
            (0.000_012_345_67, "1.23457e-05"),
            (-2.5e-7, "-2.5e-07"),
            (9.999_999, "10"),
            (0.000_099_999_99, "0.0001"),
        ];
        for (v, want) in cases {
            assert_eq!(g6(v), want, "{v}");
        }
    }

    #[test]
    fn trace_layout() {
        let r = CvRecord {
            iteration: 0,
            rss: 0.299_308,
            params: vec![0.002, 0.2],
        };
        assert_eq!(
            trace_line(&r),
            "It.    0, RSS =   0.299308, Par. =      0.002        0.2"
        );
    }
}
