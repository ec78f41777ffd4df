/// Formats `v` with `digits` significant digits in the style of C's `%g`:
/// plain notation for moderate exponents, scientific otherwise, trailing zeros
/// dropped.
pub fn significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV document with LF line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Self {
            text: String::new(),
        };
        csv.row(header);
        csv
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let cells: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(significant(0.1, 12), "0.1");
        assert_eq!(significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(significant(2.0 / 3.0 * 100.0, 12), "66.6666666667");
        assert_eq!(significant(123456789012345.0, 12), "1.23456789012e14");
        assert_eq!(significant(1.5e-7, 12), "1.5e-7");
        assert_eq!(significant(0.000123, 12), "0.000123");
        assert_eq!(significant(-2.5, 12), "-2.5");
        assert_eq!(significant(20.0, 12), "20");
        assert_eq!(significant(f64::INFINITY, 12), "inf");
    }

    #[test]
    fn rounding_carries_into_the_exponent() {
        assert_eq!(significant(9.9999999999999, 12), "10");
        assert_eq!(significant(999999999999.9, 12), "1e12");
    }

    #[test]
    fn csv_rows() {
        let mut csv = Csv::new(&["n", "noon"]);
        csv.row(&["1", "1"]);
        assert_eq!(csv.finish(), "n,noon\n1,1\n");
    }
}
