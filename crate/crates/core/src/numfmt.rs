/// Formats `x` in plain decimal notation rounded to `digits` significant digits.
///
/// Falls back to scientific notation outside `1e-5 ..= 1e21` so the output stays short.
pub fn significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..=21).contains(&exp) {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.6, 0.4, 0.5, 1.0 / 3.0, 0.12345678901234568, 1e-3] {
            let s = significant(x, 17);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(significant(0.6, 17), "0.59999999999999998");
        assert_eq!(significant(0.5, 17), "0.50000000000000000");
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(significant(1234.5678901234, 12), "1234.56789012");
        assert_eq!(significant(0.0, 12), "0.00000000000");
        assert_eq!(significant(99999.99999999999, 12), "100000.000000");
        assert_eq!(significant(2.0 / 3.0, 12), "0.666666666667");
    }
}
