//! CSV assembly and significant-digit float formatting.

pub struct CsvWriter {
    out: String,
}

impl CsvWriter {
    pub fn new(header: Vec<&str>) -> Self {
        Self::new_owned(header.into_iter().map(str::to_string).collect())
    }

    pub fn new_owned(header: Vec<String>) -> Self {
        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push('\n');
        CsvWriter { out }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Format with the given number of significant digits, using plain decimal
/// notation for moderate exponents and scientific otherwise.
pub fn fmt_float(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.*e}", sig.saturating_sub(1), v);
    // rust renders exponents without a fixed width: "6.67e-1"
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..16).contains(&exp) {
        return sci;
    }
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1; // digits before the decimal point
    let mut body = String::new();
    if point <= 0 {
        body.push_str("0.");
        for _ in 0..-point {
            body.push('0');
        }
        body.push_str(&digits);
    } else if (point as usize) >= digits.len() {
        body.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            body.push('0');
        }
    } else {
        body.push_str(&digits[..point as usize]);
        body.push('.');
        body.push_str(&digits[point as usize..]);
    }
    // trim trailing zeros in fractional parts
    if body.contains('.') {
        while body.ends_with('0') {
            body.pop();
        }
        if body.ends_with('.') {
            body.pop();
        }
    }
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
