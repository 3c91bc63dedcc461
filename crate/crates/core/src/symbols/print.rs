//! Deterministic printing in the same grammar the parser accepts.

use std::fmt;

use num_complex::Complex64 as C64;

use super::{QuadExponent, Symbol, Term};

fn real(x: f64) -> String {
    // Display gives the shortest string that parses back to the same value.
    format!("{}", if x == 0.0 { 0.0 } else { x })
}

/// Sign and body of a scalar; `None` body means unit magnitude.
fn scalar(c: C64) -> (bool, Option<String>) {
    if c.im == 0.0 {
        let mag = c.re.abs();
        (c.re < 0.0, (mag != 1.0).then(|| real(mag)))
    } else if c.re == 0.0 {
        let mag = c.im.abs();
        let body = if mag == 1.0 { "i".to_string() } else { format!("{}*i", real(mag)) };
        (c.im < 0.0, Some(body))
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        (false, Some(format!("({} {} {}*i)", real(c.re), sign, real(c.im.abs()))))
    }
}

fn join(parts: Vec<(bool, String)>) -> String {
    let mut out = String::new();
    for (k, (neg, body)) in parts.into_iter().enumerate() {
        match (k, neg) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn product(coeff: C64, factors: &[String]) -> (bool, String) {
    let (neg, body) = scalar(coeff);
    let body = match (body, factors.is_empty()) {
        (Some(b), true) => b,
        (None, true) => "1".to_string(),
        (Some(b), false) => format!("{b}*{}", factors.join("*")),
        (None, false) => factors.join("*"),
    };
    (neg, body)
}

fn power(var: &str, n: u32) -> Option<String> {
    match n {
        0 => None,
        1 => Some(var.to_string()),
        _ => Some(format!("{var}^{n}")),
    }
}

fn exponent(e: &QuadExponent) -> String {
    let slots = [(e.app, "p^2"), (e.apq, "q*p"), (e.aqq, "q^2"), (e.bp, "p"), (e.bq, "q")];
    let parts = slots
        .iter()
        .filter(|(c, _)| *c != C64::new(0.0, 0.0))
        .map(|(c, v)| product(*c, &[v.to_string()]))
        .collect();
    format!("exp({})", join(parts))
}

fn term(t: &Term) -> (bool, String) {
    let mut factors: Vec<String> = [power("q", t.pow_q), power("p", t.pow_p)].into_iter().flatten().collect();
    if !t.expo.is_zero() {
        factors.push(exponent(&t.expo));
    }
    product(t.coeff, &factors)
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.terms.iter().rev().map(term).collect();
        f.write_str(&join(parts))
    }
}
