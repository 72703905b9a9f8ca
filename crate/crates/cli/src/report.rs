//! Ordered key/value reports rendered as structured text or JSON.
//!
//! Both renderings print floating-point numbers through the same
//! 12-significant-digit formatter, so reports are deterministic and
//! usable as golden files in either format.

use num_complex::Complex64 as C64;

/// Formats with 12 significant digits, trimming trailing zeros; small and
/// large magnitudes switch to scientific notation like `%g`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific form");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&e) {
        let prec = (11 - e).max(0) as usize;
        let fixed = format!("{:.*}", prec, x);
        let trimmed = if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.')
        } else {
            &fixed
        };
        trimmed.to_string()
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{e}")
    }
}

/// `re+imi` with both parts through [`fmt_g`], e.g. `0.5-0.25i`.
pub fn fmt_c(z: C64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{}-{}i", fmt_g(z.re), fmt_g(-im))
    } else {
        format!("{}+{}i", fmt_g(z.re), fmt_g(im))
    }
}

pub enum Val {
    Int(u64),
    Ints(Vec<u64>),
    Num(f64),
    Nums(Vec<f64>),
    Text(String),
    Complexes(Vec<C64>),
    Blocks(Vec<(String, Report)>),
}

#[derive(Default)]
pub struct Report {
    entries: Vec<(String, Val)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, val: Val) {
        self.entries.push((key.into(), val));
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut out = String::new();
            self.render_json(&mut out);
            out.push('\n');
            out
        } else {
            let mut out = String::new();
            self.render_text(&mut out, 0);
            out
        }
    }

    fn render_text(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        for (key, val) in &self.entries {
            match val {
                Val::Int(v) => out.push_str(&format!("{pad}{key}: {v}\n")),
                Val::Ints(v) => {
                    let body: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("{pad}{key}: {}\n", body.join(" ")));
                }
                Val::Num(v) => out.push_str(&format!("{pad}{key}: {}\n", fmt_g(*v))),
                Val::Nums(v) => {
                    let body: Vec<String> = v.iter().map(|x| fmt_g(*x)).collect();
                    out.push_str(&format!("{pad}{key}: {}\n", body.join(" ")));
                }
                Val::Text(v) => out.push_str(&format!("{pad}{key}: {v}\n")),
                Val::Complexes(v) => {
                    let body: Vec<String> = v.iter().map(|z| fmt_c(*z)).collect();
                    out.push_str(&format!("{pad}{key}: {}\n", body.join(" ")));
                }
                Val::Blocks(blocks) => {
                    out.push_str(&format!("{pad}{key}:\n"));
                    for (label, report) in blocks {
                        out.push_str(&format!("{pad}  {label}:\n"));
                        report.render_text(out, indent + 2);
                    }
                }
            }
        }
    }

    fn render_json(&self, out: &mut String) {
        out.push('{');
        for (i, (key, val)) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:?}:", key));
            match val {
                Val::Int(v) => out.push_str(&v.to_string()),
                Val::Ints(v) => {
                    let body: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("[{}]", body.join(",")));
                }
                Val::Num(v) => out.push_str(&fmt_g(*v)),
                Val::Nums(v) => {
                    let body: Vec<String> = v.iter().map(|x| fmt_g(*x)).collect();
                    out.push_str(&format!("[{}]", body.join(",")));
                }
                Val::Text(v) => out.push_str(&format!("{v:?}")),
                Val::Complexes(v) => {
                    let body: Vec<String> = v
                        .iter()
                        .map(|z| format!("[{},{}]", fmt_g(z.re), fmt_g(z.im)))
                        .collect();
                    out.push_str(&format!("[{}]", body.join(",")));
                }
                Val::Blocks(blocks) => {
                    out.push('[');
                    for (j, (label, report)) in blocks.iter().enumerate() {
                        if j > 0 {
                            out.push(',');
                        }
                        out.push_str(&format!("{{\"label\":{label:?},\"fields\":"));
                        report.render_json(out);
                        out.push('}');
                    }
                    out.push(']');
                }
            }
        }
        out.push('}');
    }
}
