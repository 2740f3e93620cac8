use std::str::FromStr;

use super::Generator;
use crate::error::{Error, Result};

fn parse_err(what: &str, detail: impl Into<String>) -> Error {
    Error::Parse {
        what: what.to_string(),
        detail: detail.into(),
    }
}

/// Parses a decimal or a fraction such as `1/3`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| parse_err("number", s))?;
            let d: f64 = d.trim().parse().map_err(|_| parse_err("number", s))?;
            n / d
        }
        None => s.parse().map_err(|_| parse_err("number", s))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err("number", format!("{s} is not finite")))
    }
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(parse_err("generator", "unbalanced parentheses"));
                }
            }
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(parse_err("generator", "unbalanced parentheses"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

fn wrapper_args<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

pub fn parse_generator(spec: &str) -> Result<Generator> {
    let s = spec.trim();
    if let Some(inner) = wrapper_args(s, "affine") {
        let args = split_top_level(inner)?;
        if args.len() != 4 {
            return Err(parse_err(
                "generator",
                format!("affine takes (spec, lambda, mu0, mu1), got `{s}`"),
            ));
        }
        let base = parse_generator(args[0])?;
        return base.affine(parse_number(args[1])?, parse_number(args[2])?, parse_number(args[3])?);
    }
    if let Some(inner) = wrapper_args(s, "scale") {
        let args = split_top_level(inner)?;
        if args.len() != 3 {
            return Err(parse_err("generator", format!("scale takes (spec, a, b), got `{s}`")));
        }
        let base = parse_generator(args[0])?;
        return base.domain_scale(parse_number(args[1])?, parse_number(args[2])?);
    }
    let (name, param) = match s.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p)),
        None => (s, None),
    };
    let need = |p: Option<&str>| -> Result<f64> {
        match p {
            Some(p) => parse_number(p),
            None => Err(parse_err("generator", format!("`{name}` needs a parameter"))),
        }
    };
    match name.to_ascii_lowercase().as_str() {
        "kl" => match param {
            None => Ok(Generator::kl()),
            Some(_) => Err(parse_err("generator", "kl takes no parameter")),
        },
        "gamma" => Generator::incomplete_gamma(need(param)?),
        "erfc" => Generator::erfc_scaled(need(param)?),
        "fermi" => Generator::fermi_dirac_scaled(need(param)?),
        "qlog" => Generator::qlog(need(param)?),
        _ => Err(parse_err("generator", format!("unknown family in `{s}`"))),
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_generator(s)
    }
}
