//! Text form of entropy functions, e.g. `shannon`, `power:0.5`,
//! `2*shannon+hc:2` or `pl:1,inf`.

use super::{make_builtin, GFunction};
use crate::error::{Error, Result};

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.into(),
        reason: reason.into(),
    }
}

fn parse_number(input: &str, s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| parse_err(input, format!("`{t}` is not a number"))),
    }
}

fn parse_atom(input: &str, atom: &str) -> Result<GFunction> {
    let atom = atom.trim();
    let (family, params) = match atom.split_once(':') {
        Some((f, p)) => {
            let params = p
                .split(',')
                .map(|s| parse_number(input, s))
                .collect::<Result<Vec<_>>>()?;
            (f.trim(), params)
        }
        None => (atom, Vec::new()),
    };
    if family.is_empty() {
        return Err(parse_err(input, "empty function name"));
    }
    match family {
        "sqrt" if params.is_empty() => GFunction::power(0.5),
        _ => make_builtin(family, &params),
    }
}

/// Parses a nonnegative combination of builtin families.
pub fn parse_g_spec(input: &str) -> Result<GFunction> {
    let terms: Vec<&str> = input.split('+').collect();
    if input.trim().is_empty() || terms.iter().any(|t| t.trim().is_empty()) {
        return Err(parse_err(input, "empty term"));
    }
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        let (c, atom) = match t.split_once('*') {
            Some((c, a)) => (parse_number(input, c)?, a),
            None => (1.0, t),
        };
        parsed.push((c, parse_atom(input, atom)?));
    }
    if parsed.len() == 1 && parsed[0].0 == 1.0 {
        return Ok(parsed.pop().expect("one term").1);
    }
    GFunction::affine(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_families() {
        assert_eq!(parse_g_spec("shannon").unwrap().family(), "shannon");
        assert_eq!(parse_g_spec("power:0.5").unwrap().params(), vec![0.5]);
        assert_eq!(parse_g_spec("sqrt").unwrap().params(), vec![0.5]);
        assert_eq!(parse_g_spec(" log_square ").unwrap().family(), "log_square");
    }

    #[test]
    fn combinations() {
        let g = parse_g_spec("2*shannon+hc:2").unwrap();
        assert_eq!(g.family(), "affine");
        let x: f64 = 0.3;
        let want = 2.0 * (-x * x.ln()) + (x - x * x) / 0.5;
        assert!((g.eval(x) - want).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_g_spec(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_g_spec("shannon+"), Err(Error::Parse { .. })));
        assert!(matches!(parse_g_spec("power:x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_g_spec("foo"), Err(Error::UnknownFamily(_))));
        assert!(parse_g_spec("-1*shannon").is_err());
    }
}
