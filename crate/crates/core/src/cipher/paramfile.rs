//! `key = value` parameter files.
//!
//! ```text
//! scheme = rubato
//! q = 33292289
//! n = 64
//! r = 2
//! l = 60
//! lambda = 128
//! sigma = 1.6
//! mix_row = 3 1 4 1 2 1 1 1
//! ...
//! ic = 1 2 3 ...
//! ```
//!
//! Unset fields fall back to the scheme's defaults. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::mixing::MixingMatrix;
use super::params::{default_ic, CipherParams, Scheme};
use crate::error::{Error, Result};
use crate::zq::Modulus;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_list(line: usize, s: &str) -> Result<Vec<u64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|e| parse_err(line, format!("`{t}`: {e}"))))
        .collect()
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| parse_err(line, format!("{key}: {e}")))
}

pub fn parse_params(text: &str) -> Result<CipherParams> {
    let mut fields: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        fields.push((line, k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }

    let (sline, scheme) = fields
        .iter()
        .find(|(_, k, _)| k == "scheme")
        .map(|(l, _, v)| (*l, v.clone()))
        .ok_or_else(|| parse_err(0, "missing `scheme`"))?;
    let scheme: Scheme = scheme.parse().map_err(|e: Error| parse_err(sline, e.to_string()))?;
    let mut p = CipherParams::for_scheme(scheme);

    let mut rows = Vec::new();
    let mut ic = None;
    let mut n_set = false;
    let mut l_set = false;
    for (line, key, val) in &fields {
        let line = *line;
        match key.as_str() {
            "scheme" => {}
            "q" => {
                p.q = Modulus::new(parse_num(line, key, val)?)
                    .map_err(|e| parse_err(line, e.to_string()))?
            }
            "n" => {
                p.n = parse_num(line, key, val)?;
                n_set = true;
            }
            "r" => p.r = parse_num(line, key, val)?,
            "l" => {
                p.l = parse_num(line, key, val)?;
                l_set = true;
            }
            "lambda" => p.lambda = parse_num(line, key, val)?,
            "sigma" => {
                p.sigma = match val.as_str() {
                    "none" | "" => None,
                    s => Some(parse_num(line, key, s)?),
                }
            }
            "tail_cut" => p.tail_cut = parse_num(line, key, val)?,
            "exclude_zero" => p.exclude_zero = parse_num(line, key, val)?,
            "mix_row" => rows.push(parse_list(line, val)?),
            "ic" => ic = Some(parse_list(line, val)?),
            other => return Err(parse_err(line, format!("unknown key `{other}`"))),
        }
    }

    if n_set {
        p.v = (p.n as f64).sqrt().round() as usize;
        if !l_set && scheme == Scheme::Hera {
            p.l = p.n;
        }
    }
    p.mixing = if rows.is_empty() {
        MixingMatrix::default_for(p.v).map_err(|e| parse_err(0, e.to_string()))?
    } else {
        MixingMatrix::new(rows).map_err(|e| parse_err(0, e.to_string()))?
    };
    p.ic = ic.unwrap_or_else(|| default_ic(p.n, p.q));
    p.validate()?;
    Ok(p)
}

pub fn format_params(p: &CipherParams) -> String {
    let join = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    writeln!(s, "scheme = {}", p.scheme).unwrap();
    writeln!(s, "q = {}", p.q).unwrap();
    writeln!(s, "n = {}", p.n).unwrap();
    writeln!(s, "r = {}", p.r).unwrap();
    writeln!(s, "l = {}", p.l).unwrap();
    writeln!(s, "lambda = {}", p.lambda).unwrap();
    match p.sigma {
        Some(sig) => writeln!(s, "sigma = {sig}").unwrap(),
        None => writeln!(s, "sigma = none").unwrap(),
    }
    writeln!(s, "tail_cut = {}", p.tail_cut).unwrap();
    writeln!(s, "exclude_zero = {}", p.exclude_zero).unwrap();
    for row in p.mixing.rows() {
        writeln!(s, "mix_row = {}", join(row)).unwrap();
    }
    writeln!(s, "ic = {}", join(&p.ic)).unwrap();
    s
}

pub fn load_params(path: &Path) -> Result<CipherParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_params(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for p in [CipherParams::hera_par128a(), CipherParams::rubato_par128l()] {
            assert_eq!(parse_params(&format_params(&p)).unwrap(), p);
        }
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let p = parse_params("scheme = hera\n").unwrap();
        assert_eq!(p, CipherParams::hera_par128a());
        let p = parse_params("# toy\nscheme = rubato\nq = 17\nn = 16\nl = 12 # keep 12\nr = 3\n").unwrap();
        assert_eq!((p.q.value(), p.n, p.v, p.l, p.r), (17, 16, 4, 12, 3));
        assert_eq!(p.ic, (1..=16).collect::<Vec<_>>());
        assert_eq!(p.mixing.rows()[0], vec![2, 3, 1, 1]);
    }

    #[test]
    fn custom_matrix() {
        let text = "scheme = hera\nq = 17\nmix_row = 1,0,0,0\nmix_row = 0 1 0 0\nmix_row = 0 0 1 0\nmix_row = 0 0 0 1\n";
        let p = parse_params(text).unwrap();
        assert_eq!(p.mixing, MixingMatrix::identity(4));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse_params("q = 17\n"), Err(Error::Parse { line: 0, .. })));
        assert!(matches!(parse_params("scheme = hera\nq = 16\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_params("scheme = hera\nbogus\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_params("scheme = hera\ncolor = red\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_params("scheme = hera\nmix_row = 1 2\n").is_err());
        assert!(parse_params("scheme = rubato\nn = 20\n").is_err());
    }
}
