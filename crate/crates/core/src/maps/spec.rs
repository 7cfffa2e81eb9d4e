//! Spec-string grammar for map families (documented on [`super`]).

use std::fmt;

use num_complex::Complex64;

use super::{MapFamily, SphereMap};
use crate::{LabError, Result};

fn fmt_complex(c: &Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 || c.im.is_sign_negative() {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn join<T>(items: &[T], sep: &str, f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(sep)
}

pub(super) fn format_map(map: &SphereMap, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match map.family() {
        MapFamily::Identity => write!(f, "identity"),
        MapFamily::Constant => write!(f, "constant"),
        MapFamily::Antipodal => write!(f, "antipodal"),
        MapFamily::Power { k } => write!(f, "power:k={k}"),
        MapFamily::Rational { num, den } => write!(
            f,
            "rational:num={};den={}",
            join(num, ",", fmt_complex),
            join(den, ",", fmt_complex)
        ),
        MapFamily::Bubble { k, lambda } => write!(f, "bubble:k={k},lambda={lambda}"),
        MapFamily::Blaschke { zeros } => {
            write!(f, "blaschke:zeros={}", join(zeros, ";", |(r, t)| format!("{r}@{t}")))
        }
        MapFamily::Poly { c, zeros } => {
            write!(f, "poly:c={},zeros={}", fmt_complex(c), join(zeros, ";", fmt_complex))
        }
        MapFamily::Perturb { base, amp, seed, .. } => write!(f, "perturb:base={base},amp={amp},seed={seed}"),
        MapFamily::Rotate { base, angles, .. } => write!(
            f,
            "rotate:base={base},alpha={},beta={},gamma={}",
            angles[0], angles[1], angles[2]
        ),
        MapFamily::PreRotate { base, angles, .. } => write!(
            f,
            "prerotate:base={base},alpha={},beta={},gamma={}",
            angles[0], angles[1], angles[2]
        ),
        MapFamily::Reflect { base } => write!(f, "reflect:base={base}"),
    }
}

fn bad(spec: &str, what: &str) -> LabError {
    LabError::invalid(format!("map spec `{spec}`: {what}"))
}

fn parse_f64(s: &str, spec: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(spec, &format!("`{s}` is not a number")))
}

/// Parses `3`, `-2.5`, `2i`, `-i`, `1+2i`, `1e-3-4i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let err = || LabError::invalid(format!("`{s}` is not a complex number"));
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // Split at the last sign that is not leading and not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| err())?,
    };
    Ok(Complex64::new(re.parse::<f64>().map_err(|_| err())?, im))
}

/// Splits `key=value,key=value` where values contain no commas.
fn key_values<'a>(body: &'a str, spec: &str) -> Result<Vec<(&'a str, &'a str)>> {
    body.split(',')
        .map(|kv| kv.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| bad(spec, "expected key=value")))
        .collect()
}

fn take<'a>(kvs: &[(&'a str, &'a str)], key: &str, spec: &str) -> Result<&'a str> {
    kvs.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| bad(spec, &format!("missing `{key}`")))
}

fn only_keys(kvs: &[(&str, &str)], allowed: &[&str], spec: &str) -> Result<()> {
    match kvs.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(bad(spec, &format!("unknown key `{k}`"))),
        None => Ok(()),
    }
}

/// Splits `base=<nested spec>,<marker>...` at the last occurrence of `marker`.
fn split_base<'a>(body: &'a str, marker: &str, spec: &str) -> Result<(&'a str, &'a str)> {
    let rest = body.strip_prefix("base=").ok_or_else(|| bad(spec, "expected `base=`"))?;
    let at = rest.rfind(marker).ok_or_else(|| bad(spec, &format!("missing `{}`", &marker[1..])))?;
    Ok((&rest[..at], &rest[at + 1..]))
}

fn parse_angles(tail: &str, spec: &str) -> Result<[f64; 3]> {
    let kvs = key_values(tail, spec)?;
    only_keys(&kvs, &["alpha", "beta", "gamma"], spec)?;
    let get = |k| kvs.iter().find(|(key, _)| *key == k).map(|(_, v)| parse_f64(v, spec)).unwrap_or(Ok(0.0));
    Ok([get("alpha")?, get("beta")?, get("gamma")?])
}

impl SphereMap {
    /// Parses a map spec string for maps on `S^dim`.
    pub fn parse(spec: &str, dim: usize) -> Result<SphereMap> {
        let spec = spec.trim();
        let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
        let need_dim = |d: usize| {
            if dim == d {
                Ok(())
            } else {
                Err(bad(spec, &format!("family `{kind}` is defined only for d = {d}")))
            }
        };
        match kind {
            "identity" | "id" => SphereMap::identity(dim),
            "constant" | "const" => SphereMap::constant(dim),
            "antipodal" => SphereMap::antipodal(dim),
            "power" => {
                need_dim(1)?;
                let kvs = key_values(body, spec)?;
                only_keys(&kvs, &["k"], spec)?;
                let k = take(&kvs, "k", spec)?.parse().map_err(|_| bad(spec, "k must be an integer"))?;
                SphereMap::power(k)
            }
            "rational" => {
                need_dim(2)?;
                let (n, d) = body.split_once(';').ok_or_else(|| bad(spec, "expected `num=..;den=..`"))?;
                let n = n.trim().strip_prefix("num=").ok_or_else(|| bad(spec, "expected `num=`"))?;
                let d = d.trim().strip_prefix("den=").ok_or_else(|| bad(spec, "expected `den=`"))?;
                let coeffs = |s: &str| s.split(',').map(parse_complex).collect::<Result<Vec<_>>>();
                SphereMap::rational(coeffs(n)?, coeffs(d)?)
            }
            "bubble" => {
                let kvs = key_values(body, spec)?;
                only_keys(&kvs, &["k", "lambda"], spec)?;
                let k = take(&kvs, "k", spec)?.parse().map_err(|_| bad(spec, "k must be an integer"))?;
                let lambda = parse_f64(take(&kvs, "lambda", spec)?, spec)?;
                SphereMap::bubble(dim, k, lambda)
            }
            "blaschke" => {
                need_dim(1)?;
                let z = body.strip_prefix("zeros=").ok_or_else(|| bad(spec, "expected `zeros=`"))?;
                let zeros = z
                    .split(';')
                    .map(|item| {
                        let (r, t) = item.split_once('@').ok_or_else(|| bad(spec, "zeros are `r@t`"))?;
                        Ok((parse_f64(r, spec)?, parse_f64(t, spec)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SphereMap::blaschke(zeros)
            }
            "poly" => {
                need_dim(2)?;
                let (c, z) = body.split_once(",zeros=").ok_or_else(|| bad(spec, "expected `c=..,zeros=..`"))?;
                let c = c.strip_prefix("c=").ok_or_else(|| bad(spec, "expected `c=`"))?;
                let zeros = z.split(';').map(parse_complex).collect::<Result<Vec<_>>>()?;
                SphereMap::poly(parse_complex(c)?, zeros)
            }
            "perturb" => {
                let (base, tail) = split_base(body, ",amp=", spec)?;
                let kvs = key_values(tail, spec)?;
                only_keys(&kvs, &["amp", "seed"], spec)?;
                let amp = parse_f64(take(&kvs, "amp", spec)?, spec)?;
                let seed = take(&kvs, "seed", spec)?.parse().map_err(|_| bad(spec, "seed must be a u64"))?;
                SphereMap::perturb(SphereMap::parse(base, dim)?, amp, seed)
            }
            "rotate" | "prerotate" => {
                let (base, tail) = split_base(body, ",alpha=", spec)?;
                let angles = parse_angles(tail, spec)?;
                let base = SphereMap::parse(base, dim)?;
                if kind == "rotate" {
                    SphereMap::rotate(base, angles)
                } else {
                    SphereMap::prerotate(base, angles)
                }
            }
            "reflect" => {
                let base = body.strip_prefix("base=").ok_or_else(|| bad(spec, "expected `base=`"))?;
                Ok(SphereMap::reflect(SphereMap::parse(base, dim)?))
            }
            _ => Err(bad(spec, &format!("unknown family `{kind}`"))),
        }
    }
}
