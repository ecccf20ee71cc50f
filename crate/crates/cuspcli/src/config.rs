//! Flat `key = value` config files, spliced into the argument list ahead of
//! the real flags so that the command line wins.

use std::ffi::OsString;
use std::path::Path;

use cuspvariance::kernels::TestWeight;

use crate::error::{CliError, CliResult};

pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", no + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", no + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Position and value of `--config`, if present after the subcommand.
fn find_config(args: &[OsString]) -> CliResult<Option<(usize, usize, OsString)>> {
    for (i, a) in args.iter().enumerate().skip(2) {
        let Some(s) = a.to_str() else { continue };
        if s == "--" {
            break;
        }
        if s == "--config" {
            let v = args.get(i + 1).ok_or_else(|| CliError::Config("--config needs a path".into()))?;
            return Ok(Some((i, 2, v.clone())));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some((i, 1, v.into())));
        }
    }
    Ok(None)
}

/// `prog sub [config flags…] [remaining argv…]`.
pub fn expand_args(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    if args.len() < 2 || args[1].to_str().is_some_and(|s| s.starts_with('-')) {
        return Ok(args);
    }
    let Some((pos, len, path)) = find_config(&args)? else { return Ok(args) };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("config {}: {e}", Path::new(&path).display())))?;
    let mut out: Vec<OsString> = args[..2].to_vec();
    for (k, v) in parse_config(&text)? {
        if k == "config" {
            return Err(CliError::Config("config files cannot include other config files".into()));
        }
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend(args[2..pos].iter().cloned());
    out.extend(args[pos + len..].iter().cloned());
    Ok(out)
}

/// `bump:a:b`, `meanzero:a:b`, `plateau:a:b:r` or `zero`.
pub fn parse_weight(s: &str) -> Result<TestWeight, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = |xs: &[&str]| -> Result<Vec<f64>, String> {
        xs.iter().map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}` in weight `{s}`"))).collect()
    };
    let w = match (parts[0], parts.len()) {
        ("zero", 1) => Ok(TestWeight::zero()),
        ("bump", 3) => {
            let v = nums(&parts[1..])?;
            TestWeight::bump(v[0], v[1])
        }
        ("meanzero", 3) => {
            let v = nums(&parts[1..])?;
            TestWeight::mean_zero_bump(v[0], v[1])
        }
        ("plateau", 4) => {
            let v = nums(&parts[1..])?;
            TestWeight::plateau(v[0], v[1], v[2])
        }
        _ => return Err(format!("unknown weight `{s}` (bump:a:b, meanzero:a:b, plateau:a:b:r, zero)")),
    };
    w.map_err(|e| e.to_string())
}

/// A parsed weight list (newtype so that clap treats it as one value).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(pub Vec<u32>);

#[derive(Clone, Debug, PartialEq)]
pub struct Floats(pub Vec<f64>);

pub fn weights_arg(s: &str) -> Result<Weights, String> {
    parse_weights(s).map(Weights)
}

pub fn floats_arg(s: &str) -> Result<Floats, String> {
    parse_list_f64(s).map(Floats)
}

/// `12:40` (even weights in range), `50,100,200`, or a single weight.
pub fn parse_weights(s: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("bad weight list `{s}`");
    let mut ks: Vec<u32> = if let Some((a, b)) = s.split_once(':') {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).filter(|k| k % 2 == 0).collect()
    } else {
        s.split(',').map(|x| x.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    for &k in &ks {
        if k < 12 || k % 2 == 1 {
            return Err(format!("weight {k} must be even and ≥ 12"));
        }
    }
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

pub fn parse_list_f64(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}`"))).collect()
}

pub fn parse_theta(s: &str) -> Result<f64, String> {
    let t: f64 = s.trim().parse().map_err(|_| format!("bad θ `{s}`"))?;
    if (0.0..=4.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("θ = {t} outside [0, 4]"))
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}
