//! Plain-text eigenvalue cache.
//!
//! ```text
//! cuspvariance-eigencache v1
//! k,form_index,n,lambda,exact
//! ```
//! `lambda` carries 30 significant digits; `exact` is `p/q` for rational forms
//! and empty otherwise. Rows are sorted by `(k, form_index, n)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cuspvariance::qforms::fixed::parse_decimal;
use cuspvariance::qforms::{hecke_eigenforms, Fixed, HeckeBasis, HeckeEigenform, LAMBDA_BITS};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const MAGIC: &str = "cuspvariance-eigencache v1";
pub const DIGITS: usize = 30;
pub const ENV_VAR: &str = "CUSPVARIANCE_CACHE";
pub const DEFAULT_NAME: &str = "cuspvariance-cache.txt";

/// `--cache`, then `$CUSPVARIANCE_CACHE`, then `<out>/cuspvariance-cache.txt`.
pub fn resolve_path(flag: Option<&Path>, out: &Path) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(ENV_VAR) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => out.join(DEFAULT_NAME),
    }
}

#[derive(Clone, Debug, Default)]
pub struct EigenCache {
    bases: BTreeMap<u32, HeckeBasis>,
    dirty: bool,
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (p, q) = s.split_once('/')?;
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    if q == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(p, q))
}

/// The form as it will read back from the cache: 30-digit eigenvalues.
pub fn round_trip(f: &HeckeEigenform) -> CliResult<HeckeEigenform> {
    let lambda: Vec<Fixed> = (1..=f.n_max())
        .map(|n| {
            let s = f.lambda(n).expect("in range").to_decimal(DIGITS);
            Fixed::from_rational(&parse_decimal(&s).expect("formatted decimal parses"), LAMBDA_BITS)
        })
        .collect();
    let exact = f.has_exact().then(|| (1..=f.n_max()).map(|n| f.exact_coefficient(n).unwrap().clone()).collect());
    Ok(HeckeEigenform::from_parts(f.weight(), f.index(), lambda, exact)?)
}

impl EigenCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads a cache file; a missing file is an empty cache.
    pub fn load(path: &Path) -> CliResult<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text).map_err(|m| CliError::Config(format!("cache {}: {m}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(format!("first line must be `{MAGIC}`"));
        }
        // (k, index) -> (lambdas, exacts)
        type Rows = (Vec<Fixed>, Vec<Option<BigRational>>);
        let mut forms: BTreeMap<(u32, usize), Rows> = BTreeMap::new();
        for (no, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| format!("line {}: {what}", no + 2);
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 && cols.len() != 5 {
                return Err(bad("expected k,form_index,n,lambda[,p/q]"));
            }
            let k: u32 = cols[0].parse().map_err(|_| bad("bad k"))?;
            let idx: usize = cols[1].parse().map_err(|_| bad("bad form_index"))?;
            let n: usize = cols[2].parse().map_err(|_| bad("bad n"))?;
            let lam = parse_decimal(cols[3]).ok_or_else(|| bad("bad lambda"))?;
            let exact = match cols.get(4).map(|s| s.trim()) {
                None | Some("") => None,
                Some(s) => Some(parse_rational(s).ok_or_else(|| bad("bad exact coefficient"))?),
            };
            let entry = forms.entry((k, idx)).or_default();
            if n != entry.0.len() + 1 {
                return Err(bad("rows must be sorted with n = 1, 2, … for each form"));
            }
            entry.0.push(Fixed::from_rational(&lam, LAMBDA_BITS));
            entry.1.push(exact);
        }
        let mut bases: BTreeMap<u32, HeckeBasis> = BTreeMap::new();
        for ((k, idx), (lam, ex)) in forms {
            let exact = if ex.iter().all(Option::is_some) { Some(ex.into_iter().map(Option::unwrap).collect()) } else { None };
            let f = HeckeEigenform::from_parts(k, idx, lam, exact).map_err(|e| format!("weight {k} form {idx}: {e}"))?;
            let b = bases.entry(k).or_insert_with(|| HeckeBasis { weight: k, forms: Vec::new() });
            if f.index() != b.forms.len() {
                return Err(format!("weight {k}: form indices must start at 0 and be consecutive"));
            }
            b.forms.push(f);
        }
        Ok(EigenCache { bases, dirty: false })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC}\n");
        for (k, b) in &self.bases {
            for f in &b.forms {
                for n in 1..=f.n_max() {
                    let lam = f.lambda(n).unwrap().to_decimal(DIGITS);
                    let ex = f.exact_coefficient(n).map(rational_string);
                    match ex {
                        Some(e) => writeln!(out, "{k},{},{n},{lam},{e}", f.index()),
                        None => writeln!(out, "{k},{},{n},{lam}", f.index()),
                    }
                    .unwrap();
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn weights(&self) -> Vec<u32> {
        self.bases.keys().copied().collect()
    }

    pub fn get(&self, k: u32) -> Option<&HeckeBasis> {
        self.bases.get(&k)
    }

    /// Cached bases with tables to at least `n_max`, computing (in parallel) and
    /// caching whatever is missing. Fresh results are passed through the cache
    /// representation so that a warm and a cold run see identical eigenvalues.
    pub fn ensure(&mut self, weights: &[u32], n_max: impl Fn(u32) -> usize + Sync) -> CliResult<()> {
        let missing: Vec<u32> = weights
            .iter()
            .copied()
            .filter(|&k| match self.bases.get(&k) {
                Some(b) => b.dim() > 0 && b.n_max() < n_max(k),
                None => true,
            })
            .collect();
        let built: Vec<CliResult<HeckeBasis>> = missing
            .par_iter()
            .map(|&k| {
                let b = hecke_eigenforms(k, n_max(k))?;
                let forms = b.forms.iter().map(round_trip).collect::<CliResult<_>>()?;
                Ok(HeckeBasis { weight: k, forms })
            })
            .collect();
        for b in built {
            let b = b?;
            self.bases.insert(b.weight, b);
            self.dirty = true;
        }
        Ok(())
    }

    pub fn basis(&mut self, k: u32, n_max: usize) -> CliResult<HeckeBasis> {
        self.ensure(&[k], |_| n_max)?;
        Ok(self.bases[&k].clone())
    }
}
