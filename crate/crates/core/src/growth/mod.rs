//! Growth functions `f: N -> N` giving the box radius `f(n)` at turn `n`.
//!
//! Every evaluation is exact. `ceil(c * n^alpha)` with rational `c = a/b`
//! and `alpha = p/q` is the smallest `m` with `m^q * b^q >= a^q * n^p`,
//! found by integer root extraction.

mod probe;
pub mod root;

pub use probe::{probe_controlled_growth, GrowthProbeReport, ProbeConfig, ProbeWindow, HEURISTIC_BANNER};

use crate::rational::Rational;
use num_bigint::BigUint;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrowthError {
    #[error("n = {n} is below the domain start {start}")]
    BelowDomain { n: u64, start: u64 },
    #[error("n = {n} is beyond the tabulated range (last n = {last})")]
    BeyondTable { n: u64, last: u64 },
    #[error("f({n}) does not fit in 64 bits")]
    Overflow { n: u64 },
    #[error("tabulated growth function: {0}")]
    BadTable(String),
    #[error("cannot parse growth spec {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("probe horizon {horizon} is below the minimum {min}")]
    HorizonTooSmall { horizon: u64, min: u64 },
}

/// Which family a growth function belongs to.
#[derive(Clone, Debug)]
pub enum GrowthKind {
    /// `ceil(c * n^alpha)`.
    PowerCeil { c: Rational, alpha: Rational },
    /// Explicit values, `values[i] = f(domain_start + i)`.
    Tabulated { values: Arc<[u64]>, label: Option<String> },
    /// Step function that only moves at powers of two, where it equals `ceil(n^(4/3))`.
    Pathological,
    /// `ceil(sqrt(factor_sq) * inner(n))`.
    Scaled { factor_sq: Rational, inner: Box<GrowthFunction> },
    /// `g+(n) = max(g(n), g+(n-1) + 1)`.
    Repaired {
        inner: Box<GrowthFunction>,
        cache: Arc<Mutex<Vec<u64>>>,
    },
}

#[derive(Clone, Debug)]
pub struct GrowthFunction {
    kind: GrowthKind,
    domain_start: u64,
    strictly_increasing: bool,
}

impl GrowthFunction {
    pub fn power_ceil(c: Rational, alpha: Rational) -> Self {
        assert!(!c.is_zero() && !alpha.is_zero(), "c and alpha must be positive");
        // Real increments are at least c * alpha * n^(alpha - 1) >= c * alpha when alpha >= 1.
        let strictly_increasing = alpha >= Rational::ONE
            && (c.numer() as u128 * alpha.numer() as u128) >= (c.denom() as u128 * alpha.denom() as u128);
        GrowthFunction {
            kind: GrowthKind::PowerCeil { c, alpha },
            domain_start: 1,
            strictly_increasing,
        }
    }

    /// `f(n) = n`.
    pub fn identity() -> Self {
        Self::power_ceil(Rational::ONE, Rational::ONE)
    }

    /// `f(n) = ceil(c * n)`.
    pub fn linear(c: Rational) -> Self {
        Self::power_ceil(c, Rational::ONE)
    }

    pub fn pathological() -> Self {
        GrowthFunction {
            kind: GrowthKind::Pathological,
            domain_start: 1,
            strictly_increasing: false,
        }
    }

    pub fn tabulated(domain_start: u64, values: Vec<u64>) -> Result<Self, GrowthError> {
        if values.is_empty() {
            return Err(GrowthError::BadTable("no values".into()));
        }
        if let Some(i) = values.iter().position(|&v| v == 0) {
            return Err(GrowthError::BadTable(format!("f({}) = 0, values must be >= 1", domain_start + i as u64)));
        }
        let strictly_increasing = values.windows(2).all(|w| w[1] > w[0]);
        Ok(GrowthFunction {
            kind: GrowthKind::Tabulated {
                values: values.into(),
                label: None,
            },
            domain_start,
            strictly_increasing,
        })
    }

    /// Reads a two-column CSV `n,f(n)` with a header row; `n` must be consecutive.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, GrowthError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut start = None;
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GrowthError::BadTable(e.to_string()))?;
            if rec.len() != 2 {
                return Err(GrowthError::BadTable(format!("row {}: expected 2 columns", line + 2)));
            }
            let parse = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| GrowthError::BadTable(format!("row {}: {s:?} is not a non-negative integer", line + 2)))
            };
            let n = parse(&rec[0])?;
            let v = parse(&rec[1])?;
            let first = *start.get_or_insert(n);
            if n != first + values.len() as u64 {
                return Err(GrowthError::BadTable(format!(
                    "row {}: expected n = {}, found {n}",
                    line + 2,
                    first + values.len() as u64
                )));
            }
            values.push(v);
        }
        Self::tabulated(start.unwrap_or(1), values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, GrowthError> {
        let file = std::fs::File::open(path).map_err(|e| GrowthError::BadTable(format!("{}: {e}", path.display())))?;
        let mut f = Self::from_csv_reader(file)?;
        if let GrowthKind::Tabulated { label, .. } = &mut f.kind {
            *label = Some(format!("tabulated:{}", path.display()));
        }
        Ok(f)
    }

    /// `ceil(sqrt(factor_sq) * inner(n))`.
    pub fn scaled_sqrt(factor_sq: Rational, inner: GrowthFunction) -> Self {
        assert!(!factor_sq.is_zero(), "scale factor must be positive");
        let domain_start = inner.domain_start;
        let strictly_increasing = factor_sq >= Rational::ONE && inner.strictly_increasing;
        GrowthFunction {
            kind: GrowthKind::Scaled {
                factor_sq,
                inner: Box::new(inner),
            },
            domain_start,
            strictly_increasing,
        }
    }

    /// `ceil(d * inner(n))` for rational `d`.
    pub fn scaled(d: Rational, inner: GrowthFunction) -> Self {
        let sq = Rational::new(
            d.numer().checked_mul(d.numer()).expect("scale numerator overflows"),
            d.denom().checked_mul(d.denom()).expect("scale denominator overflows"),
        );
        Self::scaled_sqrt(sq, inner)
    }

    /// The strictly increasing repair `g+`; see [`repair_strictly_increasing`].
    pub fn repaired(self) -> Self {
        repair_strictly_increasing(self)
    }

    pub fn kind(&self) -> &GrowthKind {
        &self.kind
    }

    pub fn domain_start(&self) -> u64 {
        self.domain_start
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.strictly_increasing
    }

    /// `(c, alpha)` when `f` is (up to repair) a `ceil(c n^alpha)` function.
    pub fn power_params(&self) -> Option<(Rational, Rational)> {
        match &self.kind {
            GrowthKind::PowerCeil { c, alpha } => Some((*c, *alpha)),
            GrowthKind::Repaired { inner, .. } => inner.power_params(),
            _ => None,
        }
    }

    pub fn eval(&self, n: u64) -> Result<u64, GrowthError> {
        if n < self.domain_start {
            return Err(GrowthError::BelowDomain {
                n,
                start: self.domain_start,
            });
        }
        match &self.kind {
            GrowthKind::PowerCeil { c, alpha } => eval_power_ceil(*c, *alpha, n),
            GrowthKind::Tabulated { values, .. } => {
                let i = (n - self.domain_start) as usize;
                values.get(i).copied().ok_or(GrowthError::BeyondTable {
                    n,
                    last: self.domain_start + values.len() as u64 - 1,
                })
            }
            GrowthKind::Pathological => pathological_eval(n),
            GrowthKind::Scaled { factor_sq, inner } => scale_sqrt(*factor_sq, inner.eval(n)?, n),
            GrowthKind::Repaired { inner, cache } => {
                let mut cache = cache.lock().unwrap_or_else(|e| e.into_inner());
                let i = (n - self.domain_start) as usize;
                while cache.len() <= i {
                    let m = self.domain_start + cache.len() as u64;
                    let g = inner.eval(m)?;
                    let v = match cache.last() {
                        Some(&prev) => g.max(prev + 1),
                        None => g,
                    };
                    cache.push(v);
                }
                Ok(cache[i])
            }
        }
    }

    /// `f(1), ..., f(upto)` as a vector indexed by `n` (index 0 holds 0).
    pub fn table(&self, upto: u64) -> Result<Vec<u64>, GrowthError> {
        let mut v = Vec::with_capacity(upto as usize + 1);
        v.push(0);
        for n in 1..=upto {
            v.push(self.eval(n)?);
        }
        Ok(v)
    }

    /// Canonical spec string, parseable by [`FromStr`] for the non-tabulated families.
    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GrowthKind::PowerCeil { c, alpha } => write!(f, "ceil({c}*n^{alpha})"),
            GrowthKind::Tabulated { values, label } => match label {
                Some(l) => f.write_str(l),
                None => write!(f, "tabulated[{}..={}]", self.domain_start, self.domain_start + values.len() as u64 - 1),
            },
            GrowthKind::Pathological => f.write_str("pathological"),
            GrowthKind::Scaled { factor_sq, inner } => write!(f, "sqrtscaled({factor_sq},{inner})"),
            GrowthKind::Repaired { inner, .. } => write!(f, "repaired({inner})"),
        }
    }
}

/// Exact `ceil(c * n^alpha)`.
pub fn eval_power_ceil(c: Rational, alpha: Rational, n: u64) -> Result<u64, GrowthError> {
    let (a, b) = (c.numer(), c.denom());
    let (p, q) = (alpha.numer() as u32, alpha.denom() as u32);
    // Fast path: everything fits in u128.
    let fast = (a as u128)
        .checked_pow(q)
        .zip((n as u128).checked_pow(p))
        .and_then(|(x, y)| x.checked_mul(y))
        .zip((b as u128).checked_pow(q));
    if let Some((num, den)) = fast {
        let k = num.div_ceil(den);
        let m = root::ceil_root_u128(k, q);
        return u64::try_from(m).map_err(|_| GrowthError::Overflow { n });
    }
    let num = BigUint::from(a).pow(q) * BigUint::from(n).pow(p);
    let den = BigUint::from(b).pow(q);
    root::ceil_rational_root(&num, &den, q).ok_or(GrowthError::Overflow { n })
}

fn scale_sqrt(factor_sq: Rational, g: u64, n: u64) -> Result<u64, GrowthError> {
    let g2 = g as u128 * g as u128;
    let m = match g2.checked_mul(factor_sq.numer() as u128) {
        Some(num) => root::ceil_root_u128(num.div_ceil(factor_sq.denom() as u128), 2),
        None => {
            let num = BigUint::from(g2) * BigUint::from(factor_sq.numer());
            return root::ceil_rational_root(&num, &BigUint::from(factor_sq.denom()), 2).ok_or(GrowthError::Overflow { n });
        }
    };
    u64::try_from(m).map_err(|_| GrowthError::Overflow { n })
}

/// `f(1) = 1`; `f(n) = ceil(n^(4/3))` at powers of two, otherwise `f(n-1)`.
pub fn pathological_eval(n: u64) -> Result<u64, GrowthError> {
    if n == 0 {
        return Err(GrowthError::BelowDomain { n, start: 1 });
    }
    let k = 63 - n.leading_zeros();
    let exp = 4 * k;
    let v = if exp < 128 {
        root::ceil_cbrt(1u128 << exp)
    } else {
        let big = BigUint::from(1u8) << exp as usize;
        return root::ceil_root_big(&big, 3)
            .try_into()
            .map_err(|_| GrowthError::Overflow { n });
    };
    u64::try_from(v).map_err(|_| GrowthError::Overflow { n })
}

/// `g+(start) = g(start)`, `g+(n) = max(g(n), g+(n-1) + 1)`.
pub fn repair_strictly_increasing(g: GrowthFunction) -> GrowthFunction {
    let domain_start = g.domain_start;
    GrowthFunction {
        kind: GrowthKind::Repaired {
            inner: Box::new(g),
            cache: Arc::new(Mutex::new(Vec::new())),
        },
        domain_start,
        strictly_increasing: true,
    }
}

impl FromStr for GrowthFunction {
    type Err = GrowthError;

    /// Grammar: `n`, `ceil(C*n^A)` (with `C*` and `^A` optional), `pathological`,
    /// `tabulated:<path>`, `repaired(<spec>)`, `scaled(D,<spec>)` and
    /// `sqrtscaled(R,<spec>)`. `C`, `A`, `D`, `R` are decimals or `p/q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let input = s;
        let err = |reason: &str| GrowthError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        if s == "n" {
            return Ok(Self::identity());
        }
        if s == "pathological" {
            return Ok(Self::pathological());
        }
        if let Some(path) = s.strip_prefix("tabulated:") {
            return Self::from_csv_path(Path::new(path.trim()));
        }
        if let Some(inner) = call_arg(s, "repaired") {
            return Ok(inner.parse::<GrowthFunction>()?.repaired());
        }
        for (name, squared) in [("scaled", false), ("sqrtscaled", true)] {
            if let Some(args) = call_arg(s, name) {
                let (factor, inner) = args.split_once(',').ok_or_else(|| err("expected (factor, spec)"))?;
                let factor: Rational = factor.parse().map_err(|e: crate::rational::ParseRationalError| err(&e.to_string()))?;
                if factor.is_zero() {
                    return Err(err("scale factor must be positive"));
                }
                let inner: GrowthFunction = inner.parse()?;
                return Ok(if squared {
                    Self::scaled_sqrt(factor, inner)
                } else {
                    Self::scaled(factor, inner)
                });
            }
        }
        if let Some(body) = call_arg(s, "ceil") {
            let body: String = body.chars().filter(|c| !c.is_whitespace()).collect();
            let (c, rest) = match body.split_once('*') {
                Some((c, rest)) => (c.parse::<Rational>().map_err(|e| err(&e.to_string()))?, rest.to_string()),
                None => (Rational::ONE, body.clone()),
            };
            let alpha = match rest.as_str() {
                "n" => Rational::ONE,
                r => match r.strip_prefix("n^") {
                    Some(a) => a.parse::<Rational>().map_err(|e| err(&e.to_string()))?,
                    None => return Err(err("expected n or n^A inside ceil(...)")),
                },
            };
            if c.is_zero() || alpha.is_zero() {
                return Err(err("c and alpha must be positive"));
            }
            return Ok(Self::power_ceil(c, alpha));
        }
        Err(err("unknown growth function"))
    }
}

/// `name(args)` -> `args`.
fn call_arg<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}
