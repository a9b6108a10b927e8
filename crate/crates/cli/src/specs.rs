//! Parsers for the `name:key=value,...` generator and function syntax and for pole lists.

use std::collections::BTreeMap;

use dcfunm::num_complex::Complex64;
use dcfunm::{BandedMatrix, DenseMatrix, FunctionSpec, HamiltonianParams, Pole, PoleSequence};

use crate::error::{CliError, CliResult};

/// A test matrix, banded when the generator produces one.
#[derive(Debug, Clone)]
pub enum Matrix {
    Banded(BandedMatrix),
    Dense(DenseMatrix),
}

impl Matrix {
    pub fn n(&self) -> usize {
        match self {
            Matrix::Banded(a) => a.n(),
            Matrix::Dense(a) => a.nrows(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Banded(a) => a.to_dense(),
            Matrix::Dense(a) => a.clone(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Matrix::Banded(a) => a.is_symmetric(),
            Matrix::Dense(a) => a == &a.transpose(),
        }
    }
}

/// `name:key=value,key=value` split into a lowercase name and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyValSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl KeyValSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, r),
            None => (s, ""),
        };
        let name = name.trim().to_ascii_lowercase();
        if name.is_empty() {
            return Err(CliError::input(format!("empty name in spec '{s}'")));
        }
        let mut params = BTreeMap::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("expected key=value, got '{item}' in '{s}'")))?;
            params.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        Ok(KeyValSpec { name, params })
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.params.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::input(format!("bad value '{v}' for '{key}' in '{}'", self.name))),
        }
    }

    fn get_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> CliResult<T> {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<T> {
        self.take(key)?
            .ok_or_else(|| CliError::input(format!("'{}' needs {key}=...", self.name)))
    }

    fn finish(self) -> CliResult<()> {
        match self.params.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::input(format!("unknown key '{k}' for '{}'", self.name))),
        }
    }

    /// Sets `n`, replacing any value given in the spec (used by bench sweeps).
    pub fn with_n(mut self, n: usize) -> Self {
        self.params.insert("n".into(), n.to_string());
        self
    }
}

pub fn generate(spec: &str) -> CliResult<Matrix> {
    generate_from(KeyValSpec::parse(spec)?)
}

pub fn generate_from(mut s: KeyValSpec) -> CliResult<Matrix> {
    let m = match s.name.as_str() {
        "anderson" => {
            let n = s.required("n")?;
            Matrix::Banded(dcfunm::gen_anderson(n, s.get_or("seed", 0)?))
        }
        "gmrf" => {
            let n = s.required("n")?;
            let phi = s.get_or("phi", 3.0)?;
            let delta = s.get_or("delta", 0.02)?;
            Matrix::Banded(dcfunm::gen_gmrf(n, phi, delta, s.get_or("seed", 0)?)?)
        }
        "a1" => Matrix::Banded(dcfunm::gen_a1(s.required("n")?)),
        "a2" => Matrix::Banded(dcfunm::gen_a2(s.required("n")?)),
        "a3" => Matrix::Banded(dcfunm::gen_a3(s.required("n")?)),
        "fractional" => {
            let n = s.required("n")?;
            Matrix::Dense(dcfunm::gen_fractional(n, s.get_or("alpha", 1.5)?)?)
        }
        "hamiltonian" => {
            let d = HamiltonianParams::default();
            let p = HamiltonianParams {
                nb: s.get_or("nb", d.nb)?,
                ns: s.get_or("ns", d.ns)?,
                big_delta: s.get_or("big_delta", d.big_delta)?,
                small_delta: s.get_or("small_delta", d.small_delta)?,
                c: s.get_or("c", d.c)?,
                n_od: s.get_or("n_od", d.n_od)?,
            };
            Matrix::Dense(dcfunm::gen_hamiltonian(&p))
        }
        other => return Err(CliError::input(format!("unknown generator '{other}'"))),
    };
    s.finish()?;
    Ok(m)
}

/// Function names: exp, sqrt, inv_sqrt, sign, heaviside, fermi_dirac:beta=..,mu=..,
/// poly:c0=..,c1=.. (missing coefficients are zero).
pub fn parse_function(spec: &str) -> CliResult<FunctionSpec> {
    let mut s = KeyValSpec::parse(spec)?;
    let f = match s.name.as_str() {
        "exp" => FunctionSpec::Exp,
        "sqrt" => FunctionSpec::Sqrt,
        "inv_sqrt" | "invsqrt" => FunctionSpec::InvSqrt,
        "sign" => FunctionSpec::Sign,
        "heaviside" => FunctionSpec::Heaviside,
        "fermi_dirac" | "fd" => {
            let beta = s.required("beta")?;
            let mu = s.required("mu")?;
            FunctionSpec::fermi_dirac(beta, mu)
        }
        "poly" => {
            let mut coeffs = Vec::new();
            for (k, v) in std::mem::take(&mut s.params) {
                let idx: usize = k
                    .strip_prefix('c')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| CliError::input(format!("poly keys are c0, c1, ...; got '{k}'")))?;
                let val: f64 = v.parse().map_err(|_| CliError::input(format!("bad coefficient '{v}'")))?;
                if coeffs.len() <= idx {
                    coeffs.resize(idx + 1, 0.0);
                }
                coeffs[idx] = val;
            }
            FunctionSpec::polynomial(coeffs)
        }
        other => return Err(CliError::input(format!("unknown function '{other}'"))),
    };
    s.finish()?;
    Ok(f)
}

/// `inf`, `extended` or `list:a+bi,c,inf,...`.
pub fn parse_poles(spec: &str) -> CliResult<PoleSequence> {
    let spec = spec.trim();
    match spec {
        "inf" | "polynomial" => return Ok(PoleSequence::polynomial()),
        "extended" => return Ok(PoleSequence::extended()),
        _ => {}
    }
    let list = spec
        .strip_prefix("list:")
        .ok_or_else(|| CliError::input(format!("poles must be inf, extended or list:...; got '{spec}'")))?;
    let poles = list
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_pole)
        .collect::<CliResult<Vec<_>>>()?;
    Ok(PoleSequence::rational(poles)?)
}

fn parse_pole(t: &str) -> CliResult<Pole> {
    let t = t.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(Pole::Infinity);
    }
    let z = parse_complex(t).ok_or_else(|| CliError::input(format!("bad pole '{t}'")))?;
    Ok(if z.im == 0.0 { Pole::real(z.re) } else { Pole::complex(z.re, z.im) })
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
fn parse_complex(t: &str) -> Option<Complex64> {
    let t = t.replace(' ', "");
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse().ok()?,
    };
    Some(Complex64::new(re, im))
}
