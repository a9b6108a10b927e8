use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use dcfunm::nalgebra::DVector;
use dcfunm::{
    BandedMatrix, ClusterTree, DcConfig, DcInput, DcOutput, Flag, FunctionSpec, HssMatrix, SplitMode,
};

use crate::args::{BenchArgs, FunmArgs, GenArgs, Method, MethodArgs, OutputFlag, Reference};
use crate::error::{CliError, CliResult};
use crate::specs::{self, KeyValSpec, Matrix};
use crate::{container, mmio, reference};

#[derive(Debug, Clone)]
pub enum Value {
    Hss(HssMatrix),
    Banded(BandedMatrix),
    Diagonal(DVector<f64>),
    Trace(f64),
}

#[derive(Debug, Clone, Default)]
pub struct Metrics {
    pub n: usize,
    pub method: String,
    pub flag: String,
    pub parameter: String,
    pub error: Option<f64>,
    pub nnz_per_row: Option<f64>,
    pub hss_rank: Option<usize>,
    pub blocks: Option<usize>,
    pub krylov_steps: Option<usize>,
    pub not_converged: usize,
    pub wall_time: f64,
}

pub const FUNM_HEADER: [&str; 11] = [
    "n",
    "method",
    "flag",
    "parameter",
    "error",
    "nnz_per_row",
    "hss_rank",
    "blocks",
    "krylov_steps",
    "not_converged",
    "wall_time",
];

pub const BENCH_HEADER: [&str; 7] = ["n", "method", "parameter", "error", "nnz_per_row", "hss_rank", "wall_time"];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_err(e: Option<f64>) -> String {
    e.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

impl Metrics {
    pub fn funm_record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.method.clone(),
            self.flag.clone(),
            self.parameter.clone(),
            fmt_err(self.error),
            self.nnz_per_row.map(|x| format!("{x:.3}")).unwrap_or_default(),
            opt(&self.hss_rank),
            opt(&self.blocks),
            opt(&self.krylov_steps),
            self.not_converged.to_string(),
            format!("{:.6}", self.wall_time),
        ]
    }

    pub fn bench_record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.method.clone(),
            self.parameter.clone(),
            fmt_err(self.error),
            self.nnz_per_row.map(|x| format!("{x:.3}")).unwrap_or_default(),
            opt(&self.hss_rank),
            format!("{:.6}", self.wall_time),
        ]
    }
}

/// Parsed method settings shared by `funm` and `bench`.
#[derive(Debug, Clone)]
pub struct Settings {
    pub f: FunctionSpec,
    pub method: Method,
    pub dc: DcConfig,
    pub flag: OutputFlag,
    pub s: Option<usize>,
    pub degree: Option<usize>,
    pub interval: Option<(f64, f64)>,
    pub reference: bool,
    pub ref_cap: usize,
}

impl Settings {
    pub fn from_args(a: &MethodArgs) -> CliResult<Self> {
        let f = specs::parse_function(&a.function)?;
        let poles = specs::parse_poles(&a.poles)?;
        if !(a.eps > 0.0) {
            return Err(CliError::input("--eps must be positive"));
        }
        let mut dc = DcConfig::new(f.clone(), poles);
        dc.lag = a.lag;
        dc.eps = a.eps;
        dc.n_min = a.nmin;
        dc.spd_rank_b = a.spd_rank_b;
        dc.max_poles = a.max_poles;
        dc.flag = match a.flag {
            OutputFlag::Full => Flag::Full,
            OutputFlag::Diag => Flag::Diagonal,
            OutputFlag::Trace => Flag::Trace,
        };
        let interval = match &a.interval {
            None => None,
            Some(s) => {
                let (lo, hi) = s
                    .split_once(',')
                    .and_then(|(l, h)| Some((l.trim().parse::<f64>().ok()?, h.trim().parse::<f64>().ok()?)))
                    .ok_or_else(|| CliError::input(format!("--interval expects lo,hi; got '{s}'")))?;
                if !(lo < hi) {
                    return Err(CliError::input("--interval needs lo < hi"));
                }
                Some((lo, hi))
            }
        };
        Ok(Settings {
            f,
            method: a.method,
            dc,
            flag: a.flag,
            s: a.s,
            degree: a.degree,
            interval,
            reference: a.reference == Reference::Dense,
            ref_cap: a.ref_cap,
        })
    }

    /// Overrides the method's sweep parameter.
    fn with_param(&self, p: &str) -> CliResult<Self> {
        let mut s = self.clone();
        let bad = || CliError::input(format!("bad sweep parameter '{p}'"));
        match self.method {
            Method::SplittingFixed => s.s = Some(p.parse().map_err(|_| bad())?),
            Method::Chebyshev => s.degree = Some(p.parse().map_err(|_| bad())?),
            Method::Dc | Method::SplittingAdaptive => s.dc.eps = p.parse().map_err(|_| bad())?,
        }
        Ok(s)
    }

    fn parameter(&self) -> String {
        match self.method {
            Method::SplittingFixed => opt(&self.s),
            Method::Chebyshev => opt(&self.degree),
            Method::Dc | Method::SplittingAdaptive => format!("{:e}", self.dc.eps),
        }
    }
}

fn banded_only<'a>(m: &'a Matrix, method: Method) -> CliResult<&'a BandedMatrix> {
    match m {
        Matrix::Banded(a) => Ok(a),
        Matrix::Dense(_) => Err(CliError::input(format!("{} needs a banded input", method.name()))),
    }
}

fn from_banded(b: BandedMatrix, flag: OutputFlag) -> Value {
    match flag {
        OutputFlag::Full => Value::Banded(b),
        OutputFlag::Diag => Value::Diagonal(b.diagonal()),
        OutputFlag::Trace => Value::Trace(b.trace()),
    }
}

/// Runs the configured method, then the dense reference if requested.
pub fn compute(m: &Matrix, st: &Settings) -> CliResult<(Value, Metrics)> {
    let n = m.n();
    let mut met = Metrics {
        n,
        method: st.method.name().into(),
        flag: st.flag.name().into(),
        parameter: st.parameter(),
        ..Default::default()
    };
    let t0 = Instant::now();
    let value = match st.method {
        Method::Dc => {
            let hss;
            let input = match m {
                Matrix::Banded(a) => DcInput::from(a),
                Matrix::Dense(a) => {
                    hss = HssMatrix::from_dense(a, &ClusterTree::new(n, st.dc.n_min), st.dc.eps)?;
                    DcInput::from(&hss)
                }
            };
            let (out, rep) = dcfunm::dc_funm_report(input, &st.dc)?;
            met.krylov_steps = Some(rep.krylov_steps());
            met.not_converged = rep.not_converged();
            met.blocks = Some(rep.dense_evals);
            match out {
                DcOutput::Full(h) => {
                    met.hss_rank = Some(h.max_rank());
                    Value::Hss(h)
                }
                DcOutput::Diagonal(d) => Value::Diagonal(d),
                DcOutput::Trace(t) => Value::Trace(t),
            }
        }
        Method::SplittingFixed => {
            let a = banded_only(m, st.method)?;
            let s = st.s.ok_or_else(|| CliError::input("splitting-fixed needs --s"))?;
            met.blocks = Some(n.div_ceil(s));
            match st.flag {
                OutputFlag::Full => Value::Banded(dcfunm::split_funm_fixed(a, s, &st.f)?),
                OutputFlag::Diag => Value::Diagonal(dcfunm::split_diag(a, SplitMode::Fixed(s), &st.f)?),
                OutputFlag::Trace => Value::Trace(dcfunm::split_trace(a, SplitMode::Fixed(s), &st.f)?),
            }
        }
        Method::SplittingAdaptive => {
            let a = banded_only(m, st.method)?;
            let res = dcfunm::split_funm_adaptive(a, st.dc.eps, &st.f, st.dc.n_min)?;
            met.blocks = Some(res.plan.blocks.len());
            met.not_converged = res.unconverged;
            from_banded(res.f, st.flag)
        }
        Method::Chebyshev => {
            let a = banded_only(m, st.method)?;
            let d = st.degree.ok_or_else(|| CliError::input("chebyshev needs --degree"))?;
            let interval = st.interval.unwrap_or_else(|| dcfunm::spectral_interval(a));
            from_banded(dcfunm::chebyshev_funm(a, &st.f, interval, d)?, st.flag)
        }
    };
    met.wall_time = t0.elapsed().as_secs_f64();
    if let Value::Banded(b) = &value {
        met.nnz_per_row = Some(b.nnz() as f64 / n.max(1) as f64);
    }
    if st.reference && n <= st.ref_cap {
        let exact = reference::dense_funm(&m.to_dense(), &st.f, m.is_symmetric())?;
        met.error = Some(reference::relative_error(&value, &exact));
    }
    Ok((value, met))
}

fn load(a: &FunmArgs) -> CliResult<Matrix> {
    match (&a.gen, &a.input) {
        (Some(g), None) => specs::generate(g),
        (None, Some(p)) => Ok(Matrix::Banded(mmio::read_banded(p)?)),
        _ => Err(CliError::input("give exactly one of --gen or --input")),
    }
}

fn csv_writer(path: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn write_value(path: &Path, v: &Value) -> CliResult<()> {
    match v {
        Value::Hss(h) => container::write_hss(BufWriter::new(File::create(path)?), h),
        Value::Banded(b) => mmio::write_banded(path, b),
        Value::Diagonal(d) => {
            let mut w = BufWriter::new(File::create(path)?);
            for x in d.iter() {
                writeln!(w, "{x:.17e}")?;
            }
            w.flush()?;
            Ok(())
        }
        Value::Trace(t) => Ok(std::fs::write(path, format!("{t:.17e}\n"))?),
    }
}

/// `funm`: nothing is written unless the computation succeeds.
pub fn cmd_funm(a: &FunmArgs) -> CliResult<Metrics> {
    let st = Settings::from_args(&a.method)?;
    let m = load(a)?;
    let (value, met) = compute(&m, &st)?;
    if let Some(p) = &a.output {
        write_value(p, &value)?;
    }
    let mut w = csv_writer(a.metrics.as_deref())?;
    w.write_record(FUNM_HEADER)?;
    w.write_record(met.funm_record())?;
    w.flush()?;
    if met.not_converged > 0 {
        return Err(CliError::not_converged(format!(
            "{} update(s) stopped before reaching the tolerance",
            met.not_converged
        )));
    }
    Ok(met)
}

fn parse_list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

/// `bench`: one row per (n, parameter) pair.
pub fn cmd_bench(a: &BenchArgs) -> CliResult<Vec<Metrics>> {
    let st = Settings::from_args(&a.method)?;
    let spec = KeyValSpec::parse(&a.gen)?;
    let sizes: Vec<Option<usize>> = match &a.n {
        None => vec![None],
        Some(s) => parse_list(s)
            .iter()
            .map(|t| t.parse().map(Some).map_err(|_| CliError::input(format!("bad size '{t}'"))))
            .collect::<CliResult<_>>()?,
    };
    let params: Vec<Option<String>> = match &a.params {
        None => vec![None],
        Some(s) => parse_list(s).into_iter().map(Some).collect(),
    };
    let mut rows = Vec::new();
    for n in &sizes {
        let m = specs::generate_from(match n {
            Some(n) => spec.clone().with_n(*n),
            None => spec.clone(),
        })?;
        for p in &params {
            let st = match p {
                Some(p) => st.with_param(p)?,
                None => st.clone(),
            };
            let (_, met) = compute(&m, &st)?;
            log::info!("n={} parameter={} error={:?}", met.n, met.parameter, met.error);
            rows.push(met);
        }
    }
    let mut w = csv_writer(a.output.as_deref())?;
    w.write_record(BENCH_HEADER)?;
    for r in &rows {
        w.write_record(r.bench_record())?;
    }
    w.flush()?;
    Ok(rows)
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let m = specs::generate(&a.spec)?;
    mmio::write_matrix(&a.output, &m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn settings(extra: &[&str]) -> Settings {
        let mut argv = vec!["funm"];
        argv.extend_from_slice(extra);
        let cli = crate::args::Cli::parse_from(argv);
        Settings::from_args(&cli.funm.method).unwrap()
    }

    #[test]
    fn every_method_runs_with_reference() {
        let m = specs::generate("anderson:n=96,seed=2").unwrap();
        let fd = "fermi_dirac:beta=1.84,mu=0.5";
        for (argv, tol) in [
            (vec!["--method", "dc", "--f", fd, "--nmin", "16"], 1e-6),
            (vec!["--method", "splitting-fixed", "--s", "32", "--f", fd], 1e-2),
            (vec!["--method", "splitting-adaptive", "--eps", "1e-6", "--f", fd, "--nmin", "16"], 1e-4),
            (vec!["--method", "chebyshev", "--degree", "30", "--f", fd], 1e-3),
        ] {
            for flag in ["full", "diag", "trace"] {
                let mut argv = argv.clone();
                argv.extend(["--flag", flag, "--ref", "dense"]);
                let (_, met) = compute(&m, &settings(&argv)).unwrap();
                let err = met.error.unwrap();
                assert!(err <= tol, "{argv:?}: {err}");
            }
        }
    }

    #[test]
    fn dense_input_goes_through_hss() {
        let m = specs::generate("fractional:n=64,alpha=1.5").unwrap();
        let (v, met) = compute(&m, &settings(&["--f", "inv_sqrt", "--poles", "extended", "--nmin", "16", "--ref", "dense"])).unwrap();
        assert!(matches!(v, Value::Hss(_)));
        assert!(met.error.unwrap() < 1e-6, "{:?}", met.error);
        // spectrum reaches about 3000, so exp overflows
        let err = compute(&m, &settings(&["--f", "exp", "--nmin", "16"])).unwrap_err();
        assert_eq!(err.category, crate::error::Category::NumericalError);
        let err = compute(&m, &settings(&["--method", "chebyshev", "--degree", "3"])).unwrap_err();
        assert_eq!(err.category, crate::error::Category::InputError);
    }

    #[test]
    fn reference_respects_cap() {
        let m = specs::generate("A1:n=64").unwrap();
        let (_, met) = compute(&m, &settings(&["--ref", "dense", "--ref-cap", "32"])).unwrap();
        assert!(met.error.is_none());
    }

    #[test]
    fn missing_method_parameters() {
        let m = specs::generate("A1:n=64").unwrap();
        assert!(compute(&m, &settings(&["--method", "splitting-fixed"])).is_err());
        assert!(compute(&m, &settings(&["--method", "chebyshev"])).is_err());
        let cli = crate::args::Cli::parse_from(["funm", "--interval", "3,1"]);
        assert!(Settings::from_args(&cli.funm.method).is_err());
    }
}
