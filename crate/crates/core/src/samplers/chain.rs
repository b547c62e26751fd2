use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use super::{update_component, SamplerSpec, Update};
use crate::models::ConditionalModel;
use crate::variates::RngStream;
use crate::{Error, Result};

type StateFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A named scalar function of the state, recorded once per sweep.
#[derive(Clone)]
pub struct Monitor {
    name: String,
    f: Arc<StateFn>,
}

impl Monitor {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `x<i+1>`: the value of component `i`.
    pub fn coordinate(i: usize) -> Self {
        Self::new(format!("x{}", i + 1), move |s| s[i])
    }

    /// `x<i+1>^2`.
    pub fn coordinate_squared(i: usize) -> Self {
        Self::new(format!("x{}^2", i + 1), move |s| s[i] * s[i])
    }

    /// `tau`: the last component of a pump-model state.
    pub fn tau() -> Self {
        Self::new("tau", |s| s[s.len() - 1])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, state: &[f64]) -> f64 {
        (self.f)(state)
    }
}

impl fmt::Debug for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Monitor").field("name", &self.name).finish()
    }
}

/// Monitored values of one chain, one row per sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    pub burn_in: usize,
    pub seed: u64,
    pub chain_index: u64,
    pub spec: Option<SamplerSpec>,
}

impl ChainTrace {
    /// Build a trace from columns of equal length.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>, burn_in: usize) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::invalid("columns", "one column per name is required"));
        }
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns", "columns differ in length"));
        }
        if rows > 0 && burn_in >= rows {
            return Err(Error::invalid(
                "burn_in",
                format!("must be smaller than the {rows} recorded iterations"),
            ));
        }
        Ok(Self {
            names,
            columns,
            burn_in,
            seed: 0,
            chain_index: 0,
            spec: None,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Full series for a monitored function, burn-in included.
    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| Error::UnknownMonitor(name.to_string()))
    }

    /// Write `iter,<names>` with one row per sweep (1-based).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        write!(w, "iter")?;
        for n in &self.names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for row in 0..self.n_rows() {
            write!(w, "{}", row + 1)?;
            for col in &self.columns {
                write!(w, ",{}", col[row])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Companion `key=value` metadata. `extra` lines (such as the resolved
    /// experiment configuration) are appended in order.
    pub fn write_meta(&self, path: &Path, extra: &[(String, String)]) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "seed={}", self.seed)?;
        writeln!(w, "chain_index={}", self.chain_index)?;
        if let Some(spec) = &self.spec {
            writeln!(w, "sampler={spec}")?;
        }
        writeln!(w, "n_iter={}", self.n_rows())?;
        writeln!(w, "burn_in={}", self.burn_in)?;
        writeln!(w, "monitors={}", self.names.join(","))?;
        for (k, v) in extra {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a trace written by [`ChainTrace::write_csv`].
    pub fn read_csv(path: &Path, burn_in: usize) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let origin = path.display().to_string();
        let err = |line: usize, message: String| Error::Parse {
            path: origin.clone(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let mut fields = header.split(',').map(str::trim);
        if fields.next() != Some("iter") {
            return Err(err(1, format!("header must start with `iter`, found `{header}`")));
        }
        let names: Vec<String> = fields.map(str::to_string).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (n, line) in lines {
            let values: Vec<&str> = line.split(',').map(str::trim).collect();
            if values.len() != names.len() + 1 {
                return Err(err(
                    n + 1,
                    format!("expected {} fields, found {}", names.len() + 1, values.len()),
                ));
            }
            for (col, v) in columns.iter_mut().zip(&values[1..]) {
                col.push(v.parse().map_err(|e| err(n + 1, format!("bad value `{v}`: {e}")))?);
            }
        }
        Self::from_columns(names, columns, burn_in)
    }
}

/// Run `n_iter` sequential sweeps, updating components `0..dim` in order.
pub fn run_chain<M: ConditionalModel + ?Sized>(
    model: &M,
    spec: &SamplerSpec,
    n_iter: usize,
    burn_in: usize,
    init: &[f64],
    monitors: &[Monitor],
    rng: RngStream,
) -> Result<ChainTrace> {
    run_chain_observed(model, spec, n_iter, burn_in, init, monitors, rng, |_, _, _| {})
}

/// [`run_chain`] with a callback receiving `(iteration, component, update)`
/// for every single-component update.
#[allow(clippy::too_many_arguments)]
pub fn run_chain_observed<M, F>(
    model: &M,
    spec: &SamplerSpec,
    n_iter: usize,
    burn_in: usize,
    init: &[f64],
    monitors: &[Monitor],
    mut rng: RngStream,
    mut observe: F,
) -> Result<ChainTrace>
where
    M: ConditionalModel + ?Sized,
    F: FnMut(usize, usize, &Update),
{
    spec.validate()?;
    if init.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: init.len(),
        });
    }
    if let Some((index, &value)) = init.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteState { index, value });
    }
    if n_iter == 0 || burn_in >= n_iter {
        return Err(Error::invalid(
            "burn_in",
            format!("must be smaller than n_iter ({burn_in} >= {n_iter})"),
        ));
    }
    let mut state = init.to_vec();
    let mut columns: Vec<Vec<f64>> = monitors.iter().map(|_| Vec::with_capacity(n_iter)).collect();
    for iteration in 0..n_iter {
        for component in 0..state.len() {
            let wrap = |source: Error| Error::Update {
                iteration,
                component,
                source: Box::new(source),
            };
            let update = update_component(spec, component, &state, model, &mut rng).map_err(wrap)?;
            if !update.value.is_finite() {
                return Err(wrap(Error::NonFiniteState {
                    index: component,
                    value: update.value,
                }));
            }
            observe(iteration, component, &update);
            state[component] = update.value;
        }
        for (col, m) in columns.iter_mut().zip(monitors) {
            col.push(m.eval(&state));
        }
    }
    Ok(ChainTrace {
        names: monitors.iter().map(|m| m.name().to_string()).collect(),
        columns,
        burn_in,
        seed: rng.seed(),
        chain_index: rng.chain_index(),
        spec: Some(*spec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BivariateGaussianModel, PumpModel};
    use crate::samplers::OverrelaxImpl;

    fn monitors() -> Vec<Monitor> {
        vec![Monitor::coordinate(0), Monitor::coordinate_squared(0)]
    }

    #[test]
    fn same_seed_same_trace() {
        let m = BivariateGaussianModel::new(0.9).unwrap();
        let spec = SamplerSpec::OrderedOver {
            k: 5,
            implementation: OverrelaxImpl::Cdf,
        };
        let a = run_chain(&m, &spec, 300, 10, &[1.0, -1.0], &monitors(), RngStream::new(4, 2)).unwrap();
        let b = run_chain(&m, &spec, 300, 10, &[1.0, -1.0], &monitors(), RngStream::new(4, 2)).unwrap();
        let c = run_chain(&m, &spec, 300, 10, &[1.0, -1.0], &monitors(), RngStream::new(4, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.n_rows(), 300);
        assert_eq!(a.names(), ["x1", "x1^2"]);
    }

    #[test]
    fn pump_trace_has_one_row_per_sweep() {
        let model = PumpModel::new(vec![0.5, 1.0], vec![2, 5], 20.0, 0.1, 1.0).unwrap();
        let spec = SamplerSpec::Gibbs;
        let t = run_chain(&model, &spec, 600, 50, &[4.0, 4.0, 5.0], &[Monitor::tau()], RngStream::new(1, 0)).unwrap();
        assert_eq!(t.n_rows(), 600);
        assert!(t.series("tau").unwrap().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = BivariateGaussianModel::new(0.9).unwrap();
        let r = || RngStream::new(1, 0);
        assert!(run_chain(&m, &SamplerSpec::Gibbs, 10, 10, &[0.0, 0.0], &[], r()).is_err());
        assert!(run_chain(&m, &SamplerSpec::Gibbs, 10, 1, &[0.0], &[], r()).is_err());
        assert!(run_chain(&m, &SamplerSpec::Gibbs, 10, 1, &[0.0, f64::NAN], &[], r()).is_err());
        assert!(run_chain(&m, &SamplerSpec::Adler { adler_alpha: 2.0 }, 10, 1, &[0.0, 0.0], &[], r()).is_err());
    }

    #[test]
    fn update_errors_carry_location() {
        let model = PumpModel::new(vec![1.0], vec![1], 2.0, 0.1, 1.0).unwrap();
        let err = run_chain(
            &model,
            &SamplerSpec::Adler { adler_alpha: -0.5 },
            5,
            0,
            &[1.0, 1.0],
            &[],
            RngStream::new(1, 0),
        )
        .unwrap_err();
        match err {
            Error::Update {
                iteration, component, ..
            } => assert_eq!((iteration, component), (0, 0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alpha_minus_one_stays_on_contour() {
        let m = BivariateGaussianModel::new(0.998).unwrap();
        let contour = Monitor::new("q", move |s| m.quadratic_form(s));
        let t = run_chain(
            &m,
            &SamplerSpec::Adler { adler_alpha: -1.0 },
            5000,
            0,
            &[0.3, -0.2],
            &[contour],
            RngStream::new(1, 0),
        )
        .unwrap();
        let start = m.quadratic_form(&[0.3, -0.2]);
        for q in t.series("q").unwrap() {
            assert!((q - start).abs() <= 1e-9 * start.max(1.0), "{q} vs {start}");
        }
    }

    #[test]
    fn csv_roundtrip() {
        let m = BivariateGaussianModel::new(0.5).unwrap();
        let t = run_chain(&m, &SamplerSpec::Gibbs, 50, 5, &[0.0, 0.0], &monitors(), RngStream::new(2, 0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        t.write_csv(&path).unwrap();
        let back = ChainTrace::read_csv(&path, 5).unwrap();
        assert_eq!(back.names(), t.names());
        assert_eq!(back.series("x1").unwrap(), t.series("x1").unwrap());
        assert!(fs::read_to_string(&path).unwrap().starts_with("iter,x1,x1^2\n1,"));
    }
}
