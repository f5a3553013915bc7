//! Validated run configuration built from parsed arguments.

use std::fmt;
use std::path::PathBuf;

use ehypo_core::{EHypoParams, FitOptions};

use crate::args::{Args, Command, Format};
use crate::error::CliError;

const DEFAULT_STAGES: usize = 2;

/// Evaluation grid `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, CliError> {
        if ![start, stop, step].iter().all(|v| v.is_finite()) {
            return Err(CliError::usage("grid bounds must be finite"));
        }
        if step <= 0.0 {
            return Err(CliError::usage(format!("grid step must be positive, got {step}")));
        }
        if start < 0.0 || stop <= start {
            return Err(CliError::usage(format!("grid needs stop > start >= 0, got {start}:{stop}")));
        }
        Ok(Self { start, stop, step })
    }

    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!("grid must be START:STOP:STEP, got {spec:?}")));
        }
        let mut v = [0.0; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("grid value {part:?} is not a number")))?;
        }
        Self::new(v[0], v[1], v[2])
    }

    /// Number of points up to `stop`, tolerant of rounding in `(stop − start) / step`.
    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Exp,
    Hypoexp,
    EHypoexp,
}

impl Family {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "exp" => Ok(Self::Exp),
            "hypoexp" => Ok(Self::Hypoexp),
            "ehypoexp" => Ok(Self::EHypoexp),
            other => Err(CliError::usage(format!(
                "unknown model {other:?}; expected hypoexp, ehypoexp or exp"
            ))),
        }
    }
}

/// A model family with its stage count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub family: Family,
    pub n: usize,
}

impl ModelSpec {
    /// Parses `family` or `family:n`; `default_n` applies to the bare form
    /// of the multi-stage families.
    pub fn parse(spec: &str, default_n: Option<usize>) -> Result<Self, CliError> {
        let (name, explicit) = match spec.split_once(':') {
            Some((name, n)) => {
                let n: usize = n
                    .parse()
                    .map_err(|_| CliError::usage(format!("stage count in {spec:?} is not an integer")))?;
                (name, Some(n))
            }
            None => (spec, None),
        };
        let family = Family::parse(name.trim())?;
        let n = match (family, explicit) {
            (Family::Exp, None | Some(1)) => 1,
            (Family::Exp, Some(n)) => return Err(CliError::usage(format!("exp has one stage, got n={n}"))),
            (_, Some(n)) => n,
            (_, None) => default_n.unwrap_or(DEFAULT_STAGES),
        };
        if n == 0 {
            return Err(CliError::usage("stage count n must be at least 1"));
        }
        Ok(Self { family, n })
    }

    /// Number of free parameters.
    pub fn parameters(&self) -> usize {
        match self.family {
            Family::Exp => 1,
            Family::Hypoexp => self.n,
            Family::EHypoexp => self.n + 1,
        }
    }

    pub fn fit_options(&self, seed: u64) -> FitOptions {
        let mut opts = FitOptions::new(self.n);
        opts.seed = seed;
        if self.family != Family::EHypoexp {
            opts.fix_k = Some(1.0);
        }
        opts
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.family {
            Family::Exp => "exp",
            Family::Hypoexp => "hypoexp",
            Family::EHypoexp => "ehypoexp",
        };
        write!(f, "{name}:{}", self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Eval { params: EHypoParams, grid: Grid },
    Sample { params: EHypoParams, count: usize },
    Fit { model: ModelSpec, data: PathBuf },
    Compare { models: Vec<ModelSpec>, data: PathBuf },
    Plotdata { model: ModelSpec, data: PathBuf, grid: Option<Grid> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn single_model(models: &[String], default_n: Option<usize>) -> Result<ModelSpec, CliError> {
    match models {
        [] => ModelSpec::parse("ehypoexp", default_n),
        [one] => ModelSpec::parse(one, default_n),
        many => Err(CliError::usage(format!(
            "this command takes one model, got {}",
            many.len()
        ))),
    }
}

/// Distribution parameters for `eval` and `sample`.
fn distribution_params(args: &Args) -> Result<EHypoParams, CliError> {
    let rates = args.rates.as_deref().ok_or_else(|| CliError::usage("--rates is required"))?;
    let model = single_model(&args.model, Some(rates.len()))?;
    if model.n != rates.len() {
        return Err(CliError::usage(format!("{model} needs {} rates, got {}", model.n, rates.len())));
    }
    let k = match (model.family, args.k) {
        (Family::EHypoexp, Some(k)) => k,
        (Family::EHypoexp, None) => return Err(CliError::usage("--k is required for ehypoexp")),
        (_, None) => 1.0,
        (_, Some(1.0)) => 1.0,
        (_, Some(k)) => return Err(CliError::usage(format!("{model} has k = 1, got --k {k}"))),
    };
    Ok(EHypoParams::from_rates(rates, k)?)
}

fn data_path(args: &Args) -> Result<PathBuf, CliError> {
    args.data.clone().ok_or_else(|| CliError::usage("--data is required"))
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let grid = args.grid.as_deref().map(Grid::parse).transpose()?;
        let task = match args.command {
            Command::Eval => Task::Eval {
                params: distribution_params(args)?,
                grid: grid.ok_or_else(|| CliError::usage("--grid is required for eval"))?,
            },
            Command::Sample => Task::Sample {
                params: distribution_params(args)?,
                count: args.count.ok_or_else(|| CliError::usage("--count is required for sample"))?,
            },
            Command::Fit => Task::Fit { model: single_model(&args.model, args.n)?, data: data_path(args)? },
            Command::Compare => {
                let models = args
                    .model
                    .iter()
                    .map(|m| ModelSpec::parse(m, args.n))
                    .collect::<Result<Vec<_>, _>>()?;
                if models.len() < 2 {
                    return Err(CliError::usage(format!("compare needs at least 2 models, got {}", models.len())));
                }
                Task::Compare { models, data: data_path(args)? }
            }
            Command::Plotdata => Task::Plotdata { model: single_model(&args.model, args.n)?, data: data_path(args)?, grid },
        };
        Ok(Self { task, seed: args.seed, format: args.format, out: args.out.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn args(line: &str) -> Args {
        Args::try_parse_from(line.split_whitespace()).unwrap()
    }

    #[test]
    fn grid_points() {
        let g = Grid::parse("0:10:0.01").unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.points()[200], 2.0);
        assert_eq!(Grid::parse("1:2:0.3").unwrap().points().len(), 4);
        for bad in ["0:0:1", "2:1:0.1", "0:1:0", "-1:1:0.5", "0:1", "a:1:1"] {
            assert!(matches!(Grid::parse(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn model_specs() {
        let m = ModelSpec::parse("ehypoexp:3", Some(2)).unwrap();
        assert_eq!((m.family, m.n, m.parameters()), (Family::EHypoexp, 3, 4));
        let m = ModelSpec::parse("hypoexp", Some(2)).unwrap();
        assert_eq!((m.n, m.parameters(), m.fit_options(1).fix_k), (2, 2, Some(1.0)));
        assert_eq!(ModelSpec::parse("exp", Some(2)).unwrap().n, 1);
        assert_eq!(ModelSpec::parse("exp", None).unwrap().parameters(), 1);
        assert!(ModelSpec::parse("exp:2", None).is_err());
        assert!(ModelSpec::parse("ehypoexp", Some(0)).is_err());
        assert!(ModelSpec::parse("weibull", None).is_err());
        assert_eq!(ModelSpec::parse("hypoexp", None).unwrap().to_string(), "hypoexp:2");
    }

    #[test]
    fn task_validation() {
        let cfg = RunConfig::from_args(&args("ehypofit eval --rates 5,4,3 --k 3 --grid 0:1:0.5")).unwrap();
        assert!(matches!(cfg.task, Task::Eval { .. }));
        let cfg = RunConfig::from_args(&args("ehypofit compare --data x --model hypoexp:2,ehypoexp:2")).unwrap();
        let Task::Compare { models, .. } = cfg.task else { panic!() };
        assert_eq!(models.len(), 2);
        for bad in [
            "ehypofit eval --rates 5,4,3 --grid 0:1:0.5",
            "ehypofit eval --rates 5,4,3 --k 3",
            "ehypofit eval --model hypoexp --rates 1,2 --k 2 --grid 0:1:1",
            "ehypofit sample --rates 1,2 --k 2",
            "ehypofit fit --model ehypoexp --n 0 --data x",
            "ehypofit compare --data x --model ehypoexp",
            "ehypofit fit --model ehypoexp",
        ] {
            let err = RunConfig::from_args(&args(bad)).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{bad}: {err}");
        }
    }
}
