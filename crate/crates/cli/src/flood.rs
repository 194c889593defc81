//! `flood` command: screening study of the river flood model.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use poincare::bounds;
use poincare::sa::{self, Sampling, ScreeningReport, StudyOptions};
use poincare::{poincare_constant, DistributionSpec, Family};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::format::text_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingChoice {
    Halton,
    MonteCarlo,
}

impl From<SamplingChoice> for Sampling {
    fn from(s: SamplingChoice) -> Self {
        match s {
            SamplingChoice::Halton => Sampling::Halton,
            SamplingChoice::MonteCarlo => Sampling::MonteCarlo,
        }
    }
}

/// Constants and bounds of a standardized input law.
#[derive(Debug, Clone, Serialize)]
pub struct ScaledLaw {
    pub name: String,
    pub spec: DistributionSpec,
    pub transport_doubleexp: f64,
    pub transport_logistic: f64,
    pub constant: f64,
    pub variance: f64,
}

/// The standardized Q, Ks and triangular laws of the flood inputs.
pub fn scaled_laws() -> CliResult<Vec<ScaledLaw>> {
    let laws = [
        ("triangular", DistributionSpec::standard(Family::Triangular)),
        (
            "Ks standardized",
            DistributionSpec::new(Family::Normal, 30.0, 8.0)?.truncated(15.0, f64::INFINITY)?.standardize().0,
        ),
        (
            "Q standardized",
            DistributionSpec::new(Family::Gumbel, 1013.0, 558.0)?.truncated(500.0, 3000.0)?.standardize().0,
        ),
    ];
    laws.into_iter()
        .map(|(name, spec)| {
            Ok(ScaledLaw {
                name: name.into(),
                transport_doubleexp: bounds::transport_doubleexp_bound(&spec)?,
                transport_logistic: bounds::transport_logistic_bound(&spec)?,
                constant: poincare_constant(&spec, 1e-6)?.value,
                variance: bounds::variance_lower_bound(&spec)?,
                spec,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FloodOutput {
    pub scaled_laws: Vec<ScaledLaw>,
    pub inputs: Vec<sa::Input>,
    pub study: ScreeningReport,
}

pub fn run_study(opts: &StudyOptions, threshold: f64) -> CliResult<FloodOutput> {
    if !(threshold >= 0.0) {
        return Err(CliError::Input(format!("threshold must be nonnegative, got {threshold}")));
    }
    let inputs = sa::flood_inputs();
    let study = sa::screening_study(&sa::flood_model(), &inputs, opts, threshold)?;
    Ok(FloodOutput {
        scaled_laws: scaled_laws()?,
        inputs,
        study,
    })
}

/// Terminal summary: the scaled-law block, then one line per input.
pub fn render(out: &FloodOutput, digits: usize) -> String {
    let n = |x: f64| text_num(x, digits);
    let mut s = String::new();
    let _ = writeln!(s, "Poincaré constants and bounds of the scaled laws");
    let _ = writeln!(
        s,
        "{:<18} {:>12} {:>12} {:>12} {:>12}",
        "law", "transp. dexp", "transp. log", "constant", "variance"
    );
    for l in &out.scaled_laws {
        let _ = writeln!(
            s,
            "{:<18} {:>12} {:>12} {:>12} {:>12}",
            l.name,
            n(l.transport_doubleexp),
            n(l.transport_logistic),
            n(l.constant),
            n(l.variance)
        );
    }
    let st = &out.study;
    let _ = writeln!(
        s,
        "\nScreening (n = {}, seed = {}, output variance = {} ± {})",
        st.n,
        st.seed,
        n(st.variance),
        n(st.variance_sd)
    );
    let _ = writeln!(
        s,
        "{:<6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>8}",
        "input", "constant", "dgsm", "total sobol", "sd", "upper bound", "sd", "active"
    );
    for r in &st.inputs {
        let _ = writeln!(
            s,
            "{:<6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>8}",
            r.name,
            n(r.poincare),
            n(r.nu),
            n(r.total_sobol),
            n(r.sobol_sd),
            n(r.upper_bound),
            n(r.bound_sd),
            if r.active { "yes" } else { "no" }
        );
    }
    let _ = writeln!(s, "ranking: {}", st.ranking().join(" > "));
    s
}

#[derive(Serialize)]
struct CsvLine<'a> {
    input: &'a str,
    constant: f64,
    dgsm: f64,
    dgsm_sd: f64,
    total_sobol: f64,
    total_sobol_sd: f64,
    upper_bound: f64,
    upper_bound_sd: f64,
    active: bool,
}

pub fn write_csv(report: &ScreeningReport, path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &report.inputs {
        w.serialize(CsvLine {
            input: &r.name,
            constant: r.poincare,
            dgsm: r.nu,
            dgsm_sd: r.nu_sd,
            total_sobol: r.total_sobol,
            total_sobol_sd: r.sobol_sd,
            upper_bound: r.upper_bound,
            upper_bound_sd: r.bound_sd,
            active: r.active,
        })?;
    }
    w.flush()?;
    Ok(())
}
