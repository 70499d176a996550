//! Initial datum construction from config.

use wpme::exact::{barenblatt_value, BarenblattParams};
use wpme::mesh::{DiscreteOperators, Field};
use wpme::spectral::lambda1_neumann;
use wpme::weights::WeightFamily;

use crate::config::{ConfigError, DatumSpec, ExperimentConfig};

/// Barenblatt parameters matching a config's weight family.
pub fn barenblatt_params(
    cfg: &ExperimentConfig,
    c: f64,
) -> Result<BarenblattParams<f64>, ConfigError> {
    match cfg.family {
        WeightFamily::RadialPower => {
            let dim = cfg.dim.ok_or_else(|| ConfigError::Missing("N".into()))?;
            Ok(BarenblattParams::nd_radial(dim, cfg.m, c)?)
        }
        WeightFamily::Power if cfg.alpha == 0.0 => {
            Ok(BarenblattParams::weighted_1d(cfg.m, cfg.beta, c)?)
        }
        _ => Err(ConfigError::Invalid(
            "barenblatt datum needs radial_power weights or power weights with alpha = 0"
                .into(),
        )),
    }
}

/// Build the initial field on the assembled operators.
pub fn build(
    cfg: &ExperimentConfig,
    ops: &DiscreteOperators<f64>,
) -> Result<Field<f64>, ConfigError> {
    let mesh = ops.mesh();
    let (a, _) = mesh.domain();
    Ok(match &cfg.datum {
        DatumSpec::Constant { value } => Field::constant(ops.n_cells(), *value),
        DatumSpec::EigenPerturbation { mean, c1 } => {
            let eig = lambda1_neumann(ops)?;
            Field(
                eig.vector
                    .0
                    .iter()
                    .map(|&v| mean + c1 * v)
                    .collect::<Vec<f64>>(),
            )
        }
        DatumSpec::Spike {
            width,
            height,
            center,
        } => {
            let lo = a + center;
            let hi = lo + width;
            mesh.sample(|x| if x >= lo && x < hi { *height } else { 0.0 })
        }
        DatumSpec::Barenblatt { c, t0 } => {
            let p = barenblatt_params(cfg, *c)?;
            mesh.sample(|x| barenblatt_value(&p, x - a, *t0).unwrap_or(0.0))
        }
        DatumSpec::Custom { values } => Field(values.clone()),
    })
}
