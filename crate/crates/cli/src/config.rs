//! The experiment config: one JSON document describing either a parametric
//! model or a convolution system, a binning, the quadrature and the task.

use std::path::{Path, PathBuf};

use binloss::{
    AttributeSpace, BinningScheme, Cell, GaussianBump, ObjectFunction, ObjectGrid, PsfSpec,
    ZooModel,
};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<ModelSection>,
    pub system: Option<SystemSection>,
    pub binning: BinningSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default)]
    pub seed: u64,
    /// Directory relative file references resolve against; set by the loader.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSection {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub floor: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `constant`, `affine-1d`, `scaled-profile` or `gaussian-mixture`.
    pub kind: String,
    pub space: Option<SpaceSection>,
    pub profile: Option<BumpSection>,
    pub components: Option<usize>,
    pub theta: Vec<f64>,
    pub delta_theta: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PsfSection {
    Gaussian { width: f64 },
    Sinc { bandwidth: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectGridSection {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectBump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// An object function on the object grid.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectSection {
    /// One value per grid point.
    Values(Vec<f64>),
    /// Whitespace-separated values, one per grid point.
    File(PathBuf),
    /// `background + Σ amplitude · exp(−(r − center)² / (2 width²))`.
    Bumps {
        #[serde(default)]
        background: f64,
        bumps: Vec<ObjectBump>,
    },
    /// A multiple of the system's `f` (only valid for `delta_f`).
    ScaleOfF(f64),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub psf: PsfSection,
    pub object_grid: ObjectGridSection,
    pub f: ObjectSection,
    pub delta_f: ObjectSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BinningSection {
    /// Uniform grid with this many cells per axis.
    Counts(Vec<usize>),
    Cells(Vec<SpaceSection>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "default_nodes")]
    pub nodes_per_axis: usize,
}

fn default_nodes() -> usize {
    binloss::quadrature::DEFAULT_NODES_PER_AXIS
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            nodes_per_axis: default_nodes(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    /// Bin counts per axis for `sweep-bins`.
    pub bin_counts: Option<Vec<usize>>,
    /// Bandwidths for the `conv-example` sweep.
    pub bandwidths: Option<Vec<f64>>,
    /// Scale of the proportional control row in `conv-example`.
    pub alpha: Option<f64>,
    pub n_trials: Option<usize>,
    /// Bin means are checked at this θ instead of the sampling θ.
    pub check_theta: Option<Vec<f64>>,
    #[serde(default)]
    pub export_events: bool,
    pub z_gate: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Structural checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.model, &self.system) {
            (Some(_), Some(_)) => {
                return Err(config_err("give either `model` or `system`, not both"))
            }
            (None, None) => return Err(config_err("missing field `model` (or `system`)")),
            _ => {}
        }
        if self.quadrature.nodes_per_axis == 0 {
            return Err(config_err("quadrature.nodes_per_axis must be at least 1"));
        }
        if let Some(m) = &self.model {
            finite("model.theta", &m.theta)?;
            if let Some(d) = &m.delta_theta {
                finite("model.delta_theta", d)?;
            }
            if let Some(s) = &m.space {
                finite("model.space.lower", &s.lower)?;
                finite("model.space.upper", &s.upper)?;
            }
        }
        if let Some(s) = &self.system {
            if let ObjectSection::ScaleOfF(_) = s.f {
                return Err(config_err("system.f cannot be `scale_of_f`"));
            }
            if let ObjectSection::File(p) = s.f.clone() {
                self.check_exists(&p)?;
            }
            if let ObjectSection::File(p) = s.delta_f.clone() {
                self.check_exists(&p)?;
            }
        }
        if let Some(counts) = &self.task.bin_counts {
            if counts.is_empty() || counts.contains(&0) {
                return Err(config_err("task.bin_counts entries must be at least 1"));
            }
        }
        if let Some(b) = &self.task.bandwidths {
            finite("task.bandwidths", b)?;
        }
        Ok(())
    }

    fn check_exists(&self, p: &Path) -> Result<(), CliError> {
        let full = self.resolve(p);
        if full.is_file() {
            Ok(())
        } else {
            Err(config_err(&format!(
                "referenced file {} does not exist",
                full.display()
            )))
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn model_section(&self) -> Result<&ModelSection, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| config_err("this command needs a `model` section"))
    }

    pub fn system_section(&self) -> Result<&SystemSection, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| config_err("this command needs a `system` section"))
    }

    /// The attribute space: the model's, or the object grid's support.
    pub fn space(&self) -> Result<AttributeSpace<f64>, CliError> {
        if let Some(s) = &self.system {
            return AttributeSpace::interval(s.object_grid.lower, s.object_grid.upper)
                .map_err(space_err);
        }
        let m = self.model_section()?;
        match &m.space {
            Some(s) => AttributeSpace::new(s.lower.clone(), s.upper.clone()).map_err(space_err),
            None => AttributeSpace::unit(1).map_err(space_err),
        }
    }

    pub fn zoo_model(&self) -> Result<ZooModel<f64>, CliError> {
        let m = self.model_section()?;
        let space = self.space()?;
        let model = match m.kind.as_str() {
            "constant" => ZooModel::constant(space),
            "affine-1d" => {
                if space.dim() != 1 {
                    return Err(config_err("affine-1d needs a 1-D space"));
                }
                ZooModel::affine_on(space)
            }
            "scaled-profile" => {
                let p = m
                    .profile
                    .as_ref()
                    .ok_or_else(|| config_err("missing field `model.profile`"))?;
                if p.center.len() != space.dim() {
                    return Err(config_err("model.profile.center has the wrong dimension"));
                }
                if !(p.width > 0.0
                    && p.amplitude >= 0.0
                    && p.floor >= 0.0
                    && p.amplitude + p.floor > 0.0)
                {
                    return Err(config_err("model.profile must be positive"));
                }
                ZooModel::scaled_profile(
                    space,
                    GaussianBump {
                        amplitude: p.amplitude,
                        center: p.center.clone(),
                        width: p.width,
                        floor: p.floor,
                    },
                )
            }
            "gaussian-mixture" => ZooModel::gaussian_mixture(space, m.components.unwrap_or(1)),
            other => return Err(config_err(&format!("unknown model kind `{other}`"))),
        };
        use binloss::ParametricModel;
        if m.theta.len() != model.param_dim() {
            return Err(config_err(&format!(
                "model.theta has {} entries, {} model needs {}",
                m.theta.len(),
                m.kind,
                model.param_dim()
            )));
        }
        Ok(model)
    }

    pub fn delta_theta(&self) -> Result<Vec<f64>, CliError> {
        self.model_section()?
            .delta_theta
            .clone()
            .ok_or_else(|| config_err("missing field `model.delta_theta`"))
    }

    pub fn scheme(&self, space: &AttributeSpace<f64>) -> Result<BinningScheme<f64>, CliError> {
        match &self.binning {
            BinningSection::Counts(c) => uniform(space, c),
            BinningSection::Cells(cells) => {
                let cells = cells
                    .iter()
                    .map(|c| Cell::new(c.lower.clone(), c.upper.clone()))
                    .collect();
                BinningScheme::from_cells(space, cells)
                    .map_err(|e| config_err(&format!("binning: {e}")))
            }
        }
    }

    pub fn object_grid(&self) -> Result<ObjectGrid<f64>, CliError> {
        let g = &self.system_section()?.object_grid;
        ObjectGrid::new(g.lower, g.upper, g.points)
            .map_err(|e| config_err(&format!("system.object_grid: {e}")))
    }

    pub fn psf(&self) -> Result<PsfSpec<f64>, CliError> {
        let psf = match self.system_section()?.psf {
            PsfSection::Gaussian { width } => PsfSpec::gaussian(width),
            PsfSection::Sinc { bandwidth } => PsfSpec::bandlimited(bandwidth),
        };
        psf.validate()
            .map_err(|e| config_err(&format!("system.psf: {e}")))?;
        Ok(psf)
    }

    /// `(f, Δf)` sampled on the object grid.
    pub fn objects(&self) -> Result<(ObjectFunction<f64>, ObjectFunction<f64>), CliError> {
        let s = self.system_section()?;
        let grid = self.object_grid()?;
        let f = self.object(&s.f, &grid, None, "system.f")?;
        let df = self.object(&s.delta_f, &grid, Some(&f), "system.delta_f")?;
        Ok((f, df))
    }

    fn object(
        &self,
        spec: &ObjectSection,
        grid: &ObjectGrid<f64>,
        f: Option<&ObjectFunction<f64>>,
        field: &str,
    ) -> Result<ObjectFunction<f64>, CliError> {
        let values = match spec {
            ObjectSection::Values(v) => v.clone(),
            ObjectSection::File(p) => {
                let path = self.resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                text.split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|e| config_err(&format!("{}: `{t}`: {e}", path.display())))
                    })
                    .collect::<Result<_, _>>()?
            }
            ObjectSection::Bumps { background, bumps } => {
                grid.sample(|r| {
                    background
                        + bumps
                            .iter()
                            .map(|b| {
                                b.amplitude
                                    * (-(r - b.center).powi(2) / (2.0 * b.width * b.width)).exp()
                            })
                            .sum::<f64>()
                })
                .0
            }
            ObjectSection::ScaleOfF(alpha) => match f {
                Some(f) => f.scaled(*alpha).0,
                None => return Err(config_err(&format!("{field} cannot be `scale_of_f`"))),
            },
        };
        if values.len() != grid.len() {
            return Err(config_err(&format!(
                "{field} has {} values, object grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        finite(field, &values)?;
        Ok(ObjectFunction(values))
    }
}

pub(crate) fn uniform(
    space: &AttributeSpace<f64>,
    counts: &[usize],
) -> Result<BinningScheme<f64>, CliError> {
    let counts = if counts.len() == 1 && space.dim() > 1 {
        vec![counts[0]; space.dim()]
    } else {
        counts.to_vec()
    };
    BinningScheme::uniform_grid(space, &counts).map_err(|e| config_err(&format!("binning: {e}")))
}

fn config_err(msg: &str) -> CliError {
    CliError::Config(msg.to_string())
}

fn space_err(e: binloss::Error) -> CliError {
    config_err(&format!("space: {e}"))
}

fn finite(field: &str, v: &[f64]) -> Result<(), CliError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(config_err(&format!("{field} has non-finite entries")))
    }
}
