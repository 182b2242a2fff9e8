//! JSON problem specification:
//! {"dim": n, "L": {"builder": "Tk", "k": 3} | {"dense": [row-major]},
//!  "C": {"builder": "harmonic"} | {"dense": [...]},
//!  "N": {"builder": "paper_N"} | {"linear": [row-major]}}.
//! Unknown keys are rejected.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{build_c, build_paper_n, build_tk, Pencil, Perturbation, PerturbedProblem};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dim: usize,
    #[serde(rename = "L")]
    pub l: OperatorSpec,
    #[serde(rename = "C")]
    pub c: OperatorSpec,
    #[serde(rename = "N")]
    pub n: PerturbationSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Builder(BuilderSpec),
    Dense(DenseSpec),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BuilderSpec {
    pub builder: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DenseSpec {
    pub dense: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum PerturbationSpec {
    Builder(BuilderSpec),
    Linear(LinearSpec),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    pub linear: Vec<f64>,
}

fn dense_matrix(dim: usize, data: &[f64], field: &str) -> Result<DMatrix<f64>> {
    if data.len() != dim * dim {
        return Err(Error::InvalidSpec(format!(
            "{field}: expected {} row-major entries for dim {dim}, got {}",
            dim * dim,
            data.len()
        )));
    }
    Ok(DMatrix::from_row_slice(dim, dim, data))
}

impl ProblemSpec {
    /// The canonical spec for the diagonal example family.
    pub fn example(k: usize, n: usize) -> ProblemSpec {
        ProblemSpec {
            dim: n,
            l: OperatorSpec::Builder(BuilderSpec {
                builder: "Tk".to_string(),
                k: Some(k),
            }),
            c: OperatorSpec::Builder(BuilderSpec {
                builder: "harmonic".to_string(),
                k: None,
            }),
            n: PerturbationSpec::Builder(BuilderSpec {
                builder: "paper_N".to_string(),
                k: None,
            }),
        }
    }

    pub fn build(&self) -> Result<PerturbedProblem> {
        let dim = self.dim;
        let l = match &self.l {
            OperatorSpec::Builder(b) => match b.builder.as_str() {
                "Tk" => {
                    let k = b.k.ok_or_else(|| {
                        Error::InvalidSpec("L.k is required for the Tk builder".to_string())
                    })?;
                    build_tk(k, dim)?
                }
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "L.builder: unknown builder {other:?} (expected \"Tk\")"
                    )));
                }
            },
            OperatorSpec::Dense(d) => dense_matrix(dim, &d.dense, "L.dense")?,
        };
        let (c, compact_c) = match &self.c {
            OperatorSpec::Builder(b) => match b.builder.as_str() {
                "harmonic" => (build_c(dim)?, true),
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "C.builder: unknown builder {other:?} (expected \"harmonic\")"
                    )));
                }
            },
            // Compactness of the represented operator is not decidable from a
            // finite block; dense C carries no compactness claim.
            OperatorSpec::Dense(d) => (dense_matrix(dim, &d.dense, "C.dense")?, false),
        };
        let perturbation = match &self.n {
            PerturbationSpec::Builder(b) => match b.builder.as_str() {
                "paper_N" => build_paper_n(dim)?,
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "N.builder: unknown builder {other:?} (expected \"paper_N\")"
                    )));
                }
            },
            PerturbationSpec::Linear(spec) => {
                Perturbation::linear(dense_matrix(dim, &spec.linear, "N.linear")?)?
            }
        };
        let pencil = Pencil::new(l, c, compact_c)?;
        PerturbedProblem::new(pencil, perturbation)
    }
}
