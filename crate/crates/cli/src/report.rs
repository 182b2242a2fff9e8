//! Serializable result records assembled by the runner. Everything in
//! `RunReport` is deterministic for a fixed (problem spec, seed, version);
//! wall-clock timings live in a separate [`Timings`] record.

use serde::Serialize;
use spherebranch_core::continuation::{ComponentVerdict, SolutionPoint};
use spherebranch_core::degree::{ConjectureRecord, DegreeReport};
use spherebranch_core::eigenpairs::{ComponentKind, ConicFit, EigenpairComponent};
use spherebranch_core::spectrum::{eigensphere_dim, EigenvalueInfo, HypothesisCertificate};

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub input_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<EigenvalueRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<CertificateRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<DegreeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<Vec<ConjectureRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceReport>,
}

impl RunReport {
    pub fn new(version: &str, input_hash: String, seed: u64) -> Self {
        RunReport {
            version: version.to_string(),
            input_hash,
            seed,
            example: None,
            spectrum: None,
            certificates: None,
            degree: None,
            conjecture: None,
            map: None,
            trace: None,
        }
    }
}

/// Wall-clock timings per pipeline in milliseconds. Reported separately so
/// the primary report stays byte-identical across runs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub pipelines: Vec<(String, u128)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueRecord {
    pub lambda: f64,
    pub geometric_mult: usize,
    pub algebraic_mult: usize,
    pub eigensphere_dim: usize,
    pub kernel_basis: Vec<Vec<f64>>,
}

impl From<&EigenvalueInfo> for EigenvalueRecord {
    fn from(info: &EigenvalueInfo) -> Self {
        let kernel_basis = (0..info.kernel_basis.ncols())
            .map(|j| info.kernel_basis.column(j).iter().cloned().collect())
            .collect();
        EigenvalueRecord {
            lambda: info.lambda,
            geometric_mult: info.geometric_mult,
            algebraic_mult: info.algebraic_mult,
            eigensphere_dim: eigensphere_dim(info),
            kernel_basis,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRecord {
    pub lambda_star: f64,
    pub h1_compact: bool,
    pub h2_odd: bool,
    pub h3_residual: f64,
    pub h3_holds: bool,
    pub geometric_mult: usize,
    pub simple: bool,
}

impl From<&HypothesisCertificate> for CertificateRecord {
    fn from(cert: &HypothesisCertificate) -> Self {
        CertificateRecord {
            lambda_star: cert.lambda_star,
            h1_compact: cert.h1_compact,
            h2_odd: cert.h2_odd,
            h3_residual: cert.h3_residual,
            h3_holds: cert.h3_holds,
            geometric_mult: cert.geometric_mult,
            simple: cert.is_simple(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MapReport {
    pub window: ((f64, f64), (f64, f64)),
    pub grid: usize,
    pub components: Vec<ComponentRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentRecord {
    pub kind: ComponentKind,
    pub sample_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conic_fit: Option<ConicFit>,
    /// For isolated points: the located eigenpair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_file: Option<String>,
}

impl ComponentRecord {
    pub fn from_component(c: &EigenpairComponent, csv_file: Option<String>) -> Self {
        ComponentRecord {
            kind: c.kind,
            sample_count: c.samples.len(),
            conic_fit: c.conic_fit,
            point: if c.kind == ComponentKind::IsolatedPoint {
                c.samples.first().copied()
            } else {
                None
            },
            csv_file,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    /// Canonical representatives of the twin pairs of bifurcation points.
    pub bifurcation_points: Vec<Vec<f64>>,
    pub verdicts: Vec<VerdictRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictRecord {
    pub anchor_lambda: f64,
    pub anchor_index: usize,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_second: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
}

impl VerdictRecord {
    pub fn from_verdict(anchor: &SolutionPoint, index: usize, verdict: &ComponentVerdict) -> Self {
        let (name, lambda_second, x_second, diagnostics) = match verdict {
            ComponentVerdict::Unbounded => ("Unbounded", None, None, None),
            ComponentVerdict::TrivialReturn {
                lambda_second,
                x_second,
            } => (
                "TrivialReturn",
                Some(*lambda_second),
                Some(x_second.iter().cloned().collect::<Vec<f64>>()),
                None,
            ),
            ComponentVerdict::IsolatedCompact => ("IsolatedCompact", None, None, None),
            ComponentVerdict::Inconclusive { diagnostics } => {
                ("Inconclusive", None, None, Some(diagnostics.clone()))
            }
        };
        VerdictRecord {
            anchor_lambda: anchor.lambda,
            anchor_index: index,
            verdict: name.to_string(),
            lambda_second,
            x_second,
            diagnostics,
        }
    }
}

/// FNV-1a 64-bit hash, hex encoded; used to fingerprint the input spec.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
