use frameorbit::frames::{self, distance_dj, distance_djl_upper, DjlBound};
use frameorbit::index::{essential_codimension, intersection_dims, IntersectionDims, ProjectionPair};
use frameorbit::io::{frame_to_csv, matrix_to_csv};
use frameorbit::linalg::{op_norm, reduced_min_modulus, unitarity_residual};
use frameorbit::orbits::{
    block_svd, classify_diagonal_modulus, classify_orbits, construct_bi_unitary, construct_biorbit_intertwiners,
    construct_left_intertwiner, construct_left_unitary, optimality_check, polar_split_check,
    special_representatives, BlockSvd, BlockSvdResiduals, DiagonalModulusReport, OrbitReport, PolarSplitReport,
    UNITARITY_TOL,
};
use frameorbit::{Certificate, Frame, GaugePredicate, Operator, Projection};
use serde::{Deserialize, Serialize};

use crate::args::{Command, FrameCommand, Mode};
use crate::report::{Inputs, Output, RunConfig};
use crate::Failure;

/// Recorded and recomputed residuals may differ by at most this much.
const REPRODUCTION_TOL: f64 = 1e-12;

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Pinv { .. } => "pinv",
        Command::Polar { .. } => "polar",
        Command::Gamma { .. } => "gamma",
        Command::Blocksvd { .. } => "blocksvd",
        Command::Index { .. } => "index",
        Command::Classify { .. } => "classify",
        Command::Certify { .. } => "certify",
        Command::Verify { .. } => "verify",
        Command::Representatives { .. } => "representatives",
        Command::Optimality { .. } => "optimality",
        Command::Frame(f) => match f {
            FrameCommand::Dual { .. } => "frame dual",
            FrameCommand::Parseval { .. } => "frame parseval",
            FrameCommand::Bounds { .. } => "frame bounds",
            FrameCommand::Distance { .. } => "frame distance",
            FrameCommand::Equiv { .. } => "frame equiv",
            FrameCommand::Uequiv { .. } => "frame uequiv",
            FrameCommand::NearestParseval { .. } => "frame nearest-parseval",
            FrameCommand::NearestDual { .. } => "frame nearest-dual",
            FrameCommand::Deficiency { .. } => "frame deficiency",
        },
    }
}

#[derive(Serialize)]
struct Polar {
    partial_isometry: Operator,
    modulus: Operator,
    /// `||A - V|A|||`.
    reconstruction: f64,
}

#[derive(Serialize)]
struct Gamma {
    gamma: f64,
    pinv_norm: f64,
}

#[derive(Serialize)]
struct Blocks {
    decomposition: BlockSvd,
    residuals: BlockSvdResiduals,
}

#[derive(Serialize)]
struct Index {
    index: i64,
    dims: IntersectionDims,
}

#[derive(Serialize)]
struct Classification {
    orbits: OrbitReport,
    polar_split: PolarSplitReport,
    diagonal_modulus: Option<DiagonalModulusReport>,
    notes: Vec<String>,
}

/// Certificate as read back from a `certify` report.
#[derive(Deserialize)]
struct CertifyReport {
    result: Certificate,
}

#[derive(Serialize)]
struct Verification {
    recorded: f64,
    recomputed: f64,
    difference: f64,
    tolerance: f64,
    /// `|recomputed - recorded| <= 1e-12`.
    reproduced: bool,
    unitarity: Option<f64>,
    satisfied: bool,
}

#[derive(Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct Distance {
    d_j: f64,
    djl: Option<DjlSummary>,
}

#[derive(Serialize)]
struct DjlSummary {
    upper: f64,
    initial: f64,
    refine: usize,
    accepted: usize,
    /// `||G - I||_Phi` at the witness.
    witness_dev: f64,
    /// `||G^-1 - I||_Phi` at the witness.
    witness_inverse_dev: f64,
    witness: Certificate,
}

impl DjlSummary {
    fn new(b: DjlBound) -> Result<Self, Failure> {
        Ok(Self {
            upper: b.upper,
            initial: b.initial,
            refine: b.refine,
            accepted: b.accepted,
            witness_dev: b.witness.left_dev,
            witness_inverse_dev: b.witness.inverse_dev()?,
            witness: b.witness,
        })
    }
}

fn certificate_output(c: &Certificate) -> Result<Output, Failure> {
    Ok(Output::new(c)?.failing_if(!c.satisfied, || {
        format!(
            "certificate not satisfied: residual {:.3e} (tolerance {:.3e}), unitarity {:?}",
            c.residual, c.tolerance, c.unitarity
        )
    }))
}

fn frame_output(f: &Frame) -> Result<Output, Failure> {
    Ok(Output::new(f)?.with_csv(frame_to_csv(f)))
}

pub fn run(cmd: &Command, cfg: &RunConfig, inputs: &mut Inputs) -> Result<Output, Failure> {
    let j = GaugePredicate::new(cfg.gauge, cfg.threshold)?;
    let g = cfg.gauge;
    let tol = cfg.rank_tol;
    match cmd {
        Command::Pinv { a } => {
            let p = inputs.operator(a, tol)?.pinv()?;
            Ok(Output::new(&p)?.with_csv(matrix_to_csv(&p)))
        }
        Command::Polar { a } => {
            let a = inputs.operator(a, tol)?;
            let p = a.polar()?;
            let reconstruction =
                op_norm(&(a.matrix() - p.partial_isometry.matrix() * p.modulus.matrix()));
            Output::new(&Polar {
                partial_isometry: p.partial_isometry,
                modulus: p.modulus,
                reconstruction,
            })
        }
        Command::Gamma { a } => {
            let a = inputs.operator(a, tol)?;
            Output::new(&Gamma {
                gamma: reduced_min_modulus(&a)?,
                pinv_norm: a.pinv()?.norm(),
            })
        }
        Command::Blocksvd { a } => {
            let a = inputs.operator(a, tol)?;
            let decomposition = block_svd(&a, cfg.grouping_tol)?;
            let residuals = decomposition.residuals(&a)?;
            Output::new(&Blocks { decomposition, residuals })
        }
        Command::Index { p, q } => {
            let p = Projection::new(inputs.operator(p, tol)?)?;
            let q = Projection::new(inputs.operator(q, tol)?)?;
            let pair = ProjectionPair::new(p, q)?;
            Output::new(&Index {
                index: essential_codimension(&pair)?,
                dims: intersection_dims(&pair)?,
            })
        }
        Command::Classify { a, b } => {
            let a = inputs.operator(a, tol)?;
            let b = inputs.operator(b, tol)?;
            let mut notes = Vec::new();
            let diagonal_modulus = classify_diagonal_modulus(&a, &b, &j, cfg.grouping_tol)
                .map_err(|e| notes.push(format!("grouped SVD: {e}")))
                .ok();
            Output::new(&Classification {
                orbits: classify_orbits(&a, &b, &j)?,
                polar_split: polar_split_check(&a, &b, &j)?,
                diagonal_modulus,
                notes,
            })
        }
        Command::Certify { a, b, mode } => {
            let a = inputs.operator(a, tol)?;
            let b = inputs.operator(b, tol)?;
            let c = match mode {
                Mode::Left => construct_left_intertwiner(&a, &b, g)?,
                Mode::Bi => construct_biorbit_intertwiners(&a, &b, g)?,
                Mode::LeftUnitary => construct_left_unitary(&a, &b, g)?,
                Mode::BiUnitary => construct_bi_unitary(&a, &b, g, cfg.grouping_tol)?,
            };
            certificate_output(&c)
        }
        Command::Verify { certificate, a, b } => {
            let text = inputs.read(certificate)?;
            let c = match serde_json::from_str::<CertifyReport>(&text) {
                Ok(r) => r.result,
                Err(_) => serde_json::from_str::<Certificate>(&text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", certificate.display())))?,
            };
            let a = inputs.operator(a, tol)?;
            let b = inputs.operator(b, tol)?;
            let recomputed = c.verify(&a, &b)?;
            let unitarity = c.kind.is_unitary().then(|| {
                let right = c.right.as_ref().map_or(0.0, |w| unitarity_residual(w.matrix()));
                right.max(unitarity_residual(c.left.matrix()))
            });
            let difference = (recomputed - c.residual).abs();
            let v = Verification {
                recorded: c.residual,
                recomputed,
                difference,
                tolerance: c.tolerance,
                reproduced: difference <= REPRODUCTION_TOL,
                unitarity,
                satisfied: recomputed <= c.tolerance && unitarity.is_none_or(|u| u <= UNITARITY_TOL),
            };
            let failed = !v.satisfied;
            Ok(Output::new(&v)?.failing_if(failed, || {
                format!("certificate does not verify: residual {recomputed:.3e} exceeds {:.3e}", c.tolerance)
            }))
        }
        Command::Representatives { a } => {
            let a = inputs.operator(a, tol)?;
            Output::new(&special_representatives(&a, &j)?)
        }
        Command::Optimality { a } => {
            let a = inputs.operator(a, tol)?;
            let r = optimality_check(&a, g, cfg.samples, cfg.seed)?;
            let failed = !r.ok;
            Ok(Output::new(&r)?.failing_if(failed, || "a sampled competitor beat the claimed minimizer".into()))
        }
        Command::Frame(fc) => run_frame(fc, cfg, &j, inputs),
    }
}

fn run_frame(cmd: &FrameCommand, cfg: &RunConfig, j: &GaugePredicate, inputs: &mut Inputs) -> Result<Output, Failure> {
    let g = cfg.gauge;
    match cmd {
        FrameCommand::Dual { f } => frame_output(&frames::canonical_dual(&inputs.frame(f)?)?),
        FrameCommand::Parseval { f } => frame_output(&frames::associated_parseval(&inputs.frame(f)?)?),
        FrameCommand::Bounds { f } => {
            let (lower, upper) = frames::frame_bounds(&inputs.frame(f)?)?;
            Output::new(&Bounds { lower, upper })
        }
        FrameCommand::Distance { f, g: h } => {
            let f = inputs.frame(f)?;
            let h = inputs.frame(h)?;
            let djl = if cfg.djl {
                Some(DjlSummary::new(distance_djl_upper(&f, &h, g, cfg.refine)?)?)
            } else {
                None
            };
            Output::new(&Distance {
                d_j: distance_dj(&f, &h, g)?,
                djl,
            })
        }
        FrameCommand::Equiv { f, g: h } => {
            let f = inputs.frame(f)?;
            let h = inputs.frame(h)?;
            Output::new(&frames::frames_equivalent(&f, &h, j)?)
        }
        FrameCommand::Uequiv { f, g: h } => {
            let f = inputs.frame(f)?;
            let h = inputs.frame(h)?;
            Output::new(&frames::frames_unitarily_equivalent(&f, &h, j)?)
        }
        FrameCommand::NearestParseval { f } => {
            let n = frames::nearest_parseval(&inputs.frame(f)?, g, cfg.samples, cfg.seed)?;
            nearest_output(n)
        }
        FrameCommand::NearestDual { f } => {
            let n = frames::nearest_dual(&inputs.frame(f)?, g, cfg.samples, cfg.seed)?;
            nearest_output(n)
        }
        FrameCommand::Deficiency { f } => Output::new(&frames::self_dual_deficiency(&inputs.frame(f)?, j)?),
    }
}

fn nearest_output(n: frames::NearestFrame) -> Result<Output, Failure> {
    let failed = !n.report.ok;
    Ok(Output::new(&n)?
        .with_csv(frame_to_csv(&n.frame))
        .failing_if(failed, || "a sampled competitor beat the claimed nearest frame".into()))
}
