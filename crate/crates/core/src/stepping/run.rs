use super::Schedule;
use crate::assembly::Assembler;
use crate::discretization::Mesh2D;
use crate::error::{Error, Result};
use crate::postproc::DerivedFields;

/// Anything that marches a displacement/pressure state on a fixed mesh
/// topology.
pub trait TimeStepper {
    fn advance(&mut self) -> Result<()>;
    fn time(&self) -> f64;
    fn step_index(&self) -> usize;
    /// Total nodal displacement, interleaved `(x, y)` per Q2 node.
    fn displacement(&self) -> Vec<f64>;
    fn pressure(&self) -> Vec<f64>;
    fn acceleration(&self) -> Vec<f64>;
}

/// Named sampling location in reference coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub point: [f64; 2],
}

impl Probe {
    pub fn new(name: impl Into<String>, point: [f64; 2]) -> Self {
        Self {
            name: name.into(),
            point,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    /// Displacement of the node nearest to each probe.
    pub displacement: Vec<[f64; 2]>,
    /// Element-averaged volume ratio of the element containing each probe.
    pub volume_ratio: Vec<f64>,
    pub energy: Vec<f64>,
    /// Global dissipation `∫K∇p·∇p`.
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub mesh: Mesh2D,
    pub displacement: Vec<f64>,
    pub fields: DerivedFields,
}

/// Output of a run. On failure the records gathered so far are kept and
/// the error is stored alongside them.
#[derive(Debug)]
pub struct RunResult {
    pub probes: Vec<Probe>,
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub failure: Option<Error>,
}

impl RunResult {
    pub fn into_result(self) -> Result<RunResult> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

struct ResolvedProbe {
    node: usize,
    element: usize,
}

fn resolve(mesh0: &Mesh2D, probes: &[Probe]) -> Result<Vec<ResolvedProbe>> {
    probes
        .iter()
        .map(|p| {
            let (element, _) = mesh0.locate_initial(p.point).ok_or_else(|| {
                Error::config(
                    "schedule.probes",
                    format!("probe `{}` at {:?} lies outside the mesh", p.name, p.point),
                )
            })?;
            Ok(ResolvedProbe {
                node: mesh0.nearest_node(p.point),
                element,
            })
        })
        .collect()
}

fn record(
    assembler: &Assembler,
    mesh0: &Mesh2D,
    probes: &[ResolvedProbe],
    time: f64,
    u: &[f64],
    p: &[f64],
) -> Result<(StepRecord, Mesh2D, crate::assembly::ElementFields)> {
    let mesh = mesh0.with_displacement(u)?;
    let fields = assembler.element_fields(&mesh, p)?;
    let rec = StepRecord {
        time,
        displacement: probes.iter().map(|r| [u[2 * r.node], u[2 * r.node + 1]]).collect(),
        volume_ratio: probes.iter().map(|r| fields.volume_ratio[r.element]).collect(),
        energy: probes.iter().map(|r| fields.energy[r.element]).collect(),
        dissipation: fields.dissipation.iter().sum(),
    };
    Ok((rec, mesh, fields))
}

/// Advances `stepper` through the schedule, sampling probes after every
/// step and keeping full fields at the requested steps.
pub fn run(
    stepper: &mut dyn TimeStepper,
    assembler: &Assembler,
    mesh0: &Mesh2D,
    schedule: &Schedule,
    fluid_force: [f64; 2],
) -> RunResult {
    let mut out = RunResult {
        probes: schedule.probes.clone(),
        records: Vec::with_capacity(schedule.n_steps),
        snapshots: Vec::new(),
        failure: None,
    };
    let resolved = match schedule.validate().and_then(|_| resolve(mesh0, &schedule.probes)) {
        Ok(r) => r,
        Err(e) => {
            out.failure = Some(e);
            return out;
        }
    };
    for _ in 0..schedule.n_steps {
        let sampled = stepper.advance().and_then(|_| {
            let (u, p) = (stepper.displacement(), stepper.pressure());
            let (rec, mesh, fields) = record(assembler, mesh0, &resolved, stepper.time(), &u, &p)?;
            let k = stepper.step_index();
            let snap = if schedule.snapshots.contains(&k) {
                let fields = DerivedFields {
                    seepage: assembler.element_seepage(&mesh, &p, &stepper.acceleration(), fluid_force)?,
                    dissipation: rec.dissipation,
                    volume_ratio: fields.volume_ratio,
                    energy: fields.energy,
                    pressure: p,
                };
                Some(Snapshot {
                    step: k,
                    time: stepper.time(),
                    mesh,
                    displacement: u,
                    fields,
                })
            } else {
                None
            };
            Ok((rec, snap))
        });
        match sampled {
            Ok((rec, snap)) => {
                out.records.push(rec);
                out.snapshots.extend(snap);
            }
            Err(e) => {
                out.failure = Some(e);
                break;
            }
        }
    }
    out
}
