use std::fmt;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{gauge_phase, Coefficients};
use crate::spectral::{derivative, l2_norm, lp_norm, primitive, sobolev_norm, Field, Grid, GridSpec};

/// Per-sample diagnostics recorded by the solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    /// `||u||_2^2`
    pub mass: f64,
    /// `||d_x v||_2^2 + |mu|^2 ||v||_4^4` with `v = e^{-Lambda} u`; only in the special case.
    pub gauged_energy: Option<f64>,
    pub h1_norm: f64,
    pub hs_norm: f64,
    pub sup_primitive: f64,
    pub picard_iters: usize,
}

impl StepDiagnostics {
    pub fn measure(t: f64, u: &Field, c: &Coefficients, s: f64, picard_iters: usize) -> Self {
        let gauged_energy = if c.is_special_case() {
            gauge_phase(u, c).gauged().ok().map(|v| gauged_energy(&v, c))
        } else {
            None
        };
        StepDiagnostics {
            t,
            mass: l2_norm(u).powi(2),
            gauged_energy,
            h1_norm: sobolev_norm(u, 1.0),
            hs_norm: sobolev_norm(u, s),
            sup_primitive: primitive(u).sup(),
            picard_iters,
        }
    }
}

/// `||d_x v||_2^2 + |mu|^2 ||v||_4^4`.
pub fn gauged_energy(v: &Field, c: &Coefficients) -> f64 {
    l2_norm(&derivative(v)).powi(2) + c.mu.norm_sqr() * lp_norm(v, 4.0).powi(4)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Termination {
    Completed,
    /// The run stopped because the field became non-finite or its `L^2`
    /// norm exceeded the blow-up threshold.
    BlowUp {
        t: f64,
        l2_norm: f64,
    },
}

/// Time-stamped fields on one grid, with per-sample diagnostics.
#[derive(Clone)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    fields: Vec<Field>,
    diagnostics: Vec<StepDiagnostics>,
    termination: Termination,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("grid", &self.grid)
            .field("samples", &self.times.len())
            .field("t_end", &self.times.last())
            .field("termination", &self.termination)
            .finish()
    }
}

impl Trajectory {
    pub(crate) fn empty(grid: &Grid) -> Self {
        Trajectory {
            grid: grid.clone(),
            times: Vec::new(),
            fields: Vec::new(),
            diagnostics: Vec::new(),
            termination: Termination::Completed,
        }
    }

    /// Builds a trajectory from raw samples without diagnostics.
    pub fn from_samples(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::TrajectoryMismatch("no samples".into()))?;
        let grid = first.grid().clone();
        if times.len() != fields.len() {
            return Err(Error::TrajectoryMismatch(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        let mut traj = Trajectory::empty(&grid);
        for (t, f) in times.into_iter().zip(fields) {
            traj.push_raw(t, f)?;
        }
        Ok(traj)
    }

    fn push_raw(&mut self, t: f64, field: Field) -> Result<()> {
        if field.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::TrajectoryMismatch(format!(
                    "times must increase strictly ({t} after {last})"
                )));
            }
        }
        self.times.push(t);
        self.fields.push(field.into_physical());
        Ok(())
    }

    pub(crate) fn push(&mut self, t: f64, field: Field, diag: StepDiagnostics) -> Result<()> {
        self.push_raw(t, field)?;
        self.diagnostics.push(diag);
        Ok(())
    }

    pub(crate) fn set_termination(&mut self, termination: Termination) {
        self.termination = termination;
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &Field)> {
        self.times.last().map(|&t| (t, self.fields.last().unwrap()))
    }

    /// Applies `f` to every sample, keeping the time stamps.
    pub fn map_fields(&self, mut f: impl FnMut(&Field) -> Result<Field>) -> Result<Trajectory> {
        let fields = self.fields.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        let mut out = Trajectory::from_samples(self.times.clone(), fields)?;
        out.termination = self.termination;
        Ok(out)
    }

    /// The gauged frame `v = e^{-Lambda} u` of every sample.
    pub fn gauged(&self, c: &Coefficients) -> Result<Trajectory> {
        self.map_fields(|u| gauge_phase(u, c).gauged())
    }

    /// CSV with columns `t, mass, gauged_energy, h1_norm, hs_norm, sup_primitive, picard_iters`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mass,gauged_energy,h1_norm,hs_norm,sup_primitive,picard_iters")?;
        for d in &self.diagnostics {
            let energy = d.gauged_energy.map(|e| format!("{e:e}")).unwrap_or_default();
            writeln!(
                w,
                "{:e},{:e},{},{:e},{:e},{:e},{}",
                d.t, d.mass, energy, d.h1_norm, d.hs_norm, d.sup_primitive, d.picard_iters
            )?;
        }
        Ok(())
    }

    /// Little-endian binary dump: magic, grid metadata, then `(t, re, im ...)` per sample.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.grid.length().to_le_bytes())?;
        w.write_all(&self.grid.x_left().to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        for (t, f) in self.times.iter().zip(&self.fields) {
            w.write_all(&t.to_le_bytes())?;
            for v in f.values() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Trajectory> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::MalformedDump("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != DUMP_VERSION {
            return Err(Error::MalformedDump(format!("unsupported version {version}")));
        }
        let n = read_u64(&mut r)? as usize;
        let length = read_f64(&mut r)?;
        let x_left = read_f64(&mut r)?;
        let grid = crate::spectral::make_grid(n, length, x_left)?;
        let count = read_u64(&mut r)? as usize;
        let mut traj = Trajectory::empty(&grid);
        for _ in 0..count {
            let t = read_f64(&mut r)?;
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                values.push(Complex64::new(re, im));
            }
            traj.push_raw(t, Field::from_values(&grid, values)?)?;
        }
        Ok(traj)
    }

    pub fn to_json_dump(&self) -> FieldDump {
        FieldDump {
            grid: self.grid.spec(),
            times: self.times.clone(),
            samples: self
                .fields
                .iter()
                .map(|f| f.values().iter().map(|v| [v.re, v.im]).collect())
                .collect(),
        }
    }

    pub fn from_json_dump(dump: &FieldDump) -> Result<Trajectory> {
        let grid = dump.grid.build()?;
        let fields = dump
            .samples
            .iter()
            .map(|s| Field::from_values(&grid, s.iter().map(|p| Complex64::new(p[0], p[1])).collect()))
            .collect::<Result<Vec<_>>>()?;
        if fields.is_empty() {
            return Ok(Trajectory::empty(&grid));
        }
        Trajectory::from_samples(dump.times.clone(), fields)
    }
}

const DUMP_MAGIC: &[u8; 8] = b"GDNLSTRJ";
const DUMP_VERSION: u32 = 1;

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// JSON form of a trajectory dump; samples are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDump {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub samples: Vec<Vec<[f64; 2]>>,
}
