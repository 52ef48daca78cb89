//! Rendered outputs: CSV tables with a versioned schema line and a compact
//! binary container for field snapshots.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use ndarray::Array1;

use crate::ensemble::{EnsembleOutput, SweepAxis, SweepPoint};
use crate::error::{Result, SitError};
use crate::field::{FieldState, TauGrid};

/// Schema tag written as the first line of every CSV this crate produces.
pub const CSV_SCHEMA: &str = "# sitpp-csv v1";

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Per-checkpoint table of one ensemble run.
pub fn render_run_csv(out: &EnsembleOutput) -> String {
    let mut s = String::new();
    s.push_str(CSV_SCHEMA);
    s.push_str(" run\n");
    s.push_str(
        "z,n_samples,mean_area_re,mean_area_im,mean_energy_re,mean_energy_im,\
         var_energy_re,var_energy_im,mean_excitation_re,mean_excitation_im,\
         mean_peak,squeezing,squeezing_db,squeezing_stderr\n",
    );
    for c in &out.checkpoints {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.z,
            c.n_samples,
            c.mean_area.re,
            c.mean_area.im,
            c.mean_energy.re,
            c.mean_energy.im,
            c.var_energy.re,
            c.var_energy.im,
            c.mean_excitation.re,
            c.mean_excitation.im,
            c.mean_peak,
            c.squeezing,
            opt(c.squeezing_db),
            c.squeezing_stderr,
        ));
    }
    s
}

/// Standard error of the squeezing ratio at the checkpoint where the optimum
/// occurs (0 when the optimum sits at the input).
pub fn stderr_at_optimum(out: &EnsembleOutput) -> f64 {
    out.checkpoints
        .iter()
        .find(|c| c.z == out.z_opt)
        .map(|c| c.squeezing_stderr)
        .unwrap_or(0.0)
}

/// One-row-per-point table of a parameter sweep.
pub fn render_sweep_csv(axis: SweepAxis, points: &[SweepPoint]) -> String {
    let mut s = String::new();
    s.push_str(CSV_SCHEMA);
    s.push_str(&format!(" sweep {}\n", axis.label()));
    s.push_str(
        "value,n_traj,n_completed,n_diverged,branch_flips,absorption,\
         s_opt,s_opt_db,s_opt_stderr,z_opt,energy_in_re,energy_out_re,\
         area_out_re\n",
    );
    for p in points {
        let o = &p.output;
        let first = o.checkpoints.first();
        let last = o.checkpoints.last();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.value,
            o.n_traj,
            o.n_completed,
            o.n_diverged,
            o.branch_flips,
            o.absorption,
            o.s_opt,
            opt(o.s_opt_db),
            stderr_at_optimum(o),
            o.z_opt,
            first.map_or(f64::NAN, |c| c.mean_energy.re),
            last.map_or(f64::NAN, |c| c.mean_energy.re),
            last.map_or(f64::NAN, |c| c.mean_area.re),
        ));
    }
    s
}

const FIELD_MAGIC: &[u8; 4] = b"SITF";
const FIELD_VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, x: u32) {
    buf.extend_from_slice(&x.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, x: u64) {
    buf.extend_from_slice(&x.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, x: f64) {
    buf.extend_from_slice(&x.to_le_bytes());
}

/// Write field snapshots as little-endian complex128 pairs under a `SITF`
/// header. Layout: magic, version, n_fields, n_tau, tau_min, tau_max, then
/// per snapshot its z followed by omega and omega_dag node values.
pub fn write_fields(path: &Path, grid: &TauGrid, fields: &[FieldState]) -> Result<()> {
    let mut buf = Vec::with_capacity(40 + fields.len() * (8 + 32 * grid.n_tau));
    buf.extend_from_slice(FIELD_MAGIC);
    put_u32(&mut buf, FIELD_VERSION);
    put_u64(&mut buf, fields.len() as u64);
    put_u64(&mut buf, grid.n_tau as u64);
    put_f64(&mut buf, grid.tau_min);
    put_f64(&mut buf, grid.tau_max);
    for f in fields {
        if f.omega.len() != grid.n_tau || f.omega_dag.len() != grid.n_tau {
            return Err(SitError::config("field snapshot does not match the tau grid"));
        }
        put_f64(&mut buf, f.z);
        for c in f.omega.iter().chain(f.omega_dag.iter()) {
            put_f64(&mut buf, c.re);
            put_f64(&mut buf, c.im);
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(SitError::config("field file is truncated"));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Read a `SITF` file back into the grid and snapshots it was written from.
pub fn read_fields(path: &Path) -> Result<(TauGrid, Vec<FieldState>)> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let mut cur = Cursor { data: &data, pos: 0 };
    if cur.take(4)? != FIELD_MAGIC {
        return Err(SitError::config("not a SITF field file (bad magic)"));
    }
    let version = cur.u32()?;
    if version != FIELD_VERSION {
        return Err(SitError::config(format!(
            "SITF version {version} not supported (expected {FIELD_VERSION})"
        )));
    }
    let n_fields = cur.u64()? as usize;
    let n_tau = cur.u64()? as usize;
    let tau_min = cur.f64()?;
    let tau_max = cur.f64()?;
    let grid = TauGrid::new(n_tau, tau_min, tau_max)?;
    let mut fields = Vec::with_capacity(n_fields);
    for _ in 0..n_fields {
        let z = cur.f64()?;
        let mut read_array = |cur: &mut Cursor| -> Result<Array1<Complex64>> {
            let mut a = Array1::from_elem(n_tau, Complex64::new(0.0, 0.0));
            for i in 0..n_tau {
                let re = cur.f64()?;
                let im = cur.f64()?;
                a[i] = Complex64::new(re, im);
            }
            Ok(a)
        };
        let omega = read_array(&mut cur)?;
        let omega_dag = read_array(&mut cur)?;
        fields.push(FieldState { omega, omega_dag, z });
    }
    if cur.pos != data.len() {
        return Err(SitError::config("SITF file has trailing bytes"));
    }
    Ok((grid, fields))
}
