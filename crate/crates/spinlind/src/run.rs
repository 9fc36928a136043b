//! Run orchestration: one configured mode, artifacts written to a directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde_json::json;

use crate::acp::{zeta_determinant, zeta_recursive, AcpSystem};
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::master::{pauli_rates, propagate_with, MasterEquationModel, PropagateOptions};
use crate::qubit::QubitParams;
use crate::response::absorbed_power;
use crate::spectrum::{self, format_sig12, SpectrumOptions};
use crate::spin::{total_spin, Axis, DensityMatrix};
use crate::verify::{self, Report};

/// Largest accepted |numeric − analytic| in qubit mode.
pub const QUBIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub mode: Mode,
    pub artifacts: Vec<PathBuf>,
    /// One-line human summary.
    pub message: String,
}

struct Sink {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl Sink {
    fn path(&self, suffix: &str) -> PathBuf { self.dir.join(format!("{}_{suffix}", self.prefix)) }

    fn create(&mut self, suffix: &str) -> Result<BufWriter<File>> {
        let p = self.path(suffix);
        let f = File::create(&p)?;
        self.written.push(p);
        Ok(BufWriter::new(f))
    }

    fn json(&mut self, suffix: &str, value: &serde_json::Value) -> Result<()> {
        let mut w = self.create(suffix)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Runs `cfg` and writes artifacts under `out_dir`. Accuracy failures are
/// returned as errors after the artifacts describing them are on disk.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let mut sink = Sink { dir: out_dir.to_path_buf(), prefix: cfg.output.prefix.clone(), written: Vec::new() };
    let message = match cfg.mode {
        Mode::Spectrum => run_spectrum(cfg, &mut sink)?,
        Mode::Propagate => run_propagate(cfg, &mut sink)?,
        Mode::Qubit => run_qubit(cfg, &mut sink)?,
        Mode::Acp => run_acp(cfg, &mut sink)?,
        Mode::Verify => run_verify(cfg, &mut sink)?,
    };
    Ok(RunSummary { mode: cfg.mode, artifacts: sink.written, message })
}

fn model(cfg: &RunConfig) -> Result<MasterEquationModel> {
    let (Some(system), Some(field), Some(beta)) = (&cfg.system, &cfg.field, cfg.beta) else {
        return Err(Error::Validation("this mode needs [system] and [field] sections".into()));
    };
    MasterEquationModel::new(system.clone(), *field, beta)
}

/// Ten decay times of the slowest nonzero channel, or ten drive
/// correlation times when nothing relaxes.
fn default_t_end(m: &MasterEquationModel) -> f64 {
    let slowest = m.channels.iter().map(|c| c.rate()).filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    if slowest.is_finite() { 10.0 / slowest } else { 10.0 * m.field.dist.tau_f().min(1e6) }
}

fn run_spectrum(cfg: &RunConfig, sink: &mut Sink) -> Result<String> {
    let mc = cfg.molecule.as_ref().ok_or_else(|| Error::Validation("mode spectrum needs a [molecule] section".into()))?;
    let res: Vec<&str> = mc.resonance.iter().map(String::as_str).collect();
    let opts = SpectrumOptions { omega_o: mc.omega_o, scaled: mc.scaled, with_abundance: mc.abundance };
    let spec = spectrum::stick_spectrum(&mc.molecule, &res, opts)?;
    let mut w = sink.create("spectrum.csv")?;
    spectrum::write_csv(&spec, &mut w)?;
    w.flush()?;
    let mut w = sink.create("spectrum.svg")?;
    w.write_all(spectrum::render_svg(&spec, &mc.molecule.name).as_bytes())?;
    w.flush()?;
    Ok(format!(
        "{}: {} lines, total weight {}",
        mc.molecule.name,
        spec.lines.len(),
        spec.total_weight()
    ))
}

fn run_propagate(cfg: &RunConfig, sink: &mut Sink) -> Result<String> {
    let m = model(cfg)?;
    let t_end = cfg.propagate.t_end.unwrap_or_else(|| default_t_end(&m));
    let opts = PropagateOptions { dt: cfg.propagate.dt, record_every: cfg.propagate.record_every, unsafe_allow_any_state: false };
    let traj = propagate_with(&m, &m.boltzmann(), t_end, opts)?;
    let d = m.dim();
    let spins = [Axis::X, Axis::Y, Axis::Z].map(|a| total_spin(&m.system, a));

    let mut w = csv::Writer::from_writer(sink.create("trajectory.csv")?);
    let mut header = vec!["t".to_string(), "trace".into(), "min_eigenvalue".into(), "sx".into(), "sy".into(), "sz".into()];
    header.extend((0..d).map(|k| format!("p{k}")));
    w.write_record(&header)?;
    let mut min_eig = f64::INFINITY;
    for (t, rho) in traj.times.iter().zip(traj.schrodinger(&m)) {
        let dm = DensityMatrix::new(rho, 1.0);
        let lo = dm.eigenvalues()[0];
        min_eig = min_eig.min(lo);
        let mut row = vec![format_sig12(*t), format_sig12(dm.trace().re), format_sig12(lo)];
        row.extend(spins.iter().map(|s| format_sig12(dm.expectation(s).re)));
        row.extend(dm.populations().into_iter().map(format_sig12));
        w.write_record(&row)?;
    }
    w.flush()?;

    let rates = pauli_rates(&m);
    let power = absorbed_power(&m, 1.0);
    let mut pw = csv::Writer::from_writer(sink.create("power.csv")?);
    pw.write_record(["omega_o", "power"])?;
    for l in &power.lines {
        pw.write_record([format_sig12(l.omega_o), format_sig12(l.power)])?;
    }
    pw.flush()?;
    sink.json(
        "summary.json",
        &json!({
            "dimension": d,
            "t_end": t_end,
            "dt": cfg.propagate.dt.unwrap_or_else(|| m.default_dt()),
            "samples": traj.times.len(),
            "min_eigenvalue": min_eig,
            "final_trace_error": (traj.last().trace() - C64::new(1.0, 0.0)).norm(),
            "rates": rates,
            "power": power,
            "weak_field_warning": m.field.weak_field_warning(),
        }),
    )?;
    Ok(format!("{} samples to t = {t_end}, min eigenvalue {min_eig:.3e}", traj.times.len()))
}

fn run_qubit(cfg: &RunConfig, sink: &mut Sink) -> Result<String> {
    let m = model(cfg)?;
    let params = QubitParams::from_field(m.system.gammas()[0], &m.field, m.beta)?;
    let t_end = cfg.propagate.t_end.unwrap_or_else(|| {
        if params.gamma_rate > 0.0 { 10.0 / params.gamma_rate } else { default_t_end(&m) }
    });
    let opts = PropagateOptions { dt: cfg.propagate.dt, record_every: cfg.propagate.record_every, unsafe_allow_any_state: false };
    let cmp = verify::qubit_comparison(&m, t_end, opts)?;
    let mut w = csv::Writer::from_writer(sink.create("qubit.csv")?);
    w.write_record(["t", "s1_numeric", "s2_numeric", "s3_numeric", "s1_analytic", "s2_analytic", "s3_analytic"])?;
    for ((t, n), a) in cmp.times.iter().zip(&cmp.numeric).zip(&cmp.analytic) {
        let mut row = vec![format_sig12(*t)];
        row.extend(n.iter().chain(a).map(|x| format_sig12(*x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    let passed = cmp.max_deviation < QUBIT_TOLERANCE;
    sink.json(
        "qubit_report.json",
        &json!({
            "omega_o": params.omega_o,
            "omega_1": params.omega_1,
            "gamma_rate": params.gamma_rate,
            "varpi": params.varpi,
            "t_end": t_end,
            "samples": cmp.times.len(),
            "max_deviation": cmp.max_deviation,
            "tolerance": QUBIT_TOLERANCE,
            "passed": passed,
        }),
    )?;
    if !passed {
        return Err(Error::Accuracy(format!(
            "qubit max |numeric - analytic| = {:.3e} exceeds {QUBIT_TOLERANCE:e}",
            cmp.max_deviation
        )));
    }
    Ok(format!("qubit max |numeric - analytic| = {:.3e}", cmp.max_deviation))
}

fn c_json(z: C64) -> serde_json::Value { json!([z.re, z.im]) }

fn run_acp(cfg: &RunConfig, sink: &mut Sink) -> Result<String> {
    let (Some(system), Some(field), Some(beta)) = (&cfg.system, &cfg.field, cfg.beta) else {
        return Err(Error::Validation("mode acp needs [system] and [field] sections".into()));
    };
    let acp = AcpSystem::new(system.clone(), field.b0);
    let n = cfg.acp_order;
    let moments = acp.moments(n, beta)?;
    let zetas = zeta_recursive(&moments);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        let det = zeta_determinant(&moments, k)?;
        worst = worst.max((det - zetas.zetas[k]).norm());
        let corr = acp.initial_correction(k, beta)?;
        rows.push(json!({
            "order": k,
            "moment": c_json(moments.values[k - 1]),
            "zeta": c_json(zetas.zetas[k]),
            "zeta_determinant": c_json(det),
            "correction_trace": corr.trace().norm(),
            "correction_hermiticity": corr.hermiticity_residual(),
        }));
    }
    let exact = acp.exact_gibbs(beta);
    let residual = crate::spin::max_abs(&(acp.truncated_gibbs(n, beta)? - &exact));
    sink.json(
        "zeta.json",
        &json!({
            "beta": beta,
            "order": n,
            "rows": rows,
            "max_recursion_determinant_gap": worst,
            "gibbs_residual": residual,
        }),
    )?;
    if worst > 1e-10 * zetas.zetas.iter().map(|z| z.norm()).fold(1.0, f64::max) {
        return Err(Error::Accuracy(format!("zeta recursion and determinant differ by {worst:.3e}")));
    }
    Ok(format!("order {n}: max |Gibbs - truncated| = {residual:.3e}"))
}

fn run_verify(cfg: &RunConfig, sink: &mut Sink) -> Result<String> {
    let mut report = Report::default();
    if let Some(mc) = &cfg.molecule {
        for r in &mc.resonance {
            report.extend(verify::molecule_checks(&mc.molecule, r)?);
        }
    }
    if cfg.system.is_some() {
        let m = model(cfg)?;
        let t_end = cfg.propagate.t_end.unwrap_or_else(|| default_t_end(&m).min(50.0));
        report.extend(verify::model_checks(&m, t_end)?);
        if m.system.twice_j() == [1] {
            let cmp = verify::qubit_comparison(&m, t_end, PropagateOptions { dt: cfg.propagate.dt, record_every: cfg.propagate.record_every, ..Default::default() })?;
            report.checks.push(verify::Check::within("qubit: numeric vs closed form", cmp.max_deviation, QUBIT_TOLERANCE));
        }
    }
    let mut w = sink.create("verify.txt")?;
    for c in &report.checks {
        writeln!(
            w,
            "{} {:<48} value {:>12} tol {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            format!("{:.3e}", c.value),
            c.tolerance
        )?;
    }
    w.flush()?;
    sink.json("verify.json", &serde_json::to_value(&report)?)?;
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::Accuracy(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))));
    }
    Ok(format!("{} checks passed", report.checks.len()))
}
