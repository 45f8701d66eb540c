use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use confined_nls::diagnostics::{membership_of, Membership};
use confined_nls::propagator::EvolutionTrace;
use confined_nls::ModelParams;
use serde::Serialize;

use crate::commands::SweepRow;

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::KPlus => "KPlus",
        Membership::KMinus => "KMinus",
        Membership::OutOfScope => "OutOfScope",
    }
}

/// `t, M, E, G_1.., gradx_sq, Lr_norm, profile_B1, tail`, one row per sample.
pub fn write_trace_csv(path: &Path, trace: &EvolutionTrace, power: f64) -> Result<()> {
    let mut w = create(path)?;
    let k = trace.samples.first().map_or(0, |s| s.momentum.len());
    let g_cols: Vec<String> = (1..=k).map(|a| format!("G_{a}")).collect();
    let mut header = vec!["t", "M", "E"];
    header.extend(g_cols.iter().map(String::as_str));
    header.extend(["gradx_sq", "Lr_norm", "profile_B1", "tail"]);
    writeln!(w, "{}", header.join(","))?;
    for s in &trace.samples {
        let mut row = vec![s.t, s.mass, s.energy];
        row.extend(&s.momentum);
        row.extend([s.gradx_sq, s.l2s2s2.powf(1.0 / power), s.profile_b1, s.tail]);
        writeln!(w, "{}", row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Monitor curves against time: functionals, norm pieces, and membership when β is known.
pub fn write_plot_csv(path: &Path, trace: &EvolutionTrace, params: &ModelParams, beta: Option<f64>) -> Result<()> {
    let mut w = create(path)?;
    write!(w, "t,S,I,P,grady_sq,gradz_sq,ymom_sq,l2s2s2,y_virial_rate")?;
    writeln!(w, "{}", if beta.is_some() { ",membership" } else { "" })?;
    for s in &trace.samples {
        let vals = [s.t, s.action, s.nehari, s.virial, s.grady_sq, s.gradz_sq, s.ymom_sq, s.l2s2s2, s.y_virial_rate];
        write!(w, "{}", vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))?;
        match beta {
            Some(b) => writeln!(w, ",{}", membership_name(membership_of(params, s.action, s.virial, b)))?,
            None => writeln!(w)?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "value,S,P,I,membership,outcome,valid,growth_factor")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{:?},{},{}",
            r.value,
            r.action,
            r.virial,
            r.nehari,
            r.membership.map_or("", membership_name),
            r.outcome,
            r.valid,
            r.growth_factor
        )?;
    }
    w.flush()?;
    Ok(())
}
