//! JSON model documents and CSV point dumps.

use std::io::Write;

use super::{IntensityModel, PointConfiguration};
use crate::error::Result;

pub fn model_to_json(model: &IntensityModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(model)?)
}

pub fn model_from_json(s: &str) -> Result<IntensityModel> {
    let m: IntensityModel = serde_json::from_str(s)?;
    m.validate()?;
    Ok(m)
}

/// One row per point: `x0,…,x{d-1},mark` (mark column empty when unmarked).
pub fn write_points_csv<W: Write>(config: &PointConfiguration, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = config.dim();
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.push("mark".into());
    w.write_record(&header)?;
    for p in config.iter() {
        let mut row: Vec<String> = p.loc.iter().map(|v| format!("{v:?}")).collect();
        row.push(p.mark.map(|m| format!("{m:?}")).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
