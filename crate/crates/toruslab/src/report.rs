//! Artifact writers: RFC-4180 CSV tables, JSON documents, and binary64
//! sample streams with JSON sidecars.
//!
//! Every writer is deterministic: rows are emitted in the caller's order,
//! floats are printed with the shortest round-trip representation, and JSON
//! objects keep their insertion order, so identical inputs produce
//! byte-identical files.

use crate::equidist::WeylRow;
use crate::error::Result;
use crate::latimer::Packet;
use crate::zmat::QLattice;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Compact one-cell form of a lattice: denominator, then HNF rows.
pub fn lattice_string(lat: &QLattice) -> String {
    let rows: Vec<String> = (0..lat.basis.nrows)
        .map(|i| {
            (0..lat.basis.ncols)
                .map(|j| lat.basis.at(i, j).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    format!("{}:{}", lat.den, rows.join(";"))
}

/// JSON document for one ideal class: polynomial, denominator, and HNF
/// basis rows, all integers as decimal strings.
pub fn lattice_json(poly: &str, lat: &QLattice) -> Value {
    let hnf: Vec<Vec<String>> = (0..lat.basis.nrows)
        .map(|i| (0..lat.basis.ncols).map(|j| lat.basis.at(i, j).to_string()).collect())
        .collect();
    json!({
        "poly": poly,
        "den": lat.den.to_string(),
        "hnf": hnf,
    })
}

/// Write a JSON document with a trailing newline.
pub fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let mut buf = serde_json::to_vec_pretty(doc).expect("serializable document");
    buf.push(b'\n');
    std::fs::write(path, buf)?;
    Ok(())
}

/// Packet listing: one row per ideal class, grouped by packet.
pub fn write_packets_csv(path: &Path, poly: &str, packets: &[Packet]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["poly", "order_disc", "packet_id", "class_id", "class_hnf"])?;
    for (pid, pk) in packets.iter().enumerate() {
        for (cid, lat) in pk.classes.iter().enumerate() {
            w.write_record([
                poly,
                &pk.disc.to_string(),
                &pid.to_string(),
                &cid.to_string(),
                &lattice_string(lat),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Weyl-average table in long form: one row per (packet, suite function).
pub fn write_weyl_csv(path: &Path, rows: &[WeylRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "poly", "disc", "volume", "orbits", "samples", "fn", "average", "rhs", "deviation",
        "stderr",
    ])?;
    for r in rows {
        for k in 0..r.averages.len() {
            w.write_record([
                r.poly.as_str(),
                &r.disc.to_string(),
                &r.volume.to_string(),
                &r.orbits.to_string(),
                &r.samples.to_string(),
                &k.to_string(),
                &r.averages[k].to_string(),
                &r.rhs[k].to_string(),
                &r.deviations[k].to_string(),
                &r.stderr[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Summary manifest for a Weyl-average run.
pub fn weyl_manifest(rows: &[WeylRow]) -> Value {
    let worst: Vec<f64> = rows
        .iter()
        .map(|r| r.deviations.iter().fold(0.0f64, |a, d| a.max(d.abs())))
        .collect();
    json!({
        "packets": rows.len(),
        "suite_size": rows.first().map_or(0, |r| r.averages.len()),
        "max_abs_deviation": worst,
    })
}

/// One row of a local report.
#[derive(Debug, Clone)]
pub struct BuildingRow {
    pub p: u64,
    pub poly: String,
    pub conjugator: String,
    pub disc_d: f64,
    pub disc_a: f64,
    pub delta: f64,
    pub unit_density: f64,
    /// I(N_t) along the standard ray, r = 0, 1, 2, ...
    pub i_values: Vec<f64>,
}

pub fn write_building_csv(path: &Path, rows: &[BuildingRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "p", "poly", "conjugator", "disc_D", "disc_A", "delta", "unit_density", "i_values",
    ])?;
    for r in rows {
        let ivals = r.i_values.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        w.write_record([
            &r.p.to_string(),
            &r.poly,
            &r.conjugator,
            &r.disc_d.to_string(),
            &r.disc_a.to_string(),
            &r.delta.to_string(),
            &r.unit_density.to_string(),
            &ivals,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column table with caller-chosen headers (trend inputs, decay
/// reports, and similar).
pub fn write_xy_csv(path: &Path, xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([xlabel, ylabel])?;
    for (x, y) in pts {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Raw sample stream: `name.f64` holds little-endian binary64 values in
/// row-major order, `name.json` describes the shape plus caller metadata.
/// Returns the two paths written.
pub fn write_sample_stream(
    dir: &Path,
    name: &str,
    cols: usize,
    data: &[f64],
    extra: Value,
) -> Result<(PathBuf, PathBuf)> {
    assert!(cols > 0 && data.len() % cols == 0, "ragged sample stream");
    let bin_path = dir.join(format!("{name}.f64"));
    let mut buf = Vec::with_capacity(8 * data.len());
    for x in data {
        buf.write_all(&x.to_le_bytes())?;
    }
    std::fs::write(&bin_path, &buf)?;
    let mut doc = json!({
        "dtype": "f64",
        "byte_order": "little-endian",
        "layout": "row-major",
        "rows": data.len() / cols,
        "cols": cols,
    });
    if let (Some(obj), Some(add)) = (doc.as_object_mut(), extra.as_object()) {
        for (k, v) in add {
            obj.insert(k.clone(), v.clone());
        }
    }
    let json_path = dir.join(format!("{name}.json"));
    write_json(&json_path, &doc)?;
    Ok((bin_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latimer::packets;
    use crate::numfield::NumField;

    fn field(s: &str) -> NumField {
        NumField::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn packet_csv_lists_every_class() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("packets.csv");
        let pks = packets(&field("x^2 + 5")).unwrap();
        let classes: usize = pks.iter().map(|p| p.classes.len()).sum();
        write_packets_csv(&path, "x^2 + 5", &pks).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), classes + 1);
        assert_eq!(lines[0], "poly,order_disc,packet_id,class_id,class_hnf");
        assert!(lines[1].starts_with("x^2 + 5,20,0,0,"));
        // Byte determinism on re-write.
        let path2 = dir.path().join("packets2.csv");
        write_packets_csv(&path2, "x^2 + 5", &pks).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn lattice_json_uses_decimal_strings() {
        let pks = packets(&field("x^2 + 5")).unwrap();
        let lat = &pks[0].classes[0];
        let doc = lattice_json("x^2 + 5", lat);
        assert_eq!(doc["poly"], "x^2 + 5");
        assert!(doc["den"].is_string());
        assert!(doc["hnf"][0][0].is_string());
        let s = lattice_string(&QLattice::standard(2));
        assert_eq!(s, "1:1,0;0,1");
    }

    #[test]
    fn sample_stream_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let data = vec![1.0, -0.5, 3.25, f64::MIN_POSITIVE, 0.0, 2.0_f64.sqrt()];
        let (bin, side) =
            write_sample_stream(dir.path(), "cloud", 3, &data, json!({"seed": 7})).unwrap();
        let bytes = std::fs::read(&bin).unwrap();
        assert_eq!(bytes.len(), 8 * data.len());
        let back: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(back, data);
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
        assert_eq!(doc["rows"], 2);
        assert_eq!(doc["cols"], 3);
        assert_eq!(doc["seed"], 7);
    }

    #[test]
    fn building_and_xy_tables() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("building.csv");
        let row = BuildingRow {
            p: 7,
            poly: "x^2 - x - 1".into(),
            conjugator: "1,0;0,7".into(),
            disc_d: 49.0,
            disc_a: 1.0,
            delta: 0.97,
            unit_density: 0.125,
            i_values: vec![1.0, 0.5],
        };
        write_building_csv(&path, &[row]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("p,poly,conjugator,disc_D,disc_A,delta,unit_density,i_values\n"));
        assert!(text.contains("7,x^2 - x - 1,\"1,0;0,7\",49,1,0.97,0.125,1;0.5"));
        let xy = dir.path().join("trend.csv");
        write_xy_csv(&xy, "log_disc", "log_vol", &[(1.0, 2.0), (3.0, 4.5)]).unwrap();
        let text = std::fs::read_to_string(&xy).unwrap();
        assert_eq!(text, "log_disc,log_vol\n1,2\n3,4.5\n");
    }
}
