//! Plot-ready data files: per-zone RSSI summaries, RSSI histograms, the
//! reader/RSSI scatter feed and the confusion heatmap, plus the writer that
//! lays a full evaluation report out on disk.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::floorplan::ZoneId;
use crate::metrics::{quantile_sorted, EvalReport};

/// Per-zone RSSI five-number summary plus mean/std (box-plot feed).
pub fn rssi_by_zone_csv(ds: &LabeledDataset) -> String {
    let mut by_zone: BTreeMap<&ZoneId, Vec<f64>> = BTreeMap::new();
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        by_zone.entry(label).or_default().push(row.rssi);
    }
    let mut out = String::from("Zone,Count,Min,Q1,Median,Q3,Max,Mean,Std\n");
    for zone in &ds.zones {
        let Some(values) = by_zone.get_mut(zone) else {
            out.push_str(&format!("{zone},0,,,,,,,\n"));
            continue;
        };
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite rssi"));
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out.push_str(&format!(
            "{},{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}\n",
            zone,
            values.len(),
            values[0],
            quantile_sorted(values, 0.25),
            quantile_sorted(values, 0.5),
            quantile_sorted(values, 0.75),
            values[values.len() - 1],
            mean,
            var.sqrt()
        ));
    }
    out
}

/// Per-zone RSSI histogram over shared 1 dB bins (histogram feed).
pub fn rssi_histogram_csv(ds: &LabeledDataset) -> String {
    let mut out = String::from("Zone,BinStart,BinEnd,Count\n");
    if ds.is_empty() {
        return out;
    }
    let lo = ds
        .rows
        .iter()
        .map(|r| r.rssi)
        .fold(f64::INFINITY, f64::min)
        .floor() as i64;
    let hi = ds
        .rows
        .iter()
        .map(|r| r.rssi)
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil() as i64;
    let bins = ((hi - lo).max(1)) as usize;
    let mut counts: BTreeMap<&ZoneId, Vec<u64>> = BTreeMap::new();
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        let bin = (((row.rssi.floor() as i64) - lo).max(0) as usize).min(bins - 1);
        counts.entry(label).or_insert_with(|| vec![0; bins])[bin] += 1;
    }
    for zone in &ds.zones {
        if let Some(zone_counts) = counts.get(zone) {
            for (bin, &count) in zone_counts.iter().enumerate() {
                if count > 0 {
                    let start = lo + bin as i64;
                    out.push_str(&format!("{zone},{start},{},{count}\n", start + 1));
                }
            }
        }
    }
    out
}

/// Raw (ip_code, antenna, rssi, zone) rows (scatter feed).
pub fn scatter_csv(ds: &LabeledDataset) -> String {
    let mut out = String::from("IpCode,Antenna,RSSI,Zone\n");
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        out.push_str(&format!(
            "{},{},{:.2},{}\n",
            row.ip_code, row.antenna, row.rssi, label
        ));
    }
    out
}

/// File names written by [`write_report_dir`], relative to the directory.
pub const REPORT_FILES: [&str; 7] = [
    "report.txt",
    "confusion_matrix.csv",
    "per_class_metrics.csv",
    "aggregate_metrics.csv",
    "rssi_by_zone.csv",
    "rssi_histogram.csv",
    "scatter_ip_rssi.csv",
];

/// Write the structured-text report, metric CSVs and figure feeds for one
/// evaluated fold.
pub fn write_report_dir(report: &EvalReport, fold: &LabeledDataset, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.txt"), report.to_text())?;
    fs::write(dir.join("confusion_matrix.csv"), report.confusion.to_csv())?;
    fs::write(dir.join("per_class_metrics.csv"), report.per_class_csv())?;
    fs::write(dir.join("aggregate_metrics.csv"), report.aggregates_csv())?;
    fs::write(dir.join("rssi_by_zone.csv"), rssi_by_zone_csv(fold))?;
    fs::write(dir.join("rssi_histogram.csv"), rssi_histogram_csv(fold))?;
    fs::write(dir.join("scatter_ip_rssi.csv"), scatter_csv(fold))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureRow;

    fn toy() -> LabeledDataset {
        LabeledDataset {
            zones: vec![ZoneId::from("A"), ZoneId::from("B")],
            rows: vec![
                FeatureRow {
                    ip_code: 1,
                    antenna: 1,
                    rssi: -40.0,
                },
                FeatureRow {
                    ip_code: 1,
                    antenna: 2,
                    rssi: -42.0,
                },
                FeatureRow {
                    ip_code: 2,
                    antenna: 1,
                    rssi: -55.5,
                },
            ],
            labels: vec![ZoneId::from("A"), ZoneId::from("A"), ZoneId::from("B")],
            tag_of_row: vec!["T0".into(), "T1".into(), "T2".into()],
            session_of_row: vec![0, 0, 1],
        }
    }

    #[test]
    fn box_summary_covers_all_zones() {
        let csv = rssi_by_zone_csv(&toy());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("A,2,"));
        assert!(lines[2].starts_with("B,1,"));
    }

    #[test]
    fn histogram_counts_sum_to_rows() {
        let csv = rssi_histogram_csv(&toy());
        let total: u64 = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn scatter_has_one_row_per_sample() {
        let csv = scatter_csv(&toy());
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(1).unwrap().ends_with(",A"));
    }
}
