//! Turning raw reads into a labeled ML dataset: feature encoding, null
//! handling, tag-to-zone labeling, stratified subsampling and session-level
//! train/test splitting.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use thiserror::Error;

use crate::floorplan::{Floorplan, ZoneId};
use crate::propagation::{ReadRecord, ReadSet, READS_CSV_HEADER};
use crate::rng::{domain, DetRng};

/// Feature order used everywhere: index 0 = ip_code, 1 = antenna, 2 = rssi.
pub const FEATURE_NAMES: [&str; 3] = ["ip_code", "antenna", "rssi"];

/// One feature vector: encoded reader IP, antenna index, RSSI in dBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRow {
    pub ip_code: u32,
    pub antenna: u32,
    pub rssi: f64,
}

impl FeatureRow {
    pub fn feature(&self, index: usize) -> f64 {
        match index {
            0 => self.ip_code as f64,
            1 => self.antenna as f64,
            2 => self.rssi,
            _ => panic!("feature index {index} out of range"),
        }
    }
}

/// Feature rows with zone labels plus the tag and session bookkeeping needed
/// for leakage-safe splitting. Parallel arrays, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// Canonical zone set of the source floorplan (the class universe, which
    /// may include zones with no rows).
    pub zones: Vec<ZoneId>,
    pub rows: Vec<FeatureRow>,
    pub labels: Vec<ZoneId>,
    pub tag_of_row: Vec<String>,
    pub session_of_row: Vec<u32>,
}

/// Train/test halves with disjoint tags and sessions.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Sessions assigned to the test half, ascending.
    pub test_sessions: Vec<u32>,
}

/// A reads CSV row before null handling; every field may be absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawRead {
    pub reader_ip: Option<String>,
    pub antenna: Option<u32>,
    pub rssi: Option<f64>,
    pub tag_id: Option<String>,
    pub container_id: Option<String>,
    pub session_id: Option<u32>,
    pub timestamp: Option<u64>,
    /// Optional pre-assigned zone label (the trailing `Zone` CSV column).
    pub zone: Option<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("bad reader ip '{0}'")]
    BadIp(String),
    #[error("unknown container id '{0}'")]
    UnknownContainer(String),
    #[error("unknown zone label '{0}'")]
    UnknownZone(String),
    #[error("dataset is empty")]
    Empty,
    #[error("subsample target {target} exceeds dataset size {size}")]
    TargetTooLarge { target: usize, size: usize },
    #[error("session split needs at least 2 distinct sessions, found {0}")]
    TooFewSessions(usize),
    #[error("session split left the {0} half empty")]
    EmptySplitHalf(&'static str),
    #[error("test fraction {0} is not in (0, 1)")]
    BadTestFraction(f64),
    #[error("row {row} is missing required field {field}")]
    MissingField { row: usize, field: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Encode a dotted-quad reader IP as its big-endian 32-bit integer.
pub fn encode_reader_ip(ip: &str) -> Result<u32, DatasetError> {
    let parts: Vec<&str> = ip.split('.').collect();
    if parts.len() != 4 {
        return Err(DatasetError::BadIp(ip.to_string()));
    }
    let mut code: u32 = 0;
    for part in parts {
        let octet: u8 = part
            .parse()
            .map_err(|_| DatasetError::BadIp(ip.to_string()))?;
        code = (code << 8) | octet as u32;
    }
    Ok(code)
}

/// Parse a reads CSV (the simulator schema, optionally with a trailing
/// `Zone` column). Empty fields denote nulls.
pub fn load_reads_csv<R: Read>(reader: R) -> Result<Vec<RawRead>, DatasetError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| DatasetError::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let expected: Vec<&str> = READS_CSV_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    let has_zone = match got.len() {
        7 if got == expected => false,
        8 if got[..7] == expected[..] && got[7] == "Zone" => true,
        _ => {
            return Err(DatasetError::Parse {
                row: 0,
                message: format!("unexpected header '{}'", got.join(",")),
            })
        }
    };

    let mut out = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DatasetError::Parse {
            row,
            message: e.to_string(),
        })?;
        let field = |idx: usize| -> Option<&str> { record.get(idx).filter(|s| !s.is_empty()) };
        let parse_num = |idx: usize, name: &str| -> Result<Option<f64>, DatasetError> {
            field(idx)
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| DatasetError::Parse {
                            row,
                            message: format!("bad {name} value '{s}'"),
                        })
                })
                .transpose()
        };
        let parse_int = |idx: usize, name: &str| -> Result<Option<u64>, DatasetError> {
            field(idx)
                .map(|s| {
                    s.parse::<u64>().map_err(|_| DatasetError::Parse {
                        row,
                        message: format!("bad {name} value '{s}'"),
                    })
                })
                .transpose()
        };
        out.push(RawRead {
            reader_ip: field(0).map(str::to_string),
            antenna: parse_int(1, "Antenna")?.map(|v| v as u32),
            rssi: parse_num(2, "RSSI")?,
            tag_id: field(3).map(str::to_string),
            container_id: field(4).map(str::to_string),
            session_id: parse_int(5, "SessionId")?.map(|v| v as u32),
            timestamp: parse_int(6, "Timestamp")?,
            zone: if has_zone {
                field(7).map(str::to_string)
            } else {
                None
            },
        });
    }
    Ok(out)
}

/// Retain exactly the records where reader IP, antenna, RSSI and container
/// id are all present, preserving order.
pub fn drop_nulls(reads: Vec<RawRead>) -> Vec<RawRead> {
    reads
        .into_iter()
        .filter(|r| {
            r.reader_ip.is_some()
                && r.antenna.is_some()
                && r.rssi.is_some()
                && r.container_id.is_some()
        })
        .collect()
}

/// Promote null-free raw rows into complete read records. Tag, session and
/// timestamp must also be present for downstream split bookkeeping.
pub fn to_read_set(raws: &[RawRead]) -> Result<ReadSet, DatasetError> {
    let mut records = Vec::with_capacity(raws.len());
    for (i, raw) in raws.iter().enumerate() {
        let row = i + 1;
        let need = |field: &'static str| DatasetError::MissingField { row, field };
        records.push(ReadRecord {
            reader_ip: raw.reader_ip.clone().ok_or_else(|| need("ReaderIP"))?,
            antenna: raw.antenna.ok_or_else(|| need("Antenna"))?,
            rssi_dbm: raw.rssi.ok_or_else(|| need("RSSI"))?,
            tag_id: raw.tag_id.clone().ok_or_else(|| need("TagId"))?,
            container_id: raw
                .container_id
                .clone()
                .ok_or_else(|| need("ContainerId"))?,
            session_id: raw.session_id.ok_or_else(|| need("SessionId"))?,
            timestamp: raw.timestamp.ok_or_else(|| need("Timestamp"))?,
        });
    }
    Ok(ReadSet { records })
}

/// Label each read with the zone of its container and encode features.
pub fn label_reads(reads: &ReadSet, fp: &Floorplan) -> Result<LabeledDataset, DatasetError> {
    let zones = fp.zone_ids();
    let mut rows = Vec::with_capacity(reads.len());
    let mut labels = Vec::with_capacity(reads.len());
    let mut tag_of_row = Vec::with_capacity(reads.len());
    let mut session_of_row = Vec::with_capacity(reads.len());
    for r in &reads.records {
        let zone = fp
            .zone_of_container(&r.container_id)
            .ok_or_else(|| DatasetError::UnknownContainer(r.container_id.clone()))?;
        rows.push(FeatureRow {
            ip_code: encode_reader_ip(&r.reader_ip)?,
            antenna: r.antenna,
            rssi: r.rssi_dbm,
        });
        labels.push(zone.clone());
        tag_of_row.push(r.tag_id.clone());
        session_of_row.push(r.session_id);
    }
    Ok(LabeledDataset {
        zones,
        rows,
        labels,
        tag_of_row,
        session_of_row,
    })
}

/// Build a dataset from rows that carry their own `Zone` column (pre-labeled
/// external data). Labels must belong to the floorplan's zone set.
pub fn label_from_zone_column(
    raws: &[RawRead],
    fp: &Floorplan,
) -> Result<LabeledDataset, DatasetError> {
    let zones = fp.zone_ids();
    let zone_set: BTreeSet<&ZoneId> = zones.iter().collect();
    let mut rows = Vec::with_capacity(raws.len());
    let mut labels = Vec::with_capacity(raws.len());
    let mut tag_of_row = Vec::with_capacity(raws.len());
    let mut session_of_row = Vec::with_capacity(raws.len());
    for (i, raw) in raws.iter().enumerate() {
        let row = i + 1;
        let need = |field: &'static str| DatasetError::MissingField { row, field };
        let label = ZoneId::new(raw.zone.clone().ok_or_else(|| need("Zone"))?);
        if !zone_set.contains(&label) {
            return Err(DatasetError::UnknownZone(label.label().to_string()));
        }
        rows.push(FeatureRow {
            ip_code: encode_reader_ip(raw.reader_ip.as_deref().ok_or_else(|| need("ReaderIP"))?)?,
            antenna: raw.antenna.ok_or_else(|| need("Antenna"))?,
            rssi: raw.rssi.ok_or_else(|| need("RSSI"))?,
        });
        labels.push(label);
        tag_of_row.push(raw.tag_id.clone().ok_or_else(|| need("TagId"))?);
        session_of_row.push(raw.session_id.ok_or_else(|| need("SessionId"))?);
    }
    Ok(LabeledDataset {
        zones,
        rows,
        labels,
        tag_of_row,
        session_of_row,
    })
}

/// Serialize reads with their resolved zone labels (the reads schema plus a
/// trailing `Zone` column).
pub fn labeled_reads_csv(reads: &ReadSet, fp: &Floorplan) -> Result<String, DatasetError> {
    let mut out = String::new();
    out.push_str(READS_CSV_HEADER);
    out.push_str(",Zone\n");
    for r in &reads.records {
        let zone = fp
            .zone_of_container(&r.container_id)
            .ok_or_else(|| DatasetError::UnknownContainer(r.container_id.clone()))?;
        out.push_str(&format!(
            "{},{},{:.2},{},{},{},{},{}\n",
            r.reader_ip,
            r.antenna,
            r.rssi_dbm,
            r.tag_id,
            r.container_id,
            r.session_id,
            r.timestamp,
            zone
        ));
    }
    Ok(out)
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row counts per class over the canonical zone set. Zones with no rows
    /// are present with count 0.
    pub fn class_counts(&self) -> BTreeMap<ZoneId, u64> {
        let mut counts: BTreeMap<ZoneId, u64> = self.zones.iter().map(|z| (z.clone(), 0)).collect();
        for label in &self.labels {
            *counts.get_mut(label).expect("label in zone set") += 1;
        }
        counts
    }

    pub fn distinct_sessions(&self) -> BTreeSet<u32> {
        self.session_of_row.iter().copied().collect()
    }

    fn select(&self, keep: &[usize]) -> LabeledDataset {
        LabeledDataset {
            zones: self.zones.clone(),
            rows: keep.iter().map(|&i| self.rows[i]).collect(),
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            tag_of_row: keep.iter().map(|&i| self.tag_of_row[i].clone()).collect(),
            session_of_row: keep.iter().map(|&i| self.session_of_row[i]).collect(),
        }
    }
}

/// Proportional subsample to exactly `target_n` rows. Per-class quotas use
/// largest-remainder allocation over exact shares; rows are drawn uniformly
/// without replacement within each class from seeded streams. Output
/// preserves source row order.
pub fn stratified_subsample(
    ds: &LabeledDataset,
    target_n: usize,
    seed: u64,
) -> Result<LabeledDataset, DatasetError> {
    if ds.is_empty() {
        return Err(DatasetError::Empty);
    }
    if target_n > ds.len() {
        return Err(DatasetError::TargetTooLarge {
            target: target_n,
            size: ds.len(),
        });
    }
    let n = ds.len();
    let class_index: BTreeMap<&ZoneId, usize> =
        ds.zones.iter().enumerate().map(|(i, z)| (z, i)).collect();
    let mut rows_by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.zones.len()];
    for (row, label) in ds.labels.iter().enumerate() {
        rows_by_class[class_index[label]].push(row);
    }

    // Largest-remainder quotas: floor of the exact share, then distribute the
    // leftover rows by descending fractional remainder (class order breaking
    // ties). With target <= n every quota fits inside its class.
    let mut quotas: Vec<usize> = Vec::with_capacity(ds.zones.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(ds.zones.len());
    for (k, rows) in rows_by_class.iter().enumerate() {
        let share = target_n as f64 * rows.len() as f64 / n as f64;
        let base = share.floor() as usize;
        quotas.push(base);
        remainders.push((share - base as f64, k));
    }
    let mut leftover = target_n - quotas.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, k) in &remainders {
        if leftover == 0 {
            break;
        }
        if quotas[k] < rows_by_class[k].len() {
            quotas[k] += 1;
            leftover -= 1;
        }
    }
    debug_assert_eq!(leftover, 0);

    let mut keep: Vec<usize> = Vec::with_capacity(target_n);
    for (k, rows) in rows_by_class.iter().enumerate() {
        let quota = quotas[k];
        if quota == 0 {
            continue;
        }
        if quota == rows.len() {
            keep.extend_from_slice(rows);
            continue;
        }
        let mut ranked: Vec<(u64, usize)> = rows
            .iter()
            .map(|&row| {
                let mut rng = DetRng::from_stream(seed, &[domain::SUBSAMPLE, k as u64, row as u64]);
                (rng.next_u64(), row)
            })
            .collect();
        ranked.sort_unstable();
        keep.extend(ranked[..quota].iter().map(|&(_, row)| row));
    }
    keep.sort_unstable();
    Ok(ds.select(&keep))
}

/// Session-granular train/test split. Whole sessions are assigned to the
/// test half, in seeded-random order over session ids, until the test row
/// count first reaches `test_fraction * n`. If any tag id spans both halves
/// afterwards, every session containing that tag moves to train; the repair
/// iterates to a fixpoint.
pub fn session_split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPair, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::BadTestFraction(test_fraction));
    }
    let sessions = ds.distinct_sessions();
    if sessions.len() < 2 {
        return Err(DatasetError::TooFewSessions(sessions.len()));
    }
    let mut rows_per_session: BTreeMap<u32, usize> = BTreeMap::new();
    for &s in &ds.session_of_row {
        *rows_per_session.entry(s).or_insert(0) += 1;
    }

    let mut order: Vec<(u64, u32)> = sessions
        .iter()
        .map(|&s| {
            let mut rng = DetRng::from_stream(seed, &[domain::SESSION_SPLIT, s as u64]);
            (rng.next_u64(), s)
        })
        .collect();
    order.sort_unstable();

    let threshold = test_fraction * ds.len() as f64;
    let mut test_sessions: BTreeSet<u32> = BTreeSet::new();
    let mut test_rows = 0usize;
    for &(_, s) in &order {
        if (test_rows as f64) >= threshold {
            break;
        }
        test_sessions.insert(s);
        test_rows += rows_per_session[&s];
    }

    // Leakage repair: a tag seen on both sides drags all of its sessions to
    // the train half.
    let mut tag_sessions: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    for (tag, &s) in ds.tag_of_row.iter().zip(&ds.session_of_row) {
        tag_sessions.entry(tag.as_str()).or_default().insert(s);
    }
    loop {
        let mut moved = false;
        for sessions_of_tag in tag_sessions.values() {
            let in_test = sessions_of_tag.iter().any(|s| test_sessions.contains(s));
            let in_train = sessions_of_tag.iter().any(|s| !test_sessions.contains(s));
            if in_test && in_train {
                for s in sessions_of_tag {
                    test_sessions.remove(s);
                }
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    if test_sessions.is_empty() {
        return Err(DatasetError::EmptySplitHalf("test"));
    }
    if test_sessions.len() == sessions.len() {
        return Err(DatasetError::EmptySplitHalf("train"));
    }

    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (row, &s) in ds.session_of_row.iter().enumerate() {
        if test_sessions.contains(&s) {
            test_rows.push(row);
        } else {
            train_rows.push(row);
        }
    }
    Ok(SplitPair {
        train: ds.select(&train_rows),
        test: ds.select(&test_rows),
        test_sessions: test_sessions.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ip_encoding_examples() {
        assert_eq!(encode_reader_ip("0.0.0.1").unwrap(), 1);
        assert_eq!(encode_reader_ip("255.255.255.255").unwrap(), u32::MAX);
        assert_eq!(encode_reader_ip("192.168.1.10").unwrap(), 3_232_235_786);
    }

    #[test]
    fn ip_encoding_rejects_malformed_input() {
        for bad in ["1.2.3", "1.2.3.4.5", "a.b.c.d", "1.2.3.256", "", "1..2.3"] {
            assert!(encode_reader_ip(bad).is_err(), "{bad}");
        }
    }

    fn raw(ip: Option<&str>, rssi: Option<f64>, container: Option<&str>) -> RawRead {
        RawRead {
            reader_ip: ip.map(str::to_string),
            antenna: Some(1),
            rssi,
            tag_id: Some("T1".into()),
            container_id: container.map(str::to_string),
            session_id: Some(0),
            timestamp: Some(0),
            zone: None,
        }
    }

    #[test]
    fn drop_nulls_keeps_complete_rows_in_order() {
        let mut rows: Vec<RawRead> = (0..10)
            .map(|i| {
                let mut r = raw(Some("10.0.0.1"), Some(-50.0), Some("C1"));
                r.timestamp = Some(i);
                r
            })
            .collect();
        rows[4].rssi = None;
        let kept = drop_nulls(rows);
        assert_eq!(kept.len(), 9);
        let stamps: Vec<u64> = kept.iter().map(|r| r.timestamp.unwrap()).collect();
        assert_eq!(stamps, vec![0, 1, 2, 3, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn drop_nulls_all_complete_is_identity() {
        let rows: Vec<RawRead> = (0..5)
            .map(|_| raw(Some("10.0.0.1"), Some(-50.0), Some("C1")))
            .collect();
        assert_eq!(drop_nulls(rows.clone()), rows);
    }

    #[test]
    fn drop_nulls_all_missing_container_empties() {
        let rows: Vec<RawRead> = (0..5)
            .map(|_| raw(Some("10.0.0.1"), Some(-50.0), None))
            .collect();
        assert!(drop_nulls(rows).is_empty());
    }

    #[test]
    fn csv_round_trip_with_nulls() {
        let csv = "ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp\n\
                   10.0.0.1,1,-42.50,T1,C1,0,0\n\
                   10.0.0.2,2,,T2,C1,0,1\n";
        let rows = load_reads_csv(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].rssi, Some(-42.5));
        assert_eq!(rows[1].rssi, None);
        assert_eq!(drop_nulls(rows).len(), 1);
    }

    #[test]
    fn csv_rejects_non_finite_rssi() {
        let csv = "ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp\n\
                   10.0.0.1,1,NaN,T1,C1,0,0\n";
        assert!(matches!(
            load_reads_csv(csv.as_bytes()),
            Err(DatasetError::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn csv_rejects_unexpected_header() {
        let csv = "ip,ant,rssi\n1,2,3\n";
        assert!(matches!(
            load_reads_csv(csv.as_bytes()),
            Err(DatasetError::Parse { row: 0, .. })
        ));
    }

    fn toy_dataset(counts: &[(&str, usize)]) -> LabeledDataset {
        let zones: Vec<ZoneId> = counts.iter().map(|(z, _)| ZoneId::from(*z)).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut tags = Vec::new();
        let mut sessions = Vec::new();
        let mut i = 0u32;
        for (z, count) in counts {
            for _ in 0..*count {
                rows.push(FeatureRow {
                    ip_code: 1,
                    antenna: 1,
                    rssi: -(i as f64),
                });
                labels.push(ZoneId::from(*z));
                tags.push(format!("T{i}"));
                sessions.push(i % 4);
                i += 1;
            }
        }
        let mut sorted_zones = zones;
        sorted_zones.sort();
        LabeledDataset {
            zones: sorted_zones,
            rows,
            labels,
            tag_of_row: tags,
            session_of_row: sessions,
        }
    }

    #[test]
    fn subsample_full_target_is_identity() {
        let ds = toy_dataset(&[("A", 30), ("B", 20)]);
        let out = stratified_subsample(&ds, 50, 9).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn subsample_proportional_quotas() {
        let ds = toy_dataset(&[("A", 900), ("B", 100)]);
        let out = stratified_subsample(&ds, 100, 3).unwrap();
        let counts = out.class_counts();
        assert_eq!(counts[&ZoneId::from("A")], 90);
        assert_eq!(counts[&ZoneId::from("B")], 10);
    }

    #[test]
    fn subsample_largest_remainder_pattern() {
        // 12 equal classes, target 5000: first 8 classes get 417, the rest 416.
        let labels: Vec<(String, usize)> = (0..12).map(|i| (format!("Z{i:02}"), 600)).collect();
        let borrowed: Vec<(&str, usize)> = labels.iter().map(|(z, c)| (z.as_str(), *c)).collect();
        let ds = toy_dataset(&borrowed);
        let out = stratified_subsample(&ds, 5000, 11).unwrap();
        let counts = out.class_counts();
        let mut sizes: Vec<u64> = counts.values().copied().collect();
        assert_eq!(sizes.iter().sum::<u64>(), 5000);
        sizes.sort_unstable();
        assert_eq!(&sizes[..4], &[416, 416, 416, 416]);
        assert_eq!(&sizes[4..], &[417; 8]);
    }

    #[test]
    fn subsample_is_deterministic_and_target_checked() {
        let ds = toy_dataset(&[("A", 50), ("B", 30)]);
        let a = stratified_subsample(&ds, 40, 17).unwrap();
        let b = stratified_subsample(&ds, 40, 17).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            stratified_subsample(&ds, 81, 17),
            Err(DatasetError::TargetTooLarge {
                target: 81,
                size: 80
            })
        ));
    }

    fn session_dataset(sizes: &[usize]) -> LabeledDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut tags = Vec::new();
        let mut sessions = Vec::new();
        for (s, &size) in sizes.iter().enumerate() {
            for i in 0..size {
                rows.push(FeatureRow {
                    ip_code: 1,
                    antenna: 1,
                    rssi: -40.0,
                });
                labels.push(ZoneId::from("A"));
                tags.push(format!("T{s}-{i}"));
                sessions.push(s as u32);
            }
        }
        LabeledDataset {
            zones: vec![ZoneId::from("A")],
            rows,
            labels,
            tag_of_row: tags,
            session_of_row: sessions,
        }
    }

    #[test]
    fn ten_equal_sessions_at_ten_percent_take_one_session() {
        let ds = session_dataset(&[10; 10]);
        let split = session_split(&ds, 0.1, 5).unwrap();
        assert_eq!(split.test_sessions.len(), 1);
        assert_eq!(split.test.len(), 10);
        assert_eq!(split.train.len(), 90);
    }

    #[test]
    fn two_sessions_at_half_take_one_each() {
        let ds = session_dataset(&[10, 10]);
        let split = session_split(&ds, 0.5, 5).unwrap();
        assert_eq!(split.test_sessions.len(), 1);
        assert_eq!(split.train.distinct_sessions().len(), 1);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = session_dataset(&[10, 20, 30, 15]);
        let a = session_split(&ds, 0.25, 123).unwrap();
        let b = session_split(&ds, 0.25, 123).unwrap();
        assert_eq!(a.test_sessions, b.test_sessions);
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn split_requires_two_sessions() {
        let ds = session_dataset(&[10]);
        assert!(matches!(
            session_split(&ds, 0.5, 1),
            Err(DatasetError::TooFewSessions(1))
        ));
    }

    #[test]
    fn shared_tags_are_repaired_to_train() {
        let mut ds = session_dataset(&[10, 10, 10, 10]);
        // One tag spanning all sessions forces everything to train -> error.
        for tag in ds.tag_of_row.iter_mut() {
            *tag = "SHARED".into();
        }
        assert!(matches!(
            session_split(&ds, 0.25, 9),
            Err(DatasetError::EmptySplitHalf("test"))
        ));
        // A tag spanning two sessions moves both to train, split still works.
        let mut ds = session_dataset(&[10, 10, 10, 10]);
        let span_sessions: Vec<usize> = ds
            .session_of_row
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= 1)
            .map(|(i, _)| i)
            .collect();
        for i in span_sessions {
            ds.tag_of_row[i] = "SPAN01".into();
        }
        for seed in 0..20 {
            if let Ok(split) = session_split(&ds, 0.25, seed) {
                let train_tags: BTreeSet<&String> = split.train.tag_of_row.iter().collect();
                let test_tags: BTreeSet<&String> = split.test.tag_of_row.iter().collect();
                assert!(train_tags.is_disjoint(&test_tags), "seed {seed}");
                assert!(!split.test_sessions.contains(&0) || !split.test_sessions.contains(&1));
                assert!(
                    !split.test_sessions.contains(&0) && !split.test_sessions.contains(&1)
                        || split.test_sessions.is_empty()
                );
            }
        }
    }

    #[test]
    fn label_reads_unknown_container_errors() {
        let fp = crate::floorplan::Floorplan::default_lab();
        let reads = ReadSet {
            records: vec![ReadRecord {
                reader_ip: "10.0.0.1".into(),
                antenna: 1,
                rssi_dbm: -40.0,
                tag_id: "T".into(),
                container_id: "NOPE".into(),
                session_id: 0,
                timestamp: 0,
            }],
        };
        assert!(matches!(
            label_reads(&reads, &fp),
            Err(DatasetError::UnknownContainer(id)) if id == "NOPE"
        ));
    }

    #[test]
    fn label_reads_assigns_container_zones() {
        let fp = crate::floorplan::Floorplan::default_lab();
        let mk = |container: &str| ReadRecord {
            reader_ip: "10.0.0.1".into(),
            antenna: 1,
            rssi_dbm: -40.0,
            tag_id: "T".into(),
            container_id: container.into(),
            session_id: 0,
            timestamp: 0,
        };
        let reads = ReadSet {
            records: vec![mk("CONT-A1"), mk("CONT-A2"), mk("CONT-C1"), mk("CONT-B1")],
        };
        let ds = label_reads(&reads, &fp).unwrap();
        let labels: Vec<&str> = ds.labels.iter().map(|z| z.label()).collect();
        assert_eq!(labels, vec!["LabZoneA", "LabZoneA", "LabZoneC", "LabZoneB"]);
    }
}
