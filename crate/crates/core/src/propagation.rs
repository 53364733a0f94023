//! Synthetic RFID read generation from a log-distance path-loss model with
//! Gaussian shadowing.

use std::io::Write;

use thiserror::Error;

use crate::floorplan::Floorplan;
use crate::rng::{domain, hash_id, DetRng};

/// Tag-antenna distances are clamped to this value before evaluating the
/// path-loss model, avoiding the log singularity at zero range.
pub const MIN_DISTANCE_M: f64 = 0.1;

/// Exact CSV header for serialized read sets.
pub const READS_CSV_HEADER: &str = "ReaderIP,Antenna,RSSI,TagId,ContainerId,SessionId,Timestamp";

/// Log-distance path-loss model with shadowing: received power falls by
/// `10 * eta` dB per decade of distance around `p0_dbm` at `d0_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    /// Power at the reference distance, dBm.
    pub p0_dbm: f64,
    /// Reference distance, meters (> 0).
    pub d0_m: f64,
    /// Path-loss exponent (> 0).
    pub eta: f64,
    /// Shadowing standard deviation, dB (>= 0).
    pub sigma_db: f64,
}

impl Default for PropagationModel {
    fn default() -> Self {
        Self {
            p0_dbm: -30.0,
            d0_m: 1.0,
            eta: 2.2,
            sigma_db: 4.0,
        }
    }
}

impl PropagationModel {
    pub fn validate(&self) -> Result<(), PropagationError> {
        if self.d0_m.is_nan() || self.d0_m <= 0.0 {
            return Err(PropagationError::InvalidModel("d0 must be > 0".into()));
        }
        if self.eta.is_nan() || self.eta <= 0.0 {
            return Err(PropagationError::InvalidModel("eta must be > 0".into()));
        }
        if self.sigma_db.is_nan() || self.sigma_db < 0.0 {
            return Err(PropagationError::InvalidModel("sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Simulation shape: how many sessions and how many reads each tag emits per
/// antenna per session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub sessions: u32,
    pub reads_per_tag_per_session: u32,
    pub seed: u64,
    pub model: PropagationModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sessions: 8,
            reads_per_tag_per_session: 3,
            seed: 42,
            model: PropagationModel::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), PropagationError> {
        if self.sessions == 0 || self.reads_per_tag_per_session == 0 {
            return Err(PropagationError::InvalidModel(
                "session and read counts must be >= 1".into(),
            ));
        }
        self.model.validate()
    }
}

/// One emitted RFID read.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadRecord {
    pub reader_ip: String,
    pub antenna: u32,
    pub rssi_dbm: f64,
    pub tag_id: String,
    pub container_id: String,
    pub session_id: u32,
    /// Synthetic tick, monotone in generation order.
    pub timestamp: u64,
}

/// Reads in deterministic generation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReadSet {
    pub records: Vec<ReadRecord>,
}

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error("invalid propagation config: {0}")]
    InvalidModel(String),
    #[error("rssi_at domain error: distance {0} is not > 0")]
    NonPositiveDistance(f64),
}

/// Evaluate the path-loss model at distance `d` with the given shadowing
/// sample: `p0 - 10 * eta * log10(d / d0) + noise`.
pub fn rssi_at(model: &PropagationModel, d: f64, noise_db: f64) -> Result<f64, PropagationError> {
    if d.is_nan() || d <= 0.0 {
        return Err(PropagationError::NonPositiveDistance(d));
    }
    Ok(model.p0_dbm - 10.0 * model.eta * (d / model.d0_m).log10() + noise_db)
}

/// Generate reads for every (session, container, tag, reader, antenna,
/// repetition) tuple in that order. Candidates below an antenna's detection
/// floor are discarded. All randomness comes from counter-based streams
/// keyed by (seed, session, tag, reader, antenna, repetition), so the output
/// is a pure function of (floorplan, config).
///
/// Tag identifiers are session-scoped: a tag declared as `TAG-X` appears in
/// session 3 as `TAG-X-s3`. Acquisition sessions therefore never share tag
/// ids, which is what makes a session-granular train/test split leak-free.
pub fn generate_reads(fp: &Floorplan, cfg: &SimConfig) -> Result<ReadSet, PropagationError> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut tick: u64 = 0;
    for session in 0..cfg.sessions {
        for container in fp.containers() {
            for tag in &container.tag_ids {
                let tag_hash = hash_id(tag);
                for reader in fp.readers() {
                    let ip_hash = hash_id(&reader.ip);
                    for antenna in &reader.antennas {
                        for rep in 0..cfg.reads_per_tag_per_session {
                            let timestamp = tick;
                            tick += 1;
                            let dx = container.x - antenna.x;
                            let dy = container.y - antenna.y;
                            let d = (dx * dx + dy * dy).sqrt().max(MIN_DISTANCE_M);
                            let noise = if cfg.model.sigma_db == 0.0 {
                                0.0
                            } else {
                                let mut rng = DetRng::from_stream(
                                    cfg.seed,
                                    &[
                                        domain::READ_NOISE,
                                        session as u64,
                                        tag_hash,
                                        ip_hash,
                                        antenna.index as u64,
                                        rep as u64,
                                    ],
                                );
                                cfg.model.sigma_db * rng.standard_normal()
                            };
                            let rssi = rssi_at(&cfg.model, d, noise)?;
                            if rssi < antenna.detection_floor_dbm {
                                continue;
                            }
                            records.push(ReadRecord {
                                reader_ip: reader.ip.clone(),
                                antenna: antenna.index,
                                rssi_dbm: rssi,
                                tag_id: format!("{tag}-s{session}"),
                                container_id: container.container_id.clone(),
                                session_id: session,
                                timestamp,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(ReadSet { records })
}

impl ReadSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Serialize with the exact header and RSSI at 2 decimal places, rows in
    /// generation order.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(READS_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{:.2},{},{},{},{}\n",
                r.reader_ip,
                r.antenna,
                r.rssi_dbm,
                r.tag_id,
                r.container_id,
                r.session_id,
                r.timestamp
            ));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}
