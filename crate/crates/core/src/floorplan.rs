//! Zoned facility model: zone geometry, reader/antenna/container placement,
//! and the zone adjacency graph derived from shared borders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

/// Name of one zone. Canonical ordering is lexicographic by label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZoneId(String);

impl ZoneId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ZoneId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    /// Closed containment: border points count as inside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Open containment: strictly inside, border excluded.
    pub fn contains_strict(&self, x: f64, y: f64) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }

    fn interiors_overlap(&self, other: &Rect) -> bool {
        let x_overlap = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let y_overlap = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        x_overlap > 0.0 && y_overlap > 0.0
    }

    /// True when the two rectangles share a boundary segment of positive
    /// length. Corner contact (zero-length overlap) does not count.
    fn shares_border(&self, other: &Rect) -> bool {
        let x_touch = self.x_max == other.x_min || other.x_max == self.x_min;
        let y_touch = self.y_max == other.y_min || other.y_max == self.y_min;
        let x_overlap = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let y_overlap = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        (x_touch && y_overlap > 0.0) || (y_touch && x_overlap > 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct Zone {
    pub id: ZoneId,
    pub rect: Rect,
}

#[derive(Debug, Clone)]
pub struct Antenna {
    /// Index within its reader, unique and >= 1.
    pub index: u32,
    pub x: f64,
    pub y: f64,
    /// Reads weaker than this are never produced by this antenna.
    pub detection_floor_dbm: f64,
}

#[derive(Debug, Clone)]
pub struct Reader {
    pub ip: String,
    pub antennas: Vec<Antenna>,
}

#[derive(Debug, Clone)]
pub struct Container {
    pub container_id: String,
    pub x: f64,
    pub y: f64,
    pub tag_ids: Vec<String>,
}

/// Validated facility model. Zones are stored in canonical (lexicographic)
/// order; readers and containers keep document order. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct Floorplan {
    zones: Vec<Zone>,
    readers: Vec<Reader>,
    containers: Vec<Container>,
    container_zone: BTreeMap<String, ZoneId>,
}

/// Symmetric, reflexive border-sharing relation over the zones of one
/// floorplan.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    zones: Vec<ZoneId>,
    adj: Vec<bool>,
}

#[derive(Debug, Error)]
pub enum FloorplanError {
    #[error("floorplan parse error: {0}")]
    Parse(String),
    #[error("floorplan validation error: {0}")]
    Validation(String),
}

fn invalid(msg: impl Into<String>) -> FloorplanError {
    FloorplanError::Validation(msg.into())
}

// Document schema. Unknown fields are rejected at every level.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FloorplanDoc {
    #[serde(default)]
    zones: Vec<ZoneDoc>,
    #[serde(default)]
    readers: Vec<ReaderDoc>,
    #[serde(default)]
    containers: Vec<ContainerDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneDoc {
    label: String,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReaderDoc {
    ip: String,
    antennas: Vec<AntennaDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AntennaDoc {
    index: u32,
    x: f64,
    y: f64,
    detection_floor_dbm: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContainerDoc {
    container_id: String,
    x: f64,
    y: f64,
    tag_ids: Vec<String>,
}

/// The 12-zone floorplan bundled with the artifact: a 4x3 grid of 6 m zones
/// with 6 readers (2 antennas each) and deliberately imbalanced container
/// placement.
pub const DEFAULT_FLOORPLAN_TOML: &str = include_str!("../assets/default_floorplan.toml");

/// Parse and validate a floorplan document.
pub fn load_floorplan(text: &str) -> Result<Floorplan, FloorplanError> {
    let doc: FloorplanDoc =
        toml::from_str(text).map_err(|e| FloorplanError::Parse(e.to_string()))?;
    Floorplan::from_parts(
        doc.zones
            .into_iter()
            .map(|z| Zone {
                id: ZoneId::new(z.label),
                rect: Rect {
                    x_min: z.x_min,
                    y_min: z.y_min,
                    x_max: z.x_max,
                    y_max: z.y_max,
                },
            })
            .collect(),
        doc.readers
            .into_iter()
            .map(|r| Reader {
                ip: r.ip,
                antennas: r
                    .antennas
                    .into_iter()
                    .map(|a| Antenna {
                        index: a.index,
                        x: a.x,
                        y: a.y,
                        detection_floor_dbm: a.detection_floor_dbm,
                    })
                    .collect(),
            })
            .collect(),
        doc.containers
            .into_iter()
            .map(|c| Container {
                container_id: c.container_id,
                x: c.x,
                y: c.y,
                tag_ids: c.tag_ids,
            })
            .collect(),
    )
}

/// True when `zones` is strictly sorted by label with no duplicates, the
/// form every zone-indexed structure in this crate expects.
pub fn is_canonical(zones: &[ZoneId]) -> bool {
    zones.windows(2).all(|pair| pair[0] < pair[1])
}

/// Checks that `ip` is a dotted quad with four octets in 0..=255.
pub fn validate_ip(ip: &str) -> Result<(), FloorplanError> {
    let octets: Vec<&str> = ip.split('.').collect();
    if octets.len() != 4 {
        return Err(invalid(format!("reader ip '{ip}' is not a dotted quad")));
    }
    for part in octets {
        part.parse::<u8>()
            .map_err(|_| invalid(format!("reader ip '{ip}' has invalid octet '{part}'")))?;
    }
    Ok(())
}

impl Floorplan {
    /// Validate and assemble a floorplan from raw parts. Zones are re-sorted
    /// into canonical label order; container -> zone resolution happens here.
    pub fn from_parts(
        mut zones: Vec<Zone>,
        readers: Vec<Reader>,
        containers: Vec<Container>,
    ) -> Result<Self, FloorplanError> {
        if zones.is_empty() {
            return Err(invalid("floorplan has no zones"));
        }
        zones.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in zones.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(invalid(format!("duplicate zone label '{}'", pair[0].id)));
            }
        }
        for z in &zones {
            if !(z.rect.x_min < z.rect.x_max && z.rect.y_min < z.rect.y_max) {
                return Err(invalid(format!(
                    "zone '{}' has a degenerate rectangle",
                    z.id
                )));
            }
        }
        for i in 0..zones.len() {
            for j in (i + 1)..zones.len() {
                if zones[i].rect.interiors_overlap(&zones[j].rect) {
                    return Err(invalid(format!(
                        "zones '{}' and '{}' have overlapping interiors",
                        zones[i].id, zones[j].id
                    )));
                }
            }
        }

        let bbox = bounding_box(&zones);
        let mut antenna_total = 0usize;
        let mut seen_ips = BTreeSet::new();
        for reader in &readers {
            validate_ip(&reader.ip)?;
            if !seen_ips.insert(reader.ip.clone()) {
                return Err(invalid(format!("duplicate reader ip '{}'", reader.ip)));
            }
            let mut seen_idx = BTreeSet::new();
            for a in &reader.antennas {
                if a.index == 0 {
                    return Err(invalid(format!(
                        "reader '{}' has antenna index 0; indices start at 1",
                        reader.ip
                    )));
                }
                if !seen_idx.insert(a.index) {
                    return Err(invalid(format!(
                        "reader '{}' has duplicate antenna index {}",
                        reader.ip, a.index
                    )));
                }
                if !bbox.contains(a.x, a.y) {
                    return Err(invalid(format!(
                        "antenna {} of reader '{}' at ({}, {}) lies outside the floorplan bounding box",
                        a.index, reader.ip, a.x, a.y
                    )));
                }
                if a.detection_floor_dbm.is_nan() {
                    return Err(invalid(format!(
                        "antenna {} of reader '{}' has a NaN detection floor",
                        a.index, reader.ip
                    )));
                }
                antenna_total += 1;
            }
        }
        if antenna_total == 0 {
            return Err(invalid("floorplan has no antennas"));
        }

        if containers.is_empty() {
            return Err(invalid("floorplan has no containers"));
        }
        let mut container_zone = BTreeMap::new();
        let mut seen_tags = BTreeSet::new();
        let mut seen_containers = BTreeSet::new();
        for c in &containers {
            if !seen_containers.insert(c.container_id.clone()) {
                return Err(invalid(format!(
                    "duplicate container id '{}'",
                    c.container_id
                )));
            }
            if c.tag_ids.is_empty() {
                return Err(invalid(format!(
                    "container '{}' has no tags",
                    c.container_id
                )));
            }
            for tag in &c.tag_ids {
                if !seen_tags.insert(tag.clone()) {
                    return Err(invalid(format!(
                        "tag id '{tag}' appears in more than one container"
                    )));
                }
            }
            let zone = zones
                .iter()
                .find(|z| z.rect.contains_strict(c.x, c.y))
                .ok_or_else(|| {
                    invalid(format!(
                        "container '{}' at ({}, {}) is outside all zones",
                        c.container_id, c.x, c.y
                    ))
                })?;
            container_zone.insert(c.container_id.clone(), zone.id.clone());
        }

        Ok(Self {
            zones,
            readers,
            containers,
            container_zone,
        })
    }

    /// The bundled 12-zone lab floorplan.
    pub fn default_lab() -> Self {
        load_floorplan(DEFAULT_FLOORPLAN_TOML).expect("bundled floorplan is valid")
    }

    /// Zones in canonical (lexicographic) order.
    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    /// Canonical zone id list.
    pub fn zone_ids(&self) -> Vec<ZoneId> {
        self.zones.iter().map(|z| z.id.clone()).collect()
    }

    pub fn readers(&self) -> &[Reader] {
        &self.readers
    }

    pub fn containers(&self) -> &[Container] {
        &self.containers
    }

    /// Zone that contains the given container, resolved at construction.
    pub fn zone_of_container(&self, container_id: &str) -> Option<&ZoneId> {
        self.container_zone.get(container_id)
    }

    /// Zone whose rectangle contains the point. Points on a shared border
    /// resolve to the zone earliest in canonical label order.
    pub fn zone_of_point(&self, x: f64, y: f64) -> Option<&ZoneId> {
        self.zones
            .iter()
            .find(|z| z.rect.contains(x, y))
            .map(|z| &z.id)
    }

    /// Derive the border-sharing adjacency graph. Self-adjacency is always
    /// present; corner contact does not make two zones adjacent.
    pub fn adjacency(&self) -> AdjacencyGraph {
        let k = self.zones.len();
        let mut adj = vec![false; k * k];
        for i in 0..k {
            adj[i * k + i] = true;
            for j in (i + 1)..k {
                if self.zones[i].rect.shares_border(&self.zones[j].rect) {
                    adj[i * k + j] = true;
                    adj[j * k + i] = true;
                }
            }
        }
        AdjacencyGraph {
            zones: self.zone_ids(),
            adj,
        }
    }
}

fn bounding_box(zones: &[Zone]) -> Rect {
    let mut bbox = zones[0].rect;
    for z in &zones[1..] {
        bbox.x_min = bbox.x_min.min(z.rect.x_min);
        bbox.y_min = bbox.y_min.min(z.rect.y_min);
        bbox.x_max = bbox.x_max.max(z.rect.x_max);
        bbox.y_max = bbox.y_max.max(z.rect.y_max);
    }
    bbox
}

impl AdjacencyGraph {
    /// Zones in canonical order.
    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
    }

    pub fn index_of(&self, zone: &ZoneId) -> Option<usize> {
        self.zones.binary_search(zone).ok()
    }

    pub fn is_adjacent(&self, a: &ZoneId, b: &ZoneId) -> Option<bool> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Some(self.adj[i * self.zones.len() + j])
    }

    pub fn is_adjacent_idx(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.zones.len() + j]
    }

    /// Number of neighbors excluding the zone itself.
    pub fn degree(&self, zone: &ZoneId) -> Option<usize> {
        let i = self.index_of(zone)?;
        let k = self.zones.len();
        Some((0..k).filter(|&j| j != i && self.adj[i * k + j]).count())
    }

    /// A graph with only self-adjacency over the given zones, useful as the
    /// "no relaxation" baseline.
    pub fn self_only(zones: Vec<ZoneId>) -> Self {
        let k = zones.len();
        let mut adj = vec![false; k * k];
        for i in 0..k {
            adj[i * k + i] = true;
        }
        Self { zones, adj }
    }

    /// Build a graph from explicit neighbor pairs (indices into the sorted
    /// zone list). Pairs are symmetrized and self-adjacency is added.
    pub fn from_pairs(mut zones: Vec<ZoneId>, pairs: &[(usize, usize)]) -> Self {
        zones.sort();
        let k = zones.len();
        let mut adj = vec![false; k * k];
        for i in 0..k {
            adj[i * k + i] = true;
        }
        for &(i, j) in pairs {
            assert!(i < k && j < k, "pair ({i}, {j}) out of range for {k} zones");
            adj[i * k + j] = true;
            adj[j * k + i] = true;
        }
        Self { zones, adj }
    }
}
