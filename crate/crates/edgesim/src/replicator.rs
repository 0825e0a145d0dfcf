//! One-way replication of service definitions from the cloud store to the
//! edge store.
//!
//! Only an allowlisted subset of each service travels: the managed spec
//! fields (image, profile, concurrency limit, env). Status always belongs
//! to the receiving side and annotations not under our prefix belong to
//! whoever wrote them. The reconciler is level-based: an event only names a
//! service, the decision is recomputed from current store state, and an
//! apply happens only when the merged result actually differs. That last
//! check is what keeps the loop quiescent: our own writes come back as edge
//! events, re-merge to an identical spec, and die there.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use crate::workload::ProfileKind;
use crate::Site;

/// Annotations under this prefix belong to the replicator; everything else
/// on the edge copy is foreign and preserved verbatim.
pub const EDGE_MANAGED_PREFIX: &str = "edge.managed/";
const SOURCE_GENERATION_KEY: &str = "edge.managed/source-generation";

#[derive(Debug, thiserror::Error)]
pub enum ReplicationError {
    #[error("cannot merge specs for different services: '{cloud}' vs '{edge}'")]
    NameMismatch { cloud: String, edge: String },
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("failed to read manifest: {0}")]
    Io(#[from] std::io::Error),
}

/// The replicated subset of a service spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagedSpec {
    pub image: String,
    pub profile: ProfileKind,
    pub concurrency_limit: usize,
    pub env: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceSpec {
    pub name: String,
    /// Bumped by the owning store on every spec-changing write, never by
    /// status updates.
    pub generation: u64,
    pub managed_spec: ManagedSpec,
    pub status: BTreeMap<String, String>,
    pub annotations: BTreeMap<String, String>,
}

impl ServiceSpec {
    pub fn new(name: &str, profile: ProfileKind, concurrency_limit: usize) -> Self {
        ServiceSpec {
            name: name.to_string(),
            generation: 0,
            managed_spec: ManagedSpec {
                image: format!("{name}:latest"),
                profile,
                concurrency_limit,
                env: BTreeMap::new(),
            },
            status: BTreeMap::new(),
            annotations: BTreeMap::new(),
        }
    }

    fn edge_managed_annotations(&self) -> BTreeMap<&String, &String> {
        self.annotations
            .iter()
            .filter(|(k, _)| k.starts_with(EDGE_MANAGED_PREFIX))
            .collect()
    }
}

/// Builds the edge-side desired state for one service: managed fields from
/// the cloud, everything else from the current edge copy, and our
/// bookkeeping annotation pointing at the cloud generation it came from.
pub fn merge(cloud: &ServiceSpec, edge: &ServiceSpec) -> Result<ServiceSpec, ReplicationError> {
    if cloud.name != edge.name {
        return Err(ReplicationError::NameMismatch {
            cloud: cloud.name.clone(),
            edge: edge.name.clone(),
        });
    }
    let mut out = edge.clone();
    out.managed_spec = cloud.managed_spec.clone();
    out.annotations
        .retain(|k, _| !k.starts_with(EDGE_MANAGED_PREFIX));
    out.annotations
        .insert(SOURCE_GENERATION_KEY.to_string(), cloud.generation.to_string());
    Ok(out)
}

/// True when writing `desired` over `current` would change anything we
/// manage. Status and foreign annotations never count.
pub fn needs_apply(desired: &ServiceSpec, current: &ServiceSpec) -> bool {
    desired.managed_spec != current.managed_spec
        || desired.edge_managed_annotations() != current.edge_managed_annotations()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WatchKind {
    Added,
    Modified,
    Deleted,
}

/// Store notification. Carries a snapshot for logging; the reconciler
/// re-reads current state rather than trusting the snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct WatchEvent {
    pub source: Site,
    pub kind: WatchKind,
    pub spec: ServiceSpec,
}

/// In-memory service map with a synchronous watch queue. Single-owner, like
/// everything in the simulator; events accumulate until someone drains them.
#[derive(Debug, Clone)]
pub struct ServiceStore {
    site: Site,
    services: BTreeMap<String, ServiceSpec>,
    pending: VecDeque<WatchEvent>,
}

impl ServiceStore {
    pub fn new(site: Site) -> Self {
        ServiceStore {
            site,
            services: BTreeMap::new(),
            pending: VecDeque::new(),
        }
    }

    pub fn site(&self) -> Site {
        self.site
    }

    pub fn get(&self, name: &str) -> Option<&ServiceSpec> {
        self.services.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.services.keys()
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Spec-changing write. The store owns generations: whatever the caller
    /// put in `spec.generation` is replaced with previous + 1.
    pub fn apply_spec(&mut self, mut spec: ServiceSpec) {
        let (kind, next_gen) = match self.services.get(&spec.name) {
            Some(prev) => (WatchKind::Modified, prev.generation + 1),
            None => (WatchKind::Added, 1),
        };
        spec.generation = next_gen;
        self.services.insert(spec.name.clone(), spec.clone());
        self.pending.push_back(WatchEvent {
            source: self.site,
            kind,
            spec,
        });
    }

    /// Status-only write: no generation bump, but watchers still hear it.
    pub fn update_status(&mut self, name: &str, key: &str, value: &str) -> bool {
        match self.services.get_mut(name) {
            Some(spec) => {
                spec.status.insert(key.to_string(), value.to_string());
                let snapshot = spec.clone();
                self.pending.push_back(WatchEvent {
                    source: self.site,
                    kind: WatchKind::Modified,
                    spec: snapshot,
                });
                true
            }
            None => false,
        }
    }

    pub fn delete(&mut self, name: &str) -> bool {
        match self.services.remove(name) {
            Some(spec) => {
                self.pending.push_back(WatchEvent {
                    source: self.site,
                    kind: WatchKind::Deleted,
                    spec,
                });
                true
            }
            None => false,
        }
    }

    pub fn pop_event(&mut self) -> Option<WatchEvent> {
        self.pending.pop_front()
    }

    pub fn pending_events(&self) -> usize {
        self.pending.len()
    }
}

/// Drives edge state toward the cloud's. Counts applies so tests and the
/// harness can prove quiescence.
#[derive(Debug, Default)]
pub struct Reconciler {
    pub applied: u64,
    pub deleted: u64,
}

impl Reconciler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Handles one watch event against current store state. Returns whether
    /// an edge write happened.
    pub fn process_event(
        &mut self,
        event: &WatchEvent,
        cloud: &ServiceStore,
        edge: &mut ServiceStore,
    ) -> Result<bool, ReplicationError> {
        let name = &event.spec.name;
        match event.source {
            Site::Cloud => match event.kind {
                WatchKind::Added | WatchKind::Modified => {
                    match cloud.get(name) {
                        Some(cloud_spec) => self.converge(cloud_spec, edge),
                        // Gone since the event was queued; the Deleted event
                        // behind it will do the cleanup.
                        None => Ok(false),
                    }
                }
                WatchKind::Deleted => {
                    let ours = edge
                        .get(name)
                        .map(|s| s.annotations.contains_key(SOURCE_GENERATION_KEY))
                        .unwrap_or(false);
                    if ours && cloud.get(name).is_none() {
                        edge.delete(name);
                        self.deleted += 1;
                        return Ok(true);
                    }
                    Ok(false)
                }
            },
            // Edge events never initiate replication; they only get checked
            // for drift against the cloud copy. Our own applies re-merge to
            // an identical spec here, which is the no-feedback guarantee.
            Site::Edge => match cloud.get(name) {
                Some(cloud_spec) if edge.get(name).is_some() => self.converge(cloud_spec, edge),
                Some(cloud_spec) if event.kind == WatchKind::Deleted => {
                    // Someone removed a replicated service locally; the
                    // cloud still wants it. Cloud wins.
                    self.converge(cloud_spec, edge)
                }
                _ => Ok(false), // edge-created service: not ours to touch
            },
        }
    }

    fn converge(
        &mut self,
        cloud_spec: &ServiceSpec,
        edge: &mut ServiceStore,
    ) -> Result<bool, ReplicationError> {
        let desired = match edge.get(&cloud_spec.name) {
            Some(current) => {
                let merged = merge(cloud_spec, current)?;
                if !needs_apply(&merged, current) {
                    return Ok(false);
                }
                merged
            }
            None => {
                let skeleton = ServiceSpec {
                    name: cloud_spec.name.clone(),
                    generation: 0,
                    managed_spec: cloud_spec.managed_spec.clone(),
                    status: BTreeMap::new(),
                    annotations: BTreeMap::new(),
                };
                merge(cloud_spec, &skeleton)?
            }
        };
        edge.apply_spec(desired);
        self.applied += 1;
        Ok(true)
    }

    /// Drains both watch queues until neither produces new work. Returns the
    /// number of edge writes performed. Terminates because an apply settles
    /// the merged state: reprocessing it cannot need another apply.
    pub fn run_to_quiescence(
        &mut self,
        cloud: &mut ServiceStore,
        edge: &mut ServiceStore,
    ) -> Result<u64, ReplicationError> {
        let before = self.applied + self.deleted;
        loop {
            let event = match cloud.pop_event() {
                Some(ev) => ev,
                None => match edge.pop_event() {
                    Some(ev) => ev,
                    None => break,
                },
            };
            self.process_event(&event, cloud, edge)?;
        }
        Ok(self.applied + self.deleted - before)
    }
}

/// Parses a service manifest: one `name profile concurrency_limit` triple
/// per line, `#` comments and blank lines ignored.
pub fn load_manifest_str(text: &str) -> Result<Vec<ServiceSpec>, ReplicationError> {
    let mut specs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ReplicationError::Manifest {
                line,
                reason: format!(
                    "expected 'name profile concurrency_limit', got {} fields",
                    fields.len()
                ),
            });
        }
        let name = fields[0];
        if !seen.insert(name.to_string()) {
            return Err(ReplicationError::Manifest {
                line,
                reason: format!("duplicate service '{name}'"),
            });
        }
        let profile: ProfileKind = fields[1]
            .parse()
            .map_err(|e| ReplicationError::Manifest { line, reason: e })?;
        let concurrency: usize = fields[2].parse().map_err(|_| ReplicationError::Manifest {
            line,
            reason: format!("invalid concurrency_limit '{}'", fields[2]),
        })?;
        if concurrency == 0 {
            return Err(ReplicationError::Manifest {
                line,
                reason: "concurrency_limit must be at least 1".to_string(),
            });
        }
        specs.push(ServiceSpec::new(name, profile, concurrency));
    }
    Ok(specs)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ServiceSpec>, ReplicationError> {
    load_manifest_str(&std::fs::read_to_string(path)?)
}

/// The three functions the experiments deploy, one per base profile.
pub fn builtin_manifest() -> Vec<ServiceSpec> {
    vec![
        ServiceSpec::new("matmult", ProfileKind::MatMult, 1),
        ServiceSpec::new("image", ProfileKind::Image, 1),
        ServiceSpec::new("io", ProfileKind::Io, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud_spec(name: &str, image: &str, gen: u64) -> ServiceSpec {
        let mut s = ServiceSpec::new(name, ProfileKind::Image, 2);
        s.managed_spec.image = image.to_string();
        s.generation = gen;
        s
    }

    #[test]
    fn merge_takes_managed_fields_and_keeps_status() {
        let cloud = cloud_spec("thumb", "thumb:v2", 7);
        let mut edge = cloud_spec("thumb", "thumb:v1", 3);
        edge.status.insert("ready_replicas".into(), "2".into());
        let merged = merge(&cloud, &edge).unwrap();
        assert_eq!(merged.managed_spec.image, "thumb:v2");
        assert_eq!(merged.status["ready_replicas"], "2");
        assert_eq!(merged.annotations[SOURCE_GENERATION_KEY], "7");
        // Merge itself never touches the generation; the store does.
        assert_eq!(merged.generation, edge.generation);
    }

    #[test]
    fn merge_is_idempotent() {
        let cloud = cloud_spec("thumb", "thumb:v2", 9);
        let mut edge = cloud_spec("thumb", "thumb:v1", 2);
        edge.annotations.insert("team".into(), "vision".into());
        let once = merge(&cloud, &edge).unwrap();
        let twice = merge(&cloud, &once).unwrap();
        assert_eq!(once, twice);
        assert!(!needs_apply(&twice, &once));
    }

    #[test]
    fn merge_preserves_foreign_annotations() {
        let cloud = cloud_spec("thumb", "thumb:v2", 1);
        let mut edge = cloud_spec("thumb", "thumb:v1", 1);
        edge.annotations
            .insert("autoscaling.alpha/class".into(), "hpa".into());
        let merged = merge(&cloud, &edge).unwrap();
        assert_eq!(merged.annotations["autoscaling.alpha/class"], "hpa");
    }

    #[test]
    fn merge_rejects_name_mismatch() {
        let cloud = cloud_spec("a", "a:1", 1);
        let edge = cloud_spec("b", "b:1", 1);
        assert!(matches!(
            merge(&cloud, &edge),
            Err(ReplicationError::NameMismatch { .. })
        ));
    }

    #[test]
    fn status_only_difference_never_applies() {
        let cloud = cloud_spec("thumb", "thumb:v2", 4);
        let mut edge = merge(&cloud, &cloud_spec("thumb", "x", 0)).unwrap();
        edge.status.insert("observed".into(), "yes".into());
        let merged = merge(&cloud, &edge).unwrap();
        assert!(!needs_apply(&merged, &edge));
    }

    fn seeded_stores(n: usize) -> (ServiceStore, ServiceStore, Reconciler) {
        let mut cloud = ServiceStore::new(Site::Cloud);
        for i in 0..n {
            cloud.apply_spec(cloud_spec(&format!("svc{i}"), &format!("svc{i}:v1"), 0));
        }
        let mut edge = ServiceStore::new(Site::Edge);
        let mut rec = Reconciler::new();
        rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        (cloud, edge, rec)
    }

    #[test]
    fn initial_sync_applies_once_per_service() {
        let (cloud, edge, rec) = seeded_stores(3);
        assert_eq!(rec.applied, 3);
        assert_eq!(edge.len(), 3);
        for name in cloud.names() {
            assert_eq!(
                edge.get(name).unwrap().managed_spec,
                cloud.get(name).unwrap().managed_spec
            );
        }
    }

    #[test]
    fn one_cloud_change_is_exactly_one_apply() {
        let (mut cloud, mut edge, mut rec) = seeded_stores(3);
        let mut updated = cloud.get("svc1").unwrap().clone();
        updated.managed_spec.image = "svc1:v2".into();
        cloud.apply_spec(updated);
        let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        assert_eq!(writes, 1);
        assert_eq!(edge.get("svc1").unwrap().managed_spec.image, "svc1:v2");
    }

    #[test]
    fn edge_status_churn_triggers_zero_applies() {
        let (mut cloud, mut edge, mut rec) = seeded_stores(3);
        for i in 0..100 {
            edge.update_status("svc0", "ready_replicas", &i.to_string());
        }
        let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        assert_eq!(writes, 0, "status updates must not bounce back as applies");
    }

    #[test]
    fn cloud_delete_propagates() {
        let (mut cloud, mut edge, mut rec) = seeded_stores(2);
        cloud.delete("svc0");
        rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        assert!(edge.get("svc0").is_none());
        assert!(edge.get("svc1").is_some());
    }

    #[test]
    fn edge_created_services_are_ignored() {
        let (mut cloud, mut edge, mut rec) = seeded_stores(1);
        edge.apply_spec(cloud_spec("local-only", "local:v1", 0));
        let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        assert_eq!(writes, 0);
        assert!(edge.get("local-only").is_some());
        // A cloud delete of an unrelated name must not touch it either.
        cloud.delete("svc0");
        rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        assert!(edge.get("local-only").is_some());
    }

    #[test]
    fn edge_drift_is_repaired_cloud_wins() {
        let (mut cloud, mut edge, mut rec) = seeded_stores(1);
        let mut drifted = edge.get("svc0").unwrap().clone();
        drifted.managed_spec.concurrency_limit = 99;
        edge.apply_spec(drifted);
        rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
        assert_eq!(
            edge.get("svc0").unwrap().managed_spec.concurrency_limit,
            cloud.get("svc0").unwrap().managed_spec.concurrency_limit,
        );
    }

    #[test]
    fn generations_increase_monotonically() {
        let mut store = ServiceStore::new(Site::Cloud);
        let mut last = 0;
        for v in 1..=5 {
            store.apply_spec(cloud_spec("svc", &format!("svc:v{v}"), 0));
            let gen = store.get("svc").unwrap().generation;
            assert!(gen > last);
            last = gen;
        }
        store.update_status("svc", "ok", "1");
        assert_eq!(store.get("svc").unwrap().generation, last);
    }

    #[test]
    fn manifest_parses_and_rejects_garbage() {
        let text = "# functions\nmatmult matmult 1\nimage image 2 # two lanes\n\nio io 1\n";
        let specs = load_manifest_str(text).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[1].managed_spec.concurrency_limit, 2);

        for bad in [
            "matmult matmult",
            "x unknown 1",
            "x image zero",
            "x image 0",
            "a image 1\na io 1",
        ] {
            assert!(
                load_manifest_str(bad).is_err(),
                "manifest '{bad}' should fail"
            );
        }
    }

    fn arb_maps() -> impl Strategy<Value = BTreeMap<String, String>> {
        proptest::collection::btree_map("[a-z/.]{1,12}", "[a-z0-9]{0,6}", 0..5)
    }

    fn arb_spec(name: &'static str) -> impl Strategy<Value = ServiceSpec> {
        (
            "[a-z:.0-9]{1,16}",
            0usize..3,
            1usize..8,
            arb_maps(),
            arb_maps(),
            0u64..50,
        )
            .prop_map(move |(image, prof, conc, status, annotations, gen)| {
                let mut s = ServiceSpec::new(name, ProfileKind::ALL[prof], conc);
                s.managed_spec.image = image;
                s.status = status;
                s.annotations = annotations;
                s.generation = gen;
                s
            })
    }

    proptest! {
        #[test]
        fn merge_properties(cloud in arb_spec("svc"), edge in arb_spec("svc")) {
            let merged = merge(&cloud, &edge).unwrap();
            // Status belongs to the edge.
            prop_assert_eq!(&merged.status, &edge.status);
            // Foreign annotations survive.
            for (k, v) in &edge.annotations {
                if !k.starts_with(EDGE_MANAGED_PREFIX) {
                    prop_assert_eq!(merged.annotations.get(k), Some(v));
                }
            }
            // Managed fields are the cloud's.
            prop_assert_eq!(&merged.managed_spec, &cloud.managed_spec);
            // Idempotence, and a second apply would be a no-op.
            let again = merge(&cloud, &merged).unwrap();
            prop_assert_eq!(&again, &merged);
            prop_assert!(!needs_apply(&again, &merged));
        }
    }
}
