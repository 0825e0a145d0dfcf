//! The service replicator end to end: cloud definitions flow to the edge,
//! edge-owned state stays put, and nothing loops. Every stage prints the
//! write counters, which is where the quiescence guarantee is visible.
//!
//!     cargo run --example replication

use edgesim::{builtin_manifest, Reconciler, ServiceStore, Site};

fn main() {
    let mut cloud = ServiceStore::new(Site::Cloud);
    let mut edge = ServiceStore::new(Site::Edge);
    let mut rec = Reconciler::new();

    for spec in builtin_manifest() {
        cloud.apply_spec(spec);
    }
    let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
    println!("initial sync of {} services -> {writes} edge writes", cloud.len());

    // The edge reports status; an operator pins a foreign annotation.
    edge.update_status("io", "ready_replicas", "3");
    let mut annotated = edge.get("io").unwrap().clone();
    annotated
        .annotations
        .insert("ops/owner".to_string(), "platform".to_string());
    edge.apply_spec(annotated);
    let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
    println!("status + foreign annotation on the edge -> {writes} writes (edge state is not ours)");

    // A cloud-side upgrade propagates exactly once.
    let mut upgraded = cloud.get("io").unwrap().clone();
    upgraded.managed_spec.image = "io:v2".to_string();
    cloud.apply_spec(upgraded);
    let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
    let io = edge.get("io").unwrap();
    println!(
        "cloud upgrade to io:v2 -> {writes} write(s); edge now runs {} with status {:?} and owner {:?}",
        io.managed_spec.image,
        io.status.get("ready_replicas"),
        io.annotations.get("ops/owner")
    );

    // Local drift on a managed field is repaired.
    let mut drifted = edge.get("matmult").unwrap().clone();
    drifted.managed_spec.concurrency_limit = 16;
    edge.apply_spec(drifted);
    let writes = rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
    println!(
        "edge drift (concurrency 16) -> {writes} repair write(s), back to {}",
        edge.get("matmult").unwrap().managed_spec.concurrency_limit
    );

    // Deleting in the cloud deletes the replica.
    cloud.delete("image");
    rec.run_to_quiescence(&mut cloud, &mut edge).unwrap();
    println!(
        "cloud delete of 'image' -> edge copy gone: {}",
        edge.get("image").is_none()
    );

    println!(
        "totals: {} applies, {} deletes, {} services on the edge",
        rec.applied,
        rec.deleted,
        edge.len()
    );
}
