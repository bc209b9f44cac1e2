use serde_json::{json, Value};

use crate::clustering::ClusterAssignment;
use crate::corpus::RegionCatalog;

/// FeatureCollection with one Point per clustered region. Regions without
/// coordinates get a null geometry.
pub fn clusters_geojson(assignment: &ClusterAssignment, catalog: &RegionCatalog) -> String {
    let features: Vec<Value> = assignment
        .region_ids
        .iter()
        .zip(&assignment.labels)
        .map(|(id, &cluster)| {
            let meta = catalog.get(id);
            let geometry = meta
                .and_then(|m| m.coordinates())
                .map(|(lat, lon)| json!({"type": "Point", "coordinates": [lon, lat]}))
                .unwrap_or(Value::Null);
            json!({
                "type": "Feature",
                "geometry": geometry,
                "properties": {
                    "region_id": id,
                    "name": meta.map(|m| m.name.as_str()),
                    "province": meta.and_then(|m| m.province.as_deref()),
                    "cluster": cluster,
                },
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({
        "type": "FeatureCollection",
        "features": features,
    }))
    .expect("geojson serializes");
    s.push('\n');
    s
}
