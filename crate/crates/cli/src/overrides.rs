use serde_json::{Map, Value};

/// Recursively merge `patch` into `base`; objects merge, everything else replaces.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Apply `key.path=value` pairs. Values parse as JSON when they can
/// (`3`, `0.5`, `true`, `[1,2]`), otherwise they are taken as strings.
pub fn apply_overrides(doc: &mut Value, pairs: &[String]) -> Result<(), String> {
    for pair in pairs {
        let (key, raw) = pair
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got {pair:?}"))?;
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(format!("--set has an empty key segment in {pair:?}"));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut slot = &mut *doc;
        for seg in key.split('.') {
            if !slot.is_object() {
                *slot = Value::Object(Map::new());
            }
            slot = slot
                .as_object_mut()
                .expect("just made an object")
                .entry(seg)
                .or_insert(Value::Null);
        }
        *slot = value;
    }
    Ok(())
}
