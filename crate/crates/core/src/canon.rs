//! Canonical JSON encoding for hashed payloads.
//!
//! Ledger payloads are hashed, so their byte encoding must be stable:
//! object keys sorted, no insignificant whitespace. `serde_json::Value`
//! with the default `BTreeMap` backing gives exactly that once a value has
//! been round-tripped through it.

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

/// Encode any serializable value as canonical JSON bytes.
pub fn to_canonical_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_vec(&v).expect("JSON value encodes")
}

/// Canonical JSON as a string, handy for payload construction in tests.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_string(&v).expect("JSON value encodes")
}
