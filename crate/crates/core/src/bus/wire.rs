use serde_json::Value;

use super::{BusError, Envelope, Payload};
use crate::canonical::{self, CanonicalError};

/// Canonical JSON bytes of an envelope.
pub fn encode_envelope(envelope: &Envelope) -> Result<Vec<u8>, BusError> {
    canonical::to_vec(envelope).map_err(|e| BusError::Malformed(e.to_string()))
}

/// Parse one envelope. Requires exactly the keys `topic, seq, stamp,
/// payload` and a payload matching the topic schema.
pub fn decode_envelope(bytes: &[u8]) -> Result<Envelope, BusError> {
    let value = canonical::parse_value(bytes).map_err(|e| match e {
        CanonicalError::Parse { offset, message } => BusError::Parse { offset, message },
        other => BusError::Malformed(other.to_string()),
    })?;
    let Value::Object(mut map) = value else {
        return Err(BusError::Malformed("envelope is not an object".into()));
    };
    if let Some(extra) = map
        .keys()
        .find(|k| !matches!(k.as_str(), "topic" | "seq" | "stamp" | "payload"))
    {
        return Err(BusError::Malformed(format!("unknown key {extra:?}")));
    }
    let topic = match map.remove("topic") {
        Some(Value::String(s)) => s,
        _ => return Err(BusError::Malformed("missing or non-string `topic`".into())),
    };
    let seq = map
        .get("seq")
        .and_then(Value::as_u64)
        .ok_or_else(|| BusError::Malformed("missing or invalid `seq`".into()))?;
    let stamp = map
        .get("stamp")
        .and_then(Value::as_f64)
        .ok_or_else(|| BusError::Malformed("missing or invalid `stamp`".into()))?;
    let payload = map
        .remove("payload")
        .ok_or_else(|| BusError::Malformed("missing `payload`".into()))?;
    let payload = Payload::from_value(&topic, payload)?;
    Ok(Envelope {
        topic,
        seq,
        stamp,
        payload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::topics::*;

    fn sample() -> Envelope {
        Envelope {
            topic: HUMANS.into(),
            seq: 7,
            stamp: 0.7,
            payload: Payload::Humans(vec![HumanMsg {
                id: 1,
                x: 1.25,
                y: -0.5,
                angle: 0.3,
                ix: 0.05,
                iy: 0.0,
                iangle: -0.01,
            }]),
        }
    }

    #[test]
    fn key_order_and_text() {
        let text = String::from_utf8(encode_envelope(&sample()).unwrap()).unwrap();
        assert_eq!(
            text,
            r#"{"topic":"humans","seq":7,"stamp":0.7,"payload":[{"id":1,"x":1.25,"y":-0.5,"angle":0.3,"ix":0.05,"iy":0,"iangle":-0.01}]}"#
        );
    }

    #[test]
    fn round_trip() {
        let e = sample();
        let bytes = encode_envelope(&e).unwrap();
        assert_eq!(decode_envelope(&bytes).unwrap(), e);
        assert_eq!(encode_envelope(&decode_envelope(&bytes).unwrap()).unwrap(), bytes);
    }

    #[test]
    fn truncated_text_reports_offset() {
        let bytes = encode_envelope(&sample()).unwrap();
        let cut = &bytes[..bytes.len() - 5];
        match decode_envelope(cut) {
            Err(BusError::Parse { offset, .. }) => assert!(offset <= cut.len()),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn extra_key_rejected() {
        let text = br#"{"topic":"goal","seq":0,"stamp":0,"payload":{"identifier":1,"x":0,"y":0},"x":1}"#;
        assert!(matches!(decode_envelope(text), Err(BusError::Malformed(_))));
    }
}
