//! In-process publish/subscribe bus with retained, sequence-numbered
//! history per topic.

pub mod topics;
mod wire;

pub use topics::Payload;
pub use wire::{decode_envelope, encode_envelope};

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BusError {
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("payload for {topic:?}: {message}")]
    Schema { topic: String, message: String },
    #[error("payload belongs on {payload:?}, not {topic:?}")]
    TopicMismatch { topic: String, payload: &'static str },
    #[error("stamp {stamp} on {topic:?} is older than the last stamp {last}")]
    StampRegression { topic: String, stamp: f64, last: f64 },
    #[error("stamp on {topic:?} is not finite")]
    NonFiniteStamp { topic: String },
    #[error("malformed envelope: {0}")]
    Malformed(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// One published message. Serializes with keys in the order
/// `topic, seq, stamp, payload`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub topic: String,
    pub seq: u64,
    /// Seconds of simulation time.
    pub stamp: f64,
    pub payload: Payload,
}

#[derive(Debug, Default)]
struct TopicLog {
    /// Seq of `entries[0]`.
    first_seq: u64,
    entries: VecDeque<Arc<Envelope>>,
    last_stamp: Option<f64>,
}

impl TopicLog {
    fn next_seq(&self) -> u64 {
        self.first_seq + self.entries.len() as u64
    }
}

/// Thread-safe bus. Publishing takes a per-topic lock only, so publishers on
/// different topics never contend and pollers hold a lock only while copying
/// out `Arc`s.
#[derive(Debug)]
pub struct Bus {
    topics: RwLock<HashMap<String, Arc<Mutex<TopicLog>>>>,
    /// Keep at most this many envelopes per topic; older ones are dropped.
    retention: Option<usize>,
}

impl Default for Bus {
    fn default() -> Self {
        Bus::new()
    }
}

impl Bus {
    /// Bus with every standard topic registered and unbounded history.
    pub fn new() -> Bus {
        let bus = Bus {
            topics: RwLock::new(HashMap::new()),
            retention: None,
        };
        for t in topics::ALL_TOPICS {
            bus.register(t);
        }
        bus
    }

    pub fn with_retention(limit: usize) -> Bus {
        Bus {
            retention: Some(limit.max(1)),
            ..Bus::new()
        }
    }

    /// Idempotent.
    pub fn register(&self, topic: &str) {
        self.topics
            .write()
            .entry(topic.to_string())
            .or_default();
    }

    pub fn topics(&self) -> Vec<String> {
        let mut names: Vec<String> = self.topics.read().keys().cloned().collect();
        names.sort();
        names
    }

    fn log(&self, topic: &str) -> Result<Arc<Mutex<TopicLog>>, BusError> {
        self.topics
            .read()
            .get(topic)
            .cloned()
            .ok_or_else(|| BusError::UnknownTopic(topic.to_string()))
    }

    /// Append a payload; returns its seq (0 for the first message on the topic).
    pub fn publish(&self, topic: &str, payload: Payload, stamp: f64) -> Result<u64, BusError> {
        if payload.topic() != topic {
            return Err(BusError::TopicMismatch {
                topic: topic.to_string(),
                payload: payload.topic(),
            });
        }
        payload.validate()?;
        self.append(topic, payload, stamp)
    }

    /// Publish an untyped payload after checking it against the topic schema.
    pub fn publish_value(
        &self,
        topic: &str,
        payload: serde_json::Value,
        stamp: f64,
    ) -> Result<u64, BusError> {
        self.log(topic)?;
        let payload = Payload::from_value(topic, payload)?;
        self.publish(topic, payload, stamp)
    }

    /// Append an already decoded envelope's payload, e.g. from the gateway.
    pub fn publish_envelope(&self, envelope: Envelope) -> Result<u64, BusError> {
        self.publish(&envelope.topic, envelope.payload, envelope.stamp)
    }

    fn append(&self, topic: &str, payload: Payload, stamp: f64) -> Result<u64, BusError> {
        if !stamp.is_finite() {
            return Err(BusError::NonFiniteStamp {
                topic: topic.to_string(),
            });
        }
        let log = self.log(topic)?;
        let mut log = log.lock();
        if let Some(last) = log.last_stamp {
            if stamp < last {
                return Err(BusError::StampRegression {
                    topic: topic.to_string(),
                    stamp,
                    last,
                });
            }
        }
        let seq = log.next_seq();
        log.entries.push_back(Arc::new(Envelope {
            topic: topic.to_string(),
            seq,
            stamp,
            payload,
        }));
        log.last_stamp = Some(stamp);
        if let Some(limit) = self.retention {
            while log.entries.len() > limit {
                log.entries.pop_front();
                log.first_seq += 1;
            }
        }
        Ok(seq)
    }

    /// Retained envelopes with `seq >= from_seq`, in seq order.
    pub fn poll(&self, topic: &str, from_seq: u64) -> Result<Vec<Arc<Envelope>>, BusError> {
        let log = self.log(topic)?;
        let log = log.lock();
        let skip = from_seq.saturating_sub(log.first_seq) as usize;
        Ok(log.entries.iter().skip(skip).cloned().collect())
    }

    /// Most recent envelope on a topic.
    pub fn latest(&self, topic: &str) -> Result<Option<Arc<Envelope>>, BusError> {
        Ok(self.log(topic)?.lock().entries.back().cloned())
    }

    /// Seq the next publish on `topic` will receive.
    pub fn next_seq(&self, topic: &str) -> Result<u64, BusError> {
        Ok(self.log(topic)?.lock().next_seq())
    }

    pub fn last_stamp(&self, topic: &str) -> Result<Option<f64>, BusError> {
        Ok(self.log(topic)?.lock().last_stamp)
    }
}
