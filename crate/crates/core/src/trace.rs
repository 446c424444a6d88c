//! JSON-lines trace format, one packet per line:
//!
//! ```text
//! {"ts_ns":0,"port":3,"src":"::","dst":"ff02::1:ff00:10","hl":255,
//!  "l4":{"kind":"icmpv6","type":135,"ns_target":"fd00::10"},
//!  "truth":{"label":"benign"}}
//! ```
//!
//! `l4.kind` is one of `tcp` (`src_port`, `dst_port`, `syn`), `udp`
//! (`src_port`, `dst_port`), `icmpv6` (`type`, optional `ns_target`) or
//! `other`. `truth` is optional; attack labels carry a `vector`. Unknown or
//! kind-inapplicable fields are rejected.

use std::io::{self, BufRead, Write};
use std::net::Ipv6Addr;

use serde::{Deserialize, Serialize};

use crate::packet::{LabeledPacket, Packet, PacketError, Truth, Vector, L4};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}` is not valid for l4 kind `{kind}`")]
    UnexpectedField { kind: String, field: &'static str },
    #[error("malformed IPv6 address in `{field}`: {value:?}")]
    BadAddress { field: &'static str, value: String },
    #[error("hop limit {0} out of range 0..=255")]
    HopLimitRange(u64),
    #[error("`{field}` value {value} out of range")]
    OutOfRange { field: &'static str, value: u64 },
    #[error("unknown l4 kind {0:?}")]
    UnknownKind(String),
    #[error("unknown truth label {0:?}")]
    UnknownLabel(String),
    #[error("attack label requires a valid `vector`")]
    BadVector,
    #[error(transparent)]
    Packet(#[from] PacketError),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<TraceError>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    ts_ns: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    port: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    src: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dst: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hl: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l4: Option<RawL4>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<RawTruth>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawL4 {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    src_port: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dst_port: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    syn: Option<bool>,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    icmp_type: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ns_target: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruth {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<String>,
}

fn addr(field: &'static str, value: Option<String>) -> Result<Ipv6Addr, TraceError> {
    let value = value.ok_or(TraceError::MissingField(field))?;
    value.parse().map_err(|_| TraceError::BadAddress { field, value })
}

fn ranged<T: TryFrom<u64>>(field: &'static str, value: Option<u64>) -> Result<T, TraceError> {
    let v = value.ok_or(TraceError::MissingField(field))?;
    T::try_from(v).map_err(|_| TraceError::OutOfRange { field, value: v })
}

fn parse_l4(raw: RawL4) -> Result<L4, TraceError> {
    let kind = raw.kind.ok_or(TraceError::MissingField("l4.kind"))?;
    let reject = |field: &'static str, present: bool| {
        if present {
            Err(TraceError::UnexpectedField { kind: kind.clone(), field })
        } else {
            Ok(())
        }
    };
    match kind.as_str() {
        "tcp" => {
            reject("type", raw.icmp_type.is_some())?;
            reject("ns_target", raw.ns_target.is_some())?;
            Ok(L4::Tcp {
                src_port: ranged("l4.src_port", raw.src_port)?,
                dst_port: ranged("l4.dst_port", raw.dst_port)?,
                syn: raw.syn.ok_or(TraceError::MissingField("l4.syn"))?,
            })
        }
        "udp" => {
            reject("syn", raw.syn.is_some())?;
            reject("type", raw.icmp_type.is_some())?;
            reject("ns_target", raw.ns_target.is_some())?;
            Ok(L4::Udp {
                src_port: ranged("l4.src_port", raw.src_port)?,
                dst_port: ranged("l4.dst_port", raw.dst_port)?,
            })
        }
        "icmpv6" => {
            reject("src_port", raw.src_port.is_some())?;
            reject("dst_port", raw.dst_port.is_some())?;
            reject("syn", raw.syn.is_some())?;
            let icmp_type = ranged("l4.type", raw.icmp_type)?;
            let target = match raw.ns_target {
                Some(t) => Some(addr("l4.ns_target", Some(t))?),
                None => None,
            };
            Ok(L4::icmpv6(icmp_type, target)?)
        }
        "other" => {
            reject("src_port", raw.src_port.is_some())?;
            reject("dst_port", raw.dst_port.is_some())?;
            reject("syn", raw.syn.is_some())?;
            reject("type", raw.icmp_type.is_some())?;
            reject("ns_target", raw.ns_target.is_some())?;
            Ok(L4::Other)
        }
        _ => Err(TraceError::UnknownKind(kind)),
    }
}

fn parse_vector(s: &str) -> Option<Vector> {
    Vector::ALL.into_iter().find(|v| v.as_str() == s)
}

fn parse_truth(raw: RawTruth) -> Result<Truth, TraceError> {
    let label = raw.label.ok_or(TraceError::MissingField("truth.label"))?;
    match (label.as_str(), raw.vector) {
        ("benign", None) => Ok(Truth::Benign),
        ("benign", Some(_)) => Err(TraceError::UnexpectedField { kind: label, field: "vector" }),
        ("attack", Some(v)) => parse_vector(&v).map(Truth::Attack).ok_or(TraceError::BadVector),
        ("attack", None) => Err(TraceError::BadVector),
        _ => Err(TraceError::UnknownLabel(label)),
    }
}

/// Parses one JSON-lines record.
pub fn parse_trace_record(line: &str) -> Result<LabeledPacket, TraceError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| TraceError::Json(e.to_string()))?;
    let hl = raw.hl.ok_or(TraceError::MissingField("hl"))?;
    let hop_limit = u8::try_from(hl).map_err(|_| TraceError::HopLimitRange(hl))?;
    let packet = Packet {
        ts_ns: raw.ts_ns.ok_or(TraceError::MissingField("ts_ns"))?,
        ingress_port: ranged("port", raw.port)?,
        src: addr("src", raw.src)?,
        dst: addr("dst", raw.dst)?,
        hop_limit,
        l4: parse_l4(raw.l4.ok_or(TraceError::MissingField("l4"))?)?,
    };
    let truth = raw.truth.map(parse_truth).transpose()?;
    Ok(LabeledPacket { packet, truth })
}

/// Serializes one record (no trailing newline).
pub fn serialize_trace_record(lp: &LabeledPacket) -> String {
    let p = &lp.packet;
    let l4 = match p.l4 {
        L4::Tcp { src_port, dst_port, syn } => RawL4 {
            kind: Some("tcp".into()),
            src_port: Some(src_port.into()),
            dst_port: Some(dst_port.into()),
            syn: Some(syn),
            ..Default::default()
        },
        L4::Udp { src_port, dst_port } => RawL4 {
            kind: Some("udp".into()),
            src_port: Some(src_port.into()),
            dst_port: Some(dst_port.into()),
            ..Default::default()
        },
        L4::Icmpv6 { icmp_type, ns_target } => RawL4 {
            kind: Some("icmpv6".into()),
            icmp_type: Some(icmp_type.into()),
            ns_target: ns_target.map(|t| t.to_string()),
            ..Default::default()
        },
        L4::Other => RawL4 { kind: Some("other".into()), ..Default::default() },
    };
    let truth = lp.truth.map(|t| match t {
        Truth::Benign => RawTruth { label: Some("benign".into()), vector: None },
        Truth::Attack(v) => RawTruth { label: Some("attack".into()), vector: Some(v.as_str().into()) },
    });
    let raw = RawRecord {
        ts_ns: Some(p.ts_ns),
        port: Some(p.ingress_port.into()),
        src: Some(p.src.to_string()),
        dst: Some(p.dst.to_string()),
        hl: Some(p.hop_limit.into()),
        l4: Some(l4),
        truth,
    };
    serde_json::to_string(&raw).expect("trace record serialization is infallible")
}

/// Writes a stream as JSON lines.
pub fn write_trace<W: Write>(stream: &[LabeledPacket], mut sink: W) -> io::Result<()> {
    for lp in stream {
        sink.write_all(serialize_trace_record(lp).as_bytes())?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

/// Reads a JSON-lines stream. Blank lines are skipped; errors carry the
/// 1-based line number.
pub fn read_trace<R: BufRead>(source: R) -> Result<Vec<LabeledPacket>, TraceError> {
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lp = parse_trace_record(&line)
            .map_err(|e| TraceError::Line { line: idx + 1, source: Box::new(e) })?;
        out.push(lp);
    }
    Ok(out)
}
