//! Property values and the two-call buffer sizing protocol.
//!
//! A caller first asks with zero capacity and no buffer to learn the encoded
//! size, then calls again with a buffer at least that large. Encodings are
//! plain UTF-8 text so the protocol carries no byte-order concerns:
//!
//! | variant     | encoding                                   |
//! |-------------|--------------------------------------------|
//! | `Text`      | the string itself                          |
//! | `Integer`   | canonical decimal, e.g. `-12`              |
//! | `Real`      | shortest round-tripping decimal, e.g. `0.5`|
//! | `TextList`  | items joined with `,`                      |
//! | `PairList`  | `a-b` pairs joined with `;`                |

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::status::{Status, StatusCode};

#[derive(Clone, Debug, PartialEq)]
pub enum PropertyValue {
    Text(String),
    Integer(i64),
    Real(f64),
    TextList(Vec<String>),
    PairList(Vec<(usize, usize)>),
}

impl PropertyValue {
    pub fn text(s: impl Into<String>) -> Self {
        PropertyValue::Text(s.into())
    }

    pub fn text_list<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PropertyValue::TextList(items.into_iter().map(Into::into).collect())
    }
}

/// Deterministic byte encoding of a property value.
pub fn encode_value(value: &PropertyValue) -> Vec<u8> {
    let text = match value {
        PropertyValue::Text(s) => s.clone(),
        PropertyValue::Integer(i) => i.to_string(),
        PropertyValue::Real(x) => format!("{x}"),
        PropertyValue::TextList(items) => items.join(","),
        PropertyValue::PairList(pairs) => pairs
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect::<Vec<_>>()
            .join(";"),
    };
    text.into_bytes()
}

/// Two-call read of a property value.
///
/// Returns the encoded size. With `capacity == 0` nothing is written; with
/// `capacity >= size` exactly `size` bytes are copied to the front of
/// `destination`. Undersized capacities are rejected before any byte is
/// touched.
pub fn sized_read(
    value: &PropertyValue,
    capacity: usize,
    destination: Option<&mut [u8]>,
) -> Status<usize> {
    sized_read_bytes(&encode_value(value), capacity, destination)
}

/// [`sized_read`] over an already encoded payload.
pub fn sized_read_bytes(
    encoded: &[u8],
    capacity: usize,
    destination: Option<&mut [u8]>,
) -> Status<usize> {
    let required = encoded.len();
    if capacity == 0 {
        return Ok(required);
    }
    let Some(dest) = destination else {
        return Err(StatusCode::InvalidArgument);
    };
    if capacity < required || dest.len() < capacity {
        return Err(StatusCode::InvalidArgument);
    }
    dest[..required].copy_from_slice(encoded);
    Ok(required)
}

/// Runs the sizing call, allocates, and runs the read call.
pub fn read_to_string<F>(mut read: F) -> Status<String>
where
    F: FnMut(usize, Option<&mut [u8]>) -> Status<usize>,
{
    let size = read(0, None)?;
    if size == 0 {
        return Ok(String::new());
    }
    let mut buf = vec![0u8; size];
    let written = read(size, Some(&mut buf))?;
    buf.truncate(written);
    String::from_utf8(buf).map_err(|_| StatusCode::Protocol)
}

/// Splits a comma-joined list. The empty string is the empty list.
pub fn decode_text_list(text: &str) -> Vec<String> {
    if text.is_empty() {
        Vec::new()
    } else {
        text.split(',').map(ToString::to_string).collect()
    }
}

/// Parses a `a-b;c-d` pair list.
pub fn decode_pair_list(text: &str) -> Status<Vec<(usize, usize)>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|pair| {
            let (a, b) = pair.split_once('-').ok_or(StatusCode::Protocol)?;
            let a = a.parse().map_err(|_| StatusCode::Protocol)?;
            let b = b.parse().map_err(|_| StatusCode::Protocol)?;
            Ok((a, b))
        })
        .collect()
}
