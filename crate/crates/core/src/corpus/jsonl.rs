use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::Serialize;
use serde_json::Value;

use super::{clean_markup, Label, RawMessage, SkipRecord};
use crate::error::{Error, Result};

/// Result of parsing a JSONL stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedMessages {
    pub messages: Vec<RawMessage>,
    /// 1-based source line of each entry in `messages`.
    pub lines: Vec<usize>,
    pub skipped: Vec<SkipRecord>,
}

/// Parses canonical JSONL messages, one object per line.
///
/// Malformed lines are recorded in the skip report and parsing continues.
/// Blank lines are ignored. A repeated id aborts with an error.
pub fn parse_jsonl<R: BufRead>(mut reader: R) -> Result<ParsedMessages> {
    let mut out = ParsedMessages::default();
    let mut ids = HashSet::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io("<stream>", e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = match std::str::from_utf8(&buf) {
            Ok(s) => s,
            Err(_) => {
                out.skipped.push(SkipRecord {
                    line: line_no,
                    reason: "invalid UTF-8".into(),
                });
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_message_line(line) {
            Ok(msg) => {
                if !ids.insert(msg.id.clone()) {
                    return Err(Error::DuplicateId(msg.id));
                }
                out.messages.push(msg);
                out.lines.push(line_no);
            }
            Err(reason) => out.skipped.push(SkipRecord {
                line: line_no,
                reason,
            }),
        }
    }
    Ok(out)
}

/// Parses one JSONL object into a message, or explains why it is malformed.
pub fn parse_message_line(line: &str) -> std::result::Result<RawMessage, String> {
    let value: Value = serde_json::from_str(line.trim()).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(obj) = value else {
        return Err("line is not a JSON object".into());
    };

    let id = match obj.get("id") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(Value::String(_)) => return Err("empty `id`".into()),
        Some(_) => return Err("`id` must be a string".into()),
        None => return Err("missing `id`".into()),
    };
    let text = match obj.get("text") {
        Some(Value::String(s)) => clean_markup(s),
        Some(_) => return Err("`text` must be a string".into()),
        None => return Err("missing `text`".into()),
    };
    let board = optional_string(&obj, "board")?;
    let thread_id = optional_string(&obj, "thread")?;
    let timestamp = match obj.get("ts") {
        None | Some(Value::Null) => 0,
        Some(Value::Number(n)) => n.as_i64().ok_or("`ts` must be an integer")?,
        Some(_) => return Err("`ts` must be an integer".into()),
    };
    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_label(v)?),
    };

    Ok(RawMessage {
        id,
        board,
        thread_id,
        timestamp,
        text,
        label,
    })
}

fn optional_string(obj: &serde_json::Map<String, Value>, key: &str) -> std::result::Result<String, String> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(format!("`{key}` must be a string")),
    }
}

fn parse_label(v: &Value) -> std::result::Result<Label, String> {
    let label = match v {
        Value::Number(n) => n.as_u64().and_then(|i| Label::from_index(i as usize)),
        Value::String(s) => match s.as_str() {
            "neutral" => Some(Label::Neutral),
            "aggressive" => Some(Label::Aggressive),
            _ => None,
        },
        _ => None,
    };
    label.ok_or_else(|| format!("invalid label {v}"))
}

#[derive(Serialize)]
struct WireMessage<'a> {
    id: &'a str,
    board: &'a str,
    thread: &'a str,
    ts: i64,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

/// Serializes one message as a canonical JSONL line (no trailing newline).
pub fn to_jsonl_line(m: &RawMessage) -> String {
    serde_json::to_string(&WireMessage {
        id: &m.id,
        board: &m.board,
        thread: &m.thread_id,
        ts: m.timestamp,
        text: &m.text,
        label: m.label.map(Label::index),
    })
    .expect("plain struct serializes")
}

pub fn to_jsonl<W: Write>(mut w: W, messages: &[RawMessage]) -> std::io::Result<()> {
    for m in messages {
        writeln!(w, "{}", to_jsonl_line(m))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<ParsedMessages> {
        parse_jsonl(s.as_bytes())
    }

    #[test]
    fn minimal_object() {
        let p = parse("{\"id\":\"1\",\"text\":\"hello\"}").unwrap();
        assert_eq!(p.messages, vec![RawMessage::new("1", "hello")]);
        assert!(p.skipped.is_empty());
    }

    #[test]
    fn duplicate_id() {
        let err = parse("{\"id\":\"1\",\"text\":\"a\"}\n{\"id\":\"1\",\"text\":\"b\"}").unwrap_err();
        match err {
            Error::DuplicateId(id) => assert_eq!(id, "1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_is_skipped() {
        let input = concat!(
            "{\"id\":\"a\",\"board\":\"b\",\"ts\":5,\"text\":\"first<br>post\",\"label\":\"aggressive\"}\n",
            "{\"id\":\"b\",\"text\":\n",
            "{\"id\":\"c\",\"thread\":\"t1\",\"text\":\"third\",\"label\":0}\n",
        );
        let p = parse(input).unwrap();
        assert_eq!(p.messages.len(), 2);
        assert_eq!(p.lines, vec![1, 3]);
        assert_eq!(p.skipped.len(), 1);
        assert_eq!(p.skipped[0].line, 2);
        let a = &p.messages[0];
        assert_eq!((a.board.as_str(), a.timestamp, a.text.as_str()), ("b", 5, "first post"));
        assert_eq!(a.label, Some(Label::Aggressive));
        let c = &p.messages[1];
        assert_eq!((c.thread_id.as_str(), c.label), ("t1", Some(Label::Neutral)));
    }

    #[test]
    fn skip_reasons() {
        let cases = [
            ("[1,2]", "not a JSON object"),
            ("{\"text\":\"x\"}", "missing `id`"),
            ("{\"id\":7,\"text\":\"x\"}", "`id` must be a string"),
            ("{\"id\":\"\",\"text\":\"x\"}", "empty `id`"),
            ("{\"id\":\"x\"}", "missing `text`"),
            ("{\"id\":\"x\",\"text\":\"y\",\"label\":2}", "invalid label"),
            ("{\"id\":\"x\",\"text\":\"y\",\"label\":\"angry\"}", "invalid label"),
            ("{\"id\":\"x\",\"text\":\"y\",\"ts\":1.5}", "`ts` must be an integer"),
        ];
        for (line, reason) in cases {
            let err = parse_message_line(line).unwrap_err();
            assert!(err.contains(reason), "{line}: {err}");
        }
    }

    #[test]
    fn empty_stream() {
        let p = parse("").unwrap();
        assert!(p.messages.is_empty() && p.skipped.is_empty());
    }

    #[test]
    fn invalid_utf8_is_skipped() {
        let mut bytes = b"{\"id\":\"1\",\"text\":\"ok\"}\n".to_vec();
        bytes.extend_from_slice(b"{\"id\":\"2\",\"text\":\"\xff\"}\n");
        let p = parse_jsonl(bytes.as_slice()).unwrap();
        assert_eq!(p.messages.len(), 1);
        assert_eq!(p.skipped[0].reason, "invalid UTF-8");
    }

    fn arb_message() -> impl Strategy<Value = RawMessage> {
        (
            "[a-z0-9]{1,8}",
            "[a-z]{0,3}",
            "[0-9]{0,4}",
            any::<i64>(),
            "\\PC{0,40}",
            prop::option::of(prop_oneof![Just(Label::Neutral), Just(Label::Aggressive)]),
        )
            .prop_map(|(id, board, thread_id, timestamp, text, label)| RawMessage {
                id,
                board,
                thread_id,
                timestamp,
                text: clean_markup(&text),
                label,
            })
    }

    proptest! {
        #[test]
        fn jsonl_round_trip(msgs in prop::collection::vec(arb_message(), 0..12)) {
            let mut seen = HashSet::new();
            let msgs: Vec<_> = msgs.into_iter().filter(|m| seen.insert(m.id.clone())).collect();
            let mut buf = Vec::new();
            to_jsonl(&mut buf, &msgs).unwrap();
            let parsed = parse_jsonl(buf.as_slice()).unwrap();
            prop_assert_eq!(parsed.messages, msgs);
        }

        #[test]
        fn size_is_lines_minus_skips(lines in prop::collection::vec(prop_oneof![
            "[a-z]{1,6}".prop_map(|id| format!("{{\"id\":\"{id}\",\"text\":\"t\"}}")),
            "[{}a-z\",:]{1,12}",
        ], 0..20)) {
            let mut seen = HashSet::new();
            let lines: Vec<String> = lines.into_iter().filter(|l| seen.insert(l.clone()) && !l.trim().is_empty()).collect();
            if let Ok(p) = parse_jsonl(lines.join("\n").as_bytes()) {
                prop_assert_eq!(p.messages.len(), lines.len() - p.skipped.len());
            }
        }
    }
}
