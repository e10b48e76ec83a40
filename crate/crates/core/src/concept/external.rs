use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ConceptTagger, TagError, TokenizedSentence};

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    tokens: &'a [String],
}

#[derive(Deserialize)]
struct Reply {
    id: u64,
    concept: Vec<bool>,
}

struct Channel {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

/// A tagger running as a child process.
///
/// Requests go to the child's stdin as one JSON object per line,
/// `{"id": .., "tokens": [..]}`, and the child answers each with
/// `{"id": .., "concept": [..]}` on stdout, in request order. The channel is
/// shared, so concurrent callers are serialized.
pub struct ExternalTagger {
    channel: Mutex<Channel>,
    batch_size: usize,
}

impl ExternalTagger {
    /// Spawn `command[0]` with the remaining elements as arguments.
    pub fn spawn(command: &[String]) -> Result<Self, TagError> {
        let (program, args) = command.split_first().ok_or_else(|| {
            TagError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "empty tagger command",
            ))
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = BufWriter::new(child.stdin.take().ok_or(TagError::Closed)?);
        let stdout = BufReader::new(child.stdout.take().ok_or(TagError::Closed)?);
        Ok(Self {
            channel: Mutex::new(Channel { child, stdin, stdout }),
            batch_size: 256,
        })
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    /// Send a batch and replace each sentence's `concept_mask` with the
    /// child's answer.
    pub fn roundtrip(&self, batch: &mut [TokenizedSentence]) -> Result<(), TagError> {
        let mut ch = self.channel.lock().unwrap_or_else(|e| e.into_inner());
        for chunk in batch.chunks_mut(self.batch_size) {
            for s in chunk.iter() {
                let req = Request { id: s.sentence_id, tokens: &s.tokens };
                serde_json::to_writer(&mut ch.stdin, &req).map_err(std::io::Error::from)?;
                ch.stdin.write_all(b"\n")?;
            }
            ch.stdin.flush()?;
            let mut line = String::new();
            for s in chunk.iter_mut() {
                line.clear();
                if ch.stdout.read_line(&mut line)? == 0 {
                    return Err(TagError::Closed);
                }
                let reply: Reply =
                    serde_json::from_str(line.trim_end()).map_err(|e| TagError::Protocol {
                        sentence_id: s.sentence_id,
                        detail: format!("unparseable reply: {e}"),
                    })?;
                if reply.id != s.sentence_id {
                    return Err(TagError::Protocol {
                        sentence_id: s.sentence_id,
                        detail: format!("reply carries id {}", reply.id),
                    });
                }
                if reply.concept.len() != s.tokens.len() {
                    return Err(TagError::Protocol {
                        sentence_id: s.sentence_id,
                        detail: format!(
                            "expected {} flags, got {}",
                            s.tokens.len(),
                            reply.concept.len()
                        ),
                    });
                }
                s.concept_mask = reply.concept;
            }
        }
        Ok(())
    }
}

impl ConceptTagger for ExternalTagger {
    fn tag(&self, tokens: &[String]) -> Result<Vec<bool>, TagError> {
        let mut one = [TokenizedSentence {
            sentence_id: 0,
            tokens: tokens.to_vec(),
            concept_mask: Vec::new(),
        }];
        self.roundtrip(&mut one)?;
        let [s] = one;
        Ok(s.concept_mask)
    }

    fn tag_batch(&self, batch: &mut [TokenizedSentence]) -> Result<(), TagError> {
        self.roundtrip(batch)
    }
}

impl Drop for ExternalTagger {
    fn drop(&mut self) {
        if let Ok(ch) = self.channel.get_mut() {
            let _ = ch.stdin.flush();
            let _ = ch.child.kill();
            let _ = ch.child.wait();
        }
    }
}

/// Test helper scripts speaking the tagger protocol. They need `python3`.
#[cfg(test)]
pub(crate) mod scripts {
    /// Marks every token longer than three characters as a concept.
    pub const LONG_WORDS: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "concept": [len(t) > 3 for t in req["tokens"]]}), flush=True)
"#;

    /// Always answers with one flag too few.
    pub const SHORT_REPLY: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "concept": [True] * (len(req["tokens"]) - 1)}), flush=True)
"#;
}
