use super::{decode, DecodeError, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    SenderToReceiver,
    ReceiverToSender,
}

/// One frame exactly as it crossed the transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub bytes: Vec<u8>,
}

impl TranscriptEntry {
    pub fn decode(&self) -> Result<Message, DecodeError> {
        decode(&self.bytes)
    }
}

/// Append-only record of a session's frames.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, direction: Direction, bytes: Vec<u8>) {
        self.entries.push(TranscriptEntry { direction, bytes });
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Message names in order, for quick assertions.
    pub fn message_names(&self) -> Vec<&'static str> {
        self.entries
            .iter()
            .map(|e| e.decode().map_or("<undecodable>", |m| m.name()))
            .collect()
    }
}

/// Builds a transcript from a frame log.
pub fn session_transcript<I>(frames: I) -> Transcript
where
    I: IntoIterator<Item = (Direction, Vec<u8>)>,
{
    let mut transcript = Transcript::new();
    for (direction, bytes) in frames {
        transcript.push(direction, bytes);
    }
    transcript
}
