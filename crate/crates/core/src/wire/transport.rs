use std::collections::VecDeque;
use std::io::{self, Read, Write};
use std::sync::mpsc;

use super::codec::parse_header;
use super::{decode, encode, DecodeError, Direction, Message, Transcript, HEADER_LEN};

/// Largest accepted frame body (256 MiB).
pub const MAX_BODY_LEN: usize = 256 << 20;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("transport I/O: {0}")]
    Io(#[from] io::Error),
    #[error("peer closed the connection")]
    Closed,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Frames messages over any reliable ordered byte stream and records every
/// frame in a [`Transcript`].
pub struct Framed<S> {
    stream: S,
    outgoing: Direction,
    transcript: Transcript,
}

impl<S: Read + Write> Framed<S> {
    /// `outgoing` is the direction of frames this endpoint writes.
    pub fn new(stream: S, outgoing: Direction) -> Self {
        Self {
            stream,
            outgoing,
            transcript: Transcript::new(),
        }
    }

    pub fn send(&mut self, message: &Message) -> Result<(), TransportError> {
        let frame = encode(message);
        self.stream.write_all(&frame)?;
        self.stream.flush()?;
        self.transcript.push(self.outgoing, frame);
        Ok(())
    }

    pub fn recv(&mut self) -> Result<Message, TransportError> {
        let mut frame = vec![0u8; HEADER_LEN];
        match self.stream.read_exact(&mut frame) {
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(TransportError::Closed)
            }
            other => other?,
        }
        let (_, body_len) = parse_header(&frame)?;
        frame.resize(HEADER_LEN + body_len, 0);
        match self.stream.read_exact(&mut frame[HEADER_LEN..]) {
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(DecodeError::Truncated.into())
            }
            other => other?,
        }
        let message = decode(&frame)?;
        let incoming = match self.outgoing {
            Direction::SenderToReceiver => Direction::ReceiverToSender,
            Direction::ReceiverToSender => Direction::SenderToReceiver,
        };
        self.transcript.push(incoming, frame);
        Ok(message)
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_parts(self) -> (S, Transcript) {
        (self.stream, self.transcript)
    }
}

/// One end of an in-memory duplex byte pipe.
pub struct MemoryPipe {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
    pending: VecDeque<u8>,
}

/// Two connected pipe ends; bytes written to one are read from the other.
pub fn memory_pipe() -> (MemoryPipe, MemoryPipe) {
    let (tx_a, rx_b) = mpsc::channel();
    let (tx_b, rx_a) = mpsc::channel();
    (
        MemoryPipe {
            tx: tx_a,
            rx: rx_a,
            pending: VecDeque::new(),
        },
        MemoryPipe {
            tx: tx_b,
            rx: rx_b,
            pending: VecDeque::new(),
        },
    )
}

impl Read for MemoryPipe {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if buf.is_empty() {
            return Ok(0);
        }
        while self.pending.is_empty() {
            match self.rx.recv() {
                Ok(chunk) => self.pending.extend(chunk),
                // other end dropped: EOF
                Err(_) => return Ok(0),
            }
        }
        let n = buf.len().min(self.pending.len());
        for (slot, byte) in buf.iter_mut().zip(self.pending.drain(..n)) {
            *slot = byte;
        }
        Ok(n)
    }
}

impl Write for MemoryPipe {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.tx
            .send(buf.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "pipe closed"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}
