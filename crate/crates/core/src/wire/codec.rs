use num_bigint::BigUint;
use num_traits::Zero;

use super::{
    DecodeError, ErrorFrame, Hello, Message, HEADER_LEN, MAGIC, MAX_BODY_LEN, TYPE_ERROR,
    TYPE_HELLO, TYPE_MSG_A, TYPE_MSG_CHOICE, TYPE_MSG_REPLY, TYPE_MSG_SECRETS, VERSION,
};
use crate::protocol::{MsgA, MsgChoice, MsgReply, MsgSecrets};
use crate::sealing::{Digest, SealedSecret};

/// Encodes a complete frame.
pub fn encode(message: &Message) -> Vec<u8> {
    let mut body = Vec::new();
    match message {
        Message::Hello(h) => {
            body.push(h.suite);
            put_int(&mut body, &h.p);
            put_int(&mut body, &h.q);
            put_int(&mut body, &h.g);
            put_u32(&mut body, h.xs.len() as u32);
            put_u32(&mut body, h.k);
            for x in &h.xs {
                put_int(&mut body, x);
            }
        }
        Message::A(a) => put_int(&mut body, &a.ma),
        Message::Choice(c) => {
            put_int_list(&mut body, &c.mjs);
            put_int(&mut body, &c.mb);
        }
        Message::Reply(r) => put_int_list(&mut body, &r.replies),
        Message::Secrets(s) => {
            put_u32(&mut body, s.sealed.len() as u32);
            for sealed in &s.sealed {
                body.extend_from_slice(&sealed.commitment);
                put_bytes(&mut body, &sealed.ciphertext);
            }
        }
        Message::Error(e) => {
            body.push(e.code);
            put_bytes(&mut body, e.reason.as_bytes());
        }
    }
    let mut frame = Vec::with_capacity(HEADER_LEN + body.len());
    frame.extend_from_slice(&MAGIC);
    frame.push(VERSION);
    frame.push(message.type_byte());
    put_u32(&mut frame, body.len() as u32);
    frame.extend_from_slice(&body);
    frame
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    put_u32(out, bytes.len() as u32);
    out.extend_from_slice(bytes);
}

fn put_int(out: &mut Vec<u8>, v: &BigUint) {
    if v.is_zero() {
        put_u32(out, 0);
    } else {
        put_bytes(out, &v.to_bytes_be());
    }
}

fn put_int_list(out: &mut Vec<u8>, values: &[BigUint]) {
    put_u32(out, values.len() as u32);
    for v in values {
        put_int(out, v);
    }
}

/// Validates a frame header and returns `(msg_type, body_len)`.
pub(super) fn parse_header(header: &[u8]) -> Result<(u8, usize), DecodeError> {
    if header.len() < HEADER_LEN {
        // report bad magic as early as the bytes allow
        if !MAGIC.starts_with(&header[..header.len().min(4)]) {
            return Err(DecodeError::BadMagic);
        }
        return Err(DecodeError::Truncated);
    }
    if header[..4] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    if header[4] != VERSION {
        return Err(DecodeError::BadVersion(header[4]));
    }
    let msg_type = header[5];
    if !matches!(
        msg_type,
        TYPE_HELLO | TYPE_MSG_A | TYPE_MSG_CHOICE | TYPE_MSG_REPLY | TYPE_MSG_SECRETS | TYPE_ERROR
    ) {
        return Err(DecodeError::UnknownType(msg_type));
    }
    let body_len = u32::from_be_bytes(header[6..10].try_into().expect("4 bytes"));
    if body_len as usize > MAX_BODY_LEN {
        return Err(DecodeError::Oversized(u64::from(body_len)));
    }
    Ok((msg_type, body_len as usize))
}

/// Decodes exactly one frame; any byte past the frame is an error.
pub fn decode(bytes: &[u8]) -> Result<Message, DecodeError> {
    let (msg_type, body_len) = parse_header(bytes)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < body_len {
        return Err(DecodeError::Truncated);
    }
    if body.len() > body_len {
        return Err(DecodeError::TrailingBytes(body.len() - body_len));
    }
    let mut r = Reader { buf: body };
    let message = match msg_type {
        TYPE_HELLO => {
            let suite = r.u8()?;
            let p = r.int()?;
            let q = r.int()?;
            let g = r.int()?;
            let n = r.u32()? as usize;
            let k = r.u32()?;
            let xs = r.ints(n)?;
            Message::Hello(Hello {
                suite,
                p,
                q,
                g,
                k,
                xs,
            })
        }
        TYPE_MSG_A => Message::A(MsgA { ma: r.int()? }),
        TYPE_MSG_CHOICE => {
            let count = r.u32()? as usize;
            let mjs = r.ints(count)?;
            let mb = r.int()?;
            Message::Choice(MsgChoice { mjs, mb })
        }
        TYPE_MSG_REPLY => {
            let count = r.u32()? as usize;
            Message::Reply(MsgReply {
                replies: r.ints(count)?,
            })
        }
        TYPE_MSG_SECRETS => {
            let count = r.u32()? as usize;
            // each entry needs at least a digest and a length prefix
            if count > r.remaining() / 36 {
                return Err(DecodeError::Truncated);
            }
            let mut sealed = Vec::with_capacity(count);
            for _ in 0..count {
                let commitment: Digest = r.take(32)?.try_into().expect("32 bytes");
                let ciphertext = r.bytes()?.to_vec();
                if ciphertext.is_empty() {
                    return Err(DecodeError::Malformed("empty ciphertext"));
                }
                sealed.push(SealedSecret {
                    ciphertext,
                    commitment,
                });
            }
            Message::Secrets(MsgSecrets { sealed })
        }
        TYPE_ERROR => {
            let code = r.u8()?;
            let reason = std::str::from_utf8(r.bytes()?)
                .map_err(|_| DecodeError::Malformed("error reason is not UTF-8"))?
                .to_owned();
            Message::Error(ErrorFrame { code, reason })
        }
        _ => unreachable!("parse_header filters unknown types"),
    };
    if r.remaining() != 0 {
        return Err(DecodeError::TrailingBytes(r.remaining()));
    }
    Ok(message)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() < n {
            return Err(DecodeError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn bytes(&mut self) -> Result<&'a [u8], DecodeError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    fn int(&mut self) -> Result<BigUint, DecodeError> {
        let raw = self.bytes()?;
        if raw.first() == Some(&0) {
            return Err(DecodeError::NonCanonical);
        }
        Ok(BigUint::from_bytes_be(raw))
    }

    fn ints(&mut self, count: usize) -> Result<Vec<BigUint>, DecodeError> {
        // every integer carries a 4-byte length prefix
        if count > self.remaining() / 4 {
            return Err(DecodeError::Truncated);
        }
        (0..count).map(|_| self.int()).collect()
    }
}
