use super::{
    MsgA, MsgChoice, MsgReply, MsgSecrets, NonceSource, ProtocolError, Receiver, Sender,
    SessionParams,
};
use crate::sealing::Secret;

/// Every message and both final states of an in-process run.
#[derive(Debug)]
pub struct Exchange {
    pub msg_a: MsgA,
    pub msg_choice: MsgChoice,
    pub msg_reply: MsgReply,
    pub msg_secrets: MsgSecrets,
    pub sender: Sender,
    pub receiver: Receiver,
}

impl Exchange {
    /// Receiver-side decryption of the chosen secrets.
    pub fn open(&self) -> Result<Vec<(usize, Secret)>, ProtocolError> {
        self.receiver.open(&self.msg_secrets)
    }
}

/// Runs both parties in process, without framing.
pub fn run_k_of_n<S, R>(
    session: &SessionParams,
    secrets: &[Secret],
    receiver: Receiver,
    sender_rng: &mut S,
    receiver_rng: &mut R,
) -> Result<Exchange, ProtocolError>
where
    S: NonceSource + ?Sized,
    R: NonceSource + ?Sized,
{
    let mut receiver = receiver;
    let mut sender = Sender::new(session.clone());
    let msg_a = sender.start(sender_rng)?;
    let msg_choice = receiver.choose(&msg_a, receiver_rng)?;
    let msg_reply = sender.respond(&msg_choice, sender_rng)?;
    receiver.recover(&msg_reply)?;
    let msg_secrets = sender.seal(secrets)?;
    Ok(Exchange {
        msg_a,
        msg_choice,
        msg_reply,
        msg_secrets,
        sender,
        receiver,
    })
}

/// The 1-out-of-n protocol: a k-out-of-n run with a single choice.
pub fn run_1_of_n<S, R>(
    session: &SessionParams,
    secrets: &[Secret],
    choice: usize,
    sender_rng: &mut S,
    receiver_rng: &mut R,
) -> Result<Exchange, ProtocolError>
where
    S: NonceSource + ?Sized,
    R: NonceSource + ?Sized,
{
    if session.k() != 1 {
        return Err(ProtocolError::Session(format!(
            "1-out-of-n needs k = 1, session has k = {}",
            session.k()
        )));
    }
    let receiver = Receiver::new(session.clone(), &[choice])?;
    run_k_of_n(session, secrets, receiver, sender_rng, receiver_rng)
}
