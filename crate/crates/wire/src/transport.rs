//! Transport bindings. A session is a reliable, ordered, bidirectional byte
//! stream between exactly two peers; the protocol does not care whether the
//! bytes cross an in-process pipe or a TCP socket, and tests assert the
//! payloads are identical either way.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, SyncSender};
use std::sync::{Arc, Mutex};

use ark_ec::pairing::Pairing;
use offline_euro::pairing::GroupParams;

use crate::frame::{read_frame, write_frame, Frame};
use crate::message::Message;
use crate::WireError;

pub trait ByteStream: Read + Write + Send {}
impl<T: Read + Write + Send> ByteStream for T {}

// ---- frame transcript tap --------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

/// One recorded frame: direction plus the exact bytes on the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameRecord {
    pub direction: Direction,
    pub tag: u8,
    pub bytes: Vec<u8>,
}

/// Frame records per session label, shared across threads.
#[derive(Clone, Default)]
pub struct Transcript {
    inner: Arc<Mutex<BTreeMap<String, Vec<FrameRecord>>>>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&self, label: &str, rec: FrameRecord) {
        self.inner
            .lock()
            .unwrap()
            .entry(label.to_string())
            .or_default()
            .push(rec);
    }

    pub fn sessions(&self) -> BTreeMap<String, Vec<FrameRecord>> {
        self.inner.lock().unwrap().clone()
    }

    /// Concatenated frame bytes per session, for cross-transport comparison.
    pub fn flattened(&self) -> BTreeMap<String, Vec<u8>> {
        self.sessions()
            .into_iter()
            .map(|(label, records)| {
                let bytes = records.into_iter().flat_map(|r| r.bytes).collect();
                (label, bytes)
            })
            .collect()
    }
}

// ---- connection ------------------------------------------------------------

/// One endpoint of a session, with optional frame recording.
pub struct Connection {
    io: Box<dyn ByteStream>,
    tap: Option<(String, Transcript)>,
}

impl Connection {
    pub fn new(io: Box<dyn ByteStream>) -> Self {
        Self { io, tap: None }
    }

    pub fn with_tap(io: Box<dyn ByteStream>, label: &str, transcript: Transcript) -> Self {
        Self {
            io,
            tap: Some((label.to_string(), transcript)),
        }
    }

    pub fn send_frame(&mut self, frame: &Frame) -> Result<(), WireError> {
        write_frame(&mut self.io, frame)?;
        if let Some((label, transcript)) = &self.tap {
            transcript.record(
                label,
                FrameRecord {
                    direction: Direction::Sent,
                    tag: frame.tag,
                    bytes: frame.to_bytes(),
                },
            );
        }
        Ok(())
    }

    /// Receives the next frame; `Ok(None)` on clean close.
    pub fn recv_frame(&mut self) -> Result<Option<Frame>, WireError> {
        let frame = read_frame(&mut self.io)?;
        if let (Some((label, transcript)), Some(frame)) = (&self.tap, &frame) {
            transcript.record(
                label,
                FrameRecord {
                    direction: Direction::Received,
                    tag: frame.tag,
                    bytes: frame.to_bytes(),
                },
            );
        }
        Ok(frame)
    }

    pub fn send<E: Pairing>(&mut self, msg: &Message<E>) -> Result<(), WireError> {
        self.send_frame(&msg.to_frame())
    }

    /// Receives and decodes one message; a closed stream is an error here
    /// because the caller expected an answer.
    pub fn recv<E: Pairing>(&mut self, params: &GroupParams<E>) -> Result<Message<E>, WireError> {
        let frame = self.recv_frame()?.ok_or(WireError::ConnectionClosed)?;
        Message::from_frame(&frame, params)
    }
}

// ---- in-process pipe -------------------------------------------------------

/// One half of an in-memory duplex byte stream.
pub struct PipeStream {
    tx: SyncSender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    pending: Vec<u8>,
    offset: usize,
}

/// A connected pair of in-memory streams.
pub fn duplex() -> (PipeStream, PipeStream) {
    let (tx_a, rx_b) = mpsc::sync_channel(64);
    let (tx_b, rx_a) = mpsc::sync_channel(64);
    (
        PipeStream {
            tx: tx_a,
            rx: rx_a,
            pending: Vec::new(),
            offset: 0,
        },
        PipeStream {
            tx: tx_b,
            rx: rx_b,
            pending: Vec::new(),
            offset: 0,
        },
    )
}

impl Read for PipeStream {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.offset >= self.pending.len() {
            match self.rx.recv() {
                Ok(chunk) => {
                    self.pending = chunk;
                    self.offset = 0;
                }
                // Peer dropped: clean EOF.
                Err(_) => return Ok(0),
            }
        }
        let n = buf.len().min(self.pending.len() - self.offset);
        buf[..n].copy_from_slice(&self.pending[self.offset..self.offset + n]);
        self.offset += n;
        Ok(n)
    }
}

impl Write for PipeStream {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.tx
            .send(buf.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer closed"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

// ---- network bindings ------------------------------------------------------

/// Accepts inbound sessions for one named endpoint.
pub trait Listener: Send {
    fn accept(&mut self) -> io::Result<Box<dyn ByteStream>>;
}

/// Creates listeners and dials named endpoints. Implementations must make
/// `connect` work for any name already returned by `listen`.
pub trait Network: Send + Sync {
    fn listen(&self, name: &str) -> io::Result<Box<dyn Listener>>;
    fn connect(&self, name: &str) -> io::Result<Box<dyn ByteStream>>;
}

/// In-process binding: endpoints are queues of pipe halves.
#[derive(Default)]
pub struct InprocNetwork {
    endpoints: Mutex<HashMap<String, SyncSender<PipeStream>>>,
}

impl InprocNetwork {
    pub fn new() -> Self {
        Self::default()
    }
}

struct InprocListener {
    rx: Receiver<PipeStream>,
}

impl Listener for InprocListener {
    fn accept(&mut self) -> io::Result<Box<dyn ByteStream>> {
        self.rx
            .recv()
            .map(|s| Box::new(s) as Box<dyn ByteStream>)
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "network dropped"))
    }
}

impl Network for InprocNetwork {
    fn listen(&self, name: &str) -> io::Result<Box<dyn Listener>> {
        let (tx, rx) = mpsc::sync_channel(16);
        self.endpoints.lock().unwrap().insert(name.to_string(), tx);
        Ok(Box::new(InprocListener { rx }))
    }

    fn connect(&self, name: &str) -> io::Result<Box<dyn ByteStream>> {
        let tx = self
            .endpoints
            .lock()
            .unwrap()
            .get(name)
            .cloned()
            .ok_or_else(|| {
                io::Error::new(io::ErrorKind::NotFound, format!("no endpoint {name}"))
            })?;
        let (client, server) = duplex();
        tx.send(server)
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "listener gone"))?;
        Ok(Box::new(client))
    }
}

/// Loopback TCP binding: endpoints are ephemeral 127.0.0.1 ports registered
/// under their names at listen time.
#[derive(Default)]
pub struct TcpNetwork {
    addrs: Mutex<HashMap<String, SocketAddr>>,
}

impl TcpNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an externally known address, for endpoints served by other
    /// processes.
    pub fn register(&self, name: &str, addr: SocketAddr) {
        self.addrs.lock().unwrap().insert(name.to_string(), addr);
    }

    pub fn addr_of(&self, name: &str) -> Option<SocketAddr> {
        self.addrs.lock().unwrap().get(name).copied()
    }
}

struct TcpListenerWrapper {
    listener: TcpListener,
}

impl Listener for TcpListenerWrapper {
    fn accept(&mut self) -> io::Result<Box<dyn ByteStream>> {
        let (stream, _) = self.listener.accept()?;
        stream.set_nodelay(true)?;
        Ok(Box::new(stream))
    }
}

impl Network for TcpNetwork {
    fn listen(&self, name: &str) -> io::Result<Box<dyn Listener>> {
        let listener = TcpListener::bind(("127.0.0.1", 0))?;
        self.register(name, listener.local_addr()?);
        Ok(Box::new(TcpListenerWrapper { listener }))
    }

    fn connect(&self, name: &str) -> io::Result<Box<dyn ByteStream>> {
        let addr = self.addr_of(name).ok_or_else(|| {
            io::Error::new(io::ErrorKind::NotFound, format!("no endpoint {name}"))
        })?;
        tcp_dial(&addr.to_string())
    }
}

/// Listens on an explicit TCP address, for standalone server processes.
pub fn tcp_listen(addr: &str) -> io::Result<Box<dyn Listener>> {
    let listener = TcpListener::bind(addr)?;
    Ok(Box::new(TcpListenerWrapper { listener }))
}

/// Dials an explicit TCP address.
pub fn tcp_dial(addr: &str) -> io::Result<Box<dyn ByteStream>> {
    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    Ok(Box::new(stream))
}
