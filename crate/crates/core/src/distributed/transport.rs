use std::collections::{HashMap, VecDeque};
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread::JoinHandle;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::DistError;
use crate::scalar::Real;

/// Body of a message between ranks.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload<T> {
    /// Half-block (or full-block) of amplitudes.
    Amplitudes(Vec<Complex<T>>),
    /// Quantised probability mass of a block.
    Mass(u128),
    /// Local sampling targets.
    Targets(Vec<u128>),
    /// Global basis indices picked by the targets.
    Indices(Vec<u64>),
}

impl<T> Payload<T> {
    fn tag(&self) -> u8 {
        match self {
            Payload::Amplitudes(_) => 0,
            Payload::Mass(_) => 1,
            Payload::Targets(_) => 2,
            Payload::Indices(_) => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeMessage<T> {
    pub from: usize,
    pub to: usize,
    /// Strictly increasing per ordered rank pair, starting at 0.
    pub seq: u64,
    pub payload: Payload<T>,
}

/// Point-to-point messaging between the ranks of one run. Sends never block
/// on the receiver; receives block until the next message from `from`.
pub trait Transport<T>: Send {
    fn rank(&self) -> usize;
    fn world(&self) -> usize;
    fn send(&mut self, to: usize, payload: Payload<T>) -> Result<(), DistError>;
    fn recv(&mut self, from: usize) -> Result<Payload<T>, DistError>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    /// In-process channels.
    #[default]
    Channel,
    /// Loopback TCP sockets, one connection per rank pair.
    Tcp,
}

/// Per-pair sequence bookkeeping shared by both transports.
#[derive(Default)]
struct Sequencer {
    next_out: HashMap<usize, u64>,
    next_in: HashMap<usize, u64>,
}

impl Sequencer {
    fn outgoing(&mut self, to: usize) -> u64 {
        let s = self.next_out.entry(to).or_insert(0);
        *s += 1;
        *s - 1
    }

    fn check_incoming(&mut self, from: usize, seq: u64) -> Result<(), DistError> {
        let expected = self.next_in.entry(from).or_insert(0);
        if seq != *expected {
            return Err(DistError::Transport(format!("rank {from} sent sequence {seq}, expected {expected}")));
        }
        *expected += 1;
        Ok(())
    }
}

pub struct ChannelTransport<T> {
    rank: usize,
    peers: Vec<Sender<ExchangeMessage<T>>>,
    inbox: Receiver<ExchangeMessage<T>>,
    pending: HashMap<usize, VecDeque<ExchangeMessage<T>>>,
    seq: Sequencer,
}

impl<T: Send> ChannelTransport<T> {
    /// Fully connected endpoints for `world` ranks, indexed by rank.
    pub fn mesh(world: usize) -> Vec<ChannelTransport<T>> {
        let (senders, receivers): (Vec<_>, Vec<_>) = (0..world).map(|_| channel()).unzip();
        receivers
            .into_iter()
            .enumerate()
            .map(|(rank, inbox)| ChannelTransport {
                rank,
                peers: senders.clone(),
                inbox,
                pending: HashMap::new(),
                seq: Sequencer::default(),
            })
            .collect()
    }
}

impl<T: Send> Transport<T> for ChannelTransport<T> {
    fn rank(&self) -> usize {
        self.rank
    }

    fn world(&self) -> usize {
        self.peers.len()
    }

    fn send(&mut self, to: usize, payload: Payload<T>) -> Result<(), DistError> {
        let seq = self.seq.outgoing(to);
        let msg = ExchangeMessage { from: self.rank, to, seq, payload };
        self.peers
            .get(to)
            .ok_or(DistError::Transport(format!("no rank {to}")))?
            .send(msg)
            .map_err(|_| DistError::Transport(format!("rank {to} hung up")))
    }

    fn recv(&mut self, from: usize) -> Result<Payload<T>, DistError> {
        let msg = match self.pending.get_mut(&from).and_then(|q| q.pop_front()) {
            Some(m) => m,
            None => loop {
                let m = self.inbox.recv().map_err(|_| DistError::Transport(format!("rank {from} hung up")))?;
                if m.from == from {
                    break m;
                }
                self.pending.entry(m.from).or_default().push_back(m);
            },
        };
        self.seq.check_incoming(from, msg.seq)?;
        Ok(msg.payload)
    }
}

type Writer = (Sender<Vec<u8>>, JoinHandle<std::io::Result<()>>);

/// Loopback TCP endpoint. Each peer connection has a writer thread so that
/// simultaneous large sends cannot deadlock.
pub struct TcpTransport<T> {
    rank: usize,
    world: usize,
    writers: HashMap<usize, Writer>,
    readers: HashMap<usize, BufReader<TcpStream>>,
    seq: Sequencer,
    _scalar: std::marker::PhantomData<T>,
}

/// Listeners for every rank, bound before any rank starts connecting.
pub struct TcpRendezvous {
    listeners: Vec<TcpListener>,
    ports: Vec<u16>,
}

impl TcpRendezvous {
    pub fn bind(world: usize) -> Result<Self, DistError> {
        let listeners = (0..world)
            .map(|_| TcpListener::bind("127.0.0.1:0"))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(io_err)?;
        let ports = listeners.iter().map(|l| l.local_addr().map(|a| a.port())).collect::<std::io::Result<_>>().map_err(io_err)?;
        Ok(Self { listeners, ports })
    }

    /// Split into per-rank connectors, to be completed on each rank's thread.
    pub fn into_connectors(self) -> Vec<TcpConnector> {
        let ports = self.ports;
        self.listeners
            .into_iter()
            .enumerate()
            .map(|(rank, listener)| TcpConnector { rank, listener, ports: ports.clone() })
            .collect()
    }
}

pub struct TcpConnector {
    rank: usize,
    listener: TcpListener,
    ports: Vec<u16>,
}

impl TcpConnector {
    /// Connect to every lower rank and accept every higher one.
    pub fn connect<T: Real>(self) -> Result<TcpTransport<T>, DistError> {
        let world = self.ports.len();
        let mut streams = HashMap::new();
        for peer in 0..self.rank {
            let mut s = TcpStream::connect(("127.0.0.1", self.ports[peer])).map_err(io_err)?;
            s.write_all(&(self.rank as u32).to_le_bytes()).map_err(io_err)?;
            streams.insert(peer, s);
        }
        for _ in self.rank + 1..world {
            let (mut s, _) = self.listener.accept().map_err(io_err)?;
            let mut id = [0u8; 4];
            s.read_exact(&mut id).map_err(io_err)?;
            streams.insert(u32::from_le_bytes(id) as usize, s);
        }
        let mut writers = HashMap::new();
        let mut readers = HashMap::new();
        for (peer, s) in streams {
            s.set_nodelay(true).map_err(io_err)?;
            let w = s.try_clone().map_err(io_err)?;
            let (tx, rx) = channel::<Vec<u8>>();
            let handle = std::thread::spawn(move || {
                let mut w = BufWriter::new(w);
                for frame in rx {
                    w.write_all(&frame)?;
                    w.flush()?;
                }
                Ok(())
            });
            writers.insert(peer, (tx, handle));
            readers.insert(peer, BufReader::new(s));
        }
        Ok(TcpTransport { rank: self.rank, world, writers, readers, seq: Sequencer::default(), _scalar: Default::default() })
    }
}

fn io_err(e: std::io::Error) -> DistError {
    DistError::Transport(e.to_string())
}

fn encode<T: Real>(seq: u64, payload: &Payload<T>) -> Vec<u8> {
    let mut body = Vec::new();
    match payload {
        Payload::Amplitudes(a) => {
            for z in a {
                body.extend_from_slice(&z.re.f64().to_le_bytes());
                body.extend_from_slice(&z.im.f64().to_le_bytes());
            }
        }
        Payload::Mass(m) => body.extend_from_slice(&m.to_le_bytes()),
        Payload::Targets(t) => t.iter().for_each(|x| body.extend_from_slice(&x.to_le_bytes())),
        Payload::Indices(ix) => ix.iter().for_each(|x| body.extend_from_slice(&x.to_le_bytes())),
    }
    let mut frame = Vec::with_capacity(17 + body.len());
    frame.extend_from_slice(&seq.to_le_bytes());
    frame.push(payload.tag());
    frame.extend_from_slice(&(body.len() as u64).to_le_bytes());
    frame.extend_from_slice(&body);
    frame
}

fn decode<T: Real>(tag: u8, body: &[u8]) -> Result<Payload<T>, DistError> {
    let words = |w: usize| body.chunks_exact(w);
    Ok(match tag {
        0 => Payload::Amplitudes(
            words(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    Complex::new(T::of(re), T::of(im))
                })
                .collect(),
        ),
        1 => Payload::Mass(u128::from_le_bytes(body.try_into().map_err(|_| DistError::Transport("bad mass frame".into()))?)),
        2 => Payload::Targets(words(16).map(|c| u128::from_le_bytes(c.try_into().expect("16 bytes"))).collect()),
        3 => Payload::Indices(words(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()),
        t => return Err(DistError::Transport(format!("unknown frame tag {t}"))),
    })
}

impl<T: Real> Transport<T> for TcpTransport<T> {
    fn rank(&self) -> usize {
        self.rank
    }

    fn world(&self) -> usize {
        self.world
    }

    fn send(&mut self, to: usize, payload: Payload<T>) -> Result<(), DistError> {
        let seq = self.seq.outgoing(to);
        let (tx, _) = self.writers.get(&to).ok_or(DistError::Transport(format!("no connection to rank {to}")))?;
        tx.send(encode(seq, &payload)).map_err(|_| DistError::Transport(format!("writer to rank {to} stopped")))
    }

    fn recv(&mut self, from: usize) -> Result<Payload<T>, DistError> {
        let r = self.readers.get_mut(&from).ok_or(DistError::Transport(format!("no connection to rank {from}")))?;
        let mut head = [0u8; 17];
        r.read_exact(&mut head).map_err(io_err)?;
        let seq = u64::from_le_bytes(head[..8].try_into().expect("8 bytes"));
        let len = u64::from_le_bytes(head[9..].try_into().expect("8 bytes")) as usize;
        let mut body = vec![0u8; len];
        r.read_exact(&mut body).map_err(io_err)?;
        self.seq.check_incoming(from, seq)?;
        decode(head[8], &body)
    }
}

impl<T> Drop for TcpTransport<T> {
    fn drop(&mut self) {
        for (_, (tx, handle)) in self.writers.drain() {
            drop(tx);
            let _ = handle.join();
        }
    }
}
