//! UDP inference service and the bench-side streaming client.

use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::Duration;

use super::nn::{infer, ReadoutModel};
use super::wire::{Reply, Request, REPLY_LEN, REQUEST_LEN};
use super::{acquire, CollectConfig, CLASSES, FEATURES};
use crate::error::{Error, Result};
use crate::experiments::DigitBitmap;
use crate::instruments::Testbench;

const POLL: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceResult {
    pub seq: u32,
    pub label: Option<u8>,
    pub predicted: u8,
    pub score: f64,
}

pub struct ServiceHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    results: Arc<RwLock<Vec<ServiceResult>>>,
    malformed: Arc<AtomicU64>,
    thread: Option<JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Snapshot of the results log.
    pub fn results(&self) -> Vec<ServiceResult> {
        self.results.read().map(|r| r.clone()).unwrap_or_default()
    }

    pub fn malformed(&self) -> u64 {
        self.malformed.load(Ordering::SeqCst)
    }

    pub fn shutdown(mut self) -> Vec<ServiceResult> {
        self.halt();
        self.results()
    }

    fn halt(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.halt();
    }
}

/// Binds the socket and answers requests on a background thread until the
/// handle is shut down or dropped.
pub fn serve(model: ReadoutModel, addr: impl ToSocketAddrs) -> Result<ServiceHandle> {
    let start = |e: std::io::Error| Error::ServiceStartError(e.to_string());
    if model.n_inputs() != FEATURES {
        return Err(Error::ServiceStartError(format!(
            "model expects {} inputs, datagrams carry {FEATURES}",
            model.n_inputs()
        )));
    }
    let socket = UdpSocket::bind(addr).map_err(start)?;
    socket.set_read_timeout(Some(POLL)).map_err(start)?;
    let local = socket.local_addr().map_err(start)?;
    let stop = Arc::new(AtomicBool::new(false));
    let results = Arc::new(RwLock::new(Vec::new()));
    let malformed = Arc::new(AtomicU64::new(0));
    let (s, r, m) = (stop.clone(), results.clone(), malformed.clone());
    let thread = std::thread::Builder::new()
        .name("prc-serve".into())
        .spawn(move || serve_loop(socket, model, s, r, m))
        .map_err(start)?;
    log::info!("serving on {local}");
    Ok(ServiceHandle {
        addr: local,
        stop,
        results,
        malformed,
        thread: Some(thread),
    })
}

fn serve_loop(
    socket: UdpSocket,
    model: ReadoutModel,
    stop: Arc<AtomicBool>,
    results: Arc<RwLock<Vec<ServiceResult>>>,
    malformed: Arc<AtomicU64>,
) {
    // One byte more than a request so oversized datagrams are visible.
    let mut buf = [0u8; REQUEST_LEN + 1];
    while !stop.load(Ordering::SeqCst) {
        let (n, from) = match socket.recv_from(&mut buf) {
            Ok(x) => x,
            Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => continue,
            Err(e) => {
                log::warn!("recv failed: {e}");
                continue;
            }
        };
        let req = match Request::decode(&buf[..n]) {
            Ok(r) => r,
            Err(e) => {
                malformed.fetch_add(1, Ordering::SeqCst);
                log::warn!("dropped datagram from {from}: {e}");
                continue;
            }
        };
        let pred = match infer(&model, &req.features) {
            Ok(p) => p,
            Err(e) => {
                malformed.fetch_add(1, Ordering::SeqCst);
                log::warn!("inference failed for seq {}: {e}", req.seq);
                continue;
            }
        };
        let reply = Reply {
            seq: req.seq,
            digit: pred.digit as u8,
            score: pred.score,
        };
        if let Ok(mut log) = results.write() {
            log.push(ServiceResult {
                seq: req.seq,
                label: req.label,
                predicted: reply.digit,
                score: reply.score,
            });
        }
        if let Err(e) = socket.send_to(&reply.encode(), from) {
            log::warn!("reply to {from} failed: {e}");
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub labels: Vec<usize>,
    /// Reply per streamed digit, `None` when it timed out.
    pub replies: Vec<Option<Reply>>,
}

impl SessionReport {
    pub fn answered(&self) -> usize {
        self.replies.iter().flatten().count()
    }

    /// Correct replies over all streamed digits; lost replies count as wrong.
    pub fn accuracy(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        let hits = self
            .labels
            .iter()
            .zip(&self.replies)
            .filter(|(l, r)| r.is_some_and(|r| r.digit as usize == **l))
            .count();
        hits as f64 / self.labels.len() as f64
    }

    /// Rows are true labels, columns predictions.
    pub fn confusion(&self) -> [[usize; CLASSES]; CLASSES] {
        let mut m = [[0; CLASSES]; CLASSES];
        for (l, r) in self.labels.iter().zip(&self.replies) {
            if let Some(r) = r {
                m[*l][(r.digit as usize).min(CLASSES - 1)] += 1;
            }
        }
        m
    }
}

/// Streams `labels` (indices into `digits`) through the bench and sends one
/// datagram per completed digit, waiting up to `timeout` for each reply.
pub fn stream_session(
    bench: &mut Testbench,
    digits: &[DigitBitmap],
    labels: &[usize],
    cfg: &CollectConfig,
    server: SocketAddr,
    timeout: Duration,
) -> Result<SessionReport> {
    let local: SocketAddr = if server.is_ipv4() {
        "0.0.0.0:0".parse().expect("literal")
    } else {
        "[::]:0".parse().expect("literal")
    };
    let socket = UdpSocket::bind(local)?;
    socket.set_read_timeout(Some(timeout))?;
    let mut replies = Vec::with_capacity(labels.len());
    let mut buf = [0u8; REPLY_LEN + 1];
    for (seq, &label) in labels.iter().enumerate() {
        let digit = digits
            .get(label)
            .ok_or_else(|| Error::Precondition(format!("no digit {label}")))?;
        let f = acquire(bench, digit, cfg)?;
        let req = Request {
            seq: seq as u32,
            label: Some(label as u8),
            features: f.try_into().expect("64 readings"),
        };
        socket.send_to(&req.encode(), server)?;
        let reply = loop {
            match socket.recv_from(&mut buf) {
                Ok((n, _)) => match Reply::decode(&buf[..n]) {
                    Ok(r) if r.seq == req.seq => break Some(r),
                    _ => continue,
                },
                Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                    log::warn!("no reply for seq {seq}");
                    break None;
                }
                Err(e) => return Err(e.into()),
            }
        };
        replies.push(reply);
    }
    Ok(SessionReport {
        labels: labels.to_vec(),
        replies,
    })
}
