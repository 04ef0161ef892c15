//! TCP pose sink: one CSV file per accepted connection.

use std::fs::File;
use std::io::{BufWriter, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use super::codec::{decode_pose, FRAME_LEN, MAGIC};
use crate::error::{Error, Result};
use crate::fmt::sig9;

pub const SINK_CSV_HEADER: &str = "seq,t,x,y,z,qw,qx,qy,qz";

/// What happened on one closed connection.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionReport {
    pub id: usize,
    pub peer: Option<SocketAddr>,
    pub path: PathBuf,
    pub frames: usize,
    /// Set when the connection ended on a malformed or partial frame.
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SinkHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    reports: Arc<Mutex<Vec<ConnectionReport>>>,
    accepted: Arc<AtomicUsize>,
    thread: Option<JoinHandle<()>>,
}

impl SinkHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Connections accepted so far.
    pub fn accepted(&self) -> usize {
        self.accepted.load(Ordering::SeqCst)
    }

    /// Reports for connections that have closed, in closing order.
    pub fn closed(&self) -> Vec<ConnectionReport> {
        self.reports.lock().expect("reports lock").clone()
    }

    /// Polls until `n` connections have closed or `timeout` elapses.
    pub fn wait_closed(&self, n: usize, timeout: Duration) -> Vec<ConnectionReport> {
        let deadline = std::time::Instant::now() + timeout;
        loop {
            let closed = self.closed();
            if closed.len() >= n || std::time::Instant::now() >= deadline {
                return closed;
            }
            std::thread::sleep(Duration::from_millis(5));
        }
    }

    /// Blocks until the accept loop exits, e.g. after [`SinkHandle::shutdown`]
    /// from another handle clone of the stop flag.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    pub fn shutdown(mut self) -> Vec<ConnectionReport> {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
        self.closed()
    }
}

impl Drop for SinkHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `bind` and serves in a background thread, writing
/// `<out_dir>/conn_NNNN.csv` for every connection.
pub fn serve_sink(bind: &str, out_dir: impl AsRef<Path>) -> Result<SinkHandle> {
    let out_dir = out_dir.as_ref().to_path_buf();
    std::fs::create_dir_all(&out_dir)?;
    let listener = TcpListener::bind(bind).map_err(|source| Error::BindFailure {
        addr: bind.to_string(),
        source,
    })?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let reports = Arc::new(Mutex::new(Vec::new()));
    let accepted = Arc::new(AtomicUsize::new(0));

    let thread = {
        let (stop, reports, accepted) = (Arc::clone(&stop), Arc::clone(&reports), Arc::clone(&accepted));
        std::thread::spawn(move || accept_loop(listener, out_dir, stop, reports, accepted))
    };
    log::info!("pose sink listening on {addr}");
    Ok(SinkHandle {
        addr,
        stop,
        reports,
        accepted,
        thread: Some(thread),
    })
}

fn accept_loop(
    listener: TcpListener,
    out_dir: PathBuf,
    stop: Arc<AtomicBool>,
    reports: Arc<Mutex<Vec<ConnectionReport>>>,
    accepted: Arc<AtomicUsize>,
) {
    let mut workers = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                let id = accepted.fetch_add(1, Ordering::SeqCst);
                let path = out_dir.join(format!("conn_{id:04}.csv"));
                let (reports, stop) = (Arc::clone(&reports), Arc::clone(&stop));
                workers.push(std::thread::spawn(move || {
                    let report = handle_connection(id, stream, Some(peer), path, &stop);
                    match &report.error {
                        Some(e) => log::warn!("connection {id} from {peer}: {e}"),
                        None => log::info!("connection {id} from {peer} closed after {} poses", report.frames),
                    }
                    reports.lock().expect("reports lock").push(report);
                }));
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                log::warn!("accept failed: {e}");
                std::thread::sleep(Duration::from_millis(5));
            }
        }
    }
    for w in workers {
        let _ = w.join();
    }
}

fn handle_connection(
    id: usize,
    mut stream: TcpStream,
    peer: Option<SocketAddr>,
    path: PathBuf,
    stop: &AtomicBool,
) -> ConnectionReport {
    let mut report = ConnectionReport {
        id,
        peer,
        path: path.clone(),
        frames: 0,
        error: None,
    };
    let result = (|| -> Result<()> {
        stream.set_nonblocking(false)?;
        stream.set_read_timeout(Some(Duration::from_millis(50)))?;
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "{SINK_CSV_HEADER}")?;
        out.flush()?;
        let mut buf = [0u8; FRAME_LEN];
        let mut filled = 0;
        loop {
            match stream.read(&mut buf[filled..]) {
                Ok(0) => {
                    if filled == 0 {
                        return Ok(());
                    }
                    return Err(Error::TruncatedFrame {
                        expected: FRAME_LEN,
                        got: filled,
                    });
                }
                Ok(n) => {
                    filled += n;
                    if filled >= 2 && buf[..2] != MAGIC {
                        return Err(Error::BadMagic([buf[0], buf[1]]));
                    }
                    if filled == FRAME_LEN {
                        let m = decode_pose(&buf)?;
                        let [x, y, z] = m.translation;
                        let [qw, qx, qy, qz] = m.rotation;
                        let row: Vec<String> = [m.timestamp, x, y, z, qw, qx, qy, qz].iter().map(|v| sig9(*v)).collect();
                        writeln!(out, "{},{}", m.seq, row.join(","))?;
                        out.flush()?;
                        report.frames += 1;
                        filled = 0;
                    }
                }
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    if stop.load(Ordering::SeqCst) {
                        return Ok(());
                    }
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    })();
    if let Err(e) = result {
        report.error = Some(e.to_string());
    }
    report
}
