//! Fire-and-forget TCP pose uplink.

use std::io::Write;
use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use super::codec::{encode_pose, PoseMessage};
use crate::error::{Error, Result};

pub const UPLINK_ENV: &str = "MIO_UPLINK_ADDR";
const RETRY_INTERVAL: Duration = Duration::from_secs(1);
const CONNECT_TIMEOUT: Duration = Duration::from_millis(200);

/// Sends pose frames to a sink. A send never blocks the caller on a dead
/// link: failures drop the frame and reconnection is retried at most once
/// per second.
#[derive(Debug)]
pub struct UplinkClient {
    addr: String,
    stream: Option<TcpStream>,
    last_attempt: Option<Instant>,
    sent: usize,
    failed: usize,
}

impl UplinkClient {
    pub fn new(addr: impl Into<String>) -> Self {
        Self {
            addr: addr.into(),
            stream: None,
            last_attempt: None,
            sent: 0,
            failed: 0,
        }
    }

    pub fn addr(&self) -> &str {
        &self.addr
    }

    pub fn sent(&self) -> usize {
        self.sent
    }

    pub fn failed(&self) -> usize {
        self.failed
    }

    pub fn is_connected(&self) -> bool {
        self.stream.is_some()
    }

    fn resolve(&self) -> Result<SocketAddr> {
        self.addr
            .to_socket_addrs()
            .map_err(|e| Error::UplinkUnavailable(format!("{}: {e}", self.addr)))?
            .next()
            .ok_or_else(|| Error::UplinkUnavailable(format!("{}: no address", self.addr)))
    }

    fn connect(&mut self) -> Result<()> {
        self.last_attempt = Some(Instant::now());
        let addr = self.resolve()?;
        let stream = TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT)
            .map_err(|e| Error::UplinkUnavailable(format!("{addr}: {e}")))?;
        stream.set_nodelay(true).ok();
        stream.set_write_timeout(Some(CONNECT_TIMEOUT)).ok();
        self.stream = Some(stream);
        Ok(())
    }

    pub fn send(&mut self, msg: &PoseMessage) -> Result<()> {
        if self.stream.is_none() {
            let due = self.last_attempt.is_none_or(|t| t.elapsed() >= RETRY_INTERVAL);
            if !due {
                self.failed += 1;
                return Err(Error::UplinkUnavailable(format!("{}: waiting to reconnect", self.addr)));
            }
            if let Err(e) = self.connect() {
                self.failed += 1;
                return Err(e);
            }
        }
        let stream = self.stream.as_mut().expect("connected");
        match stream.write_all(&encode_pose(msg)) {
            Ok(()) => {
                self.sent += 1;
                Ok(())
            }
            Err(e) => {
                self.stream = None;
                self.failed += 1;
                Err(Error::UplinkUnavailable(format!("{}: {e}", self.addr)))
            }
        }
    }
}
