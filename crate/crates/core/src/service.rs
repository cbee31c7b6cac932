//! Remote stepping over newline-delimited JSON.
//!
//! Each connection owns one episode context. Requests and responses are
//! strictly one-to-one. See `docs/protocol.md` for the message reference.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::str::FromStr;
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::episode::{Episode, Observation, StepInfo, StepResult};
use crate::grid::{Action, SymbolicGrid};
use crate::level::{LevelRegistry, Mode};
use crate::text::TextMode;
use crate::Error;

/// Environment variable holding the default TCP port.
pub const PORT_ENV: &str = "DYNGRID_PORT";
pub const DEFAULT_PORT: u16 = 7474;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Reset {
        level: String,
        mode: Mode,
        seed: u64,
        #[serde(default)]
        text: TextMode,
    },
    Step {
        action: i64,
    },
    Close,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationBundle {
    pub grid: Vec<u8>,
    pub descriptions: Vec<String>,
    pub instruction: String,
}

impl From<&Observation> for ObservationBundle {
    fn from(o: &Observation) -> Self {
        ObservationBundle {
            grid: o.grid.to_flat(),
            descriptions: o.descriptions.clone(),
            instruction: o.instruction.clone(),
        }
    }
}

impl ObservationBundle {
    pub fn to_observation(&self) -> Option<Observation> {
        Some(Observation {
            grid: SymbolicGrid::from_flat(&self.grid)?,
            descriptions: self.descriptions.clone(),
            instruction: self.instruction.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBundle {
    pub observation: ObservationBundle,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

impl From<&StepResult> for StepBundle {
    fn from(r: &StepResult) -> Self {
        StepBundle {
            observation: (&r.observation).into(),
            reward: r.reward,
            done: r.done,
            info: r.info,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NoEpisode,
    EpisodeDone,
    UnknownLevel,
    UnsatisfiableLevel,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Observation(ObservationBundle),
    Step(StepBundle),
    Error { code: ErrorCode, message: String },
    Closed,
}

impl Response {
    fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Response::Error {
            code,
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}

impl From<Error> for Response {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnknownLevel(_) => ErrorCode::UnknownLevel,
            Error::UnsatisfiableLevel { .. } => ErrorCode::UnsatisfiableLevel,
            Error::SteppingTerminatedEpisode => ErrorCode::EpisodeDone,
            Error::InvalidAction(_) | Error::Json(_) | Error::Parse(_) => ErrorCode::BadRequest,
            _ => ErrorCode::Internal,
        };
        Response::error(code, e.to_string())
    }
}

/// Per-connection state machine.
#[derive(Debug)]
pub struct Session {
    registry: Arc<LevelRegistry>,
    episode: Option<Episode>,
}

impl Session {
    pub fn new(registry: Arc<LevelRegistry>) -> Self {
        Session {
            registry,
            episode: None,
        }
    }

    pub fn episode(&self) -> Option<&Episode> {
        self.episode.as_ref()
    }

    pub fn handle(&mut self, request: Request) -> Response {
        match request {
            Request::Reset {
                level,
                mode,
                seed,
                text,
            } => {
                let result = self
                    .registry
                    .get(&level)
                    .and_then(|l| Episode::reset_with_text(l, mode, seed, text));
                match result {
                    Ok((obs, episode)) => {
                        self.episode = Some(episode);
                        Response::Observation((&obs).into())
                    }
                    Err(e) => e.into(),
                }
            }
            Request::Step { action } => {
                let action = match Action::try_from(action) {
                    Ok(a) => a,
                    Err(e) => return e.into(),
                };
                match self.episode.as_mut() {
                    None => Response::error(ErrorCode::NoEpisode, "step before reset"),
                    Some(ep) => match ep.step(action) {
                        Ok(result) => Response::Step((&result).into()),
                        Err(e) => e.into(),
                    },
                }
            }
            Request::Close => Response::Closed,
        }
    }

    /// Handles one raw line. Malformed input yields `bad_request` and keeps
    /// the session alive.
    pub fn handle_line(&mut self, line: &str) -> Response {
        match serde_json::from_str::<Request>(line) {
            Ok(request) => self.handle(request),
            Err(e) => Response::error(ErrorCode::BadRequest, e.to_string()),
        }
    }
}

/// Serves one connection until `close` or end of input.
pub fn serve_stream<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    registry: Arc<LevelRegistry>,
) -> io::Result<()> {
    let mut session = Session::new(registry);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = session.handle_line(&line);
        writeln!(writer, "{}", response.to_line())?;
        writer.flush()?;
        if response == Response::Closed {
            break;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    Stdio,
    Tcp(String),
}

impl FromStr for Transport {
    type Err = Error;

    /// `stdio`, `tcp` (127.0.0.1 on the default port) or `tcp:HOST:PORT`.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "stdio" => Ok(Transport::Stdio),
            "tcp" => {
                let port = std::env::var(PORT_ENV)
                    .ok()
                    .and_then(|p| p.parse::<u16>().ok())
                    .unwrap_or(DEFAULT_PORT);
                Ok(Transport::Tcp(format!("127.0.0.1:{port}")))
            }
            other => match other.strip_prefix("tcp:") {
                Some(addr) if !addr.is_empty() => Ok(Transport::Tcp(addr.to_string())),
                _ => Err(Error::Parse(format!(
                    "unknown transport '{other}' (expected stdio, tcp or tcp:HOST:PORT)"
                ))),
            },
        }
    }
}

fn handle_tcp(stream: TcpStream, registry: Arc<LevelRegistry>) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(reader, stream, registry)
}

/// Accepts connections forever, one thread per connection. A failing
/// connection only ends itself.
pub fn serve_tcp(listener: TcpListener, registry: Arc<LevelRegistry>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(_) => continue,
        };
        let registry = Arc::clone(&registry);
        thread::spawn(move || {
            let _ = handle_tcp(stream, registry);
        });
    }
    Ok(())
}

pub fn serve(transport: &Transport, registry: Arc<LevelRegistry>) -> io::Result<()> {
    match transport {
        Transport::Stdio => {
            let stdin = io::stdin();
            serve_stream(stdin.lock(), io::stdout().lock(), registry)
        }
        Transport::Tcp(addr) => {
            let listener = TcpListener::bind(addr)?;
            eprintln!("listening on {}", listener.local_addr()?);
            serve_tcp(listener, registry)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        Session::new(Arc::new(LevelRegistry::default()))
    }

    #[test]
    fn reset_returns_full_observation() {
        let mut s = session();
        let r = s.handle_line(r#"{"type":"reset","level":"GoToRedBall-v1","mode":"train","seed":123}"#);
        match r {
            Response::Observation(o) => {
                assert_eq!(o.grid.len(), 147);
                assert_eq!(o.instruction, "go to the red ball");
                assert_eq!(o.descriptions.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn step_fields_present() {
        let mut s = session();
        s.handle_line(r#"{"type":"reset","level":"GoToRedBall-v1","mode":"train","seed":123}"#);
        let line = s.handle_line(r#"{"type":"step","action":2}"#).to_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["type"], "step");
        assert!(v["reward"].is_number());
        assert!(v["done"].is_boolean());
        assert!(v["info"]["time"].is_number());
        assert!(v["info"]["steps"].is_number());
        assert_eq!(v["observation"]["grid"].as_array().unwrap().len(), 147);
    }

    #[test]
    fn error_codes() {
        let mut s = session();
        let code = |r: Response| match r {
            Response::Error { code, .. } => code,
            other => panic!("expected error, got {other:?}"),
        };
        assert_eq!(code(s.handle_line(r#"{"type":"step","action":2}"#)), ErrorCode::NoEpisode);
        assert_eq!(code(s.handle_line("not json")), ErrorCode::BadRequest);
        assert_eq!(
            code(s.handle_line(r#"{"type":"reset","level":"Nope","mode":"train","seed":1}"#)),
            ErrorCode::UnknownLevel
        );
        s.handle_line(r#"{"type":"reset","level":"GoToRedBall-v1","mode":"train","seed":1}"#);
        assert_eq!(code(s.handle_line(r#"{"type":"step","action":9}"#)), ErrorCode::BadRequest);
        assert_eq!(code(s.handle_line(r#"{"type":"step","action":-1}"#)), ErrorCode::BadRequest);
        // the session survives bad requests
        assert!(matches!(s.handle_line(r#"{"type":"step","action":0}"#), Response::Step(_)));
    }

    #[test]
    fn stream_stops_at_close() {
        let input = concat!(
            r#"{"type":"reset","level":"GoToRedBall-v1","mode":"test","seed":5}"#,
            "\n\n",
            r#"{"type":"step","action":1}"#,
            "\n",
            r#"{"type":"close"}"#,
            "\n",
            r#"{"type":"step","action":1}"#,
            "\n"
        );
        let mut out = Vec::new();
        serve_stream(input.as_bytes(), &mut out, Arc::new(LevelRegistry::default())).unwrap();
        let lines: Vec<_> = std::str::from_utf8(&out).unwrap().lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], r#"{"type":"closed"}"#);
    }

    #[test]
    fn transport_parsing() {
        assert_eq!("stdio".parse::<Transport>().unwrap(), Transport::Stdio);
        assert_eq!(
            "tcp:0.0.0.0:9000".parse::<Transport>().unwrap(),
            Transport::Tcp("0.0.0.0:9000".into())
        );
        assert!("udp".parse::<Transport>().is_err());
    }
}
