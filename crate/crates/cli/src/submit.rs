//! The `submit` subcommand: POST each synthesis request to an HTTP
//! endpoint and save the returned WAV bytes.
//!
//! The endpoint contract: POST with a JSON `TtsRequest` body; 200 replies
//! carry RIFF WAV bytes, anything else a JSON `{code, message}` error
//! object. Transport failures and 5xx replies are retried (3 attempts with
//! exponential backoff); 4xx replies fail immediately. Audio is written to
//! a temporary file and renamed into place, so no partial WAV is ever
//! visible. Requests run on a bounded worker pool and the summary is
//! reported in input order.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::{Context, Result};
use reqwest::blocking::Client;
use reqwest::StatusCode;

use crate::records::{SubmitFailure, SubmitSummary, TtsRequest};

/// Environment variable holding the bearer token for the endpoint.
pub const TOKEN_ENV: &str = "ACCENT_FORGE_TTS_TOKEN";

const MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, clap::Args)]
pub struct SubmitArgs {
    /// TtsRequest JSONL file ("-" for stdin).
    pub requests: PathBuf,

    /// Synthesis endpoint URL (receives one POST per request).
    #[arg(long)]
    pub endpoint: String,

    /// Directory for <utterance_id>.wav files (created if missing).
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Maximum in-flight requests.
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,

    /// Base delay between retry attempts in milliseconds (doubles per retry).
    #[arg(long, default_value_t = 200)]
    pub retry_delay_ms: u64,

    /// Per-request timeout in milliseconds.
    #[arg(long, default_value_t = 30_000)]
    pub timeout_ms: u64,
}

struct Job {
    index: usize,
    utterance_id: String,
    body: String,
}

struct Outcome {
    index: usize,
    utterance_id: String,
    result: Result<(), String>,
}

enum SendError {
    /// Transport failure or 5xx: worth another attempt.
    Retry(String),
    /// 4xx, malformed reply, or local I/O failure: retrying cannot help.
    Fail(String),
}

impl SendError {
    fn message(self) -> String {
        match self {
            SendError::Retry(m) | SendError::Fail(m) => m,
        }
    }
}

/// True when `bytes` start with a RIFF/WAVE header.
fn is_riff_wav(bytes: &[u8]) -> bool {
    bytes.len() >= 12 && &bytes[0..4] == b"RIFF" && &bytes[8..12] == b"WAVE"
}

/// Rejects ids that cannot become a safe file name inside the out dir.
fn check_file_safe(utterance_id: &str) -> Result<(), String> {
    if utterance_id.is_empty() {
        return Err("empty utterance_id".into());
    }
    if utterance_id == "." || utterance_id == ".." {
        return Err(format!("utterance_id \"{utterance_id}\" is not a valid file name"));
    }
    if let Some(bad) = utterance_id
        .chars()
        .find(|c| matches!(c, '/' | '\\' | '\0'))
    {
        return Err(format!(
            "utterance_id contains forbidden character {bad:?}"
        ));
    }
    Ok(())
}

fn send_once(
    client: &Client,
    endpoint: &str,
    token: Option<&str>,
    body: &str,
) -> Result<Vec<u8>, SendError> {
    let mut request = client
        .post(endpoint)
        .header(reqwest::header::CONTENT_TYPE, "application/json")
        .body(body.to_string());
    if let Some(token) = token {
        request = request.bearer_auth(token);
    }
    let response = request
        .send()
        .map_err(|e| SendError::Retry(format!("transport error: {e}")))?;
    let status = response.status();
    let bytes = response
        .bytes()
        .map_err(|e| SendError::Retry(format!("reading response body: {e}")))?
        .to_vec();
    if status == StatusCode::OK {
        return Ok(bytes);
    }
    let detail = match serde_json::from_slice::<serde_json::Value>(&bytes) {
        Ok(value) => {
            let code = value.get("code").map(ToString::to_string);
            let message = value
                .get("message")
                .and_then(|m| m.as_str())
                .map(String::from);
            match (code, message) {
                (Some(code), Some(message)) => format!(" ({code}: {message})"),
                (_, Some(message)) => format!(" ({message})"),
                _ => String::new(),
            }
        }
        Err(_) => String::new(),
    };
    let message = format!("endpoint returned {status}{detail}");
    if status.is_server_error() {
        Err(SendError::Retry(message))
    } else {
        Err(SendError::Fail(message))
    }
}

fn fetch_one(
    client: &Client,
    endpoint: &str,
    token: Option<&str>,
    job: &Job,
    out_dir: &Path,
    retry_delay: Duration,
) -> Result<(), String> {
    check_file_safe(&job.utterance_id)?;
    let mut delay = retry_delay;
    for attempt in 1..=MAX_ATTEMPTS {
        match send_once(client, endpoint, token, &job.body) {
            Ok(bytes) => {
                if !is_riff_wav(&bytes) {
                    return Err("response body is not a RIFF WAV".into());
                }
                return write_atomic(out_dir, &job.utterance_id, &bytes);
            }
            Err(SendError::Retry(message)) if attempt < MAX_ATTEMPTS => {
                std::thread::sleep(delay);
                delay *= 2;
                let _ = message;
            }
            Err(error) => {
                return Err(format!("attempt {attempt}/{MAX_ATTEMPTS}: {}", error.message()))
            }
        }
    }
    unreachable!("loop returns on success or final attempt")
}

/// Writes via a temp file in the same directory plus rename, so a crash or
/// failure mid-write never leaves a partial `<id>.wav`.
fn write_atomic(out_dir: &Path, utterance_id: &str, bytes: &[u8]) -> Result<(), String> {
    let final_path = out_dir.join(format!("{utterance_id}.wav"));
    let mut temp = tempfile::NamedTempFile::new_in(out_dir)
        .map_err(|e| format!("creating temp file: {e}"))?;
    temp.write_all(bytes)
        .and_then(|()| temp.flush())
        .map_err(|e| format!("writing audio: {e}"))?;
    temp.persist(&final_path)
        .map_err(|e| format!("renaming into {}: {e}", final_path.display()))?;
    Ok(())
}

pub fn run(args: &SubmitArgs) -> Result<ExitCode> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating out dir {}", args.out_dir.display()))?;
    let client = Client::builder()
        .timeout(Duration::from_millis(args.timeout_ms))
        .redirect(reqwest::redirect::Policy::none())
        .build()
        .context("building HTTP client")?;
    let token = std::env::var(TOKEN_ENV).ok();

    let reader: Box<dyn BufRead> = if args.requests.as_os_str() == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(&args.requests).with_context(
            || format!("opening requests {}", args.requests.display()),
        )?))
    };

    let (sender, receiver) = mpsc::sync_channel::<Job>(args.concurrency.max(1));
    let receiver = Arc::new(Mutex::new(receiver));
    let outcomes = Arc::new(Mutex::new(Vec::<Outcome>::new()));

    let workers: Vec<_> = (0..args.concurrency.max(1))
        .map(|_| {
            let receiver = Arc::clone(&receiver);
            let outcomes = Arc::clone(&outcomes);
            let client = client.clone();
            let endpoint = args.endpoint.clone();
            let token = token.clone();
            let out_dir = args.out_dir.clone();
            let retry_delay = Duration::from_millis(args.retry_delay_ms);
            std::thread::spawn(move || loop {
                let job = match receiver.lock().expect("receiver lock").recv() {
                    Ok(job) => job,
                    Err(_) => break,
                };
                let result = fetch_one(
                    &client,
                    &endpoint,
                    token.as_deref(),
                    &job,
                    &out_dir,
                    retry_delay,
                );
                outcomes.lock().expect("outcomes lock").push(Outcome {
                    index: job.index,
                    utterance_id: job.utterance_id,
                    result,
                });
            })
        })
        .collect();

    // Feed jobs one line at a time; the bounded channel caps memory at
    // roughly `concurrency` decoded records.
    let mut submitted = 0usize;
    let mut feed_error = None;
    for (index, line) in reader.lines().enumerate() {
        let parsed = line
            .with_context(|| format!("reading requests line {}", index + 1))
            .and_then(|line| {
                if line.trim().is_empty() {
                    return Ok(None);
                }
                let request: TtsRequest = serde_json::from_str(&line).map_err(|e| {
                    anyhow::anyhow!("line {}: malformed request: {e}", index + 1)
                })?;
                Ok(Some((request, line)))
            });
        match parsed {
            Ok(None) => continue,
            Ok(Some((request, _line))) => {
                let body = serde_json::to_string(&request).expect("request reserializes");
                submitted += 1;
                sender
                    .send(Job {
                        index,
                        utterance_id: request.utterance_id,
                        body,
                    })
                    .expect("workers outlive the feeder");
            }
            Err(error) => {
                feed_error = Some(error);
                break;
            }
        }
    }
    drop(sender);
    for worker in workers {
        let _ = worker.join();
    }
    if let Some(error) = feed_error {
        return Err(error);
    }

    let mut outcomes = Arc::try_unwrap(outcomes)
        .map_err(|_| anyhow::anyhow!("worker still holds outcomes"))?
        .into_inner()
        .expect("outcomes lock");
    outcomes.sort_by_key(|o| o.index);
    let failures: Vec<SubmitFailure> = outcomes
        .iter()
        .filter_map(|o| {
            o.result.as_ref().err().map(|error| SubmitFailure {
                utterance_id: o.utterance_id.clone(),
                error: error.clone(),
            })
        })
        .collect();
    let summary = SubmitSummary {
        submitted,
        ok: submitted - failures.len(),
        failed: failures.len(),
        failures,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if summary.failed > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}
