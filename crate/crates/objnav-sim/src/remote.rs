//! Remote advisor: one JSON request/response exchange per query against a
//! configured completion endpoint, with one retry on malformed score output.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use objnav_core::advisor::{
    parse_scores, parse_yes_no, render_prompt, render_verification_prompt, ActionScores, Advisor,
    AdvisorEnv, AdvisorError, AdvisorRequest, VerifyQuery,
};
use serde::Deserialize;

use crate::config::RemoteConfig;

/// The completion payload: `{"text": ...}`.
#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Advisor backed by a completion endpoint speaking
/// `{prompt, max_tokens, model} -> {text}` JSON over HTTP.
pub struct RemoteAdvisor {
    host: String,
    port: u16,
    path: String,
    cfg: RemoteConfig,
}

impl RemoteAdvisor {
    pub fn new(cfg: RemoteConfig) -> Result<Self> {
        let (host, port, path) = parse_endpoint(&cfg.endpoint)?;
        Ok(Self {
            host,
            port,
            path,
            cfg,
        })
    }

    fn post_completion(&self, prompt: &str) -> Result<String> {
        let body = serde_json::json!({
            "prompt": prompt,
            "max_tokens": self.cfg.max_tokens,
            "model": self.cfg.model,
        })
        .to_string();
        let timeout = Duration::from_millis(self.cfg.timeout_ms.max(1));
        let addr = (self.host.as_str(), self.port);
        let stream = TcpStream::connect(addr)
            .with_context(|| format!("connecting to {}:{}", self.host, self.port))?;
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        let mut stream = stream;
        let request = format!(
            "POST {} HTTP/1.1\r\nHost: {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            self.path,
            self.host,
            body.len(),
            body
        );
        stream.write_all(request.as_bytes())?;

        let mut reader = BufReader::new(stream);
        let mut status_line = String::new();
        reader.read_line(&mut status_line)?;
        let status: u16 = status_line
            .split_whitespace()
            .nth(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| anyhow!("malformed status line: {status_line:?}"))?;
        if !(200..300).contains(&status) {
            bail!("endpoint returned status {status}");
        }
        let mut content_length: Option<usize> = None;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line)?;
            let line = line.trim_end();
            if line.is_empty() {
                break;
            }
            if let Some(value) = line
                .to_ascii_lowercase()
                .strip_prefix("content-length:")
                .map(str::trim)
                .and_then(|v| v.parse().ok())
            {
                content_length = Some(value);
            }
        }
        let body = match content_length {
            Some(n) => {
                let mut buf = vec![0u8; n];
                reader.read_exact(&mut buf)?;
                buf
            }
            None => {
                let mut buf = Vec::new();
                reader.read_to_end(&mut buf)?;
                buf
            }
        };
        let parsed: CompletionResponse =
            serde_json::from_slice(&body).context("decoding completion response")?;
        Ok(parsed.text)
    }
}

fn parse_endpoint(endpoint: &str) -> Result<(String, u16, String)> {
    let rest = endpoint
        .strip_prefix("http://")
        .ok_or_else(|| anyhow!("endpoint must start with http://, got {endpoint:?}"))?;
    let (authority, path) = match rest.find('/') {
        Some(i) => (&rest[..i], &rest[i..]),
        None => (rest, "/"),
    };
    let (host, port) = match authority.rsplit_once(':') {
        Some((h, p)) => (h, p.parse().context("endpoint port")?),
        None => (authority, 80),
    };
    if host.is_empty() {
        bail!("endpoint host missing in {endpoint:?}");
    }
    Ok((host.to_string(), port, path.to_string()))
}

impl Advisor for RemoteAdvisor {
    fn advise(
        &mut self,
        req: &AdvisorRequest,
        _env: &AdvisorEnv<'_>,
    ) -> Result<ActionScores, AdvisorError> {
        let prompt = render_prompt(req);
        let unavailable = |e: String| AdvisorError::Unavailable(e);
        let first = self
            .post_completion(&prompt)
            .map_err(|e| unavailable(format!("transport: {e:#}")))?;
        match parse_scores(&first) {
            Ok(scores) => Ok(scores),
            Err(first_err) => {
                // strict-template retry, then give up
                let retry_prompt =
                    format!("{prompt}Respond only in the specified structure.\n");
                let second = self
                    .post_completion(&retry_prompt)
                    .map_err(|e| unavailable(format!("transport on retry: {e:#}")))?;
                parse_scores(&second).map_err(|second_err| {
                    unavailable(format!(
                        "unparseable scores: {first_err}; after retry: {second_err}"
                    ))
                })
            }
        }
    }

    fn verify(
        &mut self,
        target: &str,
        query: &VerifyQuery,
        _env: &AdvisorEnv<'_>,
    ) -> Result<bool, AdvisorError> {
        let prompt =
            render_verification_prompt(target, &query.detected_category, query.distance_m);
        let text = self
            .post_completion(&prompt)
            .map_err(|e| AdvisorError::Unavailable(format!("transport: {e:#}")))?;
        parse_yes_no(&text)
            .ok_or_else(|| AdvisorError::Unavailable(format!("no yes/no in {text:?}")))
    }
}
