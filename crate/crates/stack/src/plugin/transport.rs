use std::time::Duration;

use qdmi_core::StatusCode;
use serde::de::DeserializeOwned;

use super::routes::{Method, RouteOp, RouteTable};
use crate::wire::ErrorBody;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("request failed: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Decode(String),
}

impl TransportError {
    /// Interface status for a failed backend call.
    pub fn status_code(&self) -> StatusCode {
        match self {
            TransportError::Http { status: 400 | 409 | 422, .. } => StatusCode::InvalidArgument,
            TransportError::Http { status: 401 | 403, .. } => StatusCode::PermissionDenied,
            TransportError::Http { status: 404, .. } => StatusCode::NotFound,
            _ => StatusCode::Fatal,
        }
    }

    pub fn http_status(&self) -> Option<u16> {
        match self {
            TransportError::Http { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// Blocking JSON client bound to one base URL and bearer token. Clones share
/// the connection pool and may be used from several threads.
#[derive(Clone, Debug)]
pub struct Transport {
    agent: ureq::Agent,
    base_url: String,
    authorization: String,
    routes: RouteTable,
}

impl Transport {
    pub fn new(base_url: &str, token: &str, routes: RouteTable, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
            authorization: format!("Bearer {token}"),
            routes,
        }
    }

    pub fn url(&self, op: RouteOp, params: &[(&str, &str)]) -> String {
        format!("{}{}", self.base_url, self.routes.render(op, params))
    }

    /// Issues one request. POST bodies default to `{}`.
    pub fn request<T: DeserializeOwned>(
        &self,
        op: RouteOp,
        params: &[(&str, &str)],
        body: Option<&[u8]>,
    ) -> Result<T, TransportError> {
        let url = self.url(op, params);
        let result = match op.method() {
            Method::Get => self.agent.get(&url).header("Authorization", &self.authorization).call(),
            Method::Post => self
                .agent
                .post(&url)
                .header("Authorization", &self.authorization)
                .content_type("application/json")
                .send(body.unwrap_or(b"{}")),
        };
        let mut response = result.map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            let message = serde_json::from_str::<ErrorBody>(&text).map(|e| e.error).unwrap_or(text);
            return Err(TransportError::Http { status, message });
        }
        serde_json::from_str(&text).map_err(|e| TransportError::Decode(e.to_string()))
    }
}
