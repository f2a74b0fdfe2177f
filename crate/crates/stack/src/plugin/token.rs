use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use qdmi_core::{SessionParameterKey, Status, StatusCode};

use super::env::{self, Environment};
use crate::wire::AuthFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenOrigin {
    ExplicitToken,
    AuthFile,
    EnvToken,
    EnvAuthFile,
}

/// A resolved bearer token and where it came from.
#[derive(Clone, PartialEq, Eq)]
pub struct TokenSource {
    pub origin: TokenOrigin,
    token: String,
}

impl TokenSource {
    pub fn token(&self) -> &str {
        &self.token
    }
}

impl fmt::Debug for TokenSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TokenSource")
            .field("origin", &self.origin)
            .field("token", &"<redacted>")
            .finish()
    }
}

/// Reads the `access_token` field of a JSON auth file.
pub fn read_auth_file(path: &Path) -> Status<String> {
    let text = std::fs::read_to_string(path).map_err(|_| StatusCode::InvalidArgument)?;
    let file: AuthFile = serde_json::from_str(&text).map_err(|_| StatusCode::InvalidArgument)?;
    if file.access_token.is_empty() {
        return Err(StatusCode::InvalidArgument);
    }
    Ok(file.access_token)
}

/// Picks the first available source in the order TOKEN parameter, AUTHFILE
/// parameter, `QDMI_TOKEN`, `QDMI_AUTH_FILE`. A source that is present but
/// unusable is an error rather than a fall-through.
pub fn resolve_token(
    parameters: &BTreeMap<SessionParameterKey, String>,
    environment: &Environment,
) -> Status<TokenSource> {
    let explicit = |token: &str, origin| {
        if token.is_empty() {
            Err(StatusCode::InvalidArgument)
        } else {
            Ok(TokenSource { origin, token: token.to_string() })
        }
    };
    if let Some(token) = parameters.get(&SessionParameterKey::Token) {
        return explicit(token, TokenOrigin::ExplicitToken);
    }
    if let Some(path) = parameters.get(&SessionParameterKey::AuthFile) {
        let token = read_auth_file(Path::new(path))?;
        return Ok(TokenSource { origin: TokenOrigin::AuthFile, token });
    }
    if let Some(token) = environment.get(env::TOKEN) {
        return explicit(token, TokenOrigin::EnvToken);
    }
    if let Some(path) = environment.get(env::AUTH_FILE) {
        let token = read_auth_file(Path::new(path))?;
        return Ok(TokenSource { origin: TokenOrigin::EnvAuthFile, token });
    }
    Err(StatusCode::InvalidArgument)
}
