// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::io;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

/// Exit code for malformed invocations and unusable inputs.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for failures while running a valid invocation.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

#[derive(Serialize)]
struct Report<'a> {
    error: Body<'a>,
}

#[derive(Serialize)]
struct Body<'a> {
    kind: &'static str,
    code: i32,
    message: &'a str,
}

impl Failure {
    pub fn usage(msg: impl ToString) -> Self {
        Failure::Usage(msg.to_string())
    }

    pub fn runtime(msg: impl ToString) -> Self {
        Failure::Runtime(msg.to_string())
    }

    /// A problem reading a user-supplied input file.
    pub fn input(path: &Path, err: io::Error) -> Self {
        Failure::Usage(format!("{}: {err}", path.display()))
    }

    pub fn output(path: &Path, err: io::Error) -> Self {
        Failure::Runtime(format!("{}: {err}", path.display()))
    }

    /// Core errors in an input file or parameter are usage errors.
    pub fn in_input(path: &Path, err: egoclose::Error) -> Self {
        match Failure::from(err) {
            Failure::Usage(m) | Failure::Runtime(m) => {
                Failure::Usage(format!("{}: {m}", path.display()))
            }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Runtime(m) => ("runtime", m),
        };
        let report = Report {
            error: Body {
                kind,
                code: self.exit_code(),
                message,
            },
        };
        serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"error\":{message:?}}}"))
    }
}

impl From<egoclose::Error> for Failure {
    fn from(err: egoclose::Error) -> Self {
        use egoclose::Error as E;
        match &err {
            E::Parse { .. } | E::EmptyInput | E::Config(_) | E::InvalidParameter(_) => {
                Failure::Usage(err.to_string())
            }
            E::Io(io) if io.kind() == io::ErrorKind::NotFound => Failure::Usage(err.to_string()),
            _ => Failure::Runtime(err.to_string()),
        }
    }
}
