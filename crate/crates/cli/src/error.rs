use std::fmt;

use schemaforge_core::cue::CueError;
use schemaforge_core::embed::EmbedError;
use schemaforge_core::fca::FcaError;
use schemaforge_core::intersections::IntersectionError;
use schemaforge_core::rdf::RdfError;
use schemaforge_core::schema::SchemaError;
use schemaforge_harvest::HarvestError;

/// Process exit codes. These never change between releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Usage = 1,
    Input = 2,
    Network = 3,
    Internal = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn kind(self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::Usage => "usage",
            Status::Input => "input",
            Status::Network => "network",
            Status::Internal => "internal",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Usage,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Input,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Internal,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "status": self.status.code(),
                "kind": self.status.kind(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<RdfError> for Failure {
    fn from(e: RdfError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<CueError> for Failure {
    fn from(e: CueError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<FcaError> for Failure {
    fn from(e: FcaError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<IntersectionError> for Failure {
    fn from(e: IntersectionError) -> Self {
        let status = match e {
            IntersectionError::UnknownEtype(_) => Status::Input,
            IntersectionError::MalformedVis(_) => Status::Internal,
            IntersectionError::DuplicateEtype(_)
            | IntersectionError::TooFewEtypes(_)
            | IntersectionError::TooManyEtypes { .. } => Status::Usage,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<EmbedError> for Failure {
    fn from(e: EmbedError) -> Self {
        let status = match e {
            EmbedError::InvalidHyperparams(_) => Status::Usage,
            EmbedError::Divergence { .. } => Status::Internal,
            _ => Status::Input,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<HarvestError> for Failure {
    fn from(e: HarvestError) -> Self {
        let status = match e {
            HarvestError::Transport(_) | HarvestError::SizeLimit { .. } | HarvestError::Adapter(_) => Status::Network,
            HarvestError::Internal(_) => Status::Internal,
            HarvestError::Validation(_) | HarvestError::Io { .. } | HarvestError::Json(_) => Status::Input,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}
