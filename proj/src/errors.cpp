// Copyright 2026 The photonstat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "photonstat/errors.hpp"

namespace photonstat {

const char *error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation:
            return "ValidationError";
        case ErrorKind::Parse:
            return "ParseError";
        case ErrorKind::Config:
            return "ConfigError";
        case ErrorKind::Domain:
            return "DomainError";
        case ErrorKind::Regime:
            return "RegimeError";
        case ErrorKind::Unreachable:
            return "Unreachable";
        case ErrorKind::Truncation:
            return "TruncationError";
        case ErrorKind::Geometry:
            return "GeometryError";
        case ErrorKind::Window:
            return "WindowError";
        case ErrorKind::InsufficientData:
            return "InsufficientData";
        case ErrorKind::DegenerateData:
            return "DegenerateData";
        case ErrorKind::NoConvergence:
            return "NoConvergence";
        case ErrorKind::Io:
            return "IOError";
    }
    return "Error";
}

}  // namespace photonstat
