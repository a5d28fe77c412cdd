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

#ifndef PHOTONSTAT_ERRORS_HPP
#define PHOTONSTAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace photonstat {

enum class ErrorKind {
    Validation,
    Parse,
    Config,
    Domain,
    Regime,
    Unreachable,
    Truncation,
    Geometry,
    Window,
    InsufficientData,
    DegenerateData,
    NoConvergence,
    Io,
};

const char *error_kind_name(ErrorKind kind);

/// Base of every error raised by the library. The kind selects the CLI exit code.
class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {
    }
    ErrorKind kind() const noexcept {
        return kind_;
    }

   private:
    ErrorKind kind_;
};

#define PHOTONSTAT_DEFINE_ERROR(NAME, KIND)                                      \
    class NAME : public Error {                                                 \
       public:                                                                  \
        explicit NAME(const std::string &what) : Error(ErrorKind::KIND, what) { \
        }                                                                       \
    };

PHOTONSTAT_DEFINE_ERROR(ValidationError, Validation)
PHOTONSTAT_DEFINE_ERROR(ConfigError, Config)
PHOTONSTAT_DEFINE_ERROR(DomainError, Domain)
PHOTONSTAT_DEFINE_ERROR(RegimeError, Regime)
PHOTONSTAT_DEFINE_ERROR(UnreachableError, Unreachable)
PHOTONSTAT_DEFINE_ERROR(TruncationError, Truncation)
PHOTONSTAT_DEFINE_ERROR(GeometryError, Geometry)
PHOTONSTAT_DEFINE_ERROR(WindowError, Window)
PHOTONSTAT_DEFINE_ERROR(InsufficientDataError, InsufficientData)
PHOTONSTAT_DEFINE_ERROR(DegenerateDataError, DegenerateData)
PHOTONSTAT_DEFINE_ERROR(NoConvergenceError, NoConvergence)
PHOTONSTAT_DEFINE_ERROR(IoError, Io)

#undef PHOTONSTAT_DEFINE_ERROR

/// Parse failures carry the offending line (1-based, 0 when unknown) and field path.
class ParseError : public Error {
   public:
    ParseError(const std::string &what, size_t line, std::string field)
        : Error(ErrorKind::Parse, what), line_(line), field_(std::move(field)) {
    }
    size_t line() const noexcept {
        return line_;
    }
    const std::string &field() const noexcept {
        return field_;
    }

   private:
    size_t line_;
    std::string field_;
};

}  // namespace photonstat

#endif
