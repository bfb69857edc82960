// Copyright 2026 The bml Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bml {

enum class ErrorKind {
    dimension_mismatch,
    parameter,
    protocol,
    degenerate,
    precondition,
    stream_exhausted,
    capacity,
    state_width,
    identification,
    invariant,
    io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::protocol: return "protocol";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::stream_exhausted: return "stream_exhausted";
        case ErrorKind::capacity: return "capacity";
        case ErrorKind::state_width: return "state_width";
        case ErrorKind::identification: return "identification";
        case ErrorKind::invariant: return "invariant";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when a run is cut short but has a usable partial outcome
/// (stream exhaustion mid-boosting, for example).
template <typename Partial>
class PartialResultError : public Error {
public:
    PartialResultError(ErrorKind kind, const std::string& what, Partial partial)
        : Error(kind, what), partial_(std::move(partial)) {}

    const Partial& partial() const noexcept { return partial_; }

private:
    Partial partial_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace bml
