/*
 * Copyright 2026 The protkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace protkit {

// Every failure the library reports carries one of these kinds so callers
// (and the CLI's exit-code mapping) can branch without parsing messages.
enum class ErrorKind {
  MalformedRecord,
  EmptyStructure,
  NoCompleteResidues,
  CoordinateOverflow,
  FieldOverflow,
  InvalidFilterSpec,
  DegenerateGeometry,
  MissingAtom,
  TooFewNodes,
  DegenerateConfiguration,
  ChainTooShort,
  DegenerateFrame,
  BadMagic,
  TruncatedPayload,
  VersionMismatch,
  OddDimension,
  InvalidArgument,
  MissingConfidence,
  SelectorEmpty,
  SingleChain,
  DimensionMismatch,
  CoincidentNodes,
  Io,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::EmptyStructure: return "EmptyStructure";
    case ErrorKind::NoCompleteResidues: return "NoCompleteResidues";
    case ErrorKind::CoordinateOverflow: return "CoordinateOverflow";
    case ErrorKind::FieldOverflow: return "FieldOverflow";
    case ErrorKind::InvalidFilterSpec: return "InvalidFilterSpec";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::MissingAtom: return "MissingAtom";
    case ErrorKind::TooFewNodes: return "TooFewNodes";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::ChainTooShort: return "ChainTooShort";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::OddDimension: return "OddDimension";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MissingConfidence: return "MissingConfidence";
    case ErrorKind::SelectorEmpty: return "SelectorEmpty";
    case ErrorKind::SingleChain: return "SingleChain";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::CoincidentNodes: return "CoincidentNodes";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  // 1-based input line for parse errors, 0 when not applicable.
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail, std::size_t line = 0) {
  throw Error(kind, detail, line);
}

}  // namespace protkit
