// Copyright 2026 The inverse_decode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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

namespace inverse_decode {

// Root of every error the library throws. Each subclass maps to one CLI
// exit code (see tools/cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, configs, or inputs that violate a documented contract.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Language-model backend failure. `retryable()` is true for transport
// timeouts and connection failures, false for HTTP error statuses.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

// Remote service answered with a body that violates the wire schema.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  TemplateError(const std::string& what, std::string slot)
      : Error(what), slot_(std::move(slot)) {}
  // Offending slot name; empty for syntax errors.
  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

class ScoreError : public Error {
 public:
  using Error::Error;
};

// Beam search could not produce a single scorable candidate. Carries the
// JSONL trace accumulated up to the failure.
class SearchError : public Error {
 public:
  SearchError(const std::string& what, std::string trace_jsonl = {})
      : Error(what), trace_jsonl_(std::move(trace_jsonl)) {}
  const std::string& trace_jsonl() const noexcept { return trace_jsonl_; }

 private:
  std::string trace_jsonl_;
};

class SelfTrainError : public Error {
 public:
  using Error::Error;
};

}  // namespace inverse_decode
