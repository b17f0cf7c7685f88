// Copyright 2026 The RuleSelect Authors
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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace ruleselect {

// Base of every error raised by the library. `kind()` is a stable short tag
// used by the CLI to pick an exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
  // Validation errors come from bad arguments or inconsistent inputs; the rest
  // are failures while executing a stage.
  virtual bool is_validation() const noexcept { return false; }
};

#define RULESELECT_DEFINE_ERROR(Name, tag, validation)                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(what) {}             \
    const char* kind() const noexcept override { return tag; }          \
    bool is_validation() const noexcept override { return validation; } \
  }

RULESELECT_DEFINE_ERROR(DomainError, "domain", true);
RULESELECT_DEFINE_ERROR(ArgumentError, "argument", true);
RULESELECT_DEFINE_ERROR(SizeError, "size", true);
RULESELECT_DEFINE_ERROR(InvariantError, "invariant", true);
RULESELECT_DEFINE_ERROR(ConsistencyError, "consistency", true);
RULESELECT_DEFINE_ERROR(StateError, "state", false);
RULESELECT_DEFINE_ERROR(DivergenceError, "divergence", false);
RULESELECT_DEFINE_ERROR(IoError, "io", false);

#undef RULESELECT_DEFINE_ERROR

// Raised by a rater backend for one (trio, rule) pair.
class BackendError : public Error {
 public:
  BackendError(std::string trio_id, std::size_t rule_id, const std::string& why)
      : Error("rating failed for trio " + trio_id + ", rule " +
              std::to_string(rule_id) + ": " + why),
        trio_id_(std::move(trio_id)),
        rule_id_(rule_id) {}
  const char* kind() const noexcept override { return "backend"; }
  const std::string& trio_id() const noexcept { return trio_id_; }
  std::size_t rule_id() const noexcept { return rule_id_; }

 private:
  std::string trio_id_;
  std::size_t rule_id_;
};

// A pipeline stage failed; wraps the underlying error with the stage name
// and keeps its validation flag.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, bool validation = false)
      : Error("stage " + stage + ": " + what),
        stage_(std::move(stage)),
        validation_(validation) {}
  const char* kind() const noexcept override { return "stage"; }
  bool is_validation() const noexcept override { return validation_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
  bool validation_;
};

}  // namespace ruleselect
