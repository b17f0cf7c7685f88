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
#include <span>
#include <string>
#include <vector>

#include "ruleselect/error.hpp"

namespace ruleselect {

// An r-sparse 0/1 vector over the rule pool plus the objective it achieved.
class SelectionVector {
 public:
  SelectionVector() = default;

  // From sorted-or-unsorted distinct ids over a pool of `pool_size` rules.
  static SelectionVector from_ids(std::size_t pool_size,
                                  std::span<const std::size_t> ids,
                                  double objective_value = 0.0) {
    SelectionVector s;
    s.bits_.assign(pool_size, 0);
    for (std::size_t id : ids) {
      if (id >= pool_size) {
        throw ArgumentError("selected rule " + std::to_string(id) +
                            " outside pool of size " + std::to_string(pool_size));
      }
      if (s.bits_[id]) {
        throw ArgumentError("rule " + std::to_string(id) + " selected twice");
      }
      s.bits_[id] = 1;
    }
    s.rebuild_ids();
    s.objective_value_ = objective_value;
    return s;
  }

  static SelectionVector from_bits(std::vector<std::uint8_t> bits,
                                   double objective_value = 0.0) {
    SelectionVector s;
    for (auto& b : bits) {
      if (b > 1) throw ArgumentError("selection bits must be 0 or 1");
    }
    s.bits_ = std::move(bits);
    s.rebuild_ids();
    s.objective_value_ = objective_value;
    return s;
  }

  static SelectionVector all(std::size_t pool_size) {
    return from_bits(std::vector<std::uint8_t>(pool_size, 1));
  }

  std::size_t pool_size() const { return bits_.size(); }
  std::size_t r() const { return ids_.size(); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  const std::vector<std::size_t>& selected_ids() const { return ids_; }
  double objective_value() const { return objective_value_; }
  void set_objective_value(double v) { objective_value_ = v; }

  bool operator==(const SelectionVector& other) const {
    return bits_ == other.bits_;
  }

 private:
  void rebuild_ids() {
    ids_.clear();
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i]) ids_.push_back(i);
    }
  }

  std::vector<std::uint8_t> bits_;
  std::vector<std::size_t> ids_;
  double objective_value_ = 0.0;
};

}  // namespace ruleselect
