// Copyright 2026 The mgpoison Authors
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

#ifndef MGPOISON_ERRORS_HPP_
#define MGPOISON_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace mgpoison {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

struct CellIndex {
  int h = 0;
  int s = 0;
  int joint = 0;
};

class UncoveredCell : public Error {
 public:
  UncoveredCell(const std::string& what, std::vector<CellIndex> cells)
      : Error(what), cells_(std::move(cells)) {}
  const std::vector<CellIndex>& cells() const { return cells_; }

 private:
  std::vector<CellIndex> cells_;
};

class InvalidDelta : public Error {
 public:
  using Error::Error;
};

class InvalidMargin : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Raised by povi when a state has no pure equilibrium.
class NoEquilibrium : public Error {
 public:
  NoEquilibrium(const std::string& what, int h, int s)
      : Error(what), h_(h), s_(s) {}
  int h() const { return h_; }
  int s() const { return s_; }

 private:
  int h_;
  int s_;
};

// Carries the offending sampled game as a JSON string.
class VerificationFailure : public Error {
 public:
  VerificationFailure(const std::string& what, std::string game_json)
      : Error(what), game_json_(std::move(game_json)) {}
  const std::string& game_json() const { return game_json_; }

 private:
  std::string game_json_;
};

}  // namespace mgpoison

#endif  // MGPOISON_ERRORS_HPP_
