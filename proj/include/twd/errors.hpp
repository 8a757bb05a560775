/* Copyright 2026 The twdkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TWD_ERRORS_HPP_
#define TWD_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twd {

// Malformed input text (records, config). Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bad container bytes: wrong magic, unsupported version, truncation.
class FormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pipeline stage produced or received a dataset with no scenes.
class EmptyDatasetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training loss became non-finite. Carries the iteration where it happened.
class TrainingDivergedError : public std::runtime_error {
 public:
  explicit TrainingDivergedError(std::size_t iteration)
      : std::runtime_error("training diverged at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace twd

#endif  // TWD_ERRORS_HPP_
