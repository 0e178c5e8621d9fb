/**
 * Copyright 2026 The PoisonBench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef POISONBENCH_ERRORS_HPP_
#define POISONBENCH_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace poisonbench {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value; the message names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& why)
      : Error("configuration error: " + field + ": " + why), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Tensor/image dimensions that do not line up.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape error: " + what) {}
};

/// An operation was called outside its preconditions (empty batch, bad area, ...).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage error: " + what) {}
};

/// Malformed dataset or patch file.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error("format error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Filesystem failure; the message carries the path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error("I/O error: " + path + ": " + what) {}
};

}  // namespace poisonbench

#endif  // POISONBENCH_ERRORS_HPP_
