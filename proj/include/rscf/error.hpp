/* Copyright 2026 The RSCF-KGE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rscf {

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorCategory { Usage, Data, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorCategory::Usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorCategory::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::Numerical, what) {}
};

class IoError : public DataError {
 public:
  explicit IoError(const std::string& what) : DataError("io error: " + what) {}
};

class MalformedLine : public DataError {
 public:
  MalformedLine(std::size_t line, const std::string& detail)
      : DataError("malformed line " + std::to_string(line) + ": " + detail),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateRelation : public DataError {
 public:
  explicit DuplicateRelation(const std::string& name)
      : DataError("relation assigned to more than one group: " + name),
        name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class TooFewRelations : public DataError {
 public:
  TooFewRelations(std::size_t have, std::size_t need)
      : DataError("need at least " + std::to_string(need) +
                  " relations for bucketing, have " + std::to_string(have)) {}
};

class UnknownName : public DataError {
 public:
  using DataError::DataError;
};

class ShapeMismatch : public UsageError {
 public:
  using UsageError::UsageError;
};

class InvalidConfig : public UsageError {
 public:
  using UsageError::UsageError;
};

class UnsupportedModel : public UsageError {
 public:
  using UsageError::UsageError;
};

class OutOfRange : public UsageError {
 public:
  using UsageError::UsageError;
};

class SingleCluster : public UsageError {
 public:
  SingleCluster() : UsageError("inter-cluster distance needs at least two clusters") {}
};

class NoFilter : public UsageError {
 public:
  NoFilter() : UsageError("scale trace needs an active entity filter") {}
};

class UnknownGroupFile : public DataError {
 public:
  using DataError::DataError;
};

class EmptySplit : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateCentroid : public NumericalError {
 public:
  explicit DegenerateCentroid(std::size_t cluster)
      : NumericalError("cluster " + std::to_string(cluster) +
                       " has a centroid with (near) zero norm") {}
};

class NonFinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergedLoss : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class VersionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ChecksumMismatch : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace rscf
