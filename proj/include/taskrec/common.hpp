#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace taskrec {

/// Index into a Vocabulary.
using CommandId = std::uint32_t;

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input, bad configuration or a violated precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file or stream could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownCommandError : public ValidationError {
 public:
  explicit UnknownCommandError(std::string name)
      : ValidationError("unknown command '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

using Rng = std::mt19937_64;

/// Derives an independent generator for `stream` from a root seed, so that
/// work split across streams stays reproducible regardless of scheduling.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Commands ordered by descending probability, ties broken by lower id.
/// Returns at most `n` entries.
std::vector<std::pair<CommandId, double>> top_n(std::span<const double> probs, std::size_t n);

}  // namespace taskrec
