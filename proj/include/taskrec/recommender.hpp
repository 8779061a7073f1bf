#pragma once

#include <span>
#include <string>
#include <vector>

#include "taskrec/common.hpp"

namespace taskrec {

/// Anything that turns a command prefix into a next-command distribution.
class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual std::string name() const = 0;
  virtual std::size_t vocab_size() const = 0;

  /// Distribution over the next command given `prefix` (may be empty).
  virtual std::vector<double> predict(std::span<const CommandId> prefix) const = 0;

  /// Entry t is predict(commands[0..t]) for t in [0, size-2]. Models that can
  /// share work across prefixes override this; results must not depend on
  /// commands past each prefix.
  virtual std::vector<std::vector<double>> predict_steps(std::span<const CommandId> commands) const;

  /// Top `k` commands of predict(prefix), ties broken by lower id.
  std::vector<std::pair<CommandId, double>> recommend(std::span<const CommandId> prefix, std::size_t k) const;
};

}  // namespace taskrec
