#pragma once

#include <cstddef>
#include <vector>

#include "forkrl/nn/matrix.hpp"

namespace forkrl {

/// One environment interaction.
struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
  // Episode ended by the time limit rather than a true terminal state.
  bool done_is_timeout = false;

  // Bootstrapping is cut only on true terminations.
  bool terminal() const { return done && !done_is_timeout; }
};

/// Column-stacked minibatch, one transition per row.
struct TransitionBatch {
  RowMatrix states;
  RowMatrix actions;
  Vector rewards;
  RowMatrix next_states;
  Vector not_terminal;  // 1 - terminal, the bootstrap mask
  std::vector<std::size_t> indices;  // logical buffer positions, oldest = 0

  std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
  bool empty() const { return size() == 0; }
};

}  // namespace forkrl
