#pragma once

#include "seisop/config.hpp"
#include "seisop/dataset.hpp"

namespace seisop::testing {

/// Short records and a small network, for tests that train.
inline ExperimentConfig tiny_config() {
  ExperimentConfig c = ExperimentConfig::desk();
  c.excitation.grid = TimeGrid(0.02, 201);
  c.network.width = 8;
  c.network.layers = 2;
  c.network.modes = 8;
  c.network.projection_hidden = 16;
  c.training.batch = 4;
  c.training.epochs = 20;
  c.training.learning_rate = 3e-3;
  c.splits = {10, 4, 6};
  c.refinement_samples = 500;
  c.validate();
  return c;
}

}  // namespace seisop::testing
