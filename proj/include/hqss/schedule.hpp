#pragma once

namespace hqss {

struct LrSchedule {
  double lr = 2e-4;
  int epochs = 100;
  int decay_epochs = 50;
};

/// Constant for the first `epochs − decay_epochs` epochs, then linear to exactly 0 at `epochs`.
/// When decay_epochs ≥ epochs the decay spans the whole run.
double lr_at(int epoch, const LrSchedule& s);

}  // namespace hqss
