#include "hqss/schedule.hpp"

#include <algorithm>

namespace hqss {

double lr_at(int epoch, const LrSchedule& s) {
  const int decay = std::clamp(s.decay_epochs, 1, std::max(1, s.epochs));
  const int start = s.epochs - decay;
  if (epoch <= start) return s.lr;
  if (epoch >= s.epochs) return 0.0;
  return s.lr * static_cast<double>(s.epochs - epoch) / decay;
}

}  // namespace hqss
