#include "comrl/tensor.hpp"

#include <cmath>

namespace comrl {

bool all_finite(const Tensor& t) {
  for (int64_t i = 0; i < t.numel(); ++i) {
    if (!std::isfinite(t[i])) return false;
  }
  return true;
}

}  // namespace comrl
