#include "densecap/layers.hpp"

#include <numeric>

#include "densecap/error.hpp"

namespace densecap {

LayerStructure::LayerStructure(int L_, int d0_, int dL_, int d_)
    : L(L_), d0(d0_), dL(dL_), d(d_) {
  if (L < 2) throw Error(ErrorKind::parameter, "depth L must be at least 2");
  if (d0 < 1 || dL < 1 || d < 1)
    throw Error(ErrorKind::parameter, "dimensions must be positive");
  if (d % d0 != 0 || d % dL != 0)
    throw Error(ErrorKind::parameter,
                "hidden dimension must be divisible by d0 and dL");
}

int LayerStructure::M() const { return std::lcm(d0, dL); }

Partition LayerStructure::layer_partition() const {
  return Partition::equipartition(L + 2);
}

Partition LayerStructure::input_cells() const {
  return Partition::equipartition(static_cast<std::int64_t>(L + 2) * d0);
}

Partition LayerStructure::output_cells() const {
  return Partition::equipartition(static_cast<std::int64_t>(L + 2) * dL);
}

Partition LayerStructure::layer_respecting_partition() const {
  // grid (L+2) d0 dL: one layer spans d0 dL units
  const std::int64_t unit = static_cast<std::int64_t>(d0) * dL;
  std::vector<std::int64_t> weights;
  for (int c = 0; c < d0; ++c) weights.push_back(dL);
  for (int l = 1; l < L; ++l) weights.push_back(unit);
  for (int c = 0; c < dL; ++c) weights.push_back(d0);
  weights.push_back(unit);
  return Partition::from_weights(weights);
}

}  // namespace densecap
