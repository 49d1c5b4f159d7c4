#include "mhcv/mh.hpp"

namespace mhcv {

std::vector<Point> simulate_path(const TargetModel& model, const RandomWalkProposal& prop,
                                 const Point& x0, std::size_t k, Rng& rng) {
  if (k == 0) throw InputError("simulate_path: path length must be positive");
  if (!is_finite(x0) || x0.size() != model.dimension())
    throw InputError("simulate_path: start point must be finite and match the model dimension");
  std::vector<Point> states;
  states.reserve(k);
  Point x = x0;
  double lx = model.log_density(x);
  for (std::size_t i = 0; i < k; ++i) {
    x = mh_step(model, prop, x, lx, rng);
    states.push_back(x);
  }
  return states;
}

ChainPath simulate_path(const TargetModel& model, const RandomWalkProposal& prop, const Point& x0,
                        std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  return ChainPath{simulate_path(model, prop, x0, k, rng), seed};
}

}  // namespace mhcv
