#pragma once

#include "mhcv/model.hpp"

#include <concepts>
#include <cstdint>
#include <vector>

namespace mhcv {

/// Anything that can propose y ~ q(x, .) and report log q(x, y).
template <typename P>
concept ProposalKernel = requires(const P& p, const Point& x, Rng& rng) {
  { p.draw(x, rng) } -> std::convertible_to<Point>;
  { p.log_density(x, x) } -> std::convertible_to<double>;
};

/// One transition of MH(q, pi): propose, then accept with probability alpha.
/// A rejected proposal returns x unchanged (bit-identical). `log_pi_x` is
/// updated to the log-density of the returned state.
template <ProposalKernel P>
Point mh_step(const TargetModel& model, const P& prop, const Point& x, double& log_pi_x, Rng& rng) {
  Point y = prop.draw(x, rng);
  const double log_pi_y = model.log_density(y);
  const double alpha =
      acceptance_from_logs(log_pi_x, prop.log_density(x, y), log_pi_y, prop.log_density(y, x));
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < alpha) {
    log_pi_x = log_pi_y;
    return y;
  }
  return x;
}

template <ProposalKernel P>
Point mh_step(const TargetModel& model, const P& prop, const Point& x, Rng& rng) {
  if (!is_finite(x)) throw InputError("mh_step: non-finite state");
  double lx = model.log_density(x);
  return mh_step(model, prop, x, lx, rng);
}

struct ChainPath {
  std::vector<Point> states;  // Phi_1, ..., Phi_k (the start x0 is not included)
  std::uint64_t seed = 0;
};

/// Iterates mh_step k times from x0 with a stream seeded by `seed`.
ChainPath simulate_path(const TargetModel& model, const RandomWalkProposal& prop, const Point& x0,
                        std::size_t k, std::uint64_t seed);

/// Same, drawing from a caller-held stream.
std::vector<Point> simulate_path(const TargetModel& model, const RandomWalkProposal& prop,
                                 const Point& x0, std::size_t k, Rng& rng);

}  // namespace mhcv
