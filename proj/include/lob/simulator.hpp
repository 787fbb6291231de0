#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lob/depth.hpp"
#include "lob/rates.hpp"
#include "lob/rng.hpp"

namespace lob {

struct ExtinctionSample {
  double time = 0.0;      // wall-clock extinction time A^{-1}(s)
  double internal = 0.0;  // constant-rate extinction time s
  bool censored = false;  // hit the step cap before extinction
};

/** One extinction time of a single queue: simulate the constant-rate chain,
 *  map the internal time through the clock inverse (exact for any alpha).
 *  time = +inf when the internal time exceeds the total clock mass. */
ExtinctionSample simulate_extinction(const CumulativeClock& clock, int x,
                                     Rng& rng, long step_cap = 100000000L);

/** Cross-check mode: direct inhomogeneous-event thinning. Requires alpha
 *  bounded and nonincreasing on [origin, inf) (constant, power with
 *  exponent <= 0, reciprocal). */
ExtinctionSample simulate_extinction_thinning(const CumulativeClock& clock,
                                              int x, Rng& rng,
                                              long step_cap = 100000000L);

struct BookConfig {
  RateSpec rates;
  std::optional<double> origin;
  DepthDistribution depth = DepthDistribution::point_mass(1, 1);
  std::optional<std::pair<int, int>> initial;  // default: drawn from depth
  int s0 = 0;                                  // initial price in ticks
  long step_cap = 100000000L;
};

struct PricePath {
  std::vector<double> epochs;    // cumulative price-change times S_n
  std::vector<int> directions;   // +1 ask depleted, -1 bid depleted
  int s0 = 0;
  bool censored = false;  // last inter-change draw hit the step cap
  std::size_t n_changes() const { return epochs.size(); }
  int price_at(std::size_t n) const;  // price after the n-th change
};

/** Event-level book simulation: both queues run jointly until the first
 *  depletion, the depths are redrawn, the modulation clock resets. Stops at
 *  the horizon or after max_changes (whichever first; max_changes < 0 means
 *  unlimited). */
PricePath simulate_book(const BookConfig& config, double horizon, Rng& rng,
                        long max_changes = -1);

/** n_paths independent paths from per-path seeds derived from master_seed;
 *  deterministic regardless of evaluation order. */
std::vector<PricePath> replicate(const BookConfig& config, int n_paths,
                                 double horizon, std::uint64_t master_seed);

/** Streaming reduction for large Monte Carlo runs: price and change count
 *  sampled at fixed wall times, without storing the path. */
struct GridSample {
  std::vector<int> price;    // s_t at each grid time (relative to s0 = 0)
  std::vector<long> count;   // N_t at each grid time
  bool censored = false;
};
GridSample simulate_book_grid(const BookConfig& config,
                              const std::vector<double>& times, Rng& rng);

std::string path_to_csv(const PricePath& path);
nlohmann::json path_summary(const std::vector<PricePath>& paths);

nlohmann::json book_config_to_json(const BookConfig& config);
BookConfig book_config_from_json(const nlohmann::json& j);

}  // namespace lob
