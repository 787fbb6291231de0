#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lob/rng.hpp"

namespace lob {

/** Joint distribution of the refill sizes (bid, ask) on {1,2,...}^2.
 *  Finite support; atoms hold positive probabilities summing to 1. */
class DepthDistribution {
 public:
  struct Atom {
    int bid = 1;
    int ask = 1;
    double p = 1.0;
  };

  explicit DepthDistribution(std::vector<Atom> atoms);

  static DepthDistribution point_mass(int bid, int ask);
  // independent uniform product on {1..max_bid} x {1..max_ask}
  static DepthDistribution uniform(int max_bid, int max_ask);

  const std::vector<Atom>& atoms() const { return atoms_; }
  int max_bid() const { return max_bid_; }
  int max_ask() const { return max_ask_; }

  std::pair<int, int> sample(Rng& rng) const;

  // E[g(bid, ask)] for arbitrary g
  template <class G>
  double expect(G&& g) const {
    double acc = 0.0;
    for (const auto& a : atoms_) acc += a.p * g(a.bid, a.ask);
    return acc;
  }

  nlohmann::json to_json() const;
  static DepthDistribution from_json(const nlohmann::json& j);

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
  int max_bid_ = 0;
  int max_ask_ = 0;
};

}  // namespace lob
