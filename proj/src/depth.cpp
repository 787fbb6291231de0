#include "lob/depth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lob {

DepthDistribution::DepthDistribution(std::vector<Atom> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("depth: no atoms");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (a.bid < 1 || a.ask < 1) throw std::invalid_argument("depth: sizes must be >= 1");
    if (!(a.p > 0.0) || !std::isfinite(a.p))
      throw std::invalid_argument("depth: probabilities must be > 0");
    total += a.p;
    max_bid_ = std::max(max_bid_, a.bid);
    max_ask_ = std::max(max_ask_, a.ask);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("depth: probabilities must sum to 1");
  cdf_.reserve(atoms_.size());
  double run = 0.0;
  for (const auto& a : atoms_) {
    run += a.p;
    cdf_.push_back(run);
  }
  cdf_.back() = 1.0;
}

DepthDistribution DepthDistribution::point_mass(int bid, int ask) {
  return DepthDistribution({{bid, ask, 1.0}});
}

DepthDistribution DepthDistribution::uniform(int max_bid, int max_ask) {
  if (max_bid < 1 || max_ask < 1)
    throw std::invalid_argument("depth: uniform bounds must be >= 1");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(max_bid) * max_ask);
  double p = 1.0 / (static_cast<double>(max_bid) * max_ask);
  for (int b = 1; b <= max_bid; ++b)
    for (int a = 1; a <= max_ask; ++a) atoms.push_back({b, a, p});
  return DepthDistribution(std::move(atoms));
}

std::pair<int, int> DepthDistribution::sample(Rng& rng) const {
  double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  const Atom& a = atoms_[static_cast<std::size_t>(it - cdf_.begin())];
  return {a.bid, a.ask};
}

nlohmann::json DepthDistribution::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : atoms_) arr.push_back({{"bid", a.bid}, {"ask", a.ask}, {"p", a.p}});
  return {{"atoms", arr}};
}

DepthDistribution DepthDistribution::from_json(const nlohmann::json& j) {
  std::vector<Atom> atoms;
  for (const auto& e : j.at("atoms"))
    atoms.push_back({e.at("bid").get<int>(), e.at("ask").get<int>(),
                     e.at("p").get<double>()});
  return DepthDistribution(std::move(atoms));
}

}  // namespace lob
