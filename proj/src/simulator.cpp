#include "lob/simulator.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lob {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_depth_arg(int x) {
  if (x < 1) throw std::invalid_argument("simulate: depth must be >= 1");
}

void check_thinning_form(const CumulativeClock& clock) {
  const RateForm& form = clock.spec().form;
  if (std::holds_alternative<ConstantForm>(form)) return;
  if (const auto* p = std::get_if<PowerForm>(&form)) {
    if (p->exponent <= 0.0 && (p->exponent == 0.0 || clock.origin() > 0.0))
      return;
  }
  if (std::holds_alternative<ReciprocalForm>(form)) return;
  throw std::invalid_argument(
      "thinning: needs alpha bounded and nonincreasing from the origin");
}

}  // namespace

ExtinctionSample simulate_extinction(const CumulativeClock& clock, int x,
                                     Rng& rng, long step_cap) {
  check_depth_arg(x);
  const double lambda = clock.lambda(), mu = clock.mu();
  const double total = lambda + mu;
  const double p_birth = lambda / total;
  int depth = x;
  double s = 0.0;
  for (long step = 0; step < step_cap; ++step) {
    s += rng.exponential(total);
    depth += rng.bernoulli(p_birth) ? 1 : -1;
    if (depth == 0) return {clock.inverse(s), s, false};
  }
  return {clock.inverse(s), s, true};
}

ExtinctionSample simulate_extinction_thinning(const CumulativeClock& clock,
                                              int x, Rng& rng, long step_cap) {
  check_depth_arg(x);
  check_thinning_form(clock);
  const double lambda = clock.lambda(), mu = clock.mu();
  const double total = lambda + mu;
  const double p_birth = lambda / total;
  int depth = x;
  double t = clock.origin();
  for (long step = 0; step < step_cap; ++step) {
    double bound = clock.alpha(t);  // nonincreasing: majorant from t onward
    if (bound <= 0.0) return {kInf, clock.cumulative(t), false};
    t += rng.exponential(bound * total);
    if (rng.uniform() >= clock.alpha(t) / bound) continue;  // thinned out
    depth += rng.bernoulli(p_birth) ? 1 : -1;
    if (depth == 0) return {t, clock.cumulative(t), false};
  }
  return {t, clock.cumulative(t), true};
}

int PricePath::price_at(std::size_t n) const {
  int p = s0;
  for (std::size_t i = 0; i < n && i < directions.size(); ++i)
    p += directions[i];
  return p;
}

namespace {

struct TauDraw {
  double duration;  // wall-clock inter-change time (may be +inf)
  int direction;    // +1 ask depleted first
  bool censored;
};

// Both queues advance jointly (same law as independent extinctions observed
// until the first); terminates without completing the slower side.
TauDraw draw_tau(const CumulativeClock& clock, int ask, int bid, Rng& rng,
                 long step_cap) {
  const double lambda = clock.lambda(), mu = clock.mu();
  const double p_birth = lambda / (lambda + mu);
  const double pair_rate = 2.0 * (lambda + mu);
  double s = 0.0;
  for (long step = 0; step < step_cap; ++step) {
    s += rng.exponential(pair_rate);
    bool on_ask = rng.bernoulli(0.5);
    int delta = rng.bernoulli(p_birth) ? 1 : -1;
    if (on_ask) {
      ask += delta;
      if (ask == 0) return {clock.inverse(s), +1, false};
    } else {
      bid += delta;
      if (bid == 0) return {clock.inverse(s), -1, false};
    }
  }
  return {clock.inverse(s), 0, true};
}

struct BookState {
  CumulativeClock clock;
  explicit BookState(const BookConfig& c) : clock(c.rates, c.origin) {}
};

std::pair<int, int> initial_depths(const BookConfig& config, Rng& rng) {
  if (config.initial) {
    auto [x0, y0] = *config.initial;
    check_depth_arg(x0);
    check_depth_arg(y0);
    return {x0, y0};
  }
  return config.depth.sample(rng);
}

}  // namespace

PricePath simulate_book(const BookConfig& config, double horizon, Rng& rng,
                        long max_changes) {
  BookState st(config);
  PricePath path;
  path.s0 = config.s0;
  auto [bid, ask] = initial_depths(config, rng);
  double now = 0.0;
  while (now < horizon &&
         (max_changes < 0 || static_cast<long>(path.epochs.size()) < max_changes)) {
    TauDraw d = draw_tau(st.clock, ask, bid, rng, config.step_cap);
    if (d.censored) {
      path.censored = true;
      break;
    }
    now += d.duration;
    if (!(now < horizon)) break;
    path.epochs.push_back(now);
    path.directions.push_back(d.direction);
    std::tie(bid, ask) = config.depth.sample(rng);
  }
  return path;
}

std::vector<PricePath> replicate(const BookConfig& config, int n_paths,
                                 double horizon, std::uint64_t master_seed) {
  if (n_paths < 1) throw std::invalid_argument("replicate: n_paths must be >= 1");
  std::vector<PricePath> out;
  out.reserve(static_cast<std::size_t>(n_paths));
  for (int i = 0; i < n_paths; ++i) {
    Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    out.push_back(simulate_book(config, horizon, rng));
  }
  return out;
}

GridSample simulate_book_grid(const BookConfig& config,
                              const std::vector<double>& times, Rng& rng) {
  BookState st(config);
  GridSample g;
  g.price.assign(times.size(), 0);
  g.count.assign(times.size(), 0);
  auto [bid, ask] = initial_depths(config, rng);
  double now = 0.0;
  int price = 0;
  long count = 0;
  std::size_t gi = 0;
  const double horizon = times.empty() ? 0.0 : times.back();
  while (gi < times.size()) {
    TauDraw d = draw_tau(st.clock, ask, bid, rng, config.step_cap);
    if (d.censored) g.censored = true;
    double next = now + d.duration;
    while (gi < times.size() && times[gi] < next) {
      g.price[gi] = price;
      g.count[gi] = count;
      ++gi;
    }
    if (d.censored || std::isinf(d.duration) || next > horizon) break;
    now = next;
    price += d.direction;
    ++count;
    std::tie(bid, ask) = config.depth.sample(rng);
  }
  while (gi < times.size()) {
    g.price[gi] = price;
    g.count[gi] = count;
    ++gi;
  }
  return g;
}

std::string path_to_csv(const PricePath& path) {
  std::ostringstream os;
  os.precision(17);
  os << "n,S_n,X_n,price\n";
  int price = path.s0;
  for (std::size_t i = 0; i < path.epochs.size(); ++i) {
    price += path.directions[i];
    os << (i + 1) << "," << path.epochs[i] << "," << path.directions[i] << ","
       << price << "\n";
  }
  return os.str();
}

nlohmann::json path_summary(const std::vector<PricePath>& paths) {
  long n_changes = 0, censored = 0, ups = 0;
  double tau_sum = 0.0;
  for (const auto& p : paths) {
    n_changes += static_cast<long>(p.epochs.size());
    if (p.censored) ++censored;
    double prev = 0.0;
    for (double e : p.epochs) {
      tau_sum += e - prev;
      prev = e;
    }
    for (int d : p.directions) ups += d > 0 ? 1 : 0;
  }
  nlohmann::json j;
  j["n_paths"] = paths.size();
  j["n_changes"] = n_changes;
  j["censored_count"] = censored;
  j["mean_tau"] = n_changes > 0 ? tau_sum / n_changes : 0.0;
  j["p_up"] = n_changes > 0 ? static_cast<double>(ups) / n_changes : 0.0;
  return j;
}

nlohmann::json book_config_to_json(const BookConfig& config) {
  nlohmann::json j;
  j["rates"] = rate_spec_to_json(config.rates);
  if (config.origin) j["origin"] = *config.origin;
  j["depth"] = config.depth.to_json();
  if (config.initial) j["initial"] = {config.initial->first, config.initial->second};
  j["s0"] = config.s0;
  j["step_cap"] = config.step_cap;
  return j;
}

BookConfig book_config_from_json(const nlohmann::json& j) {
  BookConfig c;
  c.rates = rate_spec_from_json(j.at("rates"));
  if (j.contains("origin")) c.origin = j.at("origin").get<double>();
  c.depth = DepthDistribution::from_json(j.at("depth"));
  if (j.contains("initial")) {
    auto arr = j.at("initial");
    c.initial = std::make_pair(arr.at(0).get<int>(), arr.at(1).get<int>());
  }
  if (j.contains("s0")) c.s0 = j.at("s0").get<int>();
  if (j.contains("step_cap")) c.step_cap = j.at("step_cap").get<long>();
  return c;
}

}  // namespace lob
