#include "lob/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lob/stats.hpp"

namespace lob {
namespace {

const char kHeader[] = "t_seconds,side,kind,price_ticks,size";

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool parse_row(const std::vector<std::string>& f, EventRecord& rec,
               std::string& why) {
  if (f.size() != 5) {
    why = "expected 5 fields, got " + std::to_string(f.size());
    return false;
  }
  try {
    std::size_t used = 0;
    rec.t = std::stod(f[0], &used);
    if (used != f[0].size()) throw std::invalid_argument(f[0]);
  } catch (const std::exception&) {
    why = "bad t_seconds '" + f[0] + "'";
    return false;
  }
  if (rec.t < 0.0 || !std::isfinite(rec.t)) {
    why = "t_seconds must be finite and >= 0";
    return false;
  }
  if (f[1] == "B") rec.side = Side::kBid;
  else if (f[1] == "A") rec.side = Side::kAsk;
  else {
    why = "side must be B or A, got '" + f[1] + "'";
    return false;
  }
  if (f[2] == "L") rec.kind = EventKind::kLimit;
  else if (f[2] == "M") rec.kind = EventKind::kMarket;
  else if (f[2] == "C") rec.kind = EventKind::kCancel;
  else {
    why = "kind must be L, M or C, got '" + f[2] + "'";
    return false;
  }
  try {
    std::size_t used = 0;
    rec.price = std::stol(f[3], &used, 10);
    if (used != f[3].size()) throw std::invalid_argument(f[3]);
  } catch (const std::exception&) {
    why = "bad price_ticks '" + f[3] + "'";
    return false;
  }
  try {
    std::size_t used = 0;
    rec.size = std::stol(f[4], &used, 10);
    if (used != f[4].size()) throw std::invalid_argument(f[4]);
  } catch (const std::exception&) {
    why = "bad size '" + f[4] + "'";
    return false;
  }
  if (rec.size < 1) {
    why = "size must be >= 1";
    return false;
  }
  return true;
}

}  // namespace

EventStream parse_events(std::istream& in, const std::string& label) {
  EventStream stream;
  stream.label = label;
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  std::vector<long> bad_lines;
  std::ostringstream why_all;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = trim(line);
    if (body.empty()) continue;
    if (!saw_header) {
      if (body != kHeader) {
        throw EventParseError(
            "line 1: header must be '" + std::string(kHeader) + "'", {1});
      }
      saw_header = true;
      continue;
    }
    EventRecord rec;
    std::string why;
    if (!parse_row(split_csv(body), rec, why)) {
      if (bad_lines.size() < 20)
        why_all << "line " << line_no << ": " << why << "\n";
      bad_lines.push_back(line_no);
      continue;
    }
    stream.events.push_back(rec);
  }
  if (!bad_lines.empty()) {
    why_all << bad_lines.size() << " malformed row(s)";
    throw EventParseError(why_all.str(), bad_lines);
  }
  if (!std::is_sorted(stream.events.begin(), stream.events.end(),
                      [](const EventRecord& a, const EventRecord& b) {
                        return a.t < b.t;
                      })) {
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                       return a.t < b.t;
                     });
    stream.resorted = true;
  }
  return stream;
}

EventStream parse_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open events file: " + path);
  return parse_events(in, path);
}

std::string events_to_csv(const EventStream& stream) {
  std::ostringstream os;
  os.precision(17);
  os << kHeader << "\n";
  for (const auto& e : stream.events) {
    os << e.t << ',' << (e.side == Side::kBid ? 'B' : 'A') << ','
       << (e.kind == EventKind::kLimit ? 'L'
           : e.kind == EventKind::kMarket ? 'M' : 'C')
       << ',' << e.price << ',' << e.size << "\n";
  }
  return os.str();
}

IntensityCurve estimate_intensity(const EventStream& stream, Side side,
                                  const std::vector<EventKind>& kinds,
                                  double bin_width, double session_length) {
  if (stream.events.empty())
    throw std::runtime_error("estimate_intensity: empty event stream");
  if (bin_width <= 0.0)
    throw std::invalid_argument("estimate_intensity: bin width must be > 0");
  if (kinds.empty())
    throw std::invalid_argument("estimate_intensity: no order kinds selected");
  std::size_t bins =
      static_cast<std::size_t>(std::ceil(session_length / bin_width));
  if (bins == 0) bins = 1;
  IntensityCurve curve;
  curve.day = stream.label;
  curve.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    curve.bin_edges[i] = std::min(i * bin_width, session_length);
  curve.counts.assign(bins, 0);
  for (const auto& e : stream.events) {
    if (e.side != side) continue;
    if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) continue;
    auto bin = static_cast<std::size_t>(e.t / bin_width);
    if (bin >= bins) bin = bins - 1;
    ++curve.counts[bin];
  }
  curve.rate.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    double width = curve.bin_edges[i + 1] - curve.bin_edges[i];
    curve.rate[i] = width > 0.0 ? curve.counts[i] / width : 0.0;
  }
  return curve;
}

PowerLawFit fit_power_law(const IntensityCurve& curve) {
  std::vector<double> log_t, log_rate;
  int dropped = 0;
  for (std::size_t i = 0; i < curve.bins(); ++i) {
    if (curve.rate[i] > 0.0 && curve.mid(i) > 0.0) {
      log_t.push_back(std::log(curve.mid(i)));
      log_rate.push_back(std::log(curve.rate[i]));
    } else {
      ++dropped;
    }
  }
  if (log_t.size() < 3)
    throw std::runtime_error(
        "fit_power_law: needs >= 3 bins with positive rate, got " +
        std::to_string(log_t.size()));
  OlsFit fit = ols(log_t, log_rate);
  PowerLawFit out;
  out.K = std::exp(fit.intercept);
  out.exponent = -fit.slope;
  out.r2 = fit.r2;
  out.exponent_stderr = fit.slope_stderr;
  out.bins_used = static_cast<int>(log_t.size());
  out.bins_dropped = dropped;
  return out;
}

QuotientSeries quotient_series(const IntensityCurve& lambda_curve,
                               const IntensityCurve& mu_curve) {
  if (lambda_curve.bins() != mu_curve.bins())
    throw std::invalid_argument("quotient_series: binning mismatch");
  for (std::size_t i = 0; i < lambda_curve.bin_edges.size(); ++i)
    if (std::abs(lambda_curve.bin_edges[i] - mu_curve.bin_edges[i]) > 1e-9)
      throw std::invalid_argument("quotient_series: binning mismatch");
  QuotientSeries out;
  double sum = 0.0;
  for (std::size_t i = 0; i < lambda_curve.bins(); ++i) {
    if (mu_curve.rate[i] <= 0.0) continue;
    double ratio = lambda_curve.rate[i] / mu_curve.rate[i];
    out.points.emplace_back(lambda_curve.mid(i), ratio);
    sum += ratio;
  }
  if (out.points.empty())
    throw std::runtime_error("quotient_series: denominator is zero everywhere");
  out.mean = sum / static_cast<double>(out.points.size());
  return out;
}

namespace {

DurationSample durations_to_sample(std::vector<double> durations, int bins) {
  if (durations.size() < 1 || bins < 1)
    throw std::runtime_error(
        "price_change_durations: needs at least 2 price changes");
  DurationSample out;
  out.running_mean.resize(durations.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    acc += durations[i];
    out.running_mean[i] = acc / static_cast<double>(i + 1);
  }
  double lo = *std::min_element(durations.begin(), durations.end());
  double hi = *std::max_element(durations.begin(), durations.end());
  lo = std::max(lo, 1e-12);
  hi = std::max(hi, lo * (1.0 + 1e-9));
  out.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  double ratio = std::pow(hi / lo, 1.0 / bins);
  out.bin_edges[0] = lo;
  for (int i = 1; i <= bins; ++i) out.bin_edges[i] = out.bin_edges[i - 1] * ratio;
  out.bin_edges.back() = hi;
  out.density.assign(static_cast<std::size_t>(bins), 0.0);
  for (double d : durations) {
    auto it = std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(), d);
    std::size_t idx = it == out.bin_edges.begin()
                          ? 0
                          : static_cast<std::size_t>(it - out.bin_edges.begin()) - 1;
    if (idx >= out.density.size()) idx = out.density.size() - 1;
    out.density[idx] += 1.0;
  }
  double n = static_cast<double>(durations.size());
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    double width = out.bin_edges[i + 1] - out.bin_edges[i];
    out.density[i] /= n * width;
  }
  out.durations = std::move(durations);
  return out;
}

}  // namespace

DurationSample price_change_durations(const EventStream& stream, int bins) {
  // quote changes = movements of either best price implied by the events
  std::vector<double> change_times;
  long best_bid = 0, best_ask = 0;
  bool have_bid = false, have_ask = false;
  for (const auto& e : stream.events) {
    if (e.side == Side::kBid) {
      if (have_bid && e.price != best_bid) change_times.push_back(e.t);
      best_bid = e.price;
      have_bid = true;
    } else {
      if (have_ask && e.price != best_ask) change_times.push_back(e.t);
      best_ask = e.price;
      have_ask = true;
    }
  }
  if (change_times.size() < 2)
    throw std::runtime_error(
        "price_change_durations: needs at least 2 price changes");
  std::vector<double> durations(change_times.size() - 1);
  for (std::size_t i = 0; i + 1 < change_times.size(); ++i)
    durations[i] = change_times[i + 1] - change_times[i];
  return durations_to_sample(std::move(durations), bins);
}

DurationSample price_change_durations(const PricePath& path, int bins) {
  if (path.epochs.size() < 2)
    throw std::runtime_error(
        "price_change_durations: needs at least 2 price changes");
  std::vector<double> durations(path.epochs.size() - 1);
  for (std::size_t i = 0; i + 1 < path.epochs.size(); ++i)
    durations[i] = path.epochs[i + 1] - path.epochs[i];
  return durations_to_sample(std::move(durations), bins);
}

namespace {

nlohmann::json fit_to_json(const PowerLawFit& f) {
  return {{"K", f.K},
          {"exponent", f.exponent},
          {"r2", f.r2},
          {"exponent_stderr", f.exponent_stderr},
          {"bins_used", f.bins_used},
          {"bins_dropped", f.bins_dropped}};
}

PowerLawFit fit_from_json(const nlohmann::json& j) {
  PowerLawFit f;
  f.K = j.at("K").get<double>();
  f.exponent = j.at("exponent").get<double>();
  if (j.contains("r2")) f.r2 = j.at("r2").get<double>();
  if (j.contains("exponent_stderr"))
    f.exponent_stderr = j.at("exponent_stderr").get<double>();
  if (j.contains("bins_used")) f.bins_used = j.at("bins_used").get<int>();
  if (j.contains("bins_dropped"))
    f.bins_dropped = j.at("bins_dropped").get<int>();
  return f;
}

}  // namespace

nlohmann::json stock_fits_to_json(const StockFits& fits) {
  nlohmann::json j;
  j["name"] = fits.name;
  j["lambda_ask"] = fit_to_json(fits.lambda_ask);
  j["mu_ask"] = fit_to_json(fits.mu_ask);
  j["lambda_bid"] = fit_to_json(fits.lambda_bid);
  j["mu_bid"] = fit_to_json(fits.mu_bid);
  j["quotient_ask"] = fits.quotient_ask;
  j["quotient_bid"] = fits.quotient_bid;
  return j;
}

StockFits stock_fits_from_json(const nlohmann::json& j) {
  StockFits f;
  f.name = j.at("name").get<std::string>();
  f.lambda_ask = fit_from_json(j.at("lambda_ask"));
  f.mu_ask = fit_from_json(j.at("mu_ask"));
  f.lambda_bid = fit_from_json(j.at("lambda_bid"));
  f.mu_bid = fit_from_json(j.at("mu_bid"));
  f.quotient_ask = j.at("quotient_ask").get<double>();
  f.quotient_bid = j.at("quotient_bid").get<double>();
  return f;
}

TableReport table_report(const std::vector<StockFits>& fits) {
  if (fits.empty())
    throw std::invalid_argument("table_report: no fitted stocks");
  TableReport report;
  for (const auto& f : fits) {
    for (const PowerLawFit* p :
         {&f.lambda_ask, &f.mu_ask, &f.lambda_bid, &f.mu_bid}) {
      if (p->K <= 0.0)
        throw std::invalid_argument("table_report: fit missing for " + f.name);
    }
    TableRow row;
    row.fits = f;
    double pooled_exponent = 0.25 * (f.lambda_ask.exponent + f.mu_ask.exponent +
                                     f.lambda_bid.exponent + f.mu_bid.exponent);
    double pooled_k = 0.25 * (f.lambda_ask.K + f.mu_ask.K + f.lambda_bid.K +
                              f.mu_bid.K);
    RateSpec spec;
    spec.form = PowerForm{pooled_k, -pooled_exponent};
    spec.lambda = 0.5 * (f.quotient_ask + f.quotient_bid);
    spec.mu = 1.0;
    row.regime = classify_regime(spec);
    double s = 1.0 - pooled_exponent;
    if (row.regime.regime == Regime::kNoConvergence && s <= 0.0 && s > -0.1) {
      row.note =
          "boundary: pooled decay exponent " + std::to_string(pooled_exponent) +
          " sits at the edge of the admissible range (growth exponent ~ 0); "
          "no schedule assigned";
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

nlohmann::json TableReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json j = stock_fits_to_json(row.fits);
    j["regime"] = row.regime.to_json();
    if (!row.note.empty()) j["note"] = row.note;
    out.push_back(std::move(j));
  }
  return out;
}

std::string TableReport::to_text() const {
  std::ostringstream os;
  os << std::left << std::setw(8) << "stock";
  for (const char* col : {"K_la", "s_la", "K_ma", "s_ma", "K_lb", "s_lb",
                          "K_mb", "s_mb", "q_ask", "q_bid"})
    os << std::right << std::setw(9) << col;
  os << "  regime\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    os << std::left << std::setw(8) << row.fits.name << std::right;
    for (double v :
         {row.fits.lambda_ask.K, row.fits.lambda_ask.exponent,
          row.fits.mu_ask.K, row.fits.mu_ask.exponent, row.fits.lambda_bid.K,
          row.fits.lambda_bid.exponent, row.fits.mu_bid.K,
          row.fits.mu_bid.exponent, row.fits.quotient_ask,
          row.fits.quotient_bid})
      os << std::setw(9) << v;
    os << "  " << regime_name(row.regime.regime);
    if (!row.note.empty()) os << " [" << row.note << "]";
    os << "\n";
  }
  return os.str();
}

namespace {

void append_flow(EventStream& stream, const FlowSpec& flow, Side side,
                 bool limit_flow, double volume_scale, double session_length,
                 Rng& rng) {
  RateSpec spec;
  spec.form = PowerForm{flow.coeff * volume_scale, -flow.exponent};
  CumulativeClock clock(spec);
  long price = side == Side::kBid ? 100 : 101;
  double internal = 0.0;
  while (true) {
    internal += rng.exponential(1.0);
    double t = clock.inverse(internal);
    if (!(t <= session_length)) break;
    EventRecord rec;
    rec.t = t;
    rec.side = side;
    rec.kind = limit_flow ? EventKind::kLimit
               : rng.bernoulli(0.5) ? EventKind::kMarket : EventKind::kCancel;
    rec.price = price;
    rec.size = 1;
    stream.events.push_back(rec);
  }
}

}  // namespace

EventStream synthetic_session(const FlowSpec& lambda_ask,
                              const FlowSpec& mu_ask,
                              const FlowSpec& lambda_bid,
                              const FlowSpec& mu_bid, double volume_scale,
                              double session_length, Rng& rng) {
  if (volume_scale <= 0.0 || session_length <= 0.0)
    throw std::invalid_argument("synthetic_session: bad scale parameters");
  EventStream stream;
  stream.label = "synthetic";
  append_flow(stream, lambda_ask, Side::kAsk, true, volume_scale,
              session_length, rng);
  append_flow(stream, mu_ask, Side::kAsk, false, volume_scale, session_length,
              rng);
  append_flow(stream, lambda_bid, Side::kBid, true, volume_scale,
              session_length, rng);
  append_flow(stream, mu_bid, Side::kBid, false, volume_scale, session_length,
              rng);
  std::stable_sort(stream.events.begin(), stream.events.end(),
                   [](const EventRecord& a, const EventRecord& b) {
                     return a.t < b.t;
                   });
  return stream;
}

}  // namespace lob
