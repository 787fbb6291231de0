#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lob/rng.hpp"
#include "lob/scaling.hpp"
#include "lob/simulator.hpp"

namespace lob {

enum class Side { kBid, kAsk };
enum class EventKind { kLimit, kMarket, kCancel };

struct EventRecord {
  double t = 0.0;  // seconds since session open
  Side side = Side::kBid;
  EventKind kind = EventKind::kLimit;
  long price = 0;  // ticks
  long size = 1;
};

struct EventStream {
  std::vector<EventRecord> events;
  std::string label;
  bool resorted = false;  // input was not time-sorted
};

struct EventParseError : std::runtime_error {
  explicit EventParseError(const std::string& what, std::vector<long> lines)
      : std::runtime_error(what), bad_lines(std::move(lines)) {}
  std::vector<long> bad_lines;
};

/** CSV schema (header required):
 *  t_seconds,side,kind,price_ticks,size  with side B|A, kind L|M|C.
 *  A zero-byte input parses to the empty stream. Malformed rows throw an
 *  EventParseError listing every offending line number. Out-of-order rows
 *  are stably sorted and flagged. */
EventStream parse_events(std::istream& in, const std::string& label = "");
EventStream parse_events_file(const std::string& path);

std::string events_to_csv(const EventStream& stream);

struct IntensityCurve {
  std::vector<double> bin_edges;  // size bins + 1
  std::vector<long> counts;
  std::vector<double> rate;  // counts / bin width, events per second
  std::string day;

  std::size_t bins() const { return counts.size(); }
  double mid(std::size_t i) const {
    return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
  }
};

inline constexpr double kDefaultBinWidth = 300.0;
inline constexpr double kDefaultSessionLength = 23400.0;

/** Per-bin event rate for one side over a set of order kinds (market and
 *  cancel flows are estimated together by passing both). Events past the
 *  session end fall into the last bin. */
IntensityCurve estimate_intensity(const EventStream& stream, Side side,
                                  const std::vector<EventKind>& kinds,
                                  double bin_width = kDefaultBinWidth,
                                  double session_length = kDefaultSessionLength);

struct PowerLawFit {
  double K = 0.0;        // rate ~ K * t^{-exponent}
  double exponent = 0.0; // decay, positive for decreasing intensity
  double r2 = 0.0;
  double exponent_stderr = 0.0;
  int bins_used = 0;
  int bins_dropped = 0;  // zero-rate bins excluded from the regression
};

/** Log-log least squares over positive-rate bins at bin midpoints. Exact on
 *  noise-free power-law data. Needs >= 3 positive bins. */
PowerLawFit fit_power_law(const IntensityCurve& curve);

struct QuotientSeries {
  std::vector<std::pair<double, double>> points;  // (t_mid, ratio)
  double mean = 0.0;
};

/** Per-bin arrival/cancellation rate ratio over bins with positive
 *  denominator; requires identical binning. */
QuotientSeries quotient_series(const IntensityCurve& lambda_curve,
                               const IntensityCurve& mu_curve);

struct DurationSample {
  std::vector<double> durations;     // gaps between consecutive changes
  std::vector<double> bin_edges;     // log-spaced histogram
  std::vector<double> density;
  std::vector<double> running_mean;  // divergence diagnostic
};

DurationSample price_change_durations(const EventStream& stream, int bins = 30);
DurationSample price_change_durations(const PricePath& path, int bins = 30);

struct StockFits {
  std::string name;
  PowerLawFit lambda_ask, mu_ask, lambda_bid, mu_bid;
  double quotient_ask = 0.0;
  double quotient_bid = 0.0;
};

nlohmann::json stock_fits_to_json(const StockFits& fits);
StockFits stock_fits_from_json(const nlohmann::json& j);

struct TableRow {
  StockFits fits;
  RegimeReport regime;
  std::string note;
};

struct TableReport {
  std::vector<TableRow> rows;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/** Fit summary plus the rescaling classification per stock. The classifier
 *  sees lambda = mean quotient, mu = 1, and the four fitted exponents
 *  pooled into one power form. */
TableReport table_report(const std::vector<StockFits>& fits);

/** One power-law flow rate(t) = coeff * volume_scale * t^{-exponent}. */
struct FlowSpec {
  double coeff = 1.0;
  double exponent = 0.0;
};

/** Synthetic session: four independent inhomogeneous Poisson flows sampled
 *  exactly through the clock inverse. Flows with exponent >= 1 start at
 *  t = 1 (their intensity is not integrable at the open). */
EventStream synthetic_session(const FlowSpec& lambda_ask,
                              const FlowSpec& mu_ask,
                              const FlowSpec& lambda_bid,
                              const FlowSpec& mu_bid, double volume_scale,
                              double session_length, Rng& rng);

}  // namespace lob
