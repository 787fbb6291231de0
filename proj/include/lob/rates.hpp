#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace lob {

// alpha_t = c
struct ConstantForm {
  double c = 1.0;
};
// alpha_t = coeff * t^exponent
struct PowerForm {
  double coeff = 1.0;
  double exponent = 0.0;
};
// alpha_t = coeff * t^exponent * (ln t)^log_power, t >= 1
struct PowerLogForm {
  double coeff = 1.0;
  double exponent = 0.0;
  double log_power = 0.0;
};
// alpha_t = k / t on [t0, inf)
struct ReciprocalForm {
  double k = 1.0;
  double t0 = 1.0;
};
// alpha_t = values[i] on [breakpoints[i], breakpoints[i+1]); last extends to inf
struct PiecewiseForm {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

using RateForm = std::variant<ConstantForm, PowerForm, PowerLogForm,
                              ReciprocalForm, PiecewiseForm>;

/** Modulated arrival/cancellation intensity pair: lambda_t = lambda * alpha_t,
 *  mu_t = mu * alpha_t. */
struct RateSpec {
  RateForm form;
  double lambda = 1.0;
  double mu = 1.0;
};

/** Earliest admissible time for the form: 0 for regular forms, 1 for log and
 *  non-integrable power singularities, t0 for reciprocal. */
double default_origin(const RateForm& form);

/** alpha at time t. Throws std::invalid_argument outside the form's domain.
 *  Integrable singularities (power, -1 < s < 0) return +inf at t = 0. */
double eval_alpha(const RateSpec& spec, double t);

/** Deterministic clock A(t) = int_origin^t alpha_s ds with closed-form
 *  cumulative/inverse where available and guarded numeric fallbacks
 *  (abs tolerance 1e-10). */
class CumulativeClock {
 public:
  explicit CumulativeClock(RateSpec spec,
                           std::optional<double> origin = std::nullopt);

  const RateSpec& spec() const { return spec_; }
  double origin() const { return origin_; }
  double lambda() const { return spec_.lambda; }
  double mu() const { return spec_.mu; }

  double alpha(double t) const { return eval_alpha(spec_, t); }
  double cumulative(double t) const;  // A(t), t >= origin
  // Smallest t with A(t) >= a; +inf when a exceeds the total mass A(inf).
  double inverse(double a) const;
  // Total clock mass A(inf); +inf for non-integrable tails.
  double total_mass() const;

 private:
  RateSpec spec_;
  double origin_;
  std::vector<double> cum_;  // piecewise prefix integrals
};

// CLI/grammar form: "constant:c" | "power:K,s" | "powerlog:K,s,m" |
// "recip:k,t0" | "piecewise:b0,v0,b1,v1,..."
RateForm parse_rate_form(const std::string& text);
std::string describe_rate_form(const RateForm& form);

nlohmann::json rate_spec_to_json(const RateSpec& spec);
RateSpec rate_spec_from_json(const nlohmann::json& j);

}  // namespace lob
