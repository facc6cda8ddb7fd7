#include "propscore/metric.hpp"

#include <charconv>
#include <cmath>

#include "propscore/error.hpp"

namespace propscore {

namespace {

std::optional<double> parse_number(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void unknown(std::string_view id) {
  std::string msg = "unknown metric '" + std::string(id) + "'; valid identifiers:";
  for (const auto& name : metric_identifiers()) msg += " " + name;
  throw Error(ErrorKind::UnknownMetric, msg);
}

void check_alpha(std::string_view id, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidLevel, "metric '" + std::string(id) + "' needs alpha in (0, 1)");
  }
}

}  // namespace

bool MetricSpec::per_instance() const {
  return kind != MetricKind::rmse && kind != MetricKind::r2 && kind != MetricKind::dispersion;
}

bool MetricSpec::needs_histogram() const {
  return kind == MetricKind::log_score || kind == MetricKind::brier_score;
}

const std::vector<std::string>& metric_identifiers() {
  static const std::vector<std::string> ids = {
      "mae",
      "rmse",
      "r2",
      "crps",
      "crls",
      "log_score",
      "brier_score",
      "energy_score_beta_0.2",
      "energy_score_beta_0.5",
      "energy_score_beta_1.0",
      "energy_score_beta_1.5",
      "energy_score_beta_2.0",
      "wcrps_left",
      "wcrps_right",
      "wcrps_center",
      "interval_score_90",
      "interval_score_95",
      "sharpness",
      "dispersion",
      "coverage_90",
      "coverage_95",
  };
  return ids;
}

MetricSpec parse_metric(std::string_view id, double default_alpha, double default_beta) {
  MetricSpec spec;
  spec.name = std::string(id);

  const auto simple = [&](MetricKind kind) {
    spec.kind = kind;
    return spec;
  };
  if (id == "mae") return simple(MetricKind::mae);
  if (id == "rmse") return simple(MetricKind::rmse);
  if (id == "r2") {
    spec.orientation = Orientation::higher_better;
    return simple(MetricKind::r2);
  }
  if (id == "crps") return simple(MetricKind::crps);
  if (id == "crls") return simple(MetricKind::crls);
  if (id == "log_score") return simple(MetricKind::log_score);
  if (id == "brier_score") return simple(MetricKind::brier_score);
  if (id == "sharpness") return simple(MetricKind::sharpness);
  if (id == "dispersion") return simple(MetricKind::dispersion);

  if (id.starts_with("wcrps_")) {
    const auto w = id.substr(6);
    spec.kind = MetricKind::wcrps;
    if (w == "left") spec.weight = WeightKind::left;
    else if (w == "right") spec.weight = WeightKind::right;
    else if (w == "center") spec.weight = WeightKind::center;
    else if (w == "unit") spec.weight = WeightKind::unit;
    else unknown(id);
    return spec;
  }

  if (id == "energy_score" || id.starts_with("energy_score_beta_")) {
    spec.kind = MetricKind::energy_score;
    spec.beta = default_beta;
    if (id != "energy_score") {
      const auto b = parse_number(id.substr(18));
      if (!b) unknown(id);
      spec.beta = *b;
    }
    if (!(spec.beta > 0.0 && spec.beta <= 2.0)) {
      throw Error(ErrorKind::InvalidBeta, "energy score exponent must lie in (0, 2]");
    }
    return spec;
  }

  for (auto [prefix, kind] : {std::pair{std::string_view("interval_score"), MetricKind::interval_score},
                              std::pair{std::string_view("coverage"), MetricKind::coverage}}) {
    if (id == prefix) {
      spec.kind = kind;
      spec.alpha = default_alpha;
      check_alpha(id, spec.alpha);
      return spec;
    }
    if (id.starts_with(prefix) && id.size() > prefix.size() + 1 && id[prefix.size()] == '_') {
      const auto pct = parse_number(id.substr(prefix.size() + 1));
      if (!pct) unknown(id);
      spec.kind = kind;
      spec.alpha = (100.0 - *pct) / 100.0;
      check_alpha(id, spec.alpha);
      return spec;
    }
  }
  unknown(id);
}

Orientation orientation_of(std::string_view id) {
  try {
    return parse_metric(id).orientation;
  } catch (const Error&) {
    return Orientation::lower_better;
  }
}

}  // namespace propscore
