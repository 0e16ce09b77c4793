#include "rssloc/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rssloc {

namespace {
constexpr double kLn10 = 2.302585092994045684;
}

void Scenario::validate() const {
  if (!(region_min.x() < region_max.x()) || !(region_min.y() < region_max.y())) {
    throw std::invalid_argument("scenario: region_min must be component-wise below region_max");
  }
  if (anchors.empty()) {
    throw std::invalid_argument("scenario: at least one anchor required");
  }
  if (anchors.size() != noise_std_db.size()) {
    throw std::invalid_argument("scenario: anchors and noise_std_db must have equal length (" +
                                std::to_string(anchors.size()) + " vs " +
                                std::to_string(noise_std_db.size()) + ")");
  }
  for (double s : noise_std_db) {
    if (!(s > 0.0)) throw std::invalid_argument("scenario: every noise std must be > 0");
  }
  if (!(path_loss_exponent > 0.0)) {
    throw std::invalid_argument("scenario: path-loss exponent must be > 0");
  }
}

Measurement generate_rss(const Scenario& scenario, const Vec2& true_position,
                         RandomStream& rng, bool add_noise) {
  scenario.validate();
  if (!(true_position.x() > scenario.region_min.x() && true_position.x() < scenario.region_max.x() &&
        true_position.y() > scenario.region_min.y() && true_position.y() < scenario.region_max.y())) {
    throw std::invalid_argument("generate_rss: target must lie strictly inside the region");
  }
  Measurement m;
  m.rss_dbm.reserve(scenario.anchor_count());
  m.noise_std_db = scenario.noise_std_db;
  for (std::size_t n = 0; n < scenario.anchor_count(); ++n) {
    const double d = (true_position - scenario.anchors[n]).norm();
    if (d < kMinAnchorDistance) {
      throw std::invalid_argument("generate_rss: target within " +
                                  std::to_string(kMinAnchorDistance) + " m of anchor " +
                                  std::to_string(n));
    }
    double p = scenario.tx_power_dbm - 10.0 * scenario.path_loss_exponent * std::log10(d);
    if (add_noise) p += rng.gaussian(0.0, scenario.noise_std_db[n]);
    m.rss_dbm.push_back(p);
  }
  return m;
}

void cost_value_gradient(const Scenario& scenario, const Measurement& measurement,
                         const Vec2& x, double& value, Vec2& gradient) {
  const double gamma = scenario.path_loss_exponent;
  const double p0 = scenario.tx_power_dbm;
  value = 0.0;
  gradient.setZero();
  for (std::size_t n = 0; n < scenario.anchor_count(); ++n) {
    const Vec2 dx = x - scenario.anchors[n];
    double d = dx.norm();
    if (d < kMinAnchorDistance) d = kMinAnchorDistance;
    const double sigma2 = measurement.noise_std_db[n] * measurement.noise_std_db[n];
    const double h = measurement.rss_dbm[n] - p0 + 10.0 * gamma * std::log10(d);
    value += h * h / sigma2;
    gradient += (h / (sigma2 * d * d)) * dx;
  }
  gradient *= 20.0 * gamma / kLn10;
}

CostEval cost(const Scenario& scenario, const Measurement& measurement, const Vec2& x) {
  CostEval eval;
  cost_value_gradient(scenario, measurement, x, eval.value, eval.gradient);
  eval.residuals.reserve(scenario.anchor_count());
  const double gamma = scenario.path_loss_exponent;
  for (std::size_t n = 0; n < scenario.anchor_count(); ++n) {
    double d = (x - scenario.anchors[n]).norm();
    if (d < kMinAnchorDistance) d = kMinAnchorDistance;
    eval.residuals.push_back(measurement.rss_dbm[n] - scenario.tx_power_dbm +
                             10.0 * gamma * std::log10(d));
  }
  return eval;
}

double crlb(const Scenario& scenario, const Vec2& true_position) {
  scenario.validate();
  const double k = 10.0 * scenario.path_loss_exponent / kLn10;
  Eigen::Matrix2d fim = Eigen::Matrix2d::Zero();
  for (std::size_t n = 0; n < scenario.anchor_count(); ++n) {
    const Vec2 dx = true_position - scenario.anchors[n];
    const double d2 = dx.squaredNorm();
    if (d2 < kMinAnchorDistance * kMinAnchorDistance) {
      throw std::domain_error("crlb: target coincides with anchor " + std::to_string(n));
    }
    const double sigma2 = scenario.noise_std_db[n] * scenario.noise_std_db[n];
    fim += (dx * dx.transpose()) / (sigma2 * d2 * d2);
  }
  fim *= k * k;
  const double det = fim.determinant();
  const double tr = fim.trace();
  if (!(det > 1e-12 * tr * tr) || !std::isfinite(det)) {
    throw std::domain_error("crlb: singular geometry (anchor directions collinear)");
  }
  return std::sqrt(fim.inverse().trace());
}

}  // namespace rssloc
