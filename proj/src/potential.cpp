#include "heatsheet/potential.hpp"

#include <cmath>

#include "heatsheet/errors.hpp"

namespace heatsheet {

Potential Potential::zero(int dimension) {
  Potential p;
  p.family_ = PotentialFamily::Zero;
  p.label_ = "zero";
  p.dimension_ = dimension;
  p.value_ = [](std::span<const double>) { return 0.0; };
  p.gradient_ = [](std::span<const double>, std::span<double> out) {
    for (double& g : out) g = 0.0;
  };
  p.sup_value_ = 0.0;
  p.grad_sup_ = 0.0;
  p.grad_lip_ = 0.0;
  return p;
}

Potential Potential::cosine(const Vec& amplitudes) {
  if (amplitudes.empty()) throw ConfigError("potential.amplitudes must be non-empty");
  Potential p;
  p.family_ = PotentialFamily::Cosine;
  p.label_ = "cosine";
  p.dimension_ = static_cast<int>(amplitudes.size());
  const Vec a = amplitudes;
  p.value_ = [a](std::span<const double> z) {
    double u = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) u += a[i] * std::cos(z[i]);
    return u;
  };
  p.gradient_ = [a](std::span<const double> z, std::span<double> out) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i] * std::sin(z[i]);
  };
  double sup = 0.0, gs = 0.0;
  for (double ai : amplitudes) {
    sup += std::abs(ai);
    gs = std::max(gs, std::abs(ai));
  }
  p.sup_value_ = sup;
  p.grad_sup_ = gs;
  p.grad_lip_ = gs;
  return p;
}

Potential Potential::bump_table(const std::vector<Vec>& centers, const Vec& amplitudes,
                                const Vec& widths) {
  if (centers.empty() || centers.size() != amplitudes.size() ||
      centers.size() != widths.size()) {
    throw ConfigError("potential.bump_table: centers, amplitudes, widths must have equal size");
  }
  const int d = static_cast<int>(centers.front().size());
  for (const Vec& c : centers) {
    if (static_cast<int>(c.size()) != d) throw ConfigError("potential.bump_table: ragged centers");
  }
  for (double w : widths) {
    if (!(w > 0.0)) throw ConfigError("potential.bump_table: widths must be > 0");
  }
  Potential p;
  p.family_ = PotentialFamily::BumpTable;
  p.label_ = "bump_table";
  p.dimension_ = d;
  const auto cs = centers;
  const Vec as = amplitudes;
  const Vec ws = widths;
  p.value_ = [cs, as, ws](std::span<const double> z) {
    double u = 0.0;
    for (std::size_t j = 0; j < cs.size(); ++j) {
      double q = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double r = z[i] - cs[j][i];
        q += r * r;
      }
      u += as[j] * std::exp(-q / (2.0 * ws[j] * ws[j]));
    }
    return u;
  };
  p.gradient_ = [cs, as, ws](std::span<const double> z, std::span<double> out) {
    for (double& g : out) g = 0.0;
    for (std::size_t j = 0; j < cs.size(); ++j) {
      const double w2 = ws[j] * ws[j];
      double q = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double r = z[i] - cs[j][i];
        q += r * r;
      }
      const double e = as[j] * std::exp(-q / (2.0 * w2));
      for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] -= e * (z[i] - cs[j][i]) / w2;
      }
    }
  };
  double sup = 0.0, gs = 0.0, gl = 0.0;
  for (std::size_t j = 0; j < amplitudes.size(); ++j) {
    sup += std::max(amplitudes[j], 0.0);
    gs += std::abs(amplitudes[j]) / (widths[j] * std::sqrt(M_E));
    gl += std::abs(amplitudes[j]) / (widths[j] * widths[j]);
  }
  p.sup_value_ = sup;
  p.grad_sup_ = gs;
  p.grad_lip_ = gl;
  return p;
}

Potential Potential::custom(int dimension, std::function<double(std::span<const double>)> value,
                            std::function<void(std::span<const double>, std::span<double>)> gradient,
                            double sup_value, double grad_sup, double grad_lip,
                            std::string label) {
  Potential p;
  p.family_ = PotentialFamily::Custom;
  p.label_ = std::move(label);
  p.dimension_ = dimension;
  p.value_ = std::move(value);
  p.gradient_ = std::move(gradient);
  p.sup_value_ = sup_value;
  p.grad_sup_ = grad_sup;
  p.grad_lip_ = grad_lip;
  return p;
}

void Potential::require_certified() const {
  if (!std::isfinite(sup_value_) || !std::isfinite(grad_sup_) || !std::isfinite(grad_lip_)) {
    throw ConfigError("potential '" + label_ + "' lacks finite certified bounds");
  }
}

} // namespace heatsheet
