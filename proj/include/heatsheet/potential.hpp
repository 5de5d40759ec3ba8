#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "heatsheet/spectral.hpp"

namespace heatsheet {

enum class PotentialFamily { Zero, Cosine, BumpTable, Custom };

// Drift potential U: R^d -> R with certified constants. The integrator and
// the Gibbs sampler rely on the bounds, not on the evaluators, so every
// constructor certifies
//   sup_value  >= sup_z U(z)
//   grad_sup   >= sup_z max_i |dU/dz_i|
//   grad_lip   >= Lipschitz constant of grad U (sup norm)
class Potential {
public:
  static Potential zero(int dimension);

  // U(z) = sum_i a_i cos(z_i).
  static Potential cosine(const Vec& amplitudes);

  // Smooth potential given by a table of Gaussian bumps:
  // U(z) = sum_j A_j exp(-|z - c_j|^2 / (2 w_j^2)).
  static Potential bump_table(const std::vector<Vec>& centers, const Vec& amplitudes,
                              const Vec& widths);

  // Arbitrary evaluators with caller-supplied certified constants.
  static Potential custom(int dimension, std::function<double(std::span<const double>)> value,
                          std::function<void(std::span<const double>, std::span<double>)> gradient,
                          double sup_value, double grad_sup, double grad_lip,
                          std::string label = "custom");

  PotentialFamily family() const { return family_; }
  const std::string& label() const { return label_; }
  int dimension() const { return dimension_; }

  double value(std::span<const double> z) const { return value_(z); }
  void gradient(std::span<const double> z, std::span<double> out) const { gradient_(z, out); }

  double sup_value() const { return sup_value_; }
  double grad_sup() const { return grad_sup_; }
  double grad_lip() const { return grad_lip_; }

  bool is_zero() const { return family_ == PotentialFamily::Zero; }

  // Throws ConfigError unless all certified constants are finite.
  void require_certified() const;

private:
  Potential() = default;

  PotentialFamily family_ = PotentialFamily::Zero;
  std::string label_ = "zero";
  int dimension_ = 1;
  std::function<double(std::span<const double>)> value_;
  std::function<void(std::span<const double>, std::span<double>)> gradient_;
  double sup_value_ = 0.0;
  double grad_sup_ = 0.0;
  double grad_lip_ = 0.0;
};

} // namespace heatsheet
