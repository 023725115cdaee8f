// Copyright 2026 The sgkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgkit/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sgkit {

FitResult fit_affine(std::span<const MeasurementRecord> records, const FitOptions& options) {
  if (records.size() < 5) {
    throw std::invalid_argument("fit_affine needs at least 5 records, got " +
                                std::to_string(records.size()));
  }
  const ObservableSpec obs = records.front().setting.observable;
  const auto n = static_cast<Eigen::Index>(records.size());
  const Instrument ideal = ideal_instrument();

  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd deviation(n);
  Eigen::VectorXd weight(n);
  bool all_exact = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    if (rec.setting.observable != obs) {
      throw std::invalid_argument("fit_affine: records mix observables " + obs.label() + " and " +
                                  rec.setting.observable.label());
    }
    const Vector3 k = rec.setting.direction.unit();
    design(i, 0) = 1.0;
    design.block<1, 3>(i, 1) = k.transpose();
    const double freq = rec.frequency();
    deviation(i) = freq - observable_expectation(ideal, obs, k);
    if (rec.exact()) {
      weight(i) = 1.0;
    } else {
      all_exact = false;
      const double p = std::clamp(freq, 1e-6, 1.0 - 1e-6);
      weight(i) = static_cast<double>(rec.shots) / (p * (1.0 - p));
    }
  }
  weight *= options.weight_scale;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(design);
  rank_check.setThreshold(1e-10);
  if (rank_check.rank() < 4) {
    std::ostringstream msg;
    msg << "affine fit for " << obs.label() << " is rank deficient (rank " << rank_check.rank()
        << " < 4); probe directions must not be coplanar";
    throw RankDeficientFit(obs.label(), msg.str());
  }

  const Eigen::VectorXd sqrt_w = weight.cwiseSqrt();
  const Eigen::MatrixXd wx = sqrt_w.asDiagonal() * design;
  const Eigen::VectorXd wy = sqrt_w.cwiseProduct(deviation);
  const Eigen::Vector4d beta = wx.colPivHouseholderQr().solve(wy);

  const Eigen::VectorXd resid = deviation - design * beta;
  FitResult fit;
  fit.observable = obs;
  fit.degrees_of_freedom = static_cast<int>(n) - 4;
  fit.chi_square = (weight.array() * resid.array().square()).sum();
  Eigen::Matrix4d info = wx.transpose() * wx;
  Eigen::Matrix4d cov = info.ldlt().solve(Eigen::Matrix4d::Identity());
  if (all_exact) cov *= fit.chi_square / fit.degrees_of_freedom;
  cov = 0.5 * (cov + cov.transpose());

  fit.eta_scale = options.eta > 0.0 ? options.eta : 1.0;
  fit.coefficients.c = beta / fit.eta_scale;
  fit.covariance = cov / (fit.eta_scale * fit.eta_scale);
  return fit;
}

std::vector<FitResult> fit_dataset(const Dataset& dataset) {
  std::vector<ObservableSpec> order;
  std::map<ObservableSpec, std::vector<MeasurementRecord>> groups;
  for (const auto& rec : dataset.records) {
    auto [it, inserted] = groups.try_emplace(rec.setting.observable);
    if (inserted) order.push_back(rec.setting.observable);
    it->second.push_back(rec);
  }
  std::vector<FitResult> fits;
  FitOptions options;
  options.eta = dataset.metadata.eta;
  for (const auto& obs : order) {
    const auto& group = groups.at(obs);
    if (group.size() < 5) {
      throw RankDeficientFit(obs.label(), "affine fit for " + obs.label() + " has only " +
                                              std::to_string(group.size()) + " records");
    }
    fits.push_back(fit_affine(group, options));
  }
  return fits;
}

RecoveryResult recover_parameters(std::span<const FitResult> fits, const LinearSystem& system,
                                  const RecoveryOptions& options) {
  const Eigen::Index rows = system.row_count();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  Eigen::MatrixXd rhs_cov = Eigen::MatrixXd::Zero(rows, rows);
  std::vector<const FitResult*> row_fit(static_cast<std::size_t>(rows), nullptr);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& src = system.sources[static_cast<std::size_t>(r)];
    if (src.constraint) continue;
    const auto it = std::find_if(fits.begin(), fits.end(), [&](const FitResult& f) {
      return f.observable == src.observable;
    });
    if (it == fits.end()) {
      throw std::invalid_argument("no fit for observable " + src.observable.label() +
                                  " required by row '" +
                                  system.row_labels[static_cast<std::size_t>(r)] + "'");
    }
    row_fit[static_cast<std::size_t>(r)] = &*it;
    rhs(r) = src.scale * it->coefficients[src.coefficient];
  }
  for (Eigen::Index r1 = 0; r1 < rows; ++r1) {
    const auto* f1 = row_fit[static_cast<std::size_t>(r1)];
    if (f1 == nullptr) continue;
    const auto& s1 = system.sources[static_cast<std::size_t>(r1)];
    for (Eigen::Index r2 = 0; r2 < rows; ++r2) {
      if (row_fit[static_cast<std::size_t>(r2)] != f1) continue;
      const auto& s2 = system.sources[static_cast<std::size_t>(r2)];
      rhs_cov(r1, r2) = s1.scale * s2.scale * f1->covariance(s1.coefficient, s2.coefficient);
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system.rows, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();

  RecoveryResult res;
  res.mode = system.mode;
  res.singular_values = sv;
  res.rhs = rhs;
  res.row_labels = system.row_labels;
  const double cutoff = sv.size() > 0 ? options.singular_tolerance * sv(0) : 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff && sv(k) > 0.0) ++res.rank;
  }

  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(kParameterCount, rows);
  for (int k = 0; k < res.rank; ++k) {
    pinv += v.col(k) * (u.col(k).transpose() / sv(k));
    const ParameterVector vk = v.col(k);
    res.identifiable_combinations.push_back(vk);
    const double var = u.col(k).dot(rhs_cov * u.col(k)) / (sv(k) * sv(k));
    res.combination_standard_errors.push_back(std::sqrt(std::max(var, 0.0)));
    res.row_space_projector += vk * vk.transpose();
  }
  for (int k = res.rank; k < kParameterCount; ++k) res.nullspace_basis.push_back(v.col(k));

  res.parameters = pinv * rhs;
  res.parameter_covariance = pinv * rhs_cov * pinv.transpose();
  res.residual_norm = (system.rows * res.parameters - rhs).norm();

  if (options.max_residual && res.residual_norm > *options.max_residual) {
    std::ostringstream msg;
    msg << "linear system is inconsistent: residual " << res.residual_norm << " exceeds "
        << *options.max_residual;
    throw InconsistentSystem(std::move(res), msg.str());
  }
  return res;
}

GoodnessOfFit goodness_of_fit(std::span<const FitResult> fits, double threshold) {
  GoodnessOfFit report;
  report.threshold = threshold;
  for (const auto& f : fits) {
    FitQuality q;
    q.observable = f.observable.label();
    q.chi_square = f.chi_square;
    q.degrees_of_freedom = f.degrees_of_freedom;
    q.reduced_chi_square = f.degrees_of_freedom > 0 ? f.chi_square / f.degrees_of_freedom : 0.0;
    q.compatible = q.reduced_chi_square <= threshold;
    report.total_chi_square += f.chi_square;
    report.total_degrees_of_freedom += f.degrees_of_freedom;
    report.compatible = report.compatible && q.compatible;
    report.fits.push_back(std::move(q));
  }
  return report;
}

}  // namespace sgkit
