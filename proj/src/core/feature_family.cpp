#include "rfm/core/feature_family.hpp"

#include <numeric>
#include <stdexcept>

namespace rfm {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::fourier_burgers: return "fourier-burgers";
    case FeatureKind::predictor_corrector_darcy: return "predictor-corrector-darcy";
    case FeatureKind::brownian_bridge: return "brownian-bridge";
    case FeatureKind::custom: return "custom";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view s) {
  for (auto k : {FeatureKind::fourier_burgers, FeatureKind::predictor_corrector_darcy,
                 FeatureKind::brownian_bridge, FeatureKind::custom})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown feature kind '" + std::string(s) + "'");
}

const Eigen::MatrixXd& FamilyRecord::block(std::string_view name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b.data;
  throw std::invalid_argument("family record has no block '" + std::string(name) + "'");
}

const std::string& FamilyRecord::param(const std::string& key) const {
  auto it = hyper.find(key);
  if (it == hyper.end()) throw std::invalid_argument("family record has no parameter '" + key + "'");
  return it->second;
}

Field FeatureFamily::evaluate(const Field& a, std::size_t j) const {
  if (j >= size()) throw std::out_of_range("feature index out of range");
  Eigen::VectorXd col = evaluate_all(a).col(static_cast<Eigen::Index>(j));
  return Field(a.grid(), std::move(col));
}

void check_permutation(std::span<const std::size_t> perm, std::size_t m) {
  if (perm.size() != m) throw std::invalid_argument("permutation has wrong length");
  std::vector<bool> seen(m, false);
  for (auto p : perm) {
    if (p >= m || seen[p]) throw std::invalid_argument("not a permutation");
    seen[p] = true;
  }
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& thetas, std::span<const std::size_t> perm) {
  check_permutation(perm, static_cast<std::size_t>(thetas.cols()));
  Eigen::MatrixXd out(thetas.rows(), thetas.cols());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = thetas.col(static_cast<Eigen::Index>(perm[i]));
  return out;
}

CallbackFamily::CallbackFamily(std::size_t m, Callback phi, std::vector<std::size_t> order)
    : phi_(std::move(phi)), order_(std::move(order)) {
  if (order_.empty()) {
    order_.resize(m);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
  check_permutation(order_, m);
}

Eigen::MatrixXd CallbackFamily::evaluate_all(const Field& a) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) {
    Field f = phi_(a, order_[j]);
    require_same_grid(a.grid(), f.grid(), "callback feature");
    out.col(static_cast<Eigen::Index>(j)) = f.values();
  }
  return out;
}

Field CallbackFamily::evaluate(const Field& a, std::size_t j) const {
  if (j >= size()) throw std::out_of_range("feature index out of range");
  return phi_(a, order_[j]);
}

FamilyPtr CallbackFamily::permuted(std::span<const std::size_t> perm) const {
  check_permutation(perm, size());
  std::vector<std::size_t> order(size());
  for (std::size_t i = 0; i < size(); ++i) order[i] = order_[perm[i]];
  return std::make_shared<CallbackFamily>(size(), phi_, std::move(order));
}

FamilyRecord CallbackFamily::record() const {
  throw std::logic_error("callback feature families cannot be serialized");
}

}  // namespace rfm
