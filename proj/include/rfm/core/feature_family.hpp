#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rfm/field/field.hpp"

namespace rfm {

enum class FeatureKind { fourier_burgers, predictor_corrector_darcy, brownian_bridge, custom };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view s);

/// A named dense float64 block stored column-major.
struct NamedBlock {
  std::string name;
  Eigen::MatrixXd data;
};

/// Everything needed to rebuild a family: its kind, textual hyperparameters
/// and the frozen feature parameters as dense blocks.
struct FamilyRecord {
  std::string kind;
  std::map<std::string, std::string> hyper;
  std::vector<NamedBlock> blocks;

  const Eigen::MatrixXd& block(std::string_view name) const;
  const std::string& param(const std::string& key) const;
};

/// Random feature pair (phi, mu) with m frozen parameter draws theta_j.
///
/// Implementations are immutable after construction and safe to evaluate
/// from several threads.
class FeatureFamily {
 public:
  virtual ~FeatureFamily() = default;

  virtual FeatureKind kind() const = 0;
  /// Number of features m.
  virtual std::size_t size() const = 0;
  /// Throws std::invalid_argument if features cannot be evaluated on `grid`.
  virtual void check_grid(const Grid& grid) const = 0;
  /// Column j holds phi(a; theta_j) on a's grid (grid.size() x m).
  virtual Eigen::MatrixXd evaluate_all(const Field& a) const = 0;
  /// phi(a; theta_j).
  virtual Field evaluate(const Field& a, std::size_t j) const;
  /// Same family with features reordered so new feature i is old perm[i].
  virtual std::shared_ptr<const FeatureFamily> permuted(std::span<const std::size_t> perm) const = 0;
  /// Serializable description; custom families may throw.
  virtual FamilyRecord record() const = 0;
};

using FamilyPtr = std::shared_ptr<const FeatureFamily>;

/// Family built from an explicit callback phi(a, j); used for planted
/// models and tests. Not serializable.
class CallbackFamily final : public FeatureFamily {
 public:
  using Callback = std::function<Field(const Field&, std::size_t)>;

  CallbackFamily(std::size_t m, Callback phi, std::vector<std::size_t> order = {});

  FeatureKind kind() const override { return FeatureKind::custom; }
  std::size_t size() const override { return order_.size(); }
  void check_grid(const Grid&) const override {}
  Eigen::MatrixXd evaluate_all(const Field& a) const override;
  Field evaluate(const Field& a, std::size_t j) const override;
  FamilyPtr permuted(std::span<const std::size_t> perm) const override;
  FamilyRecord record() const override;

 private:
  Callback phi_;
  std::vector<std::size_t> order_;
};

/// Validates `perm` as a permutation of 0..m-1.
void check_permutation(std::span<const std::size_t> perm, std::size_t m);

/// Columns of `thetas` reordered by `perm`.
Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& thetas, std::span<const std::size_t> perm);

}  // namespace rfm
