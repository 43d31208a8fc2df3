#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>

namespace zidrm {

enum class BasisKind { kLog, kIdentity, kLogAndIdentity, kCustom };

// Basis function q(x) of the density ratio tilt, with the augmented vector
// Q(x) = (1, q(x)')'.  Cheap to copy; evaluation is thread-safe.
class BasisFunction {
 public:
  static BasisFunction make(BasisKind kind);
  static BasisFunction custom(int dim,
                              std::function<Eigen::VectorXd(double)> eval,
                              std::string label);

  int dim() const { return dim_; }  // d
  const std::string& label() const { return label_; }

  Eigen::VectorXd q(double x) const { return eval_(x); }

  // Augmented vector (1, q(x)')', dimension d + 1.
  Eigen::VectorXd augmented(double x) const {
    Eigen::VectorXd out(dim_ + 1);
    out(0) = 1.0;
    out.tail(dim_) = eval_(x);
    return out;
  }

 private:
  BasisFunction(int dim, std::function<Eigen::VectorXd(double)> eval,
                std::string label);

  int dim_;
  std::function<Eigen::VectorXd(double)> eval_;
  std::string label_;
};

// Parses "log", "identity", "log+identity" (also accepts "log_and_identity").
BasisFunction basis_by_name(const std::string& name);

}  // namespace zidrm
