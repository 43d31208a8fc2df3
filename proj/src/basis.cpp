#include "zidrm/basis.hpp"

#include <cmath>
#include <utility>

#include "zidrm/errors.hpp"

namespace zidrm {

BasisFunction::BasisFunction(int dim, std::function<Eigen::VectorXd(double)> eval,
                             std::string label)
    : dim_(dim), eval_(std::move(eval)), label_(std::move(label)) {
  if (dim_ < 1) throw DimensionError("BasisFunction: dim must be >= 1");
  if (!eval_) throw DomainError("BasisFunction: missing eval callable");
}

BasisFunction BasisFunction::make(BasisKind kind) {
  switch (kind) {
    case BasisKind::kLog:
      return BasisFunction(
          1,
          [](double x) {
            Eigen::VectorXd v(1);
            v(0) = std::log(x);
            return v;
          },
          "log");
    case BasisKind::kIdentity:
      return BasisFunction(
          1,
          [](double x) {
            Eigen::VectorXd v(1);
            v(0) = x;
            return v;
          },
          "identity");
    case BasisKind::kLogAndIdentity:
      return BasisFunction(
          2,
          [](double x) {
            Eigen::VectorXd v(2);
            v(0) = std::log(x);
            v(1) = x;
            return v;
          },
          "log+identity");
    case BasisKind::kCustom:
      throw DomainError("BasisFunction::make: custom basis needs eval and dim");
  }
  throw DomainError("BasisFunction::make: unknown kind");
}

BasisFunction BasisFunction::custom(int dim,
                                    std::function<Eigen::VectorXd(double)> eval,
                                    std::string label) {
  return BasisFunction(dim, std::move(eval), std::move(label));
}

BasisFunction basis_by_name(const std::string& name) {
  if (name == "log") return BasisFunction::make(BasisKind::kLog);
  if (name == "identity") return BasisFunction::make(BasisKind::kIdentity);
  if (name == "log+identity" || name == "log_and_identity") {
    return BasisFunction::make(BasisKind::kLogAndIdentity);
  }
  throw DomainError("unknown basis '" + name + "'");
}

}  // namespace zidrm
