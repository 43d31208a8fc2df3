#include "zidrm/data.hpp"

#include <cmath>

#include "zidrm/errors.hpp"

namespace zidrm {

namespace {

void split_sample(const std::vector<double>& raw, double zero_tol, int which,
                  std::vector<double>* positives, int* zeros, bool* negatives) {
  if (raw.empty()) {
    throw EmptySampleError("load_two_sample: sample " + std::to_string(which) +
                           " is empty");
  }
  positives->reserve(raw.size());
  for (double x : raw) {
    if (!std::isfinite(x)) {
      throw DomainError("load_two_sample: non-finite value in sample " +
                        std::to_string(which));
    }
    if (x <= zero_tol) {
      ++*zeros;
      if (x < 0.0) *negatives = true;
    } else {
      positives->push_back(x);
    }
  }
  if (positives->empty()) {
    throw NoPositivesError("load_two_sample: sample " + std::to_string(which) +
                           " has no value above the zero threshold");
  }
}

}  // namespace

TwoSampleData load_two_sample(const std::vector<double>& raw0,
                              const std::vector<double>& raw1, double zero_tol) {
  if (zero_tol < 0.0) throw DomainError("load_two_sample: zero_tol must be >= 0");
  TwoSampleData data;
  bool negatives = false;
  split_sample(raw0, zero_tol, 0, &data.pos0, &data.n00, &negatives);
  split_sample(raw1, zero_tol, 1, &data.pos1, &data.n10, &negatives);
  data.negatives_mapped = negatives;
  return data;
}

}  // namespace zidrm
