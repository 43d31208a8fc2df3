#pragma once

#include <vector>

namespace zidrm {

// Two observed samples from semicontinuous populations, split into zero
// counts and the positive observations.  Positives keep their input order;
// every downstream sum iterates sample 0 first, then sample 1, so results
// are bit-reproducible.  Immutable after construction.
struct TwoSampleData {
  std::vector<double> pos0;  // strictly positive values of sample 0
  std::vector<double> pos1;  // strictly positive values of sample 1
  int n00 = 0;               // zero count, sample 0
  int n10 = 0;               // zero count, sample 1
  bool negatives_mapped = false;  // negative inputs were counted as zeros

  int n01() const { return static_cast<int>(pos0.size()); }
  int n11() const { return static_cast<int>(pos1.size()); }
  int n0() const { return n00 + n01(); }
  int n1() const { return n10 + n11(); }
  int n() const { return n0() + n1(); }
  int n_pos() const { return n01() + n11(); }
  double w() const { return static_cast<double>(n0()) / n(); }
  double rho_hat() const { return static_cast<double>(n11()) / n_pos(); }
};

// Splits raw observations at zero_tol: values <= zero_tol count as zeros,
// values above are stored as positives.  Strictly negative inputs map to
// zeros with the negatives_mapped flag set.
//
// Throws EmptySampleError when a raw list is empty and NoPositivesError
// when a sample has no value above zero_tol.
TwoSampleData load_two_sample(const std::vector<double>& raw0,
                              const std::vector<double>& raw1,
                              double zero_tol = 0.0);

}  // namespace zidrm
