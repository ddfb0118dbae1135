#pragma once

#include <array>
#include <span>
#include <vector>

#include "comrl/common.hpp"

namespace comrl {

// Explicit joint distribution over the four variables (M, X_b, X_t, Z),
// stored as a flat table in that axis order (M slowest, Z fastest). Small
// alphabets keep every information quantity an exhaustive sum.
struct DiscreteJoint {
  static constexpr int kMaxAlphabet = 16;
  // Axis indices, in table order.
  static constexpr int M = 0, Xb = 1, Xt = 2, Z = 3;

  std::array<int, 4> sizes{0, 0, 0, 0};
  std::vector<double> p;  // sizes[0]*sizes[1]*sizes[2]*sizes[3] entries

  static DiscreteJoint zeros(int n_m, int n_xb, int n_xt, int n_z);

  int64_t index(int m, int xb, int xt, int z) const {
    return ((static_cast<int64_t>(m) * sizes[1] + xb) * sizes[2] + xt) *
               sizes[3] +
           z;
  }
  double& at(int m, int xb, int xt, int z) { return p[index(m, xb, xt, z)]; }
  double at(int m, int xb, int xt, int z) const {
    return p[index(m, xb, xt, z)];
  }

  // Entries non-negative, total within 1e-12 of one.
  void validate() const;
};

// Shannon entropy in nats of the marginal over the given axes. Axes are
// canonicalized (sorted, duplicates rejected), so any ordering of the same
// set produces bit-identical results.
double entropy(const DiscreteJoint& joint, std::span<const int> axes);

// I(A;B) = H(A) + H(B) - H(A,B). Symmetric bit-for-bit.
double mutual_info(const DiscreteJoint& joint, std::span<const int> a,
                   std::span<const int> b);

// I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
double conditional_mi(const DiscreteJoint& joint, std::span<const int> a,
                      std::span<const int> b, std::span<const int> c);

// I(A;B;C) = I(A;B) - I(A;B|C). Sign-indefinite in general.
double interaction_info(const DiscreteJoint& joint, std::span<const int> a,
                        std::span<const int> b, std::span<const int> c);

}  // namespace comrl
