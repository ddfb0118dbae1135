#include "comrl/discrete_info.hpp"

#include <algorithm>
#include <cmath>

namespace comrl {

namespace {

// Compensated accumulation; entropy identities cancel values near ln of the
// table size, so plain summation error would eat into the 1e-10 tolerances.
struct NeumaierSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double result() const { return s + c; }
};

std::vector<int> canonical_axes(std::span<const int> axes) {
  COMRL_REQUIRE(!axes.empty(), "variable subset must be non-empty");
  std::vector<int> out(axes.begin(), axes.end());
  std::sort(out.begin(), out.end());
  for (size_t i = 0; i < out.size(); ++i) {
    COMRL_REQUIRE(out[i] >= 0 && out[i] < 4, "axis index out of range");
    COMRL_REQUIRE(i == 0 || out[i] != out[i - 1], "repeated axis in subset");
  }
  return out;
}

void require_disjoint(std::span<const int> a, std::span<const int> b) {
  for (int x : a) {
    for (int y : b) {
      COMRL_REQUIRE(x != y, "variable subsets overlap");
    }
  }
}

std::vector<int> joined(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double entropy_sorted(const DiscreteJoint& joint, std::span<const int> axes) {
  int64_t cells = 1;
  for (int ax : axes) cells *= joint.sizes[ax];
  std::vector<double> marginal(static_cast<size_t>(cells), 0.0);

  // One pass over the full table in flat order; the marginal index is built
  // from the subset coordinates with the axes in sorted order.
  const auto& sz = joint.sizes;
  int64_t flat = 0;
  for (int m = 0; m < sz[0]; ++m) {
    for (int xb = 0; xb < sz[1]; ++xb) {
      for (int xt = 0; xt < sz[2]; ++xt) {
        for (int z = 0; z < sz[3]; ++z, ++flat) {
          const int coord[4] = {m, xb, xt, z};
          int64_t idx = 0;
          for (int ax : axes) idx = idx * sz[ax] + coord[ax];
          marginal[static_cast<size_t>(idx)] += joint.p[static_cast<size_t>(flat)];
        }
      }
    }
  }

  NeumaierSum h;
  for (double q : marginal) {
    if (q > 0.0) h.add(-q * std::log(q));
  }
  return h.result();
}

}  // namespace

DiscreteJoint DiscreteJoint::zeros(int n_m, int n_xb, int n_xt, int n_z) {
  DiscreteJoint j;
  j.sizes = {n_m, n_xb, n_xt, n_z};
  int64_t cells = 1;
  for (int s : j.sizes) {
    COMRL_REQUIRE(s >= 1 && s <= kMaxAlphabet,
                  "alphabet sizes must be between 1 and 16");
    cells *= s;
  }
  j.p.assign(static_cast<size_t>(cells), 0.0);
  return j;
}

void DiscreteJoint::validate() const {
  int64_t cells = 1;
  for (int s : sizes) {
    COMRL_REQUIRE(s >= 1 && s <= kMaxAlphabet,
                  "alphabet sizes must be between 1 and 16");
    cells *= s;
  }
  COMRL_REQUIRE(static_cast<int64_t>(p.size()) == cells,
                "table size does not match the alphabets");
  NeumaierSum total;
  for (double v : p) {
    COMRL_REQUIRE(v >= 0.0, "probabilities must be non-negative");
    total.add(v);
  }
  COMRL_REQUIRE(std::abs(total.result() - 1.0) <= 1e-12,
                "probability table must sum to one");
}

double entropy(const DiscreteJoint& joint, std::span<const int> axes) {
  return entropy_sorted(joint, canonical_axes(axes));
}

double mutual_info(const DiscreteJoint& joint, std::span<const int> a,
                   std::span<const int> b) {
  require_disjoint(a, b);
  return entropy(joint, a) + entropy(joint, b) - entropy(joint, joined(a, b));
}

double conditional_mi(const DiscreteJoint& joint, std::span<const int> a,
                      std::span<const int> b, std::span<const int> c) {
  require_disjoint(a, b);
  require_disjoint(a, c);
  require_disjoint(b, c);
  const std::vector<int> ac = joined(a, c);
  const std::vector<int> bc = joined(b, c);
  const std::vector<int> abc = joined(joined(a, b), c);
  return entropy(joint, ac) + entropy(joint, bc) - entropy(joint, abc) -
         entropy(joint, c);
}

double interaction_info(const DiscreteJoint& joint, std::span<const int> a,
                        std::span<const int> b, std::span<const int> c) {
  return mutual_info(joint, a, b) - conditional_mi(joint, a, b, c);
}

}  // namespace comrl
