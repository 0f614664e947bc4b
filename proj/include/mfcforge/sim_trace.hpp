#pragma once

#include <vector>

namespace mfcforge {

/// Uniformly sampled closed-loop signals; all channels have equal length.
struct SimTrace {
  double ts = 0.0;
  std::vector<double> t;
  std::vector<double> ref;
  std::vector<double> y;
  std::vector<double> e;
  std::vector<double> u;
  bool diverged = false;

  std::size_t size() const { return t.size(); }
  void push(double time, double r, double out, double err, double ctrl) {
    t.push_back(time);
    ref.push_back(r);
    y.push_back(out);
    e.push_back(err);
    u.push_back(ctrl);
  }
};

/// Output magnitude beyond which a simulation is treated as divergent.
inline constexpr double kDivergenceLimit = 1e6;

}  // namespace mfcforge
