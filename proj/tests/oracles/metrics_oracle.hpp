#pragma once

// Brute-force reading of the behavioral-dimension rules. Deliberately written
// as literal set counting over 1-based rounds, with no shared code with
// src/metrics.cpp.

#include <optional>
#include <string>

namespace ipd::oracle {

struct Dims {
  int nice = 0;
  std::optional<double> forgiving, retaliatory, troublemaking, emulative;
};

// x: the player's actions, y: the opponent's, as 'C'/'D' strings.
inline Dims brute_force_dims(const std::string& x_in, const std::string& y_in) {
  const int n = static_cast<int>(x_in.size());
  const std::string x = " " + x_in;  // 1-based
  const std::string y = " " + y_in;
  auto X = [&](int t) { return x[static_cast<std::size_t>(t)]; };
  auto Y = [&](int t) { return y[static_cast<std::size_t>(t)]; };
  auto frac = [](int a, int b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / b;
  };

  Dims d;

  int first_x = n + 1, first_y = n + 1;
  for (int t = n; t >= 1; --t) {
    if (X(t) == 'D') first_x = t;
    if (Y(t) == 'D') first_y = t;
  }
  d.nice = (first_x == n + 1 || first_x > first_y) ? 1 : 0;

  int opp_def = 0, forgiven = 0, penalties = 0;
  for (int t = 1; t <= n - 1; ++t) {
    if (Y(t) == 'D') {
      ++opp_def;
      if (X(t + 1) == 'C') ++forgiven;
    }
  }
  for (int t = 2; t <= n; ++t) {
    bool earlier = false;
    for (int s = 1; s < t - 1; ++s) earlier = earlier || Y(s) == 'D';
    if (Y(t - 1) == 'C' && X(t - 1) == 'D' && X(t) == 'D' && earlier) ++penalties;
  }
  d.forgiving = frac(forgiven, opp_def + penalties);

  int provocations = 0, reactions = 0;
  for (int t = 1; t <= n - 1; ++t) {
    const bool uncalled_by_y = Y(t) == 'D' && (t == 1 || X(t - 1) == 'C');
    if (uncalled_by_y) {
      ++provocations;
      if (X(t + 1) == 'D') ++reactions;
    }
  }
  d.retaliatory = frac(reactions, provocations);

  int occasions = 0, uncalled = 0;
  for (int t = 1; t <= n; ++t) {
    const bool occasion = t == 1 || Y(t - 1) == 'C';
    if (occasion) ++occasions;
    if (occasion && X(t) == 'D') ++uncalled;
  }
  d.troublemaking = frac(uncalled, occasions);

  if (n >= 2) {
    int mimic = 0;
    for (int t = 2; t <= n; ++t) mimic += X(t) == Y(t - 1);
    d.emulative = frac(mimic, n - 1);
  }
  return d;
}

}  // namespace ipd::oracle
