#pragma once

// Second, separately written UCB-Hoeffding learner with nested storage, used
// as a trace oracle for the tabular learner.

#include <algorithm>
#include <cmath>
#include <vector>

namespace testing_support {

struct PlainUcbH {
  std::size_t S, A, H;
  double c, iota;
  std::vector<std::vector<std::vector<double>>> Q;
  std::vector<std::vector<double>> V;
  std::vector<std::vector<std::vector<long>>> N;

  PlainUcbH(std::size_t S_, std::size_t A_, std::size_t H_, double c_, double iota_)
      : S(S_), A(A_), H(H_), c(c_), iota(iota_),
        Q(H_, std::vector<std::vector<double>>(S_, std::vector<double>(A_, double(H_)))),
        V(H_ + 1, std::vector<double>(S_, double(H_))),
        N(H_, std::vector<std::vector<long>>(S_, std::vector<long>(A_, 0))) {
    V[H] = std::vector<double>(S, 0.0);
  }

  std::size_t act(std::size_t h, std::size_t s) const {
    std::size_t best = 0;
    for (std::size_t a = 1; a < A; ++a)
      if (Q[h][s][a] > Q[h][s][best]) best = a;
    return best;
  }

  void step(std::size_t h, std::size_t s, std::size_t a, double r, std::size_t s2) {
    const long t = ++N[h][s][a];
    const double lr = double(H + 1) / double(H + t);
    const double b = c * std::sqrt(double(H) * double(H) * double(H) * iota / double(t));
    Q[h][s][a] = (1.0 - lr) * Q[h][s][a] + lr * (r + V[h + 1][s2] + 1.0 * b);
    double m = Q[h][s][0];
    for (std::size_t k = 1; k < A; ++k) m = std::max(m, Q[h][s][k]);
    V[h][s] = std::min(double(H), m);
  }
};

}  // namespace testing_support
