#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace dzctl::test {

// Method of steps for x'(t) = -x(t - 1), x = 1 on [-1, 0]: on [k, k+1] the
// solution is a polynomial p_k; p_{k+1}(t) = p_k(k+1) - int_{k+1}^t p_k(s-1) ds.
struct Poly {
    std::vector<double> c;  // c[j] t^j
    double operator()(double t) const {
        double acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * t + c[j];
        return acc;
    }
};

inline Poly shifted(const Poly& p, double d) {  // p(t - d)
    Poly out{std::vector<double>(p.c.size(), 0.0)};
    for (std::size_t j = 0; j < p.c.size(); ++j) {
        // (t - d)^j = sum_i C(j,i) t^i (-d)^{j-i}
        double coeff = 1.0;
        for (std::size_t i = 0; i <= j; ++i) {
            if (i > 0) coeff = coeff * static_cast<double>(j - i + 1) / static_cast<double>(i);
            out.c[i] += p.c[j] * coeff * std::pow(-d, static_cast<double>(j - i));
        }
    }
    return out;
}

inline std::vector<Poly> method_of_steps(int intervals) {
    std::vector<Poly> pieces;
    Poly prev{{1.0}};  // history on [-1, 0]
    for (int k = 0; k < intervals; ++k) {
        const Poly g = shifted(prev, 1.0);
        Poly integral{std::vector<double>(g.c.size() + 1, 0.0)};
        for (std::size_t j = 0; j < g.c.size(); ++j) integral.c[j + 1] = g.c[j] / static_cast<double>(j + 1);
        const double start_value = k == 0 ? 1.0 : pieces.back()(k);
        Poly next{std::vector<double>(integral.c.size(), 0.0)};
        for (std::size_t j = 0; j < integral.c.size(); ++j) next.c[j] = -integral.c[j];
        next.c[0] += start_value + integral(k);
        pieces.push_back(next);
        prev = next;
    }
    return pieces;
}

inline double delayed_oracle(double t) {
    static const auto pieces = method_of_steps(3);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(t)), pieces.size() - 1);
    return pieces[k](t);
}

}  // namespace dzctl::test
