#pragma once

#include "nlqft/interaction.hpp"

#include <functional>
#include <vector>

namespace nlqft {

struct QuadResult {
    cplx value = 0.0;
    double err = 0.0;
    double l1 = 0.0;  // integral of |f|, used for round-off floors
    long evals = 0;
};

// Globally adaptive Gauss-Kronrod (21 point) on [a, b]; either end may be infinite.
// Stops when err <= max(abs_tol, rel_tol * |I|), or when err drops under a round-off
// floor proportional to the L1 norm, or after max_intervals bisections.
QuadResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b, double rel_tol = 1e-10,
                              double abs_tol = 0.0, int max_intervals = 400);

struct Rule {
    std::vector<double> x, w;
};

// Golub-Welsch rules.
Rule gauss_legendre(int n);                 // on [-1, 1]
Rule gauss_hermite(int n);                  // weight exp(-x^2) on the real line
// int f(x) dx over R^dim as sum w_i f(s * x_i) with the exp(-|x|^2) weight divided out
// (nodes are s * x_i, weights s^dim * w_i * exp(|x_i|^2)).
struct ProductRule {
    std::vector<std::vector<double>> x;
    std::vector<double> w;
};
ProductRule hermite_product(int order, int dim, double scale);

}  // namespace nlqft
