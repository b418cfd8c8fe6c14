#pragma once

#include "nlqft/interaction.hpp"

#include <functional>
#include <vector>

namespace nlqft {

// Vertex lists inside one slot are given latest first: index 0 carries the largest time.

struct TimeValue {
    cplx value = 0.0;
    double err = 0.0;
};

// int_{a < tau_k < ... < tau_1 < b} prod_j exp(i beta_j tau_j), closed form.
// Partial sums with |beta| < zero_tol are treated as exactly zero (polynomial terms).
cplx simplex_exp_integral(const std::vector<double>& beta, double a, double b, double zero_tol = 1e-9);

// Adiabatic-limit outer groups. Slot 0 (later than every external, boundary t_1):
//   exp(i t sum Delta) prod_m i / (Delta_1 + ... + Delta_m)
// Slot n (earlier than every external, boundary t_n):
//   exp(i t sum Delta) prod_m (-i) / (Delta_m + ... + Delta_k)
cplx outer_limit_final(const std::vector<double>& deltas, double t);
cplx outer_limit_initial(const std::vector<double>& deltas, double t);

// Ordered integral of prod_j c(tau_j) exp(i Delta_j tau_j) over lo < tau_k < ... < tau_1 < hi
// by nested adaptive quadrature; lo may be -inf and hi may be +inf.
TimeValue slot_time_integral(const std::vector<double>& deltas, double lo, double hi,
                             const std::function<double(double)>& c, double rel_tol = 1e-10);

// Inner group with the band-limited cut-off attached to every vertex:
//   int_{t < tau_k < ... < tau_1 < t'} prod_j exp(i Delta_j tau_j) h(tau_j - tau'_j)
// The simplex is mapped to the unit cube (xi_j = (tau_j - t)/(t' - t)) before nesting.
TimeValue inner_time_factor(const TemporalCutoff& h, const std::vector<double>& deltas,
                            const std::vector<double>& tau_primes, double t, double tp, double rel_tol = 1e-10);

// Per-vertex spectral profile: the vertex time profile is c_j(tau) = int dw/2pi chat_j(w) e^{-i w tau}.
// Nodes cover the support [-Delta_h, Delta_h]; weights already include dw/2pi.
struct SpectralProfile {
    std::vector<double> nodes;
    std::vector<cplx> weights;
};

// Spectral profile of h(tau - tau') and of (chi_L * h)(tau).
SpectralProfile spectral_profile(const TemporalCutoff& h, double tau_prime);
SpectralProfile spectral_profile(const TemporalCutoff& h, const CutoffProfile& chi);

struct OuterTimeResult {
    cplx value = 0.0;
    double min_denominator = 0.0;  // smallest |partial sum| met at any node
};

// Outer group with band-limited vertex profiles, integrated spectrally:
// group_final = true is slot 0 (tau in [t, inf)), false is slot n (tau in (-inf, t]).
OuterTimeResult outer_time_factor_spectral(bool group_final, const std::vector<double>& deltas, double t,
                                           const std::vector<SpectralProfile>& prof);

// Same for an inner group between t and t'.
cplx inner_time_factor_spectral(const std::vector<double>& deltas, double t, double tp,
                                const std::vector<SpectralProfile>& prof);

// Checked entry point for the outer groups: requires h.delta() <= mass/(V+1).
OuterTimeResult outer_time_factor(bool group_final, const TemporalCutoff& h, const std::vector<double>& deltas,
                                  const std::vector<double>& tau_primes, double t, int V, double mass);

}  // namespace nlqft
