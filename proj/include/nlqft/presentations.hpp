#pragma once

#include "nlqft/evaluator.hpp"

#include <vector>

namespace nlqft {

// Four presentations of the adiabatic-limit Green function of one (n, V) class:
//   time, ordered     green_time_ordered (evaluator.hpp)
//   time, unordered   green_time_unordered: undirected graphs, sum over orientations and
//                     linear extensions of the induced order
//   energy, ordered   green_energy_ordered: totally ordered graphs, energy denominators
//   energy, unordered green_energy_unordered: undirected graphs, one propagator per line,
//                     energy loops done by residues
// Energies: int prod dt e^{i w.t} G(t) = 2 pi delta(sum w) g(w); callers pass sum w = 0.

// One undirected graph with labeled externals, carried by a totally ordered member of its
// class (externals in label order) whose routing fixes the reference direction of every line.
struct UndirectedGraph {
    const GraphSet::Entry* rep = nullptr;
    long aut = 1;       // automorphisms of the internal vertices fixing the externals
    long mult_den = 1;  // product of m! over unordered vertex pairs
    std::vector<std::vector<int>> adjacency;  // undirected multiplicities
};

class UndirectedSet {
public:
    explicit UndirectedSet(const GraphSet& gs);
    const std::vector<UndirectedGraph>& graphs() const { return graphs_; }

private:
    std::vector<UndirectedGraph> graphs_;
};

cplx green_time_unordered(const UndirectedSet& us, const std::vector<Vec3>& p, const std::vector<double>& t,
                          const AdiabaticModel& m);

// sigma empty: all sectors. Complex energies are allowed (the Laplace side of the check);
// at real energies every denominator is checked against eps_pole * mass.
cplx green_energy_ordered(const GraphSet& gs, const std::vector<Vec3>& p, const std::vector<cplx>& w,
                          const AdiabaticModel& m, const std::vector<int>& sigma = {}, double eps_pole = 1e-3);

// Real energies only.
cplx green_energy_unordered(const UndirectedSet& us, const std::vector<Vec3>& p, const std::vector<double>& w,
                            const AdiabaticModel& m, std::uint64_t eta_seed = 7);

struct LaplaceResult {
    cplx value = 0.0;
    double err = 0.0;
};
// int_{s >= 0} prod ds_k e^{i Z_k s_k} G_sigma(t(s)) with t_op[n-1] = 0 and
// t_op[k] = s_k + ... + s_{n-2}; Z has n-1 entries with Im Z > 0. Equals the ordered energy
// presentation of the same sector at w_op[0] = Z_0, w_op[k] = Z_k - Z_{k-1}, w_op[n-1] = -Z_{n-2}.
LaplaceResult laplace_sector(const GraphSet& gs, const std::vector<int>& sigma, const std::vector<Vec3>& p,
                             const std::vector<cplx>& Z, const AdiabaticModel& m, double rel_tol = 1e-7);
std::vector<cplx> laplace_energies(const std::vector<cplx>& Z);

}  // namespace nlqft
