#include "nlqft/fock.hpp"

#include "nlqft/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlqft {

int MomentumGrid::index_of(const Vec3& p, double tol) const {
    for (int i = 0; i < size(); ++i)
        if (norm2(points[i] - p) <= tol * tol) return i;
    return -1;
}

int MomentumGrid::negate(int i) const {
    int j = index_of(-points[i]);
    if (j < 0) throw std::logic_error("momentum grid is not symmetric");
    return j;
}

MomentumGrid make_line_grid(int half, double dp, double dv, double volume_factor) {
    if (half < 0 || !(dp > 0.0)) throw std::invalid_argument("line grid: need half >= 0 and dp > 0");
    MomentumGrid g;
    for (int k = -half; k <= half; ++k) g.points.push_back({k * dp, 0.0, 0.0});
    g.dv = dv > 0.0 ? dv : dp * dp * dp;
    g.volume_factor = volume_factor;
    return g;
}

namespace {
void multisets(int G, int n, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (int(cur.size()) == n) {
        out.push_back(cur);
        return;
    }
    for (int g = start; g < G; ++g) {
        cur.push_back(g);
        multisets(G, n, g, cur, out);
        cur.pop_back();
    }
}

double lfact(int n) { return double(factorial(unsigned(n))); }

// prod_g m_g! for a sorted multiset
double occupation_factorials(const std::vector<int>& m) {
    double f = 1.0;
    std::size_t i = 0;
    while (i < m.size()) {
        std::size_t j = i;
        while (j < m.size() && m[j] == m[i]) ++j;
        f *= lfact(int(j - i));
        i = j;
    }
    return f;
}
}  // namespace

FockSpace::FockSpace(MomentumGrid grid, int nmax) : grid_(std::move(grid)), nmax_(nmax) {
    if (nmax < 0) throw std::invalid_argument("FockSpace: nmax must be >= 0");
    if (grid_.size() == 0) throw std::invalid_argument("FockSpace: empty grid");
    for (int i = 0; i < grid_.size(); ++i) grid_.negate(i);
    for (int n = 0; n <= nmax; ++n) {
        std::vector<int> cur;
        multisets(grid_.size(), n, 0, cur, states_);
    }
    for (int i = 0; i < dim(); ++i) lookup_[states_[i]] = i;
}

int FockSpace::index(const std::vector<int>& m) const {
    auto it = lookup_.find(m);
    return it == lookup_.end() ? -1 : it->second;
}

double FockSpace::energy(int i, const Dispersion& disp) const {
    double e = 0.0;
    for (int g : states_[i]) e += disp(grid_.points[g]);
    return e;
}

KernelOperator::KernelOperator(int lp_, int l_, int G_) : lp(lp_), l(l_), G(G_) {
    std::size_t n = 1;
    for (int k = 0; k < lp + l; ++k) n *= std::size_t(G);
    amp.assign(n, 0.0);
}

std::size_t KernelOperator::flat(const std::vector<int>& out, const std::vector<int>& in) const {
    std::size_t f = 0;
    for (int x : out) f = f * G + x;
    for (int x : in) f = f * G + x;
    return f;
}

namespace {
void unflat(std::size_t f, int lp, int l, int G, std::vector<int>& out, std::vector<int>& in) {
    out.assign(lp, 0);
    in.assign(l, 0);
    for (int k = l - 1; k >= 0; --k) {
        in[k] = int(f % G);
        f /= G;
    }
    for (int k = lp - 1; k >= 0; --k) {
        out[k] = int(f % G);
        f /= G;
    }
}
}  // namespace

void KernelOperator::for_each(const std::function<void(const std::vector<int>&, const std::vector<int>&, cplx&)>& f) {
    std::vector<int> o, i;
    for (std::size_t k = 0; k < amp.size(); ++k) {
        unflat(k, lp, l, G, o, i);
        f(o, i, amp[k]);
    }
}

void KernelOperator::for_each(
    const std::function<void(const std::vector<int>&, const std::vector<int>&, cplx)>& f) const {
    std::vector<int> o, i;
    for (std::size_t k = 0; k < amp.size(); ++k) {
        unflat(k, lp, l, G, o, i);
        f(o, i, amp[k]);
    }
}

KernelOperator symmetrize(const KernelOperator& A) {
    KernelOperator S(A.lp, A.l, A.G);
    const double norm = 1.0 / (lfact(A.lp) * lfact(A.l));
    A.for_each([&](const std::vector<int>& o, const std::vector<int>& i, cplx v) {
        if (v == 0.0) return;
        std::vector<int> po(A.lp), pi(A.l);
        std::vector<int> so(A.lp), si(A.l);
        for (int k = 0; k < A.lp; ++k) po[k] = k;
        do {
            for (int k = 0; k < A.l; ++k) pi[k] = k;
            do {
                for (int k = 0; k < A.lp; ++k) so[k] = o[po[k]];
                for (int k = 0; k < A.l; ++k) si[k] = i[pi[k]];
                S.at(so, si) += v * norm;
            } while (std::next_permutation(pi.begin(), pi.end()));
        } while (std::next_permutation(po.begin(), po.end()));
    });
    return S;
}

KernelOperator adjoint(const KernelOperator& A) {
    KernelOperator B(A.l, A.lp, A.G);
    A.for_each([&](const std::vector<int>& o, const std::vector<int>& i, cplx v) { B.at(i, o) = std::conj(v); });
    return B;
}

Matrix second_quantize(const KernelOperator& A, const FockSpace& space) {
    const int G = space.grid().size();
    if (A.G != G) throw std::invalid_argument("second_quantize: kernel and space use different grids");
    if (A.l > space.nmax() || A.lp > space.nmax())
        throw std::invalid_argument("second_quantize: leg count exceeds nmax");
    const double dv = space.grid().dv;
    Matrix M = Matrix::Zero(space.dim(), space.dim());
    std::vector<int> xo(A.lp), target;
    for (int col = 0; col < space.dim(); ++col) {
        const auto& m = space.state(col);
        const int n = int(m.size());
        const int np = n - A.l + A.lp;
        if (n < A.l || np > space.nmax()) continue;
        const double Nm = std::sqrt(occupation_factorials(m) / lfact(n)) * std::pow(dv, -0.5 * n);
        const double c = std::sqrt(lfact(n) * lfact(np)) / lfact(n - A.l);
        std::vector<int> seq = m;
        do {
            std::vector<int> xi(seq.begin(), seq.begin() + A.l);
            std::size_t total = A.amp.size() / std::max<std::size_t>(1, std::size_t(std::pow(G, A.l)));
            for (std::size_t f = 0; f < total; ++f) {
                std::size_t g = f;
                for (int k = A.lp - 1; k >= 0; --k) {
                    xo[k] = int(g % G);
                    g /= G;
                }
                cplx a = A.at(xo, xi);
                if (a == 0.0) continue;
                target = xo;
                target.insert(target.end(), seq.begin() + A.l, seq.end());
                std::sort(target.begin(), target.end());
                int row = space.index(target);
                const double Nmp = std::sqrt(occupation_factorials(target) / lfact(np)) * std::pow(dv, -0.5 * np);
                M(row, col) += c * std::pow(dv, np) * Nmp * std::pow(dv, A.l) * a * Nm;
            }
        } while (std::next_permutation(seq.begin(), seq.end()));
    }
    return M;
}

Matrix creation(const FockSpace& space, int k) {
    Matrix M = Matrix::Zero(space.dim(), space.dim());
    const double s = 1.0 / std::sqrt(space.grid().dv);
    for (int col = 0; col < space.dim(); ++col) {
        auto m = space.state(col);
        if (int(m.size()) >= space.nmax()) continue;
        int occ = int(std::count(m.begin(), m.end(), k));
        m.insert(std::upper_bound(m.begin(), m.end(), k), k);
        M(space.index(m), col) = s * std::sqrt(double(occ + 1));
    }
    return M;
}

Matrix annihilation(const FockSpace& space, int k) { return creation(space, k).adjoint(); }

Matrix second_quantize_ladder(const KernelOperator& A, const FockSpace& space) {
    const int G = space.grid().size();
    const double dv = space.grid().dv;
    std::vector<Matrix> ap(G), am(G);
    for (int k = 0; k < G; ++k) {
        ap[k] = creation(space, k);
        am[k] = annihilation(space, k);
    }
    Matrix M = Matrix::Zero(space.dim(), space.dim());
    A.for_each([&](const std::vector<int>& o, const std::vector<int>& i, cplx v) {
        if (v == 0.0) return;
        Matrix P = Matrix::Identity(space.dim(), space.dim());
        for (int x : o) P = P * ap[x];
        for (int x : i) P = P * am[x];
        M += std::pow(dv, A.lp + A.l) * v * P;
    });
    return M;
}

std::vector<WickTerm> wick_product(const KernelOperator& A0, const KernelOperator& B0, const MomentumGrid& grid) {
    if (A0.G != grid.size() || B0.G != grid.size()) throw std::invalid_argument("wick_product: grid mismatch");
    // second quantization only sees the symmetric part, so contract that
    const KernelOperator A = symmetrize(A0), B = symmetrize(B0);
    const int G = grid.size();
    std::vector<WickTerm> out;
    for (int r = 0; r <= std::min(A.l, B.lp); ++r) {
        KernelOperator C(A.lp + B.lp - r, A.l - r + B.l, G);
        std::size_t nk = 1;
        for (int q = 0; q < r; ++q) nk *= G;
        std::vector<int> kk(r), ain, bout;
        C.for_each([&](const std::vector<int>& o, const std::vector<int>& i, cplx& val) {
            std::vector<int> oA(o.begin(), o.begin() + A.lp), oB(o.begin() + A.lp, o.end());
            std::vector<int> iA(i.begin(), i.begin() + (A.l - r)), iB(i.begin() + (A.l - r), i.end());
            cplx s = 0.0;
            for (std::size_t f = 0; f < nk; ++f) {
                std::size_t g = f;
                for (int q = r - 1; q >= 0; --q) {
                    kk[q] = int(g % G);
                    g /= G;
                }
                ain = iA;
                ain.insert(ain.end(), kk.begin(), kk.end());
                bout = kk;
                bout.insert(bout.end(), oB.begin(), oB.end());
                s += A.at(oA, ain) * B.at(bout, iB);
            }
            val = s * std::pow(grid.dv, r);
        });
        out.push_back({double(contraction_factor(unsigned(A.l), unsigned(r), unsigned(B.lp))), r, symmetrize(C)});
    }
    return out;
}

KernelOperator interaction_kernel(const InteractionSpec& spec, int lp, int l, const MomentumGrid& grid,
                                  const std::function<double(const Vec3&)>& spatial, double chi_t, double t) {
    KernelOperator A(lp, l, grid.size());
    if (!spec.has(lp, l)) return A;
    const double w = 1.0 / (lfact(lp) * lfact(l));
    std::vector<Vec3> po(lp), pi(l);
    A.for_each([&](const std::vector<int>& o, const std::vector<int>& i, cplx& val) {
        Vec3 defect{0, 0, 0};
        double de = 0.0;
        for (int k = 0; k < lp; ++k) {
            po[k] = grid.points[o[k]];
            defect = defect + po[k];
            de += spec.dispersion(po[k]);
        }
        for (int k = 0; k < l; ++k) {
            pi[k] = grid.points[i[k]];
            defect = defect - pi[k];
            de -= spec.dispersion(pi[k]);
        }
        val = w * spec.kernel(lp, l, po, pi) * spatial(defect) * chi_t * std::exp(cplx(0.0, de * t));
    });
    return A;
}

Matrix hamiltonian_matrix(const InteractionSpec& spec, const std::function<double(const Vec3&)>& spatial,
                          double chi_t, double t, const FockSpace& space) {
    Matrix H = Matrix::Zero(space.dim(), space.dim());
    for (auto& [key, f] : spec.kernels) {
        if (key.first > space.nmax() || key.second > space.nmax())
            throw std::invalid_argument("hamiltonian_matrix: kernel legs exceed nmax");
        H += second_quantize(interaction_kernel(spec, key.first, key.second, space.grid(), spatial, chi_t, t), space);
    }
    return H;
}

}  // namespace nlqft
