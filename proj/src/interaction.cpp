#include "nlqft/interaction.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlqft {

Dispersion make_relativistic_dispersion(double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("dispersion: mass must be positive");
    Dispersion d;
    d.mass = mass;
    d.omega = [m2 = mass * mass](const Vec3& p) { return std::sqrt(m2 + norm2(p)); };
    return d;
}

cplx InteractionSpec::kernel(int lp, int l, const std::vector<Vec3>& out, const std::vector<Vec3>& in) const {
    auto it = kernels.find({lp, l});
    if (it == kernels.end()) return 0.0;
    return it->second(out, in);
}

std::vector<int> InteractionSpec::valences() const {
    std::vector<int> v;
    for (auto& [key, f] : kernels) v.push_back(key.first + key.second);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double InteractionSpec::leg_norm(const Vec3& p) const { return std::sqrt(volume_factor * 2.0 * dispersion(p)); }

InteractionSpec empty_interaction(double mass) {
    InteractionSpec s;
    s.name = "free";
    s.dispersion = make_relativistic_dispersion(mass);
    return s;
}

namespace {

double fact(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Product-Gaussian kappa, normalized to unit integral per leg.
KernelFn gaussian_kernel(int n, const Dispersion& disp, double ell, double coupling, double w) {
    return [n, disp, ell, coupling, w](const std::vector<Vec3>& out, const std::vector<Vec3>& in) -> cplx {
        double expo = 0.0, norm = 1.0;
        auto leg = [&](const Vec3& p) {
            double om = disp(p);
            expo += norm2(p) + om * om;
            norm *= std::sqrt(w * 2.0 * om);
        };
        for (auto& p : out) leg(p);
        for (auto& p : in) leg(p);
        return coupling * fact(n) * std::exp(-0.5 * ell * ell * expo) / norm;
    };
}

// kappa = delta(mean time) delta^3(mean position) exp(-sum (t_j-t)^2/2l^2) exp(-sum (x_j-x)^2/2l^2)
KernelFn qwp_kernel(int n, const Dispersion& disp, double ell, double coupling, double w) {
    const double a = 2.0 * kPi * ell * ell;
    const double pref = coupling * fact(n) * std::pow(double(n), 2.0) * std::pow(a, 2.0 * (n - 1));
    return [n, disp, ell, pref, w](const std::vector<Vec3>& out, const std::vector<Vec3>& in) -> cplx {
        Vec3 ptot{0, 0, 0};
        double p2 = 0.0, e2 = 0.0, etot = 0.0, norm = 1.0;
        auto leg = [&](const Vec3& p, double eps) {
            double om = disp(p);
            p2 += norm2(p);
            e2 += om * om;
            ptot = ptot + eps * p;
            etot += eps * om;
            norm *= std::sqrt(w * 2.0 * om);
        };
        for (auto& p : out) leg(p, 1.0);
        for (auto& p : in) leg(p, -1.0);
        double expo = (p2 - norm2(ptot) / n) + (e2 - etot * etot / n);
        return pref * std::exp(-0.5 * ell * ell * expo) / norm;
    };
}

}  // namespace

InteractionSpec preset_interaction(const std::string& name, const PresetParams& params) {
    InteractionSpec s;
    s.name = name;
    s.dispersion = make_relativistic_dispersion(params.mass);
    s.volume_factor = params.volume_factor;
    int n = 0;
    std::function<KernelFn(int)> make;
    if (name == "gaussian-phi3" || name == "gaussian-phi4") {
        n = name == "gaussian-phi3" ? 3 : 4;
        make = [&](int nn) { return gaussian_kernel(nn, s.dispersion, params.ell, params.coupling, params.volume_factor); };
    } else if (name == "quantum-wick-product") {
        n = params.legs;
        if (n < 1 || n > 6) throw std::invalid_argument("quantum-wick-product: legs must be in 1..6");
        make = [&](int nn) { return qwp_kernel(nn, s.dispersion, params.ell, params.coupling, params.volume_factor); };
    } else {
        throw std::invalid_argument("unknown interaction preset '" + name + "'");
    }
    if (!(params.ell > 0.0)) throw std::invalid_argument("preset: smearing length must be positive");
    for (int lp = 0; lp <= n; ++lp) s.kernels[{lp, n - lp}] = make(n);
    s.max_legs = n;
    return s;
}

FormFactor form_factor_from_kernels(const InteractionSpec& spec, const std::vector<int>& alpha) {
    FormFactor ff;
    ff.alpha = alpha;
    int lp = 0;
    for (int a : alpha) lp += a > 0;
    const int l = int(alpha.size()) - lp;
    if (!spec.has(lp, l)) {
        ff.eval = [](const std::vector<Vec3>&) { return cplx(0.0); };
        return ff;
    }
    ff.eval = [&spec, alpha, lp, l](const std::vector<Vec3>& k) {
        std::vector<Vec3> out, in;
        out.reserve(lp);
        in.reserve(l);
        double norm = 1.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            norm *= spec.leg_norm(k[j]);
            if (alpha[j] > 0)
                out.push_back(-k[j]);
            else
                in.push_back(k[j]);
        }
        return spec.kernel(lp, l, out, in) * norm;
    };
    return ff;
}

cplx kernel_from_form_factor(const InteractionSpec& spec, const FormFactor& ff, const std::vector<Vec3>& out,
                             const std::vector<Vec3>& in) {
    std::vector<Vec3> k;
    double norm = 1.0;
    for (auto& p : out) {
        k.push_back(-p);
        norm *= spec.leg_norm(p);
    }
    for (auto& p : in) {
        k.push_back(p);
        norm *= spec.leg_norm(p);
    }
    return ff(k) / norm;
}

TemporalCutoff::TemporalCutoff(double delta) : delta_(delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("temporal cut-off: band limit must be positive");
    using GL = boost::math::quadrature::gauss<double, 20>;
    const int panels = 16;
    const double width = 2.0 * delta / panels;
    for (int p = 0; p < panels; ++p) {
        double c = -delta + (p + 0.5) * width;
        auto add = [&](double x, double wt) {
            double om = c + 0.5 * width * x;
            nodes_.push_back(om);
            weights_.push_back(0.5 * width * wt * hhat(om) / (2.0 * kPi));
        };
        const auto& xs = GL::abscissa();
        const auto& ws = GL::weights();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            add(xs[i], ws[i]);
            if (xs[i] != 0.0) add(-xs[i], ws[i]);
        }
    }
}

double TemporalCutoff::hhat(double w) const {
    double x = w / delta_;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double TemporalCutoff::h(double t) const {
    using GL = boost::math::quadrature::gauss<double, 20>;
    // past the panel cap the bump transform is below exp(-sqrt(2 * 16384)); report 0 instead of aliasing
    const double need = std::ceil(std::abs(t) * 2.0 * delta_ / 8.0);
    if (need > 4096.0) return 0.0;
    const int panels = std::max(16, int(need));
    const double width = 2.0 * delta_ / panels;
    double s = 0.0;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    for (int p = 0; p < panels; ++p) {
        double c = -delta_ + (p + 0.5) * width;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (int sgn : {1, -1}) {
                if (sgn < 0 && xs[i] == 0.0) continue;
                double om = c + sgn * 0.5 * width * xs[i];
                s += 0.5 * width * ws[i] * hhat(om) * std::cos(om * t);
            }
        }
    }
    return s / (2.0 * kPi);
}

double CutoffProfile::spatial(const Vec3& k) const {
    double s = sigma_k / L;
    return std::pow(2.0 * kPi * s * s, -1.5) * std::exp(-0.5 * norm2(k) / (s * s));
}

double CutoffProfile::temporal(double t) const {
    double x = t / (L * sigma_t);
    if (time == Time::Gaussian) return std::exp(-0.5 * x * x);
    return 1.0 / std::cosh(x);
}

double CutoffProfile::temporal_ft(double w) const {
    double s = L * sigma_t;
    if (time == Time::Gaussian) return std::sqrt(2.0 * kPi) * s * std::exp(-0.5 * s * s * w * w);
    return kPi * s / std::cosh(0.5 * kPi * s * w);
}

CutoffProfile CutoffProfile::scaled(double L_new) const {
    CutoffProfile c = *this;
    c.L = L_new;
    return c;
}

CutoffProfile gaussian_profile(double sigma_k, double sigma_t) {
    CutoffProfile c;
    c.name = "gaussian";
    c.sigma_k = sigma_k;
    c.sigma_t = sigma_t;
    c.time = CutoffProfile::Time::Gaussian;
    return c;
}

CutoffProfile sech_profile(double sigma_k, double sigma_t) {
    CutoffProfile c = gaussian_profile(sigma_k, sigma_t);
    c.name = "sech";
    c.time = CutoffProfile::Time::Sech;
    return c;
}

double convolved_temporal(const CutoffProfile& prof, const TemporalCutoff& h, double t) {
    const auto& nodes = h.spectral_nodes();
    const auto& wts = h.spectral_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += wts[i] * prof.temporal_ft(nodes[i]) * std::cos(nodes[i] * t);
    return s;
}

}  // namespace nlqft
