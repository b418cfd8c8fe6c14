#include "nlqft/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nlqft {

using nlohmann::json;

namespace {

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "must be a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

long get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "must be an integer");
    return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "must be a string");
    return j.get<std::string>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path, "must be an array of 3 numbers");
    Vec3 v;
    for (int c = 0; c < 3; ++c) v[c] = get_number(j[c], path + "[" + std::to_string(c) + "]");
    return v;
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "must be an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

std::vector<Vec3> get_vec3s(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "must be an array of 3-vectors");
    std::vector<Vec3> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_vec3(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

// optional member readers
template <class F>
void opt(const json& j, const char* key, F&& f) {
    auto it = j.find(key);
    if (it != j.end()) f(*it);
}

void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

}  // namespace

PresetParams RunConfig::preset_params() const {
    PresetParams p;
    p.mass = mass;
    p.ell = ell;
    p.coupling = coupling;
    p.legs = legs;
    p.volume_factor = volume_factor;
    return p;
}

CutoffProfile RunConfig::cutoff_profile() const {
    return profile == "sech" ? sech_profile(sigma_k, sigma_t) : gaussian_profile(sigma_k, sigma_t);
}

long fock_dimension(int G, int nmax) {
    // multisets of size k from G items: C(G+k-1, k)
    long total = 0;
    for (int k = 0; k <= nmax; ++k) {
        double c = 1.0;
        for (int i = 1; i <= k; ++i) c = c * (G + i - 1) / i;
        total += long(std::llround(c));
    }
    return total;
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("not valid JSON (") + e.what() + ")");
    }
    check_keys(root, "", {"model", "order", "correlator", "cutoff", "quadrature", "oracle", "scan", "seed", "threads"});
    RunConfig c;
    require(root.contains("model"), "model", "missing");
    {
        const json& m = root["model"];
        check_keys(m, "model", {"preset", "mass", "ell", "coupling", "legs", "volume_factor"});
        require(m.contains("preset"), "model.preset", "missing");
        c.preset = get_string(m["preset"], "model.preset");
        require(c.preset == "gaussian-phi3" || c.preset == "gaussian-phi4" || c.preset == "quantum-wick-product",
                "model.preset", "unknown preset '" + c.preset + "'");
        opt(m, "mass", [&](const json& v) { c.mass = get_number(v, "model.mass"); });
        opt(m, "ell", [&](const json& v) { c.ell = get_number(v, "model.ell"); });
        opt(m, "coupling", [&](const json& v) { c.coupling = get_number(v, "model.coupling"); });
        opt(m, "legs", [&](const json& v) { c.legs = int(get_int(v, "model.legs")); });
        opt(m, "volume_factor", [&](const json& v) { c.volume_factor = get_number(v, "model.volume_factor"); });
        require(c.mass > 0, "model.mass", "must be positive");
        require(c.ell > 0, "model.ell", "must be positive");
        require(c.legs >= 1 && c.legs <= 6, "model.legs", "must be in 1..6");
        require(c.volume_factor > 0, "model.volume_factor", "must be positive");
        if (c.preset == "gaussian-phi3") c.legs = 3;
        if (c.preset == "gaussian-phi4") c.legs = 4;
    }
    opt(root, "order", [&](const json& v) { c.order = int(get_int(v, "order")); });
    require(c.order >= 0 && c.order <= 4, "order", "must be in 0..4");

    opt(root, "correlator", [&](const json& k) {
        check_keys(k, "correlator", {"kind", "mode", "n", "alpha", "points"});
        opt(k, "kind", [&](const json& v) { c.kind = get_string(v, "correlator.kind"); });
        opt(k, "mode", [&](const json& v) { c.mode = get_string(v, "correlator.mode"); });
        opt(k, "n", [&](const json& v) { c.n = int(get_int(v, "correlator.n")); });
        opt(k, "alpha", [&](const json& v) {
            require(v.is_array(), "correlator.alpha", "must be an array of +1/-1");
            for (std::size_t i = 0; i < v.size(); ++i) {
                std::string f = "correlator.alpha[" + std::to_string(i) + "]";
                long a = get_int(v[i], f);
                require(a == 1 || a == -1, f, "must be +1 or -1");
                c.alpha.push_back(int(a));
            }
        });
        opt(k, "points", [&](const json& v) {
            require(v.is_array(), "correlator.points", "must be an array");
            for (std::size_t i = 0; i < v.size(); ++i) {
                std::string f = "correlator.points[" + std::to_string(i) + "]";
                check_keys(v[i], f, {"times", "momenta", "grid_momenta"});
                ExternalPoint pt;
                require(v[i].contains("times"), f + ".times", "missing");
                pt.times = get_numbers(v[i]["times"], f + ".times");
                opt(v[i], "momenta", [&](const json& m) { pt.momenta = get_vec3s(m, f + ".momenta"); });
                opt(v[i], "grid_momenta", [&](const json& m) {
                    require(m.is_array(), f + ".grid_momenta", "must be an array of grid indices");
                    for (std::size_t q = 0; q < m.size(); ++q)
                        pt.grid_momenta.push_back(int(get_int(m[q], f + ".grid_momenta[" + std::to_string(q) + "]")));
                });
                c.points.push_back(std::move(pt));
            }
        });
    });
    require(c.kind == "wightman" || c.kind == "green", "correlator.kind", "must be 'wightman' or 'green'");
    require(c.mode == "grid" || c.mode == "adiabatic", "correlator.mode", "must be 'grid' or 'adiabatic'");
    require(c.n >= 0 && c.n <= 6, "correlator.n", "must be in 0..6");
    require(c.alpha.empty() || int(c.alpha.size()) == c.n, "correlator.alpha", "needs n entries");

    opt(root, "cutoff", [&](const json& k) {
        check_keys(k, "cutoff", {"delta", "delta_fraction", "profile", "sigma_k", "sigma_t", "L"});
        require(!(k.contains("delta") && k.contains("delta_fraction")), "cutoff.delta",
                "give either delta or delta_fraction");
        opt(k, "delta", [&](const json& v) { c.delta = get_number(v, "cutoff.delta"); });
        opt(k, "delta_fraction", [&](const json& v) {
            double f = get_number(v, "cutoff.delta_fraction");
            require(f > 0, "cutoff.delta_fraction", "must be positive");
            c.delta = f * c.mass / (c.order + 1);
        });
        opt(k, "profile", [&](const json& v) { c.profile = get_string(v, "cutoff.profile"); });
        opt(k, "sigma_k", [&](const json& v) { c.sigma_k = get_number(v, "cutoff.sigma_k"); });
        opt(k, "sigma_t", [&](const json& v) { c.sigma_t = get_number(v, "cutoff.sigma_t"); });
        opt(k, "L", [&](const json& v) { c.Ls = get_numbers(v, "cutoff.L"); });
    });
    require(c.delta >= 0, "cutoff.delta", "must be non-negative");
    {
        const double bound = c.mass / (c.order + 1);
        if (c.delta > bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "band limit " << c.delta << " exceeds M/(V+1) = " << bound;
            throw ConfigError("cutoff.delta", os.str());
        }
    }
    require(c.profile == "gaussian" || c.profile == "sech", "cutoff.profile", "must be 'gaussian' or 'sech'");
    require(c.sigma_k > 0, "cutoff.sigma_k", "must be positive");
    require(c.sigma_t > 0, "cutoff.sigma_t", "must be positive");
    require(!c.Ls.empty(), "cutoff.L", "must not be empty");
    for (std::size_t i = 0; i < c.Ls.size(); ++i) {
        require(c.Ls[i] > 0, "cutoff.L", "entries must be positive");
        if (i) require(c.Ls[i] > c.Ls[i - 1], "cutoff.L", "entries must increase");
    }

    opt(root, "quadrature", [&](const json& k) {
        check_keys(k, "quadrature", {"gh_order", "rel_tol"});
        opt(k, "gh_order", [&](const json& v) { c.gh_order = int(get_int(v, "quadrature.gh_order")); });
        opt(k, "rel_tol", [&](const json& v) { c.rel_tol = get_number(v, "quadrature.rel_tol"); });
    });
    require(c.gh_order >= 4 && c.gh_order <= 40, "quadrature.gh_order", "must be in 4..40");
    require(c.rel_tol > 0 && c.rel_tol <= 1e-2, "quadrature.rel_tol", "must be in (0, 1e-2]");

    opt(root, "oracle", [&](const json& k) {
        check_keys(k, "oracle", {"grid_half", "dp", "nmax", "max_dim", "panels", "volume_factor"});
        opt(k, "grid_half", [&](const json& v) { c.grid_half = int(get_int(v, "oracle.grid_half")); });
        opt(k, "dp", [&](const json& v) { c.grid_dp = get_number(v, "oracle.dp"); });
        opt(k, "nmax", [&](const json& v) { c.nmax = int(get_int(v, "oracle.nmax")); });
        opt(k, "max_dim", [&](const json& v) { c.max_dim = get_int(v, "oracle.max_dim"); });
        opt(k, "panels", [&](const json& v) { c.panels = int(get_int(v, "oracle.panels")); });
        opt(k, "volume_factor", [&](const json& v) { c.oracle_volume_factor = get_number(v, "oracle.volume_factor"); });
    });
    require(c.grid_half >= 1 && c.grid_half <= 8, "oracle.grid_half", "must be in 1..8");
    require(c.grid_dp > 0, "oracle.dp", "must be positive");
    require(c.nmax >= 0 && c.nmax <= 10, "oracle.nmax", "must be in 0..10");
    require(c.max_dim > 0, "oracle.max_dim", "must be positive");
    require(c.panels >= 2 && c.panels <= 400, "oracle.panels", "must be in 2..400");
    require(!c.oracle_volume_factor || *c.oracle_volume_factor > 0, "oracle.volume_factor", "must be positive");

    opt(root, "scan", [&](const json& k) {
        check_keys(k, "scan", {"slot", "times", "momenta", "f_center", "f_width"});
        opt(k, "slot", [&](const json& v) { c.scan_slot = int(get_int(v, "scan.slot")); });
        opt(k, "times", [&](const json& v) { c.scan_times = get_numbers(v, "scan.times"); });
        opt(k, "momenta", [&](const json& v) { c.scan_momenta = get_vec3s(v, "scan.momenta"); });
        opt(k, "f_center", [&](const json& v) { c.f_center = get_vec3(v, "scan.f_center"); });
        opt(k, "f_width", [&](const json& v) { c.f_width = get_number(v, "scan.f_width"); });
        require(int(c.scan_times.size()) == c.n, "scan.times", "needs n entries");
        require(int(c.scan_momenta.size()) + 1 == c.n, "scan.momenta", "needs n-1 entries (the last momentum is smeared)");
        require(c.scan_slot >= 0 && c.scan_slot <= c.n, "scan.slot", "must be in 0..n");
        require(c.f_width > 0, "scan.f_width", "must be positive");
    });

    opt(root, "seed", [&](const json& v) {
        require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long>() >= 0), "seed",
                "must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    });
    opt(root, "threads", [&](const json& v) { c.threads = int(get_int(v, "threads")); });
    require(c.threads >= 1 && c.threads <= 256, "threads", "must be in 1..256");

    // per-point checks
    const int G = 2 * c.grid_half + 1;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& pt = c.points[i];
        std::string f = "correlator.points[" + std::to_string(i) + "]";
        require(int(pt.times.size()) == c.n, f + ".times", "needs n entries");
        if (c.mode == "grid") {
            require(int(pt.grid_momenta.size()) == c.n, f + ".grid_momenta", "needs n grid indices in grid mode");
            for (int q : pt.grid_momenta) require(q >= 0 && q < G, f + ".grid_momenta", "index outside the grid");
        } else {
            require(int(pt.momenta.size()) == c.n, f + ".momenta", "needs n momenta in adiabatic mode");
            Vec3 s{0, 0, 0};
            double scale = 1.0;
            for (auto& p : pt.momenta) {
                s = s + p;
                scale += std::sqrt(norm2(p));
            }
            require(std::sqrt(norm2(s)) <= 1e-12 * scale, f + ".momenta", "must sum to zero");
        }
        for (std::size_t a = 0; a < pt.times.size(); ++a)
            for (std::size_t b = a + 1; b < pt.times.size(); ++b)
                if (c.mode == "adiabatic" || c.kind == "green")
                    require(pt.times[a] != pt.times[b], f + ".times", "external times must be pairwise distinct");
        if (c.mode == "adiabatic" && c.kind == "wightman")
            for (std::size_t a = 0; a + 1 < pt.times.size(); ++a)
                require(pt.times[a] > pt.times[a + 1], f + ".times", "must decrease in operator order");
    }
    if (c.kind == "wightman" && !c.points.empty())
        require(int(c.alpha.size()) == c.n, "correlator.alpha", "required for wightman requests");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["model"] = {{"preset", c.preset}, {"mass", c.mass}, {"ell", c.ell}, {"coupling", c.coupling},
                  {"legs", c.legs}, {"volume_factor", c.volume_factor}};
    j["order"] = c.order;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (auto& p : c.points) {
        nlohmann::ordered_json q;
        q["times"] = p.times;
        q["momenta"] = p.momenta;
        q["grid_momenta"] = p.grid_momenta;
        pts.push_back(q);
    }
    j["correlator"] = {{"kind", c.kind}, {"mode", c.mode}, {"n", c.n}, {"alpha", c.alpha}, {"points", pts}};
    j["cutoff"] = {{"delta", c.delta}, {"profile", c.profile}, {"sigma_k", c.sigma_k}, {"sigma_t", c.sigma_t}, {"L", c.Ls}};
    j["quadrature"] = {{"gh_order", c.gh_order}, {"rel_tol", c.rel_tol}};
    j["oracle"] = {{"grid_half", c.grid_half}, {"dp", c.grid_dp}, {"nmax", c.nmax}, {"max_dim", c.max_dim},
                   {"panels", c.panels}, {"volume_factor", c.oracle_volume_factor.value_or(c.volume_factor)}};
    j["scan"] = {{"slot", c.scan_slot}, {"times", c.scan_times}, {"momenta", c.scan_momenta},
                 {"f_center", c.f_center}, {"f_width", c.f_width}};
    j["seed"] = c.seed;
    return j.dump();
}

}  // namespace nlqft
