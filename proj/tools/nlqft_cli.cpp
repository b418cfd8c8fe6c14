// nlqft: batch front end. One subcommand per run, JSON config in, JSON lines out.
//
//   nlqft graphs  --config run.json            list the totally ordered graphs of order V
//   nlqft eval    --config run.json --out r.jsonl
//   nlqft compare --config run.json            grid engine against the Fock-space oracle
//   nlqft scan    --config run.json            cut-off values for a list of L, V = 1 tree
//
// Exit codes: 0 ok, 1 numeric failure (records still written), 2 config error.
// elapsed_ms is written as 0 unless --timing is given, so that output bytes only depend
// on config and seed.

#include "nlqft/config.hpp"
#include "nlqft/evaluator.hpp"
#include "nlqft/fock.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>

using namespace nlqft;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct Options {
    std::string config_path;
    std::string out_path;
    std::int64_t seed = -1;
    int threads = 0;
    bool timing = false;
};

std::string run_id(const std::string& cmd, const RunConfig& c) {
    // FNV-1a over the canonical config
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : cmd + "|" + canonical_config(c)) {
        h ^= std::uint8_t(ch);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class Writer {
public:
    Writer(const std::string& path, std::string run, bool timing) : run_(std::move(run)), timing_(timing) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("--out", "cannot write '" + path + "'");
        }
        start_ = std::chrono::steady_clock::now();
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

    ojson base(const std::string& record, int order, const std::string& graph_id, const std::string& mode) {
        ojson j;
        j["schema_version"] = kSchemaVersion;
        j["run_id"] = run_;
        j["record"] = record;
        j["order"] = order;
        j["graph_id"] = graph_id;
        j["mode"] = mode;
        return j;
    }
    void value(ojson& j, cplx v, double err) {
        j["re"] = v.real();
        j["im"] = v.imag();
        j["abs_err"] = err;
    }
    void emit(ojson j) {
        j["elapsed_ms"] = timing_ ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count()
                                  : 0.0;
        os() << j.dump() << '\n';
    }
    void error(ojson j, const std::string& what) {
        j["re"] = nullptr;
        j["im"] = nullptr;
        j["abs_err"] = nullptr;
        j["error"] = what;
        failures_ += 1;
        emit(std::move(j));
    }
    int failures() const { return failures_; }

private:
    std::string run_;
    bool timing_;
    std::unique_ptr<std::ofstream> file_;
    std::chrono::steady_clock::time_point start_;
    int failures_ = 0;
};

std::string alpha_text(const std::vector<int>& a) {
    std::string s;
    for (int x : a) s += x > 0 ? '+' : '-';
    return s;
}

// the grid engine and the oracle share these
struct GridSetup {
    InteractionSpec spec;
    MomentumGrid grid;
    CutoffProfile prof;
    GridModel model;
};

std::unique_ptr<GridSetup> grid_setup(const RunConfig& c, double volume_factor) {
    auto s = std::make_unique<GridSetup>();
    s->spec = preset_interaction(c.preset, c.preset_params());
    s->grid = make_line_grid(c.grid_half, c.grid_dp, 0.0, volume_factor);
    s->prof = c.cutoff_profile().scaled(c.Ls.front());
    s->model.spec = &s->spec;
    s->model.grid = &s->grid;
    CutoffProfile prof = s->prof;
    s->model.spatial = [prof](const Vec3& k) { return prof.spatial(k); };
    s->model.temporal = [prof](double t) { return prof.temporal(t); };
    s->model.rel_tol = c.rel_tol;
    s->model.threads = c.threads;
    return s;
}

// ------------------------------------------------------------------------------- graphs

int cmd_graphs(const RunConfig& c, Writer& w) {
    InteractionSpec spec = preset_interaction(c.preset, c.preset_params());
    std::vector<std::vector<int>> alphas = c.alpha.empty() ? sign_vectors(c.n) : std::vector<std::vector<int>>{c.alpha};
    long count = 0;
    for (auto& a : alphas)
        for (auto& v : slot_distributions(c.n, c.order))
            for (auto& g : enumerate_graphs(make_query(spec, a, v))) {
                w.os() << "# " << count << " key " << topology_key(g) << '\n' << serialize(g);
                ++count;
            }
    w.os() << count << " graphs\n";
    return 0;
}

// --------------------------------------------------------------------------------- eval

void eval_grid(const RunConfig& c, Writer& w) {
    auto s = grid_setup(c, c.volume_factor);
    for (std::size_t pi = 0; pi < c.points.size(); ++pi) {
        const auto& pt = c.points[pi];
        // green: time-sorted operator order, summed over sign vectors
        std::vector<std::pair<std::vector<int>, GridPoint>> parts;
        if (c.kind == "wightman") {
            parts.push_back({c.alpha, GridPoint{c.alpha, pt.times, pt.grid_momenta}});
        } else {
            std::vector<int> sigma(c.n);
            std::iota(sigma.begin(), sigma.end(), 0);
            std::stable_sort(sigma.begin(), sigma.end(), [&](int a, int b) { return pt.times[a] > pt.times[b]; });
            for (auto& a : sign_vectors(c.n)) {
                GridPoint gp{a, {}, {}};
                for (int k = 0; k < c.n; ++k) {
                    gp.times.push_back(pt.times[sigma[k]]);
                    gp.momenta.push_back(pt.grid_momenta[sigma[k]]);
                }
                parts.push_back({a, gp});
            }
        }
        std::vector<cplx> tot(c.order + 1, 0.0);
        std::vector<double> err(c.order + 1, 0.0);
        bool failed = false;
        for (auto& [a, gp] : parts) {
            try {
                CorrelatorResult r = correlator_grid(gp, c.order, s->model);
                for (auto& gc : r.graphs) {
                    ojson j = w.base("graph", gc.order, alpha_text(a) + "/V" + std::to_string(gc.order) + "." +
                                                            std::to_string(gc.index), "grid");
                    j["point"] = pi;
                    j["key"] = gc.key;
                    w.value(j, gc.value, gc.err);
                    w.emit(j);
                }
                for (int k = 0; k <= c.order; ++k) {
                    tot[k] += r.value[k];
                    err[k] += r.err[k];
                }
            } catch (const std::exception& e) {
                ojson j = w.base("total", -1, alpha_text(a), "grid");
                j["point"] = pi;
                w.error(j, e.what());
                failed = true;
            }
        }
        if (failed) continue;
        for (int k = 0; k <= c.order; ++k) {
            ojson j = w.base("total", k, "total", "grid");
            j["point"] = pi;
            w.value(j, tot[k], err[k]);
            w.emit(j);
        }
    }
}

void eval_adiabatic(const RunConfig& c, Writer& w) {
    InteractionSpec spec = preset_interaction(c.preset, c.preset_params());
    AdiabaticModel fine, coarse;
    fine.spec = coarse.spec = &spec;
    fine.ell = coarse.ell = c.ell;
    fine.threads = coarse.threads = c.threads;
    fine.gh_order = c.gh_order;
    coarse.gh_order = c.gh_order - 2;
    std::vector<std::unique_ptr<GraphSet>> sets(c.order + 1);
    std::vector<std::string> set_error(c.order + 1);
    for (int k = 0; k <= c.order; ++k) {
        try {
            sets[k] = std::make_unique<GraphSet>(spec, c.n, k, c.seed);
        } catch (const std::exception& e) {
            set_error[k] = e.what();
        }
    }
    for (std::size_t pi = 0; pi < c.points.size(); ++pi) {
        const auto& pt = c.points[pi];
        std::vector<int> sigma(c.n);
        std::iota(sigma.begin(), sigma.end(), 0);
        if (c.kind == "green")
            std::stable_sort(sigma.begin(), sigma.end(), [&](int a, int b) { return pt.times[a] > pt.times[b]; });
        std::vector<Vec3> p_op(c.n);
        std::vector<double> t_op(c.n);
        for (int k = 0; k < c.n; ++k) {
            p_op[k] = pt.momenta[sigma[k]];
            t_op[k] = pt.times[sigma[k]];
        }
        for (int k = 0; k <= c.order; ++k) {
            ojson tj = w.base("total", k, "total", "adiabatic");
            tj["point"] = pi;
            if (!sets[k]) {
                w.error(tj, set_error[k]);
                continue;
            }
            try {
                cplx tot = 0.0;
                double err = 0.0;
                int idx = 0;
                for (auto& e : sets[k]->entries()) {
                    if (c.kind == "wightman" && e->alpha != c.alpha) continue;
                    cplx a = evaluate_graph_adiabatic(*e, p_op, t_op, fine);
                    cplx b = evaluate_graph_adiabatic(*e, p_op, t_op, coarse);
                    ojson j = w.base("graph", k, alpha_text(e->alpha) + "/V" + std::to_string(k) + "." + std::to_string(idx++),
                                     "adiabatic");
                    j["point"] = pi;
                    j["key"] = topology_key(e->graph);
                    w.value(j, a, std::abs(a - b));
                    w.emit(j);
                    tot += a;
                    err += std::abs(a - b);
                }
                w.value(tj, tot, err);
                tj["convention"] = "density with respect to delta^3(sum of external momenta)";
                w.emit(tj);
            } catch (const std::exception& e) {
                w.error(tj, e.what());
            }
        }
    }
}

int cmd_eval(const RunConfig& c, Writer& w) {
    ojson h = w.base("header", c.order, "", c.mode);
    h["cmd"] = "eval";
    h["kind"] = c.kind;
    h["points"] = c.points.size();
    w.emit(h);
    if (c.mode == "grid")
        eval_grid(c, w);
    else
        eval_adiabatic(c, w);
    return w.failures() ? 1 : 0;
}

// ------------------------------------------------------------------------------ compare

int cmd_compare(const RunConfig& c, Writer& w) {
    if (c.mode != "grid") throw ConfigError("correlator.mode", "compare runs on the oracle grid; set mode to 'grid'");
    if (c.kind != "wightman") throw ConfigError("correlator.kind", "compare checks wightman requests");
    const int G = 2 * c.grid_half + 1;
    const long dim = fock_dimension(G, c.nmax);
    if (dim > c.max_dim)
        throw ConfigError("oracle.nmax", "Fock dimension " + std::to_string(dim) + " exceeds oracle.max_dim = " +
                                             std::to_string(c.max_dim));
    const double w_engine = c.volume_factor;
    const double w_oracle = c.oracle_volume_factor.value_or(c.volume_factor);
    auto eng = grid_setup(c, w_engine);
    auto orc = grid_setup(c, w_oracle);
    FockSpace space(orc->grid, c.nmax);
    OracleContext ctx;
    ctx.space = &space;
    ctx.spec = &orc->spec;
    ctx.spatial = orc->model.spatial;
    ctx.temporal = orc->model.temporal;
    ctx.panels = c.panels;
    ctx.build();

    ojson h = w.base("header", c.order, "", "compare");
    h["cmd"] = "compare";
    h["fock_dimension"] = dim;
    h["points"] = c.points.size();
    w.emit(h);
    bool all_pass = true;
    for (std::size_t pi = 0; pi < c.points.size(); ++pi) {
        const auto& pt = c.points[pi];
        GridPoint gp{c.alpha, pt.times, pt.grid_momenta};
        try {
            CorrelatorResult e = correlator_grid(gp, c.order, eng->model);
            SeriesResult o = correlator_oracle(OracleRequest{c.alpha, pt.times, pt.grid_momenta, c.order}, ctx);
            for (int k = 0; k <= c.order; ++k) {
                const double gap = std::abs(e.value[k] - o.value[k]);
                const double bound = 3.0 * (e.err[k] + o.err[k]);
                const double scale = std::max(std::abs(e.value[k]), std::abs(o.value[k]));
                const double rel = scale > 0 ? gap / scale : 0.0;
                const bool pass = gap <= bound && rel <= 1e-3;
                all_pass = all_pass && pass;
                ojson j = w.base("compare", k, "total", "grid-vs-oracle");
                j["point"] = pi;
                w.value(j, e.value[k], e.err[k]);
                j["oracle_re"] = o.value[k].real();
                j["oracle_im"] = o.value[k].imag();
                j["oracle_abs_err"] = o.err[k];
                j["abs_gap"] = gap;
                j["rel_gap"] = rel;
                j["bound"] = bound;
                j["pass"] = pass;
                if (!pass) {
                    std::ostringstream hint;
                    if (w_engine != w_oracle)
                        hint << "convention mismatch: engine volume factor " << w_engine << ", oracle volume factor "
                             << w_oracle << " (set oracle.volume_factor equal to model.volume_factor)";
                    else
                        hint << "gap above 3x the combined error estimates; raise oracle.nmax, oracle.panels or "
                                "tighten quadrature.rel_tol";
                    j["hint"] = hint.str();
                }
                w.emit(j);
            }
        } catch (const std::exception& ex) {
            ojson j = w.base("compare", -1, "total", "grid-vs-oracle");
            j["point"] = pi;
            w.error(j, ex.what());
            all_pass = false;
        }
    }
    return all_pass ? 0 : 1;
}

// --------------------------------------------------------------------------------- scan

int cmd_scan(const RunConfig& c, Writer& w) {
    if (c.order != 1) throw ConfigError("order", "scan runs on the V = 1 tree; set order to 1");
    if (!(c.delta > 0)) throw ConfigError("cutoff.delta", "scan needs a temporal band limit");
    if (int(c.alpha.size()) != c.n) throw ConfigError("correlator.alpha", "scan needs the sign vector");
    if (int(c.scan_times.size()) != c.n) throw ConfigError("scan.times", "missing");
    InteractionSpec spec = preset_interaction(c.preset, c.preset_params());
    GraphSet gs(spec, c.n, 1, c.seed);
    const GraphSet::Entry* entry = nullptr;
    for (auto& e : gs.entries()) {
        if (e->alpha != c.alpha) continue;
        for (auto& v : e->graph.vertices)
            if (!v.external && v.slot == c.scan_slot) entry = e.get();
    }
    if (!entry) throw ConfigError("scan.slot", "no V = 1 graph with this sign vector has its vertex in that slot");
    for (std::size_t i = 0; i + 1 < c.scan_times.size(); ++i)
        if (!(c.scan_times[i] > c.scan_times[i + 1])) throw ConfigError("scan.times", "must decrease in operator order");

    SmearedRequest req;
    req.times = c.scan_times;
    req.momenta = c.scan_momenta;
    req.f_center = c.f_center;
    req.f_width = c.f_width;
    AdiabaticModel m;
    m.spec = &spec;
    m.gh_order = c.gh_order;
    m.ell = c.ell;
    m.threads = c.threads;
    TemporalCutoff h(c.delta);
    const std::string key = topology_key(entry->graph) + "/slot" + std::to_string(c.scan_slot);

    ojson hd = w.base("header", 1, key, "scan");
    hd["cmd"] = "scan";
    hd["rows"] = c.Ls.size();
    hd["profile"] = c.profile;
    w.emit(hd);
    try {
        ScanResult sr = adiabatic_scan(*entry, req, spec, h, c.cutoff_profile(), c.Ls, m, c.gh_order);
        for (auto& r : sr.rows) {
            ojson j = w.base("scan_row", 1, key, "cutoff");
            j["L"] = r.L;
            w.value(j, r.value, r.err);
            j["gap"] = r.gap;
            w.emit(j);
        }
        ojson lim = w.base("limit", 1, key, "adiabatic");
        w.value(lim, sr.limit, 0.0);
        w.emit(lim);
        ojson ex = w.base("extrapolated", 1, key, "richardson");
        w.value(ex, sr.extrapolated, sr.extrapolation_err);
        w.emit(ex);
    } catch (const std::exception& e) {
        w.error(w.base("scan_row", 1, key, "cutoff"), e.what());
    }
    return w.failures() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perturbative correlators with band-limited cut-offs"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
        sub->add_option("--out", opt.out_path, "output file (default stdout)");
        sub->add_option("--seed", opt.seed, "overrides the config seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 256));
        sub->add_flag("--timing", opt.timing, "write wall-clock elapsed_ms (breaks byte-identical output)");
    };
    auto* g = app.add_subcommand("graphs", "list graphs of the configured order");
    auto* e = app.add_subcommand("eval", "evaluate correlators");
    auto* c = app.add_subcommand("compare", "grid engine against the Fock-space oracle");
    auto* s = app.add_subcommand("scan", "adiabatic scan over L");
    for (auto* sub : {g, e, c, s}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }
    try {
        RunConfig cfg = load_config(opt.config_path);
        if (opt.seed >= 0) cfg.seed = std::uint64_t(opt.seed);
        if (opt.threads > 0) cfg.threads = opt.threads;
        std::string cmd = app.get_subcommands().front()->get_name();
        Writer w(opt.out_path, run_id(cmd, cfg), opt.timing);
        int rc = 0;
        if (cmd == "graphs")
            rc = cmd_graphs(cfg, w);
        else if (cmd == "eval")
            rc = cmd_eval(cfg, w);
        else if (cmd == "compare")
            rc = cmd_compare(cfg, w);
        else
            rc = cmd_scan(cfg, w);
        w.os().flush();
        return rc;
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "input error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "numeric failure: " << err.what() << '\n';
        return 1;
    }
}
