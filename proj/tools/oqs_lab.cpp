// oqs-lab: experiment runner. Every subcommand writes one CSV (stdout or --out).
#include "oqs/oqs.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace oqs;

struct config_error : std::runtime_error { using std::runtime_error::runtime_error; };

// ---------------------------------------------------------------- formatting

std::string fmt_double(double v) {
    char buf[40];
    if (v == 0.0) v = 0.0;  // no "-0" in output
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string canon(double v) { return fmt_double(v); }
std::string canon(long v) { return std::to_string(v); }
std::string canon(int v) { return std::to_string(v); }
std::string canon(std::uint64_t v) { return std::to_string(v); }
std::string canon(bool v) { return v ? "true" : "false"; }
std::string canon(const std::string& v) { return v; }
template <class T>
std::string canon(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + canon(v[i]);
    return s;
}

class Csv {
public:
    explicit Csv(std::vector<std::string> cols) : ncol_(cols.size()) { line(cols); }
    template <class... A>
    void row(const A&... a) {
        std::vector<std::string> f;
        (f.push_back(cell(a)), ...);
        if (f.size() != ncol_) throw std::logic_error("csv: column count");
        line(f);
    }
    const std::string& str() const { return buf_; }

private:
    static std::string cell(double v) { return fmt_double(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    void line(const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) buf_ += (i ? "," : "") + f[i];
        buf_ += '\n';
    }
    std::size_t ncol_;
    std::string buf_;
};

// ---------------------------------------------------------------- workers

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* e = std::getenv("OQS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(e, &end, 10);
        if (end == e || *end != '\0' || v < 1) throw config_error("OQS_THREADS: must be a positive integer");
        n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

// Results land in slot i, so worker count never changes the output.
template <class T>
std::vector<T> parallel_map(long n, const std::function<T(long)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(n));
    const unsigned w = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max(1L, n)));
    if (w <= 1) {
        for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errs(w);
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k)
        pool.emplace_back([&, k] {
            try {
                for (long i = k; i < n; i += w) out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------- schema

struct Command {
    CLI::App* app = nullptr;
    std::string path;  // "cqec eigen"
    std::vector<std::pair<std::string, std::function<std::string()>>> keys;
    std::function<std::string()> run;  // returns CSV text
    const std::uint64_t* seed = nullptr;

    template <class T>
    CLI::Option* opt(const std::string& name, T& var, const std::string& desc) {
        keys.push_back({name, [&var] { return canon(var); }});
        return app->add_option("--" + name, var, desc)->capture_default_str();
    }
    void flag(const std::string& name, bool& var, const std::string& desc) {
        keys.push_back({name, [&var] { return canon(var); }});
        app->add_flag("--" + name, var, desc);
    }
    std::string canonical() const {
        std::vector<std::pair<std::string, std::string>> kv;
        for (const auto& [k, f] : keys) kv.push_back({k, f()});
        std::sort(kv.begin(), kv.end());
        std::string s;
        for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
        return s;
    }
};

void need(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw config_error("--" + field + ": " + msg);
}

std::vector<double> linspace(double a, double b, long n) {
    std::vector<double> g;
    for (long i = 0; i <= n; ++i) g.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
    return g;
}

// ---------------------------------------------------------------- subcommands

struct WalkArgs {
    double p1 = 0.7, eps = 0.05, xcut = 6.0, x0 = 0.0;
    long trials = 1000, max_steps = 10'000'000;
    std::uint64_t seed = 1;
} walk_args;

std::string run_walk() {
    const auto& a = walk_args;
    need(std::abs(a.x0) < a.xcut, "x0", "must lie inside (-xcut, xcut)");
    weakmeas::WalkConfig cfg;
    cfg.epsilon = a.eps;
    cfg.x_cut = a.xcut;
    cfg.x0 = a.x0;
    cfg.max_steps = a.max_steps;
    const auto m = weakmeas::diagonal_projective();
    const weakmeas::Walker w(m, cfg);
    const auto rho = weakmeas::state_at(weakmeas::diagonal_state(a.p1), m, a.x0);
    const auto res = parallel_map<weakmeas::WalkOutcome>(a.trials, [&](long i) {
        auto rng = qcore::split(a.seed, static_cast<std::uint64_t>(i));
        return w.run(rho, rng);
    });
    Csv csv({"trial", "outcome", "steps", "final_x"});
    for (long i = 0; i < a.trials; ++i) {
        const auto& r = res[static_cast<std::size_t>(i)];
        csv.row(i, r.outcome_index, r.steps, r.final_x);
    }
    return csv.str();
}

struct MonoArgs {
    std::string name = "trace";
    long trials = 200;
    std::uint64_t seed = 1;
} mono_args;

std::string run_monotone() {
    const auto rows = monotones::probe_suite(mono_args.name, mono_args.trials, mono_args.seed);
    Csv csv({"trial", "condition", "value", "pass"});
    for (const auto& r : rows) csv.row(r.trial, r.condition, r.value, r.pass);
    return csv.str();
}

struct BathArgs {
    int n = 4;
    double beta = 1.0, tmax = 5.0, g = 1.0, omega = 1.0, alpha = 1.0;
    double vx0 = 0.70710678118654752, vy0 = 0.70710678118654752;
    std::string model = "tcl2";
    long steps = 200, ensemble = 50;
    bool random = false;
    std::uint64_t seed = 1;
} bath_args;

std::string run_spinbath() {
    const auto& a = bath_args;
    need(a.vx0 * a.vx0 + a.vy0 * a.vy0 <= 1.0 + 1e-12, "vx0", "initial Bloch vector must lie in the unit disc");
    const auto model = spinbath::parse_model(a.model);
    const spinbath::BlochXY v0{a.vx0, a.vy0};
    const auto grid = linspace(0.0, a.tmax, a.steps);
    using Traj = std::pair<std::vector<spinbath::BlochXY>, std::vector<spinbath::BlochXY>>;
    auto one = [&](const spinbath::BathSpec& s) -> Traj {
        // grid in units of alpha t
        std::vector<double> tg;
        for (double x : grid) tg.push_back(x / s.alpha);
        return {spinbath::model_trajectory(s, spinbath::Model::exact, v0, tg),
                spinbath::model_trajectory(s, model, v0, tg)};
    };
    std::vector<Traj> runs;
    if (a.random) {
        runs = parallel_map<Traj>(a.ensemble, [&](long k) {
            auto rng = qcore::split(a.seed, static_cast<std::uint64_t>(k));
            auto s = spinbath::random_bath(a.n, a.beta, rng, a.alpha);
            s.validate();
            return one(s);
        });
    } else {
        runs.push_back(one(spinbath::uniform_bath(a.n, a.g, a.omega, a.beta, a.alpha)));
    }
    Csv csv({"alpha_t", "vx_exact", "vx_model", "trace_distance"});
    const double w = 1.0 / static_cast<double>(runs.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        spinbath::BlochXY ex{0, 0}, md{0, 0};
        for (const auto& r : runs) {
            ex.vx += w * r.first[i].vx;
            ex.vy += w * r.first[i].vy;
            md.vx += w * r.second[i].vx;
            md.vy += w * r.second[i].vy;
        }
        csv.row(grid[i], ex.vx, md.vx, spinbath::trace_distance(ex, md));
    }
    return csv.str();
}

struct CqecArgs {
    double r = 10.0, R = 100.0, tmax = 5.0;
    long steps = 500;
} markov_args, nm_args{10.0, 100.0, 100.0, 1000}, eigen_args;

std::string run_cqec_markov() {
    const auto& a = markov_args;
    const cqec::CqecParams p{1.0, a.r, 0.0};
    const auto grid = linspace(0.0, a.tmax, a.steps);
    const auto code = cqec::markov_bitflip(p, {}, grid);
    Csv csv({"t", "fidelity_single", "fidelity_code", "outside_weight"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.row(grid[i], cqec::markov_single(1.0, p, grid[i]), code[i].a, code[i].b + code[i].c);
    return csv.str();
}

std::string run_cqec_nonmarkov() {
    const auto& a = nm_args;
    const cqec::CqecParams p{0.0, a.R, 1.0};
    const auto grid = linspace(0.0, a.tmax, a.steps);
    const auto code = cqec::nm_bitflip_evolve(p, cqec::NmCoeffs::codeword(), grid);
    Csv csv({"t", "fidelity_single", "fidelity_code", "fidelity_slow"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.row(grid[i], cqec::nonmarkov_single(p, grid[i]).alpha, code[i].c[0], cqec::nm_slow_fidelity(p, grid[i]));
    return csv.str();
}

std::string run_cqec_eigen() {
    const auto ev = cqec::nm_eigenvalues({0.0, eigen_args.R, 1.0});
    Csv csv({"re", "im"});
    for (const auto& z : ev) csv.row(z.real(), z.imag());
    return csv.str();
}

struct FaArgs {
    std::vector<int> dims{2, 2, 1};
    long trials = 500;
    std::uint64_t seed = 1;
} fa_args;

std::string run_subsys_fa() {
    const auto& a = fa_args;
    need(a.dims.size() == 3, "dims", "expected three values dA,dB,dK");
    for (int d : a.dims) need(d >= 1 && d <= 16, "dims", "each dimension must lie in [1, 16]");
    const subsys::Decomposition dec{a.dims[0], a.dims[1], a.dims[2]};
    const auto rep = subsys::check_fa_monotone_under_blocked_noise(dec, static_cast<int>(a.trials), a.seed);
    Csv csv({"trial", "fa_before", "fa_after", "pass"});
    for (std::size_t i = 0; i < rep.trials.size(); ++i)
        csv.row(static_cast<long>(i), rep.trials[i].before, rep.trials[i].after, rep.trials[i].pass);
    return csv.str();
}

struct HoloArgs {
    std::string gate = "z", schedule = "trig";
    std::vector<double> T{50.0};
    long steps = 0;
} holo_args;

std::string run_holonomy() {
    namespace h = holonomy;
    const auto& a = holo_args;
    for (double t : a.T) need(t > 0.0 && std::isfinite(t), "T", "durations must be positive");
    const h::Schedule sc = a.schedule == "linear" ? h::Schedule::linear
                           : a.schedule == "trig" ? h::Schedule::trig
                                                  : h::Schedule::smooth_bump;
    cmat target;
    std::function<h::GateRun(double)> gate;
    if (a.gate == "z") {
        target = qcore::pauli_z();
        gate = [&](double t) { return h::z_gate_loop(t, sc, a.steps); };
    } else if (a.gate == "x") {
        target = qcore::pauli_x();
        gate = [&](double t) { return h::x_gate_sequence(t, sc, a.steps); };
    } else if (a.gate == "hadamard") {
        target = cmat(2, 2);
        target << 1, 1, 1, -1;
        target /= std::sqrt(2.0);
        gate = [&](double t) { return h::hadamard_gate(t, sc, a.steps); };
    } else if (a.gate == "phase") {
        target = cmat::Identity(2, 2);
        target(1, 1) = I1;
        gate = [&](double t) { return h::phase_gate(t, sc, a.steps); };
    } else {
        target = h::cnot_matrix();
        gate = [&](double t) { return h::cnot_construction(t, sc, a.steps); };
    }
    const auto runs = parallel_map<h::GateRun>(static_cast<long>(a.T.size()), [&](long i) {
        return gate(a.T[static_cast<std::size_t>(i)] * h::half_pi_time());
    });
    Csv csv({"T", "leakage", "gate_fidelity", "phase0", "phase1"});
    for (std::size_t i = 0; i < runs.size(); ++i)
        csv.row(a.T[i], runs[i].result.leakage, h::gate_fidelity(target, runs[i].gate), runs[i].phase0,
                runs[i].phase1);
    return csv.str();
}

struct ReproArgs {
    std::string figure;
} repro_args;

std::string run_reproduce() {
    const auto& f = repro_args.figure;
    if (f == "cqec-fig1") {
        Csv csv({"R", "t", "fidelity"});
        const auto grid = linspace(0.0, 5.0, 500);
        for (double R : {1.0, 2.0, 5.0})
            for (double t : grid) csv.row(R, t, cqec::nonmarkov_single({0.0, R, 1.0}, t).alpha);
        return csv.str();
    }
    if (f == "cqec-fig3") {
        const cqec::CqecParams p{0.0, 100.0, 1.0};
        Csv csv({"series", "t", "fidelity", "fidelity_slow"});
        for (const auto& [name, tmax, n] : {std::tuple<const char*, double, long>{"long", 10000.0, 2000},
                                            std::tuple<const char*, double, long>{"short", 1.0, 200}}) {
            const auto grid = linspace(0.0, tmax, n);
            const auto tr = cqec::nm_bitflip_evolve(p, cqec::NmCoeffs::codeword(), grid);
            for (std::size_t i = 0; i < grid.size(); ++i)
                csv.row(name, grid[i], tr[i].c[0], cqec::nm_slow_fidelity(p, grid[i]));
        }
        return csv.str();
    }
    // spinbath-n100-tcl
    Csv csv({"beta", "alpha_t", "vx_exact", "vx_tcl2", "vx_tcl3", "vx_tcl4"});
    const spinbath::BlochXY v0{0.70710678118654752, 0.70710678118654752};
    const auto grid = linspace(0.0, 7.0, 700);
    for (double beta : {1.0, 10.0}) {
        const auto s = spinbath::uniform_bath(100, 1.0, 1.0, beta);
        for (double t : grid)
            csv.row(beta, t, spinbath::exact_bloch(s, v0, t).vx, spinbath::tcl_solution(s, 2, v0, t).vx,
                    spinbath::tcl_solution(s, 3, v0, t).vx, spinbath::tcl_solution(s, 4, v0, t).vx);
    }
    return csv.str();
}

// ---------------------------------------------------------------- config file

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("--config: cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("--config: line " + std::to_string(no) + ": expected key=value");
        auto key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        kv.push_back({key, trim(line.substr(eq + 1))});
    }
    return kv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oqs-lab: open-system and error-correction experiments"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    std::string out, config_path;
    bool json_meta = false, dump = false;
    app.add_option("--out", out, "CSV output path (default stdout)");
    app.add_flag("--json-meta", json_meta, "write <out>.meta.json with the resolved config");
    app.add_option("--config", config_path, "key=value file; command-line flags take precedence");
    app.add_flag("--dump-config", dump, "print the resolved config as key=value and exit");

    std::vector<Command> cmds;
    cmds.reserve(16);
    auto make = [&](CLI::App* parent, const std::string& name, const std::string& path, const std::string& desc) {
        cmds.push_back({});
        cmds.back().app = parent->add_subcommand(name, desc);
        cmds.back().path = path;
        return &cmds.back();
    };

    auto* wm = app.add_subcommand("weakmeas", "weak-measurement random walks");
    wm->require_subcommand(1);
    {
        auto* c = make(wm, "walk", "weakmeas walk", "absorbing walk for the diagonal two-outcome measurement");
        auto& a = walk_args;
        c->opt("p1", a.p1, "outcome-1 probability of the initial state")->check(CLI::Range(0.0, 1.0));
        c->opt("eps", a.eps, "step size")->check(CLI::Range(1e-6, 0.499999));
        c->opt("xcut", a.xcut, "absorbing boundary X")->check(CLI::PositiveNumber);
        c->opt("x0", a.x0, "start coordinate");
        c->opt("trials", a.trials, "number of walks")->check(CLI::Range(1L, 100'000'000L));
        c->opt("max-steps", a.max_steps, "per-walk step cap")->check(CLI::Range(1L, 1'000'000'000L));
        c->opt("seed", a.seed, "64-bit seed");
        c->seed = &a.seed;
        c->run = run_walk;
    }
    auto* mo = app.add_subcommand("monotone", "differential monotone conditions");
    mo->require_subcommand(1);
    {
        auto* c = make(mo, "check", "monotone check", "LU, measurement and convexity probes");
        auto& a = mono_args;
        c->opt("name", a.name, "state function")->check(CLI::IsMember({"trace", "purity", "entropy", "phi_abc"}));
        c->opt("trials", a.trials, "probes per condition")->check(CLI::Range(1L, 10'000'000L));
        c->opt("seed", a.seed, "64-bit seed");
        c->seed = &a.seed;
        c->run = run_monotone;
    }
    auto* sb = app.add_subcommand("spinbath", "central spin in a spin bath");
    sb->require_subcommand(1);
    {
        auto* c = make(sb, "compare", "spinbath compare", "exact solution against one approximation");
        auto& a = bath_args;
        c->opt("n", a.n, "bath spins")->check(CLI::Range(1, 100000));
        c->opt("beta", a.beta, "inverse temperature")->check(CLI::NonNegativeNumber);
        c->opt("model", a.model, "approximation")
            ->check(CLI::IsMember({"exact", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4", "pm", "cg"}));
        c->opt("tmax", a.tmax, "final alpha t")->check(CLI::PositiveNumber);
        c->opt("steps", a.steps, "grid intervals")->check(CLI::Range(1L, 10'000'000L));
        c->opt("g", a.g, "coupling (uniform bath)")->check(CLI::Range(-1.0, 1.0));
        c->opt("omega", a.omega, "bath frequency (uniform bath)")->check(CLI::Range(-1.0, 1.0));
        c->opt("alpha", a.alpha, "coupling scale")->check(CLI::PositiveNumber);
        c->opt("vx0", a.vx0, "initial v_x")->check(CLI::Range(-1.0, 1.0));
        c->opt("vy0", a.vy0, "initial v_y")->check(CLI::Range(-1.0, 1.0));
        c->flag("random", a.random, "uniform[-1,1] couplings and frequencies, ensemble averaged");
        c->opt("ensemble", a.ensemble, "ensemble size for --random")->check(CLI::Range(1L, 100000L));
        c->opt("seed", a.seed, "64-bit seed");
        c->seed = &a.seed;
        c->run = run_spinbath;
    }
    auto* cq = app.add_subcommand("cqec", "continuous quantum error correction");
    cq->require_subcommand(1);
    {
        auto* c = make(cq, "markov", "cqec markov", "Markovian single qubit and bit-flip code, lambda = 1");
        c->opt("r", markov_args.r, "kappa / lambda")->check(CLI::PositiveNumber);
        c->opt("tmax", markov_args.tmax, "final lambda t")->check(CLI::PositiveNumber);
        c->opt("steps", markov_args.steps, "grid intervals")->check(CLI::Range(1L, 10'000'000L));
        c->run = run_cqec_markov;
        c = make(cq, "nonmarkov", "cqec nonmarkov", "non-Markovian single qubit and 13-coefficient code, gamma = 1");
        c->opt("R", nm_args.R, "kappa / gamma")->check(CLI::PositiveNumber);
        c->opt("tmax", nm_args.tmax, "final gamma t")->check(CLI::PositiveNumber);
        c->opt("steps", nm_args.steps, "grid intervals")->check(CLI::Range(1L, 10'000'000L));
        c->run = run_cqec_nonmarkov;
        c = make(cq, "eigen", "cqec eigen", "spectrum of the 13x13 generator, gamma = 1");
        c->opt("R", eigen_args.R, "kappa / gamma")->check(CLI::PositiveNumber);
        c->run = run_cqec_eigen;
    }
    auto* ss = app.add_subcommand("subsys", "operator quantum error correction");
    ss->require_subcommand(1);
    {
        auto* c = make(ss, "fa", "subsys fa", "F^A before and after random blocked channels");
        c->opt("dims", fa_args.dims, "dA,dB,dK")->delimiter(',')->expected(3);
        c->opt("trials", fa_args.trials, "number of channels")->check(CLI::Range(1L, 10'000'000L));
        c->opt("seed", fa_args.seed, "64-bit seed");
        c->seed = &fa_args.seed;
        c->run = run_subsys_fa;
    }
    auto* ho = app.add_subcommand("holonomy", "holonomic gates");
    ho->require_subcommand(1);
    {
        auto* c = make(ho, "run", "holonomy run", "adiabatic gate simulation");
        auto& a = holo_args;
        c->opt("gate", a.gate, "gate")->check(CLI::IsMember({"z", "x", "hadamard", "phase", "cnot"}));
        c->opt("T", a.T, "per-segment duration(s) in units of T_d = pi/2, comma separated")->delimiter(',');
        c->opt("schedule", a.schedule, "interpolation")->check(CLI::IsMember({"linear", "trig", "smooth"}));
        c->opt("steps", a.steps, "steps per segment, 0 = automatic")->check(CLI::Range(0L, 100'000'000L));
        c->run = run_holonomy;
    }
    {
        auto* c = make(&app, "reproduce", "reproduce", "figure data at the published parameters");
        c->opt("figure", repro_args.figure, "figure id")
            ->required()
            ->check(CLI::IsMember({"cqec-fig1", "cqec-fig3", "spinbath-n100-tcl"}));
        c->run = run_reproduce;
    }

    // global flags may follow the subcommand path
    std::function<void(CLI::App*)> fall = [&](CLI::App* a) {
        for (auto* s : a->get_subcommands({})) {
            s->fallthrough();
            fall(s);
        }
    };
    fall(&app);

    try {
        // splice config-file values in front of the flags that follow the subcommand path
        std::vector<std::string> args(argv + 1, argv + argc);
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) {
                config_path = args[i + 1];
                args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
                break;
            }
            if (args[i].rfind("--config=", 0) == 0) {
                config_path = args[i].substr(9);
                args.erase(args.begin() + static_cast<long>(i));
                break;
            }
        }
        if (!config_path.empty()) {
            CLI::App* cur = &app;
            std::size_t pos = 0;
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (args[i].rfind("-", 0) == 0) continue;
                CLI::App* sub = nullptr;
                for (auto* s : cur->get_subcommands({}))
                    if (s->get_name() == args[i]) sub = s;
                if (!sub) break;
                cur = sub;
                pos = i + 1;
            }
            const Command* leaf = nullptr;
            for (const auto& c : cmds)
                if (c.app == cur) leaf = &c;
            std::vector<std::string> globals, locals;
            for (const auto& [k, v] : read_config(config_path)) {
                const bool global = k == "out" || k == "json-meta";
                if (!global) {
                    if (!leaf) throw config_error("--config: key '" + k + "' given without a subcommand");
                    const bool known = std::any_of(leaf->keys.begin(), leaf->keys.end(),
                                                   [&](const auto& e) { return e.first == k; });
                    if (!known) throw config_error("--config: unknown key '" + k + "' for '" + leaf->path + "'");
                }
                (global ? globals : locals).push_back("--" + k + "=" + v);
            }
            args.insert(args.begin() + static_cast<long>(pos), locals.begin(), locals.end());
            args.insert(args.begin(), globals.begin(), globals.end());
        }
        std::reverse(args.begin(), args.end());  // CLI11 takes a reversed vector
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const Command* cmd = nullptr;
    for (const auto& c : cmds)
        if (c.app->parsed()) cmd = &c;
    if (!cmd) {
        std::cerr << "config error: no command selected\n";
        return 2;
    }
    if (dump) {
        std::cout << cmd->canonical();
        return 0;
    }
    if (json_meta && out.empty()) {
        std::cerr << "config error: --json-meta: requires --out\n";
        return 2;
    }

    std::string csv;
    try {
        worker_count();
        csv = cmd->run();
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const oqs::error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }

    if (out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(out, std::ios::binary);
        f << csv;
        if (!f) {
            std::cerr << "io error: cannot write '" << out << "'\n";
            return 3;
        }
    }
    if (json_meta) {
        nlohmann::json meta;
        meta["command"] = cmd->path;
        nlohmann::json cfg = nlohmann::json::object();
        for (const auto& [k, f] : cmd->keys) cfg[k] = f();
        meta["config"] = cfg;
        meta["canonical"] = cmd->canonical();
        if (cmd->seed) meta["seed"] = *cmd->seed;
        meta["float_format"] = "%.17g";
        meta["csv"] = out;
        std::ofstream f(out + ".meta.json", std::ios::binary);
        f << meta.dump(2) << "\n";
        if (!f) {
            std::cerr << "io error: cannot write sidecar\n";
            return 3;
        }
    }
    return 0;
}
