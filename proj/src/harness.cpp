#include "whlab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "whlab/eternal.hpp"
#include "whlab/observables.hpp"
#include "whlab/parallel.hpp"
#include "whlab/rng.hpp"
#include "whlab/size_winding.hpp"
#include "whlab/teleport.hpp"

namespace whlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------- formatting ----------

std::string fmt_double(double v) {
    if (v == 0.0) v = 0.0;  // collapse -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_int(long long v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", v);
    return buf;
}

std::string hex16(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------- parsing ----------

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_line(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string strip_comment(const std::string& s, int line) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (in_str) {
            if (ch == '\\') ++i;
            else if (ch == '"') in_str = false;
        } else if (ch == '"') {
            in_str = true;
        } else if (ch == '#') {
            return s.substr(0, i);
        }
    }
    if (in_str) bad_line(line, "unterminated string");
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

bool parse_number(const std::string& tok, ConfigValue& out) {
    if (tok.empty()) return false;
    bool integral = true;
    std::size_t start = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
    if (start == tok.size()) return false;
    for (std::size_t i = start; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i]))) integral = false;
    errno = 0;
    char* end = nullptr;
    if (integral) {
        long long v = std::strtoll(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size() || errno == ERANGE) return false;
        out.kind = ConfigValue::Kind::integer;
        out.i = v;
        return true;
    }
    double d = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) return false;
    out.kind = ConfigValue::Kind::real;
    out.d = d;
    return true;
}

double parse_array_number(const std::string& tok, int line) {
    ConfigValue v;
    if (!parse_number(tok, v)) bad_line(line, "'" + tok + "' is not a number");
    return v.kind == ConfigValue::Kind::integer ? static_cast<double>(v.i) : v.d;
}

std::vector<std::string> split_top_level(const std::string& inner, int line) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char ch : inner) {
        if (ch == '[') ++depth;
        if (ch == ']') {
            --depth;
            if (depth < 0) bad_line(line, "unbalanced brackets");
        }
        if (ch == ',' && depth == 0) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    std::string last = trim(cur);
    if (!last.empty()) parts.push_back(last);
    if (depth != 0) bad_line(line, "unbalanced brackets");
    for (const auto& p : parts)
        if (p.empty()) bad_line(line, "empty array element");
    return parts;
}

ConfigValue parse_value(const std::string& raw, int line) {
    ConfigValue v;
    if (raw.empty()) bad_line(line, "missing value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') bad_line(line, "unterminated string");
        std::string s;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] == '\\' && i + 2 < raw.size()) {
                ++i;
                if (raw[i] != '"' && raw[i] != '\\') bad_line(line, "unsupported escape");
            } else if (raw[i] == '"') {
                bad_line(line, "stray quote inside string");
            }
            s += raw[i];
        }
        v.kind = ConfigValue::Kind::text;
        v.s = std::move(s);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.b = raw == "true";
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') bad_line(line, "unbalanced brackets");
        auto parts = split_top_level(raw.substr(1, raw.size() - 2), line);
        if (!parts.empty() && parts[0].front() == '[') {
            v.kind = ConfigValue::Kind::pairs;
            for (const auto& p : parts) {
                if (p.front() != '[' || p.back() != ']')
                    bad_line(line, "expected a [time, value] pair");
                auto two = split_top_level(p.substr(1, p.size() - 2), line);
                if (two.size() != 2) bad_line(line, "a pair needs exactly two numbers");
                v.pairs.push_back(
                    {parse_array_number(two[0], line), parse_array_number(two[1], line)});
            }
            return v;
        }
        v.kind = ConfigValue::Kind::numbers;
        for (const auto& p : parts) v.numbers.push_back(parse_array_number(p, line));
        return v;
    }
    if (parse_number(raw, v)) return v;
    bad_line(line, "cannot parse value '" + raw + "'");
}

// ---------- typed access ----------

const ConfigValue& need(const ConfigMap& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) throw ConfigError("missing required field \"" + key + "\"");
    return it->second;
}

long long cfg_int(const ConfigMap& m, const std::string& key) {
    const ConfigValue& v = need(m, key);
    if (v.kind != ConfigValue::Kind::integer)
        throw ConfigError("\"" + key + "\": expected an integer");
    return v.i;
}

double cfg_real(const ConfigMap& m, const std::string& key) {
    const ConfigValue& v = need(m, key);
    if (v.kind == ConfigValue::Kind::integer) return static_cast<double>(v.i);
    if (v.kind != ConfigValue::Kind::real) throw ConfigError("\"" + key + "\": expected a number");
    return v.d;
}

bool cfg_bool(const ConfigMap& m, const std::string& key) {
    const ConfigValue& v = need(m, key);
    if (v.kind != ConfigValue::Kind::boolean)
        throw ConfigError("\"" + key + "\": expected true or false");
    return v.b;
}

std::string cfg_text(const ConfigMap& m, const std::string& key) {
    const ConfigValue& v = need(m, key);
    if (v.kind != ConfigValue::Kind::text) throw ConfigError("\"" + key + "\": expected a string");
    return v.s;
}

std::vector<double> cfg_numbers(const ConfigMap& m, const std::string& key) {
    const ConfigValue& v = need(m, key);
    if (v.kind != ConfigValue::Kind::numbers)
        throw ConfigError("\"" + key + "\": expected an array of numbers");
    return v.numbers;
}

std::vector<std::array<double, 2>> cfg_pairs(const ConfigMap& m, const std::string& key) {
    const ConfigValue& v = need(m, key);
    if (v.kind == ConfigValue::Kind::numbers && v.numbers.empty()) return {};
    if (v.kind != ConfigValue::Kind::pairs)
        throw ConfigError("\"" + key + "\": expected an array of [time, value] pairs");
    return v.pairs;
}

uint64_t cfg_seed(const ConfigMap& m) { return static_cast<uint64_t>(cfg_int(m, "seed")); }

InteractionKind cfg_interaction(const ConfigMap& m, const std::string& key) {
    std::string s = cfg_text(m, key);
    if (s == "majorana_pairs") return InteractionKind::majorana_pairs;
    if (s == "qubit_pairs") return InteractionKind::qubit_pairs;
    throw ConfigError("\"" + key + "\": expected \"majorana_pairs\" or \"qubit_pairs\"");
}

ModelKind cfg_model(const ConfigMap& m, const std::string& key) {
    std::string s = cfg_text(m, key);
    if (s == "syk") return ModelKind::syk;
    if (s == "pg_commuting") return ModelKind::pg_commuting;
    throw ConfigError("\"" + key + "\": expected \"syk\" or \"pg_commuting\"");
}

// ---------- registry ----------

ConfigValue cvi(long long v) {
    ConfigValue c;
    c.kind = ConfigValue::Kind::integer;
    c.i = v;
    return c;
}
ConfigValue cvr(double v) {
    ConfigValue c;
    c.kind = ConfigValue::Kind::real;
    c.d = v;
    return c;
}
ConfigValue cvs(const char* v) {
    ConfigValue c;
    c.kind = ConfigValue::Kind::text;
    c.s = v;
    return c;
}
ConfigValue cva(std::vector<double> v) {
    ConfigValue c;
    c.kind = ConfigValue::Kind::numbers;
    c.numbers = std::move(v);
    return c;
}
ConfigValue cvb(bool v) {
    ConfigValue c;
    c.kind = ConfigValue::Kind::boolean;
    c.b = v;
    return c;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

std::vector<ExperimentInfo> build_registry() {
    const double pi = std::acos(-1.0);
    std::vector<ExperimentInfo> reg;

    reg.push_back(
        {"mi-curve",
         "I(R:T) at t0 = t1 = t for both coupling signs; one row per (instantiation, t, sign), "
         "ensemble means in the summary",
         "N=10/14/24 panels with q=4, J=1, beta=4, mu=0.3 (0.2 at the larger sizes), 10 "
         "instantiations",
         {{"q", cvi(4)},
          {"J", cvr(1.0)},
          {"beta", cvr(4.0)},
          {"mu", cvr(0.3)},
          {"interaction", cvs("majorana_pairs")},
          {"t_grid", cva(linspace(0.0, 6.0, 25))},
          {"schedule", cva({})},
          {"instantiations", cvi(10)},
          {"seed", cvi(0)}}});

    reg.push_back({"warmup",
                   "zero-time protocol against its closed form across coupling strengths, for "
                   "both interactions",
                   "exact at any size; the closed form does not depend on N",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"mu_grid", cva(linspace(0.0, pi / 2, 33))},
                    {"seed", cvi(0)}}});

    reg.push_back({"winding",
                   "size distribution P(s) and winding amplitude Q(s) of one thermal fermion, "
                   "both sides, before and after the coupling phase",
                   "N=20, q=4, J=1, beta=4, t0=2.9, mu=-0.2",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(4.0)},
                    {"mu", cvr(-0.2)},
                    {"t0", cvr(2.0)},
                    {"interaction", cvs("majorana_pairs")},
                    {"fermion", cvi(0)},
                    {"engine", cvs("butterfly")},
                    {"instantiations", cvi(1)},
                    {"seed", cvi(0)}}});

    reg.push_back({"winding-summary",
                   "winding slope, coherence, and mean size next to the teleportation asymmetry "
                   "on one time grid; means in the summary",
                   "N=24, q=8, J=1, beta=8, mu=0.2",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(4.0)},
                    {"mu", cvr(0.2)},
                    {"interaction", cvs("majorana_pairs")},
                    {"fermion", cvi(0)},
                    {"t_grid", cva(linspace(0.25, 4.0, 16))},
                    {"schedule", cva({})},
                    {"instantiations", cvi(3)},
                    {"seed", cvi(0)}}});

    reg.push_back({"lyapunov",
                   "growth exponent from the exponential decay of the winding slope, one fit per "
                   "(instantiation, beta)",
                   "N=26, q=8, J=1, slope fit over t in [7.5, 15]",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta_grid", cva({2.0, 4.0, 8.0})},
                    {"t_grid", cva(linspace(0.5, 4.0, 15))},
                    {"fit_lo", cvr(1.0)},
                    {"fit_hi", cvr(3.0)},
                    {"fermion", cvi(0)},
                    {"instantiations", cvi(3)},
                    {"seed", cvi(0)}}});

    reg.push_back({"eternal",
                   "low spectrum of the coupled Hamiltonian: eigenvalues per instantiation, gap, "
                   "matching temperature, ground overlap, figure of merit, and an optional gap "
                   "power law over mu_grid",
                   "N=20, q=4, J=1; the gap fit over mu < 0.3 gave exponent 0.69",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"mu", cvr(0.3)},
                    {"k", cvi(12)},
                    {"beta_grid", cva(linspace(0.5, 10.0, 20))},
                    {"mu_grid", cva(linspace(0.05, 0.4, 8))},
                    {"fit_lo", cvr(0.0)},
                    {"fit_hi", cvr(0.3)},
                    {"symmetry_report", cvb(true)},
                    {"instantiations", cvi(10)},
                    {"seed", cvi(0)}}});

    reg.push_back({"eternal-vb",
                   "eternal series for the qubit-pair coupling, plus the double-degeneracy split "
                   "of the low spectrum",
                   "N=10 and N=18 studies with q=4, J=1",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"mu", cvr(0.3)},
                    {"k", cvi(12)},
                    {"beta_grid", cva(linspace(0.5, 10.0, 20))},
                    {"mu_grid", cva({})},
                    {"fit_lo", cvr(0.0)},
                    {"fit_hi", cvr(0.3)},
                    {"symmetry_report", cvb(true)},
                    {"instantiations", cvi(10)},
                    {"seed", cvi(0)}}});

    reg.push_back({"causal",
                   "asymmetry-maximizing extraction time per injection offset; one row per "
                   "(instantiation, t0)",
                   "N=24, q=8, J=1, beta=20, coupling at t=0 with mu=-0.18; the doubled schedule "
                   "variant used mu=-0.11 at t=-1.5 and t=+1.5",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(4.0)},
                    {"mu", cvr(-0.18)},
                    {"interaction", cvs("qubit_pairs")},
                    {"t0_grid", cva(linspace(0.25, 4.0, 16))},
                    {"t1_grid", cva(linspace(0.0, 6.0, 25))},
                    {"schedule", cva({})},
                    {"instantiations", cvi(1)},
                    {"seed", cvi(0)}}});

    reg.push_back({"classical",
                   "outcome-resolved I(R:T) after measuring the left block, next to the "
                   "unmeasured protocol; classical rows vary with the surviving outcomes",
                   "N=20, q=4, J=1, beta=4, mu=-0.25, all 1024 outcomes",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(4.0)},
                    {"mu", cvr(-0.25)},
                    {"t_grid", cva(linspace(0.0, 4.0, 9))},
                    {"cutoff", cvr(1e-14)},
                    {"instantiations", cvi(1)},
                    {"seed", cvi(0)}}});

    reg.push_back({"tripartite",
                   "Renyi-2 mutual and tripartite information of (R, left block, T) across time "
                   "for both coupling signs",
                   "N=24, q=4, J=1, beta=4, mu=0.2, qubit-pair coupling, single instantiation",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(4.0)},
                    {"mu", cvr(0.2)},
                    {"interaction", cvs("qubit_pairs")},
                    {"t_grid", cva(linspace(0.0, 6.0, 25))},
                    {"schedule", cva({})},
                    {"instantiations", cvi(1)},
                    {"seed", cvi(0)}}});

    reg.push_back({"otoc",
                   "two-sided correlator H and anticommutator C against the left insertion time "
                   "with the right time fixed, both coupling signs",
                   "N=10 for both models, q=4, J=1, beta=1, mu=0.139*pi, t_r=-0.720, 100 "
                   "instantiations",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(1.0)},
                    {"mu", cvr(0.139 * pi)},
                    {"t_r", cvr(-0.720)},
                    {"t_grid", cva(linspace(-2.0, 3.0, 21))},
                    {"interaction", cvs("majorana_pairs")},
                    {"model", cvs("syk")},
                    {"fermion", cvi(0)},
                    {"instantiations", cvi(10)},
                    {"seed", cvi(0)}}});

    reg.push_back({"pg-compare",
                   "teleportation through the commuting-pair model and the fermion model at the "
                   "same size, swept over extraction time, both coupling signs",
                   "N=10, beta=1, mu=0.139*pi, injection fixed at time -0.720, with 10 "
                   "fermion-model and 100 commuting-model instantiations",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(1.0)},
                    {"mu", cvr(0.139 * pi)},
                    {"t0", cvr(0.720)},
                    {"t1_grid", cva(linspace(0.0, 3.0, 16))},
                    {"syk_instantiations", cvi(10)},
                    {"pg_instantiations", cvi(25)},
                    {"seed", cvi(0)}}});

    reg.push_back({"twopoint",
                   "Euclidean two-point function against the commuting-model closed form "
                   "exp(-J^2 tau (beta - tau))",
                   "closed form derived for the commuting-pair ensemble; checked at N=16, "
                   "beta=1, J=1, 100 instantiations",
                   {{"q", cvi(4)},
                    {"J", cvr(1.0)},
                    {"beta", cvr(1.0)},
                    {"tau_grid", cva(linspace(0.05, 0.95, 19))},
                    {"model", cvs("pg_commuting")},
                    {"fermion", cvi(0)},
                    {"instantiations", cvi(100)},
                    {"seed", cvi(0)}}});

    return reg;
}

// ---------- validation ----------

void check_grid(const ConfigMap& m, const std::string& key, bool allow_empty) {
    auto g = cfg_numbers(m, key);
    if (g.empty()) {
        if (allow_empty) return;
        throw ConfigError("\"" + key + "\": must not be empty");
    }
    for (double x : g)
        if (!std::isfinite(x)) throw ConfigError("\"" + key + "\": entries must be finite");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1]))
            throw ConfigError("\"" + key + "\": must be strictly increasing");
}

void check_real(const ConfigMap& m, const std::string& key) {
    if (!std::isfinite(cfg_real(m, key)))
        throw ConfigError("\"" + key + "\": must be finite");
}

void check_count(const ConfigMap& m, const std::string& key) {
    long long v = cfg_int(m, key);
    if (v < 1 || v > 100000) throw ConfigError("\"" + key + "\": must be in [1, 100000]");
}

int in_window(const std::vector<double>& g, double lo, double hi) {
    int n = 0;
    for (double x : g)
        if (x >= lo && x <= hi) ++n;
    return n;
}

void check_schedule_range(const ConfigMap& m, double t0_min, double t1_min) {
    for (const auto& p : cfg_pairs(m, "schedule")) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            throw ConfigError("\"schedule\": entries must be finite");
        if (p[0] < -t0_min - 1e-12 || p[0] > t1_min + 1e-12)
            throw ConfigError("\"schedule\": slice at time " + fmt_double(p[0]) +
                              " lies outside [-t0, t1] at the smallest grid point");
    }
}

void validate_config(const ExperimentInfo& info, const ConfigMap& m) {
    const long long N = cfg_int(m, "N");
    if (N < 2 || N > 16 || N % 2 != 0)
        throw ConfigError("\"N\": must be a positive even integer not exceeding 16");
    if (cfg_int(m, "seed") < 0) throw ConfigError("\"seed\": must be nonnegative");

    if (m.count("q")) {
        long long q = cfg_int(m, "q");
        if (q < 4 || q % 4 != 0) throw ConfigError("\"q\": must be a positive multiple of 4");
        if (q > N) throw ConfigError("\"q\": must not exceed N");
    }
    if (m.count("J")) {
        double J = cfg_real(m, "J");
        if (!std::isfinite(J) || J < 0) throw ConfigError("\"J\": must be a nonnegative number");
    }
    if (m.count("beta")) {
        double b = cfg_real(m, "beta");
        if (!std::isfinite(b) || b < 0) throw ConfigError("\"beta\": must be nonnegative");
    }
    if (m.count("mu")) check_real(m, "mu");
    if (m.count("t0")) check_real(m, "t0");
    if (m.count("t_r")) check_real(m, "t_r");
    for (const char* key : {"instantiations", "syk_instantiations", "pg_instantiations"})
        if (m.count(key)) check_count(m, key);
    if (m.count("fermion")) {
        long long f = cfg_int(m, "fermion");
        if (f < 0 || f >= N) throw ConfigError("\"fermion\": must lie in [0, N)");
    }
    if (m.count("k")) {
        if (cfg_int(m, "k") < 2) throw ConfigError("\"k\": must be at least 2");
    }
    if (m.count("cutoff")) {
        double c = cfg_real(m, "cutoff");
        if (!(c >= 0 && c < 0.5)) throw ConfigError("\"cutoff\": must lie in [0, 0.5)");
    }
    if (m.count("interaction")) cfg_interaction(m, "interaction");
    if (m.count("model")) cfg_model(m, "model");
    if (m.count("engine")) {
        std::string e = cfg_text(m, "engine");
        if (e != "butterfly" && e != "direct")
            throw ConfigError("\"engine\": expected \"butterfly\" or \"direct\"");
    }
    if (m.count("symmetry_report")) cfg_bool(m, "symmetry_report");
    for (const char* key : {"t_grid", "t0_grid", "t1_grid", "beta_grid", "tau_grid"})
        if (m.count(key)) check_grid(m, key, false);
    if (m.count("mu_grid")) check_grid(m, "mu_grid", info.name != "warmup");
    if (m.count("fit_lo") || m.count("fit_hi")) {
        double lo = cfg_real(m, "fit_lo"), hi = cfg_real(m, "fit_hi");
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
            throw ConfigError("\"fit_lo\": must be finite and below fit_hi");
    }

    const std::string& e = info.name;
    if (e == "mi-curve" || e == "winding-summary" || e == "tripartite" || e == "classical") {
        auto t = cfg_numbers(m, "t_grid");
        if (t.front() < 0) throw ConfigError("\"t_grid\": times must be nonnegative");
        if (e == "winding-summary" && t.front() <= 0)
            throw ConfigError("\"t_grid\": times must be positive for the winding fit");
        if (m.count("schedule")) check_schedule_range(m, t.front(), t.front());
    }
    if (e == "lyapunov") {
        auto t = cfg_numbers(m, "t_grid");
        if (t.front() <= 0) throw ConfigError("\"t_grid\": times must be positive");
        if (in_window(t, cfg_real(m, "fit_lo"), cfg_real(m, "fit_hi")) < 4)
            throw ConfigError("\"t_grid\": fewer than four points in [fit_lo, fit_hi]");
    }
    if (e == "eternal" || e == "eternal-vb") {
        auto bg = cfg_numbers(m, "beta_grid");
        if (bg.size() < 3) throw ConfigError("\"beta_grid\": needs at least three points");
        if (bg.front() < 0) throw ConfigError("\"beta_grid\": temperatures must be nonnegative");
        auto mg = cfg_numbers(m, "mu_grid");
        if (!mg.empty()) {
            if (mg.size() < 4) throw ConfigError("\"mu_grid\": needs at least four points");
            if (mg.front() <= 0) throw ConfigError("\"mu_grid\": couplings must be positive");
            if (in_window(mg, cfg_real(m, "fit_lo"), cfg_real(m, "fit_hi")) < 4)
                throw ConfigError("\"mu_grid\": fewer than four points in [fit_lo, fit_hi]");
        }
    }
    if (e == "causal") {
        auto t0 = cfg_numbers(m, "t0_grid"), t1 = cfg_numbers(m, "t1_grid");
        if (t0.front() < 0) throw ConfigError("\"t0_grid\": offsets must be nonnegative");
        if (t1.front() < 0) throw ConfigError("\"t1_grid\": times must be nonnegative");
        check_schedule_range(m, t0.front(), t1.front());
    }
    if (e == "pg-compare") {
        if (cfg_real(m, "t0") < 0) throw ConfigError("\"t0\": must be nonnegative");
        if (cfg_numbers(m, "t1_grid").front() < 0)
            throw ConfigError("\"t1_grid\": times must be nonnegative");
    }
    if (e == "twopoint") {
        double b = cfg_real(m, "beta");
        if (b <= 0) throw ConfigError("\"beta\": must be positive");
        auto tau = cfg_numbers(m, "tau_grid");
        if (tau.front() < 0 || tau.back() > b)
            throw ConfigError("\"tau_grid\": entries must lie in [0, beta]");
    }
}

// ---------- shared experiment plumbing ----------

struct RunCtx {
    const ConfigMap& m;
    const ExperimentInfo& info;
    int threads = 0;
    ResultTable table;
    json results;
};

std::vector<Couplings> make_ensemble(ModelKind kind, const ConfigMap& m, int count,
                                     uint64_t stream = 0) {
    const int N = static_cast<int>(cfg_int(m, "N"));
    const int q = static_cast<int>(cfg_int(m, "q"));
    const double J = cfg_real(m, "J");
    std::vector<Couplings> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        uint64_t s = hash64(cfg_seed(m), stream + static_cast<uint64_t>(i));
        out.push_back(kind == ModelKind::syk ? sample_syk(N, q, J, s)
                                             : sample_pg_commuting(N, q, J, s));
    }
    return out;
}

std::vector<InteractionSlice> config_schedule(const ConfigMap& m) {
    std::vector<InteractionSlice> s;
    if (m.count("schedule"))
        for (const auto& p : cfg_pairs(m, "schedule")) s.push_back({p[0], p[1]});
    return s;
}

ProtocolConfig with_sign(ProtocolConfig cfg, int sign) {
    cfg.mu = sign * std::abs(cfg.mu);
    for (auto& s : cfg.schedule) s.mu = sign * std::abs(s.mu);
    return cfg;
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sem_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mu = mean_of(v), ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / (static_cast<double>(v.size() - 1) * static_cast<double>(v.size())));
}

const char* side_name(Side s) { return s == Side::left ? "left" : "right"; }

// ---------- experiments ----------

void run_warmup(RunCtx& c) {
    const int N = static_cast<int>(cfg_int(c.m, "N"));
    const auto mu_grid = cfg_numbers(c.m, "mu_grid");
    const Couplings coup =
        sample_syk(N, static_cast<int>(cfg_int(c.m, "q")), cfg_real(c.m, "J"),
                   hash64(cfg_seed(c.m), 0));
    c.table.columns = {"instantiation", "interaction", "mu", "I_RT", "I_closed_form"};
    json errs;
    for (InteractionKind kind : {InteractionKind::majorana_pairs, InteractionKind::qubit_pairs}) {
        const char* name = kind == InteractionKind::majorana_pairs ? "majorana_pairs" : "qubit_pairs";
        double worst = 0;
        for (double mu : mu_grid) {
            ProtocolConfig cfg;
            cfg.N = N;
            cfg.mu = mu;
            cfg.interaction = kind;
            const double I = run_quantum(cfg, coup).I_RT;
            const double s = std::sin(mu);
            const double closed =
                kind == InteractionKind::majorana_pairs ? 2 * std::log2(1 + s * s) : 0.0;
            worst = std::max(worst, std::abs(I - closed));
            c.table.rows.push_back({0LL, std::string(name), mu, I, closed});
        }
        errs[name] = worst;
    }
    c.results["max_abs_error"] = errs;
}

void run_mi_curve(RunCtx& c) {
    const auto ens = make_ensemble(ModelKind::syk, c.m, static_cast<int>(cfg_int(c.m, "instantiations")));
    const auto t_grid = cfg_numbers(c.m, "t_grid");
    ProtocolConfig base;
    base.N = static_cast<int>(cfg_int(c.m, "N"));
    base.beta = cfg_real(c.m, "beta");
    base.mu = cfg_real(c.m, "mu");
    base.interaction = cfg_interaction(c.m, "interaction");
    base.schedule = config_schedule(c.m);
    const auto pts = mi_curve(ens, base, t_grid, c.threads);

    c.table.columns = {"instantiation", "t", "sign", "I_RT"};
    std::vector<std::vector<double>> asym(t_grid.size());
    json tj, imj, ipj, amj;
    for (const auto& p : pts) {
        std::size_t ti = std::find(t_grid.begin(), t_grid.end(), p.t) - t_grid.begin();
        if (p.instantiation < 0) {
            tj.push_back(p.t);
            imj.push_back(p.I_minus);
            ipj.push_back(p.I_plus);
            amj.push_back(p.asymmetry);
            continue;
        }
        asym[ti].push_back(p.asymmetry);
        c.table.rows.push_back({static_cast<long long>(p.instantiation), p.t, -1LL, p.I_minus});
        c.table.rows.push_back({static_cast<long long>(p.instantiation), p.t, 1LL, p.I_plus});
    }
    json sems;
    std::size_t best = 0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        sems.push_back(sem_of(asym[i]));
        if (amj[i].get<double>() > amj[best].get<double>()) best = i;
    }
    c.results["t"] = tj;
    c.results["mean_I_minus"] = imj;
    c.results["mean_I_plus"] = ipj;
    c.results["mean_asymmetry"] = amj;
    c.results["sem_asymmetry"] = sems;
    c.results["peak"] = {{"t", t_grid[best]},
                         {"asymmetry", amj[best]},
                         {"sem", sems[best]}};
}

void run_winding(RunCtx& c) {
    const int N = static_cast<int>(cfg_int(c.m, "N"));
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const int fermion = static_cast<int>(cfg_int(c.m, "fermion"));
    const double beta = cfg_real(c.m, "beta"), mu = cfg_real(c.m, "mu"), t0 = cfg_real(c.m, "t0");
    const InteractionKind kind = cfg_interaction(c.m, "interaction");
    const ExpandEngine engine =
        cfg_text(c.m, "engine") == "direct" ? ExpandEngine::direct : ExpandEngine::butterfly;
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);

    c.table.columns = {"instantiation", "side", "stage", "s", "P", "re_Q", "im_Q"};
    json fits = json::array();
    struct Slot {
        SizeDistributions dist[2][2];  // [side][stage]
    };
    std::vector<Slot> slots(inst);
    parallel_for(static_cast<std::size_t>(inst) * 2, c.threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx / 2);
        const Side side = idx % 2 == 0 ? Side::left : Side::right;
        SizeData data = expand_thermal_fermion(ens[i], side, fermion, t0, beta, engine);
        data.measure = measure_for(kind);
        slots[i].dist[idx % 2][0] = size_distributions(data);
        slots[i].dist[idx % 2][1] = size_distributions(apply_interaction_phase(data, mu, kind));
    });
    for (int i = 0; i < inst; ++i)
        for (int sd = 0; sd < 2; ++sd)
            for (int st = 0; st < 2; ++st) {
                const auto& d = slots[i].dist[sd][st];
                const char* side = sd == 0 ? "left" : "right";
                const char* stage = st == 0 ? "pre" : "post";
                for (int s = 0; s <= N; ++s)
                    c.table.rows.push_back({static_cast<long long>(i), std::string(side),
                                            std::string(stage), static_cast<long long>(s),
                                            d.P[s], d.Q[s].real(), d.Q[s].imag()});
                const WindingFit f = winding_fit(d);
                const SizeMoments mom = size_moments(d);
                fits.push_back({{"instantiation", i},
                                {"side", side},
                                {"stage", stage},
                                {"slope", f.slope},
                                {"intercept", f.intercept},
                                {"weighted_r2", f.weighted_r2},
                                {"coherence", f.coherence},
                                {"mean_size", mom.mean},
                                {"stddev_size", mom.stddev}});
            }
    c.results["fits"] = fits;
}

void run_winding_summary(RunCtx& c) {
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const int fermion = static_cast<int>(cfg_int(c.m, "fermion"));
    const double beta = cfg_real(c.m, "beta");
    const InteractionKind kind = cfg_interaction(c.m, "interaction");
    const auto t_grid = cfg_numbers(c.m, "t_grid");
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);

    ProtocolConfig base;
    base.N = static_cast<int>(cfg_int(c.m, "N"));
    base.beta = beta;
    base.mu = cfg_real(c.m, "mu");
    base.interaction = kind;
    base.schedule = config_schedule(c.m);
    const auto pts = mi_curve(ens, base, t_grid, c.threads);

    struct Stat {
        WindingFit fit;
        SizeMoments mom;
    };
    const std::size_t G = t_grid.size();
    std::vector<Stat> stats(static_cast<std::size_t>(inst) * G);
    parallel_for(stats.size(), c.threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx / G);
        const double t = t_grid[idx % G];
        SizeData data = expand_thermal_fermion(ens[i], Side::left, fermion, t, beta);
        data.measure = measure_for(kind);
        const SizeDistributions d = size_distributions(data);
        stats[idx] = {winding_fit(d), size_moments(d)};
    });

    std::vector<const MiCurvePoint*> member(static_cast<std::size_t>(inst) * G, nullptr);
    std::vector<const MiCurvePoint*> means(G, nullptr);
    for (const auto& p : pts) {
        const std::size_t ti = std::find(t_grid.begin(), t_grid.end(), p.t) - t_grid.begin();
        if (p.instantiation < 0)
            means[ti] = &p;
        else
            member[static_cast<std::size_t>(p.instantiation) * G + ti] = &p;
    }

    c.table.columns = {"instantiation", "t",         "slope",      "intercept",
                       "weighted_r2",   "coherence", "mean_size",  "stddev_size",
                       "I_minus",       "I_plus",    "asymmetry"};
    for (int i = 0; i < inst; ++i)
        for (std::size_t ti = 0; ti < G; ++ti) {
            const auto& st = stats[static_cast<std::size_t>(i) * G + ti];
            const auto* p = member[static_cast<std::size_t>(i) * G + ti];
            c.table.rows.push_back({static_cast<long long>(i), t_grid[ti], st.fit.slope,
                                    st.fit.intercept, st.fit.weighted_r2, st.fit.coherence,
                                    st.mom.mean, st.mom.stddev, p->I_minus, p->I_plus,
                                    p->asymmetry});
        }

    json tj, slope_m, coh_m, size_m, asym_m;
    std::size_t best = 0;
    for (std::size_t ti = 0; ti < G; ++ti) {
        std::vector<double> sl, ch, mz;
        for (int i = 0; i < inst; ++i) {
            const auto& st = stats[static_cast<std::size_t>(i) * G + ti];
            sl.push_back(st.fit.slope);
            ch.push_back(st.fit.coherence);
            mz.push_back(st.mom.mean);
        }
        tj.push_back(t_grid[ti]);
        slope_m.push_back(mean_of(sl));
        coh_m.push_back(mean_of(ch));
        size_m.push_back(mean_of(mz));
        asym_m.push_back(means[ti]->asymmetry);
        if (means[ti]->asymmetry > means[best]->asymmetry) best = ti;
    }
    std::vector<double> gh;
    for (const auto& coup : ens) gh.push_back(thermal_size(coup, beta).G_half);
    c.results["t"] = tj;
    c.results["mean_slope"] = slope_m;
    c.results["mean_coherence"] = coh_m;
    c.results["mean_size"] = size_m;
    c.results["mean_asymmetry"] = asym_m;
    c.results["peak"] = {{"t", t_grid[best]}, {"asymmetry", means[best]->asymmetry}};
    c.results["thermal_G_half_mean"] = mean_of(gh);
}

void run_lyapunov(RunCtx& c) {
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const int fermion = static_cast<int>(cfg_int(c.m, "fermion"));
    const auto beta_grid = cfg_numbers(c.m, "beta_grid");
    const auto t_grid = cfg_numbers(c.m, "t_grid");
    const double lo = cfg_real(c.m, "fit_lo"), hi = cfg_real(c.m, "fit_hi");
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);

    const std::size_t B = beta_grid.size(), G = t_grid.size();
    std::vector<double> slopes(static_cast<std::size_t>(inst) * B * G);
    parallel_for(slopes.size(), c.threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx / (B * G));
        const double beta = beta_grid[(idx / G) % B];
        const double t = t_grid[idx % G];
        const SizeDistributions d =
            size_distributions(expand_thermal_fermion(ens[i], Side::left, fermion, t, beta));
        slopes[idx] = std::abs(winding_fit(d).slope);
    });

    c.table.columns = {"instantiation", "beta", "t", "abs_slope"};
    for (int i = 0; i < inst; ++i)
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t g = 0; g < G; ++g)
                c.table.rows.push_back({static_cast<long long>(i), beta_grid[b], t_grid[g],
                                        slopes[(static_cast<std::size_t>(i) * B + b) * G + g]});

    json per_beta = json::array();
    for (std::size_t b = 0; b < B; ++b) {
        json lam = json::array();
        std::vector<double> ok;
        for (int i = 0; i < inst; ++i) {
            std::vector<std::pair<double, double>> series;
            for (std::size_t g = 0; g < G; ++g)
                series.push_back(
                    {t_grid[g], slopes[(static_cast<std::size_t>(i) * B + b) * G + g]});
            try {
                const double l = lyapunov_fit(series, lo, hi).lambda;
                lam.push_back(l);
                ok.push_back(l);
            } catch (const std::exception&) {
                lam.push_back(nullptr);
            }
        }
        json entry = {{"beta", beta_grid[b]},
                      {"lambda", lam},
                      {"lambda_mean", mean_of(ok)},
                      {"lambda_sem", sem_of(ok)}};
        if (beta_grid[b] > 0) entry["bound"] = 2 * std::acos(-1.0) / beta_grid[b];
        per_beta.push_back(entry);
    }
    c.results["per_beta"] = per_beta;
}

void run_eternal_impl(RunCtx& c, InteractionKind kind) {
    const int N = static_cast<int>(cfg_int(c.m, "N"));
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const int k = static_cast<int>(cfg_int(c.m, "k"));
    const double mu = cfg_real(c.m, "mu");
    const auto beta_grid = cfg_numbers(c.m, "beta_grid");
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);

    struct Slot {
        SpectrumResult spec;
        OptimalBeta ob;
        double fom = 0;
    };
    std::vector<Slot> slots(inst);
    parallel_for(static_cast<std::size_t>(inst), c.threads, [&](std::size_t i) {
        slots[i].spec = eternal_spectrum(ens[i], kind, mu, k);
        slots[i].ob = optimal_beta(ens[i], kind, mu, beta_grid);
        slots[i].fom = sl2r_figure_of_merit(ens[i], kind, mu, slots[i].ob.beta_star);
    });

    c.table.columns = {"instantiation", "index", "eigenvalue"};
    json members = json::array();
    std::vector<double> e0s, gaps, betas, overlaps, foms, splits;
    for (int i = 0; i < inst; ++i) {
        const auto& s = slots[i];
        for (std::size_t j = 0; j < s.spec.eigenvalues.size(); ++j)
            c.table.rows.push_back({static_cast<long long>(i), static_cast<long long>(j),
                                    s.spec.eigenvalues[j]});
        json mj = {{"E0", s.spec.E0},       {"gap", s.spec.gap},
                   {"beta_star", s.ob.beta_star}, {"overlap", s.ob.overlap},
                   {"boundary", s.ob.boundary},   {"fom", s.fom}};
        if (kind == InteractionKind::qubit_pairs) {
            double split = 0;
            for (std::size_t p = 0; 2 * p + 1 < s.spec.eigenvalues.size(); ++p)
                split = std::max(split,
                                 s.spec.eigenvalues[2 * p + 1] - s.spec.eigenvalues[2 * p]);
            mj["pair_split_max"] = split;
            splits.push_back(split);
        }
        members.push_back(mj);
        e0s.push_back(s.spec.E0);
        gaps.push_back(s.spec.gap);
        betas.push_back(s.ob.beta_star);
        overlaps.push_back(s.ob.overlap);
        foms.push_back(s.fom);
    }
    c.results["members"] = members;
    c.results["E0_mean"] = mean_of(e0s);
    c.results["gap_mean"] = mean_of(gaps);
    c.results["gap_sem"] = sem_of(gaps);
    c.results["beta_star_mean"] = mean_of(betas);
    c.results["overlap_mean"] = mean_of(overlaps);
    c.results["fom_mean"] = mean_of(foms);
    if (kind == InteractionKind::qubit_pairs && !splits.empty()) {
        const double worst = *std::max_element(splits.begin(), splits.end());
        c.results["pair_split_max"] = worst;
        c.results["doubly_degenerate"] = worst < 1e-8;
    }

    const auto mu_grid = cfg_numbers(c.m, "mu_grid");
    if (!mu_grid.empty()) {
        const auto gp = gap_power_law(ens, kind, mu_grid, cfg_real(c.m, "fit_lo"),
                                      cfg_real(c.m, "fit_hi"), c.threads);
        c.results["gap_power_law"] = {{"mu", gp.mu},
                                      {"mean_gap", gp.mean_gap},
                                      {"a", gp.fit.a},
                                      {"b", gp.fit.b},
                                      {"c", gp.fit.c},
                                      {"rms", gp.fit.rms},
                                      {"b_stderr", gp.fit.b_stderr},
                                      {"converged", gp.fit.converged}};
    }
    if (cfg_bool(c.m, "symmetry_report") && N <= 12) {
        const SymmetryReport rep = discrete_symmetries(ens[0], kind);
        c.results["symmetries"] = {{"hamiltonian_invariant", rep.hamiltonian_invariant},
                                   {"q_squared_is_parity", rep.q_squared_is_parity},
                                   {"q_parity_commutes", rep.q_parity_commutes},
                                   {"q_parity_anticommutes", rep.q_parity_anticommutes}};
    }
}

void run_eternal(RunCtx& c) { run_eternal_impl(c, InteractionKind::majorana_pairs); }
void run_eternal_vb(RunCtx& c) { run_eternal_impl(c, InteractionKind::qubit_pairs); }

void run_causal(RunCtx& c) {
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const auto t0_grid = cfg_numbers(c.m, "t0_grid");
    const auto t1_grid = cfg_numbers(c.m, "t1_grid");
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);
    ProtocolConfig base;
    base.N = static_cast<int>(cfg_int(c.m, "N"));
    base.beta = cfg_real(c.m, "beta");
    base.mu = cfg_real(c.m, "mu");
    base.interaction = cfg_interaction(c.m, "interaction");
    base.schedule = config_schedule(c.m);

    c.table.columns = {"instantiation", "t0", "t1_star", "asymmetry"};
    std::vector<std::vector<double>> t1s(t0_grid.size()), asym(t0_grid.size());
    for (int i = 0; i < inst; ++i) {
        const auto pts = causal_ordering_scan(ens[i], base, t0_grid, t1_grid, c.threads);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            c.table.rows.push_back({static_cast<long long>(i), pts[j].t0, pts[j].t1_star,
                                    pts[j].asymmetry});
            t1s[j].push_back(pts[j].t1_star);
            asym[j].push_back(pts[j].asymmetry);
        }
    }
    json t0j, t1j, aj;
    for (std::size_t j = 0; j < t0_grid.size(); ++j) {
        t0j.push_back(t0_grid[j]);
        t1j.push_back(mean_of(t1s[j]));
        aj.push_back(mean_of(asym[j]));
    }
    c.results["t0"] = t0j;
    c.results["mean_t1_star"] = t1j;
    c.results["mean_asymmetry"] = aj;
}

void run_classical(RunCtx& c) {
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const auto t_grid = cfg_numbers(c.m, "t_grid");
    const double cutoff = cfg_real(c.m, "cutoff");
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);
    ProtocolConfig base;
    base.N = static_cast<int>(cfg_int(c.m, "N"));
    base.beta = cfg_real(c.m, "beta");
    base.mu = cfg_real(c.m, "mu");
    base.interaction = InteractionKind::qubit_pairs;

    struct Slot {
        double quantum_I = 0, mixture_I = 0;
        std::vector<ClassicalOutcome> outcomes;
    };
    const std::size_t G = t_grid.size();
    std::vector<Slot> slots(static_cast<std::size_t>(inst) * G);
    parallel_for(slots.size(), c.threads, [&](std::size_t idx) {
        ProtocolConfig cfg = base;
        cfg.t0 = cfg.t1 = t_grid[idx % G];
        slots[idx].quantum_I = run_quantum(cfg, ens[idx / G]).I_RT;
        cfg.channel = ChannelKind::classical;
        MeasurePolicy policy;
        policy.cutoff = cutoff;
        TeleportResult res = run_classical(cfg, ens[idx / G], policy);
        slots[idx].mixture_I = res.I_RT;
        slots[idx].outcomes = std::move(res.outcomes);
    });

    c.table.columns = {"instantiation", "channel", "t", "outcome", "probability", "I_RT"};
    json points = json::array();
    bool any_above = false, any_below = false;
    for (int i = 0; i < inst; ++i)
        for (std::size_t g = 0; g < G; ++g) {
            const auto& s = slots[static_cast<std::size_t>(i) * G + g];
            c.table.rows.push_back({static_cast<long long>(i), std::string("quantum"), t_grid[g],
                                    0LL, 1.0, s.quantum_I});
            double lo = std::numeric_limits<double>::infinity(), hi = 0, wm = 0;
            for (const auto& o : s.outcomes) {
                c.table.rows.push_back({static_cast<long long>(i), std::string("classical"),
                                        t_grid[g], static_cast<long long>(o.bits), o.probability,
                                        o.I_RT});
                lo = std::min(lo, o.I_RT);
                hi = std::max(hi, o.I_RT);
                wm += o.probability * o.I_RT;
                if (o.I_RT > s.quantum_I) any_above = true;
                if (o.I_RT < s.quantum_I) any_below = true;
            }
            points.push_back({{"instantiation", i},
                              {"t", t_grid[g]},
                              {"quantum_I", s.quantum_I},
                              {"mixture_I", s.mixture_I},
                              {"n_outcomes", s.outcomes.size()},
                              {"min_I", lo},
                              {"max_I", hi},
                              {"weighted_mean_I", wm}});
        }
    c.results["points"] = points;
    c.results["any_outcome_above_quantum"] = any_above;
    c.results["any_outcome_below_quantum"] = any_below;
}

void run_tripartite(RunCtx& c) {
    const int N = static_cast<int>(cfg_int(c.m, "N"));
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const auto t_grid = cfg_numbers(c.m, "t_grid");
    const auto ens = make_ensemble(ModelKind::syk, c.m, inst);
    ProtocolConfig base;
    base.N = N;
    base.beta = cfg_real(c.m, "beta");
    base.mu = cfg_real(c.m, "mu");
    base.interaction = cfg_interaction(c.m, "interaction");
    base.schedule = config_schedule(c.m);

    const ProtocolRegister reg{N};
    std::vector<int> R{reg.r_qubit()}, L, T{reg.t_qubit()};
    for (int q = 0; q < N / 2; ++q) L.push_back(reg.left_first() + q);

    const std::size_t G = t_grid.size();
    std::vector<MutualInfoRecord> recs(static_cast<std::size_t>(inst) * G * 2);
    parallel_for(recs.size(), c.threads, [&](std::size_t idx) {
        const int sign = idx % 2 == 0 ? -1 : 1;
        ProtocolConfig cfg = with_sign(base, sign);
        cfg.t0 = cfg.t1 = t_grid[(idx / 2) % G];
        const TeleportResult res = run_quantum(cfg, ens[idx / (2 * G)]);
        recs[idx] = mutual_info_record(res.final_state, R, L, T);
    });

    c.table.columns = {"instantiation", "sign", "t",    "I_RT", "I_RL", "I_RLT", "I3",
                       "p_R",           "p_T",  "p_L",  "p_RT", "p_RL", "p_LT",  "p_RLT"};
    std::vector<std::vector<double>> i3m(G), i3p(G), irtm(G), irtp(G);
    for (int i = 0; i < inst; ++i)
        for (std::size_t g = 0; g < G; ++g)
            for (int s = 0; s < 2; ++s) {
                const auto& r = recs[(static_cast<std::size_t>(i) * G + g) * 2 + s];
                c.table.rows.push_back({static_cast<long long>(i), s == 0 ? -1LL : 1LL,
                                        t_grid[g], r.I_RT, r.I_RL, r.I_RLT, r.I3, r.p_R, r.p_T,
                                        r.p_L, r.p_RT, r.p_RL, r.p_LT, r.p_RLT});
                (s == 0 ? i3m : i3p)[g].push_back(r.I3);
                (s == 0 ? irtm : irtp)[g].push_back(r.I_RT);
            }
    json tj, i3mj, i3pj, irtmj, irtpj;
    std::size_t most_negative = 0;
    for (std::size_t g = 0; g < G; ++g) {
        tj.push_back(t_grid[g]);
        i3mj.push_back(mean_of(i3m[g]));
        i3pj.push_back(mean_of(i3p[g]));
        irtmj.push_back(mean_of(irtm[g]));
        irtpj.push_back(mean_of(irtp[g]));
        if (i3mj[g].get<double>() < i3mj[most_negative].get<double>()) most_negative = g;
    }
    c.results["t"] = tj;
    c.results["mean_I3_minus"] = i3mj;
    c.results["mean_I3_plus"] = i3pj;
    c.results["mean_I_RT_minus"] = irtmj;
    c.results["mean_I_RT_plus"] = irtpj;
    c.results["most_negative_I3"] = {{"t", t_grid[most_negative]}, {"I3", i3mj[most_negative]}};
}

void run_otoc(RunCtx& c) {
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const int fermion = static_cast<int>(cfg_int(c.m, "fermion"));
    const double beta = cfg_real(c.m, "beta");
    const double mu = std::abs(cfg_real(c.m, "mu"));
    const double t_r = cfg_real(c.m, "t_r");
    const InteractionKind kind = cfg_interaction(c.m, "interaction");
    const auto t_grid = cfg_numbers(c.m, "t_grid");
    const auto ens = make_ensemble(cfg_model(c.m, "model"), c.m, inst);

    const std::size_t G = t_grid.size();
    std::vector<cplx> vals(static_cast<std::size_t>(inst) * G * 2);
    parallel_for(vals.size(), c.threads, [&](std::size_t idx) {
        const int sign = idx % 2 == 0 ? -1 : 1;
        const double t = t_grid[(idx / 2) % G];
        vals[idx] = otoc_H(ens[idx / (2 * G)], kind, sign * mu, t, t_r, fermion, beta);
    });

    c.table.columns = {"instantiation", "sign", "t_l", "re_H", "im_H", "C"};
    std::vector<std::vector<double>> rem(G), rep(G), imm(G), imp(G);
    for (int i = 0; i < inst; ++i)
        for (std::size_t g = 0; g < G; ++g)
            for (int s = 0; s < 2; ++s) {
                const cplx h = vals[(static_cast<std::size_t>(i) * G + g) * 2 + s];
                c.table.rows.push_back({static_cast<long long>(i), s == 0 ? -1LL : 1LL,
                                        t_grid[g], h.real(), h.imag(), -2 * h.imag()});
                (s == 0 ? rem : rep)[g].push_back(h.real());
                (s == 0 ? imm : imp)[g].push_back(h.imag());
            }
    json tj, remj, repj, immj, impj;
    for (std::size_t g = 0; g < G; ++g) {
        tj.push_back(t_grid[g]);
        remj.push_back(mean_of(rem[g]));
        repj.push_back(mean_of(rep[g]));
        immj.push_back(mean_of(imm[g]));
        impj.push_back(mean_of(imp[g]));
    }
    c.results["t_l"] = tj;
    c.results["mean_re_H_minus"] = remj;
    c.results["mean_re_H_plus"] = repj;
    c.results["mean_im_H_minus"] = immj;
    c.results["mean_im_H_plus"] = impj;
}

void run_pg_compare(RunCtx& c) {
    const auto t1_grid = cfg_numbers(c.m, "t1_grid");
    const double t0 = cfg_real(c.m, "t0");
    const int n_syk = static_cast<int>(cfg_int(c.m, "syk_instantiations"));
    const int n_pg = static_cast<int>(cfg_int(c.m, "pg_instantiations"));
    const auto ens_syk = make_ensemble(ModelKind::syk, c.m, n_syk);
    const auto ens_pg = make_ensemble(ModelKind::pg_commuting, c.m, n_pg, uint64_t{1} << 32);
    ProtocolConfig base;
    base.N = static_cast<int>(cfg_int(c.m, "N"));
    base.beta = cfg_real(c.m, "beta");
    base.mu = cfg_real(c.m, "mu");
    base.t0 = t0;

    const std::size_t G = t1_grid.size();
    const std::size_t per_model_syk = static_cast<std::size_t>(n_syk) * G * 2;
    std::vector<double> vals(per_model_syk + static_cast<std::size_t>(n_pg) * G * 2);
    parallel_for(vals.size(), c.threads, [&](std::size_t idx) {
        const bool pg = idx >= per_model_syk;
        const std::size_t local = pg ? idx - per_model_syk : idx;
        const int sign = local % 2 == 0 ? -1 : 1;
        ProtocolConfig cfg = with_sign(base, sign);
        cfg.t1 = t1_grid[(local / 2) % G];
        const Couplings& coup = pg ? ens_pg[local / (2 * G)] : ens_syk[local / (2 * G)];
        vals[idx] = run_quantum(cfg, coup).I_RT;
    });

    c.table.columns = {"model", "instantiation", "t1", "sign", "I_RT"};
    json models;
    for (int which = 0; which < 2; ++which) {
        const char* name = which == 0 ? "syk" : "pg_commuting";
        const int n = which == 0 ? n_syk : n_pg;
        const std::size_t off = which == 0 ? 0 : per_model_syk;
        std::vector<std::vector<double>> im(G), ip(G);
        for (int i = 0; i < n; ++i)
            for (std::size_t g = 0; g < G; ++g)
                for (int s = 0; s < 2; ++s) {
                    const double v = vals[off + (static_cast<std::size_t>(i) * G + g) * 2 + s];
                    c.table.rows.push_back({std::string(name), static_cast<long long>(i),
                                            t1_grid[g], s == 0 ? -1LL : 1LL, v});
                    (s == 0 ? im : ip)[g].push_back(v);
                }
        json tj, imj, ipj, aj;
        std::size_t best = 0;
        for (std::size_t g = 0; g < G; ++g) {
            tj.push_back(t1_grid[g]);
            imj.push_back(mean_of(im[g]));
            ipj.push_back(mean_of(ip[g]));
            aj.push_back(mean_of(im[g]) - mean_of(ip[g]));
            if (imj[g].get<double>() > imj[best].get<double>()) best = g;
        }
        models[name] = {{"t1", tj},
                        {"mean_I_minus", imj},
                        {"mean_I_plus", ipj},
                        {"mean_asymmetry", aj},
                        {"peak", {{"t1", t1_grid[best]}, {"I_minus", imj[best]}}}};
    }
    c.results["models"] = models;
}

void run_twopoint(RunCtx& c) {
    const int inst = static_cast<int>(cfg_int(c.m, "instantiations"));
    const int fermion = static_cast<int>(cfg_int(c.m, "fermion"));
    const double beta = cfg_real(c.m, "beta"), J = cfg_real(c.m, "J");
    const auto tau_grid = cfg_numbers(c.m, "tau_grid");
    const auto ens = make_ensemble(cfg_model(c.m, "model"), c.m, inst);

    const std::size_t G = tau_grid.size();
    std::vector<double> vals(static_cast<std::size_t>(inst) * G);
    parallel_for(vals.size(), c.threads, [&](std::size_t idx) {
        vals[idx] = euclidean_2pt(ens[idx / G], fermion, tau_grid[idx % G], beta);
    });

    c.table.columns = {"instantiation", "tau", "G"};
    for (int i = 0; i < inst; ++i)
        for (std::size_t g = 0; g < G; ++g)
            c.table.rows.push_back({static_cast<long long>(i), tau_grid[g],
                                    vals[static_cast<std::size_t>(i) * G + g]});

    json tj, mj, sj, cj, dj;
    for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> col;
        for (int i = 0; i < inst; ++i) col.push_back(vals[static_cast<std::size_t>(i) * G + g]);
        const double m = mean_of(col), s = sem_of(col);
        const double closed = std::exp(-J * J * tau_grid[g] * (beta - tau_grid[g]));
        tj.push_back(tau_grid[g]);
        mj.push_back(m);
        sj.push_back(s);
        cj.push_back(closed);
        dj.push_back(s > 0 ? std::abs(m - closed) / s : 0.0);
    }
    c.results["tau"] = tj;
    c.results["mean_G"] = mj;
    c.results["sem_G"] = sj;
    c.results["closed_form"] = cj;
    c.results["sigma_distance"] = dj;
}

struct RunnerEntry {
    const char* name;
    void (*fn)(RunCtx&);
};

constexpr RunnerEntry RUNNERS[] = {
    {"mi-curve", run_mi_curve},   {"warmup", run_warmup},
    {"winding", run_winding},     {"winding-summary", run_winding_summary},
    {"lyapunov", run_lyapunov},   {"eternal", run_eternal},
    {"eternal-vb", run_eternal_vb}, {"causal", run_causal},
    {"classical", run_classical}, {"tripartite", run_tripartite},
    {"otoc", run_otoc},           {"pg-compare", run_pg_compare},
    {"twopoint", run_twopoint},
};

// ---------- output ----------

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string render_csv(const ResultTable& t, const std::string& experiment, uint64_t hash,
                       uint64_t seed) {
    std::string out;
    out += "# experiment = " + experiment + "\n";
    out += "# config_hash = " + hex16(hash) + "\n";
    out += "# seed = " + fmt_int(static_cast<long long>(seed)) + "\n";
    out += "# version = " + std::string(version_string) + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, long long>)
                        out += fmt_int(v);
                    else if constexpr (std::is_same_v<T, double>)
                        out += fmt_double(v);
                    else
                        out += v;
                },
                row[i]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace

// ---------- public API ----------

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap m;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(strip_comment(raw, line));
        if (s.empty()) continue;
        if (s.front() == '[')
            bad_line(line, "section headers are not supported; use flat keys");
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) bad_line(line, "expected key = value");
        std::string key = trim(s.substr(0, eq));
        if (!valid_key(key)) bad_line(line, "invalid key '" + key + "'");
        if (m.count(key)) bad_line(line, "duplicate key '" + key + "'");
        m[key] = parse_value(trim(s.substr(eq + 1)), line);
    }
    return m;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const ConfigMap& cfg) {
    std::string out;
    for (const auto& [key, v] : cfg) {
        out += key + " = ";
        switch (v.kind) {
            case ConfigValue::Kind::boolean: out += v.b ? "true" : "false"; break;
            case ConfigValue::Kind::integer: out += fmt_int(v.i); break;
            case ConfigValue::Kind::real: out += fmt_double(v.d); break;
            case ConfigValue::Kind::text: out += "\"" + v.s + "\""; break;
            case ConfigValue::Kind::numbers: {
                out += "[";
                for (std::size_t i = 0; i < v.numbers.size(); ++i)
                    out += (i ? ", " : "") + fmt_double(v.numbers[i]);
                out += "]";
                break;
            }
            case ConfigValue::Kind::pairs: {
                out += "[";
                for (std::size_t i = 0; i < v.pairs.size(); ++i)
                    out += (i ? ", [" : "[") + fmt_double(v.pairs[i][0]) + ", " +
                           fmt_double(v.pairs[i][1]) + "]";
                out += "]";
                break;
            }
        }
        out += "\n";
    }
    return out;
}

uint64_t config_hash(const std::string& canonical_text) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical_text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

const std::vector<ExperimentInfo>& experiment_registry() {
    static const std::vector<ExperimentInfo> reg = build_registry();
    return reg;
}

const ExperimentInfo* find_experiment(const std::string& name) {
    for (const auto& e : experiment_registry())
        if (e.name == name) return &e;
    return nullptr;
}

ConfigMap resolve_config(const std::string& experiment, ConfigMap user,
                         std::optional<uint64_t> seed_override) {
    const ExperimentInfo* info = find_experiment(experiment);
    if (!info) {
        std::string names;
        for (const auto& e : experiment_registry()) names += (names.empty() ? "" : ", ") + e.name;
        throw ConfigError("unknown experiment \"" + experiment + "\"; expected one of: " + names);
    }
    if (auto it = user.find("experiment"); it != user.end()) {
        if (it->second.kind != ConfigValue::Kind::text || it->second.s != experiment)
            throw ConfigError("\"experiment\": config names a different experiment than the one "
                              "being run");
        user.erase(it);
    }
    for (const auto& [key, value] : user) {
        (void)value;
        if (key == "N" || key == "seed") continue;
        bool known = false;
        for (const auto& [dk, dv] : info->defaults)
            if (dk == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown field \"" + key + "\" for experiment \"" + experiment +
                              "\"");
    }
    for (const auto& [dk, dv] : info->defaults)
        if (!user.count(dk)) user[dk] = dv;
    if (seed_override) user["seed"] = cvi(static_cast<long long>(*seed_override));
    if (!user.count("seed")) user["seed"] = cvi(0);
    need(user, "N");
    user["experiment"] = cvs(experiment.c_str());
    validate_config(*info, user);
    return user;
}

RunPaths run_experiment(const std::string& experiment, const ConfigMap& user_config,
                        const RunOptions& opt) {
    const ConfigMap resolved = resolve_config(experiment, user_config, opt.seed);
    const std::string text = serialize_config(resolved);
    const uint64_t hash = config_hash(text);
    const uint64_t seed = cfg_seed(resolved);
    const ExperimentInfo& info = *find_experiment(experiment);

    fs::path dir = fs::path(opt.out_dir) / experiment / hex16(hash);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("\"out\": cannot create directory " + dir.string());

    RunPaths paths;
    paths.dir = dir.string();
    paths.series_csv = (dir / "series.csv").string();
    paths.summary_json = (dir / "summary.json").string();
    paths.resolved_toml = (dir / "config.resolved.toml").string();

    try {
        RunCtx ctx{resolved, info, opt.threads, {}, json::object()};
        bool ran = false;
        for (const auto& r : RUNNERS)
            if (experiment == r.name) {
                r.fn(ctx);
                ran = true;
                break;
            }
        if (!ran) throw ConfigError("unknown experiment \"" + experiment + "\"");

        json summary;
        summary["experiment"] = experiment;
        summary["config_hash"] = hex16(hash);
        summary["seed"] = seed;
        summary["version"] = version_string;
        summary["scale_note"] = "desk-scale run at N=" +
                                fmt_int(cfg_int(resolved, "N")) +
                                "; full-scale reference: " + info.reference_scale;
        summary["results"] = ctx.results;

        write_text_file(paths.resolved_toml, text);
        write_text_file(paths.series_csv, render_csv(ctx.table, experiment, hash, seed));
        write_text_file(paths.summary_json, summary.dump(1) + "\n");
    } catch (...) {
        std::error_code rec;
        fs::remove_all(dir, rec);
        throw;
    }
    return paths;
}

RunPaths run_experiment_file(const std::string& experiment, const std::string& config_path,
                             const RunOptions& opt) {
    return run_experiment(experiment, load_config_file(config_path), opt);
}

}  // namespace whlab
