#include "fracwave/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fracwave/direct.hpp"
#include "fracwave/errors.hpp"
#include "fracwave/expr.hpp"
#include "fracwave/fracops.hpp"
#include "fracwave/inverse.hpp"
#include "fracwave/mlf.hpp"
#include "fracwave/spectral.hpp"
#include "fracwave/types.hpp"
#include "fracwave/util.hpp"

namespace fracwave::scenario {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config ---

class Cfg {
  public:
    explicit Cfg(json j) : j_(std::move(j)) {}

    const json& root() const { return j_; }

    const json* find(const std::string& path) const {
        const json* cur = &j_;
        std::size_t start = 0;
        while (start <= path.size()) {
            std::size_t dot = path.find('.', start);
            std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
            if (!cur->is_object() || !cur->contains(key)) return nullptr;
            cur = &(*cur)[key];
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        return cur;
    }

    bool has(const std::string& path) const { return find(path) != nullptr; }

    const json& need(const std::string& path) const {
        const json* n = find(path);
        if (!n) throw ConfigError("missing field: " + path);
        return *n;
    }

    double num(const std::string& path) const {
        const json& n = need(path);
        if (!n.is_number()) throw ConfigError("field " + path + " must be a number");
        return n.get<double>();
    }
    double num_or(const std::string& path, double def) const {
        return has(path) ? num(path) : def;
    }

    std::size_t uint(const std::string& path) const {
        const json& n = need(path);
        if (!n.is_number_integer() || n.get<long long>() < 0)
            throw ConfigError("field " + path + " must be a non-negative integer");
        return static_cast<std::size_t>(n.get<long long>());
    }
    std::size_t uint_or(const std::string& path, std::size_t def) const {
        return has(path) ? uint(path) : def;
    }

    long long int_or(const std::string& path, long long def) const {
        if (!has(path)) return def;
        const json& n = need(path);
        if (!n.is_number_integer()) throw ConfigError("field " + path + " must be an integer");
        return n.get<long long>();
    }

    std::string str(const std::string& path) const {
        const json& n = need(path);
        if (!n.is_string()) throw ConfigError("field " + path + " must be a string");
        return n.get<std::string>();
    }
    std::string str_or(const std::string& path, const std::string& def) const {
        return has(path) ? str(path) : def;
    }

    bool flag_or(const std::string& path, bool def) const {
        if (!has(path)) return def;
        const json& n = need(path);
        if (!n.is_boolean()) throw ConfigError("field " + path + " must be a boolean");
        return n.get<bool>();
    }

    std::vector<double> numbers(const std::string& path) const {
        const json& n = need(path);
        if (!n.is_array()) throw ConfigError("field " + path + " must be an array of numbers");
        std::vector<double> out;
        out.reserve(n.size());
        for (const auto& e : n) {
            if (!e.is_number()) throw ConfigError("field " + path + " must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    /// A closed-form field: accepts a string expression or a bare number.
    expr::Expr expression(const std::string& path) const {
        const json& n = need(path);
        if (n.is_number()) return expr::Expr::parse(format_double(n.get<double>()));
        if (!n.is_string()) throw ConfigError("field " + path + " must be an expression string");
        try {
            return expr::Expr::parse(n.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError("field " + path + ": " + e.what());
        }
    }

  private:
    json j_;
};

json parse_override_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return json(text);  // fall back to a plain string
    return v;
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        std::size_t eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key.path=value, got \"" + ov + "\"");
        std::string path = ov.substr(0, eq);
        json* cur = &j;
        std::size_t start = 0;
        for (;;) {
            std::size_t dot = path.find('.', start);
            std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
            if (key.empty()) throw ConfigError("--set path has an empty segment: " + path);
            if (dot == std::string::npos) {
                (*cur)[key] = parse_override_value(ov.substr(eq + 1));
                break;
            }
            if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
            cur = &(*cur)[key];
            start = dot + 1;
        }
    }
}

// ------------------------------------------------------------------- csv ---

class CsvFile {
  public:
    CsvFile(const fs::path& dir, const std::string& name, RunReport& rep)
        : out_(dir / name, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open output file " + (dir / name).string());
        rep.outputs.push_back(name);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void row_numbers(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(vals[i]);
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

// ---------------------------------------------------------------- checks ---

/// Fixed relation per check name; a config may tune thresholds under
/// "checks", never invent names.
class CheckSet {
  public:
    CheckSet(const Cfg& cfg, std::string task) : task_(std::move(task)) {
        if (const json* c = cfg.find("checks")) {
            if (!c->is_object()) throw ConfigError("field checks must be an object");
            for (const auto& [k, v] : c->items()) {
                if (!v.is_number())
                    throw ConfigError("field checks." + k + " must be a numeric threshold");
                overrides_[k] = v.get<double>();
            }
        }
    }

    void add(RunReport& rep, const std::string& name, double value, double default_threshold,
             const std::string& relation) {
        Check c;
        c.name = name;
        c.value = value;
        c.threshold = default_threshold;
        if (auto it = overrides_.find(name); it != overrides_.end()) {
            c.threshold = it->second;
            consumed_.insert(name);
        }
        c.relation = relation;
        c.pass = relation == "<=" ? value <= c.threshold : value >= c.threshold;
        rep.checks.push_back(c);
    }

    /// Call after all checks are declared: unknown names are config errors,
    /// not silently skipped checks.
    void finish() const {
        for (const auto& [k, v] : overrides_) {
            if (!consumed_.count(k))
                throw ConfigError("checks." + k + " is not a check of task " + task_);
        }
    }

  private:
    std::string task_;
    std::map<std::string, double> overrides_;
    std::set<std::string> consumed_;
};

// -------------------------------------------------------------- problems ---

spectral::Coefficient coefficient_from(const Cfg& cfg, const std::string& path, double def) {
    if (!cfg.has(path)) return spectral::Coefficient::constant(def);
    const json& n = cfg.need(path);
    if (n.is_number()) return spectral::Coefficient::constant(n.get<double>());
    expr::Expr e = cfg.expression(path);
    return spectral::Coefficient::of([e](double x) { return e.at_x(x); });
}

struct SpaceSetup {
    bool is_rect = false;
    spectral::OperatorSpec op1, op2;
    std::size_t J1 = 256, J2 = 0;
    std::size_t N = 0;  // resolved mode count
    std::shared_ptr<const spectral::ModalBasis> basis;
};

SpaceSetup build_space(const Cfg& cfg) {
    SpaceSetup s;
    const std::string kind = cfg.str_or("problem.space.kind", "interval");
    s.op1.ell = cfg.num_or("problem.space.ell", 1.0);
    s.op1.delta = cfg.num_or("problem.space.delta", 1e-8);
    s.op1.a = coefficient_from(cfg, "problem.space.a", 1.0);
    s.op1.c = coefficient_from(cfg, "problem.space.c", 0.0);
    s.J1 = cfg.uint_or("problem.space.J", 256);
    std::size_t n_req = cfg.uint_or("problem.N", 0);
    if (kind == "interval") {
        s.N = n_req > 0 ? n_req : std::min<std::size_t>(s.J1 / 4, 64);
        s.basis = std::make_shared<spectral::ModalBasis>(spectral::eigenpairs(s.op1, s.N, s.J1));
    } else if (kind == "rectangle") {
        s.is_rect = true;
        if (n_req == 0) throw ConfigError("field problem.N is required for a rectangle");
        s.N = n_req;
        s.op2.ell = cfg.num_or("problem.space.ell2", s.op1.ell);
        s.op2.delta = s.op1.delta;
        s.op2.a = coefficient_from(cfg, "problem.space.a2", 1.0);
        s.op2.c = coefficient_from(cfg, "problem.space.c2", 0.0);
        s.J2 = cfg.uint_or("problem.space.J2", s.J1);
        s.basis = std::make_shared<spectral::ModalBasis>(
            spectral::tensor_basis(s.op1, s.op2, s.N, s.J1, s.J2));
    } else {
        throw ConfigError("field problem.space.kind must be \"interval\" or \"rectangle\"");
    }
    return s;
}

std::vector<double> sample_space(const expr::Expr& e, const spectral::ModalBasis& b) {
    std::vector<double> out(b.n_nodes());
    if (b.is_interval) {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = e.at_x(b.x[j]);
    } else {
        for (std::size_t i1 = 0; i1 <= b.J1; ++i1)
            for (std::size_t i2 = 0; i2 <= b.J2; ++i2)
                out[i1 * (b.J2 + 1) + i2] = e.at_xy(b.x1[i1], b.x2[i2]);
    }
    return out;
}

struct ProblemBundle {
    direct::ProblemSpec p;
    SpaceSetup space;
};

ProblemBundle build_problem(const Cfg& cfg) {
    ProblemBundle b;
    b.space = build_space(cfg);
    b.p.ord = FracOrder(cfg.num("problem.alpha"));
    b.p.grid = TimeGrid(cfg.num_or("problem.T", 1.0), cfg.uint("problem.M"));
    b.p.op = b.space.op1;
    b.p.N = b.space.N;
    b.p.J = b.space.J1;
    b.p.basis = b.space.basis;
    b.p.mlf_tol = cfg.num_or("tolerances.mlf_tol", 1e-12);
    if (cfg.has("problem.phi")) b.p.phi = sample_space(cfg.expression("problem.phi"), *b.p.basis);
    if (cfg.has("problem.psi")) b.p.psi = sample_space(cfg.expression("problem.psi"), *b.p.basis);
    if (cfg.has("problem.h")) b.p.h = sample_space(cfg.expression("problem.h"), *b.p.basis);
    if (cfg.has("problem.f")) {
        expr::Expr e = cfg.expression("problem.f");
        b.p.f = TimeSeries::sample(b.p.grid, [e](double t) { return e.at_t(t); });
    }
    return b;
}

std::string node_label(const std::string& prefix, double coord) {
    return prefix + "_" + format_double(coord);
}

// ----------------------------------------------------------------- tasks ---

void run_direct(const Cfg& cfg, const fs::path& dir, RunReport& rep) {
    ProblemBundle b = build_problem(cfg);
    direct::Field fld = direct::direct_solve(b.p);

    const std::size_t M = b.p.grid.M;
    if (b.space.is_rect) {
        CsvFile csv(dir, "u_final.csv", rep);
        csv.row({"x", "y", "u"});
        std::vector<double> uT = fld.u_at(M);
        const auto& bs = *b.p.basis;
        for (std::size_t i1 = 0; i1 <= bs.J1; ++i1)
            for (std::size_t i2 = 0; i2 <= bs.J2; ++i2)
                csv.row_numbers({bs.x1[i1], bs.x2[i2], uT[i1 * (bs.J2 + 1) + i2]});
    } else {
        std::size_t stride = cfg.uint_or("output.stride", std::max<std::size_t>(1, M / 512));
        if (stride == 0) stride = 1;
        CsvFile csv(dir, "u.csv", rep);
        std::vector<std::string> head{"t"};
        for (double xj : b.p.basis->x) head.push_back(node_label("u", xj));
        csv.row(head);
        auto write_slice = [&](std::size_t i) {
            std::vector<double> row{b.p.grid.node(i)};
            std::vector<double> u = fld.u_at(i);
            row.insert(row.end(), u.begin(), u.end());
            csv.row_numbers(row);
        };
        std::size_t last = 0;
        for (std::size_t i = 0; i <= M; i += stride) {
            write_slice(i);
            last = i;
        }
        if (last != M) write_slice(M);
    }
    if (b.p.h) {
        TimeSeries g = direct::observe_g(fld, *b.p.h);
        CsvFile csv(dir, "g.csv", rep);
        csv.row({"t", "g"});
        for (std::size_t i = 0; i <= M; ++i) csv.row_numbers({b.p.grid.node(i), g.v[i]});
    }

    CheckSet cs(cfg, "direct");
    double worst = 0.0;
    for (std::size_t n = 0; n < fld.n_modes(); ++n)
        worst = std::max(worst, fld.mode_residual(n));
    cs.add(rep, "modal-residual", worst, 1e-3, "<=");
    if (cfg.has("checks.truncation-share"))
        cs.add(rep, "truncation-share", fld.truncation_share, 1e-6, "<=");
    cs.finish();
}

struct IP1Run {
    inverse::IP1Result res;
    TimeSeries g;
    std::optional<TimeSeries> f_true;
};

IP1Run run_ip1_once(const Cfg& cfg, const ProblemBundle& b) {
    if (b.p.f) throw ConfigError("field problem.f must be absent for ip1 (f is the unknown)");
    if (!b.p.h) throw ConfigError("missing field: problem.h (ip1 needs the weight)");
    IP1Run out;
    if (cfg.has("ip1.f_true")) {
        expr::Expr e = cfg.expression("ip1.f_true");
        out.f_true = TimeSeries::sample(b.p.grid, [e](double t) { return e.at_t(t); });
        direct::ProblemSpec fwd = b.p;
        fwd.f = out.f_true;
        direct::Field fld = direct::direct_solve(fwd);
        out.g = direct::observe_g(fld, *b.p.h);
        long long node = cfg.int_or("ip1.perturb_node", -1);
        if (node >= 0) {
            if (static_cast<std::size_t>(node) > b.p.grid.M)
                throw ConfigError("field ip1.perturb_node is outside the grid");
            out.g.v[static_cast<std::size_t>(node)] += cfg.num_or("ip1.perturb_eps", 0.0);
        }
        out.g.v[0] += cfg.num_or("ip1.g0_offset", 0.0);
    } else if (cfg.has("problem.g")) {
        std::vector<double> gv = cfg.numbers("problem.g");
        if (gv.size() != b.p.grid.size())
            throw ConfigError("field problem.g must have M+1 samples");
        out.g = TimeSeries(b.p.grid, std::move(gv));
    } else {
        throw ConfigError("missing field: ip1.f_true (twin mode) or problem.g (measured data)");
    }
    inverse::IP1Data d;
    d.spec = b.p;
    d.g = out.g;
    d.tol_compat = cfg.num_or("tolerances.tol_compat", -1.0);
    out.res = inverse::ip1_solve(d);
    return out;
}

double max_rel_error(const std::vector<double>& got, const std::vector<double>& want) {
    double scale = 0.0, err = 0.0;
    for (double w : want) scale = std::max(scale, std::abs(w));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        err = std::max(err, std::abs(got[i] - want[i]));
    return err / scale;
}

void run_ip1(const Cfg& cfg, const fs::path& dir, RunReport& rep) {
    ProblemBundle b = build_problem(cfg);
    IP1Run r = run_ip1_once(cfg, b);
    const std::size_t M = b.p.grid.M;

    {
        CsvFile csv(dir, "f_reconstructed.csv", rep);
        if (r.f_true) {
            csv.row({"t", "f_reconstructed", "f_true", "abs_err"});
            for (std::size_t i = 0; i <= M; ++i)
                csv.row_numbers({b.p.grid.node(i), r.res.f.v[i], r.f_true->v[i],
                                 std::abs(r.res.f.v[i] - r.f_true->v[i])});
        } else {
            csv.row({"t", "f_reconstructed"});
            for (std::size_t i = 0; i <= M; ++i)
                csv.row_numbers({b.p.grid.node(i), r.res.f.v[i]});
        }
    }
    {
        CsvFile csv(dir, "g.csv", rep);
        csv.row({"t", "g"});
        for (std::size_t i = 0; i <= M; ++i) csv.row_numbers({b.p.grid.node(i), r.g.v[i]});
    }
    {
        CsvFile csv(dir, "kernels.csv", rep);
        csv.row({"t", "K", "K0", "G", "G0"});
        for (std::size_t i = 0; i <= M; ++i)
            csv.row_numbers({b.p.grid.node(i), r.res.kernels.K.v[i], r.res.kernels.K0.v[i],
                             r.res.kernels.G.v[i], r.res.kernels.G0.v[i]});
    }

    double rel = r.f_true ? max_rel_error(r.res.f.v, r.f_true->v) : 0.0;
    {
        CsvFile csv(dir, "error_table.csv", rep);
        csv.row({"metric", "value"});
        csv.row({"forward-residual", format_double(r.res.forward_residual)});
        csv.row({"compat-residual", format_double(r.res.kernels.compat_residual)});
        csv.row({"hnorm2", format_double(r.res.kernels.hnorm2)});
        if (r.f_true) csv.row({"max-rel-err", format_double(rel)});
    }

    CheckSet cs(cfg, "ip1");
    cs.add(rep, "forward-residual", r.res.forward_residual, 1e-3, "<=");
    if (r.f_true) cs.add(rep, "max-rel-err", rel, 1e-3, "<=");
    cs.finish();
}

void run_ip2(const Cfg& cfg, const fs::path& dir, RunReport& rep) {
    ProblemBundle b = build_problem(cfg);
    if (b.p.h) throw ConfigError("field problem.h must be absent for ip2 (h is the unknown)");
    if (!b.p.f) throw ConfigError("missing field: problem.f (ip2 needs the temporal factor)");
    TimeSeries f = *b.p.f;

    std::vector<double> omega;
    std::optional<std::vector<double>> h_true;
    if (cfg.has("ip2.h_true")) {
        h_true = sample_space(cfg.expression("ip2.h_true"), *b.p.basis);
        direct::ProblemSpec fwd = b.p;
        fwd.h = h_true;
        direct::Field fld = direct::direct_solve(fwd);
        omega = direct::observe_omega(fld, f);
    } else if (cfg.has("problem.omega")) {
        omega = cfg.numbers("problem.omega");
    } else {
        throw ConfigError("missing field: ip2.h_true (twin mode) or problem.omega (measured data)");
    }

    inverse::IP2Data d;
    d.spec = b.p;
    d.spec.f.reset();
    d.omega = omega;
    d.f = f;
    d.tol_b = cfg.num_or("tolerances.tol_b", -1.0);
    d.strict_sensitivity = cfg.flag_or("tolerances.strict_sensitivity", false);
    inverse::IP2Result res = inverse::ip2_solve(d);

    const auto& bs = *b.p.basis;
    auto write_field = [&](const std::string& name, const std::vector<double>& v,
                           const std::vector<double>* truth) {
        CsvFile csv(dir, name, rep);
        std::vector<std::string> head;
        if (bs.is_interval) head = {"x"};
        else head = {"x", "y"};
        head.push_back(truth ? "h_reconstructed" : "omega");
        if (truth) head.insert(head.end(), {"h_true", "abs_err"});
        csv.row(head);
        auto emit = [&](std::size_t flat, double x, double y) {
            std::vector<double> row;
            if (bs.is_interval) row = {x};
            else row = {x, y};
            row.push_back(v[flat]);
            if (truth) {
                row.push_back((*truth)[flat]);
                row.push_back(std::abs(v[flat] - (*truth)[flat]));
            }
            csv.row_numbers(row);
        };
        if (bs.is_interval) {
            for (std::size_t j = 0; j < bs.n_nodes(); ++j) emit(j, bs.x[j], 0.0);
        } else {
            for (std::size_t i1 = 0; i1 <= bs.J1; ++i1)
                for (std::size_t i2 = 0; i2 <= bs.J2; ++i2)
                    emit(i1 * (bs.J2 + 1) + i2, bs.x1[i1], bs.x2[i2]);
        }
    };
    write_field("h_reconstructed.csv", res.h, h_true ? &*h_true : nullptr);
    write_field("omega.csv", omega, nullptr);

    CheckSet cs(cfg, "ip2");
    cs.add(rep, "excluded-modes", static_cast<double>(res.excluded.size()), 0.0, "<=");
    if (h_true) {
        long double num = 0.0L, den = 0.0L;
        for (std::size_t j = 0; j < bs.n_nodes(); ++j) {
            double dh = res.h[j] - (*h_true)[j];
            num += static_cast<long double>(bs.w[j]) * dh * dh;
            den += static_cast<long double>(bs.w[j]) * (*h_true)[j] * (*h_true)[j];
        }
        double rel = den > 0.0L ? std::sqrt(static_cast<double>(num / den))
                                : std::sqrt(static_cast<double>(num));
        cs.add(rep, "roundtrip-rel-l2", rel, 1e-2, "<=");
    }
    cs.finish();
}

void run_mlf_table(const Cfg& cfg, const fs::path& dir, RunReport& rep) {
    std::vector<double> alphas = cfg.numbers("mlf.alphas");
    std::vector<double> betas = cfg.numbers("mlf.betas");
    if (alphas.empty() || betas.empty())
        throw ConfigError("fields mlf.alphas and mlf.betas must be non-empty");
    const double z0 = cfg.num_or("mlf.z_min", -50.0);
    const double z1 = cfg.num_or("mlf.z_max", 0.0);
    const std::size_t count = cfg.uint_or("mlf.count", 201);
    if (count < 2) throw ConfigError("field mlf.count must be at least 2");
    if (!(z0 <= z1) || z1 > 0.0)
        throw ConfigError("fields mlf.z_min/z_max must satisfy z_min <= z_max <= 0");
    const double tol = cfg.num_or("tolerances.mlf_tol", 1e-12);

    CsvFile csv(dir, "mlf_table.csv", rep);
    std::vector<std::string> head{"z"};
    for (double a : alphas)
        for (double bt : betas)
            head.push_back("E_a" + format_double(a) + "_b" + format_double(bt));
    csv.row(head);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < count; ++i) {
        double z = z0 + (z1 - z0) * static_cast<double>(i) / static_cast<double>(count - 1);
        std::vector<double> row{z};
        for (double a : alphas) {
            for (double bt : betas) {
                double v = mlf::mlf_eval({a, bt, tol}, z);
                if (!std::isfinite(v)) ++bad;
                row.push_back(v);
            }
        }
        csv.row_numbers(row);
    }
    CheckSet cs(cfg, "mlf-table");
    cs.add(rep, "nonfinite-count", static_cast<double>(bad), 0.0, "<=");
    cs.finish();
}

void run_convergence(const Cfg& cfg, const fs::path& dir, RunReport& rep) {
    const std::string study = cfg.str("convergence.study");
    const json& lad = cfg.need("convergence.ladder");
    if (!lad.is_array() || lad.size() < 3)
        throw ConfigError("field convergence.ladder must list at least 3 rungs");

    struct Rung {
        std::size_t M, N, J;
        double error = 0.0;
        double order = 0.0;
    };
    std::vector<Rung> rungs;
    for (std::size_t k = 0; k < lad.size(); ++k) {
        const json& r = lad[k];
        if (!r.is_object() || !r.contains("M"))
            throw ConfigError("field convergence.ladder[" + std::to_string(k) +
                              "] must be an object with M");
        Rung rg;
        rg.M = r["M"].get<std::size_t>();
        rg.N = r.contains("N") ? r["N"].get<std::size_t>() : cfg.uint_or("problem.N", 0);
        rg.J = r.contains("J") ? r["J"].get<std::size_t>() : cfg.uint_or("problem.space.J", 256);
        rungs.push_back(rg);
    }

    const double T = cfg.num_or("problem.T", 1.0);
    if (study == "fracops-rl") {
        const double mu = cfg.num_or("convergence.mu", 0.3);
        if (!(mu > 0.0) || !(mu < 1.0))
            throw ConfigError("field convergence.mu must lie in (0,1)");
        for (Rung& rg : rungs) {
            TimeGrid grid(T, rg.M);
            TimeSeries y = TimeSeries::sample(grid, [](double t) { return t * t; });
            TimeSeries r = fracops::rl_integral(y, mu);
            double worst = 0.0;
            for (std::size_t i = 0; i <= rg.M; ++i) {
                double t = grid.node(i);
                double exact = 2.0 * std::pow(t, 2.0 + mu) / std::tgamma(3.0 + mu);
                worst = std::max(worst, std::abs(r.v[i] - exact));
            }
            rg.error = worst;
        }
    } else if (study == "direct-single-mode") {
        const double alpha = cfg.num("problem.alpha");
        SpaceSetup base = build_space(cfg);
        for (Rung& rg : rungs) {
            direct::ProblemSpec p;
            p.ord = FracOrder(alpha);
            p.grid = TimeGrid(T, rg.M);
            p.op = base.op1;
            std::size_t J = rg.J;
            auto basis = std::make_shared<spectral::ModalBasis>(
                spectral::eigenpairs(base.op1, 1, J));
            p.basis = basis;
            p.phi = basis->X[0];  // phi = first eigenfunction, phi_1 = 1 exactly
            p.mlf_tol = cfg.num_or("tolerances.mlf_tol", 1e-12);
            direct::Field fld = direct::direct_solve(p);
            double lam = basis->lambda[0];
            double worst = 0.0;
            for (std::size_t i = 0; i <= rg.M; ++i) {
                double exact = mlf::mlf_eval({alpha, 1.0, 1e-13},
                                             -lam * std::pow(p.grid.node(i), alpha));
                worst = std::max(worst, std::abs(fld.modes[0].u[i] - exact));
            }
            rg.error = worst;
        }
    } else if (study == "ip1") {
        json base_cfg = cfg.root();
        for (Rung& rg : rungs) {
            base_cfg["problem"]["M"] = rg.M;
            if (rg.N > 0) base_cfg["problem"]["N"] = rg.N;
            base_cfg["problem"]["space"]["J"] = rg.J;
            Cfg sub(base_cfg);
            ProblemBundle b = build_problem(sub);
            IP1Run r = run_ip1_once(sub, b);
            if (!r.f_true)
                throw ConfigError("missing field: ip1.f_true (the ip1 study is a twin experiment)");
            rg.error = max_rel_error(r.res.f.v, r.f_true->v);
        }
    } else {
        throw ConfigError("field convergence.study must be one of "
                          "fracops-rl, direct-single-mode, ip1");
    }

    const double tiny = 1e-15;
    for (std::size_t k = 1; k < rungs.size(); ++k) {
        if (rungs[k].error <= tiny || rungs[k - 1].error <= tiny) {
            rungs[k].order = 0.0;
        } else {
            rungs[k].order = std::log(rungs[k - 1].error / rungs[k].error) /
                             std::log(static_cast<double>(rungs[k].M) /
                                      static_cast<double>(rungs[k - 1].M));
        }
    }

    CsvFile csv(dir, "convergence.csv", rep);
    csv.row({"rung", "M", "N", "J", "error", "order"});
    for (std::size_t k = 0; k < rungs.size(); ++k) {
        csv.row_numbers({static_cast<double>(k), static_cast<double>(rungs[k].M),
                         static_cast<double>(rungs[k].N), static_cast<double>(rungs[k].J),
                         rungs[k].error, rungs[k].order});
    }

    CheckSet cs(cfg, "convergence");
    if (study == "direct-single-mode") {
        double worst = 0.0;
        for (const Rung& rg : rungs) worst = std::max(worst, rg.error);
        cs.add(rep, "plateau", worst, 1e-10, "<=");
    } else {
        bool plateaued = true;
        double min_order = 1e300;
        for (std::size_t k = 1; k < rungs.size(); ++k) {
            if (rungs[k].error > tiny && rungs[k - 1].error > tiny) {
                plateaued = false;
                min_order = std::min(min_order, rungs[k].order);
            }
        }
        if (plateaued) min_order = 1e300;  // everything at roundoff: trivially fast
        cs.add(rep, "min-order", min_order, study == "fracops-rl" ? 1.8 : 1.5, ">=");
    }
    cs.finish();
}

void run_props_check(const Cfg& cfg, const fs::path& dir, RunReport& rep) {
    std::vector<double> alphas =
        cfg.has("props.alphas") ? cfg.numbers("props.alphas")
                                : std::vector<double>{1.25, 1.5, 1.75};
    const std::size_t M = cfg.uint_or("props.M", 512);
    const double lambda = cfg.num_or("props.lambda", 2.0);
    TimeGrid grid(cfg.num_or("problem.T", 1.0), M);

    CsvFile csv(dir, "props.csv", rep);
    csv.row({"check", "alpha", "value"});

    double pointwise = 0.0, discrete = 0.0, min_gap = 1e300;
    const struct {
        mlf::DerivIdentity kind;
        const char* name;
    } dkinds[] = {{mlf::DerivIdentity::kE1ToEaa, "deriv-e1-eaa"},
                  {mlf::DerivIdentity::kTE2ToE1, "deriv-te2-e1"},
                  {mlf::DerivIdentity::kTa1EaaToEaa1, "deriv-ta1eaa-eaa1"}};
    const struct {
        mlf::FracIdentity kind;
        const char* name;
    } fkinds[] = {{mlf::FracIdentity::kTa1EaaToE1, "frac-ta1eaa-e1"},
                  {mlf::FracIdentity::kE1ToTE2, "frac-e1-te2"},
                  {mlf::FracIdentity::kDuhamelVelocity, "frac-duhamel"}};
    const std::pair<double, double> probes[] = {{0.7, 0.4}, {3.0, 0.9}, {12.0, 1.3}};

    for (double a : alphas) {
        FracOrder ord(a);
        for (const auto& dk : dkinds) {
            double worst = 0.0;
            for (auto [lam, t] : probes)
                worst = std::max(worst,
                                 mlf::deriv_identity_residual(dk.kind, ord, lam, t, 1e-5));
            pointwise = std::max(pointwise, worst);
            csv.row({dk.name, format_double(a), format_double(worst)});
        }
        for (const auto& fk : fkinds) {
            double rsd = mlf::frac_identity_residual(fk.kind, ord, lambda, grid);
            discrete = std::max(discrete, rsd);
            csv.row({fk.name, format_double(a), format_double(rsd)});
        }
        const struct {
            const char* name;
            std::function<double(double)> fn;
        } thetas[] = {
            {"energy-quadratic", [](double t) { return t * t; }},
            {"energy-sine", [](double t) { return std::sin(std::numbers::pi * t); }},
            {"energy-mixed",
             [](double t) { return t + 0.3 * std::sin(2.0 * std::numbers::pi * t); }},
            {"energy-affine", [](double t) { return 1.0 + t; }},
        };
        for (const auto& th : thetas) {
            TimeSeries theta = TimeSeries::sample(grid, th.fn);
            fracops::EnergyGap g = fracops::energy_inequality_gap(theta, ord);
            min_gap = std::min(min_gap, g.gap);
            csv.row({th.name, format_double(a), format_double(g.gap)});
        }
    }

    CheckSet cs(cfg, "props-check");
    cs.add(rep, "pointwise-max-residual", pointwise, 1e-6, "<=");
    cs.add(rep, "discrete-max-residual", discrete, 0.05, "<=");
    cs.add(rep, "energy-min-gap", min_gap, -1e-8, ">=");
    cs.finish();
}

void write_report_json(const fs::path& dir, const RunReport& rep) {
    json j;
    j["scenario"] = rep.name;
    j["task"] = rep.task;
    j["status"] = rep.all_pass() ? "pass" : "fail";
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
        json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["relation"] = c.relation;
        cj["threshold"] = c.threshold;
        cj["pass"] = c.pass;
        j["checks"].push_back(cj);
    }
    j["outputs"] = rep.outputs;
    j["wall_ms"] = rep.wall_ms;
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw ConfigError("cannot open " + (dir / "report.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace

RunReport run(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_override, const std::string& expected_task) {
    auto t0 = std::chrono::steady_clock::now();
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file " + config_path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + config_path + " is not valid JSON");
    apply_overrides(j, overrides);
    Cfg cfg(j);

    RunReport rep;
    rep.task = cfg.str_or("task", expected_task);
    if (rep.task.empty()) throw ConfigError("missing field: task");
    if (!expected_task.empty() && rep.task != expected_task)
        throw ConfigError("config task \"" + rep.task + "\" does not match the requested task \"" +
                          expected_task + "\"");
    rep.name = cfg.str_or("name", fs::path(config_path).stem().string());

    std::string out_dir = !out_override.empty() ? out_override
                                                : cfg.str_or("output.dir", "out/" + rep.name);
    fs::create_directories(out_dir);
    rep.out_dir = out_dir;

    if (rep.task == "direct") run_direct(cfg, out_dir, rep);
    else if (rep.task == "ip1") run_ip1(cfg, out_dir, rep);
    else if (rep.task == "ip2") run_ip2(cfg, out_dir, rep);
    else if (rep.task == "mlf-table") run_mlf_table(cfg, out_dir, rep);
    else if (rep.task == "convergence") run_convergence(cfg, out_dir, rep);
    else if (rep.task == "props-check") run_props_check(cfg, out_dir, rep);
    else
        throw ConfigError("field task must be one of direct, ip1, ip2, mlf-table, "
                          "convergence, props-check (got \"" + rep.task + "\")");

    auto t1 = std::chrono::steady_clock::now();
    rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    write_report_json(out_dir, rep);
    return rep;
}

void print_report(std::ostream& os, const RunReport& r) {
    os << "scenario " << r.name << " (task " << r.task << ")\n";
    for (const auto& c : r.checks) {
        os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << " = "
           << format_double(c.value) << " " << c.relation << " " << format_double(c.threshold)
           << "\n";
    }
    os << "outputs: " << r.out_dir << "/report.json";
    for (const auto& f : r.outputs) os << " " << r.out_dir << "/" << f;
    os << "\nstatus: " << (r.all_pass() ? "pass" : "fail") << "\n";
}

}  // namespace fracwave::scenario
