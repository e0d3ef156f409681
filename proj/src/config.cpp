#include "fracobs/config.hpp"

#include "fracobs/discretization.hpp"
#include "fracobs/expression.hpp"
#include "fracobs/penalty.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace fracobs {

using Json = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        out += (k ? sep : "") + items[k];
    }
    return out;
}

class Reader {
public:
    std::vector<std::string> errors;
    std::vector<std::string> defaulted;

    void check_keys(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
        for (const auto& [key, value] : j.items()) {
            if (!allowed.count(key)) {
                errors.push_back(path + key + ": unknown key");
            }
        }
    }

    template <class F>
    void field(const Json& j, const std::string& path, const std::string& key, F&& read) {
        if (!j.contains(key)) {
            defaulted.push_back(path + key);
            return;
        }
        read(j.at(key), path + key);
    }

    void number(const Json& v, const std::string& where, double& out) {
        if (!v.is_number()) {
            errors.push_back(where + ": expected a number");
            return;
        }
        out = v.get<double>();
    }

    void integer(const Json& v, const std::string& where, int& out) {
        if (!v.is_number_integer()) {
            errors.push_back(where + ": expected an integer");
            return;
        }
        out = v.get<int>();
    }

    void string(const Json& v, const std::string& where, std::string& out) {
        if (!v.is_string()) {
            errors.push_back(where + ": expected a string");
            return;
        }
        out = v.get<std::string>();
    }

    void boolean(const Json& v, const std::string& where, bool& out) {
        if (!v.is_boolean()) {
            errors.push_back(where + ": expected a boolean");
            return;
        }
        out = v.get<bool>();
    }

    bool numbers(const Json& v, const std::string& where, std::vector<double>& out) {
        if (!v.is_array()) {
            errors.push_back(where + ": expected an array of numbers");
            return false;
        }
        std::vector<double> tmp;
        for (const auto& e : v) {
            if (!e.is_number()) {
                errors.push_back(where + ": expected an array of numbers");
                return false;
            }
            tmp.push_back(e.get<double>());
        }
        out = std::move(tmp);
        return true;
    }

    void pair(const Json& v, const std::string& where, std::array<double, 2>& out) {
        std::vector<double> tmp;
        if (numbers(v, where, tmp)) {
            if (tmp.size() != 2) {
                errors.push_back(where + ": expected two numbers");
                return;
            }
            out = {tmp[0], tmp[1]};
        }
    }

    void pairs(const Json& v, const std::string& where, std::vector<std::array<double, 2>>& out) {
        if (!v.is_array()) {
            errors.push_back(where + ": expected an array of [a, b] pairs");
            return;
        }
        std::vector<std::array<double, 2>> tmp;
        for (std::size_t k = 0; k < v.size(); ++k) {
            std::array<double, 2> p{};
            const auto before = errors.size();
            pair(v[k], where + "[" + std::to_string(k) + "]", p);
            if (errors.size() != before) {
                return;
            }
            tmp.push_back(p);
        }
        out = std::move(tmp);
    }

    void data(const Json& v, const std::string& where, DataField& out) {
        if (v.is_string()) {
            out = v.get<std::string>();
            return;
        }
        std::vector<double> tmp;
        if (v.is_array() && numbers(v, where, tmp)) {
            out = std::move(tmp);
            return;
        }
        if (!v.is_array()) {
            errors.push_back(where + ": expected an expression string or an array of nodal values");
        }
    }

    void optional_data(const Json& v, const std::string& where, std::optional<DataField>& out) {
        if (v.is_null()) {
            out.reset();
            return;
        }
        DataField d;
        const auto before = errors.size();
        data(v, where, d);
        if (errors.size() == before) {
            out = std::move(d);
        }
    }
};

Json data_json(const DataField& d) {
    if (std::holds_alternative<std::string>(d)) {
        return std::get<std::string>(d);
    }
    return std::get<std::vector<double>>(d);
}

Json pairs_json(const std::vector<std::array<double, 2>>& ps) {
    Json a = Json::array();
    for (const auto& p : ps) {
        a.push_back({p[0], p[1]});
    }
    return a;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

void check_expression(const std::string& text, const std::vector<std::string>& vars,
                      const std::string& where, std::vector<std::string>& errors) {
    try {
        (void)Expression::parse(text, vars);
    } catch (const UsageError& e) {
        errors.push_back(where + ": " + e.what());
    }
}

void check_data(const DataField& d, int n, const std::string& where, std::vector<std::string>& errors) {
    if (std::holds_alternative<std::string>(d)) {
        check_expression(std::get<std::string>(d), {"x"}, where, errors);
        return;
    }
    const auto& v = std::get<std::vector<double>>(d);
    if (static_cast<int>(v.size()) != n) {
        errors.push_back(where + ": expected " + std::to_string(n) + " nodal values, got " +
                         std::to_string(v.size()));
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            errors.push_back(where + ": nodal values must be finite (use +-1e18 for absent bounds)");
            break;
        }
    }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : UsageError("invalid configuration: " + join(errors, "; ")), errors_(std::move(errors)) {}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return command == o.command && domain == o.domain && s == o.s && n == o.n && kernel == o.kernel &&
           f == o.f && f_vec == o.f_vec && lambda == o.lambda && lower == o.lower && upper == o.upper &&
           loads == o.loads && solver == o.solver && s_list == o.s_list && pairs == o.pairs && set == o.set &&
           capacity_kernels == o.capacity_kernels;
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> errors;
    if (!contains(known_commands(), c.command)) {
        errors.push_back("command: unknown command '" + c.command + "' (available: " + join(known_commands(), ", ") +
                         ")");
    }
    if (!(std::isfinite(c.domain[0]) && std::isfinite(c.domain[1]) && c.domain[0] < c.domain[1])) {
        errors.push_back("domain: need finite x_lo < x_hi");
    }
    if (!(c.s > 0.0 && c.s < 1.0)) {
        errors.push_back("s must lie in (0,1)");
    }
    if (c.n < 1 || c.n > kMaxDofs) {
        errors.push_back("n: must lie in [1, " + std::to_string(kMaxDofs) + "]");
    }
    const KernelSpec& k = c.kernel;
    if (!contains(known_kernels(), k.name)) {
        errors.push_back("kernel.name: unknown kernel '" + k.name + "' (available: " + join(known_kernels(), ", ") +
                         ")");
    }
    if (k.name == "constant" && !(k.value > 0.0 && std::isfinite(k.value))) {
        errors.push_back("kernel.value: must be positive");
    }
    if (k.name == "perturbed") {
        check_expression(k.profile, {"x", "y"}, "kernel.profile", errors);
    }
    if (k.band && !((*k.band)[0] > 0.0 && (*k.band)[0] <= (*k.band)[1] && std::isfinite((*k.band)[1]))) {
        errors.push_back("kernel.band: need 0 < lower <= upper");
    }
    if (k.field != "counterexample") {
        check_expression(k.field, {"z"}, "kernel.field", errors);
    }
    check_data(c.f, c.n, "f", errors);
    if (c.f_vec) {
        check_expression(*c.f_vec, {"x"}, "f_vec", errors);
    }
    if (!(c.lambda >= 0.0 && std::isfinite(c.lambda))) {
        errors.push_back("lambda: must be nonnegative");
    }
    if (c.lower) {
        check_data(*c.lower, c.n, "lower", errors);
    }
    if (c.upper) {
        check_data(*c.upper, c.n, "upper", errors);
    }
    for (std::size_t i = 0; i < c.loads.size(); ++i) {
        check_data(c.loads[i], c.n, "loads[" + std::to_string(i) + "]", errors);
    }
    const SolverSpec& sv = c.solver;
    if (c.command == "membranes") {
        if (sv.method != "psor" && sv.method != "gauss_seidel" && sv.method != "penalized") {
            errors.push_back("solver.method: membranes accept psor, gauss_seidel or penalized");
        }
    } else if (sv.method != "psor" && sv.method != "penalized") {
        errors.push_back("solver.method: unknown method '" + sv.method + "' (available: psor, penalized)");
    }
    if (!(sv.omega > 0.0 && sv.omega < 2.0)) {
        errors.push_back("solver.omega: must lie in (0,2)");
    }
    if (!(sv.tol > 0.0)) {
        errors.push_back("solver.tol: must be positive");
    }
    if (sv.max_iter < 1) {
        errors.push_back("solver.max_iter: must be at least 1");
    }
    if (!(sv.act_tol >= 0.0)) {
        errors.push_back("solver.act_tol: must be nonnegative");
    }
    if (sv.epsilon.empty()) {
        errors.push_back("solver.epsilon: need at least one value");
    }
    for (double e : sv.epsilon) {
        if (!(e > 0.0 && std::isfinite(e))) {
            errors.push_back("solver.epsilon: values must be positive");
            break;
        }
    }
    try {
        (void)PenaltyFunction::by_name(sv.theta);
    } catch (const UsageError& e) {
        errors.push_back(std::string("solver.theta: ") + e.what());
    }
    for (std::size_t i = 0; i < c.s_list.size(); ++i) {
        const double v = c.s_list[i];
        if (!(v > 0.0 && v < 1.0)) {
            errors.push_back("s_list: s must lie in (0,1)");
            break;
        }
        if (i > 0 && !(v > c.s_list[i - 1])) {
            errors.push_back("s_list: values must be strictly ascending");
            break;
        }
    }
    for (const auto& p : c.pairs) {
        if (!(std::isfinite(p[0]) && std::isfinite(p[1])) || p[0] == p[1]) {
            errors.push_back("pairs: need finite x != y");
            break;
        }
    }
    for (std::size_t i = 0; i < c.set.size(); ++i) {
        const auto& iv = c.set[i];
        if (!(iv[0] <= iv[1] && iv[0] > c.domain[0] && iv[1] < c.domain[1])) {
            errors.push_back("set: intervals must satisfy x_lo < a <= b < x_hi");
            break;
        }
        if (i > 0 && !(c.set[i - 1][1] < iv[0])) {
            errors.push_back("set: intervals must be sorted and disjoint");
            break;
        }
    }
    for (const auto& name : c.capacity_kernels) {
        if (!contains(known_kernels(), name) || name == "ka") {
            errors.push_back("capacity_kernels: unknown kernel '" + name +
                             "' (available: fractional_laplacian, constant, perturbed, ds_energy)");
        }
    }
    if (c.command == "solve2" && (!c.lower || !c.upper)) {
        errors.push_back("solve2 needs both lower and upper obstacles");
    }
    if (c.command == "penalize" && !c.lower) {
        errors.push_back("penalize needs a lower obstacle");
    }
    if (c.command == "solve" && sv.method == "penalized" && !c.lower) {
        errors.push_back("penalized solve needs a lower obstacle");
    }
    if (c.command == "membranes" && c.loads.size() < 2) {
        errors.push_back("membranes needs at least two loads");
    }
    if (c.command == "sweep-s" && c.s_list.empty()) {
        errors.push_back("sweep-s needs a nonempty s_list");
    }
    if (c.command == "kernel-ka" && c.pairs.empty()) {
        errors.push_back("kernel-ka needs at least one pair");
    }
    if (c.command == "capacity" && c.set.empty()) {
        errors.push_back("capacity needs a nonempty set");
    }
    return errors;
}

ExperimentConfig parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({"malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what()});
    }
    if (!j.is_object()) {
        throw ConfigError({"configuration must be a JSON object"});
    }
    ExperimentConfig c;
    Reader r;
    r.check_keys(j, "", {"command", "domain", "s", "n", "kernel", "f", "f_vec", "lambda", "lower", "upper",
                         "loads", "solver", "s_list", "pairs", "set", "capacity_kernels"});
    if (!j.contains("command")) {
        r.errors.push_back("command: missing");
    } else {
        r.string(j.at("command"), "command", c.command);
    }
    r.field(j, "", "domain", [&](const Json& v, const std::string& w) { r.pair(v, w, c.domain); });
    r.field(j, "", "s", [&](const Json& v, const std::string& w) { r.number(v, w, c.s); });
    r.field(j, "", "n", [&](const Json& v, const std::string& w) { r.integer(v, w, c.n); });
    r.field(j, "", "kernel", [&](const Json& v, const std::string& w) {
        if (!v.is_object()) {
            r.errors.push_back(w + ": expected an object");
            return;
        }
        r.check_keys(v, "kernel.", {"name", "value", "profile", "symmetric", "band", "field"});
        r.field(v, "kernel.", "name", [&](const Json& x, const std::string& ww) { r.string(x, ww, c.kernel.name); });
        r.field(v, "kernel.", "value", [&](const Json& x, const std::string& ww) { r.number(x, ww, c.kernel.value); });
        r.field(v, "kernel.", "profile",
                [&](const Json& x, const std::string& ww) { r.string(x, ww, c.kernel.profile); });
        r.field(v, "kernel.", "symmetric",
                [&](const Json& x, const std::string& ww) { r.boolean(x, ww, c.kernel.symmetric); });
        r.field(v, "kernel.", "band", [&](const Json& x, const std::string& ww) {
            if (x.is_null()) {
                c.kernel.band.reset();
                return;
            }
            std::array<double, 2> b{};
            const auto before = r.errors.size();
            r.pair(x, ww, b);
            if (r.errors.size() == before) {
                c.kernel.band = b;
            }
        });
        r.field(v, "kernel.", "field", [&](const Json& x, const std::string& ww) { r.string(x, ww, c.kernel.field); });
    });
    r.field(j, "", "f", [&](const Json& v, const std::string& w) { r.data(v, w, c.f); });
    r.field(j, "", "f_vec", [&](const Json& v, const std::string& w) {
        if (v.is_null()) {
            c.f_vec.reset();
            return;
        }
        std::string e;
        const auto before = r.errors.size();
        r.string(v, w, e);
        if (r.errors.size() == before) {
            c.f_vec = e;
        }
    });
    r.field(j, "", "lambda", [&](const Json& v, const std::string& w) { r.number(v, w, c.lambda); });
    r.field(j, "", "lower", [&](const Json& v, const std::string& w) { r.optional_data(v, w, c.lower); });
    r.field(j, "", "upper", [&](const Json& v, const std::string& w) { r.optional_data(v, w, c.upper); });
    r.field(j, "", "loads", [&](const Json& v, const std::string& w) {
        if (!v.is_array()) {
            r.errors.push_back(w + ": expected an array");
            return;
        }
        c.loads.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
            DataField d;
            r.data(v[k], w + "[" + std::to_string(k) + "]", d);
            c.loads.push_back(std::move(d));
        }
    });
    r.field(j, "", "solver", [&](const Json& v, const std::string& w) {
        if (!v.is_object()) {
            r.errors.push_back(w + ": expected an object");
            return;
        }
        r.check_keys(v, "solver.", {"method", "omega", "tol", "max_iter", "act_tol", "epsilon", "theta"});
        SolverSpec& sv = c.solver;
        r.field(v, "solver.", "method", [&](const Json& x, const std::string& ww) { r.string(x, ww, sv.method); });
        r.field(v, "solver.", "omega", [&](const Json& x, const std::string& ww) { r.number(x, ww, sv.omega); });
        r.field(v, "solver.", "tol", [&](const Json& x, const std::string& ww) { r.number(x, ww, sv.tol); });
        r.field(v, "solver.", "max_iter", [&](const Json& x, const std::string& ww) { r.integer(x, ww, sv.max_iter); });
        r.field(v, "solver.", "act_tol", [&](const Json& x, const std::string& ww) { r.number(x, ww, sv.act_tol); });
        r.field(v, "solver.", "epsilon", [&](const Json& x, const std::string& ww) { r.numbers(x, ww, sv.epsilon); });
        r.field(v, "solver.", "theta", [&](const Json& x, const std::string& ww) { r.string(x, ww, sv.theta); });
    });
    if (!j.contains("solver") || !j.at("solver").is_object()) {
        for (const char* key : {"method", "omega", "tol", "max_iter", "act_tol", "epsilon", "theta"}) {
            r.defaulted.push_back(std::string("solver.") + key);
        }
    }
    if (!j.contains("kernel") || !j.at("kernel").is_object()) {
        for (const char* key : {"name", "value", "profile", "symmetric", "band", "field"}) {
            r.defaulted.push_back(std::string("kernel.") + key);
        }
    }
    r.field(j, "", "s_list", [&](const Json& v, const std::string& w) { r.numbers(v, w, c.s_list); });
    r.field(j, "", "pairs", [&](const Json& v, const std::string& w) { r.pairs(v, w, c.pairs); });
    r.field(j, "", "set", [&](const Json& v, const std::string& w) { r.pairs(v, w, c.set); });
    r.field(j, "", "capacity_kernels", [&](const Json& v, const std::string& w) {
        if (!v.is_array()) {
            r.errors.push_back(w + ": expected an array of kernel names");
            return;
        }
        c.capacity_kernels.clear();
        for (const auto& e : v) {
            if (!e.is_string()) {
                r.errors.push_back(w + ": expected an array of kernel names");
                return;
            }
            c.capacity_kernels.push_back(e.get<std::string>());
        }
    });
    if (r.errors.empty()) {
        for (auto& e : validate_config(c)) {
            r.errors.push_back(std::move(e));
        }
    }
    if (!r.errors.empty()) {
        throw ConfigError(r.errors);
    }
    c.defaulted = std::move(r.defaulted);
    return c;
}

std::string emit_config(const ExperimentConfig& c) {
    Json j;
    j["command"] = c.command;
    j["domain"] = {c.domain[0], c.domain[1]};
    j["s"] = c.s;
    j["n"] = c.n;
    Json k;
    k["name"] = c.kernel.name;
    k["value"] = c.kernel.value;
    k["profile"] = c.kernel.profile;
    k["symmetric"] = c.kernel.symmetric;
    k["band"] = c.kernel.band ? Json({(*c.kernel.band)[0], (*c.kernel.band)[1]}) : Json(nullptr);
    k["field"] = c.kernel.field;
    j["kernel"] = k;
    j["f"] = data_json(c.f);
    j["f_vec"] = c.f_vec ? Json(*c.f_vec) : Json(nullptr);
    j["lambda"] = c.lambda;
    j["lower"] = c.lower ? data_json(*c.lower) : Json(nullptr);
    j["upper"] = c.upper ? data_json(*c.upper) : Json(nullptr);
    Json loads = Json::array();
    for (const auto& d : c.loads) {
        loads.push_back(data_json(d));
    }
    j["loads"] = loads;
    Json sv;
    sv["method"] = c.solver.method;
    sv["omega"] = c.solver.omega;
    sv["tol"] = c.solver.tol;
    sv["max_iter"] = c.solver.max_iter;
    sv["act_tol"] = c.solver.act_tol;
    sv["epsilon"] = c.solver.epsilon;
    sv["theta"] = c.solver.theta;
    j["solver"] = sv;
    j["s_list"] = c.s_list;
    j["pairs"] = pairs_json(c.pairs);
    j["set"] = pairs_json(c.set);
    j["capacity_kernels"] = c.capacity_kernels;
    return j.dump(2) + "\n";
}

}  // namespace fracobs
