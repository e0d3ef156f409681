#pragma once

#include "fracobs/errors.hpp"

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fracobs {

/// Function of x given as an expression string or as nodal values (one per dof).
using DataField = std::variant<std::string, std::vector<double>>;

struct KernelSpec {
    std::string name = "fractional_laplacian";  // fractional_laplacian | constant | perturbed | ds_energy | ka
    double value = 1.0;                         // constant
    std::string profile = "1";                  // perturbed: expression in x, y
    bool symmetric = true;                      // perturbed
    std::optional<std::array<double, 2>> band;  // perturbed: known band
    std::string field = "counterexample";       // ka: expression in z or "counterexample"

    bool operator==(const KernelSpec&) const = default;
};

struct SolverSpec {
    std::string method = "psor";  // psor | penalized | gauss_seidel (membranes)
    double omega = 1.5;
    double tol = 1e-10;
    int max_iter = 200000;
    double act_tol = 1e-9;
    std::vector<double> epsilon = {0.1, 0.05, 0.025};
    std::string theta = "rational";

    bool operator==(const SolverSpec&) const = default;
};

struct ExperimentConfig {
    std::string command;
    std::array<double, 2> domain = {-1.0, 1.0};
    double s = 0.5;
    int n = 64;
    KernelSpec kernel;
    DataField f = std::string("0");
    std::optional<std::string> f_vec;
    double lambda = 0.0;
    std::optional<DataField> lower;
    std::optional<DataField> upper;
    std::vector<DataField> loads;
    SolverSpec solver;
    std::vector<double> s_list = {0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    std::vector<std::array<double, 2>> pairs = {{-0.5, 0.5}};
    std::vector<std::array<double, 2>> set = {{-0.25, 0.25}};
    std::vector<std::string> capacity_kernels = {"fractional_laplacian"};

    /// Keys filled from defaults while parsing (not part of the value).
    std::vector<std::string> defaulted;

    bool operator==(const ExperimentConfig& o) const;
};

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> c = {"solve",     "solve2",    "membranes", "penalize",
                                               "sweep-s",   "kernel-ka", "capacity",  "verify"};
    return c;
}

inline const std::vector<std::string>& known_kernels() {
    static const std::vector<std::string> k = {"fractional_laplacian", "constant", "perturbed", "ds_energy",
                                               "ka"};
    return k;
}

/// Every schema violation found in a configuration.
class ConfigError : public UsageError {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Parses and validates a JSON document. Malformed JSON gives a ConfigError carrying the byte
/// offset; schema violations are collected and reported together.
ExperimentConfig parse_config(const std::string& text);

/// Full JSON document (every field, defaults included); parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// Collected range and consistency violations; empty when the config is valid.
std::vector<std::string> validate_config(const ExperimentConfig& config);

}  // namespace fracobs
