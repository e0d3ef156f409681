#pragma once

#include "fracobs/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fracobs {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitNotConverged = 4 };

struct RunOptions {
    std::string out_dir = "out";
    int threads = 1;
    bool dump = false;        // also write stiffness.csv and load.csv
    std::ostream* console = nullptr;  // verify table goes here when set
};

/// Runs one experiment and writes result CSV(s), metadata.json and timings.json to out_dir.
/// Apart from timings.json the files are byte-identical across repeated runs with one thread.
/// Errors are mapped to exit codes; metadata.json is written in every case.
int run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace fracobs
