#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsc/evolution.hpp"
#include "qsc/flows.hpp"

namespace qsc {

// configuration errors carry the process exit code contract:
// 2 = file/JSON parse error, 3 = semantic validation error
struct ScenarioError : std::runtime_error {
    int exit_code;
    ScenarioError(int code, const std::string& msg)
        : std::runtime_error(msg), exit_code(code) {}
};

// one declared unit of work; fields irrelevant to the type stay at defaults
// and are echoed into the report header when used
struct Task {
    std::string name;
    std::string type;    // evolve | unitarity | ito-check | flow | converge | bounds
    std::string metric;  // converge: unitarity | ito | multiplicativity | flow-homomorphism
    std::vector<int> n_list;   // converge grids
    double tolerance = 0.0;    // defect ceiling (evolve/unitarity/ito-check/flow/bounds)
    bool has_tolerance = false;
    double min_order = 0.9;    // converge: least-squares slope floor
    int trials = 10;           // bounds sweep size
    double xi_plus = 2.0, xi_minus = 1.0;
    Mat observable, observable_b;  // flow tasks
};

struct Scenario {
    Grid grid;
    std::uint64_t seed = 0;
    std::string generator_type;  // hamiltonian | hp | ltable | structure-maps
    Mat W, L, H;                 // hp blocks; hamiltonian uses H only
    PointMatrix factor;          // structure-maps one-cell blocks
    Kernel ltable{Grid{}, {}};   // explicit integrand tables
    std::vector<Task> tasks;
};

// parse and validate a scenario file; throws ScenarioError(2) on malformed
// JSON and ScenarioError(3) on any semantic violation, naming the field
Scenario loadScenario(const std::string& path);

struct TaskReport {
    std::string name;
    bool pass;
    std::string message;
    std::string csv_path;
};

// run the declared tasks (optionally a single one by name, optionally with the
// grid list of every converge task overridden), write one CSV per task under
// outDir, and return one report per executed task; n_cells and every converge
// grid must stay within cap bits
std::vector<TaskReport> runScenario(const Scenario& s, const std::string& outDir,
                                    const std::string& onlyTask = "",
                                    const std::vector<int>& nOverride = {},
                                    int cap = 20);

}  // namespace qsc
