#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsc/scenario.hpp"

namespace {

struct Options {
    std::string path;
    std::string out = "out";
    std::string task;
    std::vector<int> nOverride;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int cap = 20;
};

int execute(const Options& o) {
    try {
        qsc::Scenario s = qsc::loadScenario(o.path);
        if (o.seedSet) s.seed = o.seed;
        std::vector<qsc::TaskReport> reports =
            qsc::runScenario(s, o.out, o.task, o.nOverride, o.cap);
        bool ok = true;
        for (const auto& r : reports) {
            std::printf("[%s] %s: %s (%s)\n", r.pass ? "PASS" : "FAIL",
                        r.name.c_str(), r.message.c_str(), r.csv_path.c_str());
            ok = ok && r.pass;
        }
        return ok ? 0 : 1;
    } catch (const qsc::ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scenario-driven runner for quantum stochastic grid models"};
    app.require_subcommand(1);
    Options o;

    auto addCommon = [&](CLI::App* cmd) {
        cmd->add_option("scenario", o.path, "scenario configuration file")->required();
        cmd->add_option("--out", o.out, "output directory for CSV reports");
        cmd->add_option("--seed", o.seed, "override the scenario seed")
            ->each([&](const std::string&) { o.seedSet = true; });
        cmd->add_option("--cap", o.cap, "largest admissible grid size in cells");
    };

    CLI::App* run = app.add_subcommand("run", "execute every task in the scenario");
    addCommon(run);
    CLI::App* conv =
        app.add_subcommand("converge", "execute the convergence tasks only");
    addCommon(conv);
    conv->add_option("--n", o.nOverride, "comma-separated grid sizes")->delimiter(',');
    CLI::App* check = app.add_subcommand("check", "execute a single named task");
    addCommon(check);
    check->add_option("--task", o.task, "task name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (conv->parsed()) {
        // restrict to the declared converge tasks by running them one by one
        try {
            qsc::Scenario s = qsc::loadScenario(o.path);
            if (o.seedSet) s.seed = o.seed;
            bool any = false, ok = true;
            for (const auto& t : s.tasks) {
                if (t.type != "converge") continue;
                any = true;
                std::vector<qsc::TaskReport> reports =
                    qsc::runScenario(s, o.out, t.name, o.nOverride, o.cap);
                for (const auto& r : reports) {
                    std::printf("[%s] %s: %s (%s)\n", r.pass ? "PASS" : "FAIL",
                                r.name.c_str(), r.message.c_str(), r.csv_path.c_str());
                    ok = ok && r.pass;
                }
            }
            if (!any) {
                std::fprintf(stderr, "error: the scenario declares no converge task\n");
                return 3;
            }
            return ok ? 0 : 1;
        } catch (const qsc::ScenarioError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return e.exit_code;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 3;
        }
    }
    return execute(o);
}
