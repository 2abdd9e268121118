#include "qsc/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

namespace qsc {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& msg) { throw ScenarioError(3, msg); }

std::string fmt(double x) {
    char b[48];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

std::string fmtU(std::uint64_t x) {
    char b[32];
    std::snprintf(b, sizeof b, "%" PRIu64, x);
    return b;
}

// complex matrix given as nested arrays of [re, im] pairs
Mat parseMat(const json& j, const std::string& field, long rows, long cols) {
    if (!j.is_array() || j.empty()) invalid(field + ": expected a non-empty array of rows");
    long r = long(j.size());
    long c = -1;
    for (const auto& row : j) {
        if (!row.is_array()) invalid(field + ": row is not an array");
        if (c < 0) c = long(row.size());
        if (long(row.size()) != c) invalid(field + ": ragged rows");
    }
    if (rows >= 0 && (r != rows || c != cols))
        invalid(field + ": expected " + std::to_string(rows) + "x" +
                std::to_string(cols) + ", got " + std::to_string(r) + "x" +
                std::to_string(c));
    Mat M(r, c);
    for (long i = 0; i < r; ++i)
        for (long k = 0; k < c; ++k) {
            const json& e = j[i][k];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                invalid(field + ": entry (" + std::to_string(i) + "," +
                        std::to_string(k) + ") is not a [re, im] pair");
            M(i, k) = cxd(e[0].get<double>(), e[1].get<double>());
        }
    return M;
}

mask_t parseCells(const json& j, const std::string& field, int n_cells) {
    mask_t m = 0;
    if (!j.is_array()) invalid(field + ": expected an array of cell indices");
    for (const auto& e : j) {
        if (!e.is_number_integer()) invalid(field + ": cell index is not an integer");
        long c = e.get<long>();
        if (c < 0 || c >= n_cells) invalid(field + ": cell " + std::to_string(c) + " out of range");
        if (m & (mask_t(1) << c)) invalid(field + ": repeated cell " + std::to_string(c));
        m |= mask_t(1) << c;
    }
    return m;
}

const json& need(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) invalid(ctx + ": missing field \"" + key + "\"");
    return *it;
}

// per-cell factors of the evolution generator on a given grid; the hamiltonian
// type exponentiates exactly per cell so the scalar part stays unitary
std::vector<PointMatrix> cellFactors(const Scenario& s, const Grid& g) {
    if (s.generator_type == "hamiltonian") {
        long h = g.dim_h;
        Mat u = (cxd(0, -1) * g.dt() * s.H).exp();
        PointMatrix f{Mat::Identity(h, h), Mat::Zero(h, h), Mat::Zero(h, h),
                      (u - Mat::Identity(h, h)) / g.dt()};
        return std::vector<PointMatrix>(g.n_cells, f);
    }
    return std::vector<PointMatrix>(g.n_cells, hpParametrize(s.W, s.L, s.H));
}

PointMatrix flowFactor(const Scenario& s) {
    if (s.generator_type == "structure-maps") return s.factor;
    return hpParametrize(s.W, s.L, s.H);
}

struct Csv {
    std::string text;
    void comment(const std::string& k, const std::string& v) {
        text += "# " + k + ": " + v + "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text += ',';
            text += cells[i];
        }
        text += '\n';
    }
};

void writeFile(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) invalid("cannot open output file " + path);
    f.write(text.data(), std::streamsize(text.size()));
}

// least-squares slope of log2(defect) against log2(n), sign-flipped so that
// first-order decay reads as 1.0
double fittedOrder(const std::vector<int>& ns, const std::vector<double>& vals) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = long(ns.size());
    for (long i = 0; i < n; ++i) {
        double x = std::log2(double(ns[i])), y = std::log2(vals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Rng subRng(std::uint64_t taskSeed, std::uint64_t salt) {
    return Rng(taskSeed * 0x100000001b3ull + salt);
}

Kernel randomSparseKernel(const Grid& g, Rng& rng, int tables) {
    Kernel T{g, {}};
    for (int t = 0; t < tables; ++t) {
        TableKey k{};
        for (int c = 0; c < g.n_cells; ++c) {
            double u = rng.uniform();
            mask_t bit = mask_t(1) << c;
            if (u < 0.25)
                k.k00 |= bit;
            else if (u < 0.40)
                k.k0p |= bit;
            else if (u < 0.55)
                k.km0 |= bit;
            else if (u < 0.65)
                k.kmp |= bit;
        }
        T.add(k, Mat(0.7 * rng.mat(kernelOutDim(g, k), kernelInDim(g, k))));
    }
    return T;
}

void checkDense(const Grid& g, const std::string& ctx, long maxStates) {
    FockIndexer ix(g);
    if (ix.total > maxStates)
        invalid(ctx + ": dense state space " + std::to_string(ix.total) +
                " exceeds the limit " + std::to_string(maxStates));
}

struct TaskRun {
    bool pass = true;
    std::string message;
    Csv csv;
};

TaskRun runEvolutionTask(const Scenario& s, const Task& t, std::uint64_t seed) {
    if (s.grid.d != 1) invalid("task " + t.name + ": needs multiplicity d == 1");
    TaskRun r;
    const Grid& g = s.grid;
    std::vector<PointMatrix> F = cellFactors(s, g);
    Mat U0 = Mat::Identity(g.dim_h, g.dim_h);
    double defect = 0;
    if (t.type == "ito-check") {
        Rng rng = subRng(seed, 1);
        defect = itoFormulaDefectChain(g, F, U0, t.xi_plus, t.xi_minus, 6, rng);
        r.csv.row({"n", "dt", "xi_plus", "xi_minus", "ito_defect"});
        r.csv.row({std::to_string(g.n_cells), fmt(g.dt()), fmt(t.xi_plus),
                   fmt(t.xi_minus), fmt(defect)});
    } else {
        Rng rng = subRng(seed, 1);
        LocalChainOp U = localChain(g, F, U0, g.horizon + 1);
        defect = unitarityDefectChain(U, t.xi_plus, t.xi_minus, rng);
        if (t.type == "evolve") {
            r.csv.row({"n", "dt", "unitarity_defect"});
            r.csv.row({std::to_string(g.n_cells), fmt(g.dt()), fmt(defect)});
        } else {
            r.csv.row({"n", "dt", "xi_plus", "xi_minus", "unitarity_defect"});
            r.csv.row({std::to_string(g.n_cells), fmt(g.dt()), fmt(t.xi_plus),
                       fmt(t.xi_minus), fmt(defect)});
        }
    }
    if (defect > t.tolerance) {
        r.pass = false;
        r.message = "defect " + fmt(defect) + " exceeds tolerance " + fmt(t.tolerance);
    }
    return r;
}

TaskRun runFlowTask(const Scenario& s, const Task& t) {
    TaskRun r;
    const Grid& g = s.grid;
    checkDense(g, "task " + t.name, 4096);
    FockIndexer ix(g);
    PointMatrix f = flowFactor(s);
    std::vector<StructureMap> S(g.n_cells, spatialStructureMap(g, f));
    std::vector<PointMatrix> F(g.n_cells, f);
    Mat U = evolve(g, ix, F, Mat::Identity(g.dim_h, g.dim_h), g.horizon);
    Mat jA = flowApply(g, ix, S, t.observable, g.horizon);
    Mat jB = flowApply(g, ix, S, t.observable_b, g.horizon);
    Mat jAB = flowApply(g, ix, S, Mat(t.observable * t.observable_b), g.horizon);
    double heis = relativeNorm(
        ix, jA - measureAdjoint(ix, U) * liftInitial(ix, t.observable) * U,
        t.xi_plus, t.xi_minus);
    double homo = relativeNorm(ix, jAB - jA * jB, t.xi_plus, t.xi_minus);
    r.csv.row({"n", "dt", "heisenberg_defect", "homomorphism_defect"});
    r.csv.row({std::to_string(g.n_cells), fmt(g.dt()), fmt(heis), fmt(homo)});
    double worst = std::max(heis, homo);
    if (worst > t.tolerance) {
        r.pass = false;
        r.message = "defect " + fmt(worst) + " exceeds tolerance " + fmt(t.tolerance);
    }
    return r;
}

TaskRun runConvergeTask(const Scenario& s, const Task& t, std::uint64_t seed,
                        const std::vector<int>& nOverride, int cap) {
    TaskRun r;
    std::vector<int> ns = nOverride.empty() ? t.n_list : nOverride;
    for (std::size_t i = 0; i + 1 < ns.size(); ++i)
        if (ns[i] >= ns[i + 1]) invalid("task " + t.name + ": n_list must be ascending");
    for (int n : ns)
        if (n < 1 || n > cap)
            invalid("task " + t.name + ": grid size " + std::to_string(n) +
                    " outside the cap " + std::to_string(cap));
    std::vector<double> vals;
    for (int n : ns) {
        Grid g{s.grid.horizon, n, s.grid.dim_h, s.grid.d};
        Rng rng = subRng(seed, std::uint64_t(n));
        if (t.metric == "unitarity") {
            LocalChainOp U = localChain(g, cellFactors(s, g),
                                        Mat::Identity(g.dim_h, g.dim_h), g.horizon + 1);
            vals.push_back(unitarityDefectChain(U, t.xi_plus, t.xi_minus, rng));
        } else if (t.metric == "ito") {
            vals.push_back(itoFormulaDefectChain(g, cellFactors(s, g),
                                                 Mat::Identity(g.dim_h, g.dim_h),
                                                 t.xi_plus, t.xi_minus, 6, rng));
        } else if (t.metric == "multiplicativity") {
            std::vector<PointMatrix> F = cellFactors(s, g);
            Mat X = Mat::Identity(1, 1);
            vals.push_back(multiplicativityDefectChain(g, F, F, X, X, t.xi_plus,
                                                       t.xi_minus, rng));
        } else {
            checkDense(g, "task " + t.name, 4096);
            FockIndexer ix(g);
            PointMatrix f = flowFactor(s);
            std::vector<StructureMap> S(g.n_cells, spatialStructureMap(g, f));
            Mat jA = flowApply(g, ix, S, t.observable, g.horizon);
            Mat jB = flowApply(g, ix, S, t.observable_b, g.horizon);
            Mat jAB =
                flowApply(g, ix, S, Mat(t.observable * t.observable_b), g.horizon);
            vals.push_back(relativeNorm(ix, jAB - jA * jB, t.xi_plus, t.xi_minus));
        }
    }
    bool exact = true;
    for (double v : vals) exact = exact && v <= 1e-12;
    std::string order = exact ? "exact" : fmt(fittedOrder(ns, vals));
    r.csv.row({"metric", "n", "dt", "defect", "observed_order"});
    for (std::size_t i = 0; i < ns.size(); ++i)
        r.csv.row({t.metric, std::to_string(ns[i]), fmt(s.grid.horizon / ns[i]),
                   fmt(vals[i]), order});
    if (!exact && fittedOrder(ns, vals) < t.min_order) {
        r.pass = false;
        r.message = "observed order " + order + " below the floor " + fmt(t.min_order);
    }
    return r;
}

TaskRun runBoundsTask(const Scenario& s, const Task& t, std::uint64_t seed) {
    TaskRun r;
    const Grid& g = s.grid;
    checkDense(g, "task " + t.name, 2048);
    FockIndexer ix(g);
    Zeta z;
    for (int c = 0; c < g.n_cells; ++c) {
        z.z00.push_back(1.2);
        z.z0p.push_back(1.0);
        z.zm0.push_back(1.0);
        z.zmp.push_back(1.0);
    }
    double xip = 4.0, xim = 1.0;
    Rng rng = subRng(seed, 1);
    int trials = s.generator_type == "ltable" ? 1 : t.trials;
    r.csv.row({"trial", "bound", "actual", "margin"});
    double worst = 0;
    for (int i = 0; i < trials; ++i) {
        Kernel T = s.generator_type == "ltable" ? s.ltable
                                                : randomSparseKernel(g, rng, 8);
        double bound = epsilonOperatorBound(T, z, xip, xim).bound;
        double actual = relativeNorm(ix, epsilonMatrix(T, ix), xip, xim);
        double margin = bound - actual;
        worst = std::min(worst, margin);
        r.csv.row({std::to_string(i), fmt(bound), fmt(actual), fmt(margin)});
    }
    if (worst < -t.tolerance) {
        r.pass = false;
        r.message = "bound violated by " + fmt(-worst);
    }
    return r;
}

void validateTasks(const Scenario& s) {
    std::set<std::string> names;
    bool evolGen = s.generator_type == "hamiltonian" || s.generator_type == "hp";
    bool flowGen = s.generator_type == "hp" || s.generator_type == "structure-maps";
    for (const Task& t : s.tasks) {
        std::string ctx = "task " + t.name;
        if (!names.insert(t.name).second) invalid(ctx + ": duplicate name");
        if (t.type == "evolve" || t.type == "unitarity" || t.type == "ito-check") {
            if (!evolGen)
                invalid(ctx + ": needs a hamiltonian or hp generator");
            if (s.grid.d != 1) invalid(ctx + ": needs multiplicity d == 1");
        } else if (t.type == "flow") {
            if (!flowGen) invalid(ctx + ": needs an hp or structure-maps generator");
        } else if (t.type == "converge") {
            if (t.metric == "unitarity" || t.metric == "ito" ||
                t.metric == "multiplicativity") {
                if (!evolGen)
                    invalid(ctx + ": needs a hamiltonian or hp generator");
                if (s.grid.d != 1) invalid(ctx + ": needs multiplicity d == 1");
                if (t.metric == "multiplicativity" && s.grid.dim_h != 1)
                    invalid(ctx + ": multiplicativity metric needs dim_h == 1");
            } else if (t.metric == "flow-homomorphism") {
                if (!flowGen)
                    invalid(ctx + ": needs an hp or structure-maps generator");
            } else {
                invalid(ctx + ": unknown metric \"" + t.metric + "\"");
            }
        } else if (t.type != "bounds") {
            invalid(ctx + ": unknown type \"" + t.type + "\"");
        }
    }
}

}  // namespace

Scenario loadScenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError(2, "cannot open scenario file " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ScenarioError(2, std::string("scenario parse error: ") + e.what());
    }
    Scenario s;
    const json& grid = need(j, "grid", "scenario");
    s.grid.horizon = need(grid, "horizon", "grid").get<double>();
    s.grid.n_cells = need(grid, "n_cells", "grid").get<int>();
    s.grid.dim_h = need(grid, "dim_h", "grid").get<int>();
    s.grid.d = need(grid, "d", "grid").get<int>();
    if (s.grid.horizon <= 0) invalid("grid.horizon: must be positive");
    if (s.grid.n_cells < 1 || s.grid.n_cells > 24)
        invalid("grid.n_cells: must be between 1 and 24");
    if (s.grid.dim_h < 1) invalid("grid.dim_h: must be at least 1");
    if (s.grid.d < 1) invalid("grid.d: must be at least 1");
    s.seed = need(j, "seed", "scenario").get<std::uint64_t>();

    const json& gen = need(j, "generator", "scenario");
    s.generator_type = need(gen, "type", "generator").get<std::string>();
    long h = s.grid.dim_h, hd = h * s.grid.d;
    if (s.generator_type == "hamiltonian") {
        s.H = parseMat(need(gen, "H", "generator"), "generator.H", h, h);
        if ((s.H - Mat(s.H.adjoint())).norm() > 1e-12 * std::max(1.0, s.H.norm()))
            invalid("generator.H: must be Hermitian");
    } else if (s.generator_type == "hp") {
        s.W = parseMat(need(gen, "W", "generator"), "generator.W", hd, hd);
        s.L = parseMat(need(gen, "L", "generator"), "generator.L", hd, h);
        s.H = parseMat(need(gen, "H", "generator"), "generator.H", h, h);
    } else if (s.generator_type == "structure-maps") {
        const json& fac = need(gen, "factor", "generator");
        s.factor.f00 = parseMat(need(fac, "f00", "generator.factor"), "generator.factor.f00", hd, hd);
        s.factor.f0p = parseMat(need(fac, "f0p", "generator.factor"), "generator.factor.f0p", hd, h);
        s.factor.fm0 = parseMat(need(fac, "fm0", "generator.factor"), "generator.factor.fm0", h, hd);
        s.factor.fmp = parseMat(need(fac, "fmp", "generator.factor"), "generator.factor.fmp", h, h);
    } else if (s.generator_type == "ltable") {
        s.ltable = Kernel{s.grid, {}};
        const json& tabs = need(gen, "tables", "generator");
        if (!tabs.is_array() || tabs.empty())
            invalid("generator.tables: expected a non-empty array");
        for (std::size_t i = 0; i < tabs.size(); ++i) {
            std::string ctx = "generator.tables[" + std::to_string(i) + "]";
            const json& tb = tabs[i];
            TableKey k{parseCells(need(tb, "k00", ctx), ctx + ".k00", s.grid.n_cells),
                       parseCells(need(tb, "k0p", ctx), ctx + ".k0p", s.grid.n_cells),
                       parseCells(need(tb, "km0", ctx), ctx + ".km0", s.grid.n_cells),
                       parseCells(need(tb, "kmp", ctx), ctx + ".kmp", s.grid.n_cells)};
            if (!k.disjoint()) invalid(ctx + ": cell sets overlap");
            s.ltable.add(k, parseMat(need(tb, "block", ctx), ctx + ".block",
                                     kernelOutDim(s.grid, k), kernelInDim(s.grid, k)));
        }
    } else {
        invalid("generator.type: unknown type \"" + s.generator_type + "\"");
    }

    const json& tasks = need(j, "tasks", "scenario");
    if (!tasks.is_array() || tasks.empty()) invalid("tasks: expected a non-empty array");
    for (const auto& tj : tasks) {
        Task t;
        t.name = need(tj, "name", "task").get<std::string>();
        std::string ctx = "task " + t.name;
        t.type = need(tj, "type", ctx).get<std::string>();
        if (tj.contains("xi_plus")) t.xi_plus = tj["xi_plus"].get<double>();
        if (tj.contains("xi_minus")) t.xi_minus = tj["xi_minus"].get<double>();
        if (t.xi_plus <= t.xi_minus || t.xi_minus <= 0)
            invalid(ctx + ": needs xi_plus > xi_minus > 0");
        if (t.type == "converge") {
            t.metric = need(tj, "metric", ctx).get<std::string>();
            for (const auto& e : need(tj, "n_list", ctx))
                t.n_list.push_back(e.get<int>());
            if (t.n_list.empty()) invalid(ctx + ".n_list: must be non-empty");
            t.min_order = need(tj, "min_order", ctx).get<double>();
        } else {
            t.tolerance = need(tj, "tolerance", ctx).get<double>();
            t.has_tolerance = true;
        }
        if (t.type == "bounds" && tj.contains("trials"))
            t.trials = tj["trials"].get<int>();
        bool needsObs = t.type == "flow" ||
                        (t.type == "converge" && t.metric == "flow-homomorphism");
        if (needsObs) {
            long hh = s.grid.dim_h;
            t.observable = parseMat(need(tj, "observable", ctx), ctx + ".observable", hh, hh);
            t.observable_b =
                parseMat(need(tj, "observable_b", ctx), ctx + ".observable_b", hh, hh);
        }
        s.tasks.push_back(std::move(t));
    }
    validateTasks(s);
    return s;
}

std::vector<TaskReport> runScenario(const Scenario& s, const std::string& outDir,
                                    const std::string& onlyTask,
                                    const std::vector<int>& nOverride, int cap) {
    if (s.grid.n_cells > cap)
        invalid("grid.n_cells exceeds the cap " + std::to_string(cap));
    std::filesystem::create_directories(outDir);
    std::vector<TaskReport> reports;
    bool found = false;
    for (std::size_t i = 0; i < s.tasks.size(); ++i) {
        const Task& t = s.tasks[i];
        if (!onlyTask.empty() && t.name != onlyTask) continue;
        found = true;
        std::uint64_t taskSeed = s.seed ^ (0x9e3779b97f4a7c15ull * (i + 1));
        TaskRun run;
        if (t.type == "converge")
            run = runConvergeTask(s, t, taskSeed, nOverride, cap);
        else if (t.type == "flow")
            run = runFlowTask(s, t);
        else if (t.type == "bounds")
            run = runBoundsTask(s, t, taskSeed);
        else
            run = runEvolutionTask(s, t, taskSeed);
        Csv head;
        head.comment("task", t.name);
        head.comment("type", t.type);
        head.comment("seed", fmtU(taskSeed));
        head.comment("prng", "mt19937_64");
        head.comment("xi_plus", fmt(t.xi_plus));
        head.comment("xi_minus", fmt(t.xi_minus));
        if (t.type == "converge")
            head.comment("min_order", fmt(t.min_order));
        else
            head.comment("tolerance", fmt(t.tolerance));
        if (t.type == "bounds") head.comment("trials", std::to_string(t.trials));
        std::string path = outDir + "/" + t.name + ".csv";
        writeFile(path, head.text + run.csv.text);
        reports.push_back({t.name, run.pass,
                           run.pass ? std::string("ok") : run.message, path});
    }
    if (!onlyTask.empty() && !found)
        invalid("task \"" + onlyTask + "\" is not declared in the scenario");
    return reports;
}

}  // namespace qsc
