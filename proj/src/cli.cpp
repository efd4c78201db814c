#include "batchpost/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "batchpost/backtest.hpp"
#include "batchpost/dp_offline.hpp"
#include "batchpost/formats.hpp"
#include "batchpost/ingest.hpp"
#include "batchpost/policies.hpp"
#include "batchpost/price_model.hpp"
#include "batchpost/qsolver.hpp"
#include "batchpost/sweep.hpp"

namespace batchpost::cli {

namespace {

namespace fs = std::filesystem;

/// Bad flag values or flag combinations (exit code 1).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Manifest {
    std::string subcommand;
    Json config = Json::object();
    std::map<std::string, std::string> inputs;  // path -> sha256
};

struct Result {
    std::string text;
    int code = kOk;
};

struct PriceInput {
    std::string path;
    std::string tsCol = "timestamp";
    std::string feeCol = "price";
    std::string unit = "gwei";
    std::size_t stride = 1;
};

struct OutputOptions {
    std::string outPath;
    std::string manifestPath;
};

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buffer[1 << 16];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx, digest, &length);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

fs::path resolve_input(const std::string& name) {
    fs::path path(name);
    if (fs::exists(path) || path.is_absolute()) {
        return path;
    }
    if (const char* dir = std::getenv(kDataDirEnv)) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) {
            return candidate;
        }
    }
    return path;
}

fs::path track_input(const std::string& name, Manifest& manifest) {
    const auto path = resolve_input(name);
    manifest.inputs[path.string()] = sha256_file(path);
    return path;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

Json read_json_file(const fs::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void add_price_options(CLI::App* cmd, PriceInput& input, const std::string& description) {
    cmd->add_option("--prices", input.path, description)->required();
    cmd->add_option("--ts-col", input.tsCol, "Timestamp column name")->capture_default_str();
    cmd->add_option("--fee-col", input.feeCol, "Base-fee column name")->capture_default_str();
    cmd->add_option("--fee-unit", input.unit, "Unit of the fee column")
        ->check(CLI::IsMember({"wei", "gwei"}))
        ->capture_default_str();
    cmd->add_option("--stride", input.stride, "Keep every n-th row (5 turns per-block data into per-minute data)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_output_options(CLI::App* cmd, OutputOptions& output) {
    cmd->add_option("--out", output.outPath, "Write machine output to this file (default: stdout)");
    cmd->add_option("--manifest", output.manifestPath,
                    "Run manifest path (default: <out>.manifest.json when --out is given)");
}

PriceSeries load_prices(const PriceInput& input, Manifest& manifest) {
    const auto path = track_input(input.path, manifest);
    CsvSchema schema{input.tsCol, input.feeCol, parse_fee_unit(input.unit)};
    auto series = resample_per_minute(load_csv(path, schema), input.stride);
    manifest.config["prices"] = Json{{"path", input.path},   {"tsCol", input.tsCol}, {"feeCol", input.feeCol},
                                     {"unit", input.unit},   {"stride", input.stride}};
    return series;
}

Json parse_json_flag(const std::string& text, const char* flag) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw UsageError(std::string(flag) + " is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    PriceInput input;
};

Result do_ingest(const IngestArgs& args, Manifest& manifest) {
    const auto series = load_prices(args.input, manifest);
    std::ostringstream text;
    write_csv(text, series);
    return {text.str()};
}

struct HistogramArgs {
    PriceInput input;
    double binWidth = 0.005;
    std::string format = "json";
};

Result do_histogram(const HistogramArgs& args, Manifest& manifest) {
    const auto series = load_prices(args.input, manifest);
    const auto hist = ratio_histogram(series, args.binWidth);
    manifest.config["binWidth"] = args.binWidth;
    if (args.format == "csv") {
        std::ostringstream text;
        write_histogram_csv(text, hist);
        return {text.str()};
    }
    return {canonical_dump(Json(hist))};
}

struct SynthArgs {
    std::string dist = "minute";
    std::size_t bins = 200;
    std::size_t steps = 5;
    std::string source;
    double p0 = 30.0;
    double floor = 10.0;
    std::size_t length = 0;
    std::uint64_t seed = 0;
    std::string distOut;
};

FactorDistribution build_distribution(const std::string& kind, std::size_t bins, std::size_t steps,
                                      const std::optional<PriceSeries>& source) {
    if (kind == "block") {
        return block_factor_distribution(bins);
    }
    if (kind == "minute") {
        return minute_factor_distribution(steps, bins);
    }
    if (!source) {
        throw UsageError("an empirical distribution needs a price series");
    }
    return empirical_factor_distribution(*source, bins);
}

Result do_synth(const SynthArgs& args, const PriceInput& sourceInput, Manifest& manifest) {
    std::optional<PriceSeries> source;
    if (args.dist == "empirical") {
        if (sourceInput.path.empty()) {
            throw UsageError("--dist empirical needs --source");
        }
        PriceInput input = sourceInput;
        source = load_prices(input, manifest);
    }
    const auto dist = build_distribution(args.dist, args.bins, args.steps, source);
    manifest.config["synth"] = Json{{"dist", args.dist}, {"bins", args.bins},   {"steps", args.steps},
                                    {"p0", args.p0},     {"floor", args.floor}, {"length", args.length},
                                    {"seed", args.seed}};
    if (!args.distOut.empty()) {
        std::ofstream out(args.distOut);
        out << canonical_dump(Json(dist));
    }
    const auto series = sample_path(dist, args.p0, args.length, args.seed, args.floor);
    std::ostringstream text;
    write_csv(text, series);
    return {text.str()};
}

struct SolveArgs {
    std::string preset = "desk";
    std::string kernel = "synthetic";
    std::size_t kernelBins = 200;
    std::optional<std::size_t> numPrices;
    std::optional<std::size_t> maxQueue;
    std::optional<double> pMin;
    std::optional<double> pMax;
    std::optional<double> c;
    std::optional<double> delta;
    std::optional<double> alpha;
    std::optional<double> epsilon;
    std::optional<std::size_t> maxIterations;
    unsigned threads = 0;
    bool includeValues = false;
    std::string policyCsv;
    std::string kernelOut;
};

Result do_solve(const SolveArgs& args, const PriceInput& priceInput, Manifest& manifest) {
    auto preset = solver_preset(args.preset);
    auto& config = preset.config;
    auto& grid = preset.grid;
    if (args.numPrices) {
        config.numPrices = grid.numPoints = *args.numPrices;
    }
    if (args.maxQueue) config.maxQueue = *args.maxQueue;
    if (args.pMin) grid.pMin = *args.pMin;
    if (args.pMax) grid.pMax = *args.pMax;
    if (args.c) config.cost.c = *args.c;
    if (args.delta) config.cost.delta = *args.delta;
    if (args.alpha) config.alpha = *args.alpha;
    if (args.epsilon) config.epsilon = *args.epsilon;
    if (args.maxIterations) config.maxIterations = *args.maxIterations;
    config.threads = args.threads;
    try {
        config.validate();
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    std::optional<PriceSeries> source;
    if (args.kernel == "empirical") {
        if (priceInput.path.empty()) {
            throw UsageError("--kernel empirical needs --prices");
        }
        source = load_prices(priceInput, manifest);
    }
    const auto dist = build_distribution(args.kernel == "empirical" ? "empirical" : "minute", args.kernelBins, 5,
                                         source);
    const auto kernel = build_kernel(grid, dist, args.threads);
    if (!args.kernelOut.empty()) {
        std::ofstream out(args.kernelOut);
        out << canonical_dump(Json(kernel));
    }

    const auto result = solve(config, grid, kernel);
    manifest.config["solver"] = config;
    manifest.config["grid"] = grid;
    manifest.config["kernel"] = Json{{"source", args.kernel}, {"bins", args.kernelBins}};

    Json doc{{"config", config},
             {"grid", grid},
             {"kernel", {{"source", args.kernel}, {"bins", args.kernelBins}}},
             {"iterations", result.iterations},
             {"converged", result.converged},
             {"finalDelta", result.finalDelta},
             {"policy", result.policy}};
    if (args.includeValues) {
        doc["values"] = result.values;
    }
    if (!args.policyCsv.empty()) {
        std::ofstream out(args.policyCsv);
        write_policy_csv(out, result.policy);
    }
    return {canonical_dump(doc), result.converged ? kOk : kNotConverged};
}

struct AnalyzeArgs {
    std::string solution;
    double excludeTop = 0.1;
    double tolerance = 0.02;
};

Result do_analyze(const AnalyzeArgs& args, Manifest& manifest) {
    const auto doc = read_json_file(track_input(args.solution, manifest));
    PriceGrid grid;
    PolicyTable policy;
    try {
        grid = doc.at("grid").get<PriceGrid>();
        policy = doc.at("policy").get<PolicyTable>();
    } catch (const std::exception& e) {
        throw DataError(args.solution + ": " + e.what());
    }
    ThresholdOptions options{args.excludeTop, args.tolerance};
    manifest.config["analyze"] = Json{{"excludeTop", args.excludeTop}, {"tolerance", args.tolerance}};
    const auto summary = analyze_thresholds(policy, grid, options);
    const auto violations = monotonicity_check(policy, summary.analyzedPriceRows);
    Json pairs = Json::array();
    for (const auto& v : violations) {
        pairs.push_back(Json::array({Json::array({v.queueLen, v.priceIndex}),
                                     Json::array({v.otherQueueLen, v.otherPriceIndex})}));
    }
    Json doc_out{{"thresholds", summary},
                 {"monotonicity",
                  {{"priceLimit", summary.analyzedPriceRows},
                   {"violationCount", violations.size()},
                   {"fullTableViolationCount", monotonicity_check(policy).size()},
                   {"violations", std::move(pairs)}}}};
    return {canonical_dump(doc_out)};
}

PolicySpec load_policy(const std::string& text, Manifest& manifest) {
    Json doc;
    if (!text.empty() && text.front() == '@') {
        doc = read_json_file(track_input(text.substr(1), manifest));
    } else {
        doc = parse_json_flag(text, "--policy");
    }
    if (doc.is_object() && doc.value("kind", "") == "learned" && doc.contains("solution")) {
        const auto solutionName = doc.at("solution").get<std::string>();
        const auto solution = read_json_file(track_input(solutionName, manifest));
        doc = Json{{"kind", "learned"}, {"grid", solution.at("grid")}, {"policy", solution.at("policy")}};
        manifest.config["policy"] = Json{{"kind", "learned"}, {"solution", solutionName}};
    }
    try {
        auto spec = parse_policy(doc);
        if (!manifest.config.contains("policy")) {
            manifest.config["policy"] = policy_to_json(spec);
        }
        return spec;
    } catch (const Json::exception& e) {
        throw UsageError(std::string("invalid policy: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid policy: ") + e.what());
    }
}

struct CostArgs {
    double c = 1.0;
    std::string tips;
    std::string tipCol = "tip";
    std::optional<double> fixedTip;
    bool excludeUnposted = false;
    bool flushAtEnd = false;
};

void add_cost_options(CLI::App* cmd, CostArgs& args) {
    cmd->add_option("--c", args.c, "Delay cost weight")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--tips", args.tips, "CSV of per-round tips (GWEI), aligned with the price series");
    cmd->add_option("--tip-col", args.tipCol, "Tip column name")->capture_default_str();
    cmd->add_option("--fixed-tip", args.fixedTip, "Constant tip (GWEI) added to every round");
    cmd->add_flag("--exclude-unposted", args.excludeUnposted, "Leave still-queued batches out of delay statistics");
    cmd->add_flag("--flush-at-end", args.flushAtEnd, "Post the remaining queue in the last round");
}

BacktestConfig make_backtest_config(const CostArgs& args, const PriceInput& priceInput, std::size_t rounds,
                                    Manifest& manifest) {
    BacktestConfig config;
    config.c = args.c;
    config.includeUnpostedInDelayStats = !args.excludeUnposted;
    config.flushAtEnd = args.flushAtEnd;
    if (!args.tips.empty() && args.fixedTip) {
        throw UsageError("--tips and --fixed-tip are mutually exclusive");
    }
    if (!args.tips.empty()) {
        const auto path = track_input(args.tips, manifest);
        std::ifstream in(path);
        if (!in) {
            throw DataError("cannot open '" + path.string() + "'");
        }
        // Tips may be zero, so they are parsed by hand rather than as fees.
        std::string line;
        std::getline(in, line);
        std::vector<std::string> header;
        std::stringstream headerStream(line);
        for (std::string field; std::getline(headerStream, field, ',');) {
            header.push_back(field);
        }
        const auto column = std::find(header.begin(), header.end(), args.tipCol) - header.begin();
        if (column == static_cast<std::ptrdiff_t>(header.size())) {
            throw DataError(path.string() + ": header has no tip column '" + args.tipCol + "'");
        }
        std::vector<double> tips;
        std::size_t row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) {
                continue;
            }
            std::stringstream fields(line);
            std::string field;
            for (std::ptrdiff_t k = 0; k <= column; ++k) {
                if (!std::getline(fields, field, ',')) {
                    field.clear();
                    break;
                }
            }
            char* end = nullptr;
            const double tip = std::strtod(field.c_str(), &end);
            if (field.empty() || *end != '\0' || !(tip >= 0.0)) {
                throw DataError(path.string() + ": bad tip at row " + std::to_string(row));
            }
            tips.push_back(tip);
        }
        std::vector<double> resampled;
        for (std::size_t i = 0; i < tips.size(); i += priceInput.stride) {
            resampled.push_back(tips[i]);
        }
        config.tips = std::move(resampled);
    } else if (args.fixedTip) {
        config.tips = std::vector<double>(rounds, *args.fixedTip);
    }
    manifest.config["backtest"] = Json{{"c", args.c},
                                       {"excludeUnposted", args.excludeUnposted},
                                       {"flushAtEnd", args.flushAtEnd},
                                       {"tips", args.tips},
                                       {"fixedTip", args.fixedTip ? Json(*args.fixedTip) : Json(nullptr)}};
    return config;
}

struct BacktestArgs {
    std::string policy;
    std::string trace;
};

Result do_backtest(const BacktestArgs& args, const PriceInput& priceInput, const CostArgs& costArgs,
                   Manifest& manifest) {
    const auto spec = load_policy(args.policy, manifest);
    const auto series = load_prices(priceInput, manifest);
    const auto config = make_backtest_config(costArgs, priceInput, series.size(), manifest);
    const auto result = run_traced(spec, series, config);
    if (!args.trace.empty()) {
        std::ofstream out(args.trace);
        write_trace_csv(out, result.trace);
    }
    Json doc = result.report;
    doc["policy"] = manifest.config["policy"];
    return {canonical_dump(doc)};
}

struct SweepArgs {
    std::string family;
    std::vector<std::string> params;
    std::string variant = "literal";
    std::string format = "json";
    unsigned threads = 0;
};

ParamGrid parse_grid(const SweepArgs& args) {
    ParamGrid grid;
    grid.family = args.family;
    grid.variant = parse_variant(args.variant);
    std::map<std::string, std::vector<double>> given;
    for (const auto& spec : args.params) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--param expects NAME=v1,v2,... but got '" + spec + "'");
        }
        auto& values = given[spec.substr(0, eq)];
        std::stringstream list(spec.substr(eq + 1));
        for (std::string item; std::getline(list, item, ',');) {
            char* end = nullptr;
            const double value = std::strtod(item.c_str(), &end);
            if (item.empty() || *end != '\0') {
                throw UsageError("--param value '" + item + "' is not a number");
            }
            values.push_back(value);
        }
        if (values.empty()) {
            throw UsageError("--param " + spec.substr(0, eq) + " lists no values");
        }
    }
    for (const auto& name : family_parameters(args.family)) {
        const auto it = given.find(name);
        if (it == given.end()) {
            throw UsageError("sweep over '" + args.family + "' needs --param " + name + "=...");
        }
        grid.params.emplace_back(name, it->second);
        given.erase(it);
    }
    if (!given.empty()) {
        throw UsageError("policy family '" + args.family + "' has no parameter '" + given.begin()->first + "'");
    }
    return grid;
}

Result do_sweep(const SweepArgs& args, const PriceInput& priceInput, const CostArgs& costArgs,
                Manifest& manifest) {
    ParamGrid grid;
    try {
        grid = parse_grid(args);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto series = load_prices(priceInput, manifest);
    const auto config = make_backtest_config(costArgs, priceInput, series.size(), manifest);
    const auto rows = grid_sweep(grid, series, config, args.threads);
    const auto frontier = pareto(rows);
    const auto trivial = run(TrivialPolicy{}, series, config);

    Json gridJson = Json::object();
    for (const auto& [name, values] : grid.params) {
        gridJson[name] = values;
    }
    manifest.config["sweep"] = Json{{"family", grid.family}, {"variant", args.variant}, {"grid", gridJson}};

    if (args.format == "csv") {
        std::ostringstream text;
        write_sweep_csv(text, rows, frontier);
        return {text.str()};
    }
    std::vector<bool> onFrontier(rows.size(), false);
    for (const auto index : frontier.members) {
        onFrontier[index] = true;
    }
    Json rowsJson = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Json params = Json::object();
        for (const auto& [name, value] : rows[i].params) {
            params[name] = value;
        }
        Json row{{"index", i}, {"params", params}, {"onFrontier", onFrontier[i]}};
        if (rows[i].report) {
            row["report"] = *rows[i].report;
            row["improvementVsTrivial"] = improvement_vs_trivial(*rows[i].report, trivial);
        } else {
            row["error"] = rows[i].error;
        }
        rowsJson.push_back(std::move(row));
    }
    Json doc{{"family", grid.family}, {"rows", std::move(rowsJson)}, {"frontier", frontier.members},
             {"trivial", trivial}};
    if (grid.family == "qThreshold") {
        doc["variant"] = args.variant;
    }
    return {canonical_dump(doc)};
}

struct DpArgs {
    std::string prices;
    double c = 1.0;
    bool oracle = false;
    PriceInput schema;
};

Result do_dp(const DpArgs& args, Manifest& manifest) {
    DPInstance instance;
    instance.c = args.c;
    if (fs::exists(resolve_input(args.prices))) {
        PriceInput input = args.schema;
        input.path = args.prices;
        instance.prices = load_prices(input, manifest).prices;
    } else {
        std::stringstream list(args.prices);
        for (std::string item; std::getline(list, item, ',');) {
            char* end = nullptr;
            const double value = std::strtod(item.c_str(), &end);
            if (item.empty() || *end != '\0') {
                throw UsageError("--prices is neither a file nor a comma-separated list of numbers");
            }
            instance.prices.push_back(value);
        }
        manifest.config["prices"] = instance.prices;
    }
    try {
        instance.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    if (args.oracle && instance.prices.size() > kBruteForceMaxRounds) {
        throw UsageError("--oracle supports at most " + std::to_string(kBruteForceMaxRounds) + " rounds");
    }
    manifest.config["dp"] = Json{{"c", args.c}, {"oracle", args.oracle}};

    const auto schedule = solve_fixed_prices(instance);
    Json doc{{"rounds", instance.prices.size()},
             {"c", instance.c},
             {"nPost", schedule.nPost},
             {"totalCost", schedule.totalCost},
             {"zeroOrAllFraction", zero_or_all_fraction(schedule)}};
    if (args.oracle) {
        const auto oracle = brute_force_schedule(instance);
        const bool match =
            std::abs(oracle.totalCost - schedule.totalCost) <= 1e-9 * std::max(1.0, std::abs(oracle.totalCost));
        doc["oracle"] = Json{{"nPost", oracle.nPost}, {"totalCost", oracle.totalCost}, {"match", match}};
    }
    return {canonical_dump(doc)};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    out << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Batch posting cost model, solver and back-tester", "batchpost"};
    app.set_version_flag("--version", std::string("batchpost ") + kVersion);
    app.require_subcommand(1);

    OutputOptions output;
    Manifest manifest;

    IngestArgs ingestArgs;
    auto* ingest = app.add_subcommand("ingest", "Normalize a base-fee CSV into a GWEI price series");
    add_price_options(ingest, ingestArgs.input, "Input CSV");
    add_output_options(ingest, output);

    HistogramArgs histArgs;
    auto* histogram = app.add_subcommand("histogram", "Histogram of consecutive price ratios");
    add_price_options(histogram, histArgs.input, "Input CSV");
    histogram->add_option("--bin-width", histArgs.binWidth, "Ratio bin width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    histogram->add_option("--format", histArgs.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    add_output_options(histogram, output);

    SynthArgs synthArgs;
    PriceInput synthSource;
    auto* synth = app.add_subcommand("synth", "Sample a synthetic price path");
    synth->add_option("--dist", synthArgs.dist, "Factor distribution")
        ->check(CLI::IsMember({"block", "minute", "empirical"}))
        ->capture_default_str();
    synth->add_option("--bins", synthArgs.bins, "Atoms in the factor distribution")->capture_default_str();
    synth->add_option("--steps", synthArgs.steps, "Blocks per round for the minute distribution")
        ->capture_default_str();
    synth->add_option("--source", synthSource.path, "Price CSV for --dist empirical");
    synth->add_option("--p0", synthArgs.p0, "Starting price (GWEI)")->capture_default_str();
    synth->add_option("--floor", synthArgs.floor, "Price floor (GWEI)")->capture_default_str();
    synth->add_option("--length", synthArgs.length, "Number of rounds")->required()->check(CLI::PositiveNumber);
    synth->add_option("--seed", synthArgs.seed, "Random seed")->required();
    synth->add_option("--dist-out", synthArgs.distOut, "Also write the factor distribution as JSON");
    add_output_options(synth, output);

    SolveArgs solveArgs;
    PriceInput solvePrices;
    auto* solveCmd = app.add_subcommand("solve", "Solve the discounted posting problem on a price grid");
    solveCmd->add_option("--preset", solveArgs.preset)
        ->check(CLI::IsMember({"micro", "desk", "full"}))
        ->capture_default_str();
    solveCmd->add_option("--kernel", solveArgs.kernel, "Price transition source")
        ->check(CLI::IsMember({"synthetic", "empirical"}))
        ->capture_default_str();
    solveCmd->add_option("--kernel-bins", solveArgs.kernelBins)->capture_default_str();
    solveCmd->add_option("--prices", solvePrices.path, "Price CSV for --kernel empirical");
    solveCmd->add_option("--stride", solvePrices.stride)->check(CLI::PositiveNumber);
    solveCmd->add_option("--num-prices", solveArgs.numPrices);
    solveCmd->add_option("--max-queue", solveArgs.maxQueue);
    solveCmd->add_option("--p-min", solveArgs.pMin);
    solveCmd->add_option("--p-max", solveArgs.pMax);
    solveCmd->add_option("--c", solveArgs.c);
    solveCmd->add_option("--delta", solveArgs.delta);
    solveCmd->add_option("--alpha", solveArgs.alpha);
    solveCmd->add_option("--epsilon", solveArgs.epsilon);
    solveCmd->add_option("--max-iter", solveArgs.maxIterations);
    solveCmd->add_option("--threads", solveArgs.threads, "Worker threads (0 = all cores)")->capture_default_str();
    solveCmd->add_flag("--values", solveArgs.includeValues, "Include the value table in the output");
    solveCmd->add_option("--policy-csv", solveArgs.policyCsv, "Also write the policy matrix as CSV");
    solveCmd->add_option("--kernel-out", solveArgs.kernelOut, "Also write the transition kernel as JSON");
    add_output_options(solveCmd, output);

    AnalyzeArgs analyzeArgs;
    auto* analyze = app.add_subcommand("analyze", "Threshold structure and monotonicity of a solved policy");
    analyze->add_option("--solution", analyzeArgs.solution, "Output of `solve`")->required();
    analyze->add_option("--exclude-top", analyzeArgs.excludeTop, "Fraction of top price rows to skip")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    analyze->add_option("--tolerance", analyzeArgs.tolerance, "Tolerated fraction of inconsistent states")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    add_output_options(analyze, output);

    BacktestArgs backtestArgs;
    PriceInput backtestPrices;
    CostArgs backtestCost;
    auto* backtest = app.add_subcommand("backtest", "Replay a price series against a policy");
    backtest->add_option("--policy", backtestArgs.policy, "Policy JSON, or @file")->required();
    add_price_options(backtest, backtestPrices, "Price CSV");
    add_cost_options(backtest, backtestCost);
    backtest->add_option("--trace", backtestArgs.trace, "Write a per-round trace CSV");
    add_output_options(backtest, output);

    SweepArgs sweepArgs;
    PriceInput sweepPrices;
    CostArgs sweepCost;
    auto* sweepCmd = app.add_subcommand("sweep", "Back-test a parameter grid and mark the Pareto frontier");
    sweepCmd->add_option("--family", sweepArgs.family)
        ->required()
        ->check(CLI::IsMember({"trivial", "priceMin", "qThreshold", "arbStep", "arbSmooth"}));
    sweepCmd->add_option("--param", sweepArgs.params, "NAME=v1,v2,... (repeat per parameter)");
    sweepCmd->add_option("--variant", sweepArgs.variant)
        ->check(CLI::IsMember({"literal", "toThreshold"}))
        ->capture_default_str();
    sweepCmd->add_option("--format", sweepArgs.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sweepCmd->add_option("--threads", sweepArgs.threads, "Worker threads (0 = all cores)")->capture_default_str();
    add_price_options(sweepCmd, sweepPrices, "Price CSV");
    add_cost_options(sweepCmd, sweepCost);
    add_output_options(sweepCmd, output);

    DpArgs dpArgs;
    auto* dp = app.add_subcommand("dp", "Optimal schedule for known prices");
    dp->add_option("--prices", dpArgs.prices, "Price CSV or an inline list such as 1,10,1")->required();
    dp->add_option("--fee-col", dpArgs.schema.feeCol)->capture_default_str();
    dp->add_option("--ts-col", dpArgs.schema.tsCol)->capture_default_str();
    dp->add_option("--fee-unit", dpArgs.schema.unit)->check(CLI::IsMember({"wei", "gwei"}))->capture_default_str();
    dp->add_option("--c", dpArgs.c, "Delay cost weight")->check(CLI::PositiveNumber)->capture_default_str();
    dp->add_flag("--oracle", dpArgs.oracle, "Cross-check against exhaustive enumeration (n <= 12)");
    add_output_options(dp, output);

    // CLI11 consumes arguments from the back and without the program name.
    std::vector<std::string> reversed;
    if (!args.empty()) {
        reversed.assign(args.rbegin(), args.rend() - 1);
    }
    const auto started = std::chrono::steady_clock::now();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    Result result;
    try {
        if (ingest->parsed()) {
            manifest.subcommand = "ingest";
            result = do_ingest(ingestArgs, manifest);
        } else if (histogram->parsed()) {
            manifest.subcommand = "histogram";
            result = do_histogram(histArgs, manifest);
        } else if (synth->parsed()) {
            manifest.subcommand = "synth";
            result = do_synth(synthArgs, synthSource, manifest);
        } else if (solveCmd->parsed()) {
            manifest.subcommand = "solve";
            result = do_solve(solveArgs, solvePrices, manifest);
        } else if (analyze->parsed()) {
            manifest.subcommand = "analyze";
            result = do_analyze(analyzeArgs, manifest);
        } else if (backtest->parsed()) {
            manifest.subcommand = "backtest";
            result = do_backtest(backtestArgs, backtestPrices, backtestCost, manifest);
        } else if (sweepCmd->parsed()) {
            manifest.subcommand = "sweep";
            result = do_sweep(sweepArgs, sweepPrices, sweepCost, manifest);
        } else if (dp->parsed()) {
            manifest.subcommand = "dp";
            result = do_dp(dpArgs, manifest);
        }

        if (output.outPath.empty()) {
            out << result.text;
        } else {
            write_file(output.outPath, result.text);
        }
        std::string manifestPath = output.manifestPath;
        if (manifestPath.empty() && !output.outPath.empty()) {
            manifestPath = output.outPath + ".manifest.json";
        }
        if (!manifestPath.empty()) {
            const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
            Json inputs = Json::object();
            for (const auto& [path, digest] : manifest.inputs) {
                inputs[path] = digest;
            }
            const Json doc{{"subcommand", manifest.subcommand},
                           {"config", manifest.config},
                           {"inputs", inputs},
                           {"toolVersion", kVersion},
                           {"wallTimeSeconds", elapsed.count()},
                           {"exitCode", result.code}};
            write_file(manifestPath, canonical_dump(doc));
        }
        if (result.code == kNotConverged) {
            err << "error: solver stopped at the iteration cap without converging\n";
        }
        return result.code;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

}  // namespace batchpost::cli
