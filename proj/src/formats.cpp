#include "batchpost/formats.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

namespace batchpost {

std::string format_number(double value) {
    if (!std::isfinite(value)) {
        return "null";
    }
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value);
    return buffer;
}

namespace {

void dump(const Json& value, std::string& out, int depth) {
    const auto indent = [&](int level) { out.append(static_cast<std::size_t>(level) * 2, ' '); };
    switch (value.type()) {
        case Json::value_t::object: {
            if (value.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : value.items()) {  // std::map: keys already sorted
                if (!first) {
                    out += ",\n";
                }
                first = false;
                indent(depth + 1);
                out += Json(key).dump();
                out += ": ";
                dump(item, out, depth + 1);
            }
            out += '\n';
            indent(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (value.empty()) {
                out += "[]";
                return;
            }
            bool scalars = true;
            for (const auto& item : value) {
                scalars = scalars && !item.is_structured();
            }
            if (scalars) {
                out += '[';
                for (std::size_t i = 0; i < value.size(); ++i) {
                    if (i > 0) {
                        out += ", ";
                    }
                    dump(value[i], out, depth + 1);
                }
                out += ']';
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i > 0) {
                    out += ",\n";
                }
                indent(depth + 1);
                dump(value[i], out, depth + 1);
            }
            out += '\n';
            indent(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float:
            out += format_number(value.get<double>());
            return;
        default:
            out += value.dump();
            return;
    }
}

void require_fields(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
    if (!j.is_object()) {
        throw std::invalid_argument(what + " must be a JSON object");
    }
    for (const auto& [key, item] : j.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument(what + " has unexpected field '" + key + "'");
        }
    }
}

double number(const Json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw std::invalid_argument(what + " needs numeric field '" + key + "'");
    }
    return j.at(key).get<double>();
}

}  // namespace

std::string canonical_dump(const Json& value) {
    std::string out;
    dump(value, out, 0);
    out += '\n';
    return out;
}

void to_json(Json& j, const FactorDistribution& dist) {
    j = Json{{"factors", dist.factors}, {"probs", dist.probs}};
}

void from_json(const Json& j, FactorDistribution& dist) {
    require_fields(j, {"factors", "probs"}, "factor distribution");
    dist.factors = j.at("factors").get<std::vector<double>>();
    dist.probs = j.at("probs").get<std::vector<double>>();
    dist.validate();
}

void to_json(Json& j, const PriceGrid& grid) {
    j = Json{{"numPoints", grid.numPoints}, {"pMin", grid.pMin}, {"pMax", grid.pMax}, {"spacing", "linear"}};
}

void from_json(const Json& j, PriceGrid& grid) {
    require_fields(j, {"numPoints", "pMin", "pMax", "spacing"}, "price grid");
    if (j.contains("spacing") && j.at("spacing") != "linear") {
        throw std::invalid_argument("only linear price grids are supported");
    }
    grid.numPoints = j.at("numPoints").get<std::size_t>();
    grid.pMin = number(j, "pMin", "price grid");
    grid.pMax = number(j, "pMax", "price grid");
    grid.validate();
}

void to_json(Json& j, const TransitionKernel& kernel) {
    Json rows = Json::array();
    for (const auto& row : kernel.rows) {
        Json entries = Json::array();
        for (const auto& entry : row) {
            entries.push_back(Json::array({entry.index, entry.prob}));
        }
        rows.push_back(std::move(entries));
    }
    j = Json{{"rows", std::move(rows)}};
}

void from_json(const Json& j, TransitionKernel& kernel) {
    require_fields(j, {"rows"}, "transition kernel");
    kernel.rows.clear();
    for (const auto& row : j.at("rows")) {
        auto& out = kernel.rows.emplace_back();
        for (const auto& entry : row) {
            out.push_back({entry.at(0).get<std::size_t>(), entry.at(1).get<double>()});
        }
    }
    kernel.validate();
}

void to_json(Json& j, const ValueTable& table) {
    Json values = Json::array();
    for (std::size_t q = 0; q <= table.max_queue(); ++q) {
        Json perPrice = Json::array();
        for (std::size_t p = 0; p < table.num_prices(); ++p) {
            const auto row = table.actions(q, p);
            perPrice.push_back(std::vector<double>(row.begin(), row.end()));
        }
        values.push_back(std::move(perPrice));
    }
    j = Json{{"numPrices", table.num_prices()}, {"maxQueue", table.max_queue()}, {"values", std::move(values)}};
}

void from_json(const Json& j, ValueTable& table) {
    require_fields(j, {"numPrices", "maxQueue", "values"}, "value table");
    const auto numPrices = j.at("numPrices").get<std::size_t>();
    const auto maxQueue = j.at("maxQueue").get<std::size_t>();
    const auto& values = j.at("values");
    if (values.size() != maxQueue + 1) {
        throw std::invalid_argument("value table has the wrong number of queue rows");
    }
    ValueTable out(numPrices, maxQueue);
    for (std::size_t q = 0; q <= maxQueue; ++q) {
        if (values[q].size() != numPrices) {
            throw std::invalid_argument("value table has the wrong number of price columns");
        }
        for (std::size_t p = 0; p < numPrices; ++p) {
            if (values[q][p].size() != q + 1) {
                throw std::invalid_argument("value table row (" + std::to_string(q) + ", " + std::to_string(p) +
                                            ") must hold " + std::to_string(q + 1) + " actions");
            }
            for (std::size_t a = 0; a <= q; ++a) {
                out.at(q, p, a) = values[q][p][a].get<double>();
            }
        }
    }
    table = std::move(out);
}

void to_json(Json& j, const PolicyTable& table) {
    Json actions = Json::array();
    for (std::size_t q = 0; q <= table.max_queue(); ++q) {
        std::vector<std::uint32_t> row(table.num_prices());
        for (std::size_t p = 0; p < table.num_prices(); ++p) {
            row[p] = table.at(q, p);
        }
        actions.push_back(row);
    }
    j = Json{{"numPrices", table.num_prices()}, {"maxQueue", table.max_queue()}, {"actions", std::move(actions)}};
}

void from_json(const Json& j, PolicyTable& table) {
    require_fields(j, {"numPrices", "maxQueue", "actions"}, "policy table");
    const auto numPrices = j.at("numPrices").get<std::size_t>();
    const auto maxQueue = j.at("maxQueue").get<std::size_t>();
    const auto& actions = j.at("actions");
    if (actions.size() != maxQueue + 1) {
        throw std::invalid_argument("policy table has the wrong number of queue rows");
    }
    PolicyTable out(numPrices, maxQueue);
    for (std::size_t q = 0; q <= maxQueue; ++q) {
        if (actions[q].size() != numPrices) {
            throw std::invalid_argument("policy table has the wrong number of price columns");
        }
        for (std::size_t p = 0; p < numPrices; ++p) {
            out.at(q, p) = actions[q][p].get<std::uint32_t>();
        }
    }
    out.validate();
    table = std::move(out);
}

void to_json(Json& j, const SolverConfig& config) {
    j = Json{{"numPrices", config.numPrices}, {"maxQueue", config.maxQueue}, {"c", config.cost.c},
             {"delta", config.cost.delta},    {"alpha", config.alpha},       {"epsilon", config.epsilon},
             {"maxIterations", config.maxIterations}};
}

namespace {

const char* rule_name(ThresholdRule rule) {
    switch (rule) {
        case ThresholdRule::postAll:
            return "postAll";
        case ThresholdRule::holdBelow:
            return "holdBelow";
        case ThresholdRule::postExcess:
            return "postExcess";
    }
    return "unknown";
}

}  // namespace

void to_json(Json& j, const ThresholdSummary& summary) {
    Json violations = Json::array();
    for (const auto& v : summary.violations) {
        violations.push_back(Json{{"queueLen", v.queueLen},
                                  {"priceIndex", v.priceIndex},
                                  {"rule", rule_name(v.rule)},
                                  {"expected", v.expected},
                                  {"actual", v.actual}});
    }
    j = Json{{"thresholdPriceIndex",
              summary.thresholdPriceIndex ? Json(*summary.thresholdPriceIndex) : Json(nullptr)},
             {"thresholdPrice", summary.thresholdPrice},
             {"firstAnalyzedIndex", summary.firstAnalyzedIndex},
             {"queueThresholds", summary.queueThresholds},
             {"fittedD", summary.fittedD ? Json(*summary.fittedD) : Json(nullptr)},
             {"fitResidual", summary.fitResidual},
             {"linearResidual", summary.linearResidual},
             {"analyzedPriceRows", summary.analyzedPriceRows},
             {"checkedStates", summary.checkedStates},
             {"consistentFraction", summary.consistentFraction},
             {"structureOk", summary.structureOk},
             {"violations", std::move(violations)}};
}

void to_json(Json& j, const BacktestReport& report) {
    j = Json{{"publishingCost", report.publishingCost},
             {"delayCost", report.delayCost},
             {"maxDelay", report.maxDelay},
             {"avgDelay", report.avgDelay},
             {"maxPostedInOneRound", report.maxPostedInOneRound},
             {"maxQueueAfterPosting", report.maxQueueAfterPosting},
             {"rounds", report.rounds},
             {"batchesCreated", report.batchesCreated},
             {"batchesPosted", report.batchesPosted},
             {"finalQueueLen", report.finalQueueLen},
             {"c", report.c},
             {"includeUnposted", report.includeUnposted},
             {"avgDelayDenominator", report.includeUnposted ? "batchesCreated" : "batchesPosted"},
             {"delayUnit", "rounds"}};
}

void to_json(Json& j, const Schedule& schedule) {
    j = Json{{"nPost", schedule.nPost}, {"totalCost", schedule.totalCost}};
}

void to_json(Json& j, const Histogram& histogram) {
    j = Json{{"binEdges", histogram.binEdges}, {"counts", histogram.counts}, {"total", histogram.total}};
}

std::string variant_name(QThresholdVariant variant) {
    return variant == QThresholdVariant::literal ? "literal" : "toThreshold";
}

QThresholdVariant parse_variant(const std::string& name) {
    if (name == "literal") {
        return QThresholdVariant::literal;
    }
    if (name == "toThreshold") {
        return QThresholdVariant::toThreshold;
    }
    throw std::invalid_argument("unknown qThreshold variant '" + name + "'");
}

PolicySpec parse_policy(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw std::invalid_argument("policy document needs a string field 'kind'");
    }
    const auto kind = j.at("kind").get<std::string>();
    PolicySpec spec;
    if (kind == "trivial") {
        require_fields(j, {"kind"}, "trivial policy");
        spec = TrivialPolicy{};
    } else if (kind == "priceMin") {
        require_fields(j, {"kind", "T"}, "priceMin policy");
        spec = PriceMinPolicy{number(j, "T", "priceMin policy")};
    } else if (kind == "qThreshold") {
        require_fields(j, {"kind", "Tp", "d", "variant"}, "qThreshold policy");
        const auto variant = j.contains("variant") ? parse_variant(j.at("variant").get<std::string>())
                                                   : QThresholdVariant::literal;
        spec = QThresholdPolicy{number(j, "Tp", "qThreshold policy"), number(j, "d", "qThreshold policy"), variant};
    } else if (kind == "arbStep" || kind == "arbSmooth") {
        require_fields(j, {"kind", "ap", "e", "ut"}, kind + " policy");
        spec = ArbPolicy{number(j, "ap", kind), number(j, "e", kind), number(j, "ut", kind),
                         kind == "arbStep" ? ArbMode::step : ArbMode::smooth};
    } else if (kind == "learned") {
        require_fields(j, {"kind", "grid", "policy"}, "learned policy");
        LearnedPolicy learned;
        learned.grid = j.at("grid").get<PriceGrid>();
        learned.table = std::make_shared<const PolicyTable>(j.at("policy").get<PolicyTable>());
        spec = std::move(learned);
    } else {
        throw std::invalid_argument("unknown policy kind '" + kind + "'");
    }
    validate_policy(spec);
    return spec;
}

Json policy_to_json(const PolicySpec& spec) {
    Json j;
    j["kind"] = policy_kind(spec);
    if (const auto* p = std::get_if<PriceMinPolicy>(&spec)) {
        j["T"] = p->threshold;
    } else if (const auto* q = std::get_if<QThresholdPolicy>(&spec)) {
        j["Tp"] = q->thresholdPrice;
        j["d"] = q->d;
        j["variant"] = variant_name(q->variant);
    } else if (const auto* a = std::get_if<ArbPolicy>(&spec)) {
        j["ap"] = a->ap;
        j["e"] = a->e;
        j["ut"] = a->ut;
    } else if (const auto* l = std::get_if<LearnedPolicy>(&spec)) {
        j["grid"] = l->grid;
        j["policy"] = *l->table;
    }
    return j;
}

void write_policy_csv(std::ostream& out, const PolicyTable& table) {
    out << "queue";
    for (std::size_t p = 0; p < table.num_prices(); ++p) {
        out << ",p" << p;
    }
    out << '\n';
    for (std::size_t q = 0; q <= table.max_queue(); ++q) {
        out << q;
        for (std::size_t p = 0; p < table.num_prices(); ++p) {
            out << ',' << table.at(q, p);
        }
        out << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
    out << "binStart,binEnd,count\n";
    for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
        out << format_number(histogram.binEdges[k]) << ',' << format_number(histogram.binEdges[k + 1]) << ','
            << histogram.counts[k] << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const ParetoFrontier& frontier) {
    std::vector<bool> onFrontier(rows.size(), false);
    for (const auto index : frontier.members) {
        onFrontier[index] = true;
    }
    out << "index";
    if (!rows.empty()) {
        for (const auto& [name, value] : rows.front().params) {
            out << ',' << name;
        }
    }
    out << ",publishingCost,delayCost,maxDelay,avgDelay,maxPostedInOneRound,maxQueueAfterPosting,rounds,"
           "batchesCreated,batchesPosted,finalQueueLen,onFrontier,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        out << i;
        for (const auto& [name, value] : row.params) {
            out << ',' << format_number(value);
        }
        if (row.report) {
            const auto& r = *row.report;
            out << ',' << format_number(r.publishingCost) << ',' << format_number(r.delayCost) << ',' << r.maxDelay
                << ',' << format_number(r.avgDelay) << ',' << r.maxPostedInOneRound << ','
                << r.maxQueueAfterPosting << ',' << r.rounds << ',' << r.batchesCreated << ',' << r.batchesPosted
                << ',' << r.finalQueueLen;
        } else {
            out << ",,,,,,,,,,";
        }
        std::string error = row.error;
        for (auto& ch : error) {
            if (ch == ',' || ch == '\n') {
                ch = ';';
            }
        }
        out << ',' << (onFrontier[i] ? 1 : 0) << ',' << error << '\n';
    }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "round,price,queueBefore,nPost,postingCost,delayCost\n";
    for (const auto& row : trace) {
        out << row.round << ',' << format_number(row.price) << ',' << row.queueBefore << ',' << row.nPost << ','
            << format_number(row.postingCost) << ',' << format_number(row.delayCost) << '\n';
    }
}

}  // namespace batchpost
