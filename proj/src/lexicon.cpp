#include <fstream>

#include "forge/deps.hpp"
#include "forge/error.hpp"

namespace forge {

namespace {

std::string_view agg_key(Agg a) { return agg_name(a); }

std::string_view op_key(CmpOp op) {
    switch (op) {
        case CmpOp::Gt: return "GT";
        case CmpOp::Lt: return "LT";
        case CmpOp::Neq: return "NEQ";
        default: return "";
    }
}

}  // namespace

const TriggerLexicon& TriggerLexicon::builtin() {
    static const TriggerLexicon lex = [] {
        TriggerLexicon l;
        l.agg[Agg::Max] = {"highest", "largest", "most",    "maximum", "biggest",
                           "greatest", "oldest", "tallest", "top"};
        l.agg[Agg::Min] = {"lowest", "smallest", "least", "minimum", "youngest", "shortest"};
        l.agg[Agg::Count] = {"number of", "how many", "count"};
        l.agg[Agg::Avg] = {"average", "mean"};
        l.agg[Agg::Sum] = {"total", "sum"};
        l.op[CmpOp::Gt] = {"more than", "greater than", "over", "above", "after"};
        l.op[CmpOp::Lt] = {"less than", "fewer than", "under", "below", "before"};
        l.op[CmpOp::Neq] = {"not", "other than", "besides"};
        l.order[OrderDir::Asc] = {"ascending", "alphabetical", "increasing"};
        l.order[OrderDir::Desc] = {"descending", "decreasing", "reverse"};
        return l;
    }();
    return lex;
}

TriggerLexicon TriggerLexicon::from_json(const nlohmann::json& doc) {
    TriggerLexicon l;
    try {
        auto read = [](const nlohmann::json& obj, auto key_parse, auto& out) {
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                std::vector<std::string> phrases;
                for (const auto& p : it.value()) phrases.push_back(p.get<std::string>());
                out[key_parse(it.key())] = std::move(phrases);
            }
        };
        read(doc.at("aggregations"), [](const std::string& k) {
            for (Agg a : {Agg::Max, Agg::Min, Agg::Count, Agg::Avg, Agg::Sum}) {
                if (agg_key(a) == k) return a;
            }
            throw Error("lexicon: unknown aggregation key '" + k + "'");
        }, l.agg);
        read(doc.at("operators"), [](const std::string& k) {
            for (CmpOp op : {CmpOp::Gt, CmpOp::Lt, CmpOp::Neq}) {
                if (op_key(op) == k) return op;
            }
            throw Error("lexicon: unknown operator key '" + k + "'");
        }, l.op);
        read(doc.at("orders"), [](const std::string& k) {
            if (k == "ASC") return OrderDir::Asc;
            if (k == "DESC") return OrderDir::Desc;
            throw Error("lexicon: unknown order key '" + k + "'");
        }, l.order);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed lexicon document: ") + e.what());
    }
    return l;
}

TriggerLexicon TriggerLexicon::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open lexicon file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("lexicon file '" + path + "': " + e.what());
    }
    return from_json(doc);
}

nlohmann::ordered_json TriggerLexicon::to_json() const {
    nlohmann::ordered_json doc;
    doc["version"] = 1;
    auto& aggs = doc["aggregations"] = nlohmann::ordered_json::object();
    for (Agg a : {Agg::Max, Agg::Min, Agg::Count, Agg::Avg, Agg::Sum}) {
        if (auto it = agg.find(a); it != agg.end()) aggs[std::string(agg_key(a))] = it->second;
    }
    auto& ops = doc["operators"] = nlohmann::ordered_json::object();
    for (CmpOp o : {CmpOp::Gt, CmpOp::Lt, CmpOp::Neq}) {
        if (auto it = op.find(o); it != op.end()) ops[std::string(op_key(o))] = it->second;
    }
    auto& ord = doc["orders"] = nlohmann::ordered_json::object();
    if (auto it = order.find(OrderDir::Asc); it != order.end()) ord["ASC"] = it->second;
    if (auto it = order.find(OrderDir::Desc); it != order.end()) ord["DESC"] = it->second;
    return doc;
}

}  // namespace forge
