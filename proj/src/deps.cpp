#include <algorithm>
#include <array>

#include "forge/deps.hpp"
#include "forge/error.hpp"

namespace forge {

namespace {

constexpr std::array<std::string_view, kDependencyTypeCount> kTypeNames = {
    "None",
    "SELECT-Mention",
    "SELECT-Agg",
    "JOIN-Mention",
    "WHERE-Mention",
    "WHERE-Op",
    "WHERE-Value",
    "GROUP-BY-Mention",
    "GROUP-BY-Agg",
    "HAVING-Mention",
    "HAVING-Agg",
    "HAVING-Op",
    "HAVING-Value",
    "ORDER-BY-Mention",
    "ORDER-BY-Agg",
    "ORDER-BY-Order",
    "LIMIT-Value",
};

}  // namespace

std::string_view dependency_type_name(DependencyType t) {
    return kTypeNames[static_cast<std::size_t>(t)];
}

DependencyType dependency_type_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
        if (kTypeNames[i] == name) return static_cast<DependencyType>(i);
    }
    throw Error("unknown dependency type '" + std::string(name) + "'");
}

void DependencyGraph::add(const DependencyEdge& e) {
    for (const DependencyEdge& have : edges) {
        if (have.head == e.head && have.span == e.span && have.label == e.label) return;
    }
    edges.push_back(e);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t subst = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, subst});
        }
    }
    return row[b.size()];
}

std::optional<NgramMatch> ngram_match(const Question& question, std::string_view phrase,
                                      double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ContractViolation("ngram_match: tau outside [0,1]");
    const std::string target = normalize_phrase(phrase);
    if (target.empty()) return std::nullopt;
    const std::size_t phrase_tokens = tokenize(target).size();
    const std::size_t max_window = phrase_tokens + 2;
    const std::size_t n = question.tokens.size();

    std::optional<NgramMatch> best;
    for (std::size_t start = 0; start < n; ++start) {
        std::string window;
        for (std::size_t len = 1; len <= max_window && start + len <= n; ++len) {
            if (len > 1) window += ' ';
            window += question.tokens[start + len - 1];
            const std::size_t denom = std::max(window.size(), target.size());
            const double dist = static_cast<double>(levenshtein(window, target)) / denom;
            if (!best || dist < best->distance ||
                (dist == best->distance && len > best->span.size())) {
                best = NgramMatch{{start, start + len}, dist};
            }
        }
    }
    if (best && best->distance <= tau) return best;
    return std::nullopt;
}

std::vector<MentionRecord> extract_mentions(const SqlAst& ast) {
    std::vector<MentionRecord> out;
    auto walk = [&out](const SqlAst& q, auto&& self) -> void {
        for (const SelectItem& it : q.select_items) {
            if (it.star) continue;  // * and COUNT(*) mention no column
            MentionRecord r;
            r.column = it.column;
            r.clause = Clause::Select;
            r.agg = it.agg;
            out.push_back(std::move(r));
        }
        for (const Join& j : q.joins) {
            for (const ColumnRef* col : {&j.left, &j.right}) {
                MentionRecord r;
                r.column = *col;
                r.clause = Clause::Join;
                out.push_back(std::move(r));
            }
        }
        auto conditions = [&](const std::vector<Condition>& conds, Clause clause,
                              const SqlAst& scope) {
            for (const Condition& c : conds) {
                MentionRecord r;
                r.clause = clause;
                r.agg = c.agg;
                r.op = c.op;
                if (c.star) {
                    // COUNT(*) has no column of its own; anchor the record
                    // to the first grouped column so the edge has a head.
                    r.column = scope.group_by.at(0).column;
                } else {
                    r.column = c.column;
                }
                if (c.subquery) {
                    out.push_back(std::move(r));
                    self(*c.subquery, self);
                    continue;
                }
                r.values.push_back(c.value);
                if (c.op == CmpOp::Between) r.values.push_back(c.value2);
                out.push_back(std::move(r));
            }
        };
        conditions(q.where, Clause::Where, q);
        for (const GroupItem& g : q.group_by) {
            MentionRecord r;
            r.column = g.column;
            r.clause = Clause::GroupBy;
            r.agg = g.agg;
            out.push_back(std::move(r));
        }
        conditions(q.having, Clause::Having, q);
        if (q.order_by) {
            MentionRecord r;
            r.column = q.order_by->column;
            r.clause = Clause::OrderBy;
            r.agg = q.order_by->agg;
            r.dir = q.order_by->dir;
            out.push_back(std::move(r));
        }
        if (q.limit) {
            MentionRecord r;
            r.has_column = false;
            r.clause = Clause::Limit;
            r.values.push_back(Literal::number(std::to_string(*q.limit)));
            out.push_back(std::move(r));
        }
    };
    walk(ast, walk);
    return out;
}

DependencyType classify_mention(const MentionRecord& record, SpanKind kind) {
    const bool agg = record.agg != Agg::None;
    switch (record.clause) {
        case Clause::Select:
            if (kind == SpanKind::Name) return DependencyType::SelectMention;
            if (kind == SpanKind::AggTrigger && agg) return DependencyType::SelectAgg;
            break;
        case Clause::Join:
            if (kind == SpanKind::Name) return DependencyType::JoinMention;
            break;
        case Clause::Where:
            if (kind == SpanKind::Name) return DependencyType::WhereMention;
            if (kind == SpanKind::OpTrigger && record.op) return DependencyType::WhereOp;
            if (kind == SpanKind::Value) return DependencyType::WhereValue;
            break;
        case Clause::GroupBy:
            if (kind == SpanKind::Name) return DependencyType::GroupByMention;
            if (kind == SpanKind::AggTrigger && agg) return DependencyType::GroupByAgg;
            break;
        case Clause::Having:
            if (kind == SpanKind::Name) return DependencyType::HavingMention;
            if (kind == SpanKind::AggTrigger && agg) return DependencyType::HavingAgg;
            if (kind == SpanKind::OpTrigger && record.op) return DependencyType::HavingOp;
            if (kind == SpanKind::Value) return DependencyType::HavingValue;
            break;
        case Clause::OrderBy:
            if (kind == SpanKind::Name) return DependencyType::OrderByMention;
            if (kind == SpanKind::AggTrigger && agg) return DependencyType::OrderByAgg;
            if (kind == SpanKind::OrderTrigger && record.dir) return DependencyType::OrderByOrder;
            break;
        case Clause::Limit:
            if (kind == SpanKind::Value && !record.has_column) return DependencyType::LimitValue;
            break;
    }
    throw ContractViolation("classify_mention: span kind incompatible with mention record");
}

namespace {

// Best match across several candidate phrases; ties prefer smaller
// distance, longer window, leftmost start, then earlier phrase. The
// winner is chosen before the tau gate is applied so that raising tau
// can only add matches, never swap an existing one.
std::optional<NgramMatch> best_phrase_match(const Question& q,
                                            const std::vector<std::string>& phrases, double tau) {
    std::optional<NgramMatch> best;
    for (const std::string& p : phrases) {
        auto m = ngram_match(q, p, 1.0);
        if (!m) continue;
        if (!best || m->distance < best->distance ||
            (m->distance == best->distance &&
             (m->span.size() > best->span.size() ||
              (m->span.size() == best->span.size() && m->span.begin < best->span.begin)))) {
            best = m;
        }
    }
    if (best && best->distance <= tau && best->distance < 1.0) return best;
    return std::nullopt;
}

// Pull a leading article into a trigger span ("highest" -> "the highest").
Span absorb_article(const Question& q, Span s) {
    if (s.begin > 0) {
        const std::string& prev = q.tokens[s.begin - 1];
        if (prev == "the" || prev == "a" || prev == "an") s.begin -= 1;
    }
    return s;
}

bool value_in_pool(const Schema& schema, const MentionRecord& record, const Literal& lit) {
    if (!record.has_column) return false;
    const Column& col = schema.column(record.column.id);
    const std::string want = to_lower(lit.text);
    for (const std::string& v : col.values) {
        if (to_lower(v) == want) return true;
    }
    return false;
}

}  // namespace

DependencyGraph derive_dependencies(const Question& question, const SqlAst& ast,
                                    const Schema& schema, double tau,
                                    const TriggerLexicon& lexicon, LabelStats* stats) {
    DependencyGraph graph;
    auto note = [&stats](bool matched) {
        if (!stats) return;
        stats->targets += 1;
        if (matched) stats->matched += 1;
    };

    for (const MentionRecord& record : extract_mentions(ast)) {
        const DepHead head = record.has_column ? DepHead::col(record.column.id) : DepHead::limit();

        if (record.has_column) {
            // Column name, falling back to the table-qualified variant.
            std::vector<std::string> phrases = {record.column.column_name,
                                                record.column.table_name + " " +
                                                    record.column.column_name};
            auto m = best_phrase_match(question, phrases, tau);
            if (m) graph.add({head, m->span, classify_mention(record, SpanKind::Name),
                              1.0 - m->distance});
            note(m.has_value());
        }

        if (record.agg != Agg::None && record.clause != Clause::Limit) {
            if (auto it = lexicon.agg.find(record.agg); it != lexicon.agg.end()) {
                auto m = best_phrase_match(question, it->second, tau);
                if (m) graph.add({head, absorb_article(question, m->span),
                                  classify_mention(record, SpanKind::AggTrigger),
                                  1.0 - m->distance});
                note(m.has_value());
            }
        }

        if (record.op) {
            if (auto it = lexicon.op.find(*record.op); it != lexicon.op.end()) {
                auto m = best_phrase_match(question, it->second, tau);
                if (m) graph.add({head, absorb_article(question, m->span),
                                  classify_mention(record, SpanKind::OpTrigger),
                                  1.0 - m->distance});
                note(m.has_value());
            }
        }

        if (record.dir) {
            if (auto it = lexicon.order.find(*record.dir); it != lexicon.order.end()) {
                auto m = best_phrase_match(question, it->second, tau);
                if (m) graph.add({head, absorb_article(question, m->span),
                                  classify_mention(record, SpanKind::OrderTrigger),
                                  1.0 - m->distance});
                note(m.has_value());
            }
        }

        for (const Literal& lit : record.values) {
            // Literals ground in the question only when exact, unless the
            // value came from the head column's own value pool, in which
            // case fuzzy matching up to tau is allowed.
            const double effective_tau = value_in_pool(schema, record, lit) ? tau : 0.0;
            auto m = ngram_match(question, lit.text, effective_tau);
            if (m && m->distance < 1.0)
                graph.add({head, m->span, classify_mention(record, SpanKind::Value),
                           1.0 - m->distance});
            note(m.has_value() && m->distance < 1.0);
        }
    }
    return graph;
}

}  // namespace forge
